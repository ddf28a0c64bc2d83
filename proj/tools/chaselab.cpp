#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chaselab/csv.hpp"
#include "chaselab/embeddings.hpp"
#include "chaselab/errors.hpp"
#include "chaselab/experiment.hpp"
#include "chaselab/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

std::optional<std::size_t> env_threads() {
  const char* v = std::getenv("CHASELAB_THREADS");
  if (!v || !*v) return std::nullopt;
  try {
    const long n = std::stol(v);
    if (n >= 1) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw chaselab::ConfigError("CHASELAB_THREADS must be a positive integer");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaselab: convex body chasing experiments on metric and normed spaces"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment config and write CSV reports");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> threads;
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (default: config 'out', else ./chaselab-out)");
  run->add_option("--threads", threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);

  auto* bound = app.add_subcommand("bound", "Transfer a lower bound: R(X) >= R(Y) / d_BM(X,Y)");
  double lower = 0.0;
  double distortion = 0.0;
  std::string source;
  bound->add_option("lower", lower, "Known lower bound R(Y)")->required();
  bound->add_option("distortion", distortion, "Upper bound on d_BM(X,Y)")->required();
  bound->add_option("--source", source, "Provenance note for the inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (bound->parsed()) {
    if (!(lower > 0.0) || !(distortion > 0.0)) {
      std::cerr << "error: bound needs positive <lower> and <distortion>\n" << bound->help();
      return kExitConfig;
    }
    const auto b = chaselab::bound_transfer(lower, distortion, source);
    std::cout << chaselab::csv::format_number(b.value) << '\n' << b.provenance << '\n';
    return 0;
  }

  try {
    if (!threads) threads = env_threads();
    if (threads) chaselab::set_thread_count(*threads);
    const auto config = chaselab::load_config(config_path, seed);
    std::filesystem::path dir = out_dir;
    if (dir.empty()) {
      const auto from_config = config.json.at("out").get<std::string>();
      if (from_config.empty()) {
        dir = "chaselab-out";
      } else {
        dir = from_config;
        if (dir.is_relative()) dir = std::filesystem::path(config_path).parent_path() / dir;
      }
    }
    const auto result = chaselab::run_experiment(config, dir);
    std::cout << "experiment " << config.json.at("experiment").get<std::string>() << " (config "
              << config.hash << ")\n";
    for (const auto& line : result.log) std::cout << "  " << line << '\n';
    for (const auto& f : result.files) std::cout << "  wrote " << f.string() << '\n';
    return 0;
  } catch (const chaselab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}
