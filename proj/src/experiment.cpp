#include "chaselab/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "chaselab/constructions.hpp"
#include "chaselab/csv.hpp"
#include "chaselab/dimension.hpp"
#include "chaselab/embeddings.hpp"
#include "chaselab/engine.hpp"
#include "chaselab/errors.hpp"
#include "chaselab/parallel.hpp"
#include "chaselab/random_instances.hpp"

namespace chaselab {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

namespace {

const std::vector<std::string> kFiniteSelectors{"greedy-nested", "greedy-projection"};
const std::vector<std::string> kNormedSelectors{"greedy-nested", "greedy-projection", "steiner"};

bool nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Reads one JSON object, records every accessed field (defaults included)
// into `out`, and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError("config field '" + (path_.empty() ? std::string("<root>") : path_) +
                        "' must be a JSON object");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("config field '" + at(key) + "' " + msg);
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::uint64_t uint(const std::string& key, std::optional<std::uint64_t> def,
                     std::uint64_t lo = 0,
                     std::uint64_t hi = std::numeric_limits<std::uint64_t>::max()) {
    const json* v = get(key);
    std::uint64_t x = 0;
    if (!v) {
      if (!def) fail(key, "is required");
      x = *def;
    } else {
      if (!nonnegative_integer(*v)) fail(key, "must be a nonnegative integer");
      x = v->get<std::uint64_t>();
    }
    if (x < lo || x > hi) {
      fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    out[key] = x;
    return x;
  }

  double number(const std::string& key, std::optional<double> def,
                const std::function<bool(double)>& ok, const std::string& rule) {
    const json* v = get(key);
    double x = 0.0;
    if (!v) {
      if (!def) fail(key, "is required");
      x = *def;
    } else {
      if (!v->is_number()) fail(key, "must be a number");
      x = v->get<double>();
    }
    if (!std::isfinite(x) || !ok(x)) fail(key, "must be " + rule);
    out[key] = x;
    return x;
  }

  // A norm exponent: a number >= 1 or the string "inf".
  double norm_p(const std::string& key, std::optional<double> def) {
    const json* v = get(key);
    double x = 0.0;
    if (!v) {
      if (!def) fail(key, "is required");
      x = *def;
    } else if (v->is_string() && v->get<std::string>() == "inf") {
      x = kInf;
    } else if (v->is_number()) {
      x = v->get<double>();
    } else {
      fail(key, "must be a number >= 1 or \"inf\"");
    }
    if (!(x >= 1.0)) fail(key, "must be a number >= 1 or \"inf\"");
    if (std::isinf(x)) {
      out[key] = "inf";
    } else {
      out[key] = x;
    }
    return x;
  }

  std::string choice(const std::string& key, std::optional<std::string> def,
                     const std::vector<std::string>& allowed) {
    const json* v = get(key);
    std::string x;
    if (!v) {
      if (!def) fail(key, "is required");
      x = *def;
    } else {
      if (!v->is_string()) fail(key, "must be a string");
      x = v->get<std::string>();
    }
    if (std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "must be one of: " + list);
    }
    out[key] = x;
    return x;
  }

  std::string text(const std::string& key, const std::string& def) {
    const json* v = get(key);
    std::string x = def;
    if (v) {
      if (!v->is_string()) fail(key, "must be a string");
      x = v->get<std::string>();
    }
    out[key] = x;
    return x;
  }

  bool flag(const std::string& key, bool def) {
    const json* v = get(key);
    bool x = def;
    if (v) {
      if (!v->is_boolean()) fail(key, "must be true or false");
      x = v->get<bool>();
    }
    out[key] = x;
    return x;
  }

  std::string file(const std::string& key, const fs::path& base) {
    const json* v = get(key);
    if (!v) fail(key, "is required");
    if (!v->is_string()) fail(key, "must be a file path");
    fs::path p = v->get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::is_regular_file(p)) fail(key, "names a missing file: " + p.string());
    out[key] = p.lexically_normal().string();
    return out[key].get<std::string>();
  }

  std::vector<std::uint64_t> uint_list(const std::string& key,
                                       std::optional<std::vector<std::uint64_t>> def,
                                       std::uint64_t lo, std::uint64_t hi) {
    const json* v = get(key);
    std::vector<std::uint64_t> xs;
    if (!v) {
      if (!def) fail(key, "is required");
      xs = *def;
    } else {
      if (!v->is_array() || v->empty()) fail(key, "must be a nonempty array of integers");
      for (const auto& e : *v) {
        if (!nonnegative_integer(e)) fail(key, "must be a nonempty array of integers");
        xs.push_back(e.get<std::uint64_t>());
      }
    }
    for (auto x : xs) {
      if (x < lo || x > hi) {
        fail(key, "entries must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
    out[key] = xs;
    return xs;
  }

  std::vector<double> positive_list(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(key, "is required");
    if (!v->is_array() || v->empty()) fail(key, "must be a nonempty array of numbers");
    std::vector<double> xs;
    for (const auto& e : *v) {
      if (!e.is_number() || !(e.get<double>() > 0.0) || !std::isfinite(e.get<double>())) {
        fail(key, "entries must be positive numbers");
      }
      xs.push_back(e.get<double>());
    }
    out[key] = xs;
    return xs;
  }

  std::vector<std::string> choice_list(const std::string& key, std::vector<std::string> def,
                                       const std::vector<std::string>& allowed) {
    const json* v = get(key);
    std::vector<std::string> xs = std::move(def);
    if (v) {
      xs.clear();
      if (!v->is_array() || v->empty()) fail(key, "must be a nonempty array of names");
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "must be a nonempty array of names");
        xs.push_back(e.get<std::string>());
      }
    }
    for (const auto& x : xs) {
      if (std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
        fail(key, "has unknown entry '" + x + "'");
      }
    }
    out[key] = xs;
    return xs;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown config key '" + at(item.key()) + "'");
      }
    }
  }

  json out = json::object();

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const auto kPositive = [](double x) { return x > 0.0; };
const auto kAboveOne = [](double x) { return x > 1.0; };

void resolve_levels(Fields& f, std::uint64_t N_max) {
  const json* v = f.get("levels");
  json levels = json::array();
  if (!v || v->is_null()) {
    for (const auto& l : default_phase1_levels(N_max)) levels.push_back({{"k", l.k}, {"D", l.D}});
  } else {
    if (!v->is_array() || v->size() != N_max) {
      f.fail("levels", "must be an array with N_max entries");
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      Fields lf((*v)[i], f.at("levels[" + std::to_string(i) + "]"));
      lf.uint("k", 2, 1, 6);
      lf.uint("D", std::max<std::uint64_t>(i + 1, 2), 2, 64);
      lf.finish();
      levels.push_back(lf.out);
    }
  }
  f.out["levels"] = levels;
}

void resolve_phase2_fields(Fields& f) {
  f.uint("m", 2, 1, 6);
  f.norm_p("p", 2.0);
  f.number("lattice_step", 0.25, kPositive, "> 0");
  f.number("r", 1.0, kPositive, "> 0");
}

json resolve_space(const json& raw, const std::string& path, const fs::path& base) {
  Fields f(raw, path);
  const auto type = f.choice("type", std::nullopt,
                             {"theorem2", "grid", "matrix", "coordinates", "glue", "phase1",
                              "phase2", "lattice"});
  if (type == "theorem2") {
    f.uint("k", 2, 1, 20);
    f.uint("D", 3, 2, 1u << 20);
    f.number("gamma", 2.0, kAboveOne, "> 1");
  } else if (type == "grid") {
    f.uint("k", 2, 1, 8);
    f.uint("side", 8, 1, 4096);
    f.norm_p("p", kInf);
  } else if (type == "matrix") {
    f.file("path", base);
  } else if (type == "coordinates") {
    f.file("path", base);
    f.norm_p("p", 2.0);
  } else if (type == "glue") {
    const json* parts = f.get("parts");
    if (!parts || !parts->is_array() || parts->size() != 2) {
      f.fail("parts", "must be an array of two space objects");
    }
    json resolved = json::array();
    for (std::size_t i = 0; i < 2; ++i) {
      resolved.push_back(resolve_space((*parts)[i], f.at("parts[" + std::to_string(i) + "]"), base));
    }
    f.out["parts"] = resolved;
    f.number("gamma", 2.0, kAboveOne, "> 1");
  } else if (type == "phase1" || type == "phase2") {
    f.number("gamma", 2.0, kAboveOne, "> 1");
    const auto N = f.uint("N_max", 2, 1, 8);
    resolve_levels(f, N);
    if (type == "phase2") resolve_phase2_fields(f);
  } else {
    resolve_phase2_fields(f);
  }
  f.finish();
  return f.out;
}

double p_of(const json& v) {
  if (v.is_string()) return kInf;
  return v.get<double>();
}

std::vector<LevelParams> levels_of(const json& arr) {
  std::vector<LevelParams> out;
  for (const auto& l : arr) out.push_back({l.at("k").get<std::size_t>(), l.at("D").get<std::size_t>()});
  return out;
}

std::shared_ptr<MetricSpace> make_grid(std::size_t k, std::size_t side, double p) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (total > 100000 / side) throw CapacityExceeded("grid has more than 10^5 points");
    total *= side;
  }
  std::vector<std::vector<double>> coords(total, std::vector<double>(k));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (std::size_t c = k; c-- > 0;) {
      coords[i][c] = static_cast<double>(rest % side);
      rest /= side;
    }
    std::string id = "g(";
    for (std::size_t c = 0; c < k; ++c) {
      if (c > 0) id += ' ';
      id += std::to_string(static_cast<std::size_t>(coords[i][c]));
    }
    ids.push_back(id + ")");
  }
  auto shared = std::make_shared<std::vector<std::vector<double>>>(std::move(coords));
  return std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::lazy(
      std::move(ids), [shared, p](PointId a, PointId b) {
        return lp_distance((*shared)[a], (*shared)[b], p);
      }));
}

std::shared_ptr<MetricSpace> make_lattice_space(const std::vector<Vector>& pts, double p) {
  std::vector<std::string> ids;
  for (const auto& y : pts) ids.push_back(format_vector(y));
  auto shared = std::make_shared<std::vector<Vector>>(pts);
  return std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::lazy(
      std::move(ids), [shared, p](PointId a, PointId b) {
        const auto& u = (*shared)[a];
        const auto& v = (*shared)[b];
        return lp_distance(std::span<const double>(u.data(), u.size()),
                           std::span<const double>(v.data(), v.size()), p);
      }));
}

std::shared_ptr<MetricSpace> build_space(const json& s) {
  const auto type = s.at("type").get<std::string>();
  if (type == "theorem2") {
    return std::make_shared<Theorem2Space>(s.at("k").get<std::size_t>(),
                                           s.at("D").get<std::size_t>(),
                                           s.at("gamma").get<double>(), SpaceMode::explicit_matrix);
  }
  if (type == "grid") {
    return make_grid(s.at("k").get<std::size_t>(), s.at("side").get<std::size_t>(), p_of(s.at("p")));
  }
  if (type == "matrix" || type == "coordinates") {
    std::ifstream in(s.at("path").get<std::string>(), std::ios::binary);
    if (!in) throw MalformedInput("cannot open " + s.at("path").get<std::string>());
    if (type == "matrix") return std::make_shared<FiniteMetricSpace>(read_distance_matrix(in));
    return std::make_shared<FiniteMetricSpace>(read_coordinates(in, p_of(s.at("p"))));
  }
  if (type == "glue") {
    return std::make_shared<GluedSpace>(glue_pair(build_space(s.at("parts")[0]),
                                                  build_space(s.at("parts")[1]),
                                                  s.at("gamma").get<double>()));
  }
  if (type == "phase1" || type == "phase2") {
    auto phase1 = build_phase1_space(s.at("gamma").get<double>(), levels_of(s.at("levels")));
    if (type == "phase1") return std::make_shared<GluedSpace>(phase1.space);
    return std::make_shared<GluedSpace>(
        build_phase2_space(phase1, s.at("m").get<std::size_t>(), p_of(s.at("p")),
                           s.at("lattice_step").get<double>(), s.at("r").get<double>()));
  }
  const double p = p_of(s.at("p"));
  return make_lattice_space(lattice_in_ball(s.at("m").get<std::size_t>(), p,
                                            s.at("lattice_step").get<double>(),
                                            s.at("r").get<double>()),
                            p);
}

json resolve_embedding(const json& raw, const std::string& path, const fs::path& base) {
  Fields f(raw, path);
  const auto kind = f.choice("kind", std::nullopt, {"scaling", "lp-identity", "linear-matrix"});
  if (kind == "scaling") {
    f.number("c", 2.0, kPositive, "> 0");
    f.norm_p("p", kInf);
  } else if (kind == "lp-identity") {
    const double p = f.norm_p("p", 2.0);
    const double q = f.norm_p("q", kInf);
    if (p > q) f.fail("q", "must be >= p (set invert to flip the direction)");
    f.flag("invert", false);
  } else {
    f.file("path", base);
    f.norm_p("p", 2.0);
    f.norm_p("q", 2.0);
    f.number("lip_f", std::nullopt, kPositive, "> 0");
    f.number("lip_finv", std::nullopt, kPositive, "> 0");
  }
  f.finish();
  return f.out;
}

Embedding build_embedding(const json& e, std::size_t d) {
  const auto kind = e.at("kind").get<std::string>();
  if (kind == "scaling") return make_scaling(d, p_of(e.at("p")), e.at("c").get<double>());
  if (kind == "lp-identity") {
    auto f = make_lp_identity(d, p_of(e.at("p")), p_of(e.at("q")));
    return e.at("invert").get<bool>() ? f.inverted() : f;
  }
  std::ifstream in(e.at("path").get<std::string>(), std::ios::binary);
  if (!in) throw MalformedInput("cannot open " + e.at("path").get<std::string>());
  return Embedding(read_matrix_csv(in), NormedSpace(d, p_of(e.at("p"))),
                   NormedSpace(d, p_of(e.at("q"))), e.at("lip_f").get<double>(),
                   e.at("lip_finv").get<double>(), EmbeddingKind::linear_matrix);
}

}  // namespace

ResolvedConfig resolve_config(const json& raw, const fs::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  Fields f(raw, "");
  const auto kind = f.choice("experiment", std::nullopt,
                             {"dim", "chase", "fl-sweep", "thm2-sweep", "phase1", "transfer",
                              "bound-calc", "net"});
  f.uint("seed", 1);
  if (seed_override) f.out["seed"] = *seed_override;
  f.text("description", "");
  f.text("out", "");

  if (kind == "dim") {
    const json* s = f.get("space");
    if (!s) f.fail("space", "is required");
    f.out["space"] = resolve_space(*s, "space", base_dir);
    f.number("gamma", 2.0, kAboveOne, "> 1");
    f.flag("assouad", true);
    f.uint("assouad_max_points", 300, 1, 100000);
    f.uint("exact_threshold", 20, 0, 64);
  } else if (kind == "chase") {
    const auto arena = f.choice("arena", std::nullopt, {"theorem2", "fl", "random-nested"});
    f.uint("request_budget", kDefaultRequestBudget, 1, 10000000);
    if (arena == "theorem2") {
      f.uint("k", 2, 1, 6);
      f.uint("D", 3, 2, 64);
      f.number("gamma", 2.0, kAboveOne, "> 1");
      f.uint("start", 0);
      f.choice_list("selectors", kFiniteSelectors, kFiniteSelectors);
    } else if (arena == "fl") {
      f.uint("d", 4, 1, 64);
      f.norm_p("p", kInf);
      f.uint("samples", 2000, 1, 10000000);
      f.choice_list("selectors", kNormedSelectors, kNormedSelectors);
    } else {
      f.uint("instances", 100, 1, 1000000);
      f.uint("max_points", 50, 2, 2000);
      f.uint("max_requests", 10, 1, 1000);
      f.choice("weights", "continuous", {"continuous", "integer"});
      f.choice("adversary", "evicting", {"evicting", "scripted"});
      f.choice_list("selectors", {"greedy-nested"}, kFiniteSelectors);
    }
  } else if (kind == "fl-sweep") {
    f.uint_list("d", std::vector<std::uint64_t>{2, 3, 4, 5, 6, 7, 8}, 1, 64);
    f.norm_p("p", kInf);
    f.uint("samples", 2000, 1, 10000000);
    f.uint("request_budget", kDefaultRequestBudget, 1, 10000000);
    f.choice_list("selectors", kNormedSelectors, kNormedSelectors);
  } else if (kind == "thm2-sweep") {
    f.uint("k", 2, 1, 6);
    f.uint_list("D", std::vector<std::uint64_t>{3, 4, 5}, 2, 64);
    f.number("gamma", 2.0, kAboveOne, "> 1");
    f.uint("request_budget", kDefaultRequestBudget, 1, 10000000);
    f.choice_list("selectors", kFiniteSelectors, kFiniteSelectors);
  } else if (kind == "phase1") {
    f.number("gamma", 2.0, kAboveOne, "> 1");
    const auto N = f.uint("N_max", 3, 1, 8);
    resolve_levels(f, N);
    f.uint("request_budget", kDefaultRequestBudget, 1, 10000000);
    f.choice_list("selectors", kFiniteSelectors, kFiniteSelectors);
    const json* p2 = f.get("phase2");
    if (p2 && !p2->is_null()) {
      Fields pf(*p2, "phase2");
      resolve_phase2_fields(pf);
      pf.finish();
      f.out["phase2"] = pf.out;
    } else {
      f.out["phase2"] = nullptr;
    }
  } else if (kind == "transfer") {
    f.uint("d", 4, 1, 16);
    const json* e = f.get("embedding");
    if (!e) f.fail("embedding", "is required");
    f.out["embedding"] = resolve_embedding(*e, "embedding", base_dir);
    f.choice("selector", "greedy-projection", kNormedSelectors);
    f.uint("samples", 2000, 1, 10000000);
    f.choice("adversary", "random-boxes", {"random-boxes", "fl"});
    f.uint("instances", 100, 1, 1000000);
    f.uint("max_requests", 8, 1, 1000);
    f.uint("request_budget", kDefaultRequestBudget, 1, 10000000);
  } else if (kind == "bound-calc") {
    const json* d = f.get("d");
    if (d) {
      f.positive_list("d");
      f.text("source", "d_BM(l_inf^d, Y) <= 2 d^(5/6)");
    } else {
      f.number("lower", std::nullopt, kPositive, "> 0");
      f.number("distortion", std::nullopt, kPositive, "> 0");
      f.text("source", "");
    }
  } else {
    const json* s = f.get("space");
    if (!s) f.fail("space", "is required");
    f.out["space"] = resolve_space(*s, "space", base_dir);
    f.number("eps", std::nullopt, kPositive, "> 0");
  }
  f.finish();

  ResolvedConfig rc;
  rc.json = f.out;
  json hashed = rc.json;
  hashed.erase("out");
  rc.hash = fnv1a_hex(hashed.dump());
  return rc;
}

ResolvedConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return resolve_config(raw, path.parent_path(), seed_override);
}

namespace {

std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + index + 1;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string num(double v) { return csv::format_number(v); }
std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "degenerate"; }
std::string pass(bool ok) { return ok ? "pass" : "fail"; }
std::string p_text(double p) { return std::isinf(p) ? "inf" : num(p); }

class Output {
 public:
  Output(fs::path dir, std::string hash, ExperimentOutput& result)
      : dir_(std::move(dir)), hash_(std::move(hash)), result_(result) {}

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ChaseError("cannot write " + p.string());
    result_.files.push_back(p);
    return out;
  }

  void table(const std::string& name, std::vector<std::string> header,
             const std::vector<std::vector<std::string>>& rows) {
    auto out = open(name);
    csv::Writer w(out);
    header.push_back("config_hash");
    w.row(header);
    for (auto row : rows) {
      row.push_back(hash_);
      w.row(row);
    }
  }

  const std::string& hash() const { return hash_; }
  void log(std::string line) { result_.log.push_back(std::move(line)); }

 private:
  fs::path dir_;
  std::string hash_;
  ExperimentOutput& result_;
};

double fl_floor(std::size_t d, double p) {
  const double dd = static_cast<double>(d);
  return std::isinf(p) ? dd : std::pow(dd, 1.0 - 1.0 / p);
}

// Theorem 2 floor for the way the game ended: (n-1)/(D-1) when the player
// stayed in P, R/(D-1) after a jump to Z.
double thm2_floor(const Theorem2Space& s, TerminationReason why) {
  const double spread = static_cast<double>(s.side() - 1);
  if (why == TerminationReason::player_escaped) return s.R() / spread;
  return static_cast<double>(s.n() - 1) / spread;
}

std::string thm2_label(std::size_t k, std::size_t D, const std::string& sel) {
  return "thm2 k=" + std::to_string(k) + " D=" + std::to_string(D) + " " + sel;
}

struct FiniteRun {
  std::shared_ptr<MetricSpace> space;
  FiniteTranscript transcript;
  std::string instance;
  std::optional<double> floor;
  std::optional<double> ceiling;
};

struct NormedRun {
  NormedTranscript transcript;
  std::string instance;
  std::optional<double> floor;
  std::optional<double> ceiling;
};

void write_finite_runs(Output& out, const std::vector<FiniteRun>& runs) {
  {
    auto f = out.open("transcripts.csv");
    bool header = true;
    for (const auto& r : runs) {
      write_transcript(f, *r.space, r.transcript, r.instance, out.hash(), header);
      header = false;
    }
  }
  std::vector<InstanceSummary> rows;
  for (const auto& r : runs) rows.push_back(summarize(r.instance, r.transcript, r.floor, r.ceiling));
  auto f = out.open("summary.csv");
  write_summary(f, rows, out.hash());
}

void write_normed_runs(Output& out, const std::vector<NormedRun>& runs) {
  {
    auto f = out.open("transcripts.csv");
    bool header = true;
    for (const auto& r : runs) {
      write_transcript(f, r.transcript, r.instance, out.hash(), header);
      header = false;
    }
  }
  std::vector<InstanceSummary> rows;
  for (const auto& r : runs) rows.push_back(summarize(r.instance, r.transcript, r.floor, r.ceiling));
  auto f = out.open("summary.csv");
  write_summary(f, rows, out.hash());
}

void log_report(Output& out, const std::vector<InstanceSummary>& rows) {
  try {
    const auto rep = competitive_report(rows);
    out.log("max ratio " + num(rep.max_ratio) + " at " + rows[rep.argmax].instance + "; " +
            std::to_string(rep.floor_violations) + " floor violations, " +
            std::to_string(rep.ceiling_violations) + " ceiling violations, " +
            std::to_string(rep.degenerate) + " degenerate");
  } catch (const InvalidArgument&) {
    out.log("every instance is degenerate");
  }
}

template <class Run>
std::vector<InstanceSummary> summaries(const std::vector<Run>& runs) {
  std::vector<InstanceSummary> rows;
  for (const auto& r : runs) rows.push_back(summarize(r.instance, r.transcript, r.floor, r.ceiling));
  return rows;
}

FiniteRun theorem2_run(std::size_t k, std::size_t D, double gamma, std::size_t start,
                       const std::string& sel, std::size_t budget) {
  auto space = std::make_shared<Theorem2Space>(k, D, gamma, SpaceMode::lazy);
  if (start >= space->n()) throw InvalidArgument("start must index a grid point");
  auto adversary = theorem2_adversary(*space);
  auto selector = make_finite_selector(sel);
  FiniteRun run;
  run.transcript = run_game(adversary, *selector, *space, start, budget);
  run.floor = thm2_floor(*space, run.transcript.termination);
  run.instance = thm2_label(k, D, sel);
  run.space = std::move(space);
  return run;
}

NormedRun fl_run(std::size_t d, double p, const std::string& sel, std::size_t samples,
                 std::uint64_t seed, std::size_t budget) {
  NormedSpace space(d, p);
  FLAdversary adversary(space);
  auto selector = make_normed_selector(sel, samples, seed);
  NormedRun run;
  run.transcript = run_game(adversary, *selector, space, Vector::Zero(static_cast<Eigen::Index>(d)),
                            budget);
  run.floor = fl_floor(d, p);
  run.instance = "fl d=" + std::to_string(d) + " p=" + p_text(p) + " " + sel;
  return run;
}

void run_dim(const json& c, Output& out) {
  auto space = build_space(c.at("space"));
  CoverOptions opts{c.at("exact_threshold").get<std::size_t>()};
  DimensionReport rep;
  rep.gamma_cover = gamma_cover_constant(*space, c.at("gamma").get<double>(), opts);
  if (c.at("assouad").get<bool>()) {
    if (space->size() <= c.at("assouad_max_points").get<std::size_t>()) {
      rep.assouad = assouad_estimate(*space, opts);
    } else {
      out.log("assouad estimate skipped: " + std::to_string(space->size()) +
              " points exceed assouad_max_points");
    }
  }
  auto f = out.open("dimension.csv");
  write_dimension_report(f, *space, rep, out.hash());
  const auto& g = rep.gamma_cover;
  out.log("lambda_gamma = " + std::to_string(g.lambda) + " (" + std::string(to_string(g.exactness)) +
          "), dim_gamma = " + num(g.dim) + ", witness " + space->name(g.witness_center) +
          " radius " + num(g.witness_radius));
  if (rep.assouad) out.log("assouad estimate " + num(rep.assouad->rho));
}

void run_chase(const json& c, Output& out) {
  const auto arena = c.at("arena").get<std::string>();
  const auto budget = c.at("request_budget").get<std::size_t>();
  const auto selectors = c.at("selectors").get<std::vector<std::string>>();
  const auto seed = c.at("seed").get<std::uint64_t>();
  if (arena == "theorem2") {
    std::vector<FiniteRun> runs(selectors.size());
    parallel_for(selectors.size(), [&](std::size_t i) {
      runs[i] = theorem2_run(c.at("k").get<std::size_t>(), c.at("D").get<std::size_t>(),
                             c.at("gamma").get<double>(), c.at("start").get<std::size_t>(),
                             selectors[i], budget);
    });
    write_finite_runs(out, runs);
    log_report(out, summaries(runs));
    return;
  }
  if (arena == "fl") {
    std::vector<NormedRun> runs(selectors.size());
    parallel_for(selectors.size(), [&](std::size_t i) {
      runs[i] = fl_run(c.at("d").get<std::size_t>(), p_of(c.at("p")), selectors[i],
                       c.at("samples").get<std::size_t>(), seed, budget);
    });
    write_normed_runs(out, runs);
    log_report(out, summaries(runs));
    return;
  }

  const auto instances = c.at("instances").get<std::size_t>();
  const auto max_points = c.at("max_points").get<std::size_t>();
  const auto max_requests = c.at("max_requests").get<std::size_t>();
  const bool integer = c.at("weights").get<std::string>() == "integer";
  const bool evicting = c.at("adversary").get<std::string>() == "evicting";
  // Ties (integer weights) need the closed ball for the eviction count.
  const Openness ball_kind = integer ? Openness::closed : Openness::open;
  std::vector<std::vector<FiniteRun>> per(instances);
  std::vector<std::size_t> points(instances);
  parallel_for(instances, [&](std::size_t i) {
    Rng rng(instance_seed(seed, i));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_points)(rng);
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, max_requests)(rng);
    auto space = std::make_shared<FiniteMetricSpace>(random_metric_space(n, 1.0, 2.0, integer, rng));
    const auto balls = random_nested_balls(*space, T, rng);
    const PointId x0 = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const std::uint64_t adversary_seed = rng();
    points[i] = n;
    for (const auto& sel : selectors) {
      std::unique_ptr<FiniteAdversary> adversary;
      if (evicting) {
        adversary = std::make_unique<EvictingNestedAdversary>(*space, T, adversary_seed);
      } else {
        adversary = std::make_unique<ScriptedFiniteAdversary>(balls);
      }
      auto selector = make_finite_selector(sel);
      FiniteRun run;
      run.transcript = run_game(*adversary, *selector, *space, x0, budget);
      if (sel == "greedy-nested" && run.transcript.moved_steps > 0) {
        run.ceiling = static_cast<double>(2 * run.transcript.moved_steps - 1);
      }
      run.instance = "nested#" + std::to_string(i) + " " + sel;
      run.space = space;
      per[i].push_back(std::move(run));
    }
  });
  std::vector<FiniteRun> runs;
  std::vector<std::vector<std::string>> rows;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    for (auto& r : per[i]) {
      const auto& t = r.transcript;
      if (t.selector == "greedy-nested") {
        const double T1 = static_cast<double>(t.moved_steps);
        const std::size_t ball = ball_members(*r.space, {t.start, t.opt, ball_kind}).count();
        const bool bound_ok = t.moved_steps == 0 ? t.cost == 0.0 : t.cost <= (2.0 * T1 - 1.0) * t.opt;
        const bool evict_ok = t.moved_steps <= ball;
        if (!bound_ok || !evict_ok) ++violations;
        rows.push_back({std::to_string(i), t.selector, std::to_string(points[i]),
                        std::to_string(t.requests.size()), std::to_string(t.moved_steps),
                        num(t.cost), num(t.opt),
                        t.moved_steps == 0 ? "0" : num((2.0 * T1 - 1.0) * t.opt), pass(bound_ok),
                        std::to_string(ball), pass(evict_ok)});
      }
      runs.push_back(std::move(r));
    }
  }
  write_finite_runs(out, runs);
  if (!rows.empty()) {
    out.table("theorem4.csv",
              {"instance", "selector", "points", "requests", "moved_steps", "cost", "opt",
               "bound", "bound_check", "start_ball_size", "eviction_check"},
              rows);
    out.log("greedy-nested bound checks: " + std::to_string(rows.size() - violations) + "/" +
            std::to_string(rows.size()) + " pass");
  }
  log_report(out, summaries(runs));
}

void run_fl_sweep(const json& c, Output& out) {
  const auto ds = c.at("d").get<std::vector<std::size_t>>();
  const auto selectors = c.at("selectors").get<std::vector<std::string>>();
  const double p = p_of(c.at("p"));
  std::vector<NormedRun> runs(ds.size() * selectors.size());
  parallel_for(runs.size(), [&](std::size_t i) {
    runs[i] = fl_run(ds[i / selectors.size()], p, selectors[i % selectors.size()],
                     c.at("samples").get<std::size_t>(), c.at("seed").get<std::uint64_t>(),
                     c.at("request_budget").get<std::size_t>());
  });
  write_normed_runs(out, runs);
  log_report(out, summaries(runs));
}

void run_thm2_sweep(const json& c, Output& out) {
  const auto Ds = c.at("D").get<std::vector<std::size_t>>();
  const auto selectors = c.at("selectors").get<std::vector<std::string>>();
  std::vector<FiniteRun> runs(Ds.size() * selectors.size());
  parallel_for(runs.size(), [&](std::size_t i) {
    runs[i] = theorem2_run(c.at("k").get<std::size_t>(), Ds[i / selectors.size()],
                           c.at("gamma").get<double>(), 0, selectors[i % selectors.size()],
                           c.at("request_budget").get<std::size_t>());
  });
  write_finite_runs(out, runs);
  log_report(out, summaries(runs));
}

void run_phase1(const json& c, Output& out) {
  const double gamma = c.at("gamma").get<double>();
  const auto levels = levels_of(c.at("levels"));
  const auto selectors = c.at("selectors").get<std::vector<std::string>>();
  const auto budget = c.at("request_budget").get<std::size_t>();
  const std::size_t jobs = levels.size() * selectors.size();
  std::vector<std::vector<std::string>> rows(jobs);
  parallel_for(jobs, [&](std::size_t i) {
    const std::size_t N = i / selectors.size() + 1;
    const auto& sel = selectors[i % selectors.size()];
    const auto& L = levels[N - 1];
    const FiniteRun alone = theorem2_run(L.k, L.D, gamma, 0, sel, budget);

    std::vector<LevelParams> prefix(levels.begin(), levels.begin() + static_cast<long>(N));
    auto phase1 = build_phase1_space(gamma, prefix);
    auto adversary = level_adversary(phase1, N);
    auto selector = make_finite_selector(sel);
    const PointId x0 = phase1.space.global_id(N - 1, 0);
    const auto glued = run_game(adversary, *selector, phase1.space, x0, budget);
    const bool metric_ok = validate_metric(phase1.space).ok();

    const auto& t2 = *phase1.parts[N - 1];
    const double floor = static_cast<double>(t2.n() - 1) / static_cast<double>(t2.side() - 1);
    const bool monotone = alone.transcript.ratio && glued.ratio && *glued.ratio >= *alone.transcript.ratio;
    const bool floor_ok = glued.ratio && *glued.ratio >= thm2_floor(t2, glued.termination);
    rows[i] = {std::to_string(N), std::to_string(L.k), std::to_string(L.D),
               std::to_string(t2.n()), num(phase1.level_radius[N - 1]), sel,
               num(alone.transcript.cost), num(alone.transcript.opt),
               opt_num(alone.transcript.ratio), num(glued.cost), num(glued.opt),
               opt_num(glued.ratio), pass(monotone), num(floor), pass(floor_ok),
               pass(metric_ok), std::to_string(phase1.space.size())};
  });
  out.table("phase1.csv",
            {"level", "k", "D", "n", "R_level", "selector", "cost_X", "opt_X", "ratio_X",
             "cost_Y", "opt_Y", "ratio_Y", "monotone_check", "floor", "floor_check",
             "metric_check", "materialized_points"},
            rows);
  std::size_t ok = 0;
  for (const auto& r : rows) ok += (r[12] == "pass" && r[14] == "pass" && r[15] == "pass");
  out.log("phase I rows passing every check: " + std::to_string(ok) + "/" + std::to_string(rows.size()));

  if (c.at("phase2").is_null()) return;
  const auto& p2 = c.at("phase2");
  auto phase1 = build_phase1_space(gamma, levels);
  const double p = p_of(p2.at("p"));
  const auto space = build_phase2_space(phase1, p2.at("m").get<std::size_t>(), p,
                                        p2.at("lattice_step").get<double>(), p2.at("r").get<double>());
  const bool metric_ok = validate_metric(space).ok();
  const auto& lattice = space.lattice()->points;
  const auto lattice_space = make_lattice_space(lattice, p);
  std::string rho;
  if (lattice.size() >= 2) rho = num(assouad_estimate(*lattice_space).rho);
  out.table("phase2.csv",
            {"points", "lattice_points", "m", "p", "lattice_step", "r", "R_1", "metric_check",
             "lattice_assouad_estimate"},
            {{std::to_string(space.size()), std::to_string(lattice.size()),
              std::to_string(p2.at("m").get<std::size_t>()), p_text(p),
              num(p2.at("lattice_step").get<double>()), num(p2.at("r").get<double>()),
              num(phase1.level_radius.front()), pass(metric_ok), rho}});
  out.log("phase II metric check: " + pass(metric_ok));
}

void run_transfer(const json& c, Output& out) {
  const auto d = c.at("d").get<std::size_t>();
  const Embedding f = build_embedding(c.at("embedding"), d);
  const bool fl = c.at("adversary").get<std::string>() == "fl";
  const std::size_t instances = fl ? 1 : c.at("instances").get<std::size_t>();
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto sel = c.at("selector").get<std::string>();
  const auto budget = c.at("request_budget").get<std::size_t>();
  const auto max_requests = c.at("max_requests").get<std::size_t>();
  constexpr double tol = 1e-9;

  struct Pair {
    NormedTranscript x;
    NormedTranscript y;
  };
  std::vector<Pair> pairs(instances);
  parallel_for(instances, [&](std::size_t i) {
    Rng rng(instance_seed(seed, i));
    auto selector = transfer_selector(
        f, make_normed_selector(sel, c.at("samples").get<std::size_t>(), instance_seed(seed, i)));
    if (fl) {
      FLAdversary adversary(f.domain());
      pairs[i].x = run_game(adversary, *selector, f.domain(),
                            Vector::Zero(static_cast<Eigen::Index>(d)), budget);
    } else {
      const std::size_t T = std::uniform_int_distribution<std::size_t>(1, max_requests)(rng);
      ScriptedNormedAdversary adversary(random_nested_boxes(d, T, rng));
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      Vector x0(static_cast<Eigen::Index>(d));
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] = u(rng);
      pairs[i].x = run_game(adversary, *selector, f.domain(), x0, budget);
    }
    pairs[i].y = selector->image_transcript(pairs[i].x.termination);
  });

  std::vector<std::vector<std::string>> rows;
  std::vector<InstanceSummary> summary;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto& X = pairs[i].x;
    const auto& Y = pairs[i].y;
    const bool cost_ok = X.cost <= f.lip_finv() * Y.cost + tol * std::max(1.0, X.cost);
    const bool opt_ok = Y.opt <= f.lip_f() * X.opt + tol * std::max(1.0, Y.opt);
    bool ratio_ok = true;
    std::optional<double> ceiling;
    if (X.ratio && Y.ratio) {
      ceiling = f.distortion() * *Y.ratio;
      ratio_ok = *X.ratio <= *ceiling + tol * std::max(1.0, *X.ratio);
    }
    if (!cost_ok || !opt_ok || !ratio_ok) ++failures;
    rows.push_back({std::to_string(i), std::to_string(X.requests.size()), num(X.cost),
                    num(Y.cost), num(X.opt), num(Y.opt), opt_num(X.ratio), opt_num(Y.ratio),
                    num(f.lip_f()), num(f.lip_finv()), num(f.distortion()), pass(cost_ok),
                    pass(opt_ok), pass(ratio_ok)});
    summary.push_back({"transfer#" + std::to_string(i), X.cost, X.opt, X.ratio, std::nullopt,
                       ceiling});
  }
  out.table("transfer.csv",
            {"instance", "requests", "cost_X", "cost_Y", "opt_X", "opt_Y", "ratio_X", "ratio_Y",
             "lip_f", "lip_finv", "distortion", "cost_check", "opt_check", "ratio_check"},
            rows);
  {
    auto file = out.open("summary.csv");
    write_summary(file, summary, out.hash());
  }
  out.log("transfer checks: " + std::to_string(instances - failures) + "/" +
          std::to_string(instances) + " instances pass");
}

void run_bound(const json& c, Output& out) {
  std::vector<std::vector<std::string>> rows;
  const auto source = c.at("source").get<std::string>();
  if (c.contains("d")) {
    for (double d : c.at("d").get<std::vector<double>>()) {
      const double distortion = 2.0 * std::pow(d, 5.0 / 6.0);
      const auto b = bound_transfer(d, distortion, source);
      rows.push_back({num(d), num(d), num(distortion), num(b.value),
                      num(0.5 * std::pow(d, 1.0 / 6.0)), b.provenance});
      out.log("d = " + num(d) + ": R(X) >= " + num(b.value));
    }
  } else {
    const auto b = bound_transfer(c.at("lower").get<double>(), c.at("distortion").get<double>(),
                                  source);
    rows.push_back({"", num(c.at("lower").get<double>()), num(c.at("distortion").get<double>()),
                    num(b.value), "", b.provenance});
    out.log("R(X) >= " + num(b.value));
  }
  out.table("bound.csv", {"d", "lower_Y", "distortion", "bound", "reference", "provenance"}, rows);
}

void run_net(const json& c, Output& out) {
  auto space = build_space(c.at("space"));
  const double eps = c.at("eps").get<double>();
  const auto net = build_epsilon_net(*space, eps, c.at("seed").get<std::uint64_t>());
  const auto check = check_epsilon_net(*space, net.points, eps);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < net.points.size(); ++i) {
    rows.push_back({std::to_string(i), space->name(net.points[i])});
  }
  out.table("net.csv", {"rank", "point"}, rows);
  out.table("net_check.csv", {"points", "net_size", "eps", "separated", "covering"},
            {{std::to_string(space->size()), std::to_string(net.points.size()), num(eps),
              pass(check.separated), pass(check.covering)}});
  out.log("eps-net with " + std::to_string(net.points.size()) + " of " +
          std::to_string(space->size()) + " points; separated " + pass(check.separated) +
          ", covering " + pass(check.covering));
}

}  // namespace

ExperimentOutput run_experiment(const ResolvedConfig& config, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ChaseError("cannot create output directory " + out_dir.string());
  ExperimentOutput result;
  Output out(out_dir, config.hash, result);
  {
    auto f = out.open("config.resolved.json");
    f << config.json.dump(2) << '\n';
  }
  const json& c = config.json;
  const auto kind = c.at("experiment").get<std::string>();
  if (kind == "dim") {
    run_dim(c, out);
  } else if (kind == "chase") {
    run_chase(c, out);
  } else if (kind == "fl-sweep") {
    run_fl_sweep(c, out);
  } else if (kind == "thm2-sweep") {
    run_thm2_sweep(c, out);
  } else if (kind == "phase1") {
    run_phase1(c, out);
  } else if (kind == "transfer") {
    run_transfer(c, out);
  } else if (kind == "bound-calc") {
    run_bound(c, out);
  } else {
    run_net(c, out);
  }
  return result;
}

}  // namespace chaselab
