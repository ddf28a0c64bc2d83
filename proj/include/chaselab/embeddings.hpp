#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "chaselab/engine.hpp"
#include "chaselab/geometry.hpp"

namespace chaselab {

enum class EmbeddingKind { scaling, lp_identity, linear_matrix, custom };
std::string_view to_string(EmbeddingKind k);

// Linear bi-Lipschitz map f: (R^d, l_p) -> (R^d, l_q) with declared Lipschitz
// constants. Construction checks the declared constants and the round trip
// f^-1(f(x)) = x on seeded samples and throws InvalidArgument when a sample
// contradicts them.
class Embedding {
 public:
  static constexpr std::size_t kCheckSamples = 1000;

  Embedding(Eigen::MatrixXd matrix, NormedSpace domain, NormedSpace codomain, double lip_f,
            double lip_finv, EmbeddingKind kind, std::uint64_t check_seed = 0);

  Vector forward(const Vector& x) const;
  Vector inverse(const Vector& y) const;

  const NormedSpace& domain() const { return domain_; }
  const NormedSpace& codomain() const { return codomain_; }
  double lip_f() const { return lip_f_; }
  double lip_finv() const { return lip_finv_; }
  double distortion() const { return lip_f_ * lip_finv_; }
  EmbeddingKind kind() const { return kind_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  bool is_diagonal() const;

  // f^-1 viewed as an embedding Y -> X.
  Embedding inverted() const;

  // f(K): boxes stay boxes under diagonal maps and become the vertex image
  // otherwise; polytopes map vertexwise; balls only under scalings.
  ConvexBody map_body(const ConvexBody& body) const;

 private:
  Embedding() = default;
  void verify(std::uint64_t seed) const;

  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd inverse_;
  NormedSpace domain_;
  NormedSpace codomain_;
  double lip_f_ = 1.0;
  double lip_finv_ = 1.0;
  EmbeddingKind kind_ = EmbeddingKind::custom;
};

// Identity (R^d, l_p) -> (R^d, l_q), p <= q: lip_f = 1, lip_finv = d^(1/p - 1/q).
Embedding make_lp_identity(std::size_t d, double p, double q);
// x -> c x on (R^d, l_p).
Embedding make_scaling(std::size_t d, double p, double c);

// Square matrix CSV without header, one row per line.
Eigen::MatrixXd read_matrix_csv(std::istream& in);

// Runs selector_Y on the embedded requests f(K_t) and answers f^-1 of its
// response. The image game is kept and can be scored after the X game ends.
class TransferSelector final : public NormedSelector {
 public:
  TransferSelector(Embedding f, std::unique_ptr<NormedSelector> inner);

  std::string name() const override { return "transfer(" + inner_->name() + ")"; }
  bool deterministic() const override { return inner_->deterministic(); }
  void init(const NormedSpace& arena, const Vector& x0) override;
  Vector respond(const ConvexBody& request, std::span<const ConvexBody> history) override;

  const Embedding& embedding() const { return f_; }
  NormedTranscript image_transcript(TerminationReason termination) const;

 private:
  Embedding f_;
  std::unique_ptr<NormedSelector> inner_;
  Vector y0_;
  std::vector<ConvexBody> x_requests_;
  std::vector<ConvexBody> y_requests_;
  std::vector<Vector> y_trajectory_;
};

std::unique_ptr<TransferSelector> transfer_selector(Embedding f,
                                                    std::unique_ptr<NormedSelector> selector_Y);

struct TransferredBound {
  double value = 0.0;
  std::string provenance;
};

// R(X) >= R(Y) / d_BM(X, Y): returns known_lower_Y / distortion_upper.
TransferredBound bound_transfer(double known_lower_Y, double distortion_upper,
                                const std::string& source = {});

}  // namespace chaselab
