#include "chaselab/embeddings.hpp"

#include <cmath>
#include <istream>
#include <random>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"

namespace chaselab {

std::string_view to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::scaling:
      return "scaling";
    case EmbeddingKind::lp_identity:
      return "lp-identity";
    case EmbeddingKind::linear_matrix:
      return "linear-matrix";
    case EmbeddingKind::custom:
      return "custom";
  }
  return "unknown";
}

namespace {

constexpr double kLipTol = 1e-12;
constexpr double kRoundTripTol = 1e-10;

bool diagonal(const Eigen::MatrixXd& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (i != j && A(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

Embedding::Embedding(Eigen::MatrixXd matrix, NormedSpace domain, NormedSpace codomain,
                     double lip_f, double lip_finv, EmbeddingKind kind, std::uint64_t check_seed)
    : matrix_(std::move(matrix)),
      domain_(domain),
      codomain_(codomain),
      lip_f_(lip_f),
      lip_finv_(lip_finv),
      kind_(kind) {
  const auto d = static_cast<Eigen::Index>(domain_.dim);
  if (matrix_.rows() != d || matrix_.cols() != d || codomain_.dim != domain_.dim) {
    throw InvalidArgument("embedding matrix must be d x d with d = " +
                          std::to_string(domain_.dim));
  }
  if (!(lip_f > 0.0) || !(lip_finv > 0.0) || !std::isfinite(lip_f) || !std::isfinite(lip_finv)) {
    throw InvalidArgument("Lipschitz constants must be positive and finite");
  }
  if (!matrix_.allFinite()) throw InvalidArgument("embedding matrix has non-finite entries");
  if (diagonal(matrix_)) {
    inverse_ = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (matrix_(i, i) == 0.0) throw InvalidArgument("embedding matrix is singular");
      inverse_(i, i) = 1.0 / matrix_(i, i);
    }
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(matrix_);
    if (!lu.isInvertible()) throw InvalidArgument("embedding matrix is singular");
    inverse_ = lu.inverse();
  }
  if (distortion() < 1.0 - kLipTol) {
    throw InvalidArgument("declared distortion lip_f * lip_finv is below 1");
  }
  verify(check_seed);
}

void Embedding::verify(std::uint64_t seed) const {
  const auto d = static_cast<Eigen::Index>(domain_.dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);

  std::vector<Vector> diffs;
  // Structured directions first: basis vectors, all-ones and a sign pattern
  // attain the extremes of the l_p comparisons.
  for (Eigen::Index i = 0; i < d && diffs.size() < kCheckSamples; ++i) {
    diffs.push_back(Vector::Unit(d, i));
  }
  diffs.push_back(Vector::Ones(d));
  Vector alt(d);
  for (Eigen::Index i = 0; i < d; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  diffs.push_back(alt);
  while (diffs.size() < kCheckSamples) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      v[i] = coin(rng) ? normal(rng) : std::ldexp(normal(rng), -20);
    }
    diffs.push_back(std::move(v));
  }

  double worst_f = 0.0;
  double worst_inv = 0.0;
  for (const auto& v : diffs) {
    const double dx = domain_.norm(v);
    if (dx == 0.0) continue;
    const Vector fv = forward(v);
    const double dy = codomain_.norm(fv);
    worst_f = std::max(worst_f, dy / dx);
    if (dy > 0.0) worst_inv = std::max(worst_inv, dx / dy);
    const Vector back = inverse(fv);
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if ((back - v).cwiseAbs().maxCoeff() > kRoundTripTol * scale) {
      throw InvalidArgument("inverse(forward(x)) != x within 1e-10 on a sample");
    }
  }
  if (worst_f > lip_f_ * (1.0 + kLipTol)) {
    throw InvalidArgument("declared lip_f " + csv::format_number(lip_f_) +
                          " is below the sampled value " + csv::format_number(worst_f));
  }
  if (worst_inv > lip_finv_ * (1.0 + kLipTol)) {
    throw InvalidArgument("declared lip_finv " + csv::format_number(lip_finv_) +
                          " is below the sampled value " + csv::format_number(worst_inv));
  }
}

Vector Embedding::forward(const Vector& x) const {
  if (x.size() != matrix_.cols()) throw InvalidArgument("dimension mismatch");
  return matrix_ * x;
}

Vector Embedding::inverse(const Vector& y) const {
  if (y.size() != inverse_.cols()) throw InvalidArgument("dimension mismatch");
  return inverse_ * y;
}

bool Embedding::is_diagonal() const { return diagonal(matrix_); }

Embedding Embedding::inverted() const {
  Embedding out;
  out.matrix_ = inverse_;
  out.inverse_ = matrix_;
  out.domain_ = codomain_;
  out.codomain_ = domain_;
  out.lip_f_ = lip_finv_;
  out.lip_finv_ = lip_f_;
  out.kind_ = kind_;
  return out;
}

ConvexBody Embedding::map_body(const ConvexBody& body) const {
  if (body_dim(body) != domain_.dim) throw InvalidArgument("dimension mismatch");
  if (const auto* box = std::get_if<AxisBox>(&body)) {
    if (is_diagonal()) {
      const Vector a = forward(box->lo);
      const Vector b = forward(box->hi);
      return make_box(a.cwiseMin(b), a.cwiseMax(b));
    }
    std::vector<Vector> verts;
    for (const auto& v : box_vertices(*box)) verts.push_back(forward(v));
    return make_polytope(std::move(verts));
  }
  if (const auto* poly = std::get_if<VPolytope>(&body)) {
    std::vector<Vector> verts;
    for (const auto& v : poly->vertices) verts.push_back(forward(v));
    return make_polytope(std::move(verts));
  }
  const auto& ball = std::get<NormBall>(body);
  const double c = matrix_(0, 0);
  const bool scalar = is_diagonal() && c > 0.0 &&
                      (matrix_.diagonal().array() == c).all() && domain_.p == codomain_.p;
  if (!scalar) throw Unsupported("ball images are only supported under scalings");
  return make_ball(forward(ball.center), c * ball.radius, ball.p);
}

Embedding make_lp_identity(std::size_t d, double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("p and q must be in [1, inf]");
  if (p > q) throw InvalidArgument("make_lp_identity needs p <= q; invert the result instead");
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double lip_finv = std::pow(static_cast<double>(d), inv_p - inv_q);
  const auto n = static_cast<Eigen::Index>(d);
  return Embedding(Eigen::MatrixXd::Identity(n, n), NormedSpace(d, p), NormedSpace(d, q), 1.0,
                   lip_finv, EmbeddingKind::lp_identity);
}

Embedding make_scaling(std::size_t d, double p, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scaling factor must be > 0");
  const auto n = static_cast<Eigen::Index>(d);
  return Embedding(c * Eigen::MatrixXd::Identity(n, n), NormedSpace(d, p), NormedSpace(d, p), c,
                   1.0 / c, EmbeddingKind::scaling);
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : csv::split_line(line)) row.push_back(csv::parse_number(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw MalformedInput("matrix CSV is empty");
  const std::size_t n = rows.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw MalformedInput("matrix CSV row " + std::to_string(i + 1) + " has " +
                           std::to_string(rows[i].size()) + " entries, expected " +
                           std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return A;
}

TransferSelector::TransferSelector(Embedding f, std::unique_ptr<NormedSelector> inner)
    : f_(std::move(f)), inner_(std::move(inner)) {
  if (!inner_) throw InvalidArgument("null selector");
}

void TransferSelector::init(const NormedSpace& arena, const Vector& x0) {
  if (arena.dim != f_.domain().dim || arena.p != f_.domain().p) {
    throw InvalidArgument("arena does not match the embedding's domain");
  }
  y0_ = f_.forward(x0);
  x_requests_.clear();
  y_requests_.clear();
  y_trajectory_.clear();
  inner_->init(f_.codomain(), y0_);
}

Vector TransferSelector::respond(const ConvexBody& request, std::span<const ConvexBody>) {
  x_requests_.push_back(request);
  y_requests_.push_back(f_.map_body(request));
  Vector y = inner_->respond(y_requests_.back(), y_requests_);
  Vector x = f_.inverse(y);
  const Vector again = f_.forward(x);
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if ((again - y).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ContractViolation("embedded response " + format_vector(y) +
                            " is not invertible within tolerance");
  }
  y_trajectory_.push_back(std::move(y));
  return x;
}

NormedTranscript TransferSelector::image_transcript(TerminationReason termination) const {
  return score_game(f_.codomain(), y0_, y_requests_, y_trajectory_, termination, inner_->name(),
                    is_nested(x_requests_));
}

std::unique_ptr<TransferSelector> transfer_selector(Embedding f,
                                                    std::unique_ptr<NormedSelector> selector_Y) {
  return std::make_unique<TransferSelector>(std::move(f), std::move(selector_Y));
}

TransferredBound bound_transfer(double known_lower_Y, double distortion_upper,
                                const std::string& source) {
  if (!(known_lower_Y > 0.0) || !(distortion_upper > 0.0)) {
    throw InvalidArgument("bound_transfer needs positive inputs");
  }
  TransferredBound out;
  out.value = known_lower_Y / distortion_upper;
  out.provenance = "R(X) >= R(Y) / d_BM(X,Y) with R(Y) >= " + csv::format_number(known_lower_Y) +
                   " and d_BM(X,Y) <= " + csv::format_number(distortion_upper);
  if (!source.empty()) out.provenance += " [" + source + "]";
  return out;
}

}  // namespace chaselab
