#include "chaselab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"

namespace chaselab {

double lp_norm(std::span<const double> x, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }
  // Scale by the max entry to keep pow() in range.
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return lp_norm(diff, p);
}

NormedSpace::NormedSpace(std::size_t d, double exponent) : dim(d), p(exponent) {
  if (d == 0) throw InvalidArgument("dimension must be positive");
  if (!(p >= 1.0)) throw InvalidArgument("norm exponent must be in [1, inf]");
}

double NormedSpace::norm(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw InvalidArgument("dimension mismatch: vector has " + std::to_string(x.size()) +
                          " coordinates, space has " + std::to_string(dim));
  }
  return lp_norm(std::span<const double>(x.data(), dim), p);
}

double NormedSpace::distance(const Vector& a, const Vector& b) const {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
  return norm(a - b);
}

AxisBox make_box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw InvalidArgument("box bounds mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw InvalidArgument("box needs lo <= hi on every coordinate");
  }
  return {std::move(lo), std::move(hi)};
}

VPolytope make_polytope(std::vector<Vector> vertices) {
  if (vertices.empty()) throw InvalidArgument("polytope needs at least one vertex");
  for (const auto& v : vertices) {
    if (v.size() != vertices.front().size()) throw InvalidArgument("polytope vertex dims differ");
  }
  return {std::move(vertices)};
}

NormBall make_ball(Vector center, double radius, double p) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be >= 0");
  if (!(p >= 1.0)) throw InvalidArgument("norm exponent must be in [1, inf]");
  return {std::move(center), radius, p};
}

std::size_t body_dim(const ConvexBody& body) {
  return std::visit(
      [](const auto& b) -> std::size_t {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, AxisBox>) {
          return static_cast<std::size_t>(b.lo.size());
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          return static_cast<std::size_t>(b.vertices.front().size());
        } else {
          return static_cast<std::size_t>(b.center.size());
        }
      },
      body);
}

std::string_view body_kind(const ConvexBody& body) {
  switch (body.index()) {
    case 0:
      return "box";
    case 1:
      return "vpoly";
    default:
      return "ball";
  }
}

std::vector<Vector> box_vertices(const AxisBox& box) {
  const auto d = box.lo.size();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (box.lo[i] < box.hi[i]) free.push_back(i);
  }
  if (free.size() > 24) throw CapacityExceeded("box has too many vertices to enumerate");
  std::vector<Vector> out;
  const std::size_t count = std::size_t{1} << free.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Vector v = box.lo;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if ((mask >> k) & 1U) v[free[k]] = box.hi[free[k]];
    }
    out.push_back(std::move(v));
  }
  return out;
}

PolytopeProjection project_l2_polytope(const VPolytope& poly, const Vector& x, double tol,
                                       std::size_t max_iterations) {
  const auto& V = poly.vertices;
  const std::size_t m = V.size();
  PolytopeProjection out;
  out.weights.assign(m, 0.0);

  std::size_t start = 0;
  double best = (V[0] - x).squaredNorm();
  for (std::size_t i = 1; i < m; ++i) {
    const double v = (V[i] - x).squaredNorm();
    if (v < best) {
      best = v;
      start = i;
    }
  }
  out.weights[start] = 1.0;
  Vector y = V[start];

  for (std::size_t it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    const Vector grad = 2.0 * (y - x);
    std::size_t fw = 0;
    double fw_val = grad.dot(V[0]);
    for (std::size_t i = 1; i < m; ++i) {
      const double v = grad.dot(V[i]);
      if (v < fw_val) {
        fw_val = v;
        fw = i;
      }
    }
    out.gap = grad.dot(y) - fw_val;
    if (out.gap <= tol) break;

    std::size_t away = m;
    double away_val = -kInf;
    for (std::size_t i = 0; i < m; ++i) {
      if (out.weights[i] <= 0.0) continue;
      const double v = grad.dot(V[i]);
      if (v > away_val) {
        away_val = v;
        away = i;
      }
    }
    // Pairwise step: move weight from the away vertex to the FW vertex.
    const Vector dir = V[fw] - V[away];
    const double dd = dir.squaredNorm();
    if (dd == 0.0) break;
    const double max_step = out.weights[away];
    double step = -(y - x).dot(dir) / dd;
    step = std::clamp(step, 0.0, max_step);
    if (step == 0.0) break;
    y += step * dir;
    out.weights[away] -= step;
    out.weights[fw] += step;
    if (step == max_step) out.weights[away] = 0.0;
  }
  out.point = std::move(y);
  return out;
}

namespace {

bool box_contains(const AxisBox& b, const Vector& x, double tol) {
  if (x.size() != b.lo.size()) throw InvalidArgument("dimension mismatch");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < b.lo[i] - tol || x[i] > b.hi[i] + tol) return false;
  }
  return true;
}

double ball_gap(const NormBall& b, const Vector& x) {
  if (x.size() != b.center.size()) throw InvalidArgument("dimension mismatch");
  const Vector diff = x - b.center;
  return lp_norm(std::span<const double>(diff.data(), diff.size()), b.p) - b.radius;
}

}  // namespace

bool contains(const ConvexBody& body, const Vector& x, double tol) {
  return std::visit(
      [&](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, AxisBox>) {
          return box_contains(b, x, tol);
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          if (x.size() != b.vertices.front().size()) throw InvalidArgument("dimension mismatch");
          const auto proj = project_l2_polytope(b, x, tol * tol * 1e-2);
          return (proj.point - x).norm() <= tol;
        } else {
          return ball_gap(b, x) <= tol;
        }
      },
      body);
}

bool nested_within(const ConvexBody& inner, const ConvexBody& outer, double tol) {
  if (body_dim(inner) != body_dim(outer)) throw InvalidArgument("dimension mismatch");
  if (const auto* a = std::get_if<AxisBox>(&inner)) {
    if (const auto* b = std::get_if<AxisBox>(&outer)) {
      for (Eigen::Index i = 0; i < a->lo.size(); ++i) {
        if (a->lo[i] < b->lo[i] - tol || a->hi[i] > b->hi[i] + tol) return false;
      }
      return true;
    }
    for (const auto& v : box_vertices(*a)) {
      if (!contains(outer, v, tol)) return false;
    }
    return true;
  }
  if (const auto* p = std::get_if<VPolytope>(&inner)) {
    for (const auto& v : p->vertices) {
      if (!contains(outer, v, tol)) return false;
    }
    return true;
  }
  const auto& ball = std::get<NormBall>(inner);
  if (const auto* b = std::get_if<AxisBox>(&outer)) {
    // Every l_p ball of radius r reaches exactly r along each axis.
    for (Eigen::Index i = 0; i < ball.center.size(); ++i) {
      if (ball.center[i] - ball.radius < b->lo[i] - tol ||
          ball.center[i] + ball.radius > b->hi[i] + tol) {
        return false;
      }
    }
    return true;
  }
  if (const auto* b = std::get_if<NormBall>(&outer); b && b->p == ball.p) {
    const Vector diff = ball.center - b->center;
    return lp_norm(std::span<const double>(diff.data(), diff.size()), b->p) + ball.radius <=
           b->radius + tol;
  }
  throw Unsupported("containment of a ball in a " + std::string(body_kind(outer)) +
                    " is not supported");
}

Vector project(const NormedSpace& space, const Vector& x, const ConvexBody& body) {
  if (static_cast<std::size_t>(x.size()) != space.dim || body_dim(body) != space.dim) {
    throw InvalidArgument("dimension mismatch");
  }
  if (const auto* b = std::get_if<AxisBox>(&body)) {
    return x.cwiseMax(b->lo).cwiseMin(b->hi);
  }
  if (const auto* p = std::get_if<VPolytope>(&body)) {
    if (space.p != 2.0) {
      throw Unsupported("vertex-polytope projection is only available under l_2");
    }
    // A tight gap target: interior points must come back (nearly) unmoved.
    double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    for (const auto& v : p->vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    return project_l2_polytope(*p, x, 1e-22 * scale * scale, 100000).point;
  }
  const auto& ball = std::get<NormBall>(body);
  if (ball.p != space.p) {
    throw Unsupported("ball projection needs the ball's p to match the space's p");
  }
  const Vector diff = x - ball.center;
  const double len = space.norm(diff);
  if (len <= ball.radius) return x;
  return ball.center + (ball.radius / len) * diff;
}

Vector support_argmax(const ConvexBody& body, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != body_dim(body)) {
    throw InvalidArgument("dimension mismatch");
  }
  if (const auto* b = std::get_if<AxisBox>(&body)) {
    Vector out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if (theta[i] > 0.0) {
        out[i] = b->hi[i];
      } else if (theta[i] < 0.0) {
        out[i] = b->lo[i];
      } else {
        out[i] = 0.5 * (b->lo[i] + b->hi[i]);
      }
    }
    return out;
  }
  if (const auto* p = std::get_if<VPolytope>(&body)) {
    std::size_t best = 0;
    double best_val = theta.dot(p->vertices[0]);
    for (std::size_t i = 1; i < p->vertices.size(); ++i) {
      const double v = theta.dot(p->vertices[i]);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    return p->vertices[best];
  }
  const auto& ball = std::get<NormBall>(body);
  if (ball.p != 2.0) throw Unsupported("support of non-Euclidean balls is not supported");
  const double len = theta.norm();
  if (len == 0.0) return ball.center;
  return ball.center + (ball.radius / len) * theta;
}

SteinerEstimate steiner_point_mc(const ConvexBody& body, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("Steiner estimate needs at least one sample");
  const auto d = static_cast<Eigen::Index>(body_dim(body));
  const std::size_t pairs = std::max<std::size_t>(1, samples / 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Running mean and M2 over pair midpoints; identical midpoints leave the
  // mean untouched bit for bit.
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  Vector theta(d);
  for (std::size_t k = 0; k < pairs; ++k) {
    double len = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) theta[i] = normal(rng);
      len = theta.norm();
    } while (len == 0.0);
    theta /= len;
    const Vector mid = 0.5 * (support_argmax(body, theta) + support_argmax(body, -theta));
    if (k == 0) {
      mean = mid;
      continue;
    }
    const Vector delta = mid - mean;
    if (delta.isZero(0.0)) continue;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta.cwiseProduct(mid - mean);
  }
  SteinerEstimate out;
  out.point = mean;
  out.pairs = pairs;
  if (pairs > 1) {
    const double n = static_cast<double>(pairs);
    out.std_error = (m2 / (n - 1.0) / n).cwiseSqrt();
  } else {
    out.std_error = Vector::Zero(d);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      auto piece = trim(s.substr(start, i - start));
      if (!piece.empty() || sep != ' ') out.push_back(piece);
      start = i + 1;
    }
  }
  return out;
}

std::string_view strip_wrapper(std::string_view s, std::string_view head, char close) {
  s = trim(s);
  if (s.size() < head.size() + 1 || s.substr(0, head.size()) != head || s.back() != close) {
    throw MalformedInput("expected " + std::string(head) + "..." + close + ", got '" +
                         std::string(s) + "'");
  }
  return s.substr(head.size(), s.size() - head.size() - 1);
}

}  // namespace

std::string format_vector(const Vector& x) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) out += ' ';
    out += csv::format_number(x[i]);
  }
  out += ')';
  return out;
}

Vector parse_vector(std::string_view text) {
  const auto inner = strip_wrapper(text, "(", ')');
  const auto parts = split(inner, ' ');
  Vector x(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) x[static_cast<Eigen::Index>(i)] = csv::parse_number(parts[i]);
  return x;
}

std::string format_body(const ConvexBody& body) {
  if (const auto* b = std::get_if<AxisBox>(&body)) {
    std::string out = "box[";
    for (Eigen::Index i = 0; i < b->lo.size(); ++i) {
      if (i > 0) out += ' ';
      out += csv::format_number(b->lo[i]) + ":" + csv::format_number(b->hi[i]);
    }
    return out + "]";
  }
  if (const auto* p = std::get_if<VPolytope>(&body)) {
    std::string out = "vpoly[";
    for (std::size_t i = 0; i < p->vertices.size(); ++i) {
      if (i > 0) out += ';';
      out += format_vector(p->vertices[i]);
    }
    return out + "]";
  }
  const auto& ball = std::get<NormBall>(body);
  return "ball[" + format_vector(ball.center) + ";" + csv::format_number(ball.radius) + ";" +
         csv::format_number(ball.p) + "]";
}

ConvexBody parse_body(std::string_view text) {
  text = trim(text);
  if (text.starts_with("box[")) {
    const auto parts = split(strip_wrapper(text, "box[", ']'), ' ');
    Vector lo(static_cast<Eigen::Index>(parts.size()));
    Vector hi(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto colon = parts[i].find(':');
      if (colon == std::string_view::npos) throw MalformedInput("box interval needs lo:hi");
      lo[static_cast<Eigen::Index>(i)] = csv::parse_number(parts[i].substr(0, colon));
      hi[static_cast<Eigen::Index>(i)] = csv::parse_number(parts[i].substr(colon + 1));
    }
    return make_box(std::move(lo), std::move(hi));
  }
  if (text.starts_with("vpoly[")) {
    std::vector<Vector> vertices;
    for (auto piece : split(strip_wrapper(text, "vpoly[", ']'), ';')) {
      vertices.push_back(parse_vector(piece));
    }
    return make_polytope(std::move(vertices));
  }
  if (text.starts_with("ball[")) {
    const auto parts = split(strip_wrapper(text, "ball[", ']'), ';');
    if (parts.size() != 3) throw MalformedInput("ball needs center;radius;p");
    return make_ball(parse_vector(parts[0]), csv::parse_number(parts[1]),
                     csv::parse_number(parts[2]));
  }
  throw MalformedInput("unknown body '" + std::string(text) + "'");
}

}  // namespace chaselab
