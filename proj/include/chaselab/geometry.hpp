#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chaselab {

using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double lp_norm(std::span<const double> x, double p);
double lp_distance(std::span<const double> a, std::span<const double> b, double p);

// (R^d, ||.||_p), p in [1, inf]; p = +inf is the max norm.
struct NormedSpace {
  std::size_t dim = 1;
  double p = 2.0;

  NormedSpace() = default;
  NormedSpace(std::size_t d, double exponent);

  double norm(const Vector& x) const;
  double distance(const Vector& a, const Vector& b) const;
};

struct AxisBox {
  Vector lo;
  Vector hi;
};

struct VPolytope {
  std::vector<Vector> vertices;
};

struct NormBall {
  Vector center;
  double radius = 0.0;
  double p = 2.0;
};

using ConvexBody = std::variant<AxisBox, VPolytope, NormBall>;

AxisBox make_box(Vector lo, Vector hi);
VPolytope make_polytope(std::vector<Vector> vertices);
NormBall make_ball(Vector center, double radius, double p);

std::size_t body_dim(const ConvexBody& body);
std::string_view body_kind(const ConvexBody& body);

// Membership up to tol. Vertex polytopes test the Euclidean distance to the
// hull, computed by projection.
bool contains(const ConvexBody& body, const Vector& x, double tol = 1e-9);

// inner subset of outer, checked on intervals or vertices. Throws Unsupported
// for a ball inside a vertex polytope.
bool nested_within(const ConvexBody& inner, const ConvexBody& outer, double tol = 1e-9);

std::vector<Vector> box_vertices(const AxisBox& box);

struct PolytopeProjection {
  Vector point;
  std::vector<double> weights;  // convex weights over the vertices
  std::size_t iterations = 0;
  double gap = 0.0;  // final Frank-Wolfe duality gap
};

// Euclidean projection onto conv(vertices) by pairwise Frank-Wolfe with exact
// line search. Stops when the duality gap (an upper bound on the excess squared
// distance) drops below tol, or after max_iterations.
PolytopeProjection project_l2_polytope(const VPolytope& poly, const Vector& x, double tol = 1e-8,
                                       std::size_t max_iterations = 10000);

// Nearest point of body to x in the space's norm. Boxes clamp (exact for every
// p); polytopes need p = 2; balls need p equal to the ball's p. Anything else
// throws Unsupported.
Vector project(const NormedSpace& space, const Vector& x, const ConvexBody& body);

// argmax_{y in body} <theta, y>. Boxes take hi/lo by sign and the midpoint on
// zero components; polytopes return the first maximizing vertex.
Vector support_argmax(const ConvexBody& body, const Vector& theta);

struct SteinerEstimate {
  Vector point;
  Vector std_error;
  std::size_t pairs = 0;
};

// Steiner point as E_theta[support_argmax(body, theta)] with theta uniform on
// the sphere. Directions come in antithetic pairs (theta, -theta), so centrally
// symmetric bodies return their center exactly.
SteinerEstimate steiner_point_mc(const ConvexBody& body, std::size_t samples, std::uint64_t seed);

// Text forms without commas, e.g. "(1 -3 2)", "box[-1:1 1:1]",
// "vpoly[(0 0);(2 0)]", "ball[(0 0);1;2]". Numbers use shortest round-trip
// decimals, so parse(format(x)) == x exactly.
std::string format_vector(const Vector& x);
Vector parse_vector(std::string_view text);
std::string format_body(const ConvexBody& body);
ConvexBody parse_body(std::string_view text);

}  // namespace chaselab
