#pragma once

// Coordinate models of hyperbolic space H^n with curvature -1: the Klein ball,
// the Poincare ball and the hyperboloid (Lorentz) model. Every function here is
// a pure function of its arguments.

#include <cmath>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace hnn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Ball-valued outputs never get closer than this to the unit sphere.
inline constexpr double kBallEps = 1e-7;
/// Below this norm, exp/log use their series expansions.
inline constexpr double kSeriesThreshold = 1e-6;
/// Upper clamp for atanh arguments.
inline constexpr double kAtanhMax = 1.0 - 1e-15;
/// Tolerance used for contract checks (unit speed, Minkowski constraint).
inline constexpr double kContractTol = 1e-8;

enum class Model { Klein, Poincare, Lorentz };

std::string_view to_string(Model model);
/// Accepts "klein", "poincare", "lorentz" (also "hyperboloid"). Throws
/// std::invalid_argument otherwise.
Model parse_model(std::string_view name);

struct KleinPoint {
  Vec coords;
};

struct PoincarePoint {
  Vec coords;
};

/// Coordinates are ordered [x_t; x_s].
struct LorentzPoint {
  Vec coords;

  double time() const { return coords(0); }
  auto space() const { return coords.tail(coords.size() - 1); }
};

/// A tangent vector together with the point it is attached to.
template <class P>
struct Tangent {
  P base;
  Vec components;
};

using Point = std::variant<KleinPoint, PoincarePoint, LorentzPoint>;
using TangentVector =
    std::variant<Tangent<KleinPoint>, Tangent<PoincarePoint>, Tangent<LorentzPoint>>;

Model model_of(const Point& p);
Model model_of(const TangentVector& v);

// ---------------------------------------------------------------------------
// Basic helpers

/// Rescales onto the sphere of radius 1 - kBallEps when the norm exceeds it.
Vec clamp_to_ball(Vec coords);

double minkowski_inner(const Vec& x, const Vec& y);

/// Builds a hyperboloid point from spatial coordinates, x_t = sqrt(1 + |x_s|^2).
LorentzPoint lorentz_from_space(const Vec& space);
/// Recomputes x_t from the spatial part.
LorentzPoint renormalize(const LorentzPoint& x);

KleinPoint klein_origin(Eigen::Index n);
PoincarePoint poincare_origin(Eigen::Index n);
LorentzPoint lorentz_origin(Eigen::Index n);

/// Intrinsic dimension n of the manifold the point lives on.
Eigen::Index dim(const KleinPoint& x);
Eigen::Index dim(const PoincarePoint& x);
Eigen::Index dim(const LorentzPoint& x);

bool is_valid(const KleinPoint& x);
bool is_valid(const PoincarePoint& x);
/// x_t > 0 and |x_t - sqrt(1 + |x_s|^2)| <= 1e-9.
bool is_valid(const LorentzPoint& x);

/// 1 / sqrt(1 - |x|^2).
double lorentz_factor(const KleinPoint& x);
/// rho_x = 2 / (1 - |x|^2).
double poincare_conformal_factor(const PoincarePoint& x);

// ---------------------------------------------------------------------------
// Metric

/// Klein metric tensor g^K(x).
Mat klein_metric(const KleinPoint& x);
/// Inverse of the Klein metric tensor, (1 - |x|^2)(I - x x^T).
Mat klein_metric_inverse(const KleinPoint& x);

double metric_inner(const KleinPoint& x, const Vec& u, const Vec& v);
double metric_inner(const PoincarePoint& x, const Vec& u, const Vec& v);
double metric_inner(const LorentzPoint& x, const Vec& u, const Vec& v);

template <class P>
double metric_norm(const P& x, const Vec& v) {
  double sq = metric_inner(x, v, v);
  return sq > 0.0 ? std::sqrt(sq) : 0.0;
}

// ---------------------------------------------------------------------------
// Isometries between the models and their pushforwards

KleinPoint to_klein(const KleinPoint& x);
KleinPoint to_klein(const PoincarePoint& x);
KleinPoint to_klein(const LorentzPoint& x);
PoincarePoint to_poincare(const KleinPoint& x);
PoincarePoint to_poincare(const PoincarePoint& x);
PoincarePoint to_poincare(const LorentzPoint& x);
LorentzPoint to_lorentz(const KleinPoint& x);
LorentzPoint to_lorentz(const PoincarePoint& x);
LorentzPoint to_lorentz(const LorentzPoint& x);

Tangent<KleinPoint> to_klein(const Tangent<KleinPoint>& v);
Tangent<KleinPoint> to_klein(const Tangent<PoincarePoint>& v);
Tangent<KleinPoint> to_klein(const Tangent<LorentzPoint>& v);
Tangent<PoincarePoint> to_poincare(const Tangent<KleinPoint>& v);
Tangent<PoincarePoint> to_poincare(const Tangent<PoincarePoint>& v);
Tangent<PoincarePoint> to_poincare(const Tangent<LorentzPoint>& v);
Tangent<LorentzPoint> to_lorentz(const Tangent<KleinPoint>& v);
Tangent<LorentzPoint> to_lorentz(const Tangent<PoincarePoint>& v);
Tangent<LorentzPoint> to_lorentz(const Tangent<LorentzPoint>& v);

Point convert_point(const Point& p, Model dst);
TangentVector pushforward(const TangentVector& v, Model dst);

// ---------------------------------------------------------------------------
// Distances, geodesics, exponential and logarithmic maps

double distance(const KleinPoint& x, const KleinPoint& y);
double distance(const PoincarePoint& x, const PoincarePoint& y);
double distance(const LorentzPoint& x, const LorentzPoint& y);

/// Unit-speed geodesic through x with initial velocity v. Throws
/// std::invalid_argument when v does not have unit length in the metric at x.
KleinPoint geodesic_unit(const KleinPoint& x, const Vec& v, double t);
PoincarePoint geodesic_unit(const PoincarePoint& x, const Vec& v, double t);
LorentzPoint geodesic_unit(const LorentzPoint& x, const Vec& v, double t);

KleinPoint exp_map(const KleinPoint& x, const Vec& v);
PoincarePoint exp_map(const PoincarePoint& x, const Vec& v);
LorentzPoint exp_map(const LorentzPoint& x, const Vec& v);

Vec log_map(const KleinPoint& x, const KleinPoint& y);
Vec log_map(const PoincarePoint& x, const PoincarePoint& y);
Vec log_map(const LorentzPoint& x, const LorentzPoint& y);

/// Parallel transport of v (attached at the model's origin) to x.
///
/// For the Klein model this is the closed form
///   P(v) = s * (v - (x.v) x / (1 + s)),  s = sqrt(1 - |x|^2),
/// which agrees with conjugating the hyperboloid transport through the
/// isometry and with log_x(x (+)E exp_o(v)).
Vec transport_from_origin(const KleinPoint& x, const Vec& v);
Vec transport_from_origin(const PoincarePoint& x, const Vec& v);
/// v must be tangent at the hyperboloid origin (v_t = 0).
Vec transport_from_origin(const LorentzPoint& x, const Vec& v);

namespace reference {

/// The alternative closed form
///   (x.v)(s - 2)/(1 - s) x + s v,  s = sqrt(1 - |x|^2)
/// kept only so regression tests can show it does not preserve the metric.
/// Not used by any library code path.
Vec klein_transport_from_origin_printed(const KleinPoint& x, const Vec& v);

}  // namespace reference

}  // namespace hnn
