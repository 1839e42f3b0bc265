#include "hnn/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hnn/gyro.hpp"

namespace hnn {

namespace {

double clamped_atanh(double z) { return std::atanh(std::min(z, kAtanhMax)); }

double clamped_acosh(double z) { return std::acosh(std::max(z, 1.0)); }

// sinh(r) / r
double sinhc(double r) { return r < kSeriesThreshold ? 1.0 + r * r / 6.0 : std::sinh(r) / r; }

// 1 - |x|^2 as (1 - |x|)(1 + |x|); exact cancellation near the boundary.
double one_minus_sq(const Vec& x) {
  const double n = x.norm();
  return (1.0 - n) * (1.0 + n);
}

// tanh(r) / r
double tanhc(double r) { return r < kSeriesThreshold ? 1.0 - r * r / 3.0 : std::tanh(r) / r; }

// asinh(z) / z
double asinhc(double z) { return z < kSeriesThreshold ? 1.0 - z * z / 6.0 : std::asinh(z) / z; }

// atanh(z) / z
double atanhc(double z) {
  return z < kSeriesThreshold ? 1.0 + z * z / 3.0 : clamped_atanh(z) / z;
}

// r / sinh(r)
double inv_sinhc(double r) { return r < kSeriesThreshold ? 1.0 - r * r / 6.0 : r / std::sinh(r); }

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void require_unit(double sq_norm) {
  if (std::abs(sq_norm - 1.0) > kContractTol) {
    throw std::invalid_argument("geodesic_unit: velocity is not unit length (|v|^2 = " +
                                std::to_string(sq_norm) + ")");
  }
}

// Projects an ambient vector onto the tangent space of the hyperboloid at x.
Vec project_lorentz_tangent(const LorentzPoint& x, Vec v) {
  v += minkowski_inner(x.coords, v) * x.coords;
  return v;
}

}  // namespace

std::string_view to_string(Model model) {
  switch (model) {
    case Model::Klein:
      return "klein";
    case Model::Poincare:
      return "poincare";
    case Model::Lorentz:
      return "lorentz";
  }
  return "unknown";
}

Model parse_model(std::string_view name) {
  if (name == "klein") return Model::Klein;
  if (name == "poincare") return Model::Poincare;
  if (name == "lorentz" || name == "hyperboloid") return Model::Lorentz;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

Model model_of(const Point& p) { return static_cast<Model>(p.index()); }
Model model_of(const TangentVector& v) { return static_cast<Model>(v.index()); }

Vec clamp_to_ball(Vec coords) {
  constexpr double kMax = 1.0 - kBallEps;
  const double n = coords.norm();
  if (n > kMax) coords *= kMax / n;
  return coords;
}

double minkowski_inner(const Vec& x, const Vec& y) {
  require_same_dim(x.size(), y.size(), "minkowski_inner");
  const Eigen::Index n = x.size() - 1;
  return -x(0) * y(0) + x.tail(n).dot(y.tail(n));
}

LorentzPoint lorentz_from_space(const Vec& space) {
  Vec c(space.size() + 1);
  c(0) = std::sqrt(1.0 + space.squaredNorm());
  c.tail(space.size()) = space;
  return {std::move(c)};
}

LorentzPoint renormalize(const LorentzPoint& x) { return lorentz_from_space(x.space()); }

KleinPoint klein_origin(Eigen::Index n) { return {Vec::Zero(n)}; }
PoincarePoint poincare_origin(Eigen::Index n) { return {Vec::Zero(n)}; }
LorentzPoint lorentz_origin(Eigen::Index n) {
  Vec c = Vec::Zero(n + 1);
  c(0) = 1.0;
  return {std::move(c)};
}

Eigen::Index dim(const KleinPoint& x) { return x.coords.size(); }
Eigen::Index dim(const PoincarePoint& x) { return x.coords.size(); }
Eigen::Index dim(const LorentzPoint& x) { return x.coords.size() - 1; }

bool is_valid(const KleinPoint& x) {
  return x.coords.size() >= 1 && x.coords.allFinite() &&
         x.coords.norm() <= 1.0 - kBallEps * (1.0 - 1e-6);
}

bool is_valid(const PoincarePoint& x) {
  return x.coords.size() >= 1 && x.coords.allFinite() &&
         x.coords.norm() <= 1.0 - kBallEps * (1.0 - 1e-6);
}

bool is_valid(const LorentzPoint& x) {
  if (x.coords.size() < 2 || !x.coords.allFinite() || x.time() <= 0.0) return false;
  const double expected = std::sqrt(1.0 + x.space().squaredNorm());
  return std::abs(x.time() - expected) <= 1e-9 * std::max(1.0, expected);
}

double lorentz_factor(const KleinPoint& x) {
  return 1.0 / std::sqrt(one_minus_sq(x.coords));
}

double poincare_conformal_factor(const PoincarePoint& x) {
  return 2.0 / one_minus_sq(x.coords);
}

Mat klein_metric(const KleinPoint& x) {
  const Eigen::Index n = dim(x);
  const double a = one_minus_sq(x.coords);
  return Mat::Identity(n, n) / a + x.coords * x.coords.transpose() / (a * a);
}

Mat klein_metric_inverse(const KleinPoint& x) {
  const Eigen::Index n = dim(x);
  const double a = one_minus_sq(x.coords);
  return a * (Mat::Identity(n, n) - x.coords * x.coords.transpose());
}

double metric_inner(const KleinPoint& x, const Vec& u, const Vec& v) {
  require_same_dim(dim(x), u.size(), "metric_inner");
  require_same_dim(dim(x), v.size(), "metric_inner");
  const double a = one_minus_sq(x.coords);
  return u.dot(v) / a + x.coords.dot(u) * x.coords.dot(v) / (a * a);
}

double metric_inner(const PoincarePoint& x, const Vec& u, const Vec& v) {
  require_same_dim(dim(x), u.size(), "metric_inner");
  require_same_dim(dim(x), v.size(), "metric_inner");
  const double rho = poincare_conformal_factor(x);
  return rho * rho * u.dot(v);
}

double metric_inner(const LorentzPoint& x, const Vec& u, const Vec& v) {
  require_same_dim(x.coords.size(), u.size(), "metric_inner");
  require_same_dim(x.coords.size(), v.size(), "metric_inner");
  return minkowski_inner(u, v);
}

// ---------------------------------------------------------------------------
// Point maps

KleinPoint to_klein(const KleinPoint& x) { return x; }

KleinPoint to_klein(const PoincarePoint& x) {
  return {clamp_to_ball(2.0 / (1.0 + x.coords.squaredNorm()) * x.coords)};
}

KleinPoint to_klein(const LorentzPoint& x) { return {clamp_to_ball(x.space() / x.time())}; }

PoincarePoint to_poincare(const KleinPoint& x) {
  const double s = std::sqrt(one_minus_sq(x.coords));
  return {clamp_to_ball(x.coords / (1.0 + s))};
}

PoincarePoint to_poincare(const PoincarePoint& x) { return x; }
PoincarePoint to_poincare(const LorentzPoint& x) { return to_poincare(to_klein(x)); }

LorentzPoint to_lorentz(const KleinPoint& x) {
  return lorentz_from_space(lorentz_factor(x) * x.coords);
}

LorentzPoint to_lorentz(const PoincarePoint& x) { return to_lorentz(to_klein(x)); }
LorentzPoint to_lorentz(const LorentzPoint& x) { return renormalize(x); }

// ---------------------------------------------------------------------------
// Pushforwards

Tangent<KleinPoint> to_klein(const Tangent<KleinPoint>& v) { return v; }

Tangent<KleinPoint> to_klein(const Tangent<PoincarePoint>& v) {
  const Vec& x = v.base.coords;
  const double q = 1.0 + x.squaredNorm();
  Vec out = 2.0 / q * v.components - 4.0 * x.dot(v.components) / (q * q) * x;
  return {to_klein(v.base), std::move(out)};
}

Tangent<KleinPoint> to_klein(const Tangent<LorentzPoint>& v) {
  const LorentzPoint& x = v.base;
  const Eigen::Index n = dim(x);
  const double xt = x.time();
  const double vt = v.components(0);
  Vec out = -vt / (xt * xt) * x.space() + v.components.tail(n) / xt;
  return {to_klein(x), std::move(out)};
}

Tangent<PoincarePoint> to_poincare(const Tangent<KleinPoint>& v) {
  const Vec& x = v.base.coords;
  const double s = std::sqrt(one_minus_sq(x));
  Vec out = v.components / (1.0 + s) +
            x.dot(v.components) / (s * (1.0 + s) * (1.0 + s)) * x;
  return {to_poincare(v.base), std::move(out)};
}

Tangent<PoincarePoint> to_poincare(const Tangent<PoincarePoint>& v) { return v; }
Tangent<PoincarePoint> to_poincare(const Tangent<LorentzPoint>& v) {
  return to_poincare(to_klein(v));
}

Tangent<LorentzPoint> to_lorentz(const Tangent<KleinPoint>& v) {
  const Vec& x = v.base.coords;
  const Eigen::Index n = x.size();
  const double a = one_minus_sq(x);
  const double xv = x.dot(v.components) / std::pow(a, 1.5);
  Vec out(n + 1);
  out(0) = xv;
  out.tail(n) = v.components / std::sqrt(a) + xv * x;
  LorentzPoint base = to_lorentz(v.base);
  return {base, project_lorentz_tangent(base, std::move(out))};
}

Tangent<LorentzPoint> to_lorentz(const Tangent<PoincarePoint>& v) {
  return to_lorentz(to_klein(v));
}
Tangent<LorentzPoint> to_lorentz(const Tangent<LorentzPoint>& v) { return v; }

Point convert_point(const Point& p, Model dst) {
  return std::visit(
      [dst](const auto& x) -> Point {
        switch (dst) {
          case Model::Klein:
            return to_klein(x);
          case Model::Poincare:
            return to_poincare(x);
          case Model::Lorentz:
            return to_lorentz(x);
        }
        throw std::invalid_argument("convert_point: unknown model");
      },
      p);
}

TangentVector pushforward(const TangentVector& v, Model dst) {
  return std::visit(
      [dst](const auto& t) -> TangentVector {
        switch (dst) {
          case Model::Klein:
            return to_klein(t);
          case Model::Poincare:
            return to_poincare(t);
          case Model::Lorentz:
            return to_lorentz(t);
        }
        throw std::invalid_argument("pushforward: unknown model");
      },
      v);
}

// ---------------------------------------------------------------------------
// Distances

double distance(const KleinPoint& x, const KleinPoint& y) {
  require_same_dim(dim(x), dim(y), "distance");
  // Same quantity as acosh((1 - x.y) / (sqrt(1-|x|^2) sqrt(1-|y|^2))), via
  // sinh^2 d = (a |w|^2 + (x.w)^2) / (a b), w = y - x, which does not cancel
  // for nearby points.
  const double a = one_minus_sq(x.coords);
  const double b = one_minus_sq(y.coords);
  const Vec w = y.coords - x.coords;
  const double xw = x.coords.dot(w);
  const double sinh_sq = (a * w.squaredNorm() + xw * xw) / (a * b);
  return std::asinh(std::sqrt(std::max(sinh_sq, 0.0)));
}

double distance(const PoincarePoint& x, const PoincarePoint& y) {
  require_same_dim(dim(x), dim(y), "distance");
  const double a = one_minus_sq(x.coords);
  const double b = one_minus_sq(y.coords);
  const double delta = 2.0 * (x.coords - y.coords).squaredNorm() / (a * b);
  // acosh(1 + delta) without forming 1 + delta.
  return std::log1p(delta + std::sqrt(delta * (delta + 2.0)));
}

double distance(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_dim(dim(x), dim(y), "distance");
  return clamped_acosh(-minkowski_inner(x.coords, y.coords));
}

// ---------------------------------------------------------------------------
// Geodesics

KleinPoint geodesic_unit(const KleinPoint& x, const Vec& v, double t) {
  require_same_dim(dim(x), v.size(), "geodesic_unit");
  require_unit(metric_inner(x, v, v));
  const double lam_sq = 1.0 / one_minus_sq(x.coords);
  const double sh = std::sinh(t);
  const double denom = std::cosh(t) + lam_sq * x.coords.dot(v) * sh;
  return {clamp_to_ball(x.coords + sh * v / denom)};
}

PoincarePoint geodesic_unit(const PoincarePoint& x, const Vec& v, double t) {
  require_same_dim(dim(x), v.size(), "geodesic_unit");
  require_unit(metric_inner(x, v, v));
  return exp_map(x, t * v);
}

LorentzPoint geodesic_unit(const LorentzPoint& x, const Vec& v, double t) {
  require_same_dim(x.coords.size(), v.size(), "geodesic_unit");
  require_unit(minkowski_inner(v, v));
  return renormalize({x.coords * std::cosh(t) + v * std::sinh(t)});
}

// ---------------------------------------------------------------------------
// Exponential and logarithmic maps

KleinPoint exp_map(const KleinPoint& x, const Vec& v) {
  require_same_dim(dim(x), v.size(), "exp_map");
  const double r = metric_norm(x, v);
  const double lam_sq = 1.0 / one_minus_sq(x.coords);
  // Numerator and denominator divided by cosh r so long steps do not overflow.
  const double tc = tanhc(r);
  const double denom = 1.0 + lam_sq * x.coords.dot(v) * tc;
  return {clamp_to_ball(x.coords + tc * v / denom)};
}

PoincarePoint exp_map(const PoincarePoint& x, const Vec& v) {
  require_same_dim(dim(x), v.size(), "exp_map");
  const double rho = poincare_conformal_factor(x);
  const double r = v.norm();
  const double half = rho / 2.0;
  // tanh(rho r / 2) / r
  const double scale = r * half < kSeriesThreshold
                           ? half * (1.0 - (half * r) * (half * r) / 3.0)
                           : std::tanh(half * r) / r;
  return mobius_add(x, PoincarePoint{clamp_to_ball(scale * v)});
}

LorentzPoint exp_map(const LorentzPoint& x, const Vec& v) {
  require_same_dim(x.coords.size(), v.size(), "exp_map");
  const double r = std::sqrt(std::max(minkowski_inner(v, v), 0.0));
  return renormalize({std::cosh(r) * x.coords + sinhc(r) * v});
}

Vec log_map(const KleinPoint& x, const KleinPoint& y) {
  require_same_dim(dim(x), dim(y), "log_map");
  // d(x, y) (y - x) / |y - x|_K, with d / |y - x|_K = (asinh z / z) sqrt(a / b)
  // where z = sinh d.
  const double a = one_minus_sq(x.coords);
  const double b = one_minus_sq(y.coords);
  const Vec w = y.coords - x.coords;
  const double xw = x.coords.dot(w);
  const double z = std::sqrt(std::max((a * w.squaredNorm() + xw * xw) / (a * b), 0.0));
  return asinhc(z) * std::sqrt(a / b) * w;
}

Vec log_map(const PoincarePoint& x, const PoincarePoint& y) {
  require_same_dim(dim(x), dim(y), "log_map");
  const double rho = poincare_conformal_factor(x);
  const Vec w = mobius_add(PoincarePoint{-x.coords}, y).coords;
  return 2.0 / rho * atanhc(w.norm()) * w;
}

Vec log_map(const LorentzPoint& x, const LorentzPoint& y) {
  require_same_dim(dim(x), dim(y), "log_map");
  const double c = std::max(-minkowski_inner(x.coords, y.coords), 1.0);
  const double d = std::acosh(c);
  Vec v = inv_sinhc(d) * (y.coords - c * x.coords);
  return project_lorentz_tangent(x, std::move(v));
}

// ---------------------------------------------------------------------------
// Parallel transport from the origin

Vec transport_from_origin(const KleinPoint& x, const Vec& v) {
  require_same_dim(dim(x), v.size(), "transport_from_origin");
  const double s = std::sqrt(one_minus_sq(x.coords));
  return s * (v - x.coords.dot(v) / (1.0 + s) * x.coords);
}

Vec transport_from_origin(const PoincarePoint& x, const Vec& v) {
  require_same_dim(dim(x), v.size(), "transport_from_origin");
  return one_minus_sq(x.coords) * v;
}

Vec transport_from_origin(const LorentzPoint& x, const Vec& v) {
  require_same_dim(x.coords.size(), v.size(), "transport_from_origin");
  if (std::abs(v(0)) > kContractTol) {
    throw std::invalid_argument("transport_from_origin: vector is not tangent at the origin");
  }
  const Eigen::Index n = dim(x);
  const LorentzPoint o = lorentz_origin(n);
  const double d = distance(o, x);
  if (d < kSeriesThreshold) {
    // Limit of the general formula: v + (x_s . v_s) [1; x_s / (1 + x_t)].
    const double xv = x.space().dot(v.tail(n));
    Vec out = v;
    out(0) += xv;
    out.tail(n) += xv / (1.0 + x.time()) * x.space();
    return out;
  }
  const Vec log_ox = log_map(o, x);
  const Vec log_xo = log_map(x, o);
  return v - minkowski_inner(log_ox, v) / (d * d) * (log_ox + log_xo);
}

namespace reference {

Vec klein_transport_from_origin_printed(const KleinPoint& x, const Vec& v) {
  const double s = std::sqrt(one_minus_sq(x.coords));
  if (1.0 - s < kSeriesThreshold * kSeriesThreshold) return v;
  return x.coords.dot(v) * (s - 2.0) / (1.0 - s) * x.coords + s * v;
}

}  // namespace reference

}  // namespace hnn
