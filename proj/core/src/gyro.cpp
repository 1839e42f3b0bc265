#include "hnn/gyro.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hnn {

namespace {

Vec clamp_to_radius(Vec x, double c) {
  const double max_norm = c * (1.0 - kBallEps);
  const double n = x.norm();
  if (n > max_norm) x *= max_norm / n;
  return x;
}

}  // namespace

double gamma_factor(const Vec& x, const GyroParams& params) {
  return 1.0 / std::sqrt(1.0 - x.squaredNorm() / (params.c * params.c));
}

KleinPoint einstein_add(const KleinPoint& x, const KleinPoint& y, const GyroParams& params) {
  if (x.coords.size() != y.coords.size()) {
    throw std::invalid_argument("einstein_add: dimension mismatch");
  }
  const double c2 = params.c * params.c;
  const double g = gamma_factor(x.coords, params);
  const double xy = x.coords.dot(y.coords);
  Vec sum = x.coords + y.coords / g + (g / (1.0 + g)) * (xy / c2) * x.coords;
  return {clamp_to_radius(sum / (1.0 + xy / c2), params.c)};
}

KleinPoint einstein_neg(const KleinPoint& x) { return {-x.coords}; }

KleinPoint einstein_scalar(double r, const KleinPoint& x, const GyroParams& params) {
  const double n = x.coords.norm();
  if (n == 0.0) return {Vec::Zero(x.coords.size())};
  const double z = std::min(n / params.c, kAtanhMax);
  return {clamp_to_radius(params.c * std::tanh(r * std::atanh(z)) / n * x.coords, params.c)};
}

KleinPoint gyration(const KleinPoint& x, const KleinPoint& y, const KleinPoint& z) {
  return einstein_add(einstein_neg(einstein_add(x, y)),
                      einstein_add(x, einstein_add(y, z)));
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y) {
  if (x.coords.size() != y.coords.size()) {
    throw std::invalid_argument("mobius_add: dimension mismatch");
  }
  const double xy = x.coords.dot(y.coords);
  const double x2 = x.coords.squaredNorm();
  const double y2 = y.coords.squaredNorm();
  Vec num = (1.0 + 2.0 * xy + y2) * x.coords + (1.0 - x2) * y.coords;
  return {clamp_to_ball(num / (1.0 + 2.0 * xy + x2 * y2))};
}

KleinPoint einstein_apply(const std::function<Vec(const Vec&)>& f, const KleinPoint& x) {
  const Eigen::Index n = x.coords.size();
  if (f(Vec::Zero(n)).norm() > 1e-12) {
    throw std::invalid_argument("einstein_apply: f must map 0 to 0");
  }
  const KleinPoint o = klein_origin(n);
  const Vec image = f(log_map(o, x));
  return exp_map(klein_origin(image.size()), image);
}

KleinPoint einstein_matvec(const Mat& m, const KleinPoint& x) {
  if (m.cols() != x.coords.size()) {
    throw std::invalid_argument("einstein_matvec: matrix has " + std::to_string(m.cols()) +
                                " columns but the point has dimension " +
                                std::to_string(x.coords.size()));
  }
  const Vec mx = m * x.coords;
  const double mx_norm = mx.norm();
  const double x_norm = x.coords.norm();
  if (mx_norm == 0.0 || x_norm == 0.0) return {Vec::Zero(m.rows())};
  // (2 / |x|) atanh(|x| / (1 + sqrt(1 - |x|^2))) -> 1 as |x| -> 0.
  const double coeff =
      x_norm < kSeriesThreshold
          ? 1.0 + x_norm * x_norm / 3.0
          : 2.0 / x_norm *
                std::atanh(std::min(x_norm / (1.0 + std::sqrt(1.0 - x_norm * x_norm)), kAtanhMax));
  return {clamp_to_ball(std::tanh(coeff * mx_norm) / mx_norm * mx)};
}

KleinPoint bias_translate(const KleinPoint& x, const KleinPoint& b) { return einstein_add(x, b); }

KleinPoint klein_geodesic_between(const KleinPoint& x, const KleinPoint& y, double t) {
  const KleinPoint step = einstein_add(einstein_neg(x), y);
  return einstein_add(x, einstein_scalar(t, step));
}

KleinPoint einstein_midpoint(std::span<const KleinPoint> points, std::span<const double> weights) {
  if (points.size() != weights.size()) {
    throw std::invalid_argument("einstein_midpoint: points and weights differ in length");
  }
  if (points.empty()) throw std::invalid_argument("empty aggregation");
  const Eigen::Index n = points.front().coords.size();
  Vec acc = Vec::Zero(n);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("einstein_midpoint: negative weight");
    if (points[i].coords.size() != n) {
      throw std::invalid_argument("einstein_midpoint: dimension mismatch");
    }
    const double wg = weights[i] * gamma_factor(points[i].coords);
    acc += wg * points[i].coords;
    total += wg;
  }
  if (total <= 0.0) throw std::invalid_argument("empty aggregation");
  return {clamp_to_ball(acc / total)};
}

}  // namespace hnn
