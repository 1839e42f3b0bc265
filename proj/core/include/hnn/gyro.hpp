#pragma once

// Einstein gyrovector space on the Klein ball, plus Mobius addition on the
// Poincare ball.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hnn/manifolds.hpp"

namespace hnn {

/// c is the radius of the ball. The rest of the library works with c = 1.
struct GyroParams {
  double c = 1.0;
};

/// Lorentz factor 1 / sqrt(1 - |x|^2 / c^2).
double gamma_factor(const Vec& x, const GyroParams& params = {});

KleinPoint einstein_add(const KleinPoint& x, const KleinPoint& y,
                        const GyroParams& params = {});
KleinPoint einstein_neg(const KleinPoint& x);
/// r (x)E x. Defined as the origin when x = 0.
KleinPoint einstein_scalar(double r, const KleinPoint& x,
                           const GyroParams& params = {});
/// gyr[x, y] z, evaluated as (-(x (+) y)) (+) (x (+) (y (+) z)).
KleinPoint gyration(const KleinPoint& x, const KleinPoint& y, const KleinPoint& z);

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y);

/// Einstein version of an origin-preserving map f: exp_o(f(log_o(x))).
/// Throws std::invalid_argument when f(0) != 0.
KleinPoint einstein_apply(const std::function<Vec(const Vec&)>& f,
                          const KleinPoint& x);

/// M (x)E x. Returns the origin when M x = 0.
KleinPoint einstein_matvec(const Mat& m, const KleinPoint& x);

/// x (+)E b; the tangent-space bias translation exp_x(P_{o->x}(log_o b)).
KleinPoint bias_translate(const KleinPoint& x, const KleinPoint& b);

/// x (+)E ((-x (+)E y) (x)E t). Traces the straight chord through x and y.
KleinPoint klein_geodesic_between(const KleinPoint& x, const KleinPoint& y, double t);

/// Gamma-weighted convex combination sum_i (w_i g_i / sum_j w_j g_j) x_i.
/// Throws std::invalid_argument("empty aggregation") when there is nothing to
/// aggregate or every weight is zero.
KleinPoint einstein_midpoint(std::span<const KleinPoint> points,
                             std::span<const double> weights);

}  // namespace hnn
