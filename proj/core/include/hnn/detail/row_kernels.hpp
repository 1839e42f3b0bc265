#pragma once

// Per-row network kernels, written once over a scalar type T so the same code
// path produces values (T = double) and reverse-mode gradients (T = ad::Var).
//
// Each kernel starts from u = M p, the product of the layer weight with the
// row's parameter-free input vector, and ends at the tangent coordinates at
// the origin (orthonormal frame) of the activated hidden point, which feed the
// Euclidean readout.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hnn/autodiff.hpp"
#include "hnn/manifolds.hpp"

namespace hnn::detail {

template <class T>
using Row = std::vector<T>;

template <class T>
T dot(const Row<T>& a, const Row<T>& b) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

template <class T>
T sqnorm(const Row<T>& a) {
  return dot(a, a);
}

template <class T>
Row<T> scaled(const Row<T>& a, const T& f) {
  Row<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * f;
  return out;
}

template <class T>
Row<T> clamp_ball(Row<T> x) {
  using std::sqrt;
  constexpr double kMax = 1.0 - kBallEps;
  const T n2 = sqnorm(x);
  if (value(n2) > kMax * kMax) {
    const T f = T(kMax) / sqrt(n2);
    for (auto& e : x) e = e * f;
  }
  return x;
}

// tanh(k r) / r as a function of r^2.
template <class T>
T tanh_over(const T& r2, double k) {
  using std::sqrt;
  using std::tanh;
  if (value(r2) < kSeriesThreshold * kSeriesThreshold) return k * (1.0 - k * k * r2 / 3.0);
  const T r = sqrt(r2);
  return tanh(k * r) / r;
}

// atanh(n) / n as a function of n^2, with the argument clamped below 1.
template <class T>
T atanh_over(const T& n2) {
  using std::atanh;
  using std::sqrt;
  if (value(n2) < kSeriesThreshold * kSeriesThreshold) return 1.0 + n2 / 3.0;
  const T n = sqrt(n2);
  if (value(n) > kAtanhMax) return T(std::atanh(kAtanhMax)) / n;
  return atanh(n) / n;
}

// asinh(n) / n as a function of n^2.
template <class T>
T asinh_over(const T& n2) {
  using std::asinh;
  using std::sqrt;
  if (value(n2) < kSeriesThreshold * kSeriesThreshold) return 1.0 - n2 / 6.0;
  const T n = sqrt(n2);
  return asinh(n) / n;
}

// sinh(r) / r as a function of r^2.
template <class T>
T sinh_over(const T& r2) {
  using std::sinh;
  using std::sqrt;
  if (value(r2) < kSeriesThreshold * kSeriesThreshold) return 1.0 + r2 / 6.0;
  const T r = sqrt(r2);
  return sinh(r) / r;
}

template <class T>
T cosh_of(const T& r2) {
  using std::cosh;
  using std::sqrt;
  if (value(r2) < kSeriesThreshold * kSeriesThreshold) return 1.0 + r2 / 2.0;
  return cosh(sqrt(r2));
}

template <class T>
Row<T> relu(Row<T> x) {
  for (auto& e : x) {
    if (!(value(e) > 0.0)) e = T(0.0);
  }
  return x;
}

template <class T>
Row<T> einstein_add(const Row<T>& x, const Row<T>& y) {
  using std::sqrt;
  const T g = 1.0 / sqrt(1.0 - sqnorm(x));
  const T xy = dot(x, y);
  const T cx = 1.0 + (g / (1.0 + g)) * xy;
  const T denom = 1.0 + xy;
  Row<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (cx * x[i] + y[i] / g) / denom;
  return clamp_ball(std::move(out));
}

template <class T>
Row<T> mobius_add(const Row<T>& x, const Row<T>& y) {
  const T xy = dot(x, y);
  const T x2 = sqnorm(x);
  const T y2 = sqnorm(y);
  const T cx = 1.0 + 2.0 * xy + y2;
  const T cy = 1.0 - x2;
  const T denom = 1.0 + 2.0 * xy + x2 * y2;
  Row<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (cx * x[i] + cy * y[i]) / denom;
  return clamp_ball(std::move(out));
}

// ---------------------------------------------------------------------------
// Klein: (M (x)E x) (+)E b, then exp_o(ReLU(log_o(.))), then log_o.

template <class T>
Row<T> klein_hidden(const Row<T>& u, double k, const Row<T>& bias) {
  Row<T> h1 = clamp_ball(scaled(u, tanh_over(sqnorm(u), k)));
  return einstein_add(h1, bias);
}

template <class T>
Row<T> klein_readout_tangent(const Row<T>& h) {
  Row<T> z = relu(scaled(h, atanh_over(sqnorm(h))));
  Row<T> a = clamp_ball(scaled(z, tanh_over(sqnorm(z), 1.0)));
  return scaled(a, atanh_over(sqnorm(a)));
}

// ---------------------------------------------------------------------------
// Poincare: (M (x)M x) (+)M b. The readout frame is orthonormal at the origin,
// i.e. twice the Poincare log_o coordinates.

template <class T>
Row<T> poincare_hidden(const Row<T>& u, double k, const Row<T>& bias) {
  Row<T> h1 = clamp_ball(scaled(u, tanh_over(sqnorm(u), k)));
  return mobius_add(h1, bias);
}

template <class T>
Row<T> poincare_readout_tangent(const Row<T>& h) {
  Row<T> z = relu(scaled(h, atanh_over(sqnorm(h))));
  Row<T> a = clamp_ball(scaled(z, tanh_over(sqnorm(z), 1.0)));
  return scaled(a, 2.0 * atanh_over(sqnorm(a)));
}

// ---------------------------------------------------------------------------
// Lorentz: exp_o([0; u]) followed by the bias translation
// exp_h(P_{o->h}(log_o b)). Points are carried as [x_t, x_s...]; bias as the
// full (m+1)-vector of which only the spatial part enters (x_t is implied).

template <class T>
Row<T> lorentz_hidden(const Row<T>& u, double k, const Row<T>& bias) {
  using std::sqrt;
  const std::size_t m = u.size();
  Row<T> us = scaled(u, T(k));
  Row<T> h1s = scaled(us, sinh_over(sqnorm(us)));
  const T h1t = sqrt(1.0 + sqnorm(h1s));

  Row<T> bs(bias.begin() + 1, bias.end());
  Row<T> vb = scaled(bs, asinh_over(sqnorm(bs)));

  // P_{o->h1}(v) = v + (h1_s . v_s) [1; h1_s / (1 + h1_t)] for v = [0; v_s].
  const T xv = dot(h1s, vb);
  const T wt = xv;
  const T c = xv / (1.0 + h1t);
  Row<T> ws(m);
  for (std::size_t i = 0; i < m; ++i) ws[i] = vb[i] + c * h1s[i];

  T q = sqnorm(ws) - wt * wt;
  if (value(q) < 0.0) q = T(0.0);
  const T ch = cosh_of(q);
  const T sc = sinh_over(q);
  Row<T> out(m + 1);
  for (std::size_t i = 0; i < m; ++i) out[i + 1] = ch * h1s[i] + sc * ws[i];
  Row<T> hs(out.begin() + 1, out.end());
  out[0] = sqrt(1.0 + sqnorm(hs));
  return out;
}

template <class T>
Row<T> lorentz_readout_tangent(const Row<T>& h) {
  Row<T> hs(h.begin() + 1, h.end());
  Row<T> z = relu(scaled(hs, asinh_over(sqnorm(hs))));
  Row<T> as = scaled(z, sinh_over(sqnorm(z)));
  return scaled(as, asinh_over(sqnorm(as)));
}

template <class T>
Row<T> hidden_row(Model flavor, const Row<T>& u, double k, const Row<T>& bias) {
  switch (flavor) {
    case Model::Klein:
      return klein_hidden(u, k, bias);
    case Model::Poincare:
      return poincare_hidden(u, k, bias);
    case Model::Lorentz:
      return lorentz_hidden(u, k, bias);
  }
  return {};
}

template <class T>
Row<T> readout_tangent_row(Model flavor, const Row<T>& h) {
  switch (flavor) {
    case Model::Klein:
      return klein_readout_tangent(h);
    case Model::Poincare:
      return poincare_readout_tangent(h);
    case Model::Lorentz:
      return lorentz_readout_tangent(h);
  }
  return {};
}

}  // namespace hnn::detail
