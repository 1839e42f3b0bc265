#include "hnn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

#include "hnn/data.hpp"
#include "hnn/gyro.hpp"
#include "hnn/nn.hpp"
#include "hnn/train.hpp"
#include "json.hpp"

namespace hnn::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Independent model formulas used by the oracle. Nothing here calls into the
// library's geometry.

namespace hyp {

double inner(const Vec& x, const Vec& y) {
  return -x(0) * y(0) + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

Vec from_klein(const Vec& k) {
  const double g = 1.0 / std::sqrt(1.0 - k.squaredNorm());
  Vec x(k.size() + 1);
  x(0) = g;
  x.tail(k.size()) = g * k;
  return x;
}

Vec tangent_from_klein(const Vec& k, const Vec& v) {
  const double g = 1.0 / std::sqrt(1.0 - k.squaredNorm());
  const double dg = g * g * g * k.dot(v);
  Vec out(k.size() + 1);
  out(0) = dg;
  out.tail(k.size()) = dg * k + g * v;
  return out;
}

Vec to_klein(const Vec& x) { return x.tail(x.size() - 1) / x(0); }

Vec tangent_to_klein(const Vec& x, const Vec& v) {
  const Eigen::Index n = x.size() - 1;
  return v.tail(n) / x(0) - x.tail(n) * (v(0) / (x(0) * x(0)));
}

double distance(const Vec& x, const Vec& y) { return std::acosh(std::max(1.0, -inner(x, y))); }

Vec exp(const Vec& x, const Vec& v) {
  const double r = std::sqrt(std::max(0.0, inner(v, v)));
  const double sc = r < 1e-8 ? 1.0 + r * r / 6.0 : std::sinh(r) / r;
  return std::cosh(r) * x + sc * v;
}

Vec log(const Vec& x, const Vec& y) {
  const double c = std::max(1.0, -inner(x, y));
  const double d = std::acosh(c);
  const double f = d < 1e-8 ? 1.0 : d / std::sinh(d);
  return f * (y - c * x);
}

// P_{x->y}(v) = v + <y, v> / (1 - <x, y>) (x + y).
Vec transport(const Vec& x, const Vec& y, const Vec& v) {
  return v + inner(y, v) / (1.0 - inner(x, y)) * (x + y);
}

}  // namespace hyp

namespace ball {

double lambda(const Vec& p) { return 2.0 / (1.0 - p.squaredNorm()); }

Vec add(const Vec& x, const Vec& y) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  return ((1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y) / (1.0 + 2.0 * xy + x2 * y2);
}

Vec from_klein(const Vec& k) { return k / (1.0 + std::sqrt(1.0 - k.squaredNorm())); }

Vec tangent_from_klein(const Vec& k, const Vec& v) {
  const double s = std::sqrt(1.0 - k.squaredNorm());
  return v / (1.0 + s) + k * (k.dot(v) / (s * (1.0 + s) * (1.0 + s)));
}

Vec to_klein(const Vec& p) { return 2.0 * p / (1.0 + p.squaredNorm()); }

Vec tangent_to_klein(const Vec& p, const Vec& v) {
  const double q = 1.0 + p.squaredNorm();
  return 2.0 * v / q - 4.0 * p * (p.dot(v) / (q * q));
}

// sinh(d / 2) = |p - q| / sqrt((1 - |p|^2)(1 - |q|^2)).
double distance(const Vec& p, const Vec& q) {
  return 2.0 * std::asinh((p - q).norm() /
                          std::sqrt((1.0 - p.squaredNorm()) * (1.0 - q.squaredNorm())));
}

Vec exp(const Vec& p, const Vec& v) {
  const double r = v.norm();
  if (r == 0.0) return p;
  return add(p, std::tanh(lambda(p) * r / 2.0) / r * v);
}

Vec log(const Vec& p, const Vec& q) {
  const Vec w = add(-p, q);
  const double r = w.norm();
  if (r == 0.0) return Vec::Zero(p.size());
  return 2.0 / lambda(p) * std::atanh(r) / r * w;
}

}  // namespace ball

// ---------------------------------------------------------------------------
// Sampling and bookkeeping

std::string fmt(const Vec& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  os << ']';
  return os.str();
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

std::string fmt(const Mat& m) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) os << (r ? "," : "") << fmt(Vec(m.row(r).transpose()));
  os << ']';
  return os.str();
}

class Tracker {
 public:
  template <class Describe>
  void add(double err, Describe&& describe) {
    if (std::isnan(err)) err = kInf;
    if (err > max_ || worst_.empty()) {
      max_ = std::max(max_, err);
      if (err >= max_) worst_ = describe();
    }
  }
  double max() const { return max_; }
  const std::string& worst() const { return worst_; }

 private:
  double max_ = 0.0;
  std::string worst_;
};

Eigen::Index random_dim(std::mt19937_64& rng, int lo = 1, int hi = 16) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec gaussian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(rng, -bound, bound);
  return m;
}

Mat random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Mat g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian(n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  return qr.householderQ() * Mat::Identity(n, n);
}

// Tangent at x in the model's own coordinates with metric norm uniform in
// [0, max_norm] (exactly max_norm when `exact`).
Vec random_tangent(const KleinPoint& x, double max_norm, std::mt19937_64& rng, bool exact = false) {
  Vec u = gaussian(dim(x), rng);
  const double r = exact ? max_norm : uniform(rng, 0.0, max_norm);
  return u * (r / metric_norm(x, u));
}

Vec random_tangent(const PoincarePoint& x, double max_norm, std::mt19937_64& rng,
                   bool exact = false) {
  Vec u = gaussian(dim(x), rng);
  const double r = exact ? max_norm : uniform(rng, 0.0, max_norm);
  return u * (r / metric_norm(x, u));
}

Vec random_tangent(const LorentzPoint& x, double max_norm, std::mt19937_64& rng,
                   bool exact = false) {
  const Vec s = gaussian(dim(x), rng);
  Vec u(s.size() + 1);
  u(0) = x.space().dot(s) / x.time();
  u.tail(s.size()) = s;
  const double r = exact ? max_norm : uniform(rng, 0.0, max_norm);
  return u * (r / metric_norm(x, u));
}

Vec klein_transport(const SuiteOptions& opts, const KleinPoint& x, const Vec& v) {
  return opts.printed_transport ? reference::klein_transport_from_origin_printed(x, v)
                                : transport_from_origin(x, v);
}

// Near-boundary radius 1 - 10^-u, u uniform in [0, 6].
double boundary_radius(std::mt19937_64& rng) { return 1.0 - std::pow(10.0, -uniform(rng, 0.0, 6.0)); }

KleinPoint sample_near_boundary(Eigen::Index n, std::mt19937_64& rng) {
  Vec u = gaussian(n, rng);
  return {u / u.norm() * boundary_radius(rng)};
}

bool finite_point(const Point& p) {
  return std::visit([](const auto& q) { return q.coords.allFinite() && is_valid(q); }, p);
}

double lorentz_defect(const LorentzPoint& x) {
  const double expected = std::sqrt(1.0 + x.space().squaredNorm());
  if (!(x.time() > 0.0)) return kInf;
  return std::abs(x.time() - expected) / std::max(1.0, x.time());
}

// ---------------------------------------------------------------------------
// Suites

using SuiteFn = void (*)(std::mt19937_64&, long, const SuiteOptions&, Tracker&);

struct Suite {
  double tolerance;
  long default_samples;
  SuiteFn run;
};

constexpr double kMaxNorm = 0.95;

void suite_roundtrips(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const KleinPoint x = sample_ball(random_dim(rng), kMaxNorm, rng);
    const PoincarePoint p = to_poincare(x);
    const double e = std::max({(to_klein(to_poincare(x)).coords - x.coords).norm(),
                               (to_klein(to_lorentz(x)).coords - x.coords).norm(),
                               (to_poincare(to_lorentz(p)).coords - p.coords).norm()});
    t.add(e, [&] { return "x=" + fmt(x.coords); });
  }
}

void suite_isometry_distance(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const double dk = distance(x, y);
    const double e =
        std::max({std::abs(dk - distance(to_poincare(x), to_poincare(y))),
                  std::abs(dk - distance(to_lorentz(x), to_lorentz(y))),
                  std::abs(dk - conjugation_oracle("distance", {x, y, Vec(), 0.0})(0))});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " y=" + fmt(y.coords); });
  }
}

void suite_pushforward_metric(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const KleinPoint x = sample_ball(random_dim(rng), kMaxNorm, rng);
    const Vec u = random_tangent(x, 3.0, rng);
    const Vec w = random_tangent(x, 3.0, rng);
    const double gk = metric_inner(x, u, w);
    const auto pu = to_poincare(Tangent<KleinPoint>{x, u});
    const auto pw = to_poincare(Tangent<KleinPoint>{x, w});
    const auto lu = to_lorentz(Tangent<KleinPoint>{x, u});
    const auto lw = to_lorentz(Tangent<KleinPoint>{x, w});
    // Reverse direction: Poincare -> Lorentz and back to Klein.
    const auto plu = to_lorentz(pu);
    const auto kbu = to_klein(pu);
    const auto kbw = to_klein(pw);
    const double e = std::max(
        {std::abs(gk - metric_inner(pu.base, pu.components, pw.components)),
         std::abs(gk - metric_inner(lu.base, lu.components, lw.components)),
         std::abs(metric_inner(pu.base, pu.components, pu.components) -
                  metric_inner(plu.base, plu.components, plu.components)),
         std::abs(gk - metric_inner(kbu.base, kbu.components, kbw.components))});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " u=" + fmt(u) + " w=" + fmt(w); });
  }
}

template <class P>
void exp_log_case(const P& x, const P& y, std::mt19937_64& rng, Tracker& t) {
  const Vec v = random_tangent(x, 3.0, rng);
  const double e = std::max((log_map(x, exp_map(x, v)) - v).norm(),
                            (exp_map(x, log_map(x, y)).coords - y.coords).norm());
  t.add(e, [&] { return std::string(to_string(model_of(Point{x}))) + " x=" + fmt(x.coords) +
                        " v=" + fmt(v) + " y=" + fmt(y.coords); });
}

void suite_exp_log(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    exp_log_case(x, y, rng, t);
    exp_log_case(to_poincare(x), to_poincare(y), rng, t);
    exp_log_case(to_lorentz(x), to_lorentz(y), rng, t);
  }
}

template <class P>
void geodesic_case(const P& x, std::mt19937_64& rng, Tracker& t) {
  const Vec v = random_tangent(x, 1.0, rng, true);
  const double s = uniform(rng, -5.0, 5.0);
  const double e = std::abs(distance(x, geodesic_unit(x, v, s)) - std::abs(s));
  t.add(e, [&] { return std::string(to_string(model_of(Point{x}))) + " x=" + fmt(x.coords) +
                        " v=" + fmt(v) + " t=" + fmt(s); });
}

void suite_geodesic_speed(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const KleinPoint x = sample_ball(random_dim(rng), kMaxNorm, rng);
    geodesic_case(x, rng, t);
    geodesic_case(to_poincare(x), rng, t);
    geodesic_case(to_lorentz(x), rng, t);
  }
}

void suite_transport_isometry(std::mt19937_64& rng, long n, const SuiteOptions& opts, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const Vec u = gaussian(d, rng);
    const Vec w = gaussian(d, rng);
    const double g0 = u.dot(w);  // Klein metric at the origin is the identity
    const PoincarePoint p = to_poincare(x);
    const LorentzPoint l = to_lorentz(x);
    Vec ul = Vec::Zero(d + 1), wl = Vec::Zero(d + 1);
    ul.tail(d) = u;
    wl.tail(d) = w;
    const double e = std::max(
        {std::abs(metric_inner(x, klein_transport(opts, x, u), klein_transport(opts, x, w)) - g0),
         std::abs(metric_inner(p, transport_from_origin(p, u), transport_from_origin(p, w)) -
                  4.0 * g0),
         std::abs(metric_inner(l, transport_from_origin(l, ul), transport_from_origin(l, wl)) -
                  g0)});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " u=" + fmt(u) + " w=" + fmt(w); });
  }
}

void suite_transport_conjugation(std::mt19937_64& rng, long n, const SuiteOptions& opts,
                                 Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const Vec v = random_tangent(klein_origin(d), 2.0, rng);
    const Vec expected = conjugation_oracle("transport", {x, KleinPoint{}, v, 0.0});
    const Vec via_ball = to_klein(Tangent<PoincarePoint>{
                                      to_poincare(x),
                                      transport_from_origin(to_poincare(x), v / 2.0)})
                             .components;
    const double e = std::max((klein_transport(opts, x, v) - expected).norm(),
                              (via_ball - expected).norm());
    t.add(e, [&] { return "x=" + fmt(x.coords) + " v=" + fmt(v); });
  }
}

void suite_theorem6(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const double r = uniform(rng, -3.0, 3.0);
    const KleinPoint o = klein_origin(d);
    const double e =
        (einstein_scalar(r, x).coords - exp_map(o, r * log_map(o, x)).coords).norm();
    t.add(e, [&] { return "r=" + fmt(r) + " x=" + fmt(x.coords); });
  }
}

void suite_theorem7(std::mt19937_64& rng, long n, const SuiteOptions& opts, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const Vec v = random_tangent(klein_origin(d), 2.0, rng);
    const Vec p = klein_transport(opts, x, v);
    const Vec via_gyro = log_map(x, einstein_add(x, exp_map(klein_origin(d), v)));
    const Vec oracle = conjugation_oracle("transport", {x, KleinPoint{}, v, 0.0});
    const double e = std::max((p - via_gyro).norm(), (p - oracle).norm());
    t.add(e, [&] { return "x=" + fmt(x.coords) + " v=" + fmt(v); });
  }
}

void suite_theorem9_composition(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index a = random_dim(rng), b = random_dim(rng), c = random_dim(rng);
    const Mat m1 = random_matrix(a, b, rng);
    const Mat m2 = random_matrix(b, c, rng);
    const KleinPoint x = sample_ball(c, kMaxNorm, rng);
    const double e = (einstein_matvec(m1 * m2, x).coords -
                      einstein_matvec(m1, einstein_matvec(m2, x)).coords)
                         .norm();
    t.add(e, [&] { return "M=" + fmt(m1) + " M'=" + fmt(m2) + " x=" + fmt(x.coords); });
  }
}

void suite_theorem9_scaling(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index a = random_dim(rng), b = random_dim(rng);
    const Mat m = random_matrix(a, b, rng);
    const KleinPoint x = sample_ball(b, kMaxNorm, rng);
    const double r = uniform(rng, 1e-3, 3.0);
    const double e =
        (einstein_matvec(r * m, x).coords - einstein_scalar(r, einstein_matvec(m, x)).coords)
            .norm();
    t.add(e, [&] { return "r=" + fmt(r) + " M=" + fmt(m) + " x=" + fmt(x.coords); });
  }
}

void suite_theorem9_orthogonal(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const Mat q = random_orthogonal(d, rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const double e = (einstein_matvec(q, x).coords - q * x.coords).norm();
    t.add(e, [&] { return "M=" + fmt(q) + " x=" + fmt(x.coords); });
  }
}

void suite_matvec_definition(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index a = random_dim(rng), b = random_dim(rng);
    const Mat m = random_matrix(a, b, rng);
    const KleinPoint x = sample_ball(b, kMaxNorm, rng);
    const Vec expected = exp_map(klein_origin(a), m * log_map(klein_origin(b), x)).coords;
    const double e = (einstein_matvec(m, x).coords - expected).norm();
    t.add(e, [&] { return "M=" + fmt(m) + " x=" + fmt(x.coords); });
  }
}

void suite_bias_translation(std::mt19937_64& rng, long n, const SuiteOptions& opts, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint b = sample_ball(d, kMaxNorm, rng);
    const Vec expected =
        exp_map(x, klein_transport(opts, x, log_map(klein_origin(d), b))).coords;
    const double e = (bias_translate(x, b).coords - expected).norm();
    t.add(e, [&] { return "x=" + fmt(x.coords) + " b=" + fmt(b.coords); });
  }
}

void suite_gyrocommutativity(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const double e =
        (einstein_add(x, y).coords - gyration(x, y, einstein_add(y, x)).coords).norm();
    t.add(e, [&] { return "x=" + fmt(x.coords) + " y=" + fmt(y.coords); });
  }
}

void suite_gyroassociativity(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const KleinPoint z = sample_ball(d, kMaxNorm, rng);
    const Vec lhs = einstein_add(x, einstein_add(y, z)).coords;
    const Vec rhs = einstein_add(einstein_add(x, y), gyration(x, y, z)).coords;
    t.add((lhs - rhs).norm(), [&] {
      return "x=" + fmt(x.coords) + " y=" + fmt(y.coords) + " z=" + fmt(z.coords);
    });
  }
}

void suite_gyration_invariance(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const KleinPoint u = sample_ball(d, kMaxNorm, rng);
    const KleinPoint w = sample_ball(d, kMaxNorm, rng);
    const double e = std::abs(gyration(x, y, u).coords.dot(gyration(x, y, w).coords) -
                              u.coords.dot(w.coords));
    t.add(e, [&] {
      return "x=" + fmt(x.coords) + " y=" + fmt(y.coords) + " u=" + fmt(u.coords) +
             " w=" + fmt(w.coords);
    });
  }
}

void suite_einstein_inverse(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const KleinPoint x = sample_ball(random_dim(rng), kMaxNorm, rng);
    t.add(einstein_add(einstein_neg(x), x).coords.norm(), [&] { return "x=" + fmt(x.coords); });
  }
}

void suite_mobius_einstein(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const PoincarePoint p = to_poincare(sample_ball(d, kMaxNorm, rng));
    const PoincarePoint q = to_poincare(sample_ball(d, kMaxNorm, rng));
    const double e =
        (to_klein(mobius_add(p, q)).coords - einstein_add(to_klein(p), to_klein(q)).coords)
            .norm();
    t.add(e, [&] { return "p=" + fmt(p.coords) + " q=" + fmt(q.coords); });
  }
}

void suite_geodesic_chord(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const double s = uniform(rng, 0.0, 1.0);
    const Vec g = klein_geodesic_between(x, y, s).coords;
    // Distance from g to the line through x and y.
    const Vec dir = y.coords - x.coords;
    const double len2 = dir.squaredNorm();
    const Vec off = g - x.coords;
    const double chord = len2 > 0.0 ? (off - off.dot(dir) / len2 * dir).norm() : off.norm();
    const double e = std::max({chord, (klein_geodesic_between(x, y, 0.0).coords - x.coords).norm(),
                               (klein_geodesic_between(x, y, 1.0).coords - y.coords).norm(),
                               std::abs(distance(x, KleinPoint{g}) - s * distance(x, y))});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " y=" + fmt(y.coords) + " t=" + fmt(s); });
  }
}

void suite_midpoint(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const std::vector<KleinPoint> pair{x, y};
    const std::vector<KleinPoint> sym{x, einstein_neg(x)};
    const std::vector<KleinPoint> single{x};
    const std::vector<double> w2{1.0, 1.0};
    const std::vector<double> w1{1.0};
    const KleinPoint m = einstein_midpoint(pair, w2);
    const double dxy = distance(x, y);
    const double e = std::max({std::abs(distance(m, x) - dxy / 2.0),
                               std::abs(distance(m, y) - dxy / 2.0),
                               einstein_midpoint(sym, w2).coords.norm(),
                               (einstein_midpoint(single, w1).coords - x.coords).norm()});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " y=" + fmt(y.coords); });
  }
}

void suite_oracle_consistency(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const KleinPoint o = klein_origin(d);
    const Vec v = random_tangent(x, 3.0, rng);
    const Vec unit = random_tangent(x, 1.0, rng, true);
    const Vec v0 = random_tangent(o, 2.0, rng);
    const double s = uniform(rng, -5.0, 5.0);
    double e = 0.0;
    const OracleInputs cases[] = {{x, y, v, 0.0}, {x, y, unit, s}, {x, y, v0, 0.0}};
    const std::pair<const char*, int> ops[] = {
        {"distance", 0}, {"exp", 0}, {"log", 0}, {"geodesic", 1}, {"transport", 2}};
    for (const auto& [op, which] : ops) {
      const OracleInputs& in = cases[which];
      e = std::max(e, (conjugation_oracle(op, in, Route::Lorentz) -
                       conjugation_oracle(op, in, Route::Poincare))
                          .norm());
    }
    t.add(e, [&] {
      return "x=" + fmt(x.coords) + " y=" + fmt(y.coords) + " v=" + fmt(v) + " t=" + fmt(s);
    });
  }
}

void suite_oracle_agreement(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  // The library's Klein exp/log/geodesic against the oracle.
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_ball(d, kMaxNorm, rng);
    const KleinPoint y = sample_ball(d, kMaxNorm, rng);
    const Vec v = random_tangent(x, 3.0, rng);
    const Vec unit = random_tangent(x, 1.0, rng, true);
    const double s = uniform(rng, -5.0, 5.0);
    const double e = std::max(
        {(exp_map(x, v).coords - conjugation_oracle("exp", {x, y, v, 0.0})).norm(),
         (log_map(x, y) - conjugation_oracle("log", {x, y, v, 0.0})).norm(),
         (geodesic_unit(x, unit, s).coords - conjugation_oracle("geodesic", {x, y, unit, s})).norm()});
    t.add(e, [&] {
      return "x=" + fmt(x.coords) + " y=" + fmt(y.coords) + " v=" + fmt(v) + " t=" + fmt(s);
    });
  }
}

void suite_layer_commutation(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index in = random_dim(rng), out = random_dim(rng);
    const Mat w = random_matrix(out, in, rng);
    const KleinPoint b = sample_ball(out, kMaxNorm, rng);
    const KleinPoint x = sample_ball(in, kMaxNorm, rng);
    const KleinPoint k = klein_linear({w, b}, x);
    const PoincarePoint p = poincare_linear({w, to_poincare(b)}, to_poincare(x));
    const LorentzPoint l = lorentz_linear({w, to_lorentz(b)}, to_lorentz(x));
    const double e = std::max({(to_klein(p).coords - k.coords).norm(),
                               (to_klein(l).coords - k.coords).norm(),
                               (to_klein(hyperbolic_activation(p)).coords -
                                hyperbolic_activation(k).coords)
                                   .norm(),
                               (to_klein(hyperbolic_activation(l)).coords -
                                hyperbolic_activation(k).coords)
                                   .norm()});
    t.add(e, [&] {
      return "W=" + fmt(w) + " b=" + fmt(b.coords) + " x=" + fmt(x.coords);
    });
  }
}

HnnModel random_model(Model flavor, Eigen::Index in, Eigen::Index hidden, Eigen::Index classes,
                      double bias_norm, std::mt19937_64& rng) {
  HnnModel m = init_model(Model::Klein, in, hidden, classes, rng());
  m.bias = sample_ball(hidden, bias_norm, rng).coords;
  m.readout_bias = gaussian(classes, rng) * 0.1;
  return convert_model(m, flavor);
}

void suite_logit_parity(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index in = random_dim(rng), hidden = random_dim(rng);
    const Eigen::Index classes = random_dim(rng, 2, 6);
    const HnnModel k = random_model(Model::Klein, in, hidden, classes, kMaxNorm, rng);
    Mat features(1, in);
    features.row(0) = gaussian(in, rng).transpose();
    const Mat lk = forward(k, features);
    const double e = std::max((forward(convert_model(k, Model::Poincare), features) - lk).norm(),
                              (forward(convert_model(k, Model::Lorentz), features) - lk).norm());
    t.add(e, [&] {
      return "W=" + fmt(k.weight) + " b=" + fmt(k.bias) + " f=" + fmt(Vec(features.row(0).transpose()));
    });
  }
}

void suite_forward_consistency(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  // Batched forward against the composition of the per-point library layers.
  for (long i = 0; i < n; ++i) {
    const Model flavor = static_cast<Model>(i % 3);
    const Eigen::Index in = random_dim(rng), hidden = random_dim(rng);
    const Eigen::Index classes = random_dim(rng, 2, 6);
    HnnModel m = random_model(flavor, in, hidden, classes, kMaxNorm, rng);
    m.feature_scale = uniform(rng, 0.5, 2.0);
    const Vec f = gaussian(in, rng);
    Mat features(1, in);
    features.row(0) = f.transpose();
    const Point x0 = embed_features(flavor, m.feature_scale * f);
    Point h;
    switch (flavor) {
      case Model::Klein:
        h = hyperbolic_activation(klein_linear(klein_layer(m), std::get<KleinPoint>(x0)));
        break;
      case Model::Poincare:
        h = hyperbolic_activation(poincare_linear(poincare_layer(m), std::get<PoincarePoint>(x0)));
        break;
      case Model::Lorentz:
        h = hyperbolic_activation(lorentz_linear(lorentz_layer(m), std::get<LorentzPoint>(x0)));
        break;
    }
    const Vec expected = readout_logits(m, h);
    const double e = (forward(m, features).row(0).transpose() - expected).norm();
    t.add(e, [&] {
      return std::string(to_string(flavor)) + " W=" + fmt(m.weight) + " b=" + fmt(m.bias) +
             " f=" + fmt(f);
    });
  }
}

void suite_forward_validity(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Model flavor = static_cast<Model>(i % 3);
    const Eigen::Index in = random_dim(rng, 1, 8), hidden = random_dim(rng, 1, 8);
    HnnModel m = random_model(flavor, in, hidden, 3, kMaxNorm, rng);
    Vec f = gaussian(in, rng);
    f *= uniform(rng, 0.0, 10.0) / f.norm();
    const Point x0 = embed_features(flavor, f);
    bool ok = finite_point(x0);
    switch (flavor) {
      case Model::Klein: {
        const KleinPoint h = klein_linear(klein_layer(m), std::get<KleinPoint>(x0));
        ok = ok && finite_point(h) && finite_point(hyperbolic_activation(h));
        break;
      }
      case Model::Poincare: {
        const PoincarePoint h = poincare_linear(poincare_layer(m), std::get<PoincarePoint>(x0));
        ok = ok && finite_point(h) && finite_point(hyperbolic_activation(h));
        break;
      }
      case Model::Lorentz: {
        const LorentzPoint h = lorentz_linear(lorentz_layer(m), std::get<LorentzPoint>(x0));
        ok = ok && finite_point(h) && finite_point(hyperbolic_activation(h));
        break;
      }
    }
    Mat features(1, in);
    features.row(0) = f.transpose();
    ok = ok && forward(m, features).allFinite();
    t.add(ok ? 0.0 : 1.0, [&] { return std::string(to_string(flavor)) + " f=" + fmt(f); });
  }
}

void suite_stress(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint x = sample_near_boundary(d, rng);
    const KleinPoint y = sample_near_boundary(d, rng);
    const Vec v = gaussian(d, rng);
    const KleinPoint o = klein_origin(d);
    const PoincarePoint p = to_poincare(x);
    const LorentzPoint l = to_lorentz(x);
    bool ok = std::isfinite(distance(x, y)) &&
              std::isfinite(distance(p, to_poincare(y))) &&
              std::isfinite(distance(l, to_lorentz(y))) && finite_point(p) && finite_point(l) &&
              finite_point(exp_map(x, v)) && finite_point(exp_map(p, v)) &&
              log_map(x, y).allFinite() && log_map(p, to_poincare(y)).allFinite() &&
              log_map(l, to_lorentz(y)).allFinite() && transport_from_origin(x, v).allFinite() &&
              transport_from_origin(p, v).allFinite() && finite_point(einstein_add(x, y)) &&
              finite_point(einstein_scalar(2.0, x)) && finite_point(mobius_add(p, to_poincare(y))) &&
              finite_point(einstein_matvec(Mat::Identity(d, d) * 1.5, x)) &&
              finite_point(to_klein(l)) && finite_point(to_klein(p)) &&
              log_map(o, x).allFinite();
    t.add(ok ? 0.0 : 1.0, [&] { return "x=" + fmt(x.coords) + " y=" + fmt(y.coords); });
  }
}

void suite_lorentz_validity(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const Eigen::Index d = random_dim(rng);
    const KleinPoint k = sample_ball(d, kMaxNorm, rng);
    const LorentzPoint x = to_lorentz(k);
    const Vec v = random_tangent(x, 3.0, rng);
    const Vec unit = random_tangent(x, 1.0, rng, true);
    const Mat w = random_matrix(d, d, rng);
    const LorentzPoint b = to_lorentz(sample_ball(d, kMaxNorm, rng));
    const LorentzPoint h = lorentz_linear({w, b}, x);
    const double e = std::max({lorentz_defect(x), lorentz_defect(exp_map(x, v)),
                               lorentz_defect(geodesic_unit(x, unit, uniform(rng, -5.0, 5.0))),
                               lorentz_defect(h), lorentz_defect(hyperbolic_activation(h)),
                               lorentz_defect(to_lorentz(to_poincare(k)))});
    t.add(e, [&] { return "x=" + fmt(x.coords) + " v=" + fmt(v); });
  }
}

void suite_gradient_check(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  // Relative error |a - f| / max(|a|, |f|, 1e-3) per parameter.
  auto rel = [](double a, double f) {
    return std::abs(a - f) / std::max({std::abs(a), std::abs(f), 1e-3});
  };
  for (long i = 0; i < n; ++i) {
    const Model flavor = static_cast<Model>(i % 3);
    const Eigen::Index in = random_dim(rng, 2, 5), hidden = random_dim(rng, 2, 4);
    const Eigen::Index classes = random_dim(rng, 2, 3);
    const Eigen::Index rows = random_dim(rng, 3, 6);
    HnnModel m;
    Mat features;
    // Central differences are only an oracle where the loss is smooth on the
    // stencil: redraw configurations with a ReLU input within kKinkMargin of 0.
    constexpr double kKinkMargin = 1e-3;
    do {
      m = random_model(flavor, in, hidden, classes, 0.5, rng);
      m.readout_weight = random_matrix(classes, hidden, rng) * 2.0;
      features.resize(rows, in);
      for (Eigen::Index r = 0; r < rows; ++r) features.row(r) = gaussian(in, rng).transpose();
      m.feature_scale = feature_scale_for(features) / 2.0;
    } while (hidden_tangents(m, features).cwiseAbs().minCoeff() < kKinkMargin);
    std::vector<int> labels(static_cast<std::size_t>(rows));
    for (auto& l : labels) l = random_dim(rng, 0, static_cast<int>(classes) - 1);

    const Gradients g = gradients(m, features, labels);
    double e = 0.0;
    auto check = [&](auto member, const auto& analytic) {
      using Param = std::decay_t<decltype(m.*member)>;
      const Param base = m.*member;
      Vec flat = Eigen::Map<const Vec>(base.data(), base.size());
      const Vec fd = finite_diff_grad(
          [&](const Vec& z) {
            HnnModel mm = m;
            mm.*member = Eigen::Map<const Param>(z.data(), base.rows(), base.cols());
            return mean_loss(mm, features, labels);
          },
          flat);
      const Vec a = Eigen::Map<const Vec>(analytic.data(), analytic.size());
      for (Eigen::Index j = 0; j < a.size(); ++j) e = std::max(e, rel(a(j), fd(j)));
    };
    check(&HnnModel::weight, g.weight);
    check(&HnnModel::bias, g.bias);
    check(&HnnModel::readout_weight, g.readout_weight);
    check(&HnnModel::readout_bias, g.readout_bias);
    t.add(e, [&] {
      return std::string(to_string(flavor)) + " W=" + fmt(m.weight) + " b=" + fmt(m.bias) +
             " X=" + fmt(features);
    });
  }
}

void suite_loss_decrease(std::mt19937_64& rng, long n, const SuiteOptions&, Tracker& t) {
  for (long i = 0; i < n; ++i) {
    const std::uint64_t seed = rng();
    const Dataset ds = gen_tree_dataset(6, 16, 0.1, seed);
    TrainConfig cfg;
    cfg.flavor = static_cast<Model>(i % 3);
    cfg.epochs = 50;
    cfg.patience = 0;
    cfg.seed = seed;
    const TrainResult r = train(ds, cfg);
    const double first = r.metrics.front().train_loss;
    const double last = r.metrics.back().train_loss;
    t.add(std::max(0.0, last - first), [&] {
      return std::string(to_string(cfg.flavor)) + " seed=" + std::to_string(seed) +
             " loss1=" + fmt(first) + " loss50=" + fmt(last);
    });
  }
}

const std::map<std::string, Suite, std::less<>>& registry() {
  static const std::map<std::string, Suite, std::less<>> suites = {
      {"roundtrips", {1e-12, 10000, suite_roundtrips}},
      {"isometry_distance", {1e-9, 10000, suite_isometry_distance}},
      {"pushforward_metric", {1e-8, 10000, suite_pushforward_metric}},
      {"exp_log", {1e-7, 10000, suite_exp_log}},
      {"geodesic_speed", {1e-7, 10000, suite_geodesic_speed}},
      {"transport_isometry", {1e-8, 10000, suite_transport_isometry}},
      {"transport_conjugation", {1e-8, 10000, suite_transport_conjugation}},
      {"oracle_consistency", {1e-9, 10000, suite_oracle_consistency}},
      {"oracle_agreement", {1e-8, 10000, suite_oracle_agreement}},
      {"theorem6", {1e-9, 10000, suite_theorem6}},
      {"theorem7", {1e-8, 10000, suite_theorem7}},
      {"theorem9_composition", {1e-9, 10000, suite_theorem9_composition}},
      {"theorem9_scaling", {1e-9, 10000, suite_theorem9_scaling}},
      {"theorem9_orthogonal", {1e-10, 10000, suite_theorem9_orthogonal}},
      {"matvec_definition", {1e-10, 10000, suite_matvec_definition}},
      {"bias_translation", {1e-8, 10000, suite_bias_translation}},
      {"gyrocommutativity", {1e-9, 10000, suite_gyrocommutativity}},
      {"gyroassociativity", {1e-9, 10000, suite_gyroassociativity}},
      {"gyration_invariance", {1e-9, 10000, suite_gyration_invariance}},
      {"einstein_inverse", {1e-12, 10000, suite_einstein_inverse}},
      {"mobius_einstein", {1e-9, 10000, suite_mobius_einstein}},
      {"geodesic_chord", {1e-9, 10000, suite_geodesic_chord}},
      {"midpoint", {1e-9, 10000, suite_midpoint}},
      {"layer_commutation", {1e-8, 10000, suite_layer_commutation}},
      {"logit_parity", {1e-6, 10000, suite_logit_parity}},
      {"forward_consistency", {1e-9, 3000, suite_forward_consistency}},
      {"forward_validity", {0.0, 10000, suite_forward_validity}},
      {"stress", {0.0, 10000, suite_stress}},
      {"lorentz_validity", {1e-12, 10000, suite_lorentz_validity}},
      {"gradient_check", {1e-5, 100, suite_gradient_check}},
      {"loss_decrease", {0.0, 3, suite_loss_decrease}},
  };
  return suites;
}

const Suite& lookup(std::string_view name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
  return it->second;
}

}  // namespace

std::string PropertyReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["samples"] = samples;
  j["max_abs_error"] = std::isfinite(max_abs_error) ? nlohmann::json(max_abs_error)
                                                    : nlohmann::json("inf");
  j["tolerance"] = tolerance;
  j["passed"] = passed;
  j["worst_case_input"] = worst_case_input;
  return j.dump();
}

KleinPoint sample_ball(Eigen::Index dim, double max_norm, std::mt19937_64& rng) {
  if (dim < 1) throw std::invalid_argument("sample_ball: dim must be positive");
  if (!(max_norm > 0.0 && max_norm < 1.0)) {
    throw std::invalid_argument("sample_ball: max_norm must lie in (0, 1)");
  }
  Vec u = gaussian(dim, rng);
  double n = u.norm();
  while (n == 0.0) {
    u = gaussian(dim, rng);
    n = u.norm();
  }
  return {u / n * uniform(rng, 0.0, max_norm)};
}

Vec conjugation_oracle(std::string_view op, const OracleInputs& in, Route route) {
  const Vec& x = in.x.coords;
  if (route == Route::Lorentz) {
    const Vec hx = hyp::from_klein(x);
    if (op == "distance") return Vec::Constant(1, hyp::distance(hx, hyp::from_klein(in.y.coords)));
    if (op == "exp") return hyp::to_klein(hyp::exp(hx, hyp::tangent_from_klein(x, in.v)));
    if (op == "log") return hyp::tangent_to_klein(hx, hyp::log(hx, hyp::from_klein(in.y.coords)));
    if (op == "geodesic") {
      return hyp::to_klein(hyp::exp(hx, in.t * hyp::tangent_from_klein(x, in.v)));
    }
    if (op == "transport") {
      const Vec o = hyp::from_klein(Vec::Zero(x.size()));
      const Vec v0 = hyp::tangent_from_klein(Vec::Zero(x.size()), in.v);
      return hyp::tangent_to_klein(hx, hyp::transport(o, hx, v0));
    }
  } else {
    const Vec px = ball::from_klein(x);
    if (op == "distance") return Vec::Constant(1, ball::distance(px, ball::from_klein(in.y.coords)));
    if (op == "exp") return ball::to_klein(ball::exp(px, ball::tangent_from_klein(x, in.v)));
    if (op == "log") {
      return ball::tangent_to_klein(px, ball::log(px, ball::from_klein(in.y.coords)));
    }
    if (op == "geodesic") {
      return ball::to_klein(ball::exp(px, in.t * ball::tangent_from_klein(x, in.v)));
    }
    if (op == "transport") {
      // lambda_o / lambda_x = 1 - |x|^2, the gyration at the origin being trivial.
      const Vec v0 = ball::tangent_from_klein(Vec::Zero(x.size()), in.v);
      return ball::tangent_to_klein(px, (1.0 - px.squaredNorm()) * v0);
    }
  }
  throw std::invalid_argument("conjugation_oracle: unknown op '" + std::string(op) + "'");
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Vec g(x.size());
  Vec z = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    z(i) = x(i) + step;
    const double up = f(z);
    z(i) = x(i) - step;
    const double down = f(z);
    z(i) = x(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, suite] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

long default_samples(std::string_view suite) { return lookup(suite).default_samples; }

double suite_tolerance(std::string_view suite) { return lookup(suite).tolerance; }

PropertyReport run_suite(std::string_view suite, long samples, std::uint64_t seed,
                         const SuiteOptions& options) {
  const Suite& s = lookup(suite);
  if (samples < 0) throw std::invalid_argument("run_suite: negative sample count");
  std::mt19937_64 rng(seed);
  Tracker tracker;
  s.run(rng, samples, options, tracker);
  PropertyReport r;
  r.suite = std::string(suite);
  r.samples = samples;
  r.max_abs_error = tracker.max();
  r.tolerance = s.tolerance;
  r.passed = r.max_abs_error <= r.tolerance;
  r.worst_case_input = tracker.worst();
  return r;
}

}  // namespace hnn::verify
