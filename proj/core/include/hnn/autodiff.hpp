#pragma once

// Minimal tape-based reverse-mode automatic differentiation over doubles.
//
// A Var records each elementary operation on the active Tape together with its
// local partial derivatives. Tape::backward() then sweeps the recorded nodes in
// reverse. Constants (id < 0) are never recorded.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hnn::ad {

class Tape;

namespace detail {
inline thread_local Tape* active_tape = nullptr;
}

struct Var {
  double v = 0.0;
  std::int32_t id = -1;

  Var() = default;
  Var(double value) : v(value) {}  // NOLINT: constants convert implicitly
  Var(double value, std::int32_t node) : v(value), id(node) {}
};

class Tape {
 public:
  struct Node {
    std::int32_t a;
    std::int32_t b;
    double da;
    double db;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void clear() {
    nodes_.clear();
    adjoint_.clear();
  }

  Var input(double value) { return {value, push(-1, 0.0, -1, 0.0)}; }

  std::int32_t push(std::int32_t a, double da, std::int32_t b, double db) {
    nodes_.push_back({a, b, da, db});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(out)/d(out) contributions; call once per output before backward().
  void seed(const Var& out, double adjoint) {
    if (out.id < 0) return;
    adjoint_.resize(nodes_.size(), 0.0);
    adjoint_[static_cast<std::size_t>(out.id)] += adjoint;
  }

  void backward() {
    adjoint_.resize(nodes_.size(), 0.0);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      const double g = adjoint_[i];
      if (g == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adjoint_[static_cast<std::size_t>(n.a)] += n.da * g;
      if (n.b >= 0) adjoint_[static_cast<std::size_t>(n.b)] += n.db * g;
    }
  }

  double adjoint(const Var& x) const {
    if (x.id < 0 || static_cast<std::size_t>(x.id) >= adjoint_.size()) return 0.0;
    return adjoint_[static_cast<std::size_t>(x.id)];
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> adjoint_;
};

/// Makes a tape active for the current thread for the lifetime of the guard.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : previous_(detail::active_tape) {
    detail::active_tape = &tape;
  }
  ~TapeScope() { detail::active_tape = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

namespace detail {

inline Var unary(const Var& x, double value, double dx) {
  if (x.id < 0) return Var(value);
  if (active_tape == nullptr) throw std::logic_error("ad: no active tape");
  return {value, active_tape->push(x.id, dx, -1, 0.0)};
}

inline Var binary(const Var& x, const Var& y, double value, double dx, double dy) {
  if (x.id < 0 && y.id < 0) return Var(value);
  if (active_tape == nullptr) throw std::logic_error("ad: no active tape");
  if (x.id < 0) return {value, active_tape->push(y.id, dy, -1, 0.0)};
  if (y.id < 0) return {value, active_tape->push(x.id, dx, -1, 0.0)};
  return {value, active_tape->push(x.id, dx, y.id, dy)};
}

}  // namespace detail

inline Var operator+(const Var& x, const Var& y) {
  return detail::binary(x, y, x.v + y.v, 1.0, 1.0);
}
inline Var operator-(const Var& x, const Var& y) {
  return detail::binary(x, y, x.v - y.v, 1.0, -1.0);
}
inline Var operator*(const Var& x, const Var& y) {
  return detail::binary(x, y, x.v * y.v, y.v, x.v);
}
inline Var operator/(const Var& x, const Var& y) {
  const double q = x.v / y.v;
  return detail::binary(x, y, q, 1.0 / y.v, -q / y.v);
}
inline Var operator-(const Var& x) { return detail::unary(x, -x.v, -1.0); }

inline Var& operator+=(Var& x, const Var& y) { return x = x + y; }
inline Var& operator-=(Var& x, const Var& y) { return x = x - y; }
inline Var& operator*=(Var& x, const Var& y) { return x = x * y; }
inline Var& operator/=(Var& x, const Var& y) { return x = x / y; }

inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.v);
  return detail::unary(x, s, 0.5 / s);
}
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.v);
  return detail::unary(x, t, 1.0 - t * t);
}
inline Var atanh(const Var& x) { return detail::unary(x, std::atanh(x.v), 1.0 / (1.0 - x.v * x.v)); }
inline Var sinh(const Var& x) { return detail::unary(x, std::sinh(x.v), std::cosh(x.v)); }
inline Var cosh(const Var& x) { return detail::unary(x, std::cosh(x.v), std::sinh(x.v)); }
inline Var asinh(const Var& x) {
  return detail::unary(x, std::asinh(x.v), 1.0 / std::sqrt(1.0 + x.v * x.v));
}
inline Var acosh(const Var& x) {
  return detail::unary(x, std::acosh(x.v), 1.0 / std::sqrt(x.v * x.v - 1.0));
}
inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return detail::unary(x, e, e);
}
inline Var log(const Var& x) { return detail::unary(x, std::log(x.v), 1.0 / x.v); }

inline double value(const Var& x) { return x.v; }

}  // namespace hnn::ad

namespace hnn {
inline double value(double x) { return x; }
}  // namespace hnn
