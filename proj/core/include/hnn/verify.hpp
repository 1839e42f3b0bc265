#pragma once

// Property suites and independent oracles. Every suite samples its own inputs
// from a seeded generator and reports the worst error it saw.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hnn/manifolds.hpp"

namespace hnn::verify {

struct PropertyReport {
  std::string suite;
  long samples = 0;
  double max_abs_error = 0.0;  // relative error for gradient_check
  double tolerance = 0.0;
  bool passed = true;
  std::string worst_case_input;

  /// One-line JSON object.
  std::string to_json() const;
};

struct SuiteOptions {
  /// Substitute the wrong closed-form Klein transport (reference:: namespace); every suite
  /// that exercises Klein transport must then fail.
  bool printed_transport = false;
};

/// Uniform direction, radius uniform in [0, max_norm].
KleinPoint sample_ball(Eigen::Index dim, double max_norm, std::mt19937_64& rng);

struct OracleInputs {
  KleinPoint x;
  KleinPoint y;
  Vec v;         // tangent at x (at the origin for transport)
  double t = 0;  // geodesic parameter; v must have unit speed
};

enum class Route { Lorentz, Poincare };

/// Klein-coordinate reference for op in {distance, exp, log, transport,
/// geodesic}, computed by carrying the inputs to the hyperboloid (or the
/// Poincare ball), applying that model's textbook formula and carrying the
/// result back. Shares no code with the library's geometry. distance returns
/// a 1-vector.
Vec conjugation_oracle(std::string_view op, const OracleInputs& in, Route route = Route::Lorentz);

/// Central differences, one coordinate at a time.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double step = 1e-5);

const std::vector<std::string>& suite_names();
long default_samples(std::string_view suite);
double suite_tolerance(std::string_view suite);

/// Deterministic in (suite, samples, seed, options). Zero samples is a
/// vacuous pass. Throws std::invalid_argument for unknown suites.
PropertyReport run_suite(std::string_view suite, long samples, std::uint64_t seed,
                         const SuiteOptions& options = {});

}  // namespace hnn::verify
