#pragma once

// Two-layer hyperbolic networks: features -> exp_o -> hyperbolic linear ->
// hyperbolic ReLU -> Euclidean readout, in any of the three models.

#include <cstdint>
#include <span>
#include <vector>

#include "hnn/gyro.hpp"
#include "hnn/manifolds.hpp"

namespace hnn {

/// Rows whose norm exceeds this after feature scaling saturate tanh.
inline constexpr double kMaxFeatureNorm = 5.0;

template <class P>
struct LayerParams {
  Mat weight;
  P bias;
};

struct HnnModel {
  Model flavor = Model::Klein;
  Mat weight;           // hidden x input
  Vec bias;             // bias point coordinates in `flavor` (hidden, or hidden+1 for Lorentz)
  Mat readout_weight;   // classes x hidden
  Vec readout_bias;     // classes
  double feature_scale = 1.0;

  Eigen::Index input_dim() const { return weight.cols(); }
  Eigen::Index hidden_dim() const { return weight.rows(); }
  Eigen::Index num_classes() const { return readout_weight.rows(); }
};

/// Throws std::invalid_argument when the shapes do not chain or the bias is
/// not a valid point of the model's flavor.
void validate(const HnnModel& model);

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), bias at the origin, readout
/// bias zero. The random stream depends only on the seed and the shapes, so
/// all three flavors start from corresponding parameters.
HnnModel init_model(Model flavor, Eigen::Index input_dim, Eigen::Index hidden_dim,
                    Eigen::Index num_classes, std::uint64_t seed, double feature_scale = 1.0);

/// Scale that brings the largest row of `features` to norm kMaxFeatureNorm.
double feature_scale_for(const Mat& features);

/// Same network expressed in another model: the bias is mapped through the
/// isometry, every Euclidean parameter is kept.
HnnModel convert_model(const HnnModel& model, Model dst);

LayerParams<KleinPoint> klein_layer(const HnnModel& model);
LayerParams<PoincarePoint> poincare_layer(const HnnModel& model);
LayerParams<LorentzPoint> lorentz_layer(const HnnModel& model);

// ---------------------------------------------------------------------------
// Layers

KleinPoint klein_linear(const LayerParams<KleinPoint>& params, const KleinPoint& x);

/// exp_o(M log_o(x)) on the Poincare ball.
PoincarePoint mobius_matvec(const Mat& m, const PoincarePoint& x);
PoincarePoint poincare_linear(const LayerParams<PoincarePoint>& params, const PoincarePoint& x);

/// exp_o([0; M log_o(x)_s]) translated by the bias through transport from the
/// origin and the exponential map.
LorentzPoint lorentz_linear(const LayerParams<LorentzPoint>& params, const LorentzPoint& x);

KleinPoint hyperbolic_activation(const KleinPoint& x);
PoincarePoint hyperbolic_activation(const PoincarePoint& x);
LorentzPoint hyperbolic_activation(const LorentzPoint& x);

/// log_o(x) in an orthonormal frame at the origin: the Klein log_o, twice the
/// Poincare log_o, or the spatial part of the hyperboloid log_o. Corresponding
/// points give identical coordinates.
Vec origin_tangent(const KleinPoint& x);
Vec origin_tangent(const PoincarePoint& x);
Vec origin_tangent(const LorentzPoint& x);
Vec origin_tangent(const Point& x);

/// Inverse of origin_tangent: exp_o of a vector given in the orthonormal frame.
Point embed_features(Model flavor, const Vec& v);

/// W_e origin_tangent(x) + b_e. Throws std::invalid_argument on a flavor or
/// dimension mismatch.
Vec readout_logits(const HnnModel& model, const Point& x);

/// -log softmax(logits)[label], max-subtracted.
double cross_entropy(const Vec& logits, int label);

// ---------------------------------------------------------------------------
// Batched evaluation

/// Logits for every row of `features` (rows x classes).
Mat forward(const HnnModel& model, const Mat& features);

/// origin_tangent of the hyperbolic linear layer output for every row.
Mat hidden_tangents(const HnnModel& model, const Mat& features);

struct Gradients {
  Mat weight;
  Vec bias;
  Mat readout_weight;
  Vec readout_bias;
  double loss = 0.0;
};

/// Mean cross-entropy over `rows` (all rows when empty).
double mean_loss(const HnnModel& model, const Mat& features, std::span<const int> labels,
                 std::span<const int> rows = {});

/// Exact Euclidean gradients of mean_loss with respect to every parameter,
/// including the bias point coordinates. Throws NumericalError when a
/// non-finite value appears.
Gradients gradients(const HnnModel& model, const Mat& features, std::span<const int> labels,
                    std::span<const int> rows = {});

double accuracy(const Mat& logits, std::span<const int> labels, std::span<const int> rows = {});

}  // namespace hnn
