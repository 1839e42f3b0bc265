#pragma once

// Riemannian Adam for HnnModel. Euclidean parameters take plain Adam steps;
// the bias point is moved along the exponential map of its model, using the
// Riemannian gradient (inverse metric applied to the Euclidean gradient).
//
// The bias moments are kept coordinate-wise in the orthonormal frame obtained
// by transporting the standard frame at the origin to the bias. In raw model
// coordinates Adam's per-coordinate normalisation would make the metric
// length of a step grow like the conformal factor near the boundary.

#include "hnn/nn.hpp"

namespace hnn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct GradState {
  long step = 0;
  Mat m_weight, v_weight;
  Vec m_bias, v_bias;
  Mat m_readout_weight, v_readout_weight;
  Vec m_readout_bias, v_readout_bias;
};

GradState init_grad_state(const HnnModel& model);

/// Riemannian gradient of the bias point for the model's flavor, expressed in
/// the model's own coordinates (a tangent vector at the bias).
Vec riemannian_bias_gradient(Model flavor, const Vec& bias, const Vec& euclidean_grad);

/// Frame vector sum_i w_i E_i at the bias, E_i = P_{o->b}(e_i) with e_i
/// orthonormal at the origin.
Vec bias_frame_vector(Model flavor, const Vec& bias, const Vec& w);

/// Coordinates <v, E_i>_b of a tangent vector at the bias in that frame.
Vec bias_frame_coordinates(Model flavor, const Vec& bias, const Vec& tangent);

/// One optimisation step; returns the updated model. The bias stays a valid
/// point of its model.
HnnModel riemannian_adam_step(GradState& state, const HnnModel& model, const Gradients& grads,
                              const AdamConfig& config = {});

}  // namespace hnn
