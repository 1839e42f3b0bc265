#include "hnn/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "hnn/errors.hpp"

namespace hnn {

namespace {

template <class T>
T adam_direction(const T& g, T& m, T& v, const AdamConfig& cfg, long step) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  return ((m / c1).array() / ((v / c2).array().sqrt() + cfg.eps)).matrix();
}

}  // namespace

GradState init_grad_state(const HnnModel& model) {
  GradState s;
  s.m_weight = s.v_weight = Mat::Zero(model.weight.rows(), model.weight.cols());
  s.m_bias = s.v_bias = Vec::Zero(model.hidden_dim());
  s.m_readout_weight = s.v_readout_weight =
      Mat::Zero(model.readout_weight.rows(), model.readout_weight.cols());
  s.m_readout_bias = s.v_readout_bias = Vec::Zero(model.readout_bias.size());
  return s;
}

Vec riemannian_bias_gradient(Model flavor, const Vec& bias, const Vec& g) {
  switch (flavor) {
    case Model::Klein:
      return klein_metric_inverse(KleinPoint{bias}) * g;
    case Model::Poincare: {
      const double rho = poincare_conformal_factor(PoincarePoint{bias});
      return g / (rho * rho);
    }
    case Model::Lorentz: {
      Vec h = g;
      h(0) = -h(0);
      return h + minkowski_inner(bias, h) * bias;
    }
  }
  throw std::invalid_argument("riemannian_bias_gradient: unknown flavor");
}

Vec bias_frame_vector(Model flavor, const Vec& bias, const Vec& w) {
  switch (flavor) {
    case Model::Klein:
      return transport_from_origin(KleinPoint{bias}, w);
    case Model::Poincare:
      // The Poincare metric at the origin is 4 I.
      return transport_from_origin(PoincarePoint{bias}, w / 2.0);
    case Model::Lorentz: {
      Vec v = Vec::Zero(w.size() + 1);
      v.tail(w.size()) = w;
      return transport_from_origin(LorentzPoint{bias}, v);
    }
  }
  throw std::invalid_argument("bias_frame_vector: unknown flavor");
}

Vec bias_frame_coordinates(Model flavor, const Vec& bias, const Vec& tangent) {
  const Eigen::Index n = flavor == Model::Lorentz ? bias.size() - 1 : bias.size();
  Vec w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec e = bias_frame_vector(flavor, bias, Vec::Unit(n, i));
    switch (flavor) {
      case Model::Klein:
        w(i) = metric_inner(KleinPoint{bias}, tangent, e);
        break;
      case Model::Poincare:
        w(i) = metric_inner(PoincarePoint{bias}, tangent, e);
        break;
      case Model::Lorentz:
        w(i) = metric_inner(LorentzPoint{bias}, tangent, e);
        break;
    }
  }
  return w;
}

HnnModel riemannian_adam_step(GradState& state, const HnnModel& model, const Gradients& grads,
                              const AdamConfig& cfg) {
  ++state.step;
  HnnModel out = model;
  out.weight -= cfg.lr * adam_direction(grads.weight, state.m_weight, state.v_weight, cfg,
                                        state.step);
  out.readout_weight -= cfg.lr * adam_direction(grads.readout_weight, state.m_readout_weight,
                                                state.v_readout_weight, cfg, state.step);
  out.readout_bias -= cfg.lr * adam_direction(grads.readout_bias, state.m_readout_bias,
                                              state.v_readout_bias, cfg, state.step);

  const Vec rg = riemannian_bias_gradient(model.flavor, model.bias, grads.bias);
  const Vec w = bias_frame_coordinates(model.flavor, model.bias, rg);
  const Vec step = bias_frame_vector(
      model.flavor, model.bias,
      -cfg.lr * adam_direction(w, state.m_bias, state.v_bias, cfg, state.step));
  switch (model.flavor) {
    case Model::Klein:
      out.bias = exp_map(KleinPoint{model.bias}, step).coords;
      break;
    case Model::Poincare:
      out.bias = exp_map(PoincarePoint{model.bias}, step).coords;
      break;
    case Model::Lorentz:
      out.bias = renormalize(exp_map(LorentzPoint{model.bias}, step)).coords;
      break;
  }
  if (!out.weight.allFinite() || !out.bias.allFinite() || !out.readout_weight.allFinite() ||
      !out.readout_bias.allFinite()) {
    throw NumericalError("optimizer step");
  }
  return out;
}

}  // namespace hnn
