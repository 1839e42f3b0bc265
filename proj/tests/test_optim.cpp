#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hnn/optim.hpp"
#include "hnn/verify.hpp"
#include "oracles.hpp"

using namespace hnn;

namespace {

Vec bias_point(Model flavor, const Vec& klein) {
  switch (flavor) {
    case Model::Klein:
      return klein;
    case Model::Poincare:
      return to_poincare(KleinPoint{klein}).coords;
    case Model::Lorentz:
      return to_lorentz(KleinPoint{klein}).coords;
  }
  return {};
}

double inner(Model flavor, const Vec& b, const Vec& u, const Vec& v) {
  switch (flavor) {
    case Model::Klein:
      return metric_inner(KleinPoint{b}, u, v);
    case Model::Poincare:
      return metric_inner(PoincarePoint{b}, u, v);
    case Model::Lorentz:
      return metric_inner(LorentzPoint{b}, u, v);
  }
  return 0.0;
}

Gradients zero_gradients(const HnnModel& m) {
  return {Mat::Zero(m.weight.rows(), m.weight.cols()), Vec::Zero(m.bias.size()),
          Mat::Zero(m.readout_weight.rows(), m.readout_weight.cols()),
          Vec::Zero(m.readout_bias.size()), 0.0};
}

const Model kFlavors[] = {Model::Klein, Model::Poincare, Model::Lorentz};

}  // namespace

TEST(RiemannianGradient, IdentityAtKleinOrigin) {
  const Vec g = (Vec(3) << 0.3, -2.0, 1.5).finished();
  EXPECT_LE((riemannian_bias_gradient(Model::Klein, Vec::Zero(3), g) - g).norm(), 0.0);
}

TEST(RiemannianGradient, IsMetricDualOfEuclideanGradient) {
  // <rg, u>_b = g . u for every tangent u at b.
  std::mt19937_64 rng(31);
  for (Model flavor : kFlavors) {
    for (int i = 0; i < 200; ++i) {
      const int n = 1 + i % 6;
      const Vec b = bias_point(flavor, oracle::ball_point(n, 0.9, rng));
      const Vec g = oracle::gaussian(static_cast<int>(b.size()), rng);
      Vec u = oracle::gaussian(static_cast<int>(b.size()), rng);
      if (flavor == Model::Lorentz) {
        u(0) = b.tail(n).dot(u.tail(n)) / b(0);  // tangent: <b, u>_L = 0
      }
      const Vec rg = riemannian_bias_gradient(flavor, b, g);
      if (flavor == Model::Lorentz) {
        EXPECT_NEAR(minkowski_inner(b, rg), 0.0, 1e-9 * rg.norm());
      }
      const double want = g.dot(u);
      EXPECT_NEAR(inner(flavor, b, rg, u), want, 1e-9 * std::max(1.0, std::abs(want) + rg.norm()));
    }
  }
}

TEST(BiasFrame, IsOrthonormalAndInvertible) {
  std::mt19937_64 rng(32);
  for (Model flavor : kFlavors) {
    for (int i = 0; i < 100; ++i) {
      const int n = 1 + i % 5;
      const Vec b = bias_point(flavor, oracle::ball_point(n, 0.95, rng));
      for (int a = 0; a < n; ++a) {
        const Vec ea = bias_frame_vector(flavor, b, Vec::Unit(n, a));
        for (int c = 0; c < n; ++c) {
          const Vec ec = bias_frame_vector(flavor, b, Vec::Unit(n, c));
          EXPECT_NEAR(inner(flavor, b, ea, ec), a == c ? 1.0 : 0.0, 1e-9);
        }
      }
      const Vec w = oracle::gaussian(n, rng);
      const Vec back = bias_frame_coordinates(flavor, b, bias_frame_vector(flavor, b, w));
      EXPECT_LE((back - w).norm(), 1e-9 * std::max(1.0, w.norm()));
    }
  }
}

TEST(AdamStep, ZeroGradientsLeaveParametersUnchanged) {
  for (Model flavor : kFlavors) {
    HnnModel m = init_model(Model::Klein, 4, 3, 2, 7);
    m.bias = (Vec(3) << 0.2, -0.5, 0.1).finished();
    m = convert_model(m, flavor);
    GradState state = init_grad_state(m);
    const HnnModel out = riemannian_adam_step(state, m, zero_gradients(m));
    EXPECT_EQ(state.step, 1);
    EXPECT_EQ(out.weight, m.weight);
    EXPECT_EQ(out.readout_weight, m.readout_weight);
    EXPECT_EQ(out.readout_bias, m.readout_bias);
    EXPECT_LE((out.bias - m.bias).norm(), 1e-15);
  }
}

TEST(AdamStep, FirstBiasStepHasLengthLrAgainstTheGradient) {
  for (Model flavor : kFlavors) {
    const HnnModel m = init_model(flavor, 2, 2, 2, 3);
    Gradients g = zero_gradients(m);
    g.bias(flavor == Model::Lorentz ? 1 : 0) = 0.37;  // slope along the first axis
    GradState state = init_grad_state(m);
    const HnnModel out = riemannian_adam_step(state, m, g, AdamConfig{0.1});
    Point p;
    switch (flavor) {
      case Model::Klein:
        p = KleinPoint{out.bias};
        break;
      case Model::Poincare:
        p = PoincarePoint{out.bias};
        break;
      case Model::Lorentz:
        p = LorentzPoint{out.bias};
        break;
    }
    const Vec kb = std::get<KleinPoint>(convert_point(p, Model::Klein)).coords;
    const double moved = oracle::klein_distance(Vec::Zero(2), kb);
    EXPECT_LE(moved, 0.1 + 1e-12);
    EXPECT_NEAR(moved, 0.1, 1e-6);
    EXPECT_LT(kb(0), 0.0);
    EXPECT_NEAR(kb(1), 0.0, 1e-15);
  }
}

TEST(AdamStep, EuclideanParametersFollowPlainAdam) {
  const HnnModel m = init_model(Model::Klein, 2, 2, 2, 3);
  Gradients g = zero_gradients(m);
  g.weight(0, 1) = -4.0;
  g.readout_bias(1) = 0.5;
  GradState state = init_grad_state(m);
  const AdamConfig cfg{0.01};
  const HnnModel out = riemannian_adam_step(state, m, g, cfg);
  // First step: m_hat / sqrt(v_hat) = g / |g|.
  EXPECT_NEAR(out.weight(0, 1) - m.weight(0, 1), 0.01 * 4.0 / (4.0 + cfg.eps), 1e-15);
  EXPECT_NEAR(out.readout_bias(1) - m.readout_bias(1), -0.01 * 0.5 / (0.5 + cfg.eps), 1e-15);
  EXPECT_EQ(out.weight(1, 0), m.weight(1, 0));
}

TEST(AdamStep, ReachesAFarTargetAndStaysValid) {
  // Minimise the hyperbolic distance to a point near the boundary, with noisy
  // gradients; the bias must stay a valid point throughout.
  std::mt19937_64 rng(33);
  for (Model flavor : kFlavors) {
    const Vec target_k = (Vec(3) << 0.998, 0.03, -0.02).finished();
    const Vec target = bias_point(flavor, target_k);
    auto dist = [&](const Vec& b) {
      switch (flavor) {
        case Model::Klein:
          return distance(KleinPoint{clamp_to_ball(b)}, KleinPoint{target});
        case Model::Poincare:
          return distance(PoincarePoint{clamp_to_ball(b)}, PoincarePoint{target});
        case Model::Lorentz:
          break;
      }
      return distance(lorentz_from_space(b.tail(b.size() - 1)), LorentzPoint{target});
    };
    HnnModel m = init_model(flavor, 3, 3, 2, 4);
    GradState state = init_grad_state(m);
    const double start = dist(m.bias);
    for (int i = 0; i < 400; ++i) {
      Gradients g = zero_gradients(m);
      g.bias = verify::finite_diff_grad(dist, m.bias, 1e-7 * std::max(1.0, m.bias.norm()));
      g.bias += 0.1 * g.bias.norm() * oracle::gaussian(static_cast<int>(m.bias.size()), rng);
      m = riemannian_adam_step(state, m, g, AdamConfig{0.05});
      ASSERT_NO_THROW(validate(m)) << "step " << i;
    }
    EXPECT_GT(start, 3.0);
    EXPECT_LT(dist(m.bias), 0.5) << to_string(flavor);
  }
}
