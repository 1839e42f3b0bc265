#include "hnn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "hnn/autodiff.hpp"
#include "hnn/detail/row_kernels.hpp"
#include "hnn/errors.hpp"

namespace hnn {

namespace {

using detail::Row;

Row<double> to_row(const Vec& v) { return Row<double>(v.data(), v.data() + v.size()); }

Vec to_vec(const Row<double>& r) {
  return Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(r.size()));
}

Vec relu(Vec v) { return v.cwiseMax(0.0); }

// Parameter-free part of a row: the vector p that the weight multiplies and
// the radial gain k such that the matvec output has tangent norm k |M p|.
struct RowInput {
  Vec p;
  double k = 1.0;
};

RowInput row_input(Model flavor, const Vec& features) {
  const Eigen::Index n = features.size();
  switch (flavor) {
    case Model::Klein: {
      Vec p = exp_map(klein_origin(n), features).coords;
      const double s = p.norm();
      const double k = s < kSeriesThreshold
                           ? 1.0 + s * s / 3.0
                           : 2.0 / s * std::atanh(std::min(s / (1.0 + std::sqrt(1.0 - s * s)),
                                                           kAtanhMax));
      return {std::move(p), k};
    }
    case Model::Poincare: {
      Vec p = exp_map(poincare_origin(n), features / 2.0).coords;
      const double s = p.norm();
      const double k =
          s < kSeriesThreshold ? 1.0 + s * s / 3.0 : std::atanh(std::min(s, kAtanhMax)) / s;
      return {std::move(p), k};
    }
    case Model::Lorentz: {
      const LorentzPoint o = lorentz_origin(n);
      Vec v = Vec::Zero(n + 1);
      v.tail(n) = features;
      const LorentzPoint x = exp_map(o, v);
      return {log_map(o, x).tail(n), 1.0};
    }
  }
  throw std::invalid_argument("unknown flavor");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::vector<int> all_rows(std::span<const int> rows, Eigen::Index n) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<int> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

void check_finite(const Vec& v, const char* op) {
  if (!v.allFinite()) throw NumericalError(op);
}

Vec softmax(const Vec& logits) {
  const Vec e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

void check_features(const HnnModel& model, const Mat& features) {
  require(features.cols() == model.input_dim(),
          "feature dimension " + std::to_string(features.cols()) +
              " does not match model input dimension " + std::to_string(model.input_dim()));
}

}  // namespace

void validate(const HnnModel& model) {
  const Eigen::Index m = model.hidden_dim();
  require(model.input_dim() >= 1 && m >= 1, "model: empty weight matrix");
  require(model.num_classes() >= 2, "model: at least two classes are required");
  require(model.readout_weight.cols() == m, "model: readout weight does not match hidden width");
  require(model.readout_bias.size() == model.num_classes(), "model: readout bias size mismatch");
  require(model.weight.allFinite() && model.readout_weight.allFinite() &&
              model.readout_bias.allFinite(),
          "model: non-finite weights");
  switch (model.flavor) {
    case Model::Klein:
      require(model.bias.size() == m && is_valid(KleinPoint{model.bias}),
              "model: bias is not a valid Klein point");
      break;
    case Model::Poincare:
      require(model.bias.size() == m && is_valid(PoincarePoint{model.bias}),
              "model: bias is not a valid Poincare point");
      break;
    case Model::Lorentz:
      require(model.bias.size() == m + 1 && is_valid(LorentzPoint{model.bias}),
              "model: bias is not a valid hyperboloid point");
      break;
  }
}

HnnModel init_model(Model flavor, Eigen::Index input_dim, Eigen::Index hidden_dim,
                    Eigen::Index num_classes, std::uint64_t seed, double feature_scale) {
  require(input_dim >= 1 && hidden_dim >= 1 && num_classes >= 2, "init_model: bad dimensions");
  std::mt19937_64 rng(seed);
  auto uniform_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
  };
  HnnModel model;
  model.flavor = flavor;
  model.weight = uniform_matrix(hidden_dim, input_dim);
  model.readout_weight = uniform_matrix(num_classes, hidden_dim);
  model.readout_bias = Vec::Zero(num_classes);
  model.bias = flavor == Model::Lorentz ? lorentz_origin(hidden_dim).coords
                                        : Vec::Zero(hidden_dim);
  model.feature_scale = feature_scale;
  return model;
}

double feature_scale_for(const Mat& features) {
  const double max_norm = features.size() == 0 ? 0.0 : features.rowwise().stableNorm().maxCoeff();
  return max_norm > 0.0 ? kMaxFeatureNorm / max_norm : 1.0;
}

HnnModel convert_model(const HnnModel& model, Model dst) {
  HnnModel out = model;
  out.flavor = dst;
  Point bias;
  switch (model.flavor) {
    case Model::Klein:
      bias = KleinPoint{model.bias};
      break;
    case Model::Poincare:
      bias = PoincarePoint{model.bias};
      break;
    case Model::Lorentz:
      bias = LorentzPoint{model.bias};
      break;
  }
  out.bias = std::visit([](const auto& p) { return p.coords; }, convert_point(bias, dst));
  return out;
}

LayerParams<KleinPoint> klein_layer(const HnnModel& model) {
  require(model.flavor == Model::Klein, "klein_layer: model flavor is not klein");
  return {model.weight, KleinPoint{model.bias}};
}

LayerParams<PoincarePoint> poincare_layer(const HnnModel& model) {
  require(model.flavor == Model::Poincare, "poincare_layer: model flavor is not poincare");
  return {model.weight, PoincarePoint{model.bias}};
}

LayerParams<LorentzPoint> lorentz_layer(const HnnModel& model) {
  require(model.flavor == Model::Lorentz, "lorentz_layer: model flavor is not lorentz");
  return {model.weight, LorentzPoint{model.bias}};
}

// ---------------------------------------------------------------------------
// Layers

KleinPoint klein_linear(const LayerParams<KleinPoint>& params, const KleinPoint& x) {
  require(params.weight.cols() == dim(x), "klein_linear: input dimension mismatch");
  require(params.weight.rows() == dim(params.bias), "klein_linear: bias dimension mismatch");
  return bias_translate(einstein_matvec(params.weight, x), params.bias);
}

PoincarePoint mobius_matvec(const Mat& m, const PoincarePoint& x) {
  require(m.cols() == dim(x), "mobius_matvec: dimension mismatch");
  const Vec mx = m * x.coords;
  const double mx_norm = mx.norm();
  const double s = x.coords.norm();
  if (mx_norm == 0.0 || s == 0.0) return poincare_origin(m.rows());
  const double k =
      s < kSeriesThreshold ? 1.0 + s * s / 3.0 : std::atanh(std::min(s, kAtanhMax)) / s;
  return {clamp_to_ball(std::tanh(k * mx_norm) / mx_norm * mx)};
}

PoincarePoint poincare_linear(const LayerParams<PoincarePoint>& params, const PoincarePoint& x) {
  require(params.weight.cols() == dim(x), "poincare_linear: input dimension mismatch");
  require(params.weight.rows() == dim(params.bias), "poincare_linear: bias dimension mismatch");
  return mobius_add(mobius_matvec(params.weight, x), params.bias);
}

LorentzPoint lorentz_linear(const LayerParams<LorentzPoint>& params, const LorentzPoint& x) {
  const Eigen::Index n = dim(x);
  const Eigen::Index m = params.weight.rows();
  require(params.weight.cols() == n, "lorentz_linear: input dimension mismatch");
  require(dim(params.bias) == m, "lorentz_linear: bias dimension mismatch");
  const LorentzPoint on = lorentz_origin(n);
  const LorentzPoint om = lorentz_origin(m);
  Vec v = Vec::Zero(m + 1);
  v.tail(m) = params.weight * log_map(on, x).tail(n);
  const LorentzPoint y = exp_map(om, v);
  Vec vb = log_map(om, params.bias);
  vb(0) = 0.0;
  return exp_map(y, transport_from_origin(y, vb));
}

KleinPoint hyperbolic_activation(const KleinPoint& x) {
  return einstein_apply([](const Vec& v) { return relu(v); }, x);
}

PoincarePoint hyperbolic_activation(const PoincarePoint& x) {
  const PoincarePoint o = poincare_origin(dim(x));
  return exp_map(o, relu(log_map(o, x)));
}

LorentzPoint hyperbolic_activation(const LorentzPoint& x) {
  const Eigen::Index n = dim(x);
  const LorentzPoint o = lorentz_origin(n);
  Vec v = log_map(o, x);
  v(0) = 0.0;
  v.tail(n) = relu(v.tail(n));
  return exp_map(o, v);
}

Vec origin_tangent(const KleinPoint& x) { return log_map(klein_origin(dim(x)), x); }

Vec origin_tangent(const PoincarePoint& x) {
  return 2.0 * log_map(poincare_origin(dim(x)), x);
}

Vec origin_tangent(const LorentzPoint& x) {
  return log_map(lorentz_origin(dim(x)), x).tail(dim(x));
}

Vec origin_tangent(const Point& x) {
  return std::visit([](const auto& p) { return origin_tangent(p); }, x);
}

Point embed_features(Model flavor, const Vec& v) {
  const Eigen::Index n = v.size();
  switch (flavor) {
    case Model::Klein:
      return exp_map(klein_origin(n), v);
    case Model::Poincare:
      return exp_map(poincare_origin(n), v / 2.0);
    case Model::Lorentz: {
      Vec full = Vec::Zero(n + 1);
      full.tail(n) = v;
      return exp_map(lorentz_origin(n), full);
    }
  }
  throw std::invalid_argument("embed_features: unknown flavor");
}

Vec readout_logits(const HnnModel& model, const Point& x) {
  require(model_of(x) == model.flavor, "readout_logits: point model does not match flavor");
  const Vec t = origin_tangent(x);
  require(t.size() == model.hidden_dim(), "readout_logits: dimension mismatch");
  return model.readout_weight * t + model.readout_bias;
}

double cross_entropy(const Vec& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                " out of range [0, " + std::to_string(logits.size()) + ")");
  }
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return lse - logits(label);
}

// ---------------------------------------------------------------------------
// Batched evaluation

Mat forward(const HnnModel& model, const Mat& features) {
  check_features(model, features);
  const Row<double> bias = to_row(model.bias);
  Mat logits(features.rows(), model.num_classes());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const RowInput in = row_input(model.flavor, model.feature_scale * features.row(i).transpose());
    const Row<double> u = to_row(model.weight * in.p);
    const Row<double> h = detail::hidden_row(model.flavor, u, in.k, bias);
    const Vec t = to_vec(detail::readout_tangent_row(model.flavor, h));
    const Vec out = model.readout_weight * t + model.readout_bias;
    check_finite(out, "forward");
    logits.row(i) = out.transpose();
  }
  return logits;
}

Mat hidden_tangents(const HnnModel& model, const Mat& features) {
  check_features(model, features);
  const Row<double> bias = to_row(model.bias);
  Mat out(features.rows(), model.hidden_dim());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const RowInput in = row_input(model.flavor, model.feature_scale * features.row(i).transpose());
    const Vec h = to_vec(detail::hidden_row(model.flavor, to_row(model.weight * in.p), in.k, bias));
    switch (model.flavor) {
      case Model::Klein:
        out.row(i) = origin_tangent(KleinPoint{h}).transpose();
        break;
      case Model::Poincare:
        out.row(i) = origin_tangent(PoincarePoint{h}).transpose();
        break;
      case Model::Lorentz:
        out.row(i) = origin_tangent(LorentzPoint{h}).transpose();
        break;
    }
  }
  return out;
}

double mean_loss(const HnnModel& model, const Mat& features, std::span<const int> labels,
                 std::span<const int> rows) {
  const std::vector<int> idx = all_rows(rows, features.rows());
  if (idx.empty()) return 0.0;
  Mat sub(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
  const Mat logits = forward(model, sub);
  double total = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    total += cross_entropy(logits.row(static_cast<Eigen::Index>(r)).transpose(),
                           labels[static_cast<std::size_t>(idx[r])]);
  }
  return total / static_cast<double>(idx.size());
}

Gradients gradients(const HnnModel& model, const Mat& features, std::span<const int> labels,
                    std::span<const int> rows) {
  check_features(model, features);
  require(labels.size() == static_cast<std::size_t>(features.rows()),
          "gradients: one label per feature row is required");
  const std::vector<int> idx = all_rows(rows, features.rows());

  const Eigen::Index m = model.hidden_dim();
  const Eigen::Index c = model.num_classes();
  Gradients g;
  g.weight = Mat::Zero(m, model.input_dim());
  g.bias = Vec::Zero(model.bias.size());
  g.readout_weight = Mat::Zero(c, m);
  g.readout_bias = Vec::Zero(c);
  if (idx.empty()) return g;

  const double inv_batch = 1.0 / static_cast<double>(idx.size());
  ad::Tape tape;
  ad::TapeScope scope(tape);
  for (int row : idx) {
    const RowInput in =
        row_input(model.flavor, model.feature_scale * features.row(row).transpose());
    const Vec u_val = model.weight * in.p;
    check_finite(u_val, "hyperbolic linear layer");

    tape.clear();
    Row<ad::Var> u(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) u[static_cast<std::size_t>(j)] = tape.input(u_val(j));
    Row<ad::Var> b(static_cast<std::size_t>(model.bias.size()));
    for (Eigen::Index j = 0; j < model.bias.size(); ++j)
      b[static_cast<std::size_t>(j)] = tape.input(model.bias(j));

    const Row<ad::Var> h = detail::hidden_row(model.flavor, u, in.k, b);
    const Row<ad::Var> t = detail::readout_tangent_row(model.flavor, h);

    Vec t_val(m);
    for (Eigen::Index j = 0; j < m; ++j) t_val(j) = t[static_cast<std::size_t>(j)].v;
    check_finite(t_val, "hyperbolic activation");
    const Vec logits = model.readout_weight * t_val + model.readout_bias;
    check_finite(logits, "readout");

    const int label = labels[static_cast<std::size_t>(row)];
    g.loss += cross_entropy(logits, label) * inv_batch;
    Vec dlogits = softmax(logits);
    dlogits(label) -= 1.0;
    dlogits *= inv_batch;

    g.readout_weight += dlogits * t_val.transpose();
    g.readout_bias += dlogits;
    const Vec dt = model.readout_weight.transpose() * dlogits;
    for (Eigen::Index j = 0; j < m; ++j) tape.seed(t[static_cast<std::size_t>(j)], dt(j));
    tape.backward();

    Vec du(m);
    for (Eigen::Index j = 0; j < m; ++j) du(j) = tape.adjoint(u[static_cast<std::size_t>(j)]);
    g.weight += du * in.p.transpose();
    for (Eigen::Index j = 0; j < model.bias.size(); ++j)
      g.bias(j) += tape.adjoint(b[static_cast<std::size_t>(j)]);
  }
  if (!std::isfinite(g.loss) || !g.weight.allFinite() || !g.bias.allFinite()) {
    throw NumericalError("gradients");
  }
  return g;
}

double accuracy(const Mat& logits, std::span<const int> labels, std::span<const int> rows) {
  const std::vector<int> idx = all_rows(rows, logits.rows());
  if (idx.empty()) return 0.0;
  int correct = 0;
  for (int r : idx) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace hnn
