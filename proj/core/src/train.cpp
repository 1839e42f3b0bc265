#include "hnn/train.hpp"

#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hnn/errors.hpp"
#include "hnn/optim.hpp"
#include "json.hpp"

namespace hnn {

namespace {

using nlohmann::json;

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string("checkpoint: ") + what + " has the wrong number of rows");
  }
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("checkpoint: ") + what + " has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec vector_from(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw DataError(std::string("checkpoint: ") + what + " has the wrong length");
  }
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

double TrainResult::mean_epoch_seconds() const {
  if (metrics.empty()) return 0.0;
  double total = 0.0;
  for (const auto& m : metrics) total += m.seconds;
  return total / static_cast<double>(metrics.size());
}

HnnModel initial_model(const Dataset& ds, const TrainConfig& config) {
  return init_model(config.flavor, ds.feature_dim(), config.hidden, ds.num_classes, config.seed,
                    feature_scale_for(ds.features));
}

TrainResult train(const Dataset& ds, const TrainConfig& config) {
  return train(initial_model(ds, config), ds, config);
}

TrainResult train(HnnModel model, const Dataset& ds, const TrainConfig& config) {
  validate(ds);
  validate(model);
  if (ds.splits.train.empty()) throw std::invalid_argument("train: dataset has no train split");
  if (!(config.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (config.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");

  const std::span<const int> labels(ds.labels);
  const std::span<const int> train_rows(ds.splits.train);
  const std::span<const int> val_rows(ds.splits.val);
  auto val_accuracy = [&](const HnnModel& m) {
    if (val_rows.empty()) return 0.0;
    Mat sub(static_cast<Eigen::Index>(val_rows.size()), ds.feature_dim());
    std::vector<int> sub_labels;
    for (std::size_t r = 0; r < val_rows.size(); ++r) {
      sub.row(static_cast<Eigen::Index>(r)) = ds.features.row(val_rows[r]);
      sub_labels.push_back(ds.labels[static_cast<std::size_t>(val_rows[r])]);
    }
    return accuracy(forward(m, sub), sub_labels);
  };

  TrainResult result;
  result.model = model;
  result.best_val_acc = val_accuracy(model);

  GradState state = init_grad_state(model);
  const AdamConfig adam{config.lr};
  int since_improvement = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const Gradients g = gradients(model, ds.features, labels, train_rows);
    model = riemannian_adam_step(state, model, g, adam);
    const auto stop = std::chrono::steady_clock::now();

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = g.loss;
    em.val_acc = val_accuracy(model);
    em.seconds = std::chrono::duration<double>(stop - start).count();
    result.metrics.push_back(em);
    result.epochs_run = epoch;

    if (em.val_acc > result.best_val_acc) {
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (em.val_acc >= result.best_val_acc) {
      result.best_val_acc = em.val_acc;
      result.best_epoch = epoch;
      result.model = model;
    }
    if (config.patience > 0 && since_improvement >= config.patience) break;
  }
  return result;
}

void save_checkpoint(const HnnModel& model, const TrainConfig& config, const std::string& path) {
  json j;
  j["flavor"] = std::string(to_string(model.flavor));
  j["dims"] = {{"input", model.input_dim()},
               {"hidden", model.hidden_dim()},
               {"classes", model.num_classes()}};
  j["weight"] = matrix_json(model.weight);
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  j["readout_weight"] = matrix_json(model.readout_weight);
  j["readout_bias"] = std::vector<double>(model.readout_bias.data(),
                                          model.readout_bias.data() + model.readout_bias.size());
  j["feature_scale"] = model.feature_scale;
  j["config"] = {{"hidden", config.hidden},
                 {"lr", config.lr},
                 {"epochs", config.epochs},
                 {"patience", config.patience}};
  j["seed"] = config.seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Checkpoint ck;
  try {
    const json j = json::parse(buf.str());
    HnnModel& m = ck.model;
    m.flavor = parse_model(j.at("flavor").get<std::string>());
    const auto in_dim = j.at("dims").at("input").get<Eigen::Index>();
    const auto hidden = j.at("dims").at("hidden").get<Eigen::Index>();
    const auto classes = j.at("dims").at("classes").get<Eigen::Index>();
    m.weight = matrix_from(j.at("weight"), hidden, in_dim, "weight");
    m.bias = vector_from(j.at("bias"), m.flavor == Model::Lorentz ? hidden + 1 : hidden, "bias");
    m.readout_weight = matrix_from(j.at("readout_weight"), classes, hidden, "readout_weight");
    m.readout_bias = vector_from(j.at("readout_bias"), classes, "readout_bias");
    m.feature_scale = j.value("feature_scale", 1.0);
    const json& c = j.at("config");
    ck.config.flavor = m.flavor;
    ck.config.hidden = c.at("hidden").get<int>();
    ck.config.lr = c.at("lr").get<double>();
    ck.config.epochs = c.at("epochs").get<int>();
    ck.config.patience = c.at("patience").get<int>();
    ck.config.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  try {
    validate(ck.model);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace hnn
