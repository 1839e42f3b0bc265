#include <fstream>
#include <stdexcept>

#include <gtest/gtest.h>
#include "json.hpp"

#include "fixtures.hpp"
#include "hnn/errors.hpp"
#include "hnn/train.hpp"

using namespace hnn;

namespace {

double split_accuracy(const HnnModel& m, const Dataset& ds, const std::vector<int>& rows) {
  return accuracy(forward(m, ds.features), ds.labels, rows);
}

void expect_same_model(const HnnModel& a, const HnnModel& b) {
  EXPECT_EQ(a.flavor, b.flavor);
  EXPECT_EQ(a.weight, b.weight);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.readout_weight, b.readout_weight);
  EXPECT_EQ(a.readout_bias, b.readout_bias);
  EXPECT_EQ(a.feature_scale, b.feature_scale);
}

}  // namespace

TEST(Train, ZeroEpochsLeavesModelUnchanged) {
  const Dataset ds = gen_tree_dataset(3, 6, 0.1, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(ds, cfg);
  EXPECT_EQ(r.epochs_run, 0);
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_EQ(r.best_epoch, 0);
  expect_same_model(r.model, initial_model(ds, cfg));
}

TEST(Train, SameSeedGivesIdenticalMetricStreams) {
  const Dataset ds = gen_tree_dataset(4, 8, 0.1, 2);
  for (Model flavor : {Model::Klein, Model::Poincare, Model::Lorentz}) {
    TrainConfig cfg;
    cfg.flavor = flavor;
    cfg.epochs = 40;
    const TrainResult a = train(ds, cfg), b = train(ds, cfg);
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
      EXPECT_EQ(a.metrics[i].epoch, b.metrics[i].epoch);
      EXPECT_EQ(a.metrics[i].train_loss, b.metrics[i].train_loss);
      EXPECT_EQ(a.metrics[i].val_acc, b.metrics[i].val_acc);
    }
    expect_same_model(a.model, b.model);
  }
}

TEST(Train, TreeReachesHighTrainAccuracyIn500Epochs) {
  const Dataset ds = gen_tree_dataset(6, 16, 0.1, 42);
  for (Model flavor : {Model::Klein, Model::Poincare, Model::Lorentz}) {
    TrainConfig cfg;
    cfg.flavor = flavor;
    cfg.epochs = 500;
    cfg.patience = 0;
    const TrainResult r = train(ds, cfg);
    EXPECT_EQ(r.epochs_run, 500);
    EXPECT_GE(split_accuracy(r.model, ds, ds.splits.train), 0.95) << to_string(flavor);
    EXPECT_LT(r.metrics.back().train_loss, r.metrics.front().train_loss);
  }
}

TEST(Train, EarlyStoppingHonoursPatience) {
  const Dataset ds = gen_tree_dataset(4, 8, 0.1, 3);
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.patience = 5;
  const TrainResult r = train(ds, cfg);
  EXPECT_LT(r.epochs_run, 5000);
  EXPECT_LE(r.best_epoch, r.epochs_run);
  // Replay the rule: the initial model's val accuracy is the baseline, the
  // run ends `patience` epochs after the last strict improvement, and ties
  // move the snapshot to the later epoch.
  double best = split_accuracy(initial_model(ds, cfg), ds, ds.splits.val);
  int last_strict = 0, best_epoch = 0;
  for (const auto& m : r.metrics) {
    if (m.val_acc > best) last_strict = m.epoch;
    if (m.val_acc >= best) {
      best = m.val_acc;
      best_epoch = m.epoch;
    }
  }
  EXPECT_EQ(r.epochs_run - last_strict, cfg.patience);
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(r.best_val_acc, best);
  EXPECT_EQ(split_accuracy(r.model, ds, ds.splits.val), best);
  EXPECT_GT(r.mean_epoch_seconds(), 0.0);
}

TEST(Train, Preconditions) {
  Dataset ds = gen_tree_dataset(3, 6, 0.1, 1);
  ds.splits = {};
  EXPECT_THROW(train(ds, TrainConfig{}), std::invalid_argument);
  ds = gen_tree_dataset(3, 6, 0.1, 1);
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(train(ds, cfg), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsExact) {
  fixture::TempDir dir;
  const Dataset ds = gen_tree_dataset(3, 6, 0.1, 1);
  for (Model flavor : {Model::Klein, Model::Poincare, Model::Lorentz}) {
    TrainConfig cfg;
    cfg.flavor = flavor;
    cfg.epochs = 15;
    cfg.seed = 18446744073709551615ULL;
    const TrainResult r = train(ds, cfg);
    save_checkpoint(r.model, cfg, dir.file("ck.json"));
    const Checkpoint ck = load_checkpoint(dir.file("ck.json"));
    expect_same_model(ck.model, r.model);
    EXPECT_EQ(ck.config.flavor, flavor);
    EXPECT_EQ(ck.config.epochs, 15);
    EXPECT_EQ(ck.config.seed, cfg.seed);
    EXPECT_EQ(ck.config.lr, cfg.lr);
  }
}

TEST(Checkpoint, MalformedFilesAreDataErrors) {
  fixture::TempDir dir;
  std::ofstream(dir.file("bad.json")) << "{ not json";
  EXPECT_THROW(load_checkpoint(dir.file("bad.json")), DataError);

  const HnnModel m = init_model(Model::Klein, 3, 2, 2, 1);
  save_checkpoint(m, TrainConfig{}, dir.file("ok.json"));
  std::ifstream in(dir.file("ok.json"));
  nlohmann::json j = nlohmann::json::parse(in);
  ASSERT_EQ(j.at("dims").at("hidden"), 2);
  j["dims"]["hidden"] = 3;
  std::ofstream(dir.file("shape.json")) << j.dump();
  EXPECT_THROW(load_checkpoint(dir.file("shape.json")), DataError);
  EXPECT_THROW(load_checkpoint(dir.file("missing.json")), DataError);
}
