#pragma once

// Full-batch training with Riemannian Adam and early stopping, plus the JSON
// checkpoint format.

#include <cstdint>
#include <string>
#include <vector>

#include "hnn/data.hpp"
#include "hnn/nn.hpp"

namespace hnn {

struct TrainConfig {
  Model flavor = Model::Klein;
  int hidden = 16;
  double lr = 0.01;
  int epochs = 5000;
  int patience = 100;  // epochs without a strict val improvement; <= 0 disables
  std::uint64_t seed = 42;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;  // mean train loss before this epoch's step
  double val_acc = 0.0;     // after the step
  double seconds = 0.0;     // gradient + update wall time
};

struct TrainResult {
  HnnModel model;  // snapshot with the best validation accuracy (latest on ties)
  std::vector<EpochMetrics> metrics;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  double mean_epoch_seconds() const;
};

/// Model initialised from config.seed for `ds` (feature scale from ds).
HnnModel initial_model(const Dataset& ds, const TrainConfig& config);

/// Requires ds to carry splits. Deterministic in (ds, config) apart from the
/// recorded wall times.
TrainResult train(const Dataset& ds, const TrainConfig& config);
TrainResult train(HnnModel model, const Dataset& ds, const TrainConfig& config);

struct Checkpoint {
  HnnModel model;
  TrainConfig config;
};

void save_checkpoint(const HnnModel& model, const TrainConfig& config, const std::string& path);
/// Throws DataError on malformed files; the model is validated.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hnn
