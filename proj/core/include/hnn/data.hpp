#pragma once

// Datasets: JSON ingestion, stratified splits and a synthetic tree generator.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hnn/manifolds.hpp"

namespace hnn {

struct Splits {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  bool empty() const { return train.empty() && val.empty() && test.empty(); }
  friend bool operator==(const Splits&, const Splits&) = default;
};

struct Dataset {
  std::string name;
  Mat features;               // N x d
  std::vector<int> labels;    // N values in [0, num_classes)
  int num_classes = 0;
  Splits splits;              // empty until split() fills it
  std::vector<std::pair<int, int>> edges;  // carried, not consumed

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index feature_dim() const { return features.cols(); }
};

/// Throws DataError("invalid dataset: <reason>") on any invariant violation.
void validate(const Dataset& ds);

/// Reads the JSON dataset format. num_classes comes from an optional
/// "num_classes" field, otherwise it is the number of distinct labels.
/// Malformed JSON throws DataError("parse error at line L: ...").
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

/// What split() does with a class of fewer than 3 members.
enum class SmallClassPolicy {
  Reject,       // DataError("class too small to stratify")
  KeepInTrain,  // the whole class goes to train
};

/// Stratified shuffled split, deterministic in `seed`. Per class of size n,
/// val and test each get max(1, round(ratio * n)) members and train the rest.
Dataset split(const Dataset& ds, std::array<double, 3> ratios, std::uint64_t seed,
              SmallClassPolicy small = SmallClassPolicy::Reject);

/// Complete binary tree of the given depth in breadth-first order; label =
/// node depth. Level l of the root-to-node path sets coordinate 2l to the
/// branch sign (+-1) and coordinate 2l+1 to 1; remaining coordinates are 0;
/// Gaussian noise of scale noise_sigma is added everywhere. Comes with its own
/// stratified 60/20/20 split in which the two smallest levels stay in train.
/// Requires depth >= 2 and feature_dim >= 2 * depth.
Dataset gen_tree_dataset(int depth, int feature_dim, double noise_sigma, std::uint64_t seed);

/// Per-class counts of labels restricted to `rows` (all rows when empty).
std::vector<int> class_counts(const Dataset& ds, const std::vector<int>& rows = {});

}  // namespace hnn
