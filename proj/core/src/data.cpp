#include "hnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hnn/errors.hpp"
#include "json.hpp"

namespace hnn {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& reason) {
  throw DataError("invalid dataset: " + reason);
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

std::vector<int> read_indices(const json& j, const char* which) {
  if (!j.is_array()) invalid(std::string("splits.") + which + " is not an array");
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number_integer()) invalid(std::string("splits.") + which + " has a non-integer");
    out.push_back(e.get<int>());
  }
  return out;
}

// Stratified assignment shared by split() and the generators.
Splits stratify(const std::vector<int>& labels, int num_classes, std::array<double, 3> ratios,
                std::mt19937_64& rng, SmallClassPolicy policy) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));

  Splits s;
  for (auto& cls : members) {
    const int n = static_cast<int>(cls.size());
    std::shuffle(cls.begin(), cls.end(), rng);
    if (n < 3) {
      if (n > 0 && policy == SmallClassPolicy::Reject) throw DataError("class too small to stratify");
      s.train.insert(s.train.end(), cls.begin(), cls.end());
      continue;
    }
    int n_val = std::max(1, static_cast<int>(std::lround(ratios[1] * n)));
    int n_test = std::max(1, static_cast<int>(std::lround(ratios[2] * n)));
    while (n - n_val - n_test < 1) {
      if (n_val >= n_test) --n_val; else --n_test;
    }
    s.val.insert(s.val.end(), cls.begin(), cls.begin() + n_val);
    s.test.insert(s.test.end(), cls.begin() + n_val, cls.begin() + n_val + n_test);
    s.train.insert(s.train.end(), cls.begin() + n_val + n_test, cls.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace

void validate(const Dataset& ds) {
  const Eigen::Index n = ds.size();
  if (n == 0) invalid("no feature rows");
  if (ds.feature_dim() < 1) invalid("feature dimension must be at least 1");
  if (!ds.features.allFinite()) invalid("non-finite feature value");
  if (static_cast<Eigen::Index>(ds.labels.size()) != n) {
    invalid(std::to_string(ds.labels.size()) + " labels for " + std::to_string(n) + " rows");
  }
  if (ds.num_classes < 1) invalid("no classes");
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] < 0 || ds.labels[i] >= ds.num_classes) {
      invalid("label " + std::to_string(ds.labels[i]) + " at row " + std::to_string(i) +
              " outside [0, " + std::to_string(ds.num_classes) + ")");
    }
  }
  if (ds.splits.empty()) return;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* part : {&ds.splits.train, &ds.splits.val, &ds.splits.test}) {
    for (int i : *part) {
      if (i < 0 || i >= n) invalid("split index " + std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)]++) invalid("splits overlap at index " + std::to_string(i));
    }
  }
  std::vector<char> in_train(static_cast<std::size_t>(ds.num_classes), 0);
  for (int i : ds.splits.train) in_train[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] = 1;
  for (int c = 0; c < ds.num_classes; ++c) {
    if (!in_train[static_cast<std::size_t>(c)]) invalid("class " + std::to_string(c) + " absent from train");
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("parse error at line " + std::to_string(line_of(text, e.byte)) + ": " +
                    e.what());
  }
  if (!j.is_object()) invalid("top level is not an object");

  Dataset ds;
  if (j.contains("name")) {
    if (!j["name"].is_string()) invalid("name is not a string");
    ds.name = j["name"].get<std::string>();
  }
  if (!j.contains("features") || !j["features"].is_array()) invalid("missing features array");
  const json& feats = j["features"];
  if (feats.empty()) invalid("empty feature array");
  if (!feats[0].is_array()) invalid("feature row 0 is not an array");
  const std::size_t d = feats[0].size();
  ds.features.resize(static_cast<Eigen::Index>(feats.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < feats.size(); ++r) {
    const json& row = feats[r];
    if (!row.is_array() || row.size() != d) {
      invalid("feature row " + std::to_string(r) + " does not have " + std::to_string(d) + " entries");
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (!row[c].is_number()) invalid("feature row " + std::to_string(r) + " has a non-number");
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }

  if (!j.contains("labels") || !j["labels"].is_array()) invalid("missing labels array");
  for (const auto& l : j["labels"]) {
    if (!l.is_number_integer()) invalid("labels must be integers");
    ds.labels.push_back(l.get<int>());
  }
  if (j.contains("num_classes")) {
    if (!j["num_classes"].is_number_integer()) invalid("num_classes is not an integer");
    ds.num_classes = j["num_classes"].get<int>();
  } else {
    ds.num_classes = static_cast<int>(std::set<int>(ds.labels.begin(), ds.labels.end()).size());
  }

  if (j.contains("splits")) {
    const json& s = j["splits"];
    if (!s.is_object()) invalid("splits is not an object");
    for (const char* key : {"train", "val", "test"}) {
      if (!s.contains(key)) invalid(std::string("splits.") + key + " missing");
    }
    ds.splits.train = read_indices(s["train"], "train");
    ds.splits.val = read_indices(s["val"], "val");
    ds.splits.test = read_indices(s["test"], "test");
  }
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) invalid("edges is not an array");
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        invalid("edges must be [u, v] integer pairs");
      }
      ds.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  validate(ds);
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  json j;
  j["name"] = ds.name;
  json feats = json::array();
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) row.push_back(ds.features(r, c));
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  j["labels"] = ds.labels;
  j["num_classes"] = ds.num_classes;
  if (!ds.splits.empty()) {
    j["splits"] = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
  }
  if (!ds.edges.empty()) {
    json edges = json::array();
    for (const auto& [u, v] : ds.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump() << '\n';
}

Dataset split(const Dataset& ds, std::array<double, 3> ratios, std::uint64_t seed,
              SmallClassPolicy small) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw std::invalid_argument("split: ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split: ratios must sum to 1");
  }
  Dataset out = ds;
  std::mt19937_64 rng(seed);
  out.splits = stratify(ds.labels, ds.num_classes, ratios, rng, small);
  validate(out);
  return out;
}

Dataset gen_tree_dataset(int depth, int feature_dim, double noise_sigma, std::uint64_t seed) {
  if (depth < 2) throw std::invalid_argument("gen_tree_dataset: depth must be at least 2");
  if (feature_dim < 2 * depth) {
    throw std::invalid_argument("gen_tree_dataset: feature_dim must be at least 2 * depth");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("gen_tree_dataset: negative noise");

  const int n = (1 << (depth + 1)) - 1;
  Dataset ds;
  ds.name = "tree-depth" + std::to_string(depth);
  ds.num_classes = depth + 1;
  ds.features = Mat::Zero(n, feature_dim);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Walk from the node up to the root; heap index children are 2p+1, 2p+2.
    int level = 0;
    for (int k = i + 1; k > 1; k >>= 1) ++level;
    ds.labels[static_cast<std::size_t>(i)] = level;
    int node = i;
    for (int l = level - 1; l >= 0; --l) {
      const int parent = (node - 1) / 2;
      ds.features(i, 2 * l) = node == 2 * parent + 1 ? -1.0 : 1.0;
      ds.features(i, 2 * l + 1) = 1.0;
      node = parent;
    }
    if (i > 0) ds.edges.emplace_back((i - 1) / 2, i);
  }

  std::mt19937_64 rng(seed);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < feature_dim; ++c) ds.features(r, c) += noise(rng);
  }
  ds.splits = stratify(ds.labels, ds.num_classes, {0.6, 0.2, 0.2}, rng, SmallClassPolicy::KeepInTrain);
  validate(ds);
  return ds;
}

std::vector<int> class_counts(const Dataset& ds, const std::vector<int>& rows) {
  std::vector<int> counts(static_cast<std::size_t>(ds.num_classes), 0);
  if (rows.empty()) {
    for (int l : ds.labels) ++counts[static_cast<std::size_t>(l)];
  } else {
    for (int r : rows) ++counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(r)])];
  }
  return counts;
}

}  // namespace hnn
