#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hnn/data.hpp"
#include "hnn/errors.hpp"

using namespace hnn;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string error_of(const std::string& path) {
  try {
    load_dataset(path);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

Dataset balanced(int per_class, int classes) {
  Dataset ds;
  ds.name = "balanced";
  ds.num_classes = classes;
  ds.features = Mat::Zero(per_class * classes, 2);
  for (int i = 0; i < per_class * classes; ++i) {
    ds.labels.push_back(i % classes);
    ds.features(i, 0) = i;
  }
  return ds;
}

void expect_partition(const Dataset& ds) {
  std::vector<int> all;
  for (const auto* part : {&ds.splits.train, &ds.splits.val, &ds.splits.test})
    all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  std::vector<int> want(static_cast<std::size_t>(ds.size()));
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(all, want);
}

// Plain multinomial logistic regression by full-batch gradient descent.
double logistic_train_accuracy(const Dataset& ds) {
  const Eigen::Index n = ds.size(), d = ds.feature_dim(), c = ds.num_classes;
  Mat x(n, d + 1);
  x << ds.features, Mat::Ones(n, 1);
  Mat w = Mat::Zero(d + 1, c);
  Mat y = Mat::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) y(i, ds.labels[static_cast<std::size_t>(i)]) = 1.0;
  for (int it = 0; it < 3000; ++it) {
    Mat z = x * w;
    for (Eigen::Index i = 0; i < n; ++i) {
      z.row(i).array() -= z.row(i).maxCoeff();
      z.row(i) = z.row(i).array().exp().matrix();
      z.row(i) /= z.row(i).sum();
    }
    w -= 0.5 * x.transpose() * (z - y) / static_cast<double>(n);
  }
  const Mat z = x * w;
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg;
    z.row(i).maxCoeff(&arg);
    correct += arg == ds.labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace

TEST(LoadDataset, TexasShapedFile) {
  fixture::TempDir dir;
  const Dataset ds = fixture::texas_like(1);
  save_dataset(ds, dir.file("texas.json"));
  const Dataset back = load_dataset(dir.file("texas.json"));
  EXPECT_EQ(back.size(), 183);
  EXPECT_EQ(back.feature_dim(), 1703);
  EXPECT_EQ(back.num_classes, 5);
  EXPECT_EQ(class_counts(back), (std::vector<int>{101, 33, 30, 18, 1}));
  EXPECT_TRUE(back.splits.empty());
}

TEST(LoadDataset, OptionalFieldsAndInferredClasses) {
  fixture::TempDir dir;
  write_file(dir.file("d.json"), R"({"name": "tiny", "features": [[0.5, 1], [2, 3], [1, 1]],
    "labels": [0, 2, 1], "splits": {"train": [0, 1, 2], "val": [], "test": []},
    "edges": [[0, 1], [1, 2]]})");
  const Dataset ds = load_dataset(dir.file("d.json"));
  EXPECT_EQ(ds.name, "tiny");
  EXPECT_EQ(ds.num_classes, 3);
  EXPECT_EQ(ds.features(0, 0), 0.5);
  EXPECT_EQ(ds.splits.train, (std::vector<int>{0, 1, 2}));
  ASSERT_EQ(ds.edges.size(), 2u);
  EXPECT_EQ(ds.edges[1], std::make_pair(1, 2));
}

TEST(LoadDataset, EmptyFeatureArrayIsInvalid) {
  fixture::TempDir dir;
  write_file(dir.file("d.json"), R"({"name": "e", "features": [], "labels": []})");
  EXPECT_NE(error_of(dir.file("d.json")).find("invalid dataset"), std::string::npos);
}

TEST(LoadDataset, LabelEqualToClassCountIsInvalid) {
  fixture::TempDir dir;
  write_file(dir.file("d.json"),
             R"({"name": "l", "num_classes": 2, "features": [[1], [2]], "labels": [0, 2]})");
  EXPECT_NE(error_of(dir.file("d.json")).find("invalid dataset"), std::string::npos);
}

TEST(LoadDataset, MalformedJsonReportsLine) {
  fixture::TempDir dir;
  write_file(dir.file("d.json"), "{\n  \"name\": \"x\",\n  \"features\": [[1, 2]\n  \"labels\": [0]\n}\n");
  const std::string msg = error_of(dir.file("d.json"));
  EXPECT_NE(msg.find("parse error at line 4"), std::string::npos) << msg;
}

TEST(LoadDataset, OtherInvariantViolations) {
  fixture::TempDir dir;
  write_file(dir.file("a.json"), R"({"name": "a", "features": [[1], [2]], "labels": [0]})");
  EXPECT_NE(error_of(dir.file("a.json")).find("invalid dataset"), std::string::npos);
  write_file(dir.file("b.json"), R"({"name": "b", "features": [[1], [2, 3]], "labels": [0, 1]})");
  EXPECT_NE(error_of(dir.file("b.json")).find("invalid dataset"), std::string::npos);
  write_file(dir.file("c.json"), R"({"name": "c", "features": [[1], [2]], "labels": [0, 1],
    "splits": {"train": [0, 1], "val": [1], "test": []}})");
  EXPECT_NE(error_of(dir.file("c.json")).find("invalid dataset"), std::string::npos);
  EXPECT_THROW(load_dataset(dir.file("missing.json")), DataError);
}

TEST(SaveDataset, RoundTripIsIdentity) {
  fixture::TempDir dir;
  const Dataset ds = gen_tree_dataset(3, 7, 0.3, 5);
  save_dataset(ds, dir.file("t.json"));
  const Dataset back = load_dataset(dir.file("t.json"));
  EXPECT_EQ(back.name, ds.name);
  EXPECT_EQ(back.features, ds.features);  // bitwise: 17 significant digits survive
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.num_classes, ds.num_classes);
  EXPECT_EQ(back.splits, ds.splits);
  EXPECT_EQ(back.edges, ds.edges);
}

TEST(Split, BalancedSizes) {
  const Dataset ds = split(balanced(20, 5), {0.6, 0.2, 0.2}, 3);
  EXPECT_EQ(ds.splits.train.size(), 60u);
  EXPECT_EQ(ds.splits.val.size(), 20u);
  EXPECT_EQ(ds.splits.test.size(), 20u);
  expect_partition(ds);
  for (const auto* part : {&ds.splits.val, &ds.splits.test})
    EXPECT_EQ(class_counts(ds, *part), (std::vector<int>{4, 4, 4, 4, 4}));
}

TEST(Split, DeterministicInSeed) {
  const Dataset base = balanced(20, 5);
  EXPECT_EQ(split(base, {0.6, 0.2, 0.2}, 9).splits, split(base, {0.6, 0.2, 0.2}, 9).splits);
}

TEST(Split, SeedsPermuteButKeepClassCounts) {
  const Dataset base = balanced(20, 5);
  std::set<std::vector<int>> distinct;
  const Dataset first = split(base, {0.6, 0.2, 0.2}, 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = split(base, {0.6, 0.2, 0.2}, seed);
    distinct.insert(ds.splits.test);
    EXPECT_EQ(class_counts(ds, ds.splits.train), class_counts(first, first.splits.train));
    EXPECT_EQ(class_counts(ds, ds.splits.test), class_counts(first, first.splits.test));
  }
  EXPECT_EQ(distinct.size(), 10u);
}

TEST(Split, StratificationWithinOneElement) {
  Dataset ds = fixture::texas_like(2);
  ds = split(ds, {0.6, 0.2, 0.2}, 4, SmallClassPolicy::KeepInTrain);
  expect_partition(ds);
  const auto total = class_counts(ds);
  const auto test = class_counts(ds, ds.splits.test);
  for (std::size_t c = 0; c + 1 < total.size(); ++c) {
    EXPECT_LE(std::abs(test[c] - 0.2 * total[c]), 1.0) << "class " << c;
  }
  EXPECT_EQ(test.back(), 0);
}

TEST(Split, SmallClassRejectedByDefault) {
  const Dataset ds = fixture::texas_like(2);
  try {
    split(ds, {0.6, 0.2, 0.2}, 1);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "class too small to stratify");
  }
}

TEST(Split, RejectsBadRatios) {
  const Dataset ds = balanced(10, 2);
  EXPECT_THROW(split(ds, {0.6, 0.3, 0.2}, 1), std::invalid_argument);
  EXPECT_THROW(split(ds, {0.8, 0.2, 0.0}, 1), std::invalid_argument);
}

TEST(GenTree, Depth4Shape) {
  const Dataset ds = gen_tree_dataset(4, 8, 0.1, 1);
  EXPECT_EQ(ds.size(), 31);
  EXPECT_EQ(ds.num_classes, 5);
  EXPECT_EQ(class_counts(ds), (std::vector<int>{1, 2, 4, 8, 16}));
  EXPECT_EQ(ds.edges.size(), 30u);
  expect_partition(ds);
}

TEST(GenTree, NoiselessSiblingsDifferInOneSign) {
  const Dataset ds = gen_tree_dataset(4, 9, 0.0, 1);
  for (int parent = 0; 2 * parent + 2 < ds.size(); ++parent) {
    const Vec a = ds.features.row(2 * parent + 1), b = ds.features.row(2 * parent + 2);
    int differing = 0;
    for (Eigen::Index c = 0; c < a.size(); ++c) {
      if (a(c) != b(c)) {
        ++differing;
        EXPECT_EQ(a(c), -b(c));
        EXPECT_NE(a(c), 0.0);
      }
    }
    EXPECT_EQ(differing, 1) << "parent " << parent;
  }
}

TEST(GenTree, Depth6IsLinearlySeparableEnough) {
  const Dataset ds = gen_tree_dataset(6, 16, 0.1, 42);
  EXPECT_EQ(ds.size(), 127);
  EXPECT_GE(logistic_train_accuracy(ds), 0.9);
}

TEST(GenTree, DeterministicAndSeedSensitive) {
  const Dataset a = gen_tree_dataset(5, 12, 0.1, 7), b = gen_tree_dataset(5, 12, 0.1, 7);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.splits, b.splits);
  EXPECT_NE(gen_tree_dataset(5, 12, 0.1, 8).features, a.features);
}

TEST(GenTree, Preconditions) {
  EXPECT_THROW(gen_tree_dataset(1, 8, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(gen_tree_dataset(6, 11, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(gen_tree_dataset(3, 6, -1.0, 1), std::invalid_argument);
}
