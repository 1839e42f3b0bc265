#pragma once

// Shared helpers for tests that touch the filesystem or need a dataset shaped
// like the WebKB Texas graph.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hnn/data.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("hnn-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

// 183 nodes, 1703 binary bag-of-words features, 5 classes with the Texas
// class sizes. Each word comes from the class's own block of the vocabulary
// with probability 1/2, otherwise from shared background. At that share a
// softmax regression on the features scores about 0.8 on a 60/20/20 split,
// roughly what feature-only models reach on the real graph.
inline hnn::Dataset texas_like(std::uint64_t seed) {
  constexpr int kNodes = 183, kFeatures = 1703, kClasses = 5;
  const std::vector<int> sizes{101, 33, 30, 18, 1};
  constexpr int kBlock = 300;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> block_word(0, kBlock - 1);
  std::uniform_int_distribution<int> any_word(0, kFeatures - 1);
  std::uniform_int_distribution<int> length(20, 40);
  std::bernoulli_distribution own_block(0.5);

  hnn::Dataset ds;
  ds.name = "texas-like";
  ds.num_classes = kClasses;
  ds.features = hnn::Mat::Zero(kNodes, kFeatures);
  int row = 0;
  for (int c = 0; c < kClasses; ++c) {
    for (int k = 0; k < sizes[static_cast<std::size_t>(c)]; ++k, ++row) {
      ds.labels.push_back(c);
      const int words = length(rng);
      for (int w = 0; w < words; ++w) {
        const int col = own_block(rng) ? c * kBlock + block_word(rng) : any_word(rng);
        ds.features(row, col) = 1.0;
      }
    }
  }
  return ds;
}

}  // namespace fixture
