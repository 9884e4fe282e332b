#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siterec/catalog.hpp"

namespace siterec {

struct TrainConfig {
  double lr = 0.001;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  double lr = 0.0;
  std::uint64_t train_size = 0;
};

// Softmax-regression head over fixed feature vectors; the per-region model.
// Weights are stored as float32 so the GRM1 serialization is lossless.
struct RegionModel {
  std::string region_id;
  std::vector<std::string> site_ids;  // class index <-> site
  std::size_t dim = 0;
  std::vector<float> weights;  // num_sites x dim, row-major
  std::vector<float> biases;   // num_sites
  std::uint32_t version = 1;
  TrainingMeta meta;

  std::size_t num_sites() const { return site_ids.size(); }
};

struct Prediction {
  std::vector<double> probs;          // over site_ids, normalized
  std::vector<std::string> site_ids;  // class index <-> site
  std::size_t top1_index = 0;

  const std::string& top1() const { return site_ids[top1_index]; }
};

// argmax with ties broken by lexicographically smallest site_id.
std::size_t argmax_site(const std::vector<double>& probs,
                        const std::vector<std::string>& site_ids);

// -ln q(true_class), q clamped at 1e-12. Throws IndexOutOfRange.
double cross_entropy(std::size_t true_class, const std::vector<double>& q);

// softmax(W x + b). Throws DimensionMismatch.
Prediction predict(const RegionModel& model, const FeatureDistribution& x);

// Mini-batch SGD on mean cross-entropy, zero-initialized weights,
// seeded shuffle (std::mt19937_64). Bit-reproducible for a given seed.
// Class order is the lexicographically sorted set of site ids in train.
RegionModel train_region_model(const FeatureDataset& train,
                               const TrainConfig& config,
                               const std::string& region_id);

// Fraction of images whose top-1 prediction equals the true site. Images
// of sites the model does not know count as misses.
double evaluate_top1(const RegionModel& model, const FeatureDataset& test);

// GRM1 binary format with a trailing SHA-256 over the payload.
std::vector<std::uint8_t> serialize_model(const RegionModel& model);
RegionModel deserialize_model(const std::vector<std::uint8_t>& blob);

std::string sha256_hex(const std::uint8_t* data, std::size_t len);

}  // namespace siterec
