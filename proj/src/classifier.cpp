#include "siterec/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include <openssl/sha.h>

namespace siterec {

namespace {

void append_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(std::uint8_t(x >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) v.push_back(std::uint8_t(x >> (8 * i)));
}

void append_f32(std::vector<std::uint8_t>& v, float x) {
  std::uint32_t bits;
  std::memcpy(&bits, &x, 4);
  append_u32(v, bits);
}

void append_f64(std::vector<std::uint8_t>& v, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  append_u64(v, bits);
}

void append_string(std::vector<std::uint8_t>& v, const std::string& s) {
  append_u32(v, static_cast<std::uint32_t>(s.size()));
  v.insert(v.end(), s.begin(), s.end());
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return x;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float x;
    std::memcpy(&x, &bits, 4);
    return x;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > len_) throw CorruptModel("model blob truncated");
  }
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

void softmax_inplace(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

std::size_t argmax_site(const std::vector<double>& probs,
                        const std::vector<std::string>& site_ids) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best] ||
        (probs[i] == probs[best] && site_ids[i] < site_ids[best])) {
      best = i;
    }
  }
  return best;
}

double cross_entropy(std::size_t true_class, const std::vector<double>& q) {
  if (true_class >= q.size()) {
    throw IndexOutOfRange("class " + std::to_string(true_class) +
                          " of " + std::to_string(q.size()));
  }
  return -std::log(std::max(q[true_class], 1e-12));
}

Prediction predict(const RegionModel& model, const FeatureDistribution& x) {
  if (x.dim() != model.dim) {
    throw DimensionMismatch("feature dim " + std::to_string(x.dim()) +
                            " != model dim " + std::to_string(model.dim));
  }
  const std::size_t c = model.num_sites();
  std::vector<double> z(c);
  for (std::size_t k = 0; k < c; ++k) {
    const float* row = model.weights.data() + k * model.dim;
    double acc = model.biases[k];
    for (std::size_t i = 0; i < model.dim; ++i) {
      acc += static_cast<double>(row[i]) * x.probs[i];
    }
    z[k] = acc;
  }
  softmax_inplace(z);
  Prediction p;
  p.site_ids = model.site_ids;
  p.top1_index = argmax_site(z, model.site_ids);
  p.probs = std::move(z);
  return p;
}

RegionModel train_region_model(const FeatureDataset& train,
                               const TrainConfig& config,
                               const std::string& region_id) {
  if (config.epochs < 1 || config.lr <= 0.0 || config.batch_size < 1) {
    throw InvalidConfig("train config: need epochs >= 1, lr > 0, batch >= 1");
  }
  if (train.images.empty()) throw EmptyTrainingSet("no training images");

  std::set<std::string> site_set;
  for (const auto& img : train.images) site_set.insert(img.site_id);
  std::vector<std::string> sites(site_set.begin(), site_set.end());
  if (sites.size() < 2) {
    throw TooFewClasses("need >= 2 sites, got " +
                        std::to_string(sites.size()));
  }
  std::unordered_map<std::string, std::size_t> class_of;
  for (std::size_t i = 0; i < sites.size(); ++i) class_of[sites[i]] = i;

  const std::size_t c = sites.size();
  const std::size_t d = train.dimension;
  const std::size_t n = train.images.size();
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = class_of.at(train.images[i].site_id);
  }

  std::vector<double> w(c * d, 0.0), b(c, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  std::vector<double> z(c);
  std::vector<double> gw(c * d), gb(c);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t t = start; t < end; ++t) {
        const std::size_t idx = order[t];
        const std::vector<double>& x = train.images[idx].feature.probs;
        for (std::size_t k = 0; k < c; ++k) {
          const double* row = w.data() + k * d;
          double acc = b[k];
          for (std::size_t i = 0; i < d; ++i) acc += row[i] * x[i];
          z[k] = acc;
        }
        softmax_inplace(z);
        // grad of mean batch CE: (q - onehot) x^T per sample
        for (std::size_t k = 0; k < c; ++k) {
          const double g = (z[k] - (k == labels[idx] ? 1.0 : 0.0)) * inv_batch;
          if (g == 0.0) continue;
          double* grow = gw.data() + k * d;
          for (std::size_t i = 0; i < d; ++i) grow[i] += g * x[i];
          gb[k] += g;
        }
      }
      for (std::size_t j = 0; j < c * d; ++j) w[j] -= config.lr * gw[j];
      for (std::size_t k = 0; k < c; ++k) b[k] -= config.lr * gb[k];
    }
  }

  RegionModel model;
  model.region_id = region_id;
  model.site_ids = std::move(sites);
  model.dim = d;
  model.weights.assign(w.begin(), w.end());
  model.biases.assign(b.begin(), b.end());
  model.version = 1;
  model.meta = TrainingMeta{config.seed,
                            static_cast<std::uint32_t>(config.epochs),
                            config.lr, n};
  return model;
}

double evaluate_top1(const RegionModel& model, const FeatureDataset& test) {
  if (test.images.empty()) throw EmptyTestSet("empty test set");
  std::size_t hits = 0;
  for (const auto& img : test.images) {
    const Prediction p = predict(model, img.feature);
    if (p.top1() == img.site_id) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.images.size());
}

std::string sha256_hex(const std::uint8_t* data, std::size_t len) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(data, len, digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char byte : digest) {
    out.push_back(hex[byte >> 4]);
    out.push_back(hex[byte & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> serialize_model(const RegionModel& model) {
  std::vector<std::uint8_t> v;
  v.reserve(64 + model.weights.size() * 4);
  v.push_back('G');
  v.push_back('R');
  v.push_back('M');
  v.push_back('1');
  append_u32(v, model.version);
  append_string(v, model.region_id);
  append_u32(v, static_cast<std::uint32_t>(model.num_sites()));
  append_u32(v, static_cast<std::uint32_t>(model.dim));
  append_u64(v, model.meta.seed);
  append_u32(v, model.meta.epochs);
  append_f64(v, model.meta.lr);
  append_u64(v, model.meta.train_size);
  for (const auto& s : model.site_ids) append_string(v, s);
  for (float x : model.biases) append_f32(v, x);
  for (float x : model.weights) append_f32(v, x);

  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(v.data(), v.size(), digest);
  v.insert(v.end(), digest, digest + SHA256_DIGEST_LENGTH);
  return v;
}

RegionModel deserialize_model(const std::vector<std::uint8_t>& blob) {
  if (blob.size() < 4 + SHA256_DIGEST_LENGTH ||
      std::memcmp(blob.data(), "GRM1", 4) != 0) {
    throw CorruptModel("bad magic or short blob");
  }
  const std::size_t payload_len = blob.size() - SHA256_DIGEST_LENGTH;
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(blob.data(), payload_len, digest);
  if (std::memcmp(digest, blob.data() + payload_len, SHA256_DIGEST_LENGTH) !=
      0) {
    throw CorruptModel("content hash mismatch");
  }

  Reader r(blob.data() + 4, payload_len - 4);
  RegionModel model;
  model.version = r.u32();
  model.region_id = r.str();
  const std::uint32_t nsites = r.u32();
  const std::uint32_t dim = r.u32();
  model.dim = dim;
  model.meta.seed = r.u64();
  model.meta.epochs = r.u32();
  model.meta.lr = r.f64();
  model.meta.train_size = r.u64();
  model.site_ids.reserve(nsites);
  for (std::uint32_t i = 0; i < nsites; ++i) model.site_ids.push_back(r.str());
  model.biases.reserve(nsites);
  for (std::uint32_t i = 0; i < nsites; ++i) model.biases.push_back(r.f32());
  model.weights.reserve(std::size_t(nsites) * dim);
  for (std::size_t i = 0; i < std::size_t(nsites) * dim; ++i) {
    model.weights.push_back(r.f32());
  }
  if (r.pos() != payload_len - 4) {
    throw CorruptModel("trailing bytes in payload");
  }
  for (float x : model.weights) {
    if (!std::isfinite(x)) throw CorruptModel("non-finite weight");
  }
  return model;
}

}  // namespace siterec
