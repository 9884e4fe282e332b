#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "siterec/catalog.hpp"

namespace siterec {

struct PurifyConfig {
  double jsd_threshold = 2.0;   // nats; classes above are dropped
  double kld_threshold = 2.0;   // nats; images above are dropped
  std::size_t min_images_after = 5;
};

struct CohesionReport {
  std::string site_id;
  std::size_t n_images = 0;
  double jsd = 0.0;
  bool kept = false;
};

struct DenoiseReport {
  std::string image_id;
  std::string site_id;
  double kl = 0.0;
  bool kept = false;
};

struct PurifyStats {
  double classes_removed_fraction = 0.0;
  double images_removed_fraction = 0.0;
};

struct PurifiedDataset {
  FeatureDataset dataset;
  std::vector<CohesionReport> cohesion;
  std::vector<DenoiseReport> denoise;
  PurifyStats stats;
};

// H(p) = -sum p ln p, with 0 ln 0 := 0. Natural log throughout.
double shannon_entropy(const FeatureDistribution& p);

// Equal-weight multivariate Jensen-Shannon divergence:
// H(mean of the set) - mean of the entropies. Throws EmptyClass on n = 0.
double class_jsd(const std::vector<const FeatureDistribution*>& features);
double class_jsd(const std::vector<FeatureDistribution>& features);

// Elementwise mean; stays normalized. Throws EmptyClass on n = 0.
FeatureDistribution centroid(
    const std::vector<const FeatureDistribution*>& features);
FeatureDistribution centroid(const std::vector<FeatureDistribution>& features);

// D_KL(p || m) = sum_x p(x) ln(p(x)/m(x)). Throws UnsupportedAtom when
// p(x) > 0 with m(x) = 0.
double forward_kl(const FeatureDistribution& p, const FeatureDistribution& m);

// Stage 1: drop classes with JSD above jsd_threshold. Stage 2: within each
// survivor, drop images with KL-to-centroid above kld_threshold (centroid
// computed once per class), then drop classes left with fewer than
// min_images_after images. Reports cover every class and image.
PurifiedDataset purify_dataset(const FeatureDataset& dataset,
                               const PurifyConfig& config);

void write_cohesion_csv(std::ostream& out,
                        const std::vector<CohesionReport>& reports);
void write_denoise_csv(std::ostream& out,
                       const std::vector<DenoiseReport>& reports);

}  // namespace siterec
