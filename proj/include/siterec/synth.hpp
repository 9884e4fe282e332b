#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>

#include "siterec/catalog.hpp"
#include "siterec/geo.hpp"

namespace siterec {

struct SynthConfig {
  std::size_t num_sites = 100;
  std::size_t images_per_site = 80;
  std::size_t dimension = 100;
  // Symmetric Dirichlet concentration for prototypes and global draws;
  // small values give sharply peaked, well-separated distributions.
  double prototype_concentration = 0.05;
  // Mixing weight of a fresh global draw into each inlier image.
  double inlier_noise = 0.1;
  double outlier_fraction = 0.0;
  double chaotic_class_fraction = 0.0;
  LatLonBounds geo_bbox{40.70, 40.80, -74.02, -73.93};
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::set<std::string> chaotic_sites;
  std::set<std::string> outlier_images;  // planted in non-chaotic classes
  std::map<std::string, FeatureDistribution> prototypes;
};

struct SynthOutput {
  SiteCatalog catalog;
  FeatureDataset dataset;
  GroundTruth truth;
};

// Draw from a symmetric Dirichlet(alpha) via normalized gamma variates.
FeatureDistribution draw_dirichlet(std::mt19937_64& rng, std::size_t dim,
                                   double alpha);

// (1 - eps) * prototype + eps * fresh Dirichlet(alpha) draw.
FeatureDistribution noisy_draw(const FeatureDistribution& prototype,
                               double eps, double alpha,
                               std::mt19937_64& rng);

// Deterministic per seed: sites placed uniformly in geo_bbox, categories
// round-robin, prototypes from the Dirichlet process, inliers as prototype
// mixtures, planted outliers as pure global draws, and the first
// round(chaotic_class_fraction * num_sites) sites fully chaotic.
SynthOutput generate_synthetic(const SynthConfig& cfg);

}  // namespace siterec
