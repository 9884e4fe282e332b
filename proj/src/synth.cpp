#include "siterec/synth.hpp"

#include <cmath>
#include <cstdio>

namespace siterec {

namespace {

const char* kCategories[] = {"building", "statue",     "church",
                             "museum",   "hotel",      "skyscraper",
                             "park",     "theater"};
constexpr std::size_t kNumCategories = 8;

std::string site_id_for(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%04zu", i);
  return buf;
}

std::string image_id_for(std::size_t site, std::size_t img) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "s%04zu_i%04zu", site, img);
  return buf;
}

}  // namespace

FeatureDistribution draw_dirichlet(std::mt19937_64& rng, std::size_t dim,
                                   double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  FeatureDistribution f;
  f.probs.resize(dim);
  double sum = 0.0;
  for (double& x : f.probs) {
    x = gamma(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    // all gammas underflowed; fall back to uniform
    for (double& x : f.probs) x = 1.0 / static_cast<double>(dim);
    return f;
  }
  for (double& x : f.probs) x /= sum;
  return f;
}

FeatureDistribution noisy_draw(const FeatureDistribution& prototype,
                               double eps, double alpha,
                               std::mt19937_64& rng) {
  if (eps <= 0.0) return prototype;
  const FeatureDistribution noise =
      draw_dirichlet(rng, prototype.dim(), alpha);
  FeatureDistribution f;
  f.probs.resize(prototype.dim());
  for (std::size_t i = 0; i < prototype.dim(); ++i) {
    f.probs[i] = (1.0 - eps) * prototype.probs[i] + eps * noise.probs[i];
  }
  return f;
}

SynthOutput generate_synthetic(const SynthConfig& cfg) {
  if (cfg.num_sites == 0 || cfg.images_per_site < 1 || cfg.dimension < 2 ||
      cfg.prototype_concentration <= 0.0 || cfg.inlier_noise < 0.0 ||
      cfg.inlier_noise > 1.0 || cfg.outlier_fraction < 0.0 ||
      cfg.outlier_fraction > 1.0 || cfg.chaotic_class_fraction < 0.0 ||
      cfg.chaotic_class_fraction > 1.0 ||
      cfg.geo_bbox.lat_min > cfg.geo_bbox.lat_max ||
      cfg.geo_bbox.lon_min > cfg.geo_bbox.lon_max) {
    throw InvalidConfig("bad synthetic generator config");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ulat(cfg.geo_bbox.lat_min,
                                              cfg.geo_bbox.lat_max);
  std::uniform_real_distribution<double> ulon(cfg.geo_bbox.lon_min,
                                              cfg.geo_bbox.lon_max);
  std::uniform_int_distribution<std::uint64_t> uviews(100, 100000);

  const std::size_t n_chaotic = static_cast<std::size_t>(
      std::llround(cfg.chaotic_class_fraction *
                   static_cast<double>(cfg.num_sites)));
  const std::size_t n_outliers_per_site = static_cast<std::size_t>(
      std::llround(cfg.outlier_fraction *
                   static_cast<double>(cfg.images_per_site)));

  SynthOutput out;
  out.dataset.dimension = cfg.dimension;
  out.dataset.images.reserve(cfg.num_sites * cfg.images_per_site);

  for (std::size_t s = 0; s < cfg.num_sites; ++s) {
    SiteRecord rec;
    rec.site_id = site_id_for(s);
    rec.title = "Site " + std::to_string(s);
    rec.location = GeoPoint{ulat(rng), ulon(rng)};
    rec.category = kCategories[s % kNumCategories];
    rec.pageviews = uviews(rng);
    out.catalog.records.push_back(rec);

    const bool chaotic = s < n_chaotic;
    const FeatureDistribution prototype =
        draw_dirichlet(rng, cfg.dimension, cfg.prototype_concentration);
    out.truth.prototypes[rec.site_id] = prototype;
    if (chaotic) out.truth.chaotic_sites.insert(rec.site_id);

    for (std::size_t k = 0; k < cfg.images_per_site; ++k) {
      ImageFeatureRecord img;
      img.image_id = image_id_for(s, k);
      img.site_id = rec.site_id;
      img.source = ImageSource::synthetic;
      // Planted outliers occupy the tail positions of each class.
      const bool outlier =
          chaotic || k >= cfg.images_per_site - n_outliers_per_site;
      if (outlier) {
        img.feature =
            draw_dirichlet(rng, cfg.dimension, cfg.prototype_concentration);
        if (!chaotic) out.truth.outlier_images.insert(img.image_id);
      } else {
        img.feature = noisy_draw(prototype, cfg.inlier_noise,
                                 cfg.prototype_concentration, rng);
      }
      out.dataset.images.push_back(std::move(img));
    }
  }
  return out;
}

}  // namespace siterec
