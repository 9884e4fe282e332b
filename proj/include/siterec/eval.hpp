#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "siterec/catalog.hpp"
#include "siterec/classifier.hpp"
#include "siterec/context.hpp"
#include "siterec/purify.hpp"
#include "siterec/synth.hpp"

namespace siterec {

// Knobs shared by the cross-validation protocols.
struct ProtocolConfig {
  int cv_iterations = 10;
  double train_fraction = 0.8;
  TrainConfig train;
  PurifyConfig purify;
  std::uint64_t seed = 0;
};

struct CvResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_iteration;
};

// Seeded stratified Monte-Carlo cross validation. Purification, when
// enabled, runs on the training split only; test images of purified-away or
// unseen classes count as misses. Throws ClassTooSmall below 2 images.
CvResult monte_carlo_cv(const FeatureDataset& dataset,
                        const ProtocolConfig& cfg, bool purify_train);

struct ImageSweepPoint {
  std::size_t m = 0;
  CvResult result;
};

// One CV run per m, each class subsampled (without replacement, seeded) to
// min(m, class size). m = 0 is rejected.
std::vector<ImageSweepPoint> sweep_images_per_class(
    const FeatureDataset& dataset, const std::vector<std::size_t>& m_values,
    const ProtocolConfig& cfg, bool purify_train);

struct AreaSweepPoint {
  double size_m = 0.0;
  double mean_accuracy = 0.0;
  std::size_t regions_used = 0;
  std::size_t regions_skipped = 0;  // fewer than 2 usable classes
  double mean_sites_per_region = 0.0;
};

// Tiles the catalog bounds at each size, runs CV per region on the sites
// and images it owns, and averages across regions.
std::vector<AreaSweepPoint> sweep_area_size(
    const SiteCatalog& catalog, const FeatureDataset& dataset,
    const std::vector<double>& sizes_m, double overlap_m,
    const ProtocolConfig& cfg, bool purify_train);

struct ConfusionReport {
  std::vector<std::string> categories;            // row/column order
  std::vector<std::vector<double>> rows;          // each sums to 1
  std::vector<double> same_category_correct;      // P(correct | same cat)
  std::vector<std::size_t> row_counts;
};

ConfusionReport confusion_by_category(const RegionModel& model,
                                      const FeatureDataset& test,
                                      const SiteCatalog& catalog);

struct WildConfig {
  std::size_t n_queries = 100;
  double gps_sigma_m = 10.0;
  double compass_sigma_deg = 10.0;
  double view_distance_m = 40.0;   // how far the user stands from the site
  double query_noise = 0.6;        // eps for in-the-wild query features
  double attention_noise = 0.15;   // eps for attention re-queries
  ContextConfig context;           // radius / half-angle thresholds
  std::uint64_t seed = 0;
};

struct WildCell {
  bool location = false;
  bool orientation = false;
  bool attention = false;
  std::size_t correct = 0;
  std::size_t no_candidate = 0;
  double accuracy = 0.0;  // over all queries; meaningless when na
  bool na = false;        // every query yielded NoCandidateInContext
};

// 2^3 filter-ablation grid over seeded wild queries: the user stands near a
// random site, reports a noisy location and bearing, and submits a degraded
// feature draw (attention draws are less degraded).
std::vector<WildCell> simulate_wild(const SiteCatalog& catalog,
                                    const RegionModel& model,
                                    const GroundTruth& truth,
                                    double feature_alpha,
                                    const WildConfig& cfg);

// CSV emitters for the report tables.
void write_cv_csv(std::ostream& out, const std::string& label_a,
                  const CvResult& a, const std::string& label_b,
                  const CvResult& b);
void write_image_sweep_csv(std::ostream& out,
                           const std::vector<ImageSweepPoint>& points);
void write_area_sweep_csv(std::ostream& out,
                          const std::vector<AreaSweepPoint>& points);
void write_confusion_csv(std::ostream& out, const ConfusionReport& report);
void write_wild_csv(std::ostream& out, const std::vector<WildCell>& cells);

}  // namespace siterec
