#pragma once

#include <optional>
#include <string>
#include <vector>

#include "siterec/catalog.hpp"
#include "siterec/classifier.hpp"
#include "siterec/geo.hpp"

namespace siterec {

struct MobileContext {
  GeoPoint location;
  double bearing_deg = 0.0;  // [0, 360)
  std::optional<FeatureDistribution> attention_feature;
};

struct ContextConfig {
  double radius_m = 200.0;
  double half_angle_deg = 60.0;  // +/- around the user's bearing
  bool enable_location = true;
  bool enable_orientation = true;
  bool enable_attention = true;
};

struct ContextualPrediction {
  Prediction masked;
  std::vector<std::string> candidates;  // sorted site ids
  bool location_applied = false;
  bool orientation_applied = false;
  bool attention_applied = false;
};

// Sites passing the enabled geo filters: distance <= radius_m and bearing
// within half_angle_deg of the user's heading. A site coincident with the
// user passes the orientation filter unconditionally. Sorted by site_id.
std::vector<std::string> candidate_sites(const SiteCatalog& sites,
                                         const MobileContext& ctx,
                                         const ContextConfig& cfg);

// Zeroes non-candidate probabilities and renormalizes; recomputes top1.
// Throws NoCandidateInContext when no candidate carries probability mass.
ContextualPrediction masked_predict(const Prediction& raw,
                                    const std::vector<std::string>& candidates);

// Full contextual pipeline: raw (or attention-substituted) predict, then
// candidate masking.
ContextualPrediction contextual_classify(const RegionModel& model,
                                         const FeatureDistribution& feature,
                                         const MobileContext& ctx,
                                         const SiteCatalog& sites,
                                         const ContextConfig& cfg);

std::string contextual_prediction_to_json(const ContextualPrediction& cp);

}  // namespace siterec
