#include "siterec/context.hpp"

#include <algorithm>
#include <unordered_set>

#include <json.hpp>

namespace siterec {

std::vector<std::string> candidate_sites(const SiteCatalog& sites,
                                         const MobileContext& ctx,
                                         const ContextConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& s : sites.records) {
    if (cfg.enable_location &&
        haversine_distance(ctx.location, s.location) > cfg.radius_m) {
      continue;
    }
    if (cfg.enable_orientation) {
      const bool coincident = s.location.lat == ctx.location.lat &&
                              s.location.lon == ctx.location.lon;
      if (!coincident) {
        const double bearing = initial_bearing(ctx.location, s.location);
        if (angular_difference(ctx.bearing_deg, bearing) >
            cfg.half_angle_deg) {
          continue;
        }
      }
    }
    out.push_back(s.site_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ContextualPrediction masked_predict(
    const Prediction& raw, const std::vector<std::string>& candidates) {
  std::unordered_set<std::string> cand(candidates.begin(), candidates.end());
  ContextualPrediction cp;
  cp.candidates = candidates;
  std::sort(cp.candidates.begin(), cp.candidates.end());

  cp.masked.site_ids = raw.site_ids;
  cp.masked.probs.assign(raw.probs.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < raw.probs.size(); ++i) {
    if (cand.count(raw.site_ids[i])) {
      cp.masked.probs[i] = raw.probs[i];
      mass += raw.probs[i];
    }
  }
  if (candidates.empty() || mass <= 0.0) {
    throw NoCandidateInContext("no candidate site carries probability mass");
  }
  for (double& p : cp.masked.probs) p /= mass;
  cp.masked.top1_index = argmax_site(cp.masked.probs, cp.masked.site_ids);
  return cp;
}

ContextualPrediction contextual_classify(const RegionModel& model,
                                         const FeatureDistribution& feature,
                                         const MobileContext& ctx,
                                         const SiteCatalog& sites,
                                         const ContextConfig& cfg) {
  const bool use_attention =
      cfg.enable_attention && ctx.attention_feature.has_value();
  const Prediction raw =
      predict(model, use_attention ? *ctx.attention_feature : feature);

  // Disabled filters admit every site the model knows about.
  ContextConfig geo_cfg = cfg;
  std::vector<std::string> candidates;
  if (cfg.enable_location || cfg.enable_orientation) {
    candidates = candidate_sites(sites, ctx, geo_cfg);
    // Restrict to the model's classes; sites outside the model are inert.
    std::unordered_set<std::string> known(model.site_ids.begin(),
                                          model.site_ids.end());
    std::erase_if(candidates,
                  [&](const std::string& id) { return !known.count(id); });
  } else {
    candidates = model.site_ids;
  }

  ContextualPrediction cp = masked_predict(raw, candidates);
  cp.location_applied = cfg.enable_location;
  cp.orientation_applied = cfg.enable_orientation;
  cp.attention_applied = use_attention;
  return cp;
}

std::string contextual_prediction_to_json(const ContextualPrediction& cp) {
  nlohmann::json j;
  j["distribution"] = nlohmann::json::object();
  for (std::size_t i = 0; i < cp.masked.probs.size(); ++i) {
    j["distribution"][cp.masked.site_ids[i]] = cp.masked.probs[i];
  }
  j["top1"] = cp.masked.top1();
  j["candidates"] = cp.candidates;
  j["applied_filters"] = {{"location", cp.location_applied},
                          {"orientation", cp.orientation_applied},
                          {"attention", cp.attention_applied}};
  return j.dump(2) + "\n";
}

}  // namespace siterec
