#include "siterec/purify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

namespace siterec {

namespace {

std::vector<const FeatureDistribution*> as_ptrs(
    const std::vector<FeatureDistribution>& features) {
  std::vector<const FeatureDistribution*> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(&f);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

double shannon_entropy(const FeatureDistribution& p) {
  double h = 0.0;
  for (double x : p.probs) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h < 0.0 ? 0.0 : h;
}

FeatureDistribution centroid(
    const std::vector<const FeatureDistribution*>& features) {
  if (features.empty()) throw EmptyClass("centroid of empty class");
  const std::size_t d = features.front()->dim();
  FeatureDistribution m;
  m.probs.assign(d, 0.0);
  for (const auto* f : features) {
    if (f->dim() != d) throw DimensionMismatch("centroid: mixed dimensions");
    for (std::size_t i = 0; i < d; ++i) m.probs[i] += f->probs[i];
  }
  const double inv = 1.0 / static_cast<double>(features.size());
  for (double& x : m.probs) x *= inv;
  return m;
}

FeatureDistribution centroid(const std::vector<FeatureDistribution>& features) {
  return centroid(as_ptrs(features));
}

double class_jsd(const std::vector<const FeatureDistribution*>& features) {
  if (features.empty()) throw EmptyClass("class_jsd of empty class");
  const FeatureDistribution mix = centroid(features);
  double mean_h = 0.0;
  for (const auto* f : features) mean_h += shannon_entropy(*f);
  mean_h /= static_cast<double>(features.size());
  const double jsd = shannon_entropy(mix) - mean_h;
  return jsd < 0.0 ? 0.0 : jsd;
}

double class_jsd(const std::vector<FeatureDistribution>& features) {
  return class_jsd(as_ptrs(features));
}

double forward_kl(const FeatureDistribution& p, const FeatureDistribution& m) {
  if (p.dim() != m.dim()) throw DimensionMismatch("forward_kl dimensions");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double pi = p.probs[i];
    if (pi <= 0.0) continue;
    const double mi = m.probs[i];
    if (mi <= 0.0) {
      throw UnsupportedAtom("p has mass at atom " + std::to_string(i) +
                            " where m is zero");
    }
    kl += pi * std::log(pi / mi);
  }
  return kl < 0.0 ? 0.0 : kl;
}

PurifiedDataset purify_dataset(const FeatureDataset& dataset,
                               const PurifyConfig& config) {
  if (config.jsd_threshold <= 0.0 || config.kld_threshold <= 0.0) {
    throw InvalidConfig("purify thresholds must be positive");
  }
  PurifiedDataset out;
  out.dataset.dimension = dataset.dimension;

  const auto groups = dataset.by_site();
  std::unordered_set<std::string> kept_sites;
  std::vector<DenoiseReport> denoise;
  denoise.reserve(dataset.images.size());

  for (const auto& [site_id, idxs] : groups) {
    std::vector<const FeatureDistribution*> feats;
    feats.reserve(idxs.size());
    for (std::size_t i : idxs) feats.push_back(&dataset.images[i].feature);

    CohesionReport cr;
    cr.site_id = site_id;
    cr.n_images = idxs.size();
    cr.jsd = class_jsd(feats);
    cr.kept = cr.jsd <= config.jsd_threshold;

    std::size_t survivors = 0;
    if (cr.kept) {
      const FeatureDistribution mix = centroid(feats);
      for (std::size_t i : idxs) {
        DenoiseReport dr;
        dr.image_id = dataset.images[i].image_id;
        dr.site_id = site_id;
        dr.kl = forward_kl(dataset.images[i].feature, mix);
        dr.kept = dr.kl <= config.kld_threshold;
        if (dr.kept) ++survivors;
        denoise.push_back(std::move(dr));
      }
      if (survivors < config.min_images_after) {
        // Class gutted by stage 2: drop it entirely.
        cr.kept = false;
        for (auto it = denoise.end() - static_cast<long>(idxs.size());
             it != denoise.end(); ++it) {
          it->kept = false;
        }
      }
    } else {
      for (std::size_t i : idxs) {
        DenoiseReport dr;
        dr.image_id = dataset.images[i].image_id;
        dr.site_id = site_id;
        dr.kl = 0.0;
        dr.kept = false;  // removed with the class in stage 1
        denoise.push_back(std::move(dr));
      }
    }
    if (cr.kept) kept_sites.insert(site_id);
    out.cohesion.push_back(std::move(cr));
  }

  std::unordered_set<std::string> kept_images;
  for (const auto& dr : denoise) {
    if (dr.kept && kept_sites.count(dr.site_id)) kept_images.insert(dr.image_id);
  }
  for (const auto& img : dataset.images) {
    if (kept_images.count(img.image_id)) out.dataset.images.push_back(img);
  }
  out.denoise = std::move(denoise);

  const std::size_t n_classes = groups.size();
  const std::size_t n_images = dataset.images.size();
  out.stats.classes_removed_fraction =
      n_classes == 0 ? 0.0
                     : static_cast<double>(n_classes - kept_sites.size()) /
                           static_cast<double>(n_classes);
  out.stats.images_removed_fraction =
      n_images == 0 ? 0.0
                    : static_cast<double>(n_images - kept_images.size()) /
                          static_cast<double>(n_images);
  return out;
}

void write_cohesion_csv(std::ostream& out,
                        const std::vector<CohesionReport>& reports) {
  out << "site_id,n_images,jsd,kept\n";
  for (const auto& r : reports) {
    out << r.site_id << ',' << r.n_images << ',' << fmt(r.jsd) << ','
        << (r.kept ? "true" : "false") << '\n';
  }
}

void write_denoise_csv(std::ostream& out,
                       const std::vector<DenoiseReport>& reports) {
  out << "image_id,site_id,kl,kept\n";
  for (const auto& r : reports) {
    out << r.image_id << ',' << r.site_id << ',' << fmt(r.kl) << ','
        << (r.kept ? "true" : "false") << '\n';
  }
}

}  // namespace siterec
