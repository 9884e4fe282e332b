#include "siterec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "siterec/geo.hpp"

namespace siterec {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

CvResult summarize(std::vector<double> scores) {
  CvResult r;
  r.per_iteration = std::move(scores);
  const double n = static_cast<double>(r.per_iteration.size());
  for (double s : r.per_iteration) r.mean += s;
  r.mean /= n;
  double var = 0.0;
  for (double s : r.per_iteration) var += (s - r.mean) * (s - r.mean);
  r.stddev = std::sqrt(var / n);
  return r;
}

struct Split {
  FeatureDataset train;
  FeatureDataset test;
};

Split stratified_split(const FeatureDataset& dataset, double train_fraction,
                       std::mt19937_64& rng) {
  Split split;
  split.train.dimension = dataset.dimension;
  split.test.dimension = dataset.dimension;
  for (const auto& [site_id, idxs] : dataset.by_site()) {
    if (idxs.size() < 2) {
      throw ClassTooSmall("site '" + site_id + "' has " +
                          std::to_string(idxs.size()) + " image(s)");
    }
    std::vector<std::size_t> order = idxs;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(order.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto& dst = i < n_train ? split.train : split.test;
      dst.images.push_back(dataset.images[order[i]]);
    }
  }
  return split;
}

}  // namespace

CvResult monte_carlo_cv(const FeatureDataset& dataset,
                        const ProtocolConfig& cfg, bool purify_train) {
  if (cfg.cv_iterations < 1 || cfg.train_fraction <= 0.0 ||
      cfg.train_fraction >= 1.0) {
    throw InvalidConfig("monte_carlo_cv: bad iterations or split fraction");
  }
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(cfg.cv_iterations));
  for (int it = 0; it < cfg.cv_iterations; ++it) {
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(it) * 0x9e3779b9);
    Split split = stratified_split(dataset, cfg.train_fraction, rng);
    FeatureDataset* train = &split.train;
    PurifiedDataset purified;
    if (purify_train) {
      purified = purify_dataset(split.train, cfg.purify);
      train = &purified.dataset;
    }
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed + static_cast<std::uint64_t>(it) * 0x51ed2701;
    const RegionModel model = train_region_model(*train, tc, "cv");
    scores.push_back(evaluate_top1(model, split.test));
  }
  return summarize(std::move(scores));
}

std::vector<ImageSweepPoint> sweep_images_per_class(
    const FeatureDataset& dataset, const std::vector<std::size_t>& m_values,
    const ProtocolConfig& cfg, bool purify_train) {
  std::vector<ImageSweepPoint> out;
  for (std::size_t m : m_values) {
    if (m == 0) throw InvalidConfig("images-per-class m must be >= 1");
    FeatureDataset sub;
    sub.dimension = dataset.dimension;
    std::mt19937_64 rng(cfg.seed ^ (0xabcd0000 + m));
    for (const auto& [site_id, idxs] : dataset.by_site()) {
      std::vector<std::size_t> order = idxs;
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t take = std::min(m, order.size());
      for (std::size_t i = 0; i < take; ++i) {
        sub.images.push_back(dataset.images[order[i]]);
      }
    }
    ImageSweepPoint point;
    point.m = m;
    point.result = monte_carlo_cv(sub, cfg, purify_train);
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<AreaSweepPoint> sweep_area_size(
    const SiteCatalog& catalog, const FeatureDataset& dataset,
    const std::vector<double>& sizes_m, double overlap_m,
    const ProtocolConfig& cfg, bool purify_train) {
  if (catalog.records.empty()) throw InvalidConfig("empty catalog");
  const LatLonBounds bounds = catalog.bounds();

  std::vector<AreaSweepPoint> out;
  for (double size : sizes_m) {
    const double overlap = std::min(overlap_m, size / 2.0);
    const Tiling tiling = tile_area(bounds, size, overlap);

    AreaSweepPoint point;
    point.size_m = size;
    double acc_sum = 0.0;
    double site_sum = 0.0;
    for (const Region& region : tiling.regions) {
      const SiteCatalog region_sites = sites_in_region(catalog, region);
      std::unordered_set<std::string> ids;
      for (const auto& r : region_sites.records) ids.insert(r.site_id);
      FeatureDataset region_data;
      region_data.dimension = dataset.dimension;
      for (const auto& img : dataset.images) {
        if (ids.count(img.site_id)) region_data.images.push_back(img);
      }
      // A region needs at least two trainable classes.
      std::size_t usable = 0;
      for (const auto& [sid, idxs] : region_data.by_site()) {
        if (idxs.size() >= 2) ++usable;
      }
      if (usable < 2) {
        ++point.regions_skipped;
        continue;
      }
      acc_sum += monte_carlo_cv(region_data, cfg, purify_train).mean;
      site_sum += static_cast<double>(ids.size());
      ++point.regions_used;
    }
    if (point.regions_used > 0) {
      point.mean_accuracy = acc_sum / static_cast<double>(point.regions_used);
      point.mean_sites_per_region =
          site_sum / static_cast<double>(point.regions_used);
    }
    out.push_back(point);
  }
  return out;
}

ConfusionReport confusion_by_category(const RegionModel& model,
                                      const FeatureDataset& test,
                                      const SiteCatalog& catalog) {
  if (test.images.empty()) throw EmptyTestSet("empty test set");
  std::unordered_map<std::string, std::string> cat_of;
  for (const auto& r : catalog.records) cat_of[r.site_id] = r.category;

  std::set<std::string> cats;
  for (const auto& [sid, cat] : cat_of) cats.insert(cat);
  ConfusionReport rep;
  rep.categories.assign(cats.begin(), cats.end());
  std::unordered_map<std::string, std::size_t> cat_index;
  for (std::size_t i = 0; i < rep.categories.size(); ++i) {
    cat_index[rep.categories[i]] = i;
  }
  const std::size_t n = rep.categories.size();
  std::vector<std::vector<std::size_t>> counts(n,
                                               std::vector<std::size_t>(n, 0));
  std::vector<std::size_t> same_cat(n, 0), same_cat_correct(n, 0);
  rep.row_counts.assign(n, 0);

  for (const auto& img : test.images) {
    auto true_it = cat_of.find(img.site_id);
    if (true_it == cat_of.end()) {
      throw UnknownSiteId("test image '" + img.image_id + "' site '" +
                          img.site_id + "'");
    }
    const Prediction p = predict(model, img.feature);
    auto pred_it = cat_of.find(p.top1());
    if (pred_it == cat_of.end()) {
      throw UnknownSiteId("predicted site '" + p.top1() + "' not in catalog");
    }
    const std::size_t row = cat_index.at(true_it->second);
    const std::size_t col = cat_index.at(pred_it->second);
    ++counts[row][col];
    ++rep.row_counts[row];
    if (row == col) {
      ++same_cat[row];
      if (p.top1() == img.site_id) ++same_cat_correct[row];
    }
  }

  rep.rows.assign(n, std::vector<double>(n, 0.0));
  rep.same_category_correct.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (rep.row_counts[r] > 0) {
      for (std::size_t c = 0; c < n; ++c) {
        rep.rows[r][c] = static_cast<double>(counts[r][c]) /
                         static_cast<double>(rep.row_counts[r]);
      }
    }
    if (same_cat[r] > 0) {
      rep.same_category_correct[r] =
          static_cast<double>(same_cat_correct[r]) /
          static_cast<double>(same_cat[r]);
    }
  }
  return rep;
}

std::vector<WildCell> simulate_wild(const SiteCatalog& catalog,
                                    const RegionModel& model,
                                    const GroundTruth& truth,
                                    double feature_alpha,
                                    const WildConfig& cfg) {
  if (cfg.n_queries == 0 || cfg.gps_sigma_m < 0.0 ||
      cfg.compass_sigma_deg < 0.0 || cfg.query_noise < 0.0 ||
      cfg.query_noise > 1.0 || cfg.attention_noise < 0.0 ||
      cfg.attention_noise > 1.0) {
    throw InvalidConfig("bad wild-simulation config");
  }

  struct Query {
    std::string true_site;
    FeatureDistribution feature;
    MobileContext ctx;  // attention_feature always populated
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> usite(0,
                                                   model.num_sites() - 1);
  std::uniform_real_distribution<double> ubearing(0.0, 360.0);
  std::uniform_real_distribution<double> udist(0.5, 1.5);
  std::normal_distribution<double> gps_noise(0.0, cfg.gps_sigma_m);
  std::normal_distribution<double> compass_noise(0.0, cfg.compass_sigma_deg);

  const double m_per_deg_lat = kEarthRadiusM * kPi / 180.0;

  std::vector<Query> queries;
  queries.reserve(cfg.n_queries);
  for (std::size_t q = 0; q < cfg.n_queries; ++q) {
    const std::string& site_id = model.site_ids[usite(rng)];
    const SiteRecord* site = catalog.find(site_id);
    if (!site) throw UnknownSiteId("model site '" + site_id + "'");
    auto proto_it = truth.prototypes.find(site_id);
    if (proto_it == truth.prototypes.end()) {
      throw UnknownSiteId("no prototype for site '" + site_id + "'");
    }
    const double m_per_deg_lon =
        m_per_deg_lat * std::cos(site->location.lat * kPi / 180.0);

    // The user stands a viewing distance away, aiming at the site.
    const double walk_bearing = ubearing(rng) * kPi / 180.0;
    const double walk_m = cfg.view_distance_m * udist(rng);
    GeoPoint user_true{
        site->location.lat + walk_m * std::cos(walk_bearing) / m_per_deg_lat,
        site->location.lon + walk_m * std::sin(walk_bearing) / m_per_deg_lon};

    Query query;
    query.true_site = site_id;
    query.ctx.location =
        GeoPoint{user_true.lat + gps_noise(rng) / m_per_deg_lat,
                 user_true.lon + gps_noise(rng) / m_per_deg_lon};
    const double aim = initial_bearing(user_true, site->location);
    query.ctx.bearing_deg =
        std::fmod(aim + compass_noise(rng) + 360.0, 360.0);
    query.feature =
        noisy_draw(proto_it->second, cfg.query_noise, feature_alpha, rng);
    query.ctx.attention_feature =
        noisy_draw(proto_it->second, cfg.attention_noise, feature_alpha, rng);
    queries.push_back(std::move(query));
  }

  std::vector<WildCell> cells;
  for (int mask = 0; mask < 8; ++mask) {
    WildCell cell;
    cell.location = mask & 1;
    cell.orientation = mask & 2;
    cell.attention = mask & 4;
    ContextConfig cc = cfg.context;
    cc.enable_location = cell.location;
    cc.enable_orientation = cell.orientation;
    cc.enable_attention = cell.attention;
    for (const Query& query : queries) {
      try {
        const ContextualPrediction cp = contextual_classify(
            model, query.feature, query.ctx, catalog, cc);
        if (cp.masked.top1() == query.true_site) ++cell.correct;
      } catch (const NoCandidateInContext&) {
        ++cell.no_candidate;
      }
    }
    cell.na = cell.no_candidate == cfg.n_queries;
    cell.accuracy = cell.na ? 0.0
                            : static_cast<double>(cell.correct) /
                                  static_cast<double>(cfg.n_queries);
    cells.push_back(cell);
  }
  return cells;
}

void write_cv_csv(std::ostream& out, const std::string& label_a,
                  const CvResult& a, const std::string& label_b,
                  const CvResult& b) {
  out << "condition,mean_accuracy,stddev,iterations\n";
  out << label_a << ',' << fmt(a.mean) << ',' << fmt(a.stddev) << ','
      << a.per_iteration.size() << '\n';
  out << label_b << ',' << fmt(b.mean) << ',' << fmt(b.stddev) << ','
      << b.per_iteration.size() << '\n';
}

void write_image_sweep_csv(std::ostream& out,
                           const std::vector<ImageSweepPoint>& points) {
  out << "images_per_class,mean_accuracy,stddev\n";
  for (const auto& p : points) {
    out << p.m << ',' << fmt(p.result.mean) << ',' << fmt(p.result.stddev)
        << '\n';
  }
}

void write_area_sweep_csv(std::ostream& out,
                          const std::vector<AreaSweepPoint>& points) {
  out << "region_size_m,mean_accuracy,regions_used,regions_skipped,"
         "mean_sites_per_region\n";
  for (const auto& p : points) {
    out << fmt(p.size_m) << ',' << fmt(p.mean_accuracy) << ','
        << p.regions_used << ',' << p.regions_skipped << ','
        << fmt(p.mean_sites_per_region) << '\n';
  }
}

void write_confusion_csv(std::ostream& out, const ConfusionReport& report) {
  out << "category";
  for (const auto& c : report.categories) out << ',' << c;
  out << ",same_category_correct,n\n";
  for (std::size_t r = 0; r < report.categories.size(); ++r) {
    out << report.categories[r];
    for (double v : report.rows[r]) out << ',' << fmt(v);
    out << ',' << fmt(report.same_category_correct[r]) << ','
        << report.row_counts[r] << '\n';
  }
}

void write_wild_csv(std::ostream& out, const std::vector<WildCell>& cells) {
  out << "location,orientation,attention,accuracy,correct,no_candidate,na\n";
  for (const auto& c : cells) {
    out << (c.location ? 1 : 0) << ',' << (c.orientation ? 1 : 0) << ','
        << (c.attention ? 1 : 0) << ','
        << (c.na ? "n/a" : fmt(c.accuracy)) << ',' << c.correct << ','
        << c.no_candidate << ',' << (c.na ? "true" : "false") << '\n';
  }
}

}  // namespace siterec
