#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "siterec/errors.hpp"
#include "siterec/geo.hpp"

namespace siterec {

struct SiteRecord {
  std::string site_id;
  std::string title;
  GeoPoint location;
  std::string category;  // building, statue, church, museum, ...
  std::uint64_t pageviews = 0;
};

struct SiteCatalog {
  std::vector<SiteRecord> records;

  const SiteRecord* find(const std::string& site_id) const;
  bool contains(const std::string& site_id) const {
    return find(site_id) != nullptr;
  }
  std::size_t size() const { return records.size(); }
  // Smallest bounds containing every site. Throws on an empty catalog.
  LatLonBounds bounds() const;
};

// Categorical probability vector; entries non-negative, sum within 1e-6
// of 1. validate() enforces the invariant, parsers call it on every vector.
struct FeatureDistribution {
  std::vector<double> probs;

  std::size_t dim() const { return probs.size(); }
  void validate() const;
};

inline constexpr double kNormalizationTolerance = 1e-6;

enum class ImageSource { flickr, google, synthetic, user };

std::string to_string(ImageSource s);
ImageSource image_source_from_string(const std::string& s);

struct ImageFeatureRecord {
  std::string image_id;
  std::string site_id;
  ImageSource source = ImageSource::synthetic;
  FeatureDistribution feature;
};

struct FeatureDataset {
  std::vector<ImageFeatureRecord> images;
  std::size_t dimension = 0;

  // image indexes grouped by site, site order = first appearance.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> by_site()
      const;
};

enum class CatalogFormat { csv, jsonl };
enum class FeatureFormat { jsonl, packed_binary };

struct ParseOptions {
  // Cross-validate feature site_ids against this catalog when set.
  const SiteCatalog* catalog = nullptr;
  // Cap images retained per site (first-seen order); 0 = unlimited.
  std::size_t max_images_per_site = 0;
};

SiteCatalog parse_catalog(std::istream& in, CatalogFormat format);
void write_catalog(std::ostream& out, const SiteCatalog& catalog,
                   CatalogFormat format);

FeatureDataset parse_features(std::istream& in, FeatureFormat format,
                              const ParseOptions& opts = {});
void write_features(std::ostream& out, const FeatureDataset& dataset,
                    FeatureFormat format);

// Records whose location falls inside the region bbox, edges inclusive.
SiteCatalog sites_in_region(const SiteCatalog& catalog, const Region& region);

}  // namespace siterec
