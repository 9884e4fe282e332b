#pragma once

#include <optional>
#include <string>
#include <vector>

#include "siterec/errors.hpp"

namespace siterec {

// Spherical earth model; sub-meter ellipsoid corrections do not matter at
// the 200 m scales this system operates on.
inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

bool valid_point(const GeoPoint& p);

struct LatLonBounds {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  // Closed on all edges: a point exactly on the boundary is inside.
  bool contains(const GeoPoint& p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min &&
           p.lon <= lon_max;
  }
};

// Square geographic tile. bbox is derived from center and half_extent_m
// under the local equirectangular approximation at the center latitude.
struct Region {
  std::string region_id;
  GeoPoint center;
  double half_extent_m = 0.0;
  LatLonBounds bbox;
};

Region make_region(std::string region_id, GeoPoint center,
                   double half_extent_m);

struct Tiling {
  std::vector<Region> regions;
  double overlap_m = 0.0;
};

// Great-circle distance in meters.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Initial great-circle bearing in degrees [0, 360), 0 = north, clockwise.
// Throws UndefinedBearing when from == to.
double initial_bearing(const GeoPoint& from, const GeoPoint& to);

// Minimal absolute circular difference of two bearings, in [0, 180].
double angular_difference(double b1_deg, double b2_deg);

// Grid of overlapping square regions covering bbox. Stride between region
// centers is region_size_m - overlap_m. Throws InvalidTilingParams unless
// region_size_m > overlap_m >= 0.
Tiling tile_area(const LatLonBounds& bbox, double region_size_m,
                 double overlap_m);

// Resolves the region owning point p. With a current region id whose bbox
// still contains p, the current region is kept (hysteresis). Otherwise the
// region with the nearest center wins, ties broken by lexicographic id.
// Throws OutOfCoverage when no region contains p.
const Region& region_for_point(const Tiling& tiling, const GeoPoint& p,
                               const std::optional<std::string>& current = {});

std::string tiling_to_json(const Tiling& tiling);
Tiling tiling_from_json(const std::string& text);

}  // namespace siterec
