#include "siterec/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace siterec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double d) { return d * kPi / 180.0; }
double rad2deg(double r) { return r * 180.0 / kPi; }

double meters_per_deg_lat() { return kEarthRadiusM * kPi / 180.0; }

double meters_per_deg_lon(double lat_deg) {
  return kEarthRadiusM * std::cos(deg2rad(lat_deg)) * kPi / 180.0;
}

}  // namespace

bool valid_point(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

Region make_region(std::string region_id, GeoPoint center,
                   double half_extent_m) {
  if (half_extent_m <= 0.0) {
    throw InvalidTilingParams("half_extent_m must be positive");
  }
  Region r;
  r.region_id = std::move(region_id);
  r.center = center;
  r.half_extent_m = half_extent_m;
  const double dlat = half_extent_m / meters_per_deg_lat();
  const double dlon = half_extent_m / meters_per_deg_lon(center.lat);
  r.bbox = LatLonBounds{center.lat - dlat, center.lat + dlat,
                        center.lon - dlon, center.lon + dlon};
  return r;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = deg2rad(b.lat - a.lat);
  const double dlam = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlam / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM *
         std::atan2(std::sqrt(h), std::sqrt(std::max(0.0, 1.0 - h)));
}

double initial_bearing(const GeoPoint& from, const GeoPoint& to) {
  if (from.lat == to.lat && from.lon == to.lon) {
    throw UndefinedBearing("bearing undefined for coincident points");
  }
  const double phi1 = deg2rad(from.lat);
  const double phi2 = deg2rad(to.lat);
  const double dlam = deg2rad(to.lon - from.lon);
  const double y = std::sin(dlam) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
  double deg = rad2deg(std::atan2(y, x));
  deg = std::fmod(deg + 360.0, 360.0);
  return deg;
}

double angular_difference(double b1_deg, double b2_deg) {
  double d = std::fmod(std::fabs(b1_deg - b2_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

Tiling tile_area(const LatLonBounds& bbox, double region_size_m,
                 double overlap_m) {
  if (overlap_m < 0.0 || region_size_m <= overlap_m) {
    throw InvalidTilingParams("require region_size_m > overlap_m >= 0");
  }
  const double mean_lat = (bbox.lat_min + bbox.lat_max) / 2.0;
  const double width_m =
      (bbox.lon_max - bbox.lon_min) * meters_per_deg_lon(mean_lat);
  const double height_m = (bbox.lat_max - bbox.lat_min) * meters_per_deg_lat();
  const double stride = region_size_m - overlap_m;

  auto count_along = [&](double extent_m) -> long {
    if (extent_m <= region_size_m) return 1;
    return static_cast<long>(
               std::ceil((extent_m - region_size_m) / stride - 1e-9)) +
           1;
  };
  const long cols = count_along(width_m);
  const long rows = count_along(height_m);

  Tiling t;
  t.overlap_m = overlap_m;
  t.regions.reserve(static_cast<std::size_t>(rows * cols));
  const double half = region_size_m / 2.0;
  const double mdlat = meters_per_deg_lat();
  const double mdlon = meters_per_deg_lon(mean_lat);
  for (long row = 0; row < rows; ++row) {
    const double y0 = row * stride;
    for (long col = 0; col < cols; ++col) {
      const double x0 = col * stride;
      char id[48];
      std::snprintf(id, sizeof(id), "r%03ld_%03ld", row, col);
      Region r;
      r.region_id = id;
      r.half_extent_m = half;
      // bbox built from the grid coordinates directly so that adjacent
      // regions and the tiled bbox share exact edge values
      r.bbox = LatLonBounds{bbox.lat_min + y0 / mdlat,
                            bbox.lat_min + (y0 + region_size_m) / mdlat,
                            bbox.lon_min + x0 / mdlon,
                            bbox.lon_min + (x0 + region_size_m) / mdlon};
      r.center = GeoPoint{bbox.lat_min + (y0 + half) / mdlat,
                          bbox.lon_min + (x0 + half) / mdlon};
      t.regions.push_back(std::move(r));
    }
  }
  return t;
}

const Region& region_for_point(const Tiling& tiling, const GeoPoint& p,
                               const std::optional<std::string>& current) {
  if (current) {
    for (const Region& r : tiling.regions) {
      if (r.region_id == *current && r.bbox.contains(p)) return r;
    }
  }
  const Region* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Region& r : tiling.regions) {
    if (!r.bbox.contains(p)) continue;
    // Equirectangular squared distance; monotone in true distance at tile
    // scale and cheap enough to scan every region.
    const double dy = (p.lat - r.center.lat) * meters_per_deg_lat();
    const double dx =
        (p.lon - r.center.lon) * meters_per_deg_lon(r.center.lat);
    const double d = dx * dx + dy * dy;
    if (d < best_d || (d == best_d && best && r.region_id < best->region_id)) {
      best_d = d;
      best = &r;
    }
  }
  if (!best) throw OutOfCoverage("point outside tiled area");
  return *best;
}

std::string tiling_to_json(const Tiling& tiling) {
  nlohmann::json j;
  j["overlap_m"] = tiling.overlap_m;
  j["regions"] = nlohmann::json::array();
  for (const Region& r : tiling.regions) {
    j["regions"].push_back({{"region_id", r.region_id},
                            {"center_lat", r.center.lat},
                            {"center_lon", r.center.lon},
                            {"half_extent_m", r.half_extent_m}});
  }
  return j.dump(2) + "\n";
}

Tiling tiling_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Tiling t;
  t.overlap_m = j.at("overlap_m").get<double>();
  for (const auto& rj : j.at("regions")) {
    t.regions.push_back(make_region(
        rj.at("region_id").get<std::string>(),
        GeoPoint{rj.at("center_lat").get<double>(),
                 rj.at("center_lon").get<double>()},
        rj.at("half_extent_m").get<double>()));
  }
  return t;
}

}  // namespace siterec
