#include <doctest.h>

#include <cmath>
#include <random>

#include "siterec/geo.hpp"

using namespace siterec;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent oracle: Vincenty formula specialized to a sphere, a different
// algebraic route than the haversine implementation under test.
double oracle_distance(const GeoPoint& a, const GeoPoint& b) {
  const double p1 = a.lat * kPi / 180.0, p2 = b.lat * kPi / 180.0;
  const double dl = (b.lon - a.lon) * kPi / 180.0;
  const double num = std::sqrt(
      std::pow(std::cos(p2) * std::sin(dl), 2) +
      std::pow(std::cos(p1) * std::sin(p2) -
                   std::sin(p1) * std::cos(p2) * std::cos(dl),
               2));
  const double den = std::sin(p1) * std::sin(p2) +
                     std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kEarthRadiusM * std::atan2(num, den);
}

// Independent bearing oracle via a direct spherical-triangle solution.
double oracle_bearing(const GeoPoint& from, const GeoPoint& to) {
  const double p1 = from.lat * kPi / 180.0, p2 = to.lat * kPi / 180.0;
  const double dl = (to.lon - from.lon) * kPi / 180.0;
  const double theta =
      std::atan2(std::sin(dl) * std::cos(p2),
                 std::cos(p1) * std::sin(p2) -
                     std::sin(p1) * std::cos(p2) * std::cos(dl));
  double deg = theta * 180.0 / kPi;
  while (deg < 0.0) deg += 360.0;
  return std::fmod(deg, 360.0);
}

}  // namespace

TEST_CASE("haversine analytic cases") {
  CHECK(haversine_distance({40.0, -73.0}, {40.0, -73.0}) == 0.0);
  // antipodal along the equator: pi * R
  CHECK(haversine_distance({0.0, 0.0}, {0.0, 180.0}) ==
        doctest::Approx(kPi * kEarthRadiusM).epsilon(1e-12));
}

TEST_CASE("haversine matches independent geodesic oracle") {
  const GeoPoint a{40.7359, -73.9911}, b{40.7484, -73.9857};
  const double d = haversine_distance(a, b);
  const double expect = oracle_distance(a, b);
  CHECK(std::fabs(d - expect) / expect < 0.005);
  // frozen from the oracle: ~1462 m between these two Manhattan corners
  CHECK(d == doctest::Approx(1462.494).epsilon(0.005));
}

TEST_CASE("haversine symmetry and triangle inequality on random triples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ulat(-80.0, 80.0), ulon(-180.0,
                                                                 180.0);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint p{ulat(rng), ulon(rng)}, q{ulat(rng), ulon(rng)},
        r{ulat(rng), ulon(rng)};
    const double pq = haversine_distance(p, q);
    CHECK(pq == doctest::Approx(haversine_distance(q, p)).epsilon(1e-12));
    CHECK(pq >= 0.0);
    CHECK(pq <= haversine_distance(p, r) + haversine_distance(r, q) +
                    1e-6 * pq + 1e-9);
  }
}

TEST_CASE("initial bearing axis cases and oracle agreement") {
  CHECK(initial_bearing({0, 0}, {1, 0}) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(initial_bearing({0, 0}, {0, 1}) ==
        doctest::Approx(90.0).epsilon(1e-9));
  CHECK_THROWS_AS(initial_bearing({1, 2}, {1, 2}), UndefinedBearing);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ulat(-80.0, 80.0), ulon(-180.0,
                                                                 180.0);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint a{ulat(rng), ulon(rng)}, b{ulat(rng), ulon(rng)};
    if (a.lat == b.lat && a.lon == b.lon) continue;
    CHECK(angular_difference(initial_bearing(a, b), oracle_bearing(a, b)) <
          0.1);
  }
}

TEST_CASE("angular difference") {
  CHECK(angular_difference(0, 0) == 0.0);
  CHECK(angular_difference(350, 10) == doctest::Approx(20.0));
  CHECK(angular_difference(90, 270) == doctest::Approx(180.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-720.0, 720.0);
  for (int i = 0; i < 500; ++i) {
    const double b1 = u(rng), b2 = u(rng);
    const double d = angular_difference(b1, b2);
    CHECK(d >= 0.0);
    CHECK(d <= 180.0);
    CHECK(d == doctest::Approx(angular_difference(b2, b1)).epsilon(1e-12));
  }
}

TEST_CASE("tile_area degenerate and param validation") {
  const Region unit = make_region("u", {40.75, -73.98}, 500.0);
  // bbox exactly one region wide
  const Tiling one = tile_area(unit.bbox, 1000.0, 200.0);
  CHECK(one.regions.size() == 1);
  // single point bbox
  const Tiling pt = tile_area({40.75, 40.75, -73.98, -73.98}, 1000.0, 200.0);
  REQUIRE(pt.regions.size() == 1);
  CHECK(pt.regions[0].bbox.contains({40.75, -73.98}));
  CHECK_THROWS_AS(tile_area(unit.bbox, 100.0, 100.0), InvalidTilingParams);
  CHECK_THROWS_AS(tile_area(unit.bbox, 100.0, -1.0), InvalidTilingParams);
}

TEST_CASE("tile_area covers a 2000x1000 box; brute-force lattice oracle") {
  // 2000 m x 1000 m around lower Manhattan
  const double lat0 = 40.70;
  const double m_per_deg_lat = kEarthRadiusM * kPi / 180.0;
  const double m_per_deg_lon = m_per_deg_lat * std::cos(lat0 * kPi / 180.0);
  const LatLonBounds bbox{lat0, lat0 + 1000.0 / m_per_deg_lat, -74.00,
                          -74.00 + 2000.0 / m_per_deg_lon};
  const Tiling t = tile_area(bbox, 1000.0, 200.0);
  // stride 800: covering 2000 m needs ceil((2000-1000)/800)+1 = 3 columns
  CHECK(t.regions.size() == 3);

  // every lattice point (10 m pitch) must fall in at least one region
  for (double y = 0.0; y <= 1000.0; y += 10.0) {
    for (double x = 0.0; x <= 2000.0; x += 10.0) {
      const GeoPoint p{bbox.lat_min + y / m_per_deg_lat,
                       bbox.lon_min + x / m_per_deg_lon};
      CHECK_NOTHROW(region_for_point(t, p));
    }
  }
}

TEST_CASE("region_for_point nearest center and hysteresis") {
  const double lat0 = 40.70;
  const double m_per_deg_lat = kEarthRadiusM * kPi / 180.0;
  const double m_per_deg_lon = m_per_deg_lat * std::cos(lat0 * kPi / 180.0);
  const LatLonBounds bbox{lat0, lat0 + 1000.0 / m_per_deg_lat, -74.00,
                          -74.00 + 2000.0 / m_per_deg_lon};
  const Tiling t = tile_area(bbox, 1000.0, 200.0);
  REQUIRE(t.regions.size() == 3);

  // at a region center -> that region
  CHECK(region_for_point(t, t.regions[1].center).region_id ==
        t.regions[1].region_id);

  // overlap strip between region 0 ([0,1000]) and region 1 ([800,1800])
  const GeoPoint strip{bbox.lat_min + 500.0 / m_per_deg_lat,
                       bbox.lon_min + 900.0 / m_per_deg_lon};
  CHECK(region_for_point(t, strip, t.regions[0].region_id).region_id ==
        t.regions[0].region_id);
  CHECK(region_for_point(t, strip, t.regions[1].region_id).region_id ==
        t.regions[1].region_id);

  // no current: brute-force nearest-center search as oracle
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(0.0, 2000.0), uy(0.0, 1000.0);
  for (int i = 0; i < 300; ++i) {
    const GeoPoint p{bbox.lat_min + uy(rng) / m_per_deg_lat,
                     bbox.lon_min + ux(rng) / m_per_deg_lon};
    const Region& got = region_for_point(t, p);
    const Region* best = nullptr;
    double best_d = 1e18;
    for (const Region& r : t.regions) {
      if (!r.bbox.contains(p)) continue;
      const double d = haversine_distance(p, r.center);
      if (d < best_d - 1e-9) {
        best_d = d;
        best = &r;
      }
    }
    REQUIRE(best != nullptr);
    CHECK(got.region_id == best->region_id);
  }

  CHECK_THROWS_AS(region_for_point(t, {0.0, 0.0}), OutOfCoverage);
}

TEST_CASE("simulated walk never switches region while inside current bbox") {
  const double lat0 = 40.70;
  const double m_per_deg_lat = kEarthRadiusM * kPi / 180.0;
  const double m_per_deg_lon = m_per_deg_lat * std::cos(lat0 * kPi / 180.0);
  const LatLonBounds bbox{lat0, lat0 + 2000.0 / m_per_deg_lat, -74.00,
                          -74.00 + 2000.0 / m_per_deg_lon};
  const Tiling t = tile_area(bbox, 1000.0, 300.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(-40.0, 40.0);
  double x = 1000.0, y = 1000.0;
  std::optional<std::string> current;
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint p{bbox.lat_min + y / m_per_deg_lat,
                     bbox.lon_min + x / m_per_deg_lon};
    const Region& r = region_for_point(t, p, current);
    if (current) {
      const Region& prev = region_for_point(t, p, current);
      // hysteresis: if still inside the current bbox we must stay there
      for (const Region& reg : t.regions) {
        if (reg.region_id == *current && reg.bbox.contains(p)) {
          CHECK(r.region_id == *current);
        }
      }
      (void)prev;
    }
    current = r.region_id;
    x = std::clamp(x + step(rng), 0.0, 2000.0);
    y = std::clamp(y + step(rng), 0.0, 2000.0);
  }
}

TEST_CASE("tiling JSON round-trip") {
  const Tiling t = tile_area({40.70, 40.72, -74.00, -73.97}, 900.0, 150.0);
  const Tiling back = tiling_from_json(tiling_to_json(t));
  REQUIRE(back.regions.size() == t.regions.size());
  CHECK(back.overlap_m == t.overlap_m);
  for (std::size_t i = 0; i < t.regions.size(); ++i) {
    CHECK(back.regions[i].region_id == t.regions[i].region_id);
    CHECK(back.regions[i].center.lat ==
          doctest::Approx(t.regions[i].center.lat).epsilon(1e-12));
    CHECK(back.regions[i].half_extent_m == t.regions[i].half_extent_m);
  }
}
