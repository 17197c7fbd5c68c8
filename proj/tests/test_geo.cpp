// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "support/brute.hpp"
#include "urbanscene/error.hpp"
#include "urbanscene/geo.hpp"

using namespace urbanscene;

namespace {

LocalPolygon rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, {}};
}

double monte_carlo_area(const LocalPolygon& p, std::size_t samples, std::mt19937_64& rng) {
  const Bounds2 b = bounds(p);
  std::uniform_real_distribution<double> ux(b.min.x, b.max.x), uy(b.min.y, b.max.y);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < samples; ++i) hit += brute::inside({ux(rng), uy(rng)}, p) ? 1 : 0;
  return (b.max.x - b.min.x) * (b.max.y - b.min.y) * static_cast<double>(hit) / static_cast<double>(samples);
}

}  // namespace

TEST_CASE("haversine and bearing agree with the vector formulation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lon(-180, 180), lat(-85, 85), step(-0.05, 0.05);
  for (int i = 0; i < 500; ++i) {
    const GeoPoint a{lon(rng), lat(rng)};
    const GeoPoint b{std::fmod(a.lon + step(rng) + 540.0, 360.0) - 180.0, std::clamp(a.lat + step(rng), -89.0, 89.0)};
    if (haversine_distance(a, b) < 1e-3) continue;
    CHECK(haversine_distance(a, b) == doctest::Approx(brute::distance(a, b)).epsilon(1e-9));
    double diff = std::abs(bearing(a, b) - brute::bearing(a, b));
    diff = std::min(diff, 360.0 - diff);
    CHECK(diff < 1e-6);
  }
}

TEST_CASE("geodesy against frozen external values") {
  std::ifstream in(URBANSCENE_TEST_DATA "/geodesic_pairs.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<double> v;
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    const GeoPoint a{v[0], v[1]}, b{v[2], v[3]};
    CHECK(haversine_distance(a, b) == doctest::Approx(v[4]).epsilon(1e-7));
    double diff = std::abs(bearing(a, b) - v[5]);
    CHECK(std::min(diff, 360.0 - diff) < 1e-5);
    ++rows;
  }
  CHECK(rows == 1000);
}

TEST_CASE("known distances and bearings") {
  // One degree of longitude on the equator.
  CHECK(haversine_distance({0, 0}, {1, 0}) == doctest::Approx(111194.92664).epsilon(1e-10));
  CHECK(bearing({0, 0}, {1, 0}) == doctest::Approx(90.0));
  CHECK(bearing({0, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(bearing({0, 0}, {-1, 0}) == doctest::Approx(270.0));
  CHECK(bearing({0, 1}, {0, 0}) == doctest::Approx(180.0));
  CHECK(haversine_distance({114.36, 30.536}, {114.36, 30.536}) == 0.0);
  CHECK_THROWS_AS(bearing({3, 4}, {3, 4}), Error);
}

TEST_CASE("direction bins put edges in the clockwise sector") {
  CHECK(direction_bin(0.0) == CardinalDirection::North);
  CHECK(direction_bin(22.4999) == CardinalDirection::North);
  CHECK(direction_bin(22.5) == CardinalDirection::Northeast);
  CHECK(direction_bin(67.5) == CardinalDirection::East);
  CHECK(direction_bin(180.0) == CardinalDirection::South);
  CHECK(direction_bin(337.4999) == CardinalDirection::Northwest);
  CHECK(direction_bin(337.5) == CardinalDirection::North);
  CHECK(direction_bin(359.999) == CardinalDirection::North);
  for (int k = 0; k < 3600; ++k) {
    const double b = k * 0.1;
    CHECK(static_cast<int>(direction_bin(b)) == brute::octant(b));
  }
  CHECK(parse_direction("northeast") == CardinalDirection::Northeast);
  CHECK(opposite(CardinalDirection::Southwest) == CardinalDirection::Northeast);
  CHECK_FALSE(parse_direction("up").has_value());
}

TEST_CASE("enu frame round trip") {
  const EnuFrame f({114.36, 30.536});
  const GeoPoint p{114.3612, 30.5371};
  const GeoPoint back = f.to_geo(f.to_local(p));
  CHECK(back.lon == doctest::Approx(p.lon).epsilon(1e-14));
  CHECK(back.lat == doctest::Approx(p.lat).epsilon(1e-14));
  // Local offsets agree with great-circle distance at scene scale.
  const Vec2 l = f.to_local(p);
  CHECK(std::hypot(l.x, l.y) == doctest::Approx(haversine_distance(f.origin(), p)).epsilon(1e-4));
}

TEST_CASE("polygon area against Monte Carlo") {
  std::mt19937_64 rng(5);
  LocalPolygon l_shape{{{0, 0}, {40, 0}, {40, 10}, {10, 10}, {10, 30}, {0, 30}, {0, 0}}, {}};
  CHECK(polygon_area(l_shape) == doctest::Approx(600.0));
  CHECK(monte_carlo_area(l_shape, 200000, rng) == doctest::Approx(600.0).epsilon(0.01));

  LocalPolygon holed = rect(0, 0, 50, 40);
  holed.holes.push_back({{10, 10}, {10, 20}, {30, 20}, {30, 10}, {10, 10}});
  CHECK(polygon_area(holed) == doctest::Approx(1800.0));
  CHECK(monte_carlo_area(holed, 200000, rng) == doctest::Approx(1800.0).epsilon(0.01));

  // Random star polygons.
  std::uniform_real_distribution<double> r(5.0, 20.0);
  for (int t = 0; t < 10; ++t) {
    LocalPolygon star;
    for (int k = 0; k < 12; ++k) {
      const double a = 2 * kPi * k / 12;
      const double rr = r(rng);
      star.exterior.push_back({rr * std::cos(a), rr * std::sin(a)});
    }
    star.exterior.push_back(star.exterior.front());
    CHECK(polygon_area(star) == doctest::Approx(monte_carlo_area(star, 200000, rng)).epsilon(0.02));
  }
}

TEST_CASE("centroid of symmetric shapes") {
  const Vec2 c = polygon_centroid(rect(2, 4, 12, 8));
  CHECK(c.x == doctest::Approx(7.0));
  CHECK(c.y == doctest::Approx(6.0));
}

TEST_CASE("point in polygon agrees with winding number") {
  std::mt19937_64 rng(9);
  LocalPolygon p{{{0, 0}, {40, 0}, {40, 10}, {10, 10}, {10, 30}, {0, 30}, {0, 0}}, {}};
  p.holes.push_back({{2, 2}, {6, 2}, {6, 6}, {2, 6}, {2, 2}});
  std::uniform_real_distribution<double> u(-5, 45);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 q{u(rng), u(rng)};
    CHECK(point_in_polygon(q, p) == brute::inside(q, p));
  }
  // Boundary points, including hole edges, count as inside.
  CHECK(point_in_polygon(Vec2{0, 15}, p));
  CHECK(point_in_polygon(Vec2{40, 5}, p));
  CHECK(point_in_polygon(Vec2{4, 2}, p));
  CHECK_FALSE(point_in_polygon(Vec2{4, 4}, p));
  CHECK(point_in_polygon(Vec2{10, 10}, p));
}

TEST_CASE("degenerate polygons are rejected") {
  const GeoPoint a{114.36, 30.53};
  CHECK_THROWS_AS(validate(Polygon2D{{a, {114.361, 30.53}, a}, {}}), Error);
  CHECK_THROWS_AS(validate(Polygon2D{{a, {114.361, 30.53}, {114.362, 30.53}, a}, {}}), Error);
  // Bow tie.
  LocalPolygon bow{{{0, 0}, {10, 10}, {10, 0}, {0, 10}, {0, 0}}, {}};
  CHECK_THROWS_AS(validate(bow), Error);
  CHECK_NOTHROW(validate(rect(0, 0, 1, 1)));
}

TEST_CASE("segment helpers") {
  CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
  const auto hit = segment_intersection({0, 0}, {2, 2}, {0, 2}, {2, 0});
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(0.5));
  CHECK_FALSE(segment_intersection({0, 0}, {1, 0}, {0, 1}, {1, 1}).has_value());
  CHECK(distance_to_boundary({5, 5}, rect(0, 0, 10, 20)) == doctest::Approx(5.0));
}
