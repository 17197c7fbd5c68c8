// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "urbanscene/ssd.hpp"

namespace brute {

// Random description whose values already sit at serialized precision.
inline urbanscene::StructuredSceneDescription random_ssd(std::uint64_t seed) {
  using namespace urbanscene;
  std::mt19937_64 rng(seed);
  auto chance = [&](int pct) { return static_cast<int>(rng() % 100) < pct; };
  std::uniform_real_distribution<double> lon(113.9, 114.4), lat(22.4, 30.6), metric(0, 5000);
  static const char* words[] = {"Hall", "Library", "Gate", "北门", "Café", "\"Quoted\"", "back\\slash", "Tab\there",
                                "Line\nbreak", "Plaza"};
  auto text = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + std::string(words[rng() % 10]);
    return s;
  };
  auto point = [&] { return GeoPoint{round_coordinate(lon(rng)), round_coordinate(lat(rng))}; };

  StructuredSceneDescription ssd;
  ssd.metadata.name = "scene " + text(2);
  ssd.metadata.origin = point();
  const int n = 1 + static_cast<int>(rng() % 30);
  for (int i = 0; i < n; ++i) {
    SceneObjectDescription o;
    o.id = chance(80) ? std::to_string(1000 + rng() % 100000) : "w" + std::to_string(rng() % 1000);
    if (chance(85)) {
      IdentityBlock id;
      if (chance(70)) id.name = text(2);
      id.fclass = chance(70) ? "building" : "parking";
      if (chance(50)) id.type = "university";
      o.identity = id;
    }
    if (chance(85)) {
      GeometricBlock g;
      g.center = point();
      if (chance(80)) g.height = round_whole(metric(rng) / 50);
      if (chance(80)) g.area = round_whole(metric(rng));
      if (chance(80)) g.volume = round_whole(metric(rng) * 20);
      if (chance(80)) g.bbox = GeoBounds{point(), point()};
      o.geometric = g;
    }
    if (chance(60)) o.visual = text(8) + ".";
    if (chance(70)) {
      std::vector<SpatialRelation> rel;
      for (int k = static_cast<int>(rng() % 6); k > 0; --k) {
        rel.push_back({text(1), static_cast<CardinalDirection>(rng() % 8), round_whole(metric(rng) / 50)});
      }
      o.spatial = rel;
    }
    if (chance(70)) {
      TopologyRelation t;
      for (int k = static_cast<int>(rng() % 4); k > 0; --k) t.points.push_back({text(1), round_whole(metric(rng) / 100)});
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) t.polylines.push_back(text(1));
      o.topology = t;
    }
    ssd.objects[o.id] = o;
  }
  for (int i = static_cast<int>(rng() % 8); i > 0; --i) {
    FeatureEntry e;
    e.id = std::to_string(500000 + rng() % 1000);
    if (chance(80)) e.name = text(1);
    if (chance(90)) e.coordinates = std::vector<GeoPoint>{point()};
    ssd.points[e.id] = e;
  }
  for (int i = static_cast<int>(rng() % 5); i > 0; --i) {
    FeatureEntry e;
    e.id = std::to_string(700000 + rng() % 1000);
    if (chance(80)) e.name = text(1);
    if (chance(90)) e.coordinates = std::vector<GeoPoint>{point(), point(), point()};
    ssd.polylines[e.id] = e;
  }
  return ssd;
}

}  // namespace brute
