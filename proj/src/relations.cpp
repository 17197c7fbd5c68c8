// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/relations.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace urbanscene {

namespace {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint>;
using BMultiPolygon = bg::model::multi_polygon<BPolygon>;

BPolygon to_boost(const LocalPolygon& p) {
  BPolygon out;
  for (const Vec2& v : normalize_ring(p.exterior)) out.outer().emplace_back(v.x, v.y);
  for (const Ring& h : p.holes) {
    out.inners().emplace_back();
    for (const Vec2& v : normalize_ring(h)) out.inners().back().emplace_back(v.x, v.y);
  }
  bg::correct(out);
  return out;
}

Ring ring_from_boost(const bg::model::ring<BPoint>& ring) {
  Ring out;
  out.reserve(ring.size());
  for (const BPoint& p : ring) out.push_back({p.x(), p.y()});
  return normalize_ring(out);
}

const MapObject& find_object(const std::string& q, const std::vector<MapObject>& scene) {
  auto it = std::find_if(scene.begin(), scene.end(), [&](const MapObject& o) { return o.id == q; });
  if (it == scene.end()) throw Error(ErrorCode::NotFound, "unknown object id '" + q + "'");
  return *it;
}

}  // namespace

std::vector<SpatialRelation> spatial_relations(const std::string& q, const std::vector<SceneEntity>& scene,
                                               std::size_t k, double radius) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "neighbor count must be at least 1");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "neighbor radius must be positive");
  auto self = std::find_if(scene.begin(), scene.end(), [&](const SceneEntity& e) { return e.id == q; });
  if (self == scene.end()) throw Error(ErrorCode::NotFound, "unknown object id '" + q + "'");

  struct Candidate {
    double distance;
    const SceneEntity* entity;
  };
  std::vector<Candidate> candidates;
  for (const SceneEntity& e : scene) {
    if (e.id == q || !e.name || e.name->empty()) continue;
    const double d = haversine_distance(self->center, e.center);
    if (d > radius || d < 1e-9) continue;
    candidates.push_back({d, &e});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.entity->id < b.entity->id;
  });
  if (candidates.size() > k) candidates.resize(k);

  std::vector<SpatialRelation> out;
  out.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    out.push_back({*c.entity->name, direction_bin(bearing(self->center, c.entity->center)), c.distance});
  }
  return out;
}

LocalPolygon buffer_polygon(const LocalPolygon& p, double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "buffer distance must be >= 0");
  LocalPolygon normalized;
  normalized.exterior = normalize_ring(p.exterior);
  for (const Ring& h : p.holes) normalized.holes.push_back(normalize_ring(h));
  if (d == 0.0) return normalized;

  const int points_per_circle = 4 * kArcSegmentsPerQuarter;
  bg::strategy::buffer::distance_symmetric<double> distance(d);
  bg::strategy::buffer::side_straight side;
  bg::strategy::buffer::join_round join(points_per_circle);
  bg::strategy::buffer::end_round end(points_per_circle);
  bg::strategy::buffer::point_circle circle(points_per_circle);
  BMultiPolygon result;
  bg::buffer(to_boost(normalized), result, distance, side, join, end, circle);
  if (result.empty()) throw Error(ErrorCode::Internal, "buffer produced no geometry");

  // An outward buffer of a connected polygon is connected; keep the largest
  // part should rounding ever split off slivers.
  const auto largest = std::max_element(result.begin(), result.end(), [](const BPolygon& a, const BPolygon& b) {
    return bg::area(a) < bg::area(b);
  });
  LocalPolygon out;
  out.exterior = ring_from_boost(largest->outer());
  for (const auto& inner : largest->inners()) out.holes.push_back(ring_from_boost(inner));
  return out;
}

Polygon2D buffer_polygon(const Polygon2D& p, double d, const EnuFrame& frame) {
  return unproject(buffer_polygon(project(p, frame), d), frame);
}

LocalPolygon buffer_point(const Vec2& p, double d) {
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "point buffer distance must be positive");
  const int n = 4 * kArcSegmentsPerQuarter;
  LocalPolygon out;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    out.exterior.push_back({p.x + d * std::cos(a), p.y + d * std::sin(a)});
  }
  out.exterior = normalize_ring(out.exterior);
  return out;
}

bool polyline_intersects_polygon(const std::vector<Vec2>& line, const LocalPolygon& poly) {
  if (line.empty()) return false;
  for (const Vec2& v : line) {
    if (point_in_polygon(v, poly)) return true;
  }
  auto crosses = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      for (std::size_t j = 0; j + 1 < ring.size(); ++j) {
        if (segments_intersect(line[i], line[i + 1], ring[j], ring[j + 1])) return true;
      }
    }
    return false;
  };
  if (crosses(poly.exterior)) return true;
  for (const Ring& h : poly.holes) {
    if (crosses(h)) return true;
  }
  return false;
}

TopologyRelation topology_relations(const std::string& q, const std::vector<MapObject>& scene,
                                    const EnuFrame& frame, double d) {
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "buffer distance must be positive");
  const MapObject& self = find_object(q, scene);

  std::optional<LocalPolygon> outline;
  std::optional<GeoPoint> anchor;
  LocalPolygon buffered;
  if (const auto* poly = std::get_if<Polygon2D>(&self.geometry)) {
    outline = project(*poly, frame);
    buffered = buffer_polygon(*outline, d);
  } else if (const auto* pt = std::get_if<GeoPoint>(&self.geometry)) {
    anchor = *pt;
    buffered = buffer_point(frame.to_local(*pt), d);
  } else {
    throw Error(ErrorCode::InvalidArgument, "topology relations need a polygon or point object, '" + q +
                                                "' is a polyline");
  }
  const Bounds2 box = bounds(buffered);
  auto box_overlaps = [&](const Bounds2& b) {
    return !(b.max.x < box.min.x || b.min.x > box.max.x || b.max.y < box.min.y || b.min.y > box.max.y);
  };

  TopologyRelation rel;
  for (const MapObject& o : scene) {
    if (o.id == q) continue;
    if (const auto* pt = std::get_if<GeoPoint>(&o.geometry)) {
      const Vec2 local = frame.to_local(*pt);
      if (!box.contains(local) || !point_in_polygon(local, buffered)) continue;
      double distance = 0.0;
      if (anchor) {
        distance = haversine_distance(*anchor, *pt);
      } else if (!point_in_polygon(local, *outline)) {
        distance = haversine_distance(*pt, frame.to_geo(closest_boundary_point(local, *outline)));
      }
      rel.points.push_back({o.label(), distance});
    } else if (const auto* line = std::get_if<Polyline>(&o.geometry)) {
      std::vector<Vec2> local;
      local.reserve(line->size());
      for (const GeoPoint& g : *line) local.push_back(frame.to_local(g));
      if (!box_overlaps(bounds(local)) || !polyline_intersects_polygon(local, buffered)) continue;
      rel.polylines.push_back(o.label());
    }
  }
  std::sort(rel.points.begin(), rel.points.end(), [](const PointTypeEntry& a, const PointTypeEntry& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.name < b.name;
  });
  std::sort(rel.polylines.begin(), rel.polylines.end());
  rel.polylines.erase(std::unique(rel.polylines.begin(), rel.polylines.end()), rel.polylines.end());
  return rel;
}

}  // namespace urbanscene
