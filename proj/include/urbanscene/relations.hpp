// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Object-to-object relationships: nearest named neighbors with direction and
// distance, and the point/polyline features met by a buffer around an
// object's outline.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"

namespace urbanscene {

inline constexpr std::size_t kDefaultNeighborCount = 5;
inline constexpr double kDefaultNeighborRadius = 100.0;
inline constexpr double kDefaultBufferDistance = 50.0;
// Arc vertices per quarter circle when buffering.
inline constexpr int kArcSegmentsPerQuarter = 8;

struct SpatialRelation {
  std::string name;
  CardinalDirection direction = CardinalDirection::North;
  double distance = 0.0;  // meters, center to center
  friend bool operator==(const SpatialRelation&, const SpatialRelation&) = default;
};

struct PointTypeEntry {
  std::string name;
  double distance = 0.0;  // meters from the query outline, 0 when inside
  friend bool operator==(const PointTypeEntry&, const PointTypeEntry&) = default;
};

struct TopologyRelation {
  std::vector<PointTypeEntry> points;
  std::vector<std::string> polylines;
  bool empty() const { return points.empty() && polylines.empty(); }
  friend bool operator==(const TopologyRelation&, const TopologyRelation&) = default;
};

// Anything that can act as a neighbor: an id, an optional usable name and a
// center.
struct SceneEntity {
  std::string id;
  std::optional<std::string> name;
  GeoPoint center{};
};

// The k nearest named entities within `radius` of q's center (Haversine,
// center to center), ascending by distance with ties broken by id. Entities
// whose center coincides with q's have no defined direction and are skipped.
// Throws NotFound for an unknown q, InvalidArgument for k == 0 or radius <= 0.
std::vector<SpatialRelation> spatial_relations(const std::string& q,
                                               const std::vector<SceneEntity>& scene,
                                               std::size_t k = kDefaultNeighborCount,
                                               double radius = kDefaultNeighborRadius);

// Outward offset by d meters with rounded convex corners. d == 0 returns the
// normalized input. Throws InvalidArgument for d < 0.
LocalPolygon buffer_polygon(const LocalPolygon& p, double d);
Polygon2D buffer_polygon(const Polygon2D& p, double d, const EnuFrame& frame);
// Disk of radius d around a point, as a polygon.
LocalPolygon buffer_point(const Vec2& p, double d);

// Point-type entries: point objects inside the buffered outline, with the
// Haversine distance from q's boundary. Polyline-type entries: names of
// polylines meeting the buffer, deduplicated and sorted. Unnamed objects are
// listed under their feature class.
// Throws NotFound for an unknown q and InvalidArgument when q is a polyline
// or d <= 0.
TopologyRelation topology_relations(const std::string& q, const std::vector<MapObject>& scene,
                                    const EnuFrame& frame, double d = kDefaultBufferDistance);

// Does the polyline (in the same frame) touch the polygon's area?
bool polyline_intersects_polygon(const std::vector<Vec2>& line, const LocalPolygon& poly);

}  // namespace urbanscene
