// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Coordinate systems, spherical geodesy and planar polygon primitives.
//
// Geographic coordinates are WGS84 degrees treated on a sphere of radius
// kEarthRadiusMeters. Metric work (areas, offsets, point-in-polygon on cloud
// points) happens in a local east/north/up tangent frame anchored at a
// declared origin, normally the scene bounding-box center.

#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace urbanscene {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);
// Throws InvalidArgument when lon/lat are out of range or not finite.
void require_valid(const GeoPoint& p);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

// Meters east / north / up in an EnuFrame.
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
  Vec2 xy() const { return {x, y}; }
};

enum class CardinalDirection {
  North,
  Northeast,
  East,
  Southeast,
  South,
  Southwest,
  West,
  Northwest,
};

inline constexpr int kDirectionCount = 8;

std::string_view to_string(CardinalDirection d);
std::optional<CardinalDirection> parse_direction(std::string_view text);
CardinalDirection opposite(CardinalDirection d);

// Great-circle distance in meters.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Initial great-circle bearing in degrees, 0 = North, 90 = East, in [0, 360).
// Throws Degenerate("undefined bearing") for coincident points.
double bearing(const GeoPoint& a, const GeoPoint& b);

// 8-way sector binning. Sector edges sit at 22.5 + k*45 degrees and an edge
// value belongs to the clockwise sector (22.5 -> Northeast, 337.5 -> North).
CardinalDirection direction_bin(double bearing_deg);

// Local tangent-plane frame. Longitude scales by cos(origin latitude); the
// mapping is affine, so it inverts exactly up to floating point.
class EnuFrame {
 public:
  EnuFrame() = default;
  explicit EnuFrame(GeoPoint origin);

  const GeoPoint& origin() const { return origin_; }
  Vec2 to_local(const GeoPoint& p) const;
  LocalPoint to_local(const GeoPoint& p, double z) const;
  GeoPoint to_geo(const Vec2& p) const;
  GeoPoint to_geo(const LocalPoint& p) const { return to_geo(p.xy()); }

 private:
  GeoPoint origin_{};
  double meters_per_deg_lon_ = kEarthRadiusMeters * kPi / 180.0;
  double meters_per_deg_lat_ = kEarthRadiusMeters * kPi / 180.0;
};

struct Bounds2 {
  Vec2 min{};
  Vec2 max{};
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

struct GeoBounds {
  GeoPoint min{};
  GeoPoint max{};
  GeoPoint center() const {
    return {(min.lon + max.lon) / 2.0, (min.lat + max.lat) / 2.0};
  }
  friend bool operator==(const GeoBounds&, const GeoBounds&) = default;
};

using GeoRing = std::vector<GeoPoint>;
using Ring = std::vector<Vec2>;

// Footprint polygon in geographic coordinates. Rings are stored closed
// (first == last) once normalized.
struct Polygon2D {
  GeoRing exterior;
  std::vector<GeoRing> holes;
  friend bool operator==(const Polygon2D&, const Polygon2D&) = default;
};

using Polyline = std::vector<GeoPoint>;

// Same polygon projected into an EnuFrame.
struct LocalPolygon {
  Ring exterior;
  std::vector<Ring> holes;
};

// Closes every ring and drops consecutive duplicate vertices.
Polygon2D normalize(const Polygon2D& p);
Ring normalize_ring(const Ring& ring);

// Throws Degenerate when a ring has fewer than 3 distinct vertices, zero
// area, or self-intersects.
void validate(const Polygon2D& p);
void validate(const LocalPolygon& p);

std::size_t distinct_vertex_count(const GeoRing& ring);
bool ring_is_simple(const Ring& ring);

LocalPolygon project(const Polygon2D& p, const EnuFrame& frame);
Polygon2D unproject(const LocalPolygon& p, const EnuFrame& frame);

double ring_signed_area(const Ring& ring);

// Area in square meters, holes subtracted. Throws Degenerate for zero area.
double polygon_area(const LocalPolygon& p);
double polygon_area(const Polygon2D& p, const EnuFrame& frame);
double polygon_area(const Polygon2D& p);

// Area-weighted centroid. Throws Degenerate for zero area.
Vec2 polygon_centroid(const LocalPolygon& p);
GeoPoint polygon_centroid(const Polygon2D& p, const EnuFrame& frame);
GeoPoint polygon_centroid(const Polygon2D& p);

// Ray casting with boundary points counted as inside. A point on a hole's
// edge is on the polygon boundary and therefore inside.
bool point_in_polygon(const Vec2& pt, const LocalPolygon& p);
bool point_in_polygon(const LocalPoint& pt, const LocalPolygon& p);
bool point_in_polygon(const GeoPoint& pt, const Polygon2D& p, const EnuFrame& frame);

bool point_in_ring(const Vec2& pt, const Ring& ring);
bool point_on_ring(const Vec2& pt, const Ring& ring, double tolerance = 1e-9);

Bounds2 bounds(const Ring& ring);
Bounds2 bounds(const LocalPolygon& p);
GeoBounds bounds(const GeoRing& ring);
GeoBounds bounds(const std::vector<GeoPoint>& points, const GeoBounds& seed);

// Frame anchored at the center of the given geographic bounds.
EnuFrame frame_for(const GeoBounds& b);

// Closest-point queries against polygon boundaries and segments.
Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
Vec2 closest_boundary_point(const Vec2& p, const LocalPolygon& poly);
double distance_to_boundary(const Vec2& p, const LocalPolygon& poly);

// Closed-segment intersection test, collinear overlaps included.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Proper or touching intersection of two non-parallel segments; returns the
// parameter along ab and the point. Parallel segments return nullopt.
struct SegmentHit {
  double t = 0.0;
  double u = 0.0;
  Vec2 point{};
};
std::optional<SegmentHit> segment_intersection(const Vec2& a, const Vec2& b,
                                               const Vec2& c, const Vec2& d);

}  // namespace urbanscene
