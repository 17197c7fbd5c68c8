// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/geo.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "urbanscene/error.hpp"

namespace urbanscene {

namespace {

constexpr std::array<std::string_view, kDirectionCount> kDirectionNames = {
    "North", "Northeast", "East", "Southeast",
    "South", "Southwest", "West", "Northwest"};

// Smallest |area| accepted as a real polygon, in square meters.
constexpr double kMinArea = 1e-9;

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, c - a);
}

bool on_segment_collinear(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

struct RingMoments {
  double area = 0.0;  // signed
  Vec2 centroid{};
};

RingMoments ring_moments(const Ring& ring) {
  RingMoments m;
  if (ring.size() < 3) return m;
  // Work relative to the first vertex to limit cancellation.
  const Vec2 ref = ring.front();
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Vec2 p = ring[i] - ref;
    const Vec2 q = ring[i + 1] - ref;
    const double c = cross(p, q);
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  m.area = a2 / 2.0;
  if (a2 != 0.0) {
    m.centroid = {ref.x + cx / (3.0 * a2), ref.y + cy / (3.0 * a2)};
  }
  return m;
}

Ring close_ring(Ring ring) {
  if (!ring.empty() && !(ring.front() == ring.back())) ring.push_back(ring.front());
  return ring;
}

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 &&
         p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0;
}

void require_valid(const GeoPoint& p) {
  if (!is_valid(p)) {
    std::ostringstream os;
    os.precision(17);
    os << "invalid geographic point (" << p.lon << ", " << p.lat << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

std::string_view to_string(CardinalDirection d) {
  return kDirectionNames[static_cast<std::size_t>(d)];
}

std::optional<CardinalDirection> parse_direction(std::string_view text) {
  std::string lowered;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '-') {
      lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i) {
    std::string name;
    for (char c : kDirectionNames[i]) {
      name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (name == lowered) return static_cast<CardinalDirection>(i);
  }
  return std::nullopt;
}

CardinalDirection opposite(CardinalDirection d) {
  return static_cast<CardinalDirection>((static_cast<int>(d) + 4) % kDirectionCount);
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

double bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a == b || haversine_distance(a, b) < 1e-9) {
    throw Error(ErrorCode::Degenerate, "undefined bearing");
  }
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dlambda = deg2rad(b.lon - a.lon);
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  double deg = rad2deg(std::atan2(y, x));
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

CardinalDirection direction_bin(double bearing_deg) {
  if (!std::isfinite(bearing_deg)) {
    throw Error(ErrorCode::InvalidArgument, "bearing is not finite");
  }
  double b = std::fmod(bearing_deg, 360.0);
  if (b < 0.0) b += 360.0;
  const auto sector = static_cast<int>(std::floor((b + 22.5) / 45.0)) % kDirectionCount;
  return static_cast<CardinalDirection>(sector);
}

EnuFrame::EnuFrame(GeoPoint origin) : origin_(origin) {
  require_valid(origin);
  const double per_deg = kEarthRadiusMeters * kPi / 180.0;
  meters_per_deg_lat_ = per_deg;
  meters_per_deg_lon_ = per_deg * std::cos(deg2rad(origin.lat));
  if (meters_per_deg_lon_ <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "frame origin too close to a pole");
  }
}

Vec2 EnuFrame::to_local(const GeoPoint& p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_,
          (p.lat - origin_.lat) * meters_per_deg_lat_};
}

LocalPoint EnuFrame::to_local(const GeoPoint& p, double z) const {
  const Vec2 v = to_local(p);
  return {v.x, v.y, z};
}

GeoPoint EnuFrame::to_geo(const Vec2& p) const {
  return {origin_.lon + p.x / meters_per_deg_lon_,
          origin_.lat + p.y / meters_per_deg_lat_};
}

Ring normalize_ring(const Ring& ring) {
  Ring out;
  out.reserve(ring.size() + 1);
  for (const Vec2& p : ring) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return close_ring(std::move(out));
}

namespace {

GeoRing normalize_geo_ring(const GeoRing& ring) {
  GeoRing out;
  out.reserve(ring.size() + 1);
  for (const GeoPoint& p : ring) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (!out.empty()) out.push_back(out.front());
  return out;
}

}  // namespace

Polygon2D normalize(const Polygon2D& p) {
  Polygon2D out;
  out.exterior = normalize_geo_ring(p.exterior);
  for (const GeoRing& h : p.holes) out.holes.push_back(normalize_geo_ring(h));
  return out;
}

std::size_t distinct_vertex_count(const GeoRing& ring) {
  std::vector<GeoPoint> pts(ring.begin(), ring.end());
  std::sort(pts.begin(), pts.end(), [](const GeoPoint& a, const GeoPoint& b) {
    return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
  });
  return static_cast<std::size_t>(std::unique(pts.begin(), pts.end()) - pts.begin());
}

bool ring_is_simple(const Ring& ring) {
  const Ring r = normalize_ring(ring);
  const std::size_t n = r.size() - 1;  // segment count
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent segments share exactly one vertex; a fold-back overlap
        // shows up as collinear containment of the far endpoint.
        const Vec2& shared = (j == i + 1) ? r[j] : r[i];
        const Vec2& far_j = (j == i + 1) ? r[j + 1] : r[j];
        const Vec2& far_i = (j == i + 1) ? r[i] : r[i + 1];
        if (orient(far_i, shared, far_j) == 0.0 &&
            dot(far_i - shared, far_j - shared) > 0.0) {
          return false;
        }
        continue;
      }
      if (segments_intersect(r[i], r[i + 1], r[j], r[j + 1])) return false;
    }
  }
  return true;
}

void validate(const LocalPolygon& p) {
  auto check = [](const Ring& ring, const char* what) {
    const Ring r = normalize_ring(ring);
    Ring distinct(r.begin(), r.end() - (r.empty() ? 0 : 1));
    std::sort(distinct.begin(), distinct.end(), [](const Vec2& a, const Vec2& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
      throw Error(ErrorCode::Degenerate,
                  std::string(what) + " ring has fewer than 3 distinct vertices");
    }
    if (std::abs(ring_signed_area(r)) <= kMinArea) {
      throw Error(ErrorCode::Degenerate, std::string(what) + " ring has zero area");
    }
    if (!ring_is_simple(r)) {
      throw Error(ErrorCode::Degenerate, std::string(what) + " ring self-intersects");
    }
  };
  check(p.exterior, "exterior");
  for (const Ring& h : p.holes) check(h, "hole");
}

void validate(const Polygon2D& p) {
  for (const GeoPoint& v : p.exterior) require_valid(v);
  for (const GeoRing& h : p.holes) {
    for (const GeoPoint& v : h) require_valid(v);
  }
  if (p.exterior.empty()) throw Error(ErrorCode::Degenerate, "polygon has no exterior ring");
  validate(project(p, frame_for(bounds(p.exterior))));
}

LocalPolygon project(const Polygon2D& p, const EnuFrame& frame) {
  auto conv = [&](const GeoRing& ring) {
    Ring out;
    out.reserve(ring.size());
    for (const GeoPoint& g : ring) out.push_back(frame.to_local(g));
    return normalize_ring(out);
  };
  LocalPolygon out;
  out.exterior = conv(p.exterior);
  for (const GeoRing& h : p.holes) out.holes.push_back(conv(h));
  return out;
}

Polygon2D unproject(const LocalPolygon& p, const EnuFrame& frame) {
  auto conv = [&](const Ring& ring) {
    GeoRing out;
    out.reserve(ring.size());
    for (const Vec2& v : ring) out.push_back(frame.to_geo(v));
    return out;
  };
  Polygon2D out;
  out.exterior = conv(p.exterior);
  for (const Ring& h : p.holes) out.holes.push_back(conv(h));
  return out;
}

double ring_signed_area(const Ring& ring) {
  return ring_moments(close_ring(ring)).area;
}

double polygon_area(const LocalPolygon& p) {
  double area = std::abs(ring_signed_area(p.exterior));
  for (const Ring& h : p.holes) area -= std::abs(ring_signed_area(h));
  if (!(area > kMinArea)) throw Error(ErrorCode::Degenerate, "polygon has zero area");
  return area;
}

double polygon_area(const Polygon2D& p, const EnuFrame& frame) {
  return polygon_area(project(p, frame));
}

double polygon_area(const Polygon2D& p) {
  return polygon_area(p, frame_for(bounds(p.exterior)));
}

Vec2 polygon_centroid(const LocalPolygon& p) {
  const RingMoments ext = ring_moments(close_ring(p.exterior));
  double area = std::abs(ext.area);
  double mx = area * ext.centroid.x;
  double my = area * ext.centroid.y;
  for (const Ring& h : p.holes) {
    const RingMoments hm = ring_moments(close_ring(h));
    const double ha = std::abs(hm.area);
    area -= ha;
    mx -= ha * hm.centroid.x;
    my -= ha * hm.centroid.y;
  }
  if (!(area > kMinArea)) throw Error(ErrorCode::Degenerate, "polygon has zero area");
  return {mx / area, my / area};
}

GeoPoint polygon_centroid(const Polygon2D& p, const EnuFrame& frame) {
  return frame.to_geo(polygon_centroid(project(p, frame)));
}

GeoPoint polygon_centroid(const Polygon2D& p) {
  return polygon_centroid(p, frame_for(bounds(p.exterior)));
}

bool point_on_ring(const Vec2& pt, const Ring& ring, double tolerance) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (point_segment_distance(pt, ring[i], ring[i + 1]) <= tolerance) return true;
  }
  if (ring.size() >= 2 && !(ring.front() == ring.back())) {
    return point_segment_distance(pt, ring.back(), ring.front()) <= tolerance;
  }
  return false;
}

bool point_in_ring(const Vec2& pt, const Ring& ring) {
  if (point_on_ring(pt, ring)) return true;
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y > pt.y) != (b.y > pt.y)) {
      const double x_cross = (b.x - a.x) * (pt.y - a.y) / (b.y - a.y) + a.x;
      if (pt.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_polygon(const Vec2& pt, const LocalPolygon& p) {
  if (!point_in_ring(pt, p.exterior)) return false;
  for (const Ring& h : p.holes) {
    if (point_on_ring(pt, h)) return true;
    if (point_in_ring(pt, h)) return false;
  }
  return true;
}

bool point_in_polygon(const LocalPoint& pt, const LocalPolygon& p) {
  return point_in_polygon(pt.xy(), p);
}

bool point_in_polygon(const GeoPoint& pt, const Polygon2D& p, const EnuFrame& frame) {
  return point_in_polygon(frame.to_local(pt), project(p, frame));
}

Bounds2 bounds(const Ring& ring) {
  Bounds2 b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
            {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Vec2& v : ring) {
    b.min.x = std::min(b.min.x, v.x);
    b.min.y = std::min(b.min.y, v.y);
    b.max.x = std::max(b.max.x, v.x);
    b.max.y = std::max(b.max.y, v.y);
  }
  return b;
}

Bounds2 bounds(const LocalPolygon& p) { return bounds(p.exterior); }

GeoBounds bounds(const GeoRing& ring) {
  GeoBounds b{{180.0, 90.0}, {-180.0, -90.0}};
  return bounds(ring, b);
}

GeoBounds bounds(const std::vector<GeoPoint>& points, const GeoBounds& seed) {
  GeoBounds b = seed;
  for (const GeoPoint& p : points) {
    b.min.lon = std::min(b.min.lon, p.lon);
    b.min.lat = std::min(b.min.lat, p.lat);
    b.max.lon = std::max(b.max.lon, p.lon);
    b.max.lat = std::max(b.max.lat, p.lat);
  }
  return b;
}

EnuFrame frame_for(const GeoBounds& b) {
  if (b.min.lon > b.max.lon || b.min.lat > b.max.lat) return EnuFrame(GeoPoint{0.0, 0.0});
  return EnuFrame(b.center());
}

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return norm(p - closest_point_on_segment(p, a, b));
}

Vec2 closest_boundary_point(const Vec2& p, const LocalPolygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 out = p;
  auto scan = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Vec2 c = closest_point_on_segment(p, ring[i], ring[i + 1]);
      const double d = norm(p - c);
      if (d < best) {
        best = d;
        out = c;
      }
    }
  };
  scan(poly.exterior);
  for (const Ring& h : poly.holes) scan(h);
  return out;
}

double distance_to_boundary(const Vec2& p, const LocalPolygon& poly) {
  return norm(p - closest_boundary_point(p, poly));
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int o1 = sign(orient(a, b, c));
  const int o2 = sign(orient(a, b, d));
  const int o3 = sign(orient(c, d, a));
  const int o4 = sign(orient(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(a, b, c)) return true;
  if (o2 == 0 && on_segment_collinear(a, b, d)) return true;
  if (o3 == 0 && on_segment_collinear(c, d, a)) return true;
  if (o4 == 0 && on_segment_collinear(c, d, b)) return true;
  return false;
}

std::optional<SegmentHit> segment_intersection(const Vec2& a, const Vec2& b,
                                               const Vec2& c, const Vec2& d) {
  const Vec2 r = b - a;
  const Vec2 s = d - c;
  const double denom = cross(r, s);
  const double scale = norm(r) * norm(s);
  if (scale == 0.0 || std::abs(denom) <= 1e-12 * scale) return std::nullopt;
  const double t = cross(c - a, s) / denom;
  const double u = cross(c - a, r) / denom;
  constexpr double eps = 1e-12;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
  SegmentHit hit;
  hit.t = std::clamp(t, 0.0, 1.0);
  hit.u = std::clamp(u, 0.0, 1.0);
  hit.point = a + hit.t * r;
  return hit;
}

}  // namespace urbanscene
