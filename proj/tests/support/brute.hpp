// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Exhaustive reference implementations used to check the library. They
// share types with the library but none of its algorithms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"
#include "urbanscene/oracle.hpp"
#include "urbanscene/relations.hpp"
#include "urbanscene/ssd.hpp"

namespace brute {

using urbanscene::GeoPoint;
using urbanscene::LocalPolygon;
using urbanscene::Ring;
using urbanscene::Vec2;

inline constexpr double kRadius = 6'371'000.0;
inline constexpr double kPi = 3.14159265358979323846;

struct V3 {
  double x, y, z;
};
inline V3 cross3(V3 a, V3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double dot3(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double len3(V3 a) { return std::sqrt(dot3(a, a)); }

inline V3 unit(const GeoPoint& p) {
  const double lon = p.lon * kPi / 180.0;
  const double lat = p.lat * kPi / 180.0;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

// Central angle from the cross and dot products of the unit vectors.
inline double distance(const GeoPoint& a, const GeoPoint& b) {
  const V3 ua = unit(a);
  const V3 ub = unit(b);
  return kRadius * std::atan2(len3(cross3(ua, ub)), dot3(ua, ub));
}

// Heading of b seen from a, measured in a's tangent plane.
inline double bearing(const GeoPoint& a, const GeoPoint& b) {
  const double lon = a.lon * kPi / 180.0;
  const double lat = a.lat * kPi / 180.0;
  const V3 east{-std::sin(lon), std::cos(lon), 0.0};
  const V3 north{-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat)};
  const V3 n = cross3(unit(a), unit(b));
  // The great-circle tangent at a is n x a.
  const V3 t = cross3(n, unit(a));
  double deg = std::atan2(dot3(t, east), dot3(t, north)) * 180.0 / kPi;
  if (deg < 0.0) deg += 360.0;
  return deg >= 360.0 ? deg - 360.0 : deg;
}

inline int octant(double bearing_deg) {
  return static_cast<int>(std::floor(std::fmod(bearing_deg + 22.5, 360.0) / 45.0)) % 8;
}

inline double seg_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double l2 = dx * dx + dy * dy;
  double t = l2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline Vec2 seg_closest(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double l2 = dx * dx + dy * dy;
  double t = l2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {a.x + t * dx, a.y + t * dy};
}

inline std::vector<std::pair<Vec2, Vec2>> edges(const Ring& r) {
  std::vector<std::pair<Vec2, Vec2>> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Vec2 a = r[i];
    const Vec2 b = r[(i + 1) % r.size()];
    if (!(a == b)) out.push_back({a, b});
  }
  return out;
}

inline std::vector<std::pair<Vec2, Vec2>> edges(const LocalPolygon& p) {
  auto out = edges(p.exterior);
  for (const Ring& h : p.holes) {
    auto e = edges(h);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

// Winding number by signed crossings.
inline int winding(Vec2 p, const Ring& r) {
  int w = 0;
  for (const auto& [a, b] : edges(r)) {
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++w;
    } else if (b.y <= p.y && side < 0) {
      --w;
    }
  }
  return w;
}

inline double boundary_distance(Vec2 p, const LocalPolygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : edges(poly)) best = std::min(best, seg_distance(p, a, b));
  return best;
}

inline Vec2 boundary_closest(Vec2 p, const LocalPolygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 out{};
  for (const auto& [a, b] : edges(poly)) {
    const Vec2 c = seg_closest(p, a, b);
    const double d = std::hypot(p.x - c.x, p.y - c.y);
    if (d < best) {
      best = d;
      out = c;
    }
  }
  return out;
}

// Boundary within `tol` counts as inside.
inline bool inside(Vec2 p, const LocalPolygon& poly, double tol = 1e-9) {
  if (boundary_distance(p, poly) <= tol) return true;
  if (winding(p, poly.exterior) == 0) return false;
  for (const Ring& h : poly.holes) {
    if (winding(p, h) != 0) return false;
  }
  return true;
}

inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
  const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return seg_distance(a, c, d) == 0 || seg_distance(b, c, d) == 0 || seg_distance(c, a, b) == 0 ||
         seg_distance(d, a, b) == 0;
}

// Distance from a polyline to a polygon's area, 0 when they meet.
inline double polyline_distance(const std::vector<Vec2>& line, const LocalPolygon& poly) {
  for (const Vec2& v : line) {
    if (inside(v, poly, 0.0)) return 0.0;
  }
  const auto es = edges(poly);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    for (const auto& [a, b] : es) {
      if (segments_cross(line[i], line[i + 1], a, b)) return 0.0;
      best = std::min({best, seg_distance(line[i], a, b), seg_distance(line[i + 1], a, b),
                       seg_distance(a, line[i], line[i + 1]), seg_distance(b, line[i], line[i + 1])});
    }
  }
  return best;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Neighbors exactly as documented, recomputed from scratch.
inline std::vector<urbanscene::SpatialRelation> spatial(const std::string& q,
                                                        const std::vector<urbanscene::SceneEntity>& scene,
                                                        std::size_t k, double radius) {
  const auto self = std::find_if(scene.begin(), scene.end(), [&](const auto& e) { return e.id == q; });
  struct C {
    double d;
    std::string id;
    std::string name;
    GeoPoint c;
  };
  std::vector<C> all;
  for (const auto& e : scene) {
    if (e.id == q || !e.name || e.name->empty()) continue;
    const double d = distance(self->center, e.center);
    if (d <= 1e-9 || d > radius) continue;
    all.push_back({d, e.id, *e.name, e.center});
  }
  std::sort(all.begin(), all.end(), [](const C& a, const C& b) { return a.d != b.d ? a.d < b.d : a.id < b.id; });
  std::vector<urbanscene::SpatialRelation> out;
  for (std::size_t i = 0; i < all.size() && i < k; ++i) {
    out.push_back({all[i].name, static_cast<urbanscene::CardinalDirection>(octant(brute::bearing(self->center, all[i].c))),
                   all[i].d});
  }
  return out;
}

// Topology entries with the polygonal-arc band made explicit: a feature
// closer than d*cos(pi/(4*segments)) must be listed, one beyond d must not,
// and one in between may go either way.
struct TopologyCandidate {
  std::string name;
  double distance = 0.0;  // reported distance
  bool required = true;
  bool polyline = false;
};

inline std::vector<TopologyCandidate> topology(const urbanscene::MapObject& self,
                                               const std::vector<urbanscene::MapObject>& scene,
                                               const urbanscene::EnuFrame& frame, double d) {
  const double inner = d * std::cos(kPi / (4.0 * urbanscene::kArcSegmentsPerQuarter)) - 1e-6;
  const double outer = d + 1e-6;
  std::optional<LocalPolygon> outline;
  std::optional<GeoPoint> anchor;
  if (const auto* poly = std::get_if<urbanscene::Polygon2D>(&self.geometry)) {
    outline = urbanscene::project(*poly, frame);
  } else {
    anchor = std::get<GeoPoint>(self.geometry);
  }
  std::vector<TopologyCandidate> out;
  for (const auto& o : scene) {
    if (o.id == self.id) continue;
    double planar = 0.0;
    double reported = 0.0;
    bool line = false;
    if (const auto* pt = std::get_if<GeoPoint>(&o.geometry)) {
      const Vec2 p = frame.to_local(*pt);
      if (anchor) {
        const Vec2 a = frame.to_local(*anchor);
        planar = std::hypot(p.x - a.x, p.y - a.y);
        reported = distance(*anchor, *pt);
      } else if (!inside(p, *outline)) {
        planar = boundary_distance(p, *outline);
        reported = distance(*pt, frame.to_geo(boundary_closest(p, *outline)));
      }
    } else if (const auto* pl = std::get_if<urbanscene::Polyline>(&o.geometry)) {
      line = true;
      std::vector<Vec2> local;
      for (const GeoPoint& g : *pl) local.push_back(frame.to_local(g));
      if (anchor) {
        const Vec2 a = frame.to_local(*anchor);
        planar = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < local.size(); ++i) planar = std::min(planar, seg_distance(a, local[i], local[i + 1]));
      } else {
        planar = polyline_distance(local, *outline);
      }
    } else {
      continue;
    }
    if (planar > outer) continue;
    out.push_back({o.label(), reported, planar < inner, line});
  }
  return out;
}

// Every simple path, pruned only by length already exceeding the best.
inline double shortest_length(const urbanscene::RoadGraph& g, std::size_t a, std::size_t b,
                              std::vector<std::size_t>* best_edges = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> seen(g.nodes.size(), false);
  std::vector<std::size_t> path;
  std::function<void(std::size_t, double)> walk = [&](std::size_t n, double len) {
    if (len > best + 1e-9) return;
    if (n == b) {
      if (len < best) {
        best = len;
        if (best_edges) *best_edges = path;
      }
      return;
    }
    seen[n] = true;
    for (std::size_t ei : g.adjacency[n]) {
      const auto& e = g.edges[ei];
      const std::size_t m = e.a == n ? e.b : e.a;
      if (seen[m]) continue;
      path.push_back(ei);
      walk(m, len + e.length);
      path.pop_back();
    }
    seen[n] = false;
  };
  walk(a, 0.0);
  return best;
}

inline std::size_t nearest_node(const urbanscene::RoadGraph& g, const GeoPoint& p) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double d = distance(p, g.nodes[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

inline std::vector<std::string> ids_in(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("(ID ", pos)) != std::string::npos) {
    const std::size_t end = text.find(')', pos);
    out.push_back(text.substr(pos + 4, end - pos - 4));
    pos = end;
  }
  return out;
}

inline std::set<std::string> word_set(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s + " ") {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur += c;
    } else if (c >= 'A' && c <= 'Z') {
      cur += static_cast<char>(c - 'A' + 'a');
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  return out;
}

inline bool id_less(const std::string& a, const std::string& b) {
  const bool na = !a.empty() && std::all_of(a.begin(), a.end(), ::isdigit);
  const bool nb = !b.empty() && std::all_of(b.begin(), b.end(), ::isdigit);
  if (na && nb) return a.size() != b.size() ? a.size() < b.size() : a < b;
  if (na != nb) return na;
  return a < b;
}

inline std::vector<std::string> split_arrow(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(" -> ", pos);
    out.push_back(s.substr(pos, hit == std::string::npos ? std::string::npos : hit - pos));
    if (hit == std::string::npos) return out;
    pos = hit + 4;
  }
}

// Recomputes the keyed option of a templated question from the description.
inline char answer(const urbanscene::StructuredSceneDescription& ssd, const urbanscene::RoadGraph& roads,
                   const urbanscene::QAItem& q) {
  using urbanscene::QaCategory;
  auto center = [&](const std::string& id) -> std::optional<GeoPoint> {
    auto it = ssd.objects.find(id);
    if (it == ssd.objects.end() || !it->second.geometric) return std::nullopt;
    return it->second.geometric->center;
  };
  const auto ids = ids_in(q.question);
  switch (q.category) {
    case QaCategory::Distance: {
      const double d = distance(*center(ids[0]), *center(ids[1]));
      int best = -1;
      double err = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 4; ++i) {
        const double v = std::stod(q.options[i]);
        const double scale = q.options[i].find("km") != std::string::npos ? 1000.0 : 1.0;
        if (std::abs(v * scale - d) < err) {
          err = std::abs(v * scale - d);
          best = i;
        }
      }
      return static_cast<char>('A' + best);
    }
    case QaCategory::Directional: {
      static const char* names[] = {"North", "Northeast", "East", "Southeast",
                                    "South", "Southwest", "West", "Northwest"};
      const std::string want = names[octant(brute::bearing(*center(ids[0]), *center(ids[1])))];
      for (int i = 0; i < 4; ++i) {
        if (q.options[i] == want) return static_cast<char>('A' + i);
      }
      return 'F';
    }
    case QaCategory::Poi: {
      const std::string head = "Which ";
      const std::size_t cls_end = q.question.find(" is closest to the coordinates (");
      const std::string fclass = q.question.substr(head.size(), cls_end - head.size());
      const std::size_t open = q.question.find('(', cls_end);
      const std::size_t comma = q.question.find(',', open);
      const GeoPoint p{std::stod(q.question.substr(open + 1)), std::stod(q.question.substr(comma + 1))};
      std::string best;
      double bd = std::numeric_limits<double>::infinity();
      for (const auto& [id, o] : ssd.objects) {
        if (!o.identity || o.identity->fclass != fclass || !o.geometric) continue;
        const double d = distance(p, o.geometric->center);
        if (d < bd) {
          bd = d;
          best = id;
        }
      }
      for (int i = 0; i < 4; ++i) {
        const auto oid = ids_in(q.options[i]);
        if (!oid.empty() && oid.back() == best) return static_cast<char>('A' + i);
      }
      return 'F';
    }
    case QaCategory::Path: {
      const std::size_t a = nearest_node(roads, *center(ids[0]));
      const std::size_t b = nearest_node(roads, *center(ids[1]));
      std::vector<std::size_t> path;
      if (!std::isfinite(shortest_length(roads, a, b, &path))) return 'F';
      std::vector<std::string> names;
      for (std::size_t e : path) {
        if (names.empty() || names.back() != roads.edges[e].road) names.push_back(roads.edges[e].road);
      }
      for (int i = 0; i < 4; ++i) {
        if (split_arrow(q.options[i]) == names) return static_cast<char>('A' + i);
      }
      return 'F';
    }
    case QaCategory::Grounding: {
      const std::size_t open = q.question.find('"');
      const std::string query = q.question.substr(open + 1, q.question.rfind('"') - open - 1);
      const auto qw = word_set(query);
      int best = -1;
      std::size_t best_overlap = 0;
      std::string best_id;
      for (int i = 0; i < 4; ++i) {
        const auto oid = ids_in(q.options[i]);
        if (oid.empty()) continue;
        auto it = ssd.objects.find(oid.back());
        if (it == ssd.objects.end() || !it->second.visual) continue;
        const auto tw = word_set(*it->second.visual);
        std::size_t n = 0;
        for (const auto& w : qw) n += tw.count(w);
        if (best < 0 || n > best_overlap || (n == best_overlap && id_less(oid.back(), best_id))) {
          best = i;
          best_overlap = n;
          best_id = oid.back();
        }
      }
      return best < 0 || best_overlap == 0 ? 'F' : static_cast<char>('A' + best);
    }
  }
  return 'F';
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto dir = std::filesystem::temp_directory_path() / ("urbanscene-" + tag + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace brute
