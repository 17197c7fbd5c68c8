// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/ssd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <variant>

#include <json.hpp>

namespace urbanscene {

namespace {

using json = nlohmann::json;

constexpr std::string_view kSquareMeters = "m²";
constexpr std::string_view kCubicMeters = "m³";

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

std::string quote(const std::string& s) { return json(s).dump(); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string out(buf);
  if (out == "-0.00000") out = "0.00000";
  return out;
}

std::string pair(const GeoPoint& p) { return "[" + fixed(p.lon, 5) + ", " + fixed(p.lat, 5) + "]"; }

std::string with_unit(double v, std::string_view unit) {
  return quote(fixed(v, 0) + " " + std::string(unit));
}

class Writer {
 public:
  void open(const std::string& key, char bracket) {
    line(key.empty() ? std::string(1, bracket) : quote(key) + ": " + bracket);
    ++depth_;
    first_.push_back(true);
  }
  void close(char bracket) {
    --depth_;
    first_.pop_back();
    out_ += "\n" + std::string(2 * depth_, ' ') + bracket;
  }
  void field(const std::string& key, const std::string& raw) { line(quote(key) + ": " + raw); }
  void item(const std::string& raw) { line(raw); }
  std::string take() { return std::move(out_) + "\n"; }

 private:
  void line(const std::string& text) {
    if (!first_.empty()) {
      if (!first_.back()) out_ += ",";
      first_.back() = false;
      out_ += "\n";
    }
    out_ += std::string(2 * depth_, ' ') + text;
  }
  std::string out_;
  int depth_ = 0;
  std::vector<bool> first_;
};

void write_object(Writer& w, const SceneObjectDescription& o) {
  if (!o.identity && !o.geometric && !o.visual && !o.spatial && !o.topology) {
    w.field(o.id, "{}");
    return;
  }
  w.open(o.id, '{');
  if (o.identity) {
    if (o.identity->name) w.field("Name", quote(*o.identity->name));
    w.field("Fclass", quote(o.identity->fclass));
    if (o.identity->type) w.field("Type", quote(*o.identity->type));
  }
  if (o.geometric) {
    const GeometricBlock& g = *o.geometric;
    w.field("Center", pair(g.center));
    if (g.height) w.field("Height", with_unit(*g.height, "m"));
    if (g.area) w.field("Area", with_unit(*g.area, kSquareMeters));
    if (g.volume) w.field("Volume", with_unit(*g.volume, kCubicMeters));
    if (g.bbox) w.field("Bbox", "[" + pair(g.bbox->min) + ", " + pair(g.bbox->max) + "]");
  }
  if (o.visual) w.field("Visual information", quote(*o.visual));
  if (o.spatial) {
    if (o.spatial->empty()) {
      w.field("Spatial Relationship", "[]");
    } else {
      w.open("Spatial Relationship", '[');
      for (const SpatialRelation& r : *o.spatial) {
        w.item("{\"Name\": " + quote(r.name) + ", \"Direction\": " + quote(std::string(to_string(r.direction))) +
               ", \"Distance\": " + with_unit(r.distance, "m") + "}");
      }
      w.close(']');
    }
  }
  if (o.topology) {
    w.open("Geographic Topology Relationship", '{');
    std::string points = "[";
    for (std::size_t i = 0; i < o.topology->points.size(); ++i) {
      if (i) points += ", ";
      points += "[" + quote(o.topology->points[i].name) + ", " + with_unit(o.topology->points[i].distance, "m") + "]";
    }
    w.field("Point-type", points + "]");
    std::string lines = "[";
    for (std::size_t i = 0; i < o.topology->polylines.size(); ++i) {
      if (i) lines += ", ";
      lines += quote(o.topology->polylines[i]);
    }
    w.field("Polyline-type", lines + "]");
    w.close('}');
  }
  w.close('}');
}

void write_entries(Writer& w, const std::string& key, const std::map<std::string, FeatureEntry, IdLess>& entries,
                   bool single) {
  if (entries.empty()) {
    w.field(key, "{}");
    return;
  }
  w.open(key, '{');
  for (const auto& [id, e] : entries) {
    std::string body;
    if (e.name) body += "\"Name\": " + quote(*e.name);
    if (e.coordinates) {
      if (!body.empty()) body += ", ";
      body += "\"Coordinates\": ";
      if (single && e.coordinates->size() == 1) {
        body += pair(e.coordinates->front());
      } else {
        body += "[";
        for (std::size_t i = 0; i < e.coordinates->size(); ++i) body += (i ? ", " : "") + pair((*e.coordinates)[i]);
        body += "]";
      }
    }
    w.field(id, "{" + body + "}");
  }
  w.close('}');
}

// Parsing.

[[noreturn]] void fail(const std::string& what) { throw ParseError("scene description: " + what, 0, 0); }

const std::set<std::string> kObjectKeys = {"Name",         "Fclass",
                                           "Type",         "Center",
                                           "Height",       "Area",
                                           "Volume",       "Bbox",
                                           "Visual information", "Spatial Relationship",
                                           "Geographic Topology Relationship"};

double parse_quantity(const json& j, std::string_view unit, const std::string& where) {
  if (!j.is_string()) fail(where + ": expected a quantity string");
  const std::string s = j.get<std::string>();
  const std::string suffix = " " + std::string(unit);
  if (s.size() <= suffix.size() || s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) {
    fail(where + ": expected a value in " + std::string(unit) + ", got '" + s + "'");
  }
  double v = 0.0;
  const char* end = s.data() + s.size() - suffix.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(where + ": malformed number in '" + s + "'");
  return v;
}

GeoPoint parse_pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(where + ": expected [lon, lat]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string parse_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + ": expected a string");
  return j.get<std::string>();
}

SceneObjectDescription parse_object(const std::string& id, const json& j) {
  if (!j.is_object()) fail("object " + id + " is not an object");
  for (const auto& [key, value] : j.items()) {
    if (!kObjectKeys.count(key)) fail("object " + id + ": unknown key '" + key + "'");
  }
  SceneObjectDescription o;
  o.id = id;
  const std::string where = "object " + id;
  if (j.contains("Fclass") || j.contains("Name") || j.contains("Type")) {
    IdentityBlock ib;
    if (!j.contains("Fclass")) fail(where + ": identity block without Fclass");
    ib.fclass = parse_string(j.at("Fclass"), where + " Fclass");
    if (j.contains("Name")) ib.name = parse_string(j.at("Name"), where + " Name");
    if (j.contains("Type")) ib.type = parse_string(j.at("Type"), where + " Type");
    o.identity = ib;
  }
  if (j.contains("Center")) {
    GeometricBlock g;
    g.center = parse_pair(j.at("Center"), where + " Center");
    if (j.contains("Height")) g.height = parse_quantity(j.at("Height"), "m", where + " Height");
    if (j.contains("Area")) g.area = parse_quantity(j.at("Area"), kSquareMeters, where + " Area");
    if (j.contains("Volume")) g.volume = parse_quantity(j.at("Volume"), kCubicMeters, where + " Volume");
    if (j.contains("Bbox")) {
      const json& b = j.at("Bbox");
      if (!b.is_array() || b.size() != 2) fail(where + ": Bbox needs two corners");
      g.bbox = GeoBounds{parse_pair(b[0], where + " Bbox"), parse_pair(b[1], where + " Bbox")};
    }
    o.geometric = g;
  } else if (j.contains("Height") || j.contains("Area") || j.contains("Volume") || j.contains("Bbox")) {
    fail(where + ": geometric block without Center");
  }
  if (j.contains("Visual information")) o.visual = parse_string(j.at("Visual information"), where + " Visual");
  const bool has_spatial = j.contains("Spatial Relationship");
  const bool has_topology = j.contains("Geographic Topology Relationship");
  if (has_spatial) {
    const json& list = j.at("Spatial Relationship");
    if (!list.is_array()) fail(where + ": Spatial Relationship must be a list");
    std::vector<SpatialRelation> rels;
    for (const json& r : list) {
      if (!r.is_object() || !r.contains("Name") || !r.contains("Direction") || !r.contains("Distance")) {
        fail(where + ": spatial entry needs Name, Direction and Distance");
      }
      SpatialRelation rel;
      rel.name = parse_string(r.at("Name"), where + " neighbor");
      const auto dir = parse_direction(parse_string(r.at("Direction"), where + " Direction"));
      if (!dir) fail(where + ": unknown direction " + r.at("Direction").dump());
      rel.direction = *dir;
      rel.distance = parse_quantity(r.at("Distance"), "m", where + " Distance");
      rels.push_back(rel);
    }
    o.spatial = rels;
  }
  if (has_topology) {
    const json& t = j.at("Geographic Topology Relationship");
    if (!t.is_object() || !t.contains("Point-type") || !t.contains("Polyline-type")) {
      fail(where + ": topology block needs Point-type and Polyline-type");
    }
    TopologyRelation rel;
    for (const json& p : t.at("Point-type")) {
      if (!p.is_array() || p.size() != 2) fail(where + ": Point-type entries are [name, distance]");
      rel.points.push_back({parse_string(p[0], where + " Point-type"), parse_quantity(p[1], "m", where + " Point-type")});
    }
    for (const json& l : t.at("Polyline-type")) rel.polylines.push_back(parse_string(l, where + " Polyline-type"));
    o.topology = rel;
  }
  return o;
}

void parse_entries(const json& doc, const std::string& key, bool single,
                   std::map<std::string, FeatureEntry, IdLess>& out) {
  if (!doc.contains(key)) return;
  const json& section = doc.at(key);
  if (!section.is_object()) fail(key + " must be an object");
  for (const auto& [id, e] : section.items()) {
    if (!e.is_object()) fail(key + " entry " + id + " is not an object");
    FeatureEntry entry;
    entry.id = id;
    for (const auto& [k, v] : e.items()) {
      if (k == "Name") {
        entry.name = parse_string(v, key + " " + id);
      } else if (k == "Coordinates") {
        std::vector<GeoPoint> coords;
        if (single && v.is_array() && v.size() == 2 && v[0].is_number()) {
          coords.push_back(parse_pair(v, key + " " + id));
        } else {
          if (!v.is_array()) fail(key + " " + id + ": Coordinates must be a list");
          for (const json& c : v) coords.push_back(parse_pair(c, key + " " + id));
        }
        entry.coordinates = coords;
      } else {
        fail(key + " entry " + id + ": unknown key '" + k + "'");
      }
    }
    out.emplace(id, std::move(entry));
  }
}

}  // namespace

bool IdLess::operator()(const std::string& a, const std::string& b) const {
  const bool na = is_number(a);
  const bool nb = is_number(b);
  if (na != nb) return na;
  if (na) {
    const std::size_t la = a.find_first_not_of('0') == std::string::npos ? 0 : a.size() - a.find_first_not_of('0');
    const std::size_t lb = b.find_first_not_of('0') == std::string::npos ? 0 : b.size() - b.find_first_not_of('0');
    if (la != lb) return la < lb;
    const int c = a.compare(a.size() - la, la, b, b.size() - lb, lb);
    if (c != 0) return c < 0;
  }
  return a < b;
}

double round_coordinate(double deg) { return round_to(deg, 1e5); }

double round_whole(double v) { return std::round(v); }

std::string AblationMask::describe() const {
  std::string out;
  auto add = [&](bool on, const char* label) {
    if (!on) return;
    if (!out.empty()) out += "+";
    out += label;
  };
  add(drop_identity, "identity");
  add(drop_geometric, "geometric");
  add(drop_visual, "visual");
  add(drop_relationship, "relationship");
  return out.empty() ? "none" : out;
}

StructuredSceneDescription assemble_ssd(const SsdInputs& in) {
  StructuredSceneDescription ssd;
  ssd.metadata = in.metadata;
  ssd.metadata.origin = {round_to(in.metadata.origin.lon, 1e7), round_to(in.metadata.origin.lat, 1e7)};
  const std::set<std::string> tiny(in.tiny_classes.begin(), in.tiny_classes.end());
  std::set<std::string> seen;
  auto rounded = [](const GeoPoint& p) { return GeoPoint{round_coordinate(p.lon), round_coordinate(p.lat)}; };

  for (const MapObject& obj : in.objects) {
    if (!seen.insert(obj.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate object id '" + obj.id + "'");
    if (const auto* line = std::get_if<Polyline>(&obj.geometry)) {
      FeatureEntry e{obj.id, obj.label(), std::vector<GeoPoint>{}};
      for (const GeoPoint& p : *line) e.coordinates->push_back(rounded(p));
      ssd.polylines.emplace(obj.id, std::move(e));
      continue;
    }
    const auto* point = std::get_if<GeoPoint>(&obj.geometry);
    if (point && tiny.count(obj.fclass)) {
      ssd.points.emplace(obj.id, FeatureEntry{obj.id, obj.label(), std::vector<GeoPoint>{rounded(*point)}});
      continue;
    }

    SceneObjectDescription d;
    d.id = obj.id;
    d.identity = IdentityBlock{obj.name, obj.fclass, obj.type};
    if (auto it = in.geometry.find(obj.id); it != in.geometry.end()) {
      GeometricBlock g;
      g.center = rounded(it->second.center);
      if (!point) {
        g.height = round_whole(it->second.height);
        g.area = round_whole(it->second.area);
        g.volume = round_whole(it->second.volume);
        g.bbox = GeoBounds{rounded(it->second.bbox.min), rounded(it->second.bbox.max)};
      }
      d.geometric = g;
    }
    if (auto it = in.visual.find(obj.id); it != in.visual.end() && it->second.available()) {
      d.visual = it->second.summary;
    }
    if (auto it = in.spatial.find(obj.id); it != in.spatial.end()) {
      std::vector<SpatialRelation> rels = it->second;
      for (SpatialRelation& r : rels) r.distance = round_whole(r.distance);
      d.spatial = rels;
    }
    if (auto it = in.topology.find(obj.id); it != in.topology.end()) {
      TopologyRelation t = it->second;
      for (PointTypeEntry& p : t.points) p.distance = round_whole(p.distance);
      d.topology = t;
    }
    ssd.objects.emplace(obj.id, std::move(d));
  }
  return ssd;
}

std::string serialize(const StructuredSceneDescription& ssd) {
  Writer w;
  w.open("", '{');
  w.open("Scene", '{');
  w.field("Name", quote(ssd.metadata.name));
  w.field("Origin", "[" + fixed(ssd.metadata.origin.lon, 7) + ", " + fixed(ssd.metadata.origin.lat, 7) + "]");
  w.field("Height datum", quote(ssd.metadata.datum));
  w.close('}');
  if (ssd.objects.empty()) {
    w.field("Objects", "{}");
  } else {
    w.open("Objects", '{');
    for (const auto& [id, o] : ssd.objects) write_object(w, o);
    w.close('}');
  }
  write_entries(w, "Point-type objects", ssd.points, true);
  write_entries(w, "Polyline-type objects", ssd.polylines, false);
  w.close('}');
  return w.take();
}

StructuredSceneDescription parse_ssd(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    throw ParseError(std::string("scene description: ") + e.what(), line, byte);
  }
  if (!doc.is_object() || !doc.contains("Scene") || !doc.contains("Objects")) fail("missing Scene or Objects");
  StructuredSceneDescription ssd;
  const json& scene = doc.at("Scene");
  ssd.metadata.name = parse_string(scene.at("Name"), "Scene Name");
  ssd.metadata.origin = parse_pair(scene.at("Origin"), "Scene Origin");
  ssd.metadata.datum = parse_string(scene.at("Height datum"), "Scene Height datum");
  const json& objects = doc.at("Objects");
  if (!objects.is_object()) fail("Objects must be an object");
  for (const auto& [id, o] : objects.items()) ssd.objects.emplace(id, parse_object(id, o));
  parse_entries(doc, "Point-type objects", true, ssd.points);
  parse_entries(doc, "Polyline-type objects", false, ssd.polylines);
  return ssd;
}

std::size_t estimate_tokens(std::string_view doc) {
  std::size_t code_points = 0;
  for (unsigned char c : doc) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

StructuredSceneDescription apply_ablation(StructuredSceneDescription ssd, const AblationMask& mask) {
  for (auto& [id, o] : ssd.objects) {
    if (mask.drop_identity) o.identity.reset();
    if (mask.drop_geometric) o.geometric.reset();
    if (mask.drop_visual) o.visual.reset();
    if (mask.drop_relationship) {
      o.spatial.reset();
      o.topology.reset();
    }
  }
  for (auto* section : {&ssd.points, &ssd.polylines}) {
    for (auto& [id, e] : *section) {
      if (mask.drop_identity) e.name.reset();
      if (mask.drop_geometric) e.coordinates.reset();
    }
  }
  return ssd;
}

}  // namespace urbanscene
