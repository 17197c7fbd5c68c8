// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <sstream>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "urbanscene/ingest.hpp"

namespace urbanscene {

namespace {

namespace pt = boost::property_tree;
using json = nlohmann::json;
using TagMap = std::map<std::string, std::string>;

std::size_t line_start_offset(std::string_view bytes, std::size_t line) {
  std::size_t current = 1;
  for (std::size_t i = 0; i < bytes.size() && current < line; ++i) {
    if (bytes[i] == '\n') {
      ++current;
      if (current == line) return i + 1;
    }
  }
  return 0;
}

std::size_t line_of_offset(std::string_view bytes, std::size_t offset) {
  offset = std::min(offset, bytes.size());
  return 1 + static_cast<std::size_t>(std::count(bytes.begin(), bytes.begin() + offset, '\n'));
}

struct Classified {
  std::optional<std::string> name;
  std::string fclass;
  std::optional<std::string> type;
  bool area = true;
  TagMap rest;
};

std::optional<std::string> resolve(const std::string& spec, const std::string& value,
                                   const TagMap& tags, const TagRule& rule,
                                   std::vector<std::string>& consumed) {
  if (spec.empty()) return std::nullopt;
  if (spec == "$value") {
    if (std::find(rule.untyped_values.begin(), rule.untyped_values.end(), value) !=
        rule.untyped_values.end()) {
      return std::nullopt;
    }
    return value;
  }
  if (spec.rfind("tag:", 0) == 0) {
    const std::string key = spec.substr(4);
    auto it = tags.find(key);
    if (it == tags.end() || it->second.empty()) return std::nullopt;
    consumed.push_back(key);
    return it->second;
  }
  return spec;
}

std::optional<Classified> classify(const TagMap& tags, const TagTable& table) {
  for (const TagRule& rule : table.rules) {
    auto it = tags.find(rule.key);
    if (it == tags.end() || it->second.empty() || it->second == "no") continue;
    std::vector<std::string> consumed = {rule.key};
    TagRule fclass_rule = rule;
    fclass_rule.untyped_values.clear();
    auto fclass = resolve(rule.fclass, it->second, tags, fclass_rule, consumed);
    if (!fclass || fclass->empty()) continue;
    Classified out;
    out.fclass = *fclass;
    out.type = resolve(rule.type, it->second, tags, rule, consumed);
    out.area = rule.area;
    if (auto a = tags.find("area"); a != tags.end()) {
      if (a->second == "yes") out.area = true;
      if (a->second == "no") out.area = false;
    }
    for (const std::string& key : table.name_keys) {
      auto n = tags.find(key);
      if (n != tags.end() && !n->second.empty()) {
        out.name = n->second;
        break;
      }
    }
    for (const auto& [k, v] : tags) {
      const bool is_name = std::find(table.name_keys.begin(), table.name_keys.end(), k) !=
                           table.name_keys.end();
      const bool used = std::find(consumed.begin(), consumed.end(), k) != consumed.end();
      if (!is_name && !used) out.rest.emplace(k, v);
    }
    return out;
  }
  return std::nullopt;
}

MapObject make_object(std::string id, Classified c, Geometry geometry) {
  MapObject obj;
  obj.id = std::move(id);
  obj.name = std::move(c.name);
  obj.fclass = std::move(c.fclass);
  obj.type = std::move(c.type);
  obj.geometry = std::move(geometry);
  obj.tags = std::move(c.rest);
  return obj;
}

// Ids are unique within a scene. OSM numbers nodes, ways and relations
// independently, so a later collision gets its element letter as a prefix.
class IdRegistry {
 public:
  std::string claim(const std::string& raw, char kind_prefix) {
    std::string id = raw;
    if (!used_.insert(id).second) {
      id = std::string(1, kind_prefix) + raw;
      int n = 2;
      while (!used_.insert(id).second) {
        id = std::string(1, kind_prefix) + raw + "_" + std::to_string(n++);
      }
    }
    return id;
  }

 private:
  std::unordered_set<std::string> used_;
};

// Turns a ring into a polygon or demotes it, recording why.
std::optional<Geometry> ring_geometry(const GeoRing& ring, bool area, const std::string& subject,
                                      Warnings& warnings) {
  const bool closed = ring.size() >= 3 && ring.front() == ring.back();
  if (closed && area) {
    if (distinct_vertex_count(ring) < 3) {
      warnings.push_back({"ingest", subject, "closed way with fewer than 3 distinct nodes demoted to polyline"});
      return Geometry{Polyline(ring.begin(), ring.end())};
    }
    Polygon2D poly;
    poly.exterior = ring;
    poly = normalize(poly);
    try {
      validate(poly);
    } catch (const Error& e) {
      warnings.push_back({"ingest", subject, std::string("invalid footprint demoted to polyline: ") + e.what()});
      return Geometry{Polyline(ring.begin(), ring.end())};
    }
    return Geometry{poly};
  }
  if (ring.size() < 2) {
    warnings.push_back({"ingest", subject, "way with fewer than 2 nodes skipped"});
    return std::nullopt;
  }
  return Geometry{Polyline(ring.begin(), ring.end())};
}

double parse_attr_double(const pt::ptree& attrs, const char* key, const std::string& subject) {
  const auto text = attrs.get_optional<std::string>(key);
  if (!text) throw ParseError(subject + ": missing attribute '" + key + "'", 0, 0);
  double value = 0.0;
  const char* first = text->data();
  const char* last = first + text->size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(subject + ": attribute '" + key + "' is not a number: " + *text, 0, 0);
  }
  return value;
}

TagMap read_tags(const pt::ptree& element) {
  TagMap tags;
  for (const auto& [child_name, child] : element) {
    if (child_name != "tag") continue;
    const auto k = child.get_optional<std::string>("<xmlattr>.k");
    const auto v = child.get_optional<std::string>("<xmlattr>.v");
    if (k && v) tags[*k] = *v;
  }
  return tags;
}

struct RawWay {
  std::string id;
  std::vector<std::string> refs;
  TagMap tags;
};

std::optional<GeoRing> resolve_refs(const RawWay& way,
                                    const std::unordered_map<std::string, GeoPoint>& nodes,
                                    Warnings& warnings) {
  GeoRing ring;
  ring.reserve(way.refs.size());
  for (const std::string& ref : way.refs) {
    auto it = nodes.find(ref);
    if (it == nodes.end()) {
      warnings.push_back({"ingest", "way " + way.id, "references missing node " + ref + "; skipped"});
      return std::nullopt;
    }
    ring.push_back(it->second);
  }
  return ring;
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Polygon: return "polygon";
    case GeometryKind::Polyline: return "polyline";
    case GeometryKind::Point: return "point";
  }
  return "unknown";
}

GeometryKind MapObject::kind() const {
  switch (geometry.index()) {
    case 0: return GeometryKind::Polygon;
    case 1: return GeometryKind::Polyline;
    default: return GeometryKind::Point;
  }
}

TagTable TagTable::defaults() {
  TagTable t;
  auto rule = [](std::string key, std::string type = "", bool area = true) {
    TagRule r;
    r.key = std::move(key);
    r.type = std::move(type);
    r.area = area;
    return r;
  };
  TagRule building;
  building.key = "building";
  building.fclass = "building";
  building.type = "$value";
  t.rules.push_back(building);
  t.rules.push_back(rule("amenity"));
  t.rules.push_back(rule("highway", "", false));
  t.rules.push_back(rule("railway", "", false));
  t.rules.push_back(rule("waterway", "", false));
  t.rules.push_back(rule("barrier", "", false));
  t.rules.push_back(rule("leisure"));
  t.rules.push_back(rule("landuse"));
  t.rules.push_back(rule("natural"));
  t.rules.push_back(rule("shop"));
  t.rules.push_back(rule("tourism"));
  t.rules.push_back(rule("man_made"));
  t.rules.push_back(rule("historic"));
  return t;
}

TagTable TagTable::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("tag table: ") + e.what(), line_of_offset(text, e.byte), e.byte);
  }
  TagTable t;
  if (doc.contains("name_keys")) t.name_keys = doc.at("name_keys").get<std::vector<std::string>>();
  if (!doc.contains("rules") || !doc.at("rules").is_array()) {
    throw ParseError("tag table: missing 'rules' array", 1, 0);
  }
  for (const json& r : doc.at("rules")) {
    TagRule rule;
    rule.key = r.at("key").get<std::string>();
    rule.fclass = r.value("fclass", std::string("$value"));
    rule.type = r.value("type", std::string());
    rule.area = r.value("area", true);
    if (r.contains("untyped_values")) {
      rule.untyped_values = r.at("untyped_values").get<std::vector<std::string>>();
    }
    t.rules.push_back(std::move(rule));
  }
  return t;
}

EnuFrame scene_frame(const std::vector<MapObject>& objects) {
  if (objects.empty()) throw Error(ErrorCode::InvalidArgument, "scene has no map objects");
  std::optional<GeoBounds> box;
  auto add = [&](const std::vector<GeoPoint>& pts) {
    if (pts.empty()) return;
    box = box ? bounds(pts, *box) : bounds(pts);
  };
  for (const MapObject& o : objects) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Polygon2D>) {
            add(g.exterior);
          } else if constexpr (std::is_same_v<T, Polyline>) {
            add(g);
          } else {
            add(std::vector<GeoPoint>{g});
          }
        },
        o.geometry);
  }
  return frame_for(*box);
}

std::vector<std::string> default_tiny_classes() {
  return {"bus_stop", "traffic_signals", "gate", "fountain"};
}

MapParseResult parse_map(std::string_view bytes, const TagTable& table) {
  const auto first = bytes.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  if (bytes.substr(first, 3) == "\xEF\xBB\xBF") return parse_map(bytes.substr(first + 3), table);
  if (bytes[first] == '<') return parse_osm_xml(bytes, table);
  if (bytes[first] == '{') return parse_geojson(bytes, table);
  throw ParseError("unrecognized map extract: expected OSM XML or GeoJSON",
                   line_of_offset(bytes, first), first);
}

MapParseResult parse_osm_xml(std::string_view bytes, const TagTable& table) {
  pt::ptree tree;
  {
    std::istringstream in{std::string(bytes)};
    try {
      pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
      throw ParseError("malformed OSM XML: " + e.message() + " (line " + std::to_string(e.line()) + ")",
                       e.line(), line_start_offset(bytes, e.line()));
    }
  }
  const auto root = tree.get_child_optional("osm");
  if (!root) throw ParseError("malformed OSM XML: missing <osm> root element", 1, 0);

  MapParseResult result;
  IdRegistry ids;
  std::unordered_map<std::string, GeoPoint> nodes;
  std::vector<RawWay> ways;
  std::unordered_map<std::string, std::size_t> way_index;
  std::vector<std::pair<std::string, const pt::ptree*>> relations;

  for (const auto& [name, element] : *root) {
    if (name == "node") {
      const pt::ptree attrs = element.get_child("<xmlattr>", pt::ptree());
      const std::string id = attrs.get<std::string>("id", "");
      if (id.empty()) throw ParseError("malformed OSM XML: node without id", 0, 0);
      const GeoPoint p{parse_attr_double(attrs, "lon", "node " + id),
                       parse_attr_double(attrs, "lat", "node " + id)};
      if (!is_valid(p)) {
        result.warnings.push_back({"ingest", "node " + id, "coordinates out of range; skipped"});
        continue;
      }
      nodes[id] = p;
      const TagMap tags = read_tags(element);
      if (tags.empty()) continue;
      if (auto c = classify(tags, table)) {
        result.objects.push_back(make_object(ids.claim(id, 'n'), std::move(*c), p));
      }
    } else if (name == "way") {
      RawWay way;
      way.id = element.get<std::string>("<xmlattr>.id", "");
      if (way.id.empty()) throw ParseError("malformed OSM XML: way without id", 0, 0);
      for (const auto& [child_name, child] : element) {
        if (child_name == "nd") way.refs.push_back(child.get<std::string>("<xmlattr>.ref", ""));
      }
      way.tags = read_tags(element);
      way_index[way.id] = ways.size();
      ways.push_back(std::move(way));
    } else if (name == "relation") {
      relations.emplace_back(element.get<std::string>("<xmlattr>.id", ""), &element);
    }
  }

  for (const RawWay& way : ways) {
    if (way.tags.empty()) continue;
    auto c = classify(way.tags, table);
    if (!c) continue;
    const auto ring = resolve_refs(way, nodes, result.warnings);
    if (!ring) continue;
    auto geometry = ring_geometry(*ring, c->area, "way " + way.id, result.warnings);
    if (!geometry) continue;
    result.objects.push_back(make_object(ids.claim(way.id, 'w'), std::move(*c), std::move(*geometry)));
  }

  for (const auto& [rel_id, element] : relations) {
    TagMap tags = read_tags(*element);
    if (tags["type"] != "multipolygon") continue;
    tags.erase("type");
    const std::string subject = "relation " + rel_id;
    std::vector<const RawWay*> outers, inners;
    bool missing = false;
    for (const auto& [child_name, child] : *element) {
      if (child_name != "member" || child.get<std::string>("<xmlattr>.type", "") != "way") continue;
      const std::string ref = child.get<std::string>("<xmlattr>.ref", "");
      auto it = way_index.find(ref);
      if (it == way_index.end()) {
        missing = true;
        continue;
      }
      const std::string role = child.get<std::string>("<xmlattr>.role", "outer");
      (role == "inner" ? inners : outers).push_back(&ways[it->second]);
    }
    if (missing) {
      result.warnings.push_back({"ingest", subject, "references missing way; skipped"});
      continue;
    }
    if (outers.size() != 1) {
      result.warnings.push_back({"ingest", subject, "only single-outer multipolygons are supported; skipped"});
      continue;
    }
    auto c = classify(tags, table);
    if (!c) c = classify(outers.front()->tags, table);
    if (!c) continue;
    auto outer = resolve_refs(*outers.front(), nodes, result.warnings);
    if (!outer || outer->size() < 4 || !(outer->front() == outer->back())) {
      result.warnings.push_back({"ingest", subject, "outer ring is not closed; skipped"});
      continue;
    }
    Polygon2D poly;
    poly.exterior = *outer;
    for (const RawWay* inner : inners) {
      auto ring = resolve_refs(*inner, nodes, result.warnings);
      if (!ring || ring->size() < 4 || !(ring->front() == ring->back())) {
        result.warnings.push_back({"ingest", subject, "inner way " + inner->id + " is not a closed ring; ignored"});
        continue;
      }
      poly.holes.push_back(*ring);
    }
    poly = normalize(poly);
    try {
      validate(poly);
      (void)polygon_area(poly);
    } catch (const Error& e) {
      result.warnings.push_back({"ingest", subject, std::string("invalid multipolygon skipped: ") + e.what()});
      continue;
    }
    result.objects.push_back(make_object(ids.claim(rel_id, 'r'), std::move(*c), poly));
  }
  return result;
}

namespace {

GeoPoint json_position(const json& j) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::Parse, "position must be [lon, lat]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

GeoRing json_ring(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "ring must be an array of positions");
  GeoRing ring;
  for (const json& p : j) ring.push_back(json_position(p));
  return ring;
}

Polygon2D json_polygon(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw Error(ErrorCode::Parse, "polygon needs at least one ring");
  Polygon2D poly;
  poly.exterior = json_ring(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(json_ring(rings[i]));
  return normalize(poly);
}

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  return v.dump();
}

}  // namespace

MapParseResult parse_geojson(std::string_view bytes, const TagTable& table) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    const std::size_t off = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, bytes.size());
    throw ParseError(std::string("malformed GeoJSON: ") + e.what(), line_of_offset(bytes, off), off);
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc.at("features").is_array()) {
    throw ParseError("malformed GeoJSON: expected a FeatureCollection with a features array", 1, 0);
  }

  MapParseResult result;
  IdRegistry ids;
  std::size_t index = 0;
  for (const json& feature : doc.at("features")) {
    ++index;
    const json props = feature.value("properties", json::object());
    std::string raw_id;
    if (feature.contains("id") && !feature.at("id").is_null()) {
      raw_id = json_scalar_to_string(feature.at("id"));
    } else {
      for (const char* key : {"osm_id", "id", "@id"}) {
        if (props.is_object() && props.contains(key) && !props.at(key).is_null()) {
          raw_id = json_scalar_to_string(props.at(key));
          break;
        }
      }
    }
    if (auto slash = raw_id.find('/'); slash != std::string::npos) raw_id = raw_id.substr(slash + 1);
    if (raw_id.empty()) raw_id = "feature-" + std::to_string(index);
    const std::string subject = "feature " + raw_id;

    TagMap tags;
    if (props.is_object()) {
      for (const auto& [k, v] : props.items()) {
        if (!v.is_null() && !v.is_object() && !v.is_array()) tags[k] = json_scalar_to_string(v);
      }
    }

    // Exports that already carry name/fclass/type columns map one-to-one.
    std::optional<Classified> c;
    if (tags.count("fclass") && !tags["fclass"].empty()) {
      Classified direct;
      direct.fclass = tags["fclass"];
      for (const std::string& key : table.name_keys) {
        if (tags.count(key) && !tags[key].empty()) {
          direct.name = tags[key];
          break;
        }
      }
      if (tags.count("type") && !tags["type"].empty()) direct.type = tags["type"];
      for (const auto& [k, v] : tags) {
        if (k == "fclass" || k == "type" || k == "osm_id" || k == "id" ||
            std::find(table.name_keys.begin(), table.name_keys.end(), k) != table.name_keys.end()) {
          continue;
        }
        direct.rest.emplace(k, v);
      }
      c = std::move(direct);
    } else {
      c = classify(tags, table);
    }
    if (!c) continue;

    const json geom = feature.value("geometry", json());
    if (!geom.is_object()) {
      result.warnings.push_back({"ingest", subject, "feature without geometry skipped"});
      continue;
    }
    const std::string gtype = geom.value("type", "");
    const json coords = geom.value("coordinates", json());
    std::optional<Geometry> geometry;
    try {
      if (gtype == "Point") {
        geometry = json_position(coords);
      } else if (gtype == "LineString") {
        const GeoRing ring = json_ring(coords);
        geometry = ring_geometry(ring, false, subject, result.warnings);
      } else if (gtype == "MultiLineString") {
        std::optional<GeoRing> longest;
        for (const json& line : coords) {
          GeoRing ring = json_ring(line);
          if (!longest || ring.size() > longest->size()) longest = std::move(ring);
        }
        if (coords.size() > 1) {
          result.warnings.push_back({"ingest", subject, "MultiLineString reduced to its longest part"});
        }
        if (longest) geometry = ring_geometry(*longest, false, subject, result.warnings);
      } else if (gtype == "Polygon" || gtype == "MultiPolygon") {
        Polygon2D poly;
        if (gtype == "Polygon") {
          poly = json_polygon(coords);
        } else {
          double best = -1.0;
          for (const json& part : coords) {
            Polygon2D candidate = json_polygon(part);
            double a = 0.0;
            try {
              a = polygon_area(candidate);
            } catch (const Error&) {
            }
            if (a > best) {
              best = a;
              poly = std::move(candidate);
            }
          }
          if (coords.size() > 1) {
            result.warnings.push_back({"ingest", subject, "MultiPolygon reduced to its largest part"});
          }
        }
        if (poly.holes.empty()) {
          geometry = ring_geometry(poly.exterior, c->area, subject, result.warnings);
        } else {
          validate(poly);
          (void)polygon_area(poly);
          geometry = poly;
        }
      } else {
        result.warnings.push_back({"ingest", subject, "unsupported geometry type '" + gtype + "' skipped"});
        continue;
      }
    } catch (const Error& e) {
      result.warnings.push_back({"ingest", subject, std::string("invalid geometry skipped: ") + e.what()});
      continue;
    }
    if (!geometry) continue;
    bool valid = true;
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, GeoPoint>) {
            valid = is_valid(g);
          } else if constexpr (std::is_same_v<T, Polyline>) {
            valid = std::all_of(g.begin(), g.end(), [](const GeoPoint& p) { return is_valid(p); });
          } else {
            valid = std::all_of(g.exterior.begin(), g.exterior.end(),
                                [](const GeoPoint& p) { return is_valid(p); });
          }
        },
        *geometry);
    if (!valid) {
      result.warnings.push_back({"ingest", subject, "coordinates out of range; skipped"});
      continue;
    }
    result.objects.push_back(make_object(ids.claim(raw_id, 'f'), std::move(*c), std::move(*geometry)));
  }
  return result;
}

}  // namespace urbanscene
