// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <queue>
#include <regex>
#include <set>

#include <json.hpp>

namespace urbanscene {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kMinPairDistance = 20.0;
constexpr double kSectorMarginDeg = 2.0;
constexpr double kPoiMargin = 5.0;
constexpr double kRouteMargin = 1.0;
constexpr std::size_t kAttemptsPerItem = 60;
constexpr std::string_view kRouteArrow = " -> ";

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::set<std::string> words(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(std::move(cur));
  return out;
}

std::string label(const SceneObjectDescription& o) {
  const std::string name = o.identity && o.identity->name ? *o.identity->name : "object";
  return name + " (ID " + o.id + ")";
}

std::vector<std::string> referenced_ids(const std::string& text) {
  static const std::regex re(R"(\(ID ([^()]+)\))");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

std::optional<std::string> option_id(const std::string& option) {
  auto ids = referenced_ids(option);
  if (ids.empty()) return std::nullopt;
  return ids.back();
}

const SceneObjectDescription* find(const StructuredSceneDescription& ssd, const std::string& id) {
  auto it = ssd.objects.find(id);
  return it == ssd.objects.end() ? nullptr : &it->second;
}

std::optional<GeoPoint> center_of(const StructuredSceneDescription& ssd, const std::string& id) {
  const auto* o = find(ssd, id);
  if (!o || !o->geometric) return std::nullopt;
  return o->geometric->center;
}

std::optional<double> option_meters(const std::string& option) {
  static const std::regex re(R"((\d+(?:\.\d+)?)\s*(km|m)\b)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(option, m, re)) return std::nullopt;
  double v = std::stod(m[1].str());
  if (lower(m[2].str()) == "km") v *= 1000.0;
  return v;
}

std::vector<std::string> split_route(const std::string& option) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = option.find("->", pos);
    out.push_back(trim(std::string_view(option).substr(pos, hit == std::string::npos ? std::string::npos : hit - pos)));
    if (hit == std::string::npos) break;
    pos = hit + 2;
  }
  return out;
}

std::string join_route(const std::vector<std::string>& roads) {
  std::string out;
  for (std::size_t i = 0; i < roads.size(); ++i) {
    if (i) out += kRouteArrow;
    out += roads[i];
  }
  return out;
}

char letter(std::size_t i) { return static_cast<char>('A' + i); }

OracleAnswer none(std::string why) { return {'F', std::move(why)}; }

double sector_margin(double bearing_deg) {
  const double r = std::fmod(bearing_deg + 22.5, 45.0);
  return std::min(r, 45.0 - r);
}

// Question templates. The answerer parses exactly these forms.
std::string distance_question(const std::string& a, const std::string& b) {
  return "Calculate the straight-line distance from " + a + " to " + b + ".";
}
std::string direction_question(const std::string& a, const std::string& b) {
  return "If I am at " + a + ", in which direction should I walk to reach " + b + "?";
}
std::string poi_question(const std::string& fclass, const GeoPoint& p) {
  return "Which " + fclass + " is closest to the coordinates (" + format("%.5f", p.lon) + ", " +
         format("%.5f", p.lat) + ")?";
}
std::string path_question(const std::string& a, const std::string& b) {
  return "Which route along the roads is the shortest from " + a + " to " + b + "?";
}
std::string grounding_question(const std::string& query) {
  return "Which object matches this description: \"" + query + "\"?";
}

struct PoiQuery {
  std::string fclass;
  GeoPoint point;
};

std::optional<PoiQuery> parse_poi(const std::string& q) {
  static const std::regex re(R"(Which (.+) is closest to the coordinates \((-?\d+(?:\.\d+)?), (-?\d+(?:\.\d+)?)\)\?)");
  std::smatch m;
  if (!std::regex_search(q, m, re)) return std::nullopt;
  return PoiQuery{m[1].str(), {std::stod(m[2].str()), std::stod(m[3].str())}};
}

std::optional<std::string> parse_grounding(const std::string& q) {
  static const std::regex re(R"re(description: "(.*)"\?\s*$)re");
  std::smatch m;
  if (!std::regex_search(q, m, re)) return std::nullopt;
  return m[1].str();
}

// Nearest object of a class to a point, ties toward the lower id.
struct Nearest {
  const SceneObjectDescription* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  double runner_up = std::numeric_limits<double>::infinity();
};

Nearest nearest_of_class(const StructuredSceneDescription& ssd, const std::string& fclass, const GeoPoint& p) {
  Nearest n;
  for (const auto& [id, o] : ssd.objects) {
    if (!o.identity || o.identity->fclass != fclass || !o.geometric) continue;
    const double d = haversine_distance(p, o.geometric->center);
    if (d < n.best_distance) {
      n.runner_up = n.best_distance;
      n.best_distance = d;
      n.best = &o;
    } else if (d < n.runner_up) {
      n.runner_up = d;
    }
  }
  return n;
}

// Best grounding candidate among the options, ties toward the lower id.
struct GroundingPick {
  std::size_t option = 0;
  std::size_t overlap = 0;
  bool found = false;
};

GroundingPick pick_grounding(const StructuredSceneDescription& ssd, const std::string& query,
                             const std::array<std::string, 4>& options) {
  GroundingPick pick;
  std::string best_id;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto id = option_id(options[i]);
    if (!id) continue;
    const auto* o = find(ssd, *id);
    if (!o || !o->visual) continue;
    const std::size_t overlap = word_overlap(query, *o->visual);
    if (!pick.found || overlap > pick.overlap || (overlap == pick.overlap && IdLess{}(*id, best_id))) {
      pick = {i, overlap, true};
      best_id = *id;
    }
  }
  return pick;
}

// Second-best route length over all routes that differ from `best` in at
// least one edge.
double second_best_length(const RoadGraph& g, const Route& best, std::vector<Route>* alternatives) {
  double second = std::numeric_limits<double>::infinity();
  std::vector<bool> banned(g.edges.size(), false);
  for (std::size_t e : best.edges) {
    banned[e] = true;
    try {
      Route alt = shortest_path(g, best.nodes.front(), best.nodes.back(), &banned);
      second = std::min(second, alt.length);
      if (alternatives) alternatives->push_back(std::move(alt));
    } catch (const Error&) {
    }
    banned[e] = false;
  }
  return second;
}

}  // namespace

// Road graph.

std::size_t RoadGraph::nearest_node(const GeoPoint& p) const {
  if (nodes.empty()) throw Error(ErrorCode::NotFound, "road graph has no nodes");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = haversine_distance(p, nodes[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

RoadGraph build_road_graph(const std::vector<RoadLine>& input, double snap) {
  std::vector<RoadLine> lines;
  for (const RoadLine& l : input) {
    RoadLine clean{l.name, {}};
    for (const GeoPoint& p : l.points) {
      if (clean.points.empty() || !(clean.points.back() == p)) clean.points.push_back(p);
    }
    if (clean.points.size() >= 2) lines.push_back(std::move(clean));
  }
  RoadGraph g;
  if (lines.empty()) return g;

  GeoBounds gb{lines[0].points[0], lines[0].points[0]};
  for (const RoadLine& l : lines) gb = bounds(l.points, gb);
  const EnuFrame frame = frame_for(gb);
  std::vector<std::vector<Vec2>> local(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (const GeoPoint& p : lines[i].points) local[i].push_back(frame.to_local(p));
  }

  // Cut positions along each line as seg + t, with the point where known
  // exactly in lon/lat.
  struct Cut {
    double s;
    Vec2 p;
    std::optional<GeoPoint> geo;
  };
  std::vector<std::vector<Cut>> cuts(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    cuts[i].push_back({0.0, local[i].front(), lines[i].points.front()});
    cuts[i].push_back({static_cast<double>(local[i].size() - 1), local[i].back(), lines[i].points.back()});
  }
  struct Seg {
    std::size_t line;
    std::size_t k;
    Bounds2 box;
  };
  std::vector<Seg> segs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t k = 0; k + 1 < local[i].size(); ++k) {
      const Vec2 a = local[i][k];
      const Vec2 b = local[i][k + 1];
      segs.push_back({i, k, {{std::min(a.x, b.x) - snap, std::min(a.y, b.y) - snap},
                             {std::max(a.x, b.x) + snap, std::max(a.y, b.y) + snap}}});
    }
  }
  auto overlaps = [](const Bounds2& a, const Bounds2& b) {
    return !(a.max.x < b.min.x || b.max.x < a.min.x || a.max.y < b.min.y || b.max.y < a.min.y);
  };
  auto share_vertex = [&](const Seg& a, const Seg& b) {
    if (a.line != b.line) return false;
    const std::size_t n = local[a.line].size();
    const std::size_t lo = std::min(a.k, b.k);
    const std::size_t hi = std::max(a.k, b.k);
    if (hi - lo <= 1) return true;
    return lo == 0 && hi == n - 2 && local[a.line].front() == local[a.line].back();
  };

  for (std::size_t x = 0; x < segs.size(); ++x) {
    for (std::size_t y = x + 1; y < segs.size(); ++y) {
      const Seg& s1 = segs[x];
      const Seg& s2 = segs[y];
      if (share_vertex(s1, s2) || !overlaps(s1.box, s2.box)) continue;
      const auto hit = segment_intersection(local[s1.line][s1.k], local[s1.line][s1.k + 1], local[s2.line][s2.k],
                                            local[s2.line][s2.k + 1]);
      if (!hit) continue;
      cuts[s1.line].push_back({static_cast<double>(s1.k) + hit->t, hit->point, std::nullopt});
      cuts[s2.line].push_back({static_cast<double>(s2.k) + hit->u, hit->point, std::nullopt});
    }
  }
  // Endpoints that stop short of, or overshoot onto, another road.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t last_seg = local[i].size() - 2;
    for (const bool first : {true, false}) {
      const Vec2 e = first ? local[i].front() : local[i].back();
      for (const Seg& s : segs) {
        if (s.line == i && (first ? s.k == 0 : s.k == last_seg)) continue;
        if (!s.box.contains(e)) continue;
        const Vec2 a = local[s.line][s.k];
        const Vec2 b = local[s.line][s.k + 1];
        const Vec2 c = closest_point_on_segment(e, a, b);
        if (norm(e - c) > snap) continue;
        const double len = norm(b - a);
        const double t = len > 0.0 ? norm(c - a) / len : 0.0;
        cuts[s.line].push_back({static_cast<double>(s.k) + t, c, std::nullopt});
      }
    }
  }

  std::vector<Vec2> node_local;
  auto node_for = [&](const Cut& c) {
    for (std::size_t n = 0; n < node_local.size(); ++n) {
      if (norm(node_local[n] - c.p) <= snap) return n;
    }
    node_local.push_back(c.p);
    g.nodes.push_back(c.geo ? *c.geo : frame.to_geo(c.p));
    return node_local.size() - 1;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto& cs = cuts[i];
    std::stable_sort(cs.begin(), cs.end(), [](const Cut& a, const Cut& b) { return a.s < b.s; });
    std::vector<Cut> unique;
    for (const Cut& c : cs) {
      if (unique.empty() || c.s - unique.back().s > 1e-12) unique.push_back(c);
    }
    std::size_t prev_node = node_for(unique.front());
    double prev_s = unique.front().s;
    for (std::size_t k = 1; k < unique.size(); ++k) {
      const std::size_t node = node_for(unique[k]);
      RoadEdge edge;
      edge.a = prev_node;
      edge.b = node;
      edge.road = lines[i].name;
      edge.chain.push_back(g.nodes[prev_node]);
      for (std::size_t v = static_cast<std::size_t>(std::floor(prev_s)) + 1; static_cast<double>(v) < unique[k].s - 1e-12;
           ++v) {
        if (static_cast<double>(v) > prev_s + 1e-12) edge.chain.push_back(lines[i].points[v]);
      }
      edge.chain.push_back(g.nodes[node]);
      for (std::size_t c = 0; c + 1 < edge.chain.size(); ++c) {
        edge.length += haversine_distance(edge.chain[c], edge.chain[c + 1]);
      }
      if (edge.a != edge.b) g.edges.push_back(std::move(edge));
      prev_node = node;
      prev_s = unique[k].s;
    }
  }
  g.adjacency.assign(g.nodes.size(), {});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    g.adjacency[g.edges[e].a].push_back(e);
    g.adjacency[g.edges[e].b].push_back(e);
  }
  return g;
}

RoadGraph build_road_graph(const StructuredSceneDescription& ssd, double snap) {
  std::vector<RoadLine> lines;
  for (const auto& [id, e] : ssd.polylines) {
    if (!e.name || !e.coordinates) continue;
    lines.push_back({*e.name, *e.coordinates});
  }
  return build_road_graph(lines, snap);
}

std::vector<std::string> Route::roads() const {
  std::vector<std::string> out;
  if (!graph) return out;
  for (std::size_t e : edges) {
    const std::string& road = graph->edges[e].road;
    if (out.empty() || out.back() != road) out.push_back(road);
  }
  return out;
}

Route shortest_path(const RoadGraph& g, std::size_t a, std::size_t b, const std::vector<bool>* banned) {
  if (a >= g.nodes.size() || b >= g.nodes.size()) throw Error(ErrorCode::InvalidArgument, "route node out of range");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.nodes.size(), inf);
  std::vector<std::size_t> via(g.nodes.size(), std::numeric_limits<std::size_t>::max());
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[a] = 0.0;
  pq.push({0.0, a});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == b) break;
    for (std::size_t e : g.adjacency[u]) {
      if (banned && (*banned)[e]) continue;
      const RoadEdge& edge = g.edges[e];
      const std::size_t v = edge.a == u ? edge.b : edge.a;
      const double nd = d + edge.length;
      if (nd < dist[v]) {
        dist[v] = nd;
        via[v] = e;
        pq.push({nd, v});
      }
    }
  }
  if (dist[b] == inf) throw Error(ErrorCode::NotFound, "no route");
  Route r;
  r.graph = &g;
  r.length = dist[b];
  for (std::size_t n = b; n != a;) {
    const RoadEdge& edge = g.edges[via[n]];
    r.edges.push_back(via[n]);
    r.nodes.push_back(n);
    n = edge.a == n ? edge.b : edge.a;
  }
  r.nodes.push_back(a);
  std::reverse(r.nodes.begin(), r.nodes.end());
  std::reverse(r.edges.begin(), r.edges.end());
  return r;
}

Route shortest_path(const RoadGraph& g, const GeoPoint& a, const GeoPoint& b) {
  return shortest_path(g, g.nearest_node(a), g.nearest_node(b));
}

// QA items.

std::string_view to_string(QaCategory c) {
  switch (c) {
    case QaCategory::Distance: return "Distance";
    case QaCategory::Directional: return "Directional";
    case QaCategory::Poi: return "POI";
    case QaCategory::Path: return "Path";
    case QaCategory::Grounding: return "Grounding";
  }
  return "?";
}

std::optional<QaCategory> parse_category(std::string_view text) {
  const std::string t = lower(text);
  for (QaCategory c : kAllCategories) {
    if (lower(to_string(c)) == t) return c;
  }
  return std::nullopt;
}

void validate(const QAItem& item) {
  const std::string who = "question '" + item.id + "': ";
  if (item.answer < 'A' || item.answer > 'D') throw Error(ErrorCode::InvalidArgument, who + "answer must be A-D");
  std::set<std::string> seen;
  for (const std::string& o : item.options) {
    if (trim(o).empty()) throw Error(ErrorCode::InvalidArgument, who + "empty option");
    if (!seen.insert(trim(o)).second) throw Error(ErrorCode::InvalidArgument, who + "duplicate option '" + o + "'");
  }
  if (trim(item.question).empty()) throw Error(ErrorCode::InvalidArgument, who + "empty question");
}

std::vector<QAItem> parse_qa(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    throw ParseError(std::string("QA file: ") + e.what(), line, byte);
  }
  const ordered_json& list = doc.is_array() ? doc : doc.value("items", ordered_json::array());
  std::vector<QAItem> items;
  std::size_t index = 0;
  for (const ordered_json& j : list) {
    ++index;
    try {
      QAItem item;
      item.id = j.value("id", "q" + std::to_string(index));
      const auto cat = parse_category(j.at("category").get<std::string>());
      if (!cat) throw Error(ErrorCode::Parse, "unknown category " + j.at("category").dump());
      item.category = *cat;
      item.question = j.at("question").get<std::string>();
      const ordered_json& opts = j.at("options");
      if (!opts.is_array() || opts.size() != 4) throw Error(ErrorCode::Parse, "exactly four options are required");
      for (std::size_t i = 0; i < 4; ++i) item.options[i] = opts[i].get<std::string>();
      const std::string answer = trim(j.at("answer").get<std::string>());
      if (answer.size() != 1) throw Error(ErrorCode::Parse, "answer must be one letter");
      item.answer = static_cast<char>(std::toupper(static_cast<unsigned char>(answer[0])));
      const std::string prov = lower(j.value("provenance", "human"));
      if (prov == "human") {
        item.provenance = Provenance::Human;
      } else if (prov == "generated") {
        item.provenance = Provenance::Generated;
      } else {
        throw Error(ErrorCode::Parse, "unknown provenance '" + prov + "'");
      }
      validate(item);
      items.push_back(std::move(item));
    } catch (const ordered_json::exception& e) {
      throw ParseError("QA item " + std::to_string(index) + ": " + e.what(), 0, 0);
    } catch (const Error& e) {
      throw ParseError("QA item " + std::to_string(index) + ": " + e.what(), 0, 0);
    }
  }
  return items;
}

std::string write_qa(const std::vector<QAItem>& items) {
  ordered_json list = ordered_json::array();
  for (const QAItem& q : items) {
    ordered_json j;
    j["id"] = q.id;
    j["category"] = std::string(to_string(q.category));
    j["question"] = q.question;
    j["options"] = q.options;
    j["answer"] = std::string(1, q.answer);
    j["provenance"] = q.provenance == Provenance::Human ? "human" : "generated";
    list.push_back(std::move(j));
  }
  ordered_json doc;
  doc["items"] = std::move(list);
  return doc.dump(2) + "\n";
}

// Answering.

std::size_t word_overlap(std::string_view query, std::string_view text) {
  const auto q = words(query);
  const auto t = words(text);
  std::size_t n = 0;
  for (const std::string& w : q) n += t.count(w);
  return n;
}

Oracle::Oracle(const StructuredSceneDescription& ssd) : ssd_(ssd), roads_(build_road_graph(ssd)) {}

OracleAnswer Oracle::answer(const QAItem& q) const {
  const auto ids = referenced_ids(q.question);
  switch (q.category) {
    case QaCategory::Distance: {
      if (ids.size() < 2) return none("the question does not name two objects by ID");
      const auto a = center_of(ssd_, ids[0]);
      const auto b = center_of(ssd_, ids[1]);
      if (!a || !b) return none("the description has no center for one of the objects");
      const double d = haversine_distance(*a, *b);
      std::optional<std::size_t> best;
      double best_err = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < 4; ++i) {
        const auto v = option_meters(q.options[i]);
        if (v && std::abs(*v - d) < best_err) {
          best_err = std::abs(*v - d);
          best = i;
        }
      }
      if (!best) return none("no option states a distance");
      return {letter(*best), "Haversine distance between the centers is " + format("%.1f", d) +
                                 " m; the closest option is " + q.options[*best] + "."};
    }
    case QaCategory::Directional: {
      if (ids.size() < 2) return none("the question does not name two objects by ID");
      const auto a = center_of(ssd_, ids[0]);
      const auto b = center_of(ssd_, ids[1]);
      if (!a || !b) return none("the description has no center for one of the objects");
      if (haversine_distance(*a, *b) < 1e-6) return none("the two centers coincide");
      const double brg = bearing(*a, *b);
      const CardinalDirection dir = direction_bin(brg);
      for (std::size_t i = 0; i < 4; ++i) {
        if (parse_direction(trim(q.options[i])) == dir) {
          return {letter(i), "Initial bearing is " + format("%.1f", brg) + " degrees, which is " +
                                 std::string(to_string(dir)) + "."};
        }
      }
      return none("the bearing " + format("%.1f", brg) + " is " + std::string(to_string(dir)) +
                  ", which no option lists");
    }
    case QaCategory::Poi: {
      const auto poi = parse_poi(q.question);
      if (!poi) return none("the question gives no coordinates");
      const Nearest n = nearest_of_class(ssd_, poi->fclass, poi->point);
      if (!n.best) return none("the description has no located " + poi->fclass);
      for (std::size_t i = 0; i < 4; ++i) {
        if (option_id(q.options[i]) == n.best->id) {
          return {letter(i), "The nearest " + poi->fclass + " is " + label(*n.best) + " at " +
                                 format("%.1f", n.best_distance) + " m."};
        }
      }
      return none("the nearest " + poi->fclass + " is " + label(*n.best) + ", which no option lists");
    }
    case QaCategory::Path: {
      if (ids.size() < 2) return none("the question does not name two objects by ID");
      const auto a = center_of(ssd_, ids[0]);
      const auto b = center_of(ssd_, ids[1]);
      if (!a || !b) return none("the description has no center for one of the objects");
      if (roads_.edges.empty()) return none("the description has no named roads");
      Route r;
      try {
        r = shortest_path(roads_, *a, *b);
      } catch (const Error&) {
        return none("no route connects the two objects");
      }
      const auto roads = r.roads();
      for (std::size_t i = 0; i < 4; ++i) {
        if (split_route(q.options[i]) == roads) {
          return {letter(i), "The shortest route is " + join_route(roads) + " at " + format("%.1f", r.length) + " m."};
        }
      }
      return none("the shortest route is " + join_route(roads) + ", which no option lists");
    }
    case QaCategory::Grounding: {
      const auto query = parse_grounding(q.question);
      if (!query) return none("the question quotes no description");
      const GroundingPick pick = pick_grounding(ssd_, *query, q.options);
      if (!pick.found || pick.overlap == 0) return none("no option has visual information matching the description");
      return {letter(pick.option), "Its visual information shares " + std::to_string(pick.overlap) +
                                       " words with the description, more than any other option."};
    }
  }
  return none("unknown category");
}

OracleAnswer answer(const StructuredSceneDescription& ssd, const QAItem& q) { return Oracle(ssd).answer(q); }

// Generation.

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return static_cast<std::size_t>(x % bound);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

namespace {

class Generator {
 public:
  Generator(const StructuredSceneDescription& ssd, std::uint64_t seed)
      : ssd_(ssd), rng_(seed), oracle_(ssd), roads_(build_road_graph(ssd)) {
    for (const auto& [id, o] : ssd.objects) {
      if (o.identity && o.identity->name && o.geometric) pool_.push_back(&o);
    }
  }

  void run(QaCategory c, std::size_t count, QaGeneration& out) {
    std::set<std::string> used;
    std::size_t made = 0;
    for (std::size_t attempt = 0; made < count && attempt < count * kAttemptsPerItem; ++attempt) {
      std::optional<QAItem> item = make(c, used);
      if (!item) continue;
      ++made;
      item->id = lower(to_string(c)) + "-" + format("%03.0f", static_cast<double>(made));
      // Every item must close the loop with the answerer.
      if (oracle_.answer(*item).option != item->answer) {
        throw Error(ErrorCode::Internal, "generated item " + item->id + " does not answer to its key");
      }
      out.items.push_back(std::move(*item));
    }
    if (made == 0) {
      out.warnings.push_back({"oracle", std::string(to_string(c)), "scene cannot support this category; skipped"});
    } else if (made < count) {
      out.warnings.push_back({"oracle", std::string(to_string(c)),
                              "generated " + std::to_string(made) + " of " + std::to_string(count) + " items"});
    }
  }

  std::size_t pool_size() const { return pool_.size(); }

 private:
  std::optional<QAItem> make(QaCategory c, std::set<std::string>& used) {
    switch (c) {
      case QaCategory::Distance: return distance(used);
      case QaCategory::Directional: return directional(used);
      case QaCategory::Poi: return poi(used);
      case QaCategory::Path: return path(used);
      case QaCategory::Grounding: return grounding(used);
    }
    return std::nullopt;
  }

  QAItem finish(QaCategory c, std::string question, std::string truth, std::vector<std::string> distractors) {
    std::vector<std::string> options{std::move(truth)};
    for (auto& d : distractors) options.push_back(std::move(d));
    std::vector<std::size_t> order{0, 1, 2, 3};
    rng_.shuffle(order);
    QAItem item;
    item.category = c;
    item.question = std::move(question);
    for (std::size_t i = 0; i < 4; ++i) {
      item.options[i] = options[order[i]];
      if (order[i] == 0) item.answer = letter(i);
    }
    return item;
  }

  std::pair<const SceneObjectDescription*, const SceneObjectDescription*> pick_pair() {
    const std::size_t i = rng_.below(pool_.size());
    std::size_t j = rng_.below(pool_.size() - 1);
    if (j >= i) ++j;
    return {pool_[i], pool_[j]};
  }

  std::optional<QAItem> distance(std::set<std::string>& used) {
    const auto [a, b] = pick_pair();
    const double d = haversine_distance(a->geometric->center, b->geometric->center);
    if (d < kMinPairDistance || !used.insert(a->id + "|" + b->id).second) return std::nullopt;
    const double truth = std::round(d);
    std::vector<std::string> distractors;
    std::set<double> values{truth};
    while (distractors.size() < 3) {
      const double f = rng_.uniform(0.1, 0.4);
      const double v = std::round(rng_.below(2) ? truth * (1.0 + f) : truth * (1.0 - f));
      if (std::abs(v - truth) < 0.1 * truth - 0.5 || !values.insert(v).second) continue;
      distractors.push_back(format("%.0f", v) + " m");
    }
    return finish(QaCategory::Distance, distance_question(label(*a), label(*b)), format("%.0f", truth) + " m",
                  std::move(distractors));
  }

  std::optional<QAItem> directional(std::set<std::string>& used) {
    const auto [a, b] = pick_pair();
    const double d = haversine_distance(a->geometric->center, b->geometric->center);
    if (d < kMinPairDistance) return std::nullopt;
    const double brg = bearing(a->geometric->center, b->geometric->center);
    if (sector_margin(brg) < kSectorMarginDeg || !used.insert(a->id + "|" + b->id).second) return std::nullopt;
    const int truth = static_cast<int>(direction_bin(brg));
    std::vector<int> others;
    for (int k = 0; k < kDirectionCount; ++k) {
      if (k != truth) others.push_back(k);
    }
    rng_.shuffle(others);
    std::vector<std::string> distractors;
    for (int k = 0; k < 3; ++k) distractors.emplace_back(to_string(static_cast<CardinalDirection>(others[k])));
    return finish(QaCategory::Directional, direction_question(label(*a), label(*b)),
                  std::string(to_string(static_cast<CardinalDirection>(truth))), std::move(distractors));
  }

  std::optional<QAItem> poi(std::set<std::string>& used) {
    std::map<std::string, std::vector<const SceneObjectDescription*>> by_class;
    for (const auto* o : pool_) by_class[o->identity->fclass].push_back(o);
    std::vector<std::string> classes;
    for (const auto& [fclass, objs] : by_class) {
      if (objs.size() >= 4) classes.push_back(fclass);
    }
    if (classes.empty()) return std::nullopt;
    const std::string& fclass = classes[rng_.below(classes.size())];
    const auto& members = by_class[fclass];
    GeoBounds box{members[0]->geometric->center, members[0]->geometric->center};
    for (const auto* o : members) box = bounds(std::vector<GeoPoint>{o->geometric->center}, box);
    const GeoPoint p{round_coordinate(rng_.uniform(box.min.lon, box.max.lon)),
                     round_coordinate(rng_.uniform(box.min.lat, box.max.lat))};
    const Nearest n = nearest_of_class(ssd_, fclass, p);
    if (!n.best || !n.best->identity->name || n.runner_up - n.best_distance < kPoiMargin) return std::nullopt;
    if (!used.insert(n.best->id).second) return std::nullopt;
    std::vector<const SceneObjectDescription*> others;
    for (const auto* o : members) {
      if (o != n.best) others.push_back(o);
    }
    rng_.shuffle(others);
    std::vector<std::string> distractors;
    for (std::size_t k = 0; k < 3; ++k) distractors.push_back(label(*others[k]));
    return finish(QaCategory::Poi, poi_question(fclass, p), label(*n.best), std::move(distractors));
  }

  std::optional<QAItem> path(std::set<std::string>& used) {
    if (roads_.edges.empty()) return std::nullopt;
    const auto [a, b] = pick_pair();
    const std::size_t na = roads_.nearest_node(a->geometric->center);
    const std::size_t nb = roads_.nearest_node(b->geometric->center);
    if (na == nb) return std::nullopt;
    Route best;
    try {
      best = shortest_path(roads_, na, nb);
    } catch (const Error&) {
      return std::nullopt;
    }
    std::vector<Route> alternatives;
    if (second_best_length(roads_, best, &alternatives) < best.length + kRouteMargin) return std::nullopt;
    const auto truth = best.roads();
    if (!used.insert(a->id + "|" + b->id).second) return std::nullopt;

    std::vector<std::vector<std::string>> candidates;
    auto offer = [&](std::vector<std::string> seq) {
      if (seq.empty() || seq == truth) return;
      if (std::find(candidates.begin(), candidates.end(), seq) != candidates.end()) return;
      candidates.push_back(std::move(seq));
    };
    std::sort(alternatives.begin(), alternatives.end(), [](const Route& x, const Route& y) { return x.length < y.length; });
    for (const Route& r : alternatives) offer(r.roads());
    std::set<std::string> names;
    for (const RoadEdge& e : roads_.edges) names.insert(e.road);
    std::vector<std::string> name_list(names.begin(), names.end());
    offer(std::vector<std::string>(truth.rbegin(), truth.rend()));
    for (std::size_t tries = 0; candidates.size() < 3 && tries < 50; ++tries) {
      std::vector<std::string> seq = truth;
      const std::string& other = name_list[rng_.below(name_list.size())];
      if (rng_.below(2) == 0 || seq.size() == 1) {
        seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(rng_.below(seq.size() + 1)), other);
      } else {
        seq[rng_.below(seq.size())] = other;
      }
      std::vector<std::string> collapsed;
      for (auto& s : seq) {
        if (collapsed.empty() || collapsed.back() != s) collapsed.push_back(std::move(s));
      }
      offer(std::move(collapsed));
    }
    if (candidates.size() < 3) return std::nullopt;
    std::vector<std::string> distractors;
    for (std::size_t k = 0; k < 3; ++k) distractors.push_back(join_route(candidates[k]));
    return finish(QaCategory::Path, path_question(label(*a), label(*b)), join_route(truth), std::move(distractors));
  }

  std::optional<QAItem> grounding(std::set<std::string>& used) {
    std::vector<const SceneObjectDescription*> visible;
    for (const auto* o : pool_) {
      if (o->visual && !o->visual->empty()) visible.push_back(o);
    }
    if (visible.size() < 4) return std::nullopt;
    const auto* target = visible[rng_.below(visible.size())];
    std::string query = *target->visual;
    if (const auto stop = query.find(". "); stop != std::string::npos) query = query.substr(0, stop + 1);
    const std::size_t own = word_overlap(query, *target->visual);
    std::vector<const SceneObjectDescription*> eligible;
    for (const auto* o : visible) {
      if (o != target && word_overlap(query, *o->visual) < own) eligible.push_back(o);
    }
    if (eligible.size() < 3 || !used.insert(target->id).second) return std::nullopt;
    rng_.shuffle(eligible);
    std::vector<std::string> distractors;
    for (std::size_t k = 0; k < 3; ++k) distractors.push_back(label(*eligible[k]));
    return finish(QaCategory::Grounding, grounding_question(query), label(*target), std::move(distractors));
  }

  const StructuredSceneDescription& ssd_;
  Rng rng_;
  Oracle oracle_;
  RoadGraph roads_;
  std::vector<const SceneObjectDescription*> pool_;
};

}  // namespace

QaGeneration generate_qa(const StructuredSceneDescription& ssd, std::size_t per_category, std::uint64_t seed) {
  QaGeneration out;
  Generator gen(ssd, seed);
  if (gen.pool_size() < 4) {
    out.warnings.push_back({"oracle", "scene", "fewer than 4 named objects with centers; no questions generated"});
    return out;
  }
  for (QaCategory c : kAllCategories) gen.run(c, per_category, out);
  return out;
}

}  // namespace urbanscene
