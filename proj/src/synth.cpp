// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include <Eigen/Geometry>
#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "urbanscene/oracle.hpp"

namespace urbanscene {

namespace {

using nlohmann::json;

struct Swatch {
  const char* name;
  cv::Vec3b bgr;
  bool roof;
};

// No swatch is pure red, which is reserved for the highlight box.
const std::array<Swatch, 14> kPalette = {{
    {"white", {235, 235, 235}, true},
    {"blue", {180, 90, 40}, true},
    {"orange", {40, 140, 240}, true},
    {"brick red", {50, 60, 160}, true},
    {"beige", {170, 200, 220}, true},
    {"teal", {140, 140, 30}, true},
    {"purple", {140, 60, 120}, true},
    {"yellow", {60, 210, 230}, true},
    {"black", {30, 30, 30}, true},
    {"light blue", {230, 190, 140}, true},
    {"gray", {128, 128, 128}, false},
    {"asphalt", {70, 70, 70}, false},
    {"green", {60, 160, 60}, false},
    {"light gray", {175, 175, 175}, false},
}};
constexpr std::size_t kRoofSwatches = 10;
constexpr std::size_t kGround = 10;
constexpr std::size_t kAsphalt = 11;
constexpr std::size_t kGreen = 12;
constexpr std::size_t kParkingColor = 13;

const std::array<const char*, 20> kTrees = {"Maple",  "Cedar",    "Willow",  "Pine",   "Birch",    "Oak",     "Elm",
                                            "Aspen",  "Laurel",   "Juniper", "Magnolia", "Cypress", "Poplar",
                                            "Sycamore", "Linden", "Hawthorn", "Alder", "Spruce", "Redwood", "Chestnut"};

struct TypeName {
  const char* tag;
  const char* suffix;
};
const std::array<TypeName, 9> kTypes = {{{"dormitory", "Dormitory"},
                                          {"teaching", "Teaching Building"},
                                          {"office", "Office"},
                                          {"library", "Library"},
                                          {"canteen", "Canteen"},
                                          {"laboratory", "Laboratory"},
                                          {"residential", "Residence"},
                                          {"gymnasium", "Gymnasium"},
                                          {"yes", "Hall"}}};

const std::array<const char*, 10> kNorthSouthRoads = {"Xueyuan Avenue", "Keji Road",   "Wenxin Road",   "Baishi Road",
                                                      "Houhai Avenue",  "Shennan Road", "Binhai Avenue", "Qiaoxiang Road",
                                                      "Nanhai Boulevard", "Chuangye Road"};
const std::array<const char*, 10> kEastWestRoads = {"Renmin Road",    "Luoyu Road",  "Bayi Road",    "Zhongshan Road",
                                                    "Jiefang Avenue", "Minzhu Road", "Youyi Avenue", "Heping Road",
                                                    "Wuluo Road",     "Guanshan Avenue"};

constexpr double kBlockX = 120.0;
constexpr double kBlockY = 100.0;
constexpr double kRoadHalfWidth = 4.0;
constexpr double kScanDatum = 30.0;

double terrain(double x, double y) { return 0.004 * x - 0.003 * y; }

std::string fmt7(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Rotated rectangle in design coordinates.
struct Rect {
  Vec2 center;
  double half_w = 0.0;
  double half_d = 0.0;
  double angle = 0.0;  // radians, counterclockwise
  Vec2 to_world(double u, double v) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {center.x + c * u - s * v, center.y + s * u + c * v};
  }
  bool contains(Vec2 p) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Vec2 d = p - center;
    const double u = c * d.x + s * d.y;
    const double v = -s * d.x + c * d.y;
    return std::abs(u) <= half_w && std::abs(v) <= half_d;
  }
  std::array<Vec2, 4> corners() const {
    return {to_world(-half_w, -half_d), to_world(half_w, -half_d), to_world(half_w, half_d), to_world(-half_w, half_d)};
  }
};

struct Lot {
  enum class Use { Building, Park, Parking, Empty };
  Use use = Use::Empty;
  Rect rect;
  std::string id;
  std::string name;
  std::string type;
  std::size_t color = kGround;
  double height = 0.0;
  double base = 0.0;
};

struct Road {
  std::string id;
  std::string name;
  std::string highway;
  std::vector<Vec2> points;
};

struct Poi {
  std::string id;
  std::string key;
  std::string value;
  std::string name;
  Vec2 at;
};

struct Layout {
  std::vector<Lot> lots;
  std::vector<Road> roads;
  std::vector<Poi> pois;
  Bounds2 extent;
};

double distance_to_polyline(Vec2 p, const std::vector<Vec2>& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  return best;
}

Layout make_layout(const SynthOptions& o, Rng& rng) {
  Layout L;
  const std::size_t blocks = (o.buildings + 2 + 3) / 4;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(blocks))));
  const std::size_t rows = (blocks + cols - 1) / cols;
  const double width = static_cast<double>(cols) * kBlockX;
  const double height = static_cast<double>(rows) * kBlockY;
  L.extent = {{-width / 2.0 - 20.0, -height / 2.0 - 20.0}, {width / 2.0 + 20.0, height / 2.0 + 20.0}};

  std::set<std::string> used_ids;
  auto way_id = [&] {
    while (true) {
      std::string id = std::to_string(100000000 + rng.below(900000000));
      if (used_ids.insert(id).second) return id;
    }
  };

  std::vector<double> xs(cols + 1), ys(rows + 1);
  for (std::size_t k = 0; k <= cols; ++k) xs[k] = -width / 2.0 + static_cast<double>(k) * kBlockX + rng.uniform(-4.0, 4.0);
  for (std::size_t k = 0; k <= rows; ++k) ys[k] = -height / 2.0 + static_cast<double>(k) * kBlockY + rng.uniform(-4.0, 4.0);
  for (std::size_t k = 0; k <= cols; ++k) {
    Road r;
    r.id = way_id();
    r.name = kNorthSouthRoads[k % kNorthSouthRoads.size()];
    if (k >= kNorthSouthRoads.size()) r.name += " " + std::to_string(k / kNorthSouthRoads.size() + 1);
    r.highway = (k == 0 || k == cols) ? "secondary" : "residential";
    r.points.push_back({xs[k], L.extent.min.y});
    for (double y : ys) r.points.push_back({xs[k], y});
    r.points.push_back({xs[k], L.extent.max.y});
    L.roads.push_back(std::move(r));
  }
  for (std::size_t k = 0; k <= rows; ++k) {
    Road r;
    r.id = way_id();
    r.name = kEastWestRoads[k % kEastWestRoads.size()];
    if (k >= kEastWestRoads.size()) r.name += " " + std::to_string(k / kEastWestRoads.size() + 1);
    r.highway = (k == 0 || k == rows) ? "secondary" : "residential";
    r.points.push_back({L.extent.min.x, ys[k]});
    for (double x : xs) r.points.push_back({x, ys[k]});
    r.points.push_back({L.extent.max.x, ys[k]});
    L.roads.push_back(std::move(r));
  }

  // Lots in block order, four per block.
  for (std::size_t b = 0; b < cols * rows; ++b) {
    const std::size_t bi = b % cols;
    const std::size_t bj = b / cols;
    const Vec2 bc{(xs[bi] + xs[bi + 1]) / 2.0, (ys[bj] + ys[bj + 1]) / 2.0};
    for (int q = 0; q < 4; ++q) {
      Lot lot;
      lot.rect.center = {bc.x + ((q & 1) ? 0.25 : -0.25) * kBlockX, bc.y + ((q & 2) ? 0.25 : -0.25) * kBlockY};
      L.lots.push_back(lot);
    }
  }

  std::size_t placed = 0;
  std::size_t parks = 0;
  for (std::size_t i = 0; i < L.lots.size(); ++i) {
    Lot& lot = L.lots[i];
    if (placed < o.buildings) {
      const std::size_t k = placed++;
      lot.use = Lot::Use::Building;
      lot.id = way_id();
      lot.rect.center = lot.rect.center + Vec2{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      lot.rect.half_w = rng.uniform(7.0, 13.0);
      lot.rect.half_d = rng.uniform(6.0, 10.0);
      lot.rect.angle = deg2rad(rng.uniform(-12.0, 12.0));
      lot.height = std::round(rng.uniform(6.0, 45.0) * 10.0) / 10.0;
      lot.color = rng.below(kRoofSwatches);
      const TypeName& t = kTypes[k % 6 == 5 ? kTypes.size() - 1 : rng.below(kTypes.size() - 1)];
      lot.type = t.tag;
      if (k % 9 != 8) {
        lot.name = std::string(kTrees[k % kTrees.size()]) + " " + t.suffix;
        if (k >= kTrees.size()) lot.name += " " + std::to_string(k / kTrees.size() + 1);
      }
    } else if (i == o.buildings || i == o.buildings + 2) {
      lot.use = Lot::Use::Park;
      lot.id = way_id();
      lot.rect.half_w = 22.0;
      lot.rect.half_d = 17.0;
      lot.color = kGreen;
      lot.name = std::string(kTrees[(kTrees.size() - 1 - parks++) % kTrees.size()]) + " Park";
    } else if (i == o.buildings + 1) {
      lot.use = Lot::Use::Parking;
      lot.id = way_id();
      lot.rect.half_w = 15.0;
      lot.rect.half_d = 10.0;
      lot.color = kParkingColor;
    }
    lot.base = terrain(lot.rect.center.x, lot.rect.center.y);
  }

  std::uint64_t node = 4000000001ULL;
  auto node_id = [&] { return std::to_string(node++); };

  // Bus stops beside east-west roads, named after the nearest named building.
  const std::size_t stops = std::max<std::size_t>(2, o.buildings / 5);
  std::set<std::string> stop_names;
  for (std::size_t s = 0; s < stops; ++s) {
    const Road& r = L.roads[cols + 1 + rng.below(rows + 1)];
    const Vec2 at{rng.uniform(xs.front() + 10.0, xs.back() - 10.0), r.points[1].y + kRoadHalfWidth + 2.0};
    const Lot* nearest = nullptr;
    for (const Lot& lot : L.lots) {
      if (lot.use != Lot::Use::Building || lot.name.empty()) continue;
      if (!nearest || norm(lot.rect.center - at) < norm(nearest->rect.center - at)) nearest = &lot;
    }
    if (!nearest) continue;
    const std::string name = nearest->name + " Bus stop";
    if (!stop_names.insert(name).second) continue;
    L.pois.push_back({node_id(), "highway", "bus_stop", name, at});
  }
  for (std::size_t i = 1; i < cols; ++i) {
    for (std::size_t j = 1; j < rows; ++j) {
      if (rng.below(2) == 0) L.pois.push_back({node_id(), "highway", "traffic_signals", "", {xs[i], ys[j]}});
    }
  }
  L.pois.push_back({node_id(), "barrier", "gate", "South Gate", {xs[0], L.extent.min.y}});
  for (const Lot& lot : L.lots) {
    if (lot.use == Lot::Use::Park) {
      L.pois.push_back({node_id(), "amenity", "fountain", lot.name + " Fountain", lot.rect.center});
      break;
    }
  }
  for (const Lot& lot : L.lots) {
    if (lot.use == Lot::Use::Building) {
      L.pois.push_back({node_id(), "amenity", "cafe", "Campus Cafe",
                        lot.rect.to_world(0.0, lot.rect.half_d + 3.0)});
      break;
    }
  }
  return L;
}

std::string map_xml(const Layout& L, const EnuFrame& design) {
  std::string nodes;
  std::string ways;
  std::uint64_t next = 3000000001ULL;
  std::map<std::pair<long long, long long>, std::string> shared;  // road vertices by centimeter key
  auto add_node = [&](Vec2 p, bool share) {
    const std::pair<long long, long long> key{std::llround(p.x * 100.0), std::llround(p.y * 100.0)};
    if (share) {
      if (auto it = shared.find(key); it != shared.end()) return it->second;
    }
    const std::string id = std::to_string(next++);
    const GeoPoint g = design.to_geo(p);
    nodes += "  <node id=\"" + id + "\" lat=\"" + fmt7(g.lat) + "\" lon=\"" + fmt7(g.lon) + "\"/>\n";
    if (share) shared[key] = id;
    return id;
  };
  auto tag = [](const std::string& k, const std::string& v) {
    return "    <tag k=\"" + xml_escape(k) + "\" v=\"" + xml_escape(v) + "\"/>\n";
  };
  for (const Road& r : L.roads) {
    std::string w = "  <way id=\"" + r.id + "\">\n";
    for (Vec2 p : r.points) w += "    <nd ref=\"" + add_node(p, true) + "\"/>\n";
    w += tag("highway", r.highway) + tag("name", r.name) + "  </way>\n";
    ways += w;
  }
  for (const Lot& lot : L.lots) {
    if (lot.use == Lot::Use::Empty) continue;
    std::string w = "  <way id=\"" + lot.id + "\">\n";
    std::string first;
    for (Vec2 p : lot.rect.corners()) {
      const std::string id = add_node(p, false);
      if (first.empty()) first = id;
      w += "    <nd ref=\"" + id + "\"/>\n";
    }
    w += "    <nd ref=\"" + first + "\"/>\n";
    if (lot.use == Lot::Use::Building) w += tag("building", lot.type);
    if (lot.use == Lot::Use::Park) w += tag("leisure", "park");
    if (lot.use == Lot::Use::Parking) w += tag("amenity", "parking");
    if (!lot.name.empty()) w += tag("name", lot.name);
    w += "  </way>\n";
    ways += w;
  }
  std::string pois;
  for (const Poi& p : L.pois) {
    const GeoPoint g = design.to_geo(p.at);
    pois += "  <node id=\"" + p.id + "\" lat=\"" + fmt7(g.lat) + "\" lon=\"" + fmt7(g.lon) + "\">\n";
    pois += tag(p.key, p.value);
    if (!p.name.empty()) pois += tag("name", p.name);
    pois += "  </node>\n";
  }
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"urbanscene-synth\">\n" + nodes +
         pois + ways + "</osm>\n";
}

Rgb to_rgb(std::size_t swatch) {
  const cv::Vec3b c = kPalette[swatch].bgr;
  return {c[2], c[1], c[0]};
}

std::size_t nearest_swatch(const cv::Vec3b& c) {
  std::size_t best = 0;
  int best_d = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < kPalette.size(); ++i) {
    int d = 0;
    for (int k = 0; k < 3; ++k) {
      const int e = static_cast<int>(c[k]) - static_cast<int>(kPalette[i].bgr[k]);
      d += e * e;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Counts of palette swatches over the pixels of `region` not covered by
// `skip`, ignoring highlight red.
std::vector<std::size_t> swatch_counts(const cv::Mat& img, const cv::Rect& region, const cv::Rect& skip) {
  std::vector<std::size_t> counts(kPalette.size(), 0);
  for (int y = region.y; y < region.y + region.height; ++y) {
    for (int x = region.x; x < region.x + region.width; ++x) {
      if (skip.contains({x, y})) continue;
      const cv::Vec3b c = img.at<cv::Vec3b>(y, x);
      if (c == cv::Vec3b(0, 0, 255)) continue;
      ++counts[nearest_swatch(c)];
    }
  }
  return counts;
}

std::size_t argmax(const std::vector<std::size_t>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string between(const std::string& s, const std::string& a, const std::string& b) {
  const auto i = s.find(a);
  if (i == std::string::npos) return {};
  const auto j = s.find(b, i + a.size());
  return s.substr(i + a.size(), j == std::string::npos ? std::string::npos : j - i - a.size());
}

std::string phrase(std::size_t swatch) {
  switch (swatch) {
    case kGround: return "open paved ground";
    case kAsphalt: return "a paved road";
    case kGreen: return "green lawns";
    case kParkingColor: return "a parking lot";
    default: return std::string(kPalette[swatch].name) + "-roofed buildings";
  }
}

std::string surface(std::size_t swatch) {
  switch (swatch) {
    case kAsphalt: return "dark asphalt";
    case kGreen: return "green lawn";
    case kParkingColor: return "light gray paving";
    default: return "gray paving";
  }
}

std::string with_article(const std::string& word) {
  const bool vowel = !word.empty() && std::string_view("aeiouAEIOU").find(word.front()) != std::string_view::npos;
  return (vowel ? "an " : "a ") + word;
}

std::string join_phrases(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

std::string most_frequent(const std::vector<std::string>& items) {
  std::string best;
  std::size_t best_n = 0;
  for (const std::string& s : items) {
    const auto n = static_cast<std::size_t>(std::count(items.begin(), items.end(), s));
    if (n > best_n) {
      best = s;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

SynthScene synthesize_scene(const SynthOptions& o) {
  if (o.buildings == 0) throw Error(ErrorCode::InvalidArgument, "synthetic scene needs at least one building");
  require_valid(o.origin);
  Rng rng(o.seed);
  const Layout L = make_layout(o, rng);
  const EnuFrame design(o.origin);

  SynthScene scene;
  scene.map_xml = map_xml(L, design);
  const EnuFrame map_frame = scene_frame(parse_osm_xml(scene.map_xml).objects);
  auto to_map = [&](Vec2 p) { return map_frame.to_local(design.to_geo(p)); };

  const double theta = deg2rad(17.0);
  scene.true_cloud_to_map.linear << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  scene.true_cloud_to_map.translation = {42.5, -18.25};
  const Affine2D map_to_scan = scene.true_cloud_to_map.inverse();
  auto to_scan = [&](Vec2 p, double z) {
    const Vec2 s = map_to_scan.apply(to_map(p));
    return LocalPoint{s.x, s.y, z + kScanDatum};
  };

  // Cloud.
  PointCloud& pc = scene.cloud;
  pc.origin = o.origin;
  auto emit = [&](Vec2 p, double z, std::size_t swatch) {
    pc.points.push_back(to_scan(p, z));
    pc.colors.push_back(to_rgb(swatch));
  };
  const std::size_t gx = static_cast<std::size_t>((L.extent.max.x - L.extent.min.x + 60.0) / o.ground_spacing) + 1;
  const std::size_t gy = static_cast<std::size_t>((L.extent.max.y - L.extent.min.y + 60.0) / o.ground_spacing) + 1;
  for (std::size_t j = 0; j < gy; ++j) {
    for (std::size_t i = 0; i < gx; ++i) {
      const Vec2 p{L.extent.min.x - 30.0 + static_cast<double>(i) * o.ground_spacing,
                   L.extent.min.y - 30.0 + static_cast<double>(j) * o.ground_spacing};
      std::size_t swatch = kGround;
      bool covered = false;
      for (const Lot& lot : L.lots) {
        if (lot.use == Lot::Use::Empty || !lot.rect.contains(p)) continue;
        if (lot.use == Lot::Use::Building) covered = true;
        swatch = lot.color;
      }
      if (covered) continue;
      for (const Road& r : L.roads) {
        if (distance_to_polyline(p, r.points) <= kRoadHalfWidth) swatch = kAsphalt;
      }
      emit(p, terrain(p.x, p.y), swatch);
    }
  }
  for (const Lot& lot : L.lots) {
    if (lot.use != Lot::Use::Building) continue;
    const Rect& r = lot.rect;
    const double top = lot.base + lot.height;
    const auto nu = static_cast<int>(std::floor(2.0 * r.half_w / o.roof_spacing));
    const auto nv = static_cast<int>(std::floor(2.0 * r.half_d / o.roof_spacing));
    for (int a = 0; a <= nu; ++a) {
      for (int b = 0; b <= nv; ++b) {
        emit(r.to_world(-r.half_w + a * o.roof_spacing, -r.half_d + b * o.roof_spacing), top, lot.color);
      }
    }
    const auto corners = r.corners();
    for (std::size_t e = 0; e < 4; ++e) {
      const Vec2 a = corners[e];
      const Vec2 b = corners[(e + 1) % 4];
      const auto steps = static_cast<int>(std::floor(norm(b - a) / o.wall_spacing));
      for (int s = 0; s < steps; ++s) {
        const Vec2 p = a + (static_cast<double>(s) / steps) * (b - a);
        for (double z = lot.base; z < top; z += 1.5) emit(p, z, kGround);
      }
    }
    SynthBuilding sb;
    sb.id = lot.id;
    sb.name = lot.name;
    sb.type = lot.type == "yes" ? "" : lot.type;
    sb.color = kPalette[lot.color].name;
    sb.height = lot.height;
    sb.area = 4.0 * r.half_w * r.half_d;
    scene.buildings.push_back(sb);
  }

  // Correspondences between the scan and map frames.
  for (const Lot& lot : L.lots) {
    if (lot.use != Lot::Use::Building) continue;
    for (Vec2 c : lot.rect.corners()) {
      const LocalPoint s = to_scan(c, lot.base + lot.height);
      scene.cloud_to_map.add(Vec2{s.x, s.y}, to_map(c));
    }
    if (scene.cloud_to_map.size() >= 8) break;
  }

  Similarity3D& S = scene.true_recon_to_cloud;
  S.scale = 0.8;
  S.rotation = Eigen::AngleAxisd(0.4, Eigen::Vector3d(0.2, -0.3, 0.93).normalized()).toRotationMatrix();
  S.translation = {-35.0, 12.0, 6.0};
  const Similarity3D cloud_to_recon = S.inverse();
  for (const Lot& lot : L.lots) {
    if (lot.use != Lot::Use::Building) continue;
    for (Vec2 c : lot.rect.corners()) {
      const LocalPoint s = to_scan(c, lot.base + lot.height);
      const Eigen::Vector3d dst(s.x, s.y, s.z);
      scene.recon_to_cloud.add(cloud_to_recon.apply(dst), dst);
    }
    if (scene.recon_to_cloud.size() >= 10) break;
  }
  if (scene.recon_to_cloud.size() < 4) {
    const LocalPoint g = to_scan({0.0, 0.0}, 0.0);
    const Eigen::Vector3d dst(g.x, g.y, g.z);
    scene.recon_to_cloud.add(cloud_to_recon.apply(dst), dst);
  }

  if (!o.images) return scene;

  // Nadir cameras on a grid, rendered in the scan frame.
  std::vector<const Lot*> draw_order;
  for (const Lot& lot : L.lots) {
    if (lot.use == Lot::Use::Building) draw_order.push_back(&lot);
  }
  std::stable_sort(draw_order.begin(), draw_order.end(),
                   [](const Lot* a, const Lot* b) { return a->base + a->height < b->base + b->height; });
  int image_no = 0;
  for (double cy = L.extent.min.y + o.camera_spacing / 2.0; cy < L.extent.max.y; cy += o.camera_spacing) {
    for (double cx = L.extent.min.x + o.camera_spacing / 2.0; cx < L.extent.max.x; cx += o.camera_spacing) {
      CameraPose pose;
      char id[32];
      std::snprintf(id, sizeof(id), "IMG_%04d", ++image_no);
      pose.image_id = id;
      pose.fx = pose.fy = o.focal;
      pose.width = o.image_width;
      pose.height = o.image_height;
      pose.cx = o.image_width / 2.0;
      pose.cy = o.image_height / 2.0;
      pose.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
      const LocalPoint c = to_scan({cx, cy}, terrain(cx, cy) + o.camera_altitude);
      pose.translation = -pose.rotation * Eigen::Vector3d(c.x, c.y, c.z);

      cv::Mat img(o.image_height, o.image_width, CV_8UC3, cv::Scalar(kPalette[kGround].bgr));
      auto pix = [&](Vec2 p, double z) {
        const LocalPoint s = to_scan(p, z);
        const auto uv = pose.project({s.x, s.y, s.z});
        return uv ? cv::Point(static_cast<int>(std::lround(uv->x)), static_cast<int>(std::lround(uv->y)))
                  : cv::Point(-100000, -100000);
      };
      auto fill = [&](const Rect& r, double z, std::size_t swatch) {
        std::vector<cv::Point> poly;
        for (Vec2 p : r.corners()) poly.push_back(pix(p, z));
        cv::fillPoly(img, std::vector<std::vector<cv::Point>>{poly}, cv::Scalar(kPalette[swatch].bgr), cv::LINE_8);
      };
      for (const Lot& lot : L.lots) {
        if (lot.use == Lot::Use::Park || lot.use == Lot::Use::Parking) fill(lot.rect, lot.base, lot.color);
      }
      const int road_px = static_cast<int>(std::lround(2.0 * kRoadHalfWidth * o.focal / o.camera_altitude));
      for (const Road& r : L.roads) {
        for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
          const Vec2 a = r.points[i];
          const Vec2 b = r.points[i + 1];
          cv::line(img, pix(a, terrain(a.x, a.y)), pix(b, terrain(b.x, b.y)), cv::Scalar(kPalette[kAsphalt].bgr),
                   road_px, cv::LINE_8);
        }
      }
      for (const Lot* lot : draw_order) fill(lot->rect, lot->base + lot->height, lot->color);
      std::vector<uchar> buf;
      cv::imencode(".png", img, buf);
      scene.images[pose.image_id + ".png"] = std::string(buf.begin(), buf.end());
      scene.poses.push_back(apply_transform(cloud_to_recon, pose));
    }
  }
  return scene;
}

void write_scene(const SynthScene& scene, const std::filesystem::path& dir, const std::string& name,
                 const std::string& caption_mode, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  write_file(dir / "map.osm", scene.map_xml);
  write_file(dir / "cloud.ply", write_ply(scene.cloud));
  write_file(dir / "cloud_to_map.csv", write_correspondences(scene.cloud_to_map));
  json inputs = {{"map", "map.osm"}, {"cloud", "cloud.ply"}, {"cloud_to_map", "cloud_to_map.csv"}};
  if (!scene.poses.empty()) {
    write_file(dir / "poses.json", write_camera_poses(scene.poses));
    write_file(dir / "recon_to_cloud.csv", write_correspondences(scene.recon_to_cloud));
    std::filesystem::create_directories(dir / "images");
    for (const auto& [file, bytes] : scene.images) write_file(dir / "images" / file, bytes);
    inputs["poses"] = "poses.json";
    inputs["images_dir"] = "images";
    inputs["recon_to_cloud"] = "recon_to_cloud.csv";
  }
  json config = {
      {"name", name},
      {"seed", seed},
      {"inputs", inputs},
      {"output", {{"ssd", "scene.ssd.json"}, {"qa", "scene.qa.json"}}},
      {"captioning",
       {{"mode", caption_mode},
        {"source", "scripted"},
        {"fixtures", "captions.fixtures.json"},
        {"vision", {{"model", "synthetic-vision"}}},
        {"language", {{"model", "synthetic-language"}}}}},
      {"respondents",
       {{"always-a", {{"kind", "constant"}, {"reply", "A#Scripted reply."}}},
        {"echo-length", {{"kind", "echo-length"}}}}},
  };
  write_file(dir / "config.json", config.dump(2) + "\n");
}

ScriptedTransport::Handler synthetic_vision_handler() {
  return [](const ChatRequest& req) -> std::string {
    if (req.messages.size() < 2) throw Error(ErrorCode::InvalidArgument, "vision request needs two messages");
    const std::string system = req.messages[0].text_content();
    std::string fclass = between(system, "highlights a ", ". Please");
    if (fclass.empty()) fclass = "object";
    const bool surroundings = system.find("surroundings of") != std::string::npos;
    std::string url;
    for (const ContentPart& p : req.messages[1].parts) {
      if (p.kind == ContentPart::Kind::Image) url = p.image_url;
    }
    const auto comma = url.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::InvalidArgument, "vision request without inline image");
    const std::string bytes = base64_decode(std::string_view(url).substr(comma + 1));
    const std::vector<uchar> buf(bytes.begin(), bytes.end());
    const cv::Mat img = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (img.empty()) throw Error(ErrorCode::Parse, "cannot decode image");

    cv::Mat mask;
    cv::inRange(img, cv::Scalar(0, 0, 255), cv::Scalar(0, 0, 255), mask);
    std::vector<cv::Point> red;
    cv::findNonZero(mask, red);
    if (red.empty()) return "The " + fclass + " is not clearly visible.";
    const cv::Rect box = cv::boundingRect(red);
    const int inset = kBoxStroke + 1;
    cv::Rect inner(box.x + inset, box.y + inset, box.width - 2 * inset, box.height - 2 * inset);
    if (inner.width <= 0 || inner.height <= 0) inner = box;
    const std::vector<std::size_t> inside = swatch_counts(img, inner, cv::Rect());
    std::size_t dominant = argmax(inside);
    std::size_t inner_total = 0;
    std::size_t roof = 0;
    for (std::size_t i = 0; i < inside.size(); ++i) {
      inner_total += inside[i];
      if (kPalette[i].roof && inside[i] > inside[roof]) roof = i;
    }
    if (inside[roof] * 100 >= inner_total * 15) dominant = roof;

    if (!surroundings) {
      const double ratio = static_cast<double>(std::max(inner.width, inner.height)) /
                           static_cast<double>(std::max(1, std::min(inner.width, inner.height)));
      const char* shape = ratio < 1.25 ? "square" : (ratio < 2.0 ? "rectangular" : "long rectangular");
      if (kPalette[dominant].roof) {
        return "A " + fclass + " with " + with_article(kPalette[dominant].name) + " flat roof and a " + shape +
               " outline.";
      }
      std::string out = with_article(shape) + " " + fclass + " covered in " + surface(dominant) + ".";
      out[0] = 'A';
      return out;
    }

    const int pad = std::max(20, std::max(box.width, box.height) * 2 / 5);
    const cv::Rect ring = cv::Rect(box.x - pad, box.y - pad, box.width + 2 * pad, box.height + 2 * pad) &
                          cv::Rect(0, 0, img.cols, img.rows);
    const std::vector<std::size_t> around = swatch_counts(img, ring, box);
    std::size_t total = 0;
    for (std::size_t c : around) total += c;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < around.size(); ++i) {
      if (i != dominant && total > 0 && static_cast<double>(around[i]) >= 0.05 * static_cast<double>(total)) {
        order.push_back(i);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return around[a] > around[b]; });
    if (order.size() > 3) order.resize(3);
    if (order.empty()) return "The " + fclass + " stands alone in an open area.";
    std::vector<std::string> parts;
    for (std::size_t i : order) parts.push_back(phrase(i));
    return "The " + fclass + " is bordered by " + join_phrases(parts) + ".";
  };
}

ScriptedTransport::Handler synthetic_summary_handler() {
  return [](const ChatRequest& req) -> std::string {
    if (req.messages.size() < 2) throw Error(ErrorCode::InvalidArgument, "summary request needs two messages");
    const std::string body = req.messages[1].text_content();
    std::vector<std::string> selfs;
    std::vector<std::string> surroundings;
    std::size_t pos = 0;
    while (pos < body.size()) {
      const std::size_t end = std::min(body.find('\n', pos), body.size());
      const std::string line = body.substr(pos, end - pos);
      pos = end + 1;
      constexpr std::string_view kSelf = "Self-caption: ";
      constexpr std::string_view kSurrounding = "Surrounding-caption: ";
      if (line.starts_with(kSelf)) selfs.push_back(line.substr(kSelf.size()));
      if (line.starts_with(kSurrounding)) surroundings.push_back(line.substr(kSurrounding.size()));
    }
    if (selfs.empty()) return std::string(kNoVisualInfo);
    std::string out = most_frequent(selfs);
    if (!surroundings.empty()) out += " " + most_frequent(surroundings);
    return out;
  };
}

}  // namespace urbanscene
