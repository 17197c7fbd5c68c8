// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "support/brute.hpp"
#include "support/random_ssd.hpp"
#include "urbanscene/align.hpp"
#include "urbanscene/eval.hpp"
#include "urbanscene/extract.hpp"
#include "urbanscene/oracle.hpp"
#include "urbanscene/pipeline.hpp"
#include "urbanscene/relations.hpp"
#include "urbanscene/ssd.hpp"
#include "urbanscene/synth.hpp"

using namespace urbanscene;
namespace fs = std::filesystem;

namespace {

const fs::path kData = URBANSCENE_TEST_DATA;

// Token count of the 100-building scene (seed 3) under o200k_base, recorded
// with tools/record_oracles.py.
constexpr std::size_t kRecordedTokens = 34'076;
constexpr const char* kRecordedSha = "0a4f119e8f89918d7c1a93647a8eefdaf7df447e05aa2cc8a42e3a265ebfcba0";

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int number;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// A synthetic scene written to a scratch directory.
struct Workspace {
  fs::path dir;
  SynthScene scene;
  Workspace(std::size_t buildings, std::uint64_t seed, bool images, const std::string& mode,
            const std::string& name = "synthetic-campus") {
    dir = brute::temp_dir("accept");
    SynthOptions o;
    o.buildings = buildings;
    o.seed = seed;
    o.images = images;
    scene = synthesize_scene(o);
    write_scene(scene, dir, name, mode, seed);
  }
  ~Workspace() { fs::remove_all(dir); }
  SceneConfig config() const { return SceneConfig::load(dir / "config.json"); }
};

struct Golden {
  std::unique_ptr<Workspace> ws;
  std::string text;
  StructuredSceneDescription ssd;
};

// Golden scene rebuilt in fixture mode from the committed captions.
Golden golden_run() {
  Golden g;
  g.ws = std::make_unique<Workspace>(24, 7, true, "replay");
  fs::copy_file(kData / "golden" / "captions.fixtures.json", g.ws->dir / "captions.fixtures.json");
  g.ssd = describe_scene(g.ws->config()).ssd;
  g.text = serialize(g.ssd);
  return g;
}

// 1. Geometric attributes of a 1200 m2 footprint with members 28 m up.
Outcome criterion1() {
  const EnuFrame frame({114.3600, 30.5360});
  const LocalPolygon local{{{-20, -15}, {20, -15}, {20, 15}, {-20, 15}, {-20, -15}}, {}};
  const Polygon2D footprint = unproject(local, frame);
  PointCloud pc;
  pc.origin = frame.origin();
  for (double x = -19.5; x < 20; x += 1.0) {
    for (double y = -14.5; y < 15; y += 1.0) pc.points.push_back({x, y, 28.0});
  }
  for (double x = -30; x <= 30; x += 1.0) {
    for (double y = -25; y <= 25; y += 1.0) {
      if (std::abs(x) > 21 || std::abs(y) > 16) pc.points.push_back({x, y, 0.0});
    }
  }
  const GridIndex index(pc);
  const ObjectCloud oc = segment_by_footprint(pc, index, project(footprint, frame), "1");
  const double ground = estimate_ground(pc, index, project(footprint, frame));
  const GeometricInfo info = geometric_attributes(oc, footprint, frame, ground);

  SsdInputs in;
  MapObject obj;
  obj.id = "1";
  obj.name = "Test Hall";
  obj.fclass = "building";
  obj.geometry = footprint;
  in.objects = {obj};
  in.geometry["1"] = info;
  const StructuredSceneDescription ssd = assemble_ssd(in);
  const GeometricBlock& g = *ssd.objects.at("1").geometric;
  const std::string text = serialize(ssd);

  Outcome o;
  o.pass = g.height == 28.0 && g.area == 1200.0 && g.volume == 33600.0 && info.height == 28.0 &&
           text.find("\"Height\": \"28 m\"") != std::string::npos &&
           text.find("\"Area\": \"1200 m²\"") != std::string::npos &&
           text.find("\"Volume\": \"33600 m³\"") != std::string::npos;
  o.detail = "height " + fmt("%.17g", info.height) + ", area " + fmt("%.17g", info.area) + ", volume " +
             fmt("%.17g", info.volume) + " -> \"" + fmt("%.0f", *g.height) + " m\", \"" + fmt("%.0f", *g.area) +
             " m²\", \"" + fmt("%.0f", *g.volume) + " m³\"";
  return o;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

// 2. Registration recovery.
Outcome criterion2() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> scale(0.5, 2.0), pos(-50, 50), shift(-100, 100);
  const double sigma = 0.05;
  std::normal_distribution<double> noise(0, sigma);
  double sim_err = 0, sim_rmse = 0, aff_err = 0, aff_rmse = 0;
  // Trials over the bound, and the RMSE the true transform itself has on
  // the worst of them.
  int sim_over = 0, aff_over = 0;
  double sim_truth_at_worst = 0, sum_sq = 0;
  for (int t = 0; t < 100; ++t) {
    Similarity3D truth;
    truth.scale = scale(rng);
    truth.rotation = random_rotation(rng);
    truth.translation = Eigen::Vector3d(shift(rng), shift(rng), shift(rng));
    CorrespondenceSet clean, noisy;
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector3d p(pos(rng), pos(rng), pos(rng));
      clean.add(p, truth.apply(p));
      noisy.add(p, truth.apply(p) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
    }
    const Similarity3D fit = fit_similarity_7dof(clean).transform;
    sim_err = std::max({sim_err, std::abs(fit.scale - truth.scale), (fit.rotation - truth.rotation).cwiseAbs().maxCoeff(),
                        (fit.translation - truth.translation).cwiseAbs().maxCoeff()});
    const double r = fit_similarity_7dof(noisy).rmse;
    if (r > sim_rmse) sim_truth_at_worst = rmse(truth, noisy);
    sim_rmse = std::max(sim_rmse, r);
    sim_over += r > 2 * sigma;
    sum_sq += r * r;

    Affine2D a;
    const double angle = pos(rng) / 8.0;
    a.linear = Eigen::Rotation2Dd(angle).toRotationMatrix() *
               (Eigen::Matrix2d() << scale(rng), pos(rng) / 100.0, 0.0, scale(rng)).finished();
    a.translation = Eigen::Vector2d(shift(rng), shift(rng));
    CorrespondenceSet clean2, noisy2;
    for (int i = 0; i < 10; ++i) {
      const Vec2 p{pos(rng), pos(rng)};
      const Vec2 q = a.apply(p);
      clean2.add(p, q);
      noisy2.add(p, Vec2{q.x + noise(rng), q.y + noise(rng)});
    }
    const Affine2D fa = fit_affine_2d(clean2).transform;
    aff_err = std::max({aff_err, (fa.linear - a.linear).cwiseAbs().maxCoeff(),
                        (fa.translation - a.translation).cwiseAbs().maxCoeff()});
    const double r2 = fit_affine_2d(noisy2).rmse;
    aff_rmse = std::max(aff_rmse, r2);
    aff_over += r2 > 2 * sigma;
  }
  Outcome o;
  o.pass = sim_err < 1e-8 && aff_err < 1e-8 && sim_rmse <= 2 * sigma && aff_rmse <= 2 * sigma;
  o.detail = "7-DOF max parameter error " + fmt("%.2e", sim_err) + ", noisy RMSE over bound in " +
             std::to_string(sim_over) + "/100 trials (worst " + fmt("%.4f", sim_rmse) + " m, true transform " +
             fmt("%.4f", sim_truth_at_worst) + " m on the same data, pooled " + fmt("%.4f", std::sqrt(sum_sq / 100)) +
             " m); affine max parameter error " + fmt("%.2e", aff_err) + ", over bound in " + std::to_string(aff_over) +
             "/100 (worst " + fmt("%.4f", aff_rmse) + " m); bound " + fmt("%.2f", 2 * sigma) +
             " m, per-axis sigma, per-point RMSE";
  return o;
}

// 3. Geodesy against frozen geographiclib solutions.
Outcome criterion3() {
  std::ifstream in(kData / "geodesic_pairs.csv");
  std::string line;
  std::getline(in, line);
  double worst_d = 0, worst_b = 0, wgs_d = 0, wgs_b = 0;
  std::size_t n = 0;
  auto angle = [](double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, 360.0 - d);
  };
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<double> v;
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    const GeoPoint a{v[0], v[1]}, b{v[2], v[3]};
    const double d = haversine_distance(a, b);
    const double brg = bearing(a, b);
    worst_d = std::max(worst_d, std::abs(d - v[4]) / v[4]);
    worst_b = std::max(worst_b, angle(brg, v[5]));
    wgs_d = std::max(wgs_d, std::abs(d - v[6]) / v[6]);
    wgs_b = std::max(wgs_b, angle(brg, v[7]));
    ++n;
  }
  Outcome o;
  o.pass = n == 1000 && worst_d <= 0.005 && worst_b <= 0.1;
  o.detail = std::to_string(n) + " pairs; spherical geodesic: max distance error " + fmt("%.2e", worst_d * 100) +
             "%, max bearing error " + fmt("%.2e", worst_b) + " deg; WGS84 (informational): " + fmt("%.3f", wgs_d * 100) +
             "%, " + fmt("%.3f", wgs_b) + " deg";
  return o;
}

struct Tally {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t band = 0;
  void check(bool ok) {
    ++checked;
    if (!ok) ++failed;
  }
};

// Compares listed topology entries with the exhaustive candidates.
void compare_topology(const TopologyRelation& got, const std::vector<brute::TopologyCandidate>& want, Tally& t) {
  std::vector<bool> used(want.size(), false);
  bool ok = true;
  for (const auto& e : got.points) {
    bool found = false;
    for (std::size_t i = 0; i < want.size() && !found; ++i) {
      if (!used[i] && !want[i].polyline && want[i].name == e.name && std::abs(want[i].distance - e.distance) < 1e-6) {
        used[i] = found = true;
      }
    }
    ok = ok && found;
  }
  const std::set<std::string> lines(got.polylines.begin(), got.polylines.end());
  std::set<std::string> optional_lines, required_lines;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!want[i].required) ++t.band;
    if (want[i].polyline) {
      (want[i].required ? required_lines : optional_lines).insert(want[i].name);
    } else if (want[i].required && !used[i]) {
      ok = false;
    }
  }
  for (const auto& r : required_lines) ok = ok && lines.count(r);
  for (const auto& l : lines) ok = ok && (required_lines.count(l) || optional_lines.count(l));
  ok = ok && lines.size() == got.polylines.size();
  t.check(ok);
}

// 4. Exhaustive recomputation on seeded scenes.
Outcome criterion4(const Golden& golden) {
  Tally seg, spatial, topo, path, oracle;
  std::size_t max_objects = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t buildings = 6 + 2 * seed;
    Workspace ws(buildings, seed, false, "none");
    const SceneConfig cfg = ws.config();
    const StructuredSceneDescription ssd = describe_scene(cfg).ssd;
    max_objects = std::max(max_objects, ssd.objects.size());

    const std::vector<MapObject> objects = parse_map(ws.scene.map_xml).objects;
    const EnuFrame frame = scene_frame(objects);
    const PointCloud cloud = apply_transform(fit_affine_2d(ws.scene.cloud_to_map).transform, ws.scene.cloud);
    const GridIndex index(cloud);
    const std::set<std::string> tiny(cfg.params.tiny_classes.begin(), cfg.params.tiny_classes.end());

    std::vector<SceneEntity> entities;
    std::vector<const MapObject*> described;
    for (const MapObject& o : objects) {
      if (const auto* poly = std::get_if<Polygon2D>(&o.geometry)) {
        const LocalPolygon fp = project(*poly, frame);
        const ObjectCloud oc = segment_by_footprint(cloud, index, fp, o.id);
        const Bounds2 box = bounds(fp);
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
          const Vec2 p = cloud.points[i].xy();
          if (p.x < box.min.x - 1e-6 || p.x > box.max.x + 1e-6 || p.y < box.min.y - 1e-6 || p.y > box.max.y + 1e-6) continue;
          if (brute::inside(p, fp)) want.push_back(i);
        }
        seg.check(oc.indices == want);
        entities.push_back({o.id, o.name, polygon_centroid(*poly, frame)});
        described.push_back(&o);
      } else if (const auto* pt = std::get_if<GeoPoint>(&o.geometry); pt && !tiny.count(o.fclass)) {
        entities.push_back({o.id, o.name, *pt});
        described.push_back(&o);
      }
    }
    for (const SceneEntity& e : entities) {
      const auto got = spatial_relations(e.id, entities, cfg.params.neighbors, cfg.params.radius);
      const auto want = brute::spatial(e.id, entities, cfg.params.neighbors, cfg.params.radius);
      bool ok = got.size() == want.size();
      for (std::size_t i = 0; ok && i < got.size(); ++i) {
        ok = got[i].name == want[i].name && got[i].direction == want[i].direction &&
             std::abs(got[i].distance - want[i].distance) < 1e-6;
      }
      spatial.check(ok);
    }
    for (const MapObject* o : described) {
      compare_topology(topology_relations(o->id, objects, frame, cfg.params.buffer),
                       brute::topology(*o, objects, frame, cfg.params.buffer), topo);
    }

    const RoadGraph roads = build_road_graph(ssd);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 25; ++k) {
      const std::size_t a = rng() % roads.nodes.size();
      const std::size_t b = rng() % roads.nodes.size();
      if (a == b) continue;
      const double want = brute::shortest_length(roads, a, b);
      double got = std::numeric_limits<double>::infinity();
      try {
        got = shortest_path(roads, a, b).length;
      } catch (const Error&) {
      }
      path.check((std::isinf(got) && std::isinf(want)) || std::abs(got - want) < 1e-6);
    }

    const QaGeneration gen = generate_qa(ssd, 10, seed);
    const Oracle o(ssd);
    for (QAItem q : gen.items) {
      oracle.check(o.answer(q).option == brute::answer(ssd, roads, q) && o.answer(q).option == q.answer);
      std::rotate(q.options.begin(), q.options.begin() + 1, q.options.end());
      oracle.check(o.answer(q).option == brute::answer(ssd, roads, q));
    }
  }
  // The golden scene adds grounding questions over visual information.
  {
    const RoadGraph roads = build_road_graph(golden.ssd);
    const Oracle o(golden.ssd);
    for (QAItem q : generate_qa(golden.ssd, 20, 7).items) {
      oracle.check(o.answer(q).option == brute::answer(golden.ssd, roads, q) && o.answer(q).option == q.answer);
      std::swap(q.options[0], q.options[3]);
      oracle.check(o.answer(q).option == brute::answer(golden.ssd, roads, q));
    }
  }
  auto part = [](const char* name, const Tally& t) {
    return std::string(name) + " " + std::to_string(t.checked - t.failed) + "/" + std::to_string(t.checked);
  };
  Outcome out;
  out.pass = max_objects <= 50 && seg.failed + spatial.failed + topo.failed + path.failed + oracle.failed == 0 &&
             seg.checked && spatial.checked && topo.checked && path.checked && oracle.checked;
  out.detail = "20 scenes, <= " + std::to_string(max_objects) + " objects: " + part("segment", seg) + ", " +
               part("spatial", spatial) + ", " + part("topology", topo) + " (" + std::to_string(topo.band) +
               " features inside the arc tolerance band), " + part("shortest_path", path) + ", " +
               part("oracle.answer", oracle);
  return out;
}

// 5. Generate/answer loop closure in fixture mode.
Outcome criterion5(const Golden& golden) {
  const SceneConfig cfg = golden.ws->config();
  const StructuredSceneDescription ssd = describe_scene(cfg).ssd;
  const QaGeneration gen = generate_qa(ssd, 20, cfg.seed);
  const EvalReport oracle = run_eval(gen.items, ssd, make_respondent(&cfg, "oracle").respondent);
  const EvalReport always_a = run_eval(gen.items, ssd, make_respondent(&cfg, "always-a").respondent);
  std::size_t keyed_a = 0;
  for (const QAItem& q : gen.items) keyed_a += q.answer == 'A';
  const double fraction = static_cast<double>(keyed_a) / static_cast<double>(gen.items.size());
  Outcome o;
  o.pass = gen.items.size() == 100 && oracle.macro == 1.0 && oracle.micro == 1.0 && oracle.complete() &&
           always_a.correct == keyed_a && always_a.micro == fraction;
  o.detail = std::to_string(gen.items.size()) + " items; oracle overall " + fmt("%.2f", oracle.macro) + " (micro " +
             fmt("%.2f", oracle.micro) + "); constant A scored " + std::to_string(always_a.correct) + "/" +
             std::to_string(always_a.total) + ", items keyed A " + std::to_string(keyed_a);
  return o;
}

// 6. Prompt and reply protocol.
Outcome criterion6() {
  const std::string listing =
      "Based on the data provided by the user, you can perform many spatial reasoning tasks. In addition to some basic "
      "information, the structured text also includes several specialized fields:\n"
      "- ID: Unique identifier for each geographic object (e.g.,\"1317798\")\n"
      "- bbox: The coordinates of the bottom-left and top-right corners of the minimum bounding rectangle of the "
      "polygon.\n"
      "- Visual information: Detailed description of the object's physical appearance and immediate environment.\n"
      "- Spatial Relationship: Direction and distance to surrounding objects\n"
      "- Geographic Topology Relationship: Geographic information about the object's surroundings, including: Adjacent "
      "roads, Points of interest (POIs) with their distances.\n"
      "Your answers must rely strictly on this data structure, and your output should follow this format: "
      "Option#Reasoning process. If none of the options are correct, output: F#Reasoning process\n"
      "Example: User Question: If I am at building A, in which direction should I walk to reach building B?\n"
      "A. Northwest  B. Southwest  C. Southeast  D. Northeast\n"
      "Answer: C#Based on the data, ...., making option C the correct answer";
  QAItem q;
  q.question = "If I am at A (ID 1), in which direction should I walk to reach B (ID 2)?";
  q.options = {"Northwest", "Southwest", "Southeast", "Northeast"};
  const auto msgs = build_prompt("{}", q);
  const std::string system = msgs.at(0).text_content();
  const ParsedAnswer c = parse_answer("C#Based on the data, ...., making option C the correct answer");
  const ParsedAnswer f = parse_answer("F#None of the options match the data.");
  Outcome o;
  o.pass = msgs[0].role == "system" && system.find(listing) != std::string::npos &&
           system.find("Option#Reasoning") != std::string::npos && c.option == 'C' && !c.malformed() &&
           f.option == 'F' && parse_answer("Option C").malformed();
  o.detail = std::string("system prompt ") + (system.find(listing) != std::string::npos ? "contains" : "lacks") +
             " the verbatim listing; \"C#Based on the data...\" -> " + std::string(1, c.option ? c.option : '?') +
             ", \"F#...\" -> " + std::string(1, f.option ? f.option : '?');
  return o;
}

std::set<std::string> keys_of(const nlohmann::ordered_json& j) {
  std::set<std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.insert(it.key());
  return out;
}

// 7. Ablation structure.
Outcome criterion7(const Golden& golden) {
  const std::vector<AblationMask> singles = {
      {true, false, false, false}, {false, true, false, false}, {false, false, true, false}, {false, false, false, true}};
  const std::vector<std::set<std::string>> removed = {
      {"Name", "Fclass", "Type"},
      {"Center", "Height", "Area", "Volume", "Bbox"},
      {"Visual information"},
      {"Spatial Relationship", "Geographic Topology Relationship"}};
  const std::vector<std::string> entry_removed = {"Name", "Coordinates", "", ""};
  const auto base = nlohmann::ordered_json::parse(golden.text);
  bool keys_ok = true;
  for (std::size_t m = 0; m < 4; ++m) {
    const std::string text = serialize(apply_ablation(golden.ssd, singles[m]));
    const auto j = nlohmann::ordered_json::parse(text);
    for (const auto& [id, obj] : base["Objects"].items()) {
      std::set<std::string> want = keys_of(obj);
      for (const auto& k : removed[m]) want.erase(k);
      keys_ok = keys_ok && keys_of(j["Objects"][id]) == want;
    }
    for (const char* section : {"Point-type objects", "Polyline-type objects"}) {
      for (const auto& [id, e] : base[section].items()) {
        std::set<std::string> want = keys_of(e);
        want.erase(entry_removed[m]);
        keys_ok = keys_ok && keys_of(j[section][id]) == want;
      }
    }
    if (m == 2) keys_ok = keys_ok && text.find("Visual information") == std::string::npos;
  }
  // Every subset, applied one mask at a time in every order, equals the
  // combined mask.
  bool commute = true;
  for (unsigned bits = 0; bits < 16; ++bits) {
    std::vector<int> order;
    for (int i = 0; i < 4; ++i) {
      if (bits & (1u << i)) order.push_back(i);
    }
    const AblationMask combined{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8)};
    const std::string want = serialize(apply_ablation(golden.ssd, combined));
    do {
      StructuredSceneDescription s = golden.ssd;
      for (int i : order) s = apply_ablation(s, singles[i]);
      commute = commute && serialize(s) == want;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  // Prompts differ only inside the description section.
  bool prompts = true;
  const QAItem q = generate_qa(golden.ssd, 1, 1).items.at(0);
  const auto base_prompt = build_prompt(golden.text, q);
  for (unsigned bits = 1; bits < 16; ++bits) {
    const AblationMask mask{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8)};
    const auto p = build_prompt(serialize(apply_ablation(golden.ssd, mask)), q);
    const std::string a = base_prompt[1].text_content();
    const std::string b = p[1].text_content();
    const auto qa = a.find(kQuestionMarker);
    const auto qb = b.find(kQuestionMarker);
    prompts = prompts && p.size() == base_prompt.size() && p[0].text_content() == base_prompt[0].text_content() &&
              a.rfind(kSceneHeader, 0) == 0 && b.rfind(kSceneHeader, 0) == 0 && qa != std::string::npos &&
              qb != std::string::npos && a.substr(qa) == b.substr(qb) && a.substr(kSceneHeader.size(), qa - kSceneHeader.size()) != b.substr(kSceneHeader.size(), qb - kSceneHeader.size());
  }
  Outcome o;
  o.pass = keys_ok && commute && prompts;
  o.detail = std::string("removed keys ") + (keys_ok ? "exact" : "WRONG") + "; 16 subsets x all orders " +
             (commute ? "commute" : "DIFFER") + "; prompts " + (prompts ? "differ only in the description section" : "DIFFER elsewhere");
  return o;
}

// 8. Round trips and determinism.
Outcome criterion8() {
  std::size_t round_trips = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const StructuredSceneDescription s = brute::random_ssd(seed * 7919);
    const std::string text = serialize(s);
    const StructuredSceneDescription back = parse_ssd(text);
    round_trips += back == s && serialize(back) == text;
  }
  const Golden first = golden_run();
  const Golden second = golden_run();
  const std::string committed = read_file(kData / "golden" / "scene.ssd.json");
  Outcome o;
  o.pass = round_trips == 100 && first.text == second.text && first.text == committed;
  o.detail = std::to_string(round_trips) + "/100 round trips; two fixture runs " +
             (first.text == second.text ? "identical" : "DIFFER") + "; golden " +
             (first.text == committed ? "matches" : "DIFFERS") + " (" + std::to_string(committed.size()) + " bytes)";
  return o;
}

// 9. Scale sanity on a 100-building scene.
Outcome criterion9() {
  const auto start = std::chrono::steady_clock::now();
  Workspace ws(100, 3, true, "scripted");
  const DescribeResult r = describe_scene(ws.config());
  const std::string text = serialize(r.ssd);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::size_t estimate = estimate_tokens(text);
  const double ratio = static_cast<double>(estimate) / static_cast<double>(kRecordedTokens);
  const bool same_doc = sha256_hex(text) == kRecordedSha;
  Outcome o;
  o.pass = ratio >= 0.75 && ratio <= 1.25 && seconds < 60.0 && same_doc;
  o.detail = std::to_string(r.ssd.objects.size()) + " objects, " + std::to_string(text.size()) + " bytes; estimate " +
             std::to_string(estimate) + " vs o200k_base " + std::to_string(kRecordedTokens) + " (ratio " +
             fmt("%.3f", ratio) + "); document " + (same_doc ? "matches" : "DIFFERS FROM") +
             " the recorded one; end to end " + fmt("%.1f", seconds) + " s";
  return o;
}

}  // namespace

int main() {
  std::unique_ptr<Golden> golden;
  auto need_golden = [&]() -> const Golden& {
    if (!golden) golden = std::make_unique<Golden>(golden_run());
    return *golden;
  };
  const std::vector<Criterion> criteria = {
      {1, "geometric attributes", 1.0, criterion1},
      {2, "registration recovery", 5.0, criterion2},
      {3, "geodesy oracle agreement", 1.0, criterion3},
      {4, "exhaustive recomputation", 30.0, [&] { return criterion4(need_golden()); }},
      {5, "generate/answer loop closure", 10.0, [&] { return criterion5(need_golden()); }},
      {6, "protocol fidelity", 1.0, criterion6},
      {7, "ablation structure", 1.0, [&] { return criterion7(need_golden()); }},
      {8, "determinism and round trips", 20.0, criterion8},
      {9, "scale sanity", 60.0, criterion9},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    // The shared golden run is set up outside the timed region.
    if (c.number == 4 || c.number == 5 || c.number == 7) need_golden();
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && s < c.budget_s;
    failed += pass ? 0 : 1;
    std::printf("criterion %d %s: %s [%.2f s, budget %.0f s] %s\n", c.number, c.title, pass ? "PASS" : "FAIL", s,
                c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
