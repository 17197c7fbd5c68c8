// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <thread>

#include <json.hpp>

#include "urbanscene/captioning.hpp"
#include "urbanscene/extract.hpp"
#include "urbanscene/relations.hpp"
#include "urbanscene/synth.hpp"

namespace urbanscene {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Error config_error(const std::string& what) { return Error(ErrorCode::InvalidArgument, "config: " + what); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path input_path(const json& inputs, const char* key, const fs::path& base, bool directory = false) {
  if (!inputs.contains(key)) return {};
  const fs::path p = resolve(base, inputs.at(key).get<std::string>());
  if (!fs::exists(p)) {
    throw Error(ErrorCode::NotFound, std::string("config: ") + key + " '" + p.string() + "' does not exist");
  }
  if (directory != fs::is_directory(p)) {
    throw config_error(std::string(key) + " '" + p.string() + (directory ? "' is not a directory" : "' is a directory"));
  }
  return p;
}

EndpointConfig parse_endpoint(const json& j, EndpointConfig e = {}) {
  e.base_url = j.value("base_url", e.base_url);
  e.model = j.value("model", e.model);
  e.api_key_env = j.value("api_key_env", e.api_key_env);
  e.temperature = j.value("temperature", e.temperature);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  return e;
}

void require_range(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = std::min(std::max<std::size_t>(threads, 1), n);
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < t; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string meters(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f m", v);
  return buf;
}

std::vector<double> residuals(const Affine2D& t, const CorrespondenceSet& set) {
  std::vector<double> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec2 p = t.apply({set.source[i].x(), set.source[i].y()});
    out.push_back(std::hypot(p.x - set.target[i].x(), p.y - set.target[i].y()));
  }
  return out;
}

std::vector<double> residuals(const Similarity3D& t, const CorrespondenceSet& set) {
  std::vector<double> out;
  for (std::size_t i = 0; i < set.size(); ++i) out.push_back((t.apply(set.source[i]) - set.target[i]).norm());
  return out;
}

void check_residual(const char* stage, double fit_rmse, const std::vector<double>& res, double threshold) {
  if (fit_rmse <= threshold) return;
  const auto worst = std::max_element(res.begin(), res.end());
  throw Error(ErrorCode::Alignment, std::string(stage) + " alignment RMSE " + meters(fit_rmse) +
                                        " exceeds the threshold of " + meters(threshold) + " (" +
                                        std::to_string(res.size()) + " correspondences, worst #" +
                                        std::to_string(worst - res.begin()) + " at " + meters(*worst) + ")");
}

AffineFit fit_cloud(const SceneConfig& cfg) {
  const CorrespondenceSet set = parse_correspondences(read_file(cfg.cloud_to_map));
  if (set.dimension != 2) throw config_error("cloud_to_map correspondences must be 2D");
  return fit_affine_2d(set);
}

SimilarityFit fit_poses(const SceneConfig& cfg) {
  const CorrespondenceSet set = parse_correspondences(read_file(cfg.recon_to_cloud));
  if (set.dimension != 3) throw config_error("recon_to_cloud correspondences must be 3D");
  return fit_similarity_7dof(set);
}

// The cloud expressed in the map frame.
PointCloud cloud_in_map_frame(const PointCloud& cloud, const EnuFrame& frame, const std::optional<AffineFit>& fit) {
  PointCloud out;
  if (fit) {
    out = apply_transform(fit->transform, cloud);
  } else if (cloud.origin == frame.origin()) {
    out = cloud;
  } else {
    const EnuFrame src(cloud.origin);
    out = cloud;
    for (LocalPoint& p : out.points) {
      const Vec2 q = frame.to_local(src.to_geo(p.xy()));
      p.x = q.x;
      p.y = q.y;
    }
  }
  out.origin = frame.origin();
  return out;
}

std::shared_ptr<ChatTransport> caption_transport(const CaptionSettings& c, const EndpointConfig& endpoint,
                                                 ScriptedTransport::Handler scripted,
                                                 const std::shared_ptr<FixtureStore>& store) {
  auto remote = [&] {
    return std::make_shared<RetryingTransport>(std::make_shared<HttpChatTransport>(endpoint), RetryPolicy{});
  };
  auto local = [&] { return std::make_shared<ScriptedTransport>(std::move(scripted), endpoint.model); };
  if (c.mode == "scripted") return local();
  if (c.mode == "remote") return remote();
  if (c.mode == "replay") return std::make_shared<FixtureTransport>(store, FixtureMode::Replay);
  if (c.mode == "record") {
    std::shared_ptr<ChatTransport> inner;
    if (c.source == "scripted") {
      inner = local();
    } else {
      inner = remote();
    }
    return std::make_shared<FixtureTransport>(store, FixtureMode::Record, inner);
  }
  return nullptr;
}

fs::path image_file(const SceneConfig& cfg, const CameraPose& pose) {
  if (!pose.image.empty()) {
    const fs::path p(pose.image);
    return p.is_absolute() ? p : cfg.poses.parent_path() / p;
  }
  for (const char* ext : {".png", ".jpg", ".jpeg"}) {
    const fs::path p = cfg.images_dir / (pose.image_id + ext);
    if (fs::exists(p)) return p;
  }
  return cfg.images_dir / (pose.image_id + ".png");
}

}  // namespace

SceneConfig SceneConfig::parse(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), 0, e.byte);
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object", 1, 0);
  SceneConfig cfg;
  cfg.base_dir = base_dir;
  try {
    cfg.name = doc.value("name", cfg.name);
    cfg.seed = doc.value("seed", cfg.seed);
    const json inputs = doc.value("inputs", json::object());
    if (!inputs.contains("map")) throw config_error("inputs.map is required");
    cfg.map = input_path(inputs, "map", base_dir);
    cfg.cloud = input_path(inputs, "cloud", base_dir);
    cfg.cloud_to_map = input_path(inputs, "cloud_to_map", base_dir);
    cfg.poses = input_path(inputs, "poses", base_dir);
    cfg.images_dir = input_path(inputs, "images_dir", base_dir, true);
    cfg.recon_to_cloud = input_path(inputs, "recon_to_cloud", base_dir);
    cfg.tag_table = input_path(inputs, "tag_table", base_dir);
    if (inputs.contains("cloud_origin")) {
      const auto o = inputs.at("cloud_origin").get<std::vector<double>>();
      if (o.size() != 2) throw config_error("inputs.cloud_origin must be [lon, lat]");
      cfg.cloud_origin = GeoPoint{o[0], o[1]};
      if (!is_valid(*cfg.cloud_origin)) throw config_error("inputs.cloud_origin is out of range");
    }
    if (cfg.cloud.empty() && !cfg.cloud_to_map.empty()) throw config_error("cloud_to_map given without a cloud");
    if (!cfg.poses.empty() && cfg.cloud.empty()) throw config_error("poses given without a cloud");
    if (!cfg.poses.empty() && cfg.images_dir.empty()) throw config_error("poses given without images_dir");
    if (!cfg.recon_to_cloud.empty() && cfg.poses.empty()) throw config_error("recon_to_cloud given without poses");

    const json output = doc.value("output", json::object());
    if (output.contains("ssd")) cfg.ssd_output = resolve(base_dir, output.at("ssd").get<std::string>());
    if (output.contains("qa")) cfg.qa_output = resolve(base_dir, output.at("qa").get<std::string>());

    SceneParameters& p = cfg.params;
    const json params = doc.value("parameters", json::object());
    p.neighbors = params.value("neighbors", p.neighbors);
    p.radius = params.value("radius", p.radius);
    p.buffer = params.value("buffer", p.buffer);
    p.views = params.value("views", p.views);
    p.height_percentile = params.value("height_percentile", p.height_percentile);
    p.ground_ring = params.value("ground_ring", p.ground_ring);
    p.raster_cell = params.value("raster_cell", p.raster_cell);
    p.max_alignment_rmse = params.value("max_alignment_rmse", p.max_alignment_rmse);
    p.min_view_points = params.value("min_view_points", p.min_view_points);
    p.min_box_fraction = params.value("min_box_fraction", p.min_box_fraction);
    p.max_box_fraction = params.value("max_box_fraction", p.max_box_fraction);
    p.threads = params.value("threads", p.threads);
    p.tiny_classes = params.value("tiny_classes", p.tiny_classes);
    require_range(p.neighbors >= 1, "parameters.neighbors must be at least 1");
    require_range(p.radius > 0.0, "parameters.radius must be positive");
    require_range(p.buffer > 0.0, "parameters.buffer must be positive");
    require_range(p.views >= 1, "parameters.views must be at least 1");
    require_range(p.height_percentile > 0.0 && p.height_percentile <= 1.0,
                  "parameters.height_percentile must be in (0, 1]");
    require_range(p.ground_ring > 0.0, "parameters.ground_ring must be positive");
    require_range(p.raster_cell > 0.0, "parameters.raster_cell must be positive");
    require_range(p.max_alignment_rmse > 0.0, "parameters.max_alignment_rmse must be positive");
    require_range(p.min_box_fraction >= 0.0 && p.min_box_fraction < p.max_box_fraction && p.max_box_fraction <= 1.0,
                  "parameters.min_box_fraction/max_box_fraction must satisfy 0 <= min < max <= 1");
    require_range(p.threads >= 1, "parameters.threads must be at least 1");

    CaptionSettings& c = cfg.captioning;
    const json cap = doc.value("captioning", json::object());
    c.mode = cap.value("mode", c.mode);
    c.source = cap.value("source", c.source);
    c.max_in_flight = cap.value("max_in_flight", c.max_in_flight);
    if (cap.contains("vision")) c.vision = parse_endpoint(cap.at("vision"));
    if (cap.contains("language")) c.language = parse_endpoint(cap.at("language"));
    static const std::set<std::string> kModes = {"none", "scripted", "remote", "record", "replay"};
    if (!kModes.count(c.mode)) throw config_error("captioning.mode '" + c.mode + "' is not one of none, scripted, remote, record, replay");
    if (c.source != "remote" && c.source != "scripted") throw config_error("captioning.source must be remote or scripted");
    if (cap.contains("fixtures")) c.fixtures = resolve(base_dir, cap.at("fixtures").get<std::string>());
    if ((c.mode == "record" || c.mode == "replay") && c.fixtures.empty()) {
      throw config_error("captioning.fixtures is required in " + c.mode + " mode");
    }
    if (c.mode == "replay" && !fs::exists(c.fixtures)) {
      throw Error(ErrorCode::NotFound, "config: captioning.fixtures '" + c.fixtures.string() + "' does not exist");
    }
    require_range(c.max_in_flight >= 1, "captioning.max_in_flight must be at least 1");

    const json respondents = doc.value("respondents", json::object());
    for (const auto& [name, j] : respondents.items()) {
      RespondentConfig r;
      r.kind = j.at("kind").get<std::string>();
      r.endpoint = parse_endpoint(j);
      r.context_limit = j.value("context_limit", r.context_limit);
      r.reply = j.value("reply", r.reply);
      r.record = j.value("record", r.record);
      r.max_in_flight = j.value("max_in_flight", r.max_in_flight);
      if (j.contains("fixtures")) r.fixtures = resolve(base_dir, j.at("fixtures").get<std::string>());
      static const std::set<std::string> kKinds = {"remote", "constant", "echo-length", "oracle", "replay"};
      if (!kKinds.count(r.kind)) throw config_error("respondent '" + name + "' has unknown kind '" + r.kind + "'");
      if (r.kind == "replay" && !fs::exists(r.fixtures)) {
        throw Error(ErrorCode::NotFound, "config: fixtures of respondent '" + name + "' do not exist");
      }
      if (r.record && (r.kind != "remote" || r.fixtures.empty())) {
        throw config_error("respondent '" + name + "': record needs kind remote and a fixtures path");
      }
      require_range(r.max_in_flight >= 1, "respondent '" + name + "': max_in_flight must be at least 1");
      cfg.respondents[name] = r;
    }
  } catch (const json::exception& e) {
    throw config_error(e.what());
  }
  return cfg;
}

SceneConfig SceneConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::NotFound, "config file '" + path.string() + "' does not exist");
  return parse(read_file(path), fs::absolute(path).parent_path());
}

DescribeResult describe_scene(const SceneConfig& cfg) {
  DescribeResult result;
  const SceneParameters& P = cfg.params;
  const TagTable table = cfg.tag_table.empty() ? TagTable::defaults() : TagTable::from_json(read_file(cfg.tag_table));
  MapParseResult parsed = parse_map(read_file(cfg.map), table);
  result.warnings = parsed.warnings;
  const std::vector<MapObject>& objects = parsed.objects;
  const EnuFrame frame = scene_frame(objects);
  const std::set<std::string> tiny(P.tiny_classes.begin(), P.tiny_classes.end());

  SsdInputs in;
  in.metadata.name = cfg.name;
  in.metadata.origin = frame.origin();
  in.objects = objects;
  in.tiny_classes = P.tiny_classes;

  std::vector<std::size_t> polygons;
  std::vector<std::size_t> described;  // full-description objects
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const GeometryKind k = objects[i].kind();
    if (k == GeometryKind::Polygon) polygons.push_back(i);
    if (k == GeometryKind::Polygon || (k == GeometryKind::Point && !tiny.count(objects[i].fclass))) {
      described.push_back(i);
    }
  }

  // Geometry.
  std::optional<PointCloud> cloud;
  std::vector<ObjectCloud> members(objects.size());
  if (!cfg.cloud.empty()) {
    cloud = load_point_cloud(read_file(cfg.cloud), cfg.cloud_origin);
    if (!cfg.cloud_to_map.empty()) {
      result.cloud_fit = fit_cloud(cfg);
      check_residual("cloud-to-map", result.cloud_fit->rmse,
                     residuals(result.cloud_fit->transform, parse_correspondences(read_file(cfg.cloud_to_map))),
                     P.max_alignment_rmse);
    }
    const PointCloud aligned = cloud_in_map_frame(*cloud, frame, result.cloud_fit);
    const GridIndex index(aligned);
    std::vector<std::optional<GeometricInfo>> infos(objects.size());
    std::vector<Warnings> per_object(objects.size());
    parallel_for(polygons.size(), P.threads, [&](std::size_t k) {
      const std::size_t i = polygons[k];
      const MapObject& o = objects[i];
      const auto& poly = std::get<Polygon2D>(o.geometry);
      try {
        const LocalPolygon footprint = project(poly, frame);
        const double ground = estimate_ground(aligned, index, footprint, P.ground_ring);
        members[i] = segment_by_footprint(aligned, index, footprint, o.id, &per_object[i]);
        infos[i] = geometric_attributes(members[i], poly, frame, ground, P.height_percentile);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate) throw;
        per_object[i].push_back({"extract", o.id, e.what()});
      }
    });
    for (std::size_t i : described) {
      if (infos[i]) {
        in.geometry[objects[i].id] = *infos[i];
      } else if (const auto* pt = std::get_if<GeoPoint>(&objects[i].geometry)) {
        GeometricInfo g;
        g.center = *pt;
        in.geometry[objects[i].id] = g;
      }
    }
    for (const Warnings& w : per_object) result.warnings.insert(result.warnings.end(), w.begin(), w.end());

    // Spatial relations among described objects with a center.
    std::vector<SceneEntity> entities;
    for (std::size_t i : described) {
      if (auto it = in.geometry.find(objects[i].id); it != in.geometry.end()) {
        entities.push_back({objects[i].id, objects[i].name, it->second.center});
      }
    }
    std::vector<std::vector<SpatialRelation>> spatial(entities.size());
    parallel_for(entities.size(), P.threads, [&](std::size_t k) {
      spatial[k] = spatial_relations(entities[k].id, entities, P.neighbors, P.radius);
    });
    for (std::size_t k = 0; k < entities.size(); ++k) in.spatial[entities[k].id] = spatial[k];
  }

  // Topology, available from the map alone.
  std::vector<std::optional<TopologyRelation>> topo(objects.size());
  std::vector<Warnings> topo_warnings(objects.size());
  parallel_for(described.size(), P.threads, [&](std::size_t k) {
    const std::size_t i = described[k];
    try {
      topo[i] = topology_relations(objects[i].id, objects, frame, P.buffer);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
      topo_warnings[i].push_back({"relations", objects[i].id, e.what()});
    }
  });
  for (std::size_t i : described) {
    if (topo[i]) in.topology[objects[i].id] = *topo[i];
  }
  for (const Warnings& w : topo_warnings) result.warnings.insert(result.warnings.end(), w.begin(), w.end());

  // Visual information.
  const CaptionSettings& C = cfg.captioning;
  if (cloud && !cfg.poses.empty() && C.mode != "none") {
    std::vector<CameraPose> poses = load_camera_poses(read_file(cfg.poses));
    if (!cfg.recon_to_cloud.empty()) {
      result.pose_fit = fit_poses(cfg);
      check_residual("reconstruction-to-cloud", result.pose_fit->rmse,
                     residuals(result.pose_fit->transform, parse_correspondences(read_file(cfg.recon_to_cloud))),
                     P.max_alignment_rmse);
      for (CameraPose& p : poses) p = apply_transform(result.pose_fit->transform, p);
    }
    std::shared_ptr<FixtureStore> store;
    if (C.mode == "record" || C.mode == "replay") store = FixtureStore::load(C.fixtures);
    CaptionClient vision{caption_transport(C, C.vision, synthetic_vision_handler(), store), C.vision.model,
                         C.vision.temperature, C.mode == "replay"};
    CaptionClient language{caption_transport(C, C.language, synthetic_summary_handler(), store), C.language.model,
                           C.language.temperature, C.mode == "replay"};
    std::map<std::string, std::string> image_cache;
    auto image_bytes = [&](const CameraPose& pose) -> const std::string& {
      auto it = image_cache.find(pose.image_id);
      if (it == image_cache.end()) it = image_cache.emplace(pose.image_id, read_file(image_file(cfg, pose))).first;
      return it->second;
    };
    std::map<std::string, const CameraPose*> by_id;
    for (const CameraPose& p : poses) by_id[p.image_id] = &p;

    for (std::size_t i : polygons) {
      const ObjectCloud& oc = members[i];
      if (oc.empty()) continue;
      std::vector<LocalPoint> pts;
      pts.reserve(oc.indices.size());
      for (std::size_t idx : oc.indices) pts.push_back(cloud->points[idx]);
      std::vector<ViewBox> boxes;
      for (const CameraPose& pose : poses) {
        if (auto b = project_bbox(pts, pose, P.min_view_points)) boxes.push_back(*b);
      }
      const std::vector<ViewBox> views = select_views(boxes, P.views, P.min_box_fraction, P.max_box_fraction);
      std::vector<CaptionJob> jobs;
      for (const ViewBox& v : views) jobs.push_back({v, image_bytes(*by_id.at(v.image_id))});
      const std::string& fclass = objects[i].fclass;
      std::vector<CaptionPair> pairs = caption_views(jobs, fclass, vision, C.max_in_flight);
      in.visual[objects[i].id] = summarize_visual_info(std::move(pairs), fclass, language);
      if (in.visual[objects[i].id].available()) ++result.captioned_objects;
    }
    if (C.mode == "record") store->save(C.fixtures);
  }

  result.ssd = assemble_ssd(in);
  return result;
}

bool AlignmentReport::passed() const {
  return (!cloud_fit || cloud_fit->rmse <= threshold) && (!pose_fit || pose_fit->rmse <= threshold);
}

std::string AlignmentReport::to_json() const {
  json j;
  j["threshold_m"] = threshold;
  j["passed"] = passed();
  if (cloud_fit) {
    j["cloud_to_map"] = json::parse(serialize(cloud_fit->transform, cloud_fit->rmse));
    j["cloud_to_map"]["residuals_m"] = cloud_residuals;
  }
  if (pose_fit) {
    j["recon_to_cloud"] = json::parse(serialize(pose_fit->transform, pose_fit->rmse));
    j["recon_to_cloud"]["residuals_m"] = pose_residuals;
  }
  if (raster_width) {
    j["raster"] = {{"width", raster_width}, {"height", raster_height}, {"occupied", raster_occupied}};
  }
  return j.dump(2) + "\n";
}

AlignmentReport align_check(const SceneConfig& cfg, const fs::path& raster_path) {
  AlignmentReport r;
  r.threshold = cfg.params.max_alignment_rmse;
  if (!cfg.cloud_to_map.empty()) {
    r.cloud_fit = fit_cloud(cfg);
    r.cloud_residuals = residuals(r.cloud_fit->transform, parse_correspondences(read_file(cfg.cloud_to_map)));
  }
  if (!cfg.recon_to_cloud.empty()) {
    r.pose_fit = fit_poses(cfg);
    r.pose_residuals = residuals(r.pose_fit->transform, parse_correspondences(read_file(cfg.recon_to_cloud)));
  }
  if (!raster_path.empty()) {
    if (cfg.cloud.empty()) throw config_error("a raster needs a cloud input");
    const PointCloud cloud = load_point_cloud(read_file(cfg.cloud), cfg.cloud_origin);
    const TopViewRaster raster = rasterize_topview(cloud, cfg.params.raster_cell);
    write_file(raster_path, raster.to_pgm());
    r.raster_width = raster.width;
    r.raster_height = raster.height;
    r.raster_occupied = raster.occupied_count();
  }
  return r;
}

void RespondentHandle::finish() const {
  if (store && !store_path.empty()) store->save(store_path);
}

RespondentHandle make_respondent(const SceneConfig* cfg, const std::string& name) {
  RespondentHandle h;
  const RespondentConfig* rc = nullptr;
  if (cfg) {
    if (auto it = cfg->respondents.find(name); it != cfg->respondents.end()) rc = &it->second;
  }
  if (!rc) {
    if (name == "oracle") {
      h.respondent = make_oracle_respondent(name);
      return h;
    }
    throw Error(ErrorCode::NotFound, "unknown respondent '" + name + "'");
  }
  if (rc->kind == "oracle") {
    h.respondent = make_oracle_respondent(name);
  } else if (rc->kind == "constant") {
    h.respondent = make_constant_respondent(name, rc->reply);
  } else if (rc->kind == "echo-length") {
    h.respondent = make_echo_length_respondent(name);
  } else if (rc->kind == "replay") {
    h.respondent.name = name;
    h.respondent.kind = Respondent::Kind::Scripted;
    h.respondent.model = rc->endpoint.model;
    h.respondent.transport = std::make_shared<FixtureTransport>(FixtureStore::load(rc->fixtures), FixtureMode::Replay);
  } else {
    h.respondent = make_remote_respondent(name, rc->endpoint, rc->context_limit);
    if (rc->record) {
      h.store = FixtureStore::load(rc->fixtures);
      h.store_path = rc->fixtures;
      h.respondent.transport = std::make_shared<FixtureTransport>(h.store, FixtureMode::Record, h.respondent.transport);
    }
  }
  h.respondent.context_limit = rc->context_limit;
  h.respondent.max_in_flight = rc->max_in_flight;
  return h;
}

std::string AskResult::to_json() const {
  json j = {{"respondent", respondent}, {"model", model},   {"question", question},
            {"ssd_sha256", ssd_sha256}, {"prompt_tokens", prompt_tokens}, {"reply", reply}};
  return j.dump(2) + "\n";
}

AskResult ask_scene(const StructuredSceneDescription& ssd, std::string_view question, const Respondent& respondent) {
  if (!respondent.transport) throw Error(ErrorCode::InvalidArgument, "respondent '" + respondent.name + "' has no transport");
  const std::string text = serialize(ssd);
  AskResult r;
  r.respondent = respondent.name;
  r.model = respondent.model;
  r.question = std::string(question);
  r.ssd_sha256 = sha256_hex(text);
  ChatRequest req;
  req.model = respondent.model;
  req.temperature = respondent.temperature;
  req.messages = build_ask_prompt(text, question);
  r.prompt_tokens = prompt_tokens(req.messages);
  if (respondent.context_limit && r.prompt_tokens > respondent.context_limit) {
    throw Error(ErrorCode::ContextLimit, "prompt of about " + std::to_string(r.prompt_tokens) +
                                             " tokens exceeds the context limit of " +
                                             std::to_string(respondent.context_limit) + " tokens of respondent '" +
                                             respondent.name + "'");
  }
  r.reply = respondent.transport->complete(req).content;
  return r;
}

}  // namespace urbanscene
