// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic campus scenes with every modality the pipeline consumes: an
// OSM extract, a scanned cloud in its own frame, posed nadir images in a
// reconstruction frame and the correspondence files tying them together.
// The matching scripted captioner reads the rendered images, so fixture
// runs need no network.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "urbanscene/align.hpp"
#include "urbanscene/chat.hpp"
#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"

namespace urbanscene {

struct SynthOptions {
  std::size_t buildings = 12;
  std::uint64_t seed = 1;
  GeoPoint origin{114.3600, 30.5360};
  bool images = true;
  double roof_spacing = 1.0;
  double wall_spacing = 1.0;
  double ground_spacing = 2.0;
  double camera_altitude = 120.0;
  double camera_spacing = 70.0;
  int image_width = 640;
  int image_height = 480;
  double focal = 500.0;
};

struct SynthBuilding {
  std::string id;
  std::string name;  // empty when unnamed
  std::string type;  // empty for building=yes
  std::string color;
  double height = 0.0;
  double area = 0.0;
};

struct SynthScene {
  std::string map_xml;
  PointCloud cloud;                  // scan frame
  std::vector<CameraPose> poses;     // reconstruction frame
  std::map<std::string, std::string> images;  // file name -> PNG bytes
  CorrespondenceSet cloud_to_map;    // scan xy -> map frame xy
  CorrespondenceSet recon_to_cloud;  // reconstruction -> scan
  Affine2D true_cloud_to_map;
  Similarity3D true_recon_to_cloud;
  std::vector<SynthBuilding> buildings;
};

SynthScene synthesize_scene(const SynthOptions& options);

// Writes map.osm, cloud.ply, poses.json, images/, the two correspondence
// files and config.json. `caption_mode` is the captioning mode written to
// the config ("scripted", "replay", "record" or "none").
void write_scene(const SynthScene& scene, const std::filesystem::path& dir, const std::string& name,
                 const std::string& caption_mode = "scripted", std::uint64_t seed = 1);

// Vision captioner for rendered scenes: finds the red box, names the
// dominant roof color and the surroundings.
ScriptedTransport::Handler synthetic_vision_handler();
// Summarizer: most frequent self caption followed by the most frequent
// surrounding caption.
ScriptedTransport::Handler synthetic_summary_handler();

}  // namespace urbanscene
