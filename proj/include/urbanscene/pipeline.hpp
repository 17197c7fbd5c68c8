// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Scene configuration and the end-to-end stages driven by it: describe,
// alignment checks, respondent construction and free-form questions.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/align.hpp"
#include "urbanscene/chat.hpp"
#include "urbanscene/eval.hpp"
#include "urbanscene/ssd.hpp"

namespace urbanscene {

struct SceneParameters {
  std::size_t neighbors = kDefaultNeighborCount;
  double radius = kDefaultNeighborRadius;
  double buffer = kDefaultBufferDistance;
  std::size_t views = kDefaultViewCount;
  double height_percentile = kDefaultHeightPercentile;
  double ground_ring = kDefaultGroundRing;
  double raster_cell = kDefaultRasterCell;
  double max_alignment_rmse = 1.0;
  std::size_t min_view_points = kMinProjectedPoints;
  double min_box_fraction = kMinBoxFraction;
  double max_box_fraction = kMaxBoxFraction;
  std::size_t threads = 4;
  std::vector<std::string> tiny_classes = default_tiny_classes();
};

struct CaptionSettings {
  // none, scripted, remote, record or replay.
  std::string mode = "none";
  // Inner transport when recording: scripted or remote.
  std::string source = "remote";
  std::filesystem::path fixtures;
  EndpointConfig vision;
  EndpointConfig language;
  std::size_t max_in_flight = 4;
};

struct RespondentConfig {
  // remote, constant, echo-length, oracle or replay.
  std::string kind;
  EndpointConfig endpoint;
  std::size_t context_limit = 0;
  std::string reply;
  std::filesystem::path fixtures;
  bool record = false;  // remote only: store every reply in `fixtures`
  std::size_t max_in_flight = 4;
};

struct SceneConfig {
  std::filesystem::path base_dir;
  std::string name = "scene";
  std::uint64_t seed = 0;

  std::filesystem::path map;
  std::filesystem::path cloud;
  std::optional<GeoPoint> cloud_origin;
  std::filesystem::path cloud_to_map;
  std::filesystem::path poses;
  std::filesystem::path images_dir;
  std::filesystem::path recon_to_cloud;
  std::filesystem::path tag_table;

  std::filesystem::path ssd_output;
  std::filesystem::path qa_output;

  SceneParameters params;
  CaptionSettings captioning;
  std::map<std::string, RespondentConfig> respondents;

  // Relative paths resolve against `base_dir`. Referenced inputs must
  // exist and parameters must be in range; violations throw
  // InvalidArgument or NotFound naming the field.
  static SceneConfig parse(std::string_view text, const std::filesystem::path& base_dir);
  static SceneConfig load(const std::filesystem::path& path);
};

struct DescribeResult {
  StructuredSceneDescription ssd;
  Warnings warnings;
  std::optional<AffineFit> cloud_fit;
  std::optional<SimilarityFit> pose_fit;
  std::size_t captioned_objects = 0;
};

// Runs every stage whose inputs are configured. Throws Alignment when a
// registration residual exceeds the configured threshold. In record mode
// the caption fixtures are saved before returning.
DescribeResult describe_scene(const SceneConfig& config);

struct AlignmentReport {
  std::optional<AffineFit> cloud_fit;
  std::optional<SimilarityFit> pose_fit;
  std::vector<double> cloud_residuals;
  std::vector<double> pose_residuals;
  double threshold = 0.0;
  std::size_t raster_width = 0;
  std::size_t raster_height = 0;
  std::size_t raster_occupied = 0;
  bool passed() const;
  std::string to_json() const;
};

// Fits the configured correspondence sets without running the pipeline.
// Writes the top-view raster of the cloud as PGM when `raster_path` is
// non-empty.
AlignmentReport align_check(const SceneConfig& config, const std::filesystem::path& raster_path = {});

// A respondent plus the fixture store it records into, if any.
struct RespondentHandle {
  Respondent respondent;
  std::shared_ptr<FixtureStore> store;
  std::filesystem::path store_path;
  // Saves recorded fixtures.
  void finish() const;
};

// "oracle" is always available; other names come from the config.
// Throws NotFound for unknown names.
RespondentHandle make_respondent(const SceneConfig* config, const std::string& name);

struct AskResult {
  std::string respondent;
  std::string model;
  std::string question;
  std::string ssd_sha256;
  std::size_t prompt_tokens = 0;
  std::string reply;
  std::string to_json() const;
};

// Scene description plus the question, no options; returns the raw reply.
AskResult ask_scene(const StructuredSceneDescription& ssd, std::string_view question, const Respondent& respondent);

}  // namespace urbanscene
