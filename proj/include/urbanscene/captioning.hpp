// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Per-object visual information: project an object's points into posed
// images, keep the best views, caption each view with a vision-language
// endpoint and summarize the captions with a language endpoint.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/chat.hpp"
#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"

namespace urbanscene {

inline constexpr std::size_t kDefaultViewCount = 4;
inline constexpr std::size_t kMinProjectedPoints = 10;
inline constexpr double kMinBoxFraction = 0.02;
inline constexpr double kMaxBoxFraction = 0.9;
inline constexpr int kBoxStroke = 3;
inline constexpr std::string_view kNoVisualInfo = "No visual information available.";

struct ViewBox {
  std::string image_id;
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
  std::size_t visible_points = 0;
  double area_fraction = 0.0;
  friend bool operator==(const ViewBox&, const ViewBox&) = default;
};

struct CaptionPair {
  std::string image_id;
  std::string self_caption;
  std::string surrounding_caption;
  friend bool operator==(const CaptionPair&, const CaptionPair&) = default;
};

struct VisualInfo {
  std::string summary;
  std::size_t source_views = 0;
  std::string model;
  bool from_fixture = false;
  bool available() const { return source_views > 0; }
  friend bool operator==(const VisualInfo&, const VisualInfo&) = default;
};

// Axis-aligned hull of the in-image projections of points in front of the
// camera, clipped to the image. Absent when fewer than `min_points` land in
// the image.
std::optional<ViewBox> project_bbox(const std::vector<LocalPoint>& points, const CameraPose& pose,
                                    std::size_t min_points = kMinProjectedPoints);

// Up to m boxes with area fraction in [lo, hi], largest first, ties by
// image id.
std::vector<ViewBox> select_views(std::vector<ViewBox> boxes, std::size_t m = kDefaultViewCount,
                                  double lo = kMinBoxFraction, double hi = kMaxBoxFraction);

std::string self_caption_prompt(std::string_view fclass);
std::string surrounding_caption_prompt(std::string_view fclass);
std::string summary_prompt(std::string_view fclass);

// Decoded image with the box drawn in red, re-encoded as PNG.
std::string highlight_box(std::string_view image_bytes, const ViewBox& box, int stroke = kBoxStroke);
// SHA-256 over the decoded pixel array (dimensions, type, pixels).
std::string pixel_digest(std::string_view image_bytes);
ContentPart image_part(std::string_view png_bytes);

struct CaptionClient {
  std::shared_ptr<ChatTransport> transport;
  std::string model;
  double temperature = 0.0;
  bool fixture = false;
};

// Sends the self and surrounding prompts with the highlighted image. An
// empty reply is retried once and then raises "empty caption". Transport
// failures are rethrown with the image id attached.
CaptionPair caption_object(const ViewBox& view, std::string_view image_bytes, std::string_view fclass,
                           const CaptionClient& client);

struct CaptionJob {
  ViewBox view;
  std::string image_bytes;
};

// Runs caption_object over the jobs with at most `max_in_flight` concurrent
// requests. The result is ordered by image id.
std::vector<CaptionPair> caption_views(const std::vector<CaptionJob>& jobs, std::string_view fclass,
                                       const CaptionClient& client, std::size_t max_in_flight = 4);

// One request carrying every pair, labeled by view. No pairs yields the
// no-visual-info marker without a request.
VisualInfo summarize_visual_info(std::vector<CaptionPair> pairs, std::string_view fclass,
                                 const CaptionClient& client);

}  // namespace urbanscene
