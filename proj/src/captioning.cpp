// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/captioning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace urbanscene {

namespace {

constexpr std::string_view kSelfTemplate =
    "You are an advanced AI image analysis system capable of generating detailed captions for object highlighted by "
    "a red bounding box in images. The red bounding box highlights a {fclass}. Please generate a detailed yet concise "
    "caption describing the {fclass}, focusing on:\n"
    "1. Describe its overall appearance, including color and shape\n"
    "2. Highlight any visible details or surface characteristics (e.g., patterns, textures, markings)\n"
    "3. Focus on any unique features in the top or upper portion of the {fclass}\n"
    "Please keep the description brief and to the point.";

constexpr std::string_view kSurroundingTemplate =
    "You are an advanced AI image analysis system capable of generating detailed captions for the surroundings of "
    "object highlighted by a red bounding box in images. The red bounding box highlights a {fclass}. Please generate "
    "a detailed yet concise caption describing the {fclass}, focusing on:\n"
    "1. Describe the surrounding objects (e.g., structures, vegetation and roads)\n"
    "2. Describe the spatial relationship between the {fclass} and its surroundings\n"
    "3. Note any significant features in the background and overall landscape\n"
    "Please keep the description brief and to the point.";

constexpr std::string_view kSummaryTemplate =
    "You are given captions of one {fclass} taken from several viewpoints. Each view has a Self-caption about the "
    "{fclass} and a Surrounding-caption about its context. Merge them into a single comprehensive and compact "
    "description of the {fclass} and its immediate environment. Reply with the description only.";

std::string substitute(std::string_view tmpl, std::string_view fclass) {
  std::string out;
  constexpr std::string_view kSlot = "{fclass}";
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = tmpl.find(kSlot, pos);
    out.append(tmpl.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos));
    if (hit == std::string_view::npos) break;
    out.append(fclass);
    pos = hit + kSlot.size();
  }
  return out;
}

cv::Mat decode(std::string_view bytes) {
  std::vector<uchar> buf(bytes.begin(), bytes.end());
  cv::Mat img = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (img.empty()) throw Error(ErrorCode::Parse, "cannot decode image");
  return img;
}

std::string encode_png(const cv::Mat& img) {
  std::vector<uchar> buf;
  if (!cv::imencode(".png", img, buf)) throw Error(ErrorCode::Internal, "PNG encoding failed");
  return {buf.begin(), buf.end()};
}

std::string digest_of(const cv::Mat& img) {
  const cv::Mat m = img.isContinuous() ? img : img.clone();
  std::string bytes = std::to_string(m.rows) + "x" + std::to_string(m.cols) + "x" + std::to_string(m.type()) + ":";
  bytes.append(reinterpret_cast<const char*>(m.data), m.total() * m.elemSize());
  return sha256_hex(bytes);
}

std::string ask(const CaptionClient& client, const std::string& system, const ContentPart& image,
                const std::string& image_id) {
  ChatRequest req;
  req.model = client.model;
  req.temperature = client.temperature;
  req.messages.push_back(ChatMessage::text("system", system));
  ChatMessage user;
  user.role = "user";
  user.parts.push_back(image);
  req.messages.push_back(std::move(user));
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string text;
    try {
      text = client.transport->complete(req).content;
    } catch (const Error& e) {
      throw Error(e.code(), "captioning image '" + image_id + "': " + e.what());
    }
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) return text;
  }
  throw Error(ErrorCode::Transport, "empty caption for image '" + image_id + "'");
}

}  // namespace

std::optional<ViewBox> project_bbox(const std::vector<LocalPoint>& points, const CameraPose& pose,
                                    std::size_t min_points) {
  ViewBox box;
  box.image_id = pose.image_id;
  box.u_min = box.v_min = std::numeric_limits<double>::infinity();
  box.u_max = box.v_max = -std::numeric_limits<double>::infinity();
  const double w = static_cast<double>(pose.width);
  const double h = static_cast<double>(pose.height);
  for (const LocalPoint& p : points) {
    const auto px = pose.project({p.x, p.y, p.z});
    if (!px || px->x < 0.0 || px->y < 0.0 || px->x > w || px->y > h) continue;
    ++box.visible_points;
    box.u_min = std::min(box.u_min, px->x);
    box.u_max = std::max(box.u_max, px->x);
    box.v_min = std::min(box.v_min, px->y);
    box.v_max = std::max(box.v_max, px->y);
  }
  if (box.visible_points < std::max<std::size_t>(min_points, 1)) return std::nullopt;
  if (!(box.u_max > box.u_min) || !(box.v_max > box.v_min)) return std::nullopt;
  box.area_fraction = (box.u_max - box.u_min) * (box.v_max - box.v_min) / (w * h);
  return box;
}

std::vector<ViewBox> select_views(std::vector<ViewBox> boxes, std::size_t m, double lo, double hi) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "view count must be at least 1");
  std::erase_if(boxes, [&](const ViewBox& b) { return b.area_fraction < lo || b.area_fraction > hi; });
  std::sort(boxes.begin(), boxes.end(), [](const ViewBox& a, const ViewBox& b) {
    if (a.area_fraction != b.area_fraction) return a.area_fraction > b.area_fraction;
    return a.image_id < b.image_id;
  });
  if (boxes.size() > m) boxes.resize(m);
  return boxes;
}

std::string self_caption_prompt(std::string_view fclass) { return substitute(kSelfTemplate, fclass); }

std::string surrounding_caption_prompt(std::string_view fclass) { return substitute(kSurroundingTemplate, fclass); }

std::string summary_prompt(std::string_view fclass) { return substitute(kSummaryTemplate, fclass); }

std::string highlight_box(std::string_view image_bytes, const ViewBox& box, int stroke) {
  cv::Mat img = decode(image_bytes);
  const cv::Point tl(static_cast<int>(std::floor(box.u_min)), static_cast<int>(std::floor(box.v_min)));
  const cv::Point br(static_cast<int>(std::ceil(box.u_max)), static_cast<int>(std::ceil(box.v_max)));
  cv::rectangle(img, tl, br, cv::Scalar(0, 0, 255), stroke, cv::LINE_8);
  return encode_png(img);
}

std::string pixel_digest(std::string_view image_bytes) { return digest_of(decode(image_bytes)); }

ContentPart image_part(std::string_view png_bytes) {
  return ContentPart::make_image("data:image/png;base64," + base64_encode(png_bytes), pixel_digest(png_bytes));
}

CaptionPair caption_object(const ViewBox& view, std::string_view image_bytes, std::string_view fclass,
                           const CaptionClient& client) {
  if (!client.transport) throw Error(ErrorCode::InvalidArgument, "caption client has no transport");
  const ContentPart image = image_part(highlight_box(image_bytes, view));
  CaptionPair pair;
  pair.image_id = view.image_id;
  pair.self_caption = ask(client, self_caption_prompt(fclass), image, view.image_id);
  pair.surrounding_caption = ask(client, surrounding_caption_prompt(fclass), image, view.image_id);
  return pair;
}

std::vector<CaptionPair> caption_views(const std::vector<CaptionJob>& jobs, std::string_view fclass,
                                       const CaptionClient& client, std::size_t max_in_flight) {
  std::vector<CaptionPair> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i] = caption_object(jobs[i].view, jobs[i].image_bytes, fclass, client);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(std::max<std::size_t>(max_in_flight, 1), jobs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(out.begin(), out.end(), [](const CaptionPair& a, const CaptionPair& b) { return a.image_id < b.image_id; });
  return out;
}

VisualInfo summarize_visual_info(std::vector<CaptionPair> pairs, std::string_view fclass,
                                 const CaptionClient& client) {
  VisualInfo info;
  info.model = client.model;
  info.from_fixture = client.fixture;
  if (pairs.empty()) {
    info.summary = std::string(kNoVisualInfo);
    return info;
  }
  if (!client.transport) throw Error(ErrorCode::InvalidArgument, "summary client has no transport");
  std::sort(pairs.begin(), pairs.end(), [](const CaptionPair& a, const CaptionPair& b) { return a.image_id < b.image_id; });
  std::string body;
  for (const CaptionPair& p : pairs) {
    if (!body.empty()) body += "\n";
    body += "View " + p.image_id + "\nSelf-caption: " + p.self_caption + "\nSurrounding-caption: " +
            p.surrounding_caption + "\n";
  }
  ChatRequest req;
  req.model = client.model;
  req.temperature = client.temperature;
  req.messages.push_back(ChatMessage::text("system", summary_prompt(fclass)));
  req.messages.push_back(ChatMessage::text("user", body));
  info.summary = client.transport->complete(req).content;
  while (!info.summary.empty() && std::isspace(static_cast<unsigned char>(info.summary.back()))) info.summary.pop_back();
  if (info.summary.empty()) throw Error(ErrorCode::Transport, "empty visual summary");
  info.source_views = pairs.size();
  return info;
}

}  // namespace urbanscene
