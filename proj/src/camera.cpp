// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "urbanscene/ingest.hpp"

namespace urbanscene {

namespace {

using json = nlohmann::json;

constexpr double kOrthonormalTolerance = 1e-6;

// Depth below which a point counts as behind the image plane.
constexpr double kMinDepth = 1e-9;

CameraPose pose_from_json(const json& j, std::size_t index) {
  CameraPose pose;
  try {
    pose.image_id = j.at("image_id").get<std::string>();
    pose.fx = j.at("fx").get<double>();
    pose.fy = j.at("fy").get<double>();
    pose.cx = j.at("cx").get<double>();
    pose.cy = j.at("cy").get<double>();
    pose.width = j.at("width").get<int>();
    pose.height = j.at("height").get<int>();
    const auto r = j.at("rotation").get<std::vector<double>>();
    const auto t = j.at("translation").get<std::vector<double>>();
    if (r.size() != 9) throw Error(ErrorCode::Parse, "rotation needs 9 values");
    if (t.size() != 3) throw Error(ErrorCode::Parse, "translation needs 3 values");
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) pose.rotation(row, col) = r[static_cast<std::size_t>(row * 3 + col)];
    }
    pose.translation = Eigen::Vector3d(t[0], t[1], t[2]);
    pose.image = j.value("image", std::string());
  } catch (const json::exception& e) {
    throw ParseError("pose record " + std::to_string(index) + ": " + e.what(), 0, 0);
  } catch (const Error& e) {
    throw ParseError("pose record " + std::to_string(index) + ": " + e.what(), 0, 0);
  }
  return pose;
}

}  // namespace

std::optional<Vec2> CameraPose::project(const Eigen::Vector3d& enu) const {
  const Eigen::Vector3d c = to_camera(enu);
  if (!(c.z() > kMinDepth)) return std::nullopt;
  return Vec2{fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy};
}

void validate(const CameraPose& pose) {
  const std::string who = "camera pose '" + pose.image_id + "': ";
  if (pose.image_id.empty()) throw Error(ErrorCode::InvalidArgument, "camera pose without image id");
  if (!(pose.fx > 0.0) || !(pose.fy > 0.0) || !std::isfinite(pose.fx) || !std::isfinite(pose.fy)) {
    throw Error(ErrorCode::InvalidArgument, who + "focal lengths must be positive");
  }
  if (!std::isfinite(pose.cx) || !std::isfinite(pose.cy)) {
    throw Error(ErrorCode::InvalidArgument, who + "principal point must be finite");
  }
  if (pose.width <= 0 || pose.height <= 0) {
    throw Error(ErrorCode::InvalidArgument, who + "image dimensions must be positive");
  }
  if (!pose.rotation.allFinite() || !pose.translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, who + "extrinsics must be finite");
  }
  const double err = (pose.rotation.transpose() * pose.rotation - Eigen::Matrix3d::Identity())
                         .cwiseAbs()
                         .maxCoeff();
  if (err > kOrthonormalTolerance) {
    throw Error(ErrorCode::InvalidArgument, who + "rotation is not orthonormal (max |R^T R - I| = " +
                                                std::to_string(err) + ")");
  }
  if (pose.rotation.determinant() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, who + "rotation has determinant -1 (reflection)");
  }
}

std::vector<CameraPose> load_camera_poses(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pose manifest: ") + e.what(), 0, e.byte);
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("poses")) throw ParseError("pose manifest: missing 'poses' array", 1, 0);
    list = &doc.at("poses");
  }
  if (!list->is_array()) throw ParseError("pose manifest: 'poses' must be an array", 1, 0);
  std::vector<CameraPose> poses;
  std::size_t index = 0;
  for (const json& j : *list) {
    CameraPose pose = pose_from_json(j, index++);
    validate(pose);
    poses.push_back(std::move(pose));
  }
  return poses;
}

std::string write_camera_poses(const std::vector<CameraPose>& poses) {
  json list = json::array();
  for (const CameraPose& p : poses) {
    json j;
    j["image_id"] = p.image_id;
    j["fx"] = p.fx;
    j["fy"] = p.fy;
    j["cx"] = p.cx;
    j["cy"] = p.cy;
    j["width"] = p.width;
    j["height"] = p.height;
    std::vector<double> r;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) r.push_back(p.rotation(row, col));
    }
    j["rotation"] = r;
    j["translation"] = {p.translation.x(), p.translation.y(), p.translation.z()};
    if (!p.image.empty()) j["image"] = p.image;
    list.push_back(std::move(j));
  }
  return json{{"poses", list}}.dump(2) + "\n";
}

}  // namespace urbanscene
