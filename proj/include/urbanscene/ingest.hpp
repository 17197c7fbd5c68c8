// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Loading of the three input modalities: map extracts (OSM XML or GeoJSON),
// point clouds (ASCII XYZ or PLY) and camera pose manifests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "urbanscene/error.hpp"
#include "urbanscene/geo.hpp"

namespace urbanscene {

enum class GeometryKind { Polygon, Polyline, Point };

std::string_view to_string(GeometryKind kind);

using Geometry = std::variant<Polygon2D, Polyline, GeoPoint>;

struct MapObject {
  std::string id;
  std::optional<std::string> name;
  std::string fclass;
  std::optional<std::string> type;
  Geometry geometry;
  // Tags not consumed by the name/fclass/type mapping. Preserved, unused.
  std::map<std::string, std::string> tags;

  GeometryKind kind() const;
  // Name when present, otherwise the feature class.
  const std::string& label() const { return name ? *name : fclass; }
  friend bool operator==(const MapObject&, const MapObject&) = default;
};

// One tag-to-class rule. `fclass` and `type` accept the literal "$value"
// (the matched tag's value) or "tag:<key>" (another tag's value); an empty
// `type` leaves the type unset.
struct TagRule {
  std::string key;
  std::string fclass = "$value";
  std::string type;
  // Closed ways matching this rule become polygons unless area == false
  // (roads, barriers). An explicit area=yes tag always wins.
  bool area = true;
  // Values treated as "no specific type" when type is "$value".
  std::vector<std::string> untyped_values = {"yes"};
};

struct TagTable {
  std::vector<std::string> name_keys = {"name", "name:en"};
  std::vector<TagRule> rules;

  static TagTable defaults();
  // {"name_keys": [...], "rules": [{"key":..., "fclass":..., "type":..., "area":...}]}
  static TagTable from_json(std::string_view text);
};

// Feature classes that are described by name and coordinates only.
std::vector<std::string> default_tiny_classes();

struct MapParseResult {
  std::vector<MapObject> objects;
  Warnings warnings;
};

// Dispatches on the first non-blank byte: '<' for OSM XML, '{' for GeoJSON.
// Blank input yields an empty result. Malformed documents throw ParseError.
MapParseResult parse_map(std::string_view bytes, const TagTable& table = TagTable::defaults());
MapParseResult parse_osm_xml(std::string_view bytes, const TagTable& table = TagTable::defaults());
// Frame anchored at the center of the bounds of every object's geometry.
// Throws InvalidArgument for an empty object list.
EnuFrame scene_frame(const std::vector<MapObject>& objects);

MapParseResult parse_geojson(std::string_view bytes, const TagTable& table = TagTable::defaults());

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct PointCloud {
  std::vector<LocalPoint> points;
  std::vector<Rgb> colors;  // empty, or one per point
  GeoPoint origin{};        // ENU anchor of the point coordinates

  bool has_colors() const { return !colors.empty(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// ASCII XYZ ("x y z[ r g b]" per line, '#' comments, "# origin <lon> <lat>")
// or PLY (ascii / binary_little_endian, vertex element, "comment origin <lon>
// <lat>"). An explicit origin overrides the one in the header; one of the two
// must exist.
PointCloud load_point_cloud(std::string_view bytes,
                            std::optional<GeoPoint> origin = std::nullopt);

std::string write_xyz(const PointCloud& pc);
// Binary little-endian PLY with double coordinates, so load(write(pc)) == pc.
std::string write_ply(const PointCloud& pc);

struct CameraPose {
  std::string image_id;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  // camera = rotation * enu + translation; camera axes x right, y down,
  // z forward.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  // Image file, relative to the manifest's directory unless absolute.
  std::string image;

  Eigen::Vector3d to_camera(const Eigen::Vector3d& enu) const {
    return rotation * enu + translation;
  }
  // Pixel coordinates of an ENU point, or nullopt when it is not in front
  // of the camera.
  std::optional<Vec2> project(const Eigen::Vector3d& enu) const;
};

// Throws InvalidArgument naming the image when the pose violates its
// invariants (orthonormal rotation within 1e-6 with det +1, positive focal
// lengths and image dimensions).
void validate(const CameraPose& pose);

// JSON manifest: {"poses": [{"image_id", "fx", "fy", "cx", "cy", "width",
// "height", "rotation": [9 numbers, row-major], "translation": [3],
// "image"?}]}. A bare top-level array is accepted too.
std::vector<CameraPose> load_camera_poses(std::string_view bytes);
std::string write_camera_poses(const std::vector<CameraPose>& poses);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace urbanscene
