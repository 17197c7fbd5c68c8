// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Structured scene description: one block set per object, keyed and ordered
// by object id, plus name/coordinate entries for tiny point objects and
// polylines.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/captioning.hpp"
#include "urbanscene/extract.hpp"
#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"
#include "urbanscene/relations.hpp"

namespace urbanscene {

// Numeric ids order numerically (by length, then digits); other ids follow
// in plain lexicographic order.
struct IdLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

struct IdentityBlock {
  std::optional<std::string> name;
  std::string fclass;
  std::optional<std::string> type;
  friend bool operator==(const IdentityBlock&, const IdentityBlock&) = default;
};

// Values are stored already rounded to their serialized precision:
// coordinates to 5 decimals, metric quantities to whole units.
struct GeometricBlock {
  GeoPoint center{};
  std::optional<double> height;
  std::optional<double> area;
  std::optional<double> volume;
  std::optional<GeoBounds> bbox;
  friend bool operator==(const GeometricBlock&, const GeometricBlock&) = default;
};

struct SceneObjectDescription {
  std::string id;
  std::optional<IdentityBlock> identity;
  std::optional<GeometricBlock> geometric;
  std::optional<std::string> visual;
  std::optional<std::vector<SpatialRelation>> spatial;
  std::optional<TopologyRelation> topology;
  friend bool operator==(const SceneObjectDescription&, const SceneObjectDescription&) = default;
};

// Point entries carry one coordinate pair, polyline entries several.
struct FeatureEntry {
  std::string id;
  std::optional<std::string> name;
  std::optional<std::vector<GeoPoint>> coordinates;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

struct SceneMetadata {
  std::string name = "scene";
  GeoPoint origin{};
  std::string datum = "above local ground";
  friend bool operator==(const SceneMetadata&, const SceneMetadata&) = default;
};

struct StructuredSceneDescription {
  SceneMetadata metadata;
  std::map<std::string, SceneObjectDescription, IdLess> objects;
  std::map<std::string, FeatureEntry, IdLess> points;
  std::map<std::string, FeatureEntry, IdLess> polylines;
  friend bool operator==(const StructuredSceneDescription&, const StructuredSceneDescription&) = default;
};

struct AblationMask {
  bool drop_identity = false;
  bool drop_geometric = false;
  bool drop_visual = false;
  bool drop_relationship = false;
  bool any() const { return drop_identity || drop_geometric || drop_visual || drop_relationship; }
  std::string describe() const;
  friend bool operator==(const AblationMask&, const AblationMask&) = default;
};

struct SsdInputs {
  SceneMetadata metadata;
  std::vector<MapObject> objects;
  std::map<std::string, GeometricInfo> geometry;
  std::map<std::string, VisualInfo> visual;
  std::map<std::string, std::vector<SpatialRelation>> spatial;
  std::map<std::string, TopologyRelation> topology;
  std::vector<std::string> tiny_classes = default_tiny_classes();
};

// Polygons and non-tiny points become full descriptions with whatever
// blocks have inputs; tiny points and polylines become name/coordinate
// entries. Throws InvalidArgument on duplicate ids.
StructuredSceneDescription assemble_ssd(const SsdInputs& in);

std::string serialize(const StructuredSceneDescription& ssd);
// Throws ParseError with line and offset on malformed documents.
StructuredSceneDescription parse_ssd(std::string_view text);

// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view doc);

StructuredSceneDescription apply_ablation(StructuredSceneDescription ssd, const AblationMask& mask);

double round_coordinate(double deg);
double round_whole(double v);

}  // namespace urbanscene
