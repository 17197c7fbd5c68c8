// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic spatial reasoner over a scene description. It answers the
// templated multiple-choice questions it generates, and doubles as the
// ground truth for evaluation runs.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/error.hpp"
#include "urbanscene/geo.hpp"
#include "urbanscene/ssd.hpp"

namespace urbanscene {

inline constexpr double kRoadSnapMeters = 1.0;

struct RoadLine {
  std::string name;
  std::vector<GeoPoint> points;
};

struct RoadEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;  // Haversine along `chain`
  std::string road;
  std::vector<GeoPoint> chain;  // from node a to node b
};

// Undirected. Nodes are polyline endpoints and junctions; endpoints within
// the snap distance of each other, or of another road, are merged into one
// node. Self-loops are dropped.
struct RoadGraph {
  std::vector<GeoPoint> nodes;
  std::vector<RoadEdge> edges;
  std::vector<std::vector<std::size_t>> adjacency;  // edge indices per node
  std::size_t nearest_node(const GeoPoint& p) const;
};

RoadGraph build_road_graph(const std::vector<RoadLine>& lines, double snap = kRoadSnapMeters);
// Named polyline entries of a scene description.
RoadGraph build_road_graph(const StructuredSceneDescription& ssd, double snap = kRoadSnapMeters);

struct Route {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
  double length = 0.0;
  // Road names along the route, consecutive repeats collapsed.
  std::vector<std::string> roads() const;
  const RoadGraph* graph = nullptr;
};

// Dijkstra between graph nodes; ties resolve toward lower node indices.
// Throws NotFound "no route" when b is unreachable. `banned` edges are
// skipped.
Route shortest_path(const RoadGraph& g, std::size_t a, std::size_t b,
                    const std::vector<bool>* banned = nullptr);
// From the node nearest a to the node nearest b.
Route shortest_path(const RoadGraph& g, const GeoPoint& a, const GeoPoint& b);

enum class QaCategory { Distance, Directional, Poi, Path, Grounding };
inline constexpr std::array<QaCategory, 5> kAllCategories = {
    QaCategory::Distance, QaCategory::Directional, QaCategory::Poi, QaCategory::Path, QaCategory::Grounding};
std::string_view to_string(QaCategory c);
std::optional<QaCategory> parse_category(std::string_view text);

enum class Provenance { Human, Generated };

struct QAItem {
  std::string id;
  QaCategory category = QaCategory::Distance;
  std::string question;
  std::array<std::string, 4> options;
  char answer = 'A';  // A-D
  Provenance provenance = Provenance::Generated;
  friend bool operator==(const QAItem&, const QAItem&) = default;
};

// Exactly four distinct options and an answer in A-D.
void validate(const QAItem& item);

// {"items": [{"id", "category", "question", "options": [4], "answer",
// "provenance"}]}
std::vector<QAItem> parse_qa(std::string_view text);
std::string write_qa(const std::vector<QAItem>& items);

struct OracleAnswer {
  char option = 'F';  // A-D, or F when no option fits
  std::string reasoning;
};

// Reusable answerer that caches the road graph of one description.
class Oracle {
 public:
  explicit Oracle(const StructuredSceneDescription& ssd);
  OracleAnswer answer(const QAItem& q) const;

 private:
  const StructuredSceneDescription& ssd_;
  RoadGraph roads_;
};

OracleAnswer answer(const StructuredSceneDescription& ssd, const QAItem& q);

// Word overlap used for grounding: distinct case-folded query words found
// in the text.
std::size_t word_overlap(std::string_view query, std::string_view text);

struct QaGeneration {
  std::vector<QAItem> items;
  Warnings warnings;
};

// Up to `per_category` items per category, deterministic for a seed. A
// category the scene cannot support is skipped with a warning.
QaGeneration generate_qa(const StructuredSceneDescription& ssd, std::size_t per_category, std::uint64_t seed);

// Seeded generator whose draws are identical across standard libraries:
// the engine output is fixed by the standard, the range reductions are ours.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  std::size_t below(std::size_t n);  // uniform in [0, n)
  double uniform();                  // [0, 1)
  double uniform(double lo, double hi);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace urbanscene
