// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Footprint segmentation of an aligned point cloud and per-object geometric
// attributes (center, height, area, volume, bounding box).

#pragma once

#include <string>
#include <vector>

#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"

namespace urbanscene {

inline constexpr double kDefaultHeightPercentile = 0.98;
inline constexpr double kDefaultGroundPercentile = 0.05;
inline constexpr double kDefaultGroundRing = 5.0;

// Uniform xy bucket grid over a cloud. Query results are independent of the
// cell size.
class GridIndex {
 public:
  explicit GridIndex(const PointCloud& pc, double cell = 2.0);

  // Indices of points whose xy falls inside the closed box, ascending.
  std::vector<std::size_t> query(const Bounds2& box) const;
  double cell() const { return cell_; }

 private:
  const PointCloud* cloud_;
  double cell_;
  Vec2 origin_{};
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<std::size_t> offsets_;  // CSR layout, size cols*rows + 1
  std::vector<std::size_t> items_;
};

struct ObjectCloud {
  std::string object_id;
  std::vector<std::size_t> indices;  // into the source cloud, ascending
  std::vector<LocalPoint> points;

  bool empty() const { return points.empty(); }
};

// Points whose xy lies inside or on the footprint. An empty result records
// a warning when `warnings` is given.
ObjectCloud segment_by_footprint(const PointCloud& pc, const GridIndex& index,
                                 const LocalPolygon& footprint, const std::string& object_id,
                                 Warnings* warnings = nullptr);

struct GeometricInfo {
  GeoPoint center{};
  double height = 0.0;  // meters above local ground
  double area = 0.0;    // square meters
  double volume = 0.0;  // cubic meters, area * height
  GeoBounds bbox{};     // footprint bounds [min lon/lat, max lon/lat]
  bool no_points = false;
  std::size_t point_count = 0;
};

// Linear-interpolation percentile (q in [0, 1]) of a non-empty sample.
double percentile(std::vector<double> values, double q);

// Center and area come from the footprint; height is the chosen percentile
// of member z minus ground, floored at zero; volume = area * height. An empty
// cloud gives height 0, volume 0 and no_points = true.
GeometricInfo geometric_attributes(const ObjectCloud& oc, const Polygon2D& footprint,
                                   const EnuFrame& frame, double ground,
                                   double height_percentile = kDefaultHeightPercentile);

// Low percentile of z over the points within `ring` meters outside the
// footprint; falls back to the same percentile over the whole cloud when
// the ring holds no points.
double estimate_ground(const PointCloud& pc, const GridIndex& index, const LocalPolygon& footprint,
                       double ring = kDefaultGroundRing,
                       double ground_percentile = kDefaultGroundPercentile);

}  // namespace urbanscene
