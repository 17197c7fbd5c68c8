// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Registration of the input modalities into one metric frame: the scanned
// cloud onto the map through a planar affine fitted on its top-view raster,
// and the photogrammetric reconstruction onto the scanned cloud through a
// 7-DOF similarity.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "urbanscene/geo.hpp"
#include "urbanscene/ingest.hpp"

namespace urbanscene {

inline constexpr double kDefaultRasterCell = 0.5;
inline constexpr std::size_t kDefaultRasterCellCap = 50'000'000;

// Top view of a cloud: per-cell occupancy and maximum z.
struct TopViewRaster {
  Vec2 origin{};  // xy of the lower-left corner of cell (0, 0)
  double cell = kDefaultRasterCell;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> counts;  // row-major, row 0 at min y
  std::vector<double> max_z;          // NaN where empty

  std::size_t index(std::size_t col, std::size_t row) const { return row * width + col; }
  bool occupied(std::size_t col, std::size_t row) const { return counts[index(col, row)] > 0; }
  std::size_t occupied_count() const;
  Vec2 cell_center(std::size_t col, std::size_t row) const;
  // 8-bit PGM of max z (north up), for picking correspondences by hand.
  std::string to_pgm() const;
};

// Throws InvalidArgument for cell <= 0 or when the grid would exceed
// max_cells.
TopViewRaster rasterize_topview(const PointCloud& pc, double cell = kDefaultRasterCell,
                                std::size_t max_cells = kDefaultRasterCellCap);

struct Affine2D {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Vec2 apply(const Vec2& p) const;
  Affine2D inverse() const;
  // (this ∘ inner)(p) = this->apply(inner.apply(p))
  Affine2D compose(const Affine2D& inner) const;
};

struct Similarity3D {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
  Similarity3D inverse() const;
  Similarity3D compose(const Similarity3D& inner) const;
};

// Paired source/target points; 2D sets keep z = 0.
struct CorrespondenceSet {
  int dimension = 2;
  std::vector<Eigen::Vector3d> source;
  std::vector<Eigen::Vector3d> target;

  std::size_t size() const { return source.size(); }
  void add(const Vec2& src, const Vec2& dst);
  void add(const Eigen::Vector3d& src, const Eigen::Vector3d& dst);
};

// Delimited text with a header naming the columns src_x, src_y[, src_z],
// dst_x, dst_y[, dst_z] (an optional leading id column is ignored). Commas or
// whitespace separate fields; '#' starts a comment line.
CorrespondenceSet parse_correspondences(std::string_view text);
std::string write_correspondences(const CorrespondenceSet& set);

struct AffineFit {
  Affine2D transform;
  double rmse = 0.0;
};

struct SimilarityFit {
  Similarity3D transform;
  double rmse = 0.0;
};

// Least-squares affine from the normal equations. Throws Degenerate
// ("degenerate correspondences") for fewer than 3 pairs or collinear sources.
AffineFit fit_affine_2d(const CorrespondenceSet& set);

// Closed-form least-squares similarity: demeaned cross-covariance, SVD
// rotation with a reflection guard (det R = +1 always), variance-ratio scale.
// Throws Degenerate for fewer than 3 pairs, collinear or coincident points.
SimilarityFit fit_similarity_7dof(const CorrespondenceSet& set);

double rmse(const Affine2D& t, const CorrespondenceSet& set);
double rmse(const Similarity3D& t, const CorrespondenceSet& set);

Vec2 apply_transform(const Affine2D& t, const Vec2& p);
LocalPoint apply_transform(const Affine2D& t, const LocalPoint& p);
// Transforms x/y of every point; z, colors and origin are kept.
PointCloud apply_transform(const Affine2D& t, const PointCloud& pc);
LocalPolygon apply_transform(const Affine2D& t, const LocalPolygon& poly);

LocalPoint apply_transform(const Similarity3D& t, const LocalPoint& p);
PointCloud apply_transform(const Similarity3D& t, const PointCloud& pc);
// Re-expresses a camera posed in the transform's source frame in its target
// frame. Pixel projections of corresponding points are unchanged.
CameraPose apply_transform(const Similarity3D& t, const CameraPose& pose);

// JSON with every parameter at round-trip precision.
std::string serialize(const Affine2D& t, double rmse);
std::string serialize(const Similarity3D& t, double rmse);
Affine2D parse_affine(std::string_view text);
Similarity3D parse_similarity(std::string_view text);

}  // namespace urbanscene
