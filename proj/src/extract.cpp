// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace urbanscene {

GridIndex::GridIndex(const PointCloud& pc, double cell) : cloud_(&pc), cell_(cell) {
  if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid index cell must be positive");
  if (pc.points.empty()) {
    offsets_.assign(1, 0);
    return;
  }
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-lo.x, -lo.y};
  for (const LocalPoint& p : pc.points) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  // Grow the cell when the extent would need an absurd number of buckets.
  constexpr double kMaxBuckets = 1 << 24;
  while (((hi.x - lo.x) / cell_ + 1.0) * ((hi.y - lo.y) / cell_ + 1.0) > kMaxBuckets) cell_ *= 2.0;
  origin_ = lo;
  cols_ = static_cast<std::size_t>(std::floor((hi.x - lo.x) / cell_)) + 1;
  rows_ = static_cast<std::size_t>(std::floor((hi.y - lo.y) / cell_)) + 1;

  std::vector<std::size_t> bucket(pc.points.size());
  offsets_.assign(cols_ * rows_ + 1, 0);
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    const auto c = std::min(static_cast<std::size_t>((pc.points[i].x - lo.x) / cell_), cols_ - 1);
    const auto r = std::min(static_cast<std::size_t>((pc.points[i].y - lo.y) / cell_), rows_ - 1);
    bucket[i] = r * cols_ + c;
    ++offsets_[bucket[i] + 1];
  }
  for (std::size_t b = 0; b < cols_ * rows_; ++b) offsets_[b + 1] += offsets_[b];
  items_.resize(pc.points.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < pc.points.size(); ++i) items_[fill[bucket[i]]++] = i;
}

std::vector<std::size_t> GridIndex::query(const Bounds2& box) const {
  std::vector<std::size_t> out;
  if (items_.empty() || box.max.x < origin_.x || box.max.y < origin_.y) return out;
  auto clamp_cell = [](double v, std::size_t n) {
    if (v < 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(v), n - 1);
  };
  const std::size_t c0 = clamp_cell((box.min.x - origin_.x) / cell_, cols_);
  const std::size_t c1 = clamp_cell((box.max.x - origin_.x) / cell_, cols_);
  const std::size_t r0 = clamp_cell((box.min.y - origin_.y) / cell_, rows_);
  const std::size_t r1 = clamp_cell((box.max.y - origin_.y) / cell_, rows_);
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      const std::size_t b = r * cols_ + c;
      for (std::size_t k = offsets_[b]; k < offsets_[b + 1]; ++k) {
        const std::size_t i = items_[k];
        if (box.contains(cloud_->points[i].xy())) out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ObjectCloud segment_by_footprint(const PointCloud& pc, const GridIndex& index,
                                 const LocalPolygon& footprint, const std::string& object_id,
                                 Warnings* warnings) {
  ObjectCloud oc;
  oc.object_id = object_id;
  for (std::size_t i : index.query(bounds(footprint))) {
    if (point_in_polygon(pc.points[i], footprint)) {
      oc.indices.push_back(i);
      oc.points.push_back(pc.points[i]);
    }
  }
  if (oc.empty() && warnings) {
    warnings->push_back({"extract", object_id, "footprint contains no cloud points"});
  }
  return oc;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "percentile must lie in [0, 1]");
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  if (hi == lo || h == static_cast<double>(lo)) return v_lo;
  const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

GeometricInfo geometric_attributes(const ObjectCloud& oc, const Polygon2D& footprint,
                                   const EnuFrame& frame, double ground, double height_percentile) {
  const LocalPolygon local = project(footprint, frame);
  GeometricInfo info;
  info.area = polygon_area(local);
  info.center = frame.to_geo(polygon_centroid(local));
  info.bbox = bounds(footprint.exterior);
  info.point_count = oc.points.size();
  if (oc.empty()) {
    info.no_points = true;
    return info;
  }
  std::vector<double> z;
  z.reserve(oc.points.size());
  for (const LocalPoint& p : oc.points) z.push_back(p.z);
  info.height = std::max(0.0, percentile(std::move(z), height_percentile) - ground);
  info.volume = info.area * info.height;
  return info;
}

double estimate_ground(const PointCloud& pc, const GridIndex& index, const LocalPolygon& footprint,
                       double ring, double ground_percentile) {
  if (!(ring > 0.0)) throw Error(ErrorCode::InvalidArgument, "ground ring width must be positive");
  if (pc.points.empty()) throw Error(ErrorCode::InvalidArgument, "cannot estimate ground of an empty cloud");
  Bounds2 box = bounds(footprint);
  box.min = box.min - Vec2{ring, ring};
  box.max = box.max + Vec2{ring, ring};
  std::vector<double> z;
  for (std::size_t i : index.query(box)) {
    const Vec2 p = pc.points[i].xy();
    if (point_in_polygon(p, footprint)) continue;
    if (distance_to_boundary(p, footprint) <= ring) z.push_back(pc.points[i].z);
  }
  if (z.empty()) {
    z.reserve(pc.points.size());
    for (const LocalPoint& p : pc.points) z.push_back(p.z);
  }
  return percentile(std::move(z), ground_percentile);
}

}  // namespace urbanscene
