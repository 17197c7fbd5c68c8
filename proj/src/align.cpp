// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/align.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <json.hpp>

namespace urbanscene {

namespace {

using json = nlohmann::json;

// Relative size below which a covariance direction counts as missing.
constexpr double kRankTolerance = 1e-12;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == ';'; };
  while (i < line.size()) {
    while (i < line.size() && sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Eigen::Vector3d centroid(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

void require_pairs(const CorrespondenceSet& set) {
  if (set.source.size() != set.target.size()) {
    throw Error(ErrorCode::InvalidArgument, "correspondence set has unequal source/target sizes");
  }
  if (set.size() < 3) {
    throw Error(ErrorCode::Degenerate, "degenerate correspondences: at least 3 pairs required");
  }
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Matrix>
Matrix matrix_from_json(const json& j) {
  Matrix m;
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw Error(ErrorCode::Parse, "transform matrix has the wrong shape");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw Error(ErrorCode::Parse, "transform matrix has the wrong shape");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json parse_transform_json(std::string_view text, const char* expected_type) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("transform: ") + e.what(), 0, e.byte);
  }
  if (doc.value("type", "") != expected_type) {
    throw ParseError(std::string("transform: expected type '") + expected_type + "'", 1, 0);
  }
  return doc;
}

}  // namespace

std::size_t TopViewRaster::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

Vec2 TopViewRaster::cell_center(std::size_t col, std::size_t row) const {
  return {origin.x + (static_cast<double>(col) + 0.5) * cell, origin.y + (static_cast<double>(row) + 0.5) * cell};
}

std::string TopViewRaster::to_pgm() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double z : max_z) {
    if (!std::isnan(z)) {
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  }
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + width * height);
  for (std::size_t r = height; r-- > 0;) {
    for (std::size_t c = 0; c < width; ++c) {
      const double z = max_z[index(c, r)];
      unsigned char v = 0;
      if (!std::isnan(z)) {
        const double t = hi > lo ? (z - lo) / (hi - lo) : 1.0;
        v = static_cast<unsigned char>(std::lround(32.0 + 223.0 * t));
      }
      out.push_back(static_cast<char>(v));
    }
  }
  return out;
}

TopViewRaster rasterize_topview(const PointCloud& pc, double cell, std::size_t max_cells) {
  if (!(cell > 0.0) || !std::isfinite(cell)) {
    throw Error(ErrorCode::InvalidArgument, "raster cell size must be positive");
  }
  if (pc.points.empty()) throw Error(ErrorCode::InvalidArgument, "cannot rasterize an empty cloud");
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-lo.x, -lo.y};
  for (const LocalPoint& p : pc.points) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const double w = std::floor((hi.x - lo.x) / cell) + 1.0;
  const double h = std::floor((hi.y - lo.y) / cell) + 1.0;
  if (w * h > static_cast<double>(max_cells)) {
    throw Error(ErrorCode::InvalidArgument,
                "raster of " + std::to_string(static_cast<long long>(w)) + "x" +
                    std::to_string(static_cast<long long>(h)) + " cells exceeds the cap of " +
                    std::to_string(max_cells));
  }
  TopViewRaster r;
  r.origin = lo;
  r.cell = cell;
  r.width = static_cast<std::size_t>(w);
  r.height = static_cast<std::size_t>(h);
  r.counts.assign(r.width * r.height, 0);
  r.max_z.assign(r.width * r.height, std::numeric_limits<double>::quiet_NaN());
  for (const LocalPoint& p : pc.points) {
    const auto col = std::min(static_cast<std::size_t>((p.x - lo.x) / cell), r.width - 1);
    const auto row = std::min(static_cast<std::size_t>((p.y - lo.y) / cell), r.height - 1);
    const std::size_t i = r.index(col, row);
    ++r.counts[i];
    if (std::isnan(r.max_z[i]) || p.z > r.max_z[i]) r.max_z[i] = p.z;
  }
  return r;
}

Vec2 Affine2D::apply(const Vec2& p) const {
  const Eigen::Vector2d v = linear * Eigen::Vector2d(p.x, p.y) + translation;
  return {v.x(), v.y()};
}

Affine2D Affine2D::inverse() const {
  if (std::abs(linear.determinant()) <= 1e-12) {
    throw Error(ErrorCode::Degenerate, "affine transform is singular");
  }
  Affine2D inv;
  inv.linear = linear.inverse();
  inv.translation = -inv.linear * translation;
  return inv;
}

Affine2D Affine2D::compose(const Affine2D& inner) const {
  Affine2D out;
  out.linear = linear * inner.linear;
  out.translation = linear * inner.translation + translation;
  return out;
}

Similarity3D Similarity3D::inverse() const {
  Similarity3D inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

Similarity3D Similarity3D::compose(const Similarity3D& inner) const {
  Similarity3D out;
  out.scale = scale * inner.scale;
  out.rotation = rotation * inner.rotation;
  out.translation = scale * (rotation * inner.translation) + translation;
  return out;
}

void CorrespondenceSet::add(const Vec2& src, const Vec2& dst) {
  if (source.empty()) dimension = 2;
  if (dimension != 2) throw Error(ErrorCode::InvalidArgument, "2D pair added to a 3D correspondence set");
  source.emplace_back(src.x, src.y, 0.0);
  target.emplace_back(dst.x, dst.y, 0.0);
}

void CorrespondenceSet::add(const Eigen::Vector3d& src, const Eigen::Vector3d& dst) {
  if (source.empty()) dimension = 3;
  if (dimension != 3) throw Error(ErrorCode::InvalidArgument, "3D pair added to a 2D correspondence set");
  source.push_back(src);
  target.push_back(dst);
}

CorrespondenceSet parse_correspondences(std::string_view text) {
  CorrespondenceSet set;
  std::map<std::string, std::size_t> columns;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    const std::size_t line_offset = pos;
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) columns[std::string(fields[i])] = i;
      for (const char* required : {"src_x", "src_y", "dst_x", "dst_y"}) {
        if (!columns.count(required)) {
          throw ParseError(std::string("correspondences: header lacks column '") + required + "'", line_no,
                           line_offset);
        }
      }
      const bool src_z = columns.count("src_z") > 0;
      const bool dst_z = columns.count("dst_z") > 0;
      if (src_z != dst_z) throw ParseError("correspondences: src_z and dst_z must appear together", line_no, line_offset);
      set.dimension = src_z ? 3 : 2;
      have_header = true;
      continue;
    }
    if (fields.size() != columns.size()) {
      throw ParseError("correspondences: line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, header has " + std::to_string(columns.size()),
                       line_no, line_offset);
    }
    auto get = [&](const char* name) {
      const std::string_view f = fields[columns.at(name)];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError("correspondences: invalid number '" + std::string(f) + "' on line " +
                             std::to_string(line_no),
                         line_no, line_offset);
      }
      return v;
    };
    if (set.dimension == 3) {
      set.add(Eigen::Vector3d(get("src_x"), get("src_y"), get("src_z")),
              Eigen::Vector3d(get("dst_x"), get("dst_y"), get("dst_z")));
    } else {
      set.add(Vec2{get("src_x"), get("src_y")}, Vec2{get("dst_x"), get("dst_y")});
    }
  }
  if (!have_header) throw ParseError("correspondences: missing header line", 1, 0);
  return set;
}

std::string write_correspondences(const CorrespondenceSet& set) {
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  std::string out = set.dimension == 3 ? "src_x,src_y,src_z,dst_x,dst_y,dst_z\n" : "src_x,src_y,dst_x,dst_y\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set.source[i];
    const auto& d = set.target[i];
    if (set.dimension == 3) {
      out += num(s.x()) + "," + num(s.y()) + "," + num(s.z()) + "," + num(d.x()) + "," + num(d.y()) + "," +
             num(d.z()) + "\n";
    } else {
      out += num(s.x()) + "," + num(s.y()) + "," + num(d.x()) + "," + num(d.y()) + "\n";
    }
  }
  return out;
}

AffineFit fit_affine_2d(const CorrespondenceSet& set) {
  require_pairs(set);
  const std::size_t n = set.size();
  Eigen::Vector2d mean_src = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_dst = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_src += set.source[i].head<2>();
    mean_dst += set.target[i].head<2>();
  }
  mean_src /= static_cast<double>(n);
  mean_dst /= static_cast<double>(n);

  // Normal equations with the translation eliminated by centering:
  // L * (sum ds ds^T) = sum dd ds^T.
  Eigen::Matrix2d ss = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d ds = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d s = set.source[i].head<2>() - mean_src;
    const Eigen::Vector2d d = set.target[i].head<2>() - mean_dst;
    ss += s * s.transpose();
    ds += d * s.transpose();
  }
  const double trace = ss.trace();
  if (!(trace > 0.0) || ss.determinant() <= kRankTolerance * trace * trace) {
    throw Error(ErrorCode::Degenerate, "degenerate correspondences: source points are collinear or coincident");
  }
  AffineFit fit;
  fit.transform.linear = ss.transpose().ldlt().solve(ds.transpose()).transpose();
  fit.transform.translation = mean_dst - fit.transform.linear * mean_src;
  if (std::abs(fit.transform.linear.determinant()) <= 1e-12) {
    throw Error(ErrorCode::Degenerate, "degenerate correspondences: fitted affine is singular");
  }
  fit.rmse = rmse(fit.transform, set);
  return fit;
}

SimilarityFit fit_similarity_7dof(const CorrespondenceSet& set) {
  require_pairs(set);
  const std::size_t n = set.size();
  const Eigen::Vector3d mu_src = centroid(set.source);
  const Eigen::Vector3d mu_dst = centroid(set.target);

  Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_cov = Eigen::Matrix3d::Zero();
  double src_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = set.source[i] - mu_src;
    const Eigen::Vector3d d = set.target[i] - mu_dst;
    cross_cov += d * s.transpose();
    src_cov += s * s.transpose();
    src_var += s.squaredNorm();
  }
  cross_cov /= static_cast<double>(n);
  src_cov /= static_cast<double>(n);
  src_var /= static_cast<double>(n);

  const Eigen::JacobiSVD<Eigen::Matrix3d> src_svd(src_cov);
  const Eigen::Vector3d src_sv = src_svd.singularValues();
  if (!(src_sv(0) > 0.0) || src_sv(1) <= kRankTolerance * src_sv(0)) {
    throw Error(ErrorCode::Degenerate, "degenerate correspondences: source points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d s = Eigen::Vector3d::Ones();
  if (u.determinant() * v.determinant() < 0.0) s(2) = -1.0;

  SimilarityFit fit;
  fit.transform.rotation = u * s.asDiagonal() * v.transpose();
  const double scale = svd.singularValues().dot(s) / src_var;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::Degenerate, "degenerate correspondences: target points are coincident");
  }
  fit.transform.scale = scale;
  fit.transform.translation = mu_dst - scale * (fit.transform.rotation * mu_src);
  fit.rmse = rmse(fit.transform, set);
  return fit;
}

double rmse(const Affine2D& t, const CorrespondenceSet& set) {
  if (set.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Vector2d r = t.linear * set.source[i].head<2>() + t.translation - set.target[i].head<2>();
    sum += r.squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(set.size()));
}

double rmse(const Similarity3D& t, const CorrespondenceSet& set) {
  if (set.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) sum += (t.apply(set.source[i]) - set.target[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(set.size()));
}

Vec2 apply_transform(const Affine2D& t, const Vec2& p) { return t.apply(p); }

LocalPoint apply_transform(const Affine2D& t, const LocalPoint& p) {
  const Vec2 v = t.apply(p.xy());
  return {v.x, v.y, p.z};
}

PointCloud apply_transform(const Affine2D& t, const PointCloud& pc) {
  PointCloud out = pc;
  for (LocalPoint& p : out.points) p = apply_transform(t, p);
  return out;
}

LocalPolygon apply_transform(const Affine2D& t, const LocalPolygon& poly) {
  LocalPolygon out = poly;
  for (Vec2& v : out.exterior) v = t.apply(v);
  for (Ring& h : out.holes) {
    for (Vec2& v : h) v = t.apply(v);
  }
  return out;
}

LocalPoint apply_transform(const Similarity3D& t, const LocalPoint& p) {
  const Eigen::Vector3d v = t.apply(Eigen::Vector3d(p.x, p.y, p.z));
  return {v.x(), v.y(), v.z()};
}

PointCloud apply_transform(const Similarity3D& t, const PointCloud& pc) {
  PointCloud out = pc;
  for (LocalPoint& p : out.points) p = apply_transform(t, p);
  return out;
}

CameraPose apply_transform(const Similarity3D& t, const CameraPose& pose) {
  // x_cam = R_c X_src + t_c and X_src = R_s^T (X_dst - t_s) / s. Scaling the
  // camera-frame point by s leaves pixel coordinates unchanged.
  CameraPose out = pose;
  out.rotation = pose.rotation * t.rotation.transpose();
  out.translation = t.scale * pose.translation - out.rotation * t.translation;
  return out;
}

std::string serialize(const Affine2D& t, double fit_rmse) {
  json j;
  j["type"] = "affine2d";
  j["linear"] = matrix_json(t.linear);
  j["translation"] = {t.translation.x(), t.translation.y()};
  j["rmse"] = fit_rmse;
  return j.dump(2) + "\n";
}

std::string serialize(const Similarity3D& t, double fit_rmse) {
  json j;
  j["type"] = "similarity3d";
  j["scale"] = t.scale;
  j["rotation"] = matrix_json(t.rotation);
  j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  j["rmse"] = fit_rmse;
  return j.dump(2) + "\n";
}

Affine2D parse_affine(std::string_view text) {
  const json doc = parse_transform_json(text, "affine2d");
  Affine2D t;
  try {
    t.linear = matrix_from_json<Eigen::Matrix2d>(doc.at("linear"));
    const auto tr = doc.at("translation").get<std::vector<double>>();
    if (tr.size() != 2) throw Error(ErrorCode::Parse, "affine translation needs 2 values");
    t.translation = Eigen::Vector2d(tr[0], tr[1]);
  } catch (const json::exception& e) {
    throw ParseError(std::string("transform: ") + e.what(), 0, 0);
  }
  return t;
}

Similarity3D parse_similarity(std::string_view text) {
  const json doc = parse_transform_json(text, "similarity3d");
  Similarity3D t;
  try {
    t.scale = doc.at("scale").get<double>();
    t.rotation = matrix_from_json<Eigen::Matrix3d>(doc.at("rotation"));
    const auto tr = doc.at("translation").get<std::vector<double>>();
    if (tr.size() != 3) throw Error(ErrorCode::Parse, "similarity translation needs 3 values");
    t.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
  } catch (const json::exception& e) {
    throw ParseError(std::string("transform: ") + e.what(), 0, 0);
  }
  if (!(t.scale > 0.0)) throw ParseError("transform: scale must be positive", 0, 0);
  return t;
}

}  // namespace urbanscene
