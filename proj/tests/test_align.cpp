// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "urbanscene/align.hpp"
#include "urbanscene/error.hpp"

using namespace urbanscene;

namespace {

// Least squares through a Householder QR of the stacked design matrix.
Affine2D qr_affine(const CorrespondenceSet& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::MatrixXd B(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    A.row(i) << s.source[i].x(), s.source[i].y(), 1.0;
    B.row(i) << s.target[i].x(), s.target[i].y();
  }
  const Eigen::MatrixXd X = A.householderQr().solve(B);
  Affine2D t;
  t.linear = X.topRows(2).transpose();
  t.translation = X.row(2).transpose();
  return t;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d axis(g(rng), g(rng), g(rng));
  std::uniform_real_distribution<double> angle(-3.1, 3.1);
  return Eigen::AngleAxisd(angle(rng), axis.normalized()).toRotationMatrix();
}

}  // namespace

TEST_CASE("affine fit matches an independent least-squares solve") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-200, 200);
  std::normal_distribution<double> noise(0, 0.3);
  for (int t = 0; t < 50; ++t) {
    CorrespondenceSet s;
    for (int i = 0; i < 12; ++i) {
      const Vec2 p{u(rng), u(rng)};
      s.add(p, Vec2{0.9 * p.x - 0.2 * p.y + 40 + noise(rng), 0.3 * p.x + 1.1 * p.y - 7 + noise(rng)});
    }
    const AffineFit fit = fit_affine_2d(s);
    const Affine2D ref = qr_affine(s);
    CHECK((fit.transform.linear - ref.linear).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fit.transform.translation - ref.translation).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(fit.rmse == doctest::Approx(rmse(ref, s)).epsilon(1e-9));
  }
}

TEST_CASE("affine inverse and compose") {
  Affine2D a;
  a.linear << 2, 1, -1, 3;
  a.translation << 5, -2;
  const Vec2 p{3, 4};
  const Vec2 q = a.inverse().apply(a.apply(p));
  CHECK(q.x == doctest::Approx(3));
  CHECK(q.y == doctest::Approx(4));
  const Vec2 c = a.compose(a).apply(p);
  const Vec2 cc = a.apply(a.apply(p));
  CHECK(c.x == doctest::Approx(cc.x));
  CHECK(c.y == doctest::Approx(cc.y));
}

TEST_CASE("degenerate correspondence sets") {
  CorrespondenceSet line;
  for (int i = 0; i < 5; ++i) line.add(Vec2{double(i), 2.0 * i}, Vec2{double(i), double(i)});
  CHECK_THROWS_AS(fit_affine_2d(line), Error);
  CorrespondenceSet two;
  two.add(Vec2{0, 0}, Vec2{1, 1});
  two.add(Vec2{1, 0}, Vec2{2, 1});
  CHECK_THROWS_AS(fit_affine_2d(two), Error);
  CorrespondenceSet same;
  for (int i = 0; i < 4; ++i) same.add(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3));
  CHECK_THROWS_AS(fit_similarity_7dof(same), Error);
  CorrespondenceSet mixed;
  mixed.add(Vec2{0, 0}, Vec2{0, 0});
  CHECK_THROWS_AS(mixed.add(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 0)), Error);
}

TEST_CASE("similarity recovery and reflection guard") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50, 50), sc(0.5, 2.0);
  for (int t = 0; t < 30; ++t) {
    Similarity3D truth;
    truth.scale = sc(rng);
    truth.rotation = random_rotation(rng);
    truth.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
    CorrespondenceSet s;
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector3d p(u(rng), u(rng), u(rng));
      s.add(p, truth.apply(p));
    }
    const SimilarityFit fit = fit_similarity_7dof(s);
    CHECK(fit.transform.scale == doctest::Approx(truth.scale).epsilon(1e-10));
    CHECK((fit.transform.rotation - truth.rotation).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fit.transform.translation - truth.translation).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.transform.rotation.determinant() == doctest::Approx(1.0));
  }
  // A mirrored target still yields a proper rotation.
  CorrespondenceSet mirror;
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    mirror.add(p, Eigen::Vector3d(-p.x(), p.y(), p.z()));
  }
  CHECK(fit_similarity_7dof(mirror).transform.rotation.determinant() == doctest::Approx(1.0));
}

TEST_CASE("noisy similarity is at least as good as the truth") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  std::normal_distribution<double> noise(0, 0.05);
  Similarity3D truth;
  truth.scale = 1.3;
  truth.rotation = random_rotation(rng);
  truth.translation = Eigen::Vector3d(3, -4, 5);
  CorrespondenceSet s;
  for (int i = 0; i < 40; ++i) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    s.add(p, truth.apply(p) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
  }
  const SimilarityFit fit = fit_similarity_7dof(s);
  CHECK(fit.rmse <= rmse(truth, s) + 1e-12);
  CHECK(fit.rmse < 0.1);
}

TEST_CASE("similarity applied to a camera keeps its projections") {
  CameraPose cam;
  cam.image_id = "c";
  cam.fx = cam.fy = 400;
  cam.cx = 320;
  cam.cy = 240;
  cam.width = 640;
  cam.height = 480;
  cam.rotation = Eigen::Vector3d(1, -1, -1).asDiagonal();
  cam.translation = Eigen::Vector3d(2, 3, 100);
  Similarity3D t;
  t.scale = 0.7;
  t.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d(0.1, 0.2, 0.97).normalized()).toRotationMatrix();
  t.translation = Eigen::Vector3d(10, -20, 5);
  const CameraPose moved = apply_transform(t, cam);
  CHECK_NOTHROW(validate(moved));
  const Eigen::Vector3d p(5, -7, 3);
  const auto a = cam.project(p);
  const auto b = moved.project(t.apply(p));
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->x == doctest::Approx(b->x));
  CHECK(a->y == doctest::Approx(b->y));
}

TEST_CASE("correspondence and transform text formats") {
  const CorrespondenceSet s = parse_correspondences(
      "# picked by hand\nid,src_x,src_y,dst_x,dst_y\na,0,0,10,20\nb,1,0,11,20\nc 0 1 10 21\n");
  CHECK(s.dimension == 2);
  REQUIRE(s.size() == 3);
  CHECK(s.target[2].y() == 21);
  const CorrespondenceSet again = parse_correspondences(write_correspondences(s));
  CHECK(again.source == s.source);
  CHECK(again.target == s.target);
  CHECK_THROWS_AS(parse_correspondences("a,b\n1,2\n"), Error);

  Similarity3D t;
  t.scale = 1.0 / 3.0;
  t.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation = Eigen::Vector3d(0.1, 0.2, 0.3);
  const Similarity3D back = parse_similarity(serialize(t, 0.0));
  CHECK(back.scale == t.scale);
  CHECK(back.rotation == t.rotation);
  CHECK(back.translation == t.translation);
  Affine2D a;
  a.linear << 1.0 / 7.0, 2, 3, 4;
  const Affine2D ab = parse_affine(serialize(a, 0.5));
  CHECK(ab.linear == a.linear);
}

TEST_CASE("top view raster") {
  PointCloud pc;
  pc.points = {{0, 0, 1}, {0.2, 0.2, 5}, {3, 0, 2}, {3, 2, 7}};
  const TopViewRaster r = rasterize_topview(pc, 1.0);
  CHECK(r.occupied_count() == 3);
  CHECK(r.width == 4);
  CHECK(r.height == 3);
  CHECK(r.max_z[r.index(0, 0)] == 5);
  CHECK(r.to_pgm().rfind("P5", 0) == 0);
  CHECK_THROWS_AS(rasterize_topview(pc, 0.0), Error);
  CHECK_THROWS_AS(rasterize_topview(pc, 1e-6, 1000), Error);
}
