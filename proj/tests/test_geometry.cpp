#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "roadstereo/error.hpp"
#include "roadstereo/geometry.hpp"
#include "roadstereo/synth.hpp"

using namespace roadstereo;

namespace {

DisparityField plane_field(int w, int h, double g0, double g1, double g2) {
  DisparityField f(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::size_t i = f.index(u, v);
      f.valid[i] = 1;
      f.d[i] = g0 + g1 * u + g2 * v;
    }
  return f;
}

Eigen::Matrix3d random_rotation(std::mt19937& rng) {
  std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
  return rotation_matrix({a(rng), a(rng), a(rng)});
}

}  // namespace

TEST_CASE("roll from a near-field disparity plane") {
  const PixelRect all{0, 0, 60, 40};
  CHECK(std::abs(estimate_roll(plane_field(60, 40, 10, 0.0, 0.2), all)) < 1e-12);
  CHECK(estimate_roll(plane_field(60, 40, 10, 0.02, 0.2), all) ==
        doctest::Approx(std::atan(-0.1)).epsilon(1e-10));
  CHECK(std::atan(-0.1) == doctest::Approx(-0.0997).epsilon(1e-3));

  DisparityField empty(60, 40);
  CHECK_THROWS_WITH_AS(estimate_roll(empty, all),
                       doctest::Contains("insufficient roll evidence"), Error);
  CHECK_THROWS_WITH_AS(estimate_roll(plane_field(60, 40, 10, 0.1, 0.0), all),
                       doctest::Contains("insufficient roll evidence"), Error);
  const PixelRect patch = default_roll_patch(1240, 620);
  CHECK(patch.u_begin == 310);
  CHECK(patch.u_end == 930);
  CHECK(patch.v_begin == 496);
  CHECK(patch.v_end == 620);
}

TEST_CASE("pitch from the v-disparity line") {
  CameraRig rig;
  rig.f = 1400;
  rig.v0 = 540;
  CHECK(estimate_pitch({-54.0, 0.1, 20}, rig) == doctest::Approx(0.0));
  const double theta = estimate_pitch({-30.0, 0.1, 20}, rig);
  CHECK(std::abs(theta - std::atan((-300.0 + 540.0) / 1400.0)) < 1e-12);
  CHECK(theta == doctest::Approx(0.1698).epsilon(1e-3));
  CHECK(estimate_pitch({25.0, 0.0, 20}, rig) == std::numbers::pi / 2);
}

TEST_CASE("rotation matrix factors") {
  CHECK(rotation_matrix({}).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  const Eigen::Vector3d y = rotation_matrix({std::numbers::pi / 2, 0, 0}) * Eigen::Vector3d::UnitY();
  CHECK((y - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
  std::mt19937 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Matrix3d r = random_rotation(rng);
    REQUIRE((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(std::abs(r.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("reprojection spot values and round trip") {
  CameraRig rig;
  DisparityField f(1240, 620);
  const std::size_t c = f.index(620, 310);
  f.valid[c] = 1;
  f.d[c] = rig.f * rig.baseline / 1000.0;
  const std::size_t o = f.index(100, 50);
  f.valid[o] = 1;
  f.d[o] = 84.0;
  const std::size_t bad = f.index(3, 3);
  f.valid[bad] = 1;
  f.d[bad] = 0.0;
  const PointCloud cloud = reproject(f, rig, {});
  REQUIRE(cloud.points.size() == 2);
  CHECK(cloud.skipped == 1);
  for (const auto& p : cloud.points) {
    if (p.u == 620) CHECK((p.p - Eigen::Vector3d(0, 0, 1000)).norm() < 1e-9);
    if (p.u == 100) CHECK(p.p.z() == doctest::Approx(2000.0));
  }

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dd(5.0, 300.0), a(-0.5, 0.5);
  DisparityField g(64, 48);
  for (std::size_t i = 0; i < g.d.size(); ++i) {
    g.valid[i] = 1;
    g.d[i] = dd(rng);
  }
  const Pose pose{a(rng), a(rng), a(rng)};
  const PointCloud pc = reproject(g, rig, pose);
  for (const auto& p : pc.points) {
    const Projection back = project(p.p, rig, pose);
    REQUIRE(std::abs(back.u - p.u) < 1e-9);
    REQUIRE(std::abs(back.v - p.v) < 1e-9);
    REQUIRE(std::abs(back.d - g.d[g.index(p.u, p.v)]) < 1e-9);
  }
}

TEST_CASE("reprojected road points are planar at desk scale") {
  const auto& pair = testing::scene(ScenePreset::kPlane);
  const SceneSpec spec = desk_scene(ScenePreset::kPlane);
  DisparityField f(spec.width, spec.height);
  for (std::size_t i = 0; i < f.d.size(); ++i) {
    f.valid[i] = 1;
    f.d[i] = pair.truth.disparity[i];
  }
  const PointCloud cloud = reproject(f, spec.rig, {spec.pitch, 0, 0});
  std::vector<Eigen::Vector3d> pts;
  for (std::size_t k = 0; k < cloud.points.size(); k += 97) pts.push_back(cloud.points[k].p);
  const Plane3 plane = fit_plane(pts);
  double ss = 0;
  for (const auto& p : pts) ss += plane.signed_distance(p) * plane.signed_distance(p);
  CHECK(std::sqrt(ss / pts.size()) < 1.0);
  // The rotated road is the plane Y = camera height.
  for (const auto& p : pts) REQUIRE(std::abs(p.y() - spec.camera_height) < 1e-6);
}

TEST_CASE("measure offsets against a corner plane") {
  const std::vector<Eigen::Vector3d> corners{{0, 0, 500}, {50, 0, 500}, {0, 40, 500}, {50, 40, 500}};
  const std::vector<Eigen::Vector3d> probes{{10, 10, 490}, {10, 10, 508}};
  const auto d = measure_offsets(corners, probes);
  CHECK(d[0] == doctest::Approx(10.0));
  CHECK(d[1] == doctest::Approx(-8.0));
  CHECK(measure_offsets(corners, corners) == std::vector<double>(4, 0.0));

  const std::vector<Eigen::Vector3d> line{{0, 0, 500}, {1, 1, 500}, {2, 2, 500}, {3, 3, 500}};
  CHECK_THROWS_WITH_AS(measure_offsets(line, probes),
                       doctest::Contains("degenerate reference plane"), Error);
  const std::vector<Eigen::Vector3d> three(corners.begin(), corners.begin() + 3);
  CHECK_THROWS_WITH_AS(measure_offsets(three, probes),
                       doctest::Contains("degenerate reference plane"), Error);

  // Rigid motions preserve the distances, as long as the camera side is
  // preserved too (here the motion keeps the origin on the same side).
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> a(-0.3, 0.3), t(-20, 20);
  const std::vector<Eigen::Vector3d> tilted{{0, 0, 500}, {50, 3, 502}, {0, 40, 497}, {50, 41, 499}};
  const std::vector<Eigen::Vector3d> pr{{20, 20, 480}, {5, 30, 505}, {40, 8, 499}};
  const auto base = measure_offsets(tilted, pr);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix3d r = rotation_matrix({a(rng), a(rng), a(rng)});
    const Eigen::Vector3d shift(t(rng), t(rng), t(rng));
    std::vector<Eigen::Vector3d> c2, p2;
    for (const auto& p : tilted) c2.push_back(r * p + shift);
    for (const auto& p : pr) p2.push_back(r * p + shift);
    const auto moved = measure_offsets(c2, p2);
    for (std::size_t i = 0; i < base.size(); ++i) REQUIRE(std::abs(moved[i] - base[i]) < 1e-9);
  }
}

TEST_CASE("PLY and rig files round trip") {
  const auto dir = testing::temp_dir("geometry");
  PointCloud cloud;
  cloud.points.push_back({{1.5, -2.25, 500.125}, 3, 4});
  cloud.points.push_back({{0, 0, 1}, 0, 0});
  save_ply(dir / "c.ply", cloud);
  const PointCloud back = load_ply(dir / "c.ply");
  REQUIRE(back.points.size() == 2);
  CHECK((back.points[0].p - cloud.points[0].p).norm() < 1e-4);
  CHECK(back.points[0].u == 3);
  CHECK(back.points[0].v == 4);

  CameraRig rig{1234.5, 600.25, 300.5, 119.75};
  save_rig(dir / "rig.cfg", rig);
  const CameraRig r2 = load_rig(dir / "rig.cfg");
  CHECK(r2.f == rig.f);
  CHECK(r2.u0 == rig.u0);
  CHECK(r2.v0 == rig.v0);
  CHECK(r2.baseline == rig.baseline);
  CHECK_THROWS_AS(validate(CameraRig{0, 1, 1, 120}), Error);
}
