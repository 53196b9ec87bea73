#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "roadstereo/error.hpp"
#include "roadstereo/geometry.hpp"
#include "roadstereo/synth.hpp"

using namespace roadstereo;

namespace {

SceneSpec small_plane(double pitch) {
  SceneSpec s;
  s.width = 320;
  s.height = 200;
  s.rig.u0 = 160;
  s.rig.v0 = 100;
  s.rig.f = 400;
  s.pitch = pitch;
  return s;
}

}  // namespace

TEST_CASE("camera perpendicular to the road sees constant disparity") {
  const RenderedPair p = render(small_plane(std::numbers::pi / 2));
  const double expected = 400.0 * 120.0 / 470.0;
  for (double d : p.truth.disparity) REQUIRE(std::abs(d - expected) < 1e-6);
}

TEST_CASE("inclined road disparity is linear in v") {
  const SceneSpec spec = small_plane(1.1);
  const RenderedPair p = render(spec);
  const PlanePrior line = analytic_road_line(spec);
  for (int v = 0; v < spec.height; ++v)
    for (int u = 0; u < spec.width; u += 7) {
      REQUIRE(std::abs(p.truth.disparity[p.truth.index(u, v)] - line.line(v)) < 1e-6);
    }
  // An OLS fit over the truth recovers the same line.
  std::vector<Correspondence> pts;
  for (int v = 0; v < spec.height; v += 3)
    for (int u = 0; u < spec.width; u += 11)
      pts.push_back({double(u), double(v), u - p.truth.disparity[p.truth.index(u, v)], double(v), 1});
  const PlanePrior fit = fit_vdisparity_line(pts);
  CHECK(std::abs(fit.alpha0 - line.alpha0) < 1e-6);
  CHECK(std::abs(fit.alpha1 - line.alpha1) < 1e-6);
}

TEST_CASE("slab top disparity follows the pinhole closed form") {
  const SceneSpec spec = desk_scene(ScenePreset::kSlab);
  const auto& p = testing::scene(ScenePreset::kSlab);
  const double ct = std::cos(spec.pitch), st = std::sin(spec.pitch);
  const double k = spec.rig.f * spec.rig.baseline;
  std::size_t tops = 0;
  for (int v = 0; v < spec.height; ++v)
    for (int u = 0; u < spec.width; ++u) {
      const std::size_t i = p.truth.index(u, v);
      // A ray hits Y_w = y at camera depth y / (cos(theta) (v - v0) / f + sin(theta)).
      const double g = ct * (v - spec.rig.v0) / spec.rig.f + st;
      const double z_road = spec.camera_height / g;
      const double z_top = (spec.camera_height - spec.models[0].height) / g;
      if (p.truth.region[i] == Region::kModelTop) {
        ++tops;
        REQUIRE(std::abs(p.truth.disparity[i] - k / z_top) < 1e-6);
        // Step relative to the bare road at the same pixel.
        REQUIRE(std::abs((p.truth.disparity[i] - k / z_road) - k * (1 / z_top - 1 / z_road)) < 1e-6);
      } else if (p.truth.region[i] == Region::kRoad) {
        REQUIRE(std::abs(p.truth.disparity[i] - k / z_road) < 1e-6);
      }
    }
  CHECK(tops > 50000);
}

TEST_CASE("rendered views are photoconsistent") {
  for (auto preset : {ScenePreset::kPlane, ScenePreset::kGroove}) {
    const auto& p = testing::scene(preset);
    const int w = p.left.width();
    double sum = 0.0;
    std::size_t n = 0;
    for (int v = 0; v < p.left.height(); v += 2)
      for (int u = 0; u < w; u += 2) {
        const std::size_t i = p.truth.index(u, v);
        if (p.truth.occluded[i]) continue;
        const double x = u - p.truth.disparity[i];
        const int x0 = static_cast<int>(std::floor(x));
        if (x0 < 0 || x0 + 1 >= w) continue;
        const double t = x - x0;
        sum += std::abs(p.left(u, v) - ((1 - t) * p.right(x0, v) + t * p.right(x0 + 1, v)));
        ++n;
      }
    REQUIRE(n > 10000);
    CHECK(sum / n < 2.0);
  }
}

TEST_CASE("occlusion band sits left of the slab") {
  const auto& p = testing::scene(ScenePreset::kSlab);
  const auto& t = p.truth;
  // Out-of-frame columns in the right view are occluded.
  CHECK(t.occluded[t.index(10, 300)]);
  // Road just left of the slab, hidden from the right camera by the slab.
  std::size_t band = 0;
  for (int v = 250; v < 400; ++v)
    for (int u = 600; u < 660; ++u)
      if (t.region[t.index(u, v)] == Region::kRoad && t.occluded[t.index(u, v)]) ++band;
  CHECK(band > 0);
}

TEST_CASE("rendering is deterministic") {
  const SceneSpec spec = small_plane(1.0);
  const RenderedPair a = render(spec), b = render(spec);
  CHECK(std::equal(a.left.data().begin(), a.left.data().end(), b.left.data().begin()));
  CHECK(std::equal(a.right.data().begin(), a.right.data().end(), b.right.data().begin()));
  SceneSpec other = spec;
  other.seed = 2;
  const RenderedPair c = render(other);
  CHECK_FALSE(std::equal(a.left.data().begin(), a.left.data().end(), c.left.data().begin()));
}

TEST_CASE("degenerate specs are rejected") {
  SceneSpec s = small_plane(1.0);
  s.camera_height = -5;
  CHECK_THROWS_WITH_AS(render(s), doctest::Contains("degenerate spec"), Error);
  s = small_plane(0.2);  // horizon inside the frame
  CHECK_THROWS_WITH_AS(render(s), doctest::Contains("not visible"), Error);
  s = desk_scene(ScenePreset::kGroove);
  s.models[0].groove->size_x = 90;
  CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("groove does not fit"), Error);
  s = desk_scene(ScenePreset::kSlab);
  s.models[0].height = 0;
  CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("scene spec parsing") {
  const SceneSpec s = parse_scene_spec(
      "preset = plane\nwidth = 200\nheight = 100\npitch_deg = 80\n"
      "model = 0 100 50 50 10 10 10 20 20 5\n# comment\nseed = 7\n");
  CHECK(s.width == 200);
  CHECK(s.rig.u0 == 100);
  CHECK(s.pitch == doctest::Approx(80 * std::numbers::pi / 180));
  REQUIRE(s.models.size() == 1);
  REQUIRE(s.models[0].groove);
  CHECK(s.models[0].groove->depth == 5);
  CHECK(s.seed == 7);
  CHECK_THROWS_AS(parse_scene_spec("colour = red\n"), Error);
  CHECK_THROWS_AS(parse_scene_spec("model = 1 2 3\n"), Error);
  CHECK_THROWS_AS(parse_scene_spec("width = abc\n"), Error);
  const SceneSpec g = parse_scene_spec("preset = groove\n");
  REQUIRE(g.models.size() == 1);
  CHECK(g.models[0].groove.has_value());
}

TEST_CASE("truth_compare counting") {
  GroundTruth t;
  t.width = 4;
  t.height = 1;
  t.disparity = {10, 11, 12, 13};
  t.occluded = {0, 0, 0, 0};
  t.region.assign(4, Region::kRoad);
  DisparityField e(4, 1);
  for (int u = 0; u < 4; ++u) {
    e.valid[u] = 1;
    e.d[u] = t.disparity[u];
  }
  TruthMetrics m = truth_compare(e, t, 2.0);
  CHECK(m.bad_percent == 0.0);
  CHECK(m.mean_abs_error == 0.0);
  for (int u = 0; u < 4; ++u) e.d[u] = t.disparity[u] + 3;
  m = truth_compare(e, t, 2.0);
  CHECK(m.bad_percent == 100.0);
  CHECK(m.mean_abs_error == doctest::Approx(3.0));
  for (int u = 0; u < 4; ++u) e.d[u] = t.disparity[u] + (u % 2 ? 5 : 0);
  m = truth_compare(e, t, 2.0);
  CHECK(m.bad_percent == doctest::Approx(50.0));
  CHECK(m.mean_abs_error == doctest::Approx(2.5));
  t.occluded = {1, 1, 1, 1};
  CHECK_THROWS_WITH_AS(truth_compare(e, t, 2.0), doctest::Contains("empty evaluation domain"), Error);
}

TEST_CASE("truth files round trip") {
  const auto dir = testing::temp_dir("synth");
  const RenderedPair p = render(small_plane(1.0));
  save_truth(dir, p);
  const GroundTruth t = load_truth(dir / "truth.dsp", dir / "occlusion.pgm");
  CHECK(t.occluded == p.truth.occluded);
  for (std::size_t i = 0; i < t.disparity.size(); ++i)
    REQUIRE(std::abs(t.disparity[i] - p.truth.disparity[i]) < 1e-4);
}
