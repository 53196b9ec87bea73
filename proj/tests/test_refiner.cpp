#include <doctest.h>

#include <cmath>
#include <random>

#include "roadstereo/error.hpp"
#include "roadstereo/refiner.hpp"

using namespace roadstereo;

namespace {

// Label with its vertex at d_s: f(d) = peak - a (d - d_s)^2.
Parabola label(double d_s, double a = 0.2, double peak = 0.9) {
  return {peak - a * d_s * d_s, 2.0 * a * d_s, -a};
}

ParabolaField make_field(int w, int h, auto&& disparity) {
  ParabolaField f(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const std::size_t i = f.index(u, v);
      const double d = disparity(u, v);
      f.valid[i] = 1;
      f.d_s[i] = d;
      f.d_int[i] = static_cast<int>(std::lround(d));
      f.parabola[i] = label(d);
    }
  return f;
}

}  // namespace

TEST_CASE("neighbor weight") {
  const RefineParams p;
  CHECK(neighbor_weight(3.0, 3.0, 1.0, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(neighbor_weight(0.0, 1e6, 1.0, p) == 0.0);
  RefineParams wide;
  wide.sigma_r = 1e9;
  CHECK(neighbor_weight(2.0, 2.0, 0.0, wide) == 1.0);
  CHECK(neighbor_weight(2.0, 2.0 + 25.0, 1.0, p) < std::exp(-25.0) + 1e-18);
}

TEST_CASE("aggregate energy") {
  const RefineParams p;
  ParabolaField single(1, 1);
  single.valid[0] = 1;
  single.parabola[0] = label(4.3);
  const Parabola e = aggregate_energy(single, 0, 0, p);
  CHECK(e.b0 == -single.parabola[0].b0);
  CHECK(e.b1 == -single.parabola[0].b1);
  CHECK(e.b2 == -single.parabola[0].b2);

  const ParabolaField uniform = make_field(3, 3, [](int, int) { return 7.2; });
  const Parabola c = aggregate_energy(uniform, 1, 1, p);
  const double k = 1.0 + 4.0 * p.lambda * std::exp(-1.0);
  const Parabola& b = uniform.parabola[uniform.index(1, 1)];
  CHECK(c.b0 == doctest::Approx(-k * b.b0).epsilon(1e-12));
  CHECK(c.b1 == doctest::Approx(-k * b.b1).epsilon(1e-12));
  CHECK(c.b2 == doctest::Approx(-k * b.b2).epsilon(1e-12));

  // Two far neighbours barely contribute.
  ParabolaField far = make_field(3, 1, [](int u, int) { return u == 1 ? 10.0 : 35.0; });
  const Parabola g = aggregate_energy(far, 1, 0, p);
  const Parabola& own = far.parabola[1];
  CHECK(std::abs(g.b0 + own.b0) < 1e-6 * std::abs(own.b0));
  CHECK(std::abs(g.b1 + own.b1) < 1e-6 * std::abs(own.b1));
  CHECK(std::abs(g.b2 + own.b2) < 1e-6);
}

TEST_CASE("refine_once fixed points") {
  const RefineParams p;
  ParabolaField single(1, 1);
  single.valid[0] = 1;
  single.d_s[0] = 4.3;
  single.d_int[0] = 4;
  single.parabola[0] = label(4.3);
  CHECK(refine_once(single, p).d_s[0] == doctest::Approx(4.3).epsilon(1e-14));

  const ParabolaField uniform = make_field(12, 9, [](int, int) { return 15.37; });
  const ParabolaField out = refine(uniform, p);
  for (std::size_t i = 0; i < out.d_s.size(); ++i) {
    REQUIRE(std::abs(out.d_s[i] - 15.37) <= 1e-12);
  }
  RefineParams none = p;
  none.iterations = 0;
  const ParabolaField id = refine(uniform, none);
  CHECK(id.d_s == uniform.d_s);
}

TEST_CASE("noisy plane gets smoother every iteration") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> noise(-0.4, 0.4);
  auto plane = [](int u, int v) { return 20.0 + 0.02 * u + 0.05 * v; };
  ParabolaField f = make_field(40, 30, [&](int u, int v) { return plane(u, v) + noise(rng); });
  auto rms = [&](const ParabolaField& g) {
    double s = 0.0;
    for (int v = 0; v < 30; ++v)
      for (int u = 0; u < 40; ++u) {
        const double e = g.d_s[g.index(u, v)] - plane(u, v);
        s += e * e;
      }
    return std::sqrt(s / (40 * 30));
  };
  const RefineParams p;
  double prev = rms(f);
  for (int k = 0; k < 3; ++k) {
    f = refine_once(f, p);
    const double now = rms(f);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("step edges are preserved and the clamp holds") {
  const RefineParams p;
  const ParabolaField step = make_field(20, 10, [](int u, int) { return u < 10 ? 10.0 : 20.0; });
  // First update at the edge pixel (9, 5): equal curvatures, so the minimum is
  // the weighted mean of the vertices.
  const double w_same = std::exp(-1.0), w_cross = std::exp(-1.0) * std::exp(-4.0);
  const double expected = (10.0 + p.lambda * (3 * w_same * 10.0 + w_cross * 20.0)) /
                          (1.0 + p.lambda * (3 * w_same + w_cross));
  const ParabolaField first = refine_once(step, p);
  CHECK(first.d_s[first.index(9, 5)] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected - 10.0 < 0.03);

  const ParabolaField out = refine(step, p);
  for (int v = 0; v < 10; ++v)
    for (int u = 0; u < 20; ++u) {
      const std::size_t i = out.index(u, v);
      // Influence spreads one pixel per iteration from the edge columns 9, 10.
      if (u <= 9 - p.iterations || u >= 10 + p.iterations)
        CHECK(std::abs(out.d_s[i] - step.d_s[i]) < 0.01);
      CHECK(std::abs(out.d_s[i] - step.d_s[i]) < 0.1);
      CHECK(out.d_s[i] >= step.d_int[i] - 1.0);
      CHECK(out.d_s[i] <= step.d_int[i] + 1.0);
    }

  // |delta d| = 25: leakage per iteration below 1e-6 px.
  const ParabolaField cliff = make_field(20, 10, [](int u, int) { return u < 10 ? 10.0 : 35.0; });
  const ParabolaField once = refine_once(cliff, p);
  for (std::size_t i = 0; i < once.d_s.size(); ++i) {
    CHECK(std::abs(once.d_s[i] - cliff.d_s[i]) < 1e-6);
  }

  // A neighbour pulling hard is still clamped.
  ParabolaField pull = make_field(2, 1, [](int u, int) { return u == 0 ? 5.0 : 8.0; });
  pull.parabola[1] = label(8.0, 50.0);
  RefineParams strong = p;
  strong.sigma_r = 100.0;
  strong.lambda = 10.0;
  const ParabolaField clamped = refine_once(pull, strong);
  CHECK(clamped.d_s[0] == doctest::Approx(6.0));
}

TEST_CASE("synchronous update ignores visiting order") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> n(-0.4, 0.4);
  const ParabolaField f = make_field(8, 8, [&](int u, int v) { return 12.0 + 0.1 * u + n(rng); });
  // Mirror the field, refine, mirror back.
  ParabolaField mirrored(8, 8);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      const std::size_t a = f.index(u, v), b = f.index(7 - u, 7 - v);
      mirrored.valid[b] = f.valid[a];
      mirrored.d_s[b] = f.d_s[a];
      mirrored.d_int[b] = f.d_int[a];
      mirrored.parabola[b] = f.parabola[a];
    }
  const RefineParams p;
  const ParabolaField x = refine(f, p), y = refine(mirrored, p);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      CHECK(x.d_s[x.index(u, v)] == doctest::Approx(y.d_s[y.index(7 - u, 7 - v)]).epsilon(1e-12));
    }
}

TEST_CASE("refine params validation") {
  RefineParams p;
  p.sigma_d = 0.0;
  CHECK_THROWS_AS(validate(p), Error);
  p = {};
  p.iterations = -1;
  CHECK_THROWS_AS(validate(p), Error);
  CHECK_NOTHROW(validate(RefineParams{}));
}
