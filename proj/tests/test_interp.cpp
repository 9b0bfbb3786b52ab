#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ssi/error.hpp"
#include "ssi/interp.hpp"

using namespace ssi;

namespace {
Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }
}  // namespace

TEST_CASE("slerp endpoints and midpoint") {
  const Vector a = standard_normal(1, 16), b = standard_normal(2, 16);
  CHECK(slerp(a, b, 0.0) == a);
  CHECK(slerp(a, b, 1.0) == b);
  const Vector m = slerp(v2(1, 0), v2(0, 1), 0.5);
  CHECK(m[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(m[1] == doctest::Approx(std::sqrt(0.5)));
  CHECK(m.norm() == doctest::Approx(1.0));
}

TEST_CASE("slerp angle") {
  CHECK(SlerpPair(v2(1, 0), v2(0, 2)).theta() == doctest::Approx(std::numbers::pi / 2));
  CHECK(SlerpPair(v2(1, 0), v2(1, 0)).theta() == 0.0);
}

TEST_CASE("slerp preserves equal norms and is symmetric") {
  for (Seed s = 0; s < 2000; ++s) {
    Vector a = standard_normal(derive_seed(s, 0), 8);
    Vector b = standard_normal(derive_seed(s, 1), 8);
    b *= a.norm() / b.norm();
    const double lam = (s % 97) / 96.0;
    const Vector x = slerp(a, b, lam);
    CHECK(std::abs(x.norm() - a.norm()) < 1e-10);
    CHECK((x - slerp(b, a, 1.0 - lam)).norm() < 1e-12);
  }
}

TEST_CASE("slerp is continuous in lambda") {
  const Vector a = standard_normal(5, 32), b = standard_normal(6, 32) * (a.norm() / standard_normal(6, 32).norm());
  const int n = 1000;
  double worst = 0.0;
  Vector prev = slerp(a, b, 0.0);
  for (int i = 1; i <= n; ++i) {
    const Vector cur = slerp(a, b, static_cast<double>(i) / n);
    worst = std::max(worst, (cur - prev).norm());
    prev = cur;
  }
  CHECK(worst < std::numbers::pi * a.norm() * (1.0 / n) * 1.01);
}

TEST_CASE("nearly parallel inputs fall back to lerp") {
  const Vector a = v2(1.0, 0.0);
  const Vector b = v2(1.0, 1e-8);
  const SlerpPair p(a, b);
  CHECK(p.theta() < kSlerpLinearThreshold);
  const Vector lerp = 0.7 * a + 0.3 * b;
  CHECK((slerp(p, 0.3) - lerp).norm() < 1e-15);
  // just above the threshold the spherical formula agrees with the lerp limit
  const Vector c = v2(std::cos(2e-6), std::sin(2e-6));
  CHECK((slerp(a, c, 0.3) - (0.7 * a + 0.3 * c)).norm() < 1e-8);
}

TEST_CASE("slerp errors") {
  CHECK_THROWS_AS(slerp(v2(0, 0), v2(1, 0), 0.5), InvalidArgument);
  CHECK_THROWS_AS(slerp(v2(1, 0), v2(-2, 0), 0.5), InvalidArgument);
  CHECK_THROWS_AS(slerp(v2(1, 0), v2(0, 1), 1.5), InvalidArgument);
  CHECK_THROWS_AS(SlerpPair(v2(1, 0), Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("interpolate and decode") {
  const ScoreOracle o(SubspaceGaussianScore::smooth_image({3, 8, 8}, 8, Vector::Ones(8), 1));
  const auto ve = NoiseSchedule::ve();
  const auto full = karras_grid(0.002, 80.0, 7.0, 60).without_zero();
  InversionConfig c;
  c.t_ssi = 0.1;
  c.grid = full.starting_at(0.1);
  c.noise_seed = 3;
  const auto ra = invert(o, ve, o.sample_one(1, 0), c);
  c.noise_seed = 4;
  const auto rb = invert(o, ve, o.sample_one(1, 1), c);
  const SamplerSpec spec{SamplerKind::Ode, Method::Euler};
  const auto frames = interpolate_and_decode(o, ve, ra, rb, {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}, full.reversed(), spec);
  REQUIRE(frames.size() == 7);
  CHECK(frames.front().x0_hat == reconstruct(o, ve, ra, full.reversed(), spec).x0_hat);
  CHECK(frames.back().x0_hat == reconstruct(o, ve, rb, full.reversed(), spec).x0_hat);
  for (const auto& f : frames) CHECK(o.manifold_distance(f.x0_hat) < 3.0 * 0.002 + 1e-9);

  auto other = rb;
  other.schedule = NoiseSchedule::vp();
  CHECK_THROWS_AS(interpolate_and_decode(o, ve, ra, other, {0.5}, full.reversed(), spec), InvalidArgument);
}
