#include <doctest.h>

#include <cmath>

#include "ssi/diagnostics.hpp"
#include "ssi/error.hpp"
#include "ssi/inversion.hpp"

using namespace ssi;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

InversionConfig ssi_cfg(double t_ssi, const TimeGrid& full, Seed seed) {
  InversionConfig c;
  c.t_ssi = t_ssi;
  c.grid = full.starting_at(t_ssi);
  c.noise_seed = seed;
  return c;
}

TimeGrid ve_grid(int n) { return karras_grid(0.002, 80.0, 7.0, n).without_zero(); }

}  // namespace

TEST_CASE("config validation") {
  const auto ve = NoiseSchedule::ve();
  InversionConfig c = ssi_cfg(0.1, ve_grid(50), 1);
  CHECK_NOTHROW(validate(c, ve));
  c.t_ssi = 0.0;
  CHECK_THROWS_AS(validate(c, ve), InvalidArgument);
  c = ssi_cfg(0.1, ve_grid(50), 1);
  c.grid = c.grid.reversed();
  CHECK_THROWS_AS(validate(c, ve), InvalidArgument);
  c = ssi_cfg(0.1, ve_grid(50), 1);
  c.method = InversionMethod::BaselineDdim;
  CHECK_THROWS_AS(validate(c, ve), InvalidArgument);
  c = ssi_cfg(0.1, ve_grid(50), 1);
  c.grid = TimeGrid({0.1, 2.0}, GridDirection::Ascending);
  CHECK_THROWS_AS(validate(c, NoiseSchedule::vp()), InvalidArgument);
}

TEST_CASE("single atom VE inversion is radial") {
  const Vector mu = v2(0.5, -0.25);
  const ScoreOracle single(PointCloudScore::single(mu));
  const auto cfg = ssi_cfg(0.1, ve_grid(200), 9);
  const auto r = ssi_invert_ve(single, NoiseSchedule::ve(), mu, cfg);
  const Vector n = standard_normal(9, 2);
  CHECK(r.injected == n);
  CHECK((r.noise / 80.0 - n).norm() <= mu.norm() / 80.0 + 1e-9);
  CHECK((r.noise - (mu + 80.0 * n)).norm() < 1e-9);
}

TEST_CASE("one-step SSI matches the Euler formula") {
  const ScoreOracle eight(PointCloudScore::circle(2.0, 8));
  const auto ve = NoiseSchedule::ve();
  InversionConfig c;
  c.t_ssi = 0.3;
  c.grid = TimeGrid({0.3, 5.0}, GridDirection::Ascending);
  c.noise_seed = 4;
  const Vector x0 = v2(2, 0);
  const Vector start = x0 + 0.3 * standard_normal(4, 2);
  const Vector expect = start + (5.0 - 0.3) * (-1.0 * 0.3 * eight.score(start, 0.3));
  CHECK((ssi_invert_ve(eight, ve, x0, c).noise - expect).norm() < 1e-13);
}

TEST_CASE("VP injection at tiny t_ssi returns x0") {
  const ScoreOracle axis(SubspaceGaussianScore::axis());
  InversionConfig c;
  c.t_ssi = 1e-10;
  c.grid = TimeGrid({1e-10, 0.5}, GridDirection::Ascending);
  c.keep_trajectory = true;
  const auto r = ssi_invert_vp(axis, NoiseSchedule::vp(), v2(0.7, 0.0), c);
  REQUIRE(r.trajectory);
  CHECK((r.trajectory->states.front() - v2(0.7, 0.0)).norm() < 1e-4);
}

TEST_CASE("VP inversion unscaled matches VE on the matched sigma grid") {
  const auto sub = SubspaceGaussianScore::random(6, 2, (Vector(2) << 1.0, 0.6).finished(), 3);
  const ScoreOracle o(sub);
  const auto vp = NoiseSchedule::vp();
  std::vector<double> t, sg;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    t.push_back(0.05 + 0.45 * i / n);
    sg.push_back(sigma(vp, t.back()));
  }
  const Vector x0 = o.sample_one(1, 0);
  InversionConfig cvp;
  cvp.t_ssi = 0.05;
  cvp.grid = TimeGrid(t, GridDirection::Ascending);
  cvp.noise_seed = 7;
  InversionConfig cve = cvp;
  cve.t_ssi = sg.front();
  cve.grid = TimeGrid(sg, GridDirection::Ascending);
  const Vector a = ssi_invert_vp(o, vp, x0, cvp).unscaled_noise();
  const Vector b = ssi_invert_ve(o, NoiseSchedule::ve(), x0, cve).noise;
  CHECK((a - b).norm() < 2e-3 * b.norm());
}

TEST_CASE("DDIM coefficients") {
  const auto vp = NoiseSchedule::vp();
  const auto g = ddim_kappa_grid(1000, 2, 1);
  for (auto mode : {AlphaMode::Continuous, AlphaMode::Discrete}) {
    const auto alphas = grid_alpha_bars(vp, g, mode);
    const auto c = ddim_coefficients(alphas);
    for (std::size_t i = 1; i < alphas.size(); ++i) {
      const double sp = std::sqrt((1 - alphas[i - 1]) / alphas[i - 1]);
      const double sc = std::sqrt((1 - alphas[i]) / alphas[i]);
      CHECK(c.phi[i] != 0.0);
      CHECK(c.phi[i] == doctest::Approx(std::sqrt(alphas[i - 1]) * sp / (std::sqrt(alphas[i]) * sc)).epsilon(1e-12));
      CHECK(c.psi[i] == doctest::Approx(std::sqrt(alphas[i - 1]) * (1.0 - sp / sc)).epsilon(1e-10));
    }
  }
  CHECK(grid_alpha_bars(vp, g, AlphaMode::Continuous)[0] == alpha_bar(vp, 0.001));
  CHECK(grid_alpha_bars(vp, g, AlphaMode::Discrete)[0] == discrete_alpha_bars(vp, 1000)[1]);
  CHECK_THROWS_AS(ddim_coefficients({1.0, 1.0}), InvalidArgument);
}

TEST_CASE("DDIM sampling with zero noise prediction is a pure rescaling") {
  const Vector mu = v2(1.5, -0.5);
  const ScoreOracle single(PointCloudScore::single(mu));
  const auto vp = NoiseSchedule::vp();
  const auto g = ddim_kappa_grid(1000, 2, 1).reversed();
  const Vector x = ddim_sample(single, vp, std::sqrt(alpha_bar(vp, g.front())) * mu, g);
  CHECK((x - std::sqrt(alpha_bar(vp, g.back())) * mu).norm() < 1e-12);
}

TEST_CASE("DDIM iterate equals Euler in sigma") {
  const ScoreOracle o(SubspaceGaussianScore::random(8, 2, Vector::Ones(2), 5));
  const auto vp = NoiseSchedule::vp();
  const auto g = ddim_kappa_grid(1000, 2, 1).reversed();
  const Vector xT = standard_normal(3, 8) * std::sqrt(1.0 - alpha_bar(vp, g.front()));
  std::vector<Vector> a, b;
  ddim_sample(o, vp, xT, g, AlphaMode::Continuous, 1000,
              [&](std::size_t i, double t, const Vector& x) { a.push_back(x / scale(vp, t)); (void)i; });
  integrate_sigma_euler(vp, o, xT / scale(vp, g.front()), g,
                        [&](std::size_t, double, const Vector& x) { b.push_back(x); });
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm() / (1.0 + b[i].norm()));
  CHECK(worst < 1e-8);
}

TEST_CASE("DDIM samples land near the data") {
  const ScoreOracle eight(PointCloudScore::circle(2.0, 8));
  const auto vp = NoiseSchedule::vp();
  const auto g = ddim_kappa_grid(1000, 2, 1).reversed();
  const double s_last = sigma(vp, g.back());
  int near = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    const Vector xT = standard_normal(derive_seed(8, i), 2);
    const auto rec = sample_from(eight, vp, Formulation::VpScaled, xT, g, {SamplerKind::Ddim});
    if (eight.manifold_distance(rec.x_last) < 3.0 * s_last) ++near;
  }
  CHECK(near >= 475);
}

TEST_CASE("lagged DDIM inversion is exact for a single atom") {
  const Vector mu = v2(1.5, -0.5);
  const ScoreOracle single(PointCloudScore::single(mu));
  const auto vp = NoiseSchedule::vp();
  InversionConfig c;
  c.method = InversionMethod::BaselineDdim;
  c.grid = ddim_kappa_grid(1000, 2, 1);
  for (auto mode : {AlphaMode::Continuous, AlphaMode::Discrete}) {
    c.alpha = mode;
    const auto inv = ddim_invert_baseline(single, vp, mu, c);
    const auto rec = reconstruct(single, vp, inv, c.grid.reversed(), {SamplerKind::Ddim, Method::Euler, mode});
    CHECK((rec.x0_hat - mu).norm() < 1e-10);
    CHECK((rec.x_last - mu).norm() < 1e-9);
  }
}

TEST_CASE("lagged DDIM inversion of the fixed point stays at zero") {
  const ScoreOracle eight(PointCloudScore::circle(2.0, 8));
  InversionConfig c;
  c.method = InversionMethod::BaselineDdim;
  c.grid = ddim_kappa_grid(1000, 2, 1);
  CHECK(ddim_invert_baseline(eight, NoiseSchedule::vp(), v2(0, 0), c).noise.norm() < 1e-13);
}

TEST_CASE("single atom roundtrip within the reconstruction bound") {
  const Vector mu = v2(-1.0, 2.0);
  const ScoreOracle single(PointCloudScore::single(mu));
  const auto vp = NoiseSchedule::vp();
  const auto full = ddim_kappa_grid(1000, 2, 1);
  const auto cfg = ssi_cfg(0.039, full, 12);
  const auto inv = ssi_invert_vp(single, vp, mu, cfg);
  const auto rec = reconstruct(single, vp, inv, full.reversed(),
                               {SamplerKind::Ddim});
  const double bound = (rec.max_ratio + std::sqrt(chi_square_bound(2, 0.05).chi_bound)) * sigma(vp, 0.039);
  CHECK((rec.x0_hat - mu).norm() <= bound);
}

TEST_CASE("SSI roundtrip with t_ssi -> 0 on a single atom is exact") {
  const Vector mu = v2(0.25, 0.75);
  const ScoreOracle single(PointCloudScore::single(mu));
  const auto ve = NoiseSchedule::ve();
  const auto full = ve_grid(100);
  const auto inv = ssi_invert_ve(single, ve, mu, ssi_cfg(0.002, full, 3));
  const auto rec = reconstruct(single, ve, inv, full.reversed(), {SamplerKind::Ode, Method::Heun});
  CHECK((rec.x0_hat - mu).norm() < 1e-12);
}

TEST_CASE("identity-grid roundtrip error shrinks linearly") {
  const auto sub = SubspaceGaussianScore::random(6, 2, (Vector(2) << 1.0, 0.6).finished(), 3);
  const ScoreOracle o(sub);
  const auto ve = NoiseSchedule::ve();
  const Vector x0 = o.sample_one(2, 0) + 0.3 * standard_normal(5, 6);
  std::vector<double> errs;
  for (int n : {50, 100, 200, 400}) {
    std::vector<double> t;
    for (int i = 0; i <= n; ++i) t.push_back(0.5 + 9.5 * i / n);
    InversionConfig c;
    c.method = InversionMethod::BaselineOde;
    c.grid = TimeGrid(t, GridDirection::Ascending);
    const auto inv = ode_invert_baseline(o, ve, x0, c);
    const Vector back = integrate_to(ve, o, {}, inv.noise, c.grid.reversed());
    errs.push_back((back - x0).norm());
  }
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i - 1] / errs[i] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("SSI is deterministic") {
  const ScoreOracle o(SubspaceGaussianScore::smooth_image({3, 8, 8}, 8, Vector::Ones(8), 1));
  const ScoreModel m(o, 1e-3, 5);
  const Vector x0 = o.sample_one(4, 0);
  const auto cfg = ssi_cfg(0.1, ve_grid(40), 77);
  const auto a = ssi_invert_ve(m, NoiseSchedule::ve(), x0, cfg);
  const auto b = ssi_invert_ve(m, NoiseSchedule::ve(), x0, cfg);
  CHECK(a.noise == b.noise);
  CHECK(a.max_ratio == b.max_ratio);
}

TEST_CASE("baseline noise is correlated, SSI noise is not") {
  const ScoreOracle o(SubspaceGaussianScore::smooth_image({3, 8, 8}, 8, Vector::Ones(8), 1));
  const auto vp = NoiseSchedule::vp();
  const auto full = ddim_kappa_grid(1000, 2, 1);
  std::vector<Vector> ssi, base, fresh;
  for (std::size_t i = 0; i < 150; ++i) {
    const ScoreModel m(o, 1e-3, derive_seed(1, i, 9));
    const Vector x0 = o.sample_one(2, i);
    ssi.push_back(ssi_invert_vp(m, vp, x0, ssi_cfg(0.039, full, derive_seed(3, i))).noise);
    InversionConfig b;
    b.method = InversionMethod::BaselineDdim;
    b.grid = full;
    base.push_back(ddim_invert_baseline(m, vp, x0, b).noise);
    fresh.push_back(standard_normal(derive_seed(4, i), 192));
  }
  const GridShape g{3, 8, 8};
  const auto rs = correlation_metrics(ssi, g), rb = correlation_metrics(base, g), rf = correlation_metrics(fresh, g);
  CHECK(within_se(*rs.hori, *rf.hori, 3.0));
  CHECK(within_se(*rs.vert, *rf.vert, 3.0));
  CHECK(within_se(*rs.chan, *rf.chan, 3.0));
  CHECK(rb.hori->mean > rf.hori->mean + 5.0 * std::hypot(rb.hori->se, rf.hori->se));
}
