// One line per criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ssi/commands.hpp"
#include "ssi/diagnostics.hpp"
#include "ssi/interp.hpp"

using namespace ssi;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<std::pair<std::string, Json>> g_runs;

RunReport run(const std::string& command, Json doc) {
  if (!doc.contains("seed")) doc["seed"] = 20240601;
  RunReport r = run_from_json(doc, command);
  g_runs.emplace_back(command, to_json(r));
  return r;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

TimeGrid uniform(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[i] = a + (b - a) * i / n;
  t.back() = b;
  return TimeGrid(std::move(t), GridDirection::Ascending);
}

double fitted_order(const std::vector<int>& ns, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = std::log(1.0 / ns[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Outcome integrator_orders() {
  const auto sub = SubspaceGaussianScore::random(6, 2, (Vector(2) << 1.0, 0.4).finished(), 3);
  const ScoreOracle o(sub);
  const Vector x0 = standard_normal(17, 6);
  const Vector exact = gaussian_exact(sub, x0, 0.2, 4.0);
  const std::vector<int> ns{25, 50, 100, 200, 400};
  std::vector<double> eu, he;
  for (int n : ns) {
    const auto g = uniform(0.2, 4.0, n);
    eu.push_back((integrate_to(NoiseSchedule::ve(), o, {Method::Euler}, x0, g) - exact).norm());
    he.push_back((integrate_to(NoiseSchedule::ve(), o, {Method::Heun}, x0, g) - exact).norm());
  }
  const double pe = fitted_order(ns, eu), ph = fitted_order(ns, he);
  return {std::abs(pe - 1.0) <= 0.25 && std::abs(ph - 2.0) <= 0.25, fmt("orders euler %.3f heun %.3f", pe, ph)};
}

Outcome singularity() {
  const auto eight = run("verify-singularity", {{"trials", 200}});
  const auto axis = run("verify-singularity", {{"trials", 2000}, {"oracle", {{"type", "axis"}}}});
  const double spread = eight.aggregates["relative_spread"];
  const double term = axis.aggregates["terminal_ratio"];
  return {eight.passed() && axis.passed(), fmt("eight-point spread %.2e, axis terminal ratio %.4f", spread, term)};
}

Outcome concentration() {
  const Json circle{{"sigmas", {0.01, 0.001}}};
  const Json axis{{"oracle", {{"type", "axis"}}}, {"sigmas", {0.01, 0.001}}};
  const Json image{{"oracle", {{"type", "toy_image"}}}, {"sigmas", {0.01, 0.001}}};
  bool ok = true;
  std::string detail;
  double image_mean = 0.0;
  for (const auto& doc : {circle, axis, image}) {
    const auto r = run("verify-projection", doc);
    bool regime = true;
    for (const auto& rung : r.aggregates["rungs"]) regime = regime && rung["regime_ok"].get<bool>();
    bool ks = r.verdicts.contains("scale_invariance") && r.verdicts["scale_invariance"].get<bool>();
    for (const auto& rung : r.verdicts["rungs"]) ks = ks && rung.value("ks_pass", false);
    ok = ok && regime && ks;
    image_mean = r.aggregates["rungs"][0]["mean_ratio"];
  }
  const double rel = std::abs(image_mean / std::sqrt(184.0) - 1.0);
  ok = ok && rel < 0.02;
  detail = fmt("d=192 mean ratio %.4f vs sqrt(184) %.4f", image_mean, std::sqrt(184.0));
  return {ok, detail};
}

Outcome reconstruction_bound() {
  const double rad = chi_square_bound(2, 0.05).chi_bound;
  bool ok = std::abs(rad - 12.887) < 0.001;
  std::string detail = fmt("d=2 radicand %.5f; min fraction", rad);
  double worst = 1.0;
  const Json oracles[] = {{{"type", "circle"}}, {{"type", "subspace"}, {"dim", 8}, {"latent_dim", 2}},
                          {{"type", "toy_image"}}};
  for (const auto& o : oracles) {
    const auto r = run("reconstruct", {{"oracle", o}, {"trials", 1000}, {"deltas", {0.05, 0.2}}});
    ok = ok && r.passed();
    for (const auto& b : r.aggregates["ssi"]["bounds"]) worst = std::min(worst, b["fraction_within"].get<double>());
  }
  return {ok, detail + fmt(" %.4f", worst)};
}

Outcome gaussianity() {
  const auto r = run("invert", {{"trials", 300}, {"perturbation", 1e-3}, {"methods", {"ssi", "baseline_ddim"}},
                                {"noise_seeds", 2}});
  const bool ok = r.verdicts["ssi_within_2se_of_reference"] == true &&
                  r.verdicts["baseline_ddim_exceeds_reference_5se"] == true;
  const auto& z = r.aggregates["ssi"]["z_vs_reference"];
  const auto& zb = r.aggregates["baseline_ddim"]["z_vs_reference"];
  return {ok, fmt("ssi z chan %.2f hori %.2f vert %.2f", z["chan"], z["hori"], z["vert"]) +
                  fmt(", baseline max z %.1f", std::max({zb["chan"].get<double>(), zb["hori"].get<double>(),
                                                         zb["vert"].get<double>()}))};
}

Outcome tradeoff() {
  const auto r = run("sweep-tssi", Json::object());
  const bool ok = r.verdicts["interior_minimum"] == true && r.verdicts["best_cell_is_200_0.1"] == true;
  const auto& b = r.aggregates["ladder_grid_best"];
  return {ok, fmt("best cell (%.0f, %.2f) mse %.5f", b["steps"], b["t_ssi"], b["mse"]) +
                  (r.verdicts["large_t_branch_rises"] == true ? ", large-t branch rises" : ", large-t branch flat")};
}

Outcome ill_posedness() {
  const auto r = run("invert", {{"trials", 2}, {"methods", {"ssi"}}, {"noise_seeds", 10}});
  const bool ok = r.verdicts["near_orthogonal"] == true && r.verdicts["reconstructions_within_bound"] == true;
  const auto& a = r.aggregates["ill_posedness"];
  return {ok, fmt("mean |cos| %.4f < %.4f", a["mean_abs_cosine"], a["threshold"])};
}

Outcome ddim_equivalence() {
  const ScoreOracle o(SubspaceGaussianScore::random(8, 3, Vector::Ones(3), 9));
  const auto vp = NoiseSchedule::vp();
  const auto g = ddim_kappa_grid(1000, 2, 1).reversed();
  const Vector xT = standard_normal(4, 8) * scale(vp, g.front()) * sigma(vp, g.front());
  std::vector<Vector> a, b;
  ddim_sample(o, vp, xT, g, AlphaMode::Continuous, 1000,
              [&](std::size_t, double t, const Vector& x) { a.push_back(x / scale(vp, t)); });
  integrate_sigma_euler(vp, o, xT / scale(vp, g.front()), g,
                        [&](std::size_t, double, const Vector& x) { b.push_back(x); });
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
  return {a.size() == 500 && a.size() == b.size() && worst < 1e-8,
          fmt("%.0f steps, worst per-step gap %.2e", static_cast<double>(a.size()), worst)};
}

Outcome slerp_exactness() {
  double norm_gap = 0.0, sym_gap = 0.0;
  bool endpoints = true;
  for (std::size_t i = 0; i < 10000; ++i) {
    const Vector a = standard_normal(derive_seed(99, i, 0), 16);
    Vector b = standard_normal(derive_seed(99, i, 1), 16);
    endpoints = endpoints && slerp(a, b, 0.0) == a && slerp(a, b, 1.0) == b;
    b *= a.norm() / b.norm();
    const double lam = static_cast<double>(i % 1001) / 1000.0;
    const Vector x = slerp(a, b, lam);
    norm_gap = std::max(norm_gap, std::abs(x.norm() - a.norm()));
    sym_gap = std::max(sym_gap, (x - slerp(b, a, 1.0 - lam)).norm());
  }
  return {endpoints && norm_gap < 1e-10 && sym_gap < 1e-12, fmt("norm gap %.1e, symmetry gap %.1e", norm_gap, sym_gap)};
}

Outcome replay() {
  run("interpolate", Json::object());
  int same = 0;
  for (const auto& [command, report] : g_runs) {
    const Json echoed = Json::parse(report.dump());
    const Json again = to_json(run_from_json(echoed, command));
    if (replay_view(again).dump() == replay_view(echoed).dump()) ++same;
  }
  return {same == static_cast<int>(g_runs.size()),
          fmt("%.0f of %.0f reports replayed bit-identically", same, static_cast<double>(g_runs.size()))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all{
      {1, "integrator convergence orders", 10, integrator_orders},
      {2, "singularity ratio bounded and stabilized", 30, singularity},
      {3, "projected distance concentrates as chi(d-n)", 60, concentration},
      {4, "roundtrip error within the chi-square bound", 300, reconstruction_bound},
      {5, "SSI noise Gaussian, baseline noise correlated", 300, gaussianity},
      {6, "t_ssi x steps tradeoff shape", 600, tradeoff},
      {7, "inverted noises near-orthogonal across seeds", 60, ill_posedness},
      {8, "DDIM iterate equals Euler in sigma", 10, ddim_equivalence},
      {9, "SLERP exactness", 5, slerp_exactness},
      {10, "replay from echoed config", 1e9, replay},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures;
}
