#include "ssi/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ssi/diagnostics.hpp"
#include "ssi/error.hpp"
#include "ssi/interp.hpp"
#include "ssi/parallel.hpp"

namespace ssi {

namespace {

Seed base_of(const ExperimentConfig& c) { return *c.seed; }

Seed data_stream(const ExperimentConfig& c) { return derive_seed(base_of(c), 0, tags::kData); }

Vector data_point(const ExperimentConfig& c, const ScoreOracle& o, std::size_t i) {
  if (!c.x0.empty()) return Eigen::Map<const Vector>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));
  return o.sample_one(data_stream(c), i);
}

SamplerSpec sampler_of(const ExperimentConfig& c) {
  return {c.sampler, c.integrator, c.alpha, c.grid.full_steps};
}

InversionConfig inversion_of(const ExperimentConfig& c, InversionMethod m, const TimeGrid& full, Seed noise_seed) {
  InversionConfig ic;
  ic.method = m;
  ic.t_ssi = m == InversionMethod::Ssi ? c.t_ssi : 0.0;
  ic.grid = m == InversionMethod::Ssi ? full.starting_at(c.t_ssi) : full;
  ic.noise_seed = noise_seed;
  ic.integrator = c.integrator;
  ic.alpha = c.alpha;
  ic.full_steps = c.grid.full_steps;
  return ic;
}

Json metric_json(const std::optional<GaussianityReport::Metric>& m) {
  if (!m) return nullptr;
  return {{"mean", m->mean}, {"se", m->se}};
}

Json gaussianity_json(const GaussianityReport& r) {
  return {{"chan", metric_json(r.chan)},
          {"hori", metric_json(r.hori)},
          {"vert", metric_json(r.vert)},
          {"sample_count", r.sample_count},
          {"definition", "per-image |pearson r|, batch mean"}};
}

bool usable_grid(const std::optional<GridShape>& g) {
  return g && g->channels >= 2 && g->height >= 2 && g->width >= 2;
}

Json seeds_json(const ExperimentConfig& c) {
  return {{"base", base_of(c)},
          {"rule", "stream i of kind k = derive_seed(base, i, k)"},
          {"kinds",
           {{"data", tags::kData},
            {"noise", tags::kNoise},
            {"score_perturbation", tags::kModel},
            {"fresh_reference", tags::kFresh},
            {"sampling_start", tags::kStart},
            {"pilot", tags::kPilot},
            {"rung", tags::kRung},
            {"cosine", tags::kCosine}}}};
}

double radicand_root(Eigen::Index d, double delta) {
  return std::sqrt(chi_square_bound(static_cast<int>(d), delta).chi_bound);
}

}  // namespace

// ---------------------------------------------------------------------------

RunReport cmd_verify_singularity(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const auto& sch = c.schedule;
  const TimeGrid grid = build_grid(c.grid).reversed();
  const Formulation f = native_formulation(sch);
  const double t_top = grid.front();
  const auto d = oracle.dim();

  struct Trace {
    std::vector<double> ratio;
  };
  const auto traces = run_trials(c.trials, [&](std::size_t i) {
    const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), i, tags::kModel));
    const Vector xu = sigma(sch, t_top) * standard_normal(derive_seed(base_of(c), i, tags::kStart), d);
    const Vector start = f == Formulation::Ve ? xu : Vector(scale(sch, t_top) * xu);
    Trace tr;
    tr.ratio.reserve(grid.size());
    integrate_to(sch, model, {c.integrator, f}, start, grid, [&](std::size_t, double t, const Vector& x) {
      const double sg = sigma(sch, t);
      const Vector u = f == Formulation::Ve ? x : Vector(x / scale(sch, t));
      tr.ratio.push_back((oracle.posterior_mean(u, sg) - u).norm() / sg);
    });
    return tr;
  });

  std::vector<std::vector<TracePoint>> pts;
  for (const auto& tr : traces) {
    std::vector<TracePoint> p;
    for (std::size_t k = 0; k < grid.size(); ++k) p.push_back({sigma(sch, grid[k]), tr.ratio[k]});
    pts.push_back(std::move(p));
  }
  const auto rms = rms_trace(pts);
  const double s_min = sigma(sch, grid.back());
  const double spread = relative_spread(rms, s_min, 10.0 * s_min);
  const double limit = 10.0 * std::sqrt(static_cast<double>(d));
  const double expected = std::sqrt(static_cast<double>(d - oracle.manifold_dim()));
  const double terminal = terminal_ratio(rms);

  RunReport r;
  r.aggregates = {{"aggregate", "rms over trajectories"},
                  {"terminal_ratio", terminal},
                  {"expected_sqrt_codim", expected},
                  {"relative_spread", spread},
                  {"spread_window", {s_min, 10.0 * s_min}},
                  {"max_ratio", std::max_element(rms.begin(), rms.end(), [](auto& a, auto& b) {
                                  return a.ratio < b.ratio;
                                })->ratio},
                  {"bound_limit", limit}};
  r.verdicts = {{"bounded", trace_bounded(rms, limit)}, {"stabilized", spread < 0.25}};
  if (oracle.subspace()) r.verdicts["converged_to_sqrt_codim"] = std::abs(terminal - expected) / expected < 0.1;

  CsvTable t{"singularity_trace", {"step", "sigma", "rms_ratio"}, {}};
  for (std::size_t k = 0; k < rms.size(); ++k) t.rows.push_back(Json::array({k, rms[k].sigma, rms[k].ratio}));
  r.tables.push_back(std::move(t));
  for (std::size_t i = 0; i < traces.size(); ++i)
    r.trials.push_back({{"trial", i}, {"terminal_ratio", traces[i].ratio.back()}});

  if (c.verbosity == "full") {
    const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), 0, tags::kModel));
    const Vector xu = sigma(sch, t_top) * standard_normal(derive_seed(base_of(c), 0, tags::kStart), d);
    const Vector start = f == Formulation::Ve ? xu : Vector(scale(sch, t_top) * xu);
    const auto traj = integrate(sch, model, {c.integrator, f}, StateVector(start, oracle.grid_shape()), grid);
    std::ostringstream os;
    write_trajectory_csv(os, traj, &oracle, d > 8, c.unscaled_output);
    r.files.emplace_back("trajectory_0.csv", os.str());
  }
  return r;
}

// ---------------------------------------------------------------------------

RunReport cmd_verify_projection(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const double dof = static_cast<double>(oracle.dim() - oracle.manifold_dim());
  RunReport r;
  Json rungs = Json::array();
  Json rung_verdicts = Json::array();
  CsvTable t{"projection",
             {"sigma", "regime_ok", "mean_ratio", "chi_mean", "ks_statistic", "ks_p", "coverage", "band_lo", "band_hi"},
             {}};
  std::vector<std::vector<double>> ok_ratios;
  for (std::size_t k = 0; k < c.sigmas.size(); ++k) {
    const double s = c.sigmas[k];
    const auto pilot = projection_ratios(oracle, s, c.pilot_trials, derive_seed(base_of(c), k, tags::kPilot));
    const double kfit = fit_tail_constant(pilot, std::sqrt(dof));
    const double a = tail_half_width(kfit, c.coverage_eps);
    const auto rep = projection_concentration(oracle, s, c.trials, derive_seed(base_of(c), k, tags::kRung), a);
    const double mean_ratio = stats::mean(rep.ratios);
    rungs.push_back({{"sigma", s},
                     {"regime_ok", rep.regime_ok},
                     {"mean_ratio", mean_ratio},
                     {"chi_mean", rep.chi_mean},
                     {"center", rep.center},
                     {"ks_statistic", rep.ks.statistic},
                     {"ks_p", rep.ks.p_value},
                     {"tail_k", kfit},
                     {"band", {rep.band_lo, rep.band_hi}},
                     {"coverage", rep.coverage_fraction}});
    if (rep.regime_ok) {
      rung_verdicts.push_back({{"sigma", s},
                               {"ks_pass", rep.ks.passes(0.01)},
                               {"coverage_pass", rep.coverage_fraction >= 1.0 - c.coverage_eps}});
      ok_ratios.push_back(rep.ratios);
    } else {
      rung_verdicts.push_back({{"sigma", s}, {"status", "asymptotic regime violated"}});
    }
    t.rows.push_back(Json::array({s, rep.regime_ok ? 1 : 0, mean_ratio, rep.chi_mean, rep.ks.statistic,
                                  rep.ks.p_value, rep.coverage_fraction, rep.band_lo, rep.band_hi}));
    if (c.verbosity == "full") r.trials.push_back({{"sigma", s}, {"ratios", rep.ratios}});
  }
  Json scale = Json::array();
  bool scale_ok = true;
  for (std::size_t k = 1; k < ok_ratios.size(); ++k) {
    const auto ks = stats::ks_two_sample(ok_ratios[k - 1], ok_ratios[k]);
    scale.push_back({{"ks_statistic", ks.statistic}, {"ks_p", ks.p_value}});
    scale_ok = scale_ok && ks.passes(0.01);
  }
  r.aggregates = {{"dof", dof}, {"significance", 0.01}, {"rungs", rungs}, {"scale_invariance", scale}};
  r.verdicts = {{"rungs", rung_verdicts}};
  if (ok_ratios.size() >= 2) r.verdicts["scale_invariance"] = scale_ok;
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------------------

RunReport cmd_invert(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const auto& sch = c.schedule;
  const TimeGrid full = build_grid(c.grid);
  const TimeGrid back = full.reversed();
  const auto d = oracle.dim();
  const SamplerSpec spec = sampler_of(c);
  const double s_ssi = sigma(sch, c.t_ssi);

  struct Trial {
    Vector noise;
    double mse = 0.0;
    double max_ratio = 0.0;
  };
  RunReport r;
  std::map<InversionMethod, GaussianityReport> metrics;
  for (auto m : c.methods) {
    const auto res = run_trials(c.trials, [&](std::size_t i) {
      const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), i, tags::kModel));
      const Vector x0 = data_point(c, oracle, i);
      const auto inv = invert(model, sch, x0, inversion_of(c, m, full, derive_seed(base_of(c), i, tags::kNoise)));
      const auto rec = reconstruct(model, sch, inv, back, spec);
      return Trial{c.unscaled_output ? inv.unscaled_noise() : inv.noise, mse(x0, rec.x0_hat), rec.max_ratio};
    });
    std::vector<Vector> noises;
    std::vector<double> mses;
    for (std::size_t i = 0; i < res.size(); ++i) {
      noises.push_back(res[i].noise);
      mses.push_back(res[i].mse);
      r.trials.push_back({{"trial", i},
                          {"method", to_string(m)},
                          {"mse", res[i].mse},
                          {"max_ratio", res[i].max_ratio},
                          {"noise_norm", res[i].noise.norm()}});
      if (c.verbosity == "full") r.trials.back()["noise"] = std::vector<double>(res[i].noise.data(), res[i].noise.data() + d);
    }
    r.aggregates[to_string(m)] = {{"mse_mean", stats::mean(mses)}};
    if (c.trials >= 2) r.aggregates[to_string(m)]["mse_se"] = stats::standard_error(mses);
    if (usable_grid(oracle.grid_shape()) && c.trials >= 2) {
      metrics[m] = correlation_metrics(noises, *oracle.grid_shape());
      r.aggregates[to_string(m)]["gaussianity"] = gaussianity_json(metrics[m]);
    }
  }

  if (usable_grid(oracle.grid_shape()) && c.trials >= 2) {
    std::vector<Vector> fresh;
    for (std::size_t i = 0; i < c.trials; ++i) fresh.push_back(standard_normal(derive_seed(base_of(c), i, tags::kFresh), d));
    const auto ref = correlation_metrics(fresh, *oracle.grid_shape());
    r.aggregates["fresh_gaussian"] = {{"gaussianity", gaussianity_json(ref)}};
    CsvTable t{"gaussianity", {"method", "chan", "chan_se", "hori", "hori_se", "vert", "vert_se"}, {}};
    const auto row = [&](const std::string& name, const GaussianityReport& g) {
      t.rows.push_back(Json::array({name, g.chan->mean, g.chan->se, g.hori->mean, g.hori->se, g.vert->mean, g.vert->se}));
    };
    row("fresh_gaussian", ref);
    for (const auto& [m, g] : metrics) {
      row(to_string(m), g);
      const std::pair<const char*, std::pair<GaussianityReport::Metric, GaussianityReport::Metric>> pairs[] = {
          {"chan", {*g.chan, *ref.chan}}, {"hori", {*g.hori, *ref.hori}}, {"vert", {*g.vert, *ref.vert}}};
      Json z = Json::object();
      bool all2 = true, any5 = false;
      for (const auto& [name, ab] : pairs) {
        const double se = std::hypot(ab.first.se, ab.second.se);
        z[name] = (ab.first.mean - ab.second.mean) / se;
        all2 = all2 && within_se(ab.first, ab.second, 2.0);
        any5 = any5 || ab.first.mean - ab.second.mean > 5.0 * se;
      }
      r.aggregates[to_string(m)]["z_vs_reference"] = z;
      if (m == InversionMethod::Ssi)
        r.verdicts["ssi_within_2se_of_reference"] = all2;
      else
        r.verdicts[to_string(m) + "_exceeds_reference_5se"] = any5;
    }
    r.tables.push_back(std::move(t));
  }

  if (std::find(c.methods.begin(), c.methods.end(), InversionMethod::Ssi) != c.methods.end()) {
    const Vector x0 = data_point(c, oracle, 0);
    const double delta = c.deltas.empty() ? 0.05 : c.deltas.front();
    struct Cos {
      Vector noise;
      double err_ratio;
      double c_meas;
    };
    const auto runs = run_trials(c.noise_seeds, [&](std::size_t j) {
      const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), j, tags::kCosine + 100));
      const auto inv = invert(model, sch, x0,
                              inversion_of(c, InversionMethod::Ssi, full, derive_seed(base_of(c), j, tags::kCosine)));
      const auto rec = reconstruct(model, sch, inv, back, spec);
      return Cos{inv.unscaled_noise(), (x0 - rec.x0_hat).norm() / s_ssi, rec.max_ratio};
    });
    CsvTable cm{"cosine_matrix", {}, {}};
    for (std::size_t j = 0; j < runs.size(); ++j) cm.columns.push_back("seed" + std::to_string(j));
    double acc = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
      Json row = Json::array();
      for (std::size_t b = 0; b < runs.size(); ++b) {
        const double cs = runs[a].noise.dot(runs[b].noise) / (runs[a].noise.norm() * runs[b].noise.norm());
        row.push_back(cs);
        if (b > a) {
          acc += std::abs(cs);
          ++pairs;
        }
      }
      cm.rows.push_back(row);
    }
    const double mean_cos = acc / pairs;
    const double root = radicand_root(d, delta);
    bool all_bound = true;
    Json per = Json::array();
    for (const auto& run : runs) {
      const bool ok = run.err_ratio <= run.c_meas + root;
      all_bound = all_bound && ok;
      per.push_back({{"error_over_sigma", run.err_ratio}, {"C", run.c_meas}, {"holds", ok}});
    }
    r.aggregates["ill_posedness"] = {{"mean_abs_cosine", mean_cos},
                                     {"threshold", 3.0 / std::sqrt(static_cast<double>(d))},
                                     {"delta", delta},
                                     {"chi_root", root},
                                     {"reconstructions", per}};
    r.verdicts["near_orthogonal"] = mean_cos < 3.0 / std::sqrt(static_cast<double>(d));
    r.verdicts["reconstructions_within_bound"] = all_bound;
    r.tables.push_back(std::move(cm));
  }
  return r;
}

// ---------------------------------------------------------------------------

RunReport cmd_sweep_tssi(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const auto& sch = c.schedule;
  const auto& g = c.grid;
  RunReport r;
  CsvTable t{"sweep", {"steps", "t_ssi", "mse", "mse_se", "manifold_distance", "pre_readout_distance"}, {}};
  // mse[steps index][t index]
  std::vector<std::vector<double>> table(c.steps_ladder.size(), std::vector<double>(c.t_ssi_ladder.size()));
  Json cells = Json::array();
  for (std::size_t si = 0; si < c.steps_ladder.size(); ++si) {
    const int steps = c.steps_ladder[si];
    const TimeGrid samp = karras_grid(g.t_min, g.t_max, g.rho, steps).without_zero().reversed();
    for (std::size_t ti = 0; ti < c.t_ssi_ladder.size(); ++ti) {
      const double ts = c.t_ssi_ladder[ti];
      InversionConfig ic;
      ic.integrator = c.integrator;
      if (ts == 0.0) {
        ic.method = InversionMethod::BaselineOde;
        ic.grid = karras_grid(g.t_min, g.t_max, g.rho, steps).without_zero();
      } else {
        ic.method = InversionMethod::Ssi;
        ic.t_ssi = ts;
        ic.grid = karras_grid(ts, g.t_max, g.rho, steps).without_zero();
      }
      struct Cell {
        double mse, dist, pre;
      };
      const auto res = run_trials(c.trials, [&](std::size_t i) {
        const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), i, tags::kModel));
        const Vector x0 = data_point(c, oracle, i);
        InversionConfig local = ic;
        local.noise_seed = derive_seed(base_of(c), i, tags::kNoise);
        const auto inv = invert(model, sch, x0, local);
        const auto rec = reconstruct(model, sch, inv, samp, {SamplerKind::Ode, c.integrator});
        return Cell{mse(x0, rec.x0_hat), oracle.manifold_distance(rec.x0_hat), oracle.manifold_distance(rec.x_last)};
      });
      std::vector<double> m, dist, pre;
      for (const auto& x : res) {
        m.push_back(x.mse);
        dist.push_back(x.dist);
        pre.push_back(x.pre);
      }
      const double mm = stats::mean(m);
      const double se = m.size() >= 2 ? stats::standard_error(m) : 0.0;
      table[si][ti] = mm;
      cells.push_back({{"steps", steps},
                       {"t_ssi", ts},
                       {"mse", mm},
                       {"mse_se", se},
                       {"manifold_distance", stats::mean(dist)},
                       {"pre_readout_distance", stats::mean(pre)}});
      t.rows.push_back(Json::array({steps, ts, mm, se, stats::mean(dist), stats::mean(pre)}));
    }
  }
  r.aggregates = {{"cells", cells}, {"data_diameter", oracle.data_diameter()}};
  r.tables.push_back(std::move(t));

  const auto& ladder = c.t_ssi_ladder;
  const auto find_t = [&](double v) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < ladder.size(); ++i)
      if (std::abs(ladder[i] - v) <= 1e-12 * std::max(1.0, v)) return i;
    return std::nullopt;
  };
  if (ladder.size() >= 3) {
    Json rows = Json::array();
    bool all = true;
    for (std::size_t si = 0; si < table.size(); ++si) {
      const auto& row = table[si];
      const auto best = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
      const bool interior = best > 0 && best + 1 < row.size() && row.front() > row[best] && row.back() > row[best];
      all = all && interior;
      rows.push_back({{"steps", c.steps_ladder[si]}, {"argmin_t_ssi", ladder[best]}, {"interior", interior}});
    }
    r.aggregates["minima"] = rows;
    r.verdicts["interior_minimum"] = all;
  }
  if (const auto i01 = find_t(0.1); i01 && ladder.size() >= 2) {
    std::size_t far = static_cast<std::size_t>(std::max_element(ladder.begin(), ladder.end()) - ladder.begin());
    if (const auto idd = find_t(oracle.data_diameter())) far = *idd;
    if (far != *i01) {
      bool ok = true;
      for (const auto& row : table) ok = ok && row[far] > row[*i01];
      r.verdicts["large_t_branch_rises"] = ok;
    }
  }
  const std::vector<double> t2{0.0, 0.01, 0.1, 0.2};
  const std::vector<int> s2{40, 100, 200};
  std::vector<std::size_t> ti2, si2;
  for (double v : t2)
    if (auto i = find_t(v)) ti2.push_back(*i);
  for (int v : s2)
    for (std::size_t i = 0; i < c.steps_ladder.size(); ++i)
      if (c.steps_ladder[i] == v) si2.push_back(i);
  if (ti2.size() == t2.size() && si2.size() == s2.size()) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, double> cell{0, 0.0};
    for (auto si : si2)
      for (auto ti : ti2)
        if (table[si][ti] < best) {
          best = table[si][ti];
          cell = {c.steps_ladder[si], ladder[ti]};
        }
    r.aggregates["ladder_grid_best"] = {{"steps", cell.first}, {"t_ssi", cell.second}, {"mse", best}};
    r.verdicts["best_cell_is_200_0.1"] = cell.first == 200 && cell.second == 0.1;
  }
  return r;
}

// ---------------------------------------------------------------------------

RunReport cmd_interpolate(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const auto& sch = c.schedule;
  const TimeGrid full = build_grid(c.grid);
  const TimeGrid back = full.reversed();
  const SamplerSpec spec = sampler_of(c);
  const double threshold = 3.0 * sigma(sch, back.back()) + 1e-9;
  RunReport r;
  CsvTable t{"frames", {"pair", "method", "lambda", "manifold_distance", "pre_readout_distance", "norm"}, {}};
  std::map<InversionMethod, std::vector<double>> dist, pre;
  bool ssi_near = true;
  for (std::size_t k = 0; k < c.trials; ++k) {
    const Vector xa = oracle.sample_one(c.data_seeds[0], k);
    const Vector xb = oracle.sample_one(c.data_seeds[1], k);
    const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), k, tags::kModel));
    for (auto m : c.methods) {
      const auto ia = invert(model, sch, xa, inversion_of(c, m, full, derive_seed(base_of(c), 2 * k, tags::kNoise)));
      const auto ib = invert(model, sch, xb, inversion_of(c, m, full, derive_seed(base_of(c), 2 * k + 1, tags::kNoise)));
      const auto frames = interpolate_and_decode(model, sch, ia, ib, c.lambdas, back, spec);
      for (std::size_t l = 0; l < frames.size(); ++l) {
        const double dd = oracle.manifold_distance(frames[l].x0_hat);
        const double pd = oracle.manifold_distance(frames[l].x_last);
        dist[m].push_back(dd);
        pre[m].push_back(pd);
        if (m == InversionMethod::Ssi && dd > threshold) ssi_near = false;
        t.rows.push_back(Json::array({k, to_string(m), c.lambdas[l], dd, pd, frames[l].x0_hat.norm()}));
        r.trials.push_back({{"pair", k}, {"method", to_string(m)}, {"lambda", c.lambdas[l]}, {"manifold_distance", dd},
                            {"pre_readout_distance", pd}});
      }
    }
  }
  for (const auto& [m, v] : dist)
    r.aggregates[to_string(m)] = {{"mean_manifold_distance", stats::mean(v)},
                                  {"mean_pre_readout_distance", stats::mean(pre[m])}};
  r.aggregates["threshold"] = threshold;
  if (dist.count(InversionMethod::Ssi)) r.verdicts["ssi_frames_near_manifold"] = ssi_near;
  for (const auto& [m, v] : dist) {
    if (m == InversionMethod::Ssi || !dist.count(InversionMethod::Ssi)) continue;
    const double a = stats::mean(dist[InversionMethod::Ssi]);
    const double b = stats::mean(v);
    r.observations["ssi_closer_than_" + to_string(m)] = {{"ssi", a}, {"baseline", b}, {"strictly_smaller", a < b}};
  }
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------------------

RunReport cmd_reconstruct(const ExperimentConfig& c) {
  const ScoreOracle oracle = build_oracle(c.oracle);
  const auto& sch = c.schedule;
  const TimeGrid full = build_grid(c.grid);
  const TimeGrid back = full.reversed();
  const SamplerSpec spec = sampler_of(c);
  const auto d = oracle.dim();
  const auto shape = oracle.grid_shape();
  const bool with_ssim = shape && shape->height >= 8 && shape->width >= 8;
  RunReport r;
  CsvTable t{"reconstruct", {"trial", "method", "mse", "error_over_sigma", "C", "manifold_distance"}, {}};
  for (auto m : c.methods) {
    struct Out {
      double mse, err_ratio, c_meas, dist, ssim;
    };
    const double s_ssi = m == InversionMethod::Ssi ? sigma(sch, c.t_ssi) : std::numeric_limits<double>::quiet_NaN();
    const auto res = run_trials(c.trials, [&](std::size_t i) {
      const ScoreModel model(oracle, c.perturbation, derive_seed(base_of(c), i, tags::kModel));
      const Vector x0 = data_point(c, oracle, i);
      const auto inv = invert(model, sch, x0, inversion_of(c, m, full, derive_seed(base_of(c), i, tags::kNoise)));
      const auto rec = reconstruct(model, sch, inv, back, spec);
      const double s = with_ssim ? ssim(x0, rec.x0_hat, *shape, {8, oracle.data_diameter()}) : 0.0;
      return Out{mse(x0, rec.x0_hat), (x0 - rec.x0_hat).norm() / s_ssi, rec.max_ratio,
                 oracle.manifold_distance(rec.x0_hat), s};
    });
    std::vector<double> mses, ssims;
    for (std::size_t i = 0; i < res.size(); ++i) {
      mses.push_back(res[i].mse);
      ssims.push_back(res[i].ssim);
      Json rec{{"trial", i}, {"method", to_string(m)}, {"mse", res[i].mse}, {"C", res[i].c_meas}};
      if (m == InversionMethod::Ssi) rec["error_over_sigma"] = res[i].err_ratio;
      r.trials.push_back(rec);
      t.rows.push_back(Json::array({i, to_string(m), res[i].mse, m == InversionMethod::Ssi ? Json(res[i].err_ratio) : Json("nan"),
                                    res[i].c_meas, res[i].dist}));
    }
    Json agg{{"mse_mean", stats::mean(mses)}};
    if (with_ssim) agg["ssim_mean"] = stats::mean(ssims);
    if (m == InversionMethod::Ssi) {
      Json bounds = Json::array();
      for (double delta : c.deltas) {
        const double root = radicand_root(d, delta);
        std::size_t hold = 0;
        for (const auto& x : res)
          if (x.err_ratio <= x.c_meas + root) ++hold;
        const double frac = static_cast<double>(hold) / static_cast<double>(res.size());
        bounds.push_back({{"delta", delta},
                          {"radicand", chi_square_bound(static_cast<int>(d), delta).chi_bound},
                          {"fraction_within", frac}});
        r.verdicts["bound_holds_delta_" + Json(delta).dump()] = frac >= 1.0 - delta;
      }
      agg["bounds"] = bounds;
    }
    r.aggregates[to_string(m)] = agg;
  }
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------------------

RunReport run_command(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  if (cfg.command == "verify-singularity") r = cmd_verify_singularity(cfg);
  else if (cfg.command == "verify-projection") r = cmd_verify_projection(cfg);
  else if (cfg.command == "invert") r = cmd_invert(cfg);
  else if (cfg.command == "sweep-tssi") r = cmd_sweep_tssi(cfg);
  else if (cfg.command == "interpolate") r = cmd_interpolate(cfg);
  else if (cfg.command == "reconstruct") r = cmd_reconstruct(cfg);
  else throw ConfigError("unknown command '" + cfg.command + "'");
  r.command = cfg.command;
  r.config = to_json(cfg);
  r.seeds = seeds_json(cfg);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RunReport run_from_json(const Json& doc, const std::string& command) {
  ExperimentConfig cfg = parse_config(doc, command);
  resolve(cfg);
  return run_command(cfg);
}

}  // namespace ssi
