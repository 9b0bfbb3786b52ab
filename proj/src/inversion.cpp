#include "ssi/inversion.hpp"

#include <algorithm>
#include <cmath>

#include "ssi/error.hpp"

namespace ssi {

std::string to_string(InversionMethod m) {
  switch (m) {
    case InversionMethod::Ssi: return "ssi";
    case InversionMethod::BaselineDdim: return "baseline_ddim";
    case InversionMethod::BaselineOde: return "baseline_ode";
  }
  return "?";
}

std::string to_string(AlphaMode m) { return m == AlphaMode::Continuous ? "continuous" : "discrete"; }

Formulation native_formulation(const NoiseSchedule& sch) {
  return sch.is_vp() ? Formulation::VpScaled : Formulation::Ve;
}

Vector InversionResult::unscaled_noise() const {
  if (formulation == Formulation::Ve) return noise;
  return noise / scale(schedule, t_final);
}

void validate(const InversionConfig& cfg, const NoiseSchedule& sch) {
  const auto& g = cfg.grid;
  if (g.direction() != GridDirection::Ascending) throw InvalidArgument("inversion grid must be ascending");
  if (g.back() > sch.t_max()) throw InvalidArgument("inversion grid leaves the schedule domain");
  if (cfg.method == InversionMethod::Ssi) {
    if (!(cfg.t_ssi > 0.0) || !std::isfinite(cfg.t_ssi)) throw InvalidArgument("t_ssi must be positive");
    if (g.front() != cfg.t_ssi) throw InvalidArgument("SSI grid must start at t_ssi");
  } else if (!(g.front() > 0.0)) {
    throw InvalidArgument("baseline inversion grid must start at a positive time");
  }
  if (cfg.method == InversionMethod::BaselineDdim && !sch.is_vp())
    throw InvalidArgument("DDIM inversion needs a VP schedule");
}

DDIMCoefficients ddim_coefficients(const std::vector<double>& alpha_bars) {
  DDIMCoefficients c;
  c.phi.assign(alpha_bars.size(), 0.0);
  c.psi.assign(alpha_bars.size(), 0.0);
  for (std::size_t i = 1; i < alpha_bars.size(); ++i) {
    const double prev = alpha_bars[i - 1];
    const double cur = alpha_bars[i];
    if (!(cur < 1.0) || !(cur > 0.0) || !(prev > 0.0) || prev > 1.0)
      throw InvalidArgument("alpha_bar must lie in (0, 1) at every later grid point");
    c.phi[i] = std::sqrt((1.0 - prev) / (1.0 - cur));
    c.psi[i] = std::sqrt(prev) - c.phi[i] * std::sqrt(cur);
  }
  return c;
}

std::vector<double> grid_alpha_bars(const NoiseSchedule& sch, const TimeGrid& grid, AlphaMode mode,
                                    int full_steps) {
  if (!sch.is_vp()) throw InvalidArgument("alpha_bar is defined for VP schedules only");
  std::vector<double> out(grid.size());
  if (mode == AlphaMode::Continuous) {
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = alpha_bar(sch, grid[i]);
    return out;
  }
  const auto table = discrete_alpha_bars(sch, full_steps);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    int idx = 0;
    if (grid.has_indices()) {
      idx = grid.indices()[i];
    } else {
      const double raw = grid[i] * full_steps;
      idx = static_cast<int>(std::lround(raw));
      if (std::abs(raw - idx) > 1e-9) throw InvalidArgument("grid time is not a multiple of 1/full_steps");
    }
    if (idx < 0 || idx > full_steps) throw InvalidArgument("grid index outside the discrete schedule");
    out[i] = table[static_cast<std::size_t>(idx)];
  }
  return out;
}

namespace {

double sigma_from_alpha(double a) { return std::sqrt((1.0 - a) / a); }

double ratio(const ScoreOracle& oracle, const Vector& x, double sig) {
  return sig * oracle.score(x, sig).norm();
}

InversionResult finish(Vector noise, const NoiseSchedule& sch, Formulation f, const InversionConfig& cfg,
                       Vector injected, double max_ratio, std::optional<Trajectory> traj) {
  InversionResult r;
  r.noise = std::move(noise);
  r.schedule = sch;
  r.formulation = f;
  r.t_final = cfg.grid.back();
  r.injected = std::move(injected);
  r.max_ratio = max_ratio;
  r.trajectory = std::move(traj);
  r.config = cfg;
  return r;
}

InversionResult run_ode(const ScoreModel& model, const NoiseSchedule& sch, Formulation f, const Vector& start,
                        const InversionConfig& cfg, Vector injected) {
  const auto& oracle = model.exact();
  double max_ratio = 0.0;
  std::optional<Trajectory> traj;
  if (cfg.keep_trajectory) traj = Trajectory{{}, cfg.grid, sch, f, oracle.grid_shape()};
  const auto observe = [&](std::size_t, double t, const Vector& x) {
    const Vector xu = f == Formulation::Ve ? x : Vector(x / scale(sch, t));
    max_ratio = std::max(max_ratio, ratio(oracle, xu, sigma(sch, t)));
    if (traj) traj->states.push_back(x);
  };
  Vector out = integrate_to(sch, model, {cfg.integrator, f}, start, cfg.grid, observe);
  return finish(std::move(out), sch, f, cfg, std::move(injected), max_ratio, std::move(traj));
}

void check_x0(const ScoreModel& model, const Vector& x0) {
  if (x0.size() != model.dim()) throw InvalidArgument("x0 dimension does not match the oracle");
  if (!x0.allFinite()) throw InvalidArgument("x0 has non-finite components");
}

}  // namespace

InversionResult ssi_invert_ve(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                              const InversionConfig& cfg) {
  if (sch.is_vp()) throw InvalidArgument("ssi_invert_ve needs a VE schedule");
  if (cfg.method != InversionMethod::Ssi) throw InvalidArgument("config method is not SSI");
  validate(cfg, sch);
  check_x0(model, x0);
  Vector n = standard_normal(cfg.noise_seed, x0.size());
  const Vector start = x0 + sigma(sch, cfg.t_ssi) * n;
  return run_ode(model, sch, Formulation::Ve, start, cfg, std::move(n));
}

InversionResult ssi_invert_vp(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                              const InversionConfig& cfg) {
  if (!sch.is_vp()) throw InvalidArgument("ssi_invert_vp needs a VP schedule");
  if (cfg.method != InversionMethod::Ssi) throw InvalidArgument("config method is not SSI");
  validate(cfg, sch);
  check_x0(model, x0);
  Vector n = standard_normal(cfg.noise_seed, x0.size());
  const double s = scale(sch, cfg.t_ssi);
  const Vector start = s * x0 + s * sigma(sch, cfg.t_ssi) * n;
  return run_ode(model, sch, Formulation::VpScaled, start, cfg, std::move(n));
}

InversionResult ode_invert_baseline(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                                    const InversionConfig& cfg) {
  validate(cfg, sch);
  check_x0(model, x0);
  const Formulation f = native_formulation(sch);
  const Vector start = f == Formulation::Ve ? x0 : Vector(scale(sch, cfg.grid.front()) * x0);
  return run_ode(model, sch, f, start, cfg, Vector());
}

InversionResult ddim_invert_baseline(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                                     const InversionConfig& cfg) {
  validate(cfg, sch);
  if (!sch.is_vp()) throw InvalidArgument("DDIM inversion needs a VP schedule");
  check_x0(model, x0);
  const auto alphas = grid_alpha_bars(sch, cfg.grid, cfg.alpha, cfg.full_steps);
  if (alphas.front() >= 1.0) throw InvalidArgument("DDIM inversion step has phi = 0");
  const auto coef = ddim_coefficients(alphas);
  const auto& oracle = model.exact();
  std::optional<Trajectory> traj;
  if (cfg.keep_trajectory) traj = Trajectory{{}, cfg.grid, sch, Formulation::VpScaled, oracle.grid_shape()};

  Vector x = std::sqrt(alphas.front()) * x0;
  double max_ratio = ratio(oracle, x0, sigma_from_alpha(alphas.front()));
  if (traj) traj->states.push_back(x);
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (coef.phi[i] == 0.0) throw InvalidArgument("DDIM inversion step has phi = 0");
    const double sig = sigma_from_alpha(alphas[i]);
    const Vector d = model.denoise(x / std::sqrt(alphas[i]), sig);
    x = (x - coef.psi[i] * d) / coef.phi[i];
    if (!x.allFinite()) throw IntegrationDiverged(i, "DDIM inversion produced a non-finite state");
    max_ratio = std::max(max_ratio, ratio(oracle, x / std::sqrt(alphas[i]), sig));
    if (traj) traj->states.push_back(x);
  }
  return finish(std::move(x), sch, Formulation::VpScaled, cfg, Vector(), max_ratio, std::move(traj));
}

InversionResult invert(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                       const InversionConfig& cfg) {
  switch (cfg.method) {
    case InversionMethod::Ssi:
      return sch.is_vp() ? ssi_invert_vp(model, sch, x0, cfg) : ssi_invert_ve(model, sch, x0, cfg);
    case InversionMethod::BaselineDdim: return ddim_invert_baseline(model, sch, x0, cfg);
    case InversionMethod::BaselineOde: return ode_invert_baseline(model, sch, x0, cfg);
  }
  throw InvalidArgument("unknown inversion method");
}

Vector ddim_sample(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x_t, const TimeGrid& grid,
                   AlphaMode mode, int full_steps, const StepObserver& observer) {
  if (grid.direction() != GridDirection::Descending) throw InvalidArgument("DDIM sampling grid must descend");
  if (!x_t.allFinite()) throw InvalidArgument("DDIM start state has non-finite components");
  const auto alphas = grid_alpha_bars(sch, grid, mode, full_steps);
  Vector x = x_t;
  if (observer) observer(0, grid[0], x);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double cur = alphas[i];
    const double prev = alphas[i + 1];
    const double phi = std::sqrt((1.0 - prev) / (1.0 - cur));
    const double psi = std::sqrt(prev) - phi * std::sqrt(cur);
    const Vector d = model.denoise(x / std::sqrt(cur), sigma_from_alpha(cur));
    x = phi * x + psi * d;
    if (!x.allFinite()) throw IntegrationDiverged(i + 1, "DDIM sampling produced a non-finite state");
    if (observer) observer(i + 1, grid[i + 1], x);
  }
  return x;
}

Reconstruction sample_from(const ScoreModel& model, const NoiseSchedule& sch, Formulation formulation,
                           const Vector& noise, const TimeGrid& grid, SamplerSpec spec) {
  if (grid.direction() != GridDirection::Descending) throw InvalidArgument("sampling grid must descend");
  const auto& oracle = model.exact();
  Reconstruction rec;
  double max_ratio = 0.0;
  Vector last;
  if (spec.kind == SamplerKind::Ode) {
    const auto observe = [&](std::size_t, double t, const Vector& x) {
      const double sig = sigma(sch, t);
      if (sig > 0.0) {
        const Vector xu = formulation == Formulation::Ve ? x : Vector(x / scale(sch, t));
        max_ratio = std::max(max_ratio, ratio(oracle, xu, sig));
      }
    };
    last = integrate_to(sch, model, {spec.method, formulation}, noise, grid, observe);
    rec.sigma_last = sigma(sch, grid.back());
    if (formulation == Formulation::VpScaled) last /= scale(sch, grid.back());
  } else {
    if (formulation != Formulation::VpScaled) throw InvalidArgument("DDIM sampling works on the scaled VP state");
    const auto alphas = grid_alpha_bars(sch, grid, spec.alpha, spec.full_steps);
    const auto observe = [&](std::size_t i, double, const Vector& x) {
      const double a = alphas[i];
      if (a < 1.0) max_ratio = std::max(max_ratio, ratio(oracle, x / std::sqrt(a), sigma_from_alpha(a)));
    };
    last = ddim_sample(model, sch, noise, grid, spec.alpha, spec.full_steps, observe);
    rec.sigma_last = alphas.back() < 1.0 ? sigma_from_alpha(alphas.back()) : 0.0;
    last /= std::sqrt(alphas.back());
  }
  rec.x_last = last;
  rec.x0_hat = rec.sigma_last > 0.0 ? oracle.posterior_mean(last, rec.sigma_last) : last;
  rec.max_ratio = max_ratio;
  return rec;
}

Reconstruction reconstruct(const ScoreModel& model, const NoiseSchedule& sch, const InversionResult& inv,
                           const TimeGrid& grid, SamplerSpec spec) {
  if (sch.family != inv.schedule.family) throw InvalidArgument("sampling and inversion schedules differ");
  if (grid.front() != inv.t_final) throw InvalidArgument("sampling grid must start at the inversion end time");
  Reconstruction rec = sample_from(model, sch, inv.formulation, inv.noise, grid, spec);
  rec.max_ratio = std::max(rec.max_ratio, inv.max_ratio);
  return rec;
}

}  // namespace ssi
