#include "ssi/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ssi/error.hpp"

namespace ssi {

namespace {

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const Json& obj, const std::string& key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

Seed get_seed(const Json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("'" + key + "' must be a nonnegative integer");
  return v.get<Seed>();
}

Method parse_method(const std::string& s) {
  if (s == "euler") return Method::Euler;
  if (s == "heun") return Method::Heun;
  throw ConfigError("integrator must be 'euler' or 'heun'");
}

InversionMethod parse_inversion(const std::string& s) {
  if (s == "ssi") return InversionMethod::Ssi;
  if (s == "baseline_ddim") return InversionMethod::BaselineDdim;
  if (s == "baseline_ode") return InversionMethod::BaselineOde;
  throw ConfigError("unknown inversion method '" + s + "'");
}

Vector broadcast(const std::vector<double>& sd, int n) {
  if (sd.size() == 1) return Vector::Constant(n, sd.front());
  if (static_cast<int>(sd.size()) != n) throw ConfigError("stddevs must have 1 or latent_dim entries");
  return Eigen::Map<const Vector>(sd.data(), n);
}

OracleSpec parse_oracle(const Json& j, OracleSpec o) {
  const std::string type = get<std::string>(j, "type", o.type);
  if (type != o.type) {
    o = OracleSpec{};
    o.type = type;
    if (type == "toy_image") o.latent_dim = 8;
  }
  if (type == "circle") {
    reject_unknown(j, {"type", "radius", "count"}, "oracle");
    o.radius = get(j, "radius", o.radius);
    o.count = get(j, "count", o.count);
  } else if (type == "points") {
    reject_unknown(j, {"type", "points", "weights"}, "oracle");
    o.points = get(j, "points", o.points);
    o.weights = get(j, "weights", o.weights);
  } else if (type == "single") {
    reject_unknown(j, {"type", "point"}, "oracle");
    if (j.contains("point")) o.points = {get<std::vector<double>>(j, "point", {})};
  } else if (type == "axis") {
    reject_unknown(j, {"type"}, "oracle");
  } else if (type == "subspace") {
    reject_unknown(j, {"type", "dim", "latent_dim", "stddevs", "basis_seed"}, "oracle");
    o.dim = get(j, "dim", o.dim);
    o.latent_dim = get(j, "latent_dim", o.latent_dim);
    o.stddevs = get(j, "stddevs", o.stddevs);
    if (j.contains("basis_seed")) o.basis_seed = get_seed(j.at("basis_seed"), "basis_seed");
  } else if (type == "toy_image") {
    reject_unknown(j, {"type", "channels", "height", "width", "latent_dim", "stddevs", "basis_seed"}, "oracle");
    o.shape.channels = get(j, "channels", o.shape.channels);
    o.shape.height = get(j, "height", o.shape.height);
    o.shape.width = get(j, "width", o.shape.width);
    o.latent_dim = get(j, "latent_dim", o.latent_dim);
    o.stddevs = get(j, "stddevs", o.stddevs);
    if (j.contains("basis_seed")) o.basis_seed = get_seed(j.at("basis_seed"), "basis_seed");
  } else {
    throw ConfigError("unknown oracle type '" + type + "'");
  }
  return o;
}

Json oracle_json(const OracleSpec& o) {
  Json j{{"type", o.type}};
  if (o.type == "circle") {
    j["radius"] = o.radius;
    j["count"] = o.count;
  } else if (o.type == "points") {
    j["points"] = o.points;
    j["weights"] = o.weights;
  } else if (o.type == "single") {
    j["point"] = o.points.empty() ? std::vector<double>{} : o.points.front();
  } else if (o.type == "subspace") {
    j["dim"] = o.dim;
    j["latent_dim"] = o.latent_dim;
    j["stddevs"] = o.stddevs;
    j["basis_seed"] = o.basis_seed;
  } else if (o.type == "toy_image") {
    j["channels"] = o.shape.channels;
    j["height"] = o.shape.height;
    j["width"] = o.shape.width;
    j["latent_dim"] = o.latent_dim;
    j["stddevs"] = o.stddevs;
    j["basis_seed"] = o.basis_seed;
  }
  return j;
}

GridSpec parse_grid(const Json& j, GridSpec g) {
  reject_unknown(j, {"type", "t_min", "t_max", "rho", "steps", "full_steps", "stride", "offset", "direction"}, "grid");
  if (get<std::string>(j, "direction", "ascending") != "ascending")
    throw ConfigError("inversion grids must be ascending");
  g.type = get(j, "type", g.type);
  g.t_min = get(j, "t_min", g.t_min);
  g.t_max = get(j, "t_max", g.t_max);
  g.rho = get(j, "rho", g.rho);
  g.steps = get(j, "steps", g.steps);
  g.full_steps = get(j, "full_steps", g.full_steps);
  g.stride = get(j, "stride", g.stride);
  g.offset = get(j, "offset", g.offset);
  return g;
}

Json grid_json(const GridSpec& g) {
  if (g.type == "ddim") return {{"type", g.type}, {"full_steps", g.full_steps}, {"stride", g.stride}, {"offset", g.offset}};
  return {{"type", g.type}, {"t_min", g.t_min}, {"t_max", g.t_max}, {"rho", g.rho}, {"steps", g.steps}};
}

GridSpec ddim_grid() {
  GridSpec g;
  g.type = "ddim";
  return g;
}

OracleSpec toy_image() {
  OracleSpec o;
  o.type = "toy_image";
  o.latent_dim = 8;
  return o;
}

OracleSpec subspace(int d, int n) {
  OracleSpec o;
  o.type = "subspace";
  o.dim = d;
  o.latent_dim = n;
  return o;
}

}  // namespace

ScoreOracle build_oracle(const OracleSpec& o) {
  try {
    if (o.type == "circle") return PointCloudScore::circle(o.radius, o.count);
    if (o.type == "points") {
      std::vector<Vector> pts;
      for (const auto& p : o.points) pts.push_back(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
      auto w = o.weights;
      if (w.empty()) w.assign(pts.size(), pts.empty() ? 0.0 : 1.0 / static_cast<double>(pts.size()));
      return PointCloudScore(std::move(pts), std::move(w));
    }
    if (o.type == "single") {
      if (o.points.size() != 1) throw ConfigError("single oracle needs one point");
      const auto& p = o.points.front();
      return PointCloudScore::single(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
    }
    if (o.type == "axis") return SubspaceGaussianScore::axis();
    if (o.type == "subspace")
      return SubspaceGaussianScore::random(o.dim, o.latent_dim, broadcast(o.stddevs, o.latent_dim), o.basis_seed);
    if (o.type == "toy_image")
      return SubspaceGaussianScore::smooth_image(o.shape, o.latent_dim, broadcast(o.stddevs, o.latent_dim),
                                                 o.basis_seed);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid oracle: ") + e.what());
  }
  throw ConfigError("unknown oracle type '" + o.type + "'");
}

TimeGrid build_grid(const GridSpec& g) {
  try {
    if (g.type == "karras") return karras_grid(g.t_min, g.t_max, g.rho, g.steps).without_zero();
    if (g.type == "ddim") return ddim_kappa_grid(g.full_steps, g.stride, g.offset);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
  throw ConfigError("grid type must be 'karras' or 'ddim'");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-singularity", "verify-projection", "invert",
                                              "sweep-tssi",         "interpolate",       "reconstruct"};
  return names;
}

ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  if (command == "verify-singularity") {
    c.integrator = Method::Heun;
    c.trials = 200;
  } else if (command == "verify-projection") {
    c.sigmas = {0.1, 0.01, 0.001};
    c.trials = 10000;
  } else if (command == "invert") {
    c.oracle = toy_image();
    c.schedule = NoiseSchedule::vp();
    c.grid = ddim_grid();
    c.sampler = SamplerKind::Ddim;
    c.t_ssi = 0.039;
    c.methods = {InversionMethod::Ssi, InversionMethod::BaselineDdim};
    c.trials = 300;
    c.perturbation = 1e-3;
    c.deltas = {0.05};
  } else if (command == "sweep-tssi") {
    c.oracle = toy_image();
    c.steps_ladder = {40, 100, 200};
    c.trials = 200;
    c.perturbation = 0.4;
  } else if (command == "interpolate") {
    c.oracle = toy_image();
    c.grid.steps = 100;
    c.methods = {InversionMethod::Ssi, InversionMethod::BaselineOde};
    c.lambdas = {0.1, 0.3, 0.5, 0.7, 0.9};
    c.data_seeds = {1, 2};
    c.trials = 1;
    c.perturbation = 1e-3;
  } else if (command == "reconstruct") {
    c.oracle = subspace(8, 2);
    c.trials = 1000;
    c.deltas = {0.05, 0.2};
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return c;
}

ExperimentConfig parse_config(const Json& doc, const std::string& command) {
  const Json& j = doc.contains("report_format") ? doc.at("config") : doc;
  ExperimentConfig c = default_config(command);
  reject_unknown(j,
                 {"command", "oracle", "schedule", "integrator", "grid", "sampler", "alpha", "t_ssi", "methods",
                  "trials", "seed", "perturbation", "output", "sigmas", "t_ssi_ladder", "steps_ladder", "lambdas",
                  "data_seeds", "deltas", "noise_seeds", "pilot_trials", "coverage_eps", "x0"},
                 "config");
  if (j.contains("command") && j.at("command") != command)
    throw ConfigError("config is for command '" + j.at("command").get<std::string>() + "', not '" + command + "'");
  if (j.contains("oracle")) c.oracle = parse_oracle(j.at("oracle"), c.oracle);
  if (j.contains("schedule")) {
    const Json& s = j.at("schedule");
    reject_unknown(s, {"family", "beta0", "beta1"}, "schedule");
    const std::string fam = get<std::string>(s, "family", c.schedule.is_vp() ? "vp" : "ve");
    if (fam == "ve") {
      c.schedule = NoiseSchedule::ve();
    } else if (fam == "vp") {
      c.schedule = NoiseSchedule::vp(get(s, "beta0", 0.1), get(s, "beta1", 19.9));
    } else {
      throw ConfigError("schedule family must be 've' or 'vp'");
    }
  }
  if (j.contains("integrator")) c.integrator = parse_method(get<std::string>(j, "integrator", ""));
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"), c.grid);
  if (j.contains("sampler")) {
    const auto s = get<std::string>(j, "sampler", "");
    if (s != "ode" && s != "ddim") throw ConfigError("sampler must be 'ode' or 'ddim'");
    c.sampler = s == "ode" ? SamplerKind::Ode : SamplerKind::Ddim;
  }
  if (j.contains("alpha")) {
    const auto s = get<std::string>(j, "alpha", "");
    if (s != "continuous" && s != "discrete") throw ConfigError("alpha must be 'continuous' or 'discrete'");
    c.alpha = s == "continuous" ? AlphaMode::Continuous : AlphaMode::Discrete;
  }
  c.t_ssi = get(j, "t_ssi", c.t_ssi);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "methods", {})) c.methods.push_back(parse_inversion(m));
  }
  if (j.contains("trials")) {
    const long long t = get<long long>(j, "trials", 0);
    if (t < 0) throw ConfigError("trials must be >= 1");
    c.trials = static_cast<std::size_t>(t);
  }
  if (j.contains("seed")) c.seed = get_seed(j.at("seed"), "seed");
  c.perturbation = get(j, "perturbation", c.perturbation);
  if (j.contains("output")) {
    const Json& o = j.at("output");
    reject_unknown(o, {"dir", "verbosity", "unscaled"}, "output");
    c.out_dir = get(o, "dir", c.out_dir);
    c.verbosity = get(o, "verbosity", c.verbosity);
    c.unscaled_output = get(o, "unscaled", c.unscaled_output);
  }
  c.sigmas = get(j, "sigmas", c.sigmas);
  c.t_ssi_ladder = get(j, "t_ssi_ladder", c.t_ssi_ladder);
  c.steps_ladder = get(j, "steps_ladder", c.steps_ladder);
  c.lambdas = get(j, "lambdas", c.lambdas);
  if (j.contains("data_seeds")) {
    c.data_seeds.clear();
    if (!j.at("data_seeds").is_array()) throw ConfigError("data_seeds must be an array");
    for (const auto& s : j.at("data_seeds")) c.data_seeds.push_back(get_seed(s, "data_seeds"));
  }
  c.deltas = get(j, "deltas", c.deltas);
  c.noise_seeds = get(j, "noise_seeds", c.noise_seeds);
  c.pilot_trials = get(j, "pilot_trials", c.pilot_trials);
  c.coverage_eps = get(j, "coverage_eps", c.coverage_eps);
  c.x0 = get(j, "x0", c.x0);
  return c;
}

void resolve(ExperimentConfig& c) {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.trials < 1) fail("trials must be >= 1");
  if (!c.seed) fail("a base seed is required (config 'seed' or --seed)");
  if (c.verbosity != "quiet" && c.verbosity != "summary" && c.verbosity != "full")
    fail("output.verbosity must be quiet, summary or full");
  if (!std::isfinite(c.perturbation) || c.perturbation < 0.0) fail("perturbation must be finite and >= 0");

  const ScoreOracle oracle = build_oracle(c.oracle);
  const TimeGrid grid = build_grid(c.grid);
  if (grid.back() > c.schedule.t_max()) fail("grid leaves the schedule domain (VP times lie in [0, 1])");
  if (c.grid.type == "ddim" && !c.schedule.is_vp()) fail("ddim grids need a VP schedule");
  if (c.sampler == SamplerKind::Ddim && !c.schedule.is_vp()) fail("the ddim sampler needs a VP schedule");
  if (c.alpha == AlphaMode::Discrete && c.grid.type != "ddim") fail("discrete alpha needs a ddim grid");
  if (!c.x0.empty() && static_cast<Eigen::Index>(c.x0.size()) != oracle.dim()) fail("x0 does not match the oracle dimension");

  const bool uses_ssi = std::find(c.methods.begin(), c.methods.end(), InversionMethod::Ssi) != c.methods.end();
  const bool inverts = c.command == "invert" || c.command == "interpolate" || c.command == "reconstruct";
  if (inverts) {
    if (c.methods.empty()) fail("methods must not be empty");
    for (auto m : c.methods)
      if (m == InversionMethod::BaselineDdim && !c.schedule.is_vp()) fail("baseline_ddim needs a VP schedule");
    if (uses_ssi) {
      if (!(c.t_ssi > 0.0) || !std::isfinite(c.t_ssi)) fail("t_ssi must be > 0 for SSI");
      if (!(c.t_ssi < grid.back())) fail("t_ssi must lie below the final grid time");
      try {
        (void)grid.starting_at(c.t_ssi);
      } catch (const InvalidArgument&) {
        fail("t_ssi must be a point of the ddim grid");
      }
    }
  }
  for (double d : c.deltas)
    if (!(d > 0.0 && d < 1.0)) fail("deltas must lie in (0, 1)");

  if (c.command == "verify-projection") {
    if (c.sigmas.empty()) fail("sigmas must not be empty");
    for (double s : c.sigmas)
      if (!(s > 0.0) || !std::isfinite(s)) fail("sigmas must be positive");
    if (c.trials < 100) fail("verify-projection needs trials >= 100");
    if (c.pilot_trials < 100) fail("pilot_trials must be >= 100");
    if (!(c.coverage_eps > 0.0 && c.coverage_eps < 1.0)) fail("coverage_eps must lie in (0, 1)");
  }
  if (c.command == "invert" && c.noise_seeds < 2) fail("noise_seeds must be >= 2");
  if (c.command == "sweep-tssi") {
    if (c.t_ssi_ladder.empty())
      c.t_ssi_ladder = {0.0, 0.01, 0.1, 0.2, 0.5, 1.0, 2.0, oracle.data_diameter()};
    if (c.steps_ladder.empty()) fail("steps_ladder must not be empty");
    for (int s : c.steps_ladder)
      if (s < 2) fail("steps_ladder entries must be >= 2");
    if (c.grid.type != "karras") fail("sweep-tssi uses karras grids");
    for (double t : c.t_ssi_ladder)
      if (!(t >= 0.0) || !(t < c.grid.t_max)) fail("t_ssi_ladder entries must lie in [0, t_max)");
  }
  if (c.command == "interpolate") {
    if (c.lambdas.empty()) fail("lambdas must not be empty");
    for (double l : c.lambdas)
      if (!(l >= 0.0 && l <= 1.0)) fail("lambdas must lie in [0, 1]");
    if (c.data_seeds.size() != 2) fail("interpolate needs exactly two data_seeds");
  }
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["command"] = c.command;
  j["oracle"] = oracle_json(c.oracle);
  j["schedule"] = c.schedule.is_vp() ? Json{{"family", "vp"}, {"beta0", c.schedule.beta0}, {"beta1", c.schedule.beta1}}
                                      : Json{{"family", "ve"}};
  j["integrator"] = to_string(c.integrator);
  j["grid"] = grid_json(c.grid);
  j["sampler"] = c.sampler == SamplerKind::Ode ? "ode" : "ddim";
  j["alpha"] = to_string(c.alpha);
  j["t_ssi"] = c.t_ssi;
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["trials"] = c.trials;
  if (c.seed) j["seed"] = *c.seed;
  j["perturbation"] = c.perturbation;
  j["output"] = {{"dir", c.out_dir}, {"verbosity", c.verbosity}, {"unscaled", c.unscaled_output}};
  j["sigmas"] = c.sigmas;
  j["t_ssi_ladder"] = c.t_ssi_ladder;
  j["steps_ladder"] = c.steps_ladder;
  j["lambdas"] = c.lambdas;
  j["data_seeds"] = c.data_seeds;
  j["deltas"] = c.deltas;
  j["noise_seeds"] = c.noise_seeds;
  j["pilot_trials"] = c.pilot_trials;
  j["coverage_eps"] = c.coverage_eps;
  j["x0"] = c.x0;
  return j;
}

std::string config_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ssi
