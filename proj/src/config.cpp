#include "wkam/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wkam/action.hpp"
#include "wkam/errors.hpp"
#include "wkam/fdoracle.hpp"
#include "wkam/io.hpp"

namespace wkam {

using nlohmann::json;

namespace {

/// A JSON object under a dotted prefix. Reads record the key; `finish`
/// rejects anything left over.
class Section {
 public:
  Section(const json& root, std::string prefix) : prefix_(std::move(prefix)) {
    if (root.is_null()) {
      node_ = json::object();
    } else if (!root.is_object()) {
      throw ConfigError(prefix_, "expected an object");
    } else {
      node_ = root;
    }
  }

  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }
  bool has(const std::string& k) const { return node_.contains(k); }

  const json& raw(const std::string& k) {
    used_.insert(k);
    return node_.at(k);
  }

  double number(const std::string& k, double def) {
    used_.insert(k);
    if (!node_.contains(k)) return def;
    const auto& v = node_.at(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }

  long long integer(const std::string& k, long long def) {
    used_.insert(k);
    if (!node_.contains(k)) return def;
    const auto& v = node_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& k, const std::string& def) {
    used_.insert(k);
    if (!node_.contains(k)) return def;
    const auto& v = node_.at(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& k, bool def) {
    used_.insert(k);
    if (!node_.contains(k)) return def;
    const auto& v = node_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> def) {
    used_.insert(k);
    if (!node_.contains(k)) return def;
    const auto& v = node_.at(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key(k), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::vector<double>> rows(const std::string& k, std::size_t width) {
    used_.insert(k);
    std::vector<std::vector<double>> out;
    if (!node_.contains(k)) return out;
    const auto& v = node_.at(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array of rows");
    for (const auto& r : v) {
      if (!r.is_array() || r.size() != width) {
        throw ConfigError(key(k), "each row needs " + std::to_string(width) + " numbers");
      }
      std::vector<double> row;
      for (const auto& e : r) {
        if (!e.is_number()) throw ConfigError(key(k), "rows hold numbers only");
        row.push_back(e.get<double>());
      }
      out.push_back(row);
    }
    return out;
  }

  Section child(const std::string& k) {
    used_.insert(k);
    return Section(node_.contains(k) ? node_.at(k) : json(), key(k));
  }

  void finish() const {
    for (const auto& [k, v] : node_.items()) {
      if (!used_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

 private:
  json node_;
  std::string prefix_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, msg);
}

bool multiple_of(double t, double dt) {
  const double r = t / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

void require_multiple(double t, double dt, const std::string& key) {
  require(t >= 0.0, key, "must be non-negative");
  require(multiple_of(t, dt), key, "must be a multiple of grid.dt");
}

int as_int(double v, const std::string& key) {
  require(v == std::floor(v) && std::abs(v) < 1e6, key, "frequencies must be integers");
  return int(v);
}

InitialSpec parse_initial(Section s, int dim) {
  InitialSpec spec;
  spec.poly.constant = s.number("constant", 0.0);
  for (const auto& r : s.rows("terms", 4)) {
    TrigPolynomial::Term t;
    t.k = {as_int(r[0], s.key("terms")), as_int(r[1], s.key("terms"))};
    require(dim == 2 || t.k[1] == 0, s.key("terms"), "k2 must be 0 in one dimension");
    t.cos_amp = r[2];
    t.sin_amp = r[3];
    spec.poly.terms.push_back(t);
  }
  if (s.has("csv")) spec.csv = s.string("csv", "");
  s.finish();
  return spec;
}

json initial_json(const InitialSpec& spec) {
  json j;
  j["constant"] = spec.poly.constant;
  j["terms"] = json::array();
  for (const auto& t : spec.poly.terms) j["terms"].push_back({t.k[0], t.k[1], t.cos_amp, t.sin_amp});
  if (spec.csv) j["csv"] = spec.csv->string();
  return j;
}

}  // namespace

RunConfig parse_config(const json& root) {
  RunConfig c;
  Section top(root, "");

  // model
  Section m = top.child("model");
  const std::string family_name = m.string("family", "quadratic-mechanical");
  Family family;
  try {
    family = family_from_string(family_name);
  } catch (const ConfigError&) {
    throw ConfigError("model.family", "unknown family '" + family_name + "'");
  }
  const long long dim = m.integer("dim", 1);
  require(dim == 1 || dim == 2, "model.dim", "must be 1 or 2");
  std::vector<CosineMode> modes;
  for (const auto& r : m.rows("potential", 3)) {
    CosineMode mode;
    mode.k = {as_int(r[0], "model.potential"), as_int(r[1], "model.potential")};
    require(dim == 2 || mode.k[1] == 0, "model.potential", "k2 must be 0 in one dimension");
    mode.amplitude = r[2];
    modes.push_back(mode);
  }
  const TrigPotential potential(modes);
  const double lambda = m.number("lambda", 0.0);
  require(lambda >= 0.0, "model.lambda", "must be non-negative");
  switch (family) {
    case Family::QuadraticMechanical:
      require(lambda == 0.0, "model.lambda", "the mechanical family has no u-coupling");
      c.model = HamiltonianModel::mechanical(int(dim), potential);
      break;
    case Family::QuadraticDiscounted:
      c.model = HamiltonianModel::discounted(int(dim), lambda, potential);
      break;
    case Family::QuadraticNonlinearU: {
      std::vector<double> knots, values;
      for (const auto& r : m.rows("f", 2)) {
        knots.push_back(r[0]);
        values.push_back(r[1]);
      }
      require(!knots.empty(), "model.f", "the nonlinear-u family needs an f table");
      try {
        c.model = HamiltonianModel::nonlinear_u(int(dim), PiecewiseLinear(knots, values), potential);
      } catch (const Error& e) {
        throw ConfigError("model.f", e.what());
      }
      break;
    }
  }
  if (family != Family::QuadraticNonlinearU) m.rows("f", 2);
  if (m.has("shift") && m.raw("shift").is_string()) {
    require(m.string("shift", "") == "auto", "model.shift", "expected a number or \"auto\"");
    c.auto_shift = true;
  } else {
    c.model.shift = m.number("shift", 0.0);
  }
  c.level = m.number("level", 0.0);
  m.finish();
  try {
    c.model.validate();
  } catch (const Error& e) {
    throw ConfigError("model", e.what());
  }

  // grid
  Section g = top.child("grid");
  require(g.integer("dim", dim) == dim, "grid.dim", "must match model.dim");
  const long long n = g.integer("N", 64);
  require(n >= 4 && n <= 1 << 16, "grid.N", "must lie in [4, 65536]");
  if (dim == 2) require(n <= 1024, "grid.N", "must not exceed 1024 in two dimensions");
  c.grid = Grid(int(dim), int(n));
  auto& disc = c.solver.disc;
  disc.dt = g.number("dt", 1.0 / 16.0);
  require(disc.dt > 0.0, "grid.dt", "must be positive");
  disc.v_max = g.number("v_max", 6.0);
  require(disc.v_max > 0.0, "grid.v_max", "must be positive");
  try {
    disc.quadrature = quadrature_from_string(g.string("quadrature", "corrected"));
  } catch (const ConfigError& e) {
    throw ConfigError("grid.quadrature", "expected 'left', 'midpoint' or 'corrected'");
  }
  g.finish();
  try {
    DisplacementStencil(c.grid, disc.dt, disc.v_max);
  } catch (const ConfigError& e) {
    throw ConfigError("grid.v_max", "stencil empty: v_max*dt is smaller than one grid cell");
  }
  require(disc.dt * c.model.lipschitz_u() <= 1.0, "grid.dt", "dt * lambda_L must not exceed 1");

  // solver
  Section s = top.child("solver");
  c.solver.tol = s.number("tol", 1e-10);
  require(c.solver.tol > 0.0, "solver.tol", "must be positive");
  const long long max_iter = s.integer("max_iter", 100);
  require(max_iter >= 1 && max_iter <= 100000, "solver.max_iter", "must lie in [1, 100000]");
  c.solver.max_iter = int(max_iter);
  c.solver.block_length = s.number("block", 0.0);
  require(c.solver.block_length >= 0.0, "solver.block", "must be non-negative");
  c.T = s.number("T", 1.0);
  require_multiple(c.T, disc.dt, "solver.T");
  c.t_final = s.number("t_final", 50.0);
  require(c.t_final > 0.0, "solver.t_final", "must be positive");
  require_multiple(c.t_final, disc.dt, "solver.t_final");
  c.stop_eps = s.number("stop_eps", 1e-6);
  require(c.stop_eps > 0.0, "solver.stop_eps", "must be positive");
  c.checkpoints = s.numbers("checkpoints", {});
  for (double t : c.checkpoints) require_multiple(t, disc.dt, "solver.checkpoints");
  s.finish();

  c.initial = parse_initial(top.child("initial"), int(dim));
  c.compare = parse_initial(top.child("compare"), int(dim));

  // oracle
  Section o = top.child("oracle");
  c.alpha = o.number("alpha", 0.0);
  c.dt_fd = o.number("dt_fd", 0.0);
  c.p_bound = o.number("p_bound", disc.v_max);
  require(c.alpha >= 0.0, "oracle.alpha", "must be non-negative (0 selects automatic)");
  require(c.dt_fd >= 0.0, "oracle.dt_fd", "must be non-negative (0 selects automatic)");
  require(c.p_bound > 0.0, "oracle.p_bound", "must be positive");
  o.finish();

  // critical value
  Section cr = top.child("critical");
  c.T_max = cr.number("T_max", 16.0);
  c.T_start = cr.number("T_start", 1.0);
  c.critical_tol = cr.number("tol", 1e-3);
  require(c.T_max >= 4.0, "critical.T_max", "must be at least 4");
  require(c.T_start > 0.0 && c.T_start <= c.T_max, "critical.T_start", "must lie in (0, T_max]");
  require_multiple(c.T_start, disc.dt, "critical.T_start");
  require(c.critical_tol > 0.0, "critical.tol", "must be positive");
  cr.finish();

  Section a = top.child("action");
  c.action_T = a.number("T", 1.0);
  require(c.action_T >= disc.dt, "action.T", "must be at least grid.dt");
  require_multiple(c.action_T, disc.dt, "action.T");
  a.finish();

  // characteristics
  Section ch = top.child("characteristic");
  const auto x0 = ch.numbers("x", {0.0, 0.0});
  const auto p0 = ch.numbers("p", {0.0, 0.0});
  require(x0.size() == std::size_t(dim) || x0.size() == 2, "characteristic.x", "needs dim entries");
  require(p0.size() == std::size_t(dim) || p0.size() == 2, "characteristic.p", "needs dim entries");
  c.char_start.x = TorusPoint::wrapped({x0[0], dim == 2 ? x0[1] : 0.0}, int(dim));
  c.char_start.p = {p0[0], dim == 2 ? p0[1] : 0.0};
  c.char_start.u = ch.number("u", 0.0);
  c.char_T = ch.number("T", 1.0);
  require(c.char_T > 0.0, "characteristic.T", "must be positive");
  c.dt_ode = ch.number("dt_ode", 1e-3);
  require(c.dt_ode > 0.0 && c.dt_ode <= c.char_T, "characteristic.dt_ode", "must lie in (0, T]");
  c.x_end = ch.number("x_end", 0.5);
  const long long window = ch.integer("window", 0);
  require(window >= 0, "characteristic.window", "must be non-negative");
  c.match.window = std::size_t(window);
  const std::string mom = ch.string("momentum", "chain-velocity");
  if (mom == "chain-velocity") {
    c.match.momentum = MomentumSource::ChainVelocity;
  } else if (mom == "field-gradient") {
    c.match.momentum = MomentumSource::FieldGradient;
  } else {
    throw ConfigError("characteristic.momentum", "expected 'chain-velocity' or 'field-gradient'");
  }
  c.match.dt_ode_max = c.dt_ode;
  ch.finish();

  // check battery
  Section k = top.child("check");
  c.n_samples = std::size_t(k.integer("n_samples", 2000));
  require(c.n_samples >= 1, "check.n_samples", "must be at least 1");
  const auto box = k.numbers("box", {-1.0, 1.0, -2.0, 2.0});
  require(box.size() == 4, "check.box", "expected [u_min, u_max, p_min, p_max]");
  c.box = SampleBox{box[0], box[1], box[2], box[3]};
  require(c.box.u_min <= c.box.u_max && c.box.p_min <= c.box.p_max, "check.box", "empty sample box");
  c.n_trajectories = std::size_t(k.integer("n_trajectories", 100));
  c.n_curves = std::size_t(k.integer("n_curves", 50));
  c.delta = k.number("delta", 0.25);
  require(c.delta >= 0.0, "check.delta", "must be non-negative");
  c.t_list = k.numbers("t_list", {0.5, 1.0, 2.0, 4.0});
  require(!c.t_list.empty(), "check.t_list", "must not be empty");
  for (double t : c.t_list) require_multiple(t, disc.dt, "check.t_list");
  k.finish();

  Section out = top.child("output");
  c.write_spacetime = out.boolean("spacetime", true);
  const long long every = out.integer("every", 1);
  require(every >= 1, "output.every", "must be at least 1");
  c.spacetime_every = std::size_t(every);
  out.finish();

  const long long seed = top.integer("seed", 1);
  require(seed >= 0, "seed", "must be non-negative");
  c.seed = std::uint64_t(seed);
  top.finish();

  if (c.alpha > 0.0 || c.dt_fd > 0.0) resolve_oracle(c, c.T);

  // resolved form for the manifest
  json r;
  r["model"] = {{"family", std::string(to_string(c.model.family))},
                {"dim", dim},
                {"lambda", c.model.lambda},
                {"level", c.level}};
  r["model"]["potential"] = json::array();
  for (const auto& md : c.model.potential.modes()) {
    r["model"]["potential"].push_back({md.k[0], md.k[1], md.amplitude});
  }
  if (family == Family::QuadraticNonlinearU) {
    r["model"]["f"] = json::array();
    for (const auto& row : root.at("model").at("f")) r["model"]["f"].push_back(row);
  }
  if (c.auto_shift) {
    r["model"]["shift"] = "auto";
  } else {
    r["model"]["shift"] = c.model.shift;
  }
  r["grid"] = {{"dim", dim},
               {"N", n},
               {"dt", disc.dt},
               {"v_max", disc.v_max},
               {"quadrature", std::string(to_string(disc.quadrature))}};
  r["solver"] = {{"tol", c.solver.tol},       {"max_iter", c.solver.max_iter},
                 {"block", c.solver.block_length}, {"T", c.T},
                 {"t_final", c.t_final},      {"stop_eps", c.stop_eps},
                 {"checkpoints", c.checkpoints}};
  r["initial"] = initial_json(c.initial);
  r["compare"] = initial_json(c.compare);
  r["oracle"] = {{"alpha", c.alpha}, {"dt_fd", c.dt_fd}, {"p_bound", c.p_bound}};
  r["critical"] = {{"T_max", c.T_max}, {"T_start", c.T_start}, {"tol", c.critical_tol}};
  r["action"] = {{"T", c.action_T}};
  r["characteristic"] = {{"x", x0},           {"u", c.char_start.u},
                         {"p", p0},           {"T", c.char_T},
                         {"dt_ode", c.dt_ode}, {"x_end", c.x_end},
                         {"window", window},  {"momentum", mom}};
  r["check"] = {{"n_samples", c.n_samples}, {"box", box},
                {"n_trajectories", c.n_trajectories}, {"n_curves", c.n_curves},
                {"delta", c.delta}, {"t_list", c.t_list}};
  r["output"] = {{"spacetime", c.write_spacetime}, {"every", c.spacetime_every}};
  r["seed"] = c.seed;
  c.resolved = r;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  auto cfg = parse_config(j);
  // relative CSV paths are taken relative to the config file
  for (auto* spec : {&cfg.initial, &cfg.compare}) {
    if (spec->csv && spec->csv->is_relative()) *spec->csv = path.parent_path() / *spec->csv;
  }
  return cfg;
}

GridField make_initial(const InitialSpec& spec, const Grid& grid) {
  if (spec.csv) return read_field(*spec.csv, grid);
  return spec.poly.sample(grid);
}

double audited_max_hp(const RunConfig& cfg) {
  SampleBox box = cfg.box;
  box.p_min = -cfg.p_bound;
  box.p_max = cfg.p_bound;
  return audit_assumptions(cfg.model, box, 64).max_abs_gradient;
}

OracleSettings resolve_oracle(const RunConfig& cfg, double horizon) {
  OracleSettings s;
  s.max_hp = audited_max_hp(cfg);
  s.alpha = cfg.alpha > 0.0 ? cfg.alpha : lf_alpha_for(s.max_hp);
  const double h = horizon > 0.0 ? horizon : cfg.solver.disc.dt;
  s.dt_fd = cfg.dt_fd > 0.0 ? cfg.dt_fd : lf_dt_for(cfg.model, cfg.grid, s.alpha, h);
  LFConfig lf{s.alpha, s.dt_fd, cfg.grid};
  lf.validate(cfg.model, s.max_hp);
  if (cfg.dt_fd > 0.0) require_multiple(horizon, s.dt_fd, "oracle.dt_fd");
  return s;
}

}  // namespace wkam
