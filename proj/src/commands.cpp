#include "wkam/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include "json.hpp"
#include "wkam/action.hpp"
#include "wkam/characteristics.hpp"
#include "wkam/config.hpp"
#include "wkam/errors.hpp"
#include "wkam/fdoracle.hpp"
#include "wkam/io.hpp"
#include "wkam/legendre.hpp"
#include "wkam/parallel.hpp"
#include "wkam/semigroup.hpp"

namespace wkam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Mutable state shared by a command run.
struct Run {
  RunConfig cfg;
  fs::path out;
  std::ostream& log;
  json extra = json::object();
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
};

/// name,value,threshold,pass rows for one check suite.
class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  void upper(const std::string& row, double value, double threshold) {
    rows_.push_back({row, value, threshold, value <= threshold});
  }
  void lower(const std::string& row, double value, double threshold) {
    rows_.push_back({row, value, threshold, value >= threshold});
  }
  void flag(const std::string& row, bool ok) { rows_.push_back({row, ok ? 1.0 : 0.0, 1.0, ok}); }
  void info(const std::string& row, double value) { rows_.push_back({row, value, 0.0, true}); }

  bool pass() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const Row& r) { return r.pass; });
  }
  const std::string& name() const { return name_; }

  void write(Run& run) const {
    CsvWriter w(run.file("check_" + name_ + ".csv"), {"name", "value", "threshold", "pass"});
    for (const auto& r : rows_) w << r.name << r.value << r.threshold << (r.pass ? 1 : 0);
  }

 private:
  struct Row {
    std::string name;
    double value;
    double threshold;
    bool pass;
  };
  std::string name_;
  std::vector<Row> rows_;
};

std::string tag(double t) { return format_number(t); }

void write_summary(Run& run, const std::string& name, const std::vector<std::pair<std::string, double>>& rows) {
  CsvWriter w(run.file(name), {"name", "value"});
  for (const auto& [k, v] : rows) w << k << v;
}

// solve

int cmd_solve(Run& run) {
  const auto& c = run.cfg;
  const GridField phi = make_initial(c.initial, c.grid);
  FixedPointResult res;
  try {
    res = fixed_point(c.model, phi, c.T, c.solver);
  } catch (const FixedPointError& e) {
    write_fixed_point(run.file("fixed_point.csv"), e.report());
    throw;
  }
  write_fixed_point(run.file("fixed_point.csv"), res.report);
  if (c.write_spacetime) write_spacetime(run.file("spacetime.csv"), res.field, c.spacetime_every);
  write_field(run.file("u_T.csv"), res.field.slice_field(res.field.n_steps()));
  for (double t : c.checkpoints) {
    if (t > c.T + 1e-12) throw ConfigError("solver.checkpoints", "checkpoint beyond solver.T");
    const std::size_t k = step_count(t, c.solver.disc.dt);
    write_field(run.file("u_t" + tag(t) + ".csv"), res.field.slice_field(k));
  }
  run.extra["iterations"] = res.report.iterations;
  run.extra["residual"] = res.report.residual();
  run.extra["bound_respected"] = res.report.bound_respected();
  run.log << "fixed point after " << res.report.iterations << " iterations, residual "
          << res.report.residual() << "\n";
  return kExitOk;
}

// converge

ConvergenceReport converge_run(const RunConfig& c, const GridField& phi) {
  return converge(c.model, phi, c.solver, c.t_final, c.stop_eps);
}

int cmd_converge(Run& run) {
  const auto& c = run.cfg;
  const GridField phi = make_initial(c.initial, c.grid);
  const ConvergenceReport r = converge_run(c, phi);
  write_convergence(run.file("convergence.csv"), r);
  write_field(run.file("u_inf.csv"), r.u_inf);

  const auto& s = r.residual;
  write_summary(run, "residual.csv",
                {{"points", double(s.points)},
                 {"smooth_points", double(s.smooth_points)},
                 {"kink_count", double(s.kink_count)},
                 {"kink_threshold", s.kink_threshold},
                 {"max_abs", s.max_abs},
                 {"mean_abs", s.mean_abs},
                 {"rms", s.rms},
                 {"max_abs_backward", s.max_abs_backward},
                 {"max_abs_forward", s.max_abs_forward},
                 {"drift_rate", r.drift_rate},
                 {"converged", r.converged ? 1.0 : 0.0},
                 {"monotone_tail", r.monotone_tail ? 1.0 : 0.0}});

  const double v_max = c.solver.disc.v_max;
  const auto lt = check_Ltilde(c.model, r.u_inf, v_max, v_max / 128.0);
  {
    std::vector<std::string> head{"j", "smooth", "min_value", "argmin_v1", "expected_v1"};
    if (c.grid.dim() == 2) head = {"j", "smooth", "min_value", "argmin_v1", "argmin_v2", "expected_v1", "expected_v2"};
    CsvWriter w(run.file("ltilde.csv"), head);
    for (const auto& p : lt.points) {
      w << p.index << (p.smooth ? 1 : 0) << p.min_value << p.argmin_v[0];
      if (c.grid.dim() == 2) w << p.argmin_v[1];
      w << p.expected_v[0];
      if (c.grid.dim() == 2) w << p.expected_v[1];
    }
  }

  if (c.compare.csv || !c.compare.poly.terms.empty() || c.compare.poly.constant != 0.0) {
    const ConvergenceReport r2 = converge_run(c, make_initial(c.compare, c.grid));
    write_field(run.file("u_inf_compare.csv"), r2.u_inf);
    const double dist = sup_distance(r.u_inf.values(), r2.u_inf.values());
    run.extra["compare_distance"] = dist;
    run.extra["compare_converged"] = r2.converged;
  }

  run.extra["converged"] = r.converged;
  run.extra["drift_rate"] = r.drift_rate;
  run.extra["ltilde_min"] = lt.min_over_smooth;
  run.log << (r.converged ? "converged" : "not converged") << " at t = "
          << (r.times.empty() ? 0.0 : r.times.back()) << ", residual max " << s.max_abs << "\n";
  return r.converged ? kExitOk : kExitNoConvergence;
}

// critical

int cmd_critical(Run& run) {
  const auto& c = run.cfg;
  const auto r = critical_value(c.model, c.level, c.grid, c.solver.disc, c.T_max, c.critical_tol,
                                c.T_start);
  write_critical(run.file("critical.csv"), r);
  write_summary(run, "critical_summary.csv",
                {{"level", r.level}, {"c", r.c}, {"cauchy", r.cauchy ? 1.0 : 0.0}});
  run.extra["c"] = r.c;
  run.extra["cauchy"] = r.cauchy;
  if (!r.warning.empty()) run.extra["warning"] = r.warning;
  run.log << "critical value " << r.c << (r.cauchy ? "" : " (not Cauchy)") << "\n";
  return r.cauchy ? kExitOk : kExitNoConvergence;
}

// action

int cmd_action(Run& run) {
  const auto& c = run.cfg;
  const auto table = min_action(c.model, c.level, c.action_T, c.grid, c.solver.disc);
  write_action(run.file("action.csv"), table);
  run.extra["slack"] = discretization_slack(c.model, c.grid, c.solver.disc);
  run.log << "minimal action table at t = " << c.action_T << "\n";
  return kExitOk;
}

// char

MatchReport match_run(const RunConfig& c, const FixedPointResult& res, std::size_t x_end,
                      CalibratedCurve* curve_out = nullptr) {
  const auto curve = extract_calibrated_curve(c.model, res.field, x_end, c.solver);
  if (curve_out) *curve_out = curve;
  return match_calibrated(c.model, curve, res.field, c.match);
}

int cmd_char(Run& run) {
  const auto& c = run.cfg;
  const Trajectory tr = flow(c.model, c.char_start, c.char_T, c.dt_ode);
  write_trajectory(run.file("trajectory.csv"), tr, c.grid.dim());
  const auto law = dH_law_residual(c.model, tr);
  const bool sign = sign_consistent(tr);

  const GridField phi = make_initial(c.initial, c.grid);
  const auto res = fixed_point(c.model, phi, c.T, c.solver);
  const std::size_t x_end = c.grid.nearest(TorusPoint::wrapped({c.x_end, c.x_end}, c.grid.dim()));
  CalibratedCurve curve;
  const auto m = match_run(c, res, x_end, &curve);
  write_trajectory(run.file("match_trajectory.csv"), m.trajectory, c.grid.dim());
  {
    std::vector<std::string> head{"k", "t", "j", "u", "step_cost"};
    CsvWriter w(run.file("chain.csv"), head);
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
      w << k << double(k) * curve.dt << curve.points[k] << curve.u_values[k]
        << (k < curve.step_costs.size() ? curve.step_costs[k] : 0.0);
    }
  }
  write_summary(run, "char_summary.csv",
                {{"law_max_abs", law.max_abs},
                 {"law_rms", law.rms},
                 {"strictly_decreasing", law.strictly_decreasing ? 1.0 : 0.0},
                 {"sign_consistent", sign ? 1.0 : 0.0},
                 {"launch_step", double(m.launch_step)},
                 {"match_sup_position", m.sup_position},
                 {"match_sup_u", m.sup_u},
                 {"calibration_defect", curve.max_calibration_defect()},
                 {"window_saturated", curve.window_saturated ? 1.0 : 0.0}});
  run.extra["law_rms"] = law.rms;
  run.extra["match_sup_position"] = m.sup_position;
  run.log << "law rms " << law.rms << ", chain/ODE distance " << m.sup_position << "\n";
  return kExitOk;
}

// oracle

struct OracleComparison {
  GridField variational;
  GridField lf;
  OracleSettings settings;
  double distance = 0.0;
};

OracleComparison oracle_run(const RunConfig& c) {
  OracleComparison o;
  const GridField phi = make_initial(c.initial, c.grid);
  o.settings = resolve_oracle(c, c.T);
  const LFConfig lf{o.settings.alpha, o.settings.dt_fd, c.grid};
  const auto slab = lf_solve(c.model, phi, c.T, lf, o.settings.max_hp, step_count(c.T, o.settings.dt_fd));
  o.lf = slab.slice_field(slab.n_steps());
  o.variational = step_T(c.model, phi, c.T, c.solver);
  o.distance = sup_distance(o.lf.values(), o.variational.values());
  return o;
}

int cmd_oracle(Run& run) {
  const auto& c = run.cfg;
  const auto o = oracle_run(c);
  write_field(run.file("u_lf.csv"), o.lf);
  write_field(run.file("u_variational.csv"), o.variational);
  write_summary(run, "oracle_summary.csv",
                {{"alpha", o.settings.alpha},
                 {"dt_fd", o.settings.dt_fd},
                 {"max_hp", o.settings.max_hp},
                 {"sup_distance", o.distance}});
  run.extra["oracle"] = {{"alpha", o.settings.alpha}, {"dt_fd", o.settings.dt_fd}, {"sup_distance", o.distance}};
  run.log << "variational vs Lax-Friedrichs at t = " << c.T << ": " << o.distance << "\n";
  return kExitOk;
}

// check

Suite suite_assumptions(const RunConfig& c) {
  Suite s("assumptions");
  const auto h = audit_assumptions(c.model, c.box, c.n_samples);
  for (const auto& v : h.verdicts) {
    if (v.sampled) {
      s.upper(v.name, v.worst_violation, kAuditTolerance);
    } else {
      s.info(v.name + "_unsampled", 0.0);
    }
  }
  const auto l = check_L_properties(c.model, c.box, c.n_samples);
  for (const auto& v : l.verdicts) {
    if (v.sampled) {
      s.upper(v.name, v.worst_violation, kAuditTolerance);
    } else {
      s.info(v.name + "_unsampled", 0.0);
    }
  }
  return s;
}

Suite suite_properties(const RunConfig& c) {
  Suite s("properties");
  const GridField phi = make_initial(c.initial, c.grid);
  const GridField psi = make_initial(c.compare, c.grid);
  const auto r = check_properties(c.model, phi, psi, c.t_list, c.solver, c.delta);
  for (const auto& row : r.rows) {
    s.upper("monotonicity_t" + tag(row.t), row.monotonicity_violation, 2.0 * r.tol);
    s.upper("nonexpansive_t" + tag(row.t), row.output_distance - row.input_distance, 2.0 * r.tol);
  }
  s.info("uniform_bound", r.uniform_bound);
  s.info("equi_lipschitz", r.equi_lipschitz);
  return s;
}

Suite suite_characteristics(const RunConfig& c) {
  Suite s("characteristics");
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ud(c.box.u_min, c.box.u_max);
  std::uniform_real_distribution<double> pd(c.box.p_min, c.box.p_max);
  double worst_rms = 0.0;
  std::size_t sign_failures = 0;
  for (std::size_t i = 0; i < c.n_trajectories; ++i) {
    CharacteristicState s0;
    const double x0 = unit(rng), x1 = unit(rng);
    s0.x = TorusPoint::wrapped({x0, x1}, c.grid.dim());
    s0.u = ud(rng);
    const double p0 = pd(rng), p1 = pd(rng);
    s0.p = {p0, c.grid.dim() == 2 ? p1 : 0.0};
    const auto tr = flow(c.model, s0, c.char_T, c.dt_ode);
    worst_rms = std::max(worst_rms, dH_law_residual(c.model, tr).rms);
    if (!sign_consistent(tr)) ++sign_failures;
  }
  s.upper("law_rms", worst_rms, 1e-6);
  s.upper("sign_failures", double(sign_failures), 0.0);

  const GridField phi = make_initial(c.initial, c.grid);
  const auto res = fixed_point(c.model, phi, c.T, c.solver);
  const std::size_t x_end = c.grid.nearest(TorusPoint::wrapped({c.x_end, c.x_end}, c.grid.dim()));
  const auto m = match_run(c, res, x_end);
  s.upper("match_sup_position", m.sup_position, 5.0 * c.grid.spacing());
  return s;
}

Suite suite_oracle(const RunConfig& c) {
  Suite s("oracle");
  const auto o = oracle_run(c);
  s.upper("sup_distance", o.distance, 0.05);
  return s;
}

int cmd_check(Run& run) {
  const auto& c = run.cfg;
  std::vector<Suite> suites;
  suites.push_back(suite_assumptions(c));
  suites.push_back(suite_properties(c));
  suites.push_back(suite_characteristics(c));
  suites.push_back(suite_oracle(c));
  bool all = true;
  CsvWriter w(run.file("check_summary.csv"), {"suite", "pass"});
  for (const auto& s : suites) {
    s.write(run);
    w << s.name() << (s.pass() ? 1 : 0);
    run.extra["suites"][s.name()] = s.pass();
    run.log << s.name() << ": " << (s.pass() ? "pass" : "FAIL") << "\n";
    all = all && s.pass();
  }
  return all ? kExitOk : kExitSuiteFailure;
}

using Handler = std::function<int(Run&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"solve", cmd_solve},   {"converge", cmd_converge}, {"critical", cmd_critical},
      {"action", cmd_action}, {"char", cmd_char},         {"oracle", cmd_oracle},
      {"check", cmd_check},
  };
  return h;
}

/// Creates `out`, or reuses it when empty or when overwriting. Overwrite
/// removes the CSV files and manifest of an earlier run only.
void prepare_out(const fs::path& out, bool overwrite) {
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw ConfigError("out", out.string() + " is not a directory");
    if (fs::is_empty(out)) return;
    if (!overwrite) throw ConfigError("out", out.string() + " is not empty; pass --overwrite");
    for (const auto& e : fs::directory_iterator(out)) {
      const auto ext = e.path().extension();
      if (e.is_regular_file() && (ext == ".csv" || e.path().filename() == "manifest.json")) {
        fs::remove(e.path());
      }
    }
    return;
  }
  fs::create_directories(out);
}

void write_manifest(const Run& run, const std::string& command, int threads, int code,
                    double seconds) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["compiler"] = __VERSION__;
  m["cxx_standard"] = long(__cplusplus);
  m["threads"] = threads;
  m["exit_code"] = code;
  m["seconds"] = seconds;
  m["config"] = run.cfg.resolved;
  m["results"] = run.extra;
  m["outputs"] = run.files;
  std::ofstream(run.out / "manifest.json") << m.dump(2) << "\n";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : handlers()) n.push_back(k);
    return n;
  }();
  return names;
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) {
    err << "unknown command '" << name << "'\n";
    return kExitInvalid;
  }
  if (opts.threads < 1) {
    err << "threads: must be at least 1\n";
    return kExitInvalid;
  }
  RunConfig cfg;
  try {
    cfg = load_config(opts.config);
    if (opts.out.empty()) throw ConfigError("out", "an output directory is required");
    prepare_out(opts.out, opts.overwrite);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitInvalid;
  }

  set_num_threads(opts.threads);
  Run run{std::move(cfg), opts.out, log, json::object(), {}};
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (run.cfg.auto_shift) {
      const auto& c = run.cfg;
      const auto cr = critical_value(c.model, c.level, c.grid, c.solver.disc, c.T_max,
                                     c.critical_tol, c.T_start);
      run.extra["auto_shift_c"] = cr.c;
      run.cfg.model = normalize(run.cfg.model, cr.c);
    }
    code = it->second(run);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    code = kExitInvalid;
  } catch (const NumericError& e) {
    err << "no convergence: " << e.what() << "\n";
    code = kExitNoConvergence;
  } catch (const DomainError& e) {
    err << "no convergence: " << e.what() << "\n";
    code = kExitNoConvergence;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(run, name, opts.threads, code, seconds);
  return code;
}

}  // namespace wkam
