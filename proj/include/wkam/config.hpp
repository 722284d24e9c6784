#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkam/characteristics.hpp"
#include "wkam/fields.hpp"
#include "wkam/models.hpp"
#include "wkam/semigroup.hpp"

namespace wkam {

/// Initial datum: a trigonometric polynomial or a field CSV.
struct InitialSpec {
  TrigPolynomial poly;
  std::optional<std::filesystem::path> csv;
};

/// Everything a subcommand needs, with defaults filled in. `resolved` is
/// the same content as JSON and goes into the run manifest.
struct RunConfig {
  HamiltonianModel model;
  /// model.shift = "auto": normalize by the critical value at `level`.
  bool auto_shift = false;
  double level = 0.0;

  Grid grid{1, 64};
  SemigroupOptions solver;
  double T = 1.0;
  double t_final = 50.0;
  double stop_eps = 1e-6;
  std::vector<double> checkpoints;

  InitialSpec initial;
  InitialSpec compare;

  /// 0 selects the automatic choice.
  double alpha = 0.0;
  double dt_fd = 0.0;
  double p_bound = 0.0;

  double T_max = 16.0;
  double T_start = 1.0;
  double critical_tol = 1e-3;

  double action_T = 1.0;

  CharacteristicState char_start;
  double char_T = 1.0;
  double dt_ode = 1e-3;
  double x_end = 0.5;
  MatchOptions match;

  SampleBox box;
  std::size_t n_samples = 2000;
  std::size_t n_trajectories = 100;
  std::size_t n_curves = 50;
  double delta = 0.25;
  std::vector<double> t_list{0.5, 1.0, 2.0, 4.0};

  std::size_t spacetime_every = 1;
  bool write_spacetime = true;

  std::uint64_t seed = 1;

  nlohmann::json resolved;
};

/// Parses and validates; throws ConfigError naming the dotted key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

GridField make_initial(const InitialSpec& spec, const Grid& grid);

/// Audited max |H_p| on the configured box with p-range ±p_bound.
double audited_max_hp(const RunConfig& cfg);

/// Oracle settings after automatic choices, validated.
struct OracleSettings {
  double alpha = 0.0;
  double dt_fd = 0.0;
  double max_hp = 0.0;
};
OracleSettings resolve_oracle(const RunConfig& cfg, double horizon);

}  // namespace wkam
