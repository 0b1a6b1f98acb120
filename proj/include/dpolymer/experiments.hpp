#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/kernels.hpp"

namespace dpolymer {

/// Declarative inputs of a Monte Carlo campaign. Defaults are the desk-scale
/// d = 1 shape.
struct ExperimentConfig {
  std::string name;
  CovarianceKernel kernel = CovarianceKernel::gaussian(1.0, 1.0, 1);
  std::vector<double> betas{0.5};
  double dt = 0.01;
  int n_steps = 800;
  int n_paths = 256;
  int n_envs = 200;
  EnvMode env_mode = EnvMode::spectral;
  int k_features = 512;
  std::uint64_t seed = 20240601;
  std::vector<double> checkpoints{1.0, 2.0, 4.0, 8.0};
  int threads = 1;

  double slope_epsilon = 0.01;
  double p = 2.0;
  double alpha = 1.2;
  double s_max = 1e7;
  std::vector<double> c_grid{0.05, 0.1, 0.2, 0.4};
  int replica_samples = 100000;
  int probe_paths = 10000;
  std::vector<double> probe_horizons{1.0, 2.0, 4.0, 8.0};
  double r_max = 1000.0;
  int sampler_draws = 100000;
  int bootstrap = 1000;
  std::string output;

  double q() const noexcept { return p / (p - 1.0); }
  double theta() const noexcept { return 1.0 / q(); }
  /// Grid index of time t; throws ConfigError when t is off the grid.
  int grid_index(double t) const;
  void validate() const;
};

enum class Verdict { pass, fail, inconclusive, info };

std::string_view to_string(Verdict v);

/// One CSV row. Absent beta or t are NaN; absent bound/target are empty.
struct SummaryRecord {
  std::string experiment;
  double beta = 0.0;
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> bound;
  std::optional<double> target;
  Verdict verdict = Verdict::info;
  bool heuristic = false;
  long n_envs = 0;
  long n_paths = 0;
  std::uint64_t seed = 0;
};

/// pass iff |estimate - target| <= 3 std_error.
Verdict verdict_against_target(double estimate, double std_error, double target);
/// pass iff estimate <= bound + 3 std_error.
Verdict verdict_against_bound(double estimate, double std_error, double bound);

/// Per-environment statistics gathered at the stat times of a campaign,
/// indexed [beta][time].
struct EnvironmentStats {
  std::vector<std::vector<double>> log_z;
  std::vector<std::vector<double>> log_z_jackknife;
  std::vector<std::vector<double>> log_pair_z;
  std::vector<std::vector<double>> overlap_integral;  // int_0^t <Q>_s ds
};

struct CampaignOptions {
  bool jackknife = false;
  bool pair_partition = false;
  bool overlap = false;
  /// Extra grid times to record besides the checkpoints.
  std::vector<double> extra_times;
};

/// Environments are simulated independently (paths, environment and
/// Hamiltonians from streams derived from the master seed and the
/// environment index) across `cfg.threads` workers; results are stored by
/// environment index, so they do not depend on the worker count.
struct Campaign {
  ExperimentConfig cfg;
  std::vector<double> times;        // sorted stat times
  std::vector<EnvironmentStats> envs;

  std::size_t time_slot(double t) const;
  /// Values of one statistic across environments.
  std::vector<double> column(std::vector<std::vector<double>> EnvironmentStats::*field,
                             std::size_t beta_index, std::size_t time_slot) const;
};

Campaign run_campaign(const ExperimentConfig& cfg, const CampaignOptions& opts);

/// Row builders for a finished campaign; the run_* functions below are
/// run_campaign followed by these.
std::vector<SummaryRecord> annealed_records(const Campaign& c);
std::vector<SummaryRecord> martingale_records(const Campaign& c);
std::vector<SummaryRecord> free_energy_records(const Campaign& c);
std::vector<SummaryRecord> concentration_records(const Campaign& c);
std::vector<SummaryRecord> regime_records(const Campaign& c);
std::vector<SummaryRecord> fractional_records(const Campaign& c);
std::vector<SummaryRecord> second_moment_records(const Campaign& c);

std::vector<SummaryRecord> run_annealed_check(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_martingale_check(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_free_energy_scan(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_concentration_check(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_regime_experiment(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_fractional_moment_check(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_second_moment_check(const ExperimentConfig& cfg);
std::vector<SummaryRecord> run_sampler_validation(const ExperimentConfig& cfg);
/// Closed-form and quadrature rows for the configured kernel, betas and
/// checkpoints, plus the hypothesis (H) probe. No environments are simulated.
std::vector<SummaryRecord> run_theory(const ExperimentConfig& cfg);

/// Regime labels used in the `regime:<label>` verdict row.
inline constexpr std::string_view kStrongConsistent = "strong-consistent";
inline constexpr std::string_view kWeakConsistent = "weak-consistent";
inline constexpr std::string_view kInconclusive = "inconclusive";

struct RegimeDiagnosis {
  double slope = 0.0;            // tail-window slope of mean log W^_t against t
  double slope_std_error = 0.0;  // bootstrap over environments
  double overlap_growth_exponent = 0.0;  // log-log growth of A^ over the last window
  double overlap_relative_growth = 0.0;  // relative growth of A^ over the last window
  std::string_view label = kInconclusive;
};

RegimeDiagnosis diagnose_regime(const Campaign& c, std::size_t beta_index);

}  // namespace dpolymer
