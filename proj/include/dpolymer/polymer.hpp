#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/seeding.hpp"
#include "dpolymer/stats.hpp"

namespace dpolymer {

/// N Brownian replicas on the grid t_i = i * dt, all started at x0.
struct PathEnsemble {
  int n_paths = 0;
  int n_steps = 0;
  int dim = 1;
  double dt = 0.0;
  std::vector<double> x0;
  /// Step-major storage: ((i * n_paths) + j) * dim + c.
  std::vector<double> positions;

  double time(int i) const noexcept { return i * dt; }
  /// All replica positions at grid index i, row-major n_paths x dim.
  std::span<const double> at_step(int i) const;
  std::span<const double> position(int j, int i) const;
};

/// Samples the ensemble. The stream is consumed replica-major, step-minor,
/// coordinate-innermost: increments of replica 0 for steps 1..n, then
/// replica 1, and so on.
PathEnsemble sample_paths(int n_paths, int n_steps, double dt, int dim,
                          std::vector<double> x0, Rng& rng);

/// Hamiltonians of an ensemble in one environment, plus the inverse
/// temperature used by every derived quantity. H does not depend on beta, so
/// `with_beta` re-weights the same table at no cost.
class PolymerRun {
 public:
  PolymerRun(std::shared_ptr<const PathEnsemble> ensemble,
             std::shared_ptr<const EnvironmentRealization> environment,
             std::shared_ptr<const std::vector<double>> hamiltonian, double beta);

  const PathEnsemble& ensemble() const noexcept { return *ensemble_; }
  const EnvironmentRealization& environment() const noexcept { return *environment_; }
  double beta() const noexcept { return beta_; }
  int n_paths() const noexcept { return ensemble_->n_paths; }
  int n_steps() const noexcept { return ensemble_->n_steps; }
  double dt() const noexcept { return ensemble_->dt; }
  double time(int i) const noexcept { return ensemble_->time(i); }

  /// H_{t_i}(omega^j).
  double hamiltonian(int j, int i) const;
  /// H_{t_i} for all replicas.
  std::span<const double> hamiltonians_at(int i) const;

  PolymerRun with_beta(double beta) const;

 private:
  std::shared_ptr<const PathEnsemble> ensemble_;
  std::shared_ptr<const EnvironmentRealization> environment_;
  std::shared_ptr<const std::vector<double>> hamiltonian_;  // (n_steps+1) x n_paths
  double beta_;
};

/// Left-point accumulation -H_{t_{i+1}} = -H_{t_i} + Delta B_i(omega_{t_i}),
/// querying the environment once per step with all replica positions so the
/// replicas share one landscape.
PolymerRun accumulate_hamiltonian(std::shared_ptr<const PathEnsemble> ensemble,
                                  std::shared_ptr<const EnvironmentRealization> env,
                                  double beta = 0.0);
PolymerRun accumulate_hamiltonian(PathEnsemble ensemble, EnvironmentRealization env,
                                  double beta = 0.0);

struct LogScalar {
  double value = 0.0;
  double log = 0.0;
};

/// Z^_t = (1/N) sum_j exp(-beta H_t(omega^j)), via max-shifted
/// compensated summation in replica order.
LogScalar partition_estimate(const PolymerRun& run, int t_index);

/// W^_t = Z^_t exp(-beta^2 Q(0) t / 2).
LogScalar normalized_partition(const PolymerRun& run, int t_index);

/// Jackknife-over-replicas bias-corrected log Z^_t:
/// N log Z^ - (N-1) mean_j log Z^_{-j}.
double jackknife_log_partition(const PolymerRun& run, int t_index);

/// log of (1/(N(N-1))) sum_{j != k} exp(-beta (H_t(omega^j) + H_t(omega^k))),
/// the unbiased environment-side estimator of Z_t^2.
double log_pair_partition(const PolymerRun& run, int t_index);

using PairObservable = std::function<double(const PathEnsemble&, int j, int k)>;

/// Two-replica Gibbs average at time t with the diagonal j == k excluded:
///   sum_{j!=k} u_j u_k f(j,k) / sum_{j!=k} u_j u_k,  u_j = exp(-beta H_t(omega^j)).
/// Throws NumericalError when every off-diagonal weight underflows.
double gibbs_pair_average(const PolymerRun& run, int t_index, const PairObservable& f);

/// Gibbs pair average of Q(omega^1_{t_i} - omega^2_{t_i}) with time-t_i weights.
double gibbs_kernel_overlap(const PolymerRun& run, int t_index);

/// Running integrals A(i) = sum_{i' < i} dt * <Q(omega^1 - omega^2)>_{t_i'},
/// for i = 0..n_steps.
std::vector<double> overlap_integral_series(const PolymerRun& run);

/// (1/t) int_0^t <Q(omega^1_s - omega^2_s)>_s ds, left-point in s.
double overlap_estimate(const PolymerRun& run, int t_index);

/// Environment average of W^_t^theta, one run per environment.
MeanEstimate fractional_moment(std::span<const PolymerRun> runs, double theta,
                               int t_index);

/// (t_i, (1/t_i) log Z^_{t_i}) for i = 1..n_steps.
std::vector<std::pair<double, double>> log_partition_series(const PolymerRun& run);

}  // namespace dpolymer
