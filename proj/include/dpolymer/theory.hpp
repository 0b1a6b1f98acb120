#pragma once

#include <span>
#include <vector>

#include "dpolymer/kernels.hpp"
#include "dpolymer/quadrature.hpp"
#include "dpolymer/seeding.hpp"

namespace dpolymer {

/// E[Z_t] = exp(beta^2 Q(0) t / 2).
double annealed_mean(double beta, double q0, double t);

/// beta^2 Q(0) / 2, the annealed upper bound on the free energy.
double free_energy_upper_bound(double beta, double q0);

/// 2 exp(-t c^2 / (4 Q(0) beta^2)); requires t > 0 and beta > 0.
double concentration_bound(double c, double t, double beta, double q0);

/// (1/2) beta^2 Q(0) (1 - 4q)^2 / q with q = p / (p - 1); requires p > 1.
double kappa(double beta, double q0, double p);

/// P(|omega^1_s - omega^2_s| > r) for independent standard Brownian motions
/// in R^d: the chi-square(d) survival function at r^2 / (2s).
double pair_exit_probability(double s, double r, int d);
double log_pair_exit_probability(double s, double r, int d);

struct MonteCarloMoment {
  double value = 0.0;
  double std_error = 0.0;
  bool heavy_tail = false;
};

/// Replica-side estimate of E[Z_t^2] = E[exp(beta^2 (Q(0) t + int_0^t Q(omega^1_s - omega^2_s) ds))],
/// drawing omega^1 - omega^2 as sqrt(2) times one Brownian path and using
/// the trapezoidal rule on the grid of step dt.
MonteCarloMoment annealed_second_moment(const CovarianceKernel& kernel, double beta,
                                        double t, double dt, int n_samples, Rng& rng);

/// Inputs of the strong-disorder criterion with Lambda_s the centered ball
/// of radius s^alpha. theta is pinned to 1/q.
struct DisorderCriterionSpec {
  CovarianceKernel kernel;
  double beta = 1.0;
  double p = 2.0;
  double alpha = 1.2;
  double s_max = 1e7;

  double q() const noexcept { return p / (p - 1.0); }
  double theta() const noexcept { return 1.0 / q(); }
  void validate() const;
};

/// Margin on fitted tail exponents for the criterion integrals.
inline constexpr double kCriterionTailMargin = 0.02;

struct CriterionResult {
  double v_integral = 0.0;      // int_0^{s_max} v
  double v_exponent = 0.0;      // fitted tail power of v
  TailVerdict v_verdict = TailVerdict::inconclusive;
  double log_w_integral = 0.0;  // log int_0^{s_max} w (w can be astronomically large)
  double w_exponent = 0.0;
  TailVerdict w_verdict = TailVerdict::inconclusive;
  double kappa = 0.0;

  bool satisfied() const noexcept {
    return v_verdict == TailVerdict::divergent && w_verdict == TailVerdict::finite;
  }
};

/// v(s) = Q~(s^alpha) (inf of a radially nonincreasing Q over the ball).
double criterion_v(const DisorderCriterionSpec& spec, double s);
/// log w(s) = log v(s) + (1/p) log P(|omega^1_s - omega^2_s| > s^alpha) + kappa s.
double criterion_log_w(const DisorderCriterionSpec& spec, double s);

/// Evaluates both integrals of the strong-disorder criterion on [0, s_max]
/// and diagnoses their behaviour at infinity from the last decade before s_max.
CriterionResult disorder_criterion_h1(const DisorderCriterionSpec& spec);

struct FractionalBound {
  double log_value = 0.0;  // log(delta) - gamma int_0^t v
  double value = 0.0;      // may be +inf when delta overflows
  double gamma = 0.0;
  double log_delta = 0.0;
  double v_integral = 0.0;  // int_0^t v
};

/// delta * exp(-gamma int_0^t v(s) ds), gamma = beta^2 theta (1 - theta) / 2,
/// delta = 1 + gamma int_0^infinity w. Requires a finite w verdict.
FractionalBound fractional_moment_bound(const DisorderCriterionSpec& spec, double t);
FractionalBound fractional_moment_bound(const DisorderCriterionSpec& spec,
                                        const CriterionResult& h1, double t);

struct HProbeRow {
  double horizon = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  bool tail_flag = false;
};

/// Monte Carlo estimates of E[exp((beta^2 / 2) int_0^T Q(omega_s) ds)] for
/// each T in `horizons` (multiples of dt), nested along the same paths.
std::vector<HProbeRow> hypothesis_h_probe(const CovarianceKernel& kernel, double beta,
                                          std::span<const double> horizons, double dt,
                                          int n_paths, Rng& rng);

/// Relative increase of the estimate between the last two horizons.
double h_probe_saturation(std::span<const HProbeRow> rows);

}  // namespace dpolymer
