#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpolymer/kernels.hpp"

namespace dpolymer {

enum class EnvMode { exact_cholesky, spectral };

std::string_view to_string(EnvMode m);
EnvMode parse_env_mode(std::string_view token);

/// One frozen realization of the time increments of the Gaussian landscape
/// B on the grid t_i = i * dt, i < n_steps. Increments at step i are
/// centered Gaussian fields with covariance dt * Q(x - y), independent across
/// steps, generated lazily from per-step derived streams.
///
/// Spectral mode draws K frequencies once at construction and represents
/// the increment at step i as
///   sqrt(dt Q(0) / K) * sum_k [xi_{ik} cos(lambda_k . x) + eta_{ik} sin(lambda_k . x)],
/// a single landscape that is consistent across every query.
///
/// Exact-cholesky mode draws a fresh joint Gaussian for each queried point
/// set. Two different point sets at the same step are NOT mutually
/// consistent; use it as a small-m oracle, one query per step.
class EnvironmentRealization {
 public:
  EnvironmentRealization(CovarianceKernel kernel, EnvMode mode, int n_steps, double dt,
                         int k_features, std::uint64_t seed);

  EnvMode mode() const noexcept { return mode_; }
  int n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }
  int dim() const noexcept { return kernel_.dim; }
  int k_features() const noexcept { return k_features_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const CovarianceKernel& kernel() const noexcept { return kernel_; }

  /// Frequencies, row-major K x d. Empty in exact-cholesky mode.
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }

  /// Increments Delta B_step at `points` (row-major m x d) written to `out`
  /// (length m). Identical arguments always return identical bits.
  void increments_at(int step, std::span<const double> points, std::span<double> out) const;
  std::vector<double> increments_at(int step, std::span<const double> points) const;

  /// Q_K(r) = (Q(0)/K) sum_k cos(lambda_k . r). Spectral mode only.
  double spectral_covariance(std::span<const double> r) const;

 private:
  void spectral_increments(int step, std::span<const double> points,
                           std::span<double> out) const;
  void exact_increments(int step, std::span<const double> points,
                        std::span<double> out) const;

  CovarianceKernel kernel_;
  EnvMode mode_;
  int n_steps_;
  double dt_;
  int k_features_;
  std::uint64_t seed_;
  std::vector<double> frequencies_;     // K x d
  std::vector<double> frequencies_t_;   // d x K, for the feature loops
};

/// Validates arguments and constructs the realization. Spectral mode needs a
/// kernel with a spectral sampler (UnsupportedFamily otherwise).
EnvironmentRealization make_environment(const CovarianceKernel& kernel, EnvMode mode,
                                        int n_steps, double dt, int k_features,
                                        std::uint64_t seed);

struct PointPair {
  std::vector<double> x;
  std::vector<double> y;
};

/// max over pairs of |Q_K(x - y) - Q(x - y)|. Spectral mode only.
double spectral_covariance_error(const EnvironmentRealization& env,
                                 std::span<const PointPair> pairs);

/// Diagonal jitter ladder of the exact sampler, in units of dt * Q(0).
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterLimit = 1e-6;

}  // namespace dpolymer
