#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dpolymer/quadrature.hpp"
#include "dpolymer/seeding.hpp"

namespace dpolymer {

enum class KernelFamily { gaussian, cauchy, user_radial };

std::string_view to_string(KernelFamily f);
KernelFamily parse_kernel_family(std::string_view token);

/// Homogeneous, radial spatial covariance Q of the environment.
///
///   gaussian:    Q(x) = sigma2 * exp(-|x|^2 / (2 length_scale^2))
///   cauchy:      Q(x) = sigma2 * (1 + |x|^2)^(-lambda)
///   user_radial: Q(x) = radial_profile(|x|), evaluation only
struct CovarianceKernel {
  KernelFamily family = KernelFamily::gaussian;
  double sigma2 = 1.0;
  double length_scale = 1.0;
  double lambda = 0.4;
  int dim = 1;
  std::function<double(double)> radial_profile;

  static CovarianceKernel gaussian(double sigma2, double length_scale, int dim);
  static CovarianceKernel cauchy(double sigma2, double lambda, int dim);
  /// sigma2 is taken as profile(0).
  static CovarianceKernel user_radial(std::function<double(double)> profile, int dim);

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;

  double at_origin() const noexcept { return sigma2; }
  double radial(double r) const;
  /// log Q~(r), finite even where Q~(r) underflows for the built-in families.
  double log_radial(double r) const;
  /// Q as a function of the squared distance |x|^2.
  double from_squared_distance(double r2) const;

  bool has_spectral_sampler() const noexcept {
    return family != KernelFamily::user_radial;
  }
};

/// Q(x); throws ConfigError when x.size() != k.dim.
double eval_kernel(const CovarianceKernel& k, std::span<const double> x);

/// One draw from the normalized spectral measure Q^/Q(0), written to `out`
/// (length k.dim). The empirical mean of cos(lambda . x) over draws converges
/// to Q(x)/Q(0). Throws UnsupportedFamily for user-radial kernels.
void sample_frequency(const CovarianceKernel& k, Rng& rng, std::span<double> out);
std::vector<double> sample_frequency(const CovarianceKernel& k, Rng& rng);

struct RadialTailResult {
  double value = 0.0;          // integral of r Q~(r) over [0, r_max]
  double tail_exponent = 0.0;  // fitted power of r Q~(r) on [r_max/10, r_max]
  TailVerdict verdict = TailVerdict::inconclusive;
};

inline constexpr double kTailMargin = 0.1;

/// Checks the integrability of r Q~(r) on [0, infinity) at the resolution of
/// a finite horizon r_max.
RadialTailResult radial_tail_integral(const CovarianceKernel& k, double r_max,
                                      double tol);

}  // namespace dpolymer
