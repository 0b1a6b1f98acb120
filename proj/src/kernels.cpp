#include "dpolymer/kernels.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dpolymer/errors.hpp"

namespace dpolymer {

std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::cauchy: return "cauchy";
    case KernelFamily::user_radial: return "user-radial";
  }
  return "gaussian";
}

KernelFamily parse_kernel_family(std::string_view token) {
  if (token == "gaussian") return KernelFamily::gaussian;
  if (token == "cauchy") return KernelFamily::cauchy;
  if (token == "user-radial") return KernelFamily::user_radial;
  throw ConfigError("unknown kernel family '" + std::string(token) + "'");
}

CovarianceKernel CovarianceKernel::gaussian(double sigma2, double length_scale, int dim) {
  CovarianceKernel k;
  k.family = KernelFamily::gaussian;
  k.sigma2 = sigma2;
  k.length_scale = length_scale;
  k.dim = dim;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::cauchy(double sigma2, double lambda, int dim) {
  CovarianceKernel k;
  k.family = KernelFamily::cauchy;
  k.sigma2 = sigma2;
  k.lambda = lambda;
  k.dim = dim;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::user_radial(std::function<double(double)> profile,
                                               int dim) {
  if (!profile) throw ConfigError("user-radial kernel needs a profile");
  CovarianceKernel k;
  k.family = KernelFamily::user_radial;
  k.sigma2 = profile(0.0);
  k.radial_profile = std::move(profile);
  k.dim = dim;
  k.validate();
  return k;
}

void CovarianceKernel::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("kernel.sigma2 must be a finite positive number");
  }
  if (dim < 1) throw ConfigError("kernel.dim must be >= 1");
  switch (family) {
    case KernelFamily::gaussian:
      if (!(length_scale > 0.0)) throw ConfigError("kernel.length_scale must be > 0");
      break;
    case KernelFamily::cauchy:
      if (!(lambda > 0.0)) throw ConfigError("kernel.lambda must be > 0");
      break;
    case KernelFamily::user_radial:
      if (!radial_profile) throw ConfigError("user-radial kernel needs a profile");
      break;
  }
}

double CovarianceKernel::from_squared_distance(double r2) const {
  switch (family) {
    case KernelFamily::gaussian:
      return sigma2 * std::exp(-r2 / (2.0 * length_scale * length_scale));
    case KernelFamily::cauchy:
      return sigma2 * std::exp(-lambda * std::log1p(r2));
    case KernelFamily::user_radial:
      return r2 == 0.0 ? sigma2 : radial_profile(std::sqrt(r2));
  }
  return 0.0;
}

double CovarianceKernel::radial(double r) const {
  if (r == 0.0) return sigma2;
  if (family == KernelFamily::user_radial) return radial_profile(std::fabs(r));
  return from_squared_distance(r * r);
}

double CovarianceKernel::log_radial(double r) const {
  switch (family) {
    case KernelFamily::gaussian:
      return std::log(sigma2) - r * r / (2.0 * length_scale * length_scale);
    case KernelFamily::cauchy:
      return std::log(sigma2) - lambda * std::log1p(r * r);
    case KernelFamily::user_radial: {
      const double q = radial(r);
      if (q < 0.0) throw NumericalError("log_radial: negative profile value");
      return q == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(q);
    }
  }
  return 0.0;
}

double eval_kernel(const CovarianceKernel& k, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(k.dim)) {
    throw ConfigError("eval_kernel: point has dimension " + std::to_string(x.size()) +
                      ", kernel has dimension " + std::to_string(k.dim));
  }
  double r2 = 0.0;
  for (double c : x) {
    if (!std::isfinite(c)) throw ConfigError("eval_kernel: non-finite coordinate");
    r2 += c * c;
  }
  if (r2 == 0.0) return k.sigma2;
  return k.from_squared_distance(r2);
}

void sample_frequency(const CovarianceKernel& k, Rng& rng, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(k.dim)) {
    throw ConfigError("sample_frequency: output has wrong dimension");
  }
  std::normal_distribution<double> normal;
  switch (k.family) {
    case KernelFamily::gaussian:
      for (double& c : out) c = normal(rng) / k.length_scale;
      return;
    case KernelFamily::cauchy: {
      // (1+|x|^2)^(-lambda) = E_u[exp(-u |x|^2)], u ~ Gamma(lambda, 1), and
      // exp(-u |x|^2) is the characteristic function of N(0, 2u I).
      std::gamma_distribution<double> gamma(k.lambda, 1.0);
      const double sd = std::sqrt(2.0 * gamma(rng));
      for (double& c : out) c = sd * normal(rng);
      return;
    }
    case KernelFamily::user_radial:
      throw UnsupportedFamily("user-radial kernels have no spectral sampler");
  }
}

std::vector<double> sample_frequency(const CovarianceKernel& k, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(k.dim));
  sample_frequency(k, rng, out);
  return out;
}

RadialTailResult radial_tail_integral(const CovarianceKernel& k, double r_max,
                                      double tol) {
  if (!(r_max > 0.0)) throw ConfigError("radial_tail_integral: r_max must be > 0");
  if (!(tol > 0.0)) throw ConfigError("radial_tail_integral: tol must be > 0");
  RadialTailResult out;
  QuadratureOptions opts;
  opts.rel_tol = tol;
  const auto integrand = [&k](double r) { return r * k.radial(r); };
  out.value = integrate(integrand, 0.0, r_max, opts,
                        geometric_breakpoints(0.0, r_max, 1.5))
                  .value;
  out.tail_exponent = fitted_tail_exponent(
      [&k](double r) { return std::log(r) + k.log_radial(r); }, r_max / 10.0, r_max);
  out.verdict = classify_tail_exponent(out.tail_exponent, kTailMargin);
  return out;
}

}  // namespace dpolymer
