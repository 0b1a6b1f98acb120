#include "dpolymer/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dpolymer/errors.hpp"
#include "dpolymer/special.hpp"
#include "dpolymer/stats.hpp"

namespace dpolymer {

double annealed_mean(double beta, double q0, double t) {
  if (!(q0 > 0.0) || !(t >= 0.0)) throw ConfigError("annealed_mean: need q0 > 0, t >= 0");
  return std::exp(0.5 * beta * beta * q0 * t);
}

double free_energy_upper_bound(double beta, double q0) { return 0.5 * beta * beta * q0; }

double concentration_bound(double c, double t, double beta, double q0) {
  if (!(t > 0.0) || !(beta > 0.0) || !(q0 > 0.0)) {
    throw ConfigError("concentration_bound: need t > 0, beta > 0, q0 > 0");
  }
  return 2.0 * std::exp(-t * c * c / (4.0 * q0 * beta * beta));
}

double kappa(double beta, double q0, double p) {
  if (!(p > 1.0)) throw ConfigError("kappa: p must be > 1");
  const double q = p / (p - 1.0);
  const double f = 1.0 - 4.0 * q;
  return 0.5 * beta * beta * q0 * f * f / q;
}

double log_pair_exit_probability(double s, double r, int d) {
  if (!(s > 0.0) || !(r >= 0.0) || d < 1) {
    throw ConfigError("pair_exit_probability: need s > 0, r >= 0, d >= 1");
  }
  if (r == 0.0) return 0.0;
  // |difference|^2 / (2s) ~ chi-square(d); survival at z is Q(d/2, z/2).
  return log_gamma_q(0.5 * d, r * r / (4.0 * s));
}

double pair_exit_probability(double s, double r, int d) {
  return std::exp(log_pair_exit_probability(s, r, d));
}

namespace {

int grid_steps(double t, double dt, const char* what) {
  if (!(dt > 0.0)) throw ConfigError(std::string(what) + ": dt must be > 0");
  if (!(t >= 0.0)) throw ConfigError(std::string(what) + ": horizon must be >= 0");
  const double n = std::round(t / dt);
  if (std::fabs(n * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw ConfigError(std::string(what) + ": horizon " + std::to_string(t) +
                      " is not on the grid of step " + std::to_string(dt));
  }
  return static_cast<int>(n);
}

// Trapezoidal integrals of Q(scale * omega_s) along one Brownian path,
// recorded at the requested grid indices (ascending).
void path_occupation(const CovarianceKernel& kernel, double scale, double dt,
                     std::span<const int> marks, Rng& rng, std::span<double> out) {
  const auto d = static_cast<std::size_t>(kernel.dim);
  std::normal_distribution<double> normal;
  std::vector<double> x(d, 0.0);
  const double sd = std::sqrt(dt);
  double prev_q = kernel.sigma2;
  CompensatedSum integral;
  std::size_t next = 0;
  while (next < marks.size() && marks[next] == 0) out[next++] = 0.0;
  const int last = marks.empty() ? 0 : marks.back();
  for (int i = 1; i <= last; ++i) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      x[c] += sd * normal(rng);
      r2 += scale * scale * x[c] * x[c];
    }
    const double q = kernel.from_squared_distance(r2);
    integral.add(0.5 * dt * (prev_q + q));
    prev_q = q;
    while (next < marks.size() && marks[next] == i) out[next++] = integral.value();
  }
}

}  // namespace

MonteCarloMoment annealed_second_moment(const CovarianceKernel& kernel, double beta,
                                        double t, double dt, int n_samples, Rng& rng) {
  if (n_samples < 2) throw ConfigError("annealed_second_moment: need >= 2 samples");
  const int steps = grid_steps(t, dt, "annealed_second_moment");
  MonteCarloMoment out;
  if (beta == 0.0 || steps == 0) {
    out.value = 1.0;
    return out;
  }
  const int marks[1] = {steps};
  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  double occupation = 0.0;
  for (auto& v : samples) {
    path_occupation(kernel, std::sqrt(2.0), dt, marks, rng, std::span<double>(&occupation, 1));
    v = std::exp(beta * beta * (kernel.sigma2 * t + occupation));
  }
  const auto est = mean_estimate(samples);
  out.value = est.mean;
  out.std_error = est.std_error;
  out.heavy_tail = heavy_tail(samples);
  return out;
}

void DisorderCriterionSpec::validate() const {
  kernel.validate();
  if (!(beta >= 0.0)) throw ConfigError("criterion: beta must be >= 0");
  if (!(p > 1.0)) throw ConfigError("criterion: p must be > 1");
  if (!(alpha > 1.0)) throw ConfigError("criterion: alpha must be > 1");
  if (!(s_max > 10.0)) throw ConfigError("criterion: s_max must exceed 10");
  if (kernel.family == KernelFamily::user_radial) {
    // Radial monotonicity is what makes v(s) = Q~(s^alpha) the infimum.
    double prev = kernel.radial(0.0);
    for (int i = 0; i <= 400; ++i) {
      const double r = std::pow(10.0, -4.0 + i * 0.025);
      const double q = kernel.radial(r);
      if (q > prev * (1.0 + 1e-12)) {
        throw NumericalError("criterion: radial profile is not nonincreasing near r = " +
                             std::to_string(r));
      }
      prev = q;
    }
  }
}

double criterion_v(const DisorderCriterionSpec& spec, double s) {
  return spec.kernel.radial(std::pow(s, spec.alpha));
}

double criterion_log_w(const DisorderCriterionSpec& spec, double s) {
  const double radius = std::pow(s, spec.alpha);
  const double log_v = spec.kernel.log_radial(radius);
  if (s == 0.0) return log_v;
  const double k = kappa(spec.beta, spec.kernel.sigma2, spec.p);
  return log_v + log_pair_exit_probability(s, radius, spec.kernel.dim) / spec.p + k * s;
}

CriterionResult disorder_criterion_h1(const DisorderCriterionSpec& spec) {
  spec.validate();
  CriterionResult out;
  out.kappa = kappa(spec.beta, spec.kernel.sigma2, spec.p);
  const auto log_v = [&spec](double s) {
    return spec.kernel.log_radial(std::pow(s, spec.alpha));
  };
  const auto log_w = [&spec](double s) { return criterion_log_w(spec, s); };

  out.v_integral = std::exp(integrate_log(log_v, 0.0, spec.s_max));
  out.v_exponent = fitted_tail_exponent(log_v, spec.s_max / 10.0, spec.s_max);
  out.v_verdict = classify_tail_exponent(out.v_exponent, kCriterionTailMargin);

  out.log_w_integral = integrate_log(log_w, 0.0, spec.s_max);
  out.w_exponent = fitted_tail_exponent(log_w, spec.s_max / 10.0, spec.s_max);
  out.w_verdict = classify_tail_exponent(out.w_exponent, kCriterionTailMargin);
  return out;
}

FractionalBound fractional_moment_bound(const DisorderCriterionSpec& spec, double t) {
  return fractional_moment_bound(spec, disorder_criterion_h1(spec), t);
}

FractionalBound fractional_moment_bound(const DisorderCriterionSpec& spec,
                                        const CriterionResult& h1, double t) {
  if (!(t >= 0.0)) throw ConfigError("fractional_moment_bound: t must be >= 0");
  if (h1.w_verdict != TailVerdict::finite) {
    throw NumericalError(
        "fractional_moment_bound: the w integral is not diagnosed finite (verdict " +
        std::string(to_string(h1.w_verdict)) + ")");
  }
  FractionalBound out;
  const double theta = spec.theta();
  out.gamma = 0.5 * spec.beta * spec.beta * theta * (1.0 - theta);
  if (out.gamma > 0.0) {
    const double log_term = std::log(out.gamma) + h1.log_w_integral;
    out.log_delta = log_term < 30.0 ? std::log1p(std::exp(log_term))
                                    : log_term + std::log1p(std::exp(-log_term));
  }
  if (t > 0.0) {
    out.v_integral = integrate([&spec](double s) { return criterion_v(spec, s); }, 0.0, t,
                               {}, geometric_breakpoints(0.0, t, 1.5))
                         .value;
  }
  out.log_value = out.log_delta - out.gamma * out.v_integral;
  out.value = std::exp(out.log_value);
  return out;
}

std::vector<HProbeRow> hypothesis_h_probe(const CovarianceKernel& kernel, double beta,
                                          std::span<const double> horizons, double dt,
                                          int n_paths, Rng& rng) {
  if (n_paths < 2) throw ConfigError("hypothesis_h_probe: need >= 2 paths");
  if (horizons.empty()) throw ConfigError("hypothesis_h_probe: empty horizon grid");
  std::vector<int> marks;
  for (double h : horizons) marks.push_back(grid_steps(h, dt, "hypothesis_h_probe"));
  if (!std::is_sorted(marks.begin(), marks.end())) {
    throw ConfigError("hypothesis_h_probe: horizons must be ascending");
  }
  const std::size_t m = marks.size();
  std::vector<std::vector<double>> samples(m, std::vector<double>(static_cast<std::size_t>(n_paths)));
  std::vector<double> occupation(m);
  for (int p = 0; p < n_paths; ++p) {
    path_occupation(kernel, 1.0, dt, marks, rng, occupation);
    for (std::size_t h = 0; h < m; ++h) {
      samples[h][static_cast<std::size_t>(p)] = std::exp(0.5 * beta * beta * occupation[h]);
    }
  }
  std::vector<HProbeRow> rows;
  for (std::size_t h = 0; h < m; ++h) {
    const auto est = mean_estimate(samples[h]);
    rows.push_back({horizons[h], est.mean, est.std_error, heavy_tail(samples[h])});
  }
  return rows;
}

double h_probe_saturation(std::span<const HProbeRow> rows) {
  if (rows.size() < 2) throw ConfigError("h_probe_saturation: need >= 2 horizons");
  const auto& a = rows[rows.size() - 2];
  const auto& b = rows.back();
  return (b.estimate - a.estimate) / a.estimate;
}

}  // namespace dpolymer
