#include "dpolymer/environment.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dpolymer/detail/fast_trig.hpp"
#include "dpolymer/errors.hpp"

namespace dpolymer {

std::string_view to_string(EnvMode m) {
  return m == EnvMode::spectral ? "spectral" : "exact-cholesky";
}

EnvMode parse_env_mode(std::string_view token) {
  if (token == "spectral") return EnvMode::spectral;
  if (token == "exact-cholesky") return EnvMode::exact_cholesky;
  throw ConfigError("unknown environment mode '" + std::string(token) +
                    "' (expected exact-cholesky or spectral)");
}

EnvironmentRealization::EnvironmentRealization(CovarianceKernel kernel, EnvMode mode,
                                               int n_steps, double dt, int k_features,
                                               std::uint64_t seed)
    : kernel_(std::move(kernel)),
      mode_(mode),
      n_steps_(n_steps),
      dt_(dt),
      k_features_(k_features),
      seed_(seed) {
  kernel_.validate();
  if (n_steps_ < 0) throw ConfigError("environment: n_steps must be >= 0");
  if (!(dt_ > 0.0)) throw ConfigError("environment: dt must be > 0");
  if (mode_ == EnvMode::exact_cholesky) return;
  if (k_features_ < 1) throw ConfigError("environment: k_features must be >= 1");
  if (!kernel_.has_spectral_sampler()) {
    throw UnsupportedFamily(
        "spectral environment needs a spectral sampler; user-radial kernels "
        "must use env.mode = exact-cholesky");
  }
  const auto d = static_cast<std::size_t>(kernel_.dim);
  const auto k = static_cast<std::size_t>(k_features_);
  frequencies_.resize(k * d);
  frequencies_t_.resize(k * d);
  Rng rng = make_rng(seed_, Purpose::frequencies, 0);
  for (std::size_t i = 0; i < k; ++i) {
    sample_frequency(kernel_, rng, std::span<double>(frequencies_).subspan(i * d, d));
    for (std::size_t c = 0; c < d; ++c) frequencies_t_[c * k + i] = frequencies_[i * d + c];
  }
}

EnvironmentRealization make_environment(const CovarianceKernel& kernel, EnvMode mode,
                                        int n_steps, double dt, int k_features,
                                        std::uint64_t seed) {
  return EnvironmentRealization(kernel, mode, n_steps, dt, k_features, seed);
}

void EnvironmentRealization::increments_at(int step, std::span<const double> points,
                                           std::span<double> out) const {
  if (step < 0 || step >= n_steps_) {
    throw ConfigError("increments_at: step " + std::to_string(step) +
                      " out of range [0, " + std::to_string(n_steps_) + ")");
  }
  const auto d = static_cast<std::size_t>(kernel_.dim);
  if (points.size() % d != 0 || points.size() / d != out.size()) {
    throw ConfigError("increments_at: points must be m x " + std::to_string(d) +
                      " with m = output length");
  }
  if (out.empty()) return;
  if (mode_ == EnvMode::spectral) {
    spectral_increments(step, points, out);
  } else {
    exact_increments(step, points, out);
  }
}

std::vector<double> EnvironmentRealization::increments_at(
    int step, std::span<const double> points) const {
  std::vector<double> out(points.size() / static_cast<std::size_t>(kernel_.dim));
  increments_at(step, points, out);
  return out;
}

void EnvironmentRealization::spectral_increments(int step, std::span<const double> points,
                                                 std::span<double> out) const {
  const auto d = static_cast<std::size_t>(kernel_.dim);
  const auto k = static_cast<std::size_t>(k_features_);
  std::vector<double> xi(k), eta(k), phase(k), terms(k);
  Rng rng = make_rng(seed_, Purpose::coefficients, static_cast<std::uint64_t>(step));
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < k; ++i) {
    xi[i] = normal(rng);
    eta[i] = normal(rng);
  }
  const double scale = std::sqrt(dt_ * kernel_.sigma2 / static_cast<double>(k));

  // The fused kernels need every phase inside the fast-trig range.
  std::vector<double> max_freq(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      max_freq[c] = std::max(max_freq[c], std::fabs(frequencies_t_[c * k + i]));
    }
  }
  const double* lam = frequencies_t_.data();
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double* x = points.data() + m * d;
    double reach = 0.0;
    for (std::size_t c = 0; c < d; ++c) reach += std::fabs(x[c]) * max_freq[c];
    double sum = 0.0;
    if (reach < detail::kFastTrigMaxArg && d <= 3) {
      switch (d) {
        case 1: sum = detail::feature_sum<1>(lam, x, xi.data(), eta.data(), k); break;
        case 2: sum = detail::feature_sum<2>(lam, x, xi.data(), eta.data(), k); break;
        default: sum = detail::feature_sum<3>(lam, x, xi.data(), eta.data(), k); break;
      }
    } else {
      for (std::size_t i = 0; i < k; ++i) phase[i] = lam[i] * x[0];
      for (std::size_t c = 1; c < d; ++c) {
        for (std::size_t i = 0; i < k; ++i) phase[i] += lam[c * k + i] * x[c];
      }
      detail::feature_terms(phase.data(), xi.data(), eta.data(), terms.data(), k);
      for (std::size_t i = 0; i < k; ++i) sum += terms[i];
    }
    out[m] = scale * sum;
  }
}

void EnvironmentRealization::exact_increments(int step, std::span<const double> points,
                                              std::span<double> out) const {
  const auto d = static_cast<std::size_t>(kernel_.dim);
  const std::size_t m = out.size();

  // Coincident points share one variable; the rest get a joint draw.
  std::vector<std::size_t> owner(m);
  std::vector<std::size_t> unique;
  for (std::size_t a = 0; a < m; ++a) {
    owner[a] = unique.size();
    for (std::size_t u = 0; u < unique.size(); ++u) {
      const double* p = points.data() + unique[u] * d;
      const double* q = points.data() + a * d;
      bool same = true;
      for (std::size_t c = 0; c < d && same; ++c) same = p[c] == q[c];
      if (same) {
        owner[a] = u;
        break;
      }
    }
    if (owner[a] == unique.size()) unique.push_back(a);
  }

  const auto n = static_cast<Eigen::Index>(unique.size());
  Eigen::MatrixXd cov(n, n);
  std::vector<double> diff(d);
  for (Eigen::Index a = 0; a < n; ++a) {
    cov(a, a) = dt_ * kernel_.sigma2;
    for (Eigen::Index b = 0; b < a; ++b) {
      double r2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = points[unique[a] * d + c] - points[unique[b] * d + c];
        r2 += delta * delta;
      }
      cov(a, b) = cov(b, a) = dt_ * kernel_.from_squared_distance(r2);
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double jitter = kJitterStart;
  while (llt.info() != Eigen::Success) {
    if (jitter > kJitterLimit * (1.0 + 1e-12)) {
      throw NumericalError("exact environment sampler: Cholesky failed at step " +
                           std::to_string(step) + " after jitter " +
                           std::to_string(jitter / 10.0) + " * dt * Q(0)");
    }
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter * dt_ * kernel_.sigma2;
    llt.compute(jittered);
    jitter *= 10.0;
  }

  Rng rng = make_rng(seed_, Purpose::coefficients, static_cast<std::uint64_t>(step));
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index a = 0; a < n; ++a) z(a) = normal(rng);
  const Eigen::VectorXd y = llt.matrixL() * z;
  for (std::size_t a = 0; a < m; ++a) out[a] = y(static_cast<Eigen::Index>(owner[a]));
}

double EnvironmentRealization::spectral_covariance(std::span<const double> r) const {
  if (mode_ != EnvMode::spectral) {
    throw ConfigError("spectral_covariance requires a spectral-mode environment");
  }
  const auto d = static_cast<std::size_t>(kernel_.dim);
  if (r.size() != d) throw ConfigError("spectral_covariance: wrong dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k_features_); ++i) {
    double phase = 0.0;
    for (std::size_t c = 0; c < d; ++c) phase += frequencies_[i * d + c] * r[c];
    sum += std::cos(phase);
  }
  return kernel_.sigma2 * (sum / static_cast<double>(k_features_));
}

double spectral_covariance_error(const EnvironmentRealization& env,
                                 std::span<const PointPair> pairs) {
  if (env.mode() != EnvMode::spectral) {
    throw ConfigError("spectral_covariance_error requires a spectral-mode environment");
  }
  const auto d = static_cast<std::size_t>(env.dim());
  double worst = 0.0;
  std::vector<double> r(d);
  for (const auto& p : pairs) {
    if (p.x.size() != d || p.y.size() != d) {
      throw ConfigError("spectral_covariance_error: pair has wrong dimension");
    }
    for (std::size_t c = 0; c < d; ++c) r[c] = p.x[c] - p.y[c];
    const double err =
        std::fabs(env.spectral_covariance(r) - eval_kernel(env.kernel(), r));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace dpolymer
