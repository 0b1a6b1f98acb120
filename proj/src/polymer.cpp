#include "dpolymer/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dpolymer/errors.hpp"

namespace dpolymer {

std::span<const double> PathEnsemble::at_step(int i) const {
  if (i < 0 || i > n_steps) throw ConfigError("PathEnsemble: grid index out of range");
  const auto stride = static_cast<std::size_t>(n_paths) * static_cast<std::size_t>(dim);
  return std::span<const double>(positions).subspan(static_cast<std::size_t>(i) * stride,
                                                    stride);
}

std::span<const double> PathEnsemble::position(int j, int i) const {
  if (j < 0 || j >= n_paths) throw ConfigError("PathEnsemble: replica index out of range");
  return at_step(i).subspan(static_cast<std::size_t>(j) * static_cast<std::size_t>(dim),
                            static_cast<std::size_t>(dim));
}

PathEnsemble sample_paths(int n_paths, int n_steps, double dt, int dim,
                          std::vector<double> x0, Rng& rng) {
  if (n_paths < 1) throw ConfigError("sample_paths: n_paths must be >= 1");
  if (n_steps < 0) throw ConfigError("sample_paths: n_steps must be >= 0");
  if (dim < 1) throw ConfigError("sample_paths: dim must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("sample_paths: dt must be > 0");
  if (x0.empty()) x0.assign(static_cast<std::size_t>(dim), 0.0);
  if (x0.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError("sample_paths: x0 has wrong dimension");
  }

  PathEnsemble ens;
  ens.n_paths = n_paths;
  ens.n_steps = n_steps;
  ens.dim = dim;
  ens.dt = dt;
  ens.x0 = std::move(x0);
  const auto n = static_cast<std::size_t>(n_paths);
  const auto d = static_cast<std::size_t>(dim);
  const auto steps = static_cast<std::size_t>(n_steps);
  ens.positions.resize((steps + 1) * n * d);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < d; ++c) ens.positions[j * d + c] = ens.x0[c];
  }
  const double sd = std::sqrt(dt);
  std::normal_distribution<double> normal;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 1; i <= steps; ++i) {
      const std::size_t here = (i * n + j) * d;
      const std::size_t prev = ((i - 1) * n + j) * d;
      for (std::size_t c = 0; c < d; ++c) {
        ens.positions[here + c] = ens.positions[prev + c] + sd * normal(rng);
      }
    }
  }
  return ens;
}

PolymerRun::PolymerRun(std::shared_ptr<const PathEnsemble> ensemble,
                       std::shared_ptr<const EnvironmentRealization> environment,
                       std::shared_ptr<const std::vector<double>> hamiltonian, double beta)
    : ensemble_(std::move(ensemble)),
      environment_(std::move(environment)),
      hamiltonian_(std::move(hamiltonian)),
      beta_(beta) {
  if (!ensemble_ || !environment_ || !hamiltonian_) {
    throw ConfigError("PolymerRun: null component");
  }
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) {
    throw ConfigError("PolymerRun: beta must be finite and >= 0");
  }
}

double PolymerRun::hamiltonian(int j, int i) const {
  if (j < 0 || j >= n_paths()) throw ConfigError("PolymerRun: replica index out of range");
  return hamiltonians_at(i)[static_cast<std::size_t>(j)];
}

std::span<const double> PolymerRun::hamiltonians_at(int i) const {
  if (i < 0 || i > n_steps()) {
    throw ConfigError("PolymerRun: grid index " + std::to_string(i) + " out of range [0, " +
                      std::to_string(n_steps()) + "]");
  }
  const auto n = static_cast<std::size_t>(n_paths());
  return std::span<const double>(*hamiltonian_).subspan(static_cast<std::size_t>(i) * n, n);
}

PolymerRun PolymerRun::with_beta(double beta) const {
  return PolymerRun(ensemble_, environment_, hamiltonian_, beta);
}

PolymerRun accumulate_hamiltonian(std::shared_ptr<const PathEnsemble> ensemble,
                                  std::shared_ptr<const EnvironmentRealization> env,
                                  double beta) {
  if (!ensemble || !env) throw ConfigError("accumulate_hamiltonian: null input");
  if (ensemble->n_steps != env->n_steps()) {
    throw ConfigError("accumulate_hamiltonian: grid mismatch (" +
                      std::to_string(ensemble->n_steps) + " path steps vs " +
                      std::to_string(env->n_steps()) + " environment steps)");
  }
  if (std::fabs(ensemble->dt - env->dt()) > 1e-12 * env->dt()) {
    throw ConfigError("accumulate_hamiltonian: dt mismatch between paths and environment");
  }
  if (ensemble->dim != env->dim()) {
    throw ConfigError("accumulate_hamiltonian: dimension mismatch");
  }
  const auto n = static_cast<std::size_t>(ensemble->n_paths);
  auto table = std::make_shared<std::vector<double>>(
      (static_cast<std::size_t>(ensemble->n_steps) + 1) * n, 0.0);
  std::vector<double> increments(n);
  for (int i = 0; i < ensemble->n_steps; ++i) {
    env->increments_at(i, ensemble->at_step(i), increments);
    const double* prev = table->data() + static_cast<std::size_t>(i) * n;
    double* next = table->data() + static_cast<std::size_t>(i + 1) * n;
    for (std::size_t j = 0; j < n; ++j) next[j] = prev[j] - increments[j];
  }
  return PolymerRun(std::move(ensemble), std::move(env), std::move(table), beta);
}

PolymerRun accumulate_hamiltonian(PathEnsemble ensemble, EnvironmentRealization env,
                                  double beta) {
  return accumulate_hamiltonian(std::make_shared<const PathEnsemble>(std::move(ensemble)),
                                std::make_shared<const EnvironmentRealization>(std::move(env)),
                                beta);
}

namespace {

// Shifted Boltzmann weights exp(-beta H_j - shift), largest equal to 1.
struct ShiftedWeights {
  std::vector<double> w;
  double shift = 0.0;
};

ShiftedWeights shifted_weights(const PolymerRun& run, int t_index) {
  const auto h = run.hamiltonians_at(t_index);
  ShiftedWeights out;
  out.w.resize(h.size());
  const double beta = run.beta();
  if (beta == 0.0) {
    std::fill(out.w.begin(), out.w.end(), 1.0);
    return out;
  }
  out.shift = -std::numeric_limits<double>::infinity();
  for (double v : h) out.shift = std::max(out.shift, -beta * v);
  for (std::size_t j = 0; j < h.size(); ++j) out.w[j] = std::exp(-beta * h[j] - out.shift);
  return out;
}

// sum_{j<k} w_j w_k, accumulated against running prefix sums (no cancellation).
double ordered_pair_sum(std::span<const double> w) {
  CompensatedSum prefix, total;
  for (double x : w) {
    total.add(x * prefix.value());
    prefix.add(x);
  }
  return total.value();
}

void require_pairs(const PolymerRun& run) {
  if (run.n_paths() < 2) {
    throw ConfigError("pair observables need at least 2 replicas");
  }
}

}  // namespace

LogScalar partition_estimate(const PolymerRun& run, int t_index) {
  const auto sw = shifted_weights(run, t_index);
  const double mean = compensated_sum(sw.w) / static_cast<double>(sw.w.size());
  LogScalar out;
  out.log = sw.shift + std::log(mean);
  out.value = std::exp(out.log);
  return out;
}

LogScalar normalized_partition(const PolymerRun& run, int t_index) {
  LogScalar out = partition_estimate(run, t_index);
  const double beta = run.beta();
  out.log -= 0.5 * beta * beta * run.environment().kernel().sigma2 * run.time(t_index);
  out.value = std::exp(out.log);
  return out;
}

double jackknife_log_partition(const PolymerRun& run, int t_index) {
  require_pairs(run);
  const auto sw = shifted_weights(run, t_index);
  const std::size_t n = sw.w.size();
  std::vector<double> prefix(n + 1, 0.0), suffix(n + 1, 0.0);
  {
    CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) {
      prefix[j] = s.value();
      s.add(sw.w[j]);
    }
    prefix[n] = s.value();
  }
  {
    CompensatedSum s;
    for (std::size_t j = n; j-- > 0;) {
      s.add(sw.w[j]);
      suffix[j] = s.value();
    }
  }
  const double nd = static_cast<double>(n);
  const double full = std::log(prefix[n] / nd);
  CompensatedSum loo;
  for (std::size_t j = 0; j < n; ++j) {
    const double rest = prefix[j] + suffix[j + 1];
    if (!(rest > 0.0)) {
      throw NumericalError("jackknife: leave-one-out partition underflows at replica " +
                           std::to_string(j));
    }
    loo.add(std::log(rest / (nd - 1.0)));
  }
  return sw.shift + nd * full - (nd - 1.0) * (loo.value() / nd);
}

double log_pair_partition(const PolymerRun& run, int t_index) {
  require_pairs(run);
  const auto sw = shifted_weights(run, t_index);
  const double nd = static_cast<double>(sw.w.size());
  const double pairs = ordered_pair_sum(sw.w);
  if (!(pairs > 0.0)) throw NumericalError("pair partition: all pair weights underflow");
  return 2.0 * sw.shift + std::log(2.0 * pairs) - std::log(nd * (nd - 1.0));
}

double gibbs_pair_average(const PolymerRun& run, int t_index, const PairObservable& f) {
  require_pairs(run);
  const auto sw = shifted_weights(run, t_index);
  const int n = run.n_paths();
  CompensatedSum num, den;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const double w = sw.w[static_cast<std::size_t>(j)] * sw.w[static_cast<std::size_t>(k)];
      if (w == 0.0) continue;
      num.add(w * f(run.ensemble(), j, k));
      den.add(w);
    }
  }
  if (!(den.value() > 0.0)) {
    throw NumericalError("gibbs_pair_average: all off-diagonal Gibbs weights underflow");
  }
  return num.value() / den.value();
}

double gibbs_kernel_overlap(const PolymerRun& run, int t_index) {
  require_pairs(run);
  const auto sw = shifted_weights(run, t_index);
  const auto pos = run.ensemble().at_step(t_index);
  const auto& kernel = run.environment().kernel();
  const auto n = static_cast<std::size_t>(run.n_paths());
  const auto d = static_cast<std::size_t>(run.ensemble().dim);
  std::vector<double> r2(n);
  CompensatedSum num;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double uj = sw.w[j];
    if (uj == 0.0) continue;
    const std::size_t m = n - j - 1;
    const double* xj = pos.data() + j * d;
    for (std::size_t k = 0; k < m; ++k) {
      const double* xk = xj + (k + 1) * d;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = xj[c] - xk[c];
        s += delta * delta;
      }
      r2[k] = s;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double uk = sw.w[j + 1 + k];
      if (uk != 0.0) acc += uk * kernel.from_squared_distance(r2[k]);
    }
    num.add(uj * acc);
  }
  const double den = ordered_pair_sum(sw.w);
  if (!(den > 0.0)) {
    throw NumericalError("gibbs_kernel_overlap: all off-diagonal Gibbs weights underflow");
  }
  return num.value() / den;
}

std::vector<double> overlap_integral_series(const PolymerRun& run) {
  std::vector<double> out(static_cast<std::size_t>(run.n_steps()) + 1, 0.0);
  CompensatedSum acc;
  for (int i = 0; i < run.n_steps(); ++i) {
    acc.add(run.dt() * gibbs_kernel_overlap(run, i));
    out[static_cast<std::size_t>(i) + 1] = acc.value();
  }
  return out;
}

double overlap_estimate(const PolymerRun& run, int t_index) {
  if (t_index < 1 || t_index > run.n_steps()) {
    throw ConfigError("overlap_estimate: t_index must be in [1, n_steps]");
  }
  CompensatedSum acc;
  for (int i = 0; i < t_index; ++i) acc.add(run.dt() * gibbs_kernel_overlap(run, i));
  return acc.value() / run.time(t_index);
}

MeanEstimate fractional_moment(std::span<const PolymerRun> runs, double theta,
                               int t_index) {
  if (runs.size() < 2) throw ConfigError("fractional_moment: need at least 2 environments");
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ConfigError("fractional_moment: theta must lie in (0, 1]");
  }
  std::vector<double> values;
  values.reserve(runs.size());
  for (const auto& run : runs) {
    values.push_back(std::exp(theta * normalized_partition(run, t_index).log));
  }
  return mean_estimate(values);
}

std::vector<std::pair<double, double>> log_partition_series(const PolymerRun& run) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(run.n_steps()));
  for (int i = 1; i <= run.n_steps(); ++i) {
    out.emplace_back(run.time(i), partition_estimate(run, i).log / run.time(i));
  }
  return out;
}

}  // namespace dpolymer
