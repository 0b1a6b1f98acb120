#include "dpolymer/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "dpolymer/errors.hpp"
#include "dpolymer/polymer.hpp"
#include "dpolymer/seeding.hpp"
#include "dpolymer/stats.hpp"
#include "dpolymer/theory.hpp"

namespace dpolymer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTimeTol = 1e-9;

// Stream index offsets for replica-side Monte Carlo inside an experiment, so
// they never collide with the per-environment path streams (index < n_envs).
constexpr std::uint64_t kReplicaStreamBase = 1ULL << 62;
constexpr std::uint64_t kProbeStreamBase = 1ULL << 63;

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

int ExperimentConfig::grid_index(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ConfigError("time " + std::to_string(t) + " is not a valid grid time");
  }
  const double n = std::round(t / dt);
  if (std::fabs(n * dt - t) > kTimeTol * std::max(1.0, t) || n > n_steps) {
    throw ConfigError("time " + format_number(t) + " is not on the grid (dt = " +
                      format_number(dt) + ", n_steps = " + std::to_string(n_steps) + ")");
  }
  return static_cast<int>(n);
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment.name must not be empty");
  kernel.validate();
  if (betas.empty()) throw ConfigError("run.beta must list at least one value");
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("run.beta values must be >= 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("run.dt must be > 0");
  if (n_steps < 1) throw ConfigError("run.n_steps must be >= 1");
  if (n_paths < 2) throw ConfigError("run.n_paths must be >= 2");
  if (n_envs < 2) throw ConfigError("run.n_envs must be >= 2");
  if (k_features < 1) throw ConfigError("env.k_features must be >= 1");
  if (env_mode == EnvMode::spectral && !kernel.has_spectral_sampler()) {
    throw UnsupportedFamily("env.mode = spectral needs a kernel with a spectral sampler");
  }
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
  if (checkpoints.empty()) throw ConfigError("run.checkpoints must not be empty");
  for (double t : checkpoints) {
    if (!(t > 0.0)) throw ConfigError("run.checkpoints must be > 0");
    grid_index(t);
  }
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end()) {
    throw ConfigError("run.checkpoints must be strictly increasing");
  }
  if (!(slope_epsilon > 0.0)) throw ConfigError("experiment.slope_epsilon must be > 0");
  if (!(p > 1.0)) throw ConfigError("experiment.p must be > 1");
  if (!(alpha > 1.0)) throw ConfigError("experiment.alpha must be > 1");
  if (!(s_max > 10.0)) throw ConfigError("experiment.s_max must exceed 10");
  for (double c : c_grid) {
    if (!(c >= 0.0)) throw ConfigError("experiment.c_grid values must be >= 0");
  }
  if (replica_samples < 2) throw ConfigError("experiment.replica_samples must be >= 2");
  if (probe_paths < 2) throw ConfigError("experiment.probe_paths must be >= 2");
  if (!(r_max > 0.0)) throw ConfigError("experiment.r_max must be > 0");
  if (sampler_draws < 2) throw ConfigError("experiment.sampler_draws must be >= 2");
  if (bootstrap < 2) throw ConfigError("experiment.bootstrap must be >= 2");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::info: return "info";
  }
  return "info";
}

Verdict verdict_against_target(double estimate, double std_error, double target) {
  return std::fabs(estimate - target) <= 3.0 * std_error ? Verdict::pass : Verdict::fail;
}

Verdict verdict_against_bound(double estimate, double std_error, double bound) {
  return estimate <= bound + 3.0 * std_error ? Verdict::pass : Verdict::fail;
}

// ---------------------------------------------------------------------------
// Campaign

std::size_t Campaign::time_slot(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::fabs(times[i] - t) <= kTimeTol * std::max(1.0, t)) return i;
  }
  throw ConfigError("campaign has no statistics at t = " + format_number(t));
}

std::vector<double> Campaign::column(
    std::vector<std::vector<double>> EnvironmentStats::*field, std::size_t beta_index,
    std::size_t slot) const {
  std::vector<double> out;
  out.reserve(envs.size());
  for (const auto& e : envs) {
    const auto& table = e.*field;
    if (beta_index >= table.size() || slot >= table[beta_index].size()) {
      throw ConfigError("campaign did not record the requested statistic");
    }
    out.push_back(table[beta_index][slot]);
  }
  return out;
}

namespace {

EnvironmentStats simulate_environment(const ExperimentConfig& cfg,
                                      const CampaignOptions& opts,
                                      std::span<const int> indices, std::uint64_t e) {
  auto env = std::make_shared<const EnvironmentRealization>(
      cfg.kernel, cfg.env_mode, cfg.n_steps, cfg.dt, cfg.k_features,
      derive_seed(cfg.seed, Purpose::environment, e));
  Rng rng = make_rng(cfg.seed, Purpose::paths, e);
  auto ens = std::make_shared<const PathEnsemble>(
      sample_paths(cfg.n_paths, cfg.n_steps, cfg.dt, cfg.kernel.dim, {}, rng));
  const PolymerRun base = accumulate_hamiltonian(ens, env, 0.0);

  EnvironmentStats out;
  const std::size_t nb = cfg.betas.size();
  out.log_z.assign(nb, {});
  if (opts.jackknife) out.log_z_jackknife.assign(nb, {});
  if (opts.pair_partition) out.log_pair_z.assign(nb, {});
  if (opts.overlap) out.overlap_integral.assign(nb, {});
  for (std::size_t b = 0; b < nb; ++b) {
    const PolymerRun run = base.with_beta(cfg.betas[b]);
    std::vector<double> series;
    if (opts.overlap) series = overlap_integral_series(run);
    for (int i : indices) {
      out.log_z[b].push_back(partition_estimate(run, i).log);
      if (opts.jackknife) out.log_z_jackknife[b].push_back(jackknife_log_partition(run, i));
      if (opts.pair_partition) out.log_pair_z[b].push_back(log_pair_partition(run, i));
      if (opts.overlap) out.overlap_integral[b].push_back(series[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

}  // namespace

Campaign run_campaign(const ExperimentConfig& cfg, const CampaignOptions& opts) {
  cfg.validate();
  Campaign c;
  c.cfg = cfg;
  c.times = cfg.checkpoints;
  for (double t : opts.extra_times) {
    cfg.grid_index(t);
    c.times.push_back(t);
  }
  std::sort(c.times.begin(), c.times.end());
  c.times.erase(std::unique(c.times.begin(), c.times.end(),
                            [](double a, double b) {
                              return std::fabs(a - b) <= kTimeTol * std::max(1.0, a);
                            }),
                c.times.end());
  std::vector<int> indices;
  for (double t : c.times) indices.push_back(cfg.grid_index(t));

  const auto n_envs = static_cast<std::size_t>(cfg.n_envs);
  c.envs.resize(n_envs);
  std::vector<std::exception_ptr> errors(n_envs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t e = next++; e < n_envs; e = next++) {
      try {
        c.envs[e] = simulate_environment(cfg, opts, indices, e);
      } catch (...) {
        errors[e] = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n_envs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Row builders

namespace {

SummaryRecord make_record(const Campaign& c, std::string experiment, double beta, double t) {
  SummaryRecord r;
  r.experiment = std::move(experiment);
  r.beta = beta;
  r.t = t;
  r.n_envs = c.cfg.n_envs;
  r.n_paths = c.cfg.n_paths;
  r.seed = c.cfg.seed;
  return r;
}

double q0_of(const Campaign& c) { return c.cfg.kernel.sigma2; }

std::vector<double> exp_of(std::vector<double> xs, double shift = 0.0, double scale = 1.0) {
  for (double& x : xs) x = std::exp(scale * (x - shift));
  return xs;
}

std::vector<double> per_env(const Campaign& c, std::size_t b, double t,
                            std::vector<std::vector<double>> EnvironmentStats::*field) {
  return c.column(field, b, c.time_slot(t));
}

std::vector<double> log_w_column(const Campaign& c, std::size_t b, double t) {
  auto xs = per_env(c, b, t, &EnvironmentStats::log_z);
  const double beta = c.cfg.betas[b];
  const double shift = 0.5 * beta * beta * q0_of(c) * t;
  for (double& x : xs) x -= shift;
  return xs;
}

std::vector<std::size_t> beta_order(const ExperimentConfig& cfg) {
  std::vector<std::size_t> order(cfg.betas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.betas[a] < cfg.betas[b]; });
  return order;
}

// Fits log P(D < -u) ~ a - K u^2 to the empirical lower tail of the
// centred log partition function D and returns K. Empty when the tail has
// fewer than three distinct nonzero levels.
std::optional<double> lower_tail_constant(std::vector<double> d) {
  std::sort(d.begin(), d.end());
  const double n = static_cast<double>(d.size());
  std::vector<double> u2, log_f;
  for (double level : {0.5, 0.25, 0.1, 0.05, 0.02}) {
    const auto k = static_cast<std::size_t>(std::floor(level * n));
    if (k < 1) continue;
    const double u = -d[k];
    if (!(u > 0.0)) continue;
    std::size_t below = 0;
    while (below < d.size() && d[below] < -u) ++below;
    if (below == 0) continue;
    if (!u2.empty() && u * u <= u2.back()) continue;
    u2.push_back(u * u);
    log_f.push_back(std::log(static_cast<double>(below) / n));
  }
  if (u2.size() < 3) return std::nullopt;
  return -ols_slope(u2, log_f);
}

}  // namespace

std::vector<SummaryRecord> annealed_records(const Campaign& c) {
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < c.cfg.betas.size(); ++b) {
    const double beta = c.cfg.betas[b];
    for (double t : c.cfg.checkpoints) {
      const auto est = mean_estimate(exp_of(per_env(c, b, t, &EnvironmentStats::log_z)));
      auto r = make_record(c, "annealed", beta, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.target = annealed_mean(beta, q0_of(c), t);
      r.verdict = verdict_against_target(r.estimate, r.std_error, *r.target);
      out.push_back(r);
    }
  }
  return out;
}

std::vector<SummaryRecord> martingale_records(const Campaign& c) {
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < c.cfg.betas.size(); ++b) {
    const double beta = c.cfg.betas[b];
    for (double t : c.cfg.checkpoints) {
      const auto w = exp_of(log_w_column(c, b, t));
      const auto est = mean_estimate(w);
      auto r = make_record(c, "martingale", beta, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.target = 1.0;
      r.verdict = verdict_against_target(r.estimate, r.std_error, 1.0);
      out.push_back(r);

      auto med = make_record(c, "martingale:median", beta, t);
      med.estimate = median(w);
      out.push_back(med);

      auto var = make_record(c, "martingale:variance", beta, t);
      var.estimate = est.variance;
      out.push_back(var);
    }
  }
  return out;
}

std::vector<SummaryRecord> free_energy_records(const Campaign& c) {
  const auto& cfg = c.cfg;
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    const double bound = free_energy_upper_bound(beta, q0_of(c));
    for (double t : cfg.checkpoints) {
      auto plug = per_env(c, b, t, &EnvironmentStats::log_z);
      for (double& x : plug) x /= t;
      const auto est = mean_estimate(plug);
      auto r = make_record(c, "free-energy:bound", beta, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.bound = bound;
      r.verdict = verdict_against_bound(r.estimate, r.std_error, bound);
      out.push_back(r);

      auto jk = per_env(c, b, t, &EnvironmentStats::log_z_jackknife);
      for (double& x : jk) x /= t;
      const auto jest = mean_estimate(jk);
      auto rj = make_record(c, "free-energy:jackknife", beta, t);
      rj.estimate = jest.mean;
      rj.std_error = jest.std_error;
      rj.bound = bound;
      out.push_back(rj);
    }
    // Superadditivity on consecutive checkpoints, bias-corrected log Z.
    for (std::size_t k = 0; k + 1 < cfg.checkpoints.size(); ++k) {
      const double ta = cfg.checkpoints[k];
      const double tb = cfg.checkpoints[k + 1];
      const double h = tb - ta;
      const auto la = per_env(c, b, ta, &EnvironmentStats::log_z_jackknife);
      const auto lb = per_env(c, b, tb, &EnvironmentStats::log_z_jackknife);
      const auto lh = per_env(c, b, h, &EnvironmentStats::log_z_jackknife);
      std::vector<double> deficit(la.size());
      for (std::size_t e = 0; e < la.size(); ++e) deficit[e] = la[e] + lh[e] - lb[e];
      const auto est = mean_estimate(deficit);
      auto r = make_record(c, "free-energy:superadditivity", beta, tb);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.bound = 0.0;
      r.verdict = verdict_against_bound(r.estimate, r.std_error, 0.0);
      out.push_back(r);
    }
  }

  // Convexity and monotonicity in beta, paired across environments.
  const auto order = beta_order(cfg);
  for (double t : cfg.checkpoints) {
    std::vector<std::vector<double>> p;
    for (std::size_t b : order) {
      auto col = per_env(c, b, t, &EnvironmentStats::log_z);
      for (double& x : col) x /= t;
      p.push_back(std::move(col));
    }
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const double b0 = cfg.betas[order[k]];
      const double b1 = cfg.betas[order[k + 1]];
      if (b1 == b0) continue;
      std::vector<double> drop(p[k].size());
      for (std::size_t e = 0; e < drop.size(); ++e) drop[e] = p[k][e] - p[k + 1][e];
      const auto est = mean_estimate(drop);
      auto r = make_record(c, "free-energy:monotonicity", b1, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.bound = 0.0;
      r.verdict = verdict_against_bound(r.estimate, r.std_error, 0.0);
      out.push_back(r);
    }
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
      const double bl = cfg.betas[order[k - 1]];
      const double bm = cfg.betas[order[k]];
      const double br = cfg.betas[order[k + 1]];
      if (bl == bm || bm == br) continue;
      std::vector<double> concavity(p[k].size());
      for (std::size_t e = 0; e < concavity.size(); ++e) {
        const double right = (p[k + 1][e] - p[k][e]) / (br - bm);
        const double left = (p[k][e] - p[k - 1][e]) / (bm - bl);
        concavity[e] = -(right - left);
      }
      const auto est = mean_estimate(concavity);
      auto r = make_record(c, "free-energy:convexity", bm, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.bound = 0.0;
      r.verdict = verdict_against_bound(r.estimate, r.std_error, 0.0);
      out.push_back(r);
    }
  }
  return out;
}

std::vector<SummaryRecord> concentration_records(const Campaign& c) {
  const auto& cfg = c.cfg;
  if (cfg.n_paths < 256) {
    throw ConfigError(
        "concentration check needs run.n_paths >= 256: path-sampling noise in Z^ is "
        "absent from the bound");
  }
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    for (double t : cfg.checkpoints) {
      auto u = per_env(c, b, t, &EnvironmentStats::log_z);
      for (double& x : u) x /= t;
      const double centre = mean_estimate(u).mean;
      for (double cval : cfg.c_grid) {
        std::size_t exceed = 0;
        for (double x : u) exceed += std::fabs(x - centre) > cval ? 1 : 0;
        const double n = static_cast<double>(u.size());
        const double f = static_cast<double>(exceed) / n;
        auto r = make_record(c, "concentration:c=" + format_number(cval), beta, t);
        r.estimate = f;
        r.std_error = std::sqrt(f * (1.0 - f) / n);
        // log Z is identically 0 at beta = 0; the bound's limit there is 0.
        r.bound = beta > 0.0 ? concentration_bound(cval, t, beta, q0_of(c)) : 0.0;
        r.verdict = verdict_against_bound(r.estimate, r.std_error, *r.bound);
        out.push_back(r);
      }
      if (beta > 0.0) {
        if (auto fit = lower_tail_constant(log_w_column(c, b, t))) {
          auto r = make_record(c, "concentration:lower-tail-constant", beta, t);
          r.estimate = *fit;
          out.push_back(r);
        }
      }
    }
  }
  return out;
}

std::vector<SummaryRecord> second_moment_records(const Campaign& c) {
  const auto& cfg = c.cfg;
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    for (std::size_t k = 0; k < cfg.checkpoints.size(); ++k) {
      const double t = cfg.checkpoints[k];
      const auto env_side =
          mean_estimate(exp_of(per_env(c, b, t, &EnvironmentStats::log_pair_z)));
      Rng rng = make_rng(cfg.seed, Purpose::paths,
                         kReplicaStreamBase + b * 4096 + k);
      const auto replica =
          annealed_second_moment(cfg.kernel, beta, t, cfg.dt, cfg.replica_samples, rng);

      auto r = make_record(c, "second-moment", beta, t);
      r.estimate = env_side.mean;
      r.std_error = std::hypot(env_side.std_error, replica.std_error);
      r.target = replica.value;
      r.verdict = verdict_against_target(r.estimate, r.std_error, replica.value);
      out.push_back(r);

      auto rr = make_record(c, "second-moment:replica", beta, t);
      rr.estimate = replica.value;
      rr.std_error = replica.std_error;
      out.push_back(rr);

      auto flag = make_record(c, "second-moment:replica-heavy-tail", beta, t);
      flag.estimate = replica.heavy_tail ? 1.0 : 0.0;
      out.push_back(flag);
    }
  }
  return out;
}

std::vector<SummaryRecord> fractional_records(const Campaign& c) {
  const auto& cfg = c.cfg;
  const double theta = cfg.theta();
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    DisorderCriterionSpec spec{cfg.kernel, beta, cfg.p, cfg.alpha, cfg.s_max};
    const auto h1 = disorder_criterion_h1(spec);
    std::vector<std::vector<double>> moments;
    for (double t : cfg.checkpoints) {
      const auto logw = log_w_column(c, b, t);
      const auto wt = exp_of(logw, 0.0, theta);
      const auto est = mean_estimate(wt);
      const auto bound = fractional_moment_bound(spec, h1, t);

      auto r = make_record(c, "fractional", beta, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.bound = bound.value;
      r.verdict = verdict_against_bound(r.estimate, r.std_error, bound.value);
      out.push_back(r);

      auto lb = make_record(c, "fractional:log-bound", beta, t);
      lb.estimate = bound.log_value;
      out.push_back(lb);

      const auto w1 = mean_estimate(exp_of(logw));
      auto m = make_record(c, "fractional:theta=1", beta, t);
      m.estimate = w1.mean;
      m.std_error = w1.std_error;
      m.target = 1.0;
      out.push_back(m);

      moments.push_back(wt);
    }
    for (std::size_t k = 0; k + 1 < moments.size(); ++k) {
      std::vector<double> diff(moments[k].size());
      for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = moments[k + 1][e] - moments[k][e];
      const auto est = mean_estimate(diff);
      auto r = make_record(c, "fractional:change", beta, cfg.checkpoints[k + 1]);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      out.push_back(r);
    }
    if (moments.size() > 2) {
      std::vector<double> diff(moments.front().size());
      for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = moments.back()[e] - moments.front()[e];
      const auto est = mean_estimate(diff);
      auto r = make_record(c, "fractional:total-change", beta, cfg.checkpoints.back());
      r.estimate = est.mean;
      r.std_error = est.std_error;
      out.push_back(r);
    }
  }
  return out;
}

RegimeDiagnosis diagnose_regime(const Campaign& c, std::size_t b) {
  const auto& cfg = c.cfg;
  if (cfg.checkpoints.size() < 2) {
    throw ConfigError("regime experiment needs at least 2 checkpoints");
  }
  const double beta = cfg.betas.at(b);
  const std::size_t n_tail = std::max<std::size_t>(2, (cfg.checkpoints.size() + 1) / 2);
  const std::vector<double> tail(cfg.checkpoints.end() - static_cast<std::ptrdiff_t>(n_tail),
                                 cfg.checkpoints.end());

  std::vector<std::vector<double>> logw;
  for (double t : tail) logw.push_back(log_w_column(c, b, t));
  const std::size_t n_env = logw.front().size();

  auto slope_of = [&](const std::vector<std::size_t>* pick) {
    std::vector<double> means;
    for (const auto& col : logw) {
      CompensatedSum s;
      if (pick) {
        for (std::size_t e : *pick) s.add(col[e]);
      } else {
        for (double x : col) s.add(x);
      }
      means.push_back(s.value() / static_cast<double>(n_env));
    }
    return ols_slope(tail, means);
  };

  RegimeDiagnosis out;
  out.slope = slope_of(nullptr);
  {
    Rng rng = make_rng(cfg.seed, Purpose::resampling, b);
    std::uniform_int_distribution<std::size_t> pick_env(0, n_env - 1);
    std::vector<double> slopes;
    std::vector<std::size_t> pick(n_env);
    for (int r = 0; r < cfg.bootstrap; ++r) {
      for (auto& e : pick) e = pick_env(rng);
      slopes.push_back(slope_of(&pick));
    }
    out.slope_std_error = std::sqrt(mean_estimate(slopes).variance);
  }

  const double t_prev = cfg.checkpoints[cfg.checkpoints.size() - 2];
  const double t_last = cfg.checkpoints.back();
  const double a_prev =
      beta * beta * mean_estimate(per_env(c, b, t_prev, &EnvironmentStats::overlap_integral)).mean;
  const double a_last =
      beta * beta * mean_estimate(per_env(c, b, t_last, &EnvironmentStats::overlap_integral)).mean;
  if (a_prev > 0.0 && a_last > 0.0) {
    out.overlap_relative_growth = (a_last - a_prev) / a_prev;
    out.overlap_growth_exponent = std::log(a_last / a_prev) / std::log(t_last / t_prev);
  } else if (a_last > 0.0) {
    out.overlap_relative_growth = std::numeric_limits<double>::infinity();
    out.overlap_growth_exponent = std::numeric_limits<double>::infinity();
  }

  const double half_width = 3.0 * out.slope_std_error;
  const bool overlap_grows = out.overlap_growth_exponent >= 0.5;
  const bool overlap_saturates = out.overlap_relative_growth < 0.10;
  if (out.slope + half_width < -cfg.slope_epsilon && overlap_grows) {
    out.label = kStrongConsistent;
  } else if (out.slope - half_width <= 0.0 && 0.0 <= out.slope + half_width &&
             half_width < cfg.slope_epsilon && overlap_saturates) {
    out.label = kWeakConsistent;
  } else {
    out.label = kInconclusive;
  }
  return out;
}

std::vector<SummaryRecord> regime_records(const Campaign& c) {
  const auto& cfg = c.cfg;
  std::vector<SummaryRecord> out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    for (double t : cfg.checkpoints) {
      const auto est = mean_estimate(log_w_column(c, b, t));
      auto r = make_record(c, "regime:log-w", beta, t);
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.heuristic = true;
      out.push_back(r);

      auto a = per_env(c, b, t, &EnvironmentStats::overlap_integral);
      for (double& x : a) x *= beta * beta;
      const auto aest = mean_estimate(a);
      auto ra = make_record(c, "regime:overlap-integral", beta, t);
      ra.estimate = aest.mean;
      ra.std_error = aest.std_error;
      ra.heuristic = true;
      out.push_back(ra);
    }
    const auto diag = diagnose_regime(c, b);
    const double t_last = cfg.checkpoints.back();

    auto slope = make_record(c, "regime:slope", beta, t_last);
    slope.estimate = diag.slope;
    slope.std_error = diag.slope_std_error;
    slope.bound = -cfg.slope_epsilon;
    slope.heuristic = true;
    out.push_back(slope);

    auto growth = make_record(c, "regime:overlap-growth", beta, t_last);
    growth.estimate = diag.overlap_relative_growth;
    growth.bound = 0.10;
    growth.heuristic = true;
    out.push_back(growth);

    auto exponent = make_record(c, "regime:overlap-exponent", beta, t_last);
    exponent.estimate = diag.overlap_growth_exponent;
    exponent.bound = 0.5;
    exponent.heuristic = true;
    out.push_back(exponent);

    auto label = make_record(c, "regime:" + std::string(diag.label), beta, t_last);
    label.estimate = diag.slope;
    label.std_error = diag.slope_std_error;
    label.heuristic = true;
    out.push_back(label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Top-level experiments

namespace {

std::vector<double> checkpoint_differences(const ExperimentConfig& cfg) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < cfg.checkpoints.size(); ++k) {
    out.push_back(cfg.checkpoints[k + 1] - cfg.checkpoints[k]);
  }
  return out;
}

}  // namespace

std::vector<SummaryRecord> run_annealed_check(const ExperimentConfig& cfg) {
  return annealed_records(run_campaign(cfg, {}));
}

std::vector<SummaryRecord> run_martingale_check(const ExperimentConfig& cfg) {
  return martingale_records(run_campaign(cfg, {}));
}

std::vector<SummaryRecord> run_free_energy_scan(const ExperimentConfig& cfg) {
  CampaignOptions opts;
  opts.jackknife = true;
  opts.extra_times = checkpoint_differences(cfg);
  return free_energy_records(run_campaign(cfg, opts));
}

std::vector<SummaryRecord> run_concentration_check(const ExperimentConfig& cfg) {
  if (cfg.n_paths < 256) {
    throw ConfigError("concentration check needs run.n_paths >= 256");
  }
  return concentration_records(run_campaign(cfg, {}));
}

std::vector<SummaryRecord> run_regime_experiment(const ExperimentConfig& cfg) {
  CampaignOptions opts;
  opts.overlap = true;
  return regime_records(run_campaign(cfg, opts));
}

std::vector<SummaryRecord> run_fractional_moment_check(const ExperimentConfig& cfg) {
  return fractional_records(run_campaign(cfg, {}));
}

std::vector<SummaryRecord> run_second_moment_check(const ExperimentConfig& cfg) {
  CampaignOptions opts;
  opts.pair_partition = true;
  return second_moment_records(run_campaign(cfg, opts));
}

namespace {

// Five probe points spread along the first axis.
std::vector<double> sampler_points(int dim) {
  const double offsets[5] = {0.0, 0.5, 1.0, 2.0, 3.0};
  std::vector<double> pts(5 * static_cast<std::size_t>(dim), 0.0);
  for (std::size_t a = 0; a < 5; ++a) pts[a * static_cast<std::size_t>(dim)] = offsets[a];
  return pts;
}

SummaryRecord sampler_record(const ExperimentConfig& cfg, std::string name) {
  SummaryRecord r;
  r.experiment = std::move(name);
  r.beta = kNaN;
  r.t = kNaN;
  r.n_envs = cfg.sampler_draws;
  r.n_paths = 0;
  r.seed = cfg.seed;
  return r;
}

void covariance_rows(const ExperimentConfig& cfg, std::string_view mode,
                     const std::vector<std::vector<double>>& draws,  // [draw][point]
                     const std::vector<double>& pts,
                     std::vector<SummaryRecord>& out) {
  const auto d = static_cast<std::size_t>(cfg.kernel.dim);
  const std::size_t m = draws.front().size();
  std::vector<double> prod(draws.size());
  std::vector<double> diff(d);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      for (std::size_t s = 0; s < draws.size(); ++s) prod[s] = draws[s][a] * draws[s][b];
      const auto est = mean_estimate(prod);
      for (std::size_t c = 0; c < d; ++c) diff[c] = pts[a * d + c] - pts[b * d + c];
      auto r = sampler_record(cfg, "sampler:cov-" + std::string(mode) + ":" +
                                       std::to_string(a) + "-" + std::to_string(b));
      r.estimate = est.mean;
      r.std_error = est.std_error;
      r.target = cfg.dt * eval_kernel(cfg.kernel, diff);
      r.verdict = verdict_against_target(r.estimate, r.std_error, *r.target);
      out.push_back(r);
    }
  }
}

void independence_row(const ExperimentConfig& cfg, std::string_view mode,
                      const std::vector<double>& first, const std::vector<double>& second,
                      std::vector<SummaryRecord>& out) {
  std::vector<double> prod(first.size());
  for (std::size_t s = 0; s < first.size(); ++s) prod[s] = first[s] * second[s];
  const auto est = mean_estimate(prod);
  auto r = sampler_record(cfg, "sampler:step-correlation-" + std::string(mode));
  const double var = cfg.dt * cfg.kernel.sigma2;
  r.estimate = est.mean / var;
  r.std_error = est.std_error / var;
  r.target = 0.0;
  r.verdict = verdict_against_target(r.estimate, r.std_error, 0.0);
  out.push_back(r);
}

}  // namespace

std::vector<SummaryRecord> run_sampler_validation(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SummaryRecord> out;
  const auto d = static_cast<std::size_t>(cfg.kernel.dim);
  const auto draws = static_cast<std::size_t>(cfg.sampler_draws);
  const auto pts = sampler_points(cfg.kernel.dim);

  // Degenerate point set: coincident points must receive identical values.
  {
    const EnvironmentRealization env(cfg.kernel, EnvMode::exact_cholesky, 1, cfg.dt, 1,
                                     derive_seed(cfg.seed, Purpose::environment, 0));
    std::vector<double> twin(2 * d, 0.25);
    const auto y = env.increments_at(0, twin);
    auto r = sampler_record(cfg, "sampler:degenerate");
    r.n_envs = 1;
    r.estimate = std::fabs(y[0] - y[1]);
    r.target = 0.0;
    r.verdict = verdict_against_target(r.estimate, 0.0, 0.0);
    out.push_back(r);
  }

  // Exact mode: every step of one realization is an independent draw.
  {
    const EnvironmentRealization env(cfg.kernel, EnvMode::exact_cholesky,
                                     static_cast<int>(draws) + 1, cfg.dt, 1,
                                     derive_seed(cfg.seed, Purpose::environment, 0));
    std::vector<std::vector<double>> samples(draws);
    for (std::size_t s = 0; s < draws; ++s) samples[s] = env.increments_at(static_cast<int>(s), pts);
    covariance_rows(cfg, "exact", samples, pts, out);
    std::vector<double> first(draws), second(draws);
    for (std::size_t s = 0; s < draws; ++s) {
      first[s] = samples[s][0];
      second[s] = s + 1 < draws ? samples[s + 1][0]
                                : env.increments_at(static_cast<int>(draws), pts)[0];
    }
    independence_row(cfg, "exact", first, second, out);
  }

  // Spectral mode: unconditional covariance needs fresh frequencies per draw.
  if (cfg.kernel.has_spectral_sampler()) {
    std::vector<std::vector<double>> samples(draws);
    std::vector<double> first(draws), second(draws);
    for (std::size_t s = 0; s < draws; ++s) {
      const EnvironmentRealization env(cfg.kernel, EnvMode::spectral, 2, cfg.dt,
                                       cfg.k_features,
                                       derive_seed(cfg.seed, Purpose::environment, s + 1));
      samples[s] = env.increments_at(0, pts);
      first[s] = samples[s][0];
      second[s] = env.increments_at(1, std::span<const double>(pts).first(d))[0];
    }
    covariance_rows(cfg, "spectral", samples, pts, out);
    independence_row(cfg, "spectral", first, second, out);

    // Feature-count scaling of the covariance error over 100 realizations.
    constexpr int kSeeds = 100;
    constexpr int kPairs = 50;
    std::vector<PointPair> pairs;
    for (int i = 0; i < kPairs; ++i) {
      PointPair pp{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
      pp.y[0] = 2.0 * (i + 1) / kPairs;
      pairs.push_back(std::move(pp));
    }
    std::vector<double> sq_small, sq_large;
    double worst_small = 0.0;
    for (int r = 0; r < kSeeds; ++r) {
      const auto base = static_cast<std::uint64_t>(draws) + 1;
      const EnvironmentRealization small(
          cfg.kernel, EnvMode::spectral, 1, cfg.dt, cfg.k_features,
          derive_seed(cfg.seed, Purpose::environment, base + static_cast<std::uint64_t>(r)));
      const EnvironmentRealization large(
          cfg.kernel, EnvMode::spectral, 1, cfg.dt, 2 * cfg.k_features,
          derive_seed(cfg.seed, Purpose::environment,
                      base + kSeeds + static_cast<std::uint64_t>(r)));
      const double es = spectral_covariance_error(small, pairs);
      const double el = spectral_covariance_error(large, pairs);
      worst_small = std::max(worst_small, es);
      sq_small.push_back(es * es);
      sq_large.push_back(el * el);
    }
    const auto ms = mean_estimate(sq_small);
    const auto ml = mean_estimate(sq_large);
    auto bound = sampler_record(cfg, "sampler:spectral-error-bound");
    bound.n_envs = kSeeds;
    bound.estimate = worst_small;
    bound.bound = 5.0 * cfg.kernel.sigma2 / std::sqrt(static_cast<double>(cfg.k_features));
    bound.verdict = verdict_against_bound(bound.estimate, 0.0, *bound.bound);
    out.push_back(bound);

    auto ratio = sampler_record(cfg, "sampler:k-doubling-rms-ratio");
    ratio.n_envs = kSeeds;
    ratio.estimate = std::sqrt(ms.mean / ml.mean);
    ratio.std_error = 0.5 * ratio.estimate *
                      std::hypot(ms.std_error / ms.mean, ml.std_error / ml.mean);
    ratio.target = std::sqrt(2.0);
    ratio.verdict = verdict_against_target(ratio.estimate, ratio.std_error, *ratio.target);
    out.push_back(ratio);
  }
  return out;
}

std::vector<SummaryRecord> run_theory(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SummaryRecord> out;
  const double q0 = cfg.kernel.sigma2;
  auto rec = [&](std::string name, double beta, double t, double value) {
    SummaryRecord r;
    r.experiment = std::move(name);
    r.beta = beta;
    r.t = t;
    r.estimate = value;
    r.seed = cfg.seed;
    return r;
  };

  {
    const auto tail = radial_tail_integral(cfg.kernel, cfg.r_max, 1e-10);
    out.push_back(rec("theory:radial-tail=" + std::string(to_string(tail.verdict)), kNaN,
                      kNaN, tail.value));
    out.push_back(rec("theory:radial-tail-exponent", kNaN, kNaN, tail.tail_exponent));
  }

  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const double beta = cfg.betas[b];
    out.push_back(rec("theory:free-energy-bound", beta, kNaN, free_energy_upper_bound(beta, q0)));
    out.push_back(rec("theory:kappa", beta, kNaN, kappa(beta, q0, cfg.p)));
    for (double t : cfg.checkpoints) {
      out.push_back(rec("theory:annealed-mean", beta, t, annealed_mean(beta, q0, t)));
      if (beta > 0.0) {
        for (double c : cfg.c_grid) {
          out.push_back(rec("theory:concentration-bound:c=" + format_number(c), beta, t,
                            concentration_bound(c, t, beta, q0)));
        }
      }
    }

    DisorderCriterionSpec spec{cfg.kernel, beta, cfg.p, cfg.alpha, cfg.s_max};
    const auto h1 = disorder_criterion_h1(spec);
    out.push_back(rec("theory:h1:v=" + std::string(to_string(h1.v_verdict)), beta, kNaN,
                      h1.v_integral));
    out.push_back(rec("theory:h1:v-exponent", beta, kNaN, h1.v_exponent));
    out.push_back(rec("theory:h1:log-w=" + std::string(to_string(h1.w_verdict)), beta, kNaN,
                      h1.log_w_integral));
    out.push_back(rec("theory:h1:w-exponent", beta, kNaN, h1.w_exponent));
    out.push_back(rec(std::string("theory:h1:criterion=") +
                          (h1.satisfied() ? "satisfied" : "not-satisfied"),
                      beta, kNaN, h1.satisfied() ? 1.0 : 0.0));
    if (h1.w_verdict == TailVerdict::finite) {
      for (double t : cfg.checkpoints) {
        const auto fb = fractional_moment_bound(spec, h1, t);
        out.push_back(rec("theory:fractional-bound", beta, t, fb.value));
        out.push_back(rec("theory:fractional-log-bound", beta, t, fb.log_value));
      }
    }

    Rng rng = make_rng(cfg.seed, Purpose::paths, kProbeStreamBase + b);
    const auto probe = hypothesis_h_probe(cfg.kernel, beta, cfg.probe_horizons, cfg.dt,
                                          cfg.probe_paths, rng);
    for (const auto& row : probe) {
      auto r = rec("theory:h-probe", beta, row.horizon, row.estimate);
      r.std_error = row.std_error;
      r.n_paths = cfg.probe_paths;
      out.push_back(r);
      if (row.tail_flag) out.push_back(rec("theory:h-probe-heavy-tail", beta, row.horizon, 1.0));
    }
    if (probe.size() >= 2) {
      auto r = rec("theory:h-probe-saturation", beta, probe.back().horizon,
                   h_probe_saturation(probe));
      r.bound = 0.05;
      r.n_paths = cfg.probe_paths;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace dpolymer
