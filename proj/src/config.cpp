#include "dpolymer/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "dpolymer/errors.hpp"

namespace dpolymer {

namespace {

struct Location {
  int line = 0;
  int column = 0;
};

[[noreturn]] void fail(Location at, const std::string& what) {
  throw ConfigError("line " + std::to_string(at.line) + ", column " +
                    std::to_string(at.column) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view token, Location at, std::string_view key) {
  T value{};
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    fail(at, "invalid value '" + std::string(token) + "' for " + std::string(key));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) fail(at, std::string(key) + " must be finite");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(std::string_view value, Location at, std::string_view key) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - start));
    out.push_back(parse_number<T>(item, at, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct KernelFields {
  std::optional<KernelFamily> family;
  double sigma2 = 1.0;
  double length_scale = 1.0;
  double lambda = 1.0;
  int dim = 1;
};

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_real(xs[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  KernelFields kf;
  std::optional<double> theta;
  Location theta_at;
  bool have_name = false;

  using Handler = std::function<void(std::string_view, Location)>;
  auto positive_real = [](double& slot, std::string_view key) -> Handler {
    return [&slot, key](std::string_view v, Location at) {
      slot = parse_number<double>(v, at, key);
      if (!(slot > 0.0)) fail(at, std::string(key) + " must be > 0");
    };
  };
  auto int_at_least = [](int& slot, int lo, std::string_view key) -> Handler {
    return [&slot, lo, key](std::string_view v, Location at) {
      slot = parse_number<int>(v, at, key);
      if (slot < lo) fail(at, std::string(key) + " must be >= " + std::to_string(lo));
    };
  };
  auto real_list = [](std::vector<double>& slot, std::string_view key, bool positive) -> Handler {
    return [&slot, key, positive](std::string_view v, Location at) {
      slot = parse_list<double>(v, at, key);
      for (double x : slot) {
        if (positive ? !(x > 0.0) : !(x >= 0.0)) {
          fail(at, std::string(key) + (positive ? " values must be > 0" : " values must be >= 0"));
        }
      }
    };
  };

  const std::map<std::string_view, Handler> handlers = {
      {"kernel.family",
       [&](std::string_view v, Location at) {
         try {
           kf.family = parse_kernel_family(v);
         } catch (const ConfigError& e) {
           fail(at, e.what());
         }
         if (*kf.family == KernelFamily::user_radial) {
           fail(at, "kernel.family = user-radial needs a profile function and is only "
                    "available through the library API");
         }
       }},
      {"kernel.sigma2", positive_real(kf.sigma2, "kernel.sigma2")},
      {"kernel.length_scale", positive_real(kf.length_scale, "kernel.length_scale")},
      {"kernel.lambda", positive_real(kf.lambda, "kernel.lambda")},
      {"kernel.dim", int_at_least(kf.dim, 1, "kernel.dim")},
      {"env.mode",
       [&](std::string_view v, Location at) {
         try {
           cfg.env_mode = parse_env_mode(v);
         } catch (const ConfigError& e) {
           fail(at, e.what());
         }
       }},
      {"env.k_features", int_at_least(cfg.k_features, 1, "env.k_features")},
      {"run.beta", real_list(cfg.betas, "run.beta", false)},
      {"run.dt", positive_real(cfg.dt, "run.dt")},
      {"run.n_steps", int_at_least(cfg.n_steps, 1, "run.n_steps")},
      {"run.n_paths", int_at_least(cfg.n_paths, 2, "run.n_paths")},
      {"run.n_envs", int_at_least(cfg.n_envs, 2, "run.n_envs")},
      {"run.seed",
       [&](std::string_view v, Location at) {
         cfg.seed = parse_number<std::uint64_t>(v, at, "run.seed");
       }},
      {"run.checkpoints", real_list(cfg.checkpoints, "run.checkpoints", true)},
      {"run.threads", int_at_least(cfg.threads, 1, "run.threads")},
      {"experiment.name",
       [&](std::string_view v, Location at) {
         if (v.empty()) fail(at, "experiment.name must not be empty");
         cfg.name = std::string(v);
         have_name = true;
       }},
      {"experiment.slope_epsilon", positive_real(cfg.slope_epsilon, "experiment.slope_epsilon")},
      {"experiment.theta",
       [&](std::string_view v, Location at) {
         theta = parse_number<double>(v, at, "experiment.theta");
         theta_at = at;
       }},
      {"experiment.p",
       [&](std::string_view v, Location at) {
         cfg.p = parse_number<double>(v, at, "experiment.p");
         if (!(cfg.p > 1.0)) fail(at, "experiment.p must be > 1");
       }},
      {"experiment.alpha",
       [&](std::string_view v, Location at) {
         cfg.alpha = parse_number<double>(v, at, "experiment.alpha");
         if (!(cfg.alpha > 1.0)) fail(at, "experiment.alpha must be > 1");
       }},
      {"experiment.s_max", positive_real(cfg.s_max, "experiment.s_max")},
      {"experiment.c_grid", real_list(cfg.c_grid, "experiment.c_grid", false)},
      {"experiment.replica_samples",
       int_at_least(cfg.replica_samples, 2, "experiment.replica_samples")},
      {"experiment.probe_paths", int_at_least(cfg.probe_paths, 2, "experiment.probe_paths")},
      {"experiment.probe_horizons",
       real_list(cfg.probe_horizons, "experiment.probe_horizons", true)},
      {"experiment.r_max", positive_real(cfg.r_max, "experiment.r_max")},
      {"experiment.sampler_draws", int_at_least(cfg.sampler_draws, 2, "experiment.sampler_draws")},
      {"experiment.bootstrap", int_at_least(cfg.bootstrap, 2, "experiment.bootstrap")},
      {"experiment.output",
       [&](std::string_view v, Location) { cfg.output = std::string(v); }},
  };

  std::set<std::string_view> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (trim(raw).empty()) continue;
    const auto key_col = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) fail({line_no, key_col}, "expected 'key = value'");
    const auto key = trim(raw.substr(0, eq));
    const auto value = trim(raw.substr(eq + 1));
    const auto value_off = raw.find_first_not_of(" \t", eq + 1);
    const Location value_at{line_no, static_cast<int>(
                                         value_off == std::string_view::npos ? eq + 2
                                                                             : value_off + 1)};

    const auto it = handlers.find(key);
    if (it == handlers.end()) fail({line_no, key_col}, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(it->first).second) {
      fail({line_no, key_col}, "duplicate key '" + std::string(key) + "'");
    }
    if (value.empty() && key != "experiment.output" && key != "experiment.name") {
      fail(value_at, "missing value for " + std::string(key));
    }
    it->second(value, value_at);
  }

  if (!kf.family) throw ConfigError("missing required key kernel.family");
  if (!have_name) throw ConfigError("missing required key experiment.name");
  cfg.kernel = *kf.family == KernelFamily::gaussian
                   ? CovarianceKernel::gaussian(kf.sigma2, kf.length_scale, kf.dim)
                   : CovarianceKernel::cauchy(kf.sigma2, kf.lambda, kf.dim);
  if (theta && std::fabs(*theta - cfg.theta()) > 1e-12 * cfg.theta()) {
    fail(theta_at, "experiment.theta must equal 1/q = 1 - 1/p = " + format_real(cfg.theta()));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const UnsupportedFamily& e) {
    throw UnsupportedFamily(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto line = [&](std::string_view key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  line("kernel.family", std::string(to_string(cfg.kernel.family)));
  line("kernel.sigma2", format_real(cfg.kernel.sigma2));
  if (cfg.kernel.family == KernelFamily::gaussian) {
    line("kernel.length_scale", format_real(cfg.kernel.length_scale));
  } else if (cfg.kernel.family == KernelFamily::cauchy) {
    line("kernel.lambda", format_real(cfg.kernel.lambda));
  }
  line("kernel.dim", std::to_string(cfg.kernel.dim));
  line("env.mode", std::string(to_string(cfg.env_mode)));
  line("env.k_features", std::to_string(cfg.k_features));
  line("run.beta", format_list(cfg.betas));
  line("run.dt", format_real(cfg.dt));
  line("run.n_steps", std::to_string(cfg.n_steps));
  line("run.n_paths", std::to_string(cfg.n_paths));
  line("run.n_envs", std::to_string(cfg.n_envs));
  line("run.seed", std::to_string(cfg.seed));
  line("run.checkpoints", format_list(cfg.checkpoints));
  line("run.threads", std::to_string(cfg.threads));
  line("experiment.name", cfg.name);
  line("experiment.slope_epsilon", format_real(cfg.slope_epsilon));
  line("experiment.p", format_real(cfg.p));
  line("experiment.theta", format_real(cfg.theta()));
  line("experiment.alpha", format_real(cfg.alpha));
  line("experiment.s_max", format_real(cfg.s_max));
  line("experiment.c_grid", format_list(cfg.c_grid));
  line("experiment.replica_samples", std::to_string(cfg.replica_samples));
  line("experiment.probe_paths", std::to_string(cfg.probe_paths));
  line("experiment.probe_horizons", format_list(cfg.probe_horizons));
  line("experiment.r_max", format_real(cfg.r_max));
  line("experiment.sampler_draws", std::to_string(cfg.sampler_draws));
  line("experiment.bootstrap", std::to_string(cfg.bootstrap));
  if (!cfg.output.empty()) line("experiment.output", cfg.output);
  return out.str();
}

}  // namespace dpolymer
