#include "dpolymer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dpolymer/errors.hpp"

namespace dpolymer {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = compensated_sum(xs) / n;
  if (xs.size() < 2) return out;
  CompensatedSum ss;
  for (double x : xs) {
    const double d = x - out.mean;
    ss.add(d * d);
  }
  out.variance = ss.value() / (n - 1.0);
  out.std_error = std::sqrt(out.variance / n);
  return out;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw ConfigError("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[m];
  return 0.5 * (xs[m - 1] + xs[m]);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("ols_slope needs two equally sized samples of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = compensated_sum(x) / n;
  const double my = compensated_sum(y) / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  if (sxx.value() == 0.0) throw ConfigError("ols_slope: degenerate abscissae");
  return sxy.value() / sxx.value();
}

bool heavy_tail(std::span<const double> xs) {
  if (xs.empty()) return false;
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(1, sorted.size() / 100);
  const double total = compensated_sum(sorted);
  if (total <= 0.0) return false;
  const double head = compensated_sum(std::span<const double>(sorted).first(top));
  return head > 0.5 * total;
}

double log_mean_exp(std::span<const double> xs) {
  if (xs.empty()) throw ConfigError("log_mean_exp of empty sample");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value() / static_cast<double>(xs.size()));
}

}  // namespace dpolymer
