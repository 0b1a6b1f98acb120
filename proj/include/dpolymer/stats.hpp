#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpolymer {

/// Neumaier-compensated running sum. Order of `add` calls is part of the
/// result, so callers feed values in a fixed index order.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n); 0 when n < 2
  double variance = 0.0;   // unbiased sample variance
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> xs);

double median(std::vector<double> xs);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// True when the largest 1% of the (nonnegative) samples carry more than
/// half of their total. Always uses at least one sample.
bool heavy_tail(std::span<const double> xs);

/// log(mean(exp(xs))) with a max shift; compensated inner sum.
double log_mean_exp(std::span<const double> xs);

}  // namespace dpolymer
