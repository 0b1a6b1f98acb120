#include "dpolymer/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpolymer/errors.hpp"

namespace dpolymer {
namespace {

constexpr int kMaxIter = 10000;
constexpr double kEps = 1e-17;
constexpr double kTiny = 1e-300;

double log_prefactor(double a, double x) {
  return -x + a * std::log(x) - std::lgamma(a);
}

// Lower series: P(a, x) = prefactor * sum_n x^n / (a (a+1) ... (a+n)).
double log_gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return std::log(sum) + log_prefactor(a, x);
    }
  }
  throw NumericalError("incomplete gamma series did not converge (a=" +
                       std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

// Continued fraction for Q(a, x), modified Lentz.
double log_gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return std::log(h) + log_prefactor(a, x);
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge (a=" +
                       std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

}  // namespace

double log_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw ConfigError("log_gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) {
    const double p = std::exp(log_gamma_p_series(a, x));
    return std::log1p(-p);
  }
  return log_gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

}  // namespace dpolymer
