#include "dpolymer/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include "dpolymer/errors.hpp"
#include "dpolymer/stats.hpp"

namespace dpolymer {
namespace {

// Kronrod 15-point nodes (positive half, descending) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const RealFunction& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double value = kronrod * half;
  const double error = std::fabs((kronrod - gauss) * half);
  if (!std::isfinite(value)) {
    throw NumericalError("quadrature: non-finite integrand on [" +
                         std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const RealFunction& f, double a, double b,
                           const QuadratureOptions& opts,
                           std::vector<double> breakpoints) {
  if (!(b >= a)) throw ConfigError("integrate: require a <= b");
  QuadratureResult out;
  if (a == b) return out;

  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::erase_if(breakpoints, [&](double x) { return !(x >= a && x <= b); });
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());

  std::priority_queue<Panel> heap;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    heap.push(gk15(f, breakpoints[i], breakpoints[i + 1]));
    out.evaluations += 15;
  }

  auto totals = [&heap]() {
    // Sum in a fixed order so the result is independent of heap layout.
    std::vector<Panel> panels;
    auto copy = heap;
    while (!copy.empty()) {
      panels.push_back(copy.top());
      copy.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& l, const Panel& r) { return l.a < r.a; });
    CompensatedSum v, e;
    for (const auto& p : panels) {
      v.add(p.value);
      e.add(p.error);
    }
    return std::pair{v.value(), e.value()};
  };

  double value = 0.0, error = 0.0;
  int subdivisions = 0;
  // Running totals avoid an O(n) rescan per bisection; the final answer is
  // recomputed in order.
  {
    auto [v, e] = totals();
    value = v;
    error = e;
  }
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::fabs(value))) {
    if (++subdivisions > opts.max_subdivisions) {
      throw NumericalError("quadrature did not converge within " +
                           std::to_string(opts.max_subdivisions) +
                           " subdivisions (error estimate " +
                           std::to_string(error) + ")");
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericalError("quadrature: interval collapsed at " +
                           std::to_string(worst.a));
    }
    const Panel left = gk15(f, worst.a, mid);
    const Panel right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  auto [v, e] = totals();
  out.value = v;
  out.abs_error = e;
  return out;
}

std::vector<double> geometric_breakpoints(double a, double b, double ratio) {
  std::vector<double> pts{a};
  if (!(b > a)) return pts;
  double x = a > 0.0 ? a * ratio : std::min(1e-3, b);
  if (a <= 0.0 && x < b) pts.push_back(x);
  while (x * ratio < b) {
    x *= ratio;
    pts.push_back(x);
  }
  pts.push_back(b);
  return pts;
}

double integrate_log(const RealFunction& log_integrand, double a, double b,
                     const QuadratureOptions& opts) {
  if (!(b >= a)) throw ConfigError("integrate_log: require a <= b");
  if (a == b) return -std::numeric_limits<double>::infinity();

  // Locate the peak of g: log-spaced scan, then golden-section refinement.
  std::vector<double> scan;
  constexpr int kScan = 4000;
  const double lo = a > 0.0 ? a : std::min(1e-6, b);
  const double ratio = std::pow(b / lo, 1.0 / (kScan - 1));
  scan.push_back(a);
  for (int i = 0; i < kScan; ++i) scan.push_back(std::min(b, lo * std::pow(ratio, i)));
  double best_x = a;
  double best_g = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double g = log_integrand(scan[i]);
    if (g > best_g) {
      best_g = g;
      best_x = scan[i];
      best_i = i;
    }
  }
  if (best_g == -std::numeric_limits<double>::infinity()) return best_g;
  if (!std::isfinite(best_g)) {
    throw NumericalError("integrate_log: non-finite log-integrand");
  }
  {
    double l = scan[best_i == 0 ? 0 : best_i - 1];
    double r = scan[std::min(best_i + 1, scan.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && r - l > 1e-12 * std::max(1.0, std::fabs(r)); ++it) {
      const double m1 = r - phi * (r - l);
      const double m2 = l + phi * (r - l);
      if (log_integrand(m1) > log_integrand(m2)) {
        r = m2;
      } else {
        l = m1;
      }
    }
    const double x = 0.5 * (l + r);
    const double g = log_integrand(x);
    if (g > best_g) {
      best_g = g;
      best_x = x;
    }
  }

  auto shifted = [&](double s) {
    const double g = log_integrand(s);
    return g == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(g - best_g);
  };
  std::vector<double> breaks = geometric_breakpoints(a, b, 1.25);
  breaks.push_back(best_x);
  const auto res = integrate(shifted, a, b, opts, std::move(breaks));
  if (res.value <= 0.0) return -std::numeric_limits<double>::infinity();
  return best_g + std::log(res.value);
}

std::string_view to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::finite: return "finite";
    case TailVerdict::divergent: return "divergent";
    case TailVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double fitted_tail_exponent(const RealFunction& log_f, double lo, double hi,
                            int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw ConfigError("fitted_tail_exponent: need 0 < lo < hi and >= 2 points");
  }
  std::vector<double> xs, ys;
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double lx = std::log(lo) + i * step;
    const double ly = log_f(std::exp(lx));
    if (ly == -std::numeric_limits<double>::infinity()) {
      return -std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(ly)) throw NumericalError("fitted_tail_exponent: non-finite log f");
    xs.push_back(lx);
    ys.push_back(ly);
  }
  return ols_slope(xs, ys);
}

TailVerdict classify_tail_exponent(double exponent, double margin) {
  if (exponent < -1.0 - margin) return TailVerdict::finite;
  if (exponent > -1.0 + margin) return TailVerdict::divergent;
  return TailVerdict::inconclusive;
}

}  // namespace dpolymer
