#pragma once

#include <functional>
#include <string_view>
#include <vector>

namespace dpolymer {

using RealFunction = std::function<double(double)>;

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_subdivisions = 20000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over [a, b], bisecting
/// the interval with the largest error estimate until the summed estimate
/// meets max(abs_tol, rel_tol * |value|). `breakpoints` inside (a, b) seed
/// the initial partition. Throws NumericalError past max_subdivisions.
QuadratureResult integrate(const RealFunction& f, double a, double b,
                           const QuadratureOptions& opts = {},
                           std::vector<double> breakpoints = {});

/// Log-domain quadrature: returns log of the integral of exp(g) over [a, b].
/// The integrand is shifted by the maximum of g (located by a logarithmic
/// scan and golden-section refinement) and the range is cut into geometric
/// panels, so sharp peaks and astronomically large or small integrands are
/// handled. Returns -inf when exp(g) vanishes everywhere.
double integrate_log(const RealFunction& log_integrand, double a, double b,
                     const QuadratureOptions& opts = {});

/// Geometric partition of [a, b] used by the log-domain integrator.
std::vector<double> geometric_breakpoints(double a, double b, double ratio = 1.25);

enum class TailVerdict { finite, divergent, inconclusive };

std::string_view to_string(TailVerdict v);

/// Least-squares exponent of a power law fitted to log f(r) against log r at
/// `points` log-spaced abscissae on [lo, hi]. Returns -inf when f underflows
/// to zero somewhere on the window (faster than any power).
double fitted_tail_exponent(const RealFunction& log_f, double lo, double hi,
                            int points = 33);

/// finite if exponent < -1 - margin, divergent if > -1 + margin.
TailVerdict classify_tail_exponent(double exponent, double margin);

}  // namespace dpolymer
