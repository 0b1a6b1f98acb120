#pragma once

namespace dpolymer {

/// log of the regularized upper incomplete gamma function Q(a, x) =
/// Gamma(a, x) / Gamma(a), for a > 0 and x >= 0. Stays finite where Q
/// itself underflows.
double log_gamma_q(double a, double x);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace dpolymer
