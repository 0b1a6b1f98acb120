#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dpolymer/errors.hpp"
#include "dpolymer/theory.hpp"

using namespace dpolymer;

namespace {

// P(|X| > r) for X ~ N(0, 2s I_d), by direct integration of the chi density
// of |X| / sqrt(2s).
double chi_tail(double s, double r, int d) {
  const double z = r / std::sqrt(2.0 * s);
  const double log_norm = (d / 2.0 - 1.0) * std::log(2.0) + boost::math::lgamma(d / 2.0);
  auto pdf = [&](double u) {
    return std::exp((d - 1) * std::log(u) - 0.5 * u * u - log_norm);
  };
  boost::math::quadrature::exp_sinh<double> tail;
  if (z <= 0.0) return 1.0;
  return tail.integrate([&](double v) { return pdf(z + v); }, 1e-15);
}

DisorderCriterionSpec strong_spec(double p = 2.0) {
  return {CovarianceKernel::cauchy(1.0, 0.4, 1), 1.0, p, 1.2, 1e7};
}

}  // namespace

TEST_SUITE("theory") {
  TEST_CASE("annealed mean and free-energy bound") {
    CHECK(annealed_mean(0.0, 1.0, 5.0) == 1.0);
    CHECK(annealed_mean(1.0, 1.0, 2.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
    CHECK(annealed_mean(2.0, 0.5, 1.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
    CHECK(free_energy_upper_bound(0.0, 3.0) == 0.0);
    CHECK(free_energy_upper_bound(1.0, 2.0) == 1.0);
    CHECK(free_energy_upper_bound(0.6, 1.3) * 4.0 == doctest::Approx(free_energy_upper_bound(1.2, 1.3)));
  }

  TEST_CASE("concentration bound") {
    CHECK(concentration_bound(0.0, 1.0, 1.0, 1.0) == 2.0);
    CHECK(concentration_bound(1.0, 4.0, 1.0, 1.0) == doctest::Approx(2.0 / std::numbers::e).epsilon(1e-15));
    double prev = 2.0;
    for (double c = 0.05; c < 3.0; c += 0.05) {
      const double b = concentration_bound(c, 4.0, 0.5, 1.0);
      CHECK(b < prev);
      prev = b;
    }
    CHECK(concentration_bound(0.2, 2.0, 0.5, 1.0) > concentration_bound(0.2, 4.0, 0.5, 1.0));
    CHECK_THROWS_AS(concentration_bound(0.2, 4.0, 0.0, 1.0), ConfigError);
  }

  TEST_CASE("kappa") {
    CHECK(kappa(0.0, 1.0, 2.0) == 0.0);
    CHECK(kappa(1.0, 1.0, 2.0) == 12.25);
    CHECK(kappa(1.0, 1.0, 1.25) == doctest::Approx(36.1).epsilon(1e-14));
    CHECK_THROWS_AS(kappa(1.0, 1.0, 1.0), ConfigError);
  }

  TEST_CASE("pair exit probability: closed forms") {
    CHECK(pair_exit_probability(0.5, 0.0, 3) == 1.0);
    CHECK(pair_exit_probability(0.5, 1.0, 1) == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))).epsilon(1e-14));
    CHECK(pair_exit_probability(0.5, 1.0, 1) == doctest::Approx(0.31731).epsilon(5e-6));
    CHECK(pair_exit_probability(0.5, std::sqrt(2.0), 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  }

  TEST_CASE("pair exit probability: chi-density quadrature to 10 digits") {
    for (int d : {1, 2, 3, 5}) {
      for (double s : {0.1, 1.0, 7.5}) {
        for (double r : {0.05, 0.8, 2.0, 6.0}) {
          CAPTURE(d);
          CAPTURE(s);
          CAPTURE(r);
          CHECK(pair_exit_probability(s, r, d) == doctest::Approx(chi_tail(s, r, d)).epsilon(1e-10));
        }
      }
    }
    // Deep tail in the log domain, against Boost's incomplete gamma.
    const double lp = log_pair_exit_probability(100.0, 120.0, 3);
    CHECK(lp == doctest::Approx(std::log(boost::math::gamma_q(1.5, 36.0))).epsilon(1e-12));
    CHECK(std::isfinite(log_pair_exit_probability(1e6, 1e6, 1)));
  }

  TEST_CASE("annealed second moment: trivial and flat-kernel limits") {
    Rng rng(1);
    const auto g = CovarianceKernel::gaussian(1.0, 1.0, 1);
    CHECK(annealed_second_moment(g, 0.0, 1.0, 0.01, 100, rng).value == 1.0);
    CHECK(annealed_second_moment(g, 0.5, 0.0, 0.01, 100, rng).value == 1.0);
    // A nearly flat kernel makes the integral deterministic: E[Z^2] = exp(2 beta^2 t).
    const auto flat = CovarianceKernel::gaussian(1.0, 1e6, 1);
    const auto m = annealed_second_moment(flat, 0.5, 1.0, 0.01, 1000, rng);
    CHECK(m.value == doctest::Approx(std::exp(0.5)).epsilon(1e-8));
    CHECK_FALSE(m.heavy_tail);
  }

  TEST_CASE("criterion on the slowly decaying cauchy example") {
    for (double p : {1.25, 2.0, 4.0}) {
      CAPTURE(p);
      const auto h1 = disorder_criterion_h1(strong_spec(p));
      CHECK(h1.v_verdict == TailVerdict::divergent);
      CHECK(h1.w_verdict == TailVerdict::finite);
      CHECK(h1.satisfied());
      CHECK(h1.v_exponent == doctest::Approx(-0.96).epsilon(1e-3));
    }
  }

  TEST_CASE("criterion on the gaussian kernel") {
    const DisorderCriterionSpec spec{CovarianceKernel::gaussian(1.0, 1.0, 3), 0.3, 2.0, 1.2, 1e7};
    const auto h1 = disorder_criterion_h1(spec);
    CHECK(h1.v_verdict == TailVerdict::finite);
    CHECK_FALSE(h1.satisfied());
  }

  TEST_CASE("criterion rejects a non-monotone profile") {
    const auto bumpy = CovarianceKernel::user_radial(
        [](double r) { return 0.5 + 0.4 * std::cos(r); }, 1);
    const DisorderCriterionSpec spec{bumpy, 1.0, 2.0, 1.2, 1e7};
    CHECK_THROWS_AS(disorder_criterion_h1(spec), NumericalError);
  }

  TEST_CASE("criterion at beta = 0") {
    auto spec = strong_spec();
    spec.beta = 0.0;
    const auto h1 = disorder_criterion_h1(spec);
    CHECK(h1.kappa == 0.0);
    for (double s : {0.5, 3.0, 100.0, 1e4}) {
      CHECK(criterion_log_w(spec, s) <= std::log(criterion_v(spec, s)));
    }
  }

  TEST_CASE("fractional-moment bound") {
    const auto spec = strong_spec();
    const auto h1 = disorder_criterion_h1(spec);
    const auto b0 = fractional_moment_bound(spec, h1, 0.0);
    CHECK(b0.log_value == b0.log_delta);
    CHECK(b0.log_delta >= 0.0);
    CHECK(b0.gamma == doctest::Approx(0.125).epsilon(1e-15));

    double prev = b0.log_value;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double lv = fractional_moment_bound(spec, h1, t).log_value;
      CHECK(lv <= prev);
      prev = lv;
    }

    // The decay between t = 1 and t = 4 is exactly exp(-gamma int_1^4 v).
    auto v = [](double s) { return std::pow(1.0 + std::pow(s, 2.4), -0.4); };
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(v, 1.0, 4.0, 20, 1e-14);
    const auto b1 = fractional_moment_bound(spec, h1, 1.0);
    const auto b4 = fractional_moment_bound(spec, h1, 4.0);
    CHECK(b4.v_integral - b1.v_integral == doctest::Approx(ref).epsilon(1e-9));
    CHECK(b4.log_value < b1.log_value);
    CHECK(b1.log_value - b4.log_value == doctest::Approx(b1.gamma * ref).epsilon(1e-9));

    auto flat = strong_spec();
    flat.beta = 0.0;
    const auto fb = fractional_moment_bound(flat, 3.0);
    CHECK(fb.log_value == 0.0);
    CHECK(fb.value == 1.0);
  }

  TEST_CASE("hypothesis probe") {
    Rng rng(3);
    const std::vector<double> horizons{0.0, 1.0, 2.0};
    const auto zero = hypothesis_h_probe(CovarianceKernel::gaussian(1.0, 1.0, 3), 0.0, horizons, 0.01, 50, rng);
    for (const auto& row : zero) CHECK(row.estimate == 1.0);
    const auto t0 = hypothesis_h_probe(CovarianceKernel::gaussian(1.0, 1.0, 3), 0.7, horizons, 0.01, 50, rng);
    CHECK(t0.front().estimate == 1.0);

    // Flat kernel: exp(beta^2 T / 2) exactly.
    const auto flat = hypothesis_h_probe(CovarianceKernel::gaussian(1.0, 1e6, 3), 0.7, horizons, 0.01, 50, rng);
    CHECK(flat.back().estimate == doctest::Approx(std::exp(0.49)).epsilon(1e-8));

    // Rapidly decaying kernel in d = 3: increasing and saturating.
    const std::vector<double> grid{1.0, 2.0, 4.0, 8.0};
    const auto rows = hypothesis_h_probe(CovarianceKernel::gaussian(1.0, 1.0, 3), 0.3, grid, 0.01, 10000, rng);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].estimate > rows[i - 1].estimate);
    const double inc1 = rows[2].estimate / rows[1].estimate - 1.0;
    const double inc2 = rows[3].estimate / rows[2].estimate - 1.0;
    CHECK(inc2 < inc1);
    CHECK(h_probe_saturation(rows) == doctest::Approx(inc2));
    CHECK(h_probe_saturation(rows) < 0.05);
  }
}
