#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dpolymer/environment.hpp"
#include "dpolymer/errors.hpp"
#include "dpolymer/seeding.hpp"
#include "dpolymer/stats.hpp"

using namespace dpolymer;

namespace {

const CovarianceKernel kGauss = CovarianceKernel::gaussian(1.0, 1.0, 1);

// Products of increments at two points over independent realizations: one
// step each of `draws` fresh spectral environments, or `draws` steps of one
// exact environment.
MeanEstimate product_moment(EnvMode mode, const std::vector<double>& pts, int draws, int k,
                            std::uint64_t seed) {
  std::vector<double> prod(static_cast<std::size_t>(draws));
  if (mode == EnvMode::exact_cholesky) {
    const auto env = make_environment(kGauss, mode, draws, 0.01, 1, seed);
    for (int s = 0; s < draws; ++s) {
      const auto y = env.increments_at(s, pts);
      prod[static_cast<std::size_t>(s)] = y.front() * y.back();
    }
  } else {
    for (int s = 0; s < draws; ++s) {
      const auto env = make_environment(kGauss, mode, 1, 0.01, k,
                                        derive_seed(seed, Purpose::environment, s));
      const auto y = env.increments_at(0, pts);
      prod[static_cast<std::size_t>(s)] = y.front() * y.back();
    }
  }
  return mean_estimate(prod);
}

std::vector<PointPair> short_pairs() {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 50; ++i) pairs.push_back({{0.0}, {2.0 * (i + 1) / 50.0}});
  return pairs;
}

}  // namespace

TEST_SUITE("environment") {
  TEST_CASE("spectral covariance is exact at the origin") {
    for (int k : {1, 7, 512}) {
      const auto env = make_environment(kGauss, EnvMode::spectral, 1, 0.01, k, 3);
      const std::vector<double> zero{0.0};
      CHECK(env.spectral_covariance(zero) == kGauss.sigma2);
      const std::vector<PointPair> same{{{0.3}, {0.3}}};
      CHECK(spectral_covariance_error(env, same) == 0.0);
    }
  }

  TEST_CASE("same seed gives the same frequencies and replays") {
    const auto a = make_environment(kGauss, EnvMode::spectral, 10, 0.01, 64, 99);
    const auto b = make_environment(kGauss, EnvMode::spectral, 10, 0.01, 64, 99);
    CHECK(a.frequencies() == b.frequencies());
    const std::vector<double> pts{0.1, -2.0, 5.5};
    const auto late = a.increments_at(7, pts);
    const auto early = a.increments_at(2, pts);
    CHECK(a.increments_at(2, pts) == early);
    CHECK(b.increments_at(7, pts) == late);
    // A point's value does not depend on the other points in the query.
    const std::vector<double> single{-2.0};
    CHECK(a.increments_at(7, single)[0] == late[1]);
  }

  TEST_CASE("exact mode replays and handles coincident points") {
    const auto env = make_environment(kGauss, EnvMode::exact_cholesky, 5, 0.01, 1, 4);
    const std::vector<double> pts{0.2, 0.2, 1.0, 0.2};
    const auto y = env.increments_at(3, pts);
    CHECK(y[0] == y[1]);
    CHECK(y[0] == y[3]);
    CHECK(env.increments_at(3, pts) == y);
    // Nearly coincident points need diagonal jitter but still factor.
    const std::vector<double> close{0.0, 1e-9, 2e-9, 3e-9};
    CHECK_NOTHROW(env.increments_at(0, close));
  }

  TEST_CASE("jitter ladder gives up on an indefinite matrix") {
    // Not a covariance: Q(r) = -1 for r > 0.5 makes three spread points indefinite.
    const auto bad = CovarianceKernel::user_radial([](double r) { return r < 0.5 ? 1.0 : -1.0; }, 1);
    const auto env = make_environment(bad, EnvMode::exact_cholesky, 1, 0.01, 1, 4);
    const std::vector<double> pts{0.0, 0.6, 1.2};
    CHECK_THROWS_AS(env.increments_at(0, pts), NumericalError);
  }

  TEST_CASE("argument errors") {
    const auto env = make_environment(kGauss, EnvMode::spectral, 2, 0.01, 4, 1);
    const std::vector<double> pts{0.0};
    CHECK_THROWS_AS(env.increments_at(2, pts), ConfigError);
    CHECK_THROWS_AS(env.increments_at(-1, pts), ConfigError);
    const auto exact = make_environment(kGauss, EnvMode::exact_cholesky, 2, 0.01, 4, 1);
    CHECK_THROWS_AS(spectral_covariance_error(exact, short_pairs()), ConfigError);
    const auto user = CovarianceKernel::user_radial([](double r) { return std::exp(-r); }, 1);
    CHECK_THROWS_AS(make_environment(user, EnvMode::spectral, 1, 0.01, 8, 1), UnsupportedFamily);
    CHECK(parse_env_mode("exact-cholesky") == EnvMode::exact_cholesky);
    CHECK_THROWS_AS(parse_env_mode("grid"), ConfigError);
  }

  TEST_CASE("pair covariance at unit separation, both modes") {
    const std::vector<double> pts{0.0, 1.0};
    const double target = 0.01 * std::exp(-0.5);
    for (EnvMode mode : {EnvMode::exact_cholesky, EnvMode::spectral}) {
      const auto est = product_moment(mode, pts, 100000, 16, 21);
      CAPTURE(to_string(mode));
      CHECK(std::fabs(est.mean - target) <= 3.0 * est.std_error);
    }
  }

  TEST_CASE("single-point variance, both modes") {
    const std::vector<double> pts{0.7};
    for (EnvMode mode : {EnvMode::exact_cholesky, EnvMode::spectral}) {
      const auto est = product_moment(mode, pts, 100000, 16, 22);
      CAPTURE(to_string(mode));
      CHECK(std::fabs(est.mean - 0.01) <= 3.0 * est.std_error);
    }
  }

  TEST_CASE("increments at different steps are uncorrelated") {
    const auto env = make_environment(kGauss, EnvMode::spectral, 100001, 0.01, 64, 8);
    const std::vector<double> pt{0.4};
    std::vector<double> prod;
    double prev = env.increments_at(0, pt)[0];
    for (int s = 1; s <= 100000; ++s) {
      const double cur = env.increments_at(s, pt)[0];
      prod.push_back(prev * cur / 0.01);
      prev = cur;
    }
    const auto est = mean_estimate(prod);
    CHECK(std::fabs(est.mean) <= 3.0 * est.std_error);
  }

  TEST_CASE("feature-count error scale over 100 seeds") {
    const auto pairs = short_pairs();
    double worst = 0.0;
    std::vector<double> sq_small, sq_large;
    // The 100-seed ratio has a spread of about 0.1, so the ratio uses 1000
    // seeds per size; the worst-case bound is checked on the first 100.
    for (std::uint64_t r = 0; r < 1000; ++r) {
      const auto small = make_environment(kGauss, EnvMode::spectral, 1, 0.01, 512, 10000 + r);
      const auto large = make_environment(kGauss, EnvMode::spectral, 1, 0.01, 1024, 20000 + r);
      const double es = spectral_covariance_error(small, pairs);
      const double el = spectral_covariance_error(large, pairs);
      if (r < 100) worst = std::max(worst, es);
      sq_small.push_back(es * es);
      sq_large.push_back(el * el);
    }
    CHECK(worst < 5.0 / std::sqrt(512.0));
    const double ratio = std::sqrt(mean_estimate(sq_small).mean / mean_estimate(sq_large).mean);
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.7);
  }

  TEST_CASE("fast feature sums match libm") {
    // Large coordinates exercise the argument reduction; one far point
    // forces the slow path.
    const auto env = make_environment(kGauss, EnvMode::spectral, 1, 0.01, 257, 77);
    const std::vector<double> pts{0.0, 3.3, -250.0, 4e4, 1e7};
    const auto y = env.increments_at(0, pts);
    Rng rng = make_rng(77, Purpose::coefficients, 0);
    std::normal_distribution<double> normal;
    std::vector<double> xi(257), eta(257);
    for (int i = 0; i < 257; ++i) {
      xi[i] = normal(rng);
      eta[i] = normal(rng);
    }
    const double scale = std::sqrt(0.01 / 257.0);
    for (std::size_t m = 0; m < pts.size(); ++m) {
      long double sum = 0.0L;
      for (int i = 0; i < 257; ++i) {
        // Same double-precision phase as the sampler; only the trig differs.
        const long double ph = env.frequencies()[i] * pts[m];
        sum += xi[i] * std::cos(ph) + eta[i] * std::sin(ph);
      }
      CAPTURE(pts[m]);
      CHECK(std::fabs(y[m] - static_cast<double>(scale * sum)) < 1e-13);
    }
  }
}
