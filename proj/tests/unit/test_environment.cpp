#include <cmath>

#include "doctest.h"
#include "sinai/environment.hpp"
#include "sinai/error.hpp"

using namespace sinai;

TEST_CASE("two-point family records kappa and sigma^2") {
  const auto s = DistributionSpec::two_point(1.0);
  CHECK(s.kappa() == doctest::Approx(std::exp(0.5)).epsilon(1e-15));
  CHECK(s.sigma2() == 1.0);
  CHECK_THROWS_AS(DistributionSpec::two_point(0.0), Error);
  CHECK_THROWS_AS(DistributionSpec::two_point(-1.0), Error);
}

TEST_CASE("finite table accepts symmetric laws and rejects drift") {
  const auto s = DistributionSpec::finite_table({{{1, 2}, 0.5}, {{2, 1}, 0.5}});
  const double l2 = std::log(2.0);
  CHECK(s.sigma2() == doctest::Approx(l2 * l2).epsilon(1e-14));
  CHECK(s.kappa() == 2.0);
  CHECK_THROWS_AS(DistributionSpec::finite_table({{{1, 2}, 0.6}, {{2, 1}, 0.4}}), Error);
  CHECK_THROWS_AS(DistributionSpec::finite_table({{{1, 1}, 1.0}}), Error);
}

TEST_CASE("site rates are a pure function of (spec, seed, x)") {
  const auto s = DistributionSpec::log_uniform(1.3);
  for (std::int64_t x = -50; x <= 50; ++x) {
    const RatePair a = site_rates(s, 99, x), b = site_rates(s, 99, x);
    CHECK(a == b);
  }
  const auto e1 = Environment::sample(s, 7, {-10, 10});
  const auto e2 = Environment::sample(s, 7, {-20, 20});
  for (std::int64_t x = -10; x <= 10; ++x) CHECK(e1.rates(x) == e2.rates(x));
  const auto e3 = e1.extend({-20, 20});
  for (std::int64_t x = -20; x <= 20; ++x) CHECK(e3.rates(x) == e2.rates(x));
  CHECK_THROWS_AS(e1.extend({-5, 30}), Error);
  CHECK_THROWS_AS(e1.rates(11), WindowExhausted);
}

TEST_CASE("two-point sites split evenly") {
  const auto s = DistributionSpec::two_point(1.0);
  const auto env = Environment::sample(s, 2024, {0, 99999});
  std::size_t low = 0;
  for (const auto& r : env.all_rates()) low += r.minus < r.plus;
  const double frac = static_cast<double>(low) / 1e5;
  CHECK(std::abs(frac - 0.5) <= 3 * 0.5 * std::pow(10.0, -2.5));
}

TEST_CASE("validation reports ellipticity margins and violations") {
  const auto s = DistributionSpec::two_point(1.0);
  const auto env = Environment::sample(s, 3, {-500, 500});
  const auto rep = validate(env);
  CHECK(rep.ok());
  for (const auto& r : env.all_rates()) {
    CHECK((r.minus == std::exp(-0.5) || r.minus == std::exp(0.5)));
    CHECK((r.plus == std::exp(-0.5) || r.plus == std::exp(0.5)));
  }
  std::vector<RatePair> rates(env.all_rates().begin(), env.all_rates().end());
  rates[17].plus = 3 * s.kappa();
  const auto bad = validate(Environment::from_rates(s, 3, -500, rates));
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].site == -483);
  CHECK(bad.violations[0].side == "plus");
}

TEST_CASE("log-uniform log-ratios have mean zero") {
  const auto s = DistributionSpec::log_uniform(1.0);
  const auto env = Environment::sample(s, 11, {0, 9999});
  double sum = 0.0;
  for (const auto& r : env.all_rates()) sum += std::log(r.plus / r.minus);
  const double mean = sum / 1e4;
  CHECK(std::abs(mean) <= 3 * std::sqrt(s.sigma2()) / 100);
  CHECK(validate(env).ok());
}

TEST_CASE("coupled environments cannot be extended from the site hash") {
  const auto s = DistributionSpec::two_point(1.0);
  const auto env = Environment::from_rates(s, 1, -1, {{1, 1}, {1, 1}, {1, 1}}, Environment::Origin::Coupled);
  try {
    (void)env.extend({-5, 5});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
}
