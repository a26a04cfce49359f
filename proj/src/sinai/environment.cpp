#include "sinai/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sinai/error.hpp"
#include "sinai/rng.hpp"

namespace sinai {

std::string to_string(Family f) {
  switch (f) {
    case Family::TwoPointSymmetric: return "two-point-symmetric";
    case Family::LogUniformSymmetric: return "log-uniform-symmetric";
    case Family::FiniteTable: return "finite-table";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "two-point-symmetric") return Family::TwoPointSymmetric;
  if (name == "log-uniform-symmetric") return Family::LogUniformSymmetric;
  if (name == "finite-table") return Family::FiniteTable;
  fail(ErrorCode::InvalidArgument, "unknown distribution family '" + name + "'");
}

DistributionSpec DistributionSpec::two_point(double c) {
  require(std::isfinite(c) && c > 0.0, "two-point family needs c > 0 (sigma^2 = c^2 must be positive)");
  DistributionSpec s;
  s.family_ = Family::TwoPointSymmetric;
  s.c_ = c;
  s.kappa_ = std::exp(c / 2.0);
  s.sigma2_ = c * c;
  s.certificate_ = "two-point: log-ratio is +c or -c with probability 1/2 each";
  return s;
}

DistributionSpec DistributionSpec::log_uniform(double c) {
  require(std::isfinite(c) && c > 0.0, "log-uniform family needs c > 0");
  DistributionSpec s;
  s.family_ = Family::LogUniformSymmetric;
  s.c_ = c;
  s.kappa_ = std::exp(c / 2.0);
  s.sigma2_ = c * c / 3.0;
  s.certificate_ = "log-uniform: log-ratio ~ Uniform(-c, c), symmetric about 0";
  return s;
}

DistributionSpec DistributionSpec::finite_table(std::vector<TableEntry> entries) {
  require(!entries.empty(), "finite table is empty");
  double total = 0.0, mean = 0.0, second = 0.0, kappa = 1.0;
  for (const auto& e : entries) {
    require(e.probability > 0.0 && std::isfinite(e.probability), "finite table: probabilities must be positive");
    require(e.rates.minus > 0.0 && e.rates.plus > 0.0 && std::isfinite(e.rates.minus) &&
                std::isfinite(e.rates.plus),
            "finite table: rates must be positive and finite");
    const double lr = std::log(e.rates.plus / e.rates.minus);
    total += e.probability;
    mean += e.probability * lr;
    second += e.probability * lr * lr;
    for (double r : {e.rates.minus, e.rates.plus}) kappa = std::max({kappa, r, 1.0 / r});
  }
  require(std::abs(total - 1.0) <= 1e-12, "finite table: probabilities must sum to 1");
  require(std::abs(mean) <= 1e-12, "finite table: mean log-ratio is nonzero (not in Sinai's regime)");
  require(second > 0.0, "finite table: degenerate law, sigma^2 = 0");
  require(kappa > 1.0, "finite table: ellipticity constant must exceed 1");
  DistributionSpec s;
  s.family_ = Family::FiniteTable;
  s.table_ = std::move(entries);
  s.kappa_ = kappa;
  s.sigma2_ = second;
  s.certificate_ = "finite-table: mean log-ratio evaluated exactly from the table";
  return s;
}

RatePair DistributionSpec::draw(std::uint64_t bits) const {
  const double u = rng::to_unit(bits);
  switch (family_) {
    case Family::TwoPointSymmetric: {
      const double lo = std::exp(-c_ / 2.0), hi = std::exp(c_ / 2.0);
      return u < 0.5 ? RatePair{lo, hi} : RatePair{hi, lo};
    }
    case Family::LogUniformSymmetric: {
      const double lr = c_ * (2.0 * u - 1.0);
      return {std::exp(-lr / 2.0), std::exp(lr / 2.0)};
    }
    case Family::FiniteTable: {
      double acc = 0.0;
      for (const auto& e : table_) {
        acc += e.probability;
        if (u < acc) return e.rates;
      }
      return table_.back().rates;
    }
  }
  fail(ErrorCode::Internal, "unreachable distribution family");
}

RatePair site_rates(const DistributionSpec& spec, std::uint64_t seed, std::int64_t x) {
  return spec.draw(rng::site_bits(seed, x));
}

Environment::Environment(DistributionSpec spec, std::uint64_t seed, Window window, std::vector<RatePair> rates,
                         Origin origin)
    : spec_(std::move(spec)), seed_(seed), window_(window), rates_(std::move(rates)), origin_(origin) {}

Environment Environment::sample(const DistributionSpec& spec, std::uint64_t seed, Window window) {
  require(window.lo <= 0 && 0 <= window.hi, "environment window must contain the origin");
  std::vector<RatePair> rates;
  rates.reserve(window.size());
  for (std::int64_t x = window.lo; x <= window.hi; ++x) rates.push_back(site_rates(spec, seed, x));
  return Environment(spec, seed, window, std::move(rates), Origin::Sampled);
}

Environment Environment::from_rates(const DistributionSpec& spec, std::uint64_t seed, std::int64_t lo,
                                    std::vector<RatePair> rates, Origin origin) {
  require(!rates.empty(), "environment needs at least one site");
  const Window w{lo, lo + static_cast<std::int64_t>(rates.size()) - 1};
  require(w.lo <= 0 && 0 <= w.hi, "environment window must contain the origin");
  for (const auto& r : rates)
    require(r.minus >= 0.0 && r.plus >= 0.0 && std::isfinite(r.minus) && std::isfinite(r.plus),
            "rates must be finite and non-negative");
  return Environment(spec, seed, w, std::move(rates), origin);
}

Environment Environment::extend(Window wider) const {
  require(wider.contains(window_), "extend: new window must contain the old one");
  if (origin_ == Origin::Coupled)
    fail(ErrorCode::Unsupported, "extend: a coupled environment must be regenerated from its Brownian path");
  std::vector<RatePair> rates;
  rates.reserve(wider.size());
  for (std::int64_t x = wider.lo; x < window_.lo; ++x) rates.push_back(site_rates(spec_, seed_, x));
  rates.insert(rates.end(), rates_.begin(), rates_.end());
  for (std::int64_t x = window_.hi + 1; x <= wider.hi; ++x) rates.push_back(site_rates(spec_, seed_, x));
  return Environment(spec_, seed_, wider, std::move(rates), origin_);
}

const RatePair& Environment::rates(std::int64_t x) const {
  if (!window_.contains(x))
    throw WindowExhausted("site " + std::to_string(x) + " outside environment window [" +
                          std::to_string(window_.lo) + ", " + std::to_string(window_.hi) + "]");
  return rates_[static_cast<std::size_t>(x - window_.lo)];
}

std::string to_string(Environment::Origin o) {
  switch (o) {
    case Environment::Origin::Sampled: return "sampled";
    case Environment::Origin::Coupled: return "coupled";
    case Environment::Origin::Manual: return "manual";
  }
  return "unknown";
}

Environment::Origin origin_from_string(const std::string& name) {
  if (name == "sampled") return Environment::Origin::Sampled;
  if (name == "coupled") return Environment::Origin::Coupled;
  if (name == "manual") return Environment::Origin::Manual;
  fail(ErrorCode::Parse, "unknown environment origin '" + name + "'");
}

ValidationReport validate(const Environment& env) {
  ValidationReport rep;
  rep.kappa = env.spec().kappa();
  rep.zero_mean_certificate = env.spec().zero_mean_certificate();
  rep.min_rate = std::numeric_limits<double>::infinity();
  rep.max_rate = -std::numeric_limits<double>::infinity();
  // exp(-c/2) and 1/exp(c/2) can differ in the last bit.
  constexpr double slack = 4.0 * std::numeric_limits<double>::epsilon();
  const double lo = (1.0 - slack) / rep.kappa, hi = rep.kappa * (1.0 + slack);
  const auto rates = env.all_rates();
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const std::int64_t x = env.window().lo + static_cast<std::int64_t>(i);
    for (auto [side, v] : {std::pair{"minus", rates[i].minus}, std::pair{"plus", rates[i].plus}}) {
      rep.min_rate = std::min(rep.min_rate, v);
      rep.max_rate = std::max(rep.max_rate, v);
      if (!(v >= lo && v <= hi)) rep.violations.push_back({x, side, v});
    }
  }
  return rep;
}

}  // namespace sinai
