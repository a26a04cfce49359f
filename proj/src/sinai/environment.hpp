#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sinai {

enum class Family { TwoPointSymmetric, LogUniformSymmetric, FiniteTable };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

// Left/right jump rates (omega^-_x, omega^+_x) at one site, events per unit time.
struct RatePair {
  double minus;
  double plus;

  bool operator==(const RatePair&) const = default;
};

struct TableEntry {
  RatePair rates;
  double probability;
};

// Law of one site's rate pair. Only families whose log-ratio
// log(omega^+ / omega^-) has zero mean are constructible.
class DistributionSpec {
 public:
  // (e^{-c/2}, e^{c/2}) or (e^{c/2}, e^{-c/2}) with probability 1/2 each.
  static DistributionSpec two_point(double c);
  // log(omega^+/omega^-) ~ Uniform(-c, c), rates e^{+-L/2}.
  static DistributionSpec log_uniform(double c);
  // Arbitrary finite law; rejected unless the mean log-ratio vanishes.
  static DistributionSpec finite_table(std::vector<TableEntry> entries);

  Family family() const { return family_; }
  double c() const { return c_; }
  const std::vector<TableEntry>& table() const { return table_; }
  double kappa() const { return kappa_; }
  double sigma2() const { return sigma2_; }
  // How the zero-mean condition is certified for this family.
  const std::string& zero_mean_certificate() const { return certificate_; }

  // Maps 64 uniform bits to a rate pair.
  RatePair draw(std::uint64_t bits) const;

  bool operator==(const DistributionSpec&) const = default;

 private:
  DistributionSpec() = default;

  Family family_ = Family::TwoPointSymmetric;
  double c_ = 0.0;
  std::vector<TableEntry> table_;
  double kappa_ = 1.0;
  double sigma2_ = 0.0;
  std::string certificate_;
};

// Closed integer interval of sites.
struct Window {
  std::int64_t lo;
  std::int64_t hi;

  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  bool contains(std::int64_t x) const { return lo <= x && x <= hi; }
  bool contains(const Window& w) const { return lo <= w.lo && w.hi <= hi; }
  bool operator==(const Window&) const = default;
};

// Rates at site x for (spec, seed); a pure function of its arguments.
RatePair site_rates(const DistributionSpec& spec, std::uint64_t seed, std::int64_t x);

// One frozen realization of the environment over a finite window.
// Immutable; extension returns a new value.
class Environment {
 public:
  enum class Origin { Sampled, Coupled, Manual };

  static Environment sample(const DistributionSpec& spec, std::uint64_t seed, Window window);
  // Rates supplied by the caller, e.g. hand-built test fixtures or a coupling.
  // rates[i] belongs to site lo + i.
  static Environment from_rates(const DistributionSpec& spec, std::uint64_t seed, std::int64_t lo,
                                std::vector<RatePair> rates, Origin origin = Origin::Manual);

  // New sites are generated from (seed, x); existing sites are copied verbatim.
  Environment extend(Window wider) const;

  const DistributionSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  Window window() const { return window_; }
  Origin origin() const { return origin_; }

  const RatePair& rates(std::int64_t x) const;
  std::span<const RatePair> all_rates() const { return rates_; }

 private:
  Environment(DistributionSpec spec, std::uint64_t seed, Window window, std::vector<RatePair> rates,
              Origin origin);

  DistributionSpec spec_;
  std::uint64_t seed_;
  Window window_;
  std::vector<RatePair> rates_;
  Origin origin_;
};

std::string to_string(Environment::Origin o);
Environment::Origin origin_from_string(const std::string& name);

struct RateViolation {
  std::int64_t site;
  std::string side;  // "minus" or "plus"
  double value;
};

struct ValidationReport {
  double kappa;
  double min_rate;
  double max_rate;
  std::string zero_mean_certificate;
  std::vector<RateViolation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Environment& env);

}  // namespace sinai
