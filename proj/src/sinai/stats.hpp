#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sinai::stats {

// log(sum exp(x_i)); -inf for an empty range.
double log_sum_exp(std::span<const double> xs);

// Compensated running sum (Neumaier).
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Interval {
  double lo;
  double hi;
};

// Wilson score interval for a binomial proportion.
Interval wilson(std::uint64_t successes, std::uint64_t trials, double z);

// One-sided exact (Clopper-Pearson) lower confidence bound at level 1 - alpha.
double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double alpha);

// Upper tail of the standard normal, P(Z > z).
double normal_upper_tail(double z);

// Standard error of a binomial proportion p over n trials.
double binomial_sigma(double p, std::uint64_t n);

// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic;
  double p_value;
};

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double total_variation(std::span<const double> p, std::span<const double> q);

double median(std::vector<double> xs);

}  // namespace sinai::stats
