#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sinai/environment.hpp"

namespace sinai {

enum class FunctionKind { PotentialV, BrownianW, Generic };

std::string to_string(FunctionKind k);
FunctionKind function_kind_from_string(const std::string& name);

// A real function sampled on a strictly increasing, finite grid.
class SampledFunction {
 public:
  SampledFunction(std::vector<double> positions, std::vector<double> values, FunctionKind kind);

  std::size_t size() const { return values_.size(); }
  FunctionKind kind() const { return kind_; }
  std::span<const double> positions() const { return positions_; }
  std::span<const double> values() const { return values_; }
  double position(std::size_t i) const { return positions_[i]; }
  double value(std::size_t i) const { return values_[i]; }

  // Index whose position equals p exactly.
  std::optional<std::size_t> index_of(double p) const;
  // Last index with position <= p / first index with position >= p.
  std::optional<std::size_t> last_at_or_below(double p) const;
  std::optional<std::size_t> first_at_or_above(double p) const;
  // Linear interpolation; p must lie inside the sampled range.
  double interpolate(double p) const;

  bool operator==(const SampledFunction&) const = default;

 private:
  std::vector<double> positions_;
  std::vector<double> values_;
  FunctionKind kind_;
};

// Potential V on the environment window: V(0) = 0 and
// V(x) - V(x-1) = log(omega^-_x / omega^+_x) for every x.
SampledFunction potential(const Environment& env);

// Reversible measure theta, held in log form. theta_0 = 1 and
// theta_x omega^+_x = theta_{x+1} omega^-_{x+1}.
struct ReversibleMeasure {
  std::int64_t lo;
  std::vector<double> log_theta;

  double log(std::int64_t x) const;
  double theta(std::int64_t x) const;
};

ReversibleMeasure reversible_measure(const Environment& env);

// Time scale t > e, carried as log t.
struct TimeScale {
  double log_t;

  static TimeScale from_log(double log_t);
  static TimeScale from_time(double t);
  double time() const;
};

struct StableScan {
  std::vector<std::size_t> stable;        // indices of t-stable points, increasing
  std::vector<std::size_t> undetermined;  // not excluded, but a barrier falls outside the window
  bool left_exhausted = false;            // no stable point at position <= 0
  bool right_exhausted = false;           // no stable point at position >= 0
};

// All t-stable points: m is the leftmost argmin of f on [l(t,m), r(t,m)], where
// l and r are the nearest points on each side with f >= f(m) + log t.
StableScan find_stable_points(const SampledFunction& f, TimeScale t);

// Leftmost argmax of f between each consecutive pair of stable points.
std::vector<std::size_t> find_peaks(const SampledFunction& f, std::span<const std::size_t> stable);
std::vector<std::size_t> find_peaks(const SampledFunction& f, TimeScale t);

struct WellRecord {
  std::size_t left;
  std::size_t bottom;
  std::size_t right;
  double depth;
};

// Depth of the well [a, b]: min{f(a), f(b)} - min f over [a, b].
double depth(const SampledFunction& f, std::size_t a, std::size_t b);

// Largest barrier a non-global local minimum of f on [a, b] must climb to reach
// the global minimum. Both classical formulas are evaluated; a disagreement is
// an internal error.
double elevation(const SampledFunction& f, std::size_t a, std::size_t b);

struct ElevationPair {
  double pairwise;    // max over x, y, z of f(z) - f(x) - f(y), plus min f
  double local_min;   // max over local minima of the barrier to the global minimum
};
ElevationPair elevation_formulas(const SampledFunction& f, std::size_t a, std::size_t b);

struct Neighborhood {
  std::size_t center;
  double radius;
  std::size_t left;
  std::size_t right;

  double breadth(const SampledFunction& f) const { return f.position(right) - f.position(left); }
};

// [l(m,a), r(m,a)]: extreme points of Well(m) on each side of m where f - f(m) < a.
Neighborhood neighborhood(const SampledFunction& f, const WellRecord& well, double a);

struct Landmarks {
  std::size_t m_minus, h_minus, mm_minus, hh_minus;
  std::size_t m_plus, h_plus, mm_plus, hh_plus;
};

struct StableLandscape {
  TimeScale t;
  std::vector<std::size_t> stable_points;
  std::vector<std::size_t> peaks;
  std::vector<std::size_t> undetermined;
  std::vector<WellRecord> wells;  // one per stable point with a peak on both sides
  Landmarks marks;
  std::size_t m_t;
  bool tie;  // f(h^+) == f(h^-); m_t resolved to m^-

  const WellRecord* well_of(std::size_t m) const;
  const WellRecord& well_minus() const;
  const WellRecord& well_plus() const;
};

// Throws WindowExhausted unless m^{--} ... m^{++} all resolve inside the sample.
StableLandscape stable_landscape(const SampledFunction& f, TimeScale t);

// Positions scaled by a^2, values by a.
SampledFunction rescale(const SampledFunction& f, double a);

// Nearest integer site; exact halves go toward 0.
std::int64_t snap_to_site(double position);

}  // namespace sinai
