#include "sinai/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sinai/error.hpp"
#include "sinai/stats.hpp"

namespace sinai {

std::string to_string(FunctionKind k) {
  switch (k) {
    case FunctionKind::PotentialV: return "potential-V";
    case FunctionKind::BrownianW: return "brownian-W";
    case FunctionKind::Generic: return "generic";
  }
  return "generic";
}

FunctionKind function_kind_from_string(const std::string& name) {
  if (name == "potential-V") return FunctionKind::PotentialV;
  if (name == "brownian-W") return FunctionKind::BrownianW;
  if (name == "generic") return FunctionKind::Generic;
  fail(ErrorCode::Parse, "unknown function kind '" + name + "'");
}

SampledFunction::SampledFunction(std::vector<double> positions, std::vector<double> values,
                                 FunctionKind kind)
    : positions_(std::move(positions)), values_(std::move(values)), kind_(kind) {
  require(!positions_.empty(), "sampled function needs at least one point");
  require(positions_.size() == values_.size(), "positions and values differ in length");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    require(std::isfinite(positions_[i]) && std::isfinite(values_[i]), "non-finite sample");
    if (i > 0) require(positions_[i] > positions_[i - 1], "positions must be strictly increasing");
  }
  if (kind_ == FunctionKind::PotentialV) {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      require(positions_[i] == std::floor(positions_[i]), "potential positions must be integers");
      if (i > 0) require(positions_[i] == positions_[i - 1] + 1.0, "potential positions must be consecutive");
    }
    auto z = index_of(0.0);
    require(z.has_value() && values_[*z] == 0.0, "potential must vanish at the origin");
  }
}

std::optional<std::size_t> SampledFunction::index_of(double p) const {
  auto it = std::lower_bound(positions_.begin(), positions_.end(), p);
  if (it == positions_.end() || *it != p) return std::nullopt;
  return static_cast<std::size_t>(it - positions_.begin());
}

std::optional<std::size_t> SampledFunction::last_at_or_below(double p) const {
  auto it = std::upper_bound(positions_.begin(), positions_.end(), p);
  if (it == positions_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - positions_.begin()) - 1;
}

std::optional<std::size_t> SampledFunction::first_at_or_above(double p) const {
  auto it = std::lower_bound(positions_.begin(), positions_.end(), p);
  if (it == positions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - positions_.begin());
}

double SampledFunction::interpolate(double p) const {
  require(p >= positions_.front() && p <= positions_.back(), "interpolation point outside the sample");
  auto i = *first_at_or_above(p);
  if (positions_[i] == p || i == 0) return values_[i];
  const double x0 = positions_[i - 1], x1 = positions_[i];
  const double w = (p - x0) / (x1 - x0);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

SampledFunction potential(const Environment& env) {
  const Window w = env.window();
  const auto n = static_cast<std::size_t>(w.size());
  const auto origin = static_cast<std::size_t>(-w.lo);
  std::vector<double> pos(n), val(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<double>(w.lo + static_cast<std::int64_t>(i));

  stats::CompensatedSum right;
  for (std::int64_t x = 1; x <= w.hi; ++x) {
    const RatePair r = env.rates(x);
    right.add(std::log(r.minus / r.plus));
    val[origin + static_cast<std::size_t>(x)] = right.value();
  }
  stats::CompensatedSum left;
  for (std::int64_t x = -1; x >= w.lo; --x) {
    const RatePair r = env.rates(x + 1);
    left.add(std::log(r.plus / r.minus));
    val[origin - static_cast<std::size_t>(-x)] = left.value();
  }
  return SampledFunction(std::move(pos), std::move(val), FunctionKind::PotentialV);
}

double ReversibleMeasure::log(std::int64_t x) const {
  const std::int64_t i = x - lo;
  if (i < 0 || i >= static_cast<std::int64_t>(log_theta.size()))
    throw WindowExhausted("reversible measure queried outside the window");
  return log_theta[static_cast<std::size_t>(i)];
}

double ReversibleMeasure::theta(std::int64_t x) const { return std::exp(log(x)); }

ReversibleMeasure reversible_measure(const Environment& env) {
  const Window w = env.window();
  ReversibleMeasure m{w.lo, std::vector<double>(static_cast<std::size_t>(w.size()), 0.0)};
  const auto origin = static_cast<std::size_t>(-w.lo);
  stats::CompensatedSum right;
  for (std::int64_t x = 1; x <= w.hi; ++x) {
    // theta_x = prod_{i=0}^{x-1} omega^+_i / omega^-_{i+1}
    right.add(std::log(env.rates(x - 1).plus) - std::log(env.rates(x).minus));
    m.log_theta[origin + static_cast<std::size_t>(x)] = right.value();
  }
  stats::CompensatedSum left;
  for (std::int64_t x = -1; x >= w.lo; --x) {
    // theta_x = prod_{i=x}^{-1} omega^-_{i+1} / omega^+_i
    left.add(std::log(env.rates(x + 1).minus) - std::log(env.rates(x).plus));
    m.log_theta[origin - static_cast<std::size_t>(-x)] = left.value();
  }
  return m;
}

TimeScale TimeScale::from_log(double log_t) {
  require(std::isfinite(log_t) && log_t > 1.0, "time scale needs t > e");
  return TimeScale{log_t};
}

TimeScale TimeScale::from_time(double t) {
  require(std::isfinite(t) && t > 0.0, "time must be positive and finite");
  return from_log(std::log(t));
}

double TimeScale::time() const { return std::exp(log_t); }

namespace {

enum class Side { Pass, Fail, Undetermined };

struct Frame {
  std::size_t index;
  double segmax;
};

std::size_t leftmost_argmax(std::span<const double> v, std::size_t a, std::size_t b) {
  std::size_t best = a;
  for (std::size_t i = a + 1; i <= b; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::size_t leftmost_argmin(std::span<const double> v, std::size_t a, std::size_t b) {
  std::size_t best = a;
  for (std::size_t i = a + 1; i <= b; ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace

StableScan find_stable_points(const SampledFunction& f, TimeScale t) {
  const auto v = f.values();
  const std::size_t n = v.size();
  const double L = t.log_t;
  std::vector<Side> left(n), right(n);
  std::vector<Frame> stack;

  // Left side: walk back to the previous point with f <= f(m); a barrier must come first.
  for (std::size_t i = 0; i < n; ++i) {
    double seg = v[i];
    while (!stack.empty() && v[stack.back().index] > v[i]) {
      seg = std::max(seg, stack.back().segmax);
      stack.pop_back();
    }
    if (seg >= v[i] + L) left[i] = Side::Pass;
    else left[i] = stack.empty() ? Side::Undetermined : Side::Fail;
    stack.push_back({i, seg});
  }
  stack.clear();
  // Right side: walk forward to the next point with f < f(m).
  for (std::size_t k = n; k-- > 0;) {
    double seg = v[k];
    while (!stack.empty() && v[stack.back().index] >= v[k]) {
      seg = std::max(seg, stack.back().segmax);
      stack.pop_back();
    }
    if (seg >= v[k] + L) right[k] = Side::Pass;
    else right[k] = stack.empty() ? Side::Undetermined : Side::Fail;
    stack.push_back({k, seg});
  }

  StableScan out;
  for (std::size_t i = 0; i < n; ++i) {
    if (left[i] == Side::Pass && right[i] == Side::Pass) out.stable.push_back(i);
    else if (left[i] != Side::Fail && right[i] != Side::Fail) out.undetermined.push_back(i);
  }
  out.left_exhausted = std::none_of(out.stable.begin(), out.stable.end(),
                                    [&](std::size_t i) { return f.position(i) <= 0.0; });
  out.right_exhausted = std::none_of(out.stable.begin(), out.stable.end(),
                                     [&](std::size_t i) { return f.position(i) >= 0.0; });
  return out;
}

std::vector<std::size_t> find_peaks(const SampledFunction& f, std::span<const std::size_t> stable) {
  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k + 1 < stable.size(); ++k)
    peaks.push_back(leftmost_argmax(f.values(), stable[k], stable[k + 1]));
  return peaks;
}

std::vector<std::size_t> find_peaks(const SampledFunction& f, TimeScale t) {
  return find_peaks(f, find_stable_points(f, t).stable);
}

double depth(const SampledFunction& f, std::size_t a, std::size_t b) {
  require(a <= b && b < f.size(), "well endpoints out of order or out of range");
  const double bottom = f.value(leftmost_argmin(f.values(), a, b));
  return std::min(f.value(a), f.value(b)) - bottom;
}

ElevationPair elevation_formulas(const SampledFunction& f, std::size_t a, std::size_t b) {
  require(a <= b && b < f.size(), "interval out of order or out of range");
  const auto v = f.values();
  const std::size_t n = b - a + 1;

  // max_{x <= z <= y} f(z) - f(x) - f(y) + min f: best x is the prefix minimum, best y the suffix minimum.
  std::vector<double> pre(n), suf(n);
  for (std::size_t k = 0; k < n; ++k) pre[k] = k == 0 ? v[a] : std::min(pre[k - 1], v[a + k]);
  for (std::size_t k = n; k-- > 0;) suf[k] = k + 1 == n ? v[a + k] : std::min(suf[k + 1], v[a + k]);
  const std::size_t xmin = leftmost_argmin(v, a, b);
  const double fmin = v[xmin];
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) best = std::max(best, v[a + k] - pre[k] - suf[k]);
  const double pairwise = best + fmin;

  // Local minima other than the leftmost global minimum, each with the highest point between it and xmin.
  double local = 0.0;
  auto is_local_min = [&](std::size_t x) {
    return (x == a || v[x] <= v[x - 1]) && (x == b || v[x] <= v[x + 1]);
  };
  double run = v[xmin];
  for (std::size_t x = xmin + 1; x <= b; ++x) {
    run = std::max(run, v[x]);
    if (is_local_min(x)) local = std::max(local, run - v[x]);
  }
  run = v[xmin];
  for (std::size_t x = xmin; x-- > a;) {
    run = std::max(run, v[x]);
    if (is_local_min(x)) local = std::max(local, run - v[x]);
  }
  return {pairwise, local};
}

double elevation(const SampledFunction& f, std::size_t a, std::size_t b) {
  const ElevationPair e = elevation_formulas(f, a, b);
  double scale = 1.0;
  for (std::size_t i = a; i <= b; ++i) scale = std::max(scale, std::abs(f.value(i)));
  if (std::abs(e.pairwise - e.local_min) > 1e-12 * scale)
    fail(ErrorCode::Internal, "elevation formulas disagree");
  return e.local_min;
}

Neighborhood neighborhood(const SampledFunction& f, const WellRecord& well, double a) {
  require(a > 0.0, "neighborhood radius must be positive");
  require(a <= well.depth * (1.0 + 1e-12) + 1e-12, "neighborhood radius exceeds the well depth");
  const auto v = f.values();
  const double fm = v[well.bottom];
  std::size_t l = well.left;
  while (!(v[l] - fm < a)) ++l;
  std::size_t r = well.right;
  while (!(v[r] - fm < a)) --r;
  return {well.bottom, a, l, r};
}

const WellRecord* StableLandscape::well_of(std::size_t m) const {
  for (const auto& w : wells)
    if (w.bottom == m) return &w;
  return nullptr;
}

const WellRecord& StableLandscape::well_minus() const {
  const WellRecord* w = well_of(marks.m_minus);
  if (!w) fail(ErrorCode::Internal, "well of m^- missing");
  return *w;
}

const WellRecord& StableLandscape::well_plus() const {
  const WellRecord* w = well_of(marks.m_plus);
  if (!w) fail(ErrorCode::Internal, "well of m^+ missing");
  return *w;
}

StableLandscape stable_landscape(const SampledFunction& f, TimeScale t) {
  StableScan scan = find_stable_points(f, t);
  if (scan.left_exhausted || scan.right_exhausted)
    throw WindowExhausted("no stable point on one side of the origin");
  const auto& s = scan.stable;
  const auto v = f.values();

  std::size_t km = 0;  // position in s of m^-
  while (km + 1 < s.size() && f.position(s[km + 1]) <= 0.0) ++km;
  std::size_t kp = s.size() - 1;  // position in s of m^+
  while (kp > 0 && f.position(s[kp - 1]) >= 0.0) --kp;
  if (km == 0 || kp + 1 >= s.size())
    throw WindowExhausted("second stable point beyond the origin-adjacent ones not found");

  Landmarks mk{};
  mk.m_minus = s[km];
  mk.mm_minus = s[km - 1];
  mk.m_plus = s[kp];
  mk.mm_plus = s[kp + 1];
  const std::size_t below = *f.last_at_or_below(0.0);
  const std::size_t above = *f.first_at_or_above(0.0);
  mk.h_minus = leftmost_argmax(v, mk.m_minus, std::max(below, mk.m_minus));
  mk.h_plus = leftmost_argmax(v, std::min(above, mk.m_plus), mk.m_plus);
  mk.hh_minus = leftmost_argmax(v, mk.mm_minus, mk.m_minus);
  mk.hh_plus = leftmost_argmax(v, mk.m_plus, mk.mm_plus);

  for (std::size_t u : scan.undetermined)
    if (u >= mk.mm_minus && u <= mk.mm_plus)
      throw WindowExhausted("an undetermined point lies between m^{--} and m^{++}");

  StableLandscape out{t, s, find_peaks(f, s), scan.undetermined, {}, mk, mk.m_minus, false};
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const std::size_t a = out.peaks[k - 1], b = out.peaks[k];
    out.wells.push_back({a, s[k], b, std::min(v[a], v[b]) - v[s[k]]});
  }
  if (v[mk.h_plus] > v[mk.h_minus]) out.m_t = mk.m_minus;
  else if (v[mk.h_plus] < v[mk.h_minus]) out.m_t = mk.m_plus;
  else out.tie = true;
  return out;
}

SampledFunction rescale(const SampledFunction& f, double a) {
  require(std::isfinite(a) && a > 0.0, "scale factor must be positive");
  std::vector<double> pos(f.positions().begin(), f.positions().end());
  std::vector<double> val(f.values().begin(), f.values().end());
  const double a2 = a * a;
  for (double& p : pos) p *= a2;
  for (double& x : val) x *= a;
  const FunctionKind kind = f.kind() == FunctionKind::PotentialV && a != 1.0 ? FunctionKind::Generic : f.kind();
  return SampledFunction(std::move(pos), std::move(val), kind);
}

std::int64_t snap_to_site(double position) {
  require(std::isfinite(position), "position must be finite");
  const double tr = std::trunc(position);
  if (std::abs(position - tr) == 0.5) return static_cast<std::int64_t>(tr);
  return static_cast<std::int64_t>(std::round(position));
}

}  // namespace sinai
