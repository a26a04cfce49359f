#include "sinai/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "sinai/error.hpp"
#include "sinai/rng.hpp"

namespace sinai {

namespace {

struct HalfPath {
  std::vector<double> pos;  // common-axis distance from the origin, increasing
  std::vector<double> val;
  std::vector<std::size_t> hits;  // sample index of embedding k = 1, 2, ...
  std::vector<int> signs;         // +1 if embedding k went up by c
};

// Brownian path from 0 with variance c^2 per unit of common axis, run until
// `count` exits have been recorded and the axis reaches `span`. Exit points are
// inserted as extra samples at the linearly interpolated crossing time.
HalfPath embed(rng::Engine& g, double c, double step, std::size_t count, double span) {
  HalfPath h;
  h.pos.push_back(0.0);
  h.val.push_back(0.0);
  const double sd = c * std::sqrt(step);
  double level = 0.0;
  for (std::uint64_t k = 1; h.hits.size() < count || h.pos.back() < span; ++k) {
    const double ub = static_cast<double>(k) * step;
    const double wb = h.val.back() + sd * rng::normal(g);
    // Several exits can fall inside one grid step when the increment is large.
    while (h.hits.size() < count && (wb >= level + c || wb <= level - c)) {
      const int sign = wb >= level + c ? 1 : -1;
      const double target = level + sign * c;
      const double ua = h.pos.back(), wa = h.val.back();
      double u = ua + (target - wa) / (wb - wa) * (ub - ua);
      if (u >= ub) break;
      if (u <= ua) u = std::nextafter(ua, ub);
      h.pos.push_back(u);
      h.val.push_back(target);
      h.hits.push_back(h.pos.size() - 1);
      h.signs.push_back(sign);
      level = target;
    }
    h.pos.push_back(ub);
    h.val.push_back(wb);
    if (h.hits.size() < count && (wb >= level + c || wb <= level - c)) {
      // Exit lands exactly on the grid point.
      const int sign = wb >= level + c ? 1 : -1;
      level += sign * c;
      h.hits.push_back(h.pos.size() - 1);
      h.signs.push_back(sign);
    }
  }
  return h;
}

}  // namespace

Coupling skorokhod_couple(const DistributionSpec& spec, std::uint64_t seed, Window window, double step) {
  if (spec.family() != Family::TwoPointSymmetric)
    fail(ErrorCode::Unsupported, "exact Brownian embedding exists only for the two-point family");
  require(window.lo <= 0 && 0 <= window.hi, "coupling window must contain the origin");
  require(std::isfinite(step) && step > 0.0 && step <= 0.5, "coupling step must lie in (0, 0.5]");
  const double c = spec.c();
  const RatePair up{std::exp(-c / 2.0), std::exp(c / 2.0)};  // omega^+ > omega^-
  const RatePair down{up.plus, up.minus};

  auto gr = rng::stream(seed, 0, rng::Stream::BrownianRight);
  auto gl = rng::stream(seed, 0, rng::Stream::BrownianLeft);
  const auto right_count = static_cast<std::size_t>(window.hi);
  const auto left_count = static_cast<std::size_t>(-window.lo) + 1;
  HalfPath right = embed(gr, c, step, right_count, static_cast<double>(window.hi));
  HalfPath left = embed(gl, c, step, left_count, static_cast<double>(-window.lo));

  // V(x) - V(x-1) = log(omega^-_x / omega^+_x) on the right,
  // V(-k) - V(-k+1) = log(omega^+_{-k+1} / omega^-_{-k+1}) on the left.
  std::vector<RatePair> rates(window.size());
  auto at = [&](std::int64_t x) -> RatePair& { return rates[static_cast<std::size_t>(x - window.lo)]; };
  for (std::size_t k = 1; k <= right_count; ++k)
    at(static_cast<std::int64_t>(k)) = right.signs[k - 1] > 0 ? down : up;
  for (std::size_t k = 1; k <= left_count; ++k)
    at(1 - static_cast<std::int64_t>(k)) = left.signs[k - 1] > 0 ? up : down;
  Environment env = Environment::from_rates(spec, seed, window.lo, std::move(rates), Environment::Origin::Coupled);

  std::vector<double> pos, val;
  pos.reserve(left.pos.size() + right.pos.size());
  val.reserve(pos.capacity());
  for (std::size_t i = left.pos.size(); i-- > 1;) {
    pos.push_back(-left.pos[i]);
    val.push_back(left.val[i]);
  }
  const std::size_t origin = pos.size();
  for (std::size_t i = 0; i < right.pos.size(); ++i) {
    pos.push_back(right.pos[i]);
    val.push_back(right.val[i]);
  }

  std::vector<std::size_t> embedding(window.size());
  const SampledFunction v = potential(env);
  for (std::int64_t x = window.lo; x <= window.hi; ++x) {
    std::size_t idx;
    if (x == 0) idx = origin;
    else if (x > 0) idx = origin + right.hits[static_cast<std::size_t>(x) - 1];
    else idx = origin - left.hits[static_cast<std::size_t>(-x) - 1];
    embedding[static_cast<std::size_t>(x - window.lo)] = idx;
    // Same double as V(x), so the coupling holds bit for bit.
    val[idx] = v.value(static_cast<std::size_t>(x - window.lo));
  }
  return Coupling{std::move(env), SampledFunction(std::move(pos), std::move(val), FunctionKind::BrownianW),
                  std::move(embedding), step};
}

double Coupling::sup_distance() const {
  const SampledFunction v = potential(env);
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v.value(i) - w.interpolate(v.position(i))));
  return worst;
}

SampledFunction brownian_path(std::uint64_t seed, std::uint64_t index, double half_width, double step,
                              double sigma2) {
  require(std::isfinite(step) && step > 0.0, "path step must be positive");
  require(std::isfinite(half_width) && half_width >= step, "path half-width must cover one step");
  require(std::isfinite(sigma2) && sigma2 > 0.0, "path variance must be positive");
  auto g = rng::stream(seed, index, rng::Stream::Path);
  const auto K = static_cast<std::size_t>(std::floor(half_width / step));
  const double sd = std::sqrt(step * sigma2);
  std::vector<double> right(K + 1, 0.0), left(K + 1, 0.0);
  for (std::size_t k = 1; k <= K; ++k) right[k] = right[k - 1] + sd * rng::normal(g);
  for (std::size_t k = 1; k <= K; ++k) left[k] = left[k - 1] + sd * rng::normal(g);
  std::vector<double> pos, val;
  pos.reserve(2 * K + 1);
  val.reserve(2 * K + 1);
  for (std::size_t k = K; k >= 1; --k) {
    pos.push_back(-static_cast<double>(k) * step);
    val.push_back(left[k]);
  }
  for (std::size_t k = 0; k <= K; ++k) {
    pos.push_back(static_cast<double>(k) * step);
    val.push_back(right[k]);
  }
  return SampledFunction(std::move(pos), std::move(val), FunctionKind::BrownianW);
}

}  // namespace sinai
