#include "sinai/walker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sinai/error.hpp"
#include "sinai/landscape.hpp"

namespace sinai {

const RatePair& ReflectedChain::rates(std::int64_t x) const {
  require(contains(x), "reflected chain queried outside its interval");
  return rates_[static_cast<std::size_t>(x - a_)];
}

ReflectedChain reflect(const Environment& env, Window interval) {
  require(interval.lo < interval.hi, "reflection interval needs at least two sites");
  if (!env.window().contains(interval)) throw WindowExhausted("reflection interval exceeds the environment window");
  ReflectedChain c;
  c.a_ = interval.lo;
  c.b_ = interval.hi;
  const ReversibleMeasure theta = reversible_measure(env);
  const SampledFunction v = potential(env);
  for (std::int64_t x = interval.lo; x <= interval.hi; ++x) {
    RatePair r = env.rates(x);
    if (x == interval.lo) r.minus = 0.0;
    if (x == interval.hi) r.plus = 0.0;
    c.rates_.push_back(r);
    c.log_theta_.push_back(theta.log(x));
    c.potential_.push_back(v.value(static_cast<std::size_t>(x - env.window().lo)));
  }
  return c;
}

void JumpTable::fill(std::int64_t lo, std::span<const RatePair> rates) {
  lo_ = lo;
  total_.resize(rates.size());
  left_.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    total_[i] = rates[i].minus + rates[i].plus;
    left_[i] = rates[i].minus / (rates[i].minus + rates[i].plus);
  }
}

JumpTable::JumpTable(const Environment& env) { fill(env.window().lo, env.all_rates()); }
JumpTable::JumpTable(const ReflectedChain& chain) { fill(chain.a(), chain.all_rates()); }

WalkState start_walk(std::int64_t start, std::uint64_t seed, std::uint64_t trial) {
  return WalkState(start, rng::stream(seed, trial, rng::Stream::Trial));
}

void Trajectory::record(double time, std::int64_t site) {
  if (capacity == 0) return;
  if (points.size() == capacity) points.pop_front();
  points.emplace_back(time, site);
}

bool step(const JumpTable& table, WalkState& s) {
  if (!table.has(s.position)) return false;
  const double e = rng::exponential(s.rng);
  const double u = rng::uniform(s.rng);
  s.clock += e / table.total(s.position);
  s.position += u < table.left_probability(s.position) ? -1 : 1;
  ++s.jumps;
  return true;
}

WalkStatus run_until_time(const JumpTable& table, WalkState& s, double t, Trajectory* trajectory) {
  require(t >= s.clock, "target time lies in the past");
  while (true) {
    if (!table.has(s.position)) return WalkStatus::WindowExhausted;
    const double e = rng::exponential(s.rng);
    const double u = rng::uniform(s.rng);
    const double next = s.clock + e / table.total(s.position);
    if (next > t) {
      s.clock = t;
      return WalkStatus::Done;
    }
    s.clock = next;
    s.position += u < table.left_probability(s.position) ? -1 : 1;
    ++s.jumps;
    if (trajectory) trajectory->record(s.clock, s.position);
  }
}

HitOutcome run_until_hit(const JumpTable& table, WalkState& s, std::span<const std::int64_t> targets,
                         double horizon, Trajectory* trajectory) {
  require(!targets.empty(), "hitting query needs at least one target");
  HitOutcome out;
  while (true) {
    if (!table.has(s.position)) {
      out.status = WalkStatus::WindowExhausted;
      break;
    }
    const double e = rng::exponential(s.rng);
    const double u = rng::uniform(s.rng);
    const double next = s.clock + e / table.total(s.position);
    if (next > horizon) {
      s.clock = horizon;
      break;
    }
    s.clock = next;
    s.position += u < table.left_probability(s.position) ? -1 : 1;
    ++s.jumps;
    if (trajectory) trajectory->record(s.clock, s.position);
    if (std::find(targets.begin(), targets.end(), s.position) != targets.end()) {
      out.hit = true;
      out.time = s.clock;
      out.site = s.position;
      break;
    }
  }
  out.final_position = s.position;
  return out;
}

std::vector<double> occupation_histogram(const JumpTable& table, WalkState& s, double horizon) {
  require(horizon > 0.0, "occupation horizon must be positive");
  std::vector<double> occ(static_cast<std::size_t>(table.hi() - table.lo() + 1), 0.0);
  const double end = s.clock + horizon;
  while (true) {
    if (!table.has(s.position)) throw WindowExhausted("walker left the table during an occupation run");
    const double e = rng::exponential(s.rng);
    const double u = rng::uniform(s.rng);
    const double next = s.clock + e / table.total(s.position);
    const std::size_t i = static_cast<std::size_t>(s.position - table.lo());
    if (next >= end) {
      occ[i] += end - s.clock;
      s.clock = end;
      break;
    }
    occ[i] += next - s.clock;
    s.clock = next;
    s.position += u < table.left_probability(s.position) ? -1 : 1;
    ++s.jumps;
  }
  for (double& x : occ) x /= horizon;
  return occ;
}

namespace {

void widen(Environment& env, std::int64_t position, std::size_t max_sites) {
  const Window w = env.window();
  const std::int64_t half = std::max<std::int64_t>(static_cast<std::int64_t>(w.size()), 16);
  Window wider{std::min(w.lo, position - half), std::max(w.hi, position + half)};
  if (wider.size() > max_sites) throw WindowExhausted("walker escaped beyond the site budget");
  env = env.extend(wider);
}

}  // namespace

void run_until_time(Environment& env, WalkState& s, double t, std::size_t max_sites) {
  while (true) {
    JumpTable table(env);
    if (run_until_time(table, s, t) == WalkStatus::Done) return;
    widen(env, s.position, max_sites);
  }
}

HitOutcome run_until_hit(Environment& env, WalkState& s, std::span<const std::int64_t> targets, double horizon,
                         std::size_t max_sites) {
  while (true) {
    JumpTable table(env);
    HitOutcome out = run_until_hit(table, s, targets, horizon);
    if (out.status == WalkStatus::Done) return out;
    widen(env, s.position, max_sites);
  }
}

}  // namespace sinai
