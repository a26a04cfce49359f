#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "sinai/environment.hpp"
#include "sinai/rng.hpp"

namespace sinai {

// Rates on [a, b] with omega^-_a = 0 and omega^+_b = 0; interior rates are the
// parent environment's. Sites outside [a, b] are not part of the chain.
class ReflectedChain {
 public:
  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  std::size_t size() const { return rates_.size(); }
  bool contains(std::int64_t x) const { return a_ <= x && x <= b_; }
  const RatePair& rates(std::int64_t x) const;
  std::span<const RatePair> all_rates() const { return rates_; }
  // log theta_x relative to the parent's origin normalization.
  std::span<const double> log_theta() const { return log_theta_; }
  // Parent potential V restricted to [a, b].
  std::span<const double> potential() const { return potential_; }

 private:
  friend ReflectedChain reflect(const Environment& env, Window interval);
  std::int64_t a_ = 0, b_ = 0;
  std::vector<RatePair> rates_;
  std::vector<double> log_theta_;
  std::vector<double> potential_;
};

ReflectedChain reflect(const Environment& env, Window interval);

// Per-site jump law in the form the simulator consumes.
class JumpTable {
 public:
  explicit JumpTable(const Environment& env);
  explicit JumpTable(const ReflectedChain& chain);

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(total_.size()) - 1; }
  bool has(std::int64_t x) const { return x >= lo_ && x <= hi(); }
  double total(std::int64_t x) const { return total_[static_cast<std::size_t>(x - lo_)]; }
  double left_probability(std::int64_t x) const { return left_[static_cast<std::size_t>(x - lo_)]; }

 private:
  void fill(std::int64_t lo, std::span<const RatePair> rates);
  std::int64_t lo_ = 0;
  std::vector<double> total_;
  std::vector<double> left_;
};

struct WalkState {
  std::int64_t position;
  double clock = 0.0;
  std::uint64_t jumps = 0;
  rng::Engine rng;

  WalkState(std::int64_t start, rng::Engine engine) : position(start), rng(std::move(engine)) {}
};

// Per-trial state: stream derived from (seed, trial).
WalkState start_walk(std::int64_t start, std::uint64_t seed, std::uint64_t trial);

// Positions after each jump, keeping only the most recent `capacity` entries.
struct Trajectory {
  std::size_t capacity = 1 << 20;
  std::deque<std::pair<double, std::int64_t>> points;  // (T_n, xi_{T_n})

  void record(double time, std::int64_t site);
};

enum class WalkStatus {
  Done,
  // The walker stands on a site the table does not cover. No randomness has
  // been consumed for that step; extend and resume with the same state.
  WindowExhausted,
  // The observer asked to stop.
  Stopped,
};

// One jump: holding time Exp(1)/(omega^- + omega^+), then a left move iff
// U < omega^- / (omega^- + omega^+). Returns false on window exhaustion.
bool step(const JumpTable& table, WalkState& s);

// Runs until clock time t. The jump that would overshoot t is drawn and discarded.
WalkStatus run_until_time(const JumpTable& table, WalkState& s, double t, Trajectory* trajectory = nullptr);

// Runs until clock time t, calling visit(position, clock) after every jump;
// visit returns false to stop early.
template <class Visit>
WalkStatus run_observed(const JumpTable& table, WalkState& s, double t, Visit&& visit) {
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
    if (!visit(s.position, s.clock)) return WalkStatus::Stopped;
  }
}

struct HitOutcome {
  bool hit = false;
  double time = 0.0;
  std::int64_t site = 0;
  std::int64_t final_position = 0;
  WalkStatus status = WalkStatus::Done;
};

// First arrival in `targets` by a jump (tau_A = inf{t > 0 : xi_t in A}), or the
// horizon, whichever is first.
HitOutcome run_until_hit(const JumpTable& table, WalkState& s, std::span<const std::int64_t> targets,
                         double horizon, Trajectory* trajectory = nullptr);

// Fraction of [clock, clock + horizon] spent at each site of the table.
std::vector<double> occupation_histogram(const JumpTable& table, WalkState& s, double horizon);

// Same as run_until_time / run_until_hit on the free walk, but extending `env`
// (doubling its window) whenever the walker leaves it.
void run_until_time(Environment& env, WalkState& s, double t, std::size_t max_sites = 1 << 24);
HitOutcome run_until_hit(Environment& env, WalkState& s, std::span<const std::int64_t> targets, double horizon,
                         std::size_t max_sites = 1 << 24);

}  // namespace sinai
