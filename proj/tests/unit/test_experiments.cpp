#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "sinai/error.hpp"
#include "sinai/experiments.hpp"
#include "sinai/oracle.hpp"

using namespace sinai;

namespace {

const DistributionSpec two_point = DistributionSpec::two_point(1.0);

// Nearest-neighbour steps of v become rate ratios of 2 or 1/2, so V = v log 2
// and mirror images stay exact.
Environment with_potential(const std::vector<double>& v, std::int64_t lo) {
  std::vector<RatePair> rates(v.size());
  rates[0] = {1.0, 1.0};
  for (std::size_t i = 1; i < v.size(); ++i) rates[i] = v[i] > v[i - 1] ? RatePair{2.0, 1.0} : RatePair{1.0, 2.0};
  return Environment::from_rates(two_point, 0, lo, std::move(rates));
}

Prepared prepared(Environment env, double log_t) {
  SampledFunction v = potential(env);
  Prepared p{std::move(env), std::move(v), std::nullopt, TimeScale::from_log(log_t), ModelParams{}, std::nullopt};
  try {
    p.land = stable_landscape(p.v, p.t);
  } catch (const WindowExhausted&) {
  }
  return p;
}

// Mirror image of a lattice walk about the origin.
std::vector<double> mirrored(std::uint64_t seed, std::size_t half) {
  std::mt19937_64 g(seed);
  const auto path = brute::lattice_path(g, half + 1);
  std::vector<double> v(2 * half + 1);
  for (std::size_t i = 0; i <= half; ++i) v[half + i] = v[half - i] = path[i];
  return v;
}

}  // namespace

TEST_CASE("mirror-symmetric potentials have a zero peak gap and fail gamma3") {
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 40 && tested < 5; ++seed) {
    const std::size_t half = 3000;
    const auto p = prepared(with_potential(mirrored(seed, half), -static_cast<std::int64_t>(half)), 4.0);
    if (!p.land) continue;
    ++tested;
    CHECK(p.land->tie);
    for (double eps : {0.05, 0.1, 0.3}) {
      const GammaReport g = classify_gamma(p, eps);
      CHECK(g.sets[G3].evaluated);
      CHECK(g.sets[G3].value == 0.0);
      CHECK_FALSE(g.sets[G3].member);
      CHECK(g.sets[G3].margin == -eps);
      CHECK_FALSE(g.overall);
    }
  }
  CHECK(tested == 5);
}

TEST_CASE("gamma report invariants on sampled environments") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Prepared p = prepare(two_point, seed, TimeScale::from_log(6.0), Mode::Surrogate);
    REQUIRE(p.land.has_value());
    const double L = p.t.log_t;
    std::array<GammaReport, 3> by_eps;
    const double grid[3] = {0.3, 0.1, 0.02};
    for (int k = 0; k < 3; ++k) {
      const GammaReport g = by_eps[k] = classify_gamma(p, grid[k]);
      bool all = true;
      for (int s = 0; s < GammaCount; ++s) {
        const SetResult& r = g.sets[s];
        if (r.evaluated) CHECK(r.member == (r.margin > 0.0));
        all = all && r.member;
      }
      CHECK(g.overall == all);
      CHECK_FALSE(g.sets[G1].evaluated);
      // Gamma5 membership means the well is strictly deeper than log t.
      if (g.sets[G5Minus].member) CHECK(p.land->well_minus().depth > L);
      if (g.sets[G5Plus].member) CHECK(p.land->well_plus().depth > L);
    }
    // Shrinking eps never removes gamma3..gamma5 membership.
    for (int k = 1; k < 3; ++k)
      for (int s = G3; s <= G5Plus; ++s)
        if (by_eps[k - 1].sets[s].member) CHECK(by_eps[k].sets[s].member);
    CHECK(by_eps[0].sets[G2].member == by_eps[2].sets[G2].member);
  }
}

TEST_CASE("coupled mode evaluates gamma1 against kappa M log log t") {
  const Prepared p = prepare(two_point, 3, TimeScale::from_log(5.0), Mode::Coupled);
  REQUIRE(p.w.has_value());
  const GammaReport g = classify_gamma(p, 0.1);
  CHECK(g.sets[G1].evaluated);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.v.size(); ++i)
    if (std::abs(p.v.position(i)) < p.radius())
      worst = std::max(worst, std::abs(p.v.value(i) - p.w->interpolate(p.v.position(i))));
  CHECK(g.sets[G1].value == worst);
  CHECK(g.sets[G1].margin == doctest::Approx(3.0 * std::log(5.0) - worst));
}

TEST_CASE("exhausted landmarks leave the environment unresolved") {
  const Environment flat = Environment::from_rates(two_point, 0, -50, std::vector<RatePair>(101, {1.0, 1.0}));
  const Prepared p = prepared(flat, 3.0);
  CHECK_FALSE(p.land.has_value());
  CHECK_THROWS_AS(landmark_sites(p, 0.1), WindowExhausted);
  const GammaReport g = classify_gamma(p, 0.1);
  CHECK_FALSE(g.resolved);
  CHECK_FALSE(g.overall);
  const BoundCheck b = quenched_localization(p, 1.0, 0.1, {}, CheckParams{});
  CHECK(b.verdict == "not-applicable");
}

TEST_CASE("settle compares the CI upper end, or the exact value when resolution limited") {
  BoundCheck c;
  c.rate = 0.01;
  c.ci = {0.0, 0.02};
  settle(c);
  CHECK(c.basis == "ci");
  CHECK(c.verdict == "fail");
  c.resolution_limited = true;
  c.exact = 0.005;
  settle(c);
  CHECK(c.basis == "exact");
  CHECK(c.upper == 0.005);
  CHECK(c.verdict == "pass");
  c.exact = 0.5;  // outside the CI: the exact value is not trusted
  settle(c);
  CHECK(c.basis == "ci");
  c.cross_check_ok = false;
  c.ci = {0.0, 0.001};
  settle(c);
  CHECK(c.verdict == "fail");
  c.applicable = false;
  settle(c);
  CHECK(c.verdict == "not-applicable");
}

TEST_CASE("fit_constant takes K from the first applicable t") {
  std::vector<BoundCheck> by_t(3);
  by_t[0].applicable = false;
  by_t[1].rate = 0.1;
  by_t[1].ci = {0.0, 0.3};
  by_t[2].rate = 0.01;
  by_t[2].ci = {0.0, 0.02};
  fit_constant(by_t);
  CHECK(by_t[0].verdict == "not-applicable");
  CHECK(by_t[1].K == doctest::Approx(3.0));
  CHECK(by_t[1].verdict == "pass");
  CHECK(by_t[2].K == by_t[1].K);
  CHECK(by_t[2].verdict == "pass");

  std::vector<BoundCheck> small(1);
  small[0].rate = 1e-5;
  small[0].ci = {0.0, 0.5};
  fit_constant(small);
  CHECK(small[0].K == doctest::Approx(5e4));
  bool flagged = false;
  for (const auto& [k, v] : small[0].details) flagged = flagged || k == "suspicious_K";
  CHECK(flagged);

  std::vector<BoundCheck> loose(1);
  loose[0].rate = 2.0;
  loose[0].ci = {0.0, 0.5};
  fit_constant(loose);
  CHECK(loose[0].K == 1.0);
}

TEST_CASE("a vanishing peak gap makes the wrong-side bound vacuous") {
  // eps2 = 0: e^{-0} log^{(2k+1)M} t >= 1 bounds any probability.
  BoundCheck c;
  c.rate = std::exp(-0.0) * std::pow(8.0, 3.0 * 3.0);
  c.ci = {0.4, 0.6};
  settle(c);
  CHECK(c.bound >= 1.0);
  CHECK(c.verdict == "pass");
  // The check itself refuses environments outside Gamma, and mirror images never belong to it.
  const std::size_t half = 3000;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = prepared(with_potential(mirrored(seed, half), -static_cast<std::int64_t>(half)), 4.0);
    if (!p.land) continue;
    CHECK(lemma_check(p, 2, 0.1, CheckParams{}, 1).verdict == "not-applicable");
  }
}

TEST_CASE("event tally logic on hand-built records") {
  const Prepared p = prepare(two_point, 5, TimeScale::from_log(5.0), Mode::Surrogate);
  REQUIRE(p.land.has_value());
  const Sites s = landmark_sites(p, 0.1);
  const std::int64_t mt = s.m_t_is_plus ? s.m_plus : s.m_minus;
  std::vector<TrialRecord> r = {
      {mt, true, !s.m_t_is_plus, s.m_t_is_plus, true, true, !s.m_t_is_plus, s.m_t_is_plus},  // all four
      {mt, true, !s.m_t_is_plus, s.m_t_is_plus, false, false, !s.m_t_is_plus, s.m_t_is_plus},  // escaped
      {0, false, false, false, true, true, false, false},                                       // no hit
  };
  const EventTally e = tally_events(p, 0.1, r);
  CHECK(e.trials == 3);
  CHECK(e.counts[0] == 2);
  CHECK(e.lhs == doctest::Approx(1.0 / 3.0));
  // 1 - 1/3 (not A1) - 1/3 (not A2) - 1/2 (not A3 | A1 A2) - 0
  CHECK(e.rhs == doctest::Approx(1.0 - 1.0 / 3 - 1.0 / 3 - 0.5));
  CHECK(e.subset_ok);
  CHECK(e.chain_ok);

  r.push_back({0, true, true, true, true, true, false, false});  // both sides first: impossible
  CHECK_FALSE(tally_events(p, 0.1, r).subset_ok);
}

TEST_CASE("simulated events respect the subset structure") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 30 && checked < 3; ++seed) {
    const Prepared p = prepare(two_point, seed, TimeScale::from_log(5.0), Mode::Surrogate);
    if (!p.land || !classify_gamma(p, 0.1).overall) continue;
    ++checked;
    const EventTally e = event_decomposition(p, 0.1, 200, 9);
    CHECK(e.subset_ok);
    CHECK(e.chain_ok);
    for (const TrialRecord& r : e.records) {
      CHECK((r.a2m || r.a2p) == r.a1);
      CHECK_FALSE((r.a2m && r.a2p));
    }
    CHECK(e.counts[7] <= e.counts[5]);
    CHECK(e.counts[8] <= e.counts[6]);
    // A radius covering the whole window makes localization certain.
    const Sites s = landmark_sites(p, 0.1);
    const double reach = static_cast<double>(p.env.window().size()) / (p.t.log_t * p.t.log_t);
    const BoundCheck b = quenched_localization(p, reach + 1.0, 0.1, run_quenched(p, s, 50, 4), CheckParams{});
    CHECK(b.events == 0);
    CHECK(b.details.front().second == 1.0);
  }
  CHECK(checked == 3);
}

TEST_CASE("campaign pieces are reproducible") {
  const double lt[] = {5.0, 6.0};
  const double eps[] = {0.2, 0.1};
  const AnnealedTable a = annealed_frequencies(two_point, lt, eps, 40, 7, Mode::Surrogate, {});
  const AnnealedTable b = annealed_frequencies(two_point, lt, eps, 40, 7, Mode::Surrogate, {});
  REQUIRE(a.cells.size() == 4);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].members == b.cells[i].members);
    CHECK(a.cells[i].overall == b.cells[i].overall);
  }
  const Prepared p = prepare(two_point, 2, TimeScale::from_log(5.0), Mode::Surrogate);
  const Sites s = landmark_sites(p, 0.1);
  const auto r1 = run_quenched(p, s, 30, 11), r2 = run_quenched(p, s, 30, 11);
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].final_position == r2[i].final_position);
}

TEST_CASE("optional stopping on a flat environment") {
  const Environment flat = Environment::from_rates(two_point, 0, -20, std::vector<RatePair>(41, {1.0, 1.0}));
  const MartingaleReport m = martingale_check(flat, -5, 2, 10, 4000, 3);
  CHECK(m.f_z == doctest::Approx(7.0));
  CHECK(m.ok);
  CHECK(std::abs(m.estimate - m.f_z) <= 3 * m.std_error);
}

TEST_CASE("scaling check on a handful of paths") {
  const double scales[] = {0.5, 1.0, 2.0, 3.0};
  const ScalingReport r = scaling_check(two_point, 5, 40, scales, 4.0, 9.0, 40);
  CHECK(r.exact_failures == 0);
  CHECK(r.ks.p_value > 1e-3);
}
