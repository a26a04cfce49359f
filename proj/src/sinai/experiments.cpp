#include "sinai/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sinai/error.hpp"
#include "sinai/oracle.hpp"
#include "sinai/parallel.hpp"
#include "sinai/walker.hpp"

namespace sinai {

std::string to_string(Mode m) { return m == Mode::Coupled ? "coupled" : "surrogate"; }

Mode mode_from_string(const std::string& name) {
  if (name == "surrogate") return Mode::Surrogate;
  if (name == "coupled") return Mode::Coupled;
  fail(ErrorCode::Parse, "unknown mode '" + name + "'");
}

double Prepared::radius() const { return std::pow(t.log_t, params.M); }

Prepared prepare(const DistributionSpec& spec, std::uint64_t seed, TimeScale t, Mode mode, const ModelParams& params,
                 std::size_t max_sites) {
  require(params.M > 2.0 && std::isfinite(params.M), "M must exceed 2");
  require(params.kappa_hat > 0.0 && std::isfinite(params.kappa_hat), "kappa_hat must be positive");
  const double radius = std::pow(t.log_t, params.M);
  require(2.0 * radius + 5.0 <= static_cast<double>(max_sites), "site budget smaller than [-log^M t, log^M t]");
  auto R = static_cast<std::int64_t>(std::ceil(radius)) + 2;
  while (true) {
    const Window win{-R, R};
    std::optional<Prepared> p;
    if (mode == Mode::Coupled) {
      Coupling c = skorokhod_couple(spec, seed, win);
      SampledFunction v = potential(c.env);
      p.emplace(Prepared{std::move(c.env), std::move(v), std::move(c.w), t, params, std::nullopt});
    } else {
      Environment env = Environment::sample(spec, seed, win);
      SampledFunction v = potential(env);
      p.emplace(Prepared{std::move(env), std::move(v), std::nullopt, t, params, std::nullopt});
    }
    try {
      p->land = stable_landscape(p->f(), t);
      return std::move(*p);
    } catch (const WindowExhausted&) {
      if (static_cast<std::size_t>(4 * R + 1) > max_sites) return std::move(*p);
      R *= 2;
    }
  }
}

Sites landmark_sites(const Prepared& p, double eps) {
  if (!p.land) throw WindowExhausted("landmarks did not resolve within the site budget");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const SampledFunction& f = p.f();
  const StableLandscape& L = *p.land;
  auto site = [&](std::size_t i) { return snap_to_site(f.position(i)); };
  const WellRecord& wm = L.well_minus();
  const WellRecord& wp = L.well_plus();
  const double a = eps * p.t.log_t;
  const Neighborhood nm = neighborhood(f, wm, a);
  const Neighborhood np = neighborhood(f, wp, a);
  Sites s{};
  s.m_minus = site(L.marks.m_minus);
  s.m_plus = site(L.marks.m_plus);
  s.m_t = site(L.m_t);
  s.m_t_is_plus = L.m_t == L.marks.m_plus && L.marks.m_plus != L.marks.m_minus;
  s.h_minus = site(L.marks.h_minus);
  s.h_plus = site(L.marks.h_plus);
  s.well_minus_lo = site(wm.left);
  s.well_minus_hi = site(wm.right);
  s.well_plus_lo = site(wp.left);
  s.well_plus_hi = site(wp.right);
  s.n_minus = {f.position(nm.left), f.position(nm.right)};
  s.n_plus = {f.position(np.left), f.position(np.right)};
  return s;
}

const char* gamma_name(int set) {
  static const char* names[] = {"gamma1",  "gamma2",  "gamma3",  "gamma4-", "gamma4+",
                                "gamma5-", "gamma5+", "gamma6-", "gamma6+"};
  require(set >= 0 && set < GammaCount, "no such gamma set");
  return names[set];
}

namespace {

SetResult judged(double value, double margin) { return SetResult{true, margin > 0.0, value, margin}; }

}  // namespace

GammaReport classify_gamma(const Prepared& p, double eps) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  GammaReport r;
  r.log_t = p.t.log_t;
  r.eps = eps;
  r.params = p.params;
  const double L = p.t.log_t;
  const double R = p.radius();

  if (p.mode() == Mode::Coupled) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.v.size(); ++i) {
      const double x = p.v.position(i);
      if (std::abs(x) < R) worst = std::max(worst, std::abs(p.v.value(i) - p.w->interpolate(x)));
    }
    r.sets[G1] = judged(worst, p.params.kappa_hat * p.params.M * std::log(L) - worst);
  } else {
    r.sets[G1] = SetResult{false, true, 0.0, 0.0};
  }

  if (!p.land) {
    const Window w = p.env.window();
    const double reach = static_cast<double>(std::min(-w.lo, w.hi));
    r.sets[G2] = judged(reach, R - reach);
    r.resolved = false;
    r.overall = false;
    return r;
  }
  r.resolved = true;
  const SampledFunction& f = p.f();
  const StableLandscape& land = *p.land;
  const double hh = std::max(std::abs(f.position(land.marks.hh_minus)), std::abs(f.position(land.marks.hh_plus)));
  r.sets[G2] = judged(hh, R - hh);

  const double gap = std::abs(f.value(land.marks.h_minus) - f.value(land.marks.h_plus)) / L;
  r.sets[G3] = judged(gap, gap - eps);

  const WellRecord* wells[2] = {&land.well_minus(), &land.well_plus()};
  for (int side = 0; side < 2; ++side) {
    const WellRecord& w = *wells[side];
    const double elev = (L - elevation(f, w.left, w.right)) / L;
    r.sets[G4Minus + side] = judged(elev, elev - eps);
    const double dep = (w.depth - L) / L;
    r.sets[G5Minus + side] = judged(dep, dep - eps);
    const double breadth = neighborhood(f, w, eps * L).breadth(f);
    r.sets[G6Minus + side] = judged(breadth, eps * L * L - breadth);
  }
  r.overall = std::all_of(r.sets.begin(), r.sets.end(), [](const SetResult& s) { return s.member; });
  return r;
}

void settle(BoundCheck& c) {
  if (!c.applicable) {
    c.verdict = "not-applicable";
    return;
  }
  c.upper = c.ci.hi;
  c.basis = "ci";
  if (c.resolution_limited && c.exact && c.ci.lo <= *c.exact && *c.exact <= c.ci.hi) {
    c.upper = *c.exact;
    c.basis = "exact";
  }
  c.bound = c.K * c.rate;
  c.verdict = c.upper <= c.bound && c.cross_check_ok ? "pass" : "fail";
}

void fit_constant(std::span<BoundCheck> by_t) {
  auto first = std::find_if(by_t.begin(), by_t.end(), [](const BoundCheck& c) { return c.applicable; });
  if (first == by_t.end()) return;
  settle(*first);
  const double K = std::max(1.0, first->upper / first->rate);
  for (BoundCheck& c : by_t) {
    if (!c.applicable) {
      settle(c);
      continue;
    }
    c.K = K;
    if (K >= 1e3) c.details.emplace_back("suspicious_K", 1.0);
    settle(c);
  }
}

namespace {

// Free walk that extends a private copy of the environment when it walks off
// the shared one.
template <class Visit>
WalkStatus walk_free(const Environment& env, const JumpTable& table, WalkState& s, double t, Visit& visit) {
  WalkStatus st = run_observed(table, s, t, visit);
  Window w = env.window();
  std::optional<Environment> local;
  std::optional<JumpTable> local_table;
  while (st == WalkStatus::WindowExhausted) {
    const auto span = static_cast<std::int64_t>(w.size());
    w = Window{w.lo - span, w.hi + span};
    if (w.size() > (std::size_t{1} << 25)) throw WindowExhausted("walker left the largest admissible window");
    local.emplace(env.extend(w));
    local_table.emplace(*local);
    st = run_observed(*local_table, s, t, visit);
  }
  return st;
}

struct TrialPlan {
  std::uint64_t n;
  bool limited;
};

// horizon: simulated time per trial when trials run to t, 0 when they stop early.
TrialPlan plan_trials(double rate, const CheckParams& cp, double horizon) {
  double cap = static_cast<double>(std::max(cp.trials, cp.max_trials));
  if (horizon > 0.0) cap = std::min(cap, std::max(static_cast<double>(cp.trials), std::floor(cp.time_budget / horizon)));
  const double want = rate > 0.0 ? std::ceil(4.0 * cp.z * cp.z / rate) : std::numeric_limits<double>::infinity();
  const double n = std::clamp(want, static_cast<double>(cp.trials), cap);
  return {static_cast<std::uint64_t>(n), want > n};
}

void estimate(BoundCheck& c, std::uint64_t events, const TrialPlan& plan, const CheckParams& cp) {
  c.trials = plan.n;
  c.events = events;
  c.p_hat = static_cast<double>(events) / static_cast<double>(plan.n);
  c.ci = stats::wilson(events, plan.n, cp.z);
  c.resolution_limited = plan.limited;
}

double log_factor(const Prepared& p, double power) { return std::pow(p.t.log_t, power * p.params.M); }

BoundCheck base_check(const Prepared& p, const char* claim, double eps) {
  BoundCheck c;
  c.claim = claim;
  c.log_t = p.t.log_t;
  c.env_seed = p.env.seed();
  c.applicable = p.land.has_value() && classify_gamma(p, eps).overall;
  return c;
}

std::uint64_t count_true(const std::vector<std::uint8_t>& v) {
  return static_cast<std::uint64_t>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

BoundCheck lemma1(const Prepared& p, double eps, const CheckParams& cp, std::uint64_t seed) {
  BoundCheck c = base_check(p, "lemma1", eps);
  if (!c.applicable) return c;
  const Sites s = landmark_sites(p, eps);
  const SampledFunction& f = p.f();
  const double L = p.t.log_t;
  const double e_minus = 1.0 - elevation(f, p.land->well_minus().left, p.land->well_minus().right) / L;
  const double e_plus = 1.0 - elevation(f, p.land->well_plus().left, p.land->well_plus().right) / L;
  c.exponent = std::min(e_minus, e_plus);
  c.rate = std::exp(-e_minus * L) + std::exp(-e_plus * L);
  double vmax = -std::numeric_limits<double>::infinity(), vmin = -vmax;
  for (std::int64_t x = s.m_minus; x <= s.m_plus; ++x) {
    const double v = p.v.value(static_cast<std::size_t>(x - p.env.window().lo));
    vmax = std::max(vmax, v);
    vmin = std::min(vmin, v);
  }
  c.details = {{"eps1_minus", e_minus},
               {"eps1_plus", e_plus},
               {"Delta", static_cast<double>(s.m_plus - s.m_minus)},
               {"gamma", vmax - vmin}};

  const TrialPlan plan = plan_trials(c.rate, cp, 0.0);
  const std::uint64_t n = plan.n;
  const double t = p.t.time();
  const JumpTable table(p.env);
  std::vector<std::uint8_t> survived(n);
  parallel_for(n, [&](std::size_t i) {
    WalkState st = start_walk(0, seed, i);
    bool hit = false;
    auto visit = [&](std::int64_t x, double) {
      hit = x == s.m_minus || x == s.m_plus;
      return !hit;
    };
    walk_free(p.env, table, st, t, visit);
    survived[i] = !hit;
  });
  estimate(c, count_true(survived), plan, cp);
  if (s.m_minus < 0 && s.m_plus > 0) {
    c.exact = absorbed_survival(p.env, s.m_minus, s.m_plus, 0, t);
    c.details.emplace_back("exact_in_ci", c.ci.lo <= *c.exact && *c.exact <= c.ci.hi ? 1.0 : 0.0);
  }
  settle(c);
  return c;
}

// P_0(the first of {m^-, m^+} visited is m^-), the origin counting only on return.
std::optional<double> minus_first(const Environment& env, std::int64_t m_minus, std::int64_t m_plus) {
  if (m_minus < 0 && m_plus > 0) return ruin_probability(env, m_minus, 0, m_plus);
  const RatePair& r0 = env.rates(0);
  const double q = r0.minus / (r0.minus + r0.plus);
  if (m_minus == 0 && m_plus > 0) return q + (1.0 - q) * (m_plus > 1 ? ruin_probability(env, 0, 1, m_plus) : 0.0);
  if (m_minus < 0 && m_plus == 0) return q * (m_minus < -1 ? ruin_probability(env, m_minus, -1, 0) : 1.0);
  return std::nullopt;
}

BoundCheck lemma2(const Prepared& p, double eps, const CheckParams& cp, std::uint64_t seed) {
  BoundCheck c = base_check(p, "lemma2", eps);
  if (!c.applicable) return c;
  const Sites s = landmark_sites(p, eps);
  const SampledFunction& f = p.f();
  const double L = p.t.log_t;
  const auto pm = minus_first(p.env, s.m_minus, s.m_plus);
  if (!pm) {
    c.applicable = false;
    settle(c);
    return c;
  }
  c.side = s.m_t_is_plus ? "minus" : "plus";  // the wrong side
  const double e2 = std::abs(f.value(p.land->marks.h_minus) - f.value(p.land->marks.h_plus)) / L;
  c.exponent = e2;
  c.rate = std::exp(-e2 * L) * log_factor(p, 2.0 * p.params.kappa_hat + 1.0);
  c.exact = s.m_t_is_plus ? *pm : 1.0 - *pm;

  const TrialPlan plan = plan_trials(c.rate, cp, 0.0);
  const std::uint64_t n = plan.n;
  const JumpTable table(p.env);
  const std::int64_t wrong = s.m_t_is_plus ? s.m_minus : s.m_plus;
  std::vector<std::uint8_t> wrong_first(n);
  parallel_for(n, [&](std::size_t i) {
    WalkState st = start_walk(0, seed, i);
    std::int64_t first = 0;
    bool hit = false;
    auto visit = [&](std::int64_t x, double) {
      if (x == s.m_minus || x == s.m_plus) {
        first = x;
        hit = true;
      }
      return !hit;
    };
    walk_free(p.env, table, st, std::numeric_limits<double>::infinity(), visit);
    wrong_first[i] = hit && first == wrong;
  });
  estimate(c, count_true(wrong_first), plan, cp);
  const double sigma = stats::binomial_sigma(*c.exact, n);
  c.cross_check_ok = std::abs(c.p_hat - *c.exact) <= cp.z * sigma;
  c.details = {{"eps2", e2}, {"exact_sigma", sigma}};
  settle(c);
  return c;
}

struct SideWell {
  std::int64_t m, lo, hi;
  Span n;
  const WellRecord* well;
};

SideWell m_t_well(const Prepared& p, const Sites& s) {
  if (s.m_t_is_plus) return {s.m_plus, s.well_plus_lo, s.well_plus_hi, s.n_plus, &p.land->well_plus()};
  return {s.m_minus, s.well_minus_lo, s.well_minus_hi, s.n_minus, &p.land->well_minus()};
}

BoundCheck lemma3(const Prepared& p, double eps, const CheckParams& cp, std::uint64_t seed) {
  BoundCheck c = base_check(p, "lemma3", eps);
  if (!c.applicable) return c;
  const Sites s = landmark_sites(p, eps);
  const SideWell w = m_t_well(p, s);
  const double L = p.t.log_t;
  c.side = s.m_t_is_plus ? "plus" : "minus";
  const double e3 = w.well->depth / L - 1.0;
  c.exponent = e3;
  c.rate = std::exp(-e3 * L) * log_factor(p, 2.0 * p.params.kappa_hat);
  c.details = {{"eps3", e3}, {"depth", w.well->depth}};

  const double t = p.t.time();
  const TrialPlan plan = plan_trials(c.rate, cp, t);
  const std::uint64_t n = plan.n;
  const JumpTable table(p.env);
  std::vector<std::uint8_t> escaped(n);
  parallel_for(n, [&](std::size_t i) {
    WalkState st = start_walk(w.m, seed, i);
    bool out = false;
    auto visit = [&](std::int64_t x, double) {
      out = x == w.lo || x == w.hi;
      return !out;
    };
    walk_free(p.env, table, st, t, visit);
    escaped[i] = out;
  });
  estimate(c, count_true(escaped), plan, cp);
  if (w.lo < w.m && w.m < w.hi) {
    c.exact = 1.0 - absorbed_survival(p.env, w.lo, w.hi, w.m, t);
    c.details.emplace_back("exact_in_ci", c.ci.lo <= *c.exact && *c.exact <= c.ci.hi ? 1.0 : 0.0);
  }
  settle(c);
  return c;
}

BoundCheck lemma4(const Prepared& p, double eps, const CheckParams& cp, std::uint64_t seed) {
  BoundCheck c = base_check(p, "lemma4", eps);
  if (!c.applicable) return c;
  const Sites s = landmark_sites(p, eps);
  const SideWell w = m_t_well(p, s);
  const double L = p.t.log_t;
  c.side = s.m_t_is_plus ? "plus" : "minus";
  c.exponent = eps;
  c.rate = std::exp(-eps * L) * log_factor(p, 2.0 * p.params.kappa_hat + 1.0);

  const ReflectedChain chain = reflect(p.env, Window{w.lo, w.hi});
  const JumpTable table(chain);
  const double t = p.t.time();
  constexpr int K = 4;
  const TrialPlan plan = plan_trials(c.rate, cp, t * K / (K + 1));
  const std::uint64_t n = plan.n;
  std::vector<std::array<std::int64_t, K>> at(n);
  parallel_for(n, [&](std::size_t i) {
    WalkState st = start_walk(w.m, seed, i);
    for (int k = 0; k < K; ++k) {
      run_until_time(table, st, t * (k + 1) / (K + 1));
      at[i][k] = st.position;
    }
  });

  const std::size_t size = chain.size();
  std::vector<std::vector<std::uint64_t>> counts(K, std::vector<std::uint64_t>(size, 0));
  for (const auto& row : at)
    for (int k = 0; k < K; ++k) ++counts[k][static_cast<std::size_t>(row[k] - w.lo)];

  const auto lt = chain.log_theta();
  const double lt_m = lt[static_cast<std::size_t>(w.m - w.lo)];
  // Exact lower bounds: score intervals are far too narrow at single-digit counts.
  const double alpha = stats::normal_upper_tail(cp.z);
  std::uint64_t violations = 0;
  int worst = 0;
  std::array<std::uint64_t, K> outside{};
  for (int k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < size; ++j) {
      const auto x = w.lo + static_cast<std::int64_t>(j);
      if (w.n.contains(static_cast<double>(x))) continue;
      outside[k] += counts[k][j];
      const double envelope = std::exp(lt[j] - lt_m);
      if (stats::clopper_pearson_lower(counts[k][j], n, alpha) > envelope * (1.0 + 1e-12)) ++violations;
    }
    if (outside[k] > outside[worst]) worst = k;
  }
  estimate(c, outside[worst], plan, cp);

  const double s_worst = t * (worst + 1) / (K + 1);
  const std::vector<double> row = transition_row(chain, w.m, s_worst);
  double exact = 0.0;
  for (std::size_t j = 0; j < size; ++j)
    if (!w.n.contains(static_cast<double>(w.lo + static_cast<std::int64_t>(j)))) exact += row[j];
  c.exact = std::clamp(exact, 0.0, 1.0);
  c.cross_check_ok = violations == 0;
  c.details = {{"checkpoint", s_worst / t},
               {"envelope_violations", static_cast<double>(violations)},
               {"exact_in_ci", c.ci.lo <= *c.exact && *c.exact <= c.ci.hi ? 1.0 : 0.0}};
  settle(c);
  return c;
}

}  // namespace

BoundCheck lemma_check(const Prepared& p, int which, double eps, const CheckParams& cp, std::uint64_t seed) {
  require(cp.trials > 0 && cp.z > 0.0, "trials and z must be positive");
  BoundCheck c;
  switch (which) {
    case 1: c = lemma1(p, eps, cp, seed); break;
    case 2: c = lemma2(p, eps, cp, seed); break;
    case 3: c = lemma3(p, eps, cp, seed); break;
    case 4: c = lemma4(p, eps, cp, seed); break;
    default: fail(ErrorCode::InvalidArgument, "lemma index must be 1..4");
  }
  if (c.verdict.empty()) settle(c);
  return c;
}

std::vector<TrialRecord> run_quenched(const Prepared& p, const Sites& s, std::uint64_t trials, std::uint64_t seed) {
  const double t = p.t.time();
  const JumpTable table(p.env);
  std::vector<TrialRecord> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    WalkState st = start_walk(0, seed, i);
    int first = 0;
    bool at_m = false, at_p = false;
    bool esc_m = false, esc_m_after = false, esc_p = false, esc_p_after = false;
    auto visit = [&](std::int64_t x, double) {
      if (x == s.m_minus) {
        at_m = true;
        if (first == 0) first = -1;
      }
      if (x == s.m_plus) {
        at_p = true;
        if (first == 0) first = 1;
      }
      if (x == s.well_minus_lo || x == s.well_minus_hi) {
        esc_m = true;
        esc_m_after = esc_m_after || at_m;
      }
      if (x == s.well_plus_lo || x == s.well_plus_hi) {
        esc_p = true;
        esc_p_after = esc_p_after || at_p;
      }
      return true;
    };
    walk_free(p.env, table, st, t, visit);
    const auto xt = static_cast<double>(st.position);
    out[i] = TrialRecord{st.position,       first != 0,
                         first == -1,       first == 1,
                         at_m ? !esc_m_after : !esc_m,
                         at_p ? !esc_p_after : !esc_p,
                         s.n_minus.contains(xt), s.n_plus.contains(xt)};
  });
  return out;
}

EventTally tally_events(const Prepared& p, double eps, std::vector<TrialRecord> records) {
  const Sites s = landmark_sites(p, eps);
  EventTally e;
  e.log_t = p.t.log_t;
  e.eps = eps;
  e.trials = records.size();
  const double bm = s.n_minus.hi - s.n_minus.lo, bp = s.n_plus.hi - s.n_plus.lo;
  const auto m_minus = static_cast<double>(s.m_minus), m_plus = static_cast<double>(s.m_plus);
  bool subset = true;
  std::uint64_t a12 = 0, a123 = 0;
  for (const TrialRecord& r : records) {
    const auto x = static_cast<double>(r.final_position);
    const bool all_m = r.a1 && r.a2m && r.a3m && r.a4m;
    const bool all_p = r.a1 && r.a2p && r.a3p && r.a4p;
    const bool flags[11] = {r.a1, r.a2m, r.a2p, r.a3m, r.a3p, r.a4m, r.a4p, all_m, all_p,
                            std::abs(x - m_minus) <= bm, std::abs(x - m_plus) <= bp};
    for (int k = 0; k < 11; ++k) e.counts[k] += flags[k];
    subset = subset && (r.a2m || r.a2p) == r.a1 && !(r.a2m && r.a2p);
    const bool a2 = s.m_t_is_plus ? r.a2p : r.a2m;
    const bool a3 = s.m_t_is_plus ? r.a3p : r.a3m;
    a12 += r.a1 && a2;
    a123 += r.a1 && a2 && a3;
  }
  const double n = static_cast<double>(e.trials);
  const int off = s.m_t_is_plus ? 1 : 0;
  const std::uint64_t n_a2 = e.counts[1 + off], n_a3 = e.counts[3 + off], n_a4 = e.counts[5 + off];
  const std::uint64_t n_all = e.counts[7 + off], n_near = e.counts[9 + off];
  subset = subset && n_all <= n_a4 && n_a4 <= n_near && n_all <= n_a3 && n_all <= n_a2;
  e.side = s.m_t_is_plus ? "plus" : "minus";
  e.lhs = static_cast<double>(n_all) / n;
  // P(not A3 | A1, A2) = (a12 - a123) / a12; P(not A4 | A1, A2, A3) = (a123 - all) / a123.
  const double c3 = a12 ? static_cast<double>(a12 - a123) / static_cast<double>(a12) : 0.0;
  const double c4 = a123 ? static_cast<double>(a123 - n_all) / static_cast<double>(a123) : 0.0;
  e.rhs = 1.0 - (n - static_cast<double>(e.counts[0])) / n - (n - static_cast<double>(n_a2)) / n - c3 - c4;
  e.subset_ok = subset;
  e.chain_ok = e.rhs <= e.lhs + 1e-12;
  e.records = std::move(records);
  return e;
}

EventTally event_decomposition(const Prepared& p, double eps, std::uint64_t trials, std::uint64_t seed) {
  const Sites s = landmark_sites(p, eps);
  return tally_events(p, eps, run_quenched(p, s, trials, seed));
}

BoundCheck quenched_localization(const Prepared& p, double delta, double eps, std::span<const TrialRecord> records,
                                 const CheckParams& cp) {
  require(delta > 0.0, "delta must be positive");
  BoundCheck c = base_check(p, "localization", eps);
  const double L = p.t.log_t;
  c.exponent = eps;
  const double k = p.params.kappa_hat;
  c.rate = std::exp(-eps * L) * (1.0 + log_factor(p, 2.0 * k) + 2.0 * log_factor(p, 2.0 * k + 1.0));
  if (!p.land || records.empty()) {
    c.applicable = false;
    settle(c);
    return c;
  }
  const double mt = p.f().position(p.land->m_t);
  const double reach = delta * L * L;
  std::uint64_t fails = 0;
  for (const TrialRecord& r : records) fails += std::abs(static_cast<double>(r.final_position) - mt) >= reach;
  estimate(c, fails, TrialPlan{records.size(), false}, cp);
  c.details = {{"success", 1.0 - c.p_hat}, {"delta", delta}, {"m_t", mt}};
  settle(c);
  return c;
}

AnnealedTable annealed_frequencies(const DistributionSpec& spec, std::span<const double> log_ts,
                                   std::span<const double> eps_list, std::uint64_t n_env, std::uint64_t seed0,
                                   Mode mode, const ModelParams& params, double z) {
  require(!log_ts.empty() && !eps_list.empty() && n_env > 0, "annealed table needs t, eps and environments");
  const std::size_t nt = log_ts.size(), ne = eps_list.size();
  AnnealedTable tab;
  tab.per_env.assign(n_env, std::vector<GammaReport>(nt * ne));
  parallel_for(n_env, [&](std::size_t i) {
    for (std::size_t a = 0; a < nt; ++a) {
      const Prepared p = prepare(spec, seed0 + i, TimeScale::from_log(log_ts[a]), mode, params);
      for (std::size_t b = 0; b < ne; ++b) tab.per_env[i][a * ne + b] = classify_gamma(p, eps_list[b]);
    }
  });

  for (std::size_t a = 0; a < nt; ++a)
    for (std::size_t b = 0; b < ne; ++b) {
      AnnealedCell cell;
      cell.log_t = log_ts[a];
      cell.eps = eps_list[b];
      cell.n_env = n_env;
      for (const auto& row : tab.per_env) {
        const GammaReport& g = row[a * ne + b];
        cell.resolved += g.resolved;
        for (int k = 0; k < GammaCount; ++k) {
          cell.evaluated[k] += g.sets[k].evaluated;
          cell.members[k] += g.sets[k].evaluated && g.sets[k].member;
        }
        cell.overall += g.overall;
      }
      tab.cells.push_back(cell);
    }

  const double n = static_cast<double>(n_env);
  auto freq = [&](std::size_t a, std::size_t b, int k) {
    return static_cast<double>(tab.cells[a * ne + b].members[k]) / n;
  };
  // Two frequencies over the same n environments; difference slack z * sqrt(s1^2 + s2^2).
  auto slack = [&](double p1, double p2) { return z * std::sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / n); };
  auto describe = [](std::ostringstream& os, const char* what, double lt, double e, double p1, double p2) {
    os << what << " log_t=" << lt << " eps=" << e << ": " << p1 << " -> " << p2 << "; ";
  };

  {
    TrendCheck tc{"gamma2 independent of eps", true, true, ""};
    std::ostringstream os;
    for (std::size_t a = 0; a < nt; ++a)
      for (std::size_t b = 1; b < ne; ++b)
        if (tab.cells[a * ne + b].members[G2] != tab.cells[a * ne].members[G2]) {
          tc.ok = false;
          describe(os, "gamma2", log_ts[a], eps_list[b], freq(a, 0, G2), freq(a, b, G2));
        }
    tc.detail = os.str();
    tab.trends.push_back(tc);
  }
  std::vector<int> in_t = {G2};
  if (mode == Mode::Coupled) in_t.insert(in_t.begin(), G1);
  for (int k : in_t) {
    TrendCheck tc{std::string(gamma_name(k)) + " non-decreasing in t", true, true, ""};
    std::ostringstream os;
    for (std::size_t b = 0; b < ne; ++b)
      for (std::size_t a = 1; a < nt; ++a) {
        const double p1 = freq(a - 1, b, k), p2 = freq(a, b, k);
        if (p2 < p1 - slack(p1, p2)) {
          tc.ok = false;
          describe(os, gamma_name(k), log_ts[a], eps_list[b], p1, p2);
        }
      }
    tc.detail = os.str();
    tab.trends.push_back(tc);
  }
  // Order eps from large to small for the monotonicity checks.
  std::vector<std::size_t> order(ne);
  for (std::size_t b = 0; b < ne; ++b) order[b] = b;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return eps_list[x] > eps_list[y]; });
  {
    TrendCheck tc{"gamma3-5 membership monotone in eps per environment", true, true, ""};
    std::uint64_t bad = 0;
    for (const auto& row : tab.per_env)
      for (std::size_t a = 0; a < nt; ++a)
        for (std::size_t j = 1; j < ne; ++j)
          for (int k = G3; k <= G5Plus; ++k)
            if (row[a * ne + order[j - 1]].sets[k].member && !row[a * ne + order[j]].sets[k].member) ++bad;
    tc.ok = bad == 0;
    tc.detail = std::to_string(bad) + " violations";
    tab.trends.push_back(tc);
  }
  for (int k = G3; k <= G6Plus; ++k) {
    // On the lattice potential, N_a(m) jumps whenever a crosses an integer
    // level, so the gamma6 trends are only asserted for W-based landmarks.
    TrendCheck tc{std::string(gamma_name(k)) + " non-increasing in eps", true, k < G6Minus || mode == Mode::Coupled,
                  ""};
    std::ostringstream os;
    for (std::size_t a = 0; a < nt; ++a)
      for (std::size_t j = 1; j < ne; ++j) {
        const double p1 = freq(a, order[j - 1], k), p2 = freq(a, order[j], k);
        if (p2 < p1 - slack(p1, p2)) {
          tc.ok = false;
          describe(os, gamma_name(k), log_ts[a], eps_list[order[j]], p1, p2);
        }
      }
    tc.detail = os.str();
    tab.trends.push_back(tc);
  }
  for (int k : {G6Minus, G6Plus}) {
    TrendCheck tc{std::string(gamma_name(k)) + " independent of t", true, mode == Mode::Coupled, ""};
    std::ostringstream os;
    for (std::size_t b = 0; b < ne; ++b)
      for (std::size_t a = 1; a < nt; ++a) {
        const double p1 = freq(0, b, k), p2 = freq(a, b, k);
        if (std::abs(p2 - p1) > slack(p1, p2)) {
          tc.ok = false;
          describe(os, gamma_name(k), log_ts[a], eps_list[b], p1, p2);
        }
      }
    tc.detail = os.str();
    tab.trends.push_back(tc);
  }
  return tab;
}

double hpp_ratio(std::uint64_t seed, std::uint64_t index, double log_t, double step) {
  const TimeScale t = TimeScale::from_log(log_t);
  double half = 30.0 * log_t * log_t;
  for (int attempt = 0; attempt < 6; ++attempt, half *= 2.0) {
    const SampledFunction w = brownian_path(seed, index, half, step);
    try {
      const StableLandscape land = stable_landscape(w, t);
      return w.position(land.marks.hh_plus) / (log_t * log_t);
    } catch (const WindowExhausted&) {
    }
  }
  throw WindowExhausted("Brownian path landmarks did not resolve");
}

ScalingReport scaling_check(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t paths,
                            std::span<const double> scales, double log_t1, double log_t2, std::uint64_t ks_paths,
                            double ks_level) {
  ScalingReport r;
  r.paths = paths;
  r.scales.assign(scales.begin(), scales.end());
  r.log_t1 = log_t1;
  r.log_t2 = log_t2;
  r.ks_paths = ks_paths;
  for (double a : scales) require(a > 0.0, "scale factors must be positive");

  std::vector<std::uint64_t> failures(paths, 0);
  parallel_for(paths, [&](std::size_t j) {
    const Environment env = Environment::sample(spec, seed + j, Window{-200, 200});
    const SampledFunction f = potential(env);
    const double L = 2.5 + 0.5 * static_cast<double>(j % 4);
    const TimeScale t = TimeScale::from_log(L);
    const auto s = find_stable_points(f, t).stable;
    std::optional<StableLandscape> land;
    try {
      land = stable_landscape(f, t);
    } catch (const WindowExhausted&) {
    }
    for (double a : scales) {
      const SampledFunction fa = rescale(f, a);
      const TimeScale ta = TimeScale::from_log(a * L);
      const auto sa = find_stable_points(fa, ta).stable;
      bool ok = sa == s;
      for (std::size_t k = 0; ok && k < s.size(); ++k) ok = fa.position(sa[k]) == a * a * f.position(s[k]);
      std::optional<StableLandscape> la;
      try {
        la = stable_landscape(fa, ta);
      } catch (const WindowExhausted&) {
      }
      ok = ok && land.has_value() == la.has_value();
      if (ok && land) {
        ok = la->marks.h_minus == land->marks.h_minus && la->marks.h_plus == land->marks.h_plus &&
             la->peaks == land->peaks;
        for (std::size_t w = 0; ok && w < land->wells.size(); ++w) {
          const double b = 0.5 * L;
          const Neighborhood n1 = neighborhood(f, land->wells[w], b);
          const Neighborhood n2 = neighborhood(fa, la->wells[w], a * b);
          ok = n1.left == n2.left && n1.right == n2.right;
        }
      }
      failures[j] += !ok;
    }
  });
  for (auto v : failures) r.exact_failures += v;

  std::vector<double> s1(ks_paths), s2(ks_paths);
  const double step = 0.02;
  parallel_for(2 * ks_paths, [&](std::size_t i) {
    if (i < ks_paths) s1[i] = hpp_ratio(seed, i, log_t1, step);
    else s2[i - ks_paths] = hpp_ratio(seed, i, log_t2, step);
  });
  r.ks = stats::ks_two_sample(s1, s2);
  r.ok = r.exact_failures == 0 && r.ks.p_value > ks_level;
  return r;
}

CorollaryReport corollary_assembly(const DistributionSpec& spec, double log_t, double delta, double eps,
                                   std::uint64_t n_env, std::uint64_t trials, std::uint64_t seed0, Mode mode,
                                   const ModelParams& params, std::uint64_t walk_seed) {
  require(n_env > 0 && trials > 0, "corollary needs environments and trials");
  CorollaryReport r;
  r.log_t = log_t;
  r.delta = delta;
  r.eps = eps;
  r.n_env = n_env;
  r.trials = trials;
  const TimeScale t = TimeScale::from_log(log_t);
  std::vector<double> failure(n_env, 1.0);
  std::vector<std::uint8_t> member(n_env, 0);
  CheckParams cp;
  for (std::uint64_t i = 0; i < n_env; ++i) {
    const Prepared p = prepare(spec, seed0 + i, t, mode, params);
    if (!p.land) continue;
    member[i] = classify_gamma(p, eps).overall;
    const Sites s = landmark_sites(p, eps);
    const auto records = run_quenched(p, s, trials, rng::mix(walk_seed, i));
    failure[i] = quenched_localization(p, delta, eps, records, cp).p_hat;
  }
  double all = 0.0, part = 0.0;
  for (std::uint64_t i = 0; i < n_env; ++i) {
    all += failure[i];
    if (member[i]) {
      part += failure[i];
      ++r.members;
    }
  }
  const double n = static_cast<double>(n_env);
  r.annealed_failure = all / n;
  r.gamma_part = part / n;
  r.non_gamma_mass = static_cast<double>(n_env - r.members) / n;
  r.ok = r.annealed_failure <= r.gamma_part + r.non_gamma_mass + 1e-12;
  return r;
}

MartingaleReport martingale_check(const Environment& env, std::int64_t a, std::int64_t z, std::int64_t b,
                                  std::uint64_t trials, std::uint64_t seed) {
  require(a < z && z < b, "martingale check needs a < z < b");
  require(trials > 1, "martingale check needs at least two trials");
  const SampledFunction v = potential(env);
  const double fb = lyapunov(v, a, b);
  const JumpTable table(env);
  std::vector<std::uint8_t> at_b(trials);
  const std::int64_t targets[2] = {a, b};
  parallel_for(trials, [&](std::size_t i) {
    WalkState st = start_walk(z, seed, i);
    const HitOutcome h = run_until_hit(table, st, targets, std::numeric_limits<double>::infinity());
    if (h.status != WalkStatus::Done || !h.hit) fail(ErrorCode::Internal, "absorbed walk did not reach {a, b}");
    at_b[i] = h.site == b;
  });
  const std::uint64_t k = count_true(at_b);
  const double n = static_cast<double>(trials);
  const double q = static_cast<double>(k) / n;
  MartingaleReport r{a, z, b, trials, lyapunov(v, a, z), q * fb, 0.0, false};
  // Sample standard deviation of f(xi_tau), which takes the values 0 and f(b).
  r.std_error = fb * std::sqrt(q * (1.0 - q) * n / (n - 1.0)) / std::sqrt(n);
  r.ok = std::abs(r.estimate - r.f_z) <= 3.0 * r.std_error;
  return r;
}

}  // namespace sinai
