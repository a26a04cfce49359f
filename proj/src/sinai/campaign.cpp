#include "sinai/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <sstream>

#include "sinai/error.hpp"
#include "sinai/oracle.hpp"
#include "sinai/parallel.hpp"
#include "sinai/serialize.hpp"
#include "sinai/svg.hpp"
#include "sinai/walker.hpp"

namespace sinai {

const char* version() { return "0.1.0"; }

namespace {

constexpr const char* kSchema = "sinai-lab/report/1";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
  return h;
}

// Independent seed per claim, so running one claim alone reproduces its part
// of the full campaign.
std::uint64_t claim_seed(const CampaignConfig& c, const std::string& id) {
  return rng::mix(c.experiment_seed, fnv1a(id));
}

std::int64_t draw_int(rng::Engine& g, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::uint64_t count_true(const std::vector<std::uint8_t>& v) {
  return static_cast<std::uint64_t>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

json interval(const stats::Interval& i) { return json::array({i.lo, i.hi}); }

struct Instance {
  std::uint64_t seed;
  std::int64_t a, z, b;
  double p;  // P_z(tau_a < tau_b)
};

// Triples with b - a in [min_w, max_w] whose hitting probability lies in
// [lo_p, 1 - lo_p], so a few thousand trials resolve it.
Instance draw_instance(const Environment& env, rng::Engine& g, std::int64_t min_w, std::int64_t max_w, double lo_p) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const std::int64_t w = draw_int(g, min_w, max_w);
    const std::int64_t a = draw_int(g, -w, 0);
    const std::int64_t z = draw_int(g, a + 1, a + w - 1);
    const double p = ruin_probability(env, a, z, a + w);
    if (p >= lo_p && p <= 1.0 - lo_p) return {env.seed(), a, z, a + w, p};
  }
  fail(ErrorCode::Internal, "no resolvable ruin instance found");
}

// ---- 1: gambler's-ruin exactness -----------------------------------------

ClaimResult ruin_exactness(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "ruin-exactness");
  const std::uint64_t n = c.ruin_envs;
  std::vector<json> rows(n);
  std::vector<double> worst(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Environment env = Environment::sample(c.spec, i, Window{-300, 300});
    rng::Engine g = rng::stream(seed, i, rng::Stream::Path);
    const std::int64_t w = draw_int(g, 2, 200);
    const std::int64_t a = draw_int(g, -w, 0);
    const std::int64_t b = a + w;
    const std::vector<double> solved = absorption_solve(env, a, b);
    double dev = 0.0;
    for (std::int64_t z = a + 1; z < b; ++z) {
      const double p = ruin_probability(env, a, z, b);
      dev = std::max(dev, std::abs(solved[static_cast<std::size_t>(z - a - 1)] - p) / p);
    }
    worst[i] = dev;
    rows[i] = {{"env_seed", i}, {"a", a}, {"b", b}, {"max_relative_deviation", dev}};
  });

  const Environment flat = Environment::from_rates(c.spec, 0, -1, std::vector<RatePair>(203, RatePair{1.0, 1.0}));
  double flat_err = 0.0;
  for (std::int64_t b : {2, 4, 10, 57, 200})
    for (std::int64_t z = 1; z < b; ++z)
      flat_err = std::max(flat_err, std::abs(ruin_probability(flat, 0, z, b) -
                                             static_cast<double>(b - z) / static_cast<double>(b)));

  // V = [0, 1, -1] on {0, 1, 2}: omega^-_1 / omega^+_1 = e, omega^-_2 / omega^+_2 = e^-2.
  const double e = std::exp(1.0);
  const Environment three = Environment::from_rates(c.spec, 0, 0, {{1.0, 1.0}, {e, 1.0}, {1.0, e * e}, {1.0, 1.0}});
  const double three_value = ruin_probability(three, 0, 1, 3);
  const double three_expected = (e + 1.0 / e) / (1.0 + e + 1.0 / e);
  const double three_solve = absorption_solve(three, 0, 3)[0];

  const double max_dev = *std::max_element(worst.begin(), worst.end());
  ClaimResult r;
  r.pass = max_dev < 1e-10 && flat_err <= 1e-12 && std::abs(three_value - three_expected) <= 1e-12 &&
           std::abs(three_solve - three_value) <= 1e-10 * three_value;
  r.body = {{"envs", n},
            {"max_relative_deviation", max_dev},
            {"flat_max_error", flat_err},
            {"three_site", {{"value", three_value}, {"expected", three_expected}, {"solve", three_solve}}},
            {"checks", rows}};
  return r;
}

// ---- 2: Monte Carlo against the ruin formula -----------------------------

ClaimResult ruin_monte_carlo(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "ruin-monte-carlo");
  json rows = json::array();
  bool all = true;
  for (std::uint64_t k = 0; k < c.ruin_instances; ++k) {
    const Environment env = Environment::sample(c.spec, k, Window{-40, 40});
    rng::Engine g = rng::stream(seed, k, rng::Stream::Path);
    const Instance in = draw_instance(env, g, 4, 24, 0.02);
    const JumpTable table(env);
    const std::int64_t targets[2] = {in.a, in.b};
    std::vector<std::uint8_t> at_a(c.ruin_mc_trials);
    parallel_for(at_a.size(), [&](std::size_t i) {
      WalkState st = start_walk(in.z, rng::mix(seed, k), i);
      const HitOutcome h = run_until_hit(table, st, targets, std::numeric_limits<double>::infinity());
      at_a[i] = h.hit && h.site == in.a;
    });
    const double p_hat = static_cast<double>(count_true(at_a)) / static_cast<double>(at_a.size());
    const double sigma = stats::binomial_sigma(in.p, at_a.size());
    const bool ok = std::abs(p_hat - in.p) <= 3.0 * sigma;
    all = all && ok;
    rows.push_back({{"env_seed", k},
                    {"a", in.a},
                    {"z", in.z},
                    {"b", in.b},
                    {"trials", at_a.size()},
                    {"exact", in.p},
                    {"p_hat", p_hat},
                    {"sigma", sigma},
                    {"z_score", (p_hat - in.p) / sigma},
                    {"ok", ok}});
  }
  return {"", all, {{"checks", rows}}, 0.0};
}

// ---- 3: reversible measure -----------------------------------------------

ClaimResult reversible_identity(const CampaignConfig& c) {
  const std::uint64_t n = c.measure_envs;
  std::vector<double> worst(n, 0.0);
  std::vector<std::uint8_t> dominated(n, 1);
  const double log_k2 = 2.0 * std::log(c.spec.kappa());
  parallel_for(n, [&](std::size_t i) {
    const Environment env = Environment::sample(c.spec, i, Window{-500, 500});
    const SampledFunction v = potential(env);
    const ReversibleMeasure th = reversible_measure(env);
    const double w0 = env.rates(0).plus;
    for (std::int64_t x = -500; x <= 500; ++x) {
      const double vx = v.value(static_cast<std::size_t>(x + 500));
      const double lhs = th.theta(x) * std::exp(vx);
      const double rhs = w0 / env.rates(x).plus;
      worst[i] = std::max(worst[i], std::abs(lhs - rhs) / rhs);
      const double gap = th.log(x) + vx;  // log(theta_x e^{V(x)})
      if (gap < -log_k2 - 1e-12 || gap > log_k2 + 1e-12) dominated[i] = 0;
    }
  });
  const double max_dev = *std::max_element(worst.begin(), worst.end());
  const bool dom = count_true(dominated) == n;
  return {"", max_dev <= 1e-12 && dom,
          {{"envs", n}, {"max_relative_deviation", max_dev}, {"kappa", c.spec.kappa()}, {"dominated", dom}}, 0.0};
}

// ---- 4: reflected chain --------------------------------------------------

ClaimResult reflected_chain(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "reflected-chain");
  json rows = json::array();
  bool all = true;
  for (std::uint64_t k = 0; k < c.chains; ++k) {
    const auto len = static_cast<std::int64_t>(std::min<std::uint64_t>(10 + 4 * k, 50));
    const Environment env = Environment::sample(c.spec, k, Window{-60, 60});
    const ReflectedChain chain = reflect(env, Window{0, len - 1});
    const std::vector<double> mu = stationary_distribution(chain);
    const double balance = balance_residual(chain, mu);
    const double lambda = spectral_gap(chain, false).lambda;
    const double horizon = 100.0 / lambda;

    // Average occupation of independent runs started from mu.
    const JumpTable table(chain);
    const std::uint64_t runs = c.occupation_runs;
    std::vector<std::vector<double>> occ(runs);
    parallel_for(runs, [&](std::size_t r) {
      rng::Engine g = rng::stream(rng::mix(seed, k), r, rng::Stream::Path);
      const double u = rng::uniform(g);
      double acc = 0.0;
      std::int64_t x = 0;
      for (; x < len - 1; ++x) {
        acc += mu[static_cast<std::size_t>(x)];
        if (u < acc) break;
      }
      WalkState st = start_walk(x, rng::mix(seed, k), r);
      occ[r] = occupation_histogram(table, st, horizon);
    });
    std::vector<double> mean(mu.size(), 0.0);
    for (const auto& o : occ)
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += o[j] / static_cast<double>(runs);
    const double tv = stats::total_variation(mean, mu);

    const std::int64_t small = std::min<std::int64_t>(len, 30);
    const ReflectedChain sub = reflect(env, Window{0, small - 1});
    double db = 0.0, rows_res = 0.0;
    for (double s : {1.0, 10.0, 100.0}) {
      const TransitionTable p = semigroup(sub, s);
      db = std::max(db, detailed_balance_residual(sub, p));
      rows_res = std::max(rows_res, row_sum_residual(p));
    }
    const bool ok = balance < 1e-10 && tv < 0.02 && db < 1e-8 && rows_res < 1e-10;
    all = all && ok;
    rows.push_back({{"env_seed", k},
                    {"length", len},
                    {"balance_residual", balance},
                    {"lambda", lambda},
                    {"horizon", horizon},
                    {"runs", runs},
                    {"occupation_tv", tv},
                    {"semigroup_sites", small},
                    {"detailed_balance_residual", db},
                    {"row_sum_residual", rows_res},
                    {"ok", ok}});
  }
  return {"", all, {{"checks", rows}}, 0.0};
}

// ---- 5: spectral gap -----------------------------------------------------

ClaimResult spectral(const CampaignConfig& c) {
  const Environment env = Environment::sample(c.spec, 0, Window{-60, 60});
  bool two_ok = true;
  json two = json::array();
  for (std::int64_t x = -5; x < 5; ++x) {
    const double lambda = spectral_gap(reflect(env, Window{x, x + 1}), false).lambda;
    const double expect = env.rates(x).plus + env.rates(x + 1).minus;
    two_ok = two_ok && lambda == expect;
    two.push_back({{"x", x}, {"lambda", lambda}, {"expected", expect}});
  }

  const Environment flat = Environment::from_rates(c.spec, 0, 0, std::vector<RatePair>(1000, RatePair{1.0, 1.0}));
  double flat_err = 0.0;
  for (std::int64_t n : {2, 3, 8, 50, 200, 1000}) {
    const double lambda = spectral_gap(reflect(flat, Window{0, n - 1}), false).lambda;
    flat_err = std::max(flat_err, std::abs(lambda - 2.0 * (1.0 - std::cos(M_PI / static_cast<double>(n)))));
  }

  const std::uint64_t n_env = c.spectral_envs;
  const std::vector<std::int64_t> sizes = {64, 128, 256, 512, 1024, 2048, 4096};
  std::vector<std::vector<double>> res(n_env);
  parallel_for(n_env, [&](std::size_t i) {
    const Environment e = Environment::sample(c.spec, i, Window{-2048, 2047});
    for (std::int64_t n : sizes)
      res[i].push_back(gap_elevation_residual(e, Window{-n / 2, n / 2 - 1}, std::log(static_cast<double>(n))));
  });
  json medians = json::array();
  std::vector<double> med;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<double> col;
    for (const auto& r : res) col.push_back(r[k]);
    med.push_back(stats::median(col));
    medians.push_back({{"n", sizes[k]}, {"median_residual", med.back()}});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < med.size(); ++k) decreasing = decreasing && med[k] <= med[k - 1];
  const bool pass = two_ok && flat_err <= 1e-8 && decreasing && med.back() < 0.5;
  return {"",
          pass,
          {{"two_state", two},
           {"two_state_exact", two_ok},
           {"flat_max_error", flat_err},
           {"gap_elevation", medians},
           {"envs", n_env},
           {"median_decreasing", decreasing}},
          0.0};
}

// ---- 6: landscape --------------------------------------------------------

ClaimResult landscape(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "landscape");
  const std::uint64_t n = c.landscape_paths;
  std::vector<std::uint8_t> match(n, 0), thin(n, 0);
  std::vector<double> elev(n, 0.0);
  parallel_for(n, [&](std::size_t j) {
    rng::Engine g = rng::stream(seed, j, rng::Stream::Path);
    const std::int64_t size = draw_int(g, 20, 200);
    // Odd paths come from the log-uniform family, so ties are rare there.
    const DistributionSpec spec = j % 2 ? DistributionSpec::log_uniform(1.0) : c.spec;
    const Environment env = Environment::sample(spec, rng::mix(seed, j), Window{-size / 2, size - 1 - size / 2});
    const SampledFunction f = potential(env);
    const double l1 = 1.2 + 3.0 * rng::uniform(g);
    const double l2 = l1 + 3.0 * rng::uniform(g);
    const auto s1 = find_stable_points(f, TimeScale::from_log(l1)).stable;
    const auto s2 = find_stable_points(f, TimeScale::from_log(l2)).stable;
    match[j] = s1 == literal_stable_points(f.values(), l1) && s2 == literal_stable_points(f.values(), l2);
    thin[j] = std::includes(s1.begin(), s1.end(), s2.begin(), s2.end());
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      std::size_t a = 0, b = f.size() - 1;
      if (k > 0) {
        a = static_cast<std::size_t>(draw_int(g, 0, static_cast<std::int64_t>(f.size()) - 2));
        b = static_cast<std::size_t>(draw_int(g, static_cast<std::int64_t>(a) + 1, static_cast<std::int64_t>(f.size()) - 1));
      }
      const ElevationPair e = elevation_formulas(f, a, b);
      worst = std::max(worst, std::abs(e.pairwise - e.local_min));
    }
    elev[j] = worst;
  });
  const std::uint64_t mismatches = n - count_true(match), thin_fail = n - count_true(thin);
  const double max_elev = n ? *std::max_element(elev.begin(), elev.end()) : 0.0;
  return {"",
          mismatches == 0 && thin_fail == 0 && max_elev <= 1e-12,
          {{"paths", n},
           {"literal_mismatches", mismatches},
           {"thinning_failures", thin_fail},
           {"max_elevation_disagreement", max_elev}},
          0.0};
}

// ---- 7: scaling ----------------------------------------------------------

ClaimResult scaling(const CampaignConfig& c) {
  const double scales[] = {0.5, 2.0, 3.0};
  const ScalingReport s =
      scaling_check(c.spec, claim_seed(c, "scaling"), c.scaling_paths, scales, 4.0, 9.0, c.ks_paths);
  return {"", s.ok, to_json(s), 0.0};
}

// ---- Gamma members -------------------------------------------------------

// member[k][i]: seed env_seed + k is in Gamma(t_i, eps) with resolved landmarks.
std::vector<std::vector<std::uint8_t>> member_table(const CampaignConfig& c, double eps) {
  std::vector<std::vector<std::uint8_t>> m(c.env_scan, std::vector<std::uint8_t>(c.log_t.size(), 0));
  parallel_for(c.env_scan, [&](std::size_t k) {
    for (std::size_t i = 0; i < c.log_t.size(); ++i) {
      const Prepared p = prepare(c.spec, c.env_seed + k, TimeScale::from_log(c.log_t[i]), c.mode, c.params);
      m[k][i] = p.land && classify_gamma(p, eps).overall;
    }
  });
  return m;
}

// ---- 8: localization -----------------------------------------------------

constexpr double kHistLo = -2.0, kHistHi = 2.0;
constexpr int kHistBins = 40;

ClaimResult localization(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "localization");
  const double eps = c.quenched_eps;
  const auto members = member_table(c, eps);
  CheckParams cp;
  cp.trials = c.trials;

  json checks = json::array(), per_t = json::array(), hist = json::array();
  bool all = true;
  std::vector<double> success, sigma;
  for (std::size_t i = 0; i < c.log_t.size(); ++i) {
    const TimeScale t = TimeScale::from_log(c.log_t[i]);
    const double L2 = c.log_t[i] * c.log_t[i];
    std::uint64_t found = 0, ok_trials = 0, total = 0;
    std::vector<std::uint64_t> bins(kHistBins, 0);
    std::uint64_t below = 0, above = 0;
    for (std::uint64_t k = 0; k < c.env_scan && found < c.quenched_envs; ++k) {
      if (!members[k][i]) continue;
      ++found;
      const Prepared p = prepare(c.spec, c.env_seed + k, t, c.mode, c.params);
      const Sites s = landmark_sites(p, eps);
      auto records = run_quenched(p, s, c.trials, rng::mix(rng::mix(seed, k), i));
      const BoundCheck b = quenched_localization(p, c.delta, eps, records, cp);
      const EventTally e = tally_events(p, eps, std::move(records));
      const double mt = p.f().position(p.land->m_t);
      for (const TrialRecord& r : e.records) {
        const double u = (static_cast<double>(r.final_position) - mt) / L2;
        if (u < kHistLo) ++below;
        else if (u >= kHistHi) ++above;
        else ++bins[static_cast<std::size_t>((u - kHistLo) / (kHistHi - kHistLo) * kHistBins)];
      }
      ok_trials += b.trials - b.events;
      total += b.trials;
      all = all && e.subset_ok && e.chain_ok;
      json row = to_json(b);
      row["events"] = to_json(e);
      checks.push_back(row);
    }
    const double p = total ? static_cast<double>(ok_trials) / static_cast<double>(total) : 0.0;
    success.push_back(p);
    sigma.push_back(stats::binomial_sigma(p, std::max<std::uint64_t>(total, 1)));
    all = all && found == c.quenched_envs;
    per_t.push_back({{"log_t", c.log_t[i]}, {"envs", found}, {"trials", total}, {"success", p},
                     {"sigma", sigma.back()}});
    hist.push_back({{"log_t", c.log_t[i]}, {"counts", bins}, {"below", below}, {"above", above}});
  }
  bool trend = true;
  for (std::size_t i = 1; i < success.size(); ++i)
    trend = trend && success[i] >= success[i - 1] - 2.0 * std::hypot(sigma[i], sigma[i - 1]);
  const bool final_ok = !success.empty() && success.back() >= 0.9;
  return {"",
          all && trend && final_ok,
          {{"eps", eps},
           {"delta", c.delta},
           {"per_t", per_t},
           {"non_decreasing", trend},
           {"final_success_ok", final_ok},
           {"histogram", {{"lo", kHistLo}, {"hi", kHistHi}, {"bins", kHistBins}, {"series", hist}}},
           {"checks", checks}},
          0.0};
}

// ---- 9: lemma bounds -----------------------------------------------------

ClaimResult lemma_bounds(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "lemma-bounds");
  const double eps = c.quenched_eps;
  const auto members = member_table(c, eps);
  CheckParams cp;
  cp.trials = c.lemma_trials;
  cp.max_trials = c.lemma_max_trials;

  std::vector<std::uint64_t> chosen;
  for (std::uint64_t k = 0; k < c.env_scan && chosen.size() < c.lemma_envs; ++k)
    if (std::all_of(members[k].begin(), members[k].end(), [](std::uint8_t v) { return v != 0; }))
      chosen.push_back(k);

  json checks = json::array();
  bool all = chosen.size() == c.lemma_envs;
  std::array<std::uint64_t, 4> applicable{};
  double worst_K = 1.0;
  for (std::uint64_t k : chosen) {
    std::vector<Prepared> preps;
    for (double lt : c.log_t) preps.push_back(prepare(c.spec, c.env_seed + k, TimeScale::from_log(lt), c.mode, c.params));
    for (int which = 1; which <= 4; ++which) {
      std::vector<BoundCheck> by_t;
      for (std::size_t i = 0; i < preps.size(); ++i)
        by_t.push_back(lemma_check(preps[i], which, eps, cp, rng::mix(rng::mix(seed, k), 16 * i + which)));
      fit_constant(by_t);
      for (const BoundCheck& b : by_t) {
        if (b.applicable) {
          ++applicable[which - 1];
          worst_K = std::max(worst_K, b.K);
          all = all && b.verdict == "pass" && b.K < 1e3;
        }
        checks.push_back(to_json(b));
      }
    }
  }
  for (auto a : applicable) all = all && a > 0;
  return {"",
          all,
          {{"eps", eps}, {"envs", chosen.size()}, {"applicable", applicable}, {"max_K", worst_K}, {"checks", checks}},
          0.0};
}

// ---- 10: optional stopping -----------------------------------------------

ClaimResult martingale(const CampaignConfig& c) {
  const std::uint64_t seed = claim_seed(c, "martingale");
  json rows = json::array();
  bool all = true;
  for (std::uint64_t k = 0; k < c.martingale_instances; ++k) {
    const Environment env = Environment::sample(c.spec, k, Window{-60, 60});
    rng::Engine g = rng::stream(seed, k, rng::Stream::Path);
    const Instance in = draw_instance(env, g, 4, 30, 0.02);
    const MartingaleReport m = martingale_check(env, in.a, in.z, in.b, c.martingale_trials, rng::mix(seed, k));
    all = all && m.ok;
    json row = to_json(m);
    row["env_seed"] = k;
    rows.push_back(row);
  }
  return {"", all, {{"checks", rows}}, 0.0};
}

// ---- annealed Gamma frequencies and the corollary ------------------------

ClaimResult annealed(const CampaignConfig& c) {
  const AnnealedTable t =
      annealed_frequencies(c.spec, c.log_t, c.eps, c.annealed_envs, c.env_seed, c.mode, c.params);
  bool ok = true;
  for (const TrendCheck& tc : t.trends) ok = ok && (tc.ok || !tc.asserted);
  return {"", ok, to_json(t), 0.0};
}

ClaimResult corollary(const CampaignConfig& c) {
  const CorollaryReport r =
      corollary_assembly(c.spec, c.corollary_log_t, c.delta, c.quenched_eps, c.corollary_envs, c.corollary_trials,
                         c.env_seed, c.mode, c.params, claim_seed(c, "corollary"));
  return {"", r.ok, to_json(r), 0.0};
}

using ClaimFn = ClaimResult (*)(const CampaignConfig&);

const std::vector<std::pair<std::string, ClaimFn>>& registry() {
  static const std::vector<std::pair<std::string, ClaimFn>> r = {
      {"ruin-exactness", ruin_exactness}, {"ruin-monte-carlo", ruin_monte_carlo},
      {"reversible-measure", reversible_identity}, {"reflected-chain", reflected_chain},
      {"spectral", spectral}, {"landscape", landscape},
      {"scaling", scaling}, {"localization", localization},
      {"lemma-bounds", lemma_bounds}, {"martingale", martingale},
      {"annealed", annealed}, {"corollary", corollary},
  };
  return r;
}

std::vector<std::string> selected(const CampaignConfig& c) {
  std::vector<std::string> out;
  for (const auto& [id, fn] : registry())
    if (std::find(c.claims.begin(), c.claims.end(), "all") != c.claims.end() ||
        std::find(c.claims.begin(), c.claims.end(), id) != c.claims.end())
      out.push_back(id);
  return out;
}

}  // namespace

const std::vector<std::string>& claim_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, fn] : registry()) v.push_back(id);
    return v;
  }();
  return ids;
}

ClaimResult run_claim(const std::string& id, const CampaignConfig& c) {
  for (const auto& [name, fn] : registry()) {
    if (name != id) continue;
    const auto start = std::chrono::steady_clock::now();
    ClaimResult r = fn(c);
    r.id = id;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  fail(ErrorCode::InvalidArgument, "unknown claim '" + id + "'");
}

json to_json(const CampaignConfig& c) {
  return {{"spec", to_json(c.spec)},
          {"mode", to_string(c.mode)},
          {"env_seed", c.env_seed},
          {"experiment_seed", c.experiment_seed},
          {"M", c.params.M},
          {"kappa_hat", c.params.kappa_hat},
          {"log_t", c.log_t},
          {"eps", c.eps},
          {"quenched_eps", c.quenched_eps},
          {"delta", c.delta},
          {"trials", c.trials},
          {"lemma_trials", c.lemma_trials},
          {"lemma_max_trials", c.lemma_max_trials},
          {"quenched_envs", c.quenched_envs},
          {"lemma_envs", c.lemma_envs},
          {"env_scan", c.env_scan},
          {"annealed_envs", c.annealed_envs},
          {"corollary_log_t", c.corollary_log_t},
          {"corollary_envs", c.corollary_envs},
          {"corollary_trials", c.corollary_trials},
          {"ruin_envs", c.ruin_envs},
          {"ruin_instances", c.ruin_instances},
          {"ruin_mc_trials", c.ruin_mc_trials},
          {"measure_envs", c.measure_envs},
          {"chains", c.chains},
          {"occupation_runs", c.occupation_runs},
          {"spectral_envs", c.spectral_envs},
          {"landscape_paths", c.landscape_paths},
          {"scaling_paths", c.scaling_paths},
          {"ks_paths", c.ks_paths},
          {"martingale_instances", c.martingale_instances},
          {"martingale_trials", c.martingale_trials},
          {"claims", c.claims}};
}

CampaignConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Parse, "config must be a JSON object");
  CampaignConfig c;
  const json defaults = to_json(c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) fail(ErrorCode::Parse, "unknown config key '" + key + "'");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("spec")) c.spec = spec_from_json(j.at("spec"));
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
    get("env_seed", c.env_seed);
    get("experiment_seed", c.experiment_seed);
    get("M", c.params.M);
    get("kappa_hat", c.params.kappa_hat);
    get("log_t", c.log_t);
    get("eps", c.eps);
    get("quenched_eps", c.quenched_eps);
    get("delta", c.delta);
    get("trials", c.trials);
    get("lemma_trials", c.lemma_trials);
    get("lemma_max_trials", c.lemma_max_trials);
    get("quenched_envs", c.quenched_envs);
    get("lemma_envs", c.lemma_envs);
    get("env_scan", c.env_scan);
    get("annealed_envs", c.annealed_envs);
    get("corollary_log_t", c.corollary_log_t);
    get("corollary_envs", c.corollary_envs);
    get("corollary_trials", c.corollary_trials);
    get("ruin_envs", c.ruin_envs);
    get("ruin_instances", c.ruin_instances);
    get("ruin_mc_trials", c.ruin_mc_trials);
    get("measure_envs", c.measure_envs);
    get("chains", c.chains);
    get("occupation_runs", c.occupation_runs);
    get("spectral_envs", c.spectral_envs);
    get("landscape_paths", c.landscape_paths);
    get("scaling_paths", c.scaling_paths);
    get("ks_paths", c.ks_paths);
    get("martingale_instances", c.martingale_instances);
    get("martingale_trials", c.martingale_trials);
    get("claims", c.claims);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  require(!c.log_t.empty() && !c.eps.empty(), "config: log_t and eps grids must be non-empty");
  for (double lt : c.log_t) require(lt > 1.0, "config: every log_t must exceed 1 (t > e)");
  for (double e : c.eps) require(e > 0.0 && e < 1.0, "config: eps values must lie in (0, 1)");
  require(c.quenched_eps > 0.0 && c.quenched_eps < 1.0, "config: quenched_eps must lie in (0, 1)");
  require(c.delta > 0.0, "config: delta must be positive");
  require(c.params.M > 2.0, "config: M must exceed 2");
  require(c.params.kappa_hat > 0.0, "config: kappa_hat must be positive");
  require(c.trials > 0 && c.lemma_trials > 0 && c.corollary_trials > 0, "config: trial counts must be positive");
  require(c.martingale_trials > 1 && c.ruin_mc_trials > 0 && c.occupation_runs > 0,
          "config: trial counts must be positive");
  require(c.chains <= 11, "config: at most 11 chains (length 10 + 4k <= 50)");
  for (const std::string& id : c.claims)
    require(id == "all" || std::find(claim_ids().begin(), claim_ids().end(), id) != claim_ids().end(),
            "config: unknown claim '" + id + "'");
  return c;
}

json run_campaign(const CampaignConfig& c, const std::function<void(const ClaimResult&)>& progress) {
  json claims = json::array(), timings = json::object();
  bool all = true;
  for (const std::string& id : selected(c)) {
    ClaimResult r = run_claim(id, c);
    if (progress) progress(r);
    all = all && r.pass;
    timings[id] = r.seconds;
    claims.push_back({{"id", id}, {"pass", r.pass}, {"body", std::move(r.body)}});
  }
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"schema", kSchema},
          {"version", version()},
          {"config", to_json(c)},
          {"claims", claims},
          {"verdict", all ? "pass" : "fail"},
          {"generated", {{"timestamp", stamp}, {"timings", timings}, {"threads", worker_count()}}}};
}

json deterministic_part(const json& report) {
  json d = report;
  d.erase("generated");
  return d;
}

json to_json(const BoundCheck& c) {
  json details = json::object();
  for (const auto& [k, v] : c.details) details[k] = v;
  return {{"claim", c.claim},
          {"side", c.side},
          {"log_t", c.log_t},
          {"env_seed", c.env_seed},
          {"trials", c.trials},
          {"events", c.events},
          {"p_hat", c.p_hat},
          {"ci", interval(c.ci)},
          {"exponent", c.exponent},
          {"rate", c.rate},
          {"K", c.K},
          {"bound", c.bound},
          {"exact", c.exact ? json(*c.exact) : json(nullptr)},
          {"cross_check_ok", c.cross_check_ok},
          {"resolution_limited", c.resolution_limited},
          {"upper", c.upper},
          {"basis", c.basis},
          {"applicable", c.applicable},
          {"verdict", c.verdict},
          {"details", details}};
}

json to_json(const GammaReport& g) {
  json sets = json::object();
  for (int k = 0; k < GammaCount; ++k) {
    const SetResult& s = g.sets[k];
    sets[gamma_name(k)] = {
        {"evaluated", s.evaluated}, {"member", s.member}, {"value", s.value}, {"margin", s.margin}};
  }
  return {{"log_t", g.log_t},
          {"eps", g.eps},
          {"M", g.params.M},
          {"kappa_hat", g.params.kappa_hat},
          {"resolved", g.resolved},
          {"sets", sets},
          {"overall", g.overall}};
}

json to_json(const EventTally& e) {
  static const char* names[11] = {"A1",        "A2-",       "A2+",          "A3-",         "A3+",  "A4-",
                                  "A4+",       "all-",      "all+",         "near-",       "near+"};
  json counts = json::object();
  for (int k = 0; k < 11; ++k) counts[names[k]] = e.counts[k];
  return {{"log_t", e.log_t}, {"eps", e.eps},     {"trials", e.trials},       {"counts", counts},
          {"side", e.side},   {"lhs", e.lhs},     {"rhs", e.rhs},             {"subset_ok", e.subset_ok},
          {"chain_ok", e.chain_ok}};
}

json to_json(const AnnealedTable& t) {
  json cells = json::array(), trends = json::array();
  for (const AnnealedCell& c : t.cells) {
    json row = {{"log_t", c.log_t}, {"eps", c.eps}, {"envs", c.n_env}, {"resolved", c.resolved}};
    const double n = static_cast<double>(c.n_env);
    for (int k = 0; k < GammaCount; ++k)
      row[std::string(gamma_name(k))] =
          c.evaluated[k] ? json(static_cast<double>(c.members[k]) / static_cast<double>(c.evaluated[k])) : json(nullptr);
    row["gamma"] = static_cast<double>(c.overall) / n;
    row["gamma_ci"] = interval(stats::wilson(c.overall, c.n_env, 3.0));
    cells.push_back(row);
  }
  for (const TrendCheck& tc : t.trends)
    trends.push_back({{"name", tc.name}, {"ok", tc.ok}, {"asserted", tc.asserted}, {"detail", tc.detail}});
  return {{"cells", cells}, {"trends", trends}};
}

json to_json(const ScalingReport& s) {
  return {{"paths", s.paths},
          {"scales", s.scales},
          {"exact_failures", s.exact_failures},
          {"log_t1", s.log_t1},
          {"log_t2", s.log_t2},
          {"ks_paths", s.ks_paths},
          {"ks_statistic", s.ks.statistic},
          {"ks_p_value", s.ks.p_value},
          {"ok", s.ok}};
}

json to_json(const CorollaryReport& r) {
  return {{"log_t", r.log_t},
          {"delta", r.delta},
          {"eps", r.eps},
          {"envs", r.n_env},
          {"members", r.members},
          {"trials", r.trials},
          {"annealed_failure", r.annealed_failure},
          {"gamma_part", r.gamma_part},
          {"non_gamma_mass", r.non_gamma_mass},
          {"ok", r.ok}};
}

json to_json(const MartingaleReport& r) {
  return {{"a", r.a},
          {"z", r.z},
          {"b", r.b},
          {"trials", r.trials},
          {"f_z", r.f_z},
          {"estimate", r.estimate},
          {"std_error", r.std_error},
          {"ok", r.ok}};
}

namespace {

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_array() || v.is_object()) {
    std::string s = v.dump();
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.is_null() ? "" : v.dump();
}

}  // namespace

std::string claim_csv(const json& claim) {
  const json& body = claim.at("body");
  const json* rows = nullptr;
  for (const char* key : {"checks", "cells"})
    if (body.contains(key) && body.at(key).is_array() && !body.at(key).empty()) {
      rows = &body.at(key);
      break;
    }
  if (!rows) return "";
  std::vector<std::string> cols;
  for (const auto& [k, v] : rows->front().items())
    if (!v.is_object()) cols.push_back(k);
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const json& r : *rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << (r.contains(cols[i]) ? csv_cell(r[cols[i]]) : "");
    os << '\n';
  }
  return os.str();
}

std::string localization_svg(const json& claim) {
  try {
    const json& h = claim.at("body").at("histogram");
    const double lo = h.at("lo").get<double>(), hi = h.at("hi").get<double>();
    const int bins = h.at("bins").get<int>();
    std::vector<double> edges;
    for (int i = 0; i <= bins; ++i) edges.push_back(lo + (hi - lo) * i / bins);
    std::vector<HistogramSeries> series;
    for (const json& s : h.at("series")) {
      std::ostringstream label;
      label << "log t = " << s.at("log_t").get<double>();
      series.push_back({label.str(), s.at("counts").get<std::vector<std::uint64_t>>()});
    }
    return histogram_svg(edges, series, "(xi_t - m_t) / log^2 t");
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("claim has no localization histogram: ") + e.what());
  }
}

}  // namespace sinai
