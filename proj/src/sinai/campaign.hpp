#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sinai/experiments.hpp"

namespace sinai {

using json = nlohmann::json;

const char* version();

struct CampaignConfig {
  DistributionSpec spec = DistributionSpec::two_point(1.0);
  Mode mode = Mode::Surrogate;
  std::uint64_t env_seed = 1;
  std::uint64_t experiment_seed = 2;
  ModelParams params;
  std::vector<double> log_t = {8.0, 10.0, 12.0};
  std::vector<double> eps = {0.2, 0.1, 0.05};
  double quenched_eps = 0.1;
  double delta = 1.0;
  std::uint64_t trials = 500;
  std::uint64_t lemma_trials = 300;
  std::uint64_t lemma_max_trials = 4000;
  std::uint64_t quenched_envs = 6;  // Gamma members per t
  std::uint64_t lemma_envs = 3;     // members at every t
  std::uint64_t env_scan = 400;     // seeds searched for members
  std::uint64_t annealed_envs = 1000;
  double corollary_log_t = 8.0;
  std::uint64_t corollary_envs = 20;
  std::uint64_t corollary_trials = 100;
  std::uint64_t ruin_envs = 100;
  std::uint64_t ruin_instances = 10;
  std::uint64_t ruin_mc_trials = 100000;
  std::uint64_t measure_envs = 100;
  std::uint64_t chains = 10;
  std::uint64_t occupation_runs = 100;
  std::uint64_t spectral_envs = 50;
  std::uint64_t landscape_paths = 1000;
  std::uint64_t scaling_paths = 1000;
  std::uint64_t ks_paths = 500;
  std::uint64_t martingale_instances = 10;
  std::uint64_t martingale_trials = 4000;
  std::vector<std::string> claims = {"all"};
};

json to_json(const CampaignConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
CampaignConfig config_from_json(const json& j);

// Claim identifiers in campaign order.
const std::vector<std::string>& claim_ids();

struct ClaimResult {
  std::string id;
  bool pass = false;
  json body;
  double seconds = 0.0;
};

ClaimResult run_claim(const std::string& id, const CampaignConfig& c);

// Report: {schema, version, config, claims, verdict, generated}. Everything
// except `generated` (wall clock and timings) is a pure function of the config.
json run_campaign(const CampaignConfig& c, const std::function<void(const ClaimResult&)>& progress = {});

// The report without its `generated` block, for byte comparison.
json deterministic_part(const json& report);

json to_json(const BoundCheck& c);
json to_json(const GammaReport& g);
json to_json(const EventTally& e);
json to_json(const AnnealedTable& t);
json to_json(const ScalingReport& s);
json to_json(const CorollaryReport& r);
json to_json(const MartingaleReport& r);

// Per-claim CSV table (one row per check); empty when the claim has none.
std::string claim_csv(const json& claim);

// Histogram of (xi_t - m_t) / log^2 t from a localization claim, as SVG.
std::string localization_svg(const json& claim);

}  // namespace sinai
