#include "sinai.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "sinai/campaign.hpp"
#include "sinai/error.hpp"
#include "sinai/oracle.hpp"
#include "sinai/serialize.hpp"
#include "sinai/svg.hpp"
#include "sinai/walker.hpp"

struct sinai_env {
  sinai::Environment env;
};

struct sinai_landscape {
  sinai::SampledFunction f;
  sinai::StableLandscape land;
};

namespace {

thread_local std::string last_error;

sinai_status status_of(sinai::ErrorCode c) {
  switch (c) {
    case sinai::ErrorCode::InvalidArgument: return SINAI_INVALID_ARGUMENT;
    case sinai::ErrorCode::WindowExhausted: return SINAI_WINDOW_EXHAUSTED;
    case sinai::ErrorCode::Unsupported: return SINAI_UNSUPPORTED;
    case sinai::ErrorCode::Io: return SINAI_IO_ERROR;
    case sinai::ErrorCode::Parse: return SINAI_PARSE_ERROR;
    case sinai::ErrorCode::Internal: return SINAI_INTERNAL_ERROR;
    case sinai::ErrorCode::NotApplicable: return SINAI_NOT_APPLICABLE;
  }
  return SINAI_INTERNAL_ERROR;
}

template <class F>
sinai_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return SINAI_OK;
  } catch (const sinai::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return SINAI_PARSE_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SINAI_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SINAI_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  if (!p) sinai::fail(sinai::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sinai::DistributionSpec parse_spec(const char* text) {
  const std::string s(text);
  if (!s.empty() && s.front() == '{') return sinai::spec_from_json(nlohmann::json::parse(s));
  return sinai::spec_from_string(s);
}

sinai::CampaignConfig parse_config(const char* config) {
  if (!config || !*config) return {};
  return sinai::config_from_json(nlohmann::json::parse(config));
}

const nlohmann::json& find_claim(const nlohmann::json& report, const std::string& id) {
  for (const auto& c : report.at("claims"))
    if (c.at("id") == id) return c;
  sinai::fail(sinai::ErrorCode::InvalidArgument, "report has no claim '" + id + "'");
}

}  // namespace

extern "C" {

const char* sinai_version(void) { return sinai::version(); }

const char* sinai_last_error(void) { return last_error.c_str(); }

void sinai_string_free(char* s) { std::free(s); }

sinai_status sinai_env_sample(const char* spec, uint64_t seed, int64_t lo, int64_t hi, sinai_env** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    sinai::require(lo <= 0 && 0 <= hi, "window must contain the origin");
    *out = new sinai_env{sinai::Environment::sample(parse_spec(spec), seed, sinai::Window{lo, hi})};
  });
}

sinai_status sinai_env_from_json(const char* json, sinai_env** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new sinai_env{sinai::environment_from_json(nlohmann::json::parse(json))};
  });
}

sinai_status sinai_env_load(const char* path, sinai_env** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string text = sinai::read_file(path);
    *out = new sinai_env{sinai::environment_from_json(nlohmann::json::parse(text))};
  });
}

sinai_status sinai_env_to_json(const sinai_env* env, char** out) {
  return guarded([&] {
    need(env, "env");
    need(out, "out");
    *out = dup(sinai::to_json(env->env).dump());
  });
}

sinai_status sinai_env_save(const sinai_env* env, const char* path) {
  return guarded([&] {
    need(env, "env");
    need(path, "path");
    sinai::write_file(path, sinai::to_json(env->env).dump() + "\n");
  });
}

void sinai_env_free(sinai_env* env) { delete env; }

sinai_status sinai_env_window(const sinai_env* env, int64_t* lo, int64_t* hi) {
  return guarded([&] {
    need(env, "env");
    need(lo, "lo");
    need(hi, "hi");
    *lo = env->env.window().lo;
    *hi = env->env.window().hi;
  });
}

sinai_status sinai_env_rates(const sinai_env* env, int64_t x, double* minus, double* plus) {
  return guarded([&] {
    need(env, "env");
    need(minus, "minus");
    need(plus, "plus");
    const sinai::RatePair& r = env->env.rates(x);
    *minus = r.minus;
    *plus = r.plus;
  });
}

sinai_status sinai_env_potential(const sinai_env* env, int64_t x, double* v) {
  return guarded([&] {
    need(env, "env");
    need(v, "v");
    const sinai::Window w = env->env.window();
    if (!w.contains(x)) throw sinai::WindowExhausted("site outside the window");
    *v = sinai::potential(env->env).value(static_cast<std::size_t>(x - w.lo));
  });
}

sinai_status sinai_env_potential_csv(const sinai_env* env, char** out) {
  return guarded([&] {
    need(env, "env");
    need(out, "out");
    *out = dup(sinai::potential_csv(env->env));
  });
}

sinai_status sinai_ruin_probability(const sinai_env* env, int64_t a, int64_t z, int64_t b, double* out) {
  return guarded([&] {
    need(env, "env");
    need(out, "out");
    *out = sinai::ruin_probability(env->env, a, z, b);
  });
}

sinai_status sinai_lyapunov(const sinai_env* env, int64_t a, int64_t x, double* out) {
  return guarded([&] {
    need(env, "env");
    need(out, "out");
    *out = sinai::lyapunov(sinai::potential(env->env), a, x);
  });
}

sinai_status sinai_spectral_gap(const sinai_env* env, int64_t a, int64_t b, double* lambda, double* elevation) {
  return guarded([&] {
    need(env, "env");
    need(lambda, "lambda");
    const sinai::SpectralReport r = sinai::spectral_gap(env->env, sinai::Window{a, b}, false);
    *lambda = r.lambda;
    if (elevation) *elevation = r.elevation_value;
  });
}

sinai_status sinai_landscape_compute(const sinai_env* env, double log_t, sinai_landscape** out) {
  return guarded([&] {
    need(env, "env");
    need(out, "out");
    sinai::SampledFunction f = sinai::potential(env->env);
    sinai::StableLandscape land = sinai::stable_landscape(f, sinai::TimeScale::from_log(log_t));
    *out = new sinai_landscape{std::move(f), std::move(land)};
  });
}

void sinai_landscape_free(sinai_landscape* land) { delete land; }

sinai_status sinai_landscape_to_json(const sinai_landscape* land, char** out) {
  return guarded([&] {
    need(land, "landscape");
    need(out, "out");
    *out = dup(sinai::to_json(land->land, land->f).dump());
  });
}

sinai_status sinai_landscape_m_t(const sinai_landscape* land, int64_t* m_t) {
  return guarded([&] {
    need(land, "landscape");
    need(m_t, "m_t");
    *m_t = sinai::snap_to_site(land->f.position(land->land.m_t));
  });
}

sinai_status sinai_landscape_svg(const sinai_landscape* land, double eps, char** out) {
  return guarded([&] {
    need(land, "landscape");
    need(out, "out");
    sinai::require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    *out = dup(sinai::landscape_svg(land->f, land->land, eps));
  });
}

sinai_status sinai_simulate(const sinai_env* env, int64_t start, double t, const int64_t* targets, size_t n_targets,
                            uint64_t seed, uint64_t trial, char** outcome, char** trajectory) {
  return guarded([&] {
    need(env, "env");
    need(outcome, "outcome");
    sinai::require(t >= 0.0, "time must be non-negative");
    sinai::require(n_targets == 0 || targets, "targets is null");
    sinai::Environment local = env->env;
    sinai::WalkState st = sinai::start_walk(start, seed, trial);
    sinai::Trajectory tr;
    tr.record(0.0, start);
    nlohmann::json j{{"start", start}, {"t", t}, {"seed", seed}, {"trial", trial}};
    // Record every jump while the table covers the walker; extend and resume otherwise.
    auto visit = [&](std::int64_t x, double clock) {
      if (trajectory) tr.record(clock, x);
      for (size_t i = 0; i < n_targets; ++i)
        if (x == targets[i]) return false;
      return true;
    };
    sinai::WalkStatus status;
    while (true) {
      const sinai::JumpTable table(local);
      status = sinai::run_observed(table, st, t, visit);
      if (status != sinai::WalkStatus::WindowExhausted) break;
      const sinai::Window w = local.window();
      const auto span = static_cast<std::int64_t>(w.size());
      if (w.size() > (std::size_t{1} << 24)) throw sinai::WindowExhausted("walker left the largest admissible window");
      local = local.extend(sinai::Window{w.lo - span, w.hi + span});
    }
    const bool hit = status == sinai::WalkStatus::Stopped;
    j["hit"] = hit;
    j["hit_time"] = hit ? nlohmann::json(st.clock) : nlohmann::json(nullptr);
    j["final_position"] = st.position;
    j["final_time"] = st.clock;
    j["jumps"] = st.jumps;
    j["window"] = {local.window().lo, local.window().hi};
    j["version"] = sinai::version();
    *outcome = dup(j.dump());
    if (trajectory) *trajectory = dup(sinai::trajectory_csv(tr));
  });
}

sinai_status sinai_default_config(char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(sinai::to_json(sinai::CampaignConfig{}).dump());
  });
}

sinai_status sinai_verify(const char* config, char** report, int* all_pass) {
  return guarded([&] {
    need(report, "report");
    const sinai::CampaignConfig c = parse_config(config);
    const nlohmann::json r = sinai::run_campaign(c);
    *report = dup(r.dump(2));
    if (all_pass) *all_pass = r.at("verdict") == "pass";
  });
}

sinai_status sinai_report_claim_csv(const char* report, const char* claim, char** out) {
  return guarded([&] {
    need(report, "report");
    need(claim, "claim");
    need(out, "out");
    const nlohmann::json r = nlohmann::json::parse(report);
    *out = dup(sinai::claim_csv(find_claim(r, claim)));
  });
}

sinai_status sinai_report_histogram_svg(const char* report, char** out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    const nlohmann::json r = nlohmann::json::parse(report);
    *out = dup(sinai::localization_svg(find_claim(r, "localization")));
  });
}

sinai_status sinai_annealed_csv(const char* config, char** csv, int* all_pass) {
  return guarded([&] {
    need(csv, "csv");
    sinai::CampaignConfig c = parse_config(config);
    const sinai::ClaimResult r = sinai::run_claim("annealed", c);
    *csv = dup(sinai::claim_csv(nlohmann::json{{"id", r.id}, {"pass", r.pass}, {"body", r.body}}));
    if (all_pass) *all_pass = r.pass;
  });
}

}  // extern "C"
