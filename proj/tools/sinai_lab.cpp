// sinai-lab: command-line front end over the C API.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sinai.h"

using json = nlohmann::json;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

struct Failure {
  std::string message;
};

void check(sinai_status s, const char* what) {
  if (s == SINAI_OK) return;
  std::string msg = std::string(what) + ": ";
  if (s == SINAI_WINDOW_EXHAUSTED) msg += "window exhausted: ";
  throw Failure{msg + sinai_last_error()};
}

// Owns a string handed out by the library.
struct Text {
  char* p = nullptr;
  ~Text() { sinai_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Env {
  sinai_env* p = nullptr;
  ~Env() { sinai_env_free(p); }
};

struct Land {
  sinai_landscape* p = nullptr;
  ~Land() { sinai_landscape_free(p); }
};

// "e10" is t = e^10; anything else is t itself.
double parse_log_t(const std::string& s) {
  char* end = nullptr;
  if (!s.empty() && (s[0] == 'e' || s[0] == 'E')) {
    const double v = std::strtod(s.c_str() + 1, &end);
    if (end != s.c_str() + 1 && *end == '\0') return v;
  } else {
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() && *end == '\0' && v > 0) return std::log(v);
  }
  throw CLI::ValidationError("--t", "expected a time like 22026 or e10, got '" + s + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read '" + path + "'"};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes to DIR/name, or to stdout when no directory was given.
void emit(const std::string& dir, const std::string& name, const std::string& text) {
  if (dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{"cannot write '" + path + "'"};
  std::cerr << "wrote " << path << '\n';
}

std::string stamp(const json& provenance) {
  return provenance.dump();
}

std::string csv_with_header(const json& provenance, const std::string& csv) {
  return "# " + stamp(provenance) + "\n" + csv;
}

std::string svg_with_header(const json& provenance, const std::string& svg) {
  const auto pos = svg.find('\n');
  std::string note = stamp(provenance);
  for (std::size_t i; (i = note.find("--")) != std::string::npos;) note.replace(i, 2, "- -");
  return svg.substr(0, pos + 1) + "<!-- " + note + " -->\n" + svg.substr(pos + 1);
}

// Flags shared by verify and annealed; unset flags leave the config alone.
struct CampaignFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed, experiment_seed, trials;
  std::vector<std::string> t;
  std::vector<double> eps;
  std::optional<double> delta, M;
  std::optional<std::string> mode;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "campaign config JSON")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "environment seed");
    app->add_option("--experiment-seed", experiment_seed, "walk seed");
    app->add_option("--t", t, "time grid, e.g. e8,e10,e12")->delimiter(',');
    app->add_option("--eps", eps, "eps grid")->delimiter(',');
    app->add_option("--delta", delta, "localization radius in units of log^2 t");
    app->add_option("--M", M, "window exponent, M > 2");
    app->add_option("--trials", trials, "walks per environment and t");
    app->add_option("--mode", mode, "landmarks from V (surrogate) or a coupled W")
        ->check(CLI::IsMember({"surrogate", "coupled"}));
  }

  json build() const {
    json c = config_file.empty() ? json::object() : json::parse(read_text(config_file));
    if (seed) c["env_seed"] = *seed;
    if (experiment_seed) c["experiment_seed"] = *experiment_seed;
    if (!t.empty()) {
      std::vector<double> lt;
      for (const auto& s : t) lt.push_back(parse_log_t(s));
      c["log_t"] = lt;
    }
    if (!eps.empty()) c["eps"] = eps;
    if (eps.size() == 1) c["quenched_eps"] = eps[0];
    if (delta) c["delta"] = *delta;
    if (M) c["M"] = *M;
    if (trials) c["trials"] = *trials;
    if (mode) c["mode"] = *mode;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sinai-lab: random walk in random environment workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sinai_version()));

  std::string out_dir, format = "json";
  auto add_common = [&](CLI::App* sub, std::vector<std::string> formats) {
    sub->add_option("--out", out_dir, "output directory (default: stdout)");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember(formats));
  };

  // generate
  auto* gen = app.add_subcommand("generate", "sample an environment");
  std::string spec = "two-point:1";
  std::uint64_t gen_seed = 1;
  std::int64_t lo = -1000, hi = 1000;
  gen->add_option("--spec", spec, "two-point:C or log-uniform:C");
  gen->add_option("--seed", gen_seed, "environment seed");
  gen->add_option("--lo", lo, "left end of the window (<= 0)");
  gen->add_option("--hi", hi, "right end of the window (>= 0)");
  add_common(gen, {"json", "csv"});

  // landscape
  auto* lsc = app.add_subcommand("landscape", "t-stable points, peaks, wells and landmarks");
  std::string env_file, t_text = "e8";
  double eps = 0.1;
  lsc->add_option("--env", env_file, "environment JSON")->required()->check(CLI::ExistingFile);
  lsc->add_option("--t", t_text, "time scale, e.g. e8");
  lsc->add_option("--eps", eps, "neighborhood radius eps log t in the figure");
  add_common(lsc, {"json", "svg", "csv"});

  // simulate
  auto* sim = app.add_subcommand("simulate", "one walk in a stored environment");
  std::int64_t start = 0;
  std::vector<std::int64_t> targets;
  std::uint64_t sim_seed = 1, trial = 0;
  std::string sim_t = "e8";
  sim->add_option("--env", env_file, "environment JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--start", start, "starting site");
  sim->add_option("--t", sim_t, "time horizon, e.g. e8 or 1000");
  sim->add_option("--targets", targets, "stop on first arrival in these sites")->delimiter(',');
  sim->add_option("--seed", sim_seed, "walk seed");
  sim->add_option("--trial", trial, "trial index within the seed");
  add_common(sim, {"json", "csv"});

  // verify
  auto* ver = app.add_subcommand("verify", "run verification claims; exit 1 if any fails");
  std::vector<std::string> claims;
  CampaignFlags vflags;
  ver->add_option("claims", claims, "claim ids, or 'all'");
  vflags.attach(ver);
  add_common(ver, {"json", "csv", "svg"});

  // annealed
  auto* ann = app.add_subcommand("annealed", "Gamma-set frequencies over sampled environments");
  CampaignFlags aflags;
  std::optional<std::uint64_t> envs;
  aflags.attach(ann);
  ann->add_option("--envs", envs, "number of environments");
  add_common(ann, {"csv", "json"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*gen) {
      Env env;
      check(sinai_env_sample(spec.c_str(), gen_seed, lo, hi, &env.p), "generate");
      if (format == "csv") {
        Text csv;
        check(sinai_env_potential_csv(env.p, &csv.p), "generate");
        const json prov{{"version", sinai_version()}, {"spec", spec}, {"seed", gen_seed}, {"window", {lo, hi}}};
        emit(out_dir, "potential.csv", csv_with_header(prov, csv.str()));
      } else {
        Text j;
        check(sinai_env_to_json(env.p, &j.p), "generate");
        json doc = json::parse(j.str());
        doc["version"] = sinai_version();
        emit(out_dir, "env.json", doc.dump() + "\n");
      }
      return kPass;
    }

    if (*lsc) {
      Env env;
      check(sinai_env_load(env_file.c_str(), &env.p), "landscape");
      const double log_t = parse_log_t(t_text);
      const json prov{{"version", sinai_version()}, {"env", env_file}, {"log_t", log_t}, {"eps", eps}};
      if (format == "csv") {
        Text csv;
        check(sinai_env_potential_csv(env.p, &csv.p), "landscape");
        emit(out_dir, "potential.csv", csv_with_header(prov, csv.str()));
        return kPass;
      }
      Land land;
      check(sinai_landscape_compute(env.p, log_t, &land.p), "landscape");
      if (format == "svg") {
        Text svg;
        check(sinai_landscape_svg(land.p, eps, &svg.p), "landscape");
        emit(out_dir, "landscape.svg", svg_with_header(prov, svg.str()));
      } else {
        Text j;
        check(sinai_landscape_to_json(land.p, &j.p), "landscape");
        json doc = json::parse(j.str());
        doc["provenance"] = prov;
        emit(out_dir, "landscape.json", doc.dump(2) + "\n");
      }
      return kPass;
    }

    if (*sim) {
      Env env;
      check(sinai_env_load(env_file.c_str(), &env.p), "simulate");
      const double log_t = parse_log_t(sim_t);
      const double t = std::exp(log_t);
      Text outcome, traj;
      check(sinai_simulate(env.p, start, t, targets.data(), targets.size(), sim_seed, trial, &outcome.p,
                           format == "csv" ? &traj.p : nullptr),
            "simulate");
      json doc = json::parse(outcome.str());
      doc["env"] = env_file;
      if (format == "csv") emit(out_dir, "trajectory.csv", csv_with_header(doc, traj.str()));
      else emit(out_dir, "outcome.json", doc.dump(2) + "\n");
      return kPass;
    }

    if (*ver) {
      json config = vflags.build();
      if (!claims.empty()) config["claims"] = claims;
      Text report;
      int pass = 0;
      check(sinai_verify(config.dump().c_str(), &report.p, &pass), "verify");
      const json doc = json::parse(report.str());
      for (const auto& c : doc.at("claims"))
        std::cerr << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("id").get<std::string>() << '\n';
      if (format == "json" || !out_dir.empty()) emit(out_dir, "report.json", report.str() + "\n");
      const json prov{{"version", sinai_version()}, {"config", doc.at("config")}};
      if (format == "csv") {
        for (const auto& c : doc.at("claims")) {
          const std::string id = c.at("id").get<std::string>();
          Text csv;
          check(sinai_report_claim_csv(report.p, id.c_str(), &csv.p), "verify");
          if (!csv.str().empty()) emit(out_dir, id + ".csv", csv_with_header(prov, csv.str()));
        }
      } else if (format == "svg") {
        Text svg;
        check(sinai_report_histogram_svg(report.p, &svg.p), "verify");
        emit(out_dir, "localization.svg", svg_with_header(prov, svg.str()));
      }
      return pass ? kPass : kFail;
    }

    if (*ann) {
      if (ann->get_option("--format")->count() == 0) format = "csv";
      json config = aflags.build();
      if (envs) config["annealed_envs"] = *envs;
      config["claims"] = {"annealed"};
      if (format == "json") {
        Text report;
        int pass = 0;
        check(sinai_verify(config.dump().c_str(), &report.p, &pass), "annealed");
        emit(out_dir, "annealed.json", report.str() + "\n");
        return pass ? kPass : kFail;
      }
      Text csv;
      int pass = 0;
      check(sinai_annealed_csv(config.dump().c_str(), &csv.p, &pass), "annealed");
      const json prov{{"version", sinai_version()}, {"config", config}};
      emit(out_dir, "annealed.csv", csv_with_header(prov, csv.str()));
      return pass ? kPass : kFail;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return kUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
