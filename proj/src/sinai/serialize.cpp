#include "sinai/serialize.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sinai/error.hpp"

namespace sinai {

json to_json(const DistributionSpec& spec) {
  json j{{"family", to_string(spec.family())}};
  if (spec.family() == Family::FiniteTable) {
    json rows = json::array();
    for (const TableEntry& e : spec.table())
      rows.push_back({{"minus", e.rates.minus}, {"plus", e.rates.plus}, {"probability", e.probability}});
    j["table"] = rows;
  } else {
    j["c"] = spec.c();
  }
  return j;
}

DistributionSpec spec_from_json(const json& j) {
  try {
    const Family f = family_from_string(j.at("family").get<std::string>());
    if (f == Family::TwoPointSymmetric) return DistributionSpec::two_point(j.at("c").get<double>());
    if (f == Family::LogUniformSymmetric) return DistributionSpec::log_uniform(j.at("c").get<double>());
    std::vector<TableEntry> rows;
    for (const json& r : j.at("table"))
      rows.push_back({{r.at("minus").get<double>(), r.at("plus").get<double>()}, r.at("probability").get<double>()});
    return DistributionSpec::finite_table(std::move(rows));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("distribution spec: ") + e.what());
  }
}

DistributionSpec spec_from_string(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  double c = 1.0;
  if (colon != std::string::npos) {
    const std::string num = text.substr(colon + 1);
    char* end = nullptr;
    c = std::strtod(num.c_str(), &end);
    if (num.empty() || *end != '\0') fail(ErrorCode::Parse, "bad distribution parameter '" + num + "'");
  }
  if (name == "two-point" || name == "two-point-symmetric") return DistributionSpec::two_point(c);
  if (name == "log-uniform" || name == "log-uniform-symmetric") return DistributionSpec::log_uniform(c);
  fail(ErrorCode::Parse, "unknown distribution '" + name + "' (two-point:C or log-uniform:C)");
}

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE) fail(ErrorCode::Parse, "bad floating-point literal '" + s + "'");
  return v;
}

json to_json(const Environment& env) {
  json rates = json::array();
  const Window w = env.window();
  for (std::int64_t x = w.lo; x <= w.hi; ++x) {
    const RatePair& r = env.rates(x);
    rates.push_back(json::array({x, hexfloat(r.minus), hexfloat(r.plus)}));
  }
  return {{"spec", to_json(env.spec())},
          {"seed", env.seed()},
          {"origin", to_string(env.origin())},
          {"window", {w.lo, w.hi}},
          {"rates", rates}};
}

Environment environment_from_json(const json& j) {
  try {
    const DistributionSpec spec = spec_from_json(j.at("spec"));
    const auto seed = j.at("seed").get<std::uint64_t>();
    const auto lo = j.at("window").at(0).get<std::int64_t>();
    const auto hi = j.at("window").at(1).get<std::int64_t>();
    const json& rows = j.at("rates");
    if (hi < lo || rows.size() != static_cast<std::size_t>(hi - lo + 1))
      fail(ErrorCode::Parse, "environment: rate rows do not cover the window");
    std::vector<RatePair> rates;
    rates.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const json& r = rows[i];
      if (r.at(0).get<std::int64_t>() != lo + static_cast<std::int64_t>(i))
        fail(ErrorCode::Parse, "environment: rate rows out of order");
      rates.push_back({parse_hexfloat(r.at(1).get<std::string>()), parse_hexfloat(r.at(2).get<std::string>())});
    }
    const auto origin = origin_from_string(j.value("origin", std::string("manual")));
    return Environment::from_rates(spec, seed, lo, std::move(rates), origin);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("environment: ") + e.what());
  }
}

json to_json(const SampledFunction& f) {
  json pos = json::array(), val = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    pos.push_back(hexfloat(f.position(i)));
    val.push_back(hexfloat(f.value(i)));
  }
  return {{"kind", to_string(f.kind())}, {"positions", pos}, {"values", val}};
}

SampledFunction sampled_function_from_json(const json& j) {
  try {
    std::vector<double> pos, val;
    for (const json& p : j.at("positions")) pos.push_back(parse_hexfloat(p.get<std::string>()));
    for (const json& v : j.at("values")) val.push_back(parse_hexfloat(v.get<std::string>()));
    return SampledFunction(std::move(pos), std::move(val), function_kind_from_string(j.at("kind").get<std::string>()));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("sampled function: ") + e.what());
  }
}

json to_json(const StableLandscape& land, const SampledFunction& f) {
  auto point = [&](std::size_t i) { return json{{"index", i}, {"x", f.position(i)}, {"f", f.value(i)}}; };
  auto points = [&](const std::vector<std::size_t>& v) {
    json a = json::array();
    for (std::size_t i : v) a.push_back(point(i));
    return a;
  };
  json wells = json::array();
  for (const WellRecord& w : land.wells)
    wells.push_back({{"left", f.position(w.left)},
                     {"bottom", f.position(w.bottom)},
                     {"right", f.position(w.right)},
                     {"depth", w.depth}});
  const Landmarks& m = land.marks;
  return {{"log_t", land.t.log_t},
          {"kind", to_string(f.kind())},
          {"stable_points", points(land.stable_points)},
          {"peaks", points(land.peaks)},
          {"undetermined", points(land.undetermined)},
          {"wells", wells},
          {"landmarks",
           {{"m_minus", point(m.m_minus)},
            {"h_minus", point(m.h_minus)},
            {"mm_minus", point(m.mm_minus)},
            {"hh_minus", point(m.hh_minus)},
            {"m_plus", point(m.m_plus)},
            {"h_plus", point(m.h_plus)},
            {"mm_plus", point(m.mm_plus)},
            {"hh_plus", point(m.hh_plus)}}},
          {"m_t", point(land.m_t)},
          {"tie", land.tie}};
}

std::string potential_csv(const Environment& env) {
  const SampledFunction v = potential(env);
  const ReversibleMeasure th = reversible_measure(env);
  std::ostringstream os;
  os.precision(17);
  os << "x,V,theta\n";
  const Window w = env.window();
  for (std::int64_t x = w.lo; x <= w.hi; ++x)
    os << x << ',' << v.value(static_cast<std::size_t>(x - w.lo)) << ',' << th.theta(x) << '\n';
  return os.str();
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "time,site\n";
  for (const auto& [time, site] : tr.points) os << time << ',' << site << '\n';
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace sinai
