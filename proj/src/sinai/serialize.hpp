#pragma once

#include <string>

#include "json.hpp"

#include "sinai/environment.hpp"
#include "sinai/landscape.hpp"
#include "sinai/walker.hpp"

namespace sinai {

using json = nlohmann::json;

json to_json(const DistributionSpec& spec);
DistributionSpec spec_from_json(const json& j);

// Shorthand used on the command line: "two-point:1", "log-uniform:0.5".
DistributionSpec spec_from_string(const std::string& text);

// Doubles as C99 hexadecimal floats, so a save/load cycle is bit exact.
std::string hexfloat(double x);
double parse_hexfloat(const std::string& s);

// {spec, seed, origin, window, rates: [[x, minus, plus], ...]}.
json to_json(const Environment& env);
Environment environment_from_json(const json& j);

json to_json(const SampledFunction& f);
SampledFunction sampled_function_from_json(const json& j);

// Positions and values of every marked point, plus the raw indices.
json to_json(const StableLandscape& land, const SampledFunction& f);

// x,V,theta rows over the window.
std::string potential_csv(const Environment& env);

// time,site rows.
std::string trajectory_csv(const Trajectory& tr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace sinai
