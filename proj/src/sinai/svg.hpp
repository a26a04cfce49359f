#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sinai/landscape.hpp"

namespace sinai {

// Potential with t-stable points, peaks and wells marked and the
// (eps log t)-neighborhood of each well bottom shaded.
std::string landscape_svg(const SampledFunction& f, const StableLandscape& land, double eps);

struct HistogramSeries {
  std::string label;
  std::vector<std::uint64_t> counts;
};

// Step outlines of several histograms over shared bin edges.
std::string histogram_svg(const std::vector<double>& edges, const std::vector<HistogramSeries>& series,
                          const std::string& x_label);

}  // namespace sinai
