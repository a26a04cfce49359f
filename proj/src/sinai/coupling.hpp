#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sinai/environment.hpp"
#include "sinai/landscape.hpp"

namespace sinai {

// Environment read off a Brownian path by successive first exits from
// (level - c, level + c). Positions of W are Brownian time divided by c^2,
// so site x and the x-th embedding time sit on a common axis.
struct Coupling {
  Environment env;
  SampledFunction w;
  std::vector<std::size_t> embedding;  // index in w of site window.lo + i
  double step;                         // grid step on the common axis

  // sup over the window of |V(x) - W(x)|, W linearly interpolated.
  double sup_distance() const;
};

// Only the two-point family admits this exact embedding.
Coupling skorokhod_couple(const DistributionSpec& spec, std::uint64_t seed, Window window, double step = 1e-2);

// Two-sided Brownian path with variance sigma2 per unit position, sampled on
// the grid k * step for |k * step| <= half_width.
SampledFunction brownian_path(std::uint64_t seed, std::uint64_t index, double half_width, double step,
                              double sigma2 = 1.0);

}  // namespace sinai
