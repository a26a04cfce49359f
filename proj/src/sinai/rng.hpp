#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sinai::rng {

// SplitMix64 finalizer. Used as a keyed hash for counter-based draws.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

// Stream tags keep independent uses of one seed apart.
enum class Stream : std::uint64_t {
  Site = 0x51,
  BrownianRight = 0xb1,
  BrownianLeft = 0xb2,
  Trial = 0x7a,
  Path = 0x9a,
};

// 64 pseudo-random bits for site x; a pure function of (seed, stream, x).
constexpr std::uint64_t site_bits(std::uint64_t seed, std::int64_t x, Stream stream = Stream::Site) noexcept {
  return mix(mix(seed, static_cast<std::uint64_t>(stream)), static_cast<std::uint64_t>(x));
}

// [0, 1) with 53 bits of resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

using Engine = std::mt19937_64;

// Independent engine for (seed, index); the derivation is splittable so trial
// i's stream never depends on how many other trials ran or in which order.
inline Engine stream(std::uint64_t seed, std::uint64_t index, Stream tag = Stream::Trial) {
  return Engine(mix(mix(seed, static_cast<std::uint64_t>(tag)), index));
}

inline double uniform(Engine& g) { return to_unit(g()); }

// Exp(1); 1 - u lies in (0, 1] so the log is finite.
inline double exponential(Engine& g) { return -std::log(1.0 - uniform(g)); }

// Standard normal by Box-Muller; written out so draws do not depend on the
// standard library's distribution implementation.
inline double normal(Engine& g) {
  const double u = 1.0 - uniform(g);
  const double v = uniform(g);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
}

}  // namespace sinai::rng
