#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sinai/environment.hpp"
#include "sinai/landscape.hpp"
#include "sinai/walker.hpp"

namespace sinai {

// P_z(tau_a < tau_b) = sum_{i=z}^{b-1} e^{V(i)} / sum_{j=a}^{b-1} e^{V(j)}, in log-sum-exp form.
double ruin_probability(const SampledFunction& v, std::int64_t a, std::int64_t z, std::int64_t b);
double ruin_probability(const Environment& env, std::int64_t a, std::int64_t z, std::int64_t b);

// Same probabilities for every a < z < b from the harmonic equations of the
// generator, solved by tridiagonal elimination. Entry i belongs to z = a + 1 + i.
std::vector<double> absorption_solve(const Environment& env, std::int64_t a, std::int64_t b);

// f(x) = sum_{i=a}^{x-1} e^{V(i) - V(a)}; harmonic for the walk away from a.
double lyapunov(const SampledFunction& v, std::int64_t a, std::int64_t x);
double log_lyapunov(const SampledFunction& v, std::int64_t a, std::int64_t x);

// mu(x) = theta_x / sum_z theta_z on [a, b]; entry i belongs to a + i.
std::vector<double> stationary_distribution(const ReflectedChain& chain);

// max_y |(mu L)(y)|.
double balance_residual(const ReflectedChain& chain, std::span<const double> mu);

// (Lg)(x) = (g(x+1) - g(x)) w^+_x + (g(x-1) - g(x)) w^-_x.
std::vector<double> generator_apply(const ReflectedChain& chain, std::span<const double> g);

// sum_{x in [a,b)} (g(x+1) - g(x))^2 w^+_x mu(x).
double dirichlet_form(const ReflectedChain& chain, std::span<const double> g);

// -<Lg, g> in L^2(mu).
double energy_inner_product(const ReflectedChain& chain, std::span<const double> g);

struct SpectralReport {
  std::int64_t a;
  std::int64_t b;
  double lambda;
  double elevation_value;
  double residual;  // |log lambda + elevation|
  // Normalized second eigenfunction (mu-mean 0, mu-variance 1) and its
  // Dirichlet energy, when requested.
  std::vector<double> eigenfunction;
  std::optional<double> variational;
};

// Smallest nonzero eigenvalue of -L. -L is similar to G^T G with G the
// bidiagonal edge operator, so lambda is the square of G's smallest nonzero
// singular value, which bidiagonal QR delivers to high relative accuracy.
SpectralReport spectral_gap(const ReflectedChain& chain, bool with_eigenfunction = true);
SpectralReport spectral_gap(const Environment& env, Window interval, bool with_eigenfunction = true);

// Same eigenvalue from a dense symmetric eigensolver on D^{1/2} (-L) D^{-1/2}.
// Absolute rather than relative accuracy; used as a cross-check.
double spectral_gap_dense(const ReflectedChain& chain);

// |log lambda + elevation(V, interval)| / log_scale.
double gap_elevation_residual(const Environment& env, Window interval, double log_scale);

// Row-major transition table P_t(x, y) on [a, b].
struct TransitionTable {
  std::int64_t a;
  std::size_t n;
  std::vector<double> p;

  double at(std::int64_t x, std::int64_t y) const {
    return p[static_cast<std::size_t>(x - a) * n + static_cast<std::size_t>(y - a)];
  }
};

// exp(t L): dense matrix exponential up to 30 sites, spectral decomposition of
// the symmetrized generator beyond.
TransitionTable semigroup(const ReflectedChain& chain, double t);

// Law of the reflected chain at time t from x, via the MRRR eigensolver on
// the symmetrized generator; suited to long intervals. Entry i belongs to a + i.
std::vector<double> transition_row(const ReflectedChain& chain, std::int64_t x, double t);

// P_z(tau_{a,b} > t) for the walk killed on reaching a or b, a < z < b.
double absorbed_survival(const Environment& env, std::int64_t a, std::int64_t b, std::int64_t z, double t);

// Literal evaluations of the definitions (quadratic or cubic cost), used by the
// verification claims as independent references.
std::vector<std::size_t> literal_stable_points(std::span<const double> f, double log_t);
double literal_elevation(std::span<const double> f, std::size_t a, std::size_t b);

double row_sum_residual(const TransitionTable& p);
// max |mu_x P(x,y) - mu_y P(y,x)|.
double detailed_balance_residual(const ReflectedChain& chain, const TransitionTable& p);

}  // namespace sinai
