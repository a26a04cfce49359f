#include "sinai/oracle.hpp"

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "sinai/error.hpp"
#include "sinai/stats.hpp"

namespace sinai {

namespace {

std::size_t site_index(const SampledFunction& v, std::int64_t x) {
  const double p = static_cast<double>(x);
  auto i = v.index_of(p);
  if (!i) throw WindowExhausted("site outside the sampled potential");
  return *i;
}

}  // namespace

double ruin_probability(const SampledFunction& v, std::int64_t a, std::int64_t z, std::int64_t b) {
  require(a < z && z < b, "ruin probability needs a < z < b");
  const std::size_t ia = site_index(v, a), iz = site_index(v, z), ib = site_index(v, b);
  const auto vals = v.values();
  const double num = stats::log_sum_exp(vals.subspan(iz, ib - iz));
  const double den = stats::log_sum_exp(vals.subspan(ia, ib - ia));
  return std::exp(num - den);
}

double ruin_probability(const Environment& env, std::int64_t a, std::int64_t z, std::int64_t b) {
  return ruin_probability(potential(env), a, z, b);
}

std::vector<double> absorption_solve(const Environment& env, std::int64_t a, std::int64_t b) {
  require(b - a >= 2, "absorption needs an interior site");
  const Window w = env.window();
  if (!w.contains(a) || !w.contains(b)) throw WindowExhausted("absorption interval exceeds the window");
  // h_z = c_z h_{z+1} + d_z with h_a = 1, h_b = 0. Tracking g_z = 1 - c_z
  // directly keeps every quantity a ratio of positive numbers.
  const auto n = static_cast<std::size_t>(b - a - 1);
  std::vector<double> c(n), d(n);
  double g = 1.0, dprev = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const RatePair r = env.rates(a + 1 + static_cast<std::int64_t>(i));
    const double den = r.plus + r.minus * g;
    c[i] = r.plus / den;
    d[i] = r.minus * dprev / den;
    g = r.minus * g / den;
    dprev = d[i];
  }
  std::vector<double> h(n);
  double next = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    h[i] = c[i] * next + d[i];
    next = h[i];
  }
  return h;
}

double log_lyapunov(const SampledFunction& v, std::int64_t a, std::int64_t x) {
  require(x >= a, "Lyapunov function is defined for x >= a");
  if (x == a) return -std::numeric_limits<double>::infinity();
  const std::size_t ia = site_index(v, a), ix = site_index(v, x);
  std::vector<double> terms;
  terms.reserve(ix - ia);
  for (std::size_t i = ia; i < ix; ++i) terms.push_back(v.value(i) - v.value(ia));
  return stats::log_sum_exp(terms);
}

double lyapunov(const SampledFunction& v, std::int64_t a, std::int64_t x) {
  require(x >= a, "Lyapunov function is defined for x >= a");
  const std::size_t ia = site_index(v, a), ix = site_index(v, x);
  stats::CompensatedSum s;
  for (std::size_t i = ia; i < ix; ++i) s.add(std::exp(v.value(i) - v.value(ia)));
  return s.value();
}

std::vector<double> stationary_distribution(const ReflectedChain& chain) {
  const auto lt = chain.log_theta();
  const double z = stats::log_sum_exp(lt);
  std::vector<double> mu(lt.size());
  for (std::size_t i = 0; i < lt.size(); ++i) mu[i] = std::exp(lt[i] - z);
  return mu;
}

double balance_residual(const ReflectedChain& chain, std::span<const double> mu) {
  require(mu.size() == chain.size(), "measure length does not match the chain");
  const auto r = chain.all_rates();
  const std::size_t n = r.size();
  double worst = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double in = 0.0;
    if (y > 0) in += mu[y - 1] * r[y - 1].plus;
    if (y + 1 < n) in += mu[y + 1] * r[y + 1].minus;
    worst = std::max(worst, std::abs(in - mu[y] * (r[y].minus + r[y].plus)));
  }
  return worst;
}

std::vector<double> generator_apply(const ReflectedChain& chain, std::span<const double> g) {
  require(g.size() == chain.size(), "function length does not match the chain");
  const auto r = chain.all_rates();
  const std::size_t n = r.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    // Reflected endpoints carry a zero outward rate, so the missing neighbor never contributes.
    if (x + 1 < n) out[x] += (g[x + 1] - g[x]) * r[x].plus;
    if (x > 0) out[x] += (g[x - 1] - g[x]) * r[x].minus;
  }
  return out;
}

double dirichlet_form(const ReflectedChain& chain, std::span<const double> g) {
  require(g.size() == chain.size(), "function length does not match the chain");
  const auto mu = stationary_distribution(chain);
  const auto r = chain.all_rates();
  stats::CompensatedSum s;
  for (std::size_t x = 0; x + 1 < g.size(); ++x) {
    const double dg = g[x + 1] - g[x];
    s.add(dg * dg * r[x].plus * mu[x]);
  }
  return s.value();
}

double energy_inner_product(const ReflectedChain& chain, std::span<const double> g) {
  const auto mu = stationary_distribution(chain);
  const auto lg = generator_apply(chain, g);
  stats::CompensatedSum s;
  for (std::size_t x = 0; x < g.size(); ++x) s.add(-lg[x] * g[x] * mu[x]);
  return s.value();
}

SpectralReport spectral_gap(const ReflectedChain& chain, bool with_eigenfunction) {
  const auto r = chain.all_rates();
  const std::size_t n = r.size();
  require(n >= 2, "spectral gap needs at least two sites");
  SpectralReport rep{chain.a(), chain.b(), 0.0, 0.0, 0.0, {}, std::nullopt};

  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<double>(chain.a() + static_cast<std::int64_t>(i));
  const auto pv = chain.potential();
  const SampledFunction v(std::move(pos), std::vector<double>(pv.begin(), pv.end()), FunctionKind::Generic);
  rep.elevation_value = elevation(v, 0, n - 1);

  // G is (n-1) x n with rows (-sqrt(w^+_x), sqrt(w^-_{x+1})); a zero last row
  // makes it square without changing the nonzero singular values.
  std::vector<double> d(n), e(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = -std::sqrt(r[i].plus);
    e[i] = std::sqrt(r[i + 1].minus);
  }
  d[n - 1] = 0.0;
  const auto ni = static_cast<lapack_int>(n);
  std::vector<double> vt;
  lapack_int ncvt = 0;
  if (with_eigenfunction) {
    vt.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
    ncvt = ni;
  }
  const lapack_int info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'U', ni, ncvt, 0, 0, d.data(), e.data(),
                                         with_eigenfunction ? vt.data() : nullptr, with_eigenfunction ? ni : 1,
                                         nullptr, 1, nullptr, 1);
  if (info != 0) fail(ErrorCode::Internal, "bidiagonal SVD did not converge");
  // Singular values come back in decreasing order; the last is the null direction.
  rep.lambda = n == 2 ? r[0].plus + r[1].minus : d[n - 2] * d[n - 2];
  rep.residual = std::abs(std::log(rep.lambda) + rep.elevation_value);

  if (with_eigenfunction) {
    const auto mu = stationary_distribution(chain);
    // Row n-2 of V^T, in the D^{1/2} coordinates; undo the similarity.
    rep.eigenfunction.resize(n);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rep.eigenfunction[j] = vt[(n - 2) + j * n] / std::sqrt(mu[j]);
      mean += mu[j] * rep.eigenfunction[j];
    }
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rep.eigenfunction[j] -= mean;
      var += mu[j] * rep.eigenfunction[j] * rep.eigenfunction[j];
    }
    for (double& x : rep.eigenfunction) x /= std::sqrt(var);
    rep.variational = dirichlet_form(chain, rep.eigenfunction);
  }
  return rep;
}

SpectralReport spectral_gap(const Environment& env, Window interval, bool with_eigenfunction) {
  return spectral_gap(reflect(env, interval), with_eigenfunction);
}

namespace {

// D^{1/2} (-L) D^{-1/2}: diagonal w^- + w^+, off-diagonal -sqrt(w^+_x w^-_{x+1}).
void symmetrized(const ReflectedChain& chain, Eigen::VectorXd& diag, Eigen::VectorXd& off) {
  const auto r = chain.all_rates();
  const auto n = static_cast<Eigen::Index>(r.size());
  diag.resize(n);
  off.resize(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = r[static_cast<std::size_t>(i)].minus + r[static_cast<std::size_t>(i)].plus;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    off[i] = -std::sqrt(r[static_cast<std::size_t>(i)].plus * r[static_cast<std::size_t>(i + 1)].minus);
}

}  // namespace

double spectral_gap_dense(const ReflectedChain& chain) {
  require(chain.size() >= 2, "spectral gap needs at least two sites");
  Eigen::VectorXd diag, off;
  symmetrized(chain, diag, off);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::Internal, "tridiagonal eigensolver failed");
  return es.eigenvalues()[1];
}

double gap_elevation_residual(const Environment& env, Window interval, double log_scale) {
  require(log_scale > 0.0, "residual scale must be positive");
  return spectral_gap(env, interval, false).residual / log_scale;
}

TransitionTable semigroup(const ReflectedChain& chain, double t) {
  require(std::isfinite(t) && t >= 0.0, "semigroup time must be finite and non-negative");
  const auto r = chain.all_rates();
  const std::size_t n = r.size();
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd p(en, en);
  if (n <= 30) {
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(en, en);
    for (Eigen::Index x = 0; x < en; ++x) {
      const RatePair& q = r[static_cast<std::size_t>(x)];
      if (x > 0) gen(x, x - 1) = q.minus;
      if (x + 1 < en) gen(x, x + 1) = q.plus;
      gen(x, x) = -(q.minus + q.plus);
    }
    p = (t * gen).exp();
  } else {
    Eigen::VectorXd diag, off;
    symmetrized(chain, diag, off);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) fail(ErrorCode::Internal, "tridiagonal eigensolver failed");
    const auto mu = stationary_distribution(chain);
    Eigen::VectorXd root(en);
    for (Eigen::Index i = 0; i < en; ++i) root[i] = std::sqrt(mu[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd decay = (-t * es.eigenvalues().array()).exp();
    const Eigen::MatrixXd s = q * decay.asDiagonal() * q.transpose();
    p = root.cwiseInverse().asDiagonal() * s * root.asDiagonal();
  }
  TransitionTable out{chain.a(), n, std::vector<double>(n * n)};
  for (Eigen::Index x = 0; x < en; ++x)
    for (Eigen::Index y = 0; y < en; ++y) out.p[static_cast<std::size_t>(x) * n + static_cast<std::size_t>(y)] = p(x, y);
  return out;
}

namespace {

struct Spectrum {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column-major n x n, orthonormal
};

// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
Spectrum tridiagonal_spectrum(std::vector<double> diag, std::vector<double> off) {
  const auto n = static_cast<lapack_int>(diag.size());
  Spectrum s;
  s.values.resize(diag.size());
  s.vectors.resize(diag.size() * diag.size());
  std::vector<lapack_int> support(2 * diag.size());
  lapack_int found = 0;
  off.push_back(0.0);
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', n, diag.data(), off.data(), 0.0, 0.0, 0, 0,
                                         0.0, &found, s.values.data(), s.vectors.data(), n, support.data());
  if (info != 0 || found != n) fail(ErrorCode::Internal, "tridiagonal eigensolver did not converge");
  return s;
}

}  // namespace

std::vector<double> transition_row(const ReflectedChain& chain, std::int64_t x, double t) {
  require(chain.contains(x), "start outside the reflected chain");
  require(std::isfinite(t) && t >= 0.0, "time must be finite and non-negative");
  const auto r = chain.all_rates();
  const std::size_t n = r.size();
  std::vector<double> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag[i] = r[i].minus + r[i].plus;
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -std::sqrt(r[i].plus * r[i + 1].minus);
  const Spectrum sp = tridiagonal_spectrum(std::move(diag), std::move(off));
  const auto lt = chain.log_theta();
  const auto i0 = static_cast<std::size_t>(x - chain.a());
  // P_t(x, y) = sqrt(theta_y / theta_x) sum_k e^{-t lambda_k} q_k(x) q_k(y).
  std::vector<double> row(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::exp(-t * std::max(sp.values[k], 0.0)) * sp.vectors[k * n + i0];
    for (std::size_t y = 0; y < n; ++y) row[y] += w * sp.vectors[k * n + y];
  }
  for (std::size_t y = 0; y < n; ++y) row[y] = std::max(0.0, row[y] * std::exp(0.5 * (lt[y] - lt[i0])));
  return row;
}

double absorbed_survival(const Environment& env, std::int64_t a, std::int64_t b, std::int64_t z, double t) {
  require(a < z && z < b, "survival needs a < z < b");
  require(std::isfinite(t) && t >= 0.0, "time must be finite and non-negative");
  if (!env.window().contains(a) || !env.window().contains(b)) throw WindowExhausted("interval exceeds the window");
  const auto n = static_cast<std::size_t>(b - a - 1);
  std::vector<double> diag(n), off(n > 0 ? n - 1 : 0), log_theta(n);
  const ReversibleMeasure th = reversible_measure(env);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t x = a + 1 + static_cast<std::int64_t>(i);
    diag[i] = env.rates(x).minus + env.rates(x).plus;
    log_theta[i] = th.log(x);
    if (i + 1 < n) off[i] = -std::sqrt(env.rates(x).plus * env.rates(x + 1).minus);
  }
  const Spectrum sp = tridiagonal_spectrum(std::move(diag), std::move(off));
  const auto i0 = static_cast<std::size_t>(z - a - 1);
  stats::CompensatedSum total;
  for (std::size_t k = 0; k < n; ++k) {
    double proj = 0.0;
    for (std::size_t y = 0; y < n; ++y) proj += sp.vectors[k * n + y] * std::exp(0.5 * (log_theta[y] - log_theta[i0]));
    total.add(std::exp(-t * sp.values[k]) * sp.vectors[k * n + i0] * proj);
  }
  return std::clamp(total.value(), 0.0, 1.0);
}

std::vector<std::size_t> literal_stable_points(std::span<const double> f, double log_t) {
  std::vector<std::size_t> out;
  const std::size_t n = f.size();
  for (std::size_t m = 0; m < n; ++m) {
    std::optional<std::size_t> l, r;
    for (std::size_t x = m; x-- > 0;)
      if (f[x] >= f[m] + log_t) {
        l = x;
        break;
      }
    for (std::size_t x = m + 1; x < n && l; ++x)
      if (f[x] >= f[m] + log_t) {
        r = x;
        break;
      }
    if (!l || !r) continue;
    std::size_t best = *l;
    for (std::size_t x = *l; x <= *r; ++x)
      if (f[x] < f[best]) best = x;
    if (best == m) out.push_back(m);
  }
  return out;
}

double literal_elevation(std::span<const double> f, std::size_t a, std::size_t b) {
  require(a <= b && b < f.size(), "interval out of order or out of range");
  double best = -std::numeric_limits<double>::infinity(), low = f[a];
  for (std::size_t x = a; x <= b; ++x) {
    low = std::min(low, f[x]);
    for (std::size_t y = x; y <= b; ++y) {
      double top = f[x];
      for (std::size_t z = x; z <= y; ++z) top = std::max(top, f[z]);
      best = std::max(best, top - f[x] - f[y]);
    }
  }
  return best + low;
}

double row_sum_residual(const TransitionTable& p) {
  double worst = 0.0;
  for (std::size_t x = 0; x < p.n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < p.n; ++y) s += p.p[x * p.n + y];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double detailed_balance_residual(const ReflectedChain& chain, const TransitionTable& p) {
  require(p.n == chain.size(), "table size does not match the chain");
  const auto mu = stationary_distribution(chain);
  double worst = 0.0;
  for (std::size_t x = 0; x < p.n; ++x)
    for (std::size_t y = x + 1; y < p.n; ++y)
      worst = std::max(worst, std::abs(mu[x] * p.p[x * p.n + y] - mu[y] * p.p[y * p.n + x]));
  return worst;
}

}  // namespace sinai
