#include "heatdens/diagnostics.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"

#include <cmath>
// Boost 1.74's pchip calls isnan unqualified from a template.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <limits>
#include <numbers>

namespace heatdens::diag {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> resample(const engine::DensityGrid& g, const std::vector<double>& at) {
  std::vector<double> out(at.size(), 0.0);
  if (g.u.size() < 4) {
    for (std::size_t i = 0; i < at.size(); ++i) {
      const double x = at[i];
      if (x < g.u.front() || x > g.u.back()) continue;
      auto it = std::upper_bound(g.u.begin(), g.u.end(), x);
      const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - g.u.begin()), g.u.size() - 1);
      const std::size_t k = j == 0 ? 0 : j - 1;
      const double h = g.u[j] - g.u[k];
      out[i] = h > 0.0 ? g.f[k] + (g.f[j] - g.f[k]) * (x - g.u[k]) / h : g.f[k];
    }
    return out;
  }
  auto x = g.u;
  auto y = g.f;
  const boost::math::interpolators::pchip<std::vector<double>> interp(std::move(x), std::move(y));
  for (std::size_t i = 0; i < at.size(); ++i)
    if (at[i] >= g.u.front() && at[i] <= g.u.back()) out[i] = std::max(interp(at[i]), 0.0);
  return out;
}

bool appears_bounded(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  if (v.size() < 3) return true;
  const double d1 = v[v.size() - 1] - v[v.size() - 2];
  const double d0 = v[v.size() - 2] - v[v.size() - 3];
  return d1 <= std::max(d0, 0.0) * (1.0 + 1e-9) + 1e-12 * std::abs(v.back());
}

}  // namespace

L1Result l1_distance_checked(const engine::DensityGrid& g1, const engine::DensityGrid& g2) {
  if (g1.u.size() != g1.f.size() || g2.u.size() != g2.f.size()) throw DomainError("grid with ragged columns");
  if (g1.u == g2.u) {
    std::vector<double> d(g1.u.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(g1.f[i] - g2.f[i]);
    return {quad::trapezoid(g1.u, d), false};
  }
  std::vector<double> u = g1.u;
  u.insert(u.end(), g2.u.begin(), g2.u.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  const std::vector<double> a = resample(g1, u);
  const std::vector<double> b = resample(g2, u);
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return {quad::trapezoid(u, d), true};
}

double l1_distance(const engine::DensityGrid& g1, const engine::DensityGrid& g2) {
  return l1_distance_checked(g1, g2).value;
}

GridMoments density_moments(const engine::DensityGrid& g) {
  const double mass = quad::trapezoid(g.u, g.f);
  if (!(mass > 0.0)) throw DegenerateDistribution("grid has no mass");
  std::vector<double> tmp(g.u.size());
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = g.u[i] * g.f[i];
  const double mean = quad::trapezoid(g.u, tmp) / mass;
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = (g.u[i] - mean) * (g.u[i] - mean) * g.f[i];
  return {mass, mean, quad::trapezoid(g.u, tmp) / mass};
}

double expected_decay(const models::DiffusionSpec& diffusion, double c) {
  if (diffusion.degenerate()) return std::exp(-c * diffusion.lo);
  if (diffusion.law.family() == models::ScalarDensity::Family::uniform) {
    const double width = diffusion.hi - diffusion.lo;
    const double x = c * width;
    if (x == 0.0) return 1.0;
    return std::exp(-c * diffusion.lo) * (-std::expm1(-x)) / x;
  }
  const quad::Rule r = quad::gauss_legendre(128, diffusion.lo, diffusion.hi);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += r.w[i] * diffusion.law(r.x[i]) * std::exp(-c * r.x[i]);
  return acc;
}

BbMoments exact_bb_moments(const series::EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion) {
  p.validate();
  if (N == 0) throw DomainError("exact_bb_moments needs N >= 1");
  double var = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double nn = static_cast<double>(n);
    const double s = std::sin(nn * kPi * p.x);
    var += 2.0 / (nn * nn * kPi * kPi) * s * s * expected_decay(diffusion, 2.0 * nn * nn * kPi * kPi * p.t);
  }
  return {0.0, var};
}

LipschitzEstimate lipschitz_estimate(const models::ScalarDensity& law, const std::string& subject) {
  LipschitzEstimate out;
  out.subject = subject;
  if (!law.absolutely_continuous()) return out;
  out.applicable = true;
  const models::Support sup = law.support();
  const double sc = law.scale();
  double a, b;
  if (sup.kind == models::Support::Kind::compact) {
    const double margin = 0.1 * (sup.hi - sup.lo);
    a = sup.lo - margin;
    b = sup.hi + margin;
  } else {
    a = law.location() - 20.0 * sc;
    b = law.location() + 20.0 * sc;
  }
  for (double rel : {1e-3, 1e-4, 1e-5}) {
    const double h = rel * sc;
    const std::size_t n = static_cast<std::size_t>(std::ceil((b - a) / h));
    double sup_slope = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double u = a + static_cast<double>(i) * h;
      sup_slope = std::max(sup_slope, std::abs(law(u + h) - law(u - h)) / (2.0 * h));
    }
    out.by_step.push_back(sup_slope);
  }
  out.estimate = out.by_step.back();
  out.bounded = !(out.by_step[2] > 10.0 * out.by_step[0]);
  return out;
}

HypothesisReport hypothesis_report(const engine::ModelBundle& bundle, const series::EvalPoint& p, std::size_t N) {
  p.validate();
  if (N == 0) throw DomainError("hypothesis report needs N >= 1");
  const auto& proc = bundle.process;
  const auto& diff = bundle.diffusion;
  HypothesisReport r;
  r.x = p.x;
  r.t = p.t;
  r.N = N;
  r.model_digest = bundle.describe();

  const bool indep_coeffs = proc.basis == models::ProcessSpec::Basis::sine && proc.independence_flag;
  if (indep_coeffs) {
    r.lipschitz_a1 = lipschitz_estimate(models::build_coeff_model(proc, 1).indep().marginals[0], "f_A1");
  } else {
    r.lipschitz_a1.subject = "f_A1";
  }
  r.lipschitz_xi1 = lipschitz_estimate(proc.xi_law(1), "f_xi1");

  // Shared summability hypothesis; terms from n = 2 so that n^2 - 2 > 0.
  const double c0 = kPi * kPi * diff.lo * p.t;
  std::size_t n = 2;
  for (; n < 100000; ++n) {
    const double nn = static_cast<double>(n);
    const double term = expected_decay(diff, (nn * nn - 2.0) * kPi * kPi * p.t);
    if (term < 1e-300) break;
    r.tail_sum_estimate += term;
  }
  r.tail_sum_terms = n - 2;
  {
    const double nn = static_cast<double>(n);
    r.tail_sum_remainder = std::exp(-(nn * nn - 2.0) * c0) / (-std::expm1(-(2.0 * nn + 1.0) * c0));
  }
  for (std::size_t k = 1; k < 100000; ++k) {
    const double kk = static_cast<double>(k);
    const double term = std::sqrt(expected_decay(diff, 2.0 * kk * kk * kPi * kPi * p.t));
    if (term < 1e-300) break;
    r.l2_sum_estimate += term;
  }

  {
    std::vector<double> nodes{diff.lo, diff.hi};
    if (!diff.degenerate()) {
      const quad::Rule gl = quad::gauss_legendre(64, diff.lo, diff.hi);
      nodes.insert(nodes.end(), gl.x.begin(), gl.x.end());
    }
    std::vector<double> hat(N);
    for (std::size_t k = 1; k <= N; ++k) hat[k - 1] = proc.phi_hat(1, k);
    double low = std::numeric_limits<double>::infinity();
    for (double a2 : nodes) {
      double tn = 0.0;
      for (std::size_t k = 1; k <= N; ++k) tn += hat[k - 1] * series::mode_factor(k, a2, p);
      low = std::min(low, std::abs(tn));
    }
    r.tn_phi1_lower_bound = low;
  }

  if (proc.gaussian_flag) {
    r.sigma_applicable = true;
    r.sigma_checked_up_to = std::max<std::size_t>(N, 6);
    try {
      const models::CoeffModel cm = models::build_joint_gaussian_model(proc, r.sigma_checked_up_to);
      const auto& sigma = cm.joint().sigma;
      for (std::size_t m = 1; m <= r.sigma_checked_up_to; ++m) {
        const Eigen::Index mi = static_cast<Eigen::Index>(m);
        r.sigma_inv_11.push_back(models::sigma_inv_11(sigma.topLeftCorner(mi, mi)));
      }
    } catch (const Error& e) {
      r.sigma_singular = true;
      r.sigma_reason = e.what();
    }
  }

  const bool tail_ok = std::isfinite(r.tail_sum_estimate) && diff.lo > 0.0;
  // Theorem on jointly Gaussian coefficients.
  if (!proc.gaussian_flag) r.teor1.reasons.push_back("process is not Gaussian");
  if (r.sigma_singular) r.teor1.reasons.push_back(r.sigma_reason);
  if (proc.gaussian_flag && !r.sigma_singular && !appears_bounded(r.sigma_inv_11))
    r.teor1.reasons.push_back("(Sigma_N^-1)_11 grows with N over the checked range");
  if (!tail_ok) r.teor1.reasons.push_back("tail sum of E[exp(-(n^2-2) pi^2 alpha^2 t)] diverges");
  r.teor1.holds = r.teor1.reasons.empty();

  // Theorem on independent coefficients.
  if (!indep_coeffs) r.teor2.reasons.push_back("Fourier coefficients are not independent");
  if (indep_coeffs && !r.lipschitz_a1.bounded) r.teor2.reasons.push_back("f_A1 not Lipschitz");
  if (!tail_ok) r.teor2.reasons.push_back("tail sum of E[exp(-(n^2-2) pi^2 alpha^2 t)] diverges");
  r.teor2.holds = r.teor2.reasons.empty();

  // Theorem on the Karhunen-Loeve route.
  if (!proc.independence_flag) r.teor3.reasons.push_back("KL variables are not independent");
  if (!r.lipschitz_xi1.bounded) r.teor3.reasons.push_back("f_xi1 not Lipschitz");
  if (!(r.tn_phi1_lower_bound > 0.0)) r.teor3.reasons.push_back("T_N(phi_1) vanishes on the diffusion support");
  if (!(diff.lo > 0.0) || !std::isfinite(r.l2_sum_estimate))
    r.teor3.reasons.push_back("sum of ||exp(-n^2 pi^2 alpha^2 t)||_L2 diverges");
  r.teor3.holds = r.teor3.reasons.empty();
  return r;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::converging:
      return "converging";
    case Trend::stalled:
      return "stalled";
    case Trend::diverging:
      return "diverging";
  }
  return "stalled";
}

Trend classify(const std::vector<double>& d) {
  if (d.empty()) throw DomainError("no distances to classify");
  bool nondecreasing = true, nonincreasing = true;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] < d[i - 1]) nondecreasing = false;
    if (d[i] > d[i - 1] + 1e-12) nonincreasing = false;
  }
  if (nondecreasing && d.back() >= 0.1) return Trend::diverging;
  if (nonincreasing && d.back() < 0.1) return Trend::converging;
  return Trend::stalled;
}

ConvergenceReport convergence_report(const series::EvalPoint& p, const std::vector<std::size_t>& N_list,
                                     engine::Method method, const engine::ModelBundle& bundle,
                                     const engine::QuadConfig& q, unsigned threads) {
  if (N_list.size() < 2) throw DomainError("convergence report needs at least two orders");
  for (std::size_t i = 1; i < N_list.size(); ++i)
    if (N_list[i] <= N_list[i - 1]) throw DomainError("orders must be strictly increasing");
  const engine::LinearPlan last = engine::make_plan(method, bundle, p, N_list.back());
  const engine::GridSpec grid = engine::GridSpec::explicit_points(engine::auto_abscissae(last));

  ConvergenceReport r;
  r.x = p.x;
  r.t = p.t;
  r.method = std::string(engine::to_string(method));
  for (std::size_t N : N_list) r.grids.push_back(engine::density_grid(p, N, method, bundle, q, grid, threads));
  std::vector<double> d;
  for (std::size_t i = 1; i < N_list.size(); ++i) {
    const double v = l1_distance(r.grids[i - 1], r.grids[i]);
    r.pairs.push_back({N_list[i - 1], N_list[i], v});
    d.push_back(v);
  }
  r.verdict = classify(d);
  return r;
}

}  // namespace heatdens::diag
