#include "heatdens/density_engine.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace heatdens::engine {
namespace {

using models::ScalarDensity;
using series::EvalPoint;
using series::mode_factor;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> evaluate_all(const DensityEvaluator& eval, const std::vector<double>& u, unsigned threads) {
  std::vector<double> f(u.size());
  detail::parallel_for(u.size(), threads, [&](std::size_t i) { f[i] = std::max(eval(u[i]), 0.0); });
  return f;
}

double grid_change(const std::vector<double>& u, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return quad::trapezoid(u, d);
}

// Solves sinh(beta) / beta = r for beta > 0 (r > 1).
double grading_exponent(double r) {
  double lo = 1e-9, hi = 1.0;
  while (std::sinh(hi) / hi < r) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::sinh(mid) / mid < r)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void check_order(std::size_t N, std::size_t min, const char* route) {
  if (N < min)
    throw DomainError(std::string(route) + " route needs N >= " + std::to_string(min) + " (got " +
                      std::to_string(N) + ")");
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::fourier_indep:
      return "fourier_indep";
    case Method::fourier_joint:
      return "fourier_joint";
    case Method::bb_fast:
      return "bb_fast";
    case Method::kl:
      return "kl";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::fourier_indep, Method::fourier_joint, Method::bb_fast, Method::kl})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string ModelBundle::describe() const { return process.describe() + ";alpha2=" + diffusion.describe(); }

GridSpec GridSpec::automatic_grid(std::size_t count) {
  GridSpec g;
  g.count = count;
  return g;
}

GridSpec GridSpec::uniform_range(double lo, double hi, std::size_t count) {
  if (!(hi > lo) || count < 2) throw DomainError("grid range needs lo < hi and at least two points");
  GridSpec g;
  g.kind = Kind::range;
  g.lo = lo;
  g.hi = hi;
  g.count = count;
  return g;
}

GridSpec GridSpec::explicit_points(std::vector<double> points) {
  if (points.size() < 2 || !std::is_sorted(points.begin(), points.end()))
    throw DomainError("explicit grid needs at least two sorted points");
  GridSpec g;
  g.kind = Kind::points;
  g.count = points.size();
  g.points = std::move(points);
  return g;
}

LinearPlan make_fourier_indep_plan(const EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                                   const models::DiffusionSpec& diffusion) {
  p.validate();
  check_order(N, 2, "Fourier");
  const auto& ind = coeffs.indep();
  if (ind.marginals.size() < N) throw DomainError("coefficient model has fewer than N marginals");
  LinearPlan plan{ind.marginals[0], {ind.marginals.begin() + 1, ind.marginals.begin() + N}, diffusion, {},
                  "fourier_indep"};
  plan.coeffs = [p, N](double a2, double& b0, double& bp, std::span<double> bk) {
    b0 = 0.0;
    bp = mode_factor(1, a2, p);
    for (std::size_t n = 2; n <= N; ++n) bk[n - 2] = mode_factor(n, a2, p);
  };
  return plan;
}

LinearPlan make_fourier_joint_plan(const EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                                   const models::DiffusionSpec& diffusion) {
  p.validate();
  check_order(N, 1, "joint Gaussian");
  if (N > 65) throw DomainError("joint Gaussian route supports N <= 65");
  const auto& jg = coeffs.joint();
  if (static_cast<std::size_t>(jg.mu.size()) < N) throw DomainError("coefficient model has dimension below N");
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  const Eigen::VectorXd mu = jg.mu.head(n);
  const Eigen::MatrixXd sigma = jg.sigma.topLeftCorner(n, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(std::max(es.eigenvalues()(i), 0.0));
  if (!(lmin > 1e-14 * lmax) || !(logdet > std::log(1e-300))) {
    const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    throw DegeneracyError("singular covariance: det(Sigma_N) = 0 to working precision (condition number " +
                              fmt(cond) + ")",
                          cond);
  }

  const double mu1 = mu(0);
  double cond_sd = std::sqrt(sigma(0, 0));
  Eigen::RowVectorXd gB;
  Eigen::MatrixXd B;
  Eigen::VectorXd mu_rest;
  if (N > 1) {
    mu_rest = mu.tail(n - 1);
    models::ConditionalGaussian cg;
    try {
      cg = models::gaussian_conditional_params(mu, sigma, 1, mu_rest);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(std::string("singular covariance: det(Sigma_N) = 0; ") + e.what(), e.condition_number());
    }
    cond_sd = std::sqrt(cg.cov(0, 0));
    const Eigen::MatrixXd rest = sigma.bottomRightCorner(n - 1, n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(rest);
    const double top = er.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < n - 1; ++j)
      if (er.eigenvalues()(j) > 1e-14 * top) keep.push_back(j);
    B.resize(n - 1, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      B.col(static_cast<Eigen::Index>(j)) = er.eigenvectors().col(keep[j]) * std::sqrt(er.eigenvalues()(keep[j]));
    gB = cg.gain.row(0) * B;
  }

  const std::size_t r = static_cast<std::size_t>(B.cols());
  LinearPlan plan{ScalarDensity::normal(), std::vector<ScalarDensity>(r, ScalarDensity::normal()), diffusion, {},
                  "fourier_joint"};
  auto shared_B = std::make_shared<const Eigen::MatrixXd>(B);
  auto shared_gB = std::make_shared<const Eigen::RowVectorXd>(gB);
  auto shared_mu = std::make_shared<const Eigen::VectorXd>(mu);
  plan.coeffs = [p, N, r, mu1, cond_sd, shared_B, shared_gB, shared_mu](double a2, double& b0, double& bp,
                                                                         std::span<double> bk) {
    const double c1 = mode_factor(1, a2, p);
    b0 = c1 * mu1;
    bp = c1 * cond_sd;
    double cbuf[64];
    for (std::size_t k = 2; k <= N; ++k) {
      cbuf[k - 2] = mode_factor(k, a2, p);
      b0 += cbuf[k - 2] * (*shared_mu)(static_cast<Eigen::Index>(k - 1));
    }
    for (std::size_t j = 0; j < r; ++j) {
      double v = c1 * (*shared_gB)(static_cast<Eigen::Index>(j));
      for (std::size_t k = 2; k <= N; ++k)
        v += cbuf[k - 2] * (*shared_B)(static_cast<Eigen::Index>(k - 2), static_cast<Eigen::Index>(j));
      bk[j] = v;
    }
  };
  return plan;
}

LinearPlan make_bb_plan(const EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion) {
  p.validate();
  check_order(N, 2, "Brownian bridge");
  LinearPlan plan{ScalarDensity::normal(), {}, diffusion, {}, "bb_fast"};
  // Given alpha^2, u_N is centred Gaussian with variance sum_n 2/(n^2 pi^2) c_n^2.
  plan.coeffs = [p, N](double a2, double& b0, double& bp, std::span<double>) {
    double v = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
      const double nn = static_cast<double>(n);
      const double c = mode_factor(n, a2, p);
      v += 2.0 / (nn * nn * std::numbers::pi * std::numbers::pi) * c * c;
    }
    b0 = 0.0;
    bp = std::sqrt(v);
  };
  return plan;
}

LinearPlan make_kl_plan(const EvalPoint& p, std::size_t N, const models::ProcessSpec& process,
                        const models::DiffusionSpec& diffusion) {
  p.validate();
  check_order(N, 3, "Karhunen-Loeve");
  if (N > 64) throw DomainError("KL route supports N <= 64");
  if (!process.independence_flag) throw WrongModelError("KL route needs independent xi_m");
  for (std::size_t m = 1; m < N; ++m)
    if (!process.xi_law(m).absolutely_continuous())
      throw UnsupportedLawError("KL route needs absolutely continuous xi laws");
  auto proj = std::make_shared<const series::KlProjector>(process, N, N - 1);
  std::vector<ScalarDensity> inner;
  for (std::size_t m = 2; m < N; ++m) inner.push_back(process.xi_law(m));
  LinearPlan plan{process.xi_law(1), std::move(inner), diffusion, {}, "kl"};
  plan.coeffs = [p, N, proj](double a2, double& b0, double& bp, std::span<double> bk) {
    double c[64];
    for (std::size_t n = 1; n <= N; ++n) c[n - 1] = mode_factor(n, a2, p);
    b0 = 0.0;
    bp = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
      b0 += proj->mean_coeff(n) * c[n - 1];
      bp += proj->loading(1, n) * c[n - 1];
    }
    for (std::size_t m = 2; m < N; ++m) {
      double v = 0.0;
      for (std::size_t n = 1; n <= N; ++n) v += proj->loading(m, n) * c[n - 1];
      bk[m - 2] = v;
    }
  };
  return plan;
}

LinearPlan make_plan(Method method, const ModelBundle& bundle, const EvalPoint& p, std::size_t N) {
  switch (method) {
    case Method::fourier_indep: {
      const models::CoeffModel cm = models::build_coeff_model(bundle.process, N);
      if (!cm.independent())
        throw WrongModelError("process " + bundle.process.name +
                              " has correlated Fourier coefficients; use the fourier_joint method");
      return make_fourier_indep_plan(p, N, cm, bundle.diffusion);
    }
    case Method::fourier_joint:
      return make_fourier_joint_plan(p, N, models::build_joint_gaussian_model(bundle.process, N), bundle.diffusion);
    case Method::bb_fast:
      if (bundle.process.kernel != models::ProcessSpec::Kernel::brownian_bridge)
        throw WrongModelError("bb_fast applies to the Brownian bridge only");
      return make_bb_plan(p, N, bundle.diffusion);
    case Method::kl:
      return make_kl_plan(p, N, bundle.process, bundle.diffusion);
  }
  throw DomainError("unknown method");
}

double density_fourier_indep(double u, const EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                             const models::DiffusionSpec& diffusion, const QuadConfig& q) {
  return (*build_quadrature(make_fourier_indep_plan(p, N, coeffs, diffusion), q))(u);
}

double density_fourier_joint_gaussian(double u, const EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                                      const models::DiffusionSpec& diffusion, const QuadConfig& q) {
  return (*build_quadrature(make_fourier_joint_plan(p, N, coeffs, diffusion), q))(u);
}

double density_bb(double u, const EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion,
                  const QuadConfig& q) {
  return (*build_quadrature(make_bb_plan(p, N, diffusion), q))(u);
}

double density_kl(double u, const EvalPoint& p, std::size_t N, const models::ProcessSpec& process,
                  const models::DiffusionSpec& diffusion, const QuadConfig& q) {
  return (*build_quadrature(make_kl_plan(p, N, process, diffusion), q))(u);
}

std::vector<double> auto_abscissae(const LinearPlan& plan, std::size_t count) {
  if (count < 3 || count % 2 == 0) throw DomainError("automatic grid needs an odd point count >= 3");
  const PlanSummary s = summarize(plan);
  const double sd = std::sqrt(s.variance);
  if (!(sd > 0.0)) throw DegenerateDistribution("solution has zero variance; no grid can be laid out");
  // A scale mixture can have components much wider than its overall sd.
  const double half = (s.heavy_tail ? 20.0 : 6.0) * std::max(sd, s.max_cond_sd);
  const double steps = static_cast<double>(count - 1);
  const double uniform_h = 2.0 * half / steps;
  const double central_h = s.min_spread / 8.0;
  std::vector<double> u(count);
  const long mid = static_cast<long>(count / 2);
  if (central_h >= uniform_h) {
    for (std::size_t i = 0; i < count; ++i)
      u[i] = s.mean + half * static_cast<double>(static_cast<long>(i) - mid) / static_cast<double>(mid);
    return u;
  }
  // c sinh(beta) = half and c beta / mid = central_h.
  const double beta = grading_exponent(half / (static_cast<double>(mid) * central_h));
  const double c = half / std::sinh(beta);
  for (std::size_t i = 0; i < count; ++i) {
    const double si = static_cast<double>(static_cast<long>(i) - mid) / static_cast<double>(mid);
    u[i] = s.mean + c * std::sinh(beta * si);
  }
  return u;
}

DensityGrid density_grid(const EvalPoint& p, std::size_t N, Method method, const ModelBundle& bundle,
                         const QuadConfig& q, const GridSpec& grid, unsigned threads) {
  q.validate();
  const LinearPlan plan = make_plan(method, bundle, p, N);
  DensityGrid out;
  switch (grid.kind) {
    case GridSpec::Kind::automatic:
      out.u = auto_abscissae(plan, grid.count);
      out.meta.grid_kind = "auto";
      break;
    case GridSpec::Kind::range:
      out.u.resize(grid.count);
      for (std::size_t i = 0; i < grid.count; ++i)
        out.u[i] = grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) / static_cast<double>(grid.count - 1);
      out.meta.grid_kind = "range";
      break;
    case GridSpec::Kind::points:
      out.u = grid.points;
      out.meta.grid_kind = "points";
      break;
  }
  out.meta.x = p.x;
  out.meta.t = p.t;
  out.meta.N = N;
  out.meta.method = std::string(to_string(method));
  out.meta.model_digest = bundle.describe();

  QuadConfig level = q;
  auto eval = build_quadrature(plan, level);
  out.f = evaluate_all(*eval, out.u, threads);
  out.meta.nodes = eval->node_count();
  if (q.refine) {
    out.meta.refined = true;
    for (std::size_t d = 1; d <= q.max_doublings; ++d) {
      level = level.doubled();
      eval = build_quadrature(plan, level);
      std::vector<double> next = evaluate_all(*eval, out.u, threads);
      const double change = grid_change(out.u, out.f, next);
      out.f = std::move(next);
      out.meta.doublings = d;
      out.meta.last_change = change;
      out.meta.nodes = eval->node_count();
      if (change < q.refine_tol) {
        out.meta.quad_digest = level.digest();
        return out;
      }
    }
    throw NonConvergence("quadrature refinement did not reach L1 change " + fmt(q.refine_tol) + " after " +
                         std::to_string(q.max_doublings) + " doublings (last change " +
                         fmt(out.meta.last_change) + ")");
  }
  out.meta.quad_digest = level.digest();
  return out;
}

DensityGrid mc_integrate_density(const std::vector<double>& u, const EvalPoint& p, std::size_t N, Method method,
                                 const ModelBundle& bundle, const QuadConfig& q, unsigned threads) {
  if (q.mc_samples < 10000) throw DomainError("Monte Carlo integration needs mc_samples >= 10000");
  const LinearPlan plan = make_plan(method, bundle, p, N);
  auto eval = build_monte_carlo(plan, q.mc_samples, q.mc_seed, threads);
  DensityGrid out;
  out.u = u;
  out.f = evaluate_all(*eval, u, threads);
  out.meta.x = p.x;
  out.meta.t = p.t;
  out.meta.N = N;
  out.meta.method = std::string(to_string(method)) + "+mc";
  out.meta.quad_digest = q.digest();
  out.meta.model_digest = bundle.describe();
  out.meta.grid_kind = "points";
  out.meta.seed = q.mc_seed;
  out.meta.nodes = eval->node_count();
  out.meta.mc_samples = q.mc_samples;
  return out;
}

}  // namespace heatdens::engine
