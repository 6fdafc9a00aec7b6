#pragma once

// Every density route reduces, for fixed alpha^2, to a linear form
//
//     u = b0(alpha^2) + bp(alpha^2) * P + sum_k b_k(alpha^2) * X_k
//
// in independent random variables: a pivot P whose density is applied
// through the change of variables, and inner coordinates X_k that are
// integrated by quadrature (or sampled). The Fourier route pivots on A_1,
// the Karhunen-Loeve route on xi_1, and the joint Gaussian route on the
// conditional law of A_1 given the whitened remaining coefficients.

#include "heatdens/kernels.hpp"
#include "heatdens/scalar_density.hpp"
#include "heatdens/stochastic_models.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heatdens::engine {

struct QuadConfig {
  std::size_t hermite_order = 20;
  std::size_t legendre_order = 64;
  std::size_t heavy_tail_order = 96;
  std::size_t mc_samples = 100000;
  std::uint64_t mc_seed = 0;
  bool refine = false;
  double refine_tol = 1e-6;
  std::size_t max_doublings = 6;
  // Refinement gives up once a node set would exceed this many nodes.
  std::size_t node_budget = 40'000'000;

  void validate() const;
  QuadConfig doubled() const;
  std::string digest() const;
};

using CoeffFn = std::function<void(double alpha2, double& b0, double& bp, std::span<double> bk)>;

struct LinearPlan {
  models::ScalarDensity pivot;
  std::vector<models::ScalarDensity> inner;
  models::DiffusionSpec diffusion;
  CoeffFn coeffs;
  std::string route;
};

// Weighted profile sum f(u) = sum_j w_j g(k_j (u - s_j)). Pivots without a
// kernel profile fall back on a scalar loop over the base density.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(models::ScalarDensity pivot, std::vector<double> k, std::vector<double> s, std::vector<double> w);

  double operator()(double u) const;
  std::size_t size() const noexcept { return k_.size(); }
  simd::Nodes view() const { return {k_, s_, w_}; }

 private:
  std::optional<models::ScalarDensity> pivot_;
  std::optional<simd::Profile> profile_;
  std::vector<double> k_, s_, w_;
};

// Moments of u under the plan and the narrowest conditional pivot spread
// min_alpha |bp| scale(P); used to lay out automatic grids.
struct PlanSummary {
  double mean;
  double variance;
  double min_spread;
  // Largest conditional standard deviation over the alpha^2 nodes.
  double max_cond_sd;
  bool heavy_tail;
  bool compact_pivot;
};

PlanSummary summarize(const LinearPlan& plan);

// A ready-to-evaluate density: either a node sum, or for compact pivots
// under a continuous alpha^2 law, an exact breakpoint integrator.
class DensityEvaluator {
 public:
  virtual ~DensityEvaluator() = default;
  virtual double operator()(double u) const = 0;
  virtual std::size_t node_count() const = 0;
};

// Throws HypothesisViolation when bp vanishes at an alpha^2 node and
// NonConvergence when the node budget is exceeded.
std::unique_ptr<DensityEvaluator> build_quadrature(const LinearPlan& plan, const QuadConfig& q);

// Monte Carlo node set: n draws of (alpha^2, X_k), streams of fixed size
// seeded from (seed, stream index).
std::unique_ptr<DensityEvaluator> build_monte_carlo(const LinearPlan& plan, std::size_t n, std::uint64_t seed,
                                                    unsigned threads);

inline constexpr std::size_t kStreamSize = 65536;

}  // namespace heatdens::engine
