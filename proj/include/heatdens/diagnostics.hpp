#pragma once

#include "heatdens/density_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heatdens::diag {

struct L1Result {
  double value;
  // True when the abscissae differed and both grids were resampled by
  // monotone cubic interpolation onto the union of their abscissae.
  bool resampled;
};

L1Result l1_distance_checked(const engine::DensityGrid& g1, const engine::DensityGrid& g2);
double l1_distance(const engine::DensityGrid& g1, const engine::DensityGrid& g2);

struct GridMoments {
  double mass;
  double mean;
  double variance;
};

// Trapezoid moments; mean and variance are normalized by the mass.
GridMoments density_moments(const engine::DensityGrid& g);

struct BbMoments {
  double mean;
  double variance;
};

// Exact mean and variance of the truncated Brownian-bridge solution u_N.
BbMoments exact_bb_moments(const series::EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion);

// E[exp(-c alpha^2)] under the diffusion law (closed form for uniform and
// point-mass laws, Gauss-Legendre otherwise).
double expected_decay(const models::DiffusionSpec& diffusion, double c);

struct LipschitzEstimate {
  std::string subject;  // "f_A1" or "f_xi1"
  bool applicable = false;
  bool bounded = false;
  // sup |f'| from central differences at steps 1e-3, 1e-4, 1e-5 (x scale).
  std::vector<double> by_step;
  double estimate = 0.0;
};

LipschitzEstimate lipschitz_estimate(const models::ScalarDensity& law, const std::string& subject);

struct Verdict {
  bool holds = false;
  std::vector<std::string> reasons;
};

struct HypothesisReport {
  LipschitzEstimate lipschitz_a1;
  LipschitzEstimate lipschitz_xi1;
  // sum_{n >= 2} E[exp(-(n^2 - 2) pi^2 alpha^2 t)], with the geometric
  // bound on the part below underflow.
  double tail_sum_estimate = 0.0;
  double tail_sum_remainder = 0.0;
  std::size_t tail_sum_terms = 0;
  // sum_{n >= 1} ||exp(-n^2 pi^2 alpha^2 t)||_{L^2}.
  double l2_sum_estimate = 0.0;
  // min over alpha^2 nodes and endpoints of |T_N(phi_1)|.
  double tn_phi1_lower_bound = 0.0;
  // (Sigma_M^{-1})_{11} for M = 1..checked, when the process is Gaussian.
  bool sigma_applicable = false;
  std::vector<double> sigma_inv_11;
  bool sigma_singular = false;
  std::string sigma_reason;
  std::size_t sigma_checked_up_to = 0;
  Verdict teor1, teor2, teor3;
  double x = 0.0, t = 0.0;
  std::size_t N = 0;
  std::string model_digest;
};

// Never throws for model reasons; failures become verdict reasons.
HypothesisReport hypothesis_report(const engine::ModelBundle& bundle, const series::EvalPoint& p, std::size_t N);

enum class Trend { converging, stalled, diverging };
std::string to_string(Trend t);

struct ConvergencePair {
  std::size_t N;
  std::size_t N_next;
  double l1;
};

struct ConvergenceReport {
  std::vector<ConvergencePair> pairs;
  Trend verdict = Trend::stalled;
  double x = 0.0, t = 0.0;
  std::string method;
  std::vector<engine::DensityGrid> grids;
};

// Verdict rule on a sequence of successive distances: diverging when the
// distances never decrease and the last is >= 0.1, converging when they
// never increase and the last is below 0.1, stalled otherwise.
Trend classify(const std::vector<double>& distances);

// Grids for every N on the automatic abscissae of the largest N.
ConvergenceReport convergence_report(const series::EvalPoint& p, const std::vector<std::size_t>& N_list,
                                     engine::Method method, const engine::ModelBundle& bundle,
                                     const engine::QuadConfig& q, unsigned threads = 0);

}  // namespace heatdens::diag
