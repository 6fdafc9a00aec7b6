#pragma once

#include "heatdens/density_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace heatdens::mc {

enum class SampleRoute { fourier, kl };

struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string model_digest;
  double x = 0.0;
  double t = 0.0;
  std::size_t N = 0;
  std::string route;
};

// Draws alpha^2 and the coefficients (Fourier route) or the KL variables
// xi_1..xi_{N-1} (KL route) and evaluates the truncated series. Samples
// come in fixed-size streams seeded from (seed, stream index).
SampleSet sample_solution(const engine::ModelBundle& bundle, const series::EvalPoint& p, std::size_t N,
                          std::size_t n_samples, std::uint64_t seed, SampleRoute route = SampleRoute::fourier,
                          unsigned threads = 0);

// Draws from the piecewise-linear law of a grid by exact inversion of its CDF.
SampleSet sample_from_grid(const engine::DensityGrid& grid, std::size_t n_samples, std::uint64_t seed);

struct SampleMoments {
  double mean;
  double variance;
};

// Mean and unbiased variance, reduced pairwise in a fixed order.
SampleMoments sample_moments(const std::vector<double>& values);

// Kolmogorov-Smirnov distance between the sample ECDF and the CDF of the
// piecewise-linear grid density (normalized by its mass).
double ecdf_distance(const SampleSet& samples, const engine::DensityGrid& grid);

// 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(const std::vector<double>& values);

// Gaussian kernel density estimate. Throws DegenerateDistribution when the
// samples have no spread.
engine::DensityGrid kde_density(const SampleSet& samples, std::optional<double> bandwidth,
                                const std::vector<double>& abscissae);

// One value per line under a "u" header.
std::string samples_csv(const SampleSet& samples);

}  // namespace heatdens::mc
