#include "heatdens/mc_oracle.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/kernels.hpp"
#include "heatdens/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace heatdens::mc {
namespace {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

// Cumulative integral of the piecewise-linear interpolant of (u, f).
std::vector<double> cumulative(const engine::DensityGrid& g) {
  std::vector<double> c(g.u.size(), 0.0);
  for (std::size_t i = 1; i < g.u.size(); ++i) c[i] = c[i - 1] + 0.5 * (g.f[i] + g.f[i - 1]) * (g.u[i] - g.u[i - 1]);
  return c;
}

double grid_cdf(const engine::DensityGrid& g, const std::vector<double>& c, double x) {
  if (x <= g.u.front()) return 0.0;
  if (x >= g.u.back()) return 1.0;
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(g.u.begin(), g.u.end(), x) - g.u.begin()) - 1;
  const double h = g.u[i + 1] - g.u[i];
  const double d = x - g.u[i];
  const double partial = c[i] + g.f[i] * d + (g.f[i + 1] - g.f[i]) * d * d / (2.0 * h);
  return partial / c.back();
}

}  // namespace

SampleSet sample_solution(const engine::ModelBundle& bundle, const series::EvalPoint& p, std::size_t N,
                          std::size_t n_samples, std::uint64_t seed, SampleRoute route, unsigned threads) {
  p.validate();
  if (N == 0) throw DomainError("sampling needs N >= 1");
  if (n_samples == 0) throw DomainError("sampling needs at least one draw");
  const auto& law = bundle.diffusion.law;
  if (!law.has_sampler()) throw UnsupportedLawError("diffusion law has no sampler");

  SampleSet out;
  out.values.resize(n_samples);
  out.seed = seed;
  out.n = n_samples;
  out.model_digest = bundle.describe();
  out.x = p.x;
  out.t = p.t;
  out.N = N;
  out.route = route == SampleRoute::fourier ? "fourier" : "kl";
  const std::size_t streams = (n_samples + engine::kStreamSize - 1) / engine::kStreamSize;

  if (route == SampleRoute::kl) {
    if (N < 2) throw DomainError("KL sampling needs N >= 2");
    const std::size_t n_xi = N - 1;
    for (std::size_t m = 1; m <= n_xi; ++m)
      if (!bundle.process.xi_law(m).has_sampler())
        throw UnsupportedLawError("law of xi_" + std::to_string(m) + " has no sampler");
    const series::KlProjector proj(bundle.process, N, n_xi);
    detail::parallel_for(streams, threads, [&](std::size_t s) {
      rng::Engine eng = rng::stream_engine(seed, s);
      std::vector<double> xi(n_xi);
      const std::size_t end = std::min(n_samples, (s + 1) * engine::kStreamSize);
      for (std::size_t i = s * engine::kStreamSize; i < end; ++i) {
        const double a2 = law.sample(eng);
        for (std::size_t m = 0; m < n_xi; ++m) xi[m] = bundle.process.xi_law(m + 1).sample(eng);
        out.values[i] = proj.evaluate(xi, a2, p);
      }
    });
    return out;
  }

  const models::CoeffModel cm = models::build_coeff_model(bundle.process, N);
  if (cm.independent()) {
    const auto& marg = cm.indep().marginals;
    for (const auto& m : marg)
      if (!m.has_sampler()) throw UnsupportedLawError("law " + m.describe() + " has no sampler");
    detail::parallel_for(streams, threads, [&](std::size_t s) {
      rng::Engine eng = rng::stream_engine(seed, s);
      std::vector<double> a(N);
      const std::size_t end = std::min(n_samples, (s + 1) * engine::kStreamSize);
      for (std::size_t i = s * engine::kStreamSize; i < end; ++i) {
        const double a2 = law.sample(eng);
        for (std::size_t n = 0; n < N; ++n) a[n] = marg[n].sample(eng);
        out.values[i] = series::truncated_solution(a, a2, p);
      }
    });
    return out;
  }

  const auto& jg = cm.joint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jg.sigma);
  const Eigen::MatrixXd root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const models::ScalarDensity z_law = models::ScalarDensity::normal();
  detail::parallel_for(streams, threads, [&](std::size_t s) {
    rng::Engine eng = rng::stream_engine(seed, s);
    Eigen::VectorXd z(static_cast<Eigen::Index>(N));
    std::vector<double> a(N);
    const std::size_t end = std::min(n_samples, (s + 1) * engine::kStreamSize);
    for (std::size_t i = s * engine::kStreamSize; i < end; ++i) {
      const double a2 = law.sample(eng);
      for (Eigen::Index n = 0; n < z.size(); ++n) z(n) = z_law.sample(eng);
      const Eigen::VectorXd v = jg.mu + root * z;
      for (std::size_t n = 0; n < N; ++n) a[n] = v(static_cast<Eigen::Index>(n));
      out.values[i] = series::truncated_solution(a, a2, p);
    }
  });
  return out;
}

SampleSet sample_from_grid(const engine::DensityGrid& grid, std::size_t n_samples, std::uint64_t seed) {
  if (grid.u.size() < 2) throw DomainError("grid sampling needs at least two points");
  const std::vector<double> c = cumulative(grid);
  const double mass = c.back();
  if (!(mass > 0.0)) throw DegenerateDistribution("grid has zero mass");
  SampleSet out;
  out.values.resize(n_samples);
  out.seed = seed;
  out.n = n_samples;
  out.route = "grid";
  const std::size_t streams = (n_samples + engine::kStreamSize - 1) / engine::kStreamSize;
  for (std::size_t s = 0; s < streams; ++s) {
    rng::Engine eng = rng::stream_engine(seed, s);
    const std::size_t end = std::min(n_samples, (s + 1) * engine::kStreamSize);
    for (std::size_t i = s * engine::kStreamSize; i < end; ++i) {
      const double target = rng::uniform_open(eng) * mass;
      std::size_t j = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), target) - c.begin());
      j = std::clamp<std::size_t>(j, 1, c.size() - 1) - 1;
      // Solve c_j + f_j d + (f_{j+1} - f_j) d^2 / (2h) = target for d in [0, h].
      const double h = grid.u[j + 1] - grid.u[j];
      const double a = (grid.f[j + 1] - grid.f[j]) / (2.0 * h);
      const double b = grid.f[j];
      const double r = target - c[j];
      double d;
      if (std::abs(a) * h < 1e-12 * std::max(b, 1e-300)) {
        d = b > 0.0 ? r / b : 0.5 * h;
      } else {
        const double disc = std::max(b * b + 4.0 * a * r, 0.0);
        d = 2.0 * r / (b + std::sqrt(disc));
      }
      out.values[i] = grid.u[j] + std::clamp(d, 0.0, h);
    }
  }
  return out;
}

SampleMoments sample_moments(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("moments need at least two samples");
  const double mean = pairwise_sum(values.data(), n) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  return {mean, pairwise_sum(sq.data(), n) / static_cast<double>(n - 1)};
}

double ecdf_distance(const SampleSet& samples, const engine::DensityGrid& grid) {
  if (samples.values.empty()) throw DomainError("ECDF distance needs samples");
  if (grid.u.size() < 2) throw DomainError("ECDF distance needs a grid");
  const std::vector<double> c = cumulative(grid);
  if (std::abs(c.back() - 1.0) > 2e-3)
    throw DomainError("grid mass " + std::to_string(c.back()) + " is not within 2e-3 of one");
  std::vector<double> v = samples.values;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = grid_cdf(grid, c, v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double silverman_bandwidth(const std::vector<double>& values) {
  const SampleMoments m = sample_moments(values);
  std::vector<double> s = values;
  std::sort(s.begin(), s.end());
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  const double sd = std::sqrt(m.variance);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

engine::DensityGrid kde_density(const SampleSet& samples, std::optional<double> bandwidth,
                                const std::vector<double>& abscissae) {
  const std::size_t n = samples.values.size();
  if (n < 1000) throw DomainError("kernel density estimate needs at least 1000 samples");
  const SampleMoments m = sample_moments(samples.values);
  if (!(m.variance > 0.0)) throw DegenerateDistribution("samples have zero variance; the law is a point mass");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples.values);
  if (!(h > 0.0) || !std::isfinite(h)) throw DegenerateDistribution("kernel bandwidth is not positive");

  const std::vector<double> k(n, 1.0 / h);
  const std::vector<double> w(n, 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi)));
  const simd::Nodes nodes{k, samples.values, w};
  engine::DensityGrid g;
  g.u = abscissae;
  g.f.resize(abscissae.size());
  for (std::size_t i = 0; i < abscissae.size(); ++i) g.f[i] = simd::profile_sum(simd::Profile::gaussian, nodes, abscissae[i]);
  g.meta.x = samples.x;
  g.meta.t = samples.t;
  g.meta.N = samples.N;
  g.meta.method = "kde";
  g.meta.model_digest = samples.model_digest;
  g.meta.seed = samples.seed;
  g.meta.grid_kind = "points";
  g.meta.mc_samples = n;
  return g;
}

std::string samples_csv(const SampleSet& samples) {
  std::string out = "u\n";
  char buf[40];
  for (double v : samples.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  }
  return out;
}

}  // namespace heatdens::mc
