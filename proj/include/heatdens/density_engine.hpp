#pragma once

#include "heatdens/node_set.hpp"
#include "heatdens/series_core.hpp"
#include "heatdens/stochastic_models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatdens::engine {

enum class Method { fourier_indep, fourier_joint, bb_fast, kl };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct ModelBundle {
  models::ProcessSpec process;
  models::DiffusionSpec diffusion;

  std::string describe() const;
};

struct GridSpec {
  enum class Kind { automatic, range, points } kind = Kind::automatic;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 401;
  std::vector<double> points;

  static GridSpec automatic_grid(std::size_t count = 401);
  static GridSpec uniform_range(double lo, double hi, std::size_t count);
  static GridSpec explicit_points(std::vector<double> points);
};

struct GridMeta {
  double x = 0.0;
  double t = 0.0;
  std::size_t N = 0;
  std::string method;
  std::string quad_digest;
  std::string model_digest;
  std::string grid_kind;
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  bool refined = false;
  std::size_t doublings = 0;
  // L1 change between the last two refinement levels; negative if unrefined.
  double last_change = -1.0;
  std::size_t mc_samples = 0;
  bool resampled = false;
};

struct DensityGrid {
  std::vector<double> u;
  std::vector<double> f;
  GridMeta meta;
};

// Route plans (see node_set.hpp for the linear form they describe).
LinearPlan make_fourier_indep_plan(const series::EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                                   const models::DiffusionSpec& diffusion);
LinearPlan make_fourier_joint_plan(const series::EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                                   const models::DiffusionSpec& diffusion);
LinearPlan make_bb_plan(const series::EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion);
LinearPlan make_kl_plan(const series::EvalPoint& p, std::size_t N, const models::ProcessSpec& process,
                        const models::DiffusionSpec& diffusion);
LinearPlan make_plan(Method method, const ModelBundle& bundle, const series::EvalPoint& p, std::size_t N);

// Single-point densities. Each call builds its own node set; use
// density_grid for many abscissae.
double density_fourier_indep(double u, const series::EvalPoint& p, std::size_t N, const models::CoeffModel& coeffs,
                             const models::DiffusionSpec& diffusion, const QuadConfig& q);
double density_fourier_joint_gaussian(double u, const series::EvalPoint& p, std::size_t N,
                                      const models::CoeffModel& coeffs, const models::DiffusionSpec& diffusion,
                                      const QuadConfig& q);
double density_bb(double u, const series::EvalPoint& p, std::size_t N, const models::DiffusionSpec& diffusion,
                  const QuadConfig& q);
double density_kl(double u, const series::EvalPoint& p, std::size_t N, const models::ProcessSpec& process,
                  const models::DiffusionSpec& diffusion, const QuadConfig& q);

// Automatic abscissae: symmetric about the mean, half-width 6 times the
// larger of the overall sd and the widest conditional sd (20 times with
// heavy tails). When the narrowest conditional component is much
// thinner than the uniform spacing, points are graded as c sinh(beta s)
// so the centre is resolved.
std::vector<double> auto_abscissae(const LinearPlan& plan, std::size_t count = 401);

DensityGrid density_grid(const series::EvalPoint& p, std::size_t N, Method method, const ModelBundle& bundle,
                         const QuadConfig& q, const GridSpec& grid = {}, unsigned threads = 0);

// Same integrals estimated from q.mc_samples draws of the non-pivot
// variables; bit-identical for any thread count.
DensityGrid mc_integrate_density(const std::vector<double>& u, const series::EvalPoint& p, std::size_t N,
                                 Method method, const ModelBundle& bundle, const QuadConfig& q,
                                 unsigned threads = 0);

}  // namespace heatdens::engine
