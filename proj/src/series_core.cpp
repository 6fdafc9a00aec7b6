#include "heatdens/series_core.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace heatdens::series {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

const quad::Rule& unit_rule(std::size_t order) {
  static std::mutex mu;
  static std::map<std::size_t, quad::Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, quad::gauss_legendre(order, 0.0, 1.0)).first;
  return it->second;
}

}  // namespace

EvalPoint EvalPoint::make(double x, double t) {
  EvalPoint p{x, t};
  p.validate();
  return p;
}

void EvalPoint::validate() const {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("evaluation point needs 0 < x < 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("evaluation point needs t > 0");
}

SineCoeffs SineCoeffs::of(const std::function<double(double)>& f, std::size_t N) {
  SineCoeffs c;
  c.values.reserve(N);
  for (std::size_t n = 1; n <= N; ++n) c.values.push_back(sine_hat(f, n));
  return c;
}

double sine_hat(const std::function<double(double)>& f, std::size_t n, std::size_t quad_order) {
  if (n == 0) throw DomainError("sine coefficient index is 1-based");
  const std::size_t floor_order = std::max<std::size_t>(32, 4 * n);
  if (quad_order == 0) quad_order = std::max<std::size_t>(64, 8 * n);
  if (quad_order < floor_order)
    throw DomainError("sine_hat: quadrature order " + std::to_string(quad_order) + " cannot resolve mode " +
                      std::to_string(n));
  const quad::Rule& r = unit_rule(quad_order);
  const double w = static_cast<double>(n) * kPi;
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += r.w[i] * f(r.x[i]) * std::sin(w * r.x[i]);
  return acc;
}

double mode_factor(std::size_t n, double alpha2, const EvalPoint& p) {
  const double nn = static_cast<double>(n);
  return std::exp(-nn * nn * kPi2 * alpha2 * p.t) * std::sin(nn * kPi * p.x);
}

double t_n_operator(const SineCoeffs& coeffs, const EvalPoint& p, double alpha2, std::size_t N) {
  if (coeffs.size() < N) throw DomainError("t_n_operator: fewer sine coefficients than N");
  if (!(alpha2 > 0.0)) throw DomainError("t_n_operator: alpha^2 must be positive");
  double acc = 0.0;
  for (std::size_t n = 1; n <= N; ++n) acc += coeffs(n) * mode_factor(n, alpha2, p);
  return acc;
}

double truncated_solution(std::span<const double> a, double alpha2, const EvalPoint& p) {
  double acc = 0.0;
  for (std::size_t n = 1; n <= a.size(); ++n) acc += a[n - 1] * mode_factor(n, alpha2, p);
  return acc;
}

KlProjector::KlProjector(const models::ProcessSpec& process, std::size_t N, std::size_t n_xi)
    : N_(N), n_xi_(n_xi), mean_(N), loading_(n_xi * N) {
  if (N == 0) throw DomainError("KL projection needs N >= 1");
  for (std::size_t n = 1; n <= N; ++n) mean_[n - 1] = 2.0 * process.mean_hat(n);
  for (std::size_t m = 1; m <= n_xi; ++m) {
    const double root_nu = std::sqrt(process.nu(m));
    for (std::size_t n = 1; n <= N; ++n) loading_[(m - 1) * N + (n - 1)] = (2.0 * process.phi_hat(m, n)) * root_nu;
  }
}

void KlProjector::coefficients(std::span<const double> xi, std::span<double> a) const {
  if (xi.size() != n_xi_ || a.size() != N_) throw DomainError("KL projection: wrong vector length");
  for (std::size_t n = 0; n < N_; ++n) {
    double acc = mean_[n];
    for (std::size_t m = 0; m < n_xi_; ++m) acc += loading_[m * N_ + n] * xi[m];
    a[n] = acc;
  }
}

double KlProjector::evaluate(std::span<const double> xi, double alpha2, const EvalPoint& p) const {
  double buf[64];
  std::vector<double> heap;
  double* a = buf;
  if (N_ > 64) {
    heap.resize(N_);
    a = heap.data();
  }
  coefficients(xi, std::span<double>(a, N_));
  return truncated_solution(std::span<const double>(a, N_), alpha2, p);
}

double truncated_solution_kl(const models::ProcessSpec& process, std::span<const double> xi, double alpha2,
                             const EvalPoint& p, std::size_t N) {
  if (xi.empty()) throw DomainError("KL truncation needs at least one xi");
  const KlProjector proj(process, N, xi.size());
  return proj.evaluate(xi, alpha2, p);
}

double deterministic_solution(const std::function<double(double)>& phi, double alpha2, const EvalPoint& p,
                              std::size_t max_terms) {
  if (!(alpha2 > 0.0)) throw DomainError("deterministic_solution: alpha^2 must be positive");
  const quad::Rule& r = unit_rule(256);
  double l1 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) l1 += r.w[i] * std::abs(phi(r.x[i]));
  double acc = 0.0;
  for (std::size_t n = 1; n <= max_terms; ++n) {
    const double nn = static_cast<double>(n);
    if (2.0 * l1 * std::exp(-nn * nn * kPi2 * alpha2 * p.t) < 1e-14) break;
    acc += (2.0 * sine_hat(phi, n)) * mode_factor(n, alpha2, p);
  }
  return acc;
}

}  // namespace heatdens::series
