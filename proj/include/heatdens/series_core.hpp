#pragma once

#include "heatdens/stochastic_models.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heatdens::series {

// Space-time evaluation point with 0 < x < 1 and t > 0.
struct EvalPoint {
  double x;
  double t;

  // Throws DomainError outside the open domain.
  static EvalPoint make(double x, double t);
  void validate() const;
};

// Sine coefficients f^(n) = int_0^1 f(y) sin(n pi y) dy for n = 1..N,
// stored 0-based (values[n - 1]).
struct SineCoeffs {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator()(std::size_t n) const { return values[n - 1]; }

  static SineCoeffs of(const std::function<double(double)>& f, std::size_t N);
};

// Gauss-Legendre estimate of int_0^1 f(y) sin(n pi y) dy. quad_order 0
// picks max(64, 8n); explicit orders below max(32, 4n) are rejected.
double sine_hat(const std::function<double(double)>& f, std::size_t n, std::size_t quad_order = 0);

// exp(-n^2 pi^2 alpha2 t) sin(n pi x). Shared by every series evaluation so
// that different routes produce the same floating-point terms.
double mode_factor(std::size_t n, double alpha2, const EvalPoint& p);

// T_N(f)(x, t, alpha2) = sum_{n <= N} f^(n) exp(-n^2 pi^2 alpha2 t) sin(n pi x).
double t_n_operator(const SineCoeffs& coeffs, const EvalPoint& p, double alpha2, std::size_t N);

// u_N = sum_n a_n exp(-n^2 pi^2 alpha2 t) sin(n pi x), with N = a.size().
double truncated_solution(std::span<const double> a, double alpha2, const EvalPoint& p);

// Maps KL variables xi_1..xi_{M-1} to the Fourier coefficients a_1..a_N of
// u_{N,M}. Sine coefficients of the mean and of each phi_m are computed
// once at construction.
class KlProjector {
 public:
  KlProjector(const models::ProcessSpec& process, std::size_t N, std::size_t n_xi);

  std::size_t order() const noexcept { return N_; }
  std::size_t n_xi() const noexcept { return n_xi_; }

  // a_n = 2 mu^(n) + sum_m (2 phi_m^(n) sqrt(nu_m)) xi_m, summed in ascending m.
  void coefficients(std::span<const double> xi, std::span<double> a) const;
  double evaluate(std::span<const double> xi, double alpha2, const EvalPoint& p) const;

  // 2 phi_m^(n) sqrt(nu_m), m and n 1-based.
  double loading(std::size_t m, std::size_t n) const { return loading_[(m - 1) * N_ + (n - 1)]; }
  double mean_coeff(std::size_t n) const { return mean_[n - 1]; }

 private:
  std::size_t N_;
  std::size_t n_xi_;
  std::vector<double> mean_;
  std::vector<double> loading_;
};

// u_{N,M} at the point, with M - 1 = xi.size().
double truncated_solution_kl(const models::ProcessSpec& process, std::span<const double> xi, double alpha2,
                             const EvalPoint& p, std::size_t N);

// Series solution for a deterministic initial condition phi, summed until
// the next term is provably below 1e-14 (at most max_terms terms).
double deterministic_solution(const std::function<double(double)>& phi, double alpha2, const EvalPoint& p,
                              std::size_t max_terms = 128);

}  // namespace heatdens::series
