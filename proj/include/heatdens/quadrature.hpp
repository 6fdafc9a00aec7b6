#pragma once

#include <cstddef>
#include <vector>

namespace heatdens::quad {

// Abscissae and weights of a one-dimensional rule.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const noexcept { return x.size(); }
};

// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
Rule gauss_legendre(std::size_t n);

// Gauss-Legendre rule mapped to [lo, hi] (weights sum to hi - lo).
Rule gauss_legendre(std::size_t n, double lo, double hi);

// Gauss-Hermite rule for the standard normal weight: sum_i w_i g(x_i)
// approximates E[g(Z)], Z ~ N(0,1). Weights sum to one.
Rule gauss_hermite_normal(std::size_t n);

// Composite trapezoid integral of samples f over sorted, possibly
// non-uniform abscissae u.
double trapezoid(const std::vector<double>& u, const std::vector<double>& f);

}  // namespace heatdens::quad
