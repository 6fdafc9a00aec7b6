#include "heatdens/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heatdens::quad {

Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: order must be positive");
  Rule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule gauss_legendre(std::size_t n, double lo, double hi) {
  Rule r = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < n; ++i) {
    r.x[i] = mid + half * r.x[i];
    r.w[i] *= half;
  }
  return r;
}

namespace {

// Orthonormal probabilists' Hermite recurrence at x. Returns h_n(x), h_{n-1}(x)
// and sum_{k<n} h_k(x)^2, in extended precision: the sum reaches e^{x^2/2},
// which overflows double for the outermost nodes of high orders.
struct HermiteEval {
  long double hn, hn1, sumsq;
};

HermiteEval hermite_eval(std::size_t n, long double x) {
  long double prev = 0.0L, cur = 1.0L, sumsq = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    sumsq += cur * cur;
    const long double next =
        (x * cur - std::sqrt(static_cast<long double>(k)) * prev) /
        std::sqrt(static_cast<long double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {cur, prev, sumsq};
}

}  // namespace

Rule gauss_hermite_normal(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_hermite_normal: order must be positive");
  Rule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  if (n == 1) {
    r.w[0] = 1.0;
    return r;
  }
  // Golub-Welsch eigenvalues of the Jacobi matrix, polished by Newton.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();

  for (std::size_t i = 0; i < n; ++i) {
    long double z = ev[static_cast<Eigen::Index>(i)];
    for (int it = 0; it < 3; ++it) {
      const HermiteEval e = hermite_eval(n, z);
      const long double d = std::sqrt(static_cast<long double>(n)) * e.hn1;
      if (d == 0.0L) break;
      z -= e.hn / d;
    }
    const HermiteEval e = hermite_eval(n, z);
    r.x[i] = static_cast<double>(z);
    r.w[i] = static_cast<double>(1.0L / e.sumsq);
  }
  // Enforce exact mirror symmetry of the rule.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double xs = 0.5 * (r.x[n - 1 - i] - r.x[i]);
    const double ws = 0.5 * (r.w[n - 1 - i] + r.w[i]);
    r.x[i] = -xs;
    r.x[n - 1 - i] = xs;
    r.w[i] = ws;
    r.w[n - 1 - i] = ws;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

double trapezoid(const std::vector<double>& u, const std::vector<double>& f) {
  if (u.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) s += 0.5 * (u[i] - u[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

}  // namespace heatdens::quad
