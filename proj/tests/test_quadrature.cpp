#include "heatdens/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace heatdens;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (std::size_t n : {2u, 5u, 16u, 64u, 128u}) {
    const auto r = quad::gauss_legendre(n);
    CHECK(std::accumulate(r.w.begin(), r.w.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    const std::size_t deg = 2 * n - 1;
    for (std::size_t d : {deg - 1, deg}) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += r.w[i] * std::pow(r.x[i], static_cast<double>(d));
      const double exact = d % 2 ? 0.0 : 2.0 / static_cast<double>(d + 1);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("mapped Gauss-Legendre") {
  const auto r = quad::gauss_legendre(20, 1.0, 3.0);
  double area = 0.0, integral = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r.x[i] > 1.0);
    CHECK(r.x[i] < 3.0);
    area += r.w[i];
    integral += r.w[i] * std::exp(r.x[i]);
  }
  CHECK(area == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(integral == doctest::Approx(std::exp(3.0) - std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("Gauss-Hermite reproduces normal moments") {
  const auto r = quad::gauss_hermite_normal(20);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0, m10 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    m0 += r.w[i];
    m2 += r.w[i] * r.x[i] * r.x[i];
    m4 += r.w[i] * std::pow(r.x[i], 4);
    m10 += r.w[i] * std::pow(r.x[i], 10);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(m10 == doctest::Approx(945.0).epsilon(1e-12));
  // E[cos Z] = exp(-1/2).
  double c = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) c += r.w[i] * std::cos(r.x[i]);
  CHECK(c == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("trapezoid is exact for piecewise linear data on uneven grids") {
  std::vector<double> u{-1.0, -0.3, 0.0, 0.1, 2.0};
  std::vector<double> f;
  for (double x : u) f.push_back(3.0 * x + 1.0);
  CHECK(quad::trapezoid(u, f) == doctest::Approx(1.5 * (4.0 - 1.0) + 3.0).epsilon(1e-15));
}
