#include "heatdens/errors.hpp"
#include "heatdens/series_core.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

using namespace heatdens;
using series::EvalPoint;

TEST_CASE("evaluation points must lie in the open domain") {
  CHECK_THROWS_AS(EvalPoint::make(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(EvalPoint::make(1.0, 0.1), DomainError);
  CHECK_THROWS_AS(EvalPoint::make(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(EvalPoint::make(0.5, -1.0), DomainError);
  CHECK_NOTHROW(EvalPoint::make(0.5, 0.1));
}

TEST_CASE("sine coefficients of simple functions") {
  for (std::size_t n = 1; n <= 8; ++n) {
    const double nn = static_cast<double>(n);
    // int_0^1 y sin(n pi y) dy = (-1)^{n+1} / (n pi).
    const double lin = (n % 2 ? 1.0 : -1.0) / (nn * oracle::pi);
    CHECK(series::sine_hat([](double y) { return y; }, n) == doctest::Approx(lin).epsilon(1e-13));
    for (std::size_t k = 1; k <= 4; ++k) {
      const double expect = n == k ? 0.5 : 0.0;
      CHECK(series::sine_hat([k](double y) { return std::sin(double(k) * oracle::pi * y); }, n) ==
            doctest::Approx(expect).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("truncated solution matches the explicit sum") {
  const auto p = EvalPoint::make(0.7, 0.3);
  const std::vector<double> a{0.4, -1.1, 0.25, 2.0};
  double expect = 0.0;
  for (std::size_t n = 1; n <= a.size(); ++n) expect += a[n - 1] * oracle::mode(n, 1.3, p.x, p.t);
  CHECK(series::truncated_solution(a, 1.3, p) == doctest::Approx(expect).epsilon(1e-15));
  for (std::size_t n = 1; n <= 4; ++n)
    CHECK(series::mode_factor(n, 1.3, p) == doctest::Approx(oracle::mode(n, 1.3, p.x, p.t)).epsilon(1e-15));
}

TEST_CASE("T_N applied to phi_1 = sqrt(2) sin(pi y)") {
  const auto p = EvalPoint::make(0.5, 0.1);
  const auto c = series::SineCoeffs::of([](double y) { return std::sqrt(2.0) * std::sin(oracle::pi * y); }, 5);
  const double expect = std::sqrt(2.0) / 2.0 * std::exp(-oracle::pi * oracle::pi * 1.5 * 0.1);
  CHECK(series::t_n_operator(c, p, 1.5, 5) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("deterministic initial condition") {
  const auto p = EvalPoint::make(0.3, 0.05);
  const double single = series::deterministic_solution([](double y) { return std::sin(oracle::pi * y); }, 2.0, p);
  CHECK(single == doctest::Approx(oracle::mode(1, 2.0, p.x, p.t)).epsilon(1e-12));
  // phi(y) = y(1 - y): sine coefficients 2 * 4 / (n pi)^3 for odd n.
  double expect = 0.0;
  for (std::size_t n = 1; n < 200; n += 2) {
    const double nn = static_cast<double>(n);
    expect += 8.0 / (nn * nn * nn * oracle::pi * oracle::pi * oracle::pi) * oracle::mode(n, 2.0, p.x, p.t);
  }
  CHECK(series::deterministic_solution([](double y) { return y * (1.0 - y); }, 2.0, p) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("KL projection of a sine process reproduces the Fourier coefficients") {
  const auto proc = models::make_brownian_bridge_process();
  const std::size_t N = 5;
  series::KlProjector kl(proc, N, N - 1);
  for (std::size_t m = 1; m < N; ++m)
    for (std::size_t n = 1; n <= N; ++n) {
      const double expect = m == n ? std::sqrt(2.0) / (static_cast<double>(n) * oracle::pi) : 0.0;
      CHECK(kl.loading(m, n) == doctest::Approx(expect).epsilon(1e-13).scale(1e-3));
    }
  std::vector<double> xi{0.3, -1.2, 0.8, 2.1}, a(N);
  kl.coefficients(xi, a);
  CHECK(std::abs(a[N - 1]) < 1e-15);
  const auto p = EvalPoint::make(0.7, 0.3);
  const double via_kl = kl.evaluate(xi, 1.4, p);
  CHECK(via_kl == series::truncated_solution_kl(proc, xi, 1.4, p, N));
  std::vector<double> a_direct(N - 1);
  for (std::size_t n = 1; n < N; ++n) a_direct[n - 1] = std::sqrt(2.0) / (double(n) * oracle::pi) * xi[n - 1];
  CHECK(via_kl == doctest::Approx(series::truncated_solution(a_direct, 1.4, p)).epsilon(1e-13));
}

TEST_CASE("KL projection for Brownian motion mixes the sine modes") {
  const auto proc = models::make_brownian_motion_process();
  series::KlProjector kl(proc, 4, 3);
  // Loadings against Simpson sine coefficients of phi_1 = sqrt(2) sin(pi y / 2).
  for (std::size_t n = 1; n <= 4; ++n) {
    const double hat = oracle::simpson(
        [n](double y) { return std::sqrt(2.0) * std::sin(0.5 * oracle::pi * y) * std::sin(double(n) * oracle::pi * y); },
        0.0, 1.0, 4000);
    const double nu1 = 4.0 / (oracle::pi * oracle::pi);
    CHECK(kl.loading(1, n) == doctest::Approx(2.0 * hat * std::sqrt(nu1)).epsilon(1e-10));
  }
}
