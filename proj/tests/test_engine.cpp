#include "heatdens/density_engine.hpp"
#include "heatdens/errors.hpp"
#include "heatdens/kernels.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <vector>

using namespace heatdens;
using engine::Method;
using series::EvalPoint;

namespace {

engine::ModelBundle bb_bundle(double lo = 1.0, double hi = 2.0) {
  return {models::make_brownian_bridge_process(), models::DiffusionSpec::uniform(lo, hi)};
}

engine::ModelBundle sine_bundle(const models::ScalarDensity& xi, double lo = 1.0, double hi = 2.0) {
  return {models::make_general_sine_process(models::NuSequence::power_log(3.0), xi),
          models::DiffusionSpec::uniform(lo, hi)};
}

engine::ModelBundle bm_bundle() {
  return {models::make_brownian_motion_process(), models::DiffusionSpec::uniform(1.0, 2.0)};
}

double l1(const std::vector<double>& u, const std::vector<double>& f, const std::vector<double>& g) {
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = std::abs(f[i] - g[i]);
  return oracle::trapezoid(u, d);
}

}  // namespace

TEST_CASE("Brownian bridge densities against the Gaussian mixture oracle") {
  const engine::QuadConfig q;
  for (auto [x, t] : {std::pair{0.5, 0.1}, std::pair{0.7, 0.3}, std::pair{0.3, 0.05}}) {
    const auto p = EvalPoint::make(x, t);
    for (auto [lo, hi] : {std::pair{1.0, 2.0}, std::pair{1.5, 1.5}}) {
      const auto b = bb_bundle(lo, hi);
      for (std::size_t N : {2u, 3u}) {
        const double sd = std::sqrt(oracle::bb_variance(N, x, t, lo, hi));
        const auto cm = models::build_coeff_model(b.process, N);
        const auto jg = models::build_joint_gaussian_model(b.process, N);
        for (double z : {0.0, 0.3, -1.1, 2.5}) {
          const double u = z * sd;
          const double expect = oracle::bb_density(u, N, x, t, lo, hi);
          CAPTURE(x);
          CAPTURE(t);
          CAPTURE(lo);
          CAPTURE(N);
          CAPTURE(z);
          CHECK(engine::density_bb(u, p, N, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-9));
          CHECK(engine::density_fourier_indep(u, p, N, cm, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-9));
          CHECK(engine::density_fourier_joint_gaussian(u, p, N, jg, b.diffusion, q) ==
                doctest::Approx(expect).epsilon(1e-9));
          CHECK(engine::density_kl(u, p, N + 1, b.process, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("Brownian motion density against the correlated Gaussian oracle") {
  // Given alpha^2, u_N is normal with variance c^T Sigma c.
  const auto b = bm_bundle();
  const auto p = EvalPoint::make(0.7, 0.3);
  const engine::QuadConfig q;
  for (std::size_t N : {1u, 2u, 4u}) {
    auto var_at = [&](double a2) {
      double v = 0.0;
      for (std::size_t n = 1; n <= N; ++n)
        for (std::size_t m = 1; m <= N; ++m)
          v += oracle::mode(n, a2, p.x, p.t) * oracle::mode(m, a2, p.x, p.t) * oracle::bm_coeff_cov(n, m);
      return v;
    };
    const auto jg = models::build_joint_gaussian_model(b.process, N);
    const double sd = std::sqrt(var_at(1.5));
    for (double z : {0.0, 0.7, -2.0}) {
      const double u = z * sd;
      const double expect = oracle::simpson([&](double a2) { return oracle::normal_pdf(u, 0.0, var_at(a2)); }, 1.0, 2.0, 4000);
      CHECK(engine::density_fourier_joint_gaussian(u, p, N, jg, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("quartic-tail coefficients against characteristic-function inversion") {
  const auto b = sine_bundle(models::ScalarDensity::quartic_tail(), 1.5, 1.5);
  const auto cm = models::build_coeff_model(b.process, 2);
  const auto p = EvalPoint::make(0.7, 0.3);
  const double a2 = 1.5;
  std::vector<double> c;
  for (std::size_t n = 1; n <= 2; ++n)
    c.push_back(std::sqrt(2.0 * oracle::nu_power_log3(n)) * std::abs(oracle::mode(n, a2, p.x, p.t)));
  const engine::QuadConfig q;
  for (double u : {0.0, 0.2 * c[0], c[0], -3.0 * c[0]}) {
    const double expect = oracle::quartic_sum_density(u, c);
    CAPTURE(u);
    CHECK(engine::density_fourier_indep(u, p, 2, cm, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-7));
    CHECK(engine::density_kl(u, p, 3, b.process, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("uniform coefficients against the trapezoidal convolution") {
  // Non-Lipschitz coefficient laws go through the exact breakpoint integrator.
  const auto p = EvalPoint::make(0.7, 0.3);
  const auto xi = models::ScalarDensity::uniform(-std::sqrt(3.0), std::sqrt(3.0));
  auto coeff = [&](std::size_t n, double a2) {
    return std::sqrt(2.0 * oracle::nu_power_log3(n)) * std::abs(oracle::mode(n, a2, p.x, p.t));
  };
  const engine::QuadConfig q;

  SUBCASE("fixed diffusion") {
    const auto b = sine_bundle(xi, 1.2, 1.2);
    const auto cm = models::build_coeff_model(b.process, 2);
    const double a = coeff(1, 1.2), c2 = coeff(2, 1.2);
    for (double u : {0.0, 0.5 * a, 1.7 * a, -1.73 * a}) {
      CAPTURE(u);
      CHECK(engine::density_fourier_indep(u, p, 2, cm, b.diffusion, q) ==
            doctest::Approx(oracle::two_uniform_density(u, a, c2)).epsilon(1e-10).scale(1e-6));
    }
  }
  SUBCASE("uniform diffusion") {
    const auto b = sine_bundle(xi);
    const auto cm = models::build_coeff_model(b.process, 2);
    const double a = coeff(1, 1.5);
    for (double u : {0.0, 0.3 * a, 1.1 * a, -1.5 * a}) {
      // The integrand has kinks where u = +-r (c1 - c2) or |u| = r (c1 + c2).
      const double r = std::sqrt(3.0);
      const std::vector<std::function<double(double)>> kinks{
          [&](double a2) { return u - r * (coeff(1, a2) - coeff(2, a2)); },
          [&](double a2) { return u + r * (coeff(1, a2) - coeff(2, a2)); },
          [&](double a2) { return std::abs(u) - r * (coeff(1, a2) + coeff(2, a2)); }};
      const double expect = oracle::simpson_split(
          [&](double a2) { return oracle::two_uniform_density(u, coeff(1, a2), coeff(2, a2)); }, 1.0, 2.0, 20000, kinks);
      CAPTURE(u);
      CHECK(engine::density_fourier_indep(u, p, 2, cm, b.diffusion, q) == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("grids are normalized, nonnegative and symmetric") {
  engine::QuadConfig q;
  struct Case {
    engine::ModelBundle b;
    Method m;
    std::size_t N;
  };
  std::vector<Case> cases{{bb_bundle(), Method::bb_fast, 3},
                          {bb_bundle(), Method::kl, 4},
                          {sine_bundle(models::ScalarDensity::quartic_tail()), Method::fourier_indep, 3},
                          {sine_bundle(models::ScalarDensity::quartic_tail()), Method::kl, 4},
                          {bm_bundle(), Method::fourier_joint, 3}};
  for (const auto& c : cases) {
    for (auto [x, t] : {std::pair{0.5, 0.1}, std::pair{0.7, 0.3}, std::pair{0.7, 1.0}}) {
      const auto g = engine::density_grid(EvalPoint::make(x, t), c.N, c.m, c.b, q);
      CAPTURE(engine::to_string(c.m));
      CAPTURE(x);
      CAPTURE(t);
      CHECK(oracle::trapezoid(g.u, g.f) == doctest::Approx(1.0).epsilon(2e-3));
      double fmax = 0.0;
      for (double f : g.f) {
        CHECK(f >= 0.0);
        fmax = std::max(fmax, f);
      }
      const std::size_t n = g.u.size();
      double asym = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(g.u[i] + g.u[n - 1 - i]) <= 1e-12 * std::abs(g.u[i]));
        asym = std::max(asym, std::abs(g.f[i] - g.f[n - 1 - i]));
      }
      CHECK(asym <= 1e-8 * fmax);
    }
  }
}

TEST_CASE("KL route of order N equals the Fourier route of order N - 1 for sine processes") {
  const engine::QuadConfig q;
  for (const auto& b : {bb_bundle(), sine_bundle(models::ScalarDensity::quartic_tail())}) {
    for (auto [x, t] : {std::pair{0.5, 0.1}, std::pair{0.7, 0.3}}) {
      const auto p = EvalPoint::make(x, t);
      for (std::size_t N : {3u, 4u}) {
        const auto kl = engine::density_grid(p, N, Method::kl, b, q);
        const auto fr = engine::density_grid(p, N - 1, Method::fourier_indep, b, q,
                                             engine::GridSpec::explicit_points(kl.u));
        CHECK(l1(kl.u, kl.f, fr.f) <= 1e-9);
      }
    }
  }
}

TEST_CASE("SIMD levels give the same grid") {
  const engine::QuadConfig q;
  const auto b = sine_bundle(models::ScalarDensity::quartic_tail());
  const auto p = EvalPoint::make(0.7, 0.3);
  simd::set_level_override(simd::Level::scalar);
  const auto ref = engine::density_grid(p, 3, Method::fourier_indep, b, q);
  const auto ref_bb = engine::density_grid(p, 3, Method::bb_fast, bb_bundle(), q);
  for (auto level : {simd::Level::avx2, simd::Level::avx512}) {
    if (!simd::level_available(level)) continue;
    simd::set_level_override(level);
    const auto g = engine::density_grid(p, 3, Method::fourier_indep, b, q);
    const auto gb = engine::density_grid(p, 3, Method::bb_fast, bb_bundle(), q);
    double m = 0.0;
    for (std::size_t i = 0; i < g.u.size(); ++i) {
      CHECK(std::abs(g.f[i] - ref.f[i]) <= 1e-10 * std::max(1.0, std::abs(ref.f[i])));
      CHECK(std::abs(gb.f[i] - ref_bb.f[i]) <= 1e-10 * std::max(1.0, std::abs(ref_bb.f[i])));
      m = std::max(m, std::abs(g.f[i] - ref.f[i]));
    }
    MESSAGE(simd::to_string(level) << " max abs deviation " << m);
  }
  simd::set_level_override(std::nullopt);
}

TEST_CASE("results do not depend on the thread count") {
  const engine::QuadConfig q;
  const auto b = sine_bundle(models::ScalarDensity::quartic_tail());
  const auto p = EvalPoint::make(0.5, 0.1);
  const auto g1 = engine::density_grid(p, 3, Method::kl, b, q, {}, 1);
  const auto g4 = engine::density_grid(p, 3, Method::kl, b, q, {}, 4);
  CHECK(std::memcmp(g1.f.data(), g4.f.data(), g1.f.size() * sizeof(double)) == 0);
  auto qm = q;
  qm.mc_samples = 20000;
  const auto m1 = engine::mc_integrate_density(g1.u, p, 3, Method::fourier_indep, b, qm, 1);
  const auto m3 = engine::mc_integrate_density(g1.u, p, 3, Method::fourier_indep, b, qm, 3);
  CHECK(std::memcmp(m1.f.data(), m3.f.data(), m1.f.size() * sizeof(double)) == 0);
}

TEST_CASE("Monte Carlo integration agrees with quadrature") {
  engine::QuadConfig q;
  q.mc_samples = 200000;
  const auto p = EvalPoint::make(0.7, 0.3);
  const auto b = sine_bundle(models::ScalarDensity::quartic_tail());
  const auto g = engine::density_grid(p, 4, Method::fourier_indep, b, q);
  const auto m = engine::mc_integrate_density(g.u, p, 4, Method::fourier_indep, b, q);
  CHECK(m.meta.method == "fourier_indep+mc");
  CHECK(l1(g.u, g.f, m.f) < 5e-3);
}

TEST_CASE("refinement converges or reports non-convergence") {
  engine::QuadConfig q;
  q.refine = true;
  q.refine_tol = 1e-10;
  const auto p = EvalPoint::make(0.5, 0.1);
  const auto g = engine::density_grid(p, 3, Method::bb_fast, bb_bundle(), q);
  CHECK(g.meta.refined);
  CHECK(g.meta.last_change >= 0.0);
  CHECK(g.meta.last_change < 1e-10);
  q.refine_tol = 1e-300;
  q.max_doublings = 1;
  CHECK_THROWS_AS(engine::density_grid(p, 3, Method::fourier_indep,
                                       sine_bundle(models::ScalarDensity::quartic_tail()), q),
                  NonConvergence);
}

TEST_CASE("route preconditions") {
  const engine::QuadConfig q;
  const auto p = EvalPoint::make(0.5, 0.1);
  CHECK_THROWS_AS(engine::density_grid(p, 2, Method::kl, bb_bundle(), q), DomainError);
  CHECK_THROWS_AS(engine::density_grid(p, 1, Method::fourier_indep, bb_bundle(), q), DomainError);
  CHECK_THROWS_AS(engine::density_grid(p, 3, Method::fourier_indep, bm_bundle(), q), WrongModelError);
  CHECK_THROWS_AS(engine::density_grid(p, 3, Method::bb_fast, sine_bundle(models::ScalarDensity::normal()), q),
                  WrongModelError);
  CHECK_THROWS_AS(engine::density_grid(p, 3, Method::bb_fast, bb_bundle(), q, engine::GridSpec::automatic_grid(400)),
                  DomainError);
  CHECK(engine::parse_method("kl") == Method::kl);
  CHECK_FALSE(engine::parse_method("fourier").has_value());
}

TEST_CASE("explicit grids are honoured") {
  const engine::QuadConfig q;
  const auto p = EvalPoint::make(0.5, 0.1);
  const auto g = engine::density_grid(p, 2, Method::bb_fast, bb_bundle(), q, engine::GridSpec::uniform_range(-0.1, 0.1, 5));
  REQUIRE(g.u.size() == 5);
  CHECK(g.u[2] == 0.0);
  CHECK(g.f[2] == doctest::Approx(oracle::bb_density(0.0, 2, 0.5, 0.1, 1.0, 2.0)).epsilon(1e-9));
  CHECK(g.meta.grid_kind == "range");
}
