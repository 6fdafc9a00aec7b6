#include "heatdens/diagnostics.hpp"
#include "heatdens/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace heatdens;
using engine::Method;
using series::EvalPoint;

namespace {

engine::ModelBundle bb_bundle() {
  return {models::make_brownian_bridge_process(), models::DiffusionSpec::uniform(1.0, 2.0)};
}

engine::ModelBundle sine_bundle(const models::ScalarDensity& xi) {
  return {models::make_general_sine_process(models::NuSequence::power_log(3.0), xi),
          models::DiffusionSpec::uniform(1.0, 2.0)};
}

bool has_reason(const diag::Verdict& v, const std::string& needle) {
  return std::any_of(v.reasons.begin(), v.reasons.end(),
                     [&](const std::string& r) { return r.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("L1 distance between grids") {
  engine::DensityGrid a, b;
  a.u = b.u = {0.0, 1.0, 2.0};
  a.f = {0.0, 1.0, 0.0};
  b.f = {0.0, 0.5, 0.0};
  const auto r = diag::l1_distance_checked(a, b);
  CHECK(r.value == doctest::Approx(0.5));
  CHECK_FALSE(r.resampled);
  CHECK(diag::l1_distance(a, a) == 0.0);

  // Different abscissae: resampled onto the union.
  engine::DensityGrid c;
  c.u = {0.0, 0.5, 1.0, 1.5, 2.0};
  c.f = {0.0, 0.5, 1.0, 0.5, 0.0};
  const auto r2 = diag::l1_distance_checked(a, c);
  CHECK(r2.resampled);
  CHECK(r2.value == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("grid moments") {
  engine::DensityGrid g;
  for (int i = -400; i <= 400; ++i) {
    const double u = 1.0 + 0.02 * i;
    g.u.push_back(u);
    g.f.push_back(oracle::normal_pdf(u, 1.0, 0.25));
  }
  const auto m = diag::density_moments(g);
  CHECK(m.mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(m.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.variance == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("exact Brownian-bridge moments against the closed form") {
  const auto d = models::DiffusionSpec::uniform(1.0, 2.0);
  for (auto [x, t] : {std::pair{0.5, 0.1}, std::pair{0.7, 0.3}, std::pair{0.7, 1.0}}) {
    const auto m = diag::exact_bb_moments(EvalPoint::make(x, t), 3, d);
    CHECK(m.mean == 0.0);
    CHECK(m.variance == doctest::Approx(oracle::bb_variance(3, x, t, 1.0, 2.0)).epsilon(1e-12));
  }
  CHECK(diag::exact_bb_moments(EvalPoint::make(0.5, 0.1), 3, d).variance == doctest::Approx(0.012280).epsilon(1e-4));
  CHECK(diag::expected_decay(d, 3.0) == doctest::Approx(oracle::uniform_decay(3.0, 1.0, 2.0)).epsilon(1e-14));
}

TEST_CASE("Lipschitz estimates") {
  const auto smooth = diag::lipschitz_estimate(models::ScalarDensity::quartic_tail(), "f_xi1");
  CHECK(smooth.applicable);
  CHECK(smooth.bounded);
  // max |d/dz sqrt(2) / (pi (1 + z^4))| by brute force.
  double best = 0.0;
  for (int i = 1; i < 400000; ++i) {
    const double z = i * 1e-5;
    const double d = std::sqrt(2.0) / oracle::pi * 4.0 * z * z * z / std::pow(1.0 + z * z * z * z, 2);
    best = std::max(best, d);
  }
  CHECK(smooth.estimate == doctest::Approx(best).epsilon(1e-3));
  const auto jump = diag::lipschitz_estimate(models::ScalarDensity::uniform(-std::sqrt(3.0), std::sqrt(3.0)), "f_xi1");
  CHECK_FALSE(jump.bounded);
}

TEST_CASE("hypothesis verdicts for the Brownian bridge") {
  const auto r = diag::hypothesis_report(bb_bundle(), EvalPoint::make(0.5, 0.1), 3);
  CHECK(r.teor1.holds);
  CHECK(r.teor2.holds);
  CHECK(r.teor3.holds);
  CHECK(r.sigma_applicable);
  CHECK_FALSE(r.sigma_singular);
  // (Sigma_M^{-1})_{11} = pi^2 / 2 for every M.
  for (double v : r.sigma_inv_11) CHECK(v == doctest::Approx(oracle::pi * oracle::pi / 2.0).epsilon(1e-8));
  // T_N(phi_1) >= sqrt(2)/2 exp(-pi^2 b t) sin(pi x) with b = 2.
  CHECK(r.tn_phi1_lower_bound ==
        doctest::Approx(std::sqrt(2.0) / 2.0 * std::exp(-oracle::pi * oracle::pi * 2.0 * 0.1)).epsilon(1e-10));
  CHECK(std::isfinite(r.tail_sum_estimate));
}

TEST_CASE("hypothesis verdicts for the non-Lipschitz example") {
  const auto r = diag::hypothesis_report(sine_bundle(models::ScalarDensity::uniform(-std::sqrt(3.0), std::sqrt(3.0))),
                                         EvalPoint::make(0.5, 0.3), 3);
  CHECK_FALSE(r.teor2.holds);
  CHECK_FALSE(r.teor3.holds);
  CHECK(has_reason(r.teor2, "f_A1 not Lipschitz"));
  CHECK(has_reason(r.teor3, "f_xi1 not Lipschitz"));
  CHECK_FALSE(r.lipschitz_a1.bounded);
}

TEST_CASE("hypothesis verdicts for Brownian motion") {
  const auto bm = engine::ModelBundle{models::make_brownian_motion_process(), models::DiffusionSpec::uniform(1.0, 2.0)};
  const auto r = diag::hypothesis_report(bm, EvalPoint::make(0.5, 0.1), 3);
  CHECK(has_reason(r.teor2, "not independent"));
  // The coefficient covariance is positive definite and (Sigma_M^{-1})_{11}
  // increases to pi^2 / 2, so the Gaussian theorem's hypotheses hold.
  CHECK_FALSE(r.sigma_singular);
  for (std::size_t M = 1; M <= r.sigma_inv_11.size(); ++M)
    CHECK(r.sigma_inv_11[M - 1] == doctest::Approx(oracle::bm_sigma_inv_11(M)).epsilon(1e-8));
  CHECK(r.teor1.holds);
}

TEST_CASE("trend classification") {
  CHECK(diag::classify({0.5, 0.2, 0.01}) == diag::Trend::converging);
  CHECK(diag::classify({0.19, 1.86}) == diag::Trend::diverging);
  CHECK(diag::classify({0.01, 0.2, 0.05}) == diag::Trend::stalled);
  CHECK(diag::classify({0.3, 0.2}) == diag::Trend::stalled);
  CHECK(diag::to_string(diag::Trend::diverging) == "diverging");
}

TEST_CASE("convergence report on shared abscissae") {
  engine::QuadConfig q;
  const auto rep = diag::convergence_report(EvalPoint::make(0.5, 0.1), {2, 3, 4}, Method::fourier_indep,
                                            sine_bundle(models::ScalarDensity::quartic_tail()), q);
  REQUIRE(rep.pairs.size() == 2);
  REQUIRE(rep.grids.size() == 3);
  CHECK(rep.grids[0].u == rep.grids[2].u);
  // At x = 1/2 the even modes vanish, so u_2 = u_1 and u_4 = u_3.
  CHECK(rep.pairs[1].l1 < 1e-12);
  CHECK(rep.verdict == diag::Trend::converging);
  CHECK_THROWS_AS(diag::convergence_report(EvalPoint::make(0.5, 0.1), {3}, Method::fourier_indep,
                                           sine_bundle(models::ScalarDensity::quartic_tail()), q),
                  DomainError);
}
