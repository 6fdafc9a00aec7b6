// Acceptance harness: one PASS/FAIL line per criterion, followed by the
// measured numbers. Criteria that cannot be met are reported as failures,
// with the observed values, rather than being relaxed.

#include "heatdens/diagnostics.hpp"
#include "heatdens/errors.hpp"
#include "heatdens/mc_oracle.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace heatdens;
using engine::Method;
using series::EvalPoint;

namespace {

struct Result {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within_factor(double got, double target, double factor) {
  return got > 0.0 && got <= target * factor && got >= target / factor;
}

bool within_rel(double got, double target, double rel) { return std::abs(got - target) <= rel * std::abs(target); }

engine::ModelBundle bb() { return {models::make_brownian_bridge_process(), models::DiffusionSpec::uniform(1.0, 2.0)}; }

engine::ModelBundle example2() {
  return {models::make_general_sine_process(models::NuSequence::power_log(3.0), models::ScalarDensity::quartic_tail()),
          models::DiffusionSpec::uniform(1.0, 2.0)};
}

engine::ModelBundle example3() {
  return {models::make_general_sine_process(models::NuSequence::power_log(3.0),
                                            models::ScalarDensity::uniform(-std::sqrt(3.0), std::sqrt(3.0))),
          models::DiffusionSpec::uniform(1.0, 2.0)};
}

engine::ModelBundle brownian_motion() {
  return {models::make_brownian_motion_process(), models::DiffusionSpec::uniform(1.0, 2.0)};
}

const std::vector<EvalPoint> kTablePoints{{0.5, 0.1}, {0.7, 0.3}, {0.7, 1.0}};

std::string at(const EvalPoint& p) { return "(" + sci(p.x) + "," + sci(p.t) + ")"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

engine::QuadConfig refined(double tol) {
  engine::QuadConfig q;
  q.refine = true;
  q.refine_tol = tol;
  return q;
}

// L1 between successive orders; a thrown library error becomes a miss.
std::optional<diag::ConvergenceReport> converge(Result& r, const EvalPoint& p, const std::vector<std::size_t>& orders,
                                                Method m, const engine::ModelBundle& b, const engine::QuadConfig& q) {
  try {
    return diag::convergence_report(p, orders, m, b, q);
  } catch (const Error& e) {
    r.check(false, std::string(engine::to_string(m)) + " at " + at(p) + " threw: " + e.what());
    return std::nullopt;
  }
}

Result criterion1() {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const double targets[] = {1.65393e-8, 2.51309e-7, 0.00734303};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto rep = converge(r, kTablePoints[i], {2, 3}, Method::bb_fast, bb(), refined(1e-10));
    if (!rep) continue;
    const double d = rep->pairs[0].l1;
    const bool ok = i < 2 ? within_factor(d, targets[i], 2.0) : within_rel(d, targets[i], 0.05);
    r.check(ok, "L1(u2,u3) at " + at(kTablePoints[i]) + " = " + sci(d) + ", target " + sci(targets[i]) +
                    (i < 2 ? " (factor 2)" : " (5%)"));
  }
  const double s = seconds_since(t0);
  r.check(s < 60.0, "runtime " + sci(s) + " s < 60 s");
  return r;
}

Result criterion2() {
  Result r;
  const double targets[] = {5.60959e-8, 1.14085e-7, 0.000148152};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto rep = converge(r, kTablePoints[i], {3, 4}, Method::kl, bb(), refined(1e-10));
    if (!rep) continue;
    const double d = rep->pairs[0].l1;
    const bool ok = i < 2 ? within_factor(d, targets[i], 2.0) : within_rel(d, targets[i], 0.05);
    r.check(ok, "L1(u33,u44) at " + at(kTablePoints[i]) + " = " + sci(d) + ", target " + sci(targets[i]) +
                    (i < 2 ? " (factor 2)" : " (5%)"));
  }
  return r;
}

Result criterion3() {
  Result r;
  const EvalPoint p{0.7, 1.0};
  if (auto rep = converge(r, p, {2, 3}, Method::fourier_indep, example2(), refined(1e-9)))
    r.check(within_rel(rep->pairs[0].l1, 0.000880742, 0.10),
            "L1(u2,u3) at (0.7,1) = " + sci(rep->pairs[0].l1) + ", target 0.000880742 (10%)");
  if (auto rep = converge(r, p, {3, 4}, Method::kl, example2(), refined(1e-9)))
    r.check(within_rel(rep->pairs[0].l1, 0.00346924, 0.10),
            "L1(u33,u44) at (0.7,1) = " + sci(rep->pairs[0].l1) + ", target 0.00346924 (10%)");
  return r;
}

Result criterion4() {
  Result r;
  const EvalPoint p{0.5, 0.3};
  auto rep = converge(r, p, {2, 3, 4}, Method::fourier_indep, example3(), refined(1e-8));
  if (!rep) return r;
  r.check(within_factor(rep->pairs[0].l1, 0.19156, 2.0),
          "L1(u2,u3) at (0.5,0.3) = " + sci(rep->pairs[0].l1) + ", target 0.19156 (factor 2)");
  r.check(within_factor(rep->pairs[1].l1, 1.86146, 2.0),
          "L1(u3,u4) at (0.5,0.3) = " + sci(rep->pairs[1].l1) + ", target 1.86146 (factor 2)");
  r.check(rep->verdict == diag::Trend::diverging, "verdict " + diag::to_string(rep->verdict) + ", expected diverging");
  return r;
}

Result criterion5() {
  Result r;
  const engine::QuadConfig q;
  struct Study {
    const char* name;
    engine::ModelBundle b;
    Method m;
    std::size_t N;
  };
  const std::vector<Study> studies{{"BB u3", bb(), Method::bb_fast, 3},
                                   {"BB u44", bb(), Method::kl, 4},
                                   {"Ex2 u3", example2(), Method::fourier_indep, 3},
                                   {"Ex2 u44", example2(), Method::kl, 4}};
  for (const auto& s : studies) {
    for (const auto& p : kTablePoints) {
      const auto g = engine::density_grid(p, s.N, s.m, s.b, q);
      const auto m = diag::density_moments(g);
      r.check(std::abs(m.mean) <= 1e-6, std::string(s.name) + " mean at " + at(p) + " = " + sci(m.mean));
      if (p.t == 1.0)
        r.check(m.variance <= 1e-6, std::string(s.name) + " variance at " + at(p) + " = " + sci(m.variance));
      if (s.name[0] == 'B' && p.t == 0.1) {
        const double exact = diag::exact_bb_moments(p, 3, s.b.diffusion).variance;
        r.check(within_rel(m.variance, exact, 0.003),
                std::string(s.name) + " variance " + sci(m.variance) + " vs exact " + sci(exact) + " (0.3%)");
        r.check(within_rel(m.variance, 0.0122708, 0.005),
                std::string(s.name) + " variance " + sci(m.variance) + " vs 0.0122708 (0.5%)");
      }
    }
  }
  return r;
}

Result criterion6() {
  Result r;
  const engine::QuadConfig q;
  for (const auto& p : kTablePoints) {
    for (std::size_t N : {3u, 4u}) {
      const auto kl = engine::density_grid(p, N, Method::kl, bb(), q);
      for (Method m : {Method::fourier_indep, Method::bb_fast}) {
        const auto fr = engine::density_grid(p, N - 1, m, bb(), q, engine::GridSpec::explicit_points(kl.u));
        const double d = diag::l1_distance(kl, fr);
        r.check(d <= 1e-6, "L1(kl N=" + std::to_string(N) + ", " + std::string(engine::to_string(m)) +
                               " N=" + std::to_string(N - 1) + ") at " + at(p) + " = " + sci(d));
      }
    }
  }
  return r;
}

Result criterion7() {
  Result r;
  const engine::QuadConfig q;
  struct Case {
    const char* name;
    engine::ModelBundle b;
    Method m;
    EvalPoint p;
  };
  for (const auto& c : {Case{"BB N=3", bb(), Method::bb_fast, {0.5, 0.1}},
                        Case{"Ex2 N=3", example2(), Method::fourier_indep, {0.7, 0.3}}}) {
    const auto g = engine::density_grid(c.p, 3, c.m, c.b, q);
    const auto s = mc::sample_solution(c.b, c.p, 3, 1000000, 2024);
    const double ks = mc::ecdf_distance(s, g);
    r.check(ks <= 0.005, std::string(c.name) + " at " + at(c.p) + ": KS = " + sci(ks) + " (<= 0.005, 1e6 samples)");
  }
  return r;
}

Result criterion8() {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const engine::QuadConfig q;
  struct Case {
    const char* name;
    engine::ModelBundle b;
    Method m;
    std::size_t N;
  };
  const std::vector<Case> cases{{"BB bb_fast", bb(), Method::bb_fast, 3},
                                {"BB kl", bb(), Method::kl, 4},
                                {"Ex2 fourier", example2(), Method::fourier_indep, 3},
                                {"Ex2 kl", example2(), Method::kl, 4},
                                {"Ex3 fourier", example3(), Method::fourier_indep, 3},
                                {"BM joint", brownian_motion(), Method::fourier_joint, 3}};
  double worst_mass = 0.0, worst_asym = 0.0, min_f = 0.0;
  for (const auto& c : cases) {
    for (const auto& p : kTablePoints) {
      const auto g = engine::density_grid(p, c.N, c.m, c.b, q);
      const double mass = oracle::trapezoid(g.u, g.f);
      worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
      double fmax = 0.0;
      for (double f : g.f) {
        min_f = std::min(min_f, f);
        fmax = std::max(fmax, f);
      }
      const std::size_t n = g.u.size();
      for (std::size_t i = 0; i < n; ++i) worst_asym = std::max(worst_asym, std::abs(g.f[i] - g.f[n - 1 - i]) / fmax);
    }
  }
  r.check(worst_mass <= 2e-3, "normalization: max |mass - 1| = " + sci(worst_mass));
  r.check(min_f >= 0.0, "nonnegativity: min density = " + sci(min_f));
  r.check(worst_asym <= 1e-8, "symmetry: max |f(u) - f(-u)| / max f = " + sci(worst_asym));

  for (std::size_t N = 2; N <= 6; ++N) {
    const auto cm = models::build_joint_gaussian_model(models::make_brownian_motion_process(), N);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cm.joint().sigma);
    lu.setThreshold(1e-10);
    r.check(lu.rank() == 1, "BM Sigma_" + std::to_string(N) + " numerical rank = " + std::to_string(lu.rank()) +
                                " (expected 1)");
  }

  for (const auto& c : {cases[0], cases[2]}) {
    double prev = INFINITY;
    bool decreasing = true;
    std::string vals;
    for (double t : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      const auto g = engine::density_grid({0.5, t}, c.N, c.m, c.b, q);
      const double v = diag::density_moments(g).variance;
      decreasing = decreasing && v < prev;
      prev = v;
      vals += " " + sci(v);
    }
    r.check(decreasing, std::string(c.name) + " variance strictly decreasing in t at x=0.5:" + vals);
  }
  const double s = seconds_since(t0);
  r.check(s < 300.0, "runtime " + sci(s) + " s < 300 s");
  return r;
}

bool has_reason(const diag::Verdict& v, const std::string& needle) {
  for (const auto& s : v.reasons)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string reasons(const diag::Verdict& v) {
  if (v.reasons.empty()) return "[]";
  std::string s = "[";
  for (std::size_t i = 0; i < v.reasons.size(); ++i) s += (i ? "; " : "") + v.reasons[i];
  return s + "]";
}

Result criterion9() {
  Result r;
  const EvalPoint p{0.5, 0.1};
  const auto rb = diag::hypothesis_report(bb(), p, 3);
  r.check(rb.teor1.holds && rb.teor2.holds && rb.teor3.holds,
          std::string("BB+U(1,2): teor1 ") + (rb.teor1.holds ? "true" : "false") + ", teor2 " +
              (rb.teor2.holds ? "true" : "false") + ", teor3 " + (rb.teor3.holds ? "true" : "false"));
  const auto r3 = diag::hypothesis_report(example3(), {0.5, 0.3}, 3);
  r.check(!r3.teor2.holds && has_reason(r3.teor2, "f_A1 not Lipschitz"), "Ex3 teor2 false: " + reasons(r3.teor2));
  r.check(!r3.teor3.holds && has_reason(r3.teor3, "f_xi1 not Lipschitz"), "Ex3 teor3 false: " + reasons(r3.teor3));
  const auto rm = diag::hypothesis_report(brownian_motion(), p, 3);
  std::string sig;
  for (double v : rm.sigma_inv_11) sig += " " + sci(v);
  r.check(!rm.teor1.holds && rm.sigma_singular,
          std::string("BM teor1 ") + (rm.teor1.holds ? "true" : "false") + " (expected false with a singularity " +
              "reason); (Sigma_M^-1)_11 for M=1.." + std::to_string(rm.sigma_checked_up_to) + ":" + sig);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criterion number(s) to run; all when omitted")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::function<Result()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                              criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  for (int k : which) {
    Result res;
    try {
      res = criteria[k - 1]();
    } catch (const std::exception& e) {
      res.check(false, std::string("unexpected exception: ") + e.what());
    }
    all = all && res.pass;
    std::printf("criterion %d: %s\n", k, res.pass ? "PASS" : "FAIL");
    for (const auto& l : res.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
