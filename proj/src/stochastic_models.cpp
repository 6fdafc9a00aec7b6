#include "heatdens/stochastic_models.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"
#include "heatdens/series_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace heatdens::models {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : kInf;
}

// 4 * int_0^1 int_0^1 k(y, z) sin(n pi y) sin(m pi z) dy dz with the square cut
// along the diagonal, where kernels like min(y, z) have a kink.
double kernel_sine_integral(const std::function<double(double, double)>& k, std::size_t n, std::size_t m) {
  static const quad::Rule rule = quad::gauss_legendre(128);
  const double wn = static_cast<double>(n) * kPi;
  const double wm = static_cast<double>(m) * kPi;
  double outer = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double z = 0.5 * (rule.x[i] + 1.0);
    double inner_lo = 0.0;
    double inner_hi = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double ylo = 0.5 * z * (rule.x[j] + 1.0);
      const double yhi = z + 0.5 * (1.0 - z) * (rule.x[j] + 1.0);
      inner_lo += rule.w[j] * k(ylo, z) * std::sin(wn * ylo);
      inner_hi += rule.w[j] * k(yhi, z) * std::sin(wn * yhi);
    }
    const double inner = 0.5 * z * inner_lo + 0.5 * (1.0 - z) * inner_hi;
    outer += rule.w[i] * inner * std::sin(wm * z);
  }
  return 4.0 * 0.5 * outer;
}

}  // namespace

DiffusionSpec DiffusionSpec::uniform(double lo, double hi) {
  if (!(lo > 0.0) || !std::isfinite(lo)) throw DomainError("diffusion lower bound must be positive");
  if (!(hi >= lo) || !std::isfinite(hi)) throw DomainError("diffusion upper bound must be >= lower bound");
  if (lo == hi) return DiffusionSpec{ScalarDensity::dirac(lo), lo, hi};
  return DiffusionSpec{ScalarDensity::uniform(lo, hi), lo, hi};
}

std::string DiffusionSpec::describe() const {
  return degenerate() ? "point(" + num(lo) + ")" : "uniform(" + num(lo) + "," + num(hi) + ")";
}

NuSequence NuSequence::finite(std::vector<double> values) {
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("nu values must be finite and nonnegative");
  NuSequence s;
  s.name_ = "finite(" + std::to_string(values.size()) + ")";
  auto shared = std::make_shared<const std::vector<double>>(std::move(values));
  s.length_ = shared->size();
  s.value_ = [shared](std::size_t j) { return j <= shared->size() ? (*shared)[j - 1] : 0.0; };
  s.tail_ = [shared](std::size_t m) {
    double acc = 0.0;
    for (std::size_t j = m; j < shared->size(); ++j) acc += (*shared)[j];
    return acc;
  };
  return s;
}

NuSequence NuSequence::brownian_bridge() {
  NuSequence s;
  s.name_ = "brownian_bridge";
  s.value_ = [](std::size_t j) {
    const double jj = static_cast<double>(j);
    return 1.0 / (kPi * kPi * jj * jj);
  };
  s.tail_ = [](std::size_t m) { return m == 0 ? 1.0 / 6.0 : 1.0 / (kPi * kPi * static_cast<double>(m)); };
  return s;
}

NuSequence NuSequence::brownian_motion() {
  NuSequence s;
  s.name_ = "brownian_motion";
  s.value_ = [](std::size_t j) {
    const double h = static_cast<double>(j) - 0.5;
    return 1.0 / (h * h * kPi * kPi);
  };
  // sum_{j > m} 1/(j - 1/2)^2 <= 1/(m - 1/2) for m >= 1; the full sum is 1/2.
  s.tail_ = [](std::size_t m) { return m == 0 ? 0.5 : 1.0 / ((static_cast<double>(m) - 0.5) * kPi * kPi); };
  return s;
}

NuSequence NuSequence::power_log(double p, double c) {
  if (!(c > 0.0)) throw DomainError("nu rule needs a positive constant");
  NuSequence s;
  s.name_ = "power_log(" + num(p) + "," + num(c) + ")";
  s.value_ = [p, c](std::size_t j) {
    const double jj = static_cast<double>(j);
    return c / (std::pow(jj, p) * (1.0 + std::log(jj)));
  };
  s.tail_ = [p, c](std::size_t m) {
    if (!(p > 1.0)) return kInf;
    if (m == 0) return c + c / (p - 1.0);
    const double mm = static_cast<double>(m);
    return c * std::pow(mm, 1.0 - p) / ((p - 1.0) * (1.0 + std::log(mm)));
  };
  return s;
}

NuSequence NuSequence::power(double p, double c) {
  if (!(c > 0.0)) throw DomainError("nu rule needs a positive constant");
  NuSequence s;
  s.name_ = "power(" + num(p) + "," + num(c) + ")";
  s.value_ = [p, c](std::size_t j) { return c / std::pow(static_cast<double>(j), p); };
  s.tail_ = [p, c](std::size_t m) {
    if (!(p > 1.0)) return kInf;
    if (m == 0) return c + c / (p - 1.0);
    return c * std::pow(static_cast<double>(m), 1.0 - p) / (p - 1.0);
  };
  return s;
}

NuSequence NuSequence::constant(double c) {
  NuSequence s;
  s.name_ = "constant(" + num(c) + ")";
  s.value_ = [c](std::size_t) { return c; };
  s.tail_ = [c](std::size_t) { return c == 0.0 ? 0.0 : kInf; };
  return s;
}

double NuSequence::operator()(std::size_t j) const {
  if (j == 0) throw DomainError("nu index is 1-based");
  return value_(j);
}

double NuSequence::tail_bound(std::size_t m) const { return tail_(m); }

bool NuSequence::summable() const {
  if (!value_) return false;
  const double t = tail_(1);
  return std::isfinite(t) && std::isfinite(value_(1));
}

double eigen_norm_sq(const EigenPair& pair) {
  static const quad::Rule rule = quad::gauss_legendre(256, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = pair.phi(rule.x[i]);
    acc += rule.w[i] * v * v;
  }
  return acc;
}

EigenPair ProcessSpec::eigenpair(std::size_t m) const {
  auto fn = phi_fn;
  return EigenPair{nu(m), [fn, m](double y) { return fn(m, y); }};
}

double ProcessSpec::phi_hat(std::size_t m, std::size_t n) const {
  if (phi_hat_fn) return phi_hat_fn(m, n);
  auto fn = phi_fn;
  return series::sine_hat([&fn, m](double y) { return fn(m, y); }, n);
}

double ProcessSpec::mean_hat(std::size_t n) const {
  if (zero_mean) return 0.0;
  return series::sine_hat(mean_fn, n);
}

const ScalarDensity& ProcessSpec::xi_law(std::size_t m) const {
  if (xi_laws.size() == 1) return xi_laws.front();
  if (m == 0 || m > xi_laws.size()) throw DomainError("no law registered for xi_" + std::to_string(m));
  return xi_laws[m - 1];
}

double ProcessSpec::covariance(double y, double z) const {
  switch (kernel) {
    case Kernel::brownian_bridge:
      return std::min(y, z) - y * z;
    case Kernel::brownian_motion:
      return std::min(y, z);
    case Kernel::kl_synth:
      break;
  }
  double acc = 0.0;
  const std::size_t cap = nu.length().value_or(100000);
  for (std::size_t j = 1; j <= cap; ++j) {
    acc += nu(j) * phi_fn(j, y) * phi_fn(j, z);
    if (!nu.length() && nu.tail_bound(j) * 2.0 < 1e-12) break;
  }
  return acc;
}

std::string ProcessSpec::describe() const {
  std::string xi = xi_laws.empty() ? "none" : xi_laws.front().describe();
  return name + "[nu=" + nu.describe() + ",xi=" + xi + "]";
}

ProcessSpec make_brownian_bridge_process() {
  ProcessSpec p;
  p.name = "brownian_bridge";
  p.mean_fn = [](double) { return 0.0; };
  p.nu = NuSequence::brownian_bridge();
  p.basis = ProcessSpec::Basis::sine;
  p.kernel = ProcessSpec::Kernel::brownian_bridge;
  p.phi_fn = [](std::size_t m, double y) {
    return std::numbers::sqrt2 * std::sin(static_cast<double>(m) * kPi * y);
  };
  p.phi_hat_fn = [](std::size_t m, std::size_t n) { return m == n ? std::numbers::sqrt2 / 2.0 : 0.0; };
  p.xi_laws = {ScalarDensity::normal()};
  p.independence_flag = true;
  p.gaussian_flag = true;
  return p;
}

ProcessSpec make_brownian_motion_process() {
  ProcessSpec p;
  p.name = "brownian_motion";
  p.mean_fn = [](double) { return 0.0; };
  p.nu = NuSequence::brownian_motion();
  p.basis = ProcessSpec::Basis::other;
  p.kernel = ProcessSpec::Kernel::brownian_motion;
  p.phi_fn = [](std::size_t m, double y) {
    return std::numbers::sqrt2 * std::sin((static_cast<double>(m) - 0.5) * kPi * y);
  };
  // int_0^1 sin(k pi y) sin(n pi y) dy with k = m - 1/2 is (-1)^(m-1+n) n / (pi (k^2 - n^2)).
  p.phi_hat_fn = [](std::size_t m, std::size_t n) {
    const double k = static_cast<double>(m) - 0.5;
    const double nn = static_cast<double>(n);
    const double sign = ((m - 1 + n) % 2 == 0) ? 1.0 : -1.0;
    return std::numbers::sqrt2 * sign * nn / (kPi * (k * k - nn * nn));
  };
  p.xi_laws = {ScalarDensity::normal()};
  p.independence_flag = true;
  p.gaussian_flag = true;
  return p;
}

ProcessSpec make_general_sine_process(NuSequence nu, ScalarDensity xi_law) {
  if (!nu.summable()) throw DomainError("eigenvalue sequence " + nu.describe() + " is not summable");
  if (nu(1) <= 0.0) throw DomainError("nu_1 must be positive");
  const NumericMoments mom = numeric_moments(xi_law);
  if (std::abs(mom.mean) > 1e-4 || std::abs(mom.variance - 1.0) > 1e-4) {
    throw DomainError("xi law " + xi_law.describe() + " must have mean 0 and variance 1 (got mean " +
                      num(mom.mean) + ", variance " + num(mom.variance) + ")");
  }
  ProcessSpec p;
  p.name = "general_sine";
  p.mean_fn = [](double) { return 0.0; };
  p.nu = std::move(nu);
  p.basis = ProcessSpec::Basis::sine;
  p.kernel = ProcessSpec::Kernel::kl_synth;
  p.phi_fn = [](std::size_t m, double y) {
    return std::numbers::sqrt2 * std::sin(static_cast<double>(m) * kPi * y);
  };
  p.phi_hat_fn = [](std::size_t m, std::size_t n) { return m == n ? std::numbers::sqrt2 / 2.0 : 0.0; };
  p.gaussian_flag = xi_law.family() == ScalarDensity::Family::normal;
  p.xi_laws = {std::move(xi_law)};
  p.independence_flag = true;
  return p;
}

double fourier_coeff_mean(const ProcessSpec& process, std::size_t n) {
  if (n == 0) throw DomainError("Fourier index is 1-based");
  return 2.0 * process.mean_hat(n);
}

double fourier_coeff_cov(const ProcessSpec& process, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw DomainError("Fourier index is 1-based");
  // Evaluate on the canonical ordering so the result is symmetric bit for bit.
  const std::size_t a = std::min(n, m);
  const std::size_t b = std::max(n, m);
  switch (process.kernel) {
    case ProcessSpec::Kernel::brownian_bridge:
    case ProcessSpec::Kernel::brownian_motion:
      return kernel_sine_integral([&process](double y, double z) { return process.covariance(y, z); }, a, b);
    case ProcessSpec::Kernel::kl_synth:
      break;
  }
  if (process.basis == ProcessSpec::Basis::sine) return a == b ? 2.0 * process.nu(a) : 0.0;
  // 4 sum_j nu_j phi_j^(a) phi_j^(b); |phi_j^(n)| <= 1/sqrt(2) bounds the tail by 2 tail_bound.
  double acc = 0.0;
  const std::size_t cap = process.nu.length().value_or(100000);
  for (std::size_t j = 1; j <= cap; ++j) {
    acc += 4.0 * process.nu(j) * process.phi_hat(j, a) * process.phi_hat(j, b);
    if (!process.nu.length() && 2.0 * process.nu.tail_bound(j) < 1e-12) break;
  }
  return acc;
}

const IndependentCoeffs& CoeffModel::indep() const {
  if (!independent()) throw WrongModelError("coefficient model is joint Gaussian, independent form required");
  return std::get<IndependentCoeffs>(form);
}

const JointGaussianCoeffs& CoeffModel::joint() const {
  if (independent()) throw WrongModelError("coefficient model is independent, joint Gaussian form required");
  return std::get<JointGaussianCoeffs>(form);
}

std::string CoeffModel::describe() const {
  std::ostringstream os;
  os << "N=" << N;
  if (independent()) {
    os << ";independent";
    for (const auto& m : indep().marginals) os << ";" << m.describe();
  } else {
    const auto& j = joint();
    os << ";joint_gaussian;mu=";
    for (Eigen::Index i = 0; i < j.mu.size(); ++i) os << (i ? "," : "") << num(j.mu(i));
    os << ";sigma=";
    for (Eigen::Index i = 0; i < j.sigma.rows(); ++i)
      for (Eigen::Index k = 0; k < j.sigma.cols(); ++k) os << (i || k ? "," : "") << num(j.sigma(i, k));
  }
  return os.str();
}

CoeffModel CoeffModel::make_independent(std::vector<ScalarDensity> marginals) {
  if (marginals.empty()) throw DomainError("coefficient model needs N >= 1");
  CoeffModel c;
  c.N = marginals.size();
  c.form = IndependentCoeffs{std::move(marginals)};
  return c;
}

CoeffModel CoeffModel::make_joint_gaussian(Eigen::VectorXd mu, Eigen::MatrixXd sigma) {
  if (mu.size() == 0 || sigma.rows() != mu.size() || sigma.cols() != mu.size())
    throw DomainError("joint Gaussian model: mean and covariance dimensions disagree");
  Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-12) {
    throw DegeneracyError("covariance matrix is not positive semidefinite (smallest eigenvalue " + num(lo) + ")",
                          kInf);
  }
  if (lo < 0.0) {
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    sym = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    sym = 0.5 * (sym + sym.transpose()).eval();
  }
  CoeffModel c;
  c.N = static_cast<std::size_t>(mu.size());
  c.form = JointGaussianCoeffs{std::move(mu), std::move(sym)};
  return c;
}

CoeffModel build_coeff_model(const ProcessSpec& process, std::size_t N) {
  if (N == 0) throw DomainError("coefficient model needs N >= 1");
  if (process.basis == ProcessSpec::Basis::sine && process.independence_flag) {
    std::vector<ScalarDensity> marginals;
    marginals.reserve(N);
    for (std::size_t n = 1; n <= N; ++n) {
      const double shift = fourier_coeff_mean(process, n);
      const double nu = process.nu(n);
      if (nu > 0.0)
        marginals.push_back(process.xi_law(n).affine(std::sqrt(2.0 * nu), shift));
      else
        marginals.push_back(ScalarDensity::dirac(shift));
    }
    return CoeffModel::make_independent(std::move(marginals));
  }
  if (process.gaussian_flag) return build_joint_gaussian_model(process, N);
  throw UnsupportedLawError("non-Gaussian process " + process.name + " has no tractable coefficient law");
}

CoeffModel build_joint_gaussian_model(const ProcessSpec& process, std::size_t N) {
  if (N == 0) throw DomainError("coefficient model needs N >= 1");
  if (!process.gaussian_flag) throw WrongModelError("process " + process.name + " is not Gaussian");
  Eigen::VectorXd mu(N);
  Eigen::MatrixXd sigma(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    mu(i) = fourier_coeff_mean(process, i + 1);
    for (std::size_t j = i; j < N; ++j) {
      sigma(i, j) = fourier_coeff_cov(process, i + 1, j + 1);
      sigma(j, i) = sigma(i, j);
    }
  }
  return CoeffModel::make_joint_gaussian(std::move(mu), std::move(sigma));
}

ConditionalGaussian gaussian_conditional_params(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                                std::size_t head_dim, const Eigen::VectorXd& tail_value) {
  const Eigen::Index n = mu.size();
  const Eigen::Index h = static_cast<Eigen::Index>(head_dim);
  if (sigma.rows() != n || sigma.cols() != n) throw DomainError("conditional: dimension mismatch");
  if (h < 1 || h >= n) throw DomainError("conditional: head_dim must lie in [1, dim - 1]");
  if (tail_value.size() != n - h) throw DomainError("conditional: tail value has the wrong length");

  const Eigen::MatrixXd s11 = sigma.topLeftCorner(h, h);
  const Eigen::MatrixXd s12 = sigma.topRightCorner(h, n - h);
  const Eigen::MatrixXd s21 = sigma.bottomLeftCorner(n - h, h);
  const Eigen::MatrixXd s22 = sigma.bottomRightCorner(n - h, n - h);

  const double cond22 = condition_number(s22);
  if (!(cond22 <= 1e12)) {
    throw DegeneracyError("singular covariance: conditioning block has condition number " + num(cond22), cond22);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(s22);
  ConditionalGaussian out;
  out.gain = ldlt.solve(s21).transpose();
  out.mean = mu.head(h) + out.gain * (tail_value - mu.tail(n - h));
  out.cov = s11 - out.gain * s21;
  (void)s12;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.cov, Eigen::EigenvaluesOnly);
  const double scale = s11.diagonal().cwiseAbs().maxCoeff();
  const double low = es.eigenvalues().minCoeff();
  if (!(low > 1e-12 * scale)) {
    const double cond = low > 0.0 ? scale / low : kInf;
    throw DegeneracyError("singular covariance: degenerate conditional variance (smallest eigenvalue " + num(low) +
                              ")",
                          cond);
  }
  return out;
}

double sigma_inv_11(const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  if (n == 0 || sigma.cols() != n) throw DomainError("sigma_inv_11: square matrix required");
  const Eigen::LLT<Eigen::MatrixXd> full(sigma);
  if (full.info() != Eigen::Success) {
    const double cond = condition_number(sigma);
    throw DegeneracyError("singular covariance: matrix is not positive definite (condition number " + num(cond) + ")",
                          cond);
  }
  if (n == 1) return 1.0 / sigma(0, 0);
  const Eigen::MatrixXd rest = sigma.bottomRightCorner(n - 1, n - 1);
  const Eigen::VectorXd col = sigma.col(0).tail(n - 1);
  const Eigen::LLT<Eigen::MatrixXd> llt(rest);
  const double schur = sigma(0, 0) - col.dot(llt.solve(col));
  if (!(schur > 1e-14 * std::abs(sigma(0, 0)))) {
    const double cond = condition_number(sigma);
    throw DegeneracyError("singular covariance: vanishing Schur complement (condition number " + num(cond) + ")",
                          cond);
  }
  return 1.0 / schur;
}

}  // namespace heatdens::models
