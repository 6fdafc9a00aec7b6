#pragma once

#include "heatdens/scalar_density.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace heatdens::models {

// Law of the diffusion coefficient alpha^2, supported on [lo, hi] with lo > 0.
// lo == hi is allowed and gives a point mass.
struct DiffusionSpec {
  ScalarDensity law;
  double lo;
  double hi;

  static DiffusionSpec uniform(double lo, double hi);
  bool degenerate() const noexcept { return lo == hi; }
  std::string describe() const;
};

// Eigenvalue sequence nu_1, nu_2, ... of a covariance operator, either a
// finite list or a closed-form rule together with an analytic bound on
// its tail sum_{j > M} nu_j.
class NuSequence {
 public:
  static NuSequence finite(std::vector<double> values);
  static NuSequence brownian_bridge();                      // 1 / (pi^2 j^2)
  static NuSequence brownian_motion();                      // 1 / ((j - 1/2)^2 pi^2)
  static NuSequence power_log(double p, double c = 1.0);    // c / (j^p (1 + log j))
  static NuSequence power(double p, double c = 1.0);        // c / j^p
  static NuSequence constant(double c);                     // c (never summable)

  // j is 1-based.
  double operator()(std::size_t j) const;
  // Upper bound on sum_{j > m} nu_j; +inf when the series diverges.
  double tail_bound(std::size_t m) const;
  std::optional<std::size_t> length() const noexcept { return length_; }
  bool summable() const;
  const std::string& describe() const noexcept { return name_; }

 private:
  std::string name_;
  std::function<double(std::size_t)> value_;
  std::function<double(std::size_t)> tail_;
  std::optional<std::size_t> length_;
};

struct EigenPair {
  double nu;
  std::function<double(double)> phi;
};

// Integral of phi^2 over [0, 1]; 1 for an orthonormal eigenfunction.
double eigen_norm_sq(const EigenPair& pair);

// Initial-condition process on [0, 1] described by its mean and
// Karhunen-Loeve data.
struct ProcessSpec {
  enum class Basis { sine, other };  // sine: phi_m = sqrt(2) sin(m pi y)
  enum class Kernel { brownian_bridge, brownian_motion, kl_synth };

  std::string name;
  std::function<double(double)> mean_fn;
  bool zero_mean = true;
  NuSequence nu;
  Basis basis = Basis::sine;
  Kernel kernel = Kernel::kl_synth;
  std::function<double(std::size_t, double)> phi_fn;
  // Closed-form sine coefficients of phi_m, when known.
  std::function<double(std::size_t, std::size_t)> phi_hat_fn;
  // Laws of xi_m; a single entry means iid.
  std::vector<ScalarDensity> xi_laws;
  bool independence_flag = true;
  bool gaussian_flag = false;

  EigenPair eigenpair(std::size_t m) const;
  double phi(std::size_t m, double y) const { return phi_fn(m, y); }
  // int_0^1 phi_m(y) sin(n pi y) dy.
  double phi_hat(std::size_t m, std::size_t n) const;
  // int_0^1 mu_phi(y) sin(n pi y) dy.
  double mean_hat(std::size_t n) const;
  const ScalarDensity& xi_law(std::size_t m) const;
  // Cov[phi(y), phi(z)].
  double covariance(double y, double z) const;
  std::string describe() const;
};

ProcessSpec make_brownian_bridge_process();
ProcessSpec make_brownian_motion_process();
ProcessSpec make_general_sine_process(NuSequence nu, ScalarDensity xi_law);

// E[A_n] = 2 int_0^1 mu_phi(y) sin(n pi y) dy.
double fourier_coeff_mean(const ProcessSpec& process, std::size_t n);
// Cov[A_n, A_m] = 4 int int Cov[phi(y), phi(z)] sin(n pi y) sin(m pi z).
double fourier_coeff_cov(const ProcessSpec& process, std::size_t n, std::size_t m);

struct IndependentCoeffs {
  std::vector<ScalarDensity> marginals;
};

struct JointGaussianCoeffs {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

// Joint law of (A_1, ..., A_N).
struct CoeffModel {
  std::variant<IndependentCoeffs, JointGaussianCoeffs> form;
  std::size_t N = 0;

  bool independent() const noexcept { return std::holds_alternative<IndependentCoeffs>(form); }
  const IndependentCoeffs& indep() const;
  const JointGaussianCoeffs& joint() const;
  std::string describe() const;

  static CoeffModel make_independent(std::vector<ScalarDensity> marginals);
  // Symmetrizes sigma and clips eigenvalues in [-1e-12, 0) to zero; more
  // negative eigenvalues are rejected.
  static CoeffModel make_joint_gaussian(Eigen::VectorXd mu, Eigen::MatrixXd sigma);
};

// Independent marginals for sine-basis processes, the joint Gaussian form
// otherwise.
CoeffModel build_coeff_model(const ProcessSpec& process, std::size_t N);
// Joint Gaussian form regardless of basis (Gaussian processes only).
CoeffModel build_joint_gaussian_model(const ProcessSpec& process, std::size_t N);

struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  // Sigma_12 Sigma_22^{-1}; mean = mu_1 + gain (a - mu_2).
  Eigen::MatrixXd gain;
};

// Law of the first head_dim coordinates given the rest equal tail_value.
ConditionalGaussian gaussian_conditional_params(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                                std::size_t head_dim, const Eigen::VectorXd& tail_value);

// (Sigma^{-1})_{11} through the Schur complement of the leading entry.
double sigma_inv_11(const Eigen::MatrixXd& sigma);

}  // namespace heatdens::models
