#pragma once

#include "heatdens/kernels.hpp"
#include "heatdens/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace heatdens::models {

enum class TailClass { gaussian, compact, heavy };

struct Support {
  enum class Kind { compact, whole_line, half_line } kind = Kind::whole_line;
  // Meaningful bounds only: [lo, hi] for compact, [lo, inf) for half_line.
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double u) const noexcept;
};

struct Moments {
  double mean;
  double variance;
};

// A one-dimensional probability density in location-scale form
//
//   pdf(u) = base((u - location) / scale) / scale
//
// over one of the standardized base families below. Affine images of a law
// stay in its family, which is how coefficient marginals A_n = c * xi_n are
// built without losing the kernel profile or the sampler.
class ScalarDensity {
 public:
  enum class Family {
    normal,   // standard normal
    uniform,  // uniform on [-1, 1]
    quartic,  // sqrt(2) / (pi (1 + z^4)); mean 0, variance 1
    dirac,    // point mass at 0 (no density)
    custom,
  };

  static ScalarDensity normal(double mean = 0.0, double sd = 1.0);
  static ScalarDensity uniform(double lo, double hi);
  static ScalarDensity quartic_tail();
  static ScalarDensity dirac(double at);
  // Arbitrary density given on the standardized axis. No sampler and no
  // SIMD profile; node rules fall back on the support descriptor.
  static ScalarDensity custom(std::function<double(double)> pdf, Support support, TailClass tail,
                              std::optional<Moments> moments, std::string name);

  double operator()(double u) const { return evaluate(u); }
  double evaluate(double u) const;

  // Law of shift + factor * X. factor must be positive.
  ScalarDensity affine(double factor, double shift = 0.0) const;

  Family family() const noexcept { return family_; }
  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }
  const std::string& name() const noexcept { return name_; }

  Support support() const;
  TailClass tail_class() const noexcept { return tail_; }
  // Analytic (mean, variance) when known.
  std::optional<Moments> moments_hint() const;

  bool absolutely_continuous() const noexcept { return family_ != Family::dirac; }
  bool symmetric() const noexcept;

  // Kernel profile g and constant c such that base(z) = c * g(z).
  std::optional<simd::Profile> profile() const noexcept;
  double profile_norm() const noexcept;
  // Density of the standardized base law.
  double base_pdf(double z) const;

  bool has_sampler() const noexcept { return family_ != Family::custom; }
  // Throws UnsupportedLawError for custom laws.
  double sample(rng::Engine& engine) const;
  double sample_base(rng::Engine& engine) const;

  // Short digest-friendly description, e.g. "normal(0,0.45)".
  std::string describe() const;

 private:
  ScalarDensity(Family f, double loc, double scale, TailClass tail, std::string name)
      : family_(f), location_(loc), scale_(scale), tail_(tail), name_(std::move(name)) {}

  Family family_;
  double location_;
  double scale_;
  TailClass tail_;
  std::string name_;
  std::shared_ptr<const std::function<double(double)>> custom_pdf_;
  Support custom_support_;
  std::optional<Moments> custom_moments_;
};

// Reference quadrature: integral of g(u) * pdf(u) over the support. Compact
// supports use Gauss-Legendre; unbounded ones the tangent substitution
// u = location + scale * tan(theta) with adaptive Gauss-Kronrod.
double integrate_against(const ScalarDensity& law, const std::function<double(double)>& g);

struct NumericMoments {
  double mass;
  double mean;
  double variance;
};

NumericMoments numeric_moments(const ScalarDensity& law);

}  // namespace heatdens::models
