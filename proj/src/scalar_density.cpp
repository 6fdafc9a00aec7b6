#include "heatdens/scalar_density.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace heatdens::models {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Envelope constant for rejection from a standard Cauchy proposal:
// sup_z sqrt(2)(1+z^2)/(1+z^4) = (2 + sqrt 2)/2, attained at z^2 = sqrt(2) - 1.
constexpr double kQuarticEnvelope = 1.0 + 1.0 / std::numbers::sqrt2;

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool Support::contains(double u) const noexcept {
  switch (kind) {
    case Kind::compact:
      return u >= lo && u <= hi;
    case Kind::half_line:
      return u >= lo;
    case Kind::whole_line:
      return true;
  }
  return false;
}

ScalarDensity ScalarDensity::normal(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
    throw DomainError("normal law needs finite mean and positive sd");
  return ScalarDensity(Family::normal, mean, sd, TailClass::gaussian, "normal");
}

ScalarDensity ScalarDensity::uniform(double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("uniform law needs finite lo < hi");
  return ScalarDensity(Family::uniform, 0.5 * (lo + hi), 0.5 * (hi - lo), TailClass::compact, "uniform");
}

ScalarDensity ScalarDensity::quartic_tail() {
  return ScalarDensity(Family::quartic, 0.0, 1.0, TailClass::heavy, "quartic");
}

ScalarDensity ScalarDensity::dirac(double at) {
  return ScalarDensity(Family::dirac, at, 1.0, TailClass::compact, "dirac");
}

ScalarDensity ScalarDensity::custom(std::function<double(double)> pdf, Support support, TailClass tail,
                                    std::optional<Moments> moments, std::string name) {
  if (!pdf) throw DomainError("custom law needs a density function");
  ScalarDensity d(Family::custom, 0.0, 1.0, tail, std::move(name));
  d.custom_pdf_ = std::make_shared<const std::function<double(double)>>(std::move(pdf));
  d.custom_support_ = support;
  d.custom_moments_ = moments;
  return d;
}

double ScalarDensity::base_pdf(double z) const {
  switch (family_) {
    case Family::normal:
      return kInvSqrt2Pi * std::exp(-0.5 * z * z);
    case Family::uniform:
      return std::abs(z) <= 1.0 ? 0.5 : 0.0;
    case Family::quartic: {
      const double z2 = z * z;
      return std::numbers::sqrt2 / std::numbers::pi / (1.0 + z2 * z2);
    }
    case Family::dirac:
      return 0.0;
    case Family::custom:
      return custom_support_.contains(z) ? (*custom_pdf_)(z) : 0.0;
  }
  return 0.0;
}

double ScalarDensity::evaluate(double u) const {
  if (family_ == Family::dirac) return 0.0;
  return base_pdf((u - location_) / scale_) / scale_;
}

ScalarDensity ScalarDensity::affine(double factor, double shift) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("affine: factor must be positive");
  ScalarDensity d = *this;
  d.location_ = shift + factor * location_;
  if (family_ != Family::dirac) d.scale_ = factor * scale_;
  return d;
}

Support ScalarDensity::support() const {
  Support base;
  switch (family_) {
    case Family::normal:
    case Family::quartic:
      return Support{Support::Kind::whole_line, 0.0, 0.0};
    case Family::uniform:
      base = Support{Support::Kind::compact, -1.0, 1.0};
      break;
    case Family::dirac:
      return Support{Support::Kind::compact, location_, location_};
    case Family::custom:
      base = custom_support_;
      break;
  }
  if (base.kind == Support::Kind::whole_line) return base;
  Support s = base;
  s.lo = location_ + scale_ * base.lo;
  s.hi = location_ + scale_ * base.hi;
  return s;
}

std::optional<Moments> ScalarDensity::moments_hint() const {
  std::optional<Moments> base;
  switch (family_) {
    case Family::normal:
    case Family::quartic:
      base = Moments{0.0, 1.0};
      break;
    case Family::uniform:
      base = Moments{0.0, 1.0 / 3.0};
      break;
    case Family::dirac:
      return Moments{location_, 0.0};
    case Family::custom:
      base = custom_moments_;
      break;
  }
  if (!base) return std::nullopt;
  return Moments{location_ + scale_ * base->mean, scale_ * scale_ * base->variance};
}

bool ScalarDensity::symmetric() const noexcept {
  return family_ != Family::custom && location_ == 0.0;
}

std::optional<simd::Profile> ScalarDensity::profile() const noexcept {
  switch (family_) {
    case Family::normal:
      return simd::Profile::gaussian;
    case Family::uniform:
      return simd::Profile::box;
    case Family::quartic:
      return simd::Profile::quartic;
    default:
      return std::nullopt;
  }
}

double ScalarDensity::profile_norm() const noexcept {
  switch (family_) {
    case Family::normal:
      return kInvSqrt2Pi;
    case Family::uniform:
      return 0.5;
    case Family::quartic:
      return std::numbers::sqrt2 / std::numbers::pi;
    default:
      return 1.0;
  }
}

double ScalarDensity::sample_base(rng::Engine& engine) const {
  switch (family_) {
    case Family::normal: {
      const double p = rng::uniform_open(engine);
      return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    }
    case Family::uniform:
      return 2.0 * rng::uniform_open(engine) - 1.0;
    case Family::quartic:
      for (;;) {
        const double z = std::tan(std::numbers::pi * (rng::uniform_open(engine) - 0.5));
        const double z2 = z * z;
        const double accept = std::numbers::sqrt2 * (1.0 + z2) / (kQuarticEnvelope * (1.0 + z2 * z2));
        if (rng::uniform_open(engine) <= accept) return z;
      }
    case Family::dirac:
      return 0.0;
    case Family::custom:
      break;
  }
  throw UnsupportedLawError("no sampler registered for law '" + name_ + "'");
}

double ScalarDensity::sample(rng::Engine& engine) const {
  if (family_ == Family::dirac) return location_;
  return location_ + scale_ * sample_base(engine);
}

std::string ScalarDensity::describe() const {
  return name_ + "(" + fmt_num(location_) + "," + fmt_num(scale_) + ")";
}

double integrate_against(const ScalarDensity& law, const std::function<double(double)>& g) {
  if (!law.absolutely_continuous()) return g(law.location());
  const Support s = law.support();
  if (s.kind == Support::Kind::compact) {
    const quad::Rule r = quad::gauss_legendre(256, s.lo, s.hi);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) acc += r.w[i] * g(r.x[i]) * law(r.x[i]);
    return acc;
  }
  const double loc = law.location();
  const double sc = law.scale();
  auto integrand = [&](double theta) {
    const double c = std::cos(theta);
    const double u = loc + sc * std::tan(theta);
    const double dens = law(u);
    if (dens == 0.0) return 0.0;
    return g(u) * dens * sc / (c * c);
  };
  double lo = -0.5 * std::numbers::pi;
  if (s.kind == Support::Kind::half_line) lo = std::atan((s.lo - loc) / sc);
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return GK::integrate(integrand, lo, 0.5 * std::numbers::pi, 20, 1e-13);
}

NumericMoments numeric_moments(const ScalarDensity& law) {
  const double mass = integrate_against(law, [](double) { return 1.0; });
  const double m1 = integrate_against(law, [](double u) { return u; });
  const double mean = m1 / mass;
  const double var = integrate_against(law, [mean](double u) { return (u - mean) * (u - mean); }) / mass;
  return {mass, mean, var};
}

}  // namespace heatdens::models
