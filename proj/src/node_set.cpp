#include "heatdens/node_set.hpp"

#include "heatdens/errors.hpp"
#include "heatdens/quadrature.hpp"
#include "heatdens/rng.hpp"
#include "parallel.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace heatdens::engine {
namespace {

using models::ScalarDensity;
using models::TailClass;

// Inner coordinates whose largest relative effect on the pivot argument is
// below this are replaced by their mean.
constexpr double kInactive = 1e-17;
// Tensor branches with probability weight below this are dropped.
constexpr double kPrune = 1e-20;

struct Rule1 {
  std::vector<double> x;
  std::vector<double> w;
};

Rule1 alpha_rule(const models::DiffusionSpec& d, std::size_t order) {
  if (d.degenerate()) return {{d.lo}, {1.0}};
  quad::Rule r = quad::gauss_legendre(order, d.lo, d.hi);
  for (std::size_t i = 0; i < r.size(); ++i) r.w[i] *= d.law(r.x[i]);
  return {std::move(r.x), std::move(r.w)};
}

Rule1 inner_rule(const ScalarDensity& law, const QuadConfig& q) {
  if (!law.absolutely_continuous()) return {{law.location()}, {1.0}};
  const double loc = law.location();
  const double sc = law.scale();
  Rule1 out;
  switch (law.tail_class()) {
    case TailClass::gaussian: {
      const quad::Rule r = quad::gauss_hermite_normal(q.hermite_order);
      const bool exact = law.family() == ScalarDensity::Family::normal;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double x = loc + sc * r.x[i];
        double w = r.w[i];
        if (!exact) {
          const double phi = std::exp(-0.5 * r.x[i] * r.x[i]) / std::sqrt(2.0 * std::numbers::pi);
          w *= law(x) * sc / phi;
        }
        out.x.push_back(x);
        out.w.push_back(w);
      }
      return out;
    }
    case TailClass::compact: {
      const models::Support s = law.support();
      if (s.kind != models::Support::Kind::compact)
        throw UnsupportedLawError("law " + law.describe() + " is tagged compact but has unbounded support");
      const quad::Rule r = quad::gauss_legendre(q.legendre_order, s.lo, s.hi);
      for (std::size_t i = 0; i < r.size(); ++i) {
        out.x.push_back(r.x[i]);
        out.w.push_back(r.w[i] * law(r.x[i]));
      }
      return out;
    }
    case TailClass::heavy: {
      const quad::Rule r = quad::gauss_legendre(q.heavy_tail_order, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double c = std::cos(r.x[i]);
        const double x = loc + sc * std::tan(r.x[i]);
        out.x.push_back(x);
        out.w.push_back(r.w[i] * law(x) * sc / (c * c));
      }
      return out;
    }
  }
  return out;
}

double law_mean(const ScalarDensity& law) {
  if (auto m = law.moments_hint()) return m->mean;
  return models::numeric_moments(law).mean;
}

double law_variance(const ScalarDensity& law) {
  if (auto m = law.moments_hint()) return m->variance;
  return models::numeric_moments(law).variance;
}

void require_pivot(const LinearPlan& plan) {
  if (!plan.pivot.absolutely_continuous())
    throw UnsupportedLawError("pivot law " + plan.pivot.describe() + " has no density");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Coefficients of the plan tabulated on the alpha^2 nodes.
struct AlphaTable {
  Rule1 rule;
  std::vector<double> b0, bp;
  std::vector<double> bk;  // row-major, alpha node by inner coordinate
  std::size_t dims = 0;
};

AlphaTable tabulate(const LinearPlan& plan, const Rule1& rule) {
  AlphaTable t;
  t.rule = rule;
  t.dims = plan.inner.size();
  const std::size_t n = rule.x.size();
  t.b0.resize(n);
  t.bp.resize(n);
  t.bk.resize(n * t.dims);
  for (std::size_t i = 0; i < n; ++i) {
    plan.coeffs(rule.x[i], t.b0[i], t.bp[i], std::span<double>(t.bk.data() + i * t.dims, t.dims));
    if (!(std::abs(t.bp[i]) > 0.0) || !std::isfinite(t.bp[i])) {
      throw HypothesisViolation("pivot coefficient vanishes at alpha^2 = " + fmt(rule.x[i]) +
                                "; the diffusion law leaves the admissible set (T_N(phi_1) = 0)");
    }
  }
  return t;
}

// Indices of inner coordinates that matter at double precision; the others
// are frozen at their mean.
std::vector<std::size_t> active_coordinates(const LinearPlan& plan, const AlphaTable& t) {
  std::vector<std::size_t> active;
  const double pivot_spread = plan.pivot.scale();
  for (std::size_t k = 0; k < t.dims; ++k) {
    const ScalarDensity& law = plan.inner[k];
    if (!law.absolutely_continuous()) continue;
    double ratio = 0.0;
    for (std::size_t i = 0; i < t.b0.size(); ++i)
      ratio = std::max(ratio, std::abs(t.bk[i * t.dims + k]) * law.scale() / (std::abs(t.bp[i]) * pivot_spread));
    if (ratio >= kInactive) active.push_back(k);
  }
  return active;
}

std::vector<double> inactive_means(const LinearPlan& plan, const std::vector<std::size_t>& active) {
  std::vector<double> means(plan.inner.size(), 0.0);
  std::vector<bool> is_active(plan.inner.size(), false);
  for (std::size_t k : active) is_active[k] = true;
  for (std::size_t k = 0; k < plan.inner.size(); ++k)
    if (!is_active[k]) means[k] = law_mean(plan.inner[k]);
  return means;
}

class NodeSetEvaluator final : public DensityEvaluator {
 public:
  explicit NodeSetEvaluator(NodeSet nodes) : nodes_(std::move(nodes)) {}
  double operator()(double u) const override { return nodes_(u); }
  std::size_t node_count() const override { return nodes_.size(); }

 private:
  NodeSet nodes_;
};

// Exact handling of a compact (box) pivot under a continuous alpha^2 law.
// For each inner node the set of alpha^2 where the pivot argument lies in
// the support is found by root bracketing; the remaining integrand
// pdf(alpha^2) / |bp(alpha^2)| is smooth and is integrated through a
// panel-wise antiderivative.
class BoxEvaluator final : public DensityEvaluator {
 public:
  BoxEvaluator(const LinearPlan& plan, const QuadConfig& q) : plan_(plan) {
    lo_ = plan.diffusion.lo;
    hi_ = plan.diffusion.hi;
    loc_ = plan.pivot.location();
    half_ = plan.pivot.scale();
    const Rule1 arule = alpha_rule(plan.diffusion, q.legendre_order);
    const AlphaTable table = tabulate(plan, arule);
    active_ = active_coordinates(plan, table);
    means_ = inactive_means(plan, active_);
    dims_ = plan.inner.size();

    std::vector<Rule1> rules;
    std::size_t total = 1;
    for (std::size_t k : active_) {
      rules.push_back(inner_rule(plan.inner[k], q));
      total *= rules.back().x.size();
    }
    samples_ = std::max<std::size_t>(32, q.legendre_order / 2);
    if (total * (samples_ + 1) > q.node_budget)
      throw NonConvergence("node budget exceeded (" + std::to_string(total * (samples_ + 1)) + " nodes)");

    std::vector<double> xs(active_.size());
    build_nodes(rules, 0, 1.0, xs);

    gl_ = quad::gauss_legendre(q.legendre_order);
    panels_ = 32;
    cum_.assign(panels_ + 1, 0.0);
    for (std::size_t p = 0; p < panels_; ++p)
      cum_[p + 1] = cum_[p] + segment_weight(edge(p), edge(p + 1));

    // Tabulate s0 and bp on the bracketing mesh; they do not depend on u.
    mesh_.resize(samples_ + 1);
    mesh_bp_.resize(samples_ + 1);
    mesh_s0_.resize(n_nodes() * (samples_ + 1));
    std::vector<double> bk(dims_);
    for (std::size_t j = 0; j <= samples_; ++j) {
      mesh_[j] = lo_ + (hi_ - lo_) * static_cast<double>(j) / static_cast<double>(samples_);
      double b0, bp;
      plan_.coeffs(mesh_[j], b0, bp, bk);
      mesh_bp_[j] = bp;
      for (std::size_t n = 0; n < n_nodes(); ++n) mesh_s0_[n * (samples_ + 1) + j] = shift(b0, bk, n);
    }
  }

  double operator()(double u) const override {
    std::vector<double> bk(dims_);
    std::vector<double> cuts;
    double total = 0.0;
    for (std::size_t n = 0; n < n_nodes(); ++n) {
      auto g = [&](double a) {
        double b0, bp;
        plan_.coeffs(a, b0, bp, bk);
        return (u - shift(b0, bk, n)) / bp - loc_;
      };
      cuts.clear();
      cuts.push_back(lo_);
      const double* s0 = &mesh_s0_[n * (samples_ + 1)];
      double prev = (u - s0[0]) / mesh_bp_[0] - loc_;
      for (std::size_t j = 1; j <= samples_; ++j) {
        const double cur = (u - s0[j]) / mesh_bp_[j] - loc_;
        for (double level : {-half_, half_}) {
          if ((prev > level) != (cur > level)) cuts.push_back(root(g, level, mesh_[j - 1], mesh_[j], prev, cur));
        }
        prev = cur;
      }
      cuts.push_back(hi_);
      std::sort(cuts.begin(), cuts.end());
      double acc = 0.0;
      if (cuts.size() == 2) {
        if (std::abs(g(0.5 * (lo_ + hi_))) <= half_) acc = cum_.back();
      } else {
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          const double a = cuts[i];
          const double b = cuts[i + 1];
          if (!(b > a)) continue;
          if (std::abs(g(0.5 * (a + b))) <= half_) acc += antiderivative(b) - antiderivative(a);
        }
      }
      total += weights_[n] * acc;
    }
    // Uniform base density 1/2 on [-1, 1], rescaled by the pivot half-width.
    return total * 0.5 / half_;
  }

  std::size_t node_count() const override { return n_nodes() * (samples_ + 1); }

 private:
  std::size_t n_nodes() const { return weights_.size(); }

  void build_nodes(const std::vector<Rule1>& rules, std::size_t d, double w, std::vector<double>& xs) {
    if (d == rules.size()) {
      weights_.push_back(w);
      coords_.insert(coords_.end(), xs.begin(), xs.end());
      return;
    }
    for (std::size_t i = 0; i < rules[d].x.size(); ++i) {
      const double w2 = w * rules[d].w[i];
      if (w2 < kPrune) continue;
      xs[d] = rules[d].x[i];
      build_nodes(rules, d + 1, w2, xs);
    }
  }

  double shift(double b0, const std::vector<double>& bk, std::size_t node) const {
    double s = b0;
    for (std::size_t k = 0; k < dims_; ++k)
      if (means_[k] != 0.0) s += bk[k] * means_[k];
    const double* x = coords_.data() + node * active_.size();
    for (std::size_t a = 0; a < active_.size(); ++a) s += bk[active_[a]] * x[a];
    return s;
  }

  template <class G>
  double root(G& g, double level, double a, double b, double ga, double gb) const {
    auto f = [&](double x) { return g(x) - level; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(f, a, b, ga - level, gb - level, tol, iters);
    return 0.5 * (r.first + r.second);
  }

  double edge(std::size_t p) const {
    return p == panels_ ? hi_ : lo_ + (hi_ - lo_) * static_cast<double>(p) / static_cast<double>(panels_);
  }

  // int_a^b pdf(alpha^2) / |bp(alpha^2)| d alpha^2.
  double segment_weight(double a, double b) const {
    if (!(b > a)) return 0.0;
    std::vector<double> bk(dims_);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl_.size(); ++i) {
      const double x = mid + half * gl_.x[i];
      double b0, bp;
      plan_.coeffs(x, b0, bp, bk);
      acc += gl_.w[i] * plan_.diffusion.law(x) / std::abs(bp);
    }
    return acc * half;
  }

  double antiderivative(double a) const {
    if (a <= lo_) return 0.0;
    if (a >= hi_) return cum_.back();
    std::size_t p = static_cast<std::size_t>((a - lo_) / (hi_ - lo_) * static_cast<double>(panels_));
    p = std::min(p, panels_ - 1);
    return cum_[p] + segment_weight(edge(p), a);
  }

  LinearPlan plan_;
  double lo_, hi_, loc_, half_;
  std::size_t dims_ = 0;
  std::vector<std::size_t> active_;
  std::vector<double> means_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::size_t samples_ = 32;
  quad::Rule gl_;
  std::size_t panels_ = 32;
  std::vector<double> cum_;
  std::vector<double> mesh_, mesh_bp_, mesh_s0_;
};

NodeSet tensor_nodes(const LinearPlan& plan, const QuadConfig& q) {
  const Rule1 arule = alpha_rule(plan.diffusion, q.legendre_order);
  const AlphaTable t = tabulate(plan, arule);
  const std::vector<std::size_t> active = active_coordinates(plan, t);
  const std::vector<double> means = inactive_means(plan, active);

  std::vector<Rule1> rules;
  double estimate = static_cast<double>(arule.x.size());
  for (std::size_t k : active) {
    rules.push_back(inner_rule(plan.inner[k], q));
    estimate *= static_cast<double>(rules.back().x.size());
  }
  if (estimate > static_cast<double>(q.node_budget))
    throw NonConvergence("node budget exceeded (" + fmt(estimate) + " nodes requested)");

  const bool custom = !plan.pivot.profile().has_value();
  const double norm = plan.pivot.profile_norm();
  const double loc = plan.pivot.location();
  const double sc = plan.pivot.scale();
  std::vector<double> K, S, W;
  K.reserve(static_cast<std::size_t>(std::min(estimate, 1e8)));
  S.reserve(K.capacity());
  W.reserve(K.capacity());

  std::vector<double> bk(t.dims);
  for (std::size_t i = 0; i < arule.x.size(); ++i) {
    const double wa = arule.w[i];
    if (wa < kPrune) continue;
    const double bp = t.bp[i];
    const double* brow = t.bk.data() + i * t.dims;
    double base = t.b0[i] + bp * loc;
    for (std::size_t k = 0; k < t.dims; ++k)
      if (means[k] != 0.0) base += brow[k] * means[k];
    const double kk = custom ? 1.0 / (bp * sc) : 1.0 / (std::abs(bp) * sc);
    const double jac = std::abs(kk) * (custom ? 1.0 : norm);

    // Depth-first walk over the tensor grid of active coordinates.
    auto walk = [&](auto&& self, std::size_t d, double w, double s) -> void {
      if (d == active.size()) {
        K.push_back(kk);
        S.push_back(s);
        W.push_back(w * jac);
        return;
      }
      const Rule1& r = rules[d];
      const double b = brow[active[d]];
      for (std::size_t j = 0; j < r.x.size(); ++j) {
        const double w2 = w * r.w[j];
        if (w2 < kPrune) continue;
        self(self, d + 1, w2, s + b * r.x[j]);
      }
    };
    walk(walk, 0, wa, base);
  }
  return NodeSet(plan.pivot, std::move(K), std::move(S), std::move(W));
}

}  // namespace

void QuadConfig::validate() const {
  std::string bad;
  if (hermite_order < 2) bad += " hermite_order < 2;";
  if (legendre_order < 2) bad += " legendre_order < 2;";
  if (heavy_tail_order < 2) bad += " heavy_tail_order < 2;";
  if (!(refine_tol > 0.0)) bad += " refine_tol must be positive;";
  if (!bad.empty()) throw DomainError("invalid quadrature configuration:" + bad);
}

QuadConfig QuadConfig::doubled() const {
  QuadConfig q = *this;
  q.hermite_order *= 2;
  q.legendre_order *= 2;
  q.heavy_tail_order *= 2;
  return q;
}

std::string QuadConfig::digest() const {
  return "gh=" + std::to_string(hermite_order) + ";gl=" + std::to_string(legendre_order) +
         ";ht=" + std::to_string(heavy_tail_order) + ";mc=" + std::to_string(mc_samples) +
         ";seed=" + std::to_string(mc_seed) + ";refine=" + (refine ? "1" : "0") + ";tol=" + fmt(refine_tol) +
         ";max_doublings=" + std::to_string(max_doublings);
}

NodeSet::NodeSet(models::ScalarDensity pivot, std::vector<double> k, std::vector<double> s, std::vector<double> w)
    : pivot_(std::move(pivot)), k_(std::move(k)), s_(std::move(s)), w_(std::move(w)) {
  profile_ = pivot_->profile();
}

double NodeSet::operator()(double u) const {
  if (profile_) return simd::profile_sum(*profile_, view(), u);
  double acc = 0.0;
  for (std::size_t j = 0; j < k_.size(); ++j) acc += w_[j] * pivot_->base_pdf(k_[j] * (u - s_[j]));
  return acc;
}

PlanSummary summarize(const LinearPlan& plan) {
  require_pivot(plan);
  const Rule1 rule = alpha_rule(plan.diffusion, 64);
  const double mp = law_mean(plan.pivot);
  const double vp = law_variance(plan.pivot);
  std::vector<double> mk, vk;
  bool heavy = plan.pivot.tail_class() == TailClass::heavy;
  for (const auto& law : plan.inner) {
    mk.push_back(law_mean(law));
    vk.push_back(law_variance(law));
    heavy = heavy || law.tail_class() == TailClass::heavy;
  }
  std::vector<double> bk(plan.inner.size());
  double m1 = 0.0, m2 = 0.0, wsum = 0.0;
  double min_spread = std::numeric_limits<double>::infinity();
  double max_cond_var = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    double b0, bp;
    plan.coeffs(rule.x[i], b0, bp, bk);
    double m = b0 + bp * mp;
    double v = bp * bp * vp;
    for (std::size_t k = 0; k < bk.size(); ++k) {
      m += bk[k] * mk[k];
      v += bk[k] * bk[k] * vk[k];
    }
    max_cond_var = std::max(max_cond_var, v);
    m1 += rule.w[i] * m;
    m2 += rule.w[i] * (v + m * m);
    wsum += rule.w[i];
    min_spread = std::min(min_spread, std::abs(bp) * plan.pivot.scale());
  }
  m1 /= wsum;
  m2 /= wsum;
  return {m1, std::max(m2 - m1 * m1, 0.0), min_spread, std::sqrt(max_cond_var), heavy,
          plan.pivot.tail_class() == TailClass::compact};
}

std::unique_ptr<DensityEvaluator> build_quadrature(const LinearPlan& plan, const QuadConfig& q) {
  q.validate();
  require_pivot(plan);
  if (plan.pivot.profile() == simd::Profile::box && !plan.diffusion.degenerate())
    return std::make_unique<BoxEvaluator>(plan, q);
  return std::make_unique<NodeSetEvaluator>(tensor_nodes(plan, q));
}

std::unique_ptr<DensityEvaluator> build_monte_carlo(const LinearPlan& plan, std::size_t n, std::uint64_t seed,
                                                    unsigned threads) {
  require_pivot(plan);
  if (n == 0) throw DomainError("Monte Carlo integration needs at least one sample");
  if (!plan.diffusion.law.has_sampler()) throw UnsupportedLawError("diffusion law has no sampler");
  for (const auto& law : plan.inner)
    if (!law.has_sampler()) throw UnsupportedLawError("law " + law.describe() + " has no sampler");

  const bool custom = !plan.pivot.profile().has_value();
  const double norm = custom ? 1.0 : plan.pivot.profile_norm();
  const double loc = plan.pivot.location();
  const double sc = plan.pivot.scale();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> K(n), S(n), W(n);
  const std::size_t streams = (n + kStreamSize - 1) / kStreamSize;
  detail::parallel_for(streams, threads, [&](std::size_t stream) {
    rng::Engine eng = rng::stream_engine(seed, stream);
    std::vector<double> bk(plan.inner.size());
    const std::size_t begin = stream * kStreamSize;
    const std::size_t end = std::min(n, begin + kStreamSize);
    for (std::size_t i = begin; i < end; ++i) {
      const double a2 = plan.diffusion.law.sample(eng);
      double b0, bp;
      plan.coeffs(a2, b0, bp, bk);
      if (!(std::abs(bp) > 0.0))
        throw HypothesisViolation("pivot coefficient vanishes at sampled alpha^2 = " + fmt(a2));
      double s = b0 + bp * loc;
      for (std::size_t k = 0; k < bk.size(); ++k) s += bk[k] * plan.inner[k].sample(eng);
      const double kk = custom ? 1.0 / (bp * sc) : 1.0 / (std::abs(bp) * sc);
      K[i] = kk;
      S[i] = s;
      W[i] = inv_n * norm * std::abs(kk);
    }
  });
  return std::make_unique<NodeSetEvaluator>(NodeSet(plan.pivot, std::move(K), std::move(S), std::move(W)));
}

}  // namespace heatdens::engine
