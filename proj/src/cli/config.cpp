#include "heatdens/cli/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace heatdens::cli {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts) {
  std::string out = "invalid configuration: ";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

// Collects violations while walking the document. Every accessor returns a
// fallback on failure so the walk can keep going.
class Walker {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
      if (!ok.count(item.key())) fail(path + "." + item.key(), "unknown key");
  }

  double number(const json& j, const std::string& path, double fallback = std::nan("")) {
    if (j.is_number() && std::isfinite(j.get<double>())) return j.get<double>();
    fail(path, "expected a finite number");
    return fallback;
  }

  std::size_t count(const json& j, const std::string& path, std::size_t fallback = 0) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::size_t>(j.get<std::int64_t>());
    fail(path, "expected a non-negative integer");
    return fallback;
  }

  std::string text(const json& j, const std::string& path) {
    if (j.is_string()) return j.get<std::string>();
    fail(path, "expected a string");
    return {};
  }

  bool flag(const json& j, const std::string& path) {
    if (j.is_boolean()) return j.get<bool>();
    fail(path, "expected true or false");
    return false;
  }

  // Runs fn and converts a library DomainError into a violation at path.
  template <class Fn>
  bool attempt(const std::string& path, Fn&& fn) {
    try {
      fn();
      return true;
    } catch (const Error& e) {
      fail(path, e.what());
      return false;
    }
  }
};

std::optional<models::ScalarDensity> parse_xi_law(Walker& w, const json& j, const std::string& path) {
  const json* spec = &j;
  json wrapped;
  if (j.is_string()) {
    wrapped = json{{"name", j}};
    spec = &wrapped;
  }
  if (!w.object(*spec, path)) return std::nullopt;
  w.only_keys(*spec, path, {"name", "lo", "hi"});
  if (!spec->contains("name")) {
    w.fail(path + ".name", "missing");
    return std::nullopt;
  }
  const std::string name = w.text(spec->at("name"), path + ".name");
  const bool has_bounds = spec->contains("lo") || spec->contains("hi");
  if (name == "normal" || name == "quartic") {
    if (has_bounds) w.fail(path, name + " law takes no bounds");
    return name == "normal" ? models::ScalarDensity::normal() : models::ScalarDensity::quartic_tail();
  }
  if (name == "uniform") {
    // Zero mean and unit variance unless bounds are given.
    double lo = -std::sqrt(3.0), hi = std::sqrt(3.0);
    if (has_bounds) {
      if (!spec->contains("lo") || !spec->contains("hi")) {
        w.fail(path, "uniform law needs both lo and hi");
        return std::nullopt;
      }
      lo = w.number(spec->at("lo"), path + ".lo");
      hi = w.number(spec->at("hi"), path + ".hi");
      if (!(hi > lo)) {
        w.fail(path, "uniform law needs lo < hi");
        return std::nullopt;
      }
    }
    return models::ScalarDensity::uniform(lo, hi);
  }
  if (!name.empty()) w.fail(path + ".name", "unknown law '" + name + "' (normal, quartic, uniform)");
  return std::nullopt;
}

std::optional<models::NuSequence> parse_nu(Walker& w, const json& j, const std::string& path) {
  if (!w.object(j, path)) return std::nullopt;
  if (j.contains("values")) {
    w.only_keys(j, path, {"values"});
    const json& v = j.at("values");
    if (!v.is_array() || v.empty()) {
      w.fail(path + ".values", "expected a non-empty array");
      return std::nullopt;
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = w.number(v[i], path + ".values[" + std::to_string(i) + "]");
      if (x < 0.0) w.fail(path + ".values[" + std::to_string(i) + "]", "eigenvalues must be non-negative");
      values.push_back(x);
    }
    return models::NuSequence::finite(std::move(values));
  }
  w.only_keys(j, path, {"rule", "p", "c"});
  if (!j.contains("rule")) {
    w.fail(path, "needs either 'rule' or 'values'");
    return std::nullopt;
  }
  const std::string rule = w.text(j.at("rule"), path + ".rule");
  const double c = j.contains("c") ? w.number(j.at("c"), path + ".c", 1.0) : 1.0;
  if (!(c > 0.0)) w.fail(path + ".c", "must be positive");
  auto exponent = [&]() {
    if (!j.contains("p")) {
      w.fail(path + ".p", "missing");
      return 2.0;
    }
    return w.number(j.at("p"), path + ".p", 2.0);
  };
  if (rule == "brownian_bridge" || rule == "brownian_motion") {
    if (j.contains("p") || j.contains("c")) w.fail(path, "rule '" + rule + "' takes no parameters");
    return rule == "brownian_bridge" ? models::NuSequence::brownian_bridge() : models::NuSequence::brownian_motion();
  }
  if (rule == "power_log") return models::NuSequence::power_log(exponent(), c);
  if (rule == "power") return models::NuSequence::power(exponent(), c);
  if (rule == "constant") return models::NuSequence::constant(c);
  if (!rule.empty())
    w.fail(path + ".rule", "unknown rule '" + rule + "' (brownian_bridge, brownian_motion, power_log, power, constant)");
  return std::nullopt;
}

std::optional<models::ProcessSpec> parse_process(Walker& w, const json& j, const std::string& path) {
  if (!w.object(j, path)) return std::nullopt;
  if (!j.contains("name")) {
    w.fail(path + ".name", "missing");
    return std::nullopt;
  }
  const std::string name = w.text(j.at("name"), path + ".name");
  if (name == "brownian_bridge" || name == "brownian_motion") {
    w.only_keys(j, path, {"name"});
    return name == "brownian_bridge" ? models::make_brownian_bridge_process() : models::make_brownian_motion_process();
  }
  if (name == "general_sine") {
    w.only_keys(j, path, {"name", "nu", "xi_law"});
    std::optional<models::NuSequence> nu;
    std::optional<models::ScalarDensity> xi;
    if (j.contains("nu"))
      nu = parse_nu(w, j.at("nu"), path + ".nu");
    else
      w.fail(path + ".nu", "missing");
    if (j.contains("xi_law"))
      xi = parse_xi_law(w, j.at("xi_law"), path + ".xi_law");
    else
      w.fail(path + ".xi_law", "missing");
    if (!nu || !xi) return std::nullopt;
    std::optional<models::ProcessSpec> out;
    w.attempt(path, [&] { out = models::make_general_sine_process(*nu, *xi); });
    return out;
  }
  if (!name.empty())
    w.fail(path + ".name", "unknown process '" + name + "' (brownian_bridge, brownian_motion, general_sine)");
  return std::nullopt;
}

std::optional<models::DiffusionSpec> parse_diffusion(Walker& w, const json& j, const std::string& path) {
  if (!w.object(j, path)) return std::nullopt;
  w.only_keys(j, path, {"name", "lo", "hi"});
  const std::string name = j.contains("name") ? w.text(j.at("name"), path + ".name") : std::string("uniform");
  if (name != "uniform") {
    w.fail(path + ".name", "unknown diffusion law '" + name + "' (uniform)");
    return std::nullopt;
  }
  if (!j.contains("lo") || !j.contains("hi")) {
    w.fail(path, "uniform diffusion needs lo and hi");
    return std::nullopt;
  }
  const double lo = w.number(j.at("lo"), path + ".lo");
  const double hi = w.number(j.at("hi"), path + ".hi");
  if (!(lo > 0.0)) {
    w.fail(path + ".lo", "diffusion coefficient must be bounded away from zero (lo > 0)");
    return std::nullopt;
  }
  if (!(hi >= lo)) {
    w.fail(path + ".hi", "must satisfy hi >= lo");
    return std::nullopt;
  }
  std::optional<models::DiffusionSpec> out;
  w.attempt(path, [&] { out = models::DiffusionSpec::uniform(lo, hi); });
  return out;
}

std::optional<series::EvalPoint> parse_point(Walker& w, const json& j, const std::string& path) {
  double x = 0.0, t = 0.0;
  if (j.is_array()) {
    if (j.size() != 2) {
      w.fail(path, "expected [x, t]");
      return std::nullopt;
    }
    x = w.number(j[0], path + "[0]");
    t = w.number(j[1], path + "[1]");
  } else if (w.object(j, path)) {
    w.only_keys(j, path, {"x", "t"});
    if (!j.contains("x") || !j.contains("t")) {
      w.fail(path, "needs x and t");
      return std::nullopt;
    }
    x = w.number(j.at("x"), path + ".x");
    t = w.number(j.at("t"), path + ".t");
  } else {
    return std::nullopt;
  }
  std::optional<series::EvalPoint> out;
  w.attempt(path, [&] { out = series::EvalPoint::make(x, t); });
  return out;
}

std::size_t min_order(engine::Method m) {
  switch (m) {
    case engine::Method::fourier_joint: return 1;
    case engine::Method::kl: return 3;
    default: return 2;
  }
}

std::size_t max_order(engine::Method m) {
  switch (m) {
    case engine::Method::fourier_joint: return 65;
    case engine::Method::kl: return 64;
    default: return 4096;
  }
}

std::optional<Study> parse_study(Walker& w, const json& method_j, const json* orders_j, const std::string& path) {
  const std::string name = w.text(method_j, path + ".method");
  auto method = engine::parse_method(name);
  if (!method) {
    if (!name.empty()) w.fail(path + ".method", "unknown method '" + name + "' (fourier_indep, fourier_joint, bb_fast, kl)");
    return std::nullopt;
  }
  Study s{*method, {}};
  if (!orders_j) {
    w.fail(path + ".orders", "missing");
    return std::nullopt;
  }
  const std::string opath = path + ".orders";
  if (orders_j->is_array()) {
    if (orders_j->empty()) w.fail(opath, "needs at least one order");
    for (std::size_t i = 0; i < orders_j->size(); ++i) s.orders.push_back(w.count((*orders_j)[i], opath + "[" + std::to_string(i) + "]"));
  } else {
    s.orders.push_back(w.count(*orders_j, opath));
  }
  for (std::size_t i = 0; i < s.orders.size(); ++i) {
    const std::size_t N = s.orders[i];
    if (N < min_order(s.method) || N > max_order(s.method))
      w.fail(opath, std::string(engine::to_string(s.method)) + " needs " + std::to_string(min_order(s.method)) +
                        " <= N <= " + std::to_string(max_order(s.method)) + " (got " + std::to_string(N) + ")");
    if (i > 0 && N <= s.orders[i - 1]) w.fail(opath, "orders must be strictly increasing");
  }
  return s;
}

void parse_quad(Walker& w, const json& j, engine::QuadConfig& q) {
  const std::string path = "quad";
  if (!w.object(j, path)) return;
  w.only_keys(j, path,
              {"hermite_order", "legendre_order", "heavy_tail_order", "mc_samples", "seed", "refine", "refine_tol",
               "max_doublings", "node_budget"});
  if (j.contains("hermite_order")) q.hermite_order = w.count(j["hermite_order"], path + ".hermite_order", q.hermite_order);
  if (j.contains("legendre_order")) q.legendre_order = w.count(j["legendre_order"], path + ".legendre_order", q.legendre_order);
  if (j.contains("heavy_tail_order"))
    q.heavy_tail_order = w.count(j["heavy_tail_order"], path + ".heavy_tail_order", q.heavy_tail_order);
  if (j.contains("mc_samples")) q.mc_samples = w.count(j["mc_samples"], path + ".mc_samples", q.mc_samples);
  if (j.contains("seed")) q.mc_seed = w.count(j["seed"], path + ".seed", q.mc_seed);
  if (j.contains("refine")) q.refine = w.flag(j["refine"], path + ".refine");
  if (j.contains("refine_tol")) q.refine_tol = w.number(j["refine_tol"], path + ".refine_tol", q.refine_tol);
  if (j.contains("max_doublings")) q.max_doublings = w.count(j["max_doublings"], path + ".max_doublings", q.max_doublings);
  if (j.contains("node_budget")) q.node_budget = w.count(j["node_budget"], path + ".node_budget", q.node_budget);
  w.attempt(path, [&] { q.validate(); });
}

void parse_grid(Walker& w, const json& j, engine::GridSpec& g) {
  const std::string path = "grid";
  if (!w.object(j, path)) return;
  const std::string kind = j.contains("kind") ? w.text(j["kind"], path + ".kind") : std::string("auto");
  if (kind == "auto") {
    w.only_keys(j, path, {"kind", "count"});
    const std::size_t n = j.contains("count") ? w.count(j["count"], path + ".count", 401) : 401;
    if (n < 3 || n % 2 == 0) w.fail(path + ".count", "automatic grid needs an odd count >= 3");
    g = engine::GridSpec::automatic_grid(n);
  } else if (kind == "range") {
    w.only_keys(j, path, {"kind", "lo", "hi", "count"});
    if (!j.contains("lo") || !j.contains("hi") || !j.contains("count")) {
      w.fail(path, "range grid needs lo, hi and count");
      return;
    }
    const double lo = w.number(j["lo"], path + ".lo");
    const double hi = w.number(j["hi"], path + ".hi");
    const std::size_t n = w.count(j["count"], path + ".count");
    w.attempt(path, [&] { g = engine::GridSpec::uniform_range(lo, hi, n); });
  } else if (kind == "points") {
    w.only_keys(j, path, {"kind", "points"});
    if (!j.contains("points") || !j["points"].is_array()) {
      w.fail(path + ".points", "expected an array");
      return;
    }
    std::vector<double> pts;
    for (std::size_t i = 0; i < j["points"].size(); ++i)
      pts.push_back(w.number(j["points"][i], path + ".points[" + std::to_string(i) + "]"));
    w.attempt(path, [&] { g = engine::GridSpec::explicit_points(std::move(pts)); });
  } else if (!kind.empty()) {
    w.fail(path + ".kind", "unknown grid kind '" + kind + "' (auto, range, points)");
  }
}

void parse_validate(Walker& w, const json& j, ValidateConfig& v) {
  const std::string path = "validate";
  if (!w.object(j, path)) return;
  w.only_keys(j, path, {"samples", "ks_tol", "variance_rel_tol", "degenerate_variance"});
  if (j.contains("samples")) v.samples = w.count(j["samples"], path + ".samples", v.samples);
  if (j.contains("ks_tol")) v.ks_tol = w.number(j["ks_tol"], path + ".ks_tol", v.ks_tol);
  if (j.contains("variance_rel_tol"))
    v.variance_rel_tol = w.number(j["variance_rel_tol"], path + ".variance_rel_tol", v.variance_rel_tol);
  if (j.contains("degenerate_variance"))
    v.degenerate_variance = w.number(j["degenerate_variance"], path + ".degenerate_variance", v.degenerate_variance);
  if (v.samples < 1000) w.fail(path + ".samples", "needs at least 1000 samples");
  if (!(v.ks_tol > 0.0 && v.ks_tol < 1.0)) w.fail(path + ".ks_tol", "must lie in (0, 1)");
  if (!(v.variance_rel_tol > 0.0)) w.fail(path + ".variance_rel_tol", "must be positive");
  if (!(v.degenerate_variance >= 0.0)) w.fail(path + ".degenerate_variance", "must be non-negative");
}

void parse_output(Walker& w, const json& j, OutputConfig& o) {
  const std::string path = "output";
  if (!w.object(j, path)) return;
  w.only_keys(j, path, {"directory", "samples_csv"});
  if (j.contains("directory")) {
    o.directory = w.text(j["directory"], path + ".directory");
    if (o.directory.empty()) w.fail(path + ".directory", "must not be empty");
  }
  if (j.contains("samples_csv")) o.samples_csv = w.flag(j["samples_csv"], path + ".samples_csv");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : DomainError(join(violations)), violations_(std::move(violations)) {}

RunConfig parse_config(const nlohmann::json& doc) {
  Walker w;
  RunConfig cfg{.description = {},
                .model = {models::make_brownian_bridge_process(), models::DiffusionSpec::uniform(1.0, 2.0)},
                .model_json = {},
                .points = {},
                .studies = {},
                .quad = {},
                .grid = {},
                .validate = {},
                .output = {}};
  if (!w.object(doc, "$")) throw ConfigError(w.errors);
  w.only_keys(doc, "$",
              {"description", "model", "point", "points", "method", "N", "orders", "studies", "quad", "grid",
               "validate", "output"});

  if (doc.contains("description")) cfg.description = w.text(doc["description"], "description");

  // Model.
  bool model_ok = false;
  if (!doc.contains("model")) {
    w.fail("model", "missing");
  } else if (w.object(doc["model"], "model")) {
    const json& m = doc["model"];
    w.only_keys(m, "model", {"process", "diffusion"});
    std::optional<models::ProcessSpec> proc;
    std::optional<models::DiffusionSpec> diff;
    if (m.contains("process"))
      proc = parse_process(w, m["process"], "model.process");
    else
      w.fail("model.process", "missing");
    if (m.contains("diffusion"))
      diff = parse_diffusion(w, m["diffusion"], "model.diffusion");
    else
      w.fail("model.diffusion", "missing");
    if (proc && diff) {
      cfg.model = engine::ModelBundle{std::move(*proc), std::move(*diff)};
      cfg.model_json = nlohmann::ordered_json::parse(m.dump());
      model_ok = true;
    }
  }

  // Evaluation points.
  if (doc.contains("point") && doc.contains("points")) w.fail("$", "give either 'point' or 'points', not both");
  if (doc.contains("point")) {
    if (auto p = parse_point(w, doc["point"], "point")) cfg.points.push_back(*p);
  } else if (doc.contains("points")) {
    const json& pts = doc["points"];
    if (!pts.is_array() || pts.empty()) {
      w.fail("points", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (auto p = parse_point(w, pts[i], "points[" + std::to_string(i) + "]")) cfg.points.push_back(*p);
    }
  } else {
    w.fail("points", "missing");
  }

  // Studies: either a list, or a single method with N / orders at top level.
  const bool flat = doc.contains("method") || doc.contains("N") || doc.contains("orders");
  if (doc.contains("studies") && flat) w.fail("$", "give either 'studies' or 'method' with orders, not both");
  if (doc.contains("N") && doc.contains("orders")) w.fail("$", "give either 'N' or 'orders', not both");
  if (doc.contains("studies")) {
    const json& st = doc["studies"];
    if (!st.is_array() || st.empty()) {
      w.fail("studies", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < st.size(); ++i) {
        const std::string path = "studies[" + std::to_string(i) + "]";
        if (!w.object(st[i], path)) continue;
        w.only_keys(st[i], path, {"method", "N", "orders"});
        if (!st[i].contains("method")) {
          w.fail(path + ".method", "missing");
          continue;
        }
        const json* orders = st[i].contains("orders") ? &st[i]["orders"] : st[i].contains("N") ? &st[i]["N"] : nullptr;
        if (auto s = parse_study(w, st[i]["method"], orders, path)) cfg.studies.push_back(std::move(*s));
      }
    }
  } else if (flat) {
    if (!doc.contains("method")) {
      w.fail("method", "missing");
    } else {
      const json* orders = doc.contains("orders") ? &doc["orders"] : doc.contains("N") ? &doc["N"] : nullptr;
      if (auto s = parse_study(w, doc["method"], orders, "$")) cfg.studies.push_back(std::move(*s));
    }
  } else {
    w.fail("method", "missing (or give 'studies')");
  }

  if (model_ok) {
    for (const Study& s : cfg.studies) {
      if (s.method == engine::Method::bb_fast && cfg.model.process.kernel != models::ProcessSpec::Kernel::brownian_bridge)
        w.fail("method", "bb_fast applies to the Brownian bridge only");
      if (s.method == engine::Method::fourier_indep && !(cfg.model.process.basis == models::ProcessSpec::Basis::sine &&
                                                         cfg.model.process.independence_flag))
        w.fail("method", "fourier_indep needs independent Fourier coefficients; use fourier_joint");
      if (s.method == engine::Method::fourier_joint && !cfg.model.process.gaussian_flag)
        w.fail("method", "fourier_joint needs a Gaussian process");
    }
  }

  if (doc.contains("quad")) parse_quad(w, doc["quad"], cfg.quad);
  if (doc.contains("grid")) parse_grid(w, doc["grid"], cfg.grid);
  if (doc.contains("validate")) parse_validate(w, doc["validate"], cfg.validate);
  if (doc.contains("output")) parse_output(w, doc["output"], cfg.output);

  if (!w.errors.empty()) throw ConfigError(w.errors);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open configuration file"});
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({path + ": malformed JSON: " + e.what()});
  }
  return parse_config(doc);
}

}  // namespace heatdens::cli
