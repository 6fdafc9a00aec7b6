#include "heatdens/cli/io.hpp"

#include "heatdens/cli/config.hpp"
#include "heatdens/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace heatdens::cli {

namespace fs = std::filesystem;

namespace {

// JSON has no infinities; they are written as strings.
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json lipschitz_json(const diag::LipschitzEstimate& l) {
  Json j;
  j["subject"] = l.subject;
  j["applicable"] = l.applicable;
  j["bounded"] = l.bounded;
  j["estimate"] = num(l.estimate);
  Json steps = Json::array();
  for (double v : l.by_step) steps.push_back(num(v));
  j["by_step"] = steps;
  return j;
}

Json verdict_json(const diag::Verdict& v) {
  Json j;
  j["holds"] = v.holds;
  j["reasons"] = v.reasons;
  return j;
}

}  // namespace

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_tag(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string grid_csv(const engine::DensityGrid& g) {
  std::string out = "u,density\n";
  out.reserve(out.size() + g.u.size() * 48);
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    out += format_number(g.u[i]);
    out += ',';
    out += format_number(g.f[i]);
    out += '\n';
  }
  return out;
}

engine::DensityGrid parse_grid_csv(const std::string& text) {
  engine::DensityGrid g;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "u,density") throw DomainError("grid CSV must start with 'u,density'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("grid CSV line " + std::to_string(lineno) + " has no comma");
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    char* end = nullptr;
    const double u = std::strtod(a.c_str(), &end);
    if (end == a.c_str() || *end) throw DomainError("grid CSV line " + std::to_string(lineno) + ": bad abscissa");
    const double f = std::strtod(b.c_str(), &end);
    if (end == b.c_str() || *end) throw DomainError("grid CSV line " + std::to_string(lineno) + ": bad density");
    g.u.push_back(u);
    g.f.push_back(f);
  }
  return g;
}

Json meta_json(const engine::DensityGrid& g) {
  const auto& m = g.meta;
  Json j;
  j["x"] = m.x;
  j["t"] = m.t;
  j["N"] = m.N;
  j["method"] = m.method;
  j["points"] = g.u.size();
  j["grid_kind"] = m.grid_kind;
  j["quad"] = m.quad_digest;
  j["model"] = m.model_digest;
  j["seed"] = m.seed;
  j["nodes"] = m.nodes;
  j["refined"] = m.refined;
  j["doublings"] = m.doublings;
  j["last_change"] = m.last_change < 0 ? Json(nullptr) : num(m.last_change);
  if (m.mc_samples) j["mc_samples"] = m.mc_samples;
  j["resampled"] = m.resampled;
  return j;
}

Json to_json(const diag::HypothesisReport& r) {
  Json j;
  j["x"] = r.x;
  j["t"] = r.t;
  j["N"] = r.N;
  j["model"] = r.model_digest;
  j["teor1"] = verdict_json(r.teor1);
  j["teor2"] = verdict_json(r.teor2);
  j["teor3"] = verdict_json(r.teor3);
  j["lipschitz_a1"] = lipschitz_json(r.lipschitz_a1);
  j["lipschitz_xi1"] = lipschitz_json(r.lipschitz_xi1);
  Json tail;
  tail["estimate"] = num(r.tail_sum_estimate);
  tail["remainder_bound"] = num(r.tail_sum_remainder);
  tail["terms"] = r.tail_sum_terms;
  j["tail_sum"] = tail;
  j["l2_sum"] = num(r.l2_sum_estimate);
  j["tn_phi1_lower_bound"] = num(r.tn_phi1_lower_bound);
  Json sigma;
  sigma["applicable"] = r.sigma_applicable;
  sigma["singular"] = r.sigma_singular;
  sigma["reason"] = r.sigma_reason;
  sigma["checked_up_to"] = r.sigma_checked_up_to;
  Json vals = Json::array();
  for (double v : r.sigma_inv_11) vals.push_back(num(v));
  sigma["inv_11"] = vals;
  j["sigma"] = sigma;
  return j;
}

Json to_json(const diag::ConvergenceReport& r) {
  Json j;
  j["x"] = r.x;
  j["t"] = r.t;
  j["method"] = r.method;
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json e;
    e["N"] = p.N;
    e["N_next"] = p.N_next;
    e["l1"] = num(p.l1);
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  j["verdict"] = diag::to_string(r.verdict);
  Json grids = Json::array();
  for (const auto& g : r.grids) grids.push_back(meta_json(g));
  j["grids"] = grids;
  return j;
}

Json error_json(const std::exception& e) {
  Json j;
  if (const auto* he = dynamic_cast<const Error*>(&e)) {
    j["error"] = he->kind();
    j["exit_code"] = static_cast<int>(he->code());
  } else {
    j["error"] = "internal error";
    j["exit_code"] = exit_code_for(e);
  }
  j["message"] = e.what();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) j["violations"] = ce->violations();
  if (const auto* de = dynamic_cast<const DegeneracyError*>(&e)) j["condition_number"] = num(de->condition_number());
  return j;
}

int exit_code_for(const std::exception& e) {
  if (const auto* he = dynamic_cast<const Error*>(&e)) return static_cast<int>(he->code());
  return 70;
}

}  // namespace heatdens::cli
