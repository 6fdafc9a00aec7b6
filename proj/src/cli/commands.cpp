#include "heatdens/cli/commands.hpp"

#include "heatdens/cli/io.hpp"
#include "heatdens/diagnostics.hpp"
#include "heatdens/mc_oracle.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace heatdens::cli {

namespace fs = std::filesystem;

namespace {

std::string stem(std::string_view kind, engine::Method m, std::optional<std::size_t> N, const series::EvalPoint& p) {
  std::string s(kind);
  s += '_';
  s += engine::to_string(m);
  if (N) s += "_N" + std::to_string(*N);
  s += "_x" + file_tag(p.x) + "_t" + file_tag(p.t);
  return s;
}

Json header(const RunConfig& cfg) {
  Json j;
  if (!cfg.description.empty()) j["description"] = cfg.description;
  j["model"] = cfg.model_json;
  j["model_digest"] = cfg.model.describe();
  j["quad"] = cfg.quad.digest();
  return j;
}

fs::path out_dir(const RunConfig& cfg) { return fs::path(cfg.output.directory); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

mc::SampleRoute route_for(engine::Method m) {
  return m == engine::Method::kl ? mc::SampleRoute::kl : mc::SampleRoute::fourier;
}

bool heavy_tailed(const models::ProcessSpec& process) {
  for (const auto& law : process.xi_laws)
    if (law.tail_class() == models::TailClass::heavy) return true;
  return false;
}

}  // namespace

std::vector<fs::path> cmd_density(const RunConfig& cfg, unsigned threads) {
  std::vector<fs::path> written;
  for (const Study& s : cfg.studies) {
    for (std::size_t N : s.orders) {
      for (const auto& p : cfg.points) {
        const auto grid = engine::density_grid(p, N, s.method, cfg.model, cfg.quad, cfg.grid, threads);
        const auto base = out_dir(cfg) / stem("density", s.method, N, p);
        Json side = header(cfg);
        side["grid"] = meta_json(grid);
        const auto m = diag::density_moments(grid);
        side["mass"] = m.mass;
        side["mean"] = m.mean;
        side["variance"] = m.variance;
        fs::path csv = base, js = base;
        csv += ".csv";
        js += ".json";
        write_atomic(csv, grid_csv(grid));
        write_atomic(js, dump(side));
        written.push_back(csv);
        written.push_back(js);
      }
    }
  }
  return written;
}

std::vector<fs::path> cmd_converge(const RunConfig& cfg, unsigned threads) {
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < cfg.studies.size(); ++i)
    if (cfg.studies[i].orders.size() < 2)
      bad.push_back("studies[" + std::to_string(i) + "].orders: convergence needs at least two orders");
  if (!bad.empty()) throw ConfigError(bad);

  std::vector<fs::path> written;
  Json doc = header(cfg);
  Json studies = Json::array();
  for (const Study& s : cfg.studies) {
    Json study;
    study["method"] = engine::to_string(s.method);
    study["orders"] = s.orders;
    Json blocks = Json::array();
    for (const auto& p : cfg.points) {
      const auto report = diag::convergence_report(p, s.orders, s.method, cfg.model, cfg.quad, threads);
      blocks.push_back(to_json(report));
      std::string csv = "pair,l1\n";
      for (const auto& pair : report.pairs)
        csv += std::to_string(pair.N) + "-" + std::to_string(pair.N_next) + "," + format_number(pair.l1) + "\n";
      fs::path path = out_dir(cfg) / stem("converge", s.method, std::nullopt, p);
      path += ".csv";
      write_atomic(path, csv);
      written.push_back(path);
    }
    study["blocks"] = blocks;
    studies.push_back(study);
  }
  doc["studies"] = studies;
  const fs::path js = out_dir(cfg) / "converge.json";
  write_atomic(js, dump(doc));
  written.insert(written.begin(), js);
  return written;
}

std::vector<fs::path> cmd_validate(const RunConfig& cfg, unsigned threads, bool& all_passed) {
  all_passed = true;
  std::vector<fs::path> written;
  const auto& v = cfg.validate;
  Json doc = header(cfg);
  doc["samples"] = v.samples;
  doc["seed"] = cfg.quad.mc_seed;
  doc["ks_tol"] = v.ks_tol;
  doc["variance_rel_tol"] = v.variance_rel_tol;
  Json checks = Json::array();
  for (const Study& s : cfg.studies) {
    for (std::size_t N : s.orders) {
      for (const auto& p : cfg.points) {
        const auto samples =
            mc::sample_solution(cfg.model, p, N, v.samples, cfg.quad.mc_seed, route_for(s.method), threads);
        const auto sm = mc::sample_moments(samples.values);
        Json c;
        c["method"] = engine::to_string(s.method);
        c["N"] = N;
        c["x"] = p.x;
        c["t"] = p.t;
        c["mc_mean"] = sm.mean;
        c["mc_variance"] = sm.variance;

        bool passed = false;
        if (sm.variance <= v.degenerate_variance) {
          // Near point mass: the KS statistic is meaningless at any feasible
          // grid resolution, so only the spreads are compared.
          double grid_var = 0.0;
          try {
            const auto grid = engine::density_grid(p, N, s.method, cfg.model, cfg.quad, cfg.grid, threads);
            grid_var = diag::density_moments(grid).variance;
            c["grid_variance"] = grid_var;
          } catch (const DegenerateDistribution&) {
            c["grid_variance"] = 0.0;
          }
          const double rel = sm.variance > 0 ? std::abs(grid_var - sm.variance) / sm.variance : 0.0;
          c["branch"] = "degenerate";
          c["variance_rel_diff"] = rel;
          passed = grid_var <= v.degenerate_variance && rel <= v.variance_rel_tol;
        } else {
          const auto grid = engine::density_grid(p, N, s.method, cfg.model, cfg.quad, cfg.grid, threads);
          const auto gm = diag::density_moments(grid);
          const double ks = mc::ecdf_distance(samples, grid);
          const double mean_tol = 5.0 * std::sqrt(sm.variance / static_cast<double>(v.samples));
          const double rel = std::abs(gm.variance - sm.variance) / sm.variance;
          c["branch"] = "full";
          c["grid_mass"] = gm.mass;
          c["grid_mean"] = gm.mean;
          c["grid_variance"] = gm.variance;
          c["ks"] = ks;
          c["mean_abs_diff"] = std::abs(gm.mean - sm.mean);
          c["mean_tol"] = mean_tol;
          c["variance_rel_diff"] = rel;
          c["ks_pass"] = ks <= v.ks_tol;
          c["mean_pass"] = std::abs(gm.mean - sm.mean) <= mean_tol;
          c["variance_pass"] = rel <= v.variance_rel_tol;
          // With heavy-tailed xi the sample variance has no central limit
          // and the grid misses a slowly decaying tail share, so the
          // variance comparison is reported without deciding the outcome.
          const bool gate_variance = !heavy_tailed(cfg.model.process);
          c["variance_gated"] = gate_variance;
          passed = ks <= v.ks_tol && std::abs(gm.mean - sm.mean) <= mean_tol &&
                   (!gate_variance || rel <= v.variance_rel_tol);
        }
        c["passed"] = passed;
        all_passed = all_passed && passed;
        checks.push_back(c);

        if (cfg.output.samples_csv) {
          fs::path path = out_dir(cfg) / stem("samples", s.method, N, p);
          path += ".csv";
          write_atomic(path, mc::samples_csv(samples));
          written.push_back(path);
        }
      }
    }
  }
  doc["checks"] = checks;
  doc["passed"] = all_passed;
  const fs::path js = out_dir(cfg) / "validate.json";
  write_atomic(js, dump(doc));
  written.insert(written.begin(), js);
  return written;
}

std::vector<fs::path> cmd_check(const RunConfig& cfg) {
  std::set<std::size_t> orders;
  for (const Study& s : cfg.studies) orders.insert(s.orders.begin(), s.orders.end());
  Json doc = header(cfg);
  Json reports = Json::array();
  for (std::size_t N : orders)
    for (const auto& p : cfg.points) reports.push_back(to_json(diag::hypothesis_report(cfg.model, p, N)));
  doc["reports"] = reports;
  const fs::path js = out_dir(cfg) / "check.json";
  write_atomic(js, dump(doc));
  return {js};
}

int run(const std::string& command, const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(opts.config_path);
    if (opts.out_dir) cfg.output.directory = *opts.out_dir;
    if (opts.seed) cfg.quad.mc_seed = *opts.seed;
    if (opts.samples_csv) cfg.output.samples_csv = true;

    std::vector<fs::path> files;
    bool passed = true;
    if (command == "density")
      files = cmd_density(cfg, opts.threads);
    else if (command == "converge")
      files = cmd_converge(cfg, opts.threads);
    else if (command == "validate")
      files = cmd_validate(cfg, opts.threads, passed);
    else if (command == "check")
      files = cmd_check(cfg);
    else
      throw DomainError("unknown command '" + command + "'");
    for (const auto& f : files) out << f.string() << '\n';
    if (!passed) {
      err << "validation checks failed; see " << files.front().string() << '\n';
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << error_json(e).dump() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace heatdens::cli
