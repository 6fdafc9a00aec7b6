#include "heatdens/cli/commands.hpp"
#include "heatdens/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Densities of the randomized heat equation solution"};
  app.require_subcommand(1);

  heatdens::cli::Options opts;
  std::string simd;
  std::uint64_t seed = 0;

  const char* commands[][2] = {
      {"density", "tabulate densities for every order and point"},
      {"converge", "L1 distances between successive orders"},
      {"validate", "compare quadrature densities with Monte Carlo samples"},
      {"check", "evaluate the hypotheses of the convergence theorems"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option_function<std::string>("--out", [&](const std::string& d) { opts.out_dir = d; },
                                          "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "Monte Carlo seed (overrides quad.seed)");
    sub->add_option("--threads", opts.threads, "worker threads, 0 for all cores");
    sub->add_option("--simd", simd, "kernel level: scalar, avx2, avx512")->check(CLI::IsMember({"scalar", "avx2", "avx512"}));
    if (std::string(name) == "validate") sub->add_flag("--samples-csv", opts.samples_csv, "also write the raw samples");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (!simd.empty()) {
    const auto level = heatdens::simd::parse_level(simd);
    if (!level || !heatdens::simd::level_available(*level)) {
      std::cerr << R"({"error":"domain error","exit_code":2,"message":"SIMD level )" << simd
                << R"( is not available on this machine"})" << '\n';
      return 2;
    }
    heatdens::simd::set_level_override(*level);
  }
  return heatdens::cli::run(sub->get_name(), opts, std::cout, std::cerr);
}
