#pragma once

#include "heatdens/cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace heatdens::cli {

struct Options {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool samples_csv = false;
};

// Each command writes its files under the output directory and returns the
// paths written. Failures propagate as heatdens::Error.
std::vector<std::filesystem::path> cmd_density(const RunConfig& cfg, unsigned threads);
std::vector<std::filesystem::path> cmd_converge(const RunConfig& cfg, unsigned threads);
// Sets all_passed to false when any comparison misses its tolerance.
std::vector<std::filesystem::path> cmd_validate(const RunConfig& cfg, unsigned threads, bool& all_passed);
std::vector<std::filesystem::path> cmd_check(const RunConfig& cfg);

// Loads the configuration, applies command-line overrides, runs the named
// command and maps failures to exit codes (JSON on err). Returns 1 when
// validate ran but some comparison failed.
int run(const std::string& command, const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace heatdens::cli
