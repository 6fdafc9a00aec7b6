#pragma once

#include "heatdens/diagnostics.hpp"

#include <json.hpp>

#include <exception>
#include <filesystem>
#include <string>

namespace heatdens::cli {

using Json = nlohmann::ordered_json;

// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_number(double v);  // %.17g, round-trips
std::string file_tag(double v);       // %g, for file names

// "u,density" header, one LF-terminated pair per line.
std::string grid_csv(const engine::DensityGrid& g);
engine::DensityGrid parse_grid_csv(const std::string& text);

Json meta_json(const engine::DensityGrid& g);
Json to_json(const diag::HypothesisReport& r);
Json to_json(const diag::ConvergenceReport& r);

// Machine-readable description of a failure, for stderr.
Json error_json(const std::exception& e);
int exit_code_for(const std::exception& e);

}  // namespace heatdens::cli
