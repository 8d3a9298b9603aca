#pragma once

#include "oqmap/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace oqmap {

// 17 significant digits, round-trippable.
std::string format_double(double x);

// Writes to a sibling temp file and renames it over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// 16-byte header "OQMAP1\0\0", u32 rows, u32 cols, then LE f64 (re, im) row-major.
std::string matrix_to_binary(const Matrix& m);
Matrix matrix_from_binary(std::string_view bytes);

nlohmann::json builder_to_json(const BuilderInfo& b);

struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json digests = nlohmann::json::object();
  std::string timestamp;

  void add_output(const std::filesystem::path& path, std::string_view content);
  nlohmann::json to_json() const;
};

std::string tool_version();
std::string utc_timestamp();

}  // namespace oqmap
