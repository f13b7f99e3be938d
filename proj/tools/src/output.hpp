#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmscat::cli {

/// "%.17g": round-trips every double.
std::string format_double(double x);

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Header row, comma separated, LF line endings.
std::string to_csv(const Table& t);
/// {"columns": [...], "rows": [[...], ...]}
nlohmann::json to_json(const Table& t);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Serialized JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

struct WrittenFile {
  std::string name;  ///< relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes `content` to dir/name and returns its hash. Throws ConfigError if the path is unwritable.
WrittenFile write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace tmscat::cli
