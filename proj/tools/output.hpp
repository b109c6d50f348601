#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace ness::cli {

/// 17 significant digits; negative zero is written as 0.
std::string format_real(double v);

/// CSV with a fixed header; each row must match the header width.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  template <typename... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> out;
    out.reserve(sizeof...(Cells));
    (out.push_back(cell(cells)), ...);
    write(out);
  }

 private:
  static std::string cell(double v) { return format_real(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  template <typename Int>
  static std::string cell(Int v) requires std::is_integral_v<Int> {
    return std::to_string(v);
  }

  void write(const std::vector<std::string>& cells);

  std::filesystem::path path_;
  std::size_t width_;
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace ness::cli
