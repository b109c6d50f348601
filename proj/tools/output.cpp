#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ness::cli {

std::string format_real(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), width_(header.size()), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  write(header);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

}  // namespace ness::cli
