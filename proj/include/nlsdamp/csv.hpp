#pragma once

// Plain CSV tables with 17-significant-digit floats.

#include <filesystem>
#include <string>
#include <vector>

namespace nlsdamp::csv {

/// "%.17g": round-trips every finite double.
std::string fmt(double v);

struct Table {
  std::vector<std::string> comments;  // lines written as "# ..." before the header
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] std::vector<double> column_values(const std::string& name) const;
};

void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);

}  // namespace nlsdamp::csv
