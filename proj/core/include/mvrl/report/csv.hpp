#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mvrl::report {

/// Shortest decimal that parses back to the same double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);
/// Inverse of format_double; throws std::invalid_argument on malformed text.
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
  std::string to_string() const;
};

CsvTable parse_csv(std::string_view text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mvrl::report
