#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nibvp {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double v);  // 17 significant digits, round-trips exactly
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

}  // namespace nibvp
