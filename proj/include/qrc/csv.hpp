#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qrc/dynamics.hpp"

namespace qrc {

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_csv(std::ostream& os, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
CsvTable read_csv(std::istream& is);

// Header `t,c0,c1,...` with t = (first_index + k) * tau.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          long first_index = 0);
// Reads a trajectory CSV; tau is recovered from the time column.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace qrc
