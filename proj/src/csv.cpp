#include "qrc/csv.hpp"

#include <cmath>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qrc/error.hpp"

namespace qrc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    os << (i ? "," : "") << table.header[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_csv(os, table);
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != table.header.size()) {
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " fields");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  return read_csv(is);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          long first_index) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  os << 't';
  for (Eigen::Index c = 0; c < traj.dimension(); ++c) os << ",c" << c;
  os << '\n';
  for (Eigen::Index k = 0; k < traj.length(); ++k) {
    os << format_double(static_cast<double>(first_index + k) * traj.tau);
    for (Eigen::Index c = 0; c < traj.dimension(); ++c) {
      os << ',' << format_double(traj.states(k, c));
    }
    os << '\n';
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header[0] != "t") {
    throw ConfigError("'" + path.string() + "' is not a trajectory CSV (missing t column)");
  }
  Trajectory traj;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto d = static_cast<Eigen::Index>(table.header.size() - 1);
  traj.states.resize(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < d; ++c) traj.states(k, c) = table.rows[k][c + 1];
  }
  if (n > 1) {
    // Rows hold t = (first + k) * tau; recover tau from the integer index of
    // the last row so it matches the writer's value bit for bit.
    const double t0 = table.rows.front()[0], t1 = table.rows.back()[0];
    const double step = (t1 - t0) / static_cast<double>(n - 1);
    const double last = std::round(t0 / step) + static_cast<double>(n - 1);
    traj.tau = last > 0.0 ? t1 / last : step;
  }
  return traj;
}

}  // namespace qrc
