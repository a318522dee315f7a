#include "memdd/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "memdd/errors.hpp"

namespace memdd {

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw IoError("row has " + std::to_string(row.size()) + " values for " +
                  std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

void write_csv(const CsvTable& table, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    std::fprintf(f, j ? ",%s" : "%s", table.columns[j].c_str());
  }
  std::fputc('\n', f);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      std::fclose(f);
      throw IoError("row width does not match the header in '" + path + "'");
    }
    for (std::size_t j = 0; j < row.size(); ++j) std::fprintf(f, j ? ",%.17g" : "%.17g", row[j]);
    std::fputc('\n', f);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' has no header row");
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) t.columns.push_back(name);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw IoError("'" + path + "' line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) {
      throw IoError("'" + path + "' line " + std::to_string(lineno) + ": wrong number of columns");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

const std::vector<std::string>& profile_columns() {
  static const std::vector<std::string> c{"x", "n", "p", "D", "V", "phi_n", "phi_p", "phi_D"};
  return c;
}

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> c{"t",
                                          "H_full",
                                          "H_reduced",
                                          "entropy_production_D",
                                          "entropy_production_np",
                                          "mass_D",
                                          "current",
                                          "applied_voltage",
                                          "newton_iters"};
  return c;
}

CsvTable profile_table(const Grid& grid, const State& s) {
  if (s.size() != grid.size()) throw IoError("state size does not match the grid");
  CsvTable t{profile_columns(), {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    t.add_row({grid.x(k), s.n(k), s.p(k), s.D(k), s.V[k], s.phi_n[k], s.phi_p[k], s.phi_D[k]});
  }
  return t;
}

CsvTable diagnostics_table(const std::vector<DiagnosticsRecord>& records) {
  CsvTable t{diagnostics_columns(), {}};
  for (const auto& r : records) {
    t.add_row({r.t, r.H_full, r.H_reduced, r.entropy_production_D, r.entropy_production_np,
               r.mass_D, r.current, r.applied_voltage, static_cast<double>(r.newton_iters)});
  }
  return t;
}

}  // namespace memdd
