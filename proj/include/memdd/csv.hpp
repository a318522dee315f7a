#pragma once

// Numeric CSV tables: header row, then one row per record, 17 significant
// digits so values survive a round trip.

#include <string>
#include <vector>

#include "memdd/assembly.hpp"
#include "memdd/device_model.hpp"
#include "memdd/diagnostics.hpp"

namespace memdd {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Appends a row; throws IoError if its width differs from the header.
  void add_row(std::vector<double> row);
  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

/// Throws IoError when the file cannot be written.
void write_csv(const CsvTable& table, const std::string& path);
/// Inverse of write_csv. Throws IoError for missing files or malformed rows.
CsvTable read_csv(const std::string& path);

const std::vector<std::string>& profile_columns();      ///< x, n, p, D, V, phi_n, phi_p, phi_D
const std::vector<std::string>& diagnostics_columns();  ///< DiagnosticsRecord fields

CsvTable profile_table(const Grid& grid, const State& state);
CsvTable diagnostics_table(const std::vector<DiagnosticsRecord>& records);

}  // namespace memdd
