#pragma once

#include <string>
#include <vector>

#include "cpce/sample_table.hpp"

namespace cpce {

// Parsed CSV content. Comment lines (leading '#', after optional spaces)
// and blank lines are skipped; the first remaining line is the header.
struct CsvTable {
  std::vector<std::string> comments;  // leading '#' lines, verbatim
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int ColumnIndex(const std::string& name) const;  // -1 if absent
};

CsvTable ReadCsv(const std::string& path);

double ParseDouble(const std::string& field);
int ParseBinary(const std::string& field, const std::string& what);

// Writes comments (each given line prefixed with "# "), a header row and
// string cells joined by commas, with a trailing newline per row.
void WriteCsv(const std::string& path, const std::vector<std::string>& comments,
              const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows);

// Column designations for reading a sample table out of a general CSV.
struct TableColumns {
  std::vector<std::string> x_cols;  // empty: all columns except y/s/z
  std::string y_col = "y";
  std::string s_col = "s";
  std::string z_col = "z";
};

SampleTable ReadSampleTableCsv(const std::string& path,
                               const TableColumns& cols);

// Writes a sample table as x1..xd,y,s,z with 17-significant-digit floats.
void WriteSampleTableCsv(const std::string& path, const SampleTable& table,
                         const std::vector<std::string>& comments);

}  // namespace cpce
