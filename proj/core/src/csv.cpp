#include "cpce/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "cpce/math_util.hpp"

namespace cpce {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string Trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

int CsvTable::ColumnIndex(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  return -1;
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (trimmed[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (!have_header) {
      table.header = SplitLine(trimmed);
      for (auto& h : table.header) h = Trim(h);
      have_header = true;
      continue;
    }
    auto fields = SplitLine(trimmed);
    if (fields.size() != table.header.size()) {
      throw SchemaError("CSV row with " + std::to_string(fields.size()) +
                        " fields, expected " +
                        std::to_string(table.header.size()) + " in " + path);
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw SchemaError("CSV file has no header: " + path);
  return table;
}

double ParseDouble(const std::string& field) {
  const std::string t = Trim(field);
  if (t.empty()) throw DataError("empty numeric field");
  if (t == "nan" || t == "NaN" || t == "NA") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0' || errno == ERANGE) {
    throw DataError("cannot parse numeric field '" + field + "'");
  }
  return v;
}

int ParseBinary(const std::string& field, const std::string& what) {
  const std::string t = Trim(field);
  if (t == "0") return 0;
  if (t == "1") return 1;
  // Accept float encodings of the two integers as a courtesy.
  const double v = ParseDouble(t);
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw DataError(what + " must be 0 or 1, got '" + field + "'");
}

void WriteCsv(const std::string& path, const std::vector<std::string>& comments,
              const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open file for writing: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ",";
    out << header[j];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << row[j];
    }
    out << "\n";
  }
  if (!out) throw SchemaError("write failed: " + path);
}

SampleTable ReadSampleTableCsv(const std::string& path,
                               const TableColumns& cols) {
  const CsvTable csv = ReadCsv(path);
  const int yj = csv.ColumnIndex(cols.y_col);
  const int sj = csv.ColumnIndex(cols.s_col);
  const int zj = csv.ColumnIndex(cols.z_col);
  if (yj < 0) throw SchemaError("missing outcome column '" + cols.y_col + "'");
  if (sj < 0) throw SchemaError("missing column '" + cols.s_col + "'");
  if (zj < 0) throw SchemaError("missing column '" + cols.z_col + "'");

  std::vector<int> xj;
  if (cols.x_cols.empty()) {
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      const int jj = static_cast<int>(j);
      if (jj != yj && jj != sj && jj != zj) xj.push_back(jj);
    }
  } else {
    for (const auto& name : cols.x_cols) {
      const int jj = csv.ColumnIndex(name);
      if (jj < 0) throw SchemaError("missing covariate column '" + name + "'");
      xj.push_back(jj);
    }
  }
  if (xj.empty()) throw SchemaError("no covariate columns designated");

  const Index n = static_cast<Index>(csv.rows.size());
  if (n == 0) throw SchemaError("CSV has no data rows: " + path);
  SampleTable t;
  t.x.resize(n, static_cast<Index>(xj.size()));
  t.y.resize(n);
  t.s.resize(n);
  t.z.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < xj.size(); ++k) {
      t.x(i, static_cast<Index>(k)) =
          ParseDouble(row[static_cast<std::size_t>(xj[k])]);
    }
    t.y(i) = ParseDouble(row[static_cast<std::size_t>(yj)]);
    t.s(i) = ParseBinary(row[static_cast<std::size_t>(sj)], cols.s_col);
    t.z(i) = ParseBinary(row[static_cast<std::size_t>(zj)], cols.z_col);
  }
  t.Validate();
  return t;
}

void WriteSampleTableCsv(const std::string& path, const SampleTable& table,
                         const std::vector<std::string>& comments) {
  std::vector<std::string> header;
  for (Index j = 0; j < table.d(); ++j) {
    header.push_back("x" + std::to_string(j + 1));
  }
  header.push_back("y");
  header.push_back("s");
  header.push_back("z");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(table.n()));
  for (Index i = 0; i < table.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (Index j = 0; j < table.d(); ++j) {
      row.push_back(FormatDouble(table.x(i, j)));
    }
    row.push_back(FormatDouble(table.y(i)));
    row.push_back(std::to_string(table.s(i)));
    row.push_back(std::to_string(table.z(i)));
    rows.push_back(std::move(row));
  }
  WriteCsv(path, comments, header, rows);
}

}  // namespace cpce
