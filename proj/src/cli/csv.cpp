#include "qrsim/cli/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace qrsim::cli {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

std::string fmt_int(long long v) { return std::to_string(v); }

void write_header_block(std::ostream& os, const RunManifest& m, const std::string& schema,
                        const char* comment) {
  os << comment << "tool: qrsim " << kToolVersion << '\n';
  os << comment << "schema: " << schema << '\n';
  os << comment << "seed: " << m.seed << '\n';
  os << comment << "manifest_hash: " << m.hash() << '\n';
  os << comment << "manifest: " << m.to_json().dump() << '\n';
}

void write_csv(std::ostream& os, const RunManifest& m, const CsvTable& t) {
  write_header_block(os, m, t.schema);
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

}  // namespace qrsim::cli
