// CSV output with a commented header block (tool version, schema, seed,
// manifest hash, manifest).
#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qrsim/cli/manifest.hpp"

namespace qrsim::cli {

struct CsvTable {
  std::string schema;  // e.g. "simulate_ion/1"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string fmt(double v);
std::string fmt(std::optional<double> v);  // empty cell when absent
std::string fmt_int(long long v);

void write_header_block(std::ostream& os, const RunManifest& m, const std::string& schema,
                        const char* comment = "# ");
void write_csv(std::ostream& os, const RunManifest& m, const CsvTable& t);

}  // namespace qrsim::cli
