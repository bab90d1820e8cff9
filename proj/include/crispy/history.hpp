#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "crispy/catalog.hpp"
#include "crispy/core.hpp"

namespace crispy {

// Canonical execution-history file: CSV with header
//   job,framework,dataset_label,machine_type,node_count,runtime_seconds,cost[,dataset_bytes]
// cost and dataset_bytes may be empty. Machine types are resolved against the
// catalog; rows with an empty cost get it derived from runtime and price.
// Malformed rows are reported together with their line numbers.
std::vector<ExecutionRecord> load_history(const std::filesystem::path& path, const MachineCatalog& catalog);
std::vector<ExecutionRecord> parse_history(std::istream& in, const MachineCatalog& catalog,
                                           const std::string& origin);

void write_history(std::ostream& out, const std::vector<ExecutionRecord>& records);
void write_history(const std::filesystem::path& path, const std::vector<ExecutionRecord>& records);

}  // namespace crispy
