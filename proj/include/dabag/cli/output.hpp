#pragma once

#include <optional>
#include <string>

#include "dabag/eval.hpp"

namespace dabag::cli {

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

// One line per record. The runtime column is included only with `timing`,
// since it is the one field that varies between identical runs.
std::string records_csv(const std::vector<ExperimentRecord>& records, bool timing);
std::string aggregates_json(const ExperimentConfig& cfg, const std::vector<ExperimentAggregate>& aggregates);
// Fixed-width table for the terminal.
std::string aggregates_table(const std::vector<ExperimentAggregate>& aggregates);

// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace dabag::cli
