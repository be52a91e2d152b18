#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "dabag/dataset.hpp"

namespace dabag::cli {

// Raw RFC-4180 table. The first record is the header.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line on which each row starts, for diagnostics.
  std::vector<std::size_t> lines;
};

// Throws DataError with "source:line:" prefixes on unterminated quotes or
// ragged rows. An empty stream yields an empty header and no rows.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

// Quotes a field only when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

// Orders distinct label strings: numerically when every one parses as a
// number, lexicographically otherwise. Position + 1 is the class id.
std::vector<std::string> ordered_labels(const std::vector<std::string>& raw);

struct FeatureTable {
  std::vector<std::string> feature_names;
  // Absent when the table has no rows.
  std::optional<Dataset> data;
  std::size_t rows = 0;
};

struct ColumnChoice {
  std::string label;
  std::vector<std::string> ignore;
};

// Training table: the label column is required and every other column not
// ignored is a numeric feature.
FeatureTable training_table(const CsvTable& table, const ColumnChoice& columns);

// Test table: features are looked up by the training feature names, so a
// label column or extra columns are simply not read.
FeatureTable test_table(const CsvTable& table, const std::vector<std::string>& feature_names);

}  // namespace dabag::cli
