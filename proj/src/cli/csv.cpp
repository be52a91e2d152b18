#include "dabag/cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "dabag/error.hpp"

namespace dabag::cli {

namespace {

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line) + ": "; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

void check_unique_header(const CsvTable& t) {
  std::set<std::string> seen;
  for (const auto& h : t.header) {
    if (!seen.insert(h).second) throw DataError(where(t.source, 1) + "duplicate column '" + h + "'");
  }
}

Matrix numeric_block(const CsvTable& t, const std::vector<std::size_t>& cols) {
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string& cell = t.rows[r][cols[c]];
      const auto v = parse_number(cell);
      if (!v || !std::isfinite(*v)) {
        throw DataError(where(t.source, t.lines[r]) + "column '" + t.header[cols[c]] + "': '" + cell +
                        "' is not a finite number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return m;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> starts;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool record_open = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    starts.push_back(record_line);
    record.clear();
    record_open = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (!record_open) {
      record_open = true;
      record_line = line;
    }
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() || field_was_quoted) {
        throw DataError(where(source, line) + "quote inside an unquoted field");
      }
      quoted = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (ch == '\n') {
      end_record();
      ++line;
    } else {
      if (field_was_quoted) throw DataError(where(source, line) + "text after a closing quote");
      field.push_back(ch);
    }
  }
  if (quoted) throw DataError(where(source, record_line) + "unterminated quoted field");
  if (record_open) end_record();

  // Blank lines carry no data.
  std::size_t out = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (out != r) {
      records[out] = std::move(records[r]);
      starts[out] = starts[r];
    }
    ++out;
  }
  records.resize(out);
  starts.resize(out);
  if (records.empty()) return t;

  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw DataError(where(source, starts[r]) + "expected " + std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
    t.lines.push_back(starts[r]);
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  return read_csv(in, path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> ordered_labels(const std::vector<std::string>& raw) {
  std::vector<std::string> distinct(raw.begin(), raw.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool numeric = std::all_of(distinct.begin(), distinct.end(), [](const auto& s) { return parse_number(s); });
  if (numeric) {
    std::stable_sort(distinct.begin(), distinct.end(),
                     [](const auto& a, const auto& b) { return *parse_number(a) < *parse_number(b); });
  }
  return distinct;
}

FeatureTable training_table(const CsvTable& table, const ColumnChoice& columns) {
  if (table.header.empty()) throw DataError(table.source + ": empty file (a header row is required)");
  check_unique_header(table);
  const auto label_col = find_column(table.header, columns.label);
  if (!label_col) throw DataError(where(table.source, 1) + "no label column '" + columns.label + "'");
  for (const auto& name : columns.ignore) {
    if (!find_column(table.header, name)) throw DataError(where(table.source, 1) + "no column '" + name + "' to ignore");
  }

  FeatureTable out;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *label_col) continue;
    if (std::find(columns.ignore.begin(), columns.ignore.end(), table.header[c]) != columns.ignore.end()) continue;
    cols.push_back(c);
    out.feature_names.push_back(table.header[c]);
  }
  if (cols.empty()) throw DataError(where(table.source, 1) + "no feature columns left");
  if (table.rows.empty()) throw DataError(table.source + ": training file has no data rows");

  std::vector<std::string> raw;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cell = table.rows[r][*label_col];
    if (trim(cell).empty()) throw DataError(where(table.source, table.lines[r]) + "empty label");
    raw.emplace_back(trim(cell));
  }
  auto names = ordered_labels(raw);
  if (names.size() < 2) throw DataError(table.source + ": training labels need at least two classes");
  std::map<std::string, Label> ids;
  for (std::size_t l = 0; l < names.size(); ++l) ids[names[l]] = static_cast<Label>(l + 1);
  std::vector<Label> labels;
  labels.reserve(raw.size());
  for (const auto& s : raw) labels.push_back(ids.at(s));
  const int n_classes = static_cast<int>(names.size());
  out.rows = table.rows.size();
  out.data.emplace(numeric_block(table, cols), std::move(labels), n_classes, std::move(names));
  return out;
}

FeatureTable test_table(const CsvTable& table, const std::vector<std::string>& feature_names) {
  FeatureTable out;
  out.feature_names = feature_names;
  if (table.header.empty()) return out;
  check_unique_header(table);
  std::vector<std::size_t> cols;
  for (const auto& name : feature_names) {
    const auto c = find_column(table.header, name);
    if (!c) throw DataError(where(table.source, 1) + "missing feature column '" + name + "'");
    cols.push_back(*c);
  }
  out.rows = table.rows.size();
  if (!table.rows.empty()) out.data.emplace(numeric_block(table, cols));
  return out;
}

}  // namespace dabag::cli
