#include "dabag/cli/output.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dabag/cli/csv.hpp"
#include "dabag/error.hpp"

namespace dabag::cli {

namespace {

std::string join_q(const std::vector<double>& q) {
  std::string out;
  for (std::size_t i = 0; i < q.size(); ++i) out += (i ? ";" : "") + format_number(q[i]);
  return out;
}

nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  if (s.count > 0) {
    j["mean"] = s.mean;
    j["sd"] = s.sd;
  } else {
    j["mean"] = nullptr;
    j["sd"] = nullptr;
  }
  return j;
}

std::string short_q(const std::vector<double>& q) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f", q[i]);
    out += (i ? ";" : "") + std::string(buf);
  }
  return out;
}

std::string pad(std::string s, std::size_t width) {
  s.push_back(' ');
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string fixed(const Summary& s) {
  if (s.count == 0) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f (%.4f)", s.mean, s.sd);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string records_csv(const std::vector<ExperimentRecord>& records, bool timing) {
  std::ostringstream out;
  out << "grid_index,q,rep,seed,scenario,method,scored,accuracy,error,type_I,power";
  if (timing) out << ",runtime_seconds";
  out << ",failure\n";
  for (const auto& r : records) {
    out << r.grid_index << ',' << join_q(r.q) << ',' << r.rep << ',' << r.seed << ',' << csv_escape(r.scenario) << ','
        << csv_escape(r.method) << ',' << r.scored << ',' << format_optional(r.accuracy) << ','
        << format_optional(r.error) << ',' << format_optional(r.type_I) << ',' << format_optional(r.power);
    if (timing) out << ',' << format_number(r.runtime_seconds);
    out << ',' << csv_escape(r.failure) << '\n';
  }
  return out.str();
}

std::string aggregates_json(const ExperimentConfig& cfg, const std::vector<ExperimentAggregate>& aggregates) {
  nlohmann::ordered_json root;
  root["scenario"] = to_string(cfg.scenario);
  root["n_train"] = cfg.n_train;
  root["n_test"] = cfg.n_test;
  root["epsilon_out"] = cfg.epsilon_out;
  root["reps"] = cfg.reps;
  root["seed"] = cfg.seed;
  auto& rows = root["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : aggregates) {
    nlohmann::ordered_json j;
    j["grid_index"] = a.grid_index;
    j["q"] = a.q;
    j["method"] = a.method;
    j["accuracy"] = summary_json(a.accuracy);
    j["error"] = summary_json(a.error);
    j["type_I"] = summary_json(a.type_I);
    j["power"] = summary_json(a.power);
    j["failures"] = a.failures;
    rows.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::string aggregates_table(const std::vector<ExperimentAggregate>& aggregates) {
  std::ostringstream out;
  out << pad("q", 22) << pad("method", 16) << pad("accuracy (sd)", 20) << pad("type I (sd)", 20)
      << pad("power (sd)", 20) << "failures\n";
  for (const auto& a : aggregates) {
    out << pad(short_q(a.q), 22) << pad(a.method, 16) << pad(fixed(a.accuracy), 20) << pad(fixed(a.type_I), 20)
        << pad(fixed(a.power), 20) << a.failures << '\n';
  }
  return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw DataError(path + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError(path + ": rename failed: " + ec.message());
  }
}

}  // namespace dabag::cli
