#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace masskit {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest round-trip text for a double; "nan", "inf", "-inf" for the rest.
std::string format_number(double value);

// Writes to a sibling temporary and renames over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// One line per record.
std::string json_lines(const std::vector<json>& records);

struct Audit {
  std::string name;
  bool pass = false;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string location;
  // short description of the identity or bound being checked
  std::string anchor;
};

json to_json(const Audit& audit);

Audit audit_at_most(std::string name, double lhs, double rhs, std::string anchor,
                    std::string location = {});
Audit audit_at_least(std::string name, double lhs, double rhs, std::string anchor,
                     std::string location = {});

struct StageOutcome {
  std::string name;
  std::string outcome;  // ok | error | skipped
  std::string message;
};

class RunManifest {
 public:
  RunManifest(std::string command, std::string config_hash);

  void stage(std::string name, std::string outcome, std::string message = {});
  // Replaces an audit of the same name so each is listed once.
  void audit(Audit a);
  bool all_pass() const;
  const std::vector<Audit>& audits() const { return audits_; }
  json to_json() const;

 private:
  std::string command_;
  std::string config_hash_;
  std::vector<StageOutcome> stages_;
  std::vector<Audit> audits_;
};

}  // namespace masskit
