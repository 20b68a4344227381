#include "masskit/report.hpp"

#include "masskit/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace masskit {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[i] = digits[value & 0xf];
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw ConfigError("csv row width differs from header");
  rows_.push_back(cells);
}

std::string CsvTable::str() const {
  std::ostringstream s;
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s << (i ? "," : "") << cells[i];
    s << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return s.str();
}

std::string json_lines(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

namespace {

// JSON has no NaN or infinity; those go out as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

json to_json(const Audit& a) {
  json j;
  j["name"] = a.name;
  j["result"] = a.pass ? "PASS" : "FAIL";
  j["inequality"] = a.inequality;
  j["lhs"] = number(a.lhs);
  j["rhs"] = number(a.rhs);
  j["margin"] = number(a.pass ? std::abs(a.rhs - a.lhs) : -std::abs(a.rhs - a.lhs));
  if (!a.location.empty()) {
    j["location"] = a.location;
  } else if (!a.pass) {
    j["location"] = "whole sampled domain";
  }
  j["anchor"] = a.anchor;
  return j;
}

Audit audit_at_most(std::string name, double lhs, double rhs, std::string anchor,
                    std::string location) {
  Audit a{std::move(name), lhs <= rhs, "lhs <= rhs", lhs, rhs, std::move(location), std::move(anchor)};
  return a;
}

Audit audit_at_least(std::string name, double lhs, double rhs, std::string anchor,
                     std::string location) {
  Audit a{std::move(name), lhs >= rhs, "lhs >= rhs", lhs, rhs, std::move(location), std::move(anchor)};
  return a;
}

RunManifest::RunManifest(std::string command, std::string config_hash)
    : command_(std::move(command)), config_hash_(std::move(config_hash)) {}

void RunManifest::stage(std::string name, std::string outcome, std::string message) {
  stages_.push_back({std::move(name), std::move(outcome), std::move(message)});
}

void RunManifest::audit(Audit a) {
  for (Audit& existing : audits_) {
    if (existing.name == a.name) {
      existing = std::move(a);
      return;
    }
  }
  audits_.push_back(std::move(a));
}

bool RunManifest::all_pass() const {
  for (const Audit& a : audits_) {
    if (!a.pass) return false;
  }
  return true;
}

json RunManifest::to_json() const {
  json j;
  j["schema"] = 1;
  j["command"] = command_;
  j["config_hash"] = config_hash_;
  j["stages"] = json::array();
  for (const auto& s : stages_) {
    json st{{"name", s.name}, {"outcome", s.outcome}};
    if (!s.message.empty()) st["message"] = s.message;
    j["stages"].push_back(st);
  }
  j["audits"] = json::array();
  for (const auto& a : audits_) j["audits"].push_back(masskit::to_json(a));
  j["result"] = all_pass() ? "PASS" : "FAIL";
  return j;
}

}  // namespace masskit
