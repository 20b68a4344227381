#pragma once

#include "masskit/compactification.hpp"
#include "masskit/density.hpp"
#include "masskit/elliptic.hpp"
#include "masskit/metric.hpp"
#include "masskit/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace masskit {

// A configuration problem tied to a JSON pointer into the scene file.
class SchemaError : public ConfigError {
 public:
  SchemaError(const std::string& pointer, const std::string& what)
      : ConfigError(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

class SceneConfig {
 public:
  // Parses and checks the schema version; the hash covers the raw bytes.
  static SceneConfig load(const std::filesystem::path& path);
  static SceneConfig parse(const std::string& text, std::filesystem::path base_dir = {});

  const json& root() const { return root_; }
  const std::string& hash() const { return hash_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  bool has(const std::string& pointer) const;
  const json& at(const std::string& pointer) const;

  double number(const std::string& pointer) const;
  double number(const std::string& pointer, double fallback) const;
  // strictly positive
  double positive(const std::string& pointer, double fallback) const;
  int integer(const std::string& pointer) const;
  int integer(const std::string& pointer, int fallback) const;
  bool boolean(const std::string& pointer, bool fallback) const;
  std::string string(const std::string& pointer) const;
  std::string string(const std::string& pointer, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& pointer) const;
  std::vector<double> numbers(const std::string& pointer, std::vector<double> fallback) const;
  // strictly increasing, at least min_count entries
  std::vector<double> ladder(const std::string& pointer, std::size_t min_count) const;

  int dimension() const;
  std::uint64_t seed() const;
  std::string output_dir() const;

 private:
  json root_;
  std::string hash_;
  std::filesystem::path base_dir_;
};

// Metric family from /metric.
MetricSpec build_metric(const SceneConfig& cfg, const std::string& pointer = "/metric");

DomainModel build_domain(const SceneConfig& cfg, const std::string& pointer);
Potential build_potential(const SceneConfig& cfg, const std::string& pointer);
SolverControls build_controls(const SceneConfig& cfg, const std::string& pointer);
DensityOptions build_density_options(const SceneConfig& cfg, const std::string& pointer);
GroupAction build_group(const SceneConfig& cfg, const std::string& pointer, int n);

}  // namespace masskit
