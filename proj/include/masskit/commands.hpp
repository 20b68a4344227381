#pragma once

#include "masskit/config.hpp"
#include "masskit/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace masskit {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitAudit = 2, kExitNumerical = 3 };

// Maps a thrown error onto the exit contract.
int exit_code_for(const std::exception& e);

struct RunOptions {
  std::string command;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

// Runs one command end to end: reads the scene, writes report.json, manifest.json,
// tables and logs under the output directory, and returns the exit code.
int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);

// argv front end; MASSKIT_THREADS backs up --threads.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct ConvergenceRow {
  double step = 0.0;
  double error = 0.0;
  double order = 0.0;  // against the previous row; 0 on the first
};

struct ConvergenceStudy {
  std::string operation;
  bool exact_reference = false;
  std::vector<ConvergenceRow> rows;
  double last_order = 0.0;
};

// Max |R - exact| over seeded sample points on the given radii, h halved per level.
// Without an exact value the error is the change from the previous level.
ConvergenceStudy scalar_curvature_study(const MetricSpec& g, std::span<const double> radii,
                                        double h0, int levels, std::uint64_t seed,
                                        int directions, std::optional<double> exact);

// |m(rho) - m| over a doubling radius ladder.
ConvergenceStudy mass_radius_study(const MetricSpec& g, std::span<const double> radii,
                                   std::optional<double> exact, int order = 24);

// Seeded unit directions on S^{n-1}.
std::vector<Vec> seeded_directions(int n, int count, std::uint64_t seed);

}  // namespace masskit
