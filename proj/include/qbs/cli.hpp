#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qbs/oracle.hpp"

namespace qbs::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // configuration, I/O or invariant failure
  kUsage = 2,         // bad command line
  kUnstable = 3,      // PDE stability abort
};

struct MomentsOptions {
  std::filesystem::path config_path;
  int max_order = 4;
  std::vector<std::string> overrides;  // key=value, applied after the file
};

struct SimulateOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
  std::optional<std::int64_t> steps;
  std::optional<std::filesystem::path> out_dir;
  int threads = 1;
  std::vector<std::string> overrides;
};

struct OracleOptions {
  std::filesystem::path config_path;
  int truncation = 2;
  std::optional<std::int64_t> grid_cells;
  std::optional<double> t_final;
  oracle::Reference reference = oracle::Reference::Auto;
  std::optional<std::filesystem::path> out_dir;
  int threads = 1;
  std::vector<std::string> overrides;
};

struct CompareOptions {
  std::filesystem::path dir_a;
  std::filesystem::path dir_b;
};

/// QBS_OUT_DIR when set and non-empty, otherwise "qbs_out".
std::filesystem::path default_out_dir();

int cmd_moments(const MomentsOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qbs::cli
