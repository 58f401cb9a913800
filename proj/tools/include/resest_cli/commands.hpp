// Subcommands of the resest tool. Each returns the process exit code and
// writes human-readable output to `out`, diagnostics to `err`.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace resest::cli {

enum ExitCode : int {
  kOk = 0,
  kAuditFailure = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

/// Directory used when no --out/--out-dir is given: $RESEST_OUT_DIR, else ".".
std::filesystem::path default_output_dir();

int cmd_audit(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err);

struct MedianOptions {
  std::vector<double> z;    ///< empty: 0, 1, ..., n-1
  std::vector<int> s;       ///< empty: all ones
  std::vector<double> x0;   ///< empty: all zeros
  double gamma = 1.0;
  std::string topology = "ring";
  std::optional<std::size_t> nodes;  ///< defaults to the length of z
  double horizon = 0.0;              ///< <= 0 picks the solver default
  double dt = 1e-3;
  double tail_fraction = 0.2;
  std::optional<std::filesystem::path> csv;  ///< "-" writes to `out`
};

int cmd_median(const MedianOptions& opt, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> out_dir;
  bool force = false;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::size_t> decimation;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct BoundsOptions {
  std::filesystem::path scenario;
  std::optional<std::size_t> nbar;
  std::optional<double> sbar;
};

int cmd_bounds(const BoundsOptions& opt, std::ostream& out, std::ostream& err);

struct SweepOptions {
  std::filesystem::path scenario;
  std::vector<double> kappas;
  std::vector<double> gammas;
  std::optional<double> eta;  ///< target tail infinity-norm error for the frontier
  std::optional<std::filesystem::path> out_dir;
  std::size_t jobs = 0;       ///< 0: hardware concurrency
  bool force = false;
  bool write_logs = false;
};

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace resest::cli
