#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "advseq/prob.hpp"
#include "run_config.hpp"

namespace advseq::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitIo = 4,
};

/// Pooled pixel histogram of whitespace-separated intensities in [0, 255];
/// symbol 1 means v > threshold. EmptyDataError for no values, FormatError for
/// a token that is not an integer in range, IoError when unreadable.
Distribution ingest_histogram(const std::filesystem::path& path, int threshold);
Distribution ingest_histogram(std::istream& in, int threshold);

/// Human summary to `out`; CSV to `csv_path` when given, else after the summary.
void run_solve(const RunConfig& config, const std::optional<std::filesystem::path>& csv_path,
               std::ostream& out);
/// Single-alpha report CSV.
void run_simulate(const RunConfig& config, const std::filesystem::path& csv_path);
void run_sweep(const RunConfig& config, const std::filesystem::path& csv_path);
void run_ingest(const std::filesystem::path& data, int threshold,
                const std::filesystem::path& csv_path);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace advseq::app
