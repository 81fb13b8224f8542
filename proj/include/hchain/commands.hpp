#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace hchain {

inline constexpr const char* tool_version = "0.1.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int domain = 1;       // inadmissible parameters, failed verdicts
inline constexpr int input = 2;        // parse errors, invalid configs, missing inputs
inline constexpr int environment = 3;  // filesystem failures
}  // namespace exit_code

struct CommandOptions {
    /// Overrides [run] output from the config.
    std::optional<std::filesystem::path> output;
    unsigned workers = 1;
};

/// Condition C report; exit 0 iff admissible.
int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Writes member_NNNNNN.{bin,csv} plus manifest.txt into the output directory.
int cmd_simulate(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
                 std::ostream& err);

/// Writes spectrum.csv, equal_time.csv, pairing.csv (and homogeneous.csv for a
/// homogeneous chain) into the output directory.
int cmd_limits(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
               std::ostream& err);

/// Reads the simulated members and writes convergence.csv, gaussianity.csv,
/// mixing.csv and summary.txt; exit 0 iff every verdict passes.
int cmd_compare(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace hchain
