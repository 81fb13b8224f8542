#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/initial_measures.hpp"
#include "hchain/statistics.hpp"
#include "hchain/test_function.hpp"
#include "hchain/trajectory_io.hpp"

namespace hchain {

/// Syntax error in a config file; line and column are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed config that violates a consistency rule (cone rule, ranges).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class InitialKind { white_noise, desk, gibbs, custom, delta };

struct NamedTestFunction {
    std::string name;
    TestFunction v;
    friend bool operator==(const NamedTestFunction&, const NamedTestFunction&) = default;
};

/// Flat key=value configuration with sections
/// [chain] [initial] [grid] [run] [test_functions].
struct RunConfig {
    // [chain]
    ChainParams params{1.0, 2.0, 1.0, 1.0, 2.0};
    ChainMode mode = ChainMode::full;

    // [initial]
    InitialKind initial_kind = InitialKind::desk;
    double temperature = 1.0;
    long kernel_radius = 3;
    HalfMeasureSpec custom_left;
    HalfMeasureSpec custom_right;
    long delta_site = 1;
    int delta_channel = 0;

    // [grid]
    long half_width = 256;
    long observe_radius = 10;
    double dt = 0.05;
    double dt_internal = 1e-3;
    double t_end = 60.0;
    std::size_t theta_points = 2048;
    bool midpoint = true;

    // [run]
    std::size_t members = 100;
    std::uint64_t seed = 1;
    Solver solver = Solver::automatic;
    std::string output = "out";
    TrajectoryFormat format = TrajectoryFormat::binary;
    std::vector<double> taus{10.0, 20.0, 40.0};
    std::vector<double> mixing_taus;

    // [test_functions]
    std::vector<NamedTestFunction> test_functions;

    /// Random initial measure; throws for kind = delta.
    InitialMeasureSpec initial_spec() const;
    /// Deterministic Y0 for kind = delta, empty otherwise.
    std::optional<LatticeState> fixed_initial() const;
    const TestFunction& test_function(const std::string& name) const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text: every key in a fixed order, shortest round-trip numbers.
std::string serialize_config(const RunConfig& config);

/// Throws ConfigError when the config is inconsistent, including the cone
/// rule L >= R + v_max t_end + 16 and observables reaching past t_end.
void validate_config(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hash of the canonical text without the output directory.
std::uint64_t config_hash(const RunConfig& config);

/// Pairings read by the simulate and compare commands: every test function at
/// every tau, and at tau0 + tau for each mixing tau (tau0 = largest tau).
struct ObservableSet {
    std::vector<Observable> observables;
    std::vector<std::pair<std::string, double>> keys;  // (test function, shift)
    std::size_t index(const std::string& name, double shift) const;
};
ObservableSet config_observables(const RunConfig& config);

EnsembleSpec ensemble_spec(const RunConfig& config);

}  // namespace hchain
