#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mfcbf/particle_sim.hpp"
#include "mfcbf/scenarios.hpp"

namespace mfcbf {

enum class ScenarioKind { kCoverage, kShepherding };
enum class LayoutMode { kPerRun, kFixed };

std::string_view to_string(ScenarioKind k);
std::string_view to_string(LayoutMode m);

struct DiagnoseOptions {
    std::size_t resolution = 128;
    double bandwidth = 0.3;  // velocity reconstruction and KDE bandwidth
};

struct ExperimentConfig {
    ScenarioKind scenario = ScenarioKind::kCoverage;
    bool filter = true;
    std::size_t runs = 1;
    std::size_t workers = 1;
    std::string output_dir = "out";
    LayoutMode layout = LayoutMode::kPerRun;
    SimConfig sim;
    CoverageParams coverage;
    ShepherdingParams shepherding;
    DiagnoseOptions diagnose;

    /// Potential options of the active scenario.
    const PotentialOptions& potential() const;
    void validate() const;
};

ExperimentConfig default_config(ScenarioKind kind);

// ------------------------------------------------------------ TOML subset

/// Value of one `key = value` line. Arrays hold numbers only.
using TomlValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct TomlEntry {
    std::string key;  // dotted path including the table, e.g. "simulation.dt"
    TomlValue value;
    std::size_t line = 0;
};

/// Tables, `key = value`, strings, booleans, integers, floats, single-line
/// numeric arrays and `#` comments. Throws kConfig with "source:line: ..." on
/// malformed input or duplicate keys.
std::vector<TomlEntry> parse_toml(std::string_view text, std::string_view source = "<config>");

/// Parses and validates; unknown keys and type mismatches are kConfig errors
/// carrying the line number.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text with every key of the active scenario, in a fixed order.
/// parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// Content hash of the canonical text (SHA-1 of a git blob object).
std::string config_hash(const ExperimentConfig& config);

/// Nested JSON object of the canonical config.
std::string config_json(const ExperimentConfig& config, int indent = 2);

}  // namespace mfcbf
