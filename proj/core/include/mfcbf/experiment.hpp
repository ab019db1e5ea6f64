#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfcbf/config.hpp"
#include "mfcbf/error.hpp"
#include "mfcbf/particle_sim.hpp"

namespace mfcbf {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitSetup = 3,
    kExitCertificateUnavailable = 4,
    kExitDiagnosticUnavailable = 5,
    kExitIo = 6,
    kExitInvalidInput = 7,
};

int exit_code(ErrorKind kind);

/// Scenario for one member. With a fixed layout only the populations are
/// drawn from `rng`.
std::unique_ptr<ScenarioInstance> build_scenario(const ExperimentConfig& config, Rng& rng,
                                                 const ObstacleSet* fixed_layout = nullptr);

/// Layout shared by all members in fixed mode: the one drawn for the base seed.
ObstacleSet fixed_layout(const ExperimentConfig& config);

/// One independent run with its own generator seeded by `seed`.
RunRecord run_member(const ExperimentConfig& config, std::uint64_t seed,
                     const ObstacleSet* fixed_layout = nullptr);

struct MemberOutcome {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::optional<RunRecord> record;
    std::string error;  // empty on success
    ErrorKind error_kind = ErrorKind::kInvalidInput;
};

/// Members 0..runs-1 with seeds base_seed + index on `workers` threads.
/// Results are ordered by index and do not depend on the worker count.
/// When `out_dir` is given each member's files are written under run_NNNN/.
std::vector<MemberOutcome> run_ensemble(const ExperimentConfig& config,
                                        const std::optional<std::filesystem::path>& out_dir = {});

/// run_record.csv, snapshots.csv and manifest.json in `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                       const RunRecord& record, std::string_view command);

int cmd_run(const ExperimentConfig& config, std::ostream& log);
int cmd_ensemble(const ExperimentConfig& config, std::ostream& log);
int cmd_certify(const ExperimentConfig& config, double mu, std::ostream& out,
                std::size_t grid_resolution = 512);
/// `record` is a run directory or a snapshots.csv file. Uses the last
/// snapshot unless `time` selects another.
int cmd_diagnose(const ExperimentConfig& config, const std::filesystem::path& record,
                 std::optional<double> time, std::ostream& out);

}  // namespace mfcbf
