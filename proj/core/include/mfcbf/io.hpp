#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mfcbf/analysis.hpp"
#include "mfcbf/particle_sim.hpp"

namespace mfcbf {

// Every CSV starts with "# schema=<name>/<version>" followed by the header row.
inline constexpr std::string_view kRunRecordSchema = "mfcbf.run_record/1";
inline constexpr std::string_view kSnapshotSchema = "mfcbf.snapshots/1";
inline constexpr std::string_view kEnsembleSchema = "mfcbf.ensemble/1";
inline constexpr std::string_view kManifestSchema = "mfcbf.manifest/1";
inline constexpr std::string_view kStabilitySchema = "mfcbf.stability/1";

/// Shortest decimal text that parses back to the same double; NaN is "".
std::string format_number(double x);

/// t,H_L,H_F,frac_in_L,frac_in_F,frac_goal,deviation,violations
void write_run_record_csv(std::ostream& out, const RunRecord& record);
std::vector<MetricRow> read_run_record_csv(std::istream& in);

/// t,population,index,x1,x2,w1,w2 with w the applied velocity.
void write_snapshots_csv(std::ostream& out, const RunRecord& record);

struct SnapshotTable {
    std::vector<std::string> population_names;
    std::vector<Snapshot> snapshots;
};
SnapshotTable read_snapshots_csv(std::istream& in);

/// Same columns as the run record; `std_dev` selects the std table.
void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats, bool std_dev);

std::string stability_report_json(const StabilityReport& report, double time,
                                  std::string_view population);

/// SHA-1 of "blob <size>\0<content>", lowercase hex.
std::string git_blob_sha1(std::string_view content);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace mfcbf
