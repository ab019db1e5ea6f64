#include "mfcbf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfcbf/analysis.hpp"
#include "mfcbf/io.hpp"
#include "mfcbf/scenarios.hpp"

namespace mfcbf {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kConfig: return kExitConfig;
        case ErrorKind::kPlacementInfeasible:
        case ErrorKind::kSetup: return kExitSetup;
        case ErrorKind::kCertificateUnavailable: return kExitCertificateUnavailable;
        case ErrorKind::kDiagnosticUnavailable: return kExitDiagnosticUnavailable;
        case ErrorKind::kIo: return kExitIo;
        case ErrorKind::kInvalidInput:
        case ErrorKind::kInfeasibleConstraint: return kExitInvalidInput;
    }
    return kExitFailure;
}

std::unique_ptr<ScenarioInstance> build_scenario(const ExperimentConfig& config, Rng& rng,
                                                 const ObstacleSet* layout) {
    if (config.scenario == ScenarioKind::kCoverage) {
        return init_coverage(config.coverage, rng, layout);
    }
    return init_shepherding(config.shepherding, rng, layout);
}

ObstacleSet fixed_layout(const ExperimentConfig& config) {
    Rng rng(config.sim.seed);
    return build_scenario(config, rng)->obstacles();
}

RunRecord run_member(const ExperimentConfig& config, std::uint64_t seed,
                     const ObstacleSet* layout) {
    Rng rng(seed);
    const std::unique_ptr<ScenarioInstance> scenario = build_scenario(config, rng, layout);
    SimConfig sim = config.sim;
    sim.seed = seed;
    return run_simulation(*scenario, sim, config.filter, rng);
}

namespace {

std::string manifest_json(const ExperimentConfig& config, const RunRecord& record,
                          std::string_view command) {
    nlohmann::ordered_json j;
    j["schema"] = kManifestSchema;
    j["command"] = command;
    j["scenario"] = to_string(config.scenario);
    j["seed"] = record.seed;
    j["filter"] = record.filter_enabled;
    j["config_hash"] = config_hash(config);
    j["config"] = nlohmann::ordered_json::parse(config_json(config));
    j["populations"] = record.population_names;
    nlohmann::ordered_json obstacles;
    obstacles["radius"] = record.obstacles.radius;
    nlohmann::ordered_json centers = nlohmann::ordered_json::array();
    for (const TorusPoint& c : record.obstacles.centers) centers.push_back({c.x1(), c.x2()});
    obstacles["centers"] = centers;
    j["obstacles"] = obstacles;
    if (config.scenario == ScenarioKind::kShepherding) {
        j["goal_radius"] = config.shepherding.goal_radius;
    }
    j["violations"] = record.total_violations();
    j["files"] = {"run_record.csv", "snapshots.csv"};
    return j.dump(2) + "\n";
}

std::string member_dir_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run_%04zu", index);
    return buf;
}

}  // namespace

void write_run_outputs(const fs::path& dir, const ExperimentConfig& config,
                       const RunRecord& record, std::string_view command) {
    std::ostringstream rec;
    write_run_record_csv(rec, record);
    write_file_atomic(dir / "run_record.csv", rec.str());
    std::ostringstream snaps;
    write_snapshots_csv(snaps, record);
    write_file_atomic(dir / "snapshots.csv", snaps.str());
    write_file_atomic(dir / "manifest.json", manifest_json(config, record, command));
}

std::vector<MemberOutcome> run_ensemble(const ExperimentConfig& config,
                                        const std::optional<fs::path>& out_dir) {
    std::optional<ObstacleSet> layout;
    if (config.layout == LayoutMode::kFixed) layout = fixed_layout(config);

    std::vector<MemberOutcome> outcomes(config.runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < outcomes.size(); i = next++) {
            MemberOutcome& o = outcomes[i];
            o.index = i;
            o.seed = config.sim.seed + i;
            try {
                o.record = run_member(config, o.seed, layout ? &*layout : nullptr);
                if (out_dir) {
                    write_run_outputs(*out_dir / member_dir_name(i), config, *o.record, "ensemble");
                }
            } catch (const Error& e) {
                o.record.reset();
                o.error = e.what();
                o.error_kind = e.kind();
            } catch (const std::exception& e) {
                o.record.reset();
                o.error = e.what();
            }
        }
    };
    const std::size_t n = std::min(config.workers, config.runs);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return outcomes;
}

int cmd_run(const ExperimentConfig& config, std::ostream& log) {
    try {
        const RunRecord record = run_member(config, config.sim.seed,
                                            nullptr);
        const fs::path dir = config.output_dir;
        write_run_outputs(dir, config, record, "run");
        log << "run: seed " << config.sim.seed << ", filter " << (config.filter ? "on" : "off")
            << ", " << record.rows.size() << " rows, " << record.total_violations()
            << " infeasible steps -> " << dir.string() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        log << "run: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    }
}

int cmd_ensemble(const ExperimentConfig& config, std::ostream& log) {
    const fs::path dir = config.output_dir;
    std::vector<MemberOutcome> outcomes;
    try {
        outcomes = run_ensemble(config, dir);
    } catch (const Error& e) {
        log << "ensemble: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    }

    std::vector<RunRecord> ok;
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (const MemberOutcome& o : outcomes) {
        nlohmann::ordered_json m;
        m["index"] = o.index;
        m["seed"] = o.seed;
        m["dir"] = member_dir_name(o.index);
        if (o.record) {
            ok.push_back(*o.record);
            m["status"] = "ok";
        } else {
            m["status"] = "failed";
            m["error"] = o.error;
            log << "ensemble: member " << o.index << " (seed " << o.seed << ") failed: " << o.error
                << "\n";
        }
        members.push_back(m);
    }

    try {
        if (!ok.empty()) {
            const EnsembleStats stats = ensemble_stats(ok);
            std::ostringstream mean, sd;
            write_ensemble_csv(mean, stats, false);
            write_ensemble_csv(sd, stats, true);
            write_file_atomic(dir / "ensemble_mean.csv", mean.str());
            write_file_atomic(dir / "ensemble_std.csv", sd.str());
        }
        nlohmann::ordered_json j;
        j["schema"] = kManifestSchema;
        j["command"] = "ensemble";
        j["scenario"] = to_string(config.scenario);
        j["base_seed"] = config.sim.seed;
        j["runs"] = config.runs;
        j["succeeded"] = ok.size();
        j["filter"] = config.filter;
        j["layout"] = to_string(config.layout);
        j["config_hash"] = config_hash(config);
        j["config"] = nlohmann::ordered_json::parse(config_json(config));
        j["members"] = members;
        j["files"] = {"ensemble_mean.csv", "ensemble_std.csv"};
        write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
    } catch (const Error& e) {
        log << "ensemble: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    }

    log << "ensemble: " << ok.size() << "/" << outcomes.size() << " members succeeded -> "
        << dir.string() << "\n";
    return ok.size() == outcomes.size() ? kExitOk : kExitFailure;
}

int cmd_certify(const ExperimentConfig& config, double mu, std::ostream& out,
                std::size_t grid_resolution) {
    try {
        if (!(mu > 0.0 && mu < 1.0)) {
            throw Error(ErrorKind::kInvalidInput, "certify: mu must lie in (0, 1)");
        }
        Rng rng(config.sim.seed);
        const std::unique_ptr<ScenarioInstance> scenario = build_scenario(config, rng);
        std::vector<std::pair<std::string, double>> thresholds;
        const ObstaclePotential* pot = nullptr;
        if (const auto* c = dynamic_cast<const CoverageScenario*>(scenario.get())) {
            pot = &c->potential();
            thresholds.emplace_back("epsilon", c->params().epsilon);
        } else {
            const auto* s = dynamic_cast<const ShepherdingScenario*>(scenario.get());
            pot = &s->potential();
            thresholds.emplace_back("epsilon_leaders", s->params().epsilon_leaders);
            thresholds.emplace_back("epsilon_followers", s->params().epsilon_followers);
        }

        const OverlapInfima inf = overlap_infima(*pot, grid_resolution);
        out << "seed: " << config.sim.seed << "\n";
        out << "grid_resolution: " << inf.resolution << "\n";
        out << "inf_inside: " << format_number(inf.inside) << "\n";
        out << "inf_outside: " << format_number(inf.outside) << "\n";
        out << "grid_tolerance: " << format_number(inf.tolerance) << "\n";
        out << "B(0): " << format_number(min_overlap_bound(inf, 0.0)) << "\n";
        out << "B(mu): " << format_number(min_overlap_bound(inf, mu)) << "  (mu = " << mu << ")\n";
        const Certificate cert = certified_threshold(inf, mu);
        for (const auto& [name, eps] : thresholds) {
            const bool certified = eps < cert.epsilon;
            out << name << ": " << format_number(eps) << " -> "
                << (certified ? "certified" : "not certified") << " (overlap <= " << name
                << (certified ? " implies" : " does not imply")
                << " inside mass < mu)\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        out << "certify: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    }
}

int cmd_diagnose(const ExperimentConfig& config, const fs::path& record,
                 std::optional<double> time, std::ostream& out) {
    try {
        const fs::path file = fs::is_directory(record) ? record / "snapshots.csv" : record;
        if (!fs::exists(file)) {
            throw Error(ErrorKind::kDiagnosticUnavailable,
                        "diagnose: no snapshots found at " + file.string());
        }
        std::istringstream in(read_file(file));
        const SnapshotTable table = read_snapshots_csv(in);
        if (table.snapshots.empty()) {
            throw Error(ErrorKind::kDiagnosticUnavailable, "diagnose: record has no snapshots");
        }

        const Snapshot* snap = &table.snapshots.back();
        if (time) {
            snap = nullptr;
            for (const Snapshot& s : table.snapshots) {
                if (std::abs(s.t - *time) <= 1e-9) snap = &s;
            }
            if (!snap) {
                throw Error(ErrorKind::kDiagnosticUnavailable,
                            "diagnose: no snapshot at t = " + format_number(*time));
            }
        }

        const bool coverage = config.scenario == ScenarioKind::kCoverage;
        const std::string population = coverage ? "agents" : "followers";
        const auto it =
            std::find(table.population_names.begin(), table.population_names.end(), population);
        if (it == table.population_names.end()) {
            throw Error(ErrorKind::kDiagnosticUnavailable,
                        "diagnose: snapshots lack population '" + population + "'");
        }
        const std::size_t p = static_cast<std::size_t>(it - table.population_names.begin());
        if (p >= snap->positions.size() || snap->positions[p].empty() ||
            snap->drifts[p].size() != snap->positions[p].size()) {
            throw Error(ErrorKind::kDiagnosticUnavailable,
                        "diagnose: snapshot lacks control samples for '" + population + "'");
        }

        const std::size_t res = config.diagnose.resolution;
        const GridField w = reconstruct_velocity_field(snap->positions[p], snap->drifts[p],
                                                       config.diagnose.bandwidth, res);
        GridField rho_bar(res);
        double diffusion = 0.0;
        if (coverage) {
            rho_bar = GridField::from_function(res, [](const Vec2&) { return 1.0 / kDomainArea; });
            diffusion = config.coverage.diffusion;
        } else {
            const VonMisesTarget target = config.shepherding.target;
            const double z = von_mises_normalizer(target);
            rho_bar = GridField::from_function(res, [&](const Vec2& x) {
                return von_mises_density(TorusPoint::wrap(x), target) / z;
            });
            diffusion = config.shepherding.follower_diffusion;
        }
        const StabilityReport report = stability_constants(w, rho_bar, diffusion);
        const std::string json = stability_report_json(report, snap->t, population);
        write_file_atomic(fs::path(config.output_dir) / "stability.json", json);
        out << json;
        return kExitOk;
    } catch (const Error& e) {
        out << "diagnose: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    }
}

}  // namespace mfcbf
