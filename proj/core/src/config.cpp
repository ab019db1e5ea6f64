#include "mfcbf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfcbf/error.hpp"
#include "mfcbf/io.hpp"

namespace mfcbf {

std::string_view to_string(ScenarioKind k) {
    return k == ScenarioKind::kCoverage ? "coverage" : "shepherding";
}

std::string_view to_string(LayoutMode m) { return m == LayoutMode::kFixed ? "fixed" : "per-run"; }

const PotentialOptions& ExperimentConfig::potential() const {
    return scenario == ScenarioKind::kCoverage ? coverage.potential : shepherding.potential;
}

void ExperimentConfig::validate() const {
    sim.validate();
    if (runs < 1) throw Error(ErrorKind::kConfig, "runs must be at least 1");
    if (workers < 1) throw Error(ErrorKind::kConfig, "workers must be at least 1");
    if (diagnose.resolution < 64) {
        throw Error(ErrorKind::kConfig, "diagnose.resolution must be at least 64");
    }
    if (!(diagnose.bandwidth > 0.0)) {
        throw Error(ErrorKind::kConfig, "diagnose.bandwidth must be positive");
    }
    const PotentialOptions& p = potential();
    if (p.nodes_per_disk < 1) throw Error(ErrorKind::kConfig, "potential.nodes_per_disk must be positive");
    if (scenario == ScenarioKind::kCoverage) {
        const CoverageParams& c = coverage;
        if (c.agents < 1) throw Error(ErrorKind::kConfig, "coverage.agents must be positive");
        if (c.diffusion < 0.0) throw Error(ErrorKind::kConfig, "coverage.diffusion must be >= 0");
        BarrierSpec spec = c.barrier();
        spec.validate();
    } else {
        const ShepherdingParams& s = shepherding;
        if (s.leaders < 1 || s.followers < 1) {
            throw Error(ErrorKind::kConfig, "shepherding populations must be nonempty");
        }
        if (s.follower_diffusion < 0.0 || s.leader_diffusion < 0.0) {
            throw Error(ErrorKind::kConfig, "shepherding diffusion must be >= 0");
        }
        s.leader_barrier().validate();
        s.follower_barrier().validate();
        RepulsionSpec{s.repulsion_length}.validate();
    }
}

ExperimentConfig default_config(ScenarioKind kind) {
    ExperimentConfig c;
    c.scenario = kind;
    c.sim.horizon = kind == ScenarioKind::kCoverage ? 50.0 : 100.0;
    c.sim.snapshot_times = {0.0, c.sim.horizon};
    return c;
}

// ------------------------------------------------------------ TOML subset

namespace {

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::kConfig, std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_bare_key(std::string_view k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && in_string) {
            ++i;
        } else if (s[i] == '"') {
            in_string = !in_string;
        } else if (s[i] == '#' && !in_string) {
            return s.substr(0, i);
        }
    }
    return s;
}

class ValueParser {
public:
    ValueParser(std::string_view text, std::string_view source, std::size_t line)
        : s_(text), source_(source), line_(line) {}

    TomlValue parse() {
        TomlValue v = value();
        skip_ws();
        if (pos_ != s_.size()) error("unexpected trailing characters");
        return v;
    }

private:
    [[noreturn]] void error(const std::string& msg) const { fail(source_, line_, msg); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    TomlValue value() {
        skip_ws();
        if (pos_ >= s_.size()) error("missing value");
        const char c = s_[pos_];
        if (c == '"') return string();
        if (c == '[') return array();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    std::string string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) error("unterminated escape");
                switch (s_[pos_++]) {
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    default: error("unsupported escape sequence");
                }
            }
            out.push_back(c);
        }
        if (pos_ >= s_.size()) error("unterminated string");
        ++pos_;
        return out;
    }

    std::vector<double> array() {
        ++pos_;
        std::vector<double> out;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        while (true) {
            TomlValue v = number();
            out.push_back(std::holds_alternative<double>(v)
                              ? std::get<double>(v)
                              : static_cast<double>(std::get<std::int64_t>(v)));
            skip_ws();
            if (pos_ >= s_.size()) error("unterminated array");
            if (s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            if (s_[pos_] != ',') error("expected ',' or ']' in array");
            ++pos_;
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                return out;
            }
        }
    }

    TomlValue number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                    s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '.' ||
                                    s_[pos_] == '_')) {
            ++pos_;
        }
        std::string tok(s_.substr(start, pos_ - start));
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty()) error("expected a value");
        if (!tok.empty() && tok.front() == '+') tok.erase(0, 1);
        const bool is_float = tok.find_first_of(".eE") != std::string::npos;
        const char* b = tok.data();
        const char* e = tok.data() + tok.size();
        if (is_float) {
            double d = 0.0;
            auto [p, ec] = std::from_chars(b, e, d);
            if (ec != std::errc() || p != e || !std::isfinite(d)) error("invalid number '" + tok + "'");
            return d;
        }
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(b, e, i);
        if (ec != std::errc() || p != e) error("invalid value '" + tok + "'");
        return i;
    }

    std::string_view s_;
    std::string_view source_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<TomlEntry> parse_toml(std::string_view text, std::string_view source) {
    std::vector<TomlEntry> out;
    std::set<std::string> seen;
    std::set<std::string> tables;
    std::string table;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string_view line = trim(strip_comment(text.substr(begin, end - begin)));
        begin = end + 1;

        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') fail(source, line_no, "malformed table header");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            std::size_t part = 0;
            while (part <= name.size()) {
                std::size_t dot = name.find('.', part);
                if (dot == std::string_view::npos) dot = name.size();
                if (!is_bare_key(name.substr(part, dot - part))) {
                    fail(source, line_no, "invalid table name '" + std::string(name) + "'");
                }
                part = dot + 1;
            }
            table = std::string(name);
            if (!tables.insert(table).second) {
                fail(source, line_no, "duplicate table [" + table + "]");
            }
        } else {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos) fail(source, line_no, "expected 'key = value'");
            const std::string_view key = trim(line.substr(0, eq));
            if (!is_bare_key(key)) fail(source, line_no, "invalid key '" + std::string(key) + "'");
            std::string path = table.empty() ? std::string(key) : table + "." + std::string(key);
            if (!seen.insert(path).second) fail(source, line_no, "duplicate key '" + path + "'");
            TomlValue v = ValueParser(line.substr(eq + 1), source, line_no).parse();
            out.push_back(TomlEntry{std::move(path), std::move(v), line_no});
        }
        if (end == text.size()) break;
    }
    return out;
}

// ------------------------------------------------------------ config schema

namespace {

enum class FieldType { kBool, kInt, kFloat, kString, kFloatArray };

struct Field {
    std::string path;
    FieldType type;
    bool coverage_only = false;
    bool shepherding_only = false;
    std::function<TomlValue(const ExperimentConfig&)> get;
    // Returns an error message for values outside the allowed set.
    std::function<std::string(ExperimentConfig&, const TomlValue&)> set;
};

double as_double(const TomlValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
}

template <class Getter>
Field make_float(std::string path, Getter ref) {
    return Field{std::move(path), FieldType::kFloat, false, false,
                 [ref](const ExperimentConfig& c) {
                     return TomlValue(ref(const_cast<ExperimentConfig&>(c)));
                 },
                 [ref](ExperimentConfig& c, const TomlValue& v) {
                     ref(c) = as_double(v);
                     return std::string();
                 }};
}

template <class Getter>
Field make_size(std::string path, Getter ref) {
    return Field{std::move(path), FieldType::kInt, false, false,
                 [ref](const ExperimentConfig& c) {
                     return TomlValue(
                         static_cast<std::int64_t>(ref(const_cast<ExperimentConfig&>(c))));
                 },
                 [ref](ExperimentConfig& c, const TomlValue& v) {
                     const std::int64_t i = std::get<std::int64_t>(v);
                     if (i < 0) return std::string("must be non-negative");
                     ref(c) = static_cast<std::size_t>(i);
                     return std::string();
                 }};
}

Field coverage(Field f) {
    f.coverage_only = true;
    return f;
}

Field shepherding(Field f) {
    f.shepherding_only = true;
    return f;
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        using C = ExperimentConfig;
        std::vector<Field> f;
        f.push_back(Field{"scenario", FieldType::kString, false, false,
                          [](const C& c) { return TomlValue(std::string(to_string(c.scenario))); },
                          [](C& c, const TomlValue& v) {
                              const auto& s = std::get<std::string>(v);
                              if (s == "coverage") c.scenario = ScenarioKind::kCoverage;
                              else if (s == "shepherding") c.scenario = ScenarioKind::kShepherding;
                              else return std::string("expected \"coverage\" or \"shepherding\"");
                              return std::string();
                          }});
        f.push_back(Field{"filter", FieldType::kBool, false, false,
                          [](const C& c) { return TomlValue(c.filter); },
                          [](C& c, const TomlValue& v) {
                              c.filter = std::get<bool>(v);
                              return std::string();
                          }});
        f.push_back(make_size("runs", [](C& c) -> std::size_t& { return c.runs; }));
        f.push_back(make_size("workers", [](C& c) -> std::size_t& { return c.workers; }));
        f.push_back(Field{"output_dir", FieldType::kString, false, false,
                          [](const C& c) { return TomlValue(c.output_dir); },
                          [](C& c, const TomlValue& v) {
                              c.output_dir = std::get<std::string>(v);
                              return std::string();
                          }});
        f.push_back(Field{"layout", FieldType::kString, false, false,
                          [](const C& c) { return TomlValue(std::string(to_string(c.layout))); },
                          [](C& c, const TomlValue& v) {
                              const auto& s = std::get<std::string>(v);
                              if (s == "fixed") c.layout = LayoutMode::kFixed;
                              else if (s == "per-run") c.layout = LayoutMode::kPerRun;
                              else return std::string("expected \"fixed\" or \"per-run\"");
                              return std::string();
                          }});

        f.push_back(make_float("simulation.dt", [](C& c) -> double& { return c.sim.dt; }));
        f.push_back(make_float("simulation.horizon", [](C& c) -> double& { return c.sim.horizon; }));
        f.push_back(Field{"simulation.seed", FieldType::kInt, false, false,
                          [](const C& c) { return TomlValue(static_cast<std::int64_t>(c.sim.seed)); },
                          [](C& c, const TomlValue& v) {
                              const std::int64_t i = std::get<std::int64_t>(v);
                              if (i < 0) return std::string("must be non-negative");
                              c.sim.seed = static_cast<std::uint64_t>(i);
                              return std::string();
                          }});
        f.push_back(make_size("simulation.record_stride",
                              [](C& c) -> std::size_t& { return c.sim.record_stride; }));
        f.push_back(Field{"simulation.snapshot_times", FieldType::kFloatArray, false, false,
                          [](const C& c) { return TomlValue(c.sim.snapshot_times); },
                          [](C& c, const TomlValue& v) {
                              c.sim.snapshot_times = std::get<std::vector<double>>(v);
                              return std::string();
                          }});

        f.push_back(coverage(make_size("coverage.agents", [](C& c) -> std::size_t& { return c.coverage.agents; })));
        f.push_back(coverage(make_float("coverage.diffusion", [](C& c) -> double& { return c.coverage.diffusion; })));
        f.push_back(coverage(make_float("coverage.sigma", [](C& c) -> double& { return c.coverage.sigma; })));
        f.push_back(coverage(make_float("coverage.epsilon", [](C& c) -> double& { return c.coverage.epsilon; })));
        f.push_back(coverage(make_float("coverage.gamma", [](C& c) -> double& { return c.coverage.gamma; })));
        f.push_back(coverage(make_float("coverage.support_radius", [](C& c) -> double& { return c.coverage.support_radius; })));
        f.push_back(coverage(make_float("coverage.lambda", [](C& c) -> double& { return c.coverage.lambda; })));
        f.push_back(coverage(make_size("coverage.obstacle_count", [](C& c) -> std::size_t& { return c.coverage.obstacle_count; })));
        f.push_back(coverage(make_float("coverage.obstacle_radius", [](C& c) -> double& { return c.coverage.obstacle_radius; })));
        f.push_back(coverage(make_float("coverage.obstacle_gap", [](C& c) -> double& { return c.coverage.obstacle_gap; })));

        auto& S = f;
        S.push_back(shepherding(make_size("shepherding.leaders", [](C& c) -> std::size_t& { return c.shepherding.leaders; })));
        S.push_back(shepherding(make_size("shepherding.followers", [](C& c) -> std::size_t& { return c.shepherding.followers; })));
        S.push_back(shepherding(make_float("shepherding.follower_diffusion", [](C& c) -> double& { return c.shepherding.follower_diffusion; })));
        S.push_back(shepherding(make_float("shepherding.leader_diffusion", [](C& c) -> double& { return c.shepherding.leader_diffusion; })));
        S.push_back(shepherding(make_float("shepherding.sigma", [](C& c) -> double& { return c.shepherding.sigma; })));
        S.push_back(shepherding(make_float("shepherding.epsilon_leaders", [](C& c) -> double& { return c.shepherding.epsilon_leaders; })));
        S.push_back(shepherding(make_float("shepherding.epsilon_followers", [](C& c) -> double& { return c.shepherding.epsilon_followers; })));
        S.push_back(shepherding(make_float("shepherding.gamma", [](C& c) -> double& { return c.shepherding.gamma; })));
        S.push_back(shepherding(make_float("shepherding.repulsion_length", [](C& c) -> double& { return c.shepherding.repulsion_length; })));
        S.push_back(shepherding(make_float("shepherding.goal_radius", [](C& c) -> double& { return c.shepherding.goal_radius; })));
        S.push_back(shepherding(make_float("shepherding.lambda", [](C& c) -> double& { return c.shepherding.lambda; })));
        S.push_back(shepherding(make_float("shepherding.lambda_obstacles", [](C& c) -> double& { return c.shepherding.lambda_obstacles; })));
        S.push_back(shepherding(make_float("shepherding.lambda_init", [](C& c) -> double& { return c.shepherding.lambda_init; })));
        S.push_back(shepherding(make_size("shepherding.obstacle_count", [](C& c) -> std::size_t& { return c.shepherding.obstacle_count; })));
        S.push_back(shepherding(make_float("shepherding.obstacle_radius", [](C& c) -> double& { return c.shepherding.obstacle_radius; })));
        S.push_back(shepherding(make_float("shepherding.target.k1", [](C& c) -> double& { return c.shepherding.target.k1; })));
        S.push_back(shepherding(make_float("shepherding.target.k2", [](C& c) -> double& { return c.shepherding.target.k2; })));
        S.push_back(shepherding(make_float("shepherding.gains.k_p", [](C& c) -> double& { return c.shepherding.gains.k_p; })));
        S.push_back(shepherding(make_float("shepherding.gains.offset", [](C& c) -> double& { return c.shepherding.gains.offset; })));
        S.push_back(shepherding(make_float("shepherding.gains.engage_radius", [](C& c) -> double& { return c.shepherding.gains.engage_radius; })));
        S.push_back(shepherding(make_float("shepherding.gains.orbit_radius", [](C& c) -> double& { return c.shepherding.gains.orbit_radius; })));
        S.push_back(shepherding(make_float("shepherding.gains.orbit_step", [](C& c) -> double& { return c.shepherding.gains.orbit_step; })));

        // The potential table applies to whichever scenario is active.
        f.push_back(Field{"potential.nodes_per_disk", FieldType::kInt, false, false,
                          [](const C& c) {
                              return TomlValue(static_cast<std::int64_t>(c.potential().nodes_per_disk));
                          },
                          [](C& c, const TomlValue& v) {
                              const std::int64_t i = std::get<std::int64_t>(v);
                              if (i < 1) return std::string("must be positive");
                              c.coverage.potential.nodes_per_disk = static_cast<std::size_t>(i);
                              c.shepherding.potential.nodes_per_disk = static_cast<std::size_t>(i);
                              return std::string();
                          }});
        f.push_back(Field{"potential.normalization", FieldType::kString, false, false,
                          [](const C& c) {
                              return TomlValue(std::string(
                                  c.potential().normalization == DensityNormalization::kUnion
                                      ? "union"
                                      : "per-disk"));
                          },
                          [](C& c, const TomlValue& v) {
                              const auto& s = std::get<std::string>(v);
                              DensityNormalization n;
                              if (s == "union") n = DensityNormalization::kUnion;
                              else if (s == "per-disk") n = DensityNormalization::kPerDisk;
                              else return std::string("expected \"union\" or \"per-disk\"");
                              c.coverage.potential.normalization = n;
                              c.shepherding.potential.normalization = n;
                              return std::string();
                          }});
        f.push_back(Field{"potential.backend", FieldType::kString, false, false,
                          [](const C& c) {
                              return TomlValue(std::string(
                                  c.potential().backend == PotentialBackend::kQuadrature
                                      ? "quadrature"
                                      : "radial-table"));
                          },
                          [](C& c, const TomlValue& v) {
                              const auto& s = std::get<std::string>(v);
                              PotentialBackend b;
                              if (s == "quadrature") b = PotentialBackend::kQuadrature;
                              else if (s == "radial-table") b = PotentialBackend::kRadialTable;
                              else return std::string("expected \"quadrature\" or \"radial-table\"");
                              c.coverage.potential.backend = b;
                              c.shepherding.potential.backend = b;
                              return std::string();
                          }});
        f.push_back(make_size("diagnose.resolution",
                              [](C& c) -> std::size_t& { return c.diagnose.resolution; }));
        f.push_back(make_float("diagnose.bandwidth", [](C& c) -> double& { return c.diagnose.bandwidth; }));
        return f;
    }();
    return fields;
}

bool type_matches(FieldType t, const TomlValue& v) {
    switch (t) {
        case FieldType::kBool: return std::holds_alternative<bool>(v);
        case FieldType::kInt: return std::holds_alternative<std::int64_t>(v);
        case FieldType::kFloat:
            return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
        case FieldType::kString: return std::holds_alternative<std::string>(v);
        case FieldType::kFloatArray: return std::holds_alternative<std::vector<double>>(v);
    }
    return false;
}

std::string_view type_name(FieldType t) {
    switch (t) {
        case FieldType::kBool: return "a boolean";
        case FieldType::kInt: return "an integer";
        case FieldType::kFloat: return "a number";
        case FieldType::kString: return "a string";
        case FieldType::kFloatArray: return "an array of numbers";
    }
    return "?";
}

bool active(const Field& f, ScenarioKind kind) {
    if (f.coverage_only) return kind == ScenarioKind::kCoverage;
    if (f.shepherding_only) return kind == ScenarioKind::kShepherding;
    return true;
}

std::string format_double(double d) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string format_value(const TomlValue& v) {
    struct Visitor {
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(const std::string& s) const {
            std::string out = "\"";
            for (char c : s) {
                if (c == '"' || c == '\\') out.push_back('\\');
                if (c == '\n') {
                    out += "\\n";
                    continue;
                }
                if (c == '\t') {
                    out += "\\t";
                    continue;
                }
                out.push_back(c);
            }
            return out + "\"";
        }
        std::string operator()(const std::vector<double>& a) const {
            std::string out = "[";
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (i) out += ", ";
                out += format_double(a[i]);
            }
            return out + "]";
        }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
    const std::vector<TomlEntry> entries = parse_toml(text, source);

    ScenarioKind kind = ScenarioKind::kCoverage;
    for (const TomlEntry& e : entries) {
        if (e.key != "scenario") continue;
        ExperimentConfig probe;
        if (!std::holds_alternative<std::string>(e.value)) {
            fail(source, e.line, "'scenario' must be a string");
        }
        const std::string err = schema().front().set(probe, e.value);
        if (!err.empty()) fail(source, e.line, "'scenario': " + err);
        kind = probe.scenario;
    }

    ExperimentConfig config = default_config(kind);
    bool horizon_given = false;
    bool snapshots_given = false;
    for (const TomlEntry& e : entries) {
        const auto it = std::find_if(schema().begin(), schema().end(),
                                     [&](const Field& f) { return f.path == e.key; });
        if (it == schema().end()) fail(source, e.line, "unknown key '" + e.key + "'");
        if (!active(*it, kind)) {
            fail(source, e.line, "key '" + e.key + "' does not apply to scenario \"" +
                                     std::string(to_string(kind)) + "\"");
        }
        if (!type_matches(it->type, e.value)) {
            fail(source, e.line, "'" + e.key + "' must be " + std::string(type_name(it->type)));
        }
        const std::string err = it->set(config, e.value);
        if (!err.empty()) fail(source, e.line, "'" + e.key + "': " + err);
        horizon_given |= e.key == "simulation.horizon";
        snapshots_given |= e.key == "simulation.snapshot_times";
    }
    if (horizon_given && !snapshots_given) config.sim.snapshot_times = {0.0, config.sim.horizon};

    try {
        config.validate();
    } catch (const Error& err) {
        throw Error(ErrorKind::kConfig, std::string(source) + ": " + err.what());
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kConfig, path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    std::string table;
    for (const Field& f : schema()) {
        if (!active(f, config.scenario)) continue;
        const std::size_t dot = f.path.rfind('.');
        const std::string t = dot == std::string::npos ? std::string() : f.path.substr(0, dot);
        const std::string key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
        if (t != table) {
            out += "\n[" + t + "]\n";
            table = t;
        }
        out += key + " = " + format_value(f.get(config)) + "\n";
    }
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    return git_blob_sha1(serialize_config(config));
}

std::string config_json(const ExperimentConfig& config, int indent) {
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    for (const Field& f : schema()) {
        if (!active(f, config.scenario)) continue;
        nlohmann::ordered_json* node = &root;
        std::string rest = f.path;
        for (std::size_t dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
            node = &(*node)[rest.substr(0, dot)];
            rest = rest.substr(dot + 1);
        }
        std::visit([&](const auto& v) { (*node)[rest] = v; }, f.get(config));
    }
    return root.dump(indent);
}

}  // namespace mfcbf
