#include "mfcbf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "mfcbf/error.hpp"

namespace mfcbf {

namespace {

constexpr const char* kRecordHeader = "t,H_L,H_F,frac_in_L,frac_in_F,frac_goal,deviation,violations";
constexpr const char* kSnapshotHeader = "t,population,index,x1,x2,w1,w2";

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    if (s.empty()) return kBlank;
    double d = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw Error(ErrorKind::kIo, "csv line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return d;
}

// Reads the schema comment and header row; returns the next line number.
std::size_t expect_preamble(std::istream& in, std::string_view schema, const char* header) {
    std::string line;
    if (!std::getline(in, line) || line != "# schema=" + std::string(schema)) {
        throw Error(ErrorKind::kIo, "csv: expected schema line '# schema=" + std::string(schema) + "'");
    }
    if (!std::getline(in, line) || line != header) {
        throw Error(ErrorKind::kIo, "csv: unexpected header '" + line + "'");
    }
    return 3;
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "";
    if (x == 0.0) return "0";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, p);
}

void write_run_record_csv(std::ostream& out, const RunRecord& record) {
    out << "# schema=" << kRunRecordSchema << '\n' << kRecordHeader << '\n';
    for (const MetricRow& r : record.rows) {
        out << format_number(r.t) << ',' << format_number(r.barrier_leaders) << ','
            << format_number(r.barrier_followers) << ',' << format_number(r.frac_in_leaders) << ','
            << format_number(r.frac_in_followers) << ',' << format_number(r.frac_goal) << ','
            << format_number(r.deviation) << ',' << r.violations << '\n';
    }
}

std::vector<MetricRow> read_run_record_csv(std::istream& in) {
    std::size_t line_no = expect_preamble(in, kRunRecordSchema, kRecordHeader);
    std::vector<MetricRow> rows;
    std::string line;
    for (; std::getline(in, line); ++line_no) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line);
        if (f.size() != 8) {
            throw Error(ErrorKind::kIo, "csv line " + std::to_string(line_no) + ": expected 8 fields");
        }
        MetricRow r;
        r.t = parse_number(f[0], line_no);
        r.barrier_leaders = parse_number(f[1], line_no);
        r.barrier_followers = parse_number(f[2], line_no);
        r.frac_in_leaders = parse_number(f[3], line_no);
        r.frac_in_followers = parse_number(f[4], line_no);
        r.frac_goal = parse_number(f[5], line_no);
        r.deviation = parse_number(f[6], line_no);
        r.violations = static_cast<std::size_t>(parse_number(f[7], line_no));
        rows.push_back(r);
    }
    return rows;
}

void write_snapshots_csv(std::ostream& out, const RunRecord& record) {
    out << "# schema=" << kSnapshotSchema << '\n' << kSnapshotHeader << '\n';
    for (const Snapshot& s : record.snapshots) {
        for (std::size_t p = 0; p < s.positions.size(); ++p) {
            const std::string& name = record.population_names.at(p);
            for (std::size_t k = 0; k < s.positions[p].size(); ++k) {
                const Vec2 x = s.positions[p][k].coords();
                const Vec2 w = s.drifts[p][k];
                out << format_number(s.t) << ',' << name << ',' << k << ',' << format_number(x.x())
                    << ',' << format_number(x.y()) << ',' << format_number(w.x()) << ','
                    << format_number(w.y()) << '\n';
            }
        }
    }
}

SnapshotTable read_snapshots_csv(std::istream& in) {
    std::size_t line_no = expect_preamble(in, kSnapshotSchema, kSnapshotHeader);
    SnapshotTable table;
    std::string line;
    for (; std::getline(in, line); ++line_no) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line);
        if (f.size() != 7) {
            throw Error(ErrorKind::kIo, "csv line " + std::to_string(line_no) + ": expected 7 fields");
        }
        const double t = parse_number(f[0], line_no);
        std::size_t pop = 0;
        while (pop < table.population_names.size() && table.population_names[pop] != f[1]) ++pop;
        if (pop == table.population_names.size()) table.population_names.push_back(f[1]);

        if (table.snapshots.empty() || table.snapshots.back().t != t) {
            table.snapshots.push_back(Snapshot{t, {}, {}});
        }
        Snapshot& s = table.snapshots.back();
        if (s.positions.size() <= pop) {
            s.positions.resize(pop + 1);
            s.drifts.resize(pop + 1);
        }
        s.positions[pop].push_back(
            TorusPoint::wrap(parse_number(f[3], line_no), parse_number(f[4], line_no)));
        s.drifts[pop].push_back(Vec2(parse_number(f[5], line_no), parse_number(f[6], line_no)));
    }
    return table;
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats, bool std_dev) {
    out << "# schema=" << kEnsembleSchema << '\n' << kRecordHeader << '\n';
    const auto& cols = std_dev ? stats.std : stats.mean;
    for (std::size_t i = 0; i < stats.t.size(); ++i) {
        out << format_number(stats.t[i]);
        for (std::size_t m = 0; m < kMetricCount; ++m) out << ',' << format_number(cols[m][i]);
        out << '\n';
    }
}

std::string stability_report_json(const StabilityReport& r, double time,
                                  std::string_view population) {
    nlohmann::ordered_json j;
    j["schema"] = kStabilitySchema;
    j["population"] = population;
    j["time"] = time;
    j["diffusion"] = r.diffusion;
    j["div_w_inf"] = r.div_w_inf;
    j["div_rho_w_l2"] = r.div_rho_w_l2;
    j["lap_rho_l2"] = r.lap_rho_l2;
    j["a"] = r.a;
    j["b"] = r.b;
    j["bound"] = r.bound ? nlohmann::ordered_json(*r.bound) : nlohmann::ordered_json(nullptr);
    j["condition_ok"] = r.condition_ok;
    return j.dump(2) + "\n";
}

std::string git_blob_sha1(std::string_view content) {
    const std::string head = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, head.data(), head.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error(ErrorKind::kIo, "sha1 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xF]);
    }
    return hex;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mfcbf
