#pragma once

// Result serialization: JSON through nlohmann (shortest round-trip doubles)
// and CSV with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcslab/critical.hpp"
#include "bcslab/criterion.hpp"
#include "bcslab/error.hpp"
#include "bcslab/gap.hpp"

namespace bcslab {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// A table of numeric cells; empty optionals are written as empty fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
};

inline std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t k = 0; k < table.header.size(); ++k) out += (k ? "," : "") + table.header[k];
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ",";
            if (row[k]) out += format_double(*row[k]);
        }
        out += "\n";
    }
    return out;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, to_csv(table)); }

// Parses CSV produced by to_csv back into a table.
inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        std::vector<std::string> cells;
        std::size_t a = 0;
        while (true) {
            const std::size_t b = line.find(',', a);
            cells.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
            if (b == std::string::npos) break;
            a = b + 1;
        }
        if (first) {
            t.header = cells;
            first = false;
            continue;
        }
        std::vector<std::optional<double>> row;
        for (const auto& c : cells) {
            if (c.empty()) row.emplace_back();
            else row.emplace_back(std::strtod(c.c_str(), nullptr));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Json grid_json(const RadialGrid& g) {
    Json j;
    j["nodes"] = g.size();
    j["p_max"] = g.p_max;
    j["n_per_panel"] = g.points_per_panel;
    j["grading_levels"] = g.grading_levels;
    j["panels"] = g.panel_edges.size() - 1;
    j["fermi_panel_width"] = g.fermi_panel_width();
    return j;
}

inline Json to_json(const CriterionReport& r) {
    Json j;
    j["lowest_eigenvalues"] = r.lowest;
    j["minimizing_ell"] = r.minimizing_ell;
    j["minimum"] = r.minimum;
    j["tolerance"] = r.tolerance;
    j["verdict"] = to_string(r.verdict);
    j["unstable"] = r.unstable;
    if (r.bs_norm) j["bs_norm"] = *r.bs_norm;
    return j;
}

inline Json to_json(const TcResult& r) {
    Json j;
    j["status"] = to_string(r.status);
    if (r.status == TcStatus::resolved) j["value"] = r.value;
    else j["value"] = nullptr;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["bracket_width"] = r.upper - r.lower;
    j["iterations"] = r.iterations;
    j["minimizing_ell"] = r.minimizing_ell;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline Json to_json(const WeakCouplingBound& b) {
    Json j;
    j["hypothesis_holds"] = b.hypothesis_holds;
    j["hls_term"] = b.hls_term;
    j["a"] = b.a;
    if (b.bound) j["bound"] = *b.bound;
    else j["bound"] = "hypothesis violated";
    return j;
}

inline Json to_json(const TcReport& r) {
    Json j;
    j["tc_eigen"] = to_json(r.eigen);
    j["tc_bs"] = to_json(r.birman_schwinger);
    if (r.relative_difference) j["relative_difference"] = *r.relative_difference;
    else j["relative_difference"] = nullptr;
    j["bound_rough"] = r.rough_bound;
    j["bound_thm27"] = to_json(r.thm27);
    Json sat;
    sat["rough"] = r.rough_satisfied;
    if (r.thm27_satisfied) sat["thm27"] = *r.thm27_satisfied;
    else sat["thm27"] = nullptr;
    j["bounds_satisfied"] = sat;
    j["minimizing_ell"] = r.eigen.minimizing_ell;
    return j;
}

inline Json to_json(const SweepResult& s) {
    Json j;
    Json pts = Json::array();
    for (const auto& p : s.points) {
        Json e;
        e["lambda"] = p.lambda;
        e["tc"] = to_json(p.tc);
        e["bound_thm27"] = to_json(p.thm27);
        pts.push_back(e);
    }
    j["points"] = pts;
    if (s.fit) {
        j["fit"] = {{"slope", s.fit->slope}, {"intercept", s.fit->intercept}, {"r2", s.fit->r2}, {"points", s.fit->points}};
    } else {
        j["fit"] = nullptr;
    }
    return j;
}

inline CsvTable sweep_csv(const SweepResult& s) {
    CsvTable t;
    t.header = {"lambda", "tc", "tc_lower", "tc_upper", "bound_thm27"};
    for (const auto& p : s.points) {
        std::optional<double> tc;
        if (p.tc.resolved()) tc = p.tc.value;
        t.rows.push_back({p.lambda, tc, p.tc.lower, p.tc.upper, p.thm27.bound});
    }
    return t;
}

inline CsvTable gap_csv(const GapState& s) {
    CsvTable t;
    t.header = {"p", "weight", "delta", "energy", "gamma", "alpha_hat"};
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        t.rows.push_back({s.grid.nodes[i], s.grid.weights[i], s.delta[i], s.energy[i], s.gamma[i], s.alpha[i]});
    return t;
}

inline Json error_record(const std::string& kind, const std::string& message) {
    Json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    return j;
}

} // namespace bcslab
