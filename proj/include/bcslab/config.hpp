#pragma once

// Run configuration: flat dotted keys, one `key = value` per line, '#'
// starts a comment. Unknown, duplicate and out-of-range keys are errors.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcslab/critical.hpp"
#include "bcslab/error.hpp"
#include "bcslab/gap.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/potential.hpp"

namespace bcslab {

struct RunConfig {
    double mu = 0.0;
    std::optional<double> temperature;  // nullopt is zero temperature

    std::string model;
    double lambda = 0.0;
    double sigma = 0.0;
    double radius = 0.0;
    double lambda1 = 0.0;
    double sigma1 = 0.0;
    double lambda2 = 0.0;
    double sigma2 = 0.0;
    std::string table;   // resolved path
    double scale = 1.0;

    GridOptions grid;
    GapOptions solver;
    int ell_max = 4;
    double e_shift = 0.0;
    double rel_tol = 1e-4;
    std::optional<double> t_floor;
    std::optional<double> t_upper;
    std::vector<double> lambdas{0.6, 0.8, 1.0, 1.25, 1.5};
    std::string output_dir = ".";
    std::string output_format = "both";

    ThermoParams params() const {
        return temperature ? ThermoParams::at_temperature(*temperature, mu) : ThermoParams::zero_temperature(mu);
    }

    PotentialSpec potential() const {
        if (model == "gaussian") return PotentialSpec(GaussianModel{lambda, sigma}, scale);
        if (model == "square_well") return PotentialSpec(SquareWellModel{lambda, radius}, scale);
        if (model == "two_gaussian") return PotentialSpec(TwoGaussianModel{lambda1, sigma1, lambda2, sigma2}, scale);
        return load_table(table, scale);
    }

    TcOptions tc_options(bool parallel) const {
        TcOptions o;
        o.ell_max = ell_max;
        o.rel_tol = rel_tol;
        o.t_floor = t_floor;
        o.t_upper = t_upper;
        o.grid = grid;
        o.parallel = parallel;
        return o;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["mu"] = mu;
        if (temperature) j["temperature"] = *temperature;
        else j["temperature"] = "zero";
        nlohmann::ordered_json pot;
        pot["model"] = model;
        if (model == "gaussian") {
            pot["lambda"] = lambda;
            pot["sigma"] = sigma;
        } else if (model == "square_well") {
            pot["lambda"] = lambda;
            pot["radius"] = radius;
        } else if (model == "two_gaussian") {
            pot["lambda1"] = lambda1;
            pot["sigma1"] = sigma1;
            pot["lambda2"] = lambda2;
            pot["sigma2"] = sigma2;
        } else {
            pot["table"] = table;
        }
        pot["scale"] = scale;
        j["potential"] = pot;
        nlohmann::ordered_json g;
        g["n_per_panel"] = grid.n_per_panel;
        g["p_max"] = grid.p_max.value_or(default_p_max(mu));
        g["grading_levels"] = grid.grading_levels;
        g["base_panels"] = grid.base_panels;
        j["grid"] = g;
        nlohmann::ordered_json s;
        s["damping"] = solver.damping;
        s["tol"] = solver.tol;
        s["max_iter"] = solver.max_iter;
        s["seed_mode"] = to_string(solver.seed);
        j["solver"] = s;
        j["criterion"] = {{"ell_max", ell_max}, {"e_shift", e_shift}};
        nlohmann::ordered_json tc;
        tc["rel_tol"] = rel_tol;
        tc["t_floor"] = t_floor.value_or(default_t_floor(mu));
        if (t_upper) tc["t_upper"] = *t_upper;
        j["tc"] = tc;
        j["sweep"] = {{"lambdas", lambdas}};
        j["output"] = {{"dir", output_dir}, {"format", output_format}};
        return j;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class ConfigReader {
public:
    ConfigReader(std::map<std::string, std::pair<std::string, int>> entries, std::string origin)
        : entries_(std::move(entries)), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key) {
        used_.insert(key);
        return entries_.at(key).first;
    }

    double number(const std::string& key, double lo, double hi, bool lo_open, bool hi_open, const char* range) {
        const std::string v = text(key);
        double out = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
            fail(key, "expected a number, got '" + v + "'");
        const bool below = lo_open ? !(out > lo) : !(out >= lo);
        const bool above = hi_open ? !(out < hi) : !(out <= hi);
        if (below || above) fail(key, "value " + v + " outside accepted range " + range);
        return out;
    }

    int integer(const std::string& key, int lo, int hi) {
        const std::string v = text(key);
        int out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
        if (out < lo || out > hi)
            fail(key, "value " + v + " outside accepted range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto it = entries_.find(key);
        const std::string where = it != entries_.end() ? origin_ + ":" + std::to_string(it->second.second) : origin_;
        throw ConfigError(where + ": " + key + ": " + what);
    }

    void require(const std::string& key, const std::string& why) const {
        if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'" + why);
    }

    void reject_unused() const {
        for (const auto& [key, value] : entries_) {
            if (!used_.count(key))
                throw ConfigError(origin_ + ":" + std::to_string(value.second) + ": unknown or inapplicable key '" + key + "'");
        }
    }

private:
    std::map<std::string, std::pair<std::string, int>> entries_;
    std::set<std::string> used_;
    std::string origin_;
};

} // namespace detail

// Parses config text. `base_dir` resolves a relative potential.table path.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>",
                                   const std::filesystem::path& base_dir = ".") {
    std::map<std::string, std::pair<std::string, int>> entries;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (value.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + key + ": empty value");
        if (entries.count(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "' (first set on line " +
                              std::to_string(entries[key].second) + ")");
        entries[key] = {value, line_no};
    }
    detail::ConfigReader r(std::move(entries), origin);
    RunConfig c;
    constexpr double inf = std::numeric_limits<double>::infinity();

    r.require("mu", "");
    c.mu = r.number("mu", -inf, inf, true, true, "(-inf, inf)");
    if (r.has("temperature")) {
        if (r.text("temperature") == "zero") c.temperature.reset();
        else c.temperature = r.number("temperature", 0.0, inf, false, true, "[0, inf) or \"zero\"");
        if (c.temperature && *c.temperature == 0.0) c.temperature.reset();
    }

    r.require("potential.model", "");
    c.model = r.text("potential.model");
    auto req = [&](const std::string& key) { r.require(key, " for model " + c.model); };
    if (c.model == "gaussian") {
        req("potential.lambda");
        req("potential.sigma");
        c.lambda = r.number("potential.lambda", -inf, inf, true, true, "(-inf, inf)");
        c.sigma = r.number("potential.sigma", 0.0, inf, true, true, "(0, inf)");
    } else if (c.model == "square_well") {
        req("potential.lambda");
        req("potential.radius");
        c.lambda = r.number("potential.lambda", -inf, inf, true, true, "(-inf, inf)");
        c.radius = r.number("potential.radius", 0.0, inf, true, true, "(0, inf)");
    } else if (c.model == "two_gaussian") {
        for (const char* k : {"potential.lambda1", "potential.sigma1", "potential.lambda2", "potential.sigma2"}) req(k);
        c.lambda1 = r.number("potential.lambda1", -inf, inf, true, true, "(-inf, inf)");
        c.sigma1 = r.number("potential.sigma1", 0.0, inf, true, true, "(0, inf)");
        c.lambda2 = r.number("potential.lambda2", -inf, inf, true, true, "(-inf, inf)");
        c.sigma2 = r.number("potential.sigma2", 0.0, inf, true, true, "(0, inf)");
    } else if (c.model == "tabulated") {
        req("potential.table");
        std::filesystem::path p = r.text("potential.table");
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p)) r.fail("potential.table", "file '" + p.string() + "' does not exist");
        c.table = p.lexically_normal().string();
    } else {
        r.fail("potential.model", "unknown model '" + c.model + "' (expected gaussian, square_well, two_gaussian, tabulated)");
    }
    if (r.has("potential.scale")) c.scale = r.number("potential.scale", -inf, inf, true, true, "(-inf, inf)");

    if (r.has("grid.n_per_panel")) c.grid.n_per_panel = r.integer("grid.n_per_panel", 4, 128);
    if (r.has("grid.p_max")) c.grid.p_max = r.number("grid.p_max", 0.0, inf, true, true, "(0, inf)");
    if (r.has("grid.grading_levels")) c.grid.grading_levels = r.integer("grid.grading_levels", 0, 40);
    if (r.has("grid.base_panels")) c.grid.base_panels = r.integer("grid.base_panels", 1, 1000);
    if (c.grid.p_max && c.mu > 0.0 && !(*c.grid.p_max * *c.grid.p_max > c.mu))
        r.fail("grid.p_max", "must exceed sqrt(mu)");

    if (r.has("solver.damping")) c.solver.damping = r.number("solver.damping", 0.0, 1.0, true, false, "(0, 1]");
    if (r.has("solver.tol")) c.solver.tol = r.number("solver.tol", 0.0, 1e-2, true, false, "(0, 1e-2]");
    if (r.has("solver.max_iter")) c.solver.max_iter = r.integer("solver.max_iter", 1, 100000000);
    if (r.has("solver.seed_mode")) {
        const std::string m = r.text("solver.seed_mode");
        if (m == "constant") c.solver.seed = SeedMode::constant;
        else if (m == "linear-mode" || m == "linear_mode") c.solver.seed = SeedMode::linear_mode;
        else r.fail("solver.seed_mode", "expected 'constant' or 'linear-mode', got '" + m + "'");
    }

    if (r.has("criterion.ell_max")) c.ell_max = r.integer("criterion.ell_max", 0, 40);
    if (r.has("criterion.e_shift")) c.e_shift = r.number("criterion.e_shift", 0.0, inf, false, true, "[0, inf)");

    if (r.has("tc.rel_tol")) c.rel_tol = r.number("tc.rel_tol", 1e-6, 1e-1, true, true, "(1e-6, 1e-1)");
    if (r.has("tc.t_floor")) c.t_floor = r.number("tc.t_floor", 0.0, inf, true, true, "(0, inf)");
    if (r.has("tc.t_upper")) c.t_upper = r.number("tc.t_upper", 0.0, inf, true, true, "(0, inf)");

    if (r.has("sweep.lambdas")) {
        const std::string list = r.text("sweep.lambdas");
        c.lambdas.clear();
        std::stringstream ss(list);
        for (std::string item; std::getline(ss, item, ',');) {
            item = detail::trim(item);
            double v = 0.0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size())
                r.fail("sweep.lambdas", "expected a comma-separated list of numbers, got '" + list + "'");
            if (!(v > 0.0)) r.fail("sweep.lambdas", "couplings must be positive");
            if (!c.lambdas.empty() && !(v > c.lambdas.back())) r.fail("sweep.lambdas", "couplings must be strictly increasing");
            c.lambdas.push_back(v);
        }
    }

    if (r.has("output.dir")) c.output_dir = r.text("output.dir");
    if (r.has("output.format")) {
        c.output_format = r.text("output.format");
        if (c.output_format != "both" && c.output_format != "json" && c.output_format != "csv")
            r.fail("output.format", "expected 'both', 'json' or 'csv'");
    }

    r.reject_unused();
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path, std::filesystem::path(path).parent_path());
}

} // namespace bcslab
