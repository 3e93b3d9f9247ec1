#pragma once

// Subcommand dispatch for the bcslab command-line tool.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "bcslab/config.hpp"
#include "bcslab/critical.hpp"
#include "bcslab/criterion.hpp"
#include "bcslab/gap.hpp"
#include "bcslab/io.hpp"
#include "bcslab/operator.hpp"
#include "bcslab/sector_kernel.hpp"
#include "bcslab/symbols.hpp"

namespace bcslab {

struct RunOptions {
    bool serial = false;
    std::optional<std::string> out_dir;
};

enum ExitStatus : int { exit_ok = 0, exit_numerical = 1, exit_config = 2 };

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

namespace detail {

inline Json check_json(const CheckResult& c) {
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["value"] = c.value;
    j["threshold"] = c.threshold;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline bool want_json(const RunConfig& c) { return c.output_format != "csv"; }
inline bool want_csv(const RunConfig& c) { return c.output_format != "json"; }

} // namespace detail

// Invariants checked on the configured potential and thermodynamic point.
inline std::vector<CheckResult> run_selftest(const RunConfig& config, bool parallel) {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, double value, double threshold, bool passed, std::string note = {}) {
        out.push_back({std::move(name), passed, value, threshold, std::move(note)});
    };
    const PotentialSpec spec = config.potential();
    const ThermoParams params = config.params();

    {
        const double a = a_constant();
        add("a_constant_near_0.654", std::abs(a - 0.654), 1e-3, std::abs(a - 0.654) <= 1e-3);
    }
    {
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double a = a_constant();
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double p2 = 9.0 * u01(rng);
            const double beta = std::exp(std::log(0.1) + u01(rng) * std::log(1000.0));
            const double mu = -2.0 + 6.0 * u01(rng);
            const double k_val = k_symbol(p2, {InverseTemperature::from_beta(beta), mu});
            const double upper = std::abs(p2 - mu) + 2.0 / beta;
            worst = std::max({worst, (a * upper - k_val) / upper, (k_val - upper) / upper});
        }
        add("k_symbol_sandwich", worst, 1e-12, worst <= 1e-12);
    }
    {
        double worst = 0.0;
        for (auto [e, mu] : {std::pair{0.1, 1.0}, std::pair{1.0, 1.0}, std::pair{0.5, 4.0}})
            worst = std::max(worst, counterterm_identity_check(e, mu).defect);
        add("counterterm_identity", worst, 1e-6, worst <= 1e-6);
    }
    {
        double worst = 0.0;
        const double rmax = spec.support_radius() * 1.2;
        for (int k = 0; k <= 400; ++k) {
            const double r = rmax * k / 400.0;
            const double vp = spec.part(r, PotentialPart::positive);
            const double vm = spec.part(r, PotentialPart::negative);
            worst = std::max({worst, std::abs(vp * vm), std::abs(vp - vm - spec(r))});
        }
        add("potential_split", worst, 0.0, worst == 0.0);
    }
    const RadialGrid grid = build_grid(config.grid, config.mu);
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) sum += grid.weights[i] * grid.nodes[i] * grid.nodes[i];
        const double exact = grid.p_max * grid.p_max * grid.p_max / 3.0;
        const double rel = std::abs(sum - exact) / exact;
        add("grid_moment_exactness", rel, 1e-12, rel <= 1e-12);
    }
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> up(0.0, grid.p_max);
        double sym = 0.0;
        double routes = 0.0;
        const int ell_top = std::min(config.ell_max, 2);
        for (int ell = 0; ell <= ell_top; ++ell) {
            const SectorKernel w(spec, ell, PotentialPart::full, grid.p_max);
            for (int k = 0; k < 12; ++k) {
                const double p = up(rng);
                const double q = up(rng);
                const double wpq = w(p, q);
                sym = std::max(sym, std::abs(wpq - w(q, p)));
                if (spec.has_closed_form_fourier()) routes = std::max(routes, std::abs(wpq - w.angular_average(p, q)));
            }
        }
        add("kernel_symmetry", sym, 1e-12, sym <= 1e-12);
        if (spec.has_closed_form_fourier()) add("kernel_routes_agree", routes, 1e-8, routes <= 1e-8);
        else add("kernel_routes_agree", 0.0, 1e-8, true, "skipped: no closed-form transform for tabulated potentials");
    }
    const Discretization disc(spec, grid, config.ell_max, parallel);
    const CriterionReport crit = instability_verdict(disc, params, parallel);
    {
        double asym = 0.0;
        for (int ell = 0; ell <= disc.ell_max(); ++ell) {
            const SectorOperator op = assemble_sector_operator(disc, ell, params);
            asym = std::max(asym, (op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff());
        }
        add("operator_exact_symmetry", asym, 0.0, asym == 0.0);
    }
    {
        const double e = params.is_zero_temperature() ? std::max(config.e_shift, 0.1) : config.e_shift;
        const SectorOperator b = assemble_birman_schwinger(disc, 0, params, e);
        const Eigen::VectorXd ev = detail::symmetric_eigenvalues(b.matrix, "selftest");
        const double top = std::max(ev(ev.size() - 1), 1e-300);
        const double rel = -ev(0) / top;
        add("birman_schwinger_psd", rel, 1e-10, rel <= 1e-10);
        if (!params.is_zero_temperature() && config.e_shift == 0.0) {
            const double lmin = crit.lowest[0];
            const double tol = eigen_tolerance(params);
            if (std::abs(lmin) > 1e3 * tol) {
                const bool agree = (ev(ev.size() - 1) > 1.0) == (lmin < 0.0);
                add("birman_schwinger_matches_spectrum", ev(ev.size() - 1), 1.0, agree);
            } else {
                add("birman_schwinger_matches_spectrum", ev(ev.size() - 1), 1.0, true,
                    "skipped: lowest eigenvalue inside the resolution band");
            }
        }
    }
    {
        const GapState st = solve_gap(disc, params, config.solver);
        double tanh_def = 0.0;
        double admiss = 0.0;
        double mono = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p2 = grid.nodes[i] * grid.nodes[i];
            const double x = p2 - params.mu;
            const double e = st.energy[i];
            const double t = params.is_zero_temperature() ? 1.0 : std::tanh(0.5 * params.beta.beta() * e);
            tanh_def = std::max(tanh_def, std::abs(t * x - (1.0 - 2.0 * st.gamma[i]) * e) / energy_scale(params.mu));
            admiss = std::max(admiss, st.alpha[i] * st.alpha[i] - st.gamma[i] * (1.0 - st.gamma[i]));
            const double g0 = gamma0(p2, params);
            if (x < 0.0) mono = std::max(mono, st.gamma[i] - g0);
            if (x > 0.0) mono = std::max(mono, g0 - st.gamma[i]);
        }
        add("gap_tanh_identity", tanh_def, 1e-10, tanh_def <= 1e-10);
        add("gap_admissibility", admiss, 1e-12, admiss <= 1e-12);
        add("gap_monotonicity", mono, 1e-12, mono <= 1e-12);
        add("gap_fixed_point_residual", st.residual_sup, config.solver.tol, st.residual_sup <= config.solver.tol);
        if (!st.converged_to_trivial) {
            const StationarityResiduals r = stationarity_residuals(disc, st);
            const double worst = std::max(r.r_alpha, r.r_gamma);
            add("gap_stationarity", worst, 1e-6, worst <= 1e-6);
        }
        if (crit.verdict != Verdict::indeterminate) {
            const bool lin = crit.unstable;
            const bool nonlin = !st.converged_to_trivial;
            const bool energy = st.free_energy < st.free_energy_normal - 1e-12 * std::abs(st.free_energy_normal);
            add("equivalence_linear_nonlinear_energy", crit.minimum, 0.0, lin == nonlin && nonlin == energy);
        }
    }
    return out;
}

inline int run_subcommand(const std::string& name, RunConfig config, const RunOptions& options = {}) {
    if (options.out_dir) config.output_dir = *options.out_dir;
    const std::filesystem::path dir = config.output_dir;
    const bool parallel = !options.serial;
    const Json cfg = config.to_json();
    std::vector<std::filesystem::path> written;
    auto emit_json = [&](const std::string& file, const Json& j) {
        write_json(dir / file, j);
        written.push_back(dir / file);
    };
    auto emit_csv = [&](const std::string& file, const CsvTable& t) {
        write_csv(dir / file, t);
        written.push_back(dir / file);
    };
    int status = exit_ok;

    if (name == "spectrum") {
        const PotentialSpec spec = config.potential();
        const ThermoParams params = config.params();
        const Discretization disc(spec, build_grid(config.grid, config.mu), config.ell_max, parallel);
        CriterionReport report = instability_verdict(disc, params, parallel);
        if (!params.is_zero_temperature() || config.e_shift > 0.0)
            report.bs_norm = bs_norm(disc, params, config.e_shift, report.minimizing_ell);
        Json j;
        j["config"] = cfg;
        j["grid"] = grid_json(disc.grid());
        j["spectrum"] = to_json(report);
        emit_json("spectrum.json", j);
    } else if (name == "gap") {
        const PotentialSpec spec = config.potential();
        const ThermoParams params = config.params();
        const Discretization disc(spec, build_grid(config.grid, config.mu), 0, parallel);
        const GapState st = solve_gap(disc, params, config.solver);
        Json j;
        j["config"] = cfg;
        j["grid"] = grid_json(disc.grid());
        j["trivial"] = st.converged_to_trivial;
        j["iterations"] = st.iterations;
        j["residual_sup"] = st.residual_sup;
        j["final_damping"] = st.final_damping;
        j["xi"] = st.xi;
        j["free_energy"] = st.free_energy;
        j["free_energy_normal"] = st.free_energy_normal;
        j["delta_at_fermi"] = st.delta[detail::fermi_index(st.grid, config.mu)];
        if (!st.converged_to_trivial) {
            const StationarityResiduals r = stationarity_residuals(disc, st);
            j["stationarity"] = {{"r_alpha", r.r_alpha}, {"r_gamma", r.r_gamma}, {"nodes", r.nodes_used}};
        } else {
            j["stationarity"] = nullptr;
        }
        if (detail::want_csv(config)) emit_csv("gap.csv", gap_csv(st));
        if (detail::want_json(config)) emit_json("gap.json", j);
    } else if (name == "tc") {
        const TcReport report = compute_tc_report(config.potential(), config.mu, config.tc_options(parallel));
        Json j;
        j["config"] = cfg;
        j["tc"] = to_json(report);
        emit_json("tc.json", j);
    } else if (name == "sweep") {
        const SweepResult sweep = lambda_sweep(config.potential(), config.mu, config.lambdas, config.tc_options(parallel));
        Json j;
        j["config"] = cfg;
        j["sweep"] = to_json(sweep);
        if (detail::want_csv(config)) emit_csv("sweep.csv", sweep_csv(sweep));
        if (detail::want_json(config)) emit_json("sweep.json", j);
    } else if (name == "selftest") {
        const std::vector<CheckResult> checks = run_selftest(config, parallel);
        bool all = true;
        Json arr = Json::array();
        for (const auto& c : checks) {
            all = all && c.passed;
            arr.push_back(detail::check_json(c));
        }
        Json j;
        j["config"] = cfg;
        j["checks"] = arr;
        j["passed"] = all;
        emit_json("selftest.json", j);
        for (const auto& c : checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << format_double(c.value) << ")\n";
        if (!all) status = exit_numerical;
    } else {
        throw ConfigError("unknown subcommand '" + name + "' (expected spectrum, gap, tc, sweep, selftest)");
    }
    for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
    return status;
}

} // namespace bcslab
