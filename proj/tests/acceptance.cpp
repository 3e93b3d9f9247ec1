// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bcslab/bcslab.hpp"

using namespace bcslab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, double secs) {
    if (!pass) ++failures;
    std::printf("%s %2d %s: %s [%.2f s]\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Case {
    std::string name;
    PotentialSpec potential;
    double mu;
};

std::vector<Case> standard_cases() {
    const PotentialSpec g(GaussianModel{5.0, 1.0});
    const PotentialSpec t(TwoGaussianModel{6.0, 1.0, -8.0, 0.4});
    return {{"gaussian(5,1) mu=1", g, 1.0},
            {"gaussian(5,1) mu=0.5", g, 0.5},
            {"two_gaussian(6,1,-8,0.4) mu=1", t, 1.0},
            {"two_gaussian(6,1,-8,0.4) mu=0.5", t, 0.5}};
}

// (2 pi)^{-3/2} int V^(|p - q|) e^{-q^2/2} d^3q = E[V^(|p - Z|)], Z ~ N(0, I_3).
double monte_carlo_convolution(const PotentialSpec& v, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const std::size_t n = std::size_t{1} << 22;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = p - z(rng), y = z(rng), w = z(rng);
        sum += *v.fourier_closed_form(std::sqrt(x * x + y * y + w * w));
    }
    return sum / static_cast<double>(n);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BCSLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Pure states sit on the boundary gamma(1 - gamma) = alpha^2, so admissibility is read up to rounding.
struct StateQuality {
    double residual = 0.0;
    double stationarity = 0.0;
    double admissibility = 0.0;
    double monotonicity = 0.0;
    double tanh_identity = 0.0;
    double purity = 0.0;
};

StateQuality quality(const Discretization& disc, const GapState& s) {
    StateQuality q;
    q.residual = s.residual_sup;
    const StationarityResiduals r = stationarity_residuals(disc, s);
    q.stationarity = std::max(r.r_alpha, r.r_gamma);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const double p2 = s.grid.nodes[i] * s.grid.nodes[i];
        const double x = p2 - s.params.mu;
        const double e = s.energy[i];
        const double t = s.params.is_zero_temperature() ? 1.0 : std::tanh(0.5 * s.params.beta.beta() * e);
        q.tanh_identity = std::max(q.tanh_identity, std::abs(t * x - (1.0 - 2.0 * s.gamma[i]) * e));
        const double slack = s.gamma[i] * (1.0 - s.gamma[i]) - s.alpha[i] * s.alpha[i];
        q.admissibility = std::max({q.admissibility, -slack, -s.gamma[i], s.gamma[i] - 1.0});
        q.purity = std::max(q.purity, std::abs(slack));
        const double g0 = gamma0(p2, s.params);
        if (x < 0.0) q.monotonicity = std::max(q.monotonicity, s.gamma[i] - g0);
        if (x > 0.0) q.monotonicity = std::max(q.monotonicity, g0 - s.gamma[i]);
    }
    return q;
}

} // namespace

int main() {
    const auto total = Clock::now();

    // 1
    {
        const auto t0 = Clock::now();
        const double a = a_constant();
        const double secs = seconds_since(t0);
        report(1, "constant_a", std::abs(a - 0.654) <= 1e-3 && secs < 1.0, fmt("a = %.12f", a), secs);
    }

    // 2
    {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> up(0.0, 16.0), ub(-1.0, 2.0), um(-2.0, 4.0);
        const double a = a_constant();
        double worst = -1e300;
        for (int i = 0; i < 1000; ++i) {
            const double p2 = up(rng), beta = std::pow(10.0, ub(rng)), mu = um(rng);
            const double k = k_symbol(p2, ThermoParams{InverseTemperature::from_beta(beta), mu});
            const double s = std::abs(p2 - mu) + 2.0 / beta;
            worst = std::max({worst, a * s - k, k - s});
        }
        const double secs = seconds_since(t0);
        report(2, "k_sandwich", worst <= 1e-12 && secs < 1.0, fmt("max violation %.3g over 1000 samples", worst), secs);
    }

    // 3
    {
        const auto t0 = Clock::now();
        double worst = 0.0;
        for (auto [e, mu] : {std::pair{0.1, 1.0}, {1.0, 1.0}, {0.5, 4.0}})
            worst = std::max(worst, counterterm_identity_check(e, mu).defect);
        const double secs = seconds_since(t0);
        report(3, "counterterm_identity", worst <= 1e-6 && secs < 5.0, fmt("max relative defect %.3g", worst), secs);
    }

    // T_c of the standard cases by both methods
    const std::vector<Case> cases = standard_cases();
    std::vector<TcReport> tc_reports(cases.size());
    std::vector<double> tc_seconds(cases.size());
    TcOptions tc_opts;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto t0 = Clock::now();
        tc_reports[c] = compute_tc_report(cases[c].potential, cases[c].mu, tc_opts);
        tc_seconds[c] = seconds_since(t0);
    }

    // 4 and 8
    std::vector<StateQuality> nontrivial_quality;
    {
        const auto t0 = Clock::now();
        int agree = 0, total_cases = 0;
        std::string mismatches;
        bool resolved = true;
        for (std::size_t c = 0; c < cases.size(); ++c) {
            if (!tc_reports[c].eigen.resolved()) {
                resolved = false;
                continue;
            }
            const double tc = tc_reports[c].eigen.value;
            const Discretization disc(cases[c].potential, build_grid(GridOptions{}, cases[c].mu), tc_opts.ell_max);
            for (double f : {0.0, 0.3, 0.7, 1.3, 2.0}) {
                const ThermoParams params = ThermoParams::at_temperature(f * tc, cases[c].mu);
                const CriterionReport crit = instability_verdict(disc, params, true);
                const GapState st = solve_gap(disc, params);
                const bool linear = crit.minimum < 0.0;
                const bool nonlinear = !st.converged_to_trivial;
                const bool energy = st.free_energy < st.free_energy_normal - 1e-12 * std::abs(st.free_energy_normal);
                ++total_cases;
                if (linear == nonlinear && nonlinear == energy) ++agree;
                else mismatches += fmt(" [%s T=%.2fTc]", cases[c].name.c_str(), f);
                if (nonlinear) nontrivial_quality.push_back(quality(disc, st));
            }
        }
        const double secs = seconds_since(t0);
        report(4, "equivalence_sweep", resolved && total_cases >= 20 && agree == total_cases && secs < 300.0,
               fmt("%d/%d cases agree%s", agree, total_cases, mismatches.c_str()), secs);
    }

    // 5
    {
        double worst = 0.0;
        double secs = 0.0;
        std::string detail;
        bool ok = true;
        for (std::size_t c = 0; c < cases.size(); ++c) {
            if (cases[c].name == "gaussian(5,1) mu=0.5") continue;
            secs += tc_seconds[c];
            const TcReport& r = tc_reports[c];
            if (!r.relative_difference) {
                ok = false;
                detail += fmt(" %s unresolved;", cases[c].name.c_str());
                continue;
            }
            worst = std::max(worst, *r.relative_difference);
            detail += fmt(" %s: %.7f vs %.7f;", cases[c].name.c_str(), r.eigen.value, r.birman_schwinger.value);
        }
        report(5, "tc_cross_method", ok && worst <= 5e-3 && secs < 120.0,
               fmt("max relative difference %.3g;%s", worst, detail.c_str()), secs);
    }

    // 7, computed before 6 so the sweep joins the bound catalog
    SweepResult sweep;
    const std::vector<double> lambdas{0.6, 0.8, 1.0, 1.25, 1.5};
    const PotentialSpec sweep_base(GaussianModel{1.0, 1.0});
    double sweep_secs = 0.0;
    {
        const auto t0 = Clock::now();
        sweep = lambda_sweep(sweep_base, 1.0, lambdas, tc_opts);
        sweep_secs = seconds_since(t0);
    }

    // 6
    {
        const auto t0 = Clock::now();
        int checked = 0, violations = 0, thm27_checked = 0;
        std::string detail;
        auto check = [&](const std::string& name, const PotentialSpec& v, double mu, const TcResult& tc) {
            if (tc.status == TcStatus::failed) {
                ++violations;
                detail += " " + name + " failed;";
                return;
            }
            const double value = tc.resolved() ? tc.value : tc.upper;
            ++checked;
            if (value > tc_rough_bound(v)) {
                ++violations;
                detail += " " + name + " rough;";
            }
            const WeakCouplingBound b = tc_upper_bound_thm27(v, mu);
            if (b.bound) {
                ++thm27_checked;
                if (value > *b.bound) {
                    ++violations;
                    detail += " " + name + " weak-coupling;";
                }
            }
        };
        for (std::size_t c = 0; c < cases.size(); ++c) {
            check(cases[c].name + " eigen", cases[c].potential, cases[c].mu, tc_reports[c].eigen);
            check(cases[c].name + " bs", cases[c].potential, cases[c].mu, tc_reports[c].birman_schwinger);
        }
        for (const SweepPoint& p : sweep.points)
            check(fmt("sweep lambda=%g", p.lambda), sweep_base.with_scale(p.lambda), 1.0, p.tc);
        const PotentialSpec well(SquareWellModel{2.0, 1.0});
        check("square_well(2,1) mu=1", well, 1.0, tc_bisect(well, 1.0, tc_opts));
        const PotentialSpec table = load_table(std::string(BCSLAB_DATA_DIR) + "/gaussian_table.csv", 0.8);
        check("tabulated gaussian x0.8 mu=1", table, 1.0, tc_bisect(table, 1.0, tc_opts));
        const PotentialSpec weak = sweep_base.with_scale(0.3);
        check("gaussian(0.3,1) mu=1", weak, 1.0, tc_bisect(weak, 1.0, tc_opts));
        report(6, "tc_bounds", violations == 0 && checked > 0,
               fmt("%d T_c values, %d with weak-coupling bound, %d violations%s", checked, thm27_checked, violations,
                   detail.c_str()),
               seconds_since(t0));
    }

    // 7
    {
        std::string detail;
        for (const SweepPoint& p : sweep.points)
            detail += fmt(" %g:%s", p.lambda, p.tc.resolved() ? fmt("%.6g", p.tc.value).c_str() : "unresolved");
        const bool ok = sweep.fit && sweep.fit->r2 >= 0.995 && sweep.fit->slope > 0.0 && sweep_secs < 600.0;
        report(7, "exponential_smallness", ok,
               sweep.fit ? fmt("c = %.6g, r2 = %.6f, points %d;%s", sweep.fit->slope, sweep.fit->r2, sweep.fit->points,
                               detail.c_str())
                         : "no fit" + detail,
               sweep_secs);
    }

    // 8
    {
        StateQuality worst;
        for (const StateQuality& q : nontrivial_quality) {
            worst.residual = std::max(worst.residual, q.residual);
            worst.stationarity = std::max(worst.stationarity, q.stationarity);
            worst.admissibility = std::max(worst.admissibility, q.admissibility);
            worst.monotonicity = std::max(worst.monotonicity, q.monotonicity);
            worst.tanh_identity = std::max(worst.tanh_identity, q.tanh_identity);
        }
        const bool ok = !nontrivial_quality.empty() && worst.residual <= 1e-8 && worst.stationarity <= 1e-6 &&
                        worst.admissibility <= 1e-15 && worst.monotonicity <= 0.0 && worst.tanh_identity <= 1e-10;
        report(8, "nonlinear_quality", ok,
               fmt("%zu states: residual %.3g, stationarity %.3g, admissibility excess %.3g, monotonicity excess %.3g, "
                   "tanh identity %.3g",
                   nontrivial_quality.size(), worst.residual, worst.stationarity, worst.admissibility,
                   worst.monotonicity, worst.tanh_identity),
               0.0);
    }

    // 9
    {
        const auto t0 = Clock::now();
        const PotentialSpec v(GaussianModel{5.0, 1.0});
        const ThermoParams cold = ThermoParams::zero_temperature(1.0);
        const Discretization disc(v, build_grid(GridOptions{}, 1.0), 0);
        const GapState s = solve_gap(disc, cold);
        const Discretization fine_disc(v, build_grid(GridOptions{32, std::nullopt, 7, 5}, 1.0), 0);
        const GapState fine = solve_gap(fine_disc, cold);
        const double purity = std::max(quality(disc, s).purity, quality(fine_disc, fine).purity);
        const double drift = std::abs(fine.xi - s.xi) / s.xi;
        bool negative_transform = true;
        for (double p = 0.0; p <= 20.0; p += 0.01) negative_transform = negative_transform && fourier_radial(v, p) < 0.0;
        const bool ok = !s.converged_to_trivial && purity <= 1e-12 && s.xi > 0.0 && drift <= 1e-3 && negative_transform;
        report(9, "zero_temperature_pure_state", ok,
               fmt("max |gamma(1-gamma) - alpha^2| %.3g, Xi %.10g (refined %.10g), drift %.3g", purity, s.xi, fine.xi, drift),
               seconds_since(t0));
    }

    // 10
    {
        const auto t0 = Clock::now();
        const PotentialSpec v(GaussianModel{5.0, 1.0});
        const double mu = 1.0;
        const Discretization disc(v, build_grid(GridOptions{}, mu), tc_opts.ell_max);
        const PotentialNorms norms = decompose_and_norms(v);
        const ThermoParams cold = ThermoParams::zero_temperature(mu);
        bool increasing = true, bounded = true;
        double prev = 0.0;
        std::string detail;
        for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
            double n = 0.0;
            for (int ell = 0; ell <= disc.ell_max(); ++ell) n = std::max(n, bs_norm(disc, cold, e, ell));
            const double bound = std::sqrt(mu) * norms.l1_negative * f_counterterm(e / mu) + hls_constant() * norms.l32_negative;
            increasing = increasing && n > prev;
            bounded = bounded && n <= bound;
            prev = n;
            detail += fmt(" e=%g: %.8g <= %.6g;", e, n, bound);
        }
        report(10, "birman_schwinger_divergence", increasing && bounded, detail.substr(1), seconds_since(t0));
    }

    // 11
    {
        const auto t0 = Clock::now();
        const std::vector<PotentialSpec> pots{PotentialSpec(GaussianModel{5.0, 1.0}), PotentialSpec(SquareWellModel{2.0, 1.3}),
                                              PotentialSpec(TwoGaussianModel{6.0, 1.0, -8.0, 0.4})};
        const double pts[] = {0.05, 0.4, 1.0, 1.7, 3.2, 6.0};
        double route = 0.0;
        for (const auto& v : pots)
            for (int ell = 0; ell <= 4; ++ell) {
                const SectorKernel w(v, ell);
                for (double p : pts)
                    for (double q : pts) route = std::max(route, std::abs(w(p, q) - w.angular_average(p, q)));
            }
        double mc = 0.0;
        std::uint64_t seed = 11;
        std::vector<double> edges;
        for (int k = 0; k <= 28; ++k) edges.push_back(0.5 * k);
        const quad::Rule rule = quad::composite(edges, 12);
        for (const auto& v : pots) {
            const SectorKernel w(v, 0, PotentialPart::full, 32.0);
            for (double p : {0.0, 1.0, 2.5}) {
                double conv = 0.0;
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    const double q = rule.nodes[i];
                    conv += rule.weights[i] * q * q * std::exp(-0.5 * q * q) * w(p, q);
                }
                mc = std::max(mc, std::abs(conv - monte_carlo_convolution(v, p, seed++)) / std::max(1.0, std::abs(conv)));
            }
        }
        const double secs = seconds_since(t0);
        report(11, "kernel_oracles", route <= 1e-8 && mc <= 1e-3 && secs < 120.0,
               fmt("route A vs B %.3g, Monte-Carlo %.3g", route, mc), secs);
    }

    // 12
    {
        const auto t0 = Clock::now();
        const fs::path dir = fs::temp_directory_path() / ("bcslab_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const fs::path cfg = dir / "run.cfg";
        std::ofstream(cfg) << "mu = 1\ntemperature = 0.5\npotential.model = two_gaussian\npotential.lambda1 = 6\n"
                              "potential.sigma1 = 1\npotential.lambda2 = -8\npotential.sigma2 = 0.4\n"
                              "criterion.ell_max = 2\nsweep.lambdas = 0.9, 1.0\n";
        int compared = 0, differing = 0, failed_runs = 0;
        for (const char* sub : {"spectrum", "gap", "selftest", "sweep"}) {
            const fs::path out = dir / sub;
            const fs::path first = dir / (std::string(sub) + "_first");
            const std::string args = std::string(sub) + " --serial --config " + cfg.string() + " --out " + out.string();
            if (run_cli(args) != 0) ++failed_runs;
            fs::rename(out, first);
            if (run_cli(args) != 0) ++failed_runs;
            for (const auto& entry : fs::directory_iterator(first)) {
                ++compared;
                if (slurp(entry.path()) != slurp(out / entry.path().filename())) ++differing;
            }
        }
        fs::remove_all(dir);
        report(12, "serial_determinism", failed_runs == 0 && compared > 0 && differing == 0,
               fmt("%d files compared, %d differ, %d failed runs", compared, differing, failed_runs), seconds_since(t0));
    }

    std::printf("%d of 12 criteria failed [total %.1f s]\n", failures, seconds_since(total));
    return failures == 0 ? 0 : 1;
}
