#pragma once

// Critical temperature by two independent routes (sign change of the lowest
// eigenvalue in T, Birman-Schwinger norm crossing 1 in beta), the rough and
// weak-coupling upper bounds, the coupling sweep with its exponential fit,
// and the integral identity for ||k_{e,mu}||_1.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bcslab/criterion.hpp"
#include "bcslab/error.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/operator.hpp"
#include "bcslab/potential.hpp"
#include "bcslab/symbols.hpp"

namespace bcslab {

struct TcOptions {
    int ell_max = 4;
    double rel_tol = 1e-4;
    std::optional<double> t_floor;   // default 1e-6 max(mu, 1)
    std::optional<double> t_upper;   // default (1/2) sup V_-
    GridOptions grid;
    bool parallel = true;
};

enum class TcStatus { resolved, below_floor, failed };

inline const char* to_string(TcStatus s) {
    switch (s) {
    case TcStatus::resolved: return "resolved";
    case TcStatus::below_floor: return "below_floor";
    default: return "failed";
    }
}

struct TcResult {
    TcStatus status = TcStatus::failed;
    double value = 0.0;   // bracket midpoint when resolved, T_floor when below it
    double lower = 0.0;   // bracket in T
    double upper = 0.0;
    int iterations = 0;
    int minimizing_ell = 0;
    std::string note;

    bool resolved() const { return status == TcStatus::resolved; }
};

inline double default_t_floor(double mu) { return 1e-6 * std::max(mu, 1.0); }

// (1/2) sup V_-: K >= 2T makes K + V positive above it.
inline double tc_rough_bound(const PotentialSpec& spec) { return 0.5 * spec.sup_negative_part(); }

namespace detail {

inline void check_rel_tol(double rel_tol) {
    if (!(rel_tol > 1e-6 && rel_tol < 1e-1)) throw DomainError("rel_tol must lie in (1e-6, 1e-1)");
}

inline double min_over_sectors(const Discretization& disc, double temperature, double mu, int& argmin,
                               bool parallel) {
    const CriterionReport r = instability_verdict(disc, ThermoParams::at_temperature(temperature, mu), parallel);
    argmin = r.minimizing_ell;
    return r.minimum;
}

inline double max_bs_norm(const Discretization& disc, double beta, double mu, int& argmax, bool parallel) {
    const ThermoParams params{InverseTemperature::from_beta(beta), mu};
    const int ell_max = disc.ell_max();
    std::vector<double> norms(static_cast<std::size_t>(ell_max) + 1);
    if (parallel && ell_max > 0) {
        std::vector<std::future<double>> jobs;
        for (int ell = 0; ell <= ell_max; ++ell)
            jobs.push_back(std::async(std::launch::async, [&, ell] { return bs_norm(disc, params, 0.0, ell); }));
        for (int ell = 0; ell <= ell_max; ++ell) norms[static_cast<std::size_t>(ell)] = jobs[static_cast<std::size_t>(ell)].get();
    } else {
        for (int ell = 0; ell <= ell_max; ++ell) norms[static_cast<std::size_t>(ell)] = bs_norm(disc, params, 0.0, ell);
    }
    argmax = static_cast<int>(std::max_element(norms.begin(), norms.end()) - norms.begin());
    return norms[static_cast<std::size_t>(argmax)];
}

struct Brackets {
    double floor = 0.0;
    double upper = 0.0;
};

inline Brackets tc_brackets(const PotentialSpec& spec, double mu, const TcOptions& options) {
    Brackets b;
    b.floor = options.t_floor.value_or(default_t_floor(mu));
    if (!(b.floor > 0.0)) throw DomainError("t_floor must be positive");
    if (options.t_upper) {
        b.upper = *options.t_upper;
    } else {
        const double sup = spec.sup_negative_part();
        if (!std::isfinite(sup)) throw ConfigError("sup V_- is not finite; set tc.t_upper explicitly");
        b.upper = 1.001 * 0.5 * sup;
    }
    b.upper = std::max(b.upper, 2.0 * b.floor);
    return b;
}

} // namespace detail

// Bisection in T on the sign of min_ell lambda_min(K_{1/T,mu} + V), geometric
// midpoints, stopped when the bracket width is below rel_tol times its midpoint.
inline TcResult tc_bisect(const Discretization& disc, double mu, const TcOptions& options = {}) {
    detail::check_rel_tol(options.rel_tol);
    const detail::Brackets b = detail::tc_brackets(disc.potential(), mu, options);
    const double tol_at = eigen_tolerance(ThermoParams::at_temperature(b.floor, mu));
    TcResult out;
    int ell = 0;
    const double at_floor = detail::min_over_sectors(disc, b.floor, mu, ell, options.parallel);
    if (!(at_floor < -tol_at)) {
        out.status = TcStatus::below_floor;
        out.value = b.floor;
        out.lower = 0.0;
        out.upper = b.floor;
        out.minimizing_ell = ell;
        std::ostringstream msg;
        msg << "no instability at T_floor = " << b.floor << " (lowest eigenvalue " << at_floor << ")";
        out.note = msg.str();
        return out;
    }
    out.minimizing_ell = ell;
    double lo = b.floor;
    double hi = b.upper;
    int expansions = 0;
    while (detail::min_over_sectors(disc, hi, mu, ell, options.parallel) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 40) throw NumericalError("tc_bisect: no stable temperature found above the upper bracket");
    }
    if (expansions > 0) out.note = "upper bracket expanded beyond (1/2) sup V_-";
    int iter = 0;
    while (hi - lo > options.rel_tol * 0.5 * (hi + lo) && iter < 200) {
        const double mid = std::sqrt(lo * hi);
        int arg = 0;
        if (detail::min_over_sectors(disc, mid, mu, arg, options.parallel) < 0.0) {
            lo = mid;
            out.minimizing_ell = arg;
        } else {
            hi = mid;
        }
        ++iter;
    }
    out.status = TcStatus::resolved;
    out.lower = lo;
    out.upper = hi;
    out.value = 0.5 * (lo + hi);
    out.iterations = iter;
    return out;
}

inline TcResult tc_bisect(const PotentialSpec& spec, double mu, const TcOptions& options = {}) {
    const Discretization disc(spec, build_grid(options.grid, mu), options.ell_max, options.parallel);
    return tc_bisect(disc, mu, options);
}

// Bisection in beta on max_ell ||B_0^beta|| - 1 over the brackets of
// tc_bisect translated to beta.
inline TcResult tc_birman_schwinger(const Discretization& disc, double mu, const TcOptions& options = {}) {
    detail::check_rel_tol(options.rel_tol);
    const detail::Brackets b = detail::tc_brackets(disc.potential(), mu, options);
    TcResult out;
    int ell = 0;
    double beta_hi = 1.0 / b.floor;
    double beta_lo = 1.0 / b.upper;
    const double norm_hi = detail::max_bs_norm(disc, beta_hi, mu, ell, options.parallel);
    if (!(norm_hi > 1.0)) {
        out.status = TcStatus::failed;
        out.value = b.floor;
        out.upper = b.floor;
        std::ostringstream msg;
        msg.precision(10);
        msg << "Birman-Schwinger norm stays below 1 on the bracket: ||B|| = " << norm_hi << " at T_floor = " << b.floor;
        out.note = msg.str();
        return out;
    }
    out.minimizing_ell = ell;
    int expansions = 0;
    double norm_lo = detail::max_bs_norm(disc, beta_lo, mu, ell, options.parallel);
    while (norm_lo > 1.0) {
        beta_hi = beta_lo;
        beta_lo *= 0.5;
        norm_lo = detail::max_bs_norm(disc, beta_lo, mu, ell, options.parallel);
        if (++expansions > 40) {
            out.status = TcStatus::failed;
            out.note = "Birman-Schwinger norm exceeds 1 at every sampled temperature";
            return out;
        }
    }
    int iter = 0;
    while (beta_hi - beta_lo > options.rel_tol * 0.5 * (beta_hi + beta_lo) && iter < 200) {
        const double mid = std::sqrt(beta_lo * beta_hi);
        int arg = 0;
        if (detail::max_bs_norm(disc, mid, mu, arg, options.parallel) > 1.0) {
            beta_hi = mid;
            out.minimizing_ell = arg;
        } else {
            beta_lo = mid;
        }
        ++iter;
    }
    out.status = TcStatus::resolved;
    out.lower = 1.0 / beta_hi;
    out.upper = 1.0 / beta_lo;
    out.value = 1.0 / (0.5 * (beta_lo + beta_hi));
    out.iterations = iter;
    return out;
}

inline TcResult tc_birman_schwinger(const PotentialSpec& spec, double mu, const TcOptions& options = {}) {
    const Discretization disc(spec, build_grid(options.grid, mu), options.ell_max, options.parallel);
    return tc_birman_schwinger(disc, mu, options);
}

struct WeakCouplingBound {
    bool hypothesis_holds = false;
    double hls_term = 0.0;   // (1/3)(2/pi)^{4/3} ||V_-||_{3/2}
    double a = 0.0;
    std::optional<double> bound;
};

// T_c <= (mu/2) f^{-1}((a - (1/3)(2/pi)^{4/3} ||V_-||_{3/2}) / (mu^{1/2} ||V_-||_1))
// whenever the numerator is positive.
inline WeakCouplingBound tc_upper_bound_thm27(const PotentialNorms& norms, double mu) {
    if (!(mu > 0.0)) throw DomainError("weak-coupling bound requires mu > 0");
    WeakCouplingBound out;
    out.a = a_constant();
    out.hls_term = hls_constant() * norms.l32_negative;
    out.hypothesis_holds = out.hls_term < out.a;
    if (!out.hypothesis_holds) return out;
    if (norms.l1_negative == 0.0) {
        out.bound = 0.0;
        return out;
    }
    const double y = (out.a - out.hls_term) / (std::sqrt(mu) * norms.l1_negative);
    try {
        out.bound = 0.5 * mu * f_counterterm_inverse(y);
    } catch (const RangeError&) {
        // y beyond f(1e-290): f^{-1}(y) lies below that point
        out.bound = 0.5 * mu * 1e-290;
    }
    return out;
}

inline WeakCouplingBound tc_upper_bound_thm27(const PotentialSpec& spec, double mu) {
    return tc_upper_bound_thm27(decompose_and_norms(spec), mu);
}

struct TcReport {
    TcResult eigen;
    TcResult birman_schwinger;
    double rough_bound = 0.0;
    WeakCouplingBound thm27;
    bool rough_satisfied = false;
    std::optional<bool> thm27_satisfied;
    std::optional<double> relative_difference;
};

inline TcReport compute_tc_report(const PotentialSpec& spec, double mu, const TcOptions& options = {}) {
    const Discretization disc(spec, build_grid(options.grid, mu), options.ell_max, options.parallel);
    TcReport report;
    report.eigen = tc_bisect(disc, mu, options);
    report.birman_schwinger = tc_birman_schwinger(disc, mu, options);
    report.rough_bound = tc_rough_bound(spec);
    const double tc = report.eigen.resolved() ? report.eigen.value : report.eigen.upper;
    report.rough_satisfied = tc <= report.rough_bound;
    if (mu > 0.0) {
        report.thm27 = tc_upper_bound_thm27(spec, mu);
        if (report.thm27.bound) report.thm27_satisfied = tc <= *report.thm27.bound;
    }
    if (report.eigen.resolved() && report.birman_schwinger.resolved())
        report.relative_difference =
            std::abs(report.birman_schwinger.value - report.eigen.value) / report.eigen.value;
    return report;
}

struct SweepPoint {
    double lambda = 0.0;
    TcResult tc;
    WeakCouplingBound thm27;
};

struct SweepFit {
    double slope = 0.0;       // c in ln T_c = -c / lambda + b
    double intercept = 0.0;   // b
    double r2 = 0.0;
    int points = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<SweepFit> fit;
};

// Least squares of ln T_c against 1/lambda over resolved points.
inline std::optional<SweepFit> fit_exponential(const std::vector<SweepPoint>& points) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : points) {
        if (p.tc.resolved()) {
            xs.push_back(1.0 / p.lambda);
            ys.push_back(std::log(p.tc.value));
        }
    }
    if (xs.size() < 3) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) return std::nullopt;
    SweepFit fit;
    const double beta1 = sxy / sxx;
    fit.slope = -beta1;
    fit.intercept = my - beta1 * mx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.points = static_cast<int>(xs.size());
    return fit;
}

// T_c(lambda) for the potential lambda V_base. Points run concurrently when
// options.parallel is set; results are joined in input order.
inline SweepResult lambda_sweep(const PotentialSpec& base, double mu, const std::vector<double>& lambdas,
                                const TcOptions& options = {}) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw DomainError("lambda_sweep: couplings must be positive");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw DomainError("lambda_sweep: couplings must be increasing");
    }
    TcOptions inner = options;
    inner.parallel = false;
    auto run = [&](double lambda) {
        SweepPoint pt;
        pt.lambda = lambda;
        const PotentialSpec spec = base.with_scale(base.scale() * lambda);
        pt.tc = tc_bisect(spec, mu, inner);
        if (mu > 0.0) pt.thm27 = tc_upper_bound_thm27(spec, mu);
        return pt;
    };
    SweepResult out;
    if (options.parallel) {
        std::vector<std::future<SweepPoint>> jobs;
        for (double l : lambdas) jobs.push_back(std::async(std::launch::async, run, l));
        for (auto& j : jobs) out.points.push_back(j.get());
    } else {
        for (double l : lambdas) out.points.push_back(run(l));
    }
    out.fit = fit_exponential(out.points);
    return out;
}

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0;
};

// k_{e,mu}(p) = 1/(|p^2 - mu| + e) - 1/(p^2 + mu + e).
inline double k_counterterm(double p, double e, double mu) {
    const double p2 = p * p;
    return 1.0 / (std::abs(p2 - mu) + e) - 1.0 / (p2 + mu + e);
}

// lhs: 4 pi int p^2 k_{e,mu}(p) dp by double-exponential quadrature split at
// sqrt(mu); rhs: (2 pi)^3 mu^{1/2} f(e / mu).
inline IdentityCheck counterterm_identity_check(double e, double mu) {
    if (!(e > 0.0) || !(mu > 0.0)) throw DomainError("counterterm_identity_check: e and mu must be positive");
    const double kf = std::sqrt(mu);
    auto integrand = [&](double p) { return p * p * k_counterterm(p, e, mu); };
    boost::math::quadrature::tanh_sinh<double> inner;
    boost::math::quadrature::exp_sinh<double> outer;
    const double tol = 1e-13;
    const double below = inner.integrate(integrand, 0.0, kf, tol);
    const double above = outer.integrate([&](double s) { return integrand(kf + s); }, 0.0,
                                         std::numeric_limits<double>::infinity(), tol);
    IdentityCheck out;
    out.lhs = 4.0 * std::numbers::pi * (below + above);
    const double two_pi = 2.0 * std::numbers::pi;
    out.rhs = two_pi * two_pi * two_pi * kf * f_counterterm(e / mu);
    out.defect = std::abs(out.lhs - out.rhs) / out.rhs;
    return out;
}

} // namespace bcslab
