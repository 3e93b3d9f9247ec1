#pragma once

// Linear pairing criterion: lowest eigenvalues of K_{beta,mu} + V per sector,
// the instability verdict, and Birman-Schwinger norms.

#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcslab/error.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/operator.hpp"

namespace bcslab {

namespace detail {

inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw NumericalError(std::string(what) + ": matrix has non-finite entries");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg.precision(6);
        msg << what << ": symmetric eigensolver did not converge (n = " << m.rows()
            << ", max |entry| = " << m.cwiseAbs().maxCoeff() << ", trace = " << m.trace() << ")";
        throw NumericalError(msg.str());
    }
    return solver.eigenvalues();  // ascending
}

} // namespace detail

inline double lowest_eigenvalue(const SectorOperator& op) {
    return detail::symmetric_eigenvalues(op.matrix, "lowest_eigenvalue")(0);
}

inline double top_eigenvalue(const SectorOperator& op) {
    const Eigen::VectorXd ev = detail::symmetric_eigenvalues(op.matrix, "top_eigenvalue");
    return ev(ev.size() - 1);
}

enum class Verdict { stable, unstable, indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::unstable: return "unstable";
    case Verdict::stable: return "stable";
    default: return "indeterminate";
    }
}

// Eigenvalues within this band of zero are not resolved by the grid.
inline double eigen_tolerance(const ThermoParams& params) {
    const double scale = std::abs(params.mu) + params.temperature();
    return 1e-9 * (scale > 0.0 ? scale : 1.0);
}

struct CriterionReport {
    std::vector<double> lowest;   // indexed by ell
    int minimizing_ell = 0;
    double minimum = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::indeterminate;
    bool unstable = false;
    std::optional<double> bs_norm;
    std::size_t grid_size = 0;
    double p_max = 0.0;
    int n_per_panel = 0;
    int grading_levels = 0;
};

inline CriterionReport instability_verdict(const Discretization& disc, const ThermoParams& params,
                                           bool parallel = false) {
    const int ell_max = disc.ell_max();
    CriterionReport report;
    report.lowest.assign(static_cast<std::size_t>(ell_max) + 1, 0.0);
    if (parallel && ell_max > 0) {
        std::vector<std::future<double>> jobs;
        for (int ell = 0; ell <= ell_max; ++ell)
            jobs.push_back(std::async(std::launch::async, [&, ell] {
                return lowest_eigenvalue(assemble_sector_operator(disc, ell, params));
            }));
        for (int ell = 0; ell <= ell_max; ++ell) report.lowest[static_cast<std::size_t>(ell)] = jobs[static_cast<std::size_t>(ell)].get();
    } else {
        for (int ell = 0; ell <= ell_max; ++ell)
            report.lowest[static_cast<std::size_t>(ell)] = lowest_eigenvalue(assemble_sector_operator(disc, ell, params));
    }
    report.minimum = std::numeric_limits<double>::infinity();
    for (int ell = 0; ell <= ell_max; ++ell) {
        if (report.lowest[static_cast<std::size_t>(ell)] < report.minimum) {
            report.minimum = report.lowest[static_cast<std::size_t>(ell)];
            report.minimizing_ell = ell;
        }
    }
    report.tolerance = eigen_tolerance(params);
    if (report.minimum < -report.tolerance) report.verdict = Verdict::unstable;
    else if (report.minimum > report.tolerance) report.verdict = Verdict::stable;
    else report.verdict = Verdict::indeterminate;
    report.unstable = report.verdict == Verdict::unstable;
    const RadialGrid& g = disc.grid();
    report.grid_size = g.size();
    report.p_max = g.p_max;
    report.n_per_panel = g.points_per_panel;
    report.grading_levels = g.grading_levels;
    return report;
}

inline CriterionReport instability_verdict(const PotentialSpec& spec, const ThermoParams& params, int ell_max,
                                           const GridOptions& grid = {}) {
    const Discretization disc(spec, build_grid(grid, params.mu), ell_max);
    return instability_verdict(disc, params);
}

// Norm of the Birman-Schwinger operator in one sector: its top eigenvalue,
// since the operator is positive semidefinite.
inline double bs_norm(const Discretization& disc, const ThermoParams& params, double e_shift, int ell = 0) {
    if (disc.sector(ell).negative_factor.cols() == 0) return 0.0;
    return top_eigenvalue(assemble_birman_schwinger(disc, ell, params, e_shift));
}

inline double bs_norm(const PotentialSpec& spec, const ThermoParams& params, double e_shift, int ell = 0,
                      const GridOptions& grid = {}) {
    const RadialGrid g = build_grid(grid, params.mu);
    const SectorData data = build_sector_data(g, spec, ell);
    if (data.negative_factor.cols() == 0) return 0.0;
    return top_eigenvalue(assemble_birman_schwinger(g, data, params, e_shift));
}

} // namespace bcslab
