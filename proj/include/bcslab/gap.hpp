#pragma once

// Nonlinear side: damped fixed-point solution of the s-wave gap equation
//   Delta = -V^ * (Delta / E) tanh(beta E / 2),   E = sqrt((p^2 - mu)^2 + Delta^2),
// reconstruction of (gamma, alpha^), the free-energy functional with its
// entropy, stationarity residuals, and the energy gap Xi = inf E.

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcslab/criterion.hpp"
#include "bcslab/error.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/operator.hpp"
#include "bcslab/symbols.hpp"

namespace bcslab {

enum class SeedMode { constant, linear_mode };

inline const char* to_string(SeedMode m) { return m == SeedMode::constant ? "constant" : "linear-mode"; }

struct GapOptions {
    SeedMode seed = SeedMode::linear_mode;
    double damping = 0.5;
    double tol = 1e-10;
    int max_iter = 20000;
};

class GapNonConvergence : public NumericalError {
public:
    GapNonConvergence(const std::string& what, std::vector<double> history)
        : NumericalError(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

struct ReconstructedState {
    std::vector<double> energy;  // E_i
    std::vector<double> gamma;
    std::vector<double> alpha;
};

struct GapState {
    RadialGrid grid;
    ThermoParams params;
    std::vector<double> delta;
    std::vector<double> energy;
    std::vector<double> gamma;
    std::vector<double> alpha;
    double xi = 0.0;
    double free_energy = 0.0;
    double free_energy_normal = 0.0;
    double residual_sup = 0.0;  // sup |Delta - G(Delta)| / sup |Delta|, or 0 when trivial
    int iterations = 0;
    bool converged_to_trivial = false;
    double final_damping = 0.0;
    SeedMode seed = SeedMode::linear_mode;
};

// Energy unit for tolerances: |mu|, or 1 when mu = 0.
inline double energy_scale(double mu) { return mu != 0.0 ? std::abs(mu) : 1.0; }

inline ReconstructedState reconstruct_state(const RadialGrid& grid, const std::vector<double>& delta,
                                            const ThermoParams& params) {
    if (delta.size() != grid.size()) throw DomainError("reconstruct_state: Delta has the wrong length");
    ReconstructedState st;
    const std::size_t n = grid.size();
    st.energy.resize(n);
    st.gamma.resize(n);
    st.alpha.resize(n);
    const bool zero_t = params.is_zero_temperature();
    for (std::size_t i = 0; i < n; ++i) {
        const double p2 = grid.nodes[i] * grid.nodes[i];
        const double x = p2 - params.mu;
        const double d = delta[i];
        if (!std::isfinite(d)) throw DomainError("reconstruct_state: non-finite Delta");
        const double e = dispersion(p2, d, params.mu);
        st.energy[i] = e;
        if (d == 0.0) {
            st.gamma[i] = gamma0(p2, params);
            st.alpha[i] = 0.0;
            continue;
        }
        // t = tanh(beta E / 2); one_minus_t = 2 / (e^{beta E} + 1)
        double t = 1.0;
        double one_minus_t = 0.0;
        if (!zero_t) {
            const double be = params.beta.beta() * e;
            if (be < 1.0) {
                t = std::tanh(0.5 * be);
                one_minus_t = 1.0 - t;
            } else {
                const double em = std::exp(-be);
                one_minus_t = 2.0 * em / (1.0 + em);
                t = 1.0 - one_minus_t;
            }
        }
        st.alpha[i] = d * t / (2.0 * e);
        if (x > 0.0) {
            // 1 - (x/E) t = (Delta^2 / (E + x) + x (1 - t)) / E
            st.gamma[i] = 0.5 * (d * d / (e + x) + x * one_minus_t) / e;
        } else {
            st.gamma[i] = 0.5 * (1.0 - x / e * t);
        }
    }
    return st;
}

namespace detail {

// (V^ * h)(p_i) for radial h given on the grid, from the symmetrized kernel.
inline Eigen::VectorXd convolve(const Eigen::MatrixXd& kernel_sym, const std::vector<double>& scale,
                                const std::vector<double>& h) {
    const auto n = static_cast<Eigen::Index>(h.size());
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = scale[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)];
    Eigen::VectorXd out = kernel_sym * c;
    for (Eigen::Index i = 0; i < n; ++i) out(i) /= scale[static_cast<std::size_t>(i)];
    return out;
}

// s ln s + (1 - s) ln(1 - s) with s (1 - s) = q, written through q to keep
// precision when q is tiny.
inline double entropy_summand(double q) {
    if (q <= 0.0) return 0.0;
    const double s = 0.5 + std::sqrt(std::max(0.0, 0.25 - q));
    const double r = q / s;  // 1 - s
    return s * std::log1p(-r) + r * std::log(r);
}

} // namespace detail

// Discrete entropy S = -4 pi sum w p^2 [s ln s + (1-s) ln(1-s)].
inline double entropy(const RadialGrid& grid, const std::vector<double>& gamma, const std::vector<double>& alpha) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double q = gamma[i] * (1.0 - gamma[i]) - alpha[i] * alpha[i];
        sum += grid.weights[i] * grid.nodes[i] * grid.nodes[i] * detail::entropy_summand(q);
    }
    return -4.0 * std::numbers::pi * sum;
}

// F = 4 pi sum w p^2 (p^2 - mu) gamma + 4 pi sum_ij alpha_i W_ij alpha_j p_i^2 w_i p_j^2 w_j - T S.
inline double free_energy(const RadialGrid& grid, const Eigen::MatrixXd& kernel_sym, const std::vector<double>& gamma,
                          const std::vector<double>& alpha, const ThermoParams& params) {
    const std::size_t n = grid.size();
    if (gamma.size() != n || alpha.size() != n) throw DomainError("free_energy: state has the wrong length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(gamma[i] >= -1e-10 && gamma[i] <= 1.0 + 1e-10))
            throw DomainError("free_energy: gamma outside [0, 1] at node " + std::to_string(i));
        if (alpha[i] * alpha[i] > gamma[i] * (1.0 - gamma[i]) + 1e-10)
            throw DomainError("free_energy: |alpha|^2 exceeds gamma (1 - gamma) at node " + std::to_string(i));
    }
    const std::vector<double> s = grid.basis_scale();
    double kinetic = 0.0;
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double p2 = grid.nodes[i] * grid.nodes[i];
        kinetic += grid.weights[i] * p2 * (p2 - params.mu) * gamma[i];
        c(static_cast<Eigen::Index>(i)) = s[i] * alpha[i];
    }
    const double interaction = c.dot(kernel_sym * c);
    double f = 4.0 * std::numbers::pi * (kinetic + interaction);
    if (!params.is_zero_temperature()) f -= params.temperature() * entropy(grid, gamma, alpha);
    return f;
}

inline double free_energy(const Discretization& disc, const std::vector<double>& gamma,
                          const std::vector<double>& alpha, const ThermoParams& params) {
    return free_energy(disc.grid(), disc.sector(0).kernel, gamma, alpha, params);
}

// F at the normal state (gamma_0, 0).
inline double free_energy_normal(const Discretization& disc, const ThermoParams& params) {
    const RadialGrid& g = disc.grid();
    std::vector<double> gamma(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gamma[i] = gamma0(g.nodes[i] * g.nodes[i], params);
    return free_energy(disc, gamma, std::vector<double>(g.size(), 0.0), params);
}

// Xi = inf_p E(p): minimum over nodes refined by a parabola in p through E^2
// at the minimizer and its neighbours. Exact for trivial states.
inline double energy_gap(const RadialGrid& grid, const std::vector<double>& delta, double mu) {
    bool trivial = std::all_of(delta.begin(), delta.end(), [](double d) { return d == 0.0; });
    if (trivial) return mu > 0.0 ? 0.0 : -mu;
    const std::size_t n = grid.size();
    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.nodes[i] * grid.nodes[i] - mu;
        e2[i] = x * x + delta[i] * delta[i];
    }
    const std::size_t k = static_cast<std::size_t>(std::min_element(e2.begin(), e2.end()) - e2.begin());
    double best = e2[k];
    if (k > 0 && k + 1 < n) {
        const double x0 = grid.nodes[k - 1], x1 = grid.nodes[k], x2 = grid.nodes[k + 1];
        const double y0 = e2[k - 1], y1 = e2[k], y2 = e2[k + 1];
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        if (a > 0.0) {
            const double b = d01 - a * (x0 + x1);
            const double xv = -b / (2.0 * a);
            if (xv > x0 && xv < x2) {
                const double yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
                best = std::max(0.0, std::min(best, yv));
            }
        }
    }
    return std::sqrt(best);
}

inline double energy_gap(const GapState& state) { return energy_gap(state.grid, state.delta, state.params.mu); }

namespace detail {

// G(Delta) = -V^ * ((Delta / E) tanh(beta E / 2)) on the grid.
inline std::vector<double> gap_map(const Eigen::MatrixXd& kernel_sym, const RadialGrid& grid,
                                   const std::vector<double>& scale, const std::vector<double>& delta,
                                   const ThermoParams& params) {
    const std::size_t n = grid.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p2 = grid.nodes[i] * grid.nodes[i];
        const double e = dispersion(p2, delta[i], params.mu);
        if (delta[i] == 0.0) {
            u[i] = 0.0;
            continue;
        }
        const double t = params.is_zero_temperature() ? 1.0 : std::tanh(0.5 * params.beta.beta() * e);
        u[i] = delta[i] / e * t;
    }
    const Eigen::VectorXd conv = convolve(kernel_sym, scale, u);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = -conv(static_cast<Eigen::Index>(i));
    return g;
}

inline double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline std::size_t fermi_index(const RadialGrid& grid, double mu) {
    if (mu <= 0.0) return 0;
    const double kf = std::sqrt(mu);
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid.nodes[i] - kf) < std::abs(grid.nodes[best] - kf)) best = i;
    return best;
}

inline std::vector<double> seed_delta(const Discretization& disc, const ThermoParams& params, SeedMode mode) {
    const RadialGrid& grid = disc.grid();
    const double peak = 0.1 * energy_scale(params.mu);
    if (mode == SeedMode::constant) return std::vector<double>(grid.size(), peak);
    const SectorOperator op = assemble_sector_operator(disc, 0, params);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix);
    if (solver.info() != Eigen::Success) throw NumericalError("solve_gap: eigensolve for the linear-mode seed failed");
    const Eigen::VectorXd v = solver.eigenvectors().col(0);
    const std::vector<double> s = grid.basis_scale();
    std::vector<double> h(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) h[i] = v(static_cast<Eigen::Index>(i)) / s[i];
    // Delta ~ -V^ * h, smooth across the Fermi surface
    const Eigen::VectorXd conv = convolve(disc.sector(0).kernel, s, h);
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) d[i] = -conv(static_cast<Eigen::Index>(i));
    const double m = sup_abs(d);
    if (!(m > 0.0)) return std::vector<double>(grid.size(), peak);
    const double sign = d[fermi_index(grid, params.mu)] < 0.0 ? -1.0 : 1.0;
    for (double& x : d) x *= sign * peak / m;
    return d;
}

} // namespace detail

// Damped iteration Delta <- (1 - theta) Delta + theta G(Delta). theta halves
// (at most four times) when the residual grows while the update reverses
// direction, the signature of oscillation. Converged when
// sup|Delta - G| <= tol sup|Delta|; trivial when sup|Delta| < 1e-12 |mu|.
inline GapState solve_gap(const Discretization& disc, const ThermoParams& params, const GapOptions& options = {}) {
    if (!(options.damping > 0.0 && options.damping <= 1.0)) throw DomainError("solve_gap: damping must lie in (0, 1]");
    if (!(options.tol > 0.0)) throw DomainError("solve_gap: tol must be positive");
    if (options.max_iter < 1) throw DomainError("solve_gap: max_iter must be positive");
    const RadialGrid& grid = disc.grid();
    const Eigen::MatrixXd& kernel = disc.sector(0).kernel;
    const std::vector<double> scale = grid.basis_scale();
    const double unit = energy_scale(params.mu);
    const double trivial_threshold = 1e-12 * unit;
    const std::size_t n = grid.size();

    std::vector<double> delta = detail::seed_delta(disc, params, options.seed);
    double theta = options.damping;
    int halvings = 0;
    double prev_residual = std::numeric_limits<double>::infinity();
    std::vector<double> prev_update(n, 0.0);
    std::vector<double> history;
    GapState state;
    state.grid = grid;
    state.params = params;
    state.seed = options.seed;
    bool done = false;
    int iter = 0;
    double rel_residual = 0.0;
    for (; iter < options.max_iter; ++iter) {
        const double size = detail::sup_abs(delta);
        if (size < trivial_threshold) {
            std::fill(delta.begin(), delta.end(), 0.0);
            state.converged_to_trivial = true;
            rel_residual = 0.0;
            done = true;
            break;
        }
        const std::vector<double> g = detail::gap_map(kernel, grid, scale, delta, params);
        double residual = 0.0;
        double turn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = g[i] - delta[i];
            residual = std::max(residual, std::abs(f));
            turn += f * prev_update[i];
            prev_update[i] = f;
        }
        rel_residual = residual / size;
        if (history.size() < 100000) history.push_back(rel_residual);
        if (rel_residual <= options.tol) {
            done = true;
            break;
        }
        if (residual > prev_residual && turn < 0.0 && halvings < 4) {
            theta *= 0.5;
            ++halvings;
        }
        prev_residual = residual;
        for (std::size_t i = 0; i < n; ++i) delta[i] += theta * (g[i] - delta[i]);
    }
    if (!done) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "solve_gap: no convergence after " << options.max_iter << " iterations (relative residual "
            << rel_residual << ", sup|Delta| = " << detail::sup_abs(delta) << ", tol " << options.tol << ")";
        throw GapNonConvergence(msg.str(), std::move(history));
    }
    if (!state.converged_to_trivial && delta[detail::fermi_index(grid, params.mu)] < 0.0)
        for (double& v : delta) v = -v;

    const ReconstructedState rec = reconstruct_state(grid, delta, params);
    state.delta = std::move(delta);
    state.energy = rec.energy;
    state.gamma = rec.gamma;
    state.alpha = rec.alpha;
    state.iterations = iter;
    state.residual_sup = rel_residual;
    state.final_damping = theta;
    state.xi = energy_gap(grid, state.delta, params.mu);
    state.free_energy = free_energy(grid, kernel, state.gamma, state.alpha, params);
    state.free_energy_normal = free_energy_normal(disc, params);
    return state;
}

inline GapState solve_gap(const PotentialSpec& spec, const ThermoParams& params, const GapOptions& options = {},
                          const GridOptions& grid = {}) {
    const Discretization disc(spec, build_grid(grid, params.mu), 0);
    return solve_gap(disc, params, options);
}

struct StationarityResiduals {
    double r_alpha = 0.0;
    double r_gamma = 0.0;
    std::size_t nodes_used = 0;
};

// Defects of the first-order conditions
//   (V^ * alpha^)(p) = (p^2 - mu) alpha^ / (2 gamma - 1),
//   (p^2 - mu) / (2 gamma - 1) + E coth(beta E / 2) = 0   (E at T = 0),
// over nodes with |2 gamma - 1| > 1e-6, normalized by the energy scale.
inline StationarityResiduals stationarity_residuals(const Discretization& disc, const GapState& state) {
    const RadialGrid& grid = disc.grid();
    const ThermoParams& params = state.params;
    const std::vector<double> scale = grid.basis_scale();
    const Eigen::VectorXd conv = detail::convolve(disc.sector(0).kernel, scale, state.alpha);
    StationarityResiduals res;
    const double unit = energy_scale(params.mu);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = 2.0 * state.gamma[i] - 1.0;
        if (std::abs(a) <= 1e-6) continue;
        ++res.nodes_used;
        const double x = grid.nodes[i] * grid.nodes[i] - params.mu;
        const double ra = conv(static_cast<Eigen::Index>(i)) - x * state.alpha[i] / a;
        const double e = state.energy[i];
        double ecoth = e;
        if (!params.is_zero_temperature()) ecoth = (2.0 / params.beta.beta()) * detail::u_coth_u(0.5 * params.beta.beta() * e);
        const double rg = x / a + ecoth;
        res.r_alpha = std::max(res.r_alpha, std::abs(ra));
        res.r_gamma = std::max(res.r_gamma, std::abs(rg));
    }
    res.r_alpha /= unit;
    res.r_gamma /= unit;
    return res;
}

} // namespace bcslab
