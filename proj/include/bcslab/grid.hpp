#pragma once

// Radial momentum grids: composite Gauss-Legendre on [0, p_max] with panels
// halving toward the Fermi momentum sqrt(mu) from both sides.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bcslab/error.hpp"
#include "bcslab/quadrature.hpp"

namespace bcslab {

struct RadialGrid {
    std::vector<double> nodes;
    std::vector<double> weights;      // dp weights: int_0^{p_max} h(p) p^2 dp ~ sum w_i p_i^2 h(p_i)
    std::vector<double> panel_edges;
    int points_per_panel = 0;
    int grading_levels = 0;
    double p_max = 0.0;
    double mu = 0.0;

    std::size_t size() const { return nodes.size(); }

    // s_i = p_i sqrt(w_i), the symmetrized-basis scale.
    std::vector<double> basis_scale() const {
        std::vector<double> s(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) s[i] = nodes[i] * std::sqrt(weights[i]);
        return s;
    }

    // Width of the narrowest panel adjacent to sqrt(mu), or 0 when mu <= 0.
    double fermi_panel_width() const {
        if (mu <= 0.0) return 0.0;
        const double kf = std::sqrt(mu);
        double width = p_max;
        for (std::size_t k = 0; k + 1 < panel_edges.size(); ++k) {
            if (panel_edges[k] <= kf && kf <= panel_edges[k + 1])
                width = std::min(width, panel_edges[k + 1] - panel_edges[k]);
        }
        return width;
    }
};

struct GridOptions {
    int n_per_panel = 16;
    std::optional<double> p_max;      // default 8 max(sqrt(mu), 1)
    int grading_levels = 6;
    int base_panels = 5;
};

inline double default_p_max(double mu) { return 8.0 * std::max(std::sqrt(std::max(mu, 0.0)), 1.0); }

inline RadialGrid build_grid(int n_per_panel, double p_max, double mu, int grading_levels, int base_panels = 5) {
    if (n_per_panel < 4) throw ConfigError("build_grid: n_per_panel must be at least 4");
    if (grading_levels < 0) throw ConfigError("build_grid: grading_levels must be non-negative");
    if (base_panels < 1) throw ConfigError("build_grid: base_panels must be positive");
    if (!(p_max > 0.0) || !std::isfinite(p_max)) throw ConfigError("build_grid: p_max must be positive");
    if (mu > 0.0 && !(p_max * p_max > mu))
        throw ConfigError("build_grid: p_max = " + std::to_string(p_max) +
                          " does not exceed the Fermi momentum sqrt(mu) = " + std::to_string(std::sqrt(mu)));

    std::vector<double> edges{0.0};
    if (mu <= 0.0) {
        const int panels = base_panels + 2 * (grading_levels + 1);
        for (int k = 1; k <= panels; ++k) edges.push_back(k == panels ? p_max : p_max * k / panels);
    } else {
        const double kf = std::sqrt(mu);
        const double w0 = std::min({p_max / base_panels, kf, p_max - kf});
        auto fill_uniform = [&](double a, double b) {
            const int pieces = static_cast<int>(std::ceil((b - a) / w0 - 1e-12));
            for (int k = 1; k <= pieces; ++k) edges.push_back(k == pieces ? b : a + (b - a) * k / pieces);
        };
        if (kf - w0 > 0.0) fill_uniform(0.0, kf - w0);
        for (int k = 0; k <= grading_levels; ++k) {
            const double e = kf - w0 * std::ldexp(1.0, -k);
            if (e > edges.back()) edges.push_back(e);
        }
        edges.push_back(kf);
        for (int k = grading_levels; k >= 0; --k) edges.push_back(kf + w0 * std::ldexp(1.0, -k));
        if (p_max > edges.back()) fill_uniform(edges.back(), p_max);
    }

    const quad::Rule rule = quad::composite(edges, n_per_panel);
    RadialGrid grid;
    grid.nodes = rule.nodes;
    grid.weights = rule.weights;
    grid.panel_edges = std::move(edges);
    grid.points_per_panel = n_per_panel;
    grid.grading_levels = grading_levels;
    grid.p_max = p_max;
    grid.mu = mu;
    return grid;
}

inline RadialGrid build_grid(const GridOptions& options, double mu) {
    return build_grid(options.n_per_panel, options.p_max.value_or(default_p_max(mu)), mu, options.grading_levels,
                      options.base_panels);
}

} // namespace bcslab
