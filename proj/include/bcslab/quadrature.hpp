#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <span>
#include <vector>

#include "bcslab/error.hpp"

namespace bcslab::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes and weights on [-1, 1], ascending. Newton iteration on
// P_n from the Tricomi initial guess; converges to machine precision for any n.
inline Rule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n must be positive");
    // P_n(x) and P_n'(x) by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        if (n == 1) p0 = 1.0;
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        // P_n'(0) from the recurrence for P_{n-1}(0)
        double p0 = 1.0;
        double p1 = 0.0;
        for (int k = 2; k <= n - 1; ++k) {
            const double pk = -(k - 1.0) * p0 / k;
            p0 = p1;
            p1 = pk;
        }
        const double pnm1 = (n == 1) ? 1.0 : p1;
        const double dp = n * pnm1;
        rule.nodes[n / 2] = 0.0;
        rule.weights[n / 2] = 2.0 / (dp * dp);
    }
    return rule;
}

// Composite Gauss-Legendre rule over consecutive panels given by `edges`.
inline Rule composite(std::span<const double> edges, int points_per_panel) {
    const Rule ref = gauss_legendre(points_per_panel);
    Rule rule;
    rule.nodes.reserve((edges.size() - 1) * ref.size());
    rule.weights.reserve((edges.size() - 1) * ref.size());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double a = edges[k];
        const double b = edges[k + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            rule.nodes.push_back(mid + half * ref.nodes[i]);
            rule.weights.push_back(half * ref.weights[i]);
        }
    }
    return rule;
}

namespace detail {

template <class F>
double gauss_panel(F& f, double a, double b, const Rule& ref) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) sum += ref.weights[i] * f(mid + half * ref.nodes[i]);
    return half * sum;
}

template <class F>
double adaptive_step(F& f, double a, double b, double whole, double abs_tol, double rel_tol,
                     int depth, const Rule& fine) {
    const double mid = 0.5 * (a + b);
    const double left_fine = gauss_panel(f, a, mid, fine);
    const double right_fine = gauss_panel(f, mid, b, fine);
    const double refined = left_fine + right_fine;
    if (std::abs(refined - whole) <= std::max(abs_tol, rel_tol * std::abs(refined)) || depth <= 0)
        return refined;
    return adaptive_step(f, a, mid, left_fine, 0.5 * abs_tol, rel_tol, depth - 1, fine) +
           adaptive_step(f, mid, b, right_fine, 0.5 * abs_tol, rel_tol, depth - 1, fine);
}

} // namespace detail

// Adaptive Gauss-Legendre integral of f over [a, b]: a 20-point panel is
// accepted when it agrees with the sum over its two halves, otherwise both
// halves are refined recursively.
template <class F>
double adaptive(F&& f, double a, double b, double abs_tol = 1e-14, double rel_tol = 1e-13,
                int max_depth = 40) {
    if (a == b) return 0.0;
    static const Rule fine = gauss_legendre(20);
    const double whole = detail::gauss_panel(f, a, b, fine);
    return detail::adaptive_step(f, a, b, whole, abs_tol, rel_tol, max_depth, fine);
}

// Sum of adaptive integrals over consecutive break points.
template <class F>
double adaptive_panels(F&& f, std::span<const double> breaks, double abs_tol = 1e-14,
                       double rel_tol = 1e-13) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        sum += adaptive(f, breaks[k], breaks[k + 1], abs_tol, rel_tol);
    }
    return sum;
}

} // namespace bcslab::quad
