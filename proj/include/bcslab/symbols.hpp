#pragma once

// Scalar functions of the BCS model: the pair-fluctuation symbol K, the ratio
// g and its infimum a, the counterterm integral f and its inverse, the
// Fermi-Dirac occupation, the quasi-particle dispersion, and the logit mean.
//
// Units: hbar = 2m = 1, so kinetic energy is p^2 and momentum-squared and
// energy share a unit.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "bcslab/error.hpp"
#include "bcslab/quadrature.hpp"

namespace bcslab {

// Inverse temperature beta = 1/T. Zero temperature is a distinguished value,
// never a large finite beta.
class InverseTemperature {
public:
    static InverseTemperature zero_temperature() { return InverseTemperature{}; }
    static InverseTemperature from_beta(double beta) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw DomainError("inverse temperature must be positive and finite");
        return InverseTemperature{beta};
    }
    static InverseTemperature from_temperature(double temperature) {
        if (temperature == 0.0) return zero_temperature();
        if (!(temperature > 0.0) || !std::isfinite(temperature))
            throw DomainError("temperature must be non-negative and finite");
        return InverseTemperature{1.0 / temperature};
    }

    bool is_zero_temperature() const { return !beta_.has_value(); }
    // Only valid at positive temperature.
    double beta() const {
        if (!beta_) throw DomainError("beta requested at zero temperature");
        return *beta_;
    }
    double temperature() const { return beta_ ? 1.0 / *beta_ : 0.0; }

private:
    InverseTemperature() = default;
    explicit InverseTemperature(double beta) : beta_(beta) {}
    std::optional<double> beta_;
};

struct ThermoParams {
    InverseTemperature beta = InverseTemperature::zero_temperature();
    double mu = 0.0;

    static ThermoParams at_temperature(double temperature, double mu) {
        if (!std::isfinite(mu)) throw DomainError("chemical potential must be finite");
        return {InverseTemperature::from_temperature(temperature), mu};
    }
    static ThermoParams zero_temperature(double mu) { return at_temperature(0.0, mu); }

    bool is_zero_temperature() const { return beta.is_zero_temperature(); }
    double temperature() const { return beta.temperature(); }
};

namespace detail {

// u coth(u), with the even Taylor series below |u| < 5e-5.
inline double u_coth_u(double u) {
    if (std::abs(u) < 5e-5) {
        const double u2 = u * u;
        return 1.0 + u2 * (1.0 / 3.0 + u2 * (-1.0 / 45.0 + u2 * (2.0 / 945.0)));
    }
    return u / std::tanh(u);
}

} // namespace detail

// K_{beta,mu}(p) = (p^2 - mu) coth(beta (p^2 - mu) / 2); |p^2 - mu| at T = 0.
inline double k_symbol(double p2, const ThermoParams& params) {
    const double x = p2 - params.mu;
    if (params.is_zero_temperature()) return std::abs(x);
    const double beta = params.beta.beta();
    // x coth(beta x / 2) = (2 / beta) u coth u with u = beta x / 2
    return (2.0 / beta) * detail::u_coth_u(0.5 * beta * x);
}

// g(t) = t (e^t + 1) / ((t + 2)(e^t - 1)), with g(0) = 1.
inline double g_ratio(double t) {
    if (t < 0.0) throw DomainError("g_ratio: t must be non-negative");
    return 2.0 * detail::u_coth_u(0.5 * t) / (t + 2.0);
}

namespace detail {

inline double golden_section_min(double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g_ratio(c);
    double gd = g_ratio(d);
    while (b - a > 1e-10 * (1.0 + std::abs(a))) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g_ratio(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g_ratio(d);
        }
    }
    return g_ratio(0.5 * (a + b));
}

inline double compute_a_constant() {
    constexpr double lo = 1e-6;
    constexpr double hi = 60.0;
    // g tends to 1 at both ends; the interior minimum is well inside [lo, hi].
    if (std::abs(g_ratio(lo) - 1.0) > 1e-6 || std::abs(g_ratio(hi) - 1.0) > 0.05)
        throw NumericalError("a_constant: g does not approach 1 at the bracket ends");
    return golden_section_min(lo, hi);
}

} // namespace detail

// a = inf_{t > 0} g(t), about 0.654. Computed once and cached.
inline double a_constant() {
    static const double a = detail::compute_a_constant();
    return a;
}

// (1/3)(2/pi)^{4/3}: Hardy-Littlewood-Sobolev constant multiplying ||V||_{3/2}
// in the Birman-Schwinger norm bound.
inline double hls_constant() {
    // (1/3)(2/pi)^{4/3}
    return std::pow(2.0 / std::numbers::pi, 4.0 / 3.0) / 3.0;
}

namespace detail {

// Integrand of 2 pi^2 f(t) on either side of p = 1, in the distance s = |p - 1|.
// |p^2 - 1| = s (2 -+ s) is evaluated without cancellation.
inline double counterterm_inner(double s, double t) {
    const double p = 1.0 - s;
    const double p2 = p * p;
    return p2 * (1.0 / (s * (2.0 - s) + t) - 1.0 / (p2 + 1.0 + t));
}

inline double counterterm_outer(double s, double t) {
    const double p = 1.0 + s;
    const double p2 = p * p;
    // 1/(p^2-1+t) - 1/(p^2+1+t) = 2 / ((p^2-1+t)(p^2+1+t))
    const double a = s * (2.0 + s) + t;
    return 2.0 * p2 / (a * (p2 + 1.0 + t));
}

// Break points in s on [0, s_max], dyadic toward s = 0 down to a scale well
// below t so the 1/(2s + t) peak is resolved.
inline std::vector<double> dyadic_breaks(double s_max, double t) {
    std::vector<double> breaks{0.0};
    const double floor_scale = std::max(1e-3 * std::min(t, 1.0), 1e-300);
    std::vector<double> inner;
    for (double h = s_max; h > floor_scale; h *= 0.5) inner.push_back(h);
    inner.push_back(floor_scale);
    for (auto it = inner.rbegin(); it != inner.rend(); ++it) {
        if (*it > breaks.back() && *it <= s_max) breaks.push_back(*it);
    }
    if (breaks.back() < s_max) breaks.push_back(s_max);
    return breaks;
}

} // namespace detail

// f(t) = (1 / 2 pi^2) int_0^inf p^2 [1/(|p^2-1|+t) - 1/(p^2+1+t)] dp.
// Composite adaptive quadrature with a break at p = 1 and an analytic tail
// beyond p = 100.
inline double f_counterterm(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("f_counterterm: t must be positive");
    constexpr double p_tail = 100.0;

    const auto inner_breaks = detail::dyadic_breaks(1.0, t);
    const auto outer_breaks = detail::dyadic_breaks(p_tail - 1.0, t);
    const double inner = quad::adaptive_panels(
        [t](double s) { return detail::counterterm_inner(s, t); }, inner_breaks);
    const double outer = quad::adaptive_panels(
        [t](double s) { return detail::counterterm_outer(s, t); }, outer_breaks);

    // Tail: 2p^2/((p^2+a)(p^2+b)) = b/(p^2+b) - a/(p^2+a), a = t-1, b = t+1.
    const double a = t - 1.0;
    const double b = t + 1.0;
    auto tail_piece = [p_tail](double c) {
        // int_P^inf c / (p^2 + c) dp
        if (c > 0.0) return std::sqrt(c) * std::atan(std::sqrt(c) / p_tail);
        if (c < 0.0) return -std::sqrt(-c) * std::atanh(std::sqrt(-c) / p_tail);
        return 0.0;
    };
    const double tail = tail_piece(b) - tail_piece(a);

    return (inner + outer + tail) / (2.0 * std::numbers::pi * std::numbers::pi);
}

// Unique t with f(t) = y, by bisection in log t. The initial bracket
// [1e-12, 1e6] is widened geometrically when y falls outside it.
inline double f_counterterm_inverse(double y) {
    if (!(y > 0.0) || !std::isfinite(y))
        throw DomainError("f_counterterm_inverse: y must be positive");
    double lo = 1e-12;
    double hi = 1e6;
    double f_lo = f_counterterm(lo);
    double f_hi = f_counterterm(hi);
    while (f_lo < y && lo > 1e-290) {
        lo *= 1e-6;
        f_lo = f_counterterm(lo);
    }
    while (f_hi > y && hi < 1e290) {
        hi *= 1e6;
        f_hi = f_counterterm(hi);
    }
    if (!(f_lo >= y && f_hi <= y)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "f_counterterm_inverse: y = " << y << " outside achievable range [" << f_hi
            << ", " << f_lo << "] on bracket [" << lo << ", " << hi << "]";
        throw RangeError(msg.str());
    }
    double log_lo = std::log(lo);
    double log_hi = std::log(hi);
    for (int iter = 0; iter < 200 && log_hi - log_lo > 1e-15 * (1.0 + std::abs(log_lo)); ++iter) {
        const double mid = 0.5 * (log_lo + log_hi);
        if (f_counterterm(std::exp(mid)) >= y) {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }
    return std::exp(0.5 * (log_lo + log_hi));
}

// Fermi-Dirac occupation 1 / (e^{beta (p^2 - mu)} + 1); a step at T = 0 with
// value 1/2 on the Fermi surface.
inline double gamma0(double p2, const ThermoParams& params) {
    const double x = p2 - params.mu;
    if (params.is_zero_temperature()) {
        if (x < 0.0) return 1.0;
        if (x > 0.0) return 0.0;
        return 0.5;
    }
    const double bx = params.beta.beta() * x;
    if (bx > 0.0) {
        const double e = std::exp(-bx);
        return e / (1.0 + e);
    }
    return 1.0 / (std::exp(bx) + 1.0);
}

// E(p) = sqrt((p^2 - mu)^2 + |Delta|^2).
inline double dispersion(double p2, double delta, double mu) {
    return std::hypot(p2 - mu, delta);
}

// (1/x) ln((1 + x)/(1 - x)) on [0, 1), equal to 2 at x = 0.
inline double f_logit(double x) {
    if (!(x >= 0.0) || x >= 1.0) throw DomainError("f_logit: argument must lie in [0, 1)");
    if (x < 1e-4) {
        const double x2 = x * x;
        return 2.0 * (1.0 + x2 * (1.0 / 3.0 + x2 * (1.0 / 5.0 + x2 / 7.0)));
    }
    return 2.0 * std::atanh(x) / x;
}

} // namespace bcslab
