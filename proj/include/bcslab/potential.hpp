#pragma once

// Radial pair potentials V(|x|): model catalog, Fourier transforms in the
// unitary convention V^(p) = (2 pi)^{-3/2} int V(x) e^{-ipx} dx, the split
// V = V_+ - V_-, Lebesgue norms, and a loader for tabulated samples.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "bcslab/error.hpp"
#include "bcslab/quadrature.hpp"

namespace bcslab {

// V(r) = -depth exp(-r^2 / (2 width^2)); depth < 0 is repulsive.
struct GaussianModel {
    double depth = 1.0;
    double width = 1.0;
};

// V(r) = -depth for r < radius, zero beyond.
struct SquareWellModel {
    double depth = 1.0;
    double radius = 1.0;
};

// V(r) = -depth1 exp(-r^2/(2 width1^2)) - depth2 exp(-r^2/(2 width2^2)).
// Depths are signed, so a repulsive core on an attractive well is
// depth1 > 0 with depth2 < 0 and width2 < width1.
struct TwoGaussianModel {
    double depth1 = 1.0;
    double width1 = 1.0;
    double depth2 = 0.0;
    double width2 = 1.0;
};

// Samples (r_i, V_i) joined by a monotone piecewise-cubic (Fritsch-Carlson)
// interpolant. Constant below the first sample, zero beyond the last.
struct TabulatedModel {
    std::vector<double> r;
    std::vector<double> v;
};

using PotentialModel = std::variant<GaussianModel, SquareWellModel, TwoGaussianModel, TabulatedModel>;

enum class PotentialPart { full, positive, negative };

namespace detail {

// Relative size below which a gaussian tail is treated as zero.
inline constexpr double gaussian_tail_cutoff = 1e-18;

inline double gaussian_support(double width) {
    return width * std::sqrt(-2.0 * std::log(gaussian_tail_cutoff));
}

// (sin x - x cos x) / x^3
inline double square_well_shape(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return 1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45360.0));
    }
    return (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// Hermite slopes for monotone cubic interpolation.
inline std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> h(n - 1);
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = delta[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) {
            d[k] = 0.0;
        } else {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    // one-sided three-point end slopes, limited to preserve shape
    auto end_slope = [](double h0, double h1, double del0, double del1) {
        double s = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (s * del0 <= 0.0) {
            s = 0.0;
        } else if (del0 * del1 <= 0.0 && std::abs(s) > std::abs(3.0 * del0)) {
            s = 3.0 * del0;
        }
        return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
}

inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * d1;
}

} // namespace detail

class PotentialSpec {
public:
    explicit PotentialSpec(PotentialModel model, double scale = 1.0)
        : model_(std::move(model)), scale_(scale) {
        validate();
        if (auto* tab = std::get_if<TabulatedModel>(&model_)) slopes_ = detail::pchip_slopes(tab->r, tab->v);
        breakpoints_ = compute_breakpoints();
    }

    const PotentialModel& model() const { return model_; }
    double scale() const { return scale_; }

    // Same model with the coupling multiplier replaced.
    PotentialSpec with_scale(double scale) const { return PotentialSpec(model_, scale); }

    std::string model_name() const {
        return std::visit(
            [](const auto& m) -> std::string {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) return "gaussian";
                else if constexpr (std::is_same_v<M, SquareWellModel>) return "square_well";
                else if constexpr (std::is_same_v<M, TwoGaussianModel>) return "two_gaussian";
                else return "tabulated";
            },
            model_);
    }

    double operator()(double r) const { return scale_ * unscaled(r); }

    double part(double r, PotentialPart which) const {
        const double v = (*this)(r);
        switch (which) {
        case PotentialPart::positive: return v > 0.0 ? v : 0.0;
        case PotentialPart::negative: return v < 0.0 ? -v : 0.0;
        default: return v;
        }
    }

    // Radius beyond which V vanishes or is below 1e-18 of its scale.
    double support_radius() const {
        return std::visit(
            [](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) return detail::gaussian_support(m.width);
                else if constexpr (std::is_same_v<M, SquareWellModel>) return m.radius;
                else if constexpr (std::is_same_v<M, TwoGaussianModel>)
                    return detail::gaussian_support(std::max(m.width1, m.width2));
                else return m.r.back();
            },
            model_);
    }

    // Shortest length over which V changes appreciably; bounds quadrature panels.
    double length_scale() const {
        return std::visit(
            [](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) return m.width;
                else if constexpr (std::is_same_v<M, SquareWellModel>) return m.radius;
                else if constexpr (std::is_same_v<M, TwoGaussianModel>) return std::min(m.width1, m.width2);
                else return m.r.back();
            },
            model_);
    }

    // Points in (0, support) where V, V_+ or V_- lose smoothness: the well
    // edge, sign changes, and table nodes.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    bool has_closed_form_fourier() const { return !std::holds_alternative<TabulatedModel>(model_); }

    // V^(p) from the closed form when one exists.
    std::optional<double> fourier_closed_form(double p) const {
        constexpr double sqrt_2_over_pi = std::numbers::sqrt2 * std::numbers::inv_sqrtpi;
        return std::visit(
            [&](const auto& m) -> std::optional<double> {
                using M = std::decay_t<decltype(m)>;
                auto gauss = [p](double depth, double width) {
                    return -depth * width * width * width * std::exp(-0.5 * width * width * p * p);
                };
                if constexpr (std::is_same_v<M, GaussianModel>) {
                    return scale_ * gauss(m.depth, m.width);
                } else if constexpr (std::is_same_v<M, SquareWellModel>) {
                    const double r3 = m.radius * m.radius * m.radius;
                    return -scale_ * m.depth * sqrt_2_over_pi * r3 * detail::square_well_shape(p * m.radius);
                } else if constexpr (std::is_same_v<M, TwoGaussianModel>) {
                    return scale_ * (gauss(m.depth1, m.width1) + gauss(m.depth2, m.width2));
                } else {
                    return std::nullopt;
                }
            },
            model_);
    }

    // sup V_- over r: analytic for the closed-form models, sample maximum for
    // tables (the monotone interpolant does not overshoot its data).
    double sup_negative_part() const {
        return std::visit(
            [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) {
                    return std::max(0.0, scale_ * m.depth);
                } else if constexpr (std::is_same_v<M, SquareWellModel>) {
                    return std::max(0.0, scale_ * m.depth);
                } else if constexpr (std::is_same_v<M, TwoGaussianModel>) {
                    return two_gaussian_sup_negative();
                } else {
                    double best = 0.0;
                    for (double v : m.v) best = std::max(best, -scale_ * v);
                    return best;
                }
            },
            model_);
    }

private:
    void validate() const {
        if (!std::isfinite(scale_)) throw DomainError("potential scale must be finite");
        std::visit(
            [](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) {
                    if (!(m.width > 0.0) || !std::isfinite(m.width) || !std::isfinite(m.depth))
                        throw DomainError("gaussian: width must be positive and depth finite");
                } else if constexpr (std::is_same_v<M, SquareWellModel>) {
                    if (!(m.radius > 0.0) || !std::isfinite(m.radius) || !std::isfinite(m.depth))
                        throw DomainError("square_well: radius must be positive and depth finite");
                } else if constexpr (std::is_same_v<M, TwoGaussianModel>) {
                    if (!(m.width1 > 0.0) || !(m.width2 > 0.0) || !std::isfinite(m.width1) ||
                        !std::isfinite(m.width2) || !std::isfinite(m.depth1) || !std::isfinite(m.depth2))
                        throw DomainError("two_gaussian: widths must be positive and depths finite");
                } else {
                    if (m.r.size() != m.v.size()) throw DomainError("tabulated: column lengths differ");
                    if (m.r.size() < 2) throw DomainError("tabulated: need at least two samples");
                    for (std::size_t i = 0; i < m.r.size(); ++i) {
                        if (!std::isfinite(m.r[i]) || !std::isfinite(m.v[i]))
                            throw DomainError("tabulated: non-finite value in row " + std::to_string(i + 1));
                        if (m.r[i] < 0.0)
                            throw DomainError("tabulated: negative radius in row " + std::to_string(i + 1));
                        if (i > 0 && !(m.r[i] > m.r[i - 1]))
                            throw DomainError("tabulated: radii not strictly increasing at row " +
                                              std::to_string(i + 1));
                    }
                }
            },
            model_);
    }

    double unscaled(double r) const {
        return std::visit(
            [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, GaussianModel>) {
                    return -m.depth * std::exp(-0.5 * r * r / (m.width * m.width));
                } else if constexpr (std::is_same_v<M, SquareWellModel>) {
                    return r < m.radius ? -m.depth : 0.0;
                } else if constexpr (std::is_same_v<M, TwoGaussianModel>) {
                    return -m.depth1 * std::exp(-0.5 * r * r / (m.width1 * m.width1)) -
                           m.depth2 * std::exp(-0.5 * r * r / (m.width2 * m.width2));
                } else {
                    if (r <= m.r.front()) return m.v.front();
                    if (r > m.r.back()) return 0.0;
                    const auto it = std::upper_bound(m.r.begin(), m.r.end(), r);
                    const std::size_t k = std::min<std::size_t>(it - m.r.begin(), m.r.size() - 1) - 1;
                    return detail::hermite(m.r[k], m.r[k + 1], m.v[k], m.v[k + 1], slopes_[k],
                                           slopes_[k + 1], r);
                }
            },
            model_);
    }

    double two_gaussian_sup_negative() const {
        // dense scan then golden refinement of -V
        const double r_max = support_radius();
        const int samples = 4000;
        double best_r = 0.0;
        double best = -(*this)(0.0);
        for (int i = 1; i <= samples; ++i) {
            const double r = r_max * i / samples;
            const double v = -(*this)(r);
            if (v > best) best = v, best_r = r;
        }
        double a = std::max(0.0, best_r - r_max / samples);
        double b = std::min(r_max, best_r + r_max / samples);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double c = b - inv_phi * (b - a);
            const double d = a + inv_phi * (b - a);
            if (-(*this)(c) > -(*this)(d)) b = d;
            else a = c;
        }
        return std::max({0.0, best, -(*this)(0.5 * (a + b))});
    }

    std::vector<double> compute_breakpoints() const {
        std::vector<double> pts;
        std::visit(
            [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, SquareWellModel>) {
                    pts.push_back(m.radius);
                } else if constexpr (std::is_same_v<M, TwoGaussianModel>) {
                    // -d1 g1 = d2 g2 has at most one root in r
                    if (m.depth1 * m.depth2 < 0.0 && m.width1 != m.width2) {
                        const double rhs = std::log(-m.depth2 / m.depth1);
                        const double coeff =
                            0.5 / (m.width2 * m.width2) - 0.5 / (m.width1 * m.width1);
                        const double r2 = rhs / coeff;
                        if (r2 > 0.0) pts.push_back(std::sqrt(r2));
                    }
                } else if constexpr (std::is_same_v<M, TabulatedModel>) {
                    for (std::size_t k = 0; k < m.r.size(); ++k) {
                        if (m.r[k] > 0.0) pts.push_back(m.r[k]);
                        if (k + 1 < m.r.size() && m.v[k] * m.v[k + 1] < 0.0) {
                            double a = m.r[k];
                            double b = m.r[k + 1];
                            const double fa = unscaled(a);
                            for (int iter = 0; iter < 200 && b - a > 1e-15 * b; ++iter) {
                                const double mid = 0.5 * (a + b);
                                if (unscaled(mid) * fa > 0.0) a = mid;
                                else b = mid;
                            }
                            pts.push_back(0.5 * (a + b));
                        }
                    }
                }
            },
            model_);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    PotentialModel model_;
    double scale_ = 1.0;
    std::vector<double> slopes_;
    std::vector<double> breakpoints_;
};

// V(r) for r >= 0.
inline double evaluate_position(const PotentialSpec& spec, double r) {
    if (!(r >= 0.0)) throw DomainError("evaluate_position: radius must be non-negative");
    return spec(r);
}

// Composite Gauss-Legendre rule in r over [0, support] for integrands of the
// form r^2 V(r) x (functions oscillating no faster than e^{i k_max r}).
// Panels break at the potential's breakpoints and are no wider than
// min(2 / k_max, length scale).
inline quad::Rule radial_rule(const PotentialSpec& spec, double k_max, int points_per_panel = 20) {
    const double support = spec.support_radius();
    std::vector<double> anchors{0.0};
    for (double b : spec.breakpoints()) {
        if (b > 0.0 && b < support) anchors.push_back(b);
    }
    anchors.push_back(support);
    const double h_max = std::min(2.0 / std::max(k_max, 1e-12), spec.length_scale() * 0.5);
    std::vector<double> edges{0.0};
    for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
        const double a = anchors[k];
        const double b = anchors[k + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / h_max)));
        for (int i = 1; i <= pieces; ++i) edges.push_back(i == pieces ? b : a + (b - a) * i / pieces);
    }
    return quad::composite(edges, points_per_panel);
}

// V^(p) = sqrt(2/pi) int_0^inf r^2 V(r) j_0(p r) dr; closed form where available.
inline double fourier_radial(const PotentialSpec& spec, double p, PotentialPart which = PotentialPart::full) {
    if (!(p >= 0.0)) throw DomainError("fourier_radial: momentum must be non-negative");
    if (which == PotentialPart::full) {
        if (auto closed = spec.fourier_closed_form(p)) return *closed;
    }
    const quad::Rule rule = radial_rule(spec, std::max(p, 1.0));
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double r = rule.nodes[i];
        const double x = p * r;
        const double j0 = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        sum += rule.weights[i] * r * r * spec.part(r, which) * j0;
    }
    return std::numbers::sqrt2 * std::numbers::inv_sqrtpi * sum;
}

struct PotentialNorms {
    double l1_negative = 0.0;    // 4 pi int r^2 V_- dr
    double l32_negative = 0.0;   // (4 pi int r^2 V_-^{3/2} dr)^{2/3}
    double linf_negative = 0.0;  // sup V_-
    double l1_positive = 0.0;
    double l32_positive = 0.0;
    double linf_positive = 0.0;
};

// Lebesgue norms of V_+ and V_- in R^3.
inline PotentialNorms decompose_and_norms(const PotentialSpec& spec) {
    const quad::Rule coarse = radial_rule(spec, 1.0, 20);
    const quad::Rule fine = radial_rule(spec, 4.0, 24);
    auto integrate = [&](const quad::Rule& rule, PotentialPart which, double power) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double r = rule.nodes[i];
            sum += rule.weights[i] * r * r * std::pow(spec.part(r, which), power);
        }
        return 4.0 * std::numbers::pi * sum;
    };
    PotentialNorms norms;
    const double l1n = integrate(fine, PotentialPart::negative, 1.0);
    const double l1p = integrate(fine, PotentialPart::positive, 1.0);
    const double l1n_check = integrate(coarse, PotentialPart::negative, 1.0);
    const double l1p_check = integrate(coarse, PotentialPart::positive, 1.0);
    const double scale = std::max({l1n, l1p, 1e-300});
    if (!std::isfinite(l1n) || !std::isfinite(l1p) ||
        std::abs(l1n - l1n_check) + std::abs(l1p - l1p_check) > 1e-8 * scale)
        throw NumericalError("decompose_and_norms: quadrature of |V| did not converge");
    norms.l1_negative = l1n;
    norms.l1_positive = l1p;
    norms.l32_negative = std::pow(integrate(fine, PotentialPart::negative, 1.5), 2.0 / 3.0);
    norms.l32_positive = std::pow(integrate(fine, PotentialPart::positive, 1.5), 2.0 / 3.0);
    norms.linf_negative = spec.sup_negative_part();
    double sup_pos = 0.0;
    for (double r : fine.nodes) sup_pos = std::max(sup_pos, spec.part(r, PotentialPart::positive));
    for (double r : spec.breakpoints()) sup_pos = std::max(sup_pos, spec.part(r, PotentialPart::positive));
    sup_pos = std::max(sup_pos, spec.part(0.0, PotentialPart::positive));
    norms.linf_positive = sup_pos;
    return norms;
}

// Reads a two-column (r, V) table: whitespace or comma separated, '#'
// comments, and an optional non-numeric header line before the first data row.
inline PotentialSpec load_table(const std::string& path, double scale = 1.0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential table '" + path + "'");
    TabulatedModel table;
    std::string line;
    int line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;
        auto parse = [&](const std::string& tok, double& out) {
            try {
                std::size_t used = 0;
                out = std::stod(tok, &used);
                return used == tok.size();
            } catch (const std::exception&) {
                return false;
            }
        };
        double r = 0.0;
        double v = 0.0;
        const bool ok = tokens.size() == 2 && parse(tokens[0], r) && parse(tokens[1], v);
        if (!ok) {
            if (!seen_data && table.r.empty()) {
                seen_data = true;  // header line
                continue;
            }
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected two numeric columns");
        }
        seen_data = true;
        if (!table.r.empty() && !(r > table.r.back()))
            throw ConfigError(path + ":" + std::to_string(line_no) + ": radius " + tokens[0] +
                              " is not strictly greater than the previous row");
        table.r.push_back(r);
        table.v.push_back(v);
    }
    try {
        return PotentialSpec(std::move(table), scale);
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace bcslab
