#pragma once

// Partial-wave reduction of the convolution with V^: for radial h and the
// angular-momentum-ell component,
//
//   (V^ * h)_ell(p) = int_0^inf W_ell(p, q) h(q) q^2 dq,
//   W_ell(p, q) = (2 pi)^{-1/2} int_{-1}^{1} V^(|p - q|) P_ell(u) du       (A)
//              = (2 / pi) int_0^inf r^2 V(r) j_ell(p r) j_ell(q r) dr      (B)
//
// with |p - q|^2 = p^2 + q^2 - 2 p q u. Route A is the definition; route B is
// what matrix assembly uses, because it factorizes through position space.

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "bcslab/error.hpp"
#include "bcslab/potential.hpp"
#include "bcslab/quadrature.hpp"

namespace bcslab {

namespace detail {

// P_ell(u) by the upward three-term recurrence.
inline double legendre_p(int ell, double u) {
    if (ell == 0) return 1.0;
    double prev = 1.0;
    double cur = u;
    for (int k = 1; k < ell; ++k) {
        const double next = ((2.0 * k + 1.0) * u * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

// Spherical Bessel j_ell(x) for x >= 0. Power series for x below ell + 1/2,
// upward recurrence from j_0, j_1 above it (stable there).
inline double sph_bessel(int ell, double x) {
    if (x < 0.5 + ell) {
        // j_ell(x) = x^ell / (2 ell + 1)!! * sum_k (-x^2/2)^k / (k! (2ell+3)(2ell+5)...(2ell+2k+1))
        double lead = 1.0;
        for (int k = 1; k <= ell; ++k) lead *= x / (2.0 * k + 1.0);
        const double y = -0.5 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= y / (k * (2.0 * ell + 2.0 * k + 1.0));
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return lead * sum;
    }
    const double s = std::sin(x);
    const double c = std::cos(x);
    double j0 = s / x;
    if (ell == 0) return j0;
    double j1 = s / (x * x) - c / x;
    for (int k = 1; k < ell; ++k) {
        const double j2 = (2.0 * k + 1.0) / x * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    return j1;
}

} // namespace detail

// W = P P^T - N N^T in the symmetrized momentum basis: rows are grid nodes
// scaled by s_i, columns are radial quadrature nodes. N is the discrete form
// of multiplication by sqrt(V_-) followed by the partial-wave transform.
struct RadialFactor {
    Eigen::MatrixXd positive;
    Eigen::MatrixXd negative;
};

class SectorKernel {
public:
    SectorKernel(PotentialSpec spec, int ell, PotentialPart part = PotentialPart::full, double k_max = 16.0)
        : spec_(std::move(spec)), ell_(ell), part_(part), k_max_(k_max) {
        if (ell < 0) throw DomainError("sector_kernel: ell must be non-negative");
        rule_ = radial_rule(spec_, k_max_);
    }

    int ell() const { return ell_; }
    PotentialPart part() const { return part_; }
    const PotentialSpec& potential() const { return spec_; }

    // Route B, the double spherical-Bessel transform.
    double operator()(double p, double q) const {
        quad::Rule refined;
        const quad::Rule& rule = rule_for(std::max(p, q), refined);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double r = rule.nodes[i];
            const double v = spec_.part(r, part_);
            if (v == 0.0) continue;
            sum += rule.weights[i] * r * r * v * detail::sph_bessel(ell_, p * r) * detail::sph_bessel(ell_, q * r);
        }
        return 2.0 / std::numbers::pi * sum;
    }

    // Route A, the angular average of V^ against P_ell. The Gauss-Legendre
    // node count starts at 64 and doubles until successive values agree.
    double angular_average(double p, double q) const {
        auto vhat = [&](double k) {
            if (part_ == PotentialPart::full) {
                if (auto closed = spec_.fourier_closed_form(k)) return *closed;
            }
            return fourier_radial(spec_, k, part_);
        };
        auto integrate = [&](int n, double& magnitude) {
            const quad::Rule rule = quad::gauss_legendre(n);
            double sum = 0.0;
            magnitude = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u = rule.nodes[i];
                const double k2 = std::max(0.0, p * p + q * q - 2.0 * p * q * u);
                const double term = rule.weights[i] * vhat(std::sqrt(k2)) * detail::legendre_p(ell_, u);
                sum += term;
                magnitude += std::abs(term);
            }
            return sum;
        };
        double magnitude = 0.0;
        double prev = integrate(64, magnitude);
        for (int n = 128; n <= 4096; n *= 2) {
            const double cur = integrate(n, magnitude);
            if (std::abs(cur - prev) <= 1e-10 * std::max(std::abs(cur), 1e-3 * magnitude) ||
                magnitude == 0.0)
                return cur / std::sqrt(2.0 * std::numbers::pi);
            prev = cur;
        }
        std::ostringstream msg;
        msg.precision(17);
        msg << "sector_kernel: angular quadrature did not converge at p = " << p << ", q = " << q
            << ", ell = " << ell_ << " (last value " << prev / std::sqrt(2.0 * std::numbers::pi) << ")";
        throw NumericalError(msg.str());
    }

    // Factor of the symmetrized kernel matrix s_i W(p_i, p_j) s_j at the given
    // momenta with row scales s_i.
    RadialFactor factor(const std::vector<double>& momenta, const std::vector<double>& row_scale) const {
        double k_top = 0.0;
        for (double p : momenta) k_top = std::max(k_top, p);
        quad::Rule refined;
        const quad::Rule& rule = rule_for(k_top, refined);
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
        for (std::size_t r = 0; r < rule.size(); ++r) {
            const double v = spec_.part(rule.nodes[r], part_);
            if (v > 0.0) pos.push_back(r);
            else if (v < 0.0) neg.push_back(r);
        }
        const double c = std::sqrt(2.0 / std::numbers::pi);
        auto fill = [&](const std::vector<std::size_t>& cols) {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(momenta.size()), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) {
                const double r = rule.nodes[cols[j]];
                const double amp = c * r * std::sqrt(rule.weights[cols[j]] * std::abs(spec_.part(r, part_)));
                for (std::size_t i = 0; i < momenta.size(); ++i)
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        row_scale[i] * amp * detail::sph_bessel(ell_, momenta[i] * r);
            }
            return m;
        };
        return {fill(pos), fill(neg)};
    }

    // s_i W(p_i, p_j) s_j as an exactly symmetric matrix.
    Eigen::MatrixXd matrix(const std::vector<double>& momenta, const std::vector<double>& row_scale) const {
        const RadialFactor f = factor(momenta, row_scale);
        Eigen::MatrixXd w = f.positive * f.positive.transpose() - f.negative * f.negative.transpose();
        return symmetrized(w);
    }

    static Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
        Eigen::MatrixXd s = m + m.transpose();
        s *= 0.5;
        return s;
    }

private:
    const quad::Rule& rule_for(double k, quad::Rule& storage) const {
        if (k <= k_max_) return rule_;
        storage = radial_rule(spec_, k);
        return storage;
    }

    PotentialSpec spec_;
    int ell_ = 0;
    PotentialPart part_ = PotentialPart::full;
    double k_max_ = 16.0;
    quad::Rule rule_;
};

inline SectorKernel sector_kernel(const PotentialSpec& spec, int ell, PotentialPart part = PotentialPart::full,
                                  double k_max = 16.0) {
    return SectorKernel(spec, ell, part, k_max);
}

} // namespace bcslab
