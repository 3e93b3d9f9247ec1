#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "bcslab/potential.hpp"

using namespace bcslab;

namespace {

const double pi = std::numbers::pi;

// (2 pi)^{-3/2} (4 pi / p) int_0^R r sin(p r) V(r) dr by adaptive Gauss-Kronrod.
double fourier_oracle(const PotentialSpec& v, double p, double r_max) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double pref = 4.0 * pi / std::pow(2.0 * pi, 1.5);
    if (p == 0.0) return pref * GK::integrate([&](double r) { return r * r * v(r); }, 0.0, r_max, 15, 1e-14);
    return pref / p * GK::integrate([&](double r) { return r * std::sin(p * r) * v(r); }, 0.0, r_max, 15, 1e-14);
}

double radial_norm(const PotentialSpec& v, PotentialPart part, double power, double r_max) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return 4.0 * pi *
           GK::integrate([&](double r) { return r * r * std::pow(v.part(r, part), power); }, 0.0, r_max, 20, 1e-13);
}

std::string data(const char* name) { return std::string(BCSLAB_DATA_DIR) + "/" + name; }

} // namespace

TEST(Potential, GaussianFourierMatchesQuadrature) {
    const PotentialSpec v(GaussianModel{2.5, 0.8});
    for (double p : {0.0, 0.3, 1.0, 2.5, 6.0}) {
        const double ref = fourier_oracle(v, p, 12.0);
        EXPECT_NEAR(fourier_radial(v, p), ref, 1e-10 * std::max(1.0, std::abs(ref))) << p;
        EXPECT_LT(fourier_radial(v, p), 0.0);
    }
    EXPECT_NEAR(fourier_radial(v, 0.0), -2.5 * 0.8 * 0.8 * 0.8, 1e-15);
}

TEST(Potential, QuadratureRouteMatchesClosedForm) {
    const PotentialSpec v(TwoGaussianModel{6.0, 1.0, -8.0, 0.4});
    for (double p : {0.0, 0.7, 2.0, 5.0, 11.0}) {
        const double closed = *v.fourier_closed_form(p);
        const double quad = fourier_radial(v, p, PotentialPart::positive) - fourier_radial(v, p, PotentialPart::negative);
        EXPECT_NEAR(quad, closed, 1e-10) << p;
    }
}

TEST(Potential, SquareWellFirstZero) {
    // sin x - x cos x vanishes first at x = 4.4934094579090642 (tan x = x).
    const PotentialSpec v(SquareWellModel{1.5, 2.0});
    const double p0 = 4.4934094579090642 / 2.0;
    EXPECT_NEAR(fourier_radial(v, p0), 0.0, 1e-13);
    EXPECT_LT(fourier_radial(v, 0.9 * p0), 0.0);
    EXPECT_GT(fourier_radial(v, 1.1 * p0), 0.0);
    const double sqrt_2_over_pi = std::sqrt(2.0 / pi);
    for (double p : {0.01, 0.5, 1.7, 4.0}) {
        const double x = 2.0 * p;
        const double ref = -1.5 * sqrt_2_over_pi * (std::sin(x) - x * std::cos(x)) / (p * p * p);
        EXPECT_NEAR(fourier_radial(v, p), ref, 1e-9 * std::max(1.0, std::abs(ref)));
        EXPECT_NEAR(fourier_oracle(v, p, 2.0), ref, 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

TEST(Potential, SplitIsDisjoint) {
    const PotentialSpec v(TwoGaussianModel{6.0, 1.0, -8.0, 0.4});
    for (int i = 0; i <= 400; ++i) {
        const double r = 0.01 * i;
        const double plus = v.part(r, PotentialPart::positive);
        const double minus = v.part(r, PotentialPart::negative);
        EXPECT_EQ(plus * minus, 0.0);
        EXPECT_DOUBLE_EQ(plus - minus, v(r));
    }
}

TEST(Potential, GaussianNorms) {
    const PotentialNorms n = decompose_and_norms(PotentialSpec(GaussianModel{1.0, 1.0}));
    EXPECT_NEAR(n.l1_negative, std::pow(2.0 * pi, 1.5), 1e-10);
    // 4 pi int r^2 e^{-3 r^2 / 4} dr = (4 pi / 3)^{3/2}
    EXPECT_NEAR(n.l32_negative, std::pow(std::pow(4.0 * pi / 3.0, 1.5), 2.0 / 3.0), 1e-10);
    EXPECT_DOUBLE_EQ(n.linf_negative, 1.0);
    EXPECT_EQ(n.l1_positive, 0.0);
    EXPECT_EQ(n.linf_positive, 0.0);
}

TEST(Potential, TwoGaussianNormsAgainstTrapezoid) {
    const PotentialSpec v(TwoGaussianModel{6.0, 1.0, -8.0, 0.4});
    const PotentialNorms n = decompose_and_norms(v);
    // fine trapezoid on [0, 10]
    const int m = 400000;
    const double h = 10.0 / m;
    double l1n = 0.0, l1p = 0.0, l32 = 0.0, supn = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double r = h * i;
        const double w = (i == 0 || i == m) ? 0.5 * h : h;
        l1n += w * r * r * v.part(r, PotentialPart::negative);
        l1p += w * r * r * v.part(r, PotentialPart::positive);
        l32 += w * r * r * std::pow(v.part(r, PotentialPart::negative), 1.5);
        supn = std::max(supn, v.part(r, PotentialPart::negative));
    }
    EXPECT_NEAR(n.l1_negative, 4.0 * pi * l1n, 1e-7 * n.l1_negative);
    EXPECT_NEAR(n.l1_positive, 4.0 * pi * l1p, 1e-7 * n.l1_positive);
    EXPECT_NEAR(n.l32_negative, std::pow(4.0 * pi * l32, 2.0 / 3.0), 1e-7 * n.l32_negative);
    EXPECT_NEAR(n.linf_negative, supn, 1e-8);
    EXPECT_NEAR(n.linf_positive, 2.0, 1e-12);
    EXPECT_GT(n.l1_positive, 0.0);
}

TEST(Potential, SignChangeIsBreakpoint) {
    const PotentialSpec v(TwoGaussianModel{6.0, 1.0, -8.0, 0.4});
    bool found = false;
    for (double b : v.breakpoints()) {
        if (std::abs(v(b)) < 1e-12) found = true;
    }
    EXPECT_TRUE(found);
    EXPECT_DOUBLE_EQ(v(0.0), 2.0);
}

TEST(Potential, ScaleAndEvaluate) {
    const PotentialSpec v = PotentialSpec(GaussianModel{1.0, 1.0}).with_scale(3.0);
    EXPECT_DOUBLE_EQ(evaluate_position(v, 0.0), -3.0);
    EXPECT_NEAR(evaluate_position(v, 2.0), -3.0 * std::exp(-2.0), 1e-15);
    EXPECT_THROW(evaluate_position(v, -1.0), DomainError);
    EXPECT_EQ(v.model_name(), "gaussian");
    EXPECT_THROW(PotentialSpec(GaussianModel{1.0, 0.0}), DomainError);
    EXPECT_THROW(PotentialSpec(SquareWellModel{1.0, -1.0}), DomainError);
}

TEST(Potential, TableLoadsAndInterpolates) {
    const PotentialSpec v = load_table(data("gaussian_table.csv"));
    const auto& tab = std::get<TabulatedModel>(v.model());
    ASSERT_EQ(tab.r.size(), 100u);
    for (std::size_t i = 0; i < tab.r.size(); ++i) EXPECT_DOUBLE_EQ(v(tab.r[i]), tab.v[i]);
    for (int i = 0; i < 990; ++i) {
        const double r = 0.01 * i + 0.005;
        EXPECT_NEAR(v(r), -std::exp(-0.5 * r * r), 1e-3);
        // monotone data, monotone interpolant
        EXPECT_LE(v(r), v(r + 0.01) + 1e-16);
    }
    EXPECT_EQ(v(20.0), 0.0);
    EXPECT_FALSE(v.has_closed_form_fourier());
    const PotentialNorms n = decompose_and_norms(v);
    EXPECT_NEAR(n.l1_negative, std::pow(2.0 * pi, 1.5), 1e-3 * n.l1_negative);
    EXPECT_NEAR(n.l1_negative, radial_norm(v, PotentialPart::negative, 1.0, 9.9), 1e-8 * n.l1_negative);
    for (double p : {0.0, 1.0, 3.0}) EXPECT_NEAR(fourier_radial(v, p), -std::exp(-0.5 * p * p), 1e-3);
}

TEST(Potential, TableErrorsNameTheRow) {
    try {
        load_table(data("duplicate_radius.csv"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_table(data("does_not_exist.csv")), ConfigError);
}
