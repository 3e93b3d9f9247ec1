#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bcslab/critical.hpp"
#include "bcslab/criterion.hpp"

using namespace bcslab;

namespace {

ThermoParams at_beta(double beta, double mu) { return {InverseTemperature::from_beta(beta), mu}; }

} // namespace

TEST(Criterion, FreeCaseStable) {
    const CriterionReport r = instability_verdict(PotentialSpec(GaussianModel{0.0, 1.0}), at_beta(2.0, 1.0), 2);
    EXPECT_EQ(r.verdict, Verdict::stable);
    EXPECT_GE(r.minimum, 1.0);
    EXPECT_LE(r.minimum, 1.0 + 1e-3);
    EXPECT_EQ(r.lowest.size(), 3u);
    EXPECT_EQ(r.grid_size, 320u);
}

TEST(Criterion, AttractiveGaussianColdAndHot) {
    const Discretization disc(PotentialSpec(GaussianModel{5.0, 1.0}), build_grid(GridOptions{}, 1.0), 4);
    const CriterionReport cold = instability_verdict(disc, ThermoParams::zero_temperature(1.0));
    EXPECT_EQ(cold.verdict, Verdict::unstable);
    EXPECT_EQ(cold.minimizing_ell, 0);
    EXPECT_LT(cold.minimum, 0.0);
    for (std::size_t ell = 1; ell < cold.lowest.size(); ++ell) EXPECT_GT(cold.lowest[ell], cold.minimum);
    const CriterionReport warm = instability_verdict(disc, ThermoParams::at_temperature(0.01, 1.0), true);
    EXPECT_EQ(warm.verdict, Verdict::unstable);
    EXPECT_EQ(instability_verdict(disc, at_beta(0.05, 1.0)).verdict, Verdict::stable);
}

TEST(Criterion, RepulsiveStableInEverySector) {
    const CriterionReport r =
        instability_verdict(PotentialSpec(GaussianModel{-4.0, 1.0}), ThermoParams::at_temperature(0.01, 1.0), 4);
    EXPECT_EQ(r.verdict, Verdict::stable);
    for (double l : r.lowest) EXPECT_GT(l, 0.0);
}

TEST(Criterion, MonotoneInBeta) {
    const Discretization disc(PotentialSpec(TwoGaussianModel{6.0, 1.0, -8.0, 0.4}), build_grid(GridOptions{}, 1.0), 0);
    double prev = 1e300;
    for (double beta : {0.2, 0.5, 1.0, 2.0, 10.0}) {
        const double l = instability_verdict(disc, at_beta(beta, 1.0)).minimum;
        EXPECT_LT(l, prev);
        prev = l;
    }
}

TEST(Criterion, VerdictFlipsAcrossCriticalTemperature) {
    const Discretization disc(PotentialSpec(GaussianModel{5.0, 1.0}), build_grid(GridOptions{}, 1.0), 4);
    const TcResult tc = tc_bisect(disc, 1.0);
    ASSERT_TRUE(tc.resolved());
    EXPECT_EQ(instability_verdict(disc, ThermoParams::at_temperature(0.95 * tc.value, 1.0)).verdict, Verdict::unstable);
    EXPECT_EQ(instability_verdict(disc, ThermoParams::at_temperature(1.05 * tc.value, 1.0)).verdict, Verdict::stable);
}

TEST(Criterion, BirmanSchwingerMatchesSpectrum) {
    // away from T_c by more than 2%, ||B_0|| > 1 exactly when lambda_min < 0
    TcOptions o;
    o.ell_max = 0;
    for (double lambda : {2.0, 5.0, 8.0}) {
        const PotentialSpec v = PotentialSpec(GaussianModel{1.0, 1.0}).with_scale(lambda);
        const Discretization disc(v, build_grid(o.grid, 1.0), 0);
        const TcResult tc = tc_bisect(disc, 1.0, o);
        ASSERT_TRUE(tc.resolved()) << lambda;
        for (double f : {0.3, 0.7, 0.97, 1.03, 1.5, 3.0}) {
            const ThermoParams params = ThermoParams::at_temperature(f * tc.value, 1.0);
            const bool unstable = instability_verdict(disc, params).unstable;
            EXPECT_EQ(bs_norm(disc, params, 0.0) > 1.0, unstable) << lambda << " " << f;
            EXPECT_EQ(unstable, f < 1.0);
        }
    }
}

TEST(Criterion, ZeroTemperatureDivergenceAndBound) {
    const PotentialSpec v(GaussianModel{1.0, 1.0});
    const Discretization disc(v, build_grid(GridOptions{}, 1.0), 0);
    const PotentialNorms norms = decompose_and_norms(v);
    const ThermoParams cold = ThermoParams::zero_temperature(1.0);
    double prev = 0.0;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double n = bs_norm(disc, cold, e);
        EXPECT_GT(n, prev) << e;
        prev = n;
        const double bound = norms.l1_negative * f_counterterm(e) + hls_constant() * norms.l32_negative;
        EXPECT_LE(n, bound) << e;
    }
}

TEST(Criterion, ToleranceScale) {
    EXPECT_DOUBLE_EQ(eigen_tolerance(ThermoParams::at_temperature(0.5, 1.5)), 2e-9);
    EXPECT_DOUBLE_EQ(eigen_tolerance(ThermoParams::zero_temperature(0.0)), 1e-9);
    EXPECT_STREQ(to_string(Verdict::indeterminate), "indeterminate");
}
