// Empirical Young measures per window and their checks.

#include "dwell/descent.hpp"
#include "dwell/oracle.hpp"
#include "dwell/young.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dwell;

namespace {

LimitBundle laminate_bundle(double c, double d, int period, int window) {
    const auto m = build_mesh({1.0, 1.0}, {64, 1}, 1);
    const auto k = CoefficientSet::uniform(m, 1.0, 1.0, SymMat::scalar(c), SymMat::scalar(d));
    const auto seed = laminate_seed(m, k, period);
    return estimate_limits(alternate(m, k, seed.chi, {}).state, window);
}

} // namespace

TEST(YoungMeasure, AtomsAreProbabilityMeasures) {
    const auto b = laminate_bundle(1.0, -1.0, 2, 8);
    const auto ms = estimate_ym(b);
    ASSERT_EQ(ms.size(), 8u);
    for (const auto& m : ms) {
        double total = 0.0;
        for (const auto& at : m.atoms) total += at.weight;
        EXPECT_NEAR(total, 1.0, 1e-14);
        EXPECT_NEAR(m.weight_a + m.weight_b, 1.0, 1e-14);
        EXPECT_NEAR(m.first_moment.xx(), b.eps_avg[m.window].xx(), 1e-14);
        EXPECT_TRUE(m.uniform_coefficients);
    }
}

TEST(YoungMeasure, LaminateIsTwoPointAtTheWells) {
    const auto b = laminate_bundle(1.0, -3.0, 4, 8);
    const auto ms = estimate_ym(b);
    for (const auto& m : ms) {
        EXPECT_NEAR(m.weight_a, 0.75, 1e-14);
        for (const auto& at : m.atoms) {
            const double x = at.lambda.xx();
            EXPECT_TRUE(std::abs(x + 1.0) < 1e-9 || std::abs(x - 3.0) < 1e-9) << x;
        }
        EXPECT_NEAR(m.h_moment, 0.0, 1e-16);
    }
    EXPECT_LE(ym_energy_residual(ms, 0.0), 1e-8);
}

TEST(YoungMeasure, SecondMomentMatchesGapScalar) {
    const auto b = laminate_bundle(1.0, -1.0, 2, 8);
    const auto masks = partition_masks(b, DomainSplit::from(b.coeffs), 0.05);
    const auto g = gap_d(b, masks);
    const auto rec = second_moment_check(estimate_ym(b), b, masks, g.d);
    EXPECT_LT(rec.mismatch, 1e-12);
    EXPECT_NEAR(rec.second_moment, 1.0, 1e-10);
}

TEST(YoungMeasure, VarianceIdentityOnLaminates) {
    for (auto [c, d, period] : {std::tuple{1.0, -1.0, 2}, std::tuple{1.0, -3.0, 4}}) {
        const auto b = laminate_bundle(c, d, period, 8);
        const auto v = variance_identity(estimate_ym(b), b.coeffs);
        EXPECT_EQ(v.checked, 8);
        EXPECT_EQ(v.failed, 0);
        EXPECT_LT(v.worst_relative, 1e-8);
    }
}

TEST(YoungMeasure, DiracOnConvexRun) {
    const auto m = build_mesh({1.0, 1.0}, {32, 1}, 1);
    const auto k = CoefficientSet::uniform(m, 1.0, 1.0, SymMat::scalar(1.0), SymMat::scalar(1.0));
    const auto b = estimate_limits(alternate(m, k, PhaseField(m.num_elements()), {}).state, 8);
    const auto ms = estimate_ym(b);
    const std::vector<char> all(ms.size(), 1);
    const auto rep = dirac_check(ms, all, default_dirac_tol(ms));
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(rep.checked, 4);
    EXPECT_NEAR(ym_energy_residual(ms, 0.5), 0.0, 1e-12);
}

TEST(YoungMeasure, DiracFailsOnOscillatingWindows) {
    const auto b = laminate_bundle(1.0, -1.0, 2, 8);
    const auto ms = estimate_ym(b);
    const std::vector<char> all(ms.size(), 1);
    const auto rep = dirac_check(ms, all, default_dirac_tol(ms));
    EXPECT_FALSE(rep.pass());
    EXPECT_EQ(rep.failures.size(), ms.size());
    EXPECT_NEAR(rep.max_variance, 1.0, 1e-10);
    const std::vector<char> none(ms.size(), 0);
    EXPECT_EQ(dirac_check(ms, none, 1e-6).checked, 0);
}
