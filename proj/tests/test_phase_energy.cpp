// Pointwise phase algebra and the Omega0 split.

#include "dwell/phase.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dwell;

namespace {

CoefficientSet two_elements(double a, double b, SymMat C, SymMat D) {
    const auto m = build_mesh({1.0, 1.0}, {2, 1}, 1);
    return CoefficientSet::uniform(m, a, b, C, D);
}

} // namespace

TEST(Phases, IndicatorIdentities) {
    PhaseField chi(5);
    chi.chi_a = {1, 0, 0, 1, 0};
    for (std::size_t e = 0; e < chi.size(); ++e) {
        EXPECT_DOUBLE_EQ(chi.a(e) + chi.b(e), 1.0);
        EXPECT_DOUBLE_EQ(chi.psi(e) * chi.psi(e), 1.0);
        EXPECT_DOUBLE_EQ(chi.psi(e), chi.b(e) - chi.a(e));
    }
}

TEST(Phases, ModulusDecompositions) {
    const auto m = build_mesh({1.0, 1.0}, {4, 1}, 1);
    const auto k = CoefficientSet::uniform(m, 1.5, 4.0, SymMat::scalar(1.0), SymMat::scalar(-2.0));
    PhaseField chi(4);
    chi.chi_a = {1, 0, 1, 0};
    const auto direct = m_field(chi, k);
    const auto split = m_field_decomposed(chi, k);
    for (std::size_t e = 0; e < 4; ++e) {
        EXPECT_DOUBLE_EQ(direct[e], chi.chi_a[e] ? 1.5 : 4.0);
        EXPECT_NEAR(direct[e], split[e], 1e-15);
    }
    for (double r : reciprocal_identity(chi, k)) EXPECT_LT(r, 1e-15);
}

TEST(Phases, TiltAndConstantMatchBranchwiseExpansion) {
    // chi_a a/2|xi+C|^2 + chi_b b/2|xi+D|^2 = m/2|xi|^2 + E.xi + B/2
    const SymMat C = SymMat::make2(0.5, -0.2, 1.0);
    const SymMat D = SymMat::make2(-1.0, 0.3, 0.0);
    const auto m = build_mesh({1.0, 1.0}, {1, 1}, 2);
    const auto k = CoefficientSet::uniform(m, 2.0, 3.0, C, D);
    const SymMat xi = SymMat::make2(0.7, 0.1, -0.4);
    for (double psi : {-1.0, 1.0}) {
        const double mm = psi < 0 ? 2.0 : 3.0;
        const double lhs = psi < 0 ? phase_a_energy(k, 0, xi) : phase_b_energy(k, 0, xi);
        const double rhs = quadratic_density(xi, mm, tilt(k, 0, psi)) + 0.5 * B_value(k, 0, psi);
        EXPECT_NEAR(lhs, rhs, 1e-14);
    }
    EXPECT_NEAR(norm(tilt(k, 0, -1.0) - 2.0 * C), 0.0, 1e-15);
    EXPECT_NEAR(norm(tilt(k, 0, 1.0) - 3.0 * D), 0.0, 1e-15);
}

TEST(Phases, DoubleWellVanishesAtBothWells) {
    const auto k = two_elements(1.0, 2.0, SymMat::scalar(1.0), SymMat::scalar(-3.0));
    EXPECT_DOUBLE_EQ(h_density(k, 0, SymMat::scalar(-1.0)), 0.0);
    EXPECT_DOUBLE_EQ(h_density(k, 0, SymMat::scalar(3.0)), 0.0);
    EXPECT_DOUBLE_EQ(h_density(k, 0, SymMat::scalar(0.0)), 0.5);
}

TEST(Phases, ConjugateIsFenchelTransform) {
    // sup_xi p.xi - phi(xi) attained at xi = (p - E)/m
    const SymMat E = SymMat::make2(0.2, -0.5, 1.0);
    const SymMat p = SymMat::make2(-1.0, 0.25, 0.5);
    const double m = 2.5;
    const SymMat xi = (1.0 / m) * (p - E);
    EXPECT_NEAR(conjugate_density(p, m, E), dot(p, xi) - quadratic_density(xi, m, E), 1e-14);
    // Fenchel-Young inequality at an arbitrary point
    const SymMat z = SymMat::make2(1.0, 1.0, 1.0);
    EXPECT_GE(conjugate_density(p, m, E) + quadratic_density(z, m, E) - dot(p, z), -1e-14);
    EXPECT_THROW(conjugate_density(p, 0.0, E), ContractError);
}

TEST(Phases, SplitClassification) {
    const auto m = build_mesh({1.0, 1.0}, {3, 1}, 1);
    CoefficientSet k = CoefficientSet::uniform(m, 1.0, 1.0, SymMat::scalar(1.0), SymMat::scalar(-1.0));
    k.b[1] = 1.0 + 1e-10;
    k.b[2] = 2.0;
    const auto split = DomainSplit::from(k);
    EXPECT_EQ(split.classify(k, 0), DomainSplit::Kind::Omega0);
    EXPECT_EQ(split.classify(k, 1), DomainSplit::Kind::Guard);
    EXPECT_EQ(split.classify(k, 2), DomainSplit::Kind::Split);
}

TEST(Phases, SplitBracketReproducesHalfTiltForm) {
    // for binary psi and p = m eps + E the bracket equals E.eps + B
    const auto m = build_mesh({1.0, 1.0}, {1, 1}, 2);
    const auto k = CoefficientSet::uniform(m, 1.0, 3.0, SymMat::make2(1.0, 0.5, 0.0), SymMat::make2(0.0, -1.0, 2.0));
    const SymMat eps = SymMat::make2(0.3, 0.2, -0.1);
    for (double psi : {-1.0, 1.0}) {
        const double mm = psi < 0 ? 1.0 : 3.0;
        const SymMat E = tilt(k, 0, psi);
        const SymMat p = mm * eps + E;
        EXPECT_NEAR(split_bracket(k, 0, eps, p, psi), dot(E, eps) + B_value(k, 0, psi), 1e-13);
    }
}

TEST(Phases, CoefficientValidation) {
    const auto m = build_mesh({1.0, 1.0}, {2, 1}, 1);
    EXPECT_THROW(CoefficientSet::uniform(m, 0.0, 1.0, SymMat::scalar(0.0), SymMat::scalar(0.0)), ConfigError);
    CoefficientSet k = CoefficientSet::uniform(m, 1.0, 1.0, SymMat::scalar(0.0), SymMat::scalar(0.0));
    k.C[0].v[0] = std::nan("");
    EXPECT_THROW(k.validate(), ConfigError);
}
