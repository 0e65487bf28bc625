// Frozen-phase quadratic problem: assembly, CG solve, dual field and identities.

#include "dwell/oracle.hpp"
#include "dwell/subproblem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dwell;

namespace {

PhaseField checker(const StructuredMesh& m, unsigned seed) {
    std::mt19937 g(seed);
    PhaseField chi(m.num_elements());
    for (auto& c : chi.chi_a) c = g() % 2;
    return chi;
}

} // namespace

TEST(Subproblem, UniformPhaseHasZeroDisplacement) {
    // constant tilt: load vanishes, alpha = a|C|^2/2 |Omega|
    const auto m = build_mesh({2.0, 1.0}, {16, 1}, 1);
    const auto k = CoefficientSet::uniform(m, 3.0, 1.0, SymMat::scalar(0.5), SymMat::scalar(-1.0));
    const PhaseField chi(m.num_elements(), true);
    const auto qp = assemble(chi, k, m);
    for (double l : qp.load) EXPECT_NEAR(l, 0.0, 1e-14);
    const auto [u, rep] = solve(qp, m);
    for (double v : u.values) EXPECT_EQ(v, 0.0);
    EXPECT_NEAR(rep.alpha, 0.5 * 3.0 * 0.25 * 2.0, 1e-14);
}

TEST(Subproblem, TwoLayerBarClosedForm) {
    // left half phase a, right half phase b: eps_a = (bD - aC)/(a+b), eps_b = -eps_a
    const double a = 1.0, b = 3.0, c = 1.0, d = -2.0;
    const auto m = build_mesh({1.0, 1.0}, {10, 1}, 1);
    const auto k = CoefficientSet::uniform(m, a, b, SymMat::scalar(c), SymMat::scalar(d));
    PhaseField chi(m.num_elements());
    for (std::size_t e = 0; e < 10; ++e) chi.chi_a[e] = e < 5 ? 1 : 0;
    const auto [u, rep] = solve(assemble(chi, k, m), m);
    const double ea = (b * d - a * c) / (a + b);
    const auto eps = symmetrized_gradient(u, m);
    for (std::size_t e = 0; e < 10; ++e) EXPECT_NEAR(eps[e].xx(), e < 5 ? ea : -ea, 1e-9);
    const double exact = 0.25 * (a * (ea + c) * (ea + c) + b * (-ea + d) * (-ea + d));
    EXPECT_NEAR(rep.alpha, exact, 1e-10);
    // stress is constant across the interface
    const auto p = dual_variable(u, chi, k, m);
    for (std::size_t e = 1; e < 10; ++e) EXPECT_NEAR(p[e].xx(), p[0].xx(), 1e-9);
}

TEST(Subproblem, MatchesDenseCholesky) {
    const auto m = build_mesh({1.0, 1.0}, {6, 6}, 2);
    const auto k = CoefficientSet::uniform(m, 1.0, 2.5, SymMat::make2(1.0, 0.2, 0.0), SymMat::make2(-0.5, 0.0, 1.0));
    const auto chi = checker(m, 7);
    const auto qp = assemble(chi, k, m);
    const auto [u, rep] = solve(qp, m);
    const auto ref = oracle::dense_solve(qp, m);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) worst = std::max(worst, std::abs(u.values[i] - ref.values[i]));
    EXPECT_LT(worst, 1e-8);
    EXPECT_NEAR(rep.alpha, mixture_energy(ref, chi, k, m), 1e-10);
    EXPECT_LE(rep.relative_residual, 1e-10);
}

TEST(Subproblem, StiffnessIsSymmetric) {
    const auto m = build_mesh({1.0, 1.0}, {4, 3}, 2);
    const auto k = CoefficientSet::uniform(m, 1.0, 4.0, SymMat::make2(1.0, 0.0, 0.0), SymMat::make2(0.0, 0.0, 1.0));
    const auto qp = assemble(checker(m, 3), k, m);
    std::vector<double> x(qp.K.rows()), y(qp.K.rows()), kx, ky;
    std::mt19937 g(1);
    std::normal_distribution<double> n;
    for (auto& v : x) v = n(g);
    for (auto& v : y) v = n(g);
    qp.K.multiply(x, kx);
    qp.K.multiply(y, ky);
    EXPECT_NEAR(vdot(y, kx), vdot(x, ky), 1e-12);
    EXPECT_GT(vdot(x, kx), 0.0);
}

TEST(Subproblem, EnergyAgreesWithQuadratureOfMixture) {
    const auto m = build_mesh({1.0, 1.0}, {5, 5}, 2);
    const auto k = CoefficientSet::uniform(m, 2.0, 1.0, SymMat::make2(0.1, 0.3, -0.2), SymMat::make2(0.4, -0.1, 0.0));
    const auto chi = checker(m, 11);
    const auto qp = assemble(chi, k, m);
    DisplacementField u(m);
    std::mt19937 g(5);
    std::uniform_real_distribution<double> r(-0.1, 0.1);
    for (auto& v : u.values) v = r(g);
    u = from_dof(to_dof(u, m), m);
    EXPECT_NEAR(qp.energy(to_dof(u, m)), mixture_energy(u, chi, k, m), 1e-13);
}

class DualityTest : public ::testing::TestWithParam<int> {};

TEST_P(DualityTest, OptimalityIdentities) {
    const int dim = GetParam();
    const auto m = dim == 1 ? build_mesh({1.0, 1.0}, {64, 1}, 1) : build_mesh({1.0, 1.0}, {12, 12}, 2);
    const SymMat C = dim == 1 ? SymMat::scalar(1.0) : SymMat::make2(1.0, 0.25, 0.0);
    const SymMat D = dim == 1 ? SymMat::scalar(-3.0) : SymMat::make2(0.0, -0.5, -1.0);
    const auto k = CoefficientSet::uniform(m, 1.0, 2.0, C, D);
    const auto chi = checker(m, 17);
    const auto qp = assemble(chi, k, m);
    const auto [u, rep] = solve(qp, m);
    const auto p = dual_variable(u, chi, k, m);
    const auto dr = duality_report(u, p, chi, k, m, qp);

    EXPECT_LE(std::abs(dr.gap), 1e-8 * (1.0 + std::abs(dr.alpha)));
    EXPECT_LE(dr.kernel_residual, 1e-9);
    EXPECT_LE(dr.orthogonality, 1e-8);
    // the dual value is -alpha and no admissible q does better
    EXPECT_NEAR(dr.beta, -dr.alpha, 1e-8 * (1.0 + std::abs(dr.alpha)));

    const auto ar = alpha_representations(u, p, chi, k, m, DomainSplit::from(k));
    EXPECT_LE(ar.energy_identity_residual, 1e-8);
    EXPECT_LE(ar.max_deviation(), 1e-8 * (1.0 + std::abs(ar.direct)));
}

INSTANTIATE_TEST_SUITE_P(Dims, DualityTest, ::testing::Values(1, 2));

TEST(Subproblem, WeakDualityForOtherKernelFields) {
    // any q in the kernel gives -I(q) <= alpha; perturb p by a constant (still in the kernel)
    const auto m = build_mesh({1.0, 1.0}, {8, 8}, 2);
    const auto k = CoefficientSet::uniform(m, 1.0, 2.0, SymMat::make2(1.0, 0.0, 0.0), SymMat::make2(0.0, 0.0, -1.0));
    const auto chi = checker(m, 2);
    const auto qp = assemble(chi, k, m);
    const auto [u, rep] = solve(qp, m);
    auto q = dual_variable(u, chi, k, m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) q[e] += SymMat::make2(0.3, -0.1, 0.2);
    EXPECT_LE(-dual_objective(q, chi, k, m), rep.alpha + 1e-12);
}

TEST(Subproblem, CgFailureRaisesSolverError) {
    const auto m = build_mesh({1.0, 1.0}, {64, 1}, 1);
    const auto k = CoefficientSet::uniform(m, 1.0, 100.0, SymMat::scalar(1.0), SymMat::scalar(-1.0));
    const auto chi = checker(m, 9);
    const auto qp = assemble(chi, k, m);
    SolveOptions opt;
    opt.max_iter_factor = 0;  // cap of a single iteration
    EXPECT_THROW(solve(qp, m, opt), SolverError);
}
