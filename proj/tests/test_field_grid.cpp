// Meshes, strain fields, pairings and window reductions.

#include "dwell/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace dwell;

namespace {

DisplacementField affine(const StructuredMesh& m, const SymMat& G) {
    DisplacementField u(m);
    for (std::size_t k = 0; k < m.num_nodes(); ++k) {
        const auto& x = m.nodes[k];
        if (m.dim == 1) {
            u.at(k, 0) = G.xx() * x[0];
        } else {
            u.at(k, 0) = G.xx() * x[0] + G.xy() * x[1];
            u.at(k, 1) = G.xy() * x[0] + G.yy() * x[1];
        }
    }
    return u;
}

} // namespace

TEST(SymMat, FrobeniusCountsOffDiagonalTwice) {
    const SymMat a = SymMat::make2(1.0, 2.0, 3.0);
    const SymMat b = SymMat::make2(-1.0, 0.5, 2.0);
    EXPECT_DOUBLE_EQ(dot(a, b), -1.0 + 2.0 * 1.0 + 6.0);
    EXPECT_DOUBLE_EQ(norm2(a), 1.0 + 8.0 + 9.0);
    EXPECT_DOUBLE_EQ(dot(SymMat::scalar(3.0), SymMat::scalar(-2.0)), -6.0);
}

TEST(SymMat, OuterProductIsSymmetrized) {
    const SymMat s = sym_outer({1.0, 0.0}, {0.0, 2.0});
    EXPECT_DOUBLE_EQ(s.xx(), 0.0);
    EXPECT_DOUBLE_EQ(s.xy(), 1.0);
    EXPECT_DOUBLE_EQ(s.yy(), 0.0);
    EXPECT_DOUBLE_EQ(s.det(), -1.0);
}

TEST(Mesh, MeasuresSumToVolume) {
    const auto m1 = build_mesh({2.0, 1.0}, {7, 1}, 1);
    EXPECT_EQ(m1.num_elements(), 7u);
    EXPECT_EQ(m1.ndof, 6);
    EXPECT_NEAR(std::accumulate(m1.measure.begin(), m1.measure.end(), 0.0), 2.0, 1e-14);

    const auto m2 = build_mesh({1.0, 0.5}, {4, 3}, 2);
    EXPECT_EQ(m2.num_elements(), 24u);
    EXPECT_EQ(m2.num_nodes(), 20u);
    EXPECT_EQ(m2.interior_nodes(), 6);
    EXPECT_EQ(m2.ndof, 12);
    EXPECT_NEAR(std::accumulate(m2.measure.begin(), m2.measure.end(), 0.0), 0.5, 1e-14);
}

TEST(Mesh, ElementNumbering) {
    const auto m = build_mesh({1.0, 1.0}, {3, 2}, 2);
    // quad (1,1): q = 4
    const auto& lower = m.elements[8];
    const auto& upper = m.elements[9];
    EXPECT_EQ(lower[0], 1 + 4 * 1);
    EXPECT_EQ(lower[1], 2 + 4 * 1);
    EXPECT_EQ(lower[2], 2 + 4 * 2);
    EXPECT_EQ(upper[1], 2 + 4 * 2);
    EXPECT_EQ(upper[2], 1 + 4 * 2);
    EXPECT_EQ(m.cell_of(9), (std::array<int, 2>{1, 1}));
}

TEST(Mesh, LocateFindsContainingElement) {
    const auto m = build_mesh({1.0, 1.0}, {4, 4}, 2);
    for (std::size_t e = 0; e < m.num_elements(); ++e) EXPECT_EQ(m.locate(m.centroid[e]), static_cast<int>(e));
    const auto m1 = build_mesh({1.0, 1.0}, {5, 1}, 1);
    EXPECT_EQ(m1.locate({0.99, 0.0}), 4);
    EXPECT_EQ(m1.locate({1.0, 0.0}), 4);
}

TEST(Mesh, RejectsBadInput) {
    EXPECT_THROW(build_mesh({1.0, 1.0}, {0, 1}, 1), ConfigError);
    EXPECT_THROW(build_mesh({-1.0, 1.0}, {4, 4}, 2), ConfigError);
    EXPECT_THROW(build_mesh({1.0, 1.0}, {4, 4}, 3), ConfigError);
}

TEST(Strain, AffineFieldsAreReproducedExactly) {
    const SymMat G = SymMat::make2(0.3, -0.7, 1.1);
    const auto m = build_mesh({1.0, 2.0}, {5, 3}, 2);
    const auto eps = symmetrized_gradient(affine(m, G), m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) EXPECT_NEAR(norm(eps[e] - G), 0.0, 1e-13);

    const auto m1 = build_mesh({1.0, 1.0}, {6, 1}, 1);
    const auto eps1 = symmetrized_gradient(affine(m1, SymMat::scalar(-2.5)), m1);
    for (std::size_t e = 0; e < m1.num_elements(); ++e) EXPECT_NEAR(eps1[e].xx(), -2.5, 1e-13);
}

TEST(Strain, RigidRotationHasNoStrain) {
    const auto m = build_mesh({1.0, 1.0}, {3, 3}, 2);
    DisplacementField u(m);
    for (std::size_t k = 0; k < m.num_nodes(); ++k) {
        u.at(k, 0) = -m.nodes[k][1];
        u.at(k, 1) = m.nodes[k][0];
    }
    const auto eps = symmetrized_gradient(u, m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) EXPECT_NEAR(norm(eps[e]), 0.0, 1e-13);
}

TEST(Strain, DofRoundTripZerosBoundary) {
    const auto m = build_mesh({1.0, 1.0}, {3, 3}, 2);
    DisplacementField u(m);
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = static_cast<double>(i) + 1.0;
    const auto v = from_dof(to_dof(u, m), m);
    for (std::size_t k = 0; k < m.num_nodes(); ++k)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(v.at(k, c), m.boundary[k] ? 0.0 : u.at(k, c));
}

TEST(Pairing, ConstantFieldAgainstZeroTraceVanishes) {
    // int Q . eps(v) = 0 for constant Q and v vanishing on the boundary
    const auto m = build_mesh({1.0, 1.0}, {4, 4}, 2);
    DisplacementField v(m);
    for (std::size_t k = 0; k < m.num_nodes(); ++k) {
        if (m.boundary[k]) continue;
        v.at(k, 0) = std::sin(3.0 * k);
        v.at(k, 1) = std::cos(static_cast<double>(k));
    }
    DualField q(m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) q[e] = SymMat::make2(1.0, 0.4, -2.0);
    EXPECT_NEAR(pairing(q, v, m), 0.0, 1e-13);
    EXPECT_NEAR(l2_norm(q, m), norm(SymMat::make2(1.0, 0.4, -2.0)), 1e-13);
}

TEST(Windows, PartitionAndAverages) {
    const auto m = build_mesh({1.0, 1.0}, {8, 4}, 2);
    const auto w = make_windows(m, 2);
    EXPECT_EQ(w.num_windows(), 8u);
    for (double mu : w.measure) EXPECT_NEAR(mu, 1.0 / 8.0, 1e-14);
    std::vector<double> f(m.num_elements());
    for (std::size_t e = 0; e < f.size(); ++e) f[e] = e % 2 ? 3.0 : 1.0;
    for (double avg : window_average(f, m, w)) EXPECT_NEAR(avg, 2.0, 1e-14);
    EXPECT_THROW(make_windows(m, 3), ConfigError);
}

TEST(Windows, AverageOfMatrixField) {
    const auto m = build_mesh({1.0, 1.0}, {4, 1}, 1);
    StrainField eps(m);
    for (std::size_t e = 0; e < 4; ++e) eps[e] = SymMat::scalar(static_cast<double>(e));
    const auto w = make_windows(m, 2);
    const auto avg = window_average(eps, m, w);
    EXPECT_DOUBLE_EQ(avg[0].xx(), 0.5);
    EXPECT_DOUBLE_EQ(avg[1].xx(), 2.5);
}

TEST(Bumps, SupportedInsideDomain) {
    const auto m = build_mesh({1.0, 1.0}, {16, 16}, 2);
    const auto t = default_test_functions(m);
    ASSERT_GE(t.bumps.size(), 3u);
    for (std::size_t k = 0; k < t.bumps.size(); ++k) {
        const auto n = t.nodal(k, m);
        for (std::size_t i = 0; i < m.num_nodes(); ++i) {
            if (m.boundary[i]) {
                EXPECT_EQ(t.bumps[k](m.nodes[i], 2), 0.0);
            }
        }
        EXPECT_GT(*std::max_element(n.begin(), n.end()), 0.0);
    }
    EXPECT_DOUBLE_EQ(t.bumps[0](t.bumps[0].center, 2), 1.0);
}
