#pragma once

/**
 * @file limits.hpp
 * @brief Weak limits of the minimizing sequence estimated by window means at
 * the finest level, the pure/mixed partitions, the second-moment gap d and
 * the pairing diagnostic across levels.
 */

#include "dwell/descent.hpp"
#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dwell {

struct LimitBundle {
    WindowGrid windows;
    std::vector<SymMat> eps_avg, p_avg;
    std::vector<double> chi_a_avg, chi_b_avg, psi_avg;
    DisplacementField u_lim;

    // finest-level raw data
    StructuredMesh mesh;
    CoefficientSet coeffs;
    StrainField eps;
    DualField p;
    PhaseField chi;

    [[nodiscard]] int window_of(std::size_t e) const { return windows.window_of[e]; }
    [[nodiscard]] const SymMat& eps_bar(std::size_t e) const { return eps_avg[window_of(e)]; }
    [[nodiscard]] const SymMat& p_bar(std::size_t e) const { return p_avg[window_of(e)]; }
    [[nodiscard]] double chi_a_bar(std::size_t e) const { return chi_a_avg[window_of(e)]; }
    [[nodiscard]] double chi_b_bar(std::size_t e) const { return chi_b_avg[window_of(e)]; }
    [[nodiscard]] double psi_bar(std::size_t e) const { return psi_avg[window_of(e)]; }
};

inline LimitBundle estimate_limits(const StructuredMesh& mesh, const CoefficientSet& k, const DisplacementField& u,
                                   const DualField& p, const PhaseField& chi, int window_size) {
    LimitBundle b;
    b.windows = make_windows(mesh, window_size);
    b.mesh = mesh;
    b.coeffs = k;
    b.eps = symmetrized_gradient(u, mesh);
    b.p = p;
    b.chi = chi;
    b.u_lim = u;
    b.eps_avg = window_average(b.eps, mesh, b.windows);
    b.p_avg = window_average(p, mesh, b.windows);
    b.chi_a_avg = window_average(chi.chi_a_values(), mesh, b.windows);
    b.chi_b_avg.resize(b.chi_a_avg.size());
    b.psi_avg.resize(b.chi_a_avg.size());
    for (std::size_t w = 0; w < b.chi_a_avg.size(); ++w) {
        b.chi_a_avg[w] = std::clamp(b.chi_a_avg[w], 0.0, 1.0);
        b.chi_b_avg[w] = 1.0 - b.chi_a_avg[w];
        b.psi_avg[w] = b.chi_b_avg[w] - b.chi_a_avg[w];
    }
    return b;
}

inline LimitBundle estimate_limits(const LevelState& s, int window_size) {
    return estimate_limits(s.mesh, s.coeffs, s.u, s.p, s.chi, window_size);
}

struct PartitionMasks {
    double eta = 0.05;
    std::vector<char> omega0;      ///< per element: a = b
    std::vector<char> guard;       ///< per element: excluded from (b-a) divisions
    std::vector<char> pure;        ///< per window: min(chi_a, chi_b) <= eta
    std::vector<char> pure_plus;   ///< per window: psi >= 1 - 2 eta
    std::vector<char> pure_minus;  ///< per window: psi <= -1 + 2 eta
    double omega0_measure = 0.0;
    double guard_measure = 0.0;
};

inline PartitionMasks partition_masks(const LimitBundle& b, const DomainSplit& split, double eta) {
    if (!(eta > 0.0)) throw ConfigError("tolerances.eta must be > 0");
    PartitionMasks m;
    m.eta = eta;
    const std::size_t ne = b.mesh.num_elements();
    m.omega0.assign(ne, 0);
    m.guard.assign(ne, 0);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto kind = split.classify(b.coeffs, e);
        if (kind == DomainSplit::Kind::Omega0) {
            m.omega0[e] = 1;
            m.omega0_measure += b.mesh.measure[e];
        } else if (kind == DomainSplit::Kind::Guard) {
            m.guard[e] = 1;
            m.guard_measure += b.mesh.measure[e];
        }
    }
    const std::size_t nw = b.windows.num_windows();
    m.pure.assign(nw, 0);
    m.pure_plus.assign(nw, 0);
    m.pure_minus.assign(nw, 0);
    for (std::size_t w = 0; w < nw; ++w) {
        m.pure_plus[w] = b.psi_avg[w] >= 1.0 - 2.0 * eta ? 1 : 0;
        m.pure_minus[w] = b.psi_avg[w] <= -1.0 + 2.0 * eta ? 1 : 0;
        m.pure[w] = std::min(b.chi_a_avg[w], b.chi_b_avg[w]) <= eta ? 1 : 0;
    }
    return m;
}

struct GapScalar {
    double second_moment = 0.0;  ///< int_{Omega0} a |eps|^2
    double mean_square = 0.0;    ///< int_{Omega0} a |eps_avg|^2
    double d = 0.0;
};

inline GapScalar gap_d(const LimitBundle& b, const PartitionMasks& masks) {
    GapScalar g;
    for (std::size_t e = 0; e < b.mesh.num_elements(); ++e) {
        if (!masks.omega0[e]) continue;
        const double w = b.mesh.measure[e] * b.coeffs.a[e];
        g.second_moment += w * norm2(b.eps[e]);
        g.mean_square += w * norm2(b.eps_bar(e));
    }
    g.d = g.second_moment - g.mean_square;
    return g;
}

struct PairingRow {
    int level = 0;
    std::vector<double> residual;  ///< per test function
};

struct PairingDiagnostic {
    std::vector<PairingRow> rows;
    std::vector<double> limit_value;  ///< int phi p_avg . eps_avg per test function
    std::vector<double> level_residual;  ///< r_l: max over test functions
    bool increasing = false;             ///< r grew over the last two levels
};

/// |int phi p^l . eps^l - int phi p_avg . eps_avg| for every retained level and bump.
inline PairingDiagnostic pairing_diagnostic(const std::vector<LevelState>& levels, const LimitBundle& b,
                                            const TestFunctionSet& tests, double slack = 1e-10) {
    PairingDiagnostic out;
    const std::size_t nt = tests.bumps.size();
    out.limit_value.assign(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t e = 0; e < b.mesh.num_elements(); ++e)
            out.limit_value[t] += b.mesh.measure[e] * tests.bumps[t](b.mesh.centroid[e], b.mesh.dim) *
                                  dot(b.p_bar(e), b.eps_bar(e));
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const LevelState& s = levels[l];
        PairingRow row;
        row.level = static_cast<int>(l);
        row.residual.assign(nt, 0.0);
        const StrainField eps = symmetrized_gradient(s.u, s.mesh);
        for (std::size_t t = 0; t < nt; ++t) {
            double v = 0.0;
            for (std::size_t e = 0; e < s.mesh.num_elements(); ++e)
                v += s.mesh.measure[e] * tests.bumps[t](s.mesh.centroid[e], s.mesh.dim) * dot(s.p[e], eps[e]);
            row.residual[t] = std::abs(v - out.limit_value[t]);
        }
        out.level_residual.push_back(nt ? *std::max_element(row.residual.begin(), row.residual.end()) : 0.0);
        out.rows.push_back(std::move(row));
    }
    const std::size_t nl = out.level_residual.size();
    if (nl >= 2) out.increasing = out.level_residual[nl - 1] > out.level_residual[nl - 2] + slack;
    return out;
}

} // namespace dwell
