#pragma once

/**
 * @file young.hpp
 * @brief Per-window empirical Young measures of the finest-level strains and
 * the checks built on them: energy representation, second moments, Dirac
 * property on pure windows and the two-point variance identity.
 */

#include "dwell/limits.hpp"
#include "dwell/phase.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dwell {

struct Atom {
    double weight = 0.0;
    SymMat lambda;
    double a = 0.0;  ///< modulus used for the a-weighted second moment
    int element = -1;
};

struct WindowMeasure {
    int window = 0;
    double measure = 0.0;
    std::vector<Atom> atoms;
    double weight_a = 0.0, weight_b = 0.0;  ///< phase-split weights
    SymMat first_moment;
    double second_moment = 0.0;  ///< sum w a |lambda|^2
    double variance = 0.0;       ///< sum w |lambda - mean|^2
    double h_moment = 0.0;       ///< sum w h(lambda)
    bool uniform_coefficients = true;
};

inline std::vector<WindowMeasure> estimate_ym(const LimitBundle& b) {
    const auto& mesh = b.mesh;
    const auto& k = b.coeffs;
    std::vector<WindowMeasure> out(b.windows.num_windows());
    for (std::size_t w = 0; w < out.size(); ++w) {
        WindowMeasure& m = out[w];
        m.window = static_cast<int>(w);
        m.measure = b.windows.measure[w];
        m.first_moment = SymMat(mesh.dim);
        const auto& members = b.windows.members[w];
        const int e0 = members.front();
        for (int e : members) {
            Atom at;
            at.weight = mesh.measure[e] / m.measure;
            at.lambda = b.eps[e];
            at.a = k.a[e];
            at.element = e;
            m.atoms.push_back(at);
            m.first_moment += at.weight * at.lambda;
            m.second_moment += at.weight * at.a * norm2(at.lambda);
            m.h_moment += at.weight * h_density(k, e, at.lambda);
            if (b.chi.chi_a[e])
                m.weight_a += at.weight;
            else
                m.weight_b += at.weight;
            if (k.a[e] != k.a[e0] || k.b[e] != k.b[e0] || !(k.C[e].v == k.C[e0].v) || !(k.D[e].v == k.D[e0].v))
                m.uniform_coefficients = false;
        }
        for (const auto& at : m.atoms) m.variance += at.weight * norm2(at.lambda - m.first_moment);
    }
    return out;
}

/// sum_w |w| int h dnu_w - alpha.
inline double ym_energy_residual(const std::vector<WindowMeasure>& ms, double alpha) {
    double s = 0.0;
    for (const auto& m : ms) s += m.measure * m.h_moment;
    return std::abs(s - alpha);
}

struct SecondMomentRecord {
    double second_moment = 0.0;  ///< int_{Omega0} int a |lambda|^2 dnu
    double mean_square = 0.0;    ///< int_{Omega0} a |eps_avg|^2
    double difference = 0.0;
    double d = 0.0;
    double mismatch = 0.0;       ///< |difference - d|
};

/// Same integrals as the gap scalar, summed atom by atom.
inline SecondMomentRecord second_moment_check(const std::vector<WindowMeasure>& ms, const LimitBundle& b,
                                              const PartitionMasks& masks, double d) {
    SecondMomentRecord r;
    for (const auto& m : ms) {
        for (const auto& at : m.atoms) {
            if (!masks.omega0[at.element]) continue;
            const double w = at.weight * m.measure;
            r.second_moment += w * at.a * norm2(at.lambda);
            r.mean_square += w * at.a * norm2(b.eps_bar(at.element));
        }
    }
    r.difference = r.second_moment - r.mean_square;
    r.d = d;
    r.mismatch = std::abs(r.difference - d);
    return r;
}

struct DiracReport {
    double threshold = 0.0;
    int checked = 0;
    std::vector<int> failures;
    double max_variance = 0.0;
    [[nodiscard]] bool pass() const { return failures.empty(); }
};

/// Default threshold 1e-6 (1 + largest window second moment).
inline double default_dirac_tol(const std::vector<WindowMeasure>& ms) {
    double mx = 0.0;
    for (const auto& m : ms) mx = std::max(mx, m.second_moment);
    return 1e-6 * (1.0 + mx);
}

inline DiracReport dirac_check(const std::vector<WindowMeasure>& ms, const std::vector<char>& pure, double tol) {
    DiracReport r;
    r.threshold = tol;
    for (const auto& m : ms) {
        if (!pure[m.window]) continue;
        ++r.checked;
        r.max_variance = std::max(r.max_variance, m.variance);
        if (m.variance > tol) r.failures.push_back(m.window);
    }
    return r;
}

struct VarianceIdentity {
    int checked = 0;
    int failed = 0;
    double worst_relative = 0.0;
};

/**
 * Windows whose atoms all sit within dist_tol of a well and whose coefficients
 * are uniform: second moment minus a|mean|^2 against a chi_a chi_b |C-D|^2.
 * Windows where the expected value vanishes are compared absolutely.
 */
inline VarianceIdentity variance_identity(const std::vector<WindowMeasure>& ms, const CoefficientSet& k,
                                          double dist_rel = 1e-3, double rel_tol = 0.05) {
    VarianceIdentity r;
    for (const auto& m : ms) {
        if (!m.uniform_coefficients) continue;
        const int e0 = m.atoms.front().element;
        const SymMat wa = -k.C[e0], wb = -k.D[e0];
        const double cd = norm(k.C[e0] - k.D[e0]);
        const double dist_tol = dist_rel * (1.0 + cd);
        bool at_wells = true;
        for (const auto& at : m.atoms)
            at_wells = at_wells && std::min(norm(at.lambda - wa), norm(at.lambda - wb)) <= dist_tol;
        if (!at_wells) continue;
        const double a = k.a[e0];
        const double gap = m.second_moment - a * norm2(m.first_moment);
        const double expected = a * m.weight_a * m.weight_b * cd * cd;
        const double scale = std::max(expected, a * cd * cd * 1e-3 + 1e-12);
        const double rel = std::abs(gap - expected) / scale;
        ++r.checked;
        r.worst_relative = std::max(r.worst_relative, rel);
        if (rel > rel_tol) ++r.failed;
    }
    return r;
}

} // namespace dwell
