#pragma once

/**
 * @file phase.hpp
 * @brief Pointwise algebra of the two quadratic phase energies
 *   phi_a(xi) = a/2 |xi + C|^2,  phi_b(xi) = b/2 |xi + D|^2
 * and of the mixture quantities obtained once a phase indicator is fixed.
 */

#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/sym.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace dwell {

/// Per-element coefficients; piecewise constant.
struct CoefficientSet {
    std::vector<double> a, b;
    std::vector<SymMat> C, D;
    double delta = 0.0;  ///< positive lower bound for a and b

    [[nodiscard]] std::size_t size() const noexcept { return a.size(); }

    static CoefficientSet uniform(const StructuredMesh& m, double a, double b, const SymMat& C, const SymMat& D) {
        CoefficientSet c;
        const std::size_t n = m.num_elements();
        c.a.assign(n, a);
        c.b.assign(n, b);
        c.C.assign(n, C);
        c.D.assign(n, D);
        c.delta = std::min(a, b);
        c.validate();
        return c;
    }

    void validate() const {
        const std::size_t n = a.size();
        if (b.size() != n || C.size() != n || D.size() != n)
            throw ConfigError("coefficient arrays have inconsistent sizes");
        if (!(delta > 0.0)) throw ConfigError("coefficients: lower bound delta must be > 0");
        for (std::size_t e = 0; e < n; ++e) {
            if (!(a[e] >= delta) || !(b[e] >= delta))
                throw ConfigError("coefficients: a and b must be >= delta > 0 on every element");
            for (std::size_t i = 0; i < 3; ++i)
                if (!std::isfinite(C[e].v[i]) || !std::isfinite(D[e].v[i]))
                    throw ConfigError("coefficients: C and D must be finite");
        }
    }

    [[nodiscard]] double max_a() const { return *std::max_element(a.begin(), a.end()); }
    [[nodiscard]] double max_b() const { return *std::max_element(b.begin(), b.end()); }
};

/// Derived per-element constants of the mixture representation.
struct PhaseConstants {
    SymMat A_plus, A_minus;     ///< (aC+bD)/2, (bD-aC)/2
    double m_bar = 0.0;         ///< (a+b)/2
    double m_under = 0.0;       ///< (b-a)/2
    double m_bar_nat = 0.0;     ///< (1/a+1/b)/2
    double m_under_nat = 0.0;   ///< (1/b-1/a)/2
};

inline PhaseConstants phase_constants(const CoefficientSet& k, std::size_t e) {
    const double a = k.a[e], b = k.b[e];
    PhaseConstants pc;
    pc.A_plus = 0.5 * (a * k.C[e] + b * k.D[e]);
    pc.A_minus = 0.5 * (b * k.D[e] - a * k.C[e]);
    pc.m_bar = 0.5 * (a + b);
    pc.m_under = 0.5 * (b - a);
    pc.m_bar_nat = 0.5 * (1.0 / a + 1.0 / b);
    pc.m_under_nat = 0.5 * (1.0 / b - 1.0 / a);
    return pc;
}

/**
 * @brief Binary phase indicator per element.
 *
 * Only chi_a is stored; chi_b = 1 - chi_a and psi = chi_b - chi_a are derived,
 * so chi_a + chi_b = 1 and psi^2 = 1 hold by construction.
 */
struct PhaseField {
    std::vector<std::uint8_t> chi_a;

    PhaseField() = default;
    explicit PhaseField(std::size_t n, bool phase_a = true) : chi_a(n, phase_a ? 1 : 0) {}

    [[nodiscard]] std::size_t size() const noexcept { return chi_a.size(); }
    [[nodiscard]] double a(std::size_t e) const { return chi_a[e] ? 1.0 : 0.0; }
    [[nodiscard]] double b(std::size_t e) const { return chi_a[e] ? 0.0 : 1.0; }
    [[nodiscard]] double psi(std::size_t e) const { return chi_a[e] ? -1.0 : 1.0; }

    [[nodiscard]] std::vector<double> psi_values() const {
        std::vector<double> out(size());
        for (std::size_t e = 0; e < size(); ++e) out[e] = psi(e);
        return out;
    }
    [[nodiscard]] std::vector<double> chi_a_values() const {
        std::vector<double> out(size());
        for (std::size_t e = 0; e < size(); ++e) out[e] = a(e);
        return out;
    }

    friend bool operator==(const PhaseField&, const PhaseField&) = default;
};

inline double phase_a_energy(const CoefficientSet& k, std::size_t e, const SymMat& xi) {
    return 0.5 * k.a[e] * norm2(xi + k.C[e]);
}

inline double phase_b_energy(const CoefficientSet& k, std::size_t e, const SymMat& xi) {
    return 0.5 * k.b[e] * norm2(xi + k.D[e]);
}

/// Double-well density h(x, xi) = min of the two phase energies.
inline double h_density(const CoefficientSet& k, std::size_t e, const SymMat& xi) {
    return std::min(phase_a_energy(k, e, xi), phase_b_energy(k, e, xi));
}

/// m = chi_a a + chi_b b.
inline std::vector<double> m_field(const PhaseField& chi, const CoefficientSet& k) {
    DWELL_REQUIRE(chi.size() == k.size(), "m_field: phase field does not conform");
    std::vector<double> m(chi.size());
    for (std::size_t e = 0; e < chi.size(); ++e) m[e] = chi.a(e) * k.a[e] + chi.b(e) * k.b[e];
    return m;
}

/// Same quantity through the decomposition m = m_bar + psi m_under.
inline std::vector<double> m_field_decomposed(const PhaseField& chi, const CoefficientSet& k) {
    std::vector<double> m(chi.size());
    for (std::size_t e = 0; e < chi.size(); ++e) {
        const auto pc = phase_constants(k, e);
        m[e] = pc.m_bar + chi.psi(e) * pc.m_under;
    }
    return m;
}

/// |1/m - (m_bar_nat + m_under_nat psi)| per element.
inline std::vector<double> reciprocal_identity(const PhaseField& chi, const CoefficientSet& k) {
    const auto m = m_field(chi, k);
    std::vector<double> r(chi.size());
    for (std::size_t e = 0; e < chi.size(); ++e) {
        const auto pc = phase_constants(k, e);
        r[e] = std::abs(1.0 / m[e] - (pc.m_bar_nat + pc.m_under_nat * chi.psi(e)));
    }
    return r;
}

/// B(psi) = (a|C|^2 + b|D|^2)/2 + psi (b|D|^2 - a|C|^2)/2; psi may be a weak limit in [-1, 1].
inline double B_value(const CoefficientSet& k, std::size_t e, double psi) {
    const double ac = k.a[e] * norm2(k.C[e]);
    const double bd = k.b[e] * norm2(k.D[e]);
    return 0.5 * (ac + bd) + 0.5 * psi * (bd - ac);
}

inline std::vector<double> B_field(const std::vector<double>& psi, const CoefficientSet& k) {
    DWELL_REQUIRE(psi.size() == k.size(), "B_field: psi does not conform");
    std::vector<double> out(psi.size());
    for (std::size_t e = 0; e < psi.size(); ++e) out[e] = B_value(k, e, psi[e]);
    return out;
}

/// Tilt A+ + psi A- of the mixture energy (equals chi_a aC + chi_b bD for binary psi).
inline SymMat tilt(const CoefficientSet& k, std::size_t e, double psi) {
    const auto pc = phase_constants(k, e);
    return pc.A_plus + psi * pc.A_minus;
}

/// phi(xi) = m/2 |xi|^2 + E . xi
inline double quadratic_density(const SymMat& xi, double m, const SymMat& E) {
    return 0.5 * m * norm2(xi) + dot(E, xi);
}

/// Fenchel conjugate of quadratic_density: |p - E|^2 / (2m).
inline double conjugate_density(const SymMat& p, double m, const SymMat& E) {
    DWELL_REQUIRE(m > 0.0, "conjugate_density: modulus must be positive");
    return norm2(p - E) / (2.0 * m);
}


/**
 * @brief Element classification for formulas that divide by (b - a).
 *
 * Omega0: |a-b| <= tol_eq. Guard: tol_eq < |a-b| < guard (division excluded,
 * measure reported). Split: the (b-a) form is evaluated.
 */
struct DomainSplit {
    enum class Kind { Omega0, Guard, Split };

    double tol_eq = 0.0;
    double guard = 0.0;

    static DomainSplit from(const CoefficientSet& k, double tol_eq_rel = 1e-12, double guard_rel = 1e-8) {
        const double scale = k.max_a() + k.max_b();
        return {tol_eq_rel * scale, guard_rel * scale};
    }

    [[nodiscard]] Kind classify(const CoefficientSet& k, std::size_t e) const {
        const double gap = std::abs(k.a[e] - k.b[e]);
        if (gap <= tol_eq) return Kind::Omega0;
        if (gap < guard) return Kind::Guard;
        return Kind::Split;
    }
    [[nodiscard]] bool in_omega0(const CoefficientSet& k, std::size_t e) const {
        return classify(k, e) == Kind::Omega0;
    }
};

/**
 * Integrand of the off-Omega0 term:
 *   ab(C-D)/(b-a) . eps + (bD-aC)/(b-a) . p + ab(|C|^2-|D|^2)/(2(b-a)) - psi ab|C-D|^2/(2(b-a)).
 * Requires b != a.
 */
inline double split_bracket(const CoefficientSet& k, std::size_t e, const SymMat& eps, const SymMat& p,
                            double psi) {
    const double a = k.a[e], b = k.b[e];
    const SymMat& C = k.C[e];
    const SymMat& D = k.D[e];
    const double inv = 1.0 / (b - a);
    return a * b * inv * dot(C - D, eps) + inv * dot(b * D - a * C, p) +
           0.5 * a * b * inv * (norm2(C) - norm2(D)) - psi * 0.5 * a * b * inv * norm2(C - D);
}

} // namespace dwell
