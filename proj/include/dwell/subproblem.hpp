#pragma once

/**
 * @file subproblem.hpp
 * @brief The convex problem obtained by freezing the phase indicator:
 *
 *   J_chi(v) = int [ m/2 |eps(v)|^2 + E . eps(v) + B/2 ],   E = A+ + psi A-,
 *
 * its Jacobi-PCG solution over interior dof, the dual field
 * p = m eps(u) + E, the dual objective and the algebraic identities
 * relating primal and dual values at the optimum.
 */

#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"
#include "dwell/sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

namespace dwell {

struct QuadraticProblem {
    CsrMatrix K;                 ///< int m eps(v) . eps(w), interior dof
    std::vector<double> load;    ///< int E . eps(phi_i)
    double constant = 0.0;       ///< 1/2 int B
    std::vector<double> m;       ///< per element
    std::vector<SymMat> E;       ///< per element tilt

    /// 1/2 x.Kx + load.x + constant
    [[nodiscard]] double energy(const std::vector<double>& x) const {
        std::vector<double> kx;
        K.multiply(x, kx);
        return 0.5 * vdot(x, kx) + vdot(load, x) + constant;
    }
};

inline QuadraticProblem assemble(const PhaseField& chi, const CoefficientSet& k, const StructuredMesh& mesh) {
    DWELL_REQUIRE(chi.size() == mesh.num_elements() && k.size() == mesh.num_elements(),
                  "assemble: phase field or coefficients do not conform to mesh");
    QuadraticProblem qp;
    qp.m = m_field(chi, k);
    qp.E.resize(mesh.num_elements());
    qp.load.assign(static_cast<std::size_t>(mesh.ndof), 0.0);
    std::vector<Triplet> trip;
    const int npe = mesh.nodes_per_element();
    trip.reserve(mesh.num_elements() * static_cast<std::size_t>(npe * npe * mesh.dim * mesh.dim));
    double c = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double psi = chi.psi(e);
        qp.E[e] = tilt(k, e, psi);
        c += 0.5 * mesh.measure[e] * B_value(k, e, psi);
        const auto& el = mesh.elements[e];
        for (int a = 0; a < npe; ++a) {
            const int da = mesh.node_dof[el[a]];
            if (da < 0) continue;
            for (int ca = 0; ca < mesh.dim; ++ca) {
                const SymMat sa = basis_strain(mesh, e, a, ca);
                qp.load[da + ca] += mesh.measure[e] * dot(qp.E[e], sa);
                for (int b = 0; b < npe; ++b) {
                    const int db = mesh.node_dof[el[b]];
                    if (db < 0) continue;
                    for (int cb = 0; cb < mesh.dim; ++cb) {
                        const SymMat sb = basis_strain(mesh, e, b, cb);
                        trip.push_back({da + ca, db + cb, mesh.measure[e] * qp.m[e] * dot(sa, sb)});
                    }
                }
            }
        }
    }
    qp.constant = c;
    qp.K = CsrMatrix(mesh.ndof, std::move(trip));
    return qp;
}

/// J_chi(u) by elementwise quadrature of chi_a a/2|eps+C|^2 + chi_b b/2|eps+D|^2.
inline double mixture_energy(const DisplacementField& u, const PhaseField& chi, const CoefficientSet& k,
                             const StructuredMesh& mesh) {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const SymMat eps = element_strain(u, mesh, e);
        s += mesh.measure[e] * (chi.chi_a[e] ? phase_a_energy(k, e, eps) : phase_b_energy(k, e, eps));
    }
    return s;
}

/// The nonconvex functional J(u) = int h(x, eps(u)).
inline double double_well_energy(const DisplacementField& u, const CoefficientSet& k, const StructuredMesh& mesh) {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) s += mesh.measure[e] * h_density(k, e, element_strain(u, mesh, e));
    return s;
}

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    double alpha = 0.0;
    double seconds = 0.0;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter_factor = 20;  ///< iteration cap = factor * dof
};

/**
 * @brief Minimizes the quadratic problem: K u = -load.
 *
 * After CG the iterate is rescaled along its own ray to the exact 1D minimizer,
 * which makes u . (K u + load) vanish up to rounding when that keeps the
 * residual within tolerance.
 */
inline std::pair<DisplacementField, SolveReport> solve(const QuadraticProblem& qp, const StructuredMesh& mesh,
                                                       const SolveOptions& opt = {},
                                                       std::vector<double> initial = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = qp.load.size();
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -qp.load[i];
    std::vector<double> x = initial.size() == n ? std::move(initial) : std::vector<double>(n, 0.0);
    SolveReport rep;
    const int cap = std::max(1, opt.max_iter_factor * static_cast<int>(std::max<std::size_t>(n, 1)));
    const CgResult cg = pcg(qp.K, rhs, x, opt.tol, cap);
    rep.iterations = cg.iterations;
    rep.relative_residual = cg.relative_residual;

    std::vector<double> kx;
    qp.K.multiply(x, kx);
    const double xkx = vdot(x, kx);
    if (xkx > 0.0) {
        const double s = -vdot(qp.load, x) / xkx;
        std::vector<double> y(x);
        for (auto& v : y) v *= s;
        std::vector<double> r;
        qp.K.multiply(y, r);
        for (std::size_t i = 0; i < n; ++i) r[i] -= rhs[i];
        const double bn = vnorm(rhs);
        const double rel = bn > 0.0 ? vnorm(r) / bn : 0.0;
        if (rel <= opt.tol) {
            x = std::move(y);
            rep.relative_residual = rel;
        }
    }
    rep.alpha = qp.energy(x);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {from_dof(x, mesh), rep};
}

/// p = m eps(u) + E.
inline DualField dual_variable(const DisplacementField& u, const PhaseField& chi, const CoefficientSet& k,
                               const StructuredMesh& mesh) {
    DualField p(mesh);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double m = chi.a(e) * k.a[e] + chi.b(e) * k.b[e];
        p[e] = m * element_strain(u, mesh, e) + tilt(k, e, chi.psi(e));
    }
    return p;
}

/// I_chi(q) = int [ |q - E|^2/(2m) - B/2 ].
inline double dual_objective(const DualField& q, const PhaseField& chi, const CoefficientSet& k,
                             const StructuredMesh& mesh) {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double psi = chi.psi(e);
        const double m = chi.a(e) * k.a[e] + chi.b(e) * k.b[e];
        s += mesh.measure[e] * (conjugate_density(q[e], m, tilt(k, e, psi)) - 0.5 * B_value(k, e, psi));
    }
    return s;
}

/// L* q tested against every interior nodal basis field, by direct elementwise pairing.
inline std::vector<double> adjoint_action(const DualField& q, const StructuredMesh& mesh) {
    std::vector<double> r(static_cast<std::size_t>(mesh.ndof), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        for (int a = 0; a < mesh.nodes_per_element(); ++a) {
            const int d = mesh.node_dof[el[a]];
            if (d < 0) continue;
            for (int c = 0; c < mesh.dim; ++c) r[d + c] += mesh.measure[e] * dot(q[e], basis_strain(mesh, e, a, c));
        }
    }
    return r;
}

/// ||eps(phi_i)||_L2 for every interior basis field.
inline std::vector<double> basis_strain_norms(const StructuredMesh& mesh) {
    std::vector<double> s(static_cast<std::size_t>(mesh.ndof), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        for (int a = 0; a < mesh.nodes_per_element(); ++a) {
            const int d = mesh.node_dof[el[a]];
            if (d < 0) continue;
            for (int c = 0; c < mesh.dim; ++c) s[d + c] += mesh.measure[e] * norm2(basis_strain(mesh, e, a, c));
        }
    }
    for (auto& v : s) v = std::sqrt(v);
    return s;
}

/**
 * Scale used to normalize pairings of p: max(||p||, ||E||). Near p = 0 (all
 * strains sitting in their wells) ||p|| alone only measures rounding.
 */
inline double dual_scale(const DualField& p, const std::vector<SymMat>& E, const StructuredMesh& mesh) {
    double e2 = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) e2 += mesh.measure[e] * norm2(E[e]);
    return std::max(l2_norm(p, mesh), std::sqrt(e2));
}

/// max_i |<L* p, phi_i>| / (scale ||eps(phi_i)||)
inline double kernel_residual(const DualField& p, double scale, const StructuredMesh& mesh) {
    const auto r = adjoint_action(p, mesh);
    const auto s = basis_strain_norms(mesh);
    double worst = 0.0;
    if (scale <= 0.0) return 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (s[i] > 0.0) worst = std::max(worst, std::abs(r[i]) / (scale * s[i]));
    return worst;
}

struct DualityReport {
    double alpha = 0.0;           ///< J_chi(u)
    double beta = 0.0;            ///< I_chi(p)
    double gap = 0.0;             ///< alpha + beta
    double kernel_residual = 0.0; ///< normalized L* p residual
    double orthogonality = 0.0;   ///< |int p . eps(u)| / (scale ||eps(u)||)
    double scale = 0.0;
};

inline DualityReport duality_report(const DisplacementField& u, const DualField& p, const PhaseField& chi,
                                    const CoefficientSet& k, const StructuredMesh& mesh, const QuadraticProblem& qp) {
    DualityReport r;
    r.alpha = mixture_energy(u, chi, k, mesh);
    r.beta = dual_objective(p, chi, k, mesh);
    r.gap = r.alpha + r.beta;
    r.scale = dual_scale(p, qp.E, mesh);
    r.kernel_residual = kernel_residual(p, r.scale, mesh);
    const double eps_norm = l2_norm(symmetrized_gradient(u, mesh), mesh);
    const double denom = r.scale * eps_norm;
    r.orthogonality = denom > 0.0 ? std::abs(pairing(p, u, mesh)) / denom : 0.0;
    return r;
}

/// Several algebraically equivalent expressions of the optimal value of one subproblem.
struct AlphaRepresentations {
    double direct = 0.0;          ///< J_chi(u)
    double half_neg_energy = 0.0; ///< 1/2 int [-m|eps|^2 + B]
    double half_tilt = 0.0;       ///< 1/2 int [E . eps + B]
    double dual_form = 0.0;       ///< 1/2 int [(1/m) E . p - (1/m)|E|^2 + B]
    double split_primal = 0.0;    ///< (b-a)-split form with the Omega0 p . eps term
    double split_dual = 0.0;      ///< (b-a)-split form with the Omega0 |p|^2/a term
    double energy_identity_residual = 0.0;  ///< relative residual of int[m|eps|^2 + |p|^2/m] = int |E|^2/m
    double guard_measure = 0.0;

    [[nodiscard]] double max_deviation() const {
        double w = 0.0;
        for (double v : {half_neg_energy, half_tilt, dual_form, split_primal, split_dual})
            w = std::max(w, std::abs(v - direct));
        return w;
    }
};

inline AlphaRepresentations alpha_representations(const DisplacementField& u, const DualField& p,
                                                  const PhaseField& chi, const CoefficientSet& k,
                                                  const StructuredMesh& mesh, const DomainSplit& split) {
    AlphaRepresentations r;
    r.direct = mixture_energy(u, chi, k, mesh);
    double lhs_214 = 0.0, rhs_214 = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double w = mesh.measure[e];
        const double psi = chi.psi(e);
        const double m = chi.a(e) * k.a[e] + chi.b(e) * k.b[e];
        const SymMat eps = element_strain(u, mesh, e);
        const SymMat E = tilt(k, e, psi);
        const double B = B_value(k, e, psi);
        r.half_neg_energy += 0.5 * w * (-m * norm2(eps) + B);
        r.half_tilt += 0.5 * w * (dot(E, eps) + B);
        r.dual_form += 0.5 * w * (dot(E, p[e]) / m - norm2(E) / m + B);
        lhs_214 += w * (m * norm2(eps) + norm2(p[e]) / m);
        rhs_214 += w * norm2(E) / m;
        switch (split.classify(k, e)) {
        case DomainSplit::Kind::Split: {
            const double br = 0.5 * w * split_bracket(k, e, eps, p[e], psi);
            r.split_primal += br;
            r.split_dual += br;
            break;
        }
        case DomainSplit::Kind::Guard: {
            const double br = 0.5 * w * (dot(E, eps) + B);
            r.split_primal += br;
            r.split_dual += br;
            r.guard_measure += w;
            break;
        }
        case DomainSplit::Kind::Omega0: {
            const double a = k.a[e];
            r.split_primal += 0.5 * w * (-a * norm2(eps) + B + dot(p[e], eps));
            r.split_dual += 0.5 * w * (norm2(p[e]) / a - dot(p[e], eps));
            break;
        }
        }
    }
    r.energy_identity_residual = std::abs(lhs_214 - rhs_214) / std::max(rhs_214, 1e-300);
    if (rhs_214 == 0.0) r.energy_identity_residual = std::abs(lhs_214);
    return r;
}

} // namespace dwell
