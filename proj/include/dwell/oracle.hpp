#pragma once

/**
 * @file oracle.hpp
 * @brief Independent reference values: the 1D convex envelope of two
 * parabolas, the exact 1D infimum, dense Cholesky solves and exact
 * laminate constructions.
 */

#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"
#include "dwell/subproblem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dwell::oracle {

struct Parabola {
    double k = 1.0;  ///< modulus
    double c = 0.0;  ///< f(xi) = k/2 (xi + c)^2

    [[nodiscard]] double operator()(double xi) const { return 0.5 * k * (xi + c) * (xi + c); }
    [[nodiscard]] double conjugate(double s) const { return s * s / (2.0 * k) - s * c; }
    /// point where the slope equals s
    [[nodiscard]] double touch(double s) const { return s / k - c; }
};

struct EnvelopePiece {
    enum class Kind { Parabola, Affine };
    Kind kind = Kind::Parabola;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    int parabola = 0;     ///< 0 or 1 for parabolic pieces
    double slope = 0.0;   ///< affine pieces
    double intercept = 0.0;
};

/**
 * @brief Convex envelope of min{p0, p1} as the conjugate of max{p0*, p1*}.
 *
 * The conjugates cross at s = 0 and s = 2ab(c-d)/(b-a); between crossings one
 * conjugate dominates, and each crossing slope becomes an affine bridge.
 */
struct EnvelopeDescription {
    Parabola p[2];
    std::vector<double> crossings;                      ///< slopes where the conjugates meet
    std::vector<std::pair<double, double>> slope_range; ///< per piece of the dual
    std::vector<int> dominant;                          ///< which conjugate is larger on each piece
    std::vector<EnvelopePiece> pieces;                  ///< primal description, left to right

    [[nodiscard]] double integrand(double xi) const { return std::min(p[0](xi), p[1](xi)); }

    /// f**(xi) = sup_s (s xi - max(p0*(s), p1*(s))), piece by piece in s.
    [[nodiscard]] double operator()(double xi) const {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dominant.size(); ++i) {
            const Parabola& q = p[dominant[i]];
            const double s = std::clamp(q.k * (xi + q.c), slope_range[i].first, slope_range[i].second);
            best = std::max(best, s * xi - q.conjugate(s));
        }
        return best;
    }
};

inline EnvelopeDescription envelope_1d(double a, double c, double b, double d) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("envelope: moduli a and b must be > 0");
    EnvelopeDescription env;
    env.p[0] = {a, c};
    env.p[1] = {b, d};
    std::vector<double> cr;
    if (c != d) cr.push_back(0.0);
    if (a != b) {
        const double s = 2.0 * a * b * (c - d) / (b - a);
        if (c != d && s != 0.0) cr.push_back(s);
    }
    std::sort(cr.begin(), cr.end());
    env.crossings = cr;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> edges{-inf};
    edges.insert(edges.end(), cr.begin(), cr.end());
    edges.push_back(inf);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = edges[i], hi = edges[i + 1];
        double probe;
        if (std::isinf(lo) && std::isinf(hi))
            probe = 0.0;
        else if (std::isinf(lo))
            probe = hi - 1.0 - std::abs(hi);
        else if (std::isinf(hi))
            probe = lo + 1.0 + std::abs(lo);
        else
            probe = 0.5 * (lo + hi);
        const int dom = env.p[0].conjugate(probe) >= env.p[1].conjugate(probe) ? 0 : 1;
        env.slope_range.emplace_back(lo, hi);
        env.dominant.push_back(dom);
    }
    // primal pieces: dual piece i -> parabola on [touch(lo), touch(hi)]; crossing -> affine bridge
    for (std::size_t i = 0; i < env.dominant.size(); ++i) {
        const Parabola& q = env.p[env.dominant[i]];
        EnvelopePiece piece;
        piece.kind = EnvelopePiece::Kind::Parabola;
        piece.parabola = env.dominant[i];
        piece.lo = std::isinf(env.slope_range[i].first) ? -inf : q.touch(env.slope_range[i].first);
        piece.hi = std::isinf(env.slope_range[i].second) ? inf : q.touch(env.slope_range[i].second);
        env.pieces.push_back(piece);
        if (i + 1 < env.dominant.size()) {
            const double s = env.slope_range[i].second;
            const Parabola& r = env.p[env.dominant[i + 1]];
            EnvelopePiece bridge;
            bridge.kind = EnvelopePiece::Kind::Affine;
            bridge.lo = q.touch(s);
            bridge.hi = r.touch(s);
            bridge.slope = s;
            bridge.intercept = -q.conjugate(s);
            if (bridge.hi > bridge.lo) env.pieces.push_back(bridge);
        }
    }
    return env;
}

/// |Omega| f**(0) for constant coefficients and zero boundary values in 1D.
inline double exact_alpha_1d(double a, double c, double b, double d, double length) {
    return length * envelope_1d(a, c, b, d)(0.0);
}

inline double exact_alpha_1d(const CoefficientSet& k, const StructuredMesh& mesh) {
    if (mesh.dim != 1) throw ConfigError("exact infimum is only available in one dimension");
    for (std::size_t e = 1; e < k.size(); ++e)
        if (k.a[e] != k.a[0] || k.b[e] != k.b[0] || k.C[e].v != k.C[0].v || k.D[e].v != k.D[0].v)
            throw ConfigError("exact infimum requires constant coefficients");
    return exact_alpha_1d(k.a[0], k.C[0].xx(), k.b[0], k.D[0].xx(), mesh.volume());
}

/// Dense Cholesky solve of K x = -load; limited to small problems.
inline DisplacementField dense_solve(const QuadraticProblem& qp, const StructuredMesh& mesh) {
    const int n = qp.K.rows();
    if (n > 2000) throw ConfigError("dense oracle limited to 2000 dof, got " + std::to_string(n));
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int r = 0; r < n; ++r) {
        rhs(r) = -qp.load[r];
        for (int j = qp.K.row_ptr()[r]; j < qp.K.row_ptr()[r + 1]; ++j) K(r, qp.K.cols()[j]) = qp.K.values()[j];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) throw SolverError("dense oracle: matrix is not positive definite", 0.0);
    const Eigen::VectorXd x = llt.solve(rhs);
    return from_dof(std::vector<double>(x.data(), x.data() + n), mesh);
}

struct Laminate {
    DisplacementField u;
    PhaseField chi;
    double energy = 0.0;  ///< exact double-well energy of u (0 when both strains sit at wells)
};

/**
 * @brief Exact layered field: phase a on the first na of every `period`
 * element layers, strain -C there and -D elsewhere.
 *
 * 1D: layers are elements. 2D: layers are element rows (normal e2) when
 * (C-D)_xx = 0 or element columns (normal e1) when (C-D)_yy = 0.
 * Boundary values are whatever the sawtooth produces.
 */
inline Laminate laminate(const StructuredMesh& mesh, const SymMat& C, const SymMat& D, int na, int period,
                         double a = 1.0, double b = 1.0) {
    if (period < 1 || na < 0 || na > period) throw ConfigError("laminate: need 0 <= na <= period, period >= 1");
    const SymMat M = C - D;
    int axis = 0;
    std::array<double, 2> eta{M.xx(), 0.0};
    if (mesh.dim == 2) {
        if (M.xx() == 0.0) {
            axis = 1;
            eta = {2.0 * M.xy(), M.yy()};
        } else if (M.yy() == 0.0) {
            axis = 0;
            eta = {M.xx(), 2.0 * M.xy()};
        } else {
            throw ConfigError("laminate: wells are not compatible along a grid axis");
        }
    }
    if (mesh.counts[axis] % period != 0) throw ConfigError("laminate: period must divide the layer count");
    const double t = static_cast<double>(na) / period;
    const SymMat mean = -(t * C + (1.0 - t) * D);
    const double h = mesh.spacing(axis);

    Laminate lam;
    lam.u = DisplacementField(mesh);
    lam.chi = PhaseField(mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const int layer = mesh.cell_of(static_cast<int>(e))[axis];
        lam.chi.chi_a[e] = (layer % period) < na ? 1 : 0;
    }
    // u = mean x + eta g(x_axis), g' = -(1-t) on a-layers and t on b-layers
    std::vector<double> g(static_cast<std::size_t>(mesh.counts[axis]) + 1, 0.0);
    for (int l = 0; l < mesh.counts[axis]; ++l) g[l + 1] = g[l] + h * ((l % period) < na ? -(1.0 - t) : t);
    const int stride = mesh.dim == 1 ? static_cast<int>(mesh.num_nodes()) : mesh.counts[0] + 1;
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        const int i = static_cast<int>(n) % stride;
        const int j = static_cast<int>(n) / stride;
        const double gv = g[axis == 0 ? i : j];
        const auto& x = mesh.nodes[n];
        if (mesh.dim == 1) {
            lam.u.at(n, 0) = mean.xx() * x[0] + eta[0] * gv;
        } else {
            lam.u.at(n, 0) = mean.xx() * x[0] + mean.xy() * x[1] + eta[0] * gv;
            lam.u.at(n, 1) = mean.xy() * x[0] + mean.yy() * x[1] + eta[1] * gv;
        }
    }
    CoefficientSet k = CoefficientSet::uniform(mesh, a, b, C, D);
    lam.energy = double_well_energy(lam.u, k, mesh);
    return lam;
}

} // namespace dwell::oracle
