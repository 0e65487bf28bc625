#pragma once

/**
 * @file relaxation.hpp
 * @brief Closed-form expressions of the infimum in terms of the weak limits
 * (u, p, chi_a, chi_b) and the second-moment gap d, the theta estimate under
 * both coefficient conventions, the two-sided inequality chain and a dual
 * lower bound obtained from constant stress fields.
 */

#include "dwell/limits.hpp"
#include "dwell/phase.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace dwell {

/// Integral over the split region of the (b-a) bracket at the limit fields; guard elements skipped.
inline double eval_I(const LimitBundle& b, const PartitionMasks& masks) {
    double s = 0.0;
    for (std::size_t e = 0; e < b.mesh.num_elements(); ++e) {
        if (masks.omega0[e] || masks.guard[e]) continue;
        s += b.mesh.measure[e] * split_bracket(b.coeffs, e, b.eps_bar(e), b.p_bar(e), b.psi_bar(e));
    }
    return s;
}

/// Integrals over Omega0 shared by all formulas.
struct Omega0Terms {
    double tilt = 0.0;        ///< int (A+ + psi A-) . eps
    double B = 0.0;           ///< int B(psi)
    double energy = 0.0;      ///< int a |eps|^2
    double pairing = 0.0;     ///< int p . eps
    double dual_energy = 0.0; ///< int |p|^2 / a
    double den = 0.0;         ///< int chi_a chi_b a |C-D|^2
    double scale = 0.0;       ///< int a |C-D|^2
    double tilt_square = 0.0; ///< int (|A+|^2 + |A-|^2 + 2 psi A+ . A-)/a
};

inline Omega0Terms omega0_terms(const LimitBundle& b, const PartitionMasks& masks) {
    Omega0Terms t;
    for (std::size_t e = 0; e < b.mesh.num_elements(); ++e) {
        if (!masks.omega0[e]) continue;
        const double w = b.mesh.measure[e];
        const double a = b.coeffs.a[e];
        const double psi = b.psi_bar(e);
        const SymMat& eps = b.eps_bar(e);
        const SymMat& p = b.p_bar(e);
        const auto pc = phase_constants(b.coeffs, e);
        const double cd = norm2(b.coeffs.C[e] - b.coeffs.D[e]);
        t.tilt += w * dot(pc.A_plus + psi * pc.A_minus, eps);
        t.B += w * B_value(b.coeffs, e, psi);
        t.energy += w * a * norm2(eps);
        t.pairing += w * dot(p, eps);
        t.dual_energy += w * norm2(p) / a;
        t.den += w * b.chi_a_bar(e) * b.chi_b_bar(e) * a * cd;
        t.scale += w * a * cd;
        t.tilt_square += w * (norm2(pc.A_plus) + norm2(pc.A_minus) + 2.0 * psi * dot(pc.A_plus, pc.A_minus)) / a;
    }
    return t;
}

struct ThetaEstimate {
    double den = 0.0;
    double tol_den = 0.0;
    bool zero_branch = false;
    double coeff1 = 0.0;  ///< d / den
    double printed = 0.0;   ///< 2 d / den
    bool coeff1_in_range = true;
    bool printed_in_range = true;
};

inline ThetaEstimate theta_estimate(double d, double den, double tol_den, double slack = 0.02) {
    ThetaEstimate th;
    th.den = den;
    th.tol_den = tol_den;
    th.zero_branch = den <= tol_den;
    if (!th.zero_branch) {
        th.coeff1 = d / den;
        th.printed = 2.0 * d / den;
    }
    const auto in_range = [slack](double v) { return v >= -slack && v <= 1.0 + slack; };
    th.coeff1_in_range = in_range(th.coeff1);
    th.printed_in_range = in_range(th.printed);
    return th;
}

enum class Convention { Coefficient1, Printed };

inline std::string to_string(Convention c) { return c == Convention::Coefficient1 ? "coefficient_1" : "printed"; }

/// Printed theta-term weight on den for the literal theta of a convention.
inline double theta_literal(const ThetaEstimate& th, Convention c) {
    return c == Convention::Coefficient1 ? 2.0 * th.coeff1 : th.printed;
}

/// Four equivalent closed forms of the infimum, each as printed and halved.
struct FormulaSet {
    double tilt_form = 0.0;    ///< Omega0 tilt bracket + I - theta/2 den
    double energy_form = 0.0;  ///< Omega0 (-a|eps|^2 + B + p.eps) + I - theta/2 den
    double dual_form = 0.0;    ///< Omega0 (|p|^2/a - p.eps) + I + (2-theta)/2 den
    double mean_form = 0.0;    ///< average of the previous two
    double tilt_form_half = 0.0, energy_form_half = 0.0, dual_form_half = 0.0, mean_form_half = 0.0;

    [[nodiscard]] std::array<double, 4> halved() const {
        return {tilt_form_half, energy_form_half, dual_form_half, mean_form_half};
    }
    [[nodiscard]] double spread_halved() const {
        const auto v = halved();
        return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
    }
};

inline FormulaSet eval_formulas(const Omega0Terms& o, double I, double theta) {
    FormulaSet f;
    f.tilt_form = o.tilt + o.B + I - 0.5 * theta * o.den;
    f.energy_form = -o.energy + o.B + o.pairing + I - 0.5 * theta * o.den;
    f.dual_form = o.dual_energy - o.pairing + I + 0.5 * (2.0 - theta) * o.den;
    f.mean_form = 0.5 * (o.dual_energy - o.energy + o.B) + I + 0.5 * (1.0 - theta) * o.den;
    f.tilt_form_half = 0.5 * f.tilt_form;
    f.energy_form_half = 0.5 * f.energy_form;
    f.dual_form_half = 0.5 * f.dual_form;
    f.mean_form_half = 0.5 * f.mean_form;
    return f;
}

/// Two-sided bound on alpha from the limit passage; middle term in printed and half-coefficient form.
struct InequalityChain {
    double left = 0.0, middle = 0.0, right = 0.0;
    double violation = 0.0;  ///< max(0, middle - left) + max(0, right - middle)
};

inline InequalityChain eval_chain(const Omega0Terms& o, double I, double alpha, bool half) {
    InequalityChain c;
    c.left = -0.5 * o.energy + o.pairing;
    const double w = half ? 0.5 : 1.0;
    c.middle = alpha + 0.5 * o.pairing - w * I - w * o.B;
    c.right = 0.5 * (o.dual_energy - o.tilt_square);
    c.violation = std::max(0.0, c.middle - c.left) + std::max(0.0, c.right - c.middle);
    return c;
}

struct LowerBound {
    double value = 0.0;
    SymMat q;
    int evaluations = 0;
};

/**
 * @brief max over constant q of -int max{|q|^2/(2a) - q.C, |q|^2/(2b) - q.D}.
 *
 * The objective is concave in q. The start point comes from the convex dual
 * in the phase weights, then a pattern search polishes it. Any q gives a
 * valid bound.
 */
inline LowerBound dual_lower_bound(const CoefficientSet& k, const StructuredMesh& mesh) {
    struct Group {
        double a, b, w;
        SymMat C, D;
    };
    std::map<std::array<double, 8>, std::size_t> index;
    std::vector<Group> groups;
    for (std::size_t e = 0; e < k.size(); ++e) {
        const std::array<double, 8> key{k.a[e], k.b[e], k.C[e].v[0], k.C[e].v[1], k.C[e].v[2],
                                        k.D[e].v[0], k.D[e].v[1], k.D[e].v[2]};
        auto [it, fresh] = index.emplace(key, groups.size());
        if (fresh) groups.push_back({k.a[e], k.b[e], 0.0, k.C[e], k.D[e]});
        groups[it->second].w += mesh.measure[e];
    }
    LowerBound lb;
    const int dim = mesh.dim;
    const int nc = dim == 1 ? 1 : 3;
    const auto make = [&](const std::array<double, 3>& x) {
        SymMat q(dim);
        for (int i = 0; i < nc; ++i) q.v[i] = x[i];
        return q;
    };
    const auto objective = [&](const std::array<double, 3>& x) {
        ++lb.evaluations;
        const SymMat q = make(x);
        const double qq = norm2(q);
        double s = 0.0;
        for (const auto& g : groups)
            s -= g.w * std::max(qq / (2.0 * g.a) - dot(q, g.C), qq / (2.0 * g.b) - dot(q, g.D));
        return s;
    };
    double radius = 1.0;
    for (const auto& g : groups) radius = std::max({radius, 2.0 * g.a * norm(g.C), 2.0 * g.b * norm(g.D)});

    // Minimax over per-group phase weights lambda: for fixed lambda the inner
    // max over q is a concave quadratic with maximizer S/W and value |S|^2/(2W).
    // That value is convex in lambda; coordinate golden-section on it.
    const std::size_t ng = groups.size();
    std::vector<double> lam(ng, 0.5);
    const auto upper = [&](const std::vector<double>& l, SymMat* q_out) {
        SymMat S(dim);
        double W = 0.0;
        for (std::size_t g = 0; g < ng; ++g) {
            const Group& G = groups[g];
            S += G.w * (l[g] * G.C + (1.0 - l[g]) * G.D);
            W += G.w * (l[g] / G.a + (1.0 - l[g]) / G.b);
        }
        if (q_out) *q_out = (1.0 / W) * S;
        return norm2(S) / (2.0 * W);
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < 200 && ng > 0; ++sweep) {
        double moved = 0.0;
        for (std::size_t g = 0; g < ng; ++g) {
            std::vector<double> l = lam;
            const auto f = [&](double t) {
                l[g] = t;
                return upper(l, nullptr);
            };
            double lo = 0.0, hi = 1.0;
            double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
            double f1 = f(x1), f2 = f(x2);
            while (hi - lo > 1e-14) {
                if (f1 <= f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = f(x2);
                }
            }
            double t = 0.5 * (lo + hi);
            for (double edge : {0.0, 1.0})
                if (f(edge) < f(t)) t = edge;
            moved = std::max(moved, std::abs(t - lam[g]));
            lam[g] = t;
        }
        if (moved < 1e-13) break;
    }
    std::array<double, 3> best{0.0, 0.0, 0.0};
    double best_val = objective(best);
    if (ng > 0) {
        SymMat qs(dim);
        upper(lam, &qs);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int c = 0; c < nc; ++c) x[c] = qs.v[c];
        const double v = objective(x);
        if (v > best_val) {
            best_val = v;
            best = x;
        }
    }
    // pattern directions: every nonzero vector in {-1,0,1}^nc, so ridges of the max are crossed
    std::vector<std::array<double, 3>> dirs;
    const int nd = nc == 1 ? 3 : 27;
    for (int flat = 0; flat < nd; ++flat) {
        std::array<double, 3> dvec{0.0, 0.0, 0.0};
        int r = flat;
        bool zero = true;
        for (int c = 0; c < nc; ++c) {
            dvec[c] = static_cast<double>(r % 3 - 1);
            zero = zero && dvec[c] == 0.0;
            r /= 3;
        }
        if (!zero) dirs.push_back(dvec);
    }
    double step = 1e-3 * radius;
    while (step > 1e-13 * radius) {
        bool improved = false;
        for (const auto& dvec : dirs) {
            std::array<double, 3> x = best;
            for (int c = 0; c < nc; ++c) x[c] += step * dvec[c];
            const double v = objective(x);
            if (v > best_val) {
                best_val = v;
                best = x;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    lb.value = best_val;
    lb.q = make(best);
    return lb;
}

struct RelaxationOptions {
    double theta_slack = 0.02;
    double tol_den_rel = 1e-12;
    double stuck_threshold = 0.49;  ///< times |Omega|
};

struct ConventionResult {
    double theta = 0.0;
    bool in_range = true;
    FormulaSet formulas;
    double residual = 0.0;  ///< |halved tilt form - alpha_scheme|
    double spread = 0.0;    ///< spread of the four halved forms
};

struct RelaxationReport {
    double alpha_scheme = 0.0;
    double I = 0.0;
    Omega0Terms omega0;
    GapScalar gap;
    ThetaEstimate theta;
    ConventionResult coeff1, printed;
    std::string verdict;
    InequalityChain chain_printed, chain_half;
    LowerBound lower_bound;
    double lower_bound_gap = 0.0;
    bool stuck = false;
    double omega0_measure = 0.0;
    double guard_measure = 0.0;
};

inline RelaxationReport relaxation_report(const LimitBundle& b, const PartitionMasks& masks, double alpha_scheme,
                                          const RelaxationOptions& opt = {}) {
    RelaxationReport r;
    r.alpha_scheme = alpha_scheme;
    r.I = eval_I(b, masks);
    r.omega0 = omega0_terms(b, masks);
    r.gap = gap_d(b, masks);
    r.theta = theta_estimate(r.gap.d, r.omega0.den, opt.tol_den_rel * r.omega0.scale, opt.theta_slack);
    r.omega0_measure = masks.omega0_measure;
    r.guard_measure = masks.guard_measure;

    const auto evaluate = [&](Convention c) {
        ConventionResult cr;
        cr.theta = c == Convention::Coefficient1 ? r.theta.coeff1 : r.theta.printed;
        cr.in_range = c == Convention::Coefficient1 ? r.theta.coeff1_in_range : r.theta.printed_in_range;
        cr.formulas = eval_formulas(r.omega0, r.I, theta_literal(r.theta, c));
        cr.residual = std::abs(cr.formulas.tilt_form_half - alpha_scheme);
        cr.spread = cr.formulas.spread_halved();
        return cr;
    };
    r.coeff1 = evaluate(Convention::Coefficient1);
    r.printed = evaluate(Convention::Printed);
    if (r.theta.zero_branch)
        r.verdict = "zero_branch";
    else if (r.coeff1.in_range && !r.printed.in_range)
        r.verdict = "coefficient_1";
    else if (!r.coeff1.in_range && r.printed.in_range)
        r.verdict = "printed";
    else if (r.coeff1.in_range)
        r.verdict = "both";
    else
        r.verdict = "neither";

    r.chain_printed = eval_chain(r.omega0, r.I, alpha_scheme, false);
    r.chain_half = eval_chain(r.omega0, r.I, alpha_scheme, true);
    r.lower_bound = dual_lower_bound(b.coeffs, b.mesh);
    r.lower_bound_gap = alpha_scheme - r.lower_bound.value;
    r.stuck = r.lower_bound_gap >= opt.stuck_threshold * b.mesh.volume();
    return r;
}

} // namespace dwell
