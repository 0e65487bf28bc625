#pragma once

/**
 * @file experiment.hpp
 * @brief End-to-end pipeline: multistart descent over refinement levels,
 * then weak limits, relaxation formulas and Young-measure checks on the
 * finest level of the best trace.
 */

#include "dwell/config.hpp"
#include "dwell/descent.hpp"
#include "dwell/limits.hpp"
#include "dwell/oracle.hpp"
#include "dwell/relaxation.hpp"
#include "dwell/young.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

namespace dwell {

/// Worst values of the per-solve invariants over a set of step records.
struct SolveChecks {
    int solves = 0;
    double max_gap_rel = 0.0;            ///< |alpha + I(p)| / (1 + |alpha|)
    double max_kernel_residual = 0.0;
    double max_orthogonality = 0.0;
    double max_energy_identity = 0.0;
    double max_representation_spread = 0.0;
    double max_descent_violation = 0.0;  ///< worst increase of J between consecutive steps of a level
    double max_alpha_increase = 0.0;     ///< same for the subproblem value
    double max_level_increase = 0.0;     ///< worst increase of the final energy from one level to the next

    void add(const std::vector<StepRecord>& steps) {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& s = steps[i];
            ++solves;
            max_gap_rel = std::max(max_gap_rel, std::abs(s.gap) / (1.0 + std::abs(s.alpha)));
            max_kernel_residual = std::max(max_kernel_residual, s.kernel_residual);
            max_orthogonality = std::max(max_orthogonality, s.orthogonality);
            max_energy_identity = std::max(max_energy_identity, s.energy_identity);
            max_representation_spread = std::max(max_representation_spread, s.representation_spread);
            if (i > 0 && steps[i - 1].level == s.level) {
                max_descent_violation = std::max(max_descent_violation, s.J - steps[i - 1].J);
                max_alpha_increase = std::max(max_alpha_increase, s.alpha - steps[i - 1].alpha);
            }
        }
    }
};

/// Cheap per-level summary: limits and theta at the same physical window size.
struct LevelSummary {
    int level = 0;
    std::array<int, 2> resolution{1, 1};
    double alpha = 0.0;
    double J = 0.0;
    bool fixed_point = false;
    int steps = 0;
    int window = 0;
    double d = 0.0;
    double den = 0.0;
    double theta_coeff1 = 0.0;
    double theta_printed = 0.0;
    bool zero_branch = true;
};

struct Analysis {
    LimitBundle bundle;
    PartitionMasks masks;
    RelaxationReport relaxation;
    std::vector<WindowMeasure> measures;
    double ym_energy_residual = 0.0;
    SecondMomentRecord second_moment;
    DiracReport dirac;
    VarianceIdentity variance;
    PairingDiagnostic pairing;
    double alpha_scheme = 0.0;
    std::optional<double> exact_alpha;
    DualityReport duality;  ///< recomputed on the finest fields
};

inline DomainSplit split_for(const RunConfig& cfg, const CoefficientSet& k) {
    return DomainSplit::from(k, cfg.tol.tol_eq_rel, cfg.tol.guard_rel);
}

/// Everything that only needs the retained levels (finest last).
inline Analysis analyze(const std::vector<LevelState>& levels, const RunConfig& cfg) {
    DWELL_REQUIRE(!levels.empty(), "analyze: no levels");
    const LevelState& fin = levels.back();
    Analysis an;
    an.alpha_scheme = fin.J;
    an.bundle = estimate_limits(fin, cfg.window);
    const DomainSplit split = split_for(cfg, fin.coeffs);
    an.masks = partition_masks(an.bundle, split, cfg.tol.eta);
    RelaxationOptions ropt;
    ropt.theta_slack = cfg.tol.theta_slack;
    ropt.tol_den_rel = cfg.tol.tol_den_rel;
    an.relaxation = relaxation_report(an.bundle, an.masks, an.alpha_scheme, ropt);
    an.measures = estimate_ym(an.bundle);
    an.ym_energy_residual = ym_energy_residual(an.measures, an.alpha_scheme);
    an.second_moment = second_moment_check(an.measures, an.bundle, an.masks, an.relaxation.gap.d);
    const double dtol = cfg.tol.dirac > 0.0 ? cfg.tol.dirac : default_dirac_tol(an.measures);
    an.dirac = dirac_check(an.measures, an.masks.pure, dtol);
    an.variance = variance_identity(an.measures, fin.coeffs, cfg.tol.dist_rel);
    an.pairing = pairing_diagnostic(levels, an.bundle, default_test_functions(fin.mesh));
    const QuadraticProblem qp = assemble(fin.chi, fin.coeffs, fin.mesh);
    an.duality = duality_report(fin.u, fin.p, fin.chi, fin.coeffs, fin.mesh, qp);
    if (fin.mesh.dim == 1) {
        try {
            an.exact_alpha = oracle::exact_alpha_1d(fin.coeffs, fin.mesh);
        } catch (const ConfigError&) {
            // piecewise coefficients: no closed form
        }
    }
    return an;
}

inline std::vector<LevelSummary> level_summaries(const std::vector<LevelState>& levels, const RunConfig& cfg) {
    std::vector<LevelSummary> out;
    const int nl = static_cast<int>(levels.size());
    for (int l = 0; l < nl; ++l) {
        const LevelState& s = levels[l];
        LevelSummary ls;
        ls.level = l;
        ls.resolution = s.mesh.counts;
        ls.alpha = s.alpha;
        ls.J = s.J;
        ls.fixed_point = s.fixed_point;
        ls.steps = s.steps;
        const int w = cfg.window >> (nl - 1 - l);
        ls.window = w;
        if (w >= 1) {
            const LimitBundle b = estimate_limits(s, w);
            const PartitionMasks m = partition_masks(b, split_for(cfg, s.coeffs), cfg.tol.eta);
            const GapScalar g = gap_d(b, m);
            const Omega0Terms o = omega0_terms(b, m);
            const ThetaEstimate th = theta_estimate(g.d, o.den, cfg.tol.tol_den_rel * o.scale, cfg.tol.theta_slack);
            ls.d = g.d;
            ls.den = o.den;
            ls.theta_coeff1 = th.coeff1;
            ls.theta_printed = th.printed;
            ls.zero_branch = th.zero_branch;
        }
        out.push_back(ls);
    }
    return out;
}

struct ExperimentResult {
    RunConfig config;
    std::vector<RunTrace> traces;
    std::size_t best = 0;
    SolveChecks checks;
    std::vector<LevelSummary> levels;
    Analysis analysis;
    double seconds = 0.0;

    [[nodiscard]] const RunTrace& best_trace() const { return traces[best]; }
};

inline ExperimentResult run_experiment(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult r;
    r.config = cfg;
    r.traces = multistart(cfg.seeds, cfg.descent, cfg.factory());
    r.best = best_trace(r.traces);
    for (const auto& t : r.traces) {
        r.checks.add(t.steps);
        for (std::size_t l = 1; l < t.levels.size(); ++l)
            r.checks.max_level_increase =
                std::max(r.checks.max_level_increase, t.levels[l].J - t.levels[l - 1].J);
    }
    const auto& levels = r.best_trace().levels;
    r.levels = level_summaries(levels, cfg);
    r.analysis = analyze(levels, cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace dwell
