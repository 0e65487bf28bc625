#pragma once

/**
 * @file descent.hpp
 * @brief Construction of minimizing sequences: alternate between solving the
 * frozen-phase convex problem and reassigning phases pointwise, seeded by
 * random, laminate or zero initial data and continued across uniform
 * refinements (level index = sequence index).
 */

#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"
#include "dwell/subproblem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dwell {

/// chi_a = 1 where a/2|eps+C|^2 <= b/2|eps+D|^2 (ties go to phase a).
inline PhaseField assign_phases(const StrainField& eps, const CoefficientSet& k) {
    DWELL_REQUIRE(eps.size() == k.size(), "assign_phases: strain field does not conform");
    PhaseField chi(eps.size());
    for (std::size_t e = 0; e < eps.size(); ++e)
        chi.chi_a[e] = phase_a_energy(k, e, eps[e]) <= phase_b_energy(k, e, eps[e]) ? 1 : 0;
    return chi;
}

inline int count_flips(const PhaseField& x, const PhaseField& y) {
    int n = 0;
    for (std::size_t e = 0; e < x.size(); ++e) n += x.chi_a[e] != y.chi_a[e] ? 1 : 0;
    return n;
}

/// Flips that change the frozen problem; where both branches coincide a flip is immaterial.
inline int count_flips(const PhaseField& x, const PhaseField& y, const CoefficientSet& k) {
    int n = 0;
    for (std::size_t e = 0; e < x.size(); ++e) {
        if (x.chi_a[e] == y.chi_a[e]) continue;
        n += (k.a[e] != k.b[e] || !(k.C[e].v == k.D[e].v)) ? 1 : 0;
    }
    return n;
}

/// Uniform double in [0,1) from the top 53 bits; identical across standard libraries.
inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline PhaseField random_phases(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    PhaseField chi(n);
    for (auto& c : chi.chi_a) c = unit_uniform(g) < 0.5 ? 1 : 0;
    return chi;
}

/// Flips each element independently with probability `fraction`.
inline void perturb_phases(PhaseField& chi, double fraction, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    for (auto& c : chi.chi_a)
        if (unit_uniform(g) < fraction) c = c ? 0 : 1;
}

struct StepRecord {
    int level = 0;
    int step = 0;
    double alpha = 0.0;          ///< optimal value of the frozen-phase problem
    double J = 0.0;              ///< double-well energy of the same displacement
    double gap = 0.0;            ///< alpha + I(p)
    int flips = 0;               ///< phase changes produced by reassignment
    double kernel_residual = 0.0;
    double orthogonality = 0.0;
    double energy_identity = 0.0;
    double representation_spread = 0.0;
    int iterations = 0;
    double solver_residual = 0.0;
    double seconds = 0.0;
};

/// Final state of one refinement level.
struct LevelState {
    StructuredMesh mesh;
    CoefficientSet coeffs;
    PhaseField chi;              ///< phases used for the last solve
    DisplacementField u;
    DualField p;
    double alpha = 0.0;
    double J = 0.0;
    bool fixed_point = false;
    int steps = 0;
};

struct AlternationResult {
    std::vector<StepRecord> steps;
    LevelState state;
};

struct AlternationOptions {
    int max_steps = 50;
    SolveOptions solve;
};

/**
 * @brief Alternating descent at one level.
 *
 * Each step solves the frozen-phase problem, then reassigns phases from the
 * new strain. Stops when reassignment changes nothing or the budget runs out.
 */
inline AlternationResult alternate(const StructuredMesh& mesh, const CoefficientSet& k, PhaseField chi,
                                   const AlternationOptions& opt, int level = 0) {
    DWELL_REQUIRE(chi.size() == mesh.num_elements(), "alternate: phase field does not conform");
    AlternationResult out;
    const DomainSplit split = DomainSplit::from(k);
    for (int step = 1; step <= opt.max_steps; ++step) {
        const QuadraticProblem qp = assemble(chi, k, mesh);
        auto [u, rep] = solve(qp, mesh, opt.solve);
        DualField p = dual_variable(u, chi, k, mesh);
        const DualityReport dr = duality_report(u, p, chi, k, mesh, qp);
        const AlphaRepresentations ar = alpha_representations(u, p, chi, k, mesh, split);
        const PhaseField next = assign_phases(symmetrized_gradient(u, mesh), k);

        StepRecord s;
        s.level = level;
        s.step = step;
        s.alpha = dr.alpha;
        s.J = double_well_energy(u, k, mesh);
        s.gap = dr.gap;
        s.flips = count_flips(chi, next, k);
        s.kernel_residual = dr.kernel_residual;
        s.orthogonality = dr.orthogonality;
        s.energy_identity = ar.energy_identity_residual;
        s.representation_spread = ar.max_deviation();
        s.iterations = rep.iterations;
        s.solver_residual = rep.relative_residual;
        s.seconds = rep.seconds;
        out.steps.push_back(s);

        out.state.chi = chi;
        out.state.u = std::move(u);
        out.state.p = std::move(p);
        out.state.alpha = s.alpha;
        out.state.J = s.J;
        out.state.steps = step;
        if (s.flips == 0) {
            out.state.fixed_point = true;
            break;
        }
        chi = next;
    }
    out.state.mesh = mesh;
    out.state.coeffs = k;
    return out;
}

enum class LaminateDirection { Auto, X, Y, Diagonal };

/// Candidate (eta, nu) pairs with sym(eta (x) nu) = M, |nu| = 1; empty if det M > 0.
inline std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> rank_one_split(const SymMat& M) {
    std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> out;
    const double tr = M.xx() + M.yy();
    const double disc = std::sqrt(std::max(0.0, 0.25 * (M.xx() - M.yy()) * (M.xx() - M.yy()) + M.xy() * M.xy()));
    const double l1 = 0.5 * tr + disc;
    const double l2 = 0.5 * tr - disc;
    const double scale = std::max({std::abs(M.xx()), std::abs(M.xy()), std::abs(M.yy()), 1e-300});
    if (l2 > 1e-12 * scale || l1 < -1e-12 * scale) return out;  // definite: incompatible
    std::array<double, 2> e1;
    if (disc == 0.0) {
        e1 = {1.0, 0.0};
    } else if (std::abs(M.xy()) > 0.0) {
        e1 = {M.xy(), l1 - M.xx()};
        if (std::abs(l1 - M.xx()) < 1e-14 * scale && std::abs(M.xy()) < 1e-14 * scale) e1 = {1.0, 0.0};
    } else {
        e1 = M.xx() >= M.yy() ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    }
    const double n1 = std::hypot(e1[0], e1[1]);
    e1 = {e1[0] / n1, e1[1] / n1};
    const std::array<double, 2> e2{-e1[1], e1[0]};
    const double s1 = std::sqrt(std::max(l1, 0.0));
    const double s2 = std::sqrt(std::max(-l2, 0.0));
    for (double sigma : {1.0, -1.0}) {
        std::array<double, 2> nu{s1 * e1[0] + sigma * s2 * e2[0], s1 * e1[1] + sigma * s2 * e2[1]};
        std::array<double, 2> eta{s1 * e1[0] - sigma * s2 * e2[0], s1 * e1[1] - sigma * s2 * e2[1]};
        const double nn = std::hypot(nu[0], nu[1]);
        if (nn == 0.0) continue;
        nu = {nu[0] / nn, nu[1] / nn};
        eta = {eta[0] * nn, eta[1] * nn};
        out.emplace_back(eta, nu);
        if (s2 == 0.0) break;
    }
    return out;
}

/// Volume fraction of phase a with t(-C) + (1-t)(-D) closest to 0, clamped to [0, 1].
inline double laminate_fraction(const SymMat& C, const SymMat& D) {
    const SymMat M = C - D;
    const double mm = norm2(M);
    if (mm == 0.0) return 1.0;
    return std::clamp(-dot(D, M) / mm, 0.0, 1.0);
}

struct LaminateSeed {
    DisplacementField u;
    PhaseField chi;
    bool compatible = true;
    double fraction = 1.0;
    std::array<double, 2> normal{1.0, 0.0};
};

namespace detail {

/// Lattice coordinate whose integer part indexes element layers normal to `dir`.
struct LayerFrame {
    std::array<double, 2> scaled{1.0, 0.0};  ///< zeta = scaled . x
    std::array<double, 2> normal{1.0, 0.0};  ///< physical unit normal
    bool mesh_aligned = true;
};

inline LayerFrame layer_frame(const StructuredMesh& mesh, const std::array<double, 2>& nu) {
    LayerFrame f;
    f.normal = nu;
    const double hx = mesh.spacing(0);
    if (mesh.dim == 1) {
        f.scaled = {1.0 / hx, 0.0};
        return f;
    }
    const double hy = mesh.spacing(1);
    const double tol = 1e-10;
    // diagonal normal (hy, -hx) up to sign
    const double dn = std::hypot(hy, hx);
    const double cd = (nu[0] * hy - nu[1] * hx) / dn;
    if (std::abs(std::abs(nu[0]) - 1.0) < tol) {
        f.scaled = {1.0 / hx, 0.0};
        f.normal = {1.0, 0.0};
    } else if (std::abs(std::abs(nu[1]) - 1.0) < tol) {
        f.scaled = {0.0, 1.0 / hy};
        f.normal = {0.0, 1.0};
    } else if (std::abs(std::abs(cd) - 1.0) < tol) {
        f.scaled = {1.0 / hx, -1.0 / hy};
        f.normal = {hy / dn, -hx / dn};
    } else {
        f.mesh_aligned = false;
        const double h = std::min(hx, hy);
        f.scaled = {nu[0] / h, nu[1] / h};
    }
    return f;
}

inline bool forced_normal(LaminateDirection d, const StructuredMesh& mesh, std::array<double, 2>& nu) {
    const double hx = mesh.spacing(0), hy = mesh.dim == 2 ? mesh.spacing(1) : 1.0;
    switch (d) {
    case LaminateDirection::X: nu = {1.0, 0.0}; return true;
    case LaminateDirection::Y: nu = {0.0, 1.0}; return true;
    case LaminateDirection::Diagonal: {
        const double dn = std::hypot(hx, hy);
        nu = {hy / dn, -hx / dn};
        return true;
    }
    case LaminateDirection::Auto: return false;
    }
    return false;
}

/// Layer pattern position: phase a on the first round(t P) layers of each period.
inline bool layer_is_a(long layer, int period, double t) {
    const int na = static_cast<int>(std::lround(t * period));
    long q = layer % period;
    if (q < 0) q += period;
    return q < na;
}

} // namespace detail

/**
 * @brief Laminate of the two wells with `period_elements` element layers per period.
 *
 * Phase a occupies the first round(t P) layers of each period, t the volume
 * fraction that puts the mean strain at 0. In 2D, C - D must be a symmetric
 * rank-one matrix sym(eta (x) nu); the layer normal is chosen among the
 * mesh-aligned candidates. Incompatible wells fall back to random phases.
 */
inline LaminateSeed laminate_seed(const StructuredMesh& mesh, const CoefficientSet& k, int period_elements,
                                  LaminateDirection direction = LaminateDirection::Auto,
                                  std::uint64_t fallback_seed = 0) {
    DWELL_REQUIRE(period_elements >= 1, "laminate_seed: period must be >= 1");
    LaminateSeed seed;
    seed.u = DisplacementField(mesh);
    seed.chi = PhaseField(mesh.num_elements());
    // Geometry from the first element; phases per element from its own fraction.
    const SymMat M = k.C[0] - k.D[0];
    std::array<double, 2> eta{1.0, 0.0}, nu{1.0, 0.0};
    if (mesh.dim == 1) {
        eta = {M.xx(), 0.0};
    } else {
        const auto cands = rank_one_split(M);
        if (cands.empty()) {
            seed.compatible = false;
            seed.chi = random_phases(mesh.num_elements(), fallback_seed);
            return seed;
        }
        std::array<double, 2> forced;
        bool chosen = false;
        if (detail::forced_normal(direction, mesh, forced)) {
            for (const auto& [e_, n_] : cands) {
                if (std::abs(std::abs(n_[0] * forced[0] + n_[1] * forced[1]) - 1.0) < 1e-10) {
                    eta = e_;
                    nu = n_;
                    chosen = true;
                    break;
                }
            }
            if (!chosen) {
                seed.compatible = false;
                nu = forced;
                eta = cands.front().first;
                chosen = true;
            }
        }
        if (!chosen) {
            eta = cands.front().first;
            nu = cands.front().second;
            for (const auto& [e_, n_] : cands) {
                if (detail::layer_frame(mesh, n_).mesh_aligned) {
                    eta = e_;
                    nu = n_;
                    break;
                }
            }
        }
    }
    const detail::LayerFrame frame = detail::layer_frame(mesh, nu);
    if (!frame.mesh_aligned) seed.compatible = false;
    // flip eta if the frame normal is opposite to nu
    if (mesh.dim == 2 && frame.normal[0] * nu[0] + frame.normal[1] * nu[1] < 0.0) eta = {-eta[0], -eta[1]};
    seed.normal = frame.normal;

    const double t = laminate_fraction(k.C[0], k.D[0]);
    seed.fraction = t;
    const int na = static_cast<int>(std::lround(t * period_elements));
    if (std::abs(na - t * period_elements) > 1e-9) seed.compatible = false;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& c = mesh.centroid[e];
        const double zeta = frame.scaled[0] * c[0] + frame.scaled[1] * c[1];
        const double te = laminate_fraction(k.C[e], k.D[e]);
        seed.chi.chi_a[e] = detail::layer_is_a(static_cast<long>(std::floor(zeta)), period_elements, te) ? 1 : 0;
    }
    // Sawtooth along the normal: slope -(1-t) in a-layers and t in b-layers times eta,
    // so eps = -C resp. -D when 0 lies on the well segment.
    const double thickness = 1.0 / std::hypot(frame.scaled[0], frame.scaled[1]);
    const double slope_a = -(1.0 - static_cast<double>(na) / period_elements);
    const double slope_b = static_cast<double>(na) / period_elements;
    const auto profile = [&](double zeta) {
        // integral of the layer slopes from 0 to zeta (in layer units), periodic with zero mean
        const double per = std::floor(zeta / period_elements);
        double r = zeta - per * period_elements;
        double g = 0.0;
        for (int l = 0; l < period_elements && r > 0.0; ++l) {
            const double len = std::min(1.0, r);
            g += len * (l < na ? slope_a : slope_b);
            r -= len;
        }
        return g * thickness;
    };
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        if (mesh.boundary[n]) continue;
        const auto& x = mesh.nodes[n];
        const double g = profile(frame.scaled[0] * x[0] + frame.scaled[1] * x[1]);
        for (int c = 0; c < mesh.dim; ++c) seed.u.at(n, c) = eta[c] * g;
    }
    return seed;
}

/// Oscillation injection on refinement.
struct InjectionOptions {
    bool enabled = false;
    int period_elements = 2;
    LaminateDirection direction = LaminateDirection::Auto;
    double noise = 0.0;
    std::uint64_t noise_seed = 0;
};

/**
 * @brief Prolongs phases to a refined mesh (each fine element inherits the
 * coarse element containing its centroid). With injection enabled, fine
 * elements whose coarse parent lies in a mixed period-sized block are
 * overwritten by a fresh laminate at the fine period, halving the physical period.
 */
inline PhaseField refine_continue(const StructuredMesh& coarse, const PhaseField& chi, const StructuredMesh& fine,
                                  const CoefficientSet& fine_coeffs, const InjectionOptions& inj = {}) {
    DWELL_REQUIRE(chi.size() == coarse.num_elements(), "refine_continue: phase field does not conform");
    PhaseField out(fine.num_elements());
    std::vector<int> parent(fine.num_elements());
    for (std::size_t e = 0; e < fine.num_elements(); ++e) {
        parent[e] = coarse.locate(fine.centroid[e]);
        out.chi_a[e] = chi.chi_a[parent[e]];
    }
    if (!inj.enabled) return out;

    std::vector<char> mixed(coarse.num_elements(), 1);
    bool blocks_ok = true;
    for (int a = 0; a < coarse.dim; ++a) blocks_ok = blocks_ok && coarse.counts[a] % inj.period_elements == 0;
    if (blocks_ok) {
        const WindowGrid w = make_windows(coarse, inj.period_elements);
        const auto frac = window_average(chi.chi_a_values(), coarse, w);
        for (std::size_t e = 0; e < coarse.num_elements(); ++e) {
            const double f = frac[w.window_of[e]];
            mixed[e] = (f > 0.0 && f < 1.0) ? 1 : 0;
        }
    }
    LaminateSeed lam = laminate_seed(fine, fine_coeffs, inj.period_elements, inj.direction, inj.noise_seed);
    if (inj.noise > 0.0) perturb_phases(lam.chi, inj.noise, inj.noise_seed);
    for (std::size_t e = 0; e < fine.num_elements(); ++e)
        if (mixed[parent[e]]) out.chi_a[e] = lam.chi.chi_a[e];
    return out;
}

enum class SeedKind { Zero, Random, Laminate, PerturbedLaminate };

inline std::string to_string(SeedKind k) {
    switch (k) {
    case SeedKind::Zero: return "zero";
    case SeedKind::Random: return "random";
    case SeedKind::Laminate: return "laminate";
    case SeedKind::PerturbedLaminate: return "perturbed";
    }
    return "?";
}

struct DescentOptions {
    std::array<double, 2> extents{1.0, 1.0};
    std::array<int, 2> base_resolution{16, 16};
    int dimension = 1;
    int levels = 5;
    AlternationOptions alternation;
    int laminate_period = 2;
    LaminateDirection direction = LaminateDirection::Auto;
    bool inject = true;
    double noise = 0.05;
    std::uint64_t rng_seed = 42;
};

using CoefficientFactory = std::function<CoefficientSet(const StructuredMesh&)>;

/// Full multi-level run from one seed.
struct RunTrace {
    SeedKind seed = SeedKind::Laminate;
    int seed_index = 0;
    std::uint64_t rng = 0;
    bool laminate_compatible = true;
    std::vector<StepRecord> steps;
    std::vector<LevelState> levels;
    bool budget_exhausted = false;

    [[nodiscard]] double final_alpha() const { return levels.empty() ? 0.0 : levels.back().J; }
    [[nodiscard]] const LevelState& finest() const { return levels.back(); }
};

inline StructuredMesh level_mesh(const DescentOptions& opt, int level) {
    std::array<int, 2> res = opt.base_resolution;
    for (auto& r : res) r <<= level;
    return build_mesh(opt.extents, res, opt.dimension);
}

inline PhaseField initial_phases(SeedKind kind, const StructuredMesh& mesh, const CoefficientSet& k,
                                 const DescentOptions& opt, std::uint64_t rng, bool& compatible) {
    compatible = true;
    switch (kind) {
    case SeedKind::Zero: return assign_phases(StrainField(mesh), k);
    case SeedKind::Random: return random_phases(mesh.num_elements(), rng);
    case SeedKind::Laminate:
    case SeedKind::PerturbedLaminate: {
        LaminateSeed s = laminate_seed(mesh, k, opt.laminate_period, opt.direction, rng);
        compatible = s.compatible;
        if (kind == SeedKind::PerturbedLaminate) perturb_phases(s.chi, opt.noise, rng);
        return s.chi;
    }
    }
    return PhaseField(mesh.num_elements());
}

inline RunTrace run_seed(SeedKind kind, int seed_index, const DescentOptions& opt, const CoefficientFactory& coeffs) {
    if (opt.levels < 1) throw ConfigError("mesh.levels must be >= 1");
    RunTrace tr;
    tr.seed = kind;
    tr.seed_index = seed_index;
    tr.rng = opt.rng_seed + 1000003ULL * static_cast<std::uint64_t>(seed_index);
    PhaseField chi;
    for (int level = 0; level < opt.levels; ++level) {
        StructuredMesh mesh = level_mesh(opt, level);
        CoefficientSet k = coeffs(mesh);
        if (level == 0) {
            chi = initial_phases(kind, mesh, k, opt, tr.rng, tr.laminate_compatible);
        } else {
            const LevelState& prev = tr.levels.back();
            InjectionOptions inj;
            inj.enabled = opt.inject && (kind == SeedKind::Laminate || kind == SeedKind::PerturbedLaminate);
            inj.period_elements = opt.laminate_period;
            inj.direction = opt.direction;
            inj.noise = kind == SeedKind::PerturbedLaminate ? opt.noise : 0.0;
            inj.noise_seed = tr.rng + static_cast<std::uint64_t>(level);
            chi = refine_continue(prev.mesh, prev.chi, mesh, k, inj);
        }
        AlternationResult r = alternate(mesh, k, chi, opt.alternation, level);
        if (!r.state.fixed_point) tr.budget_exhausted = true;
        tr.steps.insert(tr.steps.end(), r.steps.begin(), r.steps.end());
        tr.levels.push_back(std::move(r.state));
    }
    return tr;
}

/// Runs every seed; the best trace has the smallest final energy, ties broken by seed order.
inline std::vector<RunTrace> multistart(const std::vector<SeedKind>& seeds, const DescentOptions& opt,
                                        const CoefficientFactory& coeffs) {
    if (seeds.empty()) throw ConfigError("strategy.seeds must list at least one seed");
    std::vector<RunTrace> out;
    for (std::size_t i = 0; i < seeds.size(); ++i) out.push_back(run_seed(seeds[i], static_cast<int>(i), opt, coeffs));
    return out;
}

inline std::size_t best_trace(const std::vector<RunTrace>& traces) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < traces.size(); ++i)
        if (traces[i].final_alpha() < traces[best].final_alpha()) best = i;
    return best;
}

} // namespace dwell
