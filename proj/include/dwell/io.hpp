#pragma once

/**
 * @file io.hpp
 * @brief Run directory layout: report.json (deterministic), timing.json,
 * alpha traces, field and measure CSVs, plot data, and the reload path used
 * to re-verify a run from its dumps.
 */

#include "dwell/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dwell {

inline constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail {

inline json matrix_json(const SymMat& m) {
    if (m.dim == 1) return json::array({m.v[0]});
    return json::array({m.v[0], m.v[1], m.v[2]});
}

/// Shortest representation that reads back to the same double.
inline std::string num(double v) {
    json j = v;
    return j.dump();
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

inline json config_json(const RunConfig& cfg) {
    const auto& d = cfg.descent;
    json seeds = json::array();
    for (auto s : cfg.seeds) seeds.push_back(to_string(s));
    json regions = json::array();
    for (const auto& r : cfg.regions)
        regions.push_back({{"name", r.name},
                           {"box", std::vector<double>(r.box.begin(), r.box.begin() + 2 * d.dimension)},
                           {"a", r.coeffs.a},
                           {"b", r.coeffs.b},
                           {"C", detail::matrix_json(r.coeffs.C)},
                           {"D", detail::matrix_json(r.coeffs.D)}});
    const char* dir = "auto";
    switch (d.direction) {
    case LaminateDirection::X: dir = "x"; break;
    case LaminateDirection::Y: dir = "y"; break;
    case LaminateDirection::Diagonal: dir = "diagonal"; break;
    case LaminateDirection::Auto: break;
    }
    return {
        {"mesh",
         {{"dimension", d.dimension},
          {"extents", std::vector<double>(d.extents.begin(), d.extents.begin() + d.dimension)},
          {"resolution", std::vector<int>(d.base_resolution.begin(), d.base_resolution.begin() + d.dimension)},
          {"levels", d.levels}}},
        {"coefficients",
         {{"a", cfg.base.a}, {"b", cfg.base.b}, {"C", detail::matrix_json(cfg.base.C)}, {"D", detail::matrix_json(cfg.base.D)}}},
        {"regions", regions},
        {"strategy",
         {{"seeds", seeds},
          {"laminate_period", d.laminate_period},
          {"direction", dir},
          {"inject", d.inject},
          {"noise", d.noise},
          {"max_steps", d.alternation.max_steps},
          {"rng_seed", d.rng_seed}}},
        {"tolerances",
         {{"solver", cfg.tol.solver},
          {"max_iter_factor", cfg.tol.max_iter_factor},
          {"eta", cfg.tol.eta},
          {"dirac", cfg.tol.dirac},
          {"tol_eq_rel", cfg.tol.tol_eq_rel},
          {"guard_rel", cfg.tol.guard_rel},
          {"tol_den_rel", cfg.tol.tol_den_rel},
          {"theta_slack", cfg.tol.theta_slack},
          {"dist_rel", cfg.tol.dist_rel},
          {"formula_rel", cfg.tol.formula_rel}}},
        {"limits", {{"window", cfg.window}}},
    };
}

inline json formulas_json(const ConventionResult& c) {
    const auto& f = c.formulas;
    return {{"theta", c.theta},
            {"in_range", c.in_range},
            {"residual", c.residual},
            {"spread", c.spread},
            {"halved",
             {{"tilt_form", f.tilt_form_half},
              {"energy_form", f.energy_form_half},
              {"dual_form", f.dual_form_half},
              {"mean_form", f.mean_form_half}}},
            {"printed",
             {{"tilt_form", f.tilt_form},
              {"energy_form", f.energy_form},
              {"dual_form", f.dual_form},
              {"mean_form", f.mean_form}}}};
}

inline json chain_json(const InequalityChain& c) {
    return {{"left", c.left}, {"middle", c.middle}, {"right", c.right}, {"violation", c.violation}};
}

inline json analysis_json(const Analysis& an) {
    const auto& rel = an.relaxation;
    int pure = 0, plus = 0, minus = 0;
    for (std::size_t w = 0; w < an.masks.pure.size(); ++w) {
        pure += an.masks.pure[w];
        plus += an.masks.pure_plus[w];
        minus += an.masks.pure_minus[w];
    }
    json pairing_rows = json::array();
    for (const auto& row : an.pairing.rows) pairing_rows.push_back({{"level", row.level}, {"residual", row.residual}});
    json j = {
        {"alpha_scheme", an.alpha_scheme},
        {"duality",
         {{"alpha", an.duality.alpha},
          {"beta", an.duality.beta},
          {"gap", an.duality.gap},
          {"kernel_residual", an.duality.kernel_residual},
          {"orthogonality", an.duality.orthogonality}}},
        {"limits",
         {{"window", an.bundle.windows.size},
          {"windows", an.bundle.windows.num_windows()},
          {"eta", an.masks.eta},
          {"pure_windows", pure},
          {"pure_plus_windows", plus},
          {"pure_minus_windows", minus},
          {"omega0_measure", an.masks.omega0_measure},
          {"guard_measure", an.masks.guard_measure},
          {"second_moment", rel.gap.second_moment},
          {"mean_square", rel.gap.mean_square},
          {"d", rel.gap.d}}},
        {"relaxation",
         {{"I", rel.I},
          {"omega0",
           {{"tilt", rel.omega0.tilt},
            {"B", rel.omega0.B},
            {"energy", rel.omega0.energy},
            {"pairing", rel.omega0.pairing},
            {"dual_energy", rel.omega0.dual_energy},
            {"den", rel.omega0.den}}},
          {"theta",
           {{"coefficient_1", rel.theta.coeff1},
            {"printed", rel.theta.printed},
            {"coefficient_1_in_range", rel.theta.coeff1_in_range},
            {"printed_in_range", rel.theta.printed_in_range},
            {"zero_branch", rel.theta.zero_branch},
            {"den", rel.theta.den},
            {"tol_den", rel.theta.tol_den}}},
          {"coefficient_1", formulas_json(rel.coeff1)},
          {"printed", formulas_json(rel.printed)},
          {"verdict", rel.verdict},
          {"chain", {{"printed", chain_json(rel.chain_printed)}, {"half", chain_json(rel.chain_half)}}},
          {"lower_bound", rel.lower_bound.value},
          {"lower_bound_q", detail::matrix_json(rel.lower_bound.q)},
          {"lower_bound_gap", rel.lower_bound_gap},
          {"stuck", rel.stuck},
          {"guard_measure", rel.guard_measure}}},
        {"young_measure",
         {{"energy_residual", an.ym_energy_residual},
          {"second_moment",
           {{"second_moment", an.second_moment.second_moment},
            {"mean_square", an.second_moment.mean_square},
            {"difference", an.second_moment.difference},
            {"d", an.second_moment.d},
            {"mismatch", an.second_moment.mismatch}}},
          {"dirac",
           {{"threshold", an.dirac.threshold},
            {"checked", an.dirac.checked},
            {"failures", an.dirac.failures},
            {"max_variance", an.dirac.max_variance},
            {"pass", an.dirac.pass()}}},
          {"variance_identity",
           {{"checked", an.variance.checked},
            {"failed", an.variance.failed},
            {"worst_relative", an.variance.worst_relative}}}}},
        {"pairing",
         {{"limit_value", an.pairing.limit_value},
          {"rows", pairing_rows},
          {"level_residual", an.pairing.level_residual},
          {"increasing", an.pairing.increasing}}},
    };
    if (an.exact_alpha) j["exact_alpha_1d"] = *an.exact_alpha;
    return j;
}

inline json trace_json(const RunTrace& t) {
    json levels = json::array();
    for (std::size_t l = 0; l < t.levels.size(); ++l) {
        const auto& s = t.levels[l];
        levels.push_back({{"level", l},
                          {"resolution", std::vector<int>(s.mesh.counts.begin(), s.mesh.counts.begin() + s.mesh.dim)},
                          {"alpha", s.alpha},
                          {"J", s.J},
                          {"fixed_point", s.fixed_point},
                          {"steps", s.steps}});
    }
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back({{"level", s.level},
                         {"step", s.step},
                         {"alpha", s.alpha},
                         {"J", s.J},
                         {"gap", s.gap},
                         {"flips", s.flips},
                         {"kernel_residual", s.kernel_residual},
                         {"orthogonality", s.orthogonality},
                         {"energy_identity", s.energy_identity},
                         {"representation_spread", s.representation_spread},
                         {"iterations", s.iterations},
                         {"solver_residual", s.solver_residual}});
    return {{"seed", to_string(t.seed)},
            {"seed_index", t.seed_index},
            {"rng", t.rng},
            {"laminate_compatible", t.laminate_compatible},
            {"budget_exhausted", t.budget_exhausted},
            {"final_alpha", t.final_alpha()},
            {"levels", levels},
            {"steps", steps}};
}

/// Everything except wall-clock time; byte-identical for a fixed config and seed.
inline json report_json(const ExperimentResult& r) {
    json traces = json::array();
    for (const auto& t : r.traces) traces.push_back(trace_json(t));
    json levels = json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"level", l.level},
                          {"resolution", std::vector<int>(l.resolution.begin(), l.resolution.begin() + r.config.descent.dimension)},
                          {"alpha", l.alpha},
                          {"J", l.J},
                          {"fixed_point", l.fixed_point},
                          {"steps", l.steps},
                          {"window", l.window},
                          {"d", l.d},
                          {"den", l.den},
                          {"theta_coefficient_1", l.theta_coeff1},
                          {"theta_printed", l.theta_printed},
                          {"zero_branch", l.zero_branch}});
    const auto& c = r.checks;
    json j = {
        {"version", kVersion},
        {"config", config_json(r.config)},
        {"traces", traces},
        {"best_seed", r.best},
        {"levels", levels},
        {"checks",
         {{"solves", c.solves},
          {"max_gap_rel", c.max_gap_rel},
          {"max_kernel_residual", c.max_kernel_residual},
          {"max_orthogonality", c.max_orthogonality},
          {"max_energy_identity", c.max_energy_identity},
          {"max_representation_spread", c.max_representation_spread},
          {"max_descent_violation", c.max_descent_violation},
          {"max_alpha_increase", c.max_alpha_increase},
          {"max_level_increase", c.max_level_increase}}},
    };
    j.update(analysis_json(r.analysis));
    return j;
}

inline json timing_json(const ExperimentResult& r) {
    json per_trace = json::array();
    for (const auto& t : r.traces) {
        double s = 0.0;
        for (const auto& st : t.steps) s += st.seconds;
        per_trace.push_back({{"seed_index", t.seed_index}, {"solve_seconds", s}});
    }
    return {{"total_seconds", r.seconds}, {"traces", per_trace}};
}

inline std::string trace_csv(const RunTrace& t) {
    std::ostringstream out;
    out << "level,step,alpha,gap,flips\n";
    for (const auto& s : t.steps)
        out << s.level << ',' << s.step << ',' << detail::num(s.alpha) << ',' << detail::num(s.gap) << ',' << s.flips
            << '\n';
    return out.str();
}

inline std::string matrix_header(int dim, const std::string& name) {
    return dim == 1 ? name : name + "_xx," + name + "_xy," + name + "_yy";
}

inline std::string matrix_values(const SymMat& m) {
    if (m.dim == 1) return detail::num(m.v[0]);
    return detail::num(m.v[0]) + ',' + detail::num(m.v[1]) + ',' + detail::num(m.v[2]);
}

inline std::string element_prefix(const StructuredMesh& mesh, std::size_t e) {
    std::string s = std::to_string(e) + ',' + detail::num(mesh.centroid[e][0]);
    if (mesh.dim == 2) s += ',' + detail::num(mesh.centroid[e][1]);
    return s;
}

inline std::string element_header(const StructuredMesh& mesh) {
    return mesh.dim == 1 ? "elem_index,x_center" : "elem_index,x_center,y_center";
}

inline std::string displacement_csv(const DisplacementField& u, const StructuredMesh& mesh) {
    std::ostringstream out;
    out << (mesh.dim == 1 ? "node_index,x,u_x\n" : "node_index,x,y,u_x,u_y\n");
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        out << n << ',' << detail::num(mesh.nodes[n][0]);
        if (mesh.dim == 2) out << ',' << detail::num(mesh.nodes[n][1]);
        for (int c = 0; c < mesh.dim; ++c) out << ',' << detail::num(u.at(n, c));
        out << '\n';
    }
    return out.str();
}

inline std::string phase_csv(const PhaseField& chi, const StructuredMesh& mesh) {
    std::ostringstream out;
    out << element_header(mesh) << ",chi_a,chi_b,psi\n";
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        out << element_prefix(mesh, e) << ',' << int(chi.chi_a[e]) << ',' << (1 - int(chi.chi_a[e])) << ','
            << chi.psi(e) << '\n';
    return out.str();
}

template <class Tag>
std::string matrix_field_csv(const ElementMatrixField<Tag>& f, const StructuredMesh& mesh, const std::string& name) {
    std::ostringstream out;
    out << element_header(mesh) << ',' << matrix_header(mesh.dim, name) << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << element_prefix(mesh, e) << ',' << matrix_values(f[e]) << '\n';
    return out.str();
}

inline std::string windows_csv(const Analysis& an) {
    const auto& b = an.bundle;
    const int dim = b.mesh.dim;
    std::ostringstream out;
    out << "window_id,measure,chi_a,chi_b,psi," << matrix_header(dim, "eps") << ',' << matrix_header(dim, "p")
        << ",pure,pure_plus,pure_minus\n";
    for (std::size_t w = 0; w < b.windows.num_windows(); ++w)
        out << w << ',' << detail::num(b.windows.measure[w]) << ',' << detail::num(b.chi_a_avg[w]) << ','
            << detail::num(b.chi_b_avg[w]) << ',' << detail::num(b.psi_avg[w]) << ',' << matrix_values(b.eps_avg[w])
            << ',' << matrix_values(b.p_avg[w]) << ',' << int(an.masks.pure[w]) << ',' << int(an.masks.pure_plus[w])
            << ',' << int(an.masks.pure_minus[w]) << '\n';
    return out.str();
}

inline std::string ym_csv(const std::vector<WindowMeasure>& ms, int dim) {
    std::ostringstream out;
    out << "window_id,weight," << matrix_header(dim, "lambda") << '\n';
    for (const auto& m : ms)
        for (const auto& at : m.atoms) out << m.window << ',' << detail::num(at.weight) << ',' << matrix_values(at.lambda) << '\n';
    return out.str();
}

/// Writes the full run directory and returns its path.
inline fs::path emit_outputs(const ExperimentResult& r, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    detail::write_text(dir / "report.json", report_json(r).dump(2) + "\n");
    detail::write_text(dir / "timing.json", timing_json(r).dump(2) + "\n");
    detail::write_text(dir / "config.ini", r.config.source_text);
    detail::write_text(dir / "alpha_trace.csv", trace_csv(r.best_trace()));
    if (r.traces.size() > 1)
        for (const auto& t : r.traces)
            detail::write_text(dir / ("alpha_trace_seed" + std::to_string(t.seed_index) + ".csv"), trace_csv(t));

    std::ostringstream alpha_dat, theta_dat;
    alpha_dat << "# level alpha\n";
    theta_dat << "# level theta_coefficient_1 theta_printed\n";
    for (const auto& l : r.levels) {
        alpha_dat << l.level << ' ' << detail::num(l.J) << '\n';
        theta_dat << l.level << ' ' << detail::num(l.theta_coeff1) << ' ' << detail::num(l.theta_printed) << '\n';
    }
    detail::write_text(dir / "alpha_vs_level.dat", alpha_dat.str());
    detail::write_text(dir / "theta_vs_level.dat", theta_dat.str());

    const auto& an = r.analysis;
    detail::write_text(dir / "ym_atoms.csv", ym_csv(an.measures, an.bundle.mesh.dim));
    if (r.config.write_fields) {
        const fs::path f = dir / "fields";
        fs::create_directories(f, ec);
        if (ec) throw std::runtime_error("cannot create '" + f.string() + "': " + ec.message());
        const LevelState& fin = r.best_trace().finest();
        detail::write_text(f / "u.csv", displacement_csv(fin.u, fin.mesh));
        detail::write_text(f / "chi.csv", phase_csv(fin.chi, fin.mesh));
        detail::write_text(f / "strain.csv", matrix_field_csv(an.bundle.eps, fin.mesh, "eps"));
        detail::write_text(f / "dual.csv", matrix_field_csv(fin.p, fin.mesh, "p"));
        detail::write_text(f / "windows.csv", windows_csv(an));
    }
    return dir;
}

/// Rows of a CSV file with a header line; values parsed as doubles.
inline std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::istringstream in(detail::read_text(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Finest-level state of the best trace rebuilt from a run directory's dumps.
inline LevelState load_finest(const fs::path& dir, const RunConfig& cfg) {
    LevelState s;
    s.mesh = level_mesh(cfg.descent, cfg.descent.levels - 1);
    s.coeffs = cfg.coefficients(s.mesh);
    const auto urows = read_csv(dir / "fields" / "u.csv");
    const auto crows = read_csv(dir / "fields" / "chi.csv");
    if (urows.size() != s.mesh.num_nodes() || crows.size() != s.mesh.num_elements())
        throw ConfigError("field dumps in '" + dir.string() + "' do not match the configured finest mesh");
    s.u = DisplacementField(s.mesh);
    const int dim = s.mesh.dim;
    for (std::size_t n = 0; n < urows.size(); ++n)
        for (int c = 0; c < dim; ++c) s.u.at(n, c) = urows[n][1 + dim + c];
    s.chi = PhaseField(s.mesh.num_elements());
    for (std::size_t e = 0; e < crows.size(); ++e) s.chi.chi_a[e] = crows[e][1 + dim] != 0.0 ? 1 : 0;
    s.p = dual_variable(s.u, s.chi, s.coeffs, s.mesh);
    s.alpha = mixture_energy(s.u, s.chi, s.coeffs, s.mesh);
    s.J = double_well_energy(s.u, s.coeffs, s.mesh);
    return s;
}

inline json load_report(const fs::path& dir) {
    try {
        return json::parse(detail::read_text(dir / "report.json"));
    } catch (const json::parse_error& e) {
        throw ConfigError("report.json in '" + dir.string() + "' is not valid JSON: " + e.what());
    }
}

} // namespace dwell
