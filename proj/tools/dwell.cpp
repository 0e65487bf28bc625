// Command-line driver: solve, verify, ym, oracle, report.

#include "dwell/dwell.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kVerifyFailed = 4;

using dwell::json;
namespace fs = std::filesystem;

int cmd_solve(const std::string& config_path, const std::string& out_override, bool quiet) {
    dwell::RunConfig cfg = dwell::parse_config(config_path);
    const fs::path out = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
    const dwell::ExperimentResult r = dwell::run_experiment(cfg);
    dwell::emit_outputs(r, out);
    if (!quiet) {
        const auto& an = r.analysis;
        std::cout << "run directory   " << out.string() << "\n"
                  << "best seed       " << dwell::to_string(r.best_trace().seed) << " (#" << r.best << ")\n"
                  << "alpha           " << dwell::detail::num(an.alpha_scheme) << "\n";
        if (an.exact_alpha) std::cout << "exact alpha     " << dwell::detail::num(*an.exact_alpha) << "\n";
        std::cout << "lower bound     " << dwell::detail::num(an.relaxation.lower_bound.value)
                  << (an.relaxation.stuck ? "  [stuck: alpha far above bound]" : "") << "\n"
                  << "theta (coef 1)  " << dwell::detail::num(an.relaxation.theta.coeff1) << "\n"
                  << "theta (printed) " << dwell::detail::num(an.relaxation.theta.printed) << "\n"
                  << "verdict         " << an.relaxation.verdict << "\n"
                  << "formula         " << dwell::detail::num(an.relaxation.coeff1.formulas.tilt_form_half) << "\n"
                  << "seconds         " << r.seconds << "\n";
    }
    return kOk;
}

struct Comparison {
    std::string key;
    double stored = 0.0, recomputed = 0.0, tol = 0.0;
    [[nodiscard]] bool ok() const { return std::abs(stored - recomputed) <= tol; }
};

int cmd_verify(const std::string& dir_str, double rel_tol) {
    const fs::path dir(dir_str);
    const dwell::RunConfig cfg = dwell::parse_config((dir / "config.ini").string());
    const json stored = dwell::load_report(dir);
    const dwell::LevelState fin = dwell::load_finest(dir, cfg);
    const dwell::Analysis an = dwell::analyze({fin}, cfg);

    const auto tol = [rel_tol](double v) { return rel_tol * (1.0 + std::abs(v)); };
    std::vector<Comparison> rows;
    const auto add = [&](const std::string& key, double s, double r) { rows.push_back({key, s, r, tol(s)}); };
    const auto& rel = an.relaxation;
    add("alpha_scheme", stored.at("alpha_scheme").get<double>(), an.alpha_scheme);
    add("limits.d", stored.at("limits").at("d").get<double>(), rel.gap.d);
    add("relaxation.I", stored.at("relaxation").at("I").get<double>(), rel.I);
    add("relaxation.omega0.den", stored.at("relaxation").at("omega0").at("den").get<double>(), rel.omega0.den);
    add("relaxation.theta.coefficient_1", stored.at("relaxation").at("theta").at("coefficient_1").get<double>(),
        rel.theta.coeff1);
    add("relaxation.coefficient_1.halved.tilt_form",
        stored.at("relaxation").at("coefficient_1").at("halved").at("tilt_form").get<double>(),
        rel.coeff1.formulas.tilt_form_half);
    add("young_measure.energy_residual", stored.at("young_measure").at("energy_residual").get<double>(),
        an.ym_energy_residual);

    bool ok = true;
    json out = json::object();
    for (const auto& c : rows) {
        out[c.key] = {{"stored", c.stored}, {"recomputed", c.recomputed}, {"ok", c.ok()}};
        ok = ok && c.ok();
    }
    const double gap_rel = std::abs(an.duality.gap) / (1.0 + std::abs(an.duality.alpha));
    out["duality_gap_rel"] = {{"value", gap_rel}, {"ok", gap_rel <= 1e-8}};
    ok = ok && gap_rel <= 1e-8;
    out["pass"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? kOk : kVerifyFailed;
}

int cmd_ym(const std::string& dir_str) {
    const fs::path dir(dir_str);
    const dwell::RunConfig cfg = dwell::parse_config((dir / "config.ini").string());
    const dwell::LevelState fin = dwell::load_finest(dir, cfg);
    const dwell::Analysis an = dwell::analyze({fin}, cfg);
    dwell::detail::write_text(dir / "ym_atoms.csv", dwell::ym_csv(an.measures, fin.mesh.dim));
    const json j = dwell::analysis_json(an);
    std::cout << j.at("young_measure").dump(2) << "\n";
    return kOk;
}

int cmd_oracle(const std::vector<std::string>& params) {
    std::map<std::string, double> v{{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", -1.0}, {"length", 1.0}};
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw dwell::ConfigError("oracle: expected key=value, got '" + p + "'");
        const std::string key = p.substr(0, eq);
        if (!v.count(key)) throw dwell::ConfigError("oracle: unknown parameter '" + key + "'");
        try {
            v[key] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
            throw dwell::ConfigError("oracle: parameter '" + key + "' is not a number");
        }
    }
    if (!(v["length"] > 0.0)) throw dwell::ConfigError("oracle: length must be > 0");
    const auto env = dwell::oracle::envelope_1d(v["a"], v["c"], v["b"], v["d"]);
    json pieces = json::array();
    for (const auto& pc : env.pieces) {
        json jp = {{"kind", pc.kind == dwell::oracle::EnvelopePiece::Kind::Affine ? "affine" : "parabola"},
                   {"lo", std::isinf(pc.lo) ? json("-inf") : json(pc.lo)},
                   {"hi", std::isinf(pc.hi) ? json("inf") : json(pc.hi)}};
        if (pc.kind == dwell::oracle::EnvelopePiece::Kind::Affine) {
            jp["slope"] = pc.slope;
            jp["intercept"] = pc.intercept;
        } else {
            jp["parabola"] = pc.parabola == 0 ? "a" : "b";
        }
        pieces.push_back(jp);
    }
    const json out = {{"parameters", v},
                      {"tangent_slopes", env.crossings},
                      {"pieces", pieces},
                      {"envelope_at_zero", env(0.0)},
                      {"exact_alpha", v["length"] * env(0.0)}};
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_report(const std::string& dir_str) {
    const json r = dwell::load_report(fs::path(dir_str));
    const auto& rel = r.at("relaxation");
    const auto& ym = r.at("young_measure");
    std::cout << "version          " << r.at("version").get<std::string>() << "\n"
              << "alpha            " << r.at("alpha_scheme").dump() << "\n";
    if (r.contains("exact_alpha_1d")) std::cout << "exact alpha (1D) " << r.at("exact_alpha_1d").dump() << "\n";
    std::cout << "lower bound      " << rel.at("lower_bound").dump() << (rel.at("stuck").get<bool>() ? "  [stuck]" : "")
              << "\n"
              << "d                " << r.at("limits").at("d").dump() << "\n"
              << "theta coef-1     " << rel.at("theta").at("coefficient_1").dump() << "\n"
              << "theta printed    " << rel.at("theta").at("printed").dump() << "\n"
              << "verdict          " << rel.at("verdict").get<std::string>() << "\n"
              << "formula (coef-1) " << rel.at("coefficient_1").at("halved").at("tilt_form").dump() << "\n"
              << "ym energy resid  " << ym.at("energy_residual").dump() << "\n"
              << "dirac pass       " << ym.at("dirac").at("pass").dump() << "\n"
              << "levels:\n";
    for (const auto& l : r.at("levels"))
        std::cout << "  " << l.at("level").dump() << "  alpha " << l.at("J").dump() << "  theta "
                  << l.at("theta_coefficient_1").dump() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for two-well quadratic energies"};
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir;
    bool quiet = false;
    double verify_tol = 1e-10;
    std::vector<std::string> oracle_params;

    auto* solve = app.add_subcommand("solve", "run the descent pipeline from a config file");
    solve->add_option("config", config_path, "configuration file")->required();
    solve->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
    solve->add_flag("-q,--quiet", quiet, "no summary on stdout");

    auto* verify = app.add_subcommand("verify", "recompute report values from a run directory's dumps");
    verify->add_option("run-dir", run_dir, "run directory")->required();
    verify->add_option("--tol", verify_tol, "relative tolerance for stored vs recomputed values");

    auto* ym = app.add_subcommand("ym", "rebuild the per-window Young measures of a run");
    ym->add_option("run-dir", run_dir, "run directory")->required();

    auto* orc = app.add_subcommand("oracle", "1D envelope and exact infimum, e.g. a=1 b=1 c=1 d=-1 length=1");
    orc->add_option("params", oracle_params, "key=value pairs");

    auto* rep = app.add_subcommand("report", "summarize report.json of a run");
    rep->add_option("run-dir", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*solve) return cmd_solve(config_path, out_dir, quiet);
        if (*verify) return cmd_verify(run_dir, verify_tol);
        if (*ym) return cmd_ym(run_dir);
        if (*orc) return cmd_oracle(oracle_params);
        if (*rep) return cmd_report(run_dir);
    } catch (const dwell::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "configuration error: malformed report: " << e.what() << "\n";
        return kConfigError;
    } catch (const dwell::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
