#pragma once

/**
 * @file config.hpp
 * @brief Line-oriented run configuration: `[section]` headers and
 * `key = value` lines, `#` or `;` comments. Unknown keys are rejected;
 * every error names the key and the line.
 */

#include "dwell/descent.hpp"
#include "dwell/errors.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dwell {

struct PhaseSpec {
    double a = 1.0, b = 1.0;
    SymMat C = SymMat::scalar(0.0), D = SymMat::scalar(0.0);
};

struct RegionSpec {
    std::string name;
    std::array<double, 4> box{0.0, 0.0, 0.0, 0.0};  ///< x0 x1 y0 y1
    PhaseSpec coeffs;
};

struct ToleranceSpec {
    double solver = 1e-10;
    int max_iter_factor = 20;
    double eta = 0.05;
    double dirac = 0.0;          ///< 0 = automatic
    double tol_eq_rel = 1e-12;
    double guard_rel = 1e-8;
    double tol_den_rel = 1e-12;
    double theta_slack = 0.02;
    double dist_rel = 1e-3;
    double formula_rel = 1e-3;
};

struct RunConfig {
    DescentOptions descent;
    std::vector<SeedKind> seeds{SeedKind::Laminate};
    PhaseSpec base;
    std::vector<RegionSpec> regions;
    ToleranceSpec tol;
    int window = 8;
    std::string output_dir = "run";
    bool write_fields = true;
    std::string source_text;  ///< verbatim config, copied into the run directory

    [[nodiscard]] CoefficientSet coefficients(const StructuredMesh& mesh) const {
        CoefficientSet k;
        const std::size_t n = mesh.num_elements();
        k.a.assign(n, base.a);
        k.b.assign(n, base.b);
        k.C.assign(n, base.C);
        k.D.assign(n, base.D);
        for (std::size_t e = 0; e < n; ++e) {
            const Point& x = mesh.centroid[e];
            for (const auto& r : regions) {
                const bool in_x = x[0] >= r.box[0] && x[0] <= r.box[1];
                const bool in_y = mesh.dim == 1 || (x[1] >= r.box[2] && x[1] <= r.box[3]);
                if (in_x && in_y) {
                    k.a[e] = r.coeffs.a;
                    k.b[e] = r.coeffs.b;
                    k.C[e] = r.coeffs.C;
                    k.D[e] = r.coeffs.D;
                }
            }
        }
        k.delta = std::min(*std::min_element(k.a.begin(), k.a.end()), *std::min_element(k.b.begin(), k.b.end()));
        k.validate();
        return k;
    }

    [[nodiscard]] CoefficientFactory factory() const {
        return [cfg = *this](const StructuredMesh& m) { return cfg.coefficients(m); };
    }

    [[nodiscard]] std::string fingerprint() const { return source_text; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

class Reader {
public:
    Reader(std::string where) : where_(std::move(where)) {}

    [[noreturn]] void fail(const std::string& key, int line, const std::string& msg) const {
        throw ConfigError(where_ + ":" + std::to_string(line) + ": " + key + ": " + msg);
    }

    double number(const std::string& key, const Entry& en) const {
        double v = 0.0;
        const std::string s = trim(en.value);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, en.line, "expected a number, got '" + s + "'");
        return v;
    }
    std::vector<double> numbers(const std::string& key, const Entry& en) const {
        std::vector<double> out;
        for (const auto& t : split_ws(en.value)) out.push_back(number(key, Entry{t, en.line}));
        return out;
    }
    long integer(const std::string& key, const Entry& en) const {
        long v = 0;
        const std::string s = trim(en.value);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, en.line, "expected an integer, got '" + s + "'");
        return v;
    }
    bool boolean(const std::string& key, const Entry& en) const {
        const std::string s = trim(en.value);
        if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
        if (s == "false" || s == "no" || s == "off" || s == "0") return false;
        fail(key, en.line, "expected true/false, got '" + s + "'");
    }
    double positive(const std::string& key, const Entry& en) const {
        const double v = number(key, en);
        if (!(v > 0.0)) fail(key, en.line, "must be > 0");
        return v;
    }

private:
    std::string where_;
};

struct Section {
    std::string kind;   ///< mesh, coefficients, region, ...
    std::string name;   ///< region name
    int line = 0;
    std::map<std::string, Entry> entries;
};

inline SymMat parse_matrix(const Reader& rd, const std::string& key, const Entry& en, int dim) {
    const auto v = rd.numbers(key, en);
    if (dim == 1) {
        if (v.size() != 1) rd.fail(key, en.line, "expected 1 value in one dimension");
        return SymMat::scalar(v[0]);
    }
    if (v.size() != 3) rd.fail(key, en.line, "expected 3 values (xx xy yy) in two dimensions");
    return SymMat::make2(v[0], v[1], v[2]);
}

inline void read_phase(const Reader& rd, const Section& s, int dim, PhaseSpec& p, const std::string& prefix) {
    for (const auto& [key, en] : s.entries) {
        const std::string full = prefix + key;
        if (key == "a")
            p.a = rd.positive(full, en);
        else if (key == "b")
            p.b = rd.positive(full, en);
        else if (key == "C")
            p.C = parse_matrix(rd, full, en, dim);
        else if (key == "D")
            p.D = parse_matrix(rd, full, en, dim);
    }
}

} // namespace detail

inline LaminateDirection parse_direction(const std::string& s) {
    if (s == "auto") return LaminateDirection::Auto;
    if (s == "x") return LaminateDirection::X;
    if (s == "y") return LaminateDirection::Y;
    if (s == "diagonal") return LaminateDirection::Diagonal;
    throw ConfigError("unknown laminate direction '" + s + "'");
}

inline SeedKind parse_seed(const std::string& s) {
    if (s == "zero") return SeedKind::Zero;
    if (s == "random") return SeedKind::Random;
    if (s == "laminate") return SeedKind::Laminate;
    if (s == "perturbed") return SeedKind::PerturbedLaminate;
    throw ConfigError("unknown seed '" + s + "'");
}

/// Parses configuration text; `where` labels error messages.
inline RunConfig parse_config_text(const std::string& text, const std::string& where = "config") {
    using detail::Entry;
    using detail::Section;
    const detail::Reader rd(where);
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') rd.fail("section", line_no, "unterminated section header");
            const auto parts = detail::split_ws(line.substr(1, line.size() - 2));
            if (parts.empty()) rd.fail("section", line_no, "empty section header");
            Section s;
            s.kind = parts[0];
            s.line = line_no;
            static const std::set<std::string> kinds{"mesh", "coefficients", "region", "strategy",
                                                     "tolerances", "limits", "output"};
            if (!kinds.count(s.kind)) rd.fail(s.kind, line_no, "unknown section");
            if (s.kind == "region") {
                if (parts.size() != 2) rd.fail("region", line_no, "expected [region NAME]");
                s.name = parts[1];
            } else if (parts.size() != 1) {
                rd.fail(s.kind, line_no, "unexpected text after section name");
            }
            for (const auto& prev : sections)
                if (prev.kind == s.kind && prev.name == s.name)
                    rd.fail(s.kind, line_no, "duplicate section (first at line " + std::to_string(prev.line) + ")");
            sections.push_back(std::move(s));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) rd.fail(line, line_no, "expected key = value");
        if (sections.empty()) rd.fail(detail::trim(line.substr(0, eq)), line_no, "key outside of any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        auto& entries = sections.back().entries;
        const std::string label = sections.back().kind + "." + key;
        if (entries.count(key)) rd.fail(label, line_no, "duplicate key");
        if (value.empty()) rd.fail(label, line_no, "missing value");
        entries[key] = Entry{value, line_no};
    }

    static const std::map<std::string, std::set<std::string>> allowed{
        {"mesh", {"dimension", "extents", "resolution", "levels"}},
        {"coefficients", {"a", "b", "C", "D"}},
        {"region", {"box", "a", "b", "C", "D"}},
        {"strategy", {"seeds", "laminate_period", "direction", "inject", "noise", "max_steps", "rng_seed"}},
        {"tolerances", {"solver", "max_iter_factor", "eta", "dirac", "tol_eq_rel", "guard_rel", "tol_den_rel",
                        "theta_slack", "dist_rel", "formula_rel"}},
        {"limits", {"window"}},
        {"output", {"directory", "fields"}},
    };
    const Section* mesh = nullptr;
    for (const auto& s : sections) {
        for (const auto& [key, en] : s.entries)
            if (!allowed.at(s.kind).count(key)) rd.fail(s.kind + "." + key, en.line, "unknown key");
        if (s.kind == "mesh") mesh = &s;
    }
    if (!mesh) throw ConfigError(where + ": missing required section [mesh]");

    RunConfig cfg;
    cfg.source_text = text;
    auto& d = cfg.descent;
    const auto require = [&](const Section& s, const std::string& key) -> const Entry& {
        auto it = s.entries.find(key);
        if (it == s.entries.end())
            rd.fail(s.kind + "." + key, s.line, "missing required key");
        return it->second;
    };
    {
        const Entry& en = require(*mesh, "dimension");
        const long dim = rd.integer("mesh.dimension", en);
        if (dim != 1 && dim != 2) rd.fail("mesh.dimension", en.line, "must be 1 or 2");
        d.dimension = static_cast<int>(dim);
        const Entry& res = require(*mesh, "resolution");
        const auto rv = detail::split_ws(res.value);
        if (static_cast<int>(rv.size()) != d.dimension)
            rd.fail("mesh.resolution", res.line, "expected " + std::to_string(d.dimension) + " value(s)");
        for (int a = 0; a < d.dimension; ++a) {
            const long r = rd.integer("mesh.resolution", Entry{rv[a], res.line});
            if (r < 1) rd.fail("mesh.resolution", res.line, "must be >= 1");
            d.base_resolution[a] = static_cast<int>(r);
        }
        if (d.dimension == 1) d.base_resolution[1] = 1;
        d.extents = {1.0, 1.0};
        if (auto it = mesh->entries.find("extents"); it != mesh->entries.end()) {
            const auto ev = rd.numbers("mesh.extents", it->second);
            if (static_cast<int>(ev.size()) != d.dimension)
                rd.fail("mesh.extents", it->second.line, "expected " + std::to_string(d.dimension) + " value(s)");
            for (int a = 0; a < d.dimension; ++a) {
                if (!(ev[a] > 0.0)) rd.fail("mesh.extents", it->second.line, "must be > 0");
                d.extents[a] = ev[a];
            }
        }
        if (auto it = mesh->entries.find("levels"); it != mesh->entries.end()) {
            const long l = rd.integer("mesh.levels", it->second);
            if (l < 1 || l > 12) rd.fail("mesh.levels", it->second.line, "must be in [1, 12]");
            d.levels = static_cast<int>(l);
        }
    }
    const int dim = d.dimension;
    cfg.base.C = SymMat(dim);
    cfg.base.D = SymMat(dim);
    for (const auto& s : sections) {
        if (s.kind == "coefficients") {
            detail::read_phase(rd, s, dim, cfg.base, "coefficients.");
        } else if (s.kind == "region") {
            RegionSpec r;
            r.name = s.name;
            r.coeffs = cfg.base;
            const std::string pre = "region " + s.name + ".";
            const Entry& box = require(s, "box");
            const auto bv = rd.numbers(pre + "box", box);
            if (static_cast<int>(bv.size()) != 2 * dim)
                rd.fail(pre + "box", box.line, "expected " + std::to_string(2 * dim) + " values");
            for (std::size_t i = 0; i < bv.size(); ++i) r.box[i] = bv[i];
            detail::read_phase(rd, s, dim, r.coeffs, pre);
            cfg.regions.push_back(r);
        } else if (s.kind == "strategy") {
            for (const auto& [key, en] : s.entries) {
                const std::string full = "strategy." + key;
                if (key == "seeds") {
                    cfg.seeds.clear();
                    for (const auto& t : detail::split_ws(en.value)) {
                        try {
                            cfg.seeds.push_back(parse_seed(t));
                        } catch (const ConfigError& e) {
                            rd.fail(full, en.line, e.what());
                        }
                    }
                } else if (key == "laminate_period") {
                    const long p = rd.integer(full, en);
                    if (p < 1) rd.fail(full, en.line, "must be >= 1");
                    d.laminate_period = static_cast<int>(p);
                } else if (key == "direction") {
                    try {
                        d.direction = parse_direction(en.value);
                    } catch (const ConfigError& e) {
                        rd.fail(full, en.line, e.what());
                    }
                } else if (key == "inject") {
                    d.inject = rd.boolean(full, en);
                } else if (key == "noise") {
                    d.noise = rd.number(full, en);
                    if (d.noise < 0.0 || d.noise > 1.0) rd.fail(full, en.line, "must be in [0, 1]");
                } else if (key == "max_steps") {
                    const long m = rd.integer(full, en);
                    if (m < 1) rd.fail(full, en.line, "must be >= 1");
                    d.alternation.max_steps = static_cast<int>(m);
                } else if (key == "rng_seed") {
                    const long r = rd.integer(full, en);
                    if (r < 0) rd.fail(full, en.line, "must be >= 0");
                    d.rng_seed = static_cast<std::uint64_t>(r);
                }
            }
        } else if (s.kind == "tolerances") {
            auto& t = cfg.tol;
            for (const auto& [key, en] : s.entries) {
                const std::string full = "tolerances." + key;
                if (key == "max_iter_factor") {
                    const long m = rd.integer(full, en);
                    if (m < 1) rd.fail(full, en.line, "must be >= 1");
                    t.max_iter_factor = static_cast<int>(m);
                    continue;
                }
                const double v = rd.positive(full, en);
                if (key == "solver") t.solver = v;
                else if (key == "eta") t.eta = v;
                else if (key == "dirac") t.dirac = v;
                else if (key == "tol_eq_rel") t.tol_eq_rel = v;
                else if (key == "guard_rel") t.guard_rel = v;
                else if (key == "tol_den_rel") t.tol_den_rel = v;
                else if (key == "theta_slack") t.theta_slack = v;
                else if (key == "dist_rel") t.dist_rel = v;
                else if (key == "formula_rel") t.formula_rel = v;
            }
            if (t.guard_rel < t.tol_eq_rel) rd.fail("tolerances.guard_rel", s.line, "must be >= tol_eq_rel");
        } else if (s.kind == "limits") {
            if (auto it = s.entries.find("window"); it != s.entries.end()) {
                const long w = rd.integer("limits.window", it->second);
                if (w < 1) rd.fail("limits.window", it->second.line, "must be >= 1");
                cfg.window = static_cast<int>(w);
            }
        } else if (s.kind == "output") {
            if (auto it = s.entries.find("directory"); it != s.entries.end()) cfg.output_dir = it->second.value;
            if (auto it = s.entries.find("fields"); it != s.entries.end())
                cfg.write_fields = rd.boolean("output.fields", it->second);
        }
    }
    d.alternation.solve.tol = cfg.tol.solver;
    d.alternation.solve.max_iter_factor = cfg.tol.max_iter_factor;
    if (cfg.seeds.empty()) throw ConfigError(where + ": strategy.seeds must list at least one seed");

    // window must divide the finest element count on every axis
    for (int a = 0; a < dim; ++a) {
        const long finest = static_cast<long>(d.base_resolution[a]) << (d.levels - 1);
        if (finest % cfg.window != 0)
            throw ConfigError(where + ": limits.window = " + std::to_string(cfg.window) +
                              " does not divide the finest resolution " + std::to_string(finest));
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

} // namespace dwell
