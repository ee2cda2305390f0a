// Sectioned key/value run configuration. Strict parsing: unknown keys,
// unknown sections, and malformed values are hard errors, so a typo can
// never silently fall back to a default. emit_config produces the
// canonical form (defaults filled, fixed ordering, 17-significant-digit
// numbers) that every subcommand echoes for reproducibility.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfp/grid.hpp"
#include "nfp/problem.hpp"

namespace nfp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputConfig {
    std::string csv = "diagnostics.csv";
    std::string summary = "summary.json";
};

struct AnalysisConfig {
    double fit_t_lo = -1.0;  // negative: second half of the run
    double fit_t_hi = -1.0;
    double equilibrium_tol = 1e-12;
};

struct GronwallConfig {
    double c7 = 1.0;
    double c8 = 0.0;
    double c9 = 0.0;
    double g0 = 1.0;
    double t_end = 20.0;
    double rtol = 1e-6;
};

struct InterpConfig {
    double c2 = 0.5;
    double c3 = 2.0;
    int trials = 300;     // Sobolev-estimate trials
    int samples = 1000;   // inequality samples
    std::uint64_t seed = 42;
    double safety = 1.5;
};

struct RunConfig {
    int schema_version = 1;
    ProblemSpec problem;
    OutputConfig output;
    AnalysisConfig analysis;
    GronwallConfig gronwall;
    InterpConfig interp;
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a number");
    }
    if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as an integer");
    }
    if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

/// Section/key store with consume-on-read; whatever is left over at the
/// end is an unknown key.
class KeyStore {
  public:
    void put(const std::string& section, const std::string& key, const std::string& value) {
        auto [it, fresh] = data_[section].emplace(key, value);
        if (!fresh) throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
    }
    bool has_section(const std::string& s) const { return data_.count(s) != 0; }
    bool has(const std::string& section, const std::string& key) const {
        auto it = data_.find(section);
        return it != data_.end() && it->second.count(key) != 0;
    }
    std::string take(const std::string& section, const std::string& key) {
        auto it = data_.find(section);
        if (it == data_.end() || !it->second.count(key))
            throw ConfigError("missing required key '" + key + "' in [" + section + "]");
        std::string v = it->second.at(key);
        it->second.erase(key);
        return v;
    }
    std::string take_or(const std::string& section, const std::string& key, const std::string& dflt) {
        return has(section, key) ? take(section, key) : dflt;
    }
    void check_consumed(const std::vector<std::string>& known_sections) const {
        for (const auto& [section, keys] : data_) {
            bool known = false;
            for (const auto& s : known_sections) known = known || s == section;
            if (!known) throw ConfigError("unknown section [" + section + "]");
            if (!keys.empty())
                throw ConfigError("unknown key '" + keys.begin()->first + "' in [" + section + "]");
        }
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

inline CoefficientSpec parse_coefficient(KeyStore& ks, const std::string& section,
                                         const std::string& name, int dim) {
    const std::string kind = ks.take(section, name + "_kind");
    const auto key = [&](const char* suffix) { return name + "_" + suffix; };
    if (kind == "constant") {
        return CoefficientSpec::constant(parse_double(key("value"), ks.take(section, key("value"))));
    }
    if (kind == "quadratic") {
        std::array<double, 2> center{0.0, 0.0};
        center[0] = parse_double(key("center_x"), ks.take(section, key("center_x")));
        if (dim == 2) center[1] = parse_double(key("center_y"), ks.take(section, key("center_y")));
        return CoefficientSpec::quadratic(
            parse_double(key("modulus"), ks.take(section, key("modulus"))), center,
            parse_double(key("offset"), ks.take_or(section, key("offset"), "0")));
    }
    if (kind == "gaussian") {
        std::array<double, 2> center{0.0, 0.0};
        center[0] = parse_double(key("center_x"), ks.take(section, key("center_x")));
        if (dim == 2) center[1] = parse_double(key("center_y"), ks.take(section, key("center_y")));
        return CoefficientSpec::gaussian(
            parse_double(key("amplitude"), ks.take(section, key("amplitude"))), center,
            parse_double(key("width"), ks.take(section, key("width"))),
            parse_double(key("offset"), ks.take_or(section, key("offset"), "0")));
    }
    if (kind == "poly1d") {
        if (dim != 1) throw ConfigError("coefficient '" + name + "': poly1d requires dim = 1");
        return CoefficientSpec::poly1d(parse_list(key("coeffs"), ks.take(section, key("coeffs"))));
    }
    if (kind == "tabulated") {
        return CoefficientSpec::tabulated(parse_list(key("table"), ks.take(section, key("table"))));
    }
    throw ConfigError("coefficient '" + name + "': unknown kind '" + kind + "'");
}

inline void emit_coefficient(std::ostream& os, const std::string& name, const CoefficientSpec& c,
                             int dim) {
    os << name << "_kind = " << to_string(c.kind) << "\n";
    switch (c.kind) {
        case CoeffKind::Constant:
            os << name << "_value = " << format_g17(c.value) << "\n";
            break;
        case CoeffKind::Quadratic:
            os << name << "_modulus = " << format_g17(c.modulus) << "\n";
            os << name << "_center_x = " << format_g17(c.center[0]) << "\n";
            if (dim == 2) os << name << "_center_y = " << format_g17(c.center[1]) << "\n";
            os << name << "_offset = " << format_g17(c.offset) << "\n";
            break;
        case CoeffKind::Gaussian:
            os << name << "_amplitude = " << format_g17(c.amplitude) << "\n";
            os << name << "_center_x = " << format_g17(c.center[0]) << "\n";
            if (dim == 2) os << name << "_center_y = " << format_g17(c.center[1]) << "\n";
            os << name << "_width = " << format_g17(c.width) << "\n";
            os << name << "_offset = " << format_g17(c.offset) << "\n";
            break;
        case CoeffKind::Poly1D: {
            os << name << "_coeffs =";
            for (double v : c.coeffs) os << " " << format_g17(v);
            os << "\n";
            break;
        }
        case CoeffKind::Tabulated: {
            os << name << "_table =";
            for (double v : c.table) os << " " << format_g17(v);
            os << "\n";
            break;
        }
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    detail::KeyStore ks;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        ks.put(section, key, value);
    }

    RunConfig cfg;
    cfg.schema_version = static_cast<int>(detail::parse_int("schema_version", ks.take("", "schema_version")));
    if (cfg.schema_version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));

    // [grid]
    const int dim = static_cast<int>(detail::parse_int("dim", ks.take("grid", "dim")));
    std::vector<std::pair<double, double>> bounds;
    std::vector<int> cells;
    bounds.emplace_back(detail::parse_double("x_lo", ks.take("grid", "x_lo")),
                        detail::parse_double("x_hi", ks.take("grid", "x_hi")));
    cells.push_back(static_cast<int>(detail::parse_int("nx", ks.take("grid", "nx"))));
    if (dim == 2) {
        bounds.emplace_back(detail::parse_double("y_lo", ks.take("grid", "y_lo")),
                            detail::parse_double("y_hi", ks.take("grid", "y_hi")));
        cells.push_back(static_cast<int>(detail::parse_int("ny", ks.take("grid", "ny"))));
    }
    try {
        cfg.problem.grid = build_grid(dim, bounds, cells);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[grid]: ") + e.what());
    }

    // [problem]
    cfg.problem.alpha = detail::parse_double("alpha", ks.take("problem", "alpha"));
    if (!(cfg.problem.alpha > 1.0))
        throw ConfigError("alpha must exceed 1, got " + format_g17(cfg.problem.alpha));
    cfg.problem.lambda = detail::parse_double("lambda", ks.take_or("problem", "lambda", "0"));
    cfg.problem.d = detail::parse_coefficient(ks, "problem", "d", dim);
    cfg.problem.phi = detail::parse_coefficient(ks, "problem", "phi", dim);
    cfg.problem.rho0 = detail::parse_coefficient(ks, "problem", "rho0", dim);

    // [solver]
    SolverControls& sc = cfg.problem.solver;
    sc.t_end = detail::parse_double("t_end", ks.take("solver", "t_end"));
    sc.dt_init = detail::parse_double("dt_init", ks.take_or("solver", "dt_init", "0.001"));
    sc.cfl = detail::parse_double("cfl", ks.take_or("solver", "cfl", "0.45"));
    sc.record_every = static_cast<int>(detail::parse_int("record_every", ks.take_or("solver", "record_every", "100")));
    sc.positivity_floor = detail::parse_double("positivity_floor", ks.take_or("solver", "positivity_floor", "1e-12"));
    if (!(sc.dt_init > 0.0 && sc.t_end > 0.0 && sc.record_every > 0 && sc.positivity_floor >= 0.0 &&
          sc.cfl > 0.0 && sc.cfl <= 1.0))
        throw ConfigError("[solver]: controls out of range (dt_init, t_end > 0; cfl in (0,1]; record_every >= 1)");

    // Optional sections.
    cfg.output.csv = ks.take_or("output", "csv", cfg.output.csv);
    cfg.output.summary = ks.take_or("output", "summary", cfg.output.summary);

    cfg.analysis.fit_t_lo = detail::parse_double("fit_t_lo", ks.take_or("analysis", "fit_t_lo", "-1"));
    cfg.analysis.fit_t_hi = detail::parse_double("fit_t_hi", ks.take_or("analysis", "fit_t_hi", "-1"));
    cfg.analysis.equilibrium_tol =
        detail::parse_double("equilibrium_tol", ks.take_or("analysis", "equilibrium_tol", "1e-12"));

    cfg.gronwall.c7 = detail::parse_double("c7", ks.take_or("gronwall", "c7", "1"));
    cfg.gronwall.c8 = detail::parse_double("c8", ks.take_or("gronwall", "c8", "0"));
    cfg.gronwall.c9 = detail::parse_double("c9", ks.take_or("gronwall", "c9", "0"));
    cfg.gronwall.g0 = detail::parse_double("g0", ks.take_or("gronwall", "g0", "1"));
    cfg.gronwall.t_end = detail::parse_double("t_end", ks.take_or("gronwall", "t_end", "20"));
    cfg.gronwall.rtol = detail::parse_double("rtol", ks.take_or("gronwall", "rtol", "1e-6"));

    cfg.interp.c2 = detail::parse_double("c2", ks.take_or("interp", "c2", "0.5"));
    cfg.interp.c3 = detail::parse_double("c3", ks.take_or("interp", "c3", "2"));
    cfg.interp.trials = static_cast<int>(detail::parse_int("trials", ks.take_or("interp", "trials", "300")));
    cfg.interp.samples = static_cast<int>(detail::parse_int("samples", ks.take_or("interp", "samples", "1000")));
    cfg.interp.seed = static_cast<std::uint64_t>(detail::parse_int("seed", ks.take_or("interp", "seed", "42")));
    cfg.interp.safety = detail::parse_double("safety", ks.take_or("interp", "safety", "1.5"));

    ks.check_consumed({"", "grid", "problem", "solver", "output", "analysis", "gronwall", "interp"});
    return cfg;
}

/// Canonical form: every key present, fixed order, full-precision
/// numbers. parse_config(emit_config(c)) reproduces c exactly.
inline std::string emit_config(const RunConfig& cfg) {
    std::ostringstream os;
    const int dim = cfg.problem.grid.dim;
    os << "schema_version = " << cfg.schema_version << "\n\n";
    os << "[grid]\n";
    os << "dim = " << dim << "\n";
    os << "x_lo = " << format_g17(cfg.problem.grid.lo[0]) << "\n";
    os << "x_hi = " << format_g17(cfg.problem.grid.hi[0]) << "\n";
    os << "nx = " << cfg.problem.grid.cells[0] << "\n";
    if (dim == 2) {
        os << "y_lo = " << format_g17(cfg.problem.grid.lo[1]) << "\n";
        os << "y_hi = " << format_g17(cfg.problem.grid.hi[1]) << "\n";
        os << "ny = " << cfg.problem.grid.cells[1] << "\n";
    }
    os << "\n[problem]\n";
    os << "alpha = " << format_g17(cfg.problem.alpha) << "\n";
    os << "lambda = " << format_g17(cfg.problem.lambda) << "\n";
    detail::emit_coefficient(os, "d", cfg.problem.d, dim);
    detail::emit_coefficient(os, "phi", cfg.problem.phi, dim);
    detail::emit_coefficient(os, "rho0", cfg.problem.rho0, dim);
    os << "\n[solver]\n";
    os << "dt_init = " << format_g17(cfg.problem.solver.dt_init) << "\n";
    os << "cfl = " << format_g17(cfg.problem.solver.cfl) << "\n";
    os << "t_end = " << format_g17(cfg.problem.solver.t_end) << "\n";
    os << "record_every = " << cfg.problem.solver.record_every << "\n";
    os << "positivity_floor = " << format_g17(cfg.problem.solver.positivity_floor) << "\n";
    os << "\n[output]\n";
    os << "csv = " << cfg.output.csv << "\n";
    os << "summary = " << cfg.output.summary << "\n";
    os << "\n[analysis]\n";
    os << "fit_t_lo = " << format_g17(cfg.analysis.fit_t_lo) << "\n";
    os << "fit_t_hi = " << format_g17(cfg.analysis.fit_t_hi) << "\n";
    os << "equilibrium_tol = " << format_g17(cfg.analysis.equilibrium_tol) << "\n";
    os << "\n[gronwall]\n";
    os << "c7 = " << format_g17(cfg.gronwall.c7) << "\n";
    os << "c8 = " << format_g17(cfg.gronwall.c8) << "\n";
    os << "c9 = " << format_g17(cfg.gronwall.c9) << "\n";
    os << "g0 = " << format_g17(cfg.gronwall.g0) << "\n";
    os << "t_end = " << format_g17(cfg.gronwall.t_end) << "\n";
    os << "rtol = " << format_g17(cfg.gronwall.rtol) << "\n";
    os << "\n[interp]\n";
    os << "c2 = " << format_g17(cfg.interp.c2) << "\n";
    os << "c3 = " << format_g17(cfg.interp.c3) << "\n";
    os << "trials = " << cfg.interp.trials << "\n";
    os << "samples = " << cfg.interp.samples << "\n";
    os << "seed = " << cfg.interp.seed << "\n";
    os << "safety = " << format_g17(cfg.interp.safety) << "\n";
    return os.str();
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace nfp
