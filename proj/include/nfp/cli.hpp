// Command-line surface. Subcommands: simulate, equilibrium, decay-fit,
// identity-check, gronwall, interp-check, validate. Every report echoes
// the resolved configuration; exit codes are 0 (success), 1 (validation
// failure), 2 (runtime error).
#pragma once

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nfp/analysis.hpp"
#include "nfp/config.hpp"
#include "nfp/csv_io.hpp"
#include "nfp/equilibrium.hpp"
#include "nfp/functionals.hpp"
#include "nfp/inequalities.hpp"
#include "nfp/problem.hpp"
#include "nfp/solver.hpp"

namespace nfp {

using ojson = nlohmann::ordered_json;

namespace cli_detail {

inline ojson record_json(const DiagnosticsRecord& r) {
    return ojson{{"t", r.t},       {"mass", r.mass},        {"F", r.F},
                 {"D", r.D},       {"rho_min", r.rho_min},  {"rho_max", r.rho_max}};
}

inline ojson fit_json(const DecayFit& f) {
    return ojson{{"valid", f.valid},   {"t_lo", f.t_lo},           {"t_hi", f.t_hi},
                 {"rate", f.rate},     {"amplitude", f.amplitude}, {"r_squared", f.r_squared},
                 {"samples", f.samples}};
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << body;
}

inline std::pair<double, double> fit_window(const AnalysisConfig& a,
                                            std::span<const DiagnosticsRecord> records) {
    double lo = a.fit_t_lo, hi = a.fit_t_hi;
    if (records.empty()) return {lo, hi};
    const double t0 = records.front().t, t1 = records.back().t;
    if (lo < 0.0) lo = t0 + 0.5 * (t1 - t0);
    if (hi < 0.0) hi = t1;
    return {lo, hi};
}

inline ojson simulate_one(const RunConfig& cfg) {
    const ProblemData data = prepare(cfg.problem);
    const RunResult res = run(data);
    write_diagnostics_csv(res.records, cfg.output.csv);

    double mass_drift = 0.0;
    for (const auto& r : res.records) mass_drift = std::max(mass_drift, std::abs(r.mass - 1.0));
    const auto [t_lo, t_hi] = fit_window(cfg.analysis, res.records);
    const DecayFit fit = fit_decay(res.records, t_lo, t_hi);

    ojson out;
    out["subcommand"] = "simulate";
    out["csv"] = cfg.output.csv;
    out["records"] = res.records.size();
    out["accepted_steps"] = res.accepted_steps;
    out["rejected_steps"] = res.rejected_steps;
    out["mass_drift"] = mass_drift;
    out["initial"] = record_json(res.records.front());
    out["final"] = record_json(res.records.back());
    out["decay_fit"] = fit_json(fit);
    out["config"] = emit_config(cfg);
    write_text(cfg.output.summary, out.dump(2) + "\n");
    return out;
}

inline int run_simulate(const std::vector<std::string>& paths, int jobs) {
    std::vector<RunConfig> configs;
    for (const auto& p : paths) configs.push_back(load_config(p));

    std::vector<ojson> results(configs.size());
    std::vector<std::string> failures(configs.size());
    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= configs.size()) return;
                i = next++;
            }
            try {
                results[i] = simulate_one(configs[i]);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int rc = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!failures[i].empty()) {
            std::cerr << "simulate " << paths[i] << ": " << failures[i] << "\n";
            rc = 2;
        } else {
            std::cout << results[i].dump(2) << "\n";
        }
    }
    return rc;
}

inline int run_equilibrium(const std::string& path, const std::string& profile_path) {
    const RunConfig cfg = load_config(path);
    const ProblemData data = prepare(cfg.problem);
    const EquilibriumResult eq = solve_equilibrium(data, cfg.analysis.equilibrium_tol);

    if (!profile_path.empty()) {
        std::ostringstream os;
        os << "x,rho_inf\n";
        for (int i = 0; i < data.grid.cells[0]; ++i)
            os << format_g17(data.grid.center(0, i)) << "," << format_g17(eq.rho_inf.values[i])
               << "\n";
        write_text(profile_path, os.str());
    }

    auto [lo, hi] = field_min_max(eq.rho_inf);
    ojson out;
    out["subcommand"] = "equilibrium";
    out["C"] = eq.C;
    out["mass_residual"] = eq.mass_residual;
    out["dissipation_residual"] = eq.dissipation_residual;
    out["positivity"] = eq.positivity;
    out["rho_inf_min"] = lo;
    out["rho_inf_max"] = hi;
    out["bisection_iterations"] = eq.bisection_iterations;
    out["config"] = emit_config(cfg);
    std::cout << out.dump(2) << "\n";
    return 0;
}

inline int run_decay_fit(const std::string& csv_path, double t_lo, double t_hi) {
    const std::vector<DiagnosticsRecord> records = read_diagnostics_csv(csv_path);
    AnalysisConfig a;
    a.fit_t_lo = t_lo;
    a.fit_t_hi = t_hi;
    const auto [lo, hi] = fit_window(a, records);
    const DecayFit fit = fit_decay(records, lo, hi);
    ojson out;
    out["subcommand"] = "decay-fit";
    out["csv"] = csv_path;
    out["fit"] = fit_json(fit);
    const auto sub = subsequence_decay(records);
    out["subsequence_decay"] = ojson{{"found", sub.found},
                                     {"levels", sub.levels},
                                     {"witness_times", sub.witness_times}};
    std::cout << out.dump(2) << "\n";
    return fit.valid ? 0 : 1;
}

inline int run_identity_check(const std::string& path, std::vector<int> n_list,
                              std::vector<double> dt_list) {
    const RunConfig cfg = load_config(path);
    if (n_list.empty()) n_list = {cfg.problem.grid.cells[0]};
    if (dt_list.empty()) {
        const ProblemData data = prepare(cfg.problem);
        const double dt0 = 0.5 * adaptive_dt(State{data.rho0, 0.0}, data);
        dt_list = {dt0, 0.5 * dt0, 0.25 * dt0};
    }
    const IdentityStudy study = identity_convergence_study(cfg.problem, dt_list, n_list);
    ojson rows = ojson::array();
    for (const auto& r : study.rows)
        rows.push_back(ojson{{"cells", r.cells},
                             {"dt", r.dt},
                             {"residual_identity", r.residual_identity},
                             {"residual_decomposition", r.residual_decomposition},
                             {"d2F_reconstructed", r.d2F_reconstructed},
                             {"dD_dt", r.dD_dt}});
    ojson out;
    out["subcommand"] = "identity-check";
    out["rows"] = rows;
    out["identity_orders"] = study.identity_orders;
    out["decomposition_orders"] = study.decomposition_orders;
    out["config"] = emit_config(cfg);
    std::cout << out.dump(2) << "\n";
    return 0;
}

inline int run_gronwall(const GronwallConfig& gc) {
    const GronwallParams params = gronwall_threshold(gc.c7, gc.c8, gc.c9);
    const GronwallReport rep = gronwall_verify(params, gc.g0, gc.t_end, gc.rtol);
    ojson out;
    out["subcommand"] = "gronwall";
    out["c7"] = gc.c7;
    out["c8"] = gc.c8;
    out["c9"] = gc.c9;
    out["C10"] = params.C10;
    if (std::isfinite(params.threshold)) {
        out["threshold"] = params.threshold;
        out["finite_threshold"] = true;
    } else {
        out["threshold"] = nullptr;
        out["finite_threshold"] = false;
        out["note"] = "no finite threshold";
    }
    out["verify"] = ojson{{"g0", rep.g0},
                          {"t_end", gc.t_end},
                          {"rtol", rep.rtol},
                          {"below_threshold", rep.below_threshold},
                          {"bound_holds", rep.bound_holds},
                          {"max_ratio", rep.max_ratio},
                          {"blow_up", rep.blow_up}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

inline int run_interp_check(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const InterpConfig& ic = cfg.interp;
    const GridSpec& grid = cfg.problem.grid;
    const double c_sob = estimate_sobolev_constant(grid, 6.0, ic.trials, ic.seed, ic.safety);
    const InterpConstants constants = make_interp_constants(c_sob, ic.c2, ic.c3, 6.0, grid.measure());
    const InterpReport rep = check_interpolation(grid, ic.c2, ic.c3, constants, ic.samples,
                                                 detail::mix_seed(ic.seed, 0x1234));
    ojson out;
    out["subcommand"] = "interp-check";
    out["c_sob"] = constants.c_sob;
    out["constants"] = ojson{{"c_s", constants.c_s}, {"p_star", constants.p_star},
                             {"c4", constants.c4},   {"c5", constants.c5},
                             {"c6", constants.c6}};
    out["samples"] = rep.samples;
    out["violations"] = rep.violations;
    out["violations_at_safety3"] = rep.violations_at_safety3;
    out["max_ratio"] = rep.max_ratio;
    out["seed"] = ic.seed;
    out["zero_violations"] = rep.violations == 0;
    out["config"] = emit_config(cfg);
    std::cout << out.dump(2) << "\n";
    return rep.violations == 0 ? 0 : 1;
}

inline int run_validate(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const ValidationReport rep = validate_problem(cfg.problem);
    ojson out;
    out["subcommand"] = "validate";
    out["fatal"] = rep.fatal;
    out["errors"] = rep.errors;
    out["warnings"] = rep.warnings;
    out["min_d"] = rep.min_d;
    out["sup_grad_d"] = rep.sup_grad_d;
    out["sup_grad_phi"] = rep.sup_grad_phi;
    out["rho0_positive"] = rep.rho0_positive;
    out["rho0_mass"] = rep.rho0_mass;
    out["lambda"] = cfg.problem.lambda;
    out["lambda_check"] = rep.lambda_check;
    out["smoothness_verified"] = rep.smoothness_verified;
    if (!rep.fatal) {
        const ProblemData data = prepare(cfg.problem);
        out["initial_dissipation"] = dissipation(data.rho0, data);
        auto [lo, hi] = field_min_max(data.rho0);
        out["rho0_min"] = lo;
        out["rho0_max"] = hi;
    }
    out["config"] = emit_config(cfg);
    std::cout << out.dump(2) << "\n";
    return rep.fatal ? 1 : 0;
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Finite-volume simulator and analysis toolkit for the nonlinear Fokker-Planck "
                 "equation with inhomogeneous porous-medium diffusion"};
    app.require_subcommand(1);

    std::vector<std::string> sim_configs;
    int jobs = 1;
    auto* sim = app.add_subcommand("simulate", "integrate a configured problem, write CSV + summary");
    sim->add_option("config", sim_configs, "config file(s)")->required()->check(CLI::ExistingFile);
    sim->add_option("--jobs", jobs, "worker threads for multi-config sweeps")->check(CLI::PositiveNumber);

    std::string eq_config, eq_profile;
    auto* eq = app.add_subcommand("equilibrium", "solve the stationary state and report C");
    eq->add_option("config", eq_config, "config file")->required()->check(CLI::ExistingFile);
    eq->add_option("--profile", eq_profile, "write x,rho_inf profile CSV to this path");

    std::string fit_csv;
    double fit_t_lo = -1.0, fit_t_hi = -1.0;
    auto* fit = app.add_subcommand("decay-fit", "fit exp(-rate t) to the D column of a diagnostics CSV");
    fit->add_option("--csv", fit_csv, "diagnostics CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--t-lo", fit_t_lo, "window start (default: second half)");
    fit->add_option("--t-hi", fit_t_hi, "window end (default: last record)");

    std::string id_config;
    std::vector<int> id_n;
    std::vector<double> id_dt;
    auto* idc = app.add_subcommand("identity-check", "dissipation-identity and decomposition refinement study");
    idc->add_option("config", id_config, "config file")->required()->check(CLI::ExistingFile);
    idc->add_option("--n-list", id_n, "cell counts")->delimiter(',');
    idc->add_option("--dt-list", id_dt, "fixed step sizes (0 = adaptive)")->delimiter(',');

    std::string gr_config;
    GronwallConfig gc;
    bool gr_have_flags = false;
    auto* gr = app.add_subcommand("gronwall", "threshold constants and decay-bound verification");
    gr->add_option("config", gr_config, "config file with a [gronwall] section")->check(CLI::ExistingFile);
    gr->add_option("--c7", gc.c7, "linear decay coefficient");
    gr->add_option("--c8", gc.c8, "g^(3/2) coefficient");
    gr->add_option("--c9", gc.c9, "g^3 coefficient");
    gr->add_option("--g0", gc.g0, "initial value");
    gr->add_option("--t-end", gc.t_end, "verification horizon");
    gr->add_option("--rtol", gc.rtol, "bound slack tolerance");

    std::string ip_config;
    auto* ip = app.add_subcommand("interp-check", "sampled verification of the interpolation inequality");
    ip->add_option("config", ip_config, "config file")->required()->check(CLI::ExistingFile);

    std::string val_config;
    auto* val = app.add_subcommand("validate", "check the standing assumptions of a problem");
    val->add_option("config", val_config, "config file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    gr_have_flags = gr->count("--c7") || gr->count("--c8") || gr->count("--c9") ||
                    gr->count("--g0") || gr->count("--t-end") || gr->count("--rtol");

    try {
        if (sim->parsed()) return cli_detail::run_simulate(sim_configs, jobs);
        if (eq->parsed()) return cli_detail::run_equilibrium(eq_config, eq_profile);
        if (fit->parsed()) return cli_detail::run_decay_fit(fit_csv, fit_t_lo, fit_t_hi);
        if (idc->parsed()) return cli_detail::run_identity_check(id_config, id_n, id_dt);
        if (gr->parsed()) {
            if (!gr_config.empty()) {
                // File supplies whatever the flags did not override.
                const GronwallConfig from_file = load_config(gr_config).gronwall;
                if (!gr->count("--c7")) gc.c7 = from_file.c7;
                if (!gr->count("--c8")) gc.c8 = from_file.c8;
                if (!gr->count("--c9")) gc.c9 = from_file.c9;
                if (!gr->count("--g0")) gc.g0 = from_file.g0;
                if (!gr->count("--t-end")) gc.t_end = from_file.t_end;
                if (!gr->count("--rtol")) gc.rtol = from_file.rtol;
            } else if (!gr_have_flags) {
                throw ConfigError("gronwall: provide a config file or --c7/--c8/--c9/--g0 flags");
            }
            return cli_detail::run_gronwall(gc);
        }
        if (ip->parsed()) return cli_detail::run_interp_check(ip_config);
        if (val->parsed()) return cli_detail::run_validate(val_config);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace nfp
