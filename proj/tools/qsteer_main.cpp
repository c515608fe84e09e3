// qsteer — experiment runner: spectra, Lyapunov steering, condition checks,
// genericity scans, independence tests, random-chain diagnostics, and
// linearization checks, all driven by a JSON config.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qsteer/conditions.hpp"
#include "qsteer/config.hpp"
#include "qsteer/csv.hpp"
#include "qsteer/dynamics.hpp"
#include "qsteer/random_chain.hpp"
#include "qsteer/steering.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qsteer;

namespace {

struct Ctx {
    ExperimentConfig cfg;
    fs::path out;
};

void write_config_used(const Ctx& ctx) {
    json j = ctx.cfg.raw;
    j["resolved"] = {{"config_hash", ctx.cfg.hash_hex()},
                     {"seed", ctx.cfg.seed},
                     {"out_dir", ctx.out.string()}};
    std::ofstream f(ctx.out / "config_used.json");
    f << j.dump(2) << "\n";
}

Ctx make_ctx(const std::string& config_path, const std::string& out_override,
             bool seed_given, std::uint64_t seed) {
    Ctx ctx{load_config(config_path), {}};
    if (seed_given) {
        ctx.cfg.seed = seed;
        ctx.cfg.raw["seed"] = seed;  // the hash covers the effective seed
    }
    ctx.out = out_override.empty() ? fs::path(ctx.cfg.out_dir) : fs::path(out_override);
    fs::create_directories(ctx.out);
    write_config_used(ctx);
    return ctx;
}

json report_stamp(const ExperimentConfig& cfg) {
    return {{"config_hash", cfg.hash_hex()}, {"seed", cfg.seed}};
}

int cmd_spectrum(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const EigenBasis basis =
        solve_dirichlet_eigs(cfg.build_potential(cfg.potential), cfg.n_modes);

    CsvWriter eigs((ctx.out / "eigenvalues.csv").string(), {"j", "lambda", "lambda_shifted"},
                   artifact_preamble(cfg));
    for (int j = 0; j < basis.n_modes; ++j)
        eigs.row({double(j + 1), basis.lambdas(j), basis.shifted(j)});

    std::vector<std::string> header{"x"};
    for (int j = 1; j <= basis.n_modes; ++j) header.push_back("e_" + std::to_string(j));
    CsvWriter modes((ctx.out / "modes.csv").string(), header, artifact_preamble(cfg));
    for (int k = 0; k < basis.grid.n; ++k) {
        std::vector<double> row{basis.grid.x(k)};
        for (int j = 0; j < basis.n_modes; ++j) row.push_back(basis.modes(k, j));
        modes.row(row);
    }
    std::cout << "spectrum: " << basis.n_modes << " modes, lambda_1 = " << basis.lambdas(0)
              << "\n";
    return 0;
}

int cmd_steer(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SampledPotential V = cfg.build_potential(cfg.potential);
    const SampledPotential Q = cfg.build_potential(cfg.control_potential);
    const SampledPotential V_eff = V + cfg.sigma_shift * Q;
    const EigenBasis basis = solve_dirichlet_eigs(V_eff, cfg.n_modes);
    const CouplingMatrix B = coupling_matrix(Q, basis);

    const ModalState c0 = cfg.steer_initial.build(cfg.n_modes);
    LyapunovConfig lcfg;
    lcfg.s = cfg.sobolev_s;
    lcfg.target = cfg.target;
    lcfg.alpha = cfg.alpha_auto ? auto_alpha(c0, basis, cfg.sobolev_s, cfg.target) : cfg.alpha;

    const SteeringReport rep = steer_to_eigenstate(c0, basis, B, lcfg, cfg.steering);

    json j = report_stamp(cfg);
    j["iterations"] = rep.iterations;
    j["pre_pulses"] = rep.pre_pulses;
    j["alpha"] = lcfg.alpha;
    j["s"] = lcfg.s;
    j["target"] = lcfg.target;
    j["sigma_shift"] = cfg.sigma_shift;
    j["final_overlap"] = rep.final_overlap;
    j["final_overlap_deficit"] = 1.0 - rep.final_overlap;
    j["final_sobolev_dist"] = rep.final_sobolev_dist;
    j["final_lyapunov"] = rep.lyapunov_history.back();
    j["accepted_sigmas"] = rep.accepted_sigmas;
    j["probe_horizons"] = rep.probe_horizons;
    std::ofstream(ctx.out / "report.json") << j.dump(2) << "\n";

    CsvWriter hist((ctx.out / "lyapunov_history.csv").string(), {"iteration", "lyapunov"},
                   artifact_preamble(cfg));
    for (std::size_t k = 0; k < rep.lyapunov_history.size(); ++k)
        hist.row({double(k), rep.lyapunov_history[k]});

    const ControlSignal u = rep.concatenated_control();
    CsvWriter ctl((ctx.out / "control.csv").string(), {"time", "value"},
                  artifact_preamble(cfg));
    for (int k = 0; k < u.samples.size(); ++k) ctl.row({u.t0 + k * u.dt, u.samples(k)});

    std::ofstream gp(ctx.out / "lyapunov_history.gp");
    gp << "set datafile separator ','\n"
       << "set logscale y\n"
       << "set xlabel 'iteration'\n"
       << "set ylabel 'Lyapunov value'\n"
       << "plot 'lyapunov_history.csv' skip 1 using 1:2 with linespoints title 'V'\n";

    std::cout << "steer: " << rep.iterations
              << " iterations, final overlap deficit = " << 1.0 - rep.final_overlap << "\n";
    return 0;
}

void write_condition_files(const Ctx& ctx, const ConditionReport& report,
                           const CouplingMatrix& B, const std::string& prefix) {
    const auto& cfg = ctx.cfg;
    CsvWriter cw((ctx.out / (prefix + "coupling_failures.csv")).string(),
                 {"j", "coupling_value"}, artifact_preamble(cfg));
    for (int j : report.coupling_failures)
        cw.row({double(j), B.entries(report.target - 1, j - 1)});

    CsvWriter rw((ctx.out / (prefix + "resonances.csv")).string(), {"j", "p", "q", "defect"},
                 artifact_preamble(cfg));
    for (const auto& r : report.resonances)
        rw.row({double(r.j), double(r.p), double(r.q), r.defect});
}

int cmd_conditions(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const EigenBasis basis =
        solve_dirichlet_eigs(cfg.build_potential(cfg.potential), cfg.n_modes);
    const CouplingMatrix B = coupling_matrix(cfg.build_potential(cfg.control_potential), basis);

    ConditionReport report;
    report.target = cfg.target;
    report.coupling_tol = cfg.coupling_tol;
    report.resonance_tol = cfg.resonance_tol_scale * std::abs(basis.lambdas(cfg.n_modes - 1));
    report.coupling_failures = check_coupling(B, cfg.target, cfg.coupling_tol);
    report.resonances = check_nonresonance(basis.lambdas, cfg.target, report.resonance_tol);

    write_condition_files(ctx, report, B, "");

    json j = report_stamp(cfg);
    j["target"] = report.target;
    j["coupling_tol"] = report.coupling_tol;
    j["resonance_tol"] = report.resonance_tol;
    j["coupling_failures"] = report.coupling_failures;
    j["n_resonances"] = report.resonances.size();
    std::ofstream(ctx.out / "conditions.json") << j.dump(2) << "\n";

    std::cout << "conditions: " << report.coupling_failures.size() << " coupling failures, "
              << report.resonances.size() << " resonances\n";
    return 0;
}

int cmd_genericity(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const auto rows = resonance_breaking_scan(
        cfg.build_potential(cfg.potential), cfg.build_potential(cfg.control_potential),
        cfg.genericity_sigmas, cfg.target, cfg.n_modes, cfg.coupling_tol,
        cfg.resonance_tol_scale);

    CsvWriter scan((ctx.out / "genericity.csv").string(),
                   {"sigma", "lambda_1", "min_abs_coupling", "n_coupling_failures",
                    "n_resonances"},
                   artifact_preamble(cfg));
    json detail = json::array();
    for (const auto& row : rows) {
        scan.row({row.sigma, row.lambda_1, row.min_abs_coupling,
                  double(row.report.coupling_failures.size()),
                  double(row.report.resonances.size())});
        json r = {{"sigma", row.sigma},
                  {"coupling_failures", row.report.coupling_failures},
                  {"resonances", json::array()}};
        for (const auto& res : row.report.resonances)
            r["resonances"].push_back({{"j", res.j}, {"p", res.p}, {"q", res.q},
                                       {"defect", res.defect}});
        detail.push_back(std::move(r));
    }
    json j = report_stamp(cfg);
    j["rows"] = detail;
    std::ofstream(ctx.out / "genericity.json") << j.dump(2) << "\n";
    std::cout << "genericity: scanned " << rows.size() << " sigma values\n";
    return 0;
}

int cmd_independence(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const EigenBasis basis =
        solve_dirichlet_eigs(cfg.build_potential(cfg.potential),
                             std::max(cfg.n_modes, cfg.indep_n_modes));
    const auto res = rational_independence_test(basis, cfg.indep_n_modes,
                                                cfg.indep_denom_bound);

    std::vector<std::string> header;
    for (int k = 1; k <= cfg.indep_n_modes; ++k) header.push_back("g_" + std::to_string(k));
    CsvWriter gram((ctx.out / "gram.csv").string(), header, artifact_preamble(cfg));
    for (int r = 0; r < res.gram.rows(); ++r) {
        std::vector<double> row(res.gram.cols());
        for (int c = 0; c < res.gram.cols(); ++c) row[c] = res.gram(r, c);
        gram.row(row);
    }

    json j = report_stamp(cfg);
    j["n_modes"] = cfg.indep_n_modes;
    j["denom_bound"] = cfg.indep_denom_bound;
    j["sigma_min"] = res.sigma_min;
    j["independent"] = !res.witness.has_value();
    if (res.witness) {
        std::vector<int> w(res.witness->data(), res.witness->data() + res.witness->size());
        j["witness"] = w;
        j["witness_norm"] = res.witness_norm;
    }
    std::ofstream(ctx.out / "independence.json") << j.dump(2) << "\n";
    std::cout << "independence: sigma_min = " << res.sigma_min
              << (res.witness ? " (witness found)" : "") << "\n";
    return 0;
}

int cmd_random(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const EigenBasis basis =
        solve_dirichlet_eigs(cfg.build_potential(cfg.potential), cfg.n_modes);
    const CouplingMatrix B = coupling_matrix(cfg.build_potential(cfg.control_potential), basis);
    const ModalState a = cfg.random_initial_a.build(cfg.n_modes);
    const ModalState b = cfg.random_initial_b.build(cfg.n_modes);

    // Exemplar path: replica 0 of side a, exported at integer times.
    const ChainRun run = run_chain(a, std::min(cfg.diagnostic.n_steps, 512),
                                   substream_seed(cfg.seed, 0xA, 0), cfg.random_spec,
                                   basis, B);
    std::vector<std::string> header{"k"};
    for (int j = 1; j <= cfg.n_modes; ++j) {
        header.push_back("re_c" + std::to_string(j));
        header.push_back("im_c" + std::to_string(j));
    }
    CsvWriter states((ctx.out / "chain_states.csv").string(), header,
                     artifact_preamble(cfg));
    for (std::size_t k = 0; k < run.states.size(); ++k) {
        std::vector<double> row{double(k)};
        for (int j = 0; j < cfg.n_modes; ++j) {
            row.push_back(run.states[k].coeffs(j).real());
            row.push_back(run.states[k].coeffs(j).imag());
        }
        states.row(row);
    }

    const UniquenessReport rep =
        uniqueness_diagnostic(a, b, cfg.random_spec, basis, B, cfg.seed, cfg.diagnostic);

    CsvWriter diag((ctx.out / "diagnostics.csv").string(),
                   {"functional", "mean_a", "se_a", "ci_lo_a", "ci_hi_a", "mean_b", "se_b",
                    "ci_lo_b", "ci_hi_b", "discrepancy"},
                   artifact_preamble(cfg));
    for (const auto& st : rep.stats)
        diag.raw_row({st.name, format_double(st.mean_a), format_double(st.se_a),
                      format_double(st.ci_lo_a), format_double(st.ci_hi_a),
                      format_double(st.mean_b), format_double(st.se_b),
                      format_double(st.ci_lo_b), format_double(st.ci_hi_b),
                      format_double(st.discrepancy)});

    json j = report_stamp(cfg);
    j["note"] = "exploratory evidence; existence of a stationary measure is open";
    j["replicas"] = rep.replicas;
    j["n_steps"] = rep.n_steps;
    j["burn_in"] = rep.burn_in;
    j["max_discrepancy"] = rep.max_discrepancy;
    j["max_discrepancy_functional"] = rep.max_discrepancy_name;
    j["consistent_at_3sigma"] = rep.consistent;
    j["ball_radius"] = rep.ball_radius;
    j["hit_frequency_a"] = rep.hit_frequency_a;
    j["hit_frequency_b"] = rep.hit_frequency_b;
    std::ofstream(ctx.out / "diagnostic.json") << j.dump(2) << "\n";

    std::cout << "random: max discrepancy " << rep.max_discrepancy << " ("
              << rep.max_discrepancy_name << "), "
              << (rep.consistent ? "consistent at 3 sigma" : "discrepancy above 3 sigma")
              << "\n";
    return 0;
}

int cmd_linearize_check(const Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const EigenBasis basis =
        solve_dirichlet_eigs(cfg.build_potential(cfg.potential), cfg.n_modes);
    const CouplingMatrix B = coupling_matrix(cfg.build_potential(cfg.control_potential), basis);

    std::vector<int> populated;
    for (int j = 1; j <= std::min(3, cfg.n_modes); ++j) populated.push_back(j);
    const ModalState c0 = ModalState::uniform(cfg.n_modes, populated);

    // Bump-windowed probe at the first spectral gap.
    const double T = cfg.linearize_T;
    const double dt = cfg.linearize_dt;
    const int nsteps = static_cast<int>(std::llround(T / dt));
    ControlSignal w;
    w.t0 = 0.0;
    w.t1 = nsteps * dt;
    w.dt = dt;
    w.samples.resize(nsteps + 1);
    const double freq = basis.n_modes > 1 ? basis.lambdas(1) - basis.lambdas(0) : 1.0;
    for (int k = 0; k <= nsteps; ++k) {
        const double t = k * dt;
        w.samples(k) = bump_window(t, w.t1) * std::cos(freq * t);
    }
    w.samples(0) = w.samples(nsteps) = 0.0;

    const Eigen::VectorXcd r = linearized_solve(c0, w, basis, B, w.t1);
    const ModalState base = propagate_final(c0, ControlSignal::zero(0.0, w.t1, dt), basis, B);

    CsvWriter slopes((ctx.out / "slopes.csv").string(), {"sigma", "residual", "order"},
                     artifact_preamble(cfg));
    json rows = json::array();
    double prev_res = 0.0, prev_sigma = 0.0;
    for (std::size_t i = 0; i < cfg.linearize_sigmas.size(); ++i) {
        const double sigma = cfg.linearize_sigmas[i];
        ControlSignal su = w;
        su.samples *= sigma;
        const ModalState pert = propagate_final(c0, su, basis, B);
        const double residual =
            ((pert.coeffs - base.coeffs) / sigma - r).norm();
        double order = 0.0;
        if (i > 0) order = std::log(prev_res / residual) / std::log(prev_sigma / sigma);
        slopes.row({sigma, residual, order});
        rows.push_back({{"sigma", sigma}, {"residual", residual}, {"order", order}});
        prev_res = residual;
        prev_sigma = sigma;
    }
    json j = report_stamp(cfg);
    j["rows"] = rows;
    std::ofstream(ctx.out / "linearize.json") << j.dump(2) << "\n";
    std::cout << "linearize-check: wrote slope table (" << cfg.linearize_sigmas.size()
              << " sigmas)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsteer — bilinear Schrodinger steering workbench"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_option("--seed", seed, "master seed (overrides config)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* sp = app.add_subcommand("spectrum", "eigenvalues and modes");
    auto* st = app.add_subcommand("steer", "Lyapunov steering to the target eigenstate");
    auto* co = app.add_subcommand("conditions", "coupling and non-resonance checks");
    auto* ge = app.add_subcommand("genericity", "sigma-shift resonance-breaking scan");
    auto* in = app.add_subcommand("independence", "rational independence of squared modes");
    auto* ra = app.add_subcommand("random", "random-amplitude chain diagnostics");
    auto* li = app.add_subcommand("linearize-check", "finite-difference linearization check");
    for (auto* sub : {sp, st, co, ge, in, ra, li}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        const Ctx ctx = make_ctx(config_path, out_override, seed_given, seed);
        if (sp->parsed()) return cmd_spectrum(ctx);
        if (st->parsed()) return cmd_steer(ctx);
        if (co->parsed()) return cmd_conditions(ctx);
        if (ge->parsed()) return cmd_genericity(ctx);
        if (in->parsed()) return cmd_independence(ctx);
        if (ra->parsed()) return cmd_random(ctx);
        if (li->parsed()) return cmd_linearize_check(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
