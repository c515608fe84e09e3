#include "qsteer/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace qsteer {

namespace fs = std::filesystem;
using nlohmann::json;

ModalState InitialStateSpec::build(int n_modes) const {
    if (kind == "basis") return ModalState::basis_state(n_modes, index);
    if (kind == "uniform") return ModalState::uniform(n_modes, indices);
    if (kind == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXcd c(n_modes);
        for (int j = 0; j < n_modes; ++j) c(j) = std::complex<double>(normal(rng), normal(rng));
        return ModalState::normalized(std::move(c));
    }
    throw ConfigError("initial state kind must be basis|uniform|random, got " + kind);
}

namespace {

double get_num(const json& j, const std::string& key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw ConfigError("config field '" + key + "' must be numeric");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, int dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number_integer())
        throw ConfigError("config field '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

InitialStateSpec parse_initial(const json& j, const InitialStateSpec& dflt) {
    if (j.is_null()) return dflt;
    InitialStateSpec s;
    s.kind = j.value("kind", "basis");
    s.index = get_int(j, "index", 1);
    if (j.contains("indices")) s.indices = j.at("indices").get<std::vector<int>>();
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
}

}  // namespace

SampledPotential ExperimentConfig::build_potential(const json& spec) const {
    if (spec.contains("csv")) {
        fs::path p = spec.at("csv").get<std::string>();
        if (p.is_relative()) p = fs::path(base_dir) / p;
        if (!fs::exists(p)) throw ConfigError("potential file does not exist: " + p.string());
        return potential_from_csv(grid, p.string());
    }
    const std::string name = spec.value("name", "zero");
    if (name == "zero") return zero_potential(grid);
    if (name == "linear") return linear_potential(grid, get_num(spec, "slope", 1.0));
    if (name == "quadratic") return quadratic_potential(grid, get_num(spec, "coeff", 1.0));
    if (name == "well")
        return well_potential(grid, get_num(spec, "depth", 10.0),
                              get_num(spec, "left", grid.a + 0.25 * (grid.b - grid.a)),
                              get_num(spec, "right", grid.a + 0.75 * (grid.b - grid.a)));
    throw ConfigError("unknown potential name: " + name);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.base_dir = fs::path(path).parent_path().string();

    const json jg = j.value("grid", json::object());
    cfg.grid.a = get_num(jg, "a", 0.0);
    cfg.grid.b = get_num(jg, "b", 1.0);
    cfg.grid.n = get_int(jg, "n", 2000);
    if (!(cfg.grid.a < cfg.grid.b)) throw ConfigError("grid: requires a < b");
    if (cfg.grid.n < 2) throw ConfigError("grid: requires n >= 2");

    cfg.potential = j.value("potential", json{{"name", "zero"}});
    cfg.control_potential = j.value("control_potential", json{{"name", "linear"}});
    cfg.n_modes = get_int(j, "n_modes", 8);
    if (cfg.n_modes < 1) throw ConfigError("n_modes >= 1 required");
    if (cfg.n_modes > cfg.grid.n / 4)
        throw ConfigError("n_modes must be <= grid.n / 4 (grid too coarse)");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = j.value("out_dir", std::string("out"));

    const json jl = j.value("lyapunov", json::object());
    if (jl.contains("alpha") && jl.at("alpha").is_number()) {
        cfg.alpha_auto = false;
        cfg.alpha = jl.at("alpha").get<double>();
        if (!(cfg.alpha > 0.0)) throw ConfigError("lyapunov.alpha must be positive");
    } else {
        cfg.alpha_auto = true;
        if (jl.contains("alpha") && !(jl.at("alpha").is_string() &&
                                      jl.at("alpha").get<std::string>() == "auto"))
            throw ConfigError("lyapunov.alpha must be a positive number or \"auto\"");
    }
    cfg.sobolev_s = get_num(jl, "s", 2.0);
    if (cfg.sobolev_s < 0.0) throw ConfigError("lyapunov.s must be >= 0");
    cfg.target = get_int(jl, "target", 1);
    if (cfg.target < 1 || cfg.target > cfg.n_modes)
        throw ConfigError("lyapunov.target out of range [1, n_modes]");

    const json js = j.value("steering", json::object());
    cfg.steering.tol = get_num(js, "tol", 1e-2);
    cfg.steering.max_iter = get_int(js, "max_iter", 400);
    cfg.steering.horizon_max = get_num(js, "horizon_max", 0.0);
    cfg.steering.cap = get_num(js, "cap", 1.0);
    cfg.steering.control_dt = get_num(js, "control_dt", 1e-4);
    cfg.steering.kernel_tol = get_num(js, "kernel_tol", 1e-10);
    cfg.steering.armijo = get_num(js, "armijo", 0.1);
    cfg.steering.m_max = get_int(js, "m_max", 30);
    cfg.steering.overlap_floor = get_num(js, "overlap_floor", 1e-3);
    cfg.steering.retry_budget = get_int(js, "retry_budget", 5);
    cfg.sigma_shift = get_num(js, "sigma_shift", 0.0);
    if (!(cfg.steering.tol > 0.0)) throw ConfigError("steering.tol must be positive");
    if (cfg.steering.max_iter < 1) throw ConfigError("steering.max_iter >= 1 required");
    if (!(cfg.steering.cap > 0.0)) throw ConfigError("steering.cap must be positive");
    if (!(cfg.steering.control_dt > 0.0))
        throw ConfigError("steering.control_dt must be positive");
    InitialStateSpec steer_dflt;
    steer_dflt.kind = "uniform";
    steer_dflt.indices = {1, 2, 3};
    cfg.steer_initial = parse_initial(js.value("initial", json{}), steer_dflt);

    const json jc = j.value("conditions", json::object());
    cfg.coupling_tol = get_num(jc, "coupling_tol", 1e-8);
    cfg.resonance_tol_scale = get_num(jc, "resonance_tol_scale", 1e-6);
    if (cfg.coupling_tol < 0.0 || cfg.resonance_tol_scale < 0.0)
        throw ConfigError("conditions tolerances must be nonnegative");

    const json jgen = j.value("genericity", json::object());
    cfg.genericity_sigmas =
        jgen.value("sigmas", std::vector<double>{0.1, 0.2, 0.5});

    const json ji = j.value("independence", json::object());
    cfg.indep_n_modes = get_int(ji, "n_modes", std::min(6, cfg.n_modes));
    cfg.indep_denom_bound = get_int(ji, "denom_bound", 3);
    if (cfg.indep_n_modes < 1 || cfg.indep_n_modes > cfg.n_modes)
        throw ConfigError("independence.n_modes out of range [1, n_modes]");
    if (cfg.indep_denom_bound < 1) throw ConfigError("independence.denom_bound >= 1 required");

    const json jr = j.value("random", json::object());
    cfg.random_spec = RandomAmplitudeSpec::power_law(
        get_int(jr, "j_trunc", 6), get_num(jr, "b_scale", 0.3),
        get_num(jr, "b_decay", 1.0), get_num(jr, "unit_dt", 0.01));
    cfg.diagnostic.n_steps = get_int(jr, "n_steps", 2000);
    cfg.diagnostic.replicas = get_int(jr, "replicas", 32);
    cfg.diagnostic.burn_in = get_int(jr, "burn_in", 0);
    cfg.diagnostic.bootstrap = get_int(jr, "bootstrap", 1000);
    cfg.diagnostic.ball_radius = get_num(jr, "ball_radius", 0.5);
    cfg.diagnostic.target = cfg.target;
    cfg.diagnostic.threads = get_int(jr, "threads", 0);
    if (cfg.diagnostic.n_steps < 1) throw ConfigError("random.n_steps >= 1 required");
    if (cfg.diagnostic.replicas < 10) throw ConfigError("random.replicas >= 10 required");
    if (cfg.diagnostic.burn_in < 0 || cfg.diagnostic.burn_in >= cfg.diagnostic.n_steps)
        throw ConfigError("random.burn_in must lie in [0, n_steps)");
    InitialStateSpec rand_a_dflt;
    rand_a_dflt.kind = "basis";
    rand_a_dflt.index = std::min(2, cfg.n_modes);
    InitialStateSpec rand_b_dflt;
    rand_b_dflt.kind = "uniform";
    rand_b_dflt.indices = {1, std::min(2, cfg.n_modes)};
    cfg.random_initial_a = parse_initial(jr.value("initial_a", json{}), rand_a_dflt);
    cfg.random_initial_b = parse_initial(jr.value("initial_b", json{}), rand_b_dflt);

    const json jlin = j.value("linearize", json::object());
    cfg.linearize_sigmas = jlin.value("sigmas", std::vector<double>{1e-2, 1e-3, 1e-4});
    cfg.linearize_T = get_num(jlin, "T", 0.5);
    cfg.linearize_dt = get_num(jlin, "dt", 2e-5);
    if (!(cfg.linearize_T > 0.0) || !(cfg.linearize_dt > 0.0))
        throw ConfigError("linearize.T and linearize.dt must be positive");
    for (double s : cfg.linearize_sigmas)
        if (!(s > 0.0)) throw ConfigError("linearize.sigmas must be positive");

    // Fail fast on unloadable potential specs (missing files, bad names).
    cfg.build_potential(cfg.potential);
    cfg.build_potential(cfg.control_potential);

    return cfg;
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string dump = raw.dump();  // keys are sorted: canonical
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

std::string artifact_preamble(const ExperimentConfig& cfg) {
    return "# config_hash=" + cfg.hash_hex() + " seed=" + std::to_string(cfg.seed);
}

}  // namespace qsteer
