// config.hpp — declarative JSON experiment configs: load, validate against
// module preconditions, and hash for reproducibility stamps.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsteer/dynamics.hpp"
#include "qsteer/grid.hpp"
#include "qsteer/random_chain.hpp"
#include "qsteer/steering.hpp"

namespace qsteer {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "basis": indicator of mode `index`; "uniform": equal superposition of
// `indices`; "random": uniform on the sphere from `seed`.
struct InitialStateSpec {
    std::string kind{"basis"};
    int index{1};
    std::vector<int> indices;
    std::uint64_t seed{0};

    ModalState build(int n_modes) const;
};

struct ExperimentConfig {
    nlohmann::json raw;
    std::string base_dir;  // directory of the config file, for relative paths

    Grid1D grid;
    nlohmann::json potential;          // V spec (name+params or csv)
    nlohmann::json control_potential;  // Q spec
    int n_modes{8};
    std::uint64_t seed{0};
    std::string out_dir{"out"};

    // lyapunov
    bool alpha_auto{true};
    double alpha{0.0};
    double sobolev_s{2.0};
    int target{1};

    SteerParams steering;
    double sigma_shift{0.0};
    InitialStateSpec steer_initial;

    double coupling_tol{1e-8};
    double resonance_tol_scale{1e-6};

    std::vector<double> genericity_sigmas;

    int indep_n_modes{6};
    int indep_denom_bound{3};

    RandomAmplitudeSpec random_spec;
    DiagnosticParams diagnostic;
    InitialStateSpec random_initial_a;
    InitialStateSpec random_initial_b;

    std::vector<double> linearize_sigmas;
    double linearize_T{0.5};
    double linearize_dt{2e-5};

    std::uint64_t hash() const;  // FNV-1a of the canonical dump
    std::string hash_hex() const;

    SampledPotential build_potential(const nlohmann::json& spec) const;
};

// Parse + validate; throws ConfigError naming the offending field or file.
ExperimentConfig load_config(const std::string& path);

// "# config_hash=<hex> seed=<n>" comment line placed above CSV headers.
std::string artifact_preamble(const ExperimentConfig& cfg);

}  // namespace qsteer
