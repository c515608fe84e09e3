// random_chain.hpp — the Markov chain at integer times driven by a random
// time-dependent control amplitude, and empirical diagnostics for uniqueness
// of its stationary measure.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsteer/dynamics.hpp"

namespace qsteer {

// Random amplitude on one unit interval: eta(t) = sum_j b_j xi_j g_j(t) with
// {g_j} orthonormal on [0,1] (cosine family: g_1 = 1, g_{j+1} = sqrt(2) cos(j pi t))
// and xi_j iid standard normal (everywhere-positive continuous density).
struct RandomAmplitudeSpec {
    Eigen::VectorXd b;      // positive coefficients, length J_trunc
    double unit_dt{0.01};   // sampling step of eta on [0,1]

    int j_trunc() const { return static_cast<int>(b.size()); }
    void check() const;

    // b_j = scale * j^{-decay}
    static RandomAmplitudeSpec power_law(int j_trunc, double scale, double decay,
                                         double unit_dt = 0.01);
};

// Deterministic per-event substreams derived from one master seed.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t index);

// Temporal basis value g_j(t), j 1-based, t in [0,1].
double temporal_basis(int j, double t);

// One draw of eta sampled on the unit-interval grid; consumes exactly
// j_trunc normal variates from the provided seed.
ControlSignal sample_eta(const RandomAmplitudeSpec& spec, std::uint64_t seed);

// One chain transition: propagate c over [0,1] with a fresh eta.
ModalState step_chain(const ModalState& c, const RandomAmplitudeSpec& spec,
                      std::uint64_t seed, const EigenBasis& basis, const CouplingMatrix& B);

struct ChainRun {
    std::uint64_t seed{0};
    std::vector<ModalState> states;  // at integer times 0..n_steps
};

// Iterates step_chain with per-step substreams, so a run restarted from
// states[m] with step_offset = m reproduces states[m+1..] exactly.
ChainRun run_chain(const ModalState& c0, int n_steps, std::uint64_t seed,
                   const RandomAmplitudeSpec& spec, const EigenBasis& basis,
                   const CouplingMatrix& B, int step_offset = 0);

struct Functional {
    std::string name;
    std::function<double(const Eigen::VectorXcd&)> f;
};

// {|c_j|^2 : j <= N} and {Re(conj(c_j) c_k), Im(conj(c_j) c_k) : j < k <= 4}.
std::vector<Functional> default_functionals(int N);

// Time averages over states after burn_in.
Eigen::VectorXd empirical_average(const ChainRun& run, const std::vector<Functional>& fs,
                                  int burn_in);

struct FunctionalStats {
    std::string name;
    double mean_a{0.0}, se_a{0.0}, ci_lo_a{0.0}, ci_hi_a{0.0};
    double mean_b{0.0}, se_b{0.0}, ci_lo_b{0.0}, ci_hi_b{0.0};
    double discrepancy{0.0};  // |mean_a - mean_b| / sqrt(se_a^2 + se_b^2)
};

struct UniquenessReport {
    std::vector<FunctionalStats> stats;
    double max_discrepancy{0.0};
    std::string max_discrepancy_name;
    double hit_frequency_a{0.0};  // fraction of replicas entering the target ball
    double hit_frequency_b{0.0};
    double ball_radius{0.0};
    int replicas{0};
    int n_steps{0};
    int burn_in{0};
    bool consistent{false};  // max_discrepancy <= 3; exploratory evidence only
};

struct DiagnosticParams {
    int n_steps{2000};
    int replicas{32};
    int burn_in{0};          // 0 selects n_steps / 10
    int bootstrap{1000};
    double ball_radius{0.5}; // L2 ball around the target eigenstate indicator
    int target{1};
    int threads{0};          // 0 = hardware concurrency
};

// Runs `replicas` independent chains from each initial state and compares
// time-averaged functionals between the two. The chains from a and b use
// disjoint substreams; identical initial states therefore give discrepancies
// at the Monte Carlo noise level, not exact zeros.
UniquenessReport uniqueness_diagnostic(const ModalState& c0_a, const ModalState& c0_b,
                                       const RandomAmplitudeSpec& spec,
                                       const EigenBasis& basis, const CouplingMatrix& B,
                                       std::uint64_t master_seed,
                                       const DiagnosticParams& params);

}  // namespace qsteer
