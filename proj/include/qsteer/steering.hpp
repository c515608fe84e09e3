// steering.hpp — Lyapunov descent to a target eigenstate: the Lyapunov
// function, its derivative kernel along control directions, probe selection,
// amplitude line search, and the iterative steering loop.

#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <vector>

#include "qsteer/dynamics.hpp"

namespace qsteer {

struct LyapunovConfig {
    double alpha{1e-4};  // > 0
    double s{2.0};       // Sobolev exponent, >= 0
    int target{1};       // 1-based eigenstate index

    void check(const EigenBasis& basis) const;
};

// Tunables of the descent loop. horizon_max = 0 selects the default
// 4 * 2*pi / gap_min, several periods of every resonant frequency present.
struct SteerParams {
    double tol{1e-2};
    int max_iter{400};
    double horizon_max{0.0};
    double cap{1.0};
    double control_dt{1e-4};
    double kernel_tol{1e-10};
    double armijo{0.1};
    int m_max{30};
    double overlap_floor{1e-3};
    int retry_budget{5};
};

struct SteeringReport {
    int iterations{0};
    std::vector<double> lyapunov_history;  // strictly decreasing over accepted steps
    double final_overlap{0.0};             // |<c, e_target>|^2
    double final_sobolev_dist{0.0};        // phase-aligned H^s distance to the target
    std::vector<double> accepted_sigmas;
    std::vector<double> probe_horizons;
    std::vector<double> pairings;  // int Phi w of each accepted probe
    ModalState final_state;
    std::vector<ControlSignal> control_segments;  // accepted sigma*w, in order
    int pre_pulses{0};

    // Segments glued end to end on a common time grid.
    ControlSignal concatenated_control() const;
};

// Kernel vanished on the whole scan horizon; caller should apply a sigma
// shift of the potential pair or a randomizing pre-pulse.
struct DegenerateKernel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LineSearchFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Stalled : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// alpha (lambda_j + shift)^s + 1 must stay away from zero for every mode.
// With a positive shifted spectrum and alpha > 0 this always holds; the check
// exists for auditability.
bool alpha_admissible(const LyapunovConfig& cfg, const EigenBasis& basis);

// Default weight: alpha = 0.5 / max(1, sum_{j != target} mu_j^s |c0_j|^2),
// so the weighted tail term at c0 does not exceed the overlap term.
double auto_alpha(const ModalState& c0, const EigenBasis& basis, double s, int target);

// V(c) = alpha sum_{j != target} mu_j^s |c_j|^2 + 1 - |c_target|^2, mu = lambda + shift.
double lyapunov_value(const ModalState& c, const EigenBasis& basis, const LyapunovConfig& cfg);

// C with C (1 + V(c)) >= ||c||_{H^s} for every unit c.
double coercivity_constant(const LyapunovConfig& cfg, const EigenBasis& basis);

// Derivative kernel on tgrid: d/dsigma V(U_T(c0, sigma w))|_0 = int Phi w.
// Evaluates the derivative of the full V through the linearized flow, which
// for the truncated system reduces to Phi(t) = 2 Im <g .* y(t), B y(t)> with
// y the free evolution of c0 and g the Lyapunov mode weights.
Eigen::VectorXd phi_kernel(const ModalState& c0, const EigenBasis& basis,
                           const CouplingMatrix& B, const LyapunovConfig& cfg,
                           const Eigen::VectorXd& tgrid);

// Smooth bump window on (0, T), normalized to peak 1 at T/2.
double bump_window(double tau, double T);

struct Probe {
    double T{0.0};
    ControlSignal w;
    double pairing{0.0};  // int Phi w > 0 by construction
};

// Scans Phi on [0, horizon_max], picks the window with maximal bump-weighted
// mean power, and returns w = eps * bump * Phi scaled to the amplitude cap.
// Throws DegenerateKernel when ||Phi||_inf <= kernel_tol on the horizon.
Probe choose_probe(const ModalState& c0, const EigenBasis& basis, const CouplingMatrix& B,
                   const LyapunovConfig& cfg, double horizon_max, double cap,
                   double control_dt, double kernel_tol = 1e-10);

struct LineSearchResult {
    double sigma{0.0};
    double new_value{0.0};
};

// Backtracking over sigma = -sigma_init 2^{-m}; accepts the first sigma with
// V(U_T(c0, sigma w)) <= V(c0) - armijo |sigma| int(Phi w).
LineSearchResult line_search_sigma(const ModalState& c0, const ControlSignal& w, double T,
                                   const EigenBasis& basis, const CouplingMatrix& B,
                                   const LyapunovConfig& cfg, double pairing,
                                   const SteerParams& params);

// Probe -> line search -> state update until V < tol or max_iter. Throws
// Stalled after retry_budget consecutive degenerate kernels / failed searches.
SteeringReport steer_to_eigenstate(const ModalState& c0, const EigenBasis& basis,
                                   const CouplingMatrix& B, const LyapunovConfig& cfg,
                                   const SteerParams& params);

}  // namespace qsteer
