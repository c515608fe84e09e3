// dynamics.hpp — unitary propagation of the truncated bilinear system
// i c' = Lambda c + u(t) B c and of its linearization around the free flow.

#pragma once

#include <Eigen/Core>

#include <complex>
#include <limits>
#include <vector>

#include "qsteer/spectral.hpp"

namespace qsteer {

// Complex coefficient vector on the truncated unit sphere.
struct ModalState {
    Eigen::VectorXcd coeffs;

    int dim() const { return static_cast<int>(coeffs.size()); }
    double norm() const { return coeffs.norm(); }
    double sphere_error() const { return std::abs(coeffs.norm() - 1.0); }

    // Indicator of mode i (1-based).
    static ModalState basis_state(int n, int i);
    // Equal-weight superposition of the given 1-based modes, normalized.
    static ModalState uniform(int n, const std::vector<int>& indices);
    static ModalState normalized(Eigen::VectorXcd c);
};

// Real control sampled on a uniform time grid. Steering probes are built with
// zero endpoints (compact support); random chain amplitudes are arbitrary
// sampled signals, so the zero-endpoint property is enforced by the probe
// factories rather than here.
struct ControlSignal {
    double t0{0.0};
    double t1{0.0};
    double dt{0.0};
    Eigen::VectorXd samples;  // size = steps + 1, samples[k] = u(t0 + k dt)
    double amplitude_cap{std::numeric_limits<double>::infinity()};

    int steps() const { return static_cast<int>(samples.size()) - 1; }
    double duration() const { return t1 - t0; }
    double max_abs() const { return samples.size() ? samples.cwiseAbs().maxCoeff() : 0.0; }

    static ControlSignal zero(double t0, double t1, double dt);
    // Grid consistency, finiteness, cap. Throws std::invalid_argument.
    void check() const;
    // Additionally require zero endpoints (compactly supported probe shape).
    void check_probe_shape() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ModalState> states;

    const ModalState& final() const { return states.back(); }
};

// Diagonal flow: c_j -> exp(-i lambda_j t) c_j.
ModalState free_evolve(const ModalState& c, const EigenBasis& basis, double t);

// One midpoint-frozen step per sample interval: the state is advanced by the
// exact exponential of the Hermitian matrix Lambda + u_mid B, so every step is
// unitary up to roundoff. Returns the sampled trajectory including endpoints.
Trajectory propagate(const ModalState& c0, const ControlSignal& u,
                     const EigenBasis& basis, const CouplingMatrix& B);

// Same stepping without storing the path.
ModalState propagate_final(const ModalState& c0, const ControlSignal& u,
                           const EigenBasis& basis, const CouplingMatrix& B);

// Modal coefficients of the solution of the linearization around the free
// flow at time T, computed from the explicit modal formula with the
// oscillatory integrals evaluated by trapezoidal quadrature on w's grid.
// w must be supported in [0, T].
Eigen::VectorXcd linearized_solve(const ModalState& c0, const ControlSignal& w,
                                  const EigenBasis& basis, const CouplingMatrix& B,
                                  double T);

}  // namespace qsteer
