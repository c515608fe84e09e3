#include "qsteer/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qsteer {

using Cd = std::complex<double>;
static constexpr Cd kI{0.0, 1.0};

ModalState ModalState::basis_state(int n, int i) {
    if (i < 1 || i > n) throw std::out_of_range("ModalState::basis_state: index");
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    c(i - 1) = 1.0;
    return {c};
}

ModalState ModalState::uniform(int n, const std::vector<int>& indices) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    for (int i : indices) {
        if (i < 1 || i > n) throw std::out_of_range("ModalState::uniform: index");
        c(i - 1) = 1.0;
    }
    return normalized(std::move(c));
}

ModalState ModalState::normalized(Eigen::VectorXcd c) {
    const double nrm = c.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("ModalState: zero vector");
    return {c / nrm};
}

ControlSignal ControlSignal::zero(double t0, double t1, double dt) {
    ControlSignal u;
    u.t0 = t0;
    u.t1 = t1;
    u.dt = dt;
    const int steps = static_cast<int>(std::llround((t1 - t0) / dt));
    u.samples = Eigen::VectorXd::Zero(steps + 1);
    u.check();
    return u;
}

void ControlSignal::check() const {
    if (!(dt > 0.0)) throw std::invalid_argument("ControlSignal: dt > 0 required");
    if (samples.size() < 2) throw std::invalid_argument("ControlSignal: need >= 2 samples");
    const double span = t1 - t0;
    if (std::abs(span - steps() * dt) > 1e-9 * std::max(1.0, std::abs(span)))
        throw std::invalid_argument("ControlSignal: dt does not divide t1 - t0 evenly");
    if (!samples.allFinite()) throw std::invalid_argument("ControlSignal: non-finite samples");
    if (max_abs() > amplitude_cap * (1.0 + 1e-12))
        throw std::invalid_argument("ControlSignal: samples exceed amplitude cap");
}

void ControlSignal::check_probe_shape() const {
    check();
    if (samples(0) != 0.0 || samples(samples.size() - 1) != 0.0)
        throw std::invalid_argument("ControlSignal: probe must vanish at both endpoints");
}

ModalState free_evolve(const ModalState& c, const EigenBasis& basis, double t) {
    if (c.dim() != basis.n_modes) throw std::invalid_argument("free_evolve: dimension mismatch");
    Eigen::VectorXcd out(c.dim());
    for (int j = 0; j < c.dim(); ++j)
        out(j) = std::exp(-kI * basis.lambdas(j) * t) * c.coeffs(j);
    return {out};
}

namespace {

// Advances through the sampled control with one exact Hermitian exponential
// per step, the control frozen at the interval midpoint. `record` is called
// with (time, state) after every step; pass nullptr to skip.
template <typename Recorder>
Eigen::VectorXcd step_through(const Eigen::VectorXcd& c0, const ControlSignal& u,
                              const EigenBasis& basis, const CouplingMatrix& B,
                              Recorder&& record) {
    const int N = basis.n_modes;
    Eigen::VectorXcd c = c0;
    Eigen::MatrixXcd H(N, N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    const Eigen::MatrixXcd Bc = B.entries.cast<Cd>();
    const Eigen::VectorXcd lam = basis.lambdas.cast<Cd>();

    for (int k = 0; k < u.steps(); ++k) {
        const double u_mid = 0.5 * (u.samples(k) + u.samples(k + 1));
        if (u_mid == 0.0) {
            // Diagonal step; avoids the eigensolve on silent intervals.
            for (int j = 0; j < N; ++j)
                c(j) *= std::exp(-kI * basis.lambdas(j) * u.dt);
        } else {
            H = u_mid * Bc;
            H.diagonal() += lam;
            es.compute(H);
            const Eigen::VectorXcd phases =
                (-kI * u.dt * es.eigenvalues().array().cast<Cd>()).exp().matrix();
            c = es.eigenvectors() *
                (phases.array() * (es.eigenvectors().adjoint() * c).array()).matrix();
        }
        record(u.t0 + (k + 1) * u.dt, c);
    }
    return c;
}

}  // namespace

Trajectory propagate(const ModalState& c0, const ControlSignal& u,
                     const EigenBasis& basis, const CouplingMatrix& B) {
    u.check();
    if (c0.dim() != basis.n_modes || B.entries.rows() != basis.n_modes)
        throw std::invalid_argument("propagate: dimension mismatch");
    Trajectory traj;
    traj.times.reserve(u.steps() + 1);
    traj.states.reserve(u.steps() + 1);
    traj.times.push_back(u.t0);
    traj.states.push_back(c0);
    step_through(c0.coeffs, u, basis, B, [&](double t, const Eigen::VectorXcd& c) {
        traj.times.push_back(t);
        traj.states.push_back(ModalState{c});
    });
    return traj;
}

ModalState propagate_final(const ModalState& c0, const ControlSignal& u,
                           const EigenBasis& basis, const CouplingMatrix& B) {
    u.check();
    if (c0.dim() != basis.n_modes || B.entries.rows() != basis.n_modes)
        throw std::invalid_argument("propagate_final: dimension mismatch");
    return {step_through(c0.coeffs, u, basis, B, [](double, const Eigen::VectorXcd&) {})};
}

Eigen::VectorXcd linearized_solve(const ModalState& c0, const ControlSignal& w,
                                  const EigenBasis& basis, const CouplingMatrix& B,
                                  double T) {
    w.check();
    const int N = basis.n_modes;
    if (c0.dim() != N) throw std::invalid_argument("linearized_solve: dimension mismatch");
    const double tol = 1e-9 * std::max(1.0, std::abs(T));
    if (w.t0 < -tol || w.t1 > T + tol)
        throw std::invalid_argument("linearized_solve: control support exceeds [0, T]");

    // I[k][j] = int_0^T exp(-i (lambda_k - lambda_j) tau) w(tau) dtau by
    // trapezoid on w's grid; w vanishes outside its own support.
    const int m = static_cast<int>(w.samples.size());
    Eigen::MatrixXcd E(m, N);
    for (int t = 0; t < m; ++t) {
        const double tau = w.t0 + t * w.dt;
        for (int j = 0; j < N; ++j) E(t, j) = std::exp(-kI * basis.lambdas(j) * tau);
    }
    Eigen::VectorXd trapw = Eigen::VectorXd::Constant(m, w.dt);
    trapw(0) *= 0.5;
    trapw(m - 1) *= 0.5;
    const Eigen::VectorXd wt = trapw.cwiseProduct(w.samples);
    // F[t][k] = wt_t. E[t][k];   I = F^T conj(E)
    const Eigen::MatrixXcd I = (E.array().colwise() * wt.array().cast<Cd>())
                                   .matrix()
                                   .transpose() *
                               E.conjugate();

    Eigen::VectorXcd r(N);
    for (int j = 0; j < N; ++j) {
        Cd acc = 0.0;
        for (int k = 0; k < N; ++k) acc += c0.coeffs(k) * B.entries(j, k) * I(k, j);
        r(j) = -kI * std::exp(-kI * basis.lambdas(j) * T) * acc;
    }
    return r;
}

}  // namespace qsteer
