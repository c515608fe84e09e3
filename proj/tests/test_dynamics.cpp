#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "qsteer/dynamics.hpp"

using namespace qsteer;
using Cd = std::complex<double>;

namespace {

// Synthetic basis: dynamics only reads lambdas and the dimension, so the
// grid/mode fields can be placeholders.
EigenBasis synthetic_basis(const Eigen::VectorXd& lambdas) {
    EigenBasis basis;
    basis.grid = Grid1D{0.0, 1.0, 10};
    basis.n_modes = static_cast<int>(lambdas.size());
    basis.lambdas = lambdas;
    basis.modes = Eigen::MatrixXd::Zero(10, basis.n_modes);
    basis.shift = std::max(0.0, 1.0 - lambdas(0));
    return basis;
}

CouplingMatrix symmetric_coupling(const Eigen::MatrixXd& M) {
    CouplingMatrix B;
    B.entries = 0.5 * (M + M.transpose());
    return B;
}

ModalState random_state(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd c(n);
    for (int j = 0; j < n; ++j) c(j) = Cd(g(rng), g(rng));
    return ModalState::normalized(c);
}

ControlSignal sampled_control(double T, double dt, const std::function<double(double)>& f) {
    const int steps = static_cast<int>(std::llround(T / dt));
    ControlSignal u;
    u.t0 = 0.0;
    u.t1 = steps * dt;
    u.dt = dt;
    u.samples.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) u.samples(k) = f(k * dt);
    return u;
}

}  // namespace

TEST_CASE("free evolution basics") {
    const auto basis = synthetic_basis((Eigen::VectorXd(3) << 1.0, 2.5, 4.25).finished());
    const auto c = random_state(3, 7);

    const auto id = free_evolve(c, basis, 0.0);
    CHECK((id.coeffs - c.coeffs).norm() == 0.0);

    const auto e1 = ModalState::basis_state(3, 1);
    const auto ph = free_evolve(e1, basis, 0.73);
    CHECK(std::abs(ph.coeffs(0) - std::exp(Cd(0.0, -1.0) * 1.0 * 0.73)) < 1e-15);
    CHECK(std::abs(std::abs(ph.coeffs(0)) - 1.0) < 1e-15);

    const auto moved = free_evolve(c, basis, 12.9);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(std::abs(moved.coeffs(j)) - std::abs(c.coeffs(j))) < 1e-15);
}

TEST_CASE("zero control reproduces the free flow") {
    const auto basis = synthetic_basis((Eigen::VectorXd(4) << 0.5, 2.0, 5.5, 9.0).finished());
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(4, 4);
    const auto B = symmetric_coupling(M);
    const auto c0 = random_state(4, 11);

    const auto traj = propagate(c0, ControlSignal::zero(0.0, 2.0, 1e-3), basis, B);
    for (std::size_t k = 0; k < traj.times.size(); k += 200) {
        const auto ref = free_evolve(c0, basis, traj.times[k]);
        CHECK((traj.states[k].coeffs - ref.coeffs).norm() < 1e-10);
    }
}

TEST_CASE("constant drive matches the closed-form two-level solution") {
    const auto basis = synthetic_basis((Eigen::VectorXd(2) << 1.0, 3.7).finished());
    Eigen::MatrixXd M(2, 2);
    M << 0.15, 0.42, 0.42, -0.3;
    const auto B = symmetric_coupling(M);
    const double u_const = 0.8, T = 2.5;

    Eigen::Matrix2cd H = (basis.lambdas.asDiagonal().toDenseMatrix() + u_const * M).cast<Cd>();
    const auto c0 = random_state(2, 3);
    const Eigen::Vector2cd expected = oracle::rabi_final(H, T, c0.coeffs.head<2>());

    const auto u = sampled_control(T, 1e-3, [&](double) { return u_const; });
    const auto got = propagate_final(c0, u, basis, B);
    CHECK((got.coeffs - expected).norm() < 1e-8);
}

TEST_CASE("norm is conserved over ten thousand driven steps") {
    const auto basis =
        synthetic_basis((Eigen::VectorXd(4) << 2.0, 11.0, 23.5, 40.0).finished());
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(4, 4);
    const auto B = symmetric_coupling(M);
    const auto c0 = random_state(4, 23);

    const auto u = sampled_control(10.0, 1e-3,
                                   [](double t) { return 0.7 * std::sin(3.1 * t) + 0.2; });
    REQUIRE(u.steps() == 10000);
    const auto traj = propagate(c0, u, basis, B);
    for (const auto& s : traj.states) CHECK(s.sphere_error() <= 1e-10);
}

TEST_CASE("halving the step gives second-order endpoint convergence") {
    const auto basis = synthetic_basis((Eigen::VectorXd(3) << 1.0, 4.0, 9.5).finished());
    Eigen::MatrixXd M(3, 3);
    M << 0.0, 0.5, 0.1, 0.5, 0.2, 0.4, 0.1, 0.4, -0.3;
    const auto B = symmetric_coupling(M);
    const auto c0 = random_state(3, 5);
    auto f = [](double t) { return std::sin(2.0 * t) * std::exp(-0.2 * t); };

    const double T = 2.0;
    const auto ref = propagate_final(c0, sampled_control(T, T / 65536.0, f), basis, B);
    double prev_err = -1.0;
    for (int steps : {256, 512, 1024}) {
        const auto got = propagate_final(c0, sampled_control(T, T / steps, f), basis, B);
        const double err = (got.coeffs - ref.coeffs).norm();
        if (prev_err > 0.0) {
            const double ratio = prev_err / err;
            CHECK(ratio > 3.2);
            CHECK(ratio < 4.8);
        }
        prev_err = err;
    }
}

TEST_CASE("flow is an exact isometry for a fixed control") {
    const auto basis =
        synthetic_basis((Eigen::VectorXd(5) << 1.0, 3.0, 7.0, 13.0, 21.0).finished());
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(5, 5);
    const auto B = symmetric_coupling(M);
    const auto u = sampled_control(1.5, 1e-3, [](double t) { return std::cos(5.0 * t); });

    for (unsigned seed = 0; seed < 10; ++seed) {
        const auto a = random_state(5, 100 + seed);
        const auto b = random_state(5, 200 + seed);
        const auto fa = propagate_final(a, u, basis, B);
        const auto fb = propagate_final(b, u, basis, B);
        CHECK(std::abs((fa.coeffs - fb.coeffs).norm() - (a.coeffs - b.coeffs).norm()) < 1e-10);
    }
}

TEST_CASE("propagate validates its inputs") {
    const auto basis = synthetic_basis((Eigen::VectorXd(2) << 1.0, 2.0).finished());
    const auto B = symmetric_coupling(Eigen::MatrixXd::Identity(2, 2));
    const auto c0 = ModalState::basis_state(2, 1);

    ControlSignal bad = ControlSignal::zero(0.0, 1.0, 0.1);
    bad.samples(3) = std::nan("");
    CHECK_THROWS_AS(propagate(c0, bad, basis, B), std::invalid_argument);

    ControlSignal uneven = ControlSignal::zero(0.0, 1.0, 0.1);
    uneven.t1 = 1.04;  // dt no longer divides the span
    CHECK_THROWS_AS(propagate(c0, uneven, basis, B), std::invalid_argument);

    const auto B3 = symmetric_coupling(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(propagate(c0, ControlSignal::zero(0.0, 1.0, 0.1), basis, B3),
                    std::invalid_argument);
}

TEST_CASE("linearization vanishes for zero data") {
    const auto basis = synthetic_basis((Eigen::VectorXd(3) << 1.0, 2.0, 4.0).finished());
    const auto B = symmetric_coupling(Eigen::MatrixXd::Random(3, 3));
    const auto c0 = random_state(3, 1);
    const auto w = ControlSignal::zero(0.0, 1.0, 1e-3);
    CHECK(linearized_solve(c0, w, basis, B, 1.0).norm() == 0.0);
}

TEST_CASE("linearization matches the forced-ODE oracle") {
    const auto basis = synthetic_basis((Eigen::VectorXd(2) << 1.3, 3.9).finished());
    Eigen::MatrixXd M(2, 2);
    M << 0.2, 0.45, 0.45, -0.15;
    const auto B = symmetric_coupling(M);
    const auto c0 = ModalState::basis_state(2, 1);  // single-mode data: only k = 1 acts

    const double T = 2.0;
    auto wf = [](double t) { return std::sin(2.6 * t) * t * (2.0 - t); };
    const auto w = sampled_control(T, 1e-4, wf);

    const Eigen::VectorXcd got = linearized_solve(c0, w, basis, B, T);
    const Eigen::VectorXcd ref =
        oracle::forced_ode_solve(c0.coeffs, basis.lambdas, B.entries, wf, T, 40000);
    CHECK((got - ref).norm() < 1e-6);

    // Multi-mode data goes through the same formula.
    const auto c1 = random_state(2, 9);
    const Eigen::VectorXcd got1 = linearized_solve(c1, w, basis, B, T);
    const Eigen::VectorXcd ref1 =
        oracle::forced_ode_solve(c1.coeffs, basis.lambdas, B.entries, wf, T, 40000);
    CHECK((got1 - ref1).norm() < 1e-6);
}

TEST_CASE("linearization is the first-order response of the full flow") {
    const auto basis = synthetic_basis((Eigen::VectorXd(3) << 1.0, 2.7, 5.8).finished());
    Eigen::MatrixXd M(3, 3);
    M << 0.1, 0.4, 0.15, 0.4, -0.2, 0.3, 0.15, 0.3, 0.05;
    const auto B = symmetric_coupling(M);
    const auto c0 = random_state(3, 31);

    const double T = 1.5, dt = 5e-5;
    auto wf = [T](double t) { return std::sin(3.0 * t) * t * (T - t); };
    const auto w = sampled_control(T, dt, wf);
    const Eigen::VectorXcd r = linearized_solve(c0, w, basis, B, T);
    const Eigen::VectorXcd base =
        propagate_final(c0, ControlSignal::zero(0.0, T, dt), basis, B).coeffs;

    double prev = -1.0;
    for (double sigma : {1e-2, 1e-3}) {
        ControlSignal su = w;
        su.samples *= sigma;
        const Eigen::VectorXcd pert = propagate_final(c0, su, basis, B).coeffs;
        const double residual = ((pert - base) / sigma - r).norm();
        if (prev > 0.0) {
            const double ratio = prev / residual;
            CHECK(ratio > 5.0);   // first-order decay, one decade of sigma
            CHECK(ratio < 20.0);
        }
        prev = residual;
    }
}

TEST_CASE("linearization rejects support violations") {
    const auto basis = synthetic_basis((Eigen::VectorXd(2) << 1.0, 2.0).finished());
    const auto B = symmetric_coupling(Eigen::MatrixXd::Identity(2, 2));
    const auto c0 = ModalState::basis_state(2, 1);
    const auto w = sampled_control(2.0, 1e-2, [](double t) { return t; });
    CHECK_THROWS_AS(linearized_solve(c0, w, basis, B, 1.0), std::invalid_argument);
}
