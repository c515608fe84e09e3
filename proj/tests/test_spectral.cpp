#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "qsteer/spectral.hpp"

using namespace qsteer;

namespace {

Grid1D unit_grid(int n) { return Grid1D{0.0, 1.0, n}; }

// Exact sine basis on (0,1) packaged as an EigenBasis, for tests that need
// closed-form eigenvalues rather than FD ones.
EigenBasis exact_sine_basis(int n, int n_modes) {
    EigenBasis basis;
    basis.grid = unit_grid(n);
    basis.n_modes = n_modes;
    basis.lambdas.resize(n_modes);
    basis.modes.resize(n, n_modes);
    for (int j = 0; j < n_modes; ++j) {
        basis.lambdas(j) = (j + 1.0) * (j + 1.0) * M_PI * M_PI;
        for (int k = 0; k < n; ++k)
            basis.modes(k, j) = std::sqrt(2.0) * std::sin((j + 1) * M_PI * basis.grid.x(k));
    }
    basis.shift = 0.0;
    return basis;
}

}  // namespace

TEST_CASE("free particle spectrum matches j^2 pi^2") {
    const auto basis = solve_dirichlet_eigs(zero_potential(unit_grid(2000)), 5);
    for (int j = 1; j <= 5; ++j) {
        const double exact = j * j * M_PI * M_PI;
        CHECK(std::abs(basis.lambdas(j - 1) - exact) / exact < 5e-3);
    }
    CHECK(basis.shift == 0.0);  // lambda_1 ~ pi^2 > 1 already
}

TEST_CASE("constant potential shifts the spectrum uniformly") {
    const auto g = unit_grid(400);
    const auto base = solve_dirichlet_eigs(zero_potential(g), 4);
    SampledPotential c7{g, Eigen::VectorXd::Constant(g.n, 7.5)};
    const auto shifted = solve_dirichlet_eigs(c7, 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(shifted.lambdas(j) == doctest::Approx(base.lambdas(j) + 7.5).epsilon(1e-12));
        CHECK((shifted.modes.col(j) - base.modes.col(j)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("linear potential agrees with the shooting oracle") {
    // Frozen from the high-resolution shooting/bisection oracle below.
    const double frozen[4] = {14.760099270675, 44.510924333706, 93.845926038016,
                              162.925609831513};
    auto V = [](double x) { return 10.0 * x; };
    const auto oracle_eigs = oracle::shooting_eigenvalues(V, 0.0, 1.0, 4, 20000);
    for (int j = 0; j < 4; ++j)
        CHECK(oracle_eigs[j] == doctest::Approx(frozen[j]).epsilon(1e-9));

    const auto basis =
        solve_dirichlet_eigs(linear_potential(unit_grid(2000), 10.0), 4);
    for (int j = 0; j < 4; ++j)
        CHECK(std::abs(basis.lambdas(j) - frozen[j]) / frozen[j] < 1e-3);
}

TEST_CASE("grid too coarse is rejected") {
    CHECK_THROWS_AS(solve_dirichlet_eigs(zero_potential(unit_grid(16)), 5),
                    std::invalid_argument);
    SampledPotential bad{unit_grid(100), Eigen::VectorXd::Constant(100, 1.0)};
    bad.values(3) = std::nan("");
    CHECK_THROWS_AS(solve_dirichlet_eigs(bad, 4), std::invalid_argument);
}

TEST_CASE("negative ground energy produces a positive shifted spectrum") {
    const auto g = unit_grid(800);
    const auto basis = solve_dirichlet_eigs(well_potential(g, 60.0, 0.2, 0.8), 5);
    CHECK(basis.lambdas(0) < 0.0);
    for (int j = 0; j < 5; ++j) CHECK(basis.shifted(j) > 0.0);
    CHECK(basis.shifted(0) == doctest::Approx(1.0));
}

TEST_CASE("orthonormality and simplicity across potentials") {
    const auto g = unit_grid(600);
    for (const auto& V : {zero_potential(g), linear_potential(g, 10.0),
                          quadratic_potential(g, 25.0), well_potential(g, 40.0, 0.3, 0.7)}) {
        const auto basis = solve_dirichlet_eigs(V, 8);
        const Eigen::MatrixXd gram = basis.gram();
        CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
        for (int j = 0; j + 1 < 8; ++j) CHECK(basis.lambdas(j + 1) > basis.lambdas(j));
        // Sign gauge: first nonzero component positive.
        for (int j = 0; j < 8; ++j) {
            int k = 0;
            while (k < g.n && std::abs(basis.modes(k, j)) <= 1e-12) ++k;
            CHECK(basis.modes(k, j) > 0.0);
        }
    }
}

TEST_CASE("grid refinement converges at second order") {
    for (int n : {250, 500, 1000}) {
        const auto coarse = solve_dirichlet_eigs(zero_potential(unit_grid(n)), 3);
        const auto fine = solve_dirichlet_eigs(zero_potential(unit_grid(2 * n + 1)), 3);
        for (int j = 1; j <= 3; ++j) {
            const double exact = j * j * M_PI * M_PI;
            const double ratio = std::abs(coarse.lambdas(j - 1) - exact) /
                                 std::abs(fine.lambdas(j - 1) - exact);
            CHECK(ratio > 3.5);
            CHECK(ratio < 4.5);
        }
    }
}

TEST_CASE("domain monotonicity under inclusion") {
    const auto small = solve_dirichlet_eigs(zero_potential(Grid1D{0.0, 1.0, 1200}), 6);
    const auto large = solve_dirichlet_eigs(zero_potential(Grid1D{-1.0, 2.0, 1200}), 6);
    for (int j = 0; j < 6; ++j) CHECK(large.lambdas(j) < small.lambdas(j));
}

TEST_CASE("coupling matrix against closed forms") {
    const auto g = unit_grid(2000);
    const auto basis = solve_dirichlet_eigs(zero_potential(g), 8);
    const auto B = coupling_matrix(linear_potential(g, 1.0), basis);

    // int_0^1 2 x sin(pi x) sin(2 pi x) dx = -16 / (9 pi^2), cross-checked by
    // adaptive quadrature.
    const double closed = -16.0 / (9.0 * M_PI * M_PI);
    const double quad = oracle::adaptive_simpson(
        [](double x) { return 2.0 * x * std::sin(M_PI * x) * std::sin(2.0 * M_PI * x); }, 0.0,
        1.0);
    CHECK(quad == doctest::Approx(closed).epsilon(1e-10));
    CHECK(B.entries(0, 1) == doctest::Approx(closed).epsilon(1e-6));

    // Parity law: <x e_1, e_j> = 0 for odd j.
    CHECK(std::abs(B.entries(0, 2)) < 1e-8);
    CHECK(std::abs(B.entries(0, 4)) < 1e-8);
    CHECK(std::abs(B.entries(0, 6)) < 1e-8);

    CHECK(B.max_asymmetry() <= 1e-10);
}

TEST_CASE("coupling with Q == 1 is the identity") {
    const auto g = unit_grid(500);
    const auto basis = solve_dirichlet_eigs(linear_potential(g, 3.0), 6);
    SampledPotential one{g, Eigen::VectorXd::Ones(g.n)};
    const auto B = coupling_matrix(one, basis);
    CHECK((B.entries - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("coupling rejects grid mismatch") {
    const auto basis = solve_dirichlet_eigs(zero_potential(unit_grid(500)), 4);
    CHECK_THROWS_AS(coupling_matrix(zero_potential(unit_grid(600)), basis),
                    std::invalid_argument);
}

TEST_CASE("sobolev norm trivial weights") {
    const auto basis = exact_sine_basis(1000, 4);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(4);
    c(0) = std::complex<double>(0.6, 0.0);
    c(1) = std::complex<double>(0.0, 0.8);
    CHECK(sobolev_norm_sq(c, basis, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::VectorXcd e2 = Eigen::VectorXcd::Zero(4);
    e2(1) = 1.0;
    const double w2 = std::pow(4.0 * M_PI * M_PI, 2.0);
    CHECK(sobolev_norm_sq(e2, basis, 2.0) == doctest::Approx(w2).epsilon(1e-12));
    CHECK(w2 == doctest::Approx(1558.5).epsilon(1e-4));
}

TEST_CASE("sobolev s=1 matches a gradient-quadrature oracle") {
    const int n = 2000;
    const auto g = unit_grid(n);
    const auto basis = solve_dirichlet_eigs(zero_potential(g), 4);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(4);
    c(0) = std::complex<double>(0.8, 0.0);
    c(1) = std::complex<double>(0.36, 0.48);

    // Assemble z on the grid and integrate |z'|^2 by one-sided differences,
    // with the Dirichlet zeros at both walls.
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(n);
    for (int j = 0; j < 4; ++j) z += c(j) * basis.modes.col(j).cast<std::complex<double>>();
    const double h = g.h();
    double grad_sq = std::norm(z(0)) / (h * h) * h;  // from the left wall
    for (int k = 0; k + 1 < n; ++k) grad_sq += std::norm(z(k + 1) - z(k)) / (h * h) * h;
    grad_sq += std::norm(z(n - 1)) / (h * h) * h;  // to the right wall

    const double spectral = sobolev_norm_sq(c, basis, 1.0);
    CHECK(std::abs(grad_sq - spectral) / spectral < 1e-3);
}

TEST_CASE("project_away") {
    Eigen::VectorXcd c(3);
    c << std::complex<double>(1.0 / std::sqrt(2.0), 0.0),
        std::complex<double>(1.0 / std::sqrt(2.0), 0.0), 0.0;

    const auto p1 = project_away(c, 1);
    CHECK(p1(0) == std::complex<double>(0.0, 0.0));
    CHECK(p1(1) == c(1));

    Eigen::VectorXcd e2 = Eigen::VectorXcd::Zero(3);
    e2(1) = 1.0;
    CHECK(project_away(e2, 2).norm() == 0.0);

    Eigen::VectorXcd no3 = c;
    CHECK((project_away(no3, 3) - no3).norm() == 0.0);

    CHECK_THROWS_AS(project_away(c, 0), std::out_of_range);
    CHECK_THROWS_AS(project_away(c, 4), std::out_of_range);
}

TEST_CASE("potential loading from CSV resamples by interpolation") {
    const auto g = unit_grid(200);
    const std::string path = "test_potential_tmp.csv";
    {
        std::ofstream f(path);
        f << "x,value\n";
        for (int k = 0; k <= 10; ++k) {
            const double x = k / 10.0;
            f << x << "," << 10.0 * x << "\n";
        }
    }
    const auto V = potential_from_csv(g, path);
    const auto direct = linear_potential(g, 10.0);
    CHECK((V.values - direct.values).cwiseAbs().maxCoeff() < 1e-9);
    std::remove(path.c_str());
}
