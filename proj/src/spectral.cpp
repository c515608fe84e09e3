#include "qsteer/spectral.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qsteer {

Eigen::MatrixXd EigenBasis::gram() const {
    return grid.h() * (modes.transpose() * modes);
}

EigenBasis solve_dirichlet_eigs(const SampledPotential& V, int n_modes) {
    V.check();
    const int n = V.grid.n;
    if (n_modes < 1) throw std::invalid_argument("solve_dirichlet_eigs: n_modes >= 1");
    if (n_modes > n / 4)
        throw std::invalid_argument(
            "solve_dirichlet_eigs: grid too coarse, need n_modes <= grid.n / 4");

    const double h = V.grid.h();
    const double inv_h2 = 1.0 / (h * h);

    // Symmetric tridiagonal FD matrix: diag 2/h^2 + V_k, off-diagonals -1/h^2.
    std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * inv_h2 + V.values(k);
    for (int k = 0; k + 1 < n; ++k) off[k] = -inv_h2;

    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, n_modes);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n_modes));
    lapack_int m_found = 0;
    const lapack_int info = LAPACKE_dstevr(
        LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(),
        0.0, 0.0, 1, n_modes, 0.0, &m_found, w.data(), z.data(), n, isuppz.data());
    if (info != 0 || m_found != n_modes)
        throw std::runtime_error("solve_dirichlet_eigs: tridiagonal eigensolver failed");

    EigenBasis basis;
    basis.grid = V.grid;
    basis.n_modes = n_modes;
    basis.lambdas = w.head(n_modes);
    basis.modes = z;

    // LAPACK returns unit 2-norm columns; rescale to the h-weighted quadrature
    // norm and fix the sign gauge (first nonzero component positive).
    basis.modes *= 1.0 / std::sqrt(h);
    for (int j = 0; j < n_modes; ++j) {
        const double scale = basis.modes.col(j).cwiseAbs().maxCoeff();
        for (int k = 0; k < n; ++k) {
            if (std::abs(basis.modes(k, j)) > 1e-12 * scale) {
                if (basis.modes(k, j) < 0.0) basis.modes.col(j) = -basis.modes.col(j);
                break;
            }
        }
    }

    basis.shift = std::max(0.0, 1.0 - basis.lambdas(0));
    return basis;
}

CouplingMatrix coupling_matrix(const SampledPotential& Q, const EigenBasis& basis) {
    Q.check();
    if (!Q.grid.same_as(basis.grid))
        throw std::invalid_argument("coupling_matrix: Q and basis live on different grids");
    const double h = basis.grid.h();
    CouplingMatrix B;
    B.entries = h * (basis.modes.transpose() * Q.values.asDiagonal() * basis.modes);
    return B;
}

double sobolev_norm_sq(const Eigen::VectorXcd& c, const EigenBasis& basis, double s) {
    if (s < 0.0) throw std::invalid_argument("sobolev_norm_sq: s >= 0");
    if (c.size() != basis.n_modes)
        throw std::invalid_argument("sobolev_norm_sq: dimension mismatch");
    double acc = 0.0;
    for (int j = 0; j < basis.n_modes; ++j)
        acc += std::pow(basis.shifted(j), s) * std::norm(c(j));
    return acc;
}

Eigen::VectorXcd project_away(const Eigen::VectorXcd& c, int i) {
    if (i < 1 || i > c.size()) throw std::out_of_range("project_away: index out of range");
    Eigen::VectorXcd out = c;
    out(i - 1) = 0.0;
    return out;
}

}  // namespace qsteer
