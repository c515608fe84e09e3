// spectral.hpp — Dirichlet eigenpairs of -u'' + V u on an interval,
// coupling matrices of a control potential, and weighted Sobolev norms.

#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <complex>

#include "qsteer/grid.hpp"

namespace qsteer {

// Lowest eigenpairs of the second-order central-difference discretization of
// -u'' + V u with zero boundary values. Modes are stored as columns,
// L2-normalized under the h-weighted quadrature and sign-fixed so the first
// nonzero component is positive. `shift` makes lambda_j + shift > 0 for all j,
// which keeps the H^s weights well defined for negative ground energies.
struct EigenBasis {
    Grid1D grid;
    int n_modes{0};
    Eigen::VectorXd lambdas;  // ascending, simple
    Eigen::MatrixXd modes;    // grid.n x n_modes
    double shift{0.0};

    double shifted(int j) const { return lambdas(j) + shift; }  // j 0-based
    Eigen::MatrixXd gram() const;  // h-weighted Gram matrix of the modes
};

// B[j][k] = <Q e_k, e_j> under h-weighted quadrature. Symmetric.
struct CouplingMatrix {
    Eigen::MatrixXd entries;

    double max_asymmetry() const {
        return (entries - entries.transpose()).cwiseAbs().maxCoeff();
    }
};

// Requires n_modes <= grid.n / 4; high FD modes are discretization garbage.
EigenBasis solve_dirichlet_eigs(const SampledPotential& V, int n_modes);

CouplingMatrix coupling_matrix(const SampledPotential& Q, const EigenBasis& basis);

// Sum_j (lambda_j + shift)^s |c_j|^2, the squared H^s norm in the eigenbasis.
double sobolev_norm_sq(const Eigen::VectorXcd& c, const EigenBasis& basis, double s);

// Zero out component i (1-based), leave the rest; the result is not
// renormalized.
Eigen::VectorXcd project_away(const Eigen::VectorXcd& c, int i);

}  // namespace qsteer
