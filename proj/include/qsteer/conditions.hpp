// conditions.hpp — coupling and non-resonance condition checks, eigenvalue
// perturbation derivatives, sigma-shift genericity scans, and numerical
// rational-independence testing of squared eigenfunctions.

#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "qsteer/spectral.hpp"

namespace qsteer {

// A spectral-gap coincidence lambda_i - lambda_j = lambda_p - lambda_q
// (indices 1-based, {i,j} != {p,q}, j != i). defect = |l_i - l_j - l_p + l_q|.
struct Resonance {
    int j{0};
    int p{0};
    int q{0};
    double defect{0.0};
};

struct ConditionReport {
    int target{1};
    double coupling_tol{1e-8};
    double resonance_tol{0.0};
    std::vector<int> coupling_failures;  // j with |B[i][j]| <= tol, 1-based
    std::vector<Resonance> resonances;

    bool clean() const { return coupling_failures.empty() && resonances.empty(); }
};

// All j != i with |B[i][j]| <= tol (1-based).
std::vector<int> check_coupling(const CouplingMatrix& B, int i, double tol);

// Exhaustive scan over j, p, q <= N. The defect is symmetric in (j, p), so
// each resonance is reported once with j >= p. A tol of 0 on floating-point
// data is coerced to 1e-9.
std::vector<Resonance> check_nonresonance(const Eigen::VectorXd& lambdas, int i, double tol);

// d lambda_k / d sigma at sigma = 0 for the perturbation V + sigma P:
// the h-weighted quadrature of P e_k^2 (k 1-based).
double eigenvalue_perturbation_derivative(const EigenBasis& basis,
                                          const SampledPotential& P, int k);

struct ScanRow {
    double sigma{0.0};
    ConditionReport report;
    double lambda_1{0.0};
    double min_abs_coupling{0.0};  // min over j != i of |B[i][j]|, j <= N
};

// For each sigma: solve the eigenproblem of V + sigma Q, rebuild the coupling
// matrix of Q in the new basis, and check both conditions for that pair.
// resonance_tol_scale is multiplied by lambda_N of the shifted problem.
std::vector<ScanRow> resonance_breaking_scan(const SampledPotential& V,
                                             const SampledPotential& Q,
                                             const std::vector<double>& sigmas,
                                             int i, int N, double coupling_tol,
                                             double resonance_tol_scale = 1e-6);

struct IndependenceResult {
    double sigma_min{0.0};                  // smallest eigenvalue of the Gram matrix
    Eigen::MatrixXd gram;                   // G[j][k] = <e_j^2, e_k^2>
    std::optional<Eigen::VectorXi> witness; // integer relation with ||sum a_k e_k^2|| <= tol
    double witness_norm{0.0};
};

// Gram-matrix bound on linear (hence rational) independence of the squared
// modes, plus a bounded brute force over integer coefficient vectors with
// entries in [-denom_bound, denom_bound].
IndependenceResult rational_independence_test(const EigenBasis& basis, int N,
                                              int denom_bound,
                                              double witness_tol = 1e-8);

}  // namespace qsteer
