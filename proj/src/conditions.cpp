#include "qsteer/conditions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qsteer {

std::vector<int> check_coupling(const CouplingMatrix& B, int i, double tol) {
    const int N = static_cast<int>(B.entries.rows());
    if (i < 1 || i > N) throw std::out_of_range("check_coupling: target index");
    std::vector<int> failures;
    for (int j = 1; j <= N; ++j) {
        if (j == i) continue;
        if (std::abs(B.entries(i - 1, j - 1)) <= tol) failures.push_back(j);
    }
    return failures;
}

std::vector<Resonance> check_nonresonance(const Eigen::VectorXd& lambdas, int i, double tol) {
    const int N = static_cast<int>(lambdas.size());
    if (i < 1 || i > N) throw std::out_of_range("check_nonresonance: target index");
    for (int j = 0; j + 1 < N; ++j)
        if (!(lambdas(j) < lambdas(j + 1)))
            throw std::invalid_argument("check_nonresonance: lambdas not ascending");
    // Exact floating-point equality is meaningless; coerce tol up to 1e-9.
    const double eff_tol = std::max(tol, 1e-9);

    // The defect lambda_i - lambda_j - lambda_p + lambda_q is symmetric in
    // (j, p); canonicalize with j >= p so each resonance appears once.
    std::vector<Resonance> found;
    std::set<std::tuple<int, int, int>> seen;
    for (int j = 1; j <= N; ++j) {
        if (j == i) continue;
        for (int p = 1; p <= N; ++p) {
            for (int q = 1; q <= N; ++q) {
                if ((std::min(p, q) == std::min(i, j)) && (std::max(p, q) == std::max(i, j)))
                    continue;  // {i,j} == {p,q}
                const double defect =
                    std::abs(lambdas(i - 1) - lambdas(j - 1) - lambdas(p - 1) + lambdas(q - 1));
                if (defect > eff_tol) continue;
                const int cj = std::max(j, p), cp = std::min(j, p);
                if (seen.insert({cj, cp, q}).second)
                    found.push_back(Resonance{cj, cp, q, defect});
            }
        }
    }
    std::sort(found.begin(), found.end(), [](const Resonance& a, const Resonance& b) {
        return std::tie(a.j, a.p, a.q) < std::tie(b.j, b.p, b.q);
    });
    return found;
}

double eigenvalue_perturbation_derivative(const EigenBasis& basis,
                                          const SampledPotential& P, int k) {
    P.check();
    if (!P.grid.same_as(basis.grid))
        throw std::invalid_argument("eigenvalue_perturbation_derivative: grid mismatch");
    if (k < 1 || k > basis.n_modes)
        throw std::out_of_range("eigenvalue_perturbation_derivative: mode index");
    return basis.grid.h() *
           P.values.dot(basis.modes.col(k - 1).cwiseProduct(basis.modes.col(k - 1)));
}

std::vector<ScanRow> resonance_breaking_scan(const SampledPotential& V,
                                             const SampledPotential& Q,
                                             const std::vector<double>& sigmas,
                                             int i, int N, double coupling_tol,
                                             double resonance_tol_scale) {
    V.check();
    Q.check();
    if (!V.grid.same_as(Q.grid))
        throw std::invalid_argument("resonance_breaking_scan: V and Q grid mismatch");

    std::vector<ScanRow> rows;
    rows.reserve(sigmas.size());
    for (double sigma : sigmas) {
        const SampledPotential shifted = V + sigma * Q;
        const EigenBasis basis = solve_dirichlet_eigs(shifted, N);
        const CouplingMatrix B = coupling_matrix(Q, basis);

        ScanRow row;
        row.sigma = sigma;
        row.lambda_1 = basis.lambdas(0);
        row.report.target = i;
        row.report.coupling_tol = coupling_tol;
        row.report.resonance_tol = resonance_tol_scale * std::abs(basis.lambdas(N - 1));
        row.report.coupling_failures = check_coupling(B, i, coupling_tol);
        row.report.resonances = check_nonresonance(basis.lambdas, i, row.report.resonance_tol);
        double min_abs = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= N; ++j)
            if (j != i) min_abs = std::min(min_abs, std::abs(B.entries(i - 1, j - 1)));
        row.min_abs_coupling = min_abs;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

int vector_gcd(const Eigen::VectorXi& a) {
    int g = 0;
    for (int k = 0; k < a.size(); ++k) g = std::gcd(g, std::abs(a(k)));
    return g;
}

}  // namespace

IndependenceResult rational_independence_test(const EigenBasis& basis, int N,
                                              int denom_bound, double witness_tol) {
    if (N < 1 || N > basis.n_modes)
        throw std::invalid_argument("rational_independence_test: N out of range");
    if (denom_bound < 1)
        throw std::invalid_argument("rational_independence_test: denom_bound >= 1");

    const double h = basis.grid.h();
    Eigen::MatrixXd sq(basis.grid.n, N);
    for (int j = 0; j < N; ++j) sq.col(j) = basis.modes.col(j).cwiseProduct(basis.modes.col(j));

    IndependenceResult res;
    res.gram = h * (sq.transpose() * sq);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.gram);
    res.sigma_min = es.eigenvalues()(0);

    // Bounded brute force over integer coefficient vectors; any rational
    // relation rescales to one of these. Guarded so the search stays at desk
    // scale.
    const double combos = std::pow(2.0 * denom_bound + 1.0, N);
    if (combos <= 2e7) {
        Eigen::VectorXi a = Eigen::VectorXi::Constant(N, -denom_bound);
        Eigen::VectorXd ad(N);
        bool done = false;
        while (!done) {
            bool nonzero = false;
            for (int k = 0; k < N; ++k) nonzero = nonzero || a(k) != 0;
            if (nonzero && vector_gcd(a) == 1) {
                for (int k = 0; k < N; ++k) ad(k) = a(k);
                const double norm_sq = ad.dot(res.gram * ad);
                if (norm_sq <= witness_tol * witness_tol) {
                    Eigen::VectorXi w = a;
                    for (int k = 0; k < N; ++k) {
                        if (w(k) != 0) {
                            if (w(k) < 0) w = -w;
                            break;
                        }
                    }
                    res.witness = w;
                    res.witness_norm = std::sqrt(std::max(norm_sq, 0.0));
                    break;
                }
            }
            int k = 0;
            while (k < N) {
                if (a(k) < denom_bound) {
                    ++a(k);
                    break;
                }
                a(k) = -denom_bound;
                ++k;
            }
            done = (k == N);
        }
    }
    return res;
}

}  // namespace qsteer
