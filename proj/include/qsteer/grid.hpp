// grid.hpp — uniform interior grid on an interval and potentials sampled on it.

#pragma once

#include <Eigen/Core>

#include <string>

namespace qsteer {

// Uniform grid of n interior points on (a,b); boundary values are implicit
// zeros (Dirichlet). Spacing h = (b-a)/(n+1).
struct Grid1D {
    double a{0.0};
    double b{1.0};
    int n{0};

    double h() const { return (b - a) / (n + 1); }
    double x(int k) const { return a + (k + 1) * h(); }  // k in [0, n)
    Eigen::VectorXd points() const;

    bool same_as(const Grid1D& o) const {
        return a == o.a && b == o.b && n == o.n;
    }
    void check() const;  // throws std::invalid_argument on a >= b or n < 2
};

// Real potential sampled at the interior points of a grid.
struct SampledPotential {
    Grid1D grid;
    Eigen::VectorXd values;

    void check() const;  // length mismatch or non-finite entries
};

SampledPotential zero_potential(const Grid1D& g);
SampledPotential linear_potential(const Grid1D& g, double slope);
SampledPotential quadratic_potential(const Grid1D& g, double coeff);
// Square well of given depth (positive depth = attractive, value -depth)
// on [left, right] intersected with the grid interval.
SampledPotential well_potential(const Grid1D& g, double depth, double left, double right);

// Load a two-column CSV (x, value) and resample onto the grid by linear
// interpolation; x outside the tabulated range clamps to the end values.
SampledPotential potential_from_csv(const Grid1D& g, const std::string& path);

inline SampledPotential operator+(const SampledPotential& u, const SampledPotential& v) {
    return SampledPotential{u.grid, u.values + v.values};
}
inline SampledPotential operator*(double s, const SampledPotential& v) {
    return SampledPotential{v.grid, s * v.values};
}

}  // namespace qsteer
