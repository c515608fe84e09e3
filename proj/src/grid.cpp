#include "qsteer/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsteer/csv.hpp"

namespace qsteer {

Eigen::VectorXd Grid1D::points() const {
    Eigen::VectorXd xs(n);
    for (int k = 0; k < n; ++k) xs(k) = x(k);
    return xs;
}

void Grid1D::check() const {
    if (!(a < b)) throw std::invalid_argument("Grid1D: requires a < b");
    if (n < 2) throw std::invalid_argument("Grid1D: requires n >= 2 interior points");
}

void SampledPotential::check() const {
    grid.check();
    if (values.size() != grid.n)
        throw std::invalid_argument("SampledPotential: values length != grid.n");
    if (!values.allFinite())
        throw std::invalid_argument("SampledPotential: non-finite entries");
}

SampledPotential zero_potential(const Grid1D& g) {
    g.check();
    return {g, Eigen::VectorXd::Zero(g.n)};
}

SampledPotential linear_potential(const Grid1D& g, double slope) {
    g.check();
    return {g, slope * g.points()};
}

SampledPotential quadratic_potential(const Grid1D& g, double coeff) {
    g.check();
    return {g, coeff * g.points().array().square().matrix()};
}

SampledPotential well_potential(const Grid1D& g, double depth, double left, double right) {
    g.check();
    if (!(left < right)) throw std::invalid_argument("well_potential: requires left < right");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n);
    for (int k = 0; k < g.n; ++k) {
        const double x = g.x(k);
        if (x >= left && x <= right) v(k) = -depth;
    }
    return {g, v};
}

SampledPotential potential_from_csv(const Grid1D& g, const std::string& path) {
    g.check();
    auto table = read_two_column_csv(path);
    if (table.size() < 2)
        throw std::invalid_argument("potential_from_csv: need at least two rows in " + path);
    std::sort(table.begin(), table.end(),
              [](const auto& u, const auto& v) { return u.first < v.first; });

    Eigen::VectorXd v(g.n);
    std::size_t lo = 0;
    for (int k = 0; k < g.n; ++k) {
        const double x = g.x(k);
        if (x <= table.front().first) {
            v(k) = table.front().second;
            continue;
        }
        if (x >= table.back().first) {
            v(k) = table.back().second;
            continue;
        }
        while (lo + 1 < table.size() && table[lo + 1].first < x) ++lo;
        const auto [x0, y0] = table[lo];
        const auto [x1, y1] = table[lo + 1];
        const double t = (x - x0) / (x1 - x0);
        v(k) = (1.0 - t) * y0 + t * y1;
    }
    SampledPotential p{g, v};
    p.check();
    return p;
}

}  // namespace qsteer
