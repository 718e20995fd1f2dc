#pragma once

#include "entimg/linalg.hpp"

namespace entimg {

/// Uniform 1-D transverse lattice. Point i sits at
/// center + (i - (n-1)/2) * dx; integrals are Riemann sums with weight dx.
class Grid {
public:
    Grid(Index n, double dx, double center = 0.0);

    Index size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double center() const noexcept { return center_; }

    double point(Index i) const noexcept
    {
        return center_ + (static_cast<double>(i) - 0.5 * static_cast<double>(n_ - 1)) * dx_;
    }
    double first() const noexcept { return point(0); }
    double last() const noexcept { return point(n_ - 1); }
    RVector points() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Index n_;
    double dx_;
    double center_;
};

Grid make_grid(Index n, double dx, double center = 0.0);

/// Lattice point nearest to x, ties toward the lower index. x must lie in
/// [first - dx/2, last + dx/2].
Index nearest_index(const Grid& g, double x);

/// Sum of f(x_i) * dx.
double integrate(const Grid& g, const RVector& f);

} // namespace entimg
