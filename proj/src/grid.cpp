#include "entimg/grid.hpp"

#include <cmath>
#include <string>

#include "entimg/errors.hpp"

namespace entimg {

ValidationError::ValidationError(std::string field, const std::string& message)
    : std::invalid_argument(field.empty() ? message : field + ": " + message), field_(std::move(field)), message_(message)
{
}

Grid::Grid(Index n, double dx, double center) : n_(n), dx_(dx), center_(center)
{
    if (n < 2) throw ValidationError("n", "grid needs at least 2 points, got " + std::to_string(n));
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("dx", "grid spacing must be positive and finite");
    if (!std::isfinite(center)) throw ValidationError("center", "grid center must be finite");
}

RVector Grid::points() const
{
    RVector p(n_);
    for (Index i = 0; i < n_; ++i) p[i] = point(i);
    return p;
}

Grid make_grid(Index n, double dx, double center) { return Grid(n, dx, center); }

Index nearest_index(const Grid& g, double x)
{
    const double lo = g.first() - 0.5 * g.dx();
    const double hi = g.last() + 0.5 * g.dx();
    if (!(x >= lo && x <= hi)) {
        throw ValidationError("x", "position " + std::to_string(x) + " outside grid range [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]");
    }
    const double t = (x - g.first()) / g.dx();
    auto i = static_cast<Index>(std::ceil(t - 0.5));
    if (i < 0) i = 0;
    if (i > g.size() - 1) i = g.size() - 1;
    return i;
}

double integrate(const Grid& g, const RVector& f) { return f.sum() * g.dx(); }

} // namespace entimg
