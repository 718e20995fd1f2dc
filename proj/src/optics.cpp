#include "entimg/optics.hpp"

#include <cmath>
#include <string>

#include "entimg/errors.hpp"

namespace entimg {

namespace {

const Complex kI{0.0, 1.0};

void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) throw ValidationError(what, "grids do not match");
}

// exp(i 2 pi d / lambda) with the integer number of waves removed first.
Complex carrier_phase(double distance, double wavelength)
{
    const double waves = std::fmod(distance / wavelength, 1.0);
    return std::polar(1.0, 2.0 * kPi * waves);
}

CMatrix diagonal_kernel(const CVector& diag, double dx) { return (diag / dx).asDiagonal(); }

struct KernelBuilder {
    const Grid& in;
    const Grid& out;

    void need_square(const char* name) const
    {
        if (!(in == out)) throw ValidationError(name, "thin element requires grid_in == grid_out");
    }

    CMatrix operator()(const element::Identity&) const
    {
        need_square("identity");
        return diagonal_kernel(CVector::Ones(in.size()), in.dx());
    }

    CMatrix operator()(const element::Mask& m) const
    {
        need_square("mask");
        if (m.transmittance.size() != in.size()) {
            throw ValidationError("mask", "transmittance has " + std::to_string(m.transmittance.size()) +
                                              " samples, grid has " + std::to_string(in.size()));
        }
        for (Index i = 0; i < m.transmittance.size(); ++i) {
            const double mag = std::abs(m.transmittance[i]);
            if (!std::isfinite(mag) || mag > 1.0 + 1e-12) throw ValidationError("mask", "|t| must not exceed 1");
        }
        return diagonal_kernel(m.transmittance, in.dx());
    }

    CMatrix operator()(const element::ThinLens& lens) const
    {
        need_square("thin_lens");
        if (lens.focal_length == 0.0 || !std::isfinite(lens.focal_length))
            throw ValidationError("focal_length", "must be nonzero and finite");
        if (!(lens.wavelength > 0.0)) throw ValidationError("wavelength", "must be positive");
        CVector phase(in.size());
        for (Index i = 0; i < in.size(); ++i) {
            const double x = in.point(i);
            phase[i] = std::polar(1.0, -kPi * x * x / (lens.wavelength * lens.focal_length));
        }
        return diagonal_kernel(phase, in.dx());
    }

    CMatrix operator()(const element::FreeSpace& fs) const
    {
        if (!(fs.distance > 0.0) || !std::isfinite(fs.distance))
            throw ValidationError("distance", "free-space distance must be positive");
        if (!(fs.wavelength > 0.0)) throw ValidationError("wavelength", "must be positive");
        const double ld = fs.wavelength * fs.distance;
        const Complex pre = carrier_phase(fs.distance, fs.wavelength) / std::sqrt(kI * ld);
        CMatrix h(out.size(), in.size());
        for (Index j = 0; j < in.size(); ++j) {
            const double x = in.point(j);
            for (Index i = 0; i < out.size(); ++i) {
                const double u = out.point(i) - x;
                h(i, j) = pre * std::polar(1.0, kPi * u * u / ld);
            }
        }
        return h;
    }

    CMatrix operator()(const element::FourierSystem& fs) const
    {
        if (fs.focal_length == 0.0 || !std::isfinite(fs.focal_length))
            throw ValidationError("focal_length", "must be nonzero and finite");
        if (!(fs.wavelength > 0.0)) throw ValidationError("wavelength", "must be positive");
        const double lf = fs.wavelength * fs.focal_length;
        const Complex pre = 1.0 / std::sqrt(kI * lf);
        CMatrix h(out.size(), in.size());
        for (Index j = 0; j < in.size(); ++j) {
            const double x = in.point(j);
            for (Index i = 0; i < out.size(); ++i) h(i, j) = pre * std::polar(1.0, -2.0 * kPi * out.point(i) * x / lf);
        }
        return h;
    }

    CMatrix operator()(const element::Custom& c) const
    {
        if (c.matrix.rows() != out.size() || c.matrix.cols() != in.size())
            throw ValidationError("custom", "matrix shape does not match grids");
        return c.matrix;
    }
};

} // namespace

Kernel::Kernel(Grid in, Grid out, CMatrix h) : in_(in), out_(out), h_(std::move(h))
{
    if (h_.rows() != out_.size() || h_.cols() != in_.size())
        throw ValidationError("kernel", "matrix shape " + std::to_string(h_.rows()) + "x" + std::to_string(h_.cols()) +
                                            " does not match grids");
    if (!h_.allFinite()) throw ValidationError("kernel", "entries must be finite");
}

CVector Kernel::apply(const CVector& f) const
{
    if (f.size() != in_.size()) throw ValidationError("field", "size does not match grid_in");
    return h_ * f * in_.dx();
}

Kernel kernel_of(const ElementSpec& e, const Grid& grid_in, const Grid& grid_out)
{
    return Kernel(grid_in, grid_out, std::visit(KernelBuilder{grid_in, grid_out}, e));
}

Kernel compose(const Kernel& second, const Kernel& first)
{
    require_same_grid(first.grid_out(), second.grid_in(), "compose");
    return Kernel(first.grid_in(), second.grid_out(), second.matrix() * first.matrix() * first.grid_out().dx());
}

Kernel cascade(std::span<const ElementSpec> elements, const Grid& grid)
{
    Kernel k = kernel_of(element::Identity{}, grid);
    bool first = true;
    for (const auto& e : elements) {
        Kernel next = kernel_of(e, grid);
        k = first ? std::move(next) : compose(next, k);
        first = false;
    }
    return k;
}

CMatrix g_kernel(const Kernel& k)
{
    const CMatrix& h = k.matrix();
    CMatrix g = h.transpose() * h.conjugate() * k.grid_out().dx();
    // exact Hermitian symmetry; the product is Hermitian up to round-off
    return 0.5 * (g + g.adjoint());
}

Kernel with_scatterers(const Kernel& before, const Kernel& after, std::span<const Scatterer> scatterers,
                       const Kernel& background)
{
    require_same_grid(before.grid_out(), after.grid_in(), "with_scatterers.intermediate");
    require_same_grid(background.grid_in(), before.grid_in(), "with_scatterers.input");
    require_same_grid(background.grid_out(), after.grid_out(), "with_scatterers.output");

    const Grid& mid = before.grid_out();
    CMatrix h = background.matrix();
    for (const auto& s : scatterers) {
        Index m;
        try {
            m = nearest_index(mid, s.position);
        } catch (const ValidationError& e) {
            throw ValidationError("scatterer.position", e.what());
        }
        h.noalias() += (s.strength * mid.dx()) * after.matrix().col(m) * before.matrix().row(m);
    }
    return Kernel(background.grid_in(), background.grid_out(), std::move(h));
}

double unitarity_defect(const Kernel& k)
{
    const CMatrix& h = k.matrix();
    if (h.rows() != h.cols()) throw ValidationError("kernel", "unitarity_defect needs a square kernel");
    CMatrix d = h.adjoint() * h * (k.grid_out().dx() * k.grid_in().dx());
    d -= CMatrix::Identity(h.cols(), h.cols());
    return d.cwiseAbs().maxCoeff();
}

} // namespace entimg
