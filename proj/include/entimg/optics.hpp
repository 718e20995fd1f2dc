#pragma once

#include <span>
#include <variant>

#include "entimg/grid.hpp"
#include "entimg/linalg.hpp"

namespace entimg {

/// Discrete impulse response h(x_out, x_in). Entries carry units of
/// 1/length so that out = H * f * dx_in keeps the units of f.
class Kernel {
public:
    Kernel(Grid in, Grid out, CMatrix h);

    const Grid& grid_in() const noexcept { return in_; }
    const Grid& grid_out() const noexcept { return out_; }
    const CMatrix& matrix() const noexcept { return h_; }

    /// Field at the output plane for input field f on grid_in.
    CVector apply(const CVector& f) const;

private:
    Grid in_;
    Grid out_;
    CMatrix h_;
};

namespace element {

struct Identity {
    friend bool operator==(const Identity&, const Identity&) = default;
};

/// 1-D Fresnel propagation over `distance`.
struct FreeSpace {
    double distance;
    double wavelength;
    friend bool operator==(const FreeSpace&, const FreeSpace&) = default;
};

struct ThinLens {
    double focal_length;
    double wavelength;
    friend bool operator==(const ThinLens&, const ThinLens&) = default;
};

/// Pointwise transmittance t(x), |t| <= 1.
struct Mask {
    CVector transmittance;
    friend bool operator==(const Mask& a, const Mask& b) { return a.transmittance == b.transmittance; }
};

/// Front focal plane to back focal plane of a lens (optical Fourier transform).
struct FourierSystem {
    double focal_length;
    double wavelength;
    friend bool operator==(const FourierSystem&, const FourierSystem&) = default;
};

struct Custom {
    CMatrix matrix;
    friend bool operator==(const Custom& a, const Custom& b) { return a.matrix == b.matrix; }
};

} // namespace element

using ElementSpec = std::variant<element::Identity, element::FreeSpace, element::ThinLens, element::Mask,
                                 element::FourierSystem, element::Custom>;

/// Weak point scatterer: lattice position and complex (dimensionless) strength.
struct Scatterer {
    double position;
    Complex strength;
    friend bool operator==(const Scatterer&, const Scatterer&) = default;
};

Kernel kernel_of(const ElementSpec& e, const Grid& grid_in, const Grid& grid_out);
inline Kernel kernel_of(const ElementSpec& e, const Grid& grid) { return kernel_of(e, grid, grid); }

/// `second` after `first`: H = H2 * H1 * dx_mid.
Kernel compose(const Kernel& second, const Kernel& first);

/// Cascade of elements on one grid, applied in list order. Empty list gives Identity.
Kernel cascade(std::span<const ElementSpec> elements, const Grid& grid);

/// g(x, x') = sum_x'' h(x'', x) h*(x'', x') dx'' = (H^T conj(H)) dx_out.
/// Hermitian positive semidefinite, with the discrete delta I/dx_in for a lossless kernel.
CMatrix g_kernel(const Kernel& k);

/// Background system plus first-order scattering:
/// H = H_o + sum_j eps_j h_after(:, x_j) h_before(x_j, :) dx_mid,
/// with x_j snapped to the nearest point of the intermediate grid.
Kernel with_scatterers(const Kernel& before, const Kernel& after, std::span<const Scatterer> scatterers,
                       const Kernel& background);

/// max |H^dagger H dx_out dx_in - I| over all entries. Requires a square kernel.
double unitarity_defect(const Kernel& k);

} // namespace entimg
