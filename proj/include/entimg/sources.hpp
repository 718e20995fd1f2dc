#pragma once

#include <vector>

#include "entimg/grid.hpp"
#include "entimg/linalg.hpp"

namespace entimg {

enum class Arm { One = 1, Two = 2 };

/// Pure single-photon state phi(x), units 1/sqrt(length).
/// Construction normalizes so that sum |phi|^2 dx = 1.
class SinglePhotonPure {
public:
    SinglePhotonPure(Grid grid, CVector amplitude);

    const Grid& grid() const noexcept { return grid_; }
    const CVector& amplitude() const noexcept { return amp_; }

private:
    Grid grid_;
    CVector amp_;
};

/// Mixed single-photon state with coherence gamma(x, x'), units 1/length.
/// Must be Hermitian and positive semidefinite; the trace is normalized to one.
class SinglePhotonMixed {
public:
    SinglePhotonMixed(Grid grid, CMatrix coherence);

    const Grid& grid() const noexcept { return grid_; }
    const CMatrix& coherence() const noexcept { return gamma_; }

private:
    Grid grid_;
    CMatrix gamma_;
};

/// Pure two-photon amplitude phi(x, x'), rows on grid1, columns on grid2.
/// Normalized so that sum |phi|^2 dx1 dx2 = 1.
class BiphotonPure {
public:
    BiphotonPure(Grid grid1, Grid grid2, CMatrix amplitude);

    const Grid& grid1() const noexcept { return grid1_; }
    const Grid& grid2() const noexcept { return grid2_; }
    const CMatrix& amplitude() const noexcept { return amp_; }

private:
    Grid grid1_;
    Grid grid2_;
    CMatrix amp_;
};

struct MixtureComponent {
    double weight;
    BiphotonPure state;
};

/// Finite convex mixture of pure biphotons. Weights are rescaled to sum to one.
class BiphotonMixture {
public:
    explicit BiphotonMixture(std::vector<MixtureComponent> components);

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }

private:
    std::vector<MixtureComponent> components_;
};

/// Co-located pair emission with probability density gamma(x) >= 0,
/// sum gamma dx = 1.
class CorrelatedPairSource {
public:
    CorrelatedPairSource(Grid grid, RVector gamma);

    const Grid& grid() const noexcept { return grid_; }
    const RVector& gamma() const noexcept { return gamma_; }

private:
    Grid grid_;
    RVector gamma_;
};

/// Pump field and Gaussian phase-matching width for the SPDC amplitude.
struct SpdcParams {
    CVector pump;
    double pm_width;
};

struct SchmidtSpectrum {
    RVector singular_values; // descending, sum of squares = 1
    double entropy;          // -sum s^2 ln s^2
    double participation;    // 1 / sum s^4
};

BiphotonPure factorizable(const SinglePhotonPure& phi1, const SinglePhotonPure& phi2);

/// phi(x) delta(x - x') on the lattice: diag(phi) / sqrt(dx).
BiphotonPure entangled_delta(const SinglePhotonPure& phi);

/// sum_k E_p(x_k) zeta(x - x_k, x' - x_k) dx with an isotropic Gaussian zeta of width b,
/// renormalized.
BiphotonPure spdc_amplitude(const SpdcParams& p, const Grid& grid);

SinglePhotonMixed reduced_coherence(const BiphotonPure& s, Arm arm);

SchmidtSpectrum schmidt_spectrum(const BiphotonPure& s);

CorrelatedPairSource correlated_from_intensity(const RVector& gamma, const Grid& grid);

/// One pure component e_i e_i^T / dx per lattice point with gamma_i > 0, weight gamma_i dx.
BiphotonMixture localized_pair_mixture(const CorrelatedPairSource& c);

/// Eigenvalues of gamma * dx (the density operator spectrum), ascending.
RVector coherence_spectrum(const SinglePhotonMixed& s);

} // namespace entimg
