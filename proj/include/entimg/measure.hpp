#pragma once

#include "entimg/grid.hpp"
#include "entimg/linalg.hpp"
#include "entimg/optics.hpp"
#include "entimg/sources.hpp"

namespace entimg {

/// Normalized 1-D detection density (units 1/length): values >= 0, sum * dx = 1.
class Density {
public:
    /// Validates non-negativity and unit integral (within 1e-10).
    Density(Grid grid, RVector values);

    /// Clamps round-off negatives and rescales to unit integral.
    /// Throws PhysicsError when nothing is detected.
    static Density from_unnormalized(Grid grid, RVector raw);

    const Grid& grid() const noexcept { return grid_; }
    const RVector& values() const noexcept { return values_; }
    double integral() const { return integrate(grid_, values_); }

private:
    Grid grid_;
    RVector values_;
};

/// Normalized 2-D density p(x1, x2) (units 1/length^2); rows on grid1.
class JointDensity {
public:
    JointDensity(Grid grid1, Grid grid2, RMatrix values);

    static JointDensity from_unnormalized(Grid grid1, Grid grid2, RMatrix raw);

    const Grid& grid1() const noexcept { return grid1_; }
    const Grid& grid2() const noexcept { return grid2_; }
    const RMatrix& values() const noexcept { return values_; }
    double integral() const { return values_.sum() * grid1_.dx() * grid2_.dx(); }

private:
    Grid grid1_;
    Grid grid2_;
    RMatrix values_;
};

/// Half-open index range [begin, end).
struct IndexRange {
    Index begin;
    Index end;
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct ImageMetrics {
    double visibility;
    double fwhm;
    double peak_position;
};

// Single photon
Density single_coherent(const SinglePhotonPure& s, const Kernel& k);
Density single_partially_coherent(const SinglePhotonMixed& s, const Kernel& k);

// Pure biphoton
JointDensity biphoton_joint(const BiphotonPure& s, const Kernel& k1, const Kernel& k2);
Density biphoton_singles(const BiphotonPure& s, const Kernel& k, Arm arm);
Density marginal_from_joint(const JointDensity& p, Arm arm);

/// Bucket-gated marginal for phi(x) delta(x - x') without forming the joint:
/// effective coherence (phi phi^dagger) o g_other pushed through k_obs.
Density entangled_marginal_closed(const SinglePhotonPure& phi, const Kernel& k_obs, const Kernel& k_other);

// Classically correlated pairs
JointDensity correlated_joint(const CorrelatedPairSource& c, const Kernel& k1, const Kernel& k2);
Density correlated_singles(const CorrelatedPairSource& c, const Kernel& k);
Density correlated_marginal(const CorrelatedPairSource& c, const Kernel& k_obs, const Kernel& k_other);

// Convex mixtures: unnormalized component densities summed with their weights,
// normalized once at the end.
JointDensity mixture_joint(const BiphotonMixture& m, const Kernel& k1, const Kernel& k2);
Density mixture_singles(const BiphotonMixture& m, const Kernel& k, Arm arm);
Density mixture_marginal(const BiphotonMixture& m, const Kernel& k1, const Kernel& k2, Arm arm);

ImageMetrics image_metrics(const Density& p, IndexRange region);

/// Unnormalized sum_{x,x'} gamma(x,x') H(x1,x) H*(x1,x') dx^2 for any Hermitian gamma.
RVector partially_coherent_intensity(const CMatrix& gamma, const Kernel& k);

} // namespace entimg
