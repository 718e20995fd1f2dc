#include "entimg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entimg/errors.hpp"

namespace entimg {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kNegativeTol = 1e-10;

void require_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) throw ValidationError(what, "source grid does not match kernel input grid");
}

template <typename Values>
void clamp_negatives(Values& v)
{
    const double peak = v.maxCoeff();
    for (Index i = 0; i < v.size(); ++i) {
        double& x = v.data()[i];
        if (!std::isfinite(x)) throw PhysicsError("density has non-finite values");
        if (x < 0.0) {
            if (x < -kNegativeTol * std::max(peak, 0.0)) throw PhysicsError("density has negative values");
            x = 0.0;
        }
    }
}

RMatrix abs2(const CMatrix& m) { return m.cwiseAbs2(); }

// |A|^2 with A = H1 amp H2^T dx1 dx2, all quadrature factors kept.
RMatrix joint_intensity(const BiphotonPure& s, const Kernel& k1, const Kernel& k2)
{
    require_grid(s.grid1(), k1.grid_in(), "k1");
    require_grid(s.grid2(), k2.grid_in(), "k2");
    const CMatrix a = (k1.matrix() * s.amplitude()) * k2.matrix().transpose() * (s.grid1().dx() * s.grid2().dx());
    return abs2(a);
}

RVector singles_intensity(const BiphotonPure& s, const Kernel& k, Arm arm)
{
    const CMatrix& a = s.amplitude();
    if (arm == Arm::One) {
        require_grid(s.grid1(), k.grid_in(), "k");
        return partially_coherent_intensity(a * a.adjoint() * s.grid2().dx(), k);
    }
    require_grid(s.grid2(), k.grid_in(), "k");
    return partially_coherent_intensity(a.transpose() * a.conjugate() * s.grid1().dx(), k);
}

RVector sum_over(const RMatrix& joint, const Grid& summed, Arm keep)
{
    if (keep == Arm::One) return joint.rowwise().sum() * summed.dx();
    return joint.colwise().sum().transpose() * summed.dx();
}

} // namespace

Density::Density(Grid grid, RVector values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) throw ValidationError("density", "size does not match grid");
    if (!values_.allFinite() || values_.minCoeff() < 0.0) throw ValidationError("density", "values must be >= 0");
    if (std::abs(integral() - 1.0) > kNormTol) throw ValidationError("density", "density does not integrate to 1");
}

Density Density::from_unnormalized(Grid grid, RVector raw)
{
    if (raw.size() != grid.size()) throw ValidationError("density", "size does not match grid");
    clamp_negatives(raw);
    const double total = integrate(grid, raw);
    if (!(total > 0.0)) throw PhysicsError("zero detection probability");
    raw /= total;
    return Density(grid, std::move(raw));
}

JointDensity::JointDensity(Grid grid1, Grid grid2, RMatrix values)
    : grid1_(grid1), grid2_(grid2), values_(std::move(values))
{
    if (values_.rows() != grid1_.size() || values_.cols() != grid2_.size())
        throw ValidationError("density", "shape does not match grids");
    if (!values_.allFinite() || values_.minCoeff() < 0.0) throw ValidationError("density", "values must be >= 0");
    if (std::abs(integral() - 1.0) > kNormTol) throw ValidationError("density", "density does not integrate to 1");
}

JointDensity JointDensity::from_unnormalized(Grid grid1, Grid grid2, RMatrix raw)
{
    if (raw.rows() != grid1.size() || raw.cols() != grid2.size())
        throw ValidationError("density", "shape does not match grids");
    clamp_negatives(raw);
    const double total = raw.sum() * grid1.dx() * grid2.dx();
    if (!(total > 0.0)) throw PhysicsError("zero coincidence probability");
    raw /= total;
    return JointDensity(grid1, grid2, std::move(raw));
}

RVector partially_coherent_intensity(const CMatrix& gamma, const Kernel& k)
{
    const CMatrix& h = k.matrix();
    if (gamma.rows() != h.cols() || gamma.cols() != h.cols())
        throw ValidationError("coherence", "shape does not match kernel input");
    const double dx = k.grid_in().dx();
    const CMatrix hg = h * gamma;
    return hg.cwiseProduct(h.conjugate()).rowwise().sum().real() * (dx * dx);
}

Density single_coherent(const SinglePhotonPure& s, const Kernel& k)
{
    require_grid(s.grid(), k.grid_in(), "k");
    return Density::from_unnormalized(k.grid_out(), k.apply(s.amplitude()).cwiseAbs2());
}

Density single_partially_coherent(const SinglePhotonMixed& s, const Kernel& k)
{
    require_grid(s.grid(), k.grid_in(), "k");
    return Density::from_unnormalized(k.grid_out(), partially_coherent_intensity(s.coherence(), k));
}

JointDensity biphoton_joint(const BiphotonPure& s, const Kernel& k1, const Kernel& k2)
{
    return JointDensity::from_unnormalized(k1.grid_out(), k2.grid_out(), joint_intensity(s, k1, k2));
}

Density biphoton_singles(const BiphotonPure& s, const Kernel& k, Arm arm)
{
    return single_partially_coherent(reduced_coherence(s, arm), k);
}

Density marginal_from_joint(const JointDensity& p, Arm arm)
{
    if (arm == Arm::One) return Density::from_unnormalized(p.grid1(), sum_over(p.values(), p.grid2(), Arm::One));
    return Density::from_unnormalized(p.grid2(), sum_over(p.values(), p.grid1(), Arm::Two));
}

Density entangled_marginal_closed(const SinglePhotonPure& phi, const Kernel& k_obs, const Kernel& k_other)
{
    require_grid(phi.grid(), k_obs.grid_in(), "k_obs");
    require_grid(phi.grid(), k_other.grid_in(), "k_other");
    const CVector& a = phi.amplitude();
    const CMatrix effective = (a * a.adjoint()).cwiseProduct(g_kernel(k_other));
    return Density::from_unnormalized(k_obs.grid_out(), partially_coherent_intensity(effective, k_obs));
}

JointDensity correlated_joint(const CorrelatedPairSource& c, const Kernel& k1, const Kernel& k2)
{
    require_grid(c.grid(), k1.grid_in(), "k1");
    require_grid(c.grid(), k2.grid_in(), "k2");
    const RMatrix raw = abs2(k1.matrix()) * (c.gamma() * c.grid().dx()).asDiagonal() * abs2(k2.matrix()).transpose();
    return JointDensity::from_unnormalized(k1.grid_out(), k2.grid_out(), raw);
}

Density correlated_singles(const CorrelatedPairSource& c, const Kernel& k)
{
    require_grid(c.grid(), k.grid_in(), "k");
    return Density::from_unnormalized(k.grid_out(), abs2(k.matrix()) * c.gamma() * c.grid().dx());
}

Density correlated_marginal(const CorrelatedPairSource& c, const Kernel& k_obs, const Kernel& k_other)
{
    require_grid(c.grid(), k_obs.grid_in(), "k_obs");
    require_grid(c.grid(), k_other.grid_in(), "k_other");
    const RVector transmitted = abs2(k_other.matrix()).colwise().sum().transpose() * k_other.grid_out().dx();
    const RVector gamma_bar = c.gamma().cwiseProduct(transmitted);
    if (!(gamma_bar.maxCoeff() > 0.0))
        throw PhysicsError("other arm blocks every emission point: coincidence rate is zero");
    return Density::from_unnormalized(k_obs.grid_out(), abs2(k_obs.matrix()) * gamma_bar * c.grid().dx());
}

JointDensity mixture_joint(const BiphotonMixture& m, const Kernel& k1, const Kernel& k2)
{
    RMatrix total = RMatrix::Zero(k1.grid_out().size(), k2.grid_out().size());
    for (const auto& c : m.components()) total += c.weight * joint_intensity(c.state, k1, k2);
    return JointDensity::from_unnormalized(k1.grid_out(), k2.grid_out(), std::move(total));
}

Density mixture_singles(const BiphotonMixture& m, const Kernel& k, Arm arm)
{
    RVector total = RVector::Zero(k.grid_out().size());
    for (const auto& c : m.components()) total += c.weight * singles_intensity(c.state, k, arm);
    return Density::from_unnormalized(k.grid_out(), std::move(total));
}

Density mixture_marginal(const BiphotonMixture& m, const Kernel& k1, const Kernel& k2, Arm arm)
{
    const Grid& kept = arm == Arm::One ? k1.grid_out() : k2.grid_out();
    const Grid& summed = arm == Arm::One ? k2.grid_out() : k1.grid_out();
    RVector total = RVector::Zero(kept.size());
    for (const auto& c : m.components()) total += c.weight * sum_over(joint_intensity(c.state, k1, k2), summed, arm);
    return Density::from_unnormalized(kept, std::move(total));
}

ImageMetrics image_metrics(const Density& p, IndexRange region)
{
    const RVector& v = p.values();
    if (region.begin < 0 || region.end > v.size() || region.begin >= region.end)
        throw ValidationError("region", "empty or out-of-range index range");

    const auto seg = v.segment(region.begin, region.end - region.begin);
    const double hi = seg.maxCoeff();
    const double lo = seg.minCoeff();
    if (!(hi + lo > 0.0)) throw PhysicsError("density vanishes over the metric region");

    Index peak = region.begin;
    for (Index i = region.begin; i < region.end; ++i) {
        if (v[i] > v[peak]) peak = i;
    }
    const double half = 0.5 * v[peak];
    const Grid& g = p.grid();

    // Walk outward from the peak to the first samples below half maximum and
    // interpolate linearly; the array edge counts as a crossing.
    double left = g.point(0);
    for (Index i = peak; i > 0; --i) {
        if (v[i - 1] < half) {
            const double t = (v[i] - half) / (v[i] - v[i - 1]);
            left = g.point(i) - t * g.dx();
            break;
        }
    }
    double right = g.point(v.size() - 1);
    for (Index i = peak; i + 1 < v.size(); ++i) {
        if (v[i + 1] < half) {
            const double t = (v[i] - half) / (v[i] - v[i + 1]);
            right = g.point(i) + t * g.dx();
            break;
        }
    }
    return {(hi - lo) / (hi + lo), right - left, g.point(peak)};
}

} // namespace entimg
