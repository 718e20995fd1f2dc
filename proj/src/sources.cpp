#include "entimg/sources.hpp"

#include <cmath>
#include <string>

#include "entimg/errors.hpp"

namespace entimg {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kPsdTol = 1e-9;

double scale_to_unit(double norm_sq, const char* what)
{
    if (!(norm_sq > 0.0) || !std::isfinite(norm_sq)) throw ValidationError(what, "state has zero or non-finite norm");
    return norm_sq;
}

} // namespace

SinglePhotonPure::SinglePhotonPure(Grid grid, CVector amplitude) : grid_(grid), amp_(std::move(amplitude))
{
    if (amp_.size() != grid_.size()) throw ValidationError("amplitude", "size does not match grid");
    const double norm = scale_to_unit(amp_.squaredNorm() * grid_.dx(), "amplitude");
    amp_ /= std::sqrt(norm);
}

SinglePhotonMixed::SinglePhotonMixed(Grid grid, CMatrix coherence) : grid_(grid), gamma_(std::move(coherence))
{
    const Index n = grid_.size();
    if (gamma_.rows() != n || gamma_.cols() != n) throw ValidationError("coherence", "shape does not match grid");
    if (!gamma_.allFinite()) throw ValidationError("coherence", "entries must be finite");
    const double scale = gamma_.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw ValidationError("coherence", "all-zero coherence");
    if ((gamma_ - gamma_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale)
        throw ValidationError("coherence", "coherence matrix is not Hermitian");
    gamma_ = 0.5 * (gamma_ + gamma_.adjoint()).eval();
    const double trace = scale_to_unit(gamma_.diagonal().real().sum() * grid_.dx(), "coherence");
    gamma_ /= trace;
    const RVector ev = coherence_spectrum(*this);
    if (ev.minCoeff() < -kPsdTol) throw ValidationError("coherence", "coherence matrix is not positive semidefinite");
}

BiphotonPure::BiphotonPure(Grid grid1, Grid grid2, CMatrix amplitude)
    : grid1_(grid1), grid2_(grid2), amp_(std::move(amplitude))
{
    if (amp_.rows() != grid1_.size() || amp_.cols() != grid2_.size())
        throw ValidationError("amplitude", "shape does not match grids");
    const double norm = scale_to_unit(amp_.squaredNorm() * grid1_.dx() * grid2_.dx(), "amplitude");
    amp_ /= std::sqrt(norm);
}

BiphotonMixture::BiphotonMixture(std::vector<MixtureComponent> components) : components_(std::move(components))
{
    if (components_.empty()) throw ValidationError("mixture", "mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw ValidationError("mixture.weight", "weights must be >= 0");
        total += c.weight;
    }
    if (!(total > 0.0)) throw ValidationError("mixture.weight", "weights sum to zero");
    for (auto& c : components_) c.weight /= total;
}

CorrelatedPairSource::CorrelatedPairSource(Grid grid, RVector gamma) : grid_(grid), gamma_(std::move(gamma))
{
    if (gamma_.size() != grid_.size()) throw ValidationError("gamma", "size does not match grid");
    for (Index i = 0; i < gamma_.size(); ++i) {
        if (!(gamma_[i] >= 0.0) || !std::isfinite(gamma_[i]))
            throw ValidationError("gamma", "entries must be finite and non-negative");
    }
    const double total = scale_to_unit(integrate(grid_, gamma_), "gamma");
    gamma_ /= total;
}

BiphotonPure factorizable(const SinglePhotonPure& phi1, const SinglePhotonPure& phi2)
{
    return BiphotonPure(phi1.grid(), phi2.grid(), phi1.amplitude() * phi2.amplitude().transpose());
}

BiphotonPure entangled_delta(const SinglePhotonPure& phi)
{
    const Grid& g = phi.grid();
    CMatrix amp = (phi.amplitude() / std::sqrt(g.dx())).asDiagonal();
    return BiphotonPure(g, g, std::move(amp));
}

BiphotonPure spdc_amplitude(const SpdcParams& p, const Grid& grid)
{
    if (p.pump.size() != grid.size()) throw ValidationError("pump", "size does not match grid");
    if (!(p.pm_width > 0.0) || !std::isfinite(p.pm_width))
        throw ValidationError("pm_width", "phase-matching width must be positive");
    if (p.pump.cwiseAbs().maxCoeff() == 0.0) throw ValidationError("pump", "pump field is identically zero");

    // zeta separates: exp(-(u^2 + v^2) / 2b^2) = G(x, x_k) G(x', x_k)
    const Index n = grid.size();
    const double inv = 1.0 / (2.0 * p.pm_width * p.pm_width);
    RMatrix g(n, n);
    for (Index k = 0; k < n; ++k) {
        for (Index i = 0; i < n; ++i) {
            const double u = grid.point(i) - grid.point(k);
            g(i, k) = std::exp(-u * u * inv);
        }
    }
    const CMatrix gc = g.cast<Complex>();
    CMatrix amp = gc * (p.pump * grid.dx()).asDiagonal() * gc.transpose();
    if (amp.cwiseAbs().maxCoeff() == 0.0)
        throw PhysicsError("SPDC amplitude underflows on this grid; increase pm_width");
    return BiphotonPure(grid, grid, std::move(amp));
}

SinglePhotonMixed reduced_coherence(const BiphotonPure& s, Arm arm)
{
    const CMatrix& a = s.amplitude();
    if (arm == Arm::One) return SinglePhotonMixed(s.grid1(), a * a.adjoint() * s.grid2().dx());
    return SinglePhotonMixed(s.grid2(), a.transpose() * a.conjugate() * s.grid1().dx());
}

SchmidtSpectrum schmidt_spectrum(const BiphotonPure& s)
{
    const CMatrix scaled = s.amplitude() * std::sqrt(s.grid1().dx() * s.grid2().dx());
    Eigen::BDCSVD<CMatrix> svd(scaled);
    SchmidtSpectrum out;
    out.singular_values = svd.singularValues();
    double entropy = 0.0;
    double sum4 = 0.0;
    for (Index i = 0; i < out.singular_values.size(); ++i) {
        const double p = out.singular_values[i] * out.singular_values[i];
        if (p > 0.0) entropy -= p * std::log(p);
        sum4 += p * p;
    }
    out.entropy = std::max(0.0, entropy);
    out.participation = 1.0 / sum4;
    return out;
}

CorrelatedPairSource correlated_from_intensity(const RVector& gamma, const Grid& grid)
{
    return CorrelatedPairSource(grid, gamma);
}

BiphotonMixture localized_pair_mixture(const CorrelatedPairSource& c)
{
    const Grid& g = c.grid();
    std::vector<MixtureComponent> parts;
    for (Index i = 0; i < g.size(); ++i) {
        if (c.gamma()[i] <= 0.0) continue;
        CMatrix amp = CMatrix::Zero(g.size(), g.size());
        amp(i, i) = 1.0 / g.dx();
        parts.push_back({c.gamma()[i] * g.dx(), BiphotonPure(g, g, std::move(amp))});
    }
    return BiphotonMixture(std::move(parts));
}

RVector coherence_spectrum(const SinglePhotonMixed& s)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.coherence() * s.grid().dx(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

} // namespace entimg
