#include <doctest.h>

#include "entimg/errors.hpp"
#include "entimg/measure.hpp"
#include "oracles.hpp"

using namespace entimg;

namespace {

constexpr std::uint64_t kSeed = 0x5eed'0001;

Kernel random_kernel(oracle::Random& rng, const Grid& in, const Grid& out)
{
    return Kernel(in, out, rng.matrix(out.size(), in.size()));
}

CVector gaussian(const Grid& g, double waist, double center = 0.0)
{
    CVector v(g.size());
    for (Index i = 0; i < g.size(); ++i) v(i) = std::exp(-std::pow((g.point(i) - center) / waist, 2));
    return v;
}

CVector two_slits(const Grid& g, double width, double separation)
{
    CVector v = CVector::Zero(g.size());
    for (Index i = 0; i < g.size(); ++i) {
        const double x = g.point(i);
        if (std::abs(std::abs(x) - 0.5 * separation) < 0.5 * width) v(i) = 1.0;
    }
    return v;
}

Density from(const Grid& g, const RVector& v) { return Density::from_unnormalized(g, v); }

double rel(const RVector& a, const RVector& b) { return oracle::rel_linf(a, b); }

} // namespace

TEST_CASE("single photon, coherent")
{
    oracle::Random rng(kSeed);
    const Grid g = make_grid(32, 0.5);
    const SinglePhotonPure phi(g, rng.vector(32));

    const Density p = single_coherent(phi, kernel_of(element::Identity{}, g));
    CHECK(rel(p.values(), phi.amplitude().cwiseAbs2()) < 1e-13);

    CVector t = rng.vector(32);
    t /= t.cwiseAbs().maxCoeff();
    const std::vector<ElementSpec> mask_then_id{element::Mask{t}, element::Identity{}};
    const Density masked = single_coherent(phi, cascade(mask_then_id, g));
    const RVector expected = oracle::normalized(t.cwiseProduct(phi.amplitude()).cwiseAbs2(), g.dx());
    CHECK(rel(masked.values(), expected) < 1e-13);

    const Grid out = make_grid(20, 0.8, 1.0);
    const Kernel k = random_kernel(rng, g, out);
    CHECK(rel(single_coherent(phi, k).values(), oracle::single(phi.amplitude(), k.matrix(), g.dx(), out.dx())) < 1e-12);
    CHECK(single_coherent(phi, k).integral() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(single_coherent(phi, kernel_of(element::Identity{}, make_grid(32, 0.25))), ValidationError);
}

TEST_CASE("two slits in the far field give unit fringe visibility")
{
    // lambda f = 7 s dx^2 puts the fringe zeros at half-integer sample offsets
    const Grid g = make_grid(64, 1.0);
    const double s = 16.0;
    const double lambda = 0.5;
    const Kernel k = kernel_of(element::FourierSystem{7.0 * s / lambda, lambda}, g);
    const Density p = single_coherent(SinglePhotonPure(g, two_slits(g, 4.0, s)), k);
    const ImageMetrics m = image_metrics(p, {22, 42});
    CHECK(m.visibility > 1.0 - 1e-12);
    CHECK(std::abs(m.peak_position) == 0.5);
}

TEST_CASE("single photon, partially coherent")
{
    oracle::Random rng(kSeed + 1);
    const Grid g = make_grid(24, 0.5), out = make_grid(30, 0.4);
    const Kernel k = random_kernel(rng, g, out);

    const SinglePhotonPure phi(g, rng.vector(24));
    const SinglePhotonMixed coherent(g, phi.amplitude() * phi.amplitude().adjoint());
    CHECK(rel(single_partially_coherent(coherent, k).values(), single_coherent(phi, k).values()) < 1e-12);

    const RVector w = rng.positive(24);
    const SinglePhotonMixed incoherent(g, CMatrix(w.cast<Complex>().asDiagonal()));
    RVector expected = RVector::Zero(30);
    for (Index a = 0; a < 30; ++a)
        for (Index x = 0; x < 24; ++x) expected(a) += w(x) * std::norm(k.matrix()(a, x)) * g.dx();
    CHECK(rel(single_partially_coherent(incoherent, k).values(), oracle::normalized(expected, out.dx())) < 1e-12);

    const SinglePhotonMixed flat(g, CMatrix::Identity(24, 24) / (24 * g.dx()));
    const Density uniform = single_partially_coherent(flat, kernel_of(element::Identity{}, g));
    CHECK((uniform.values().array() - 1.0 / (24 * g.dx())).abs().maxCoeff() < 1e-13);

    const CMatrix m = rng.matrix(24, 24);
    const SinglePhotonMixed general(g, m * m.adjoint());
    CHECK(rel(single_partially_coherent(general, k).values(),
              oracle::partially_coherent(general.coherence(), k.matrix(), g.dx(), out.dx())) < 1e-12);
}

TEST_CASE("biphoton joint")
{
    const Grid g = make_grid(2, 1.0);
    const Kernel id = kernel_of(element::Identity{}, g);
    const BiphotonPure corner(g, g, (CMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
    CHECK(biphoton_joint(corner, id, id).values() == (RMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());

    const double r = 1.0 / std::sqrt(2.0);
    const BiphotonPure ent = entangled_delta(SinglePhotonPure(g, CVector::Constant(2, r)));
    const Kernel swap(g, g, (CMatrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished());
    const RMatrix p = biphoton_joint(ent, swap, id).values();
    CHECK(p(0, 1) == doctest::Approx(0.5));
    CHECK(p(1, 0) == doctest::Approx(0.5));
    CHECK(p(0, 0) == 0.0);
    CHECK(p(1, 1) == 0.0);

    oracle::Random rng(kSeed + 2);
    const Grid src1 = make_grid(12, 0.5), src2 = make_grid(14, 0.3), o1 = make_grid(10, 1.0), o2 = make_grid(11, 0.2);
    for (int trial = 0; trial < 5; ++trial) {
        const BiphotonPure s(src1, src2, rng.matrix(12, 14));
        const Kernel k1 = random_kernel(rng, src1, o1), k2 = random_kernel(rng, src2, o2);
        // both source grids must share dx for the loop oracle's single quadrature weight
        const JointDensity j = biphoton_joint(s, k1, k2);
        CHECK(j.integral() == doctest::Approx(1.0).epsilon(1e-12));
        RMatrix raw(10, 11);
        for (Index a = 0; a < 10; ++a)
            for (Index b = 0; b < 11; ++b) {
                Complex acc = 0.0;
                for (Index x = 0; x < 12; ++x)
                    for (Index y = 0; y < 14; ++y)
                        acc += k1.matrix()(a, x) * k2.matrix()(b, y) * s.amplitude()(x, y) * src1.dx() * src2.dx();
                raw(a, b) = std::norm(acc);
            }
        CHECK(oracle::rel_linf(j.values(), oracle::normalized(raw, o1.dx(), o2.dx())) < 1e-12);
    }
}

TEST_CASE("factorizable sources: joint factorizes and marginals equal singles")
{
    oracle::Random rng(kSeed + 3);
    const Grid g = make_grid(24, 0.5), o1 = make_grid(20, 0.7), o2 = make_grid(28, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
        const SinglePhotonPure a(g, rng.vector(24)), b(g, rng.vector(24));
        const BiphotonPure s = factorizable(a, b);
        const Kernel k1 = random_kernel(rng, g, o1), k2 = random_kernel(rng, g, o2);
        const RMatrix joint = biphoton_joint(s, k1, k2).values();
        const RVector p1 = single_coherent(a, k1).values();
        const RVector p2 = single_coherent(b, k2).values();
        CHECK(oracle::rel_linf(joint, RMatrix(p1 * p2.transpose())) < 1e-12);
        CHECK(rel(biphoton_singles(s, k1, Arm::One).values(), p1) < 1e-12);
        CHECK(rel(biphoton_singles(s, k2, Arm::Two).values(), p2) < 1e-12);
        CHECK(rel(marginal_from_joint(biphoton_joint(s, k1, k2), Arm::One).values(), p1) <= 1e-10);
        CHECK(rel(marginal_from_joint(biphoton_joint(s, k1, k2), Arm::Two).values(), p2) <= 1e-10);
    }
}

TEST_CASE("marginal from joint")
{
    const Grid g = make_grid(2, 1.0);
    const JointDensity corner(g, g, (RMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
    CHECK(marginal_from_joint(corner, Arm::One).values() == Eigen::Vector2d(1.0, 0.0));
    CHECK(marginal_from_joint(corner, Arm::Two).values() == Eigen::Vector2d(1.0, 0.0));

    const Grid h = make_grid(8, 0.5), k = make_grid(5, 2.0);
    const JointDensity flat(h, k, RMatrix::Constant(8, 5, 1.0 / (8 * 0.5 * 5 * 2.0)));
    CHECK((marginal_from_joint(flat, Arm::One).values().array() - 0.25).abs().maxCoeff() < 1e-15);
    CHECK((marginal_from_joint(flat, Arm::Two).values().array() - 0.1).abs().maxCoeff() < 1e-15);
}

TEST_CASE("entangled singles have the incoherent-system form")
{
    oracle::Random rng(kSeed + 4);
    const Grid g = make_grid(20, 0.5), out = make_grid(25, 0.3);
    const SinglePhotonPure phi(g, rng.vector(20));
    const BiphotonPure s = entangled_delta(phi);
    const Kernel k = random_kernel(rng, g, out);
    RVector expected = RVector::Zero(25);
    for (Index a = 0; a < 25; ++a)
        for (Index x = 0; x < 20; ++x) expected(a) += std::norm(phi.amplitude()(x)) * std::norm(k.matrix()(a, x));
    for (Arm arm : {Arm::One, Arm::Two})
        CHECK(rel(biphoton_singles(s, k, arm).values(), oracle::normalized(expected, out.dx())) < 1e-12);
    CHECK(rel(biphoton_singles(s, kernel_of(element::Identity{}, g), Arm::One).values(), phi.amplitude().cwiseAbs2()) <
          1e-13);
}

TEST_CASE("entangled marginal closed form")
{
    oracle::Random rng(kSeed + 5);

    SUBCASE("brute force over the full joint")
    {
        const Grid g = make_grid(16, 0.5), o1 = make_grid(12, 0.6), o2 = make_grid(14, 0.4);
        for (int trial = 0; trial < 10; ++trial) {
            const SinglePhotonPure phi(g, rng.vector(16));
            const Kernel k1 = random_kernel(rng, g, o1), k2 = random_kernel(rng, g, o2);
            const RMatrix joint =
                oracle::joint(entangled_delta(phi).amplitude(), k1.matrix(), k2.matrix(), g.dx(), o1.dx(), o2.dx());
            CHECK(rel(entangled_marginal_closed(phi, k2, k1).values(), oracle::marginal(joint, 2, o1.dx(), o2.dx())) <=
                  1e-9);
            CHECK(rel(entangled_marginal_closed(phi, k1, k2).values(), oracle::marginal(joint, 1, o1.dx(), o2.dx())) <=
                  1e-9);
        }
    }

    SUBCASE("lossless other arm collapses to the singles")
    {
        const Index n = 32;
        const Grid g = make_grid(n, 2.0);
        const Kernel other = kernel_of(element::FourierSystem{n * 4.0 / 0.5, 0.5}, g);
        REQUIRE(unitarity_defect(other) <= 1e-8);
        const SinglePhotonPure phi(g, rng.vector(n));
        const Kernel obs = random_kernel(rng, g, make_grid(40, 0.5));
        const RVector singles = biphoton_singles(entangled_delta(phi), obs, Arm::Two).values();
        CHECK((entangled_marginal_closed(phi, obs, other).values() - singles).cwiseAbs().maxCoeff() <= 1e-6);
    }

    SUBCASE("remote mask is imprinted on the observed arm")
    {
        const Grid g = make_grid(24, 0.5);
        const SinglePhotonPure phi(g, rng.vector(24));
        CVector t = rng.vector(24);
        t /= t.cwiseAbs().maxCoeff();
        const Density p = entangled_marginal_closed(phi, kernel_of(element::Identity{}, g), kernel_of(element::Mask{t}, g));
        const RVector expected = phi.amplitude().cwiseAbs2().cwiseProduct(t.cwiseAbs2());
        CHECK(rel(p.values(), oracle::normalized(expected, g.dx())) < 1e-12);
    }

    SUBCASE("a fully absorbing other arm is a physics error")
    {
        const Grid g = make_grid(8, 1.0);
        const SinglePhotonPure phi(g, CVector::Ones(8));
        CHECK_THROWS_AS(entangled_marginal_closed(phi, kernel_of(element::Identity{}, g), Kernel(g, g, CMatrix::Zero(8, 8))),
                        PhysicsError);
    }
}

TEST_CASE("correlated source closed forms")
{
    const Grid two = make_grid(2, 1.0);
    const Kernel id2 = kernel_of(element::Identity{}, two);
    const CorrelatedPairSource point = correlated_from_intensity(Eigen::Vector2d(1.0, 0.0), two);
    CHECK(correlated_joint(point, id2, id2).values() == (RMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());

    oracle::Random rng(kSeed + 6);
    const Grid g = make_grid(20, 0.5), o1 = make_grid(16, 0.7), o2 = make_grid(22, 0.3);

    SUBCASE("mixture oracle")
    {
        for (int trial = 0; trial < 10; ++trial) {
            const CorrelatedPairSource c = correlated_from_intensity(rng.positive(20), g);
            const BiphotonMixture m = localized_pair_mixture(c);
            const Kernel k1 = random_kernel(rng, g, o1), k2 = random_kernel(rng, g, o2);
            CHECK(oracle::rel_linf(correlated_joint(c, k1, k2).values(), mixture_joint(m, k1, k2).values()) <= 1e-9);
            CHECK(rel(correlated_singles(c, k1).values(), mixture_singles(m, k1, Arm::One).values()) <= 1e-9);
            CHECK(rel(correlated_singles(c, k2).values(), mixture_singles(m, k2, Arm::Two).values()) <= 1e-9);
            CHECK(rel(correlated_marginal(c, k1, k2).values(), mixture_marginal(m, k1, k2, Arm::One).values()) <= 1e-9);
            CHECK(rel(correlated_marginal(c, k2, k1).values(), mixture_marginal(m, k1, k2, Arm::Two).values()) <= 1e-9);
            const RMatrix loops = oracle::correlated_joint(c.gamma(), k1.matrix(), k2.matrix(), g.dx(), o1.dx(), o2.dx());
            CHECK(oracle::rel_linf(correlated_joint(c, k1, k2).values(), loops) <= 1e-12);
        }
    }

    SUBCASE("singles")
    {
        const RVector w = rng.positive(20);
        const CorrelatedPairSource c = correlated_from_intensity(w, g);
        CHECK(rel(correlated_singles(c, kernel_of(element::Identity{}, g)).values(), c.gamma()) < 1e-13);

        const SinglePhotonPure phi(g, rng.vector(20));
        const CorrelatedPairSource matched = correlated_from_intensity(phi.amplitude().cwiseAbs2(), g);
        const Kernel k = random_kernel(rng, g, o1);
        CHECK(rel(correlated_singles(matched, k).values(), biphoton_singles(entangled_delta(phi), k, Arm::One).values()) <
              1e-12);

        CVector t = rng.vector(20);
        t /= t.cwiseAbs().maxCoeff();
        const std::vector<ElementSpec> mask_then_id{element::Mask{t}, element::Identity{}};
        const RVector expected = oracle::normalized(c.gamma().cwiseProduct(t.cwiseAbs2()), g.dx());
        CHECK(rel(correlated_singles(c, cascade(mask_then_id, g)).values(), expected) < 1e-12);
    }

    SUBCASE("marginal reductions")
    {
        const CorrelatedPairSource c = correlated_from_intensity(rng.positive(20), g);
        const Kernel obs = random_kernel(rng, g, o2);
        const RVector singles = correlated_singles(c, obs).values();

        const Kernel lossless = kernel_of(element::ThinLens{40.0, 0.5}, g);
        CHECK((correlated_marginal(c, obs, lossless).values() - singles).cwiseAbs().maxCoeff() <= 1e-10 * singles.maxCoeff());

        CVector column = rng.vector(20);
        CMatrix circ(20, 20);
        for (Index i = 0; i < 20; ++i)
            for (Index j = 0; j < 20; ++j) circ(i, j) = column((i - j + 20) % 20);
        const Kernel circulant(g, g, circ);
        CHECK((correlated_marginal(c, obs, circulant).values() - singles).cwiseAbs().maxCoeff() <= 1e-10 * singles.maxCoeff());

        CVector t = rng.vector(20);
        t /= t.cwiseAbs().maxCoeff();
        const RVector expected = oracle::normalized(c.gamma().cwiseProduct(t.cwiseAbs2()), g.dx());
        CHECK(rel(correlated_marginal(c, kernel_of(element::Identity{}, g), kernel_of(element::Mask{t}, g)).values(),
                  expected) < 1e-12);

        CHECK_THROWS_AS(correlated_marginal(c, obs, Kernel(g, g, CMatrix::Zero(20, 20))), PhysicsError);
    }

    SUBCASE("no interference between emission points")
    {
        const Index n = 64;
        const Grid h = make_grid(n, 1.0);
        const Kernel far = kernel_of(element::FourierSystem{n / 0.5, 0.5}, h);
        const CorrelatedPairSource c = correlated_from_intensity(two_slits(h, 4.0, 16.0).cwiseAbs2(), h);
        const Density p = marginal_from_joint(correlated_joint(c, far, far), Arm::Two);
        CHECK(image_metrics(p, {16, 48}).visibility < 1e-6);
    }
}

TEST_CASE("mixtures")
{
    oracle::Random rng(kSeed + 7);
    const Grid g = make_grid(16, 0.5), o1 = make_grid(12, 0.8), o2 = make_grid(18, 0.3);
    const Kernel k1 = random_kernel(rng, g, o1), k2 = random_kernel(rng, g, o2);
    const BiphotonPure s(g, g, rng.matrix(16, 16));
    const BiphotonMixture single({{1.0, s}});
    CHECK(oracle::rel_linf(mixture_joint(single, k1, k2).values(), biphoton_joint(s, k1, k2).values()) < 1e-13);
    CHECK(rel(mixture_singles(single, k1, Arm::One).values(), biphoton_singles(s, k1, Arm::One).values()) < 1e-12);
    CHECK(rel(mixture_marginal(single, k1, k2, Arm::Two).values(),
              marginal_from_joint(biphoton_joint(s, k1, k2), Arm::Two).values()) < 1e-12);

    // unnormalized component densities are weighted before the single normalization
    const BiphotonPure t(g, g, rng.matrix(16, 16));
    const BiphotonMixture two({{0.3, s}, {0.7, t}});
    RMatrix sum = RMatrix::Zero(12, 18);
    for (const auto& [w, st] : {std::pair{0.3, s}, std::pair{0.7, t}}) {
        const CMatrix a = k1.matrix() * st.amplitude() * k2.matrix().transpose() * (g.dx() * g.dx());
        for (Index i = 0; i < 12; ++i)
            for (Index j = 0; j < 18; ++j) sum(i, j) += w * std::norm(a(i, j));
    }
    CHECK(oracle::rel_linf(mixture_joint(two, k1, k2).values(), oracle::normalized(sum, o1.dx(), o2.dx())) < 1e-12);
}

TEST_CASE("fringe visibility grows with the entangled fraction")
{
    // Two slits, Fourier lens and pinhole bucket in arm 1; Fourier lens in arm 2.
    const Index n = 64;
    const double dx = 5.0, lambda = 0.5, f = n * dx * dx / lambda;
    const Grid g = make_grid(n, dx);
    const std::vector<ElementSpec> bucket_arm{element::Mask{two_slits(g, 10.0, 40.0)}, element::FourierSystem{f, lambda},
                                              element::Mask{gaussian(g, 5.0)}};
    const Kernel k1 = cascade(bucket_arm, g);
    const Kernel k2 = kernel_of(element::FourierSystem{f, lambda}, g);

    const SinglePhotonPure phi(g, gaussian(g, 60.0));
    const BiphotonPure ent = entangled_delta(phi);
    const BiphotonMixture local = localized_pair_mixture(correlated_from_intensity(phi.amplitude().cwiseAbs2(), g));

    double previous = -1.0;
    for (double w : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
        std::vector<MixtureComponent> parts;
        if (w > 0.0) parts.push_back({w, ent});
        for (const auto& c : local.components())
            if (w < 1.0) parts.push_back({(1.0 - w) * c.weight, c.state});
        const double v = image_metrics(mixture_marginal(BiphotonMixture(parts), k1, k2, Arm::Two), {20, 44}).visibility;
        CHECK(v > previous);
        previous = v;
    }
    const RMatrix joint = oracle::joint(ent.amplitude(), k1.matrix(), k2.matrix(), dx, dx, dx);
    const Density pure = from(g, oracle::marginal(joint, 2, dx, dx));
    CHECK(previous == doctest::Approx(image_metrics(pure, {20, 44}).visibility).epsilon(1e-9));
}

TEST_CASE("image metrics")
{
    const Grid g = make_grid(65, 1.0);
    RVector wave(65);
    for (Index i = 0; i < 65; ++i) wave(i) = 1.0 + std::cos(2.0 * kPi * g.point(i) / 16.0);
    CHECK(image_metrics(from(g, wave), {0, 65}).visibility == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(image_metrics(from(g, RVector::Ones(65)), {10, 40}).visibility == 0.0);

    const Grid h = make_grid(401, 0.5);
    for (double sigma : {5.0, 10.0, 20.0}) {
        RVector gauss(401);
        for (Index i = 0; i < 401; ++i) gauss(i) = std::exp(-0.5 * std::pow((h.point(i) - 3.0) / sigma, 2));
        const ImageMetrics m = image_metrics(from(h, gauss), {0, 401});
        CHECK(m.fwhm == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma).epsilon(0.02));
        CHECK(m.peak_position == 3.0);
    }

    CHECK_THROWS_AS(image_metrics(from(g, wave), {10, 10}), ValidationError);
    CHECK_THROWS_AS(image_metrics(from(g, wave), {-1, 10}), ValidationError);
    CHECK_THROWS_AS(image_metrics(from(g, wave), {10, 66}), ValidationError);
}

TEST_CASE("densities validate and normalize")
{
    const Grid g = make_grid(4, 0.5);
    CHECK_THROWS_AS(Density(g, RVector::Ones(4)), ValidationError);
    CHECK_NOTHROW(Density(g, RVector::Constant(4, 0.5)));
    CHECK_THROWS_AS(Density(g, (RVector(4) << 1.0, 1.0, 1.0, -1.0).finished()), ValidationError);
    CHECK_THROWS_AS(Density::from_unnormalized(g, RVector::Zero(4)), PhysicsError);
    CHECK_THROWS_AS(Density::from_unnormalized(g, (RVector(4) << 1.0, 1.0, 1.0, -0.5).finished()), PhysicsError);
    const Density clamped = Density::from_unnormalized(g, (RVector(4) << 1.0, 1.0, 1.0, -1e-14).finished());
    CHECK(clamped.values()(3) == 0.0);
    CHECK(clamped.integral() == doctest::Approx(1.0).epsilon(1e-15));
}
