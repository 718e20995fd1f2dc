#include <doctest.h>

#include "entimg/errors.hpp"
#include "entimg/sources.hpp"
#include "oracles.hpp"

using namespace entimg;

namespace {

SinglePhotonPure pure(const Grid& g, std::initializer_list<Complex> v)
{
    CVector a(static_cast<Index>(v.size()));
    Index i = 0;
    for (auto x : v) a(i++) = x;
    return SinglePhotonPure(g, a);
}

double amp_norm(const BiphotonPure& s)
{
    return s.amplitude().squaredNorm() * s.grid1().dx() * s.grid2().dx();
}

CVector gaussian(const Grid& g, double waist)
{
    CVector v(g.size());
    for (Index i = 0; i < g.size(); ++i) v(i) = std::exp(-std::pow(g.point(i) / waist, 2));
    return v;
}

} // namespace

TEST_CASE("single photon states normalize")
{
    const Grid g = make_grid(16, 0.3);
    oracle::Random rng(21);
    const SinglePhotonPure s(g, rng.vector(16));
    CHECK(s.amplitude().squaredNorm() * g.dx() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(SinglePhotonPure(g, CVector::Zero(16)), ValidationError);
    CHECK_THROWS_AS(SinglePhotonPure(g, CVector::Ones(15)), ValidationError);

    const CMatrix m = rng.matrix(16, 16);
    const SinglePhotonMixed mixed(g, m * m.adjoint());
    CHECK(mixed.coherence().diagonal().real().sum() * g.dx() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(SinglePhotonMixed(g, m), ValidationError);                                   // not Hermitian
    CHECK_THROWS_AS(SinglePhotonMixed(g, -(m * m.adjoint()).eval()), ValidationError);           // negative trace
    CMatrix indefinite = CMatrix::Identity(16, 16);
    indefinite(0, 0) = 3.0;
    indefinite(1, 1) = -1.0;
    CHECK_THROWS_AS(SinglePhotonMixed(g, indefinite), ValidationError);
}

TEST_CASE("factorizable")
{
    const Grid g = make_grid(2, 1.0);
    const BiphotonPure s = factorizable(pure(g, {1.0, 0.0}), pure(g, {0.0, 1.0}));
    CHECK(s.amplitude()(0, 1) == Complex(1.0));
    CHECK(s.amplitude()(0, 0) == Complex(0.0));
    CHECK(s.amplitude()(1, 0) == Complex(0.0));
    CHECK(s.amplitude()(1, 1) == Complex(0.0));

    oracle::Random rng(22);
    const Grid h = make_grid(24, 0.5);
    for (int trial = 0; trial < 5; ++trial) {
        const SinglePhotonPure a(h, rng.vector(24)), b(h, rng.vector(24));
        const auto sp = schmidt_spectrum(factorizable(a, b));
        CHECK(sp.singular_values(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sp.singular_values.tail(23).maxCoeff() < 1e-12);
        CHECK(sp.entropy < 1e-10);
        CHECK(std::abs(sp.participation - 1.0) < 1e-8);

        const SinglePhotonMixed r1 = reduced_coherence(factorizable(a, b), Arm::One);
        const CMatrix expected = a.amplitude() * a.amplitude().adjoint();
        CHECK((r1.coherence() - expected).cwiseAbs().maxCoeff() < 1e-12 * expected.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("entangled delta")
{
    const Grid g = make_grid(2, 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    const BiphotonPure s = entangled_delta(pure(g, {r, r}));
    CHECK(std::abs(s.amplitude()(0, 0) - r) < 1e-15);
    CHECK(std::abs(s.amplitude()(1, 1) - r) < 1e-15);
    CHECK(s.amplitude()(0, 1) == Complex(0.0));
    CHECK(amp_norm(s) == doctest::Approx(1.0));

    const Grid h = make_grid(20, 0.4);
    oracle::Random rng(23);
    const SinglePhotonPure phi(h, rng.vector(20));
    for (Arm arm : {Arm::One, Arm::Two}) {
        const CMatrix gamma = reduced_coherence(entangled_delta(phi), arm).coherence();
        const RVector expected = phi.amplitude().cwiseAbs2();
        CHECK((gamma.diagonal().real() - expected).cwiseAbs().maxCoeff() < 1e-12 * expected.maxCoeff());
        CMatrix off = gamma;
        off.diagonal().setZero();
        CHECK(off.cwiseAbs().maxCoeff() < 1e-15);
    }

    const Index n = 4;
    const auto sp = schmidt_spectrum(entangled_delta(SinglePhotonPure(make_grid(n, 0.7), CVector::Ones(n))));
    for (Index i = 0; i < n; ++i) CHECK(sp.singular_values(i) * sp.singular_values(i) == doctest::Approx(0.25));
    CHECK(sp.entropy == doctest::Approx(std::log(4.0)));
    CHECK(sp.participation == doctest::Approx(4.0));

    const auto uniform = schmidt_spectrum(entangled_delta(SinglePhotonPure(make_grid(37, 0.2), CVector::Ones(37))));
    CHECK(uniform.participation == doctest::Approx(37.0));
}

TEST_CASE("schmidt entropy is invariant under phase masks")
{
    const Grid g = make_grid(24, 0.5);
    oracle::Random rng(24);
    const BiphotonPure s(g, g, rng.matrix(24, 24));
    const auto base = schmidt_spectrum(s);
    CVector p1(24), p2(24);
    for (Index i = 0; i < 24; ++i) {
        p1(i) = std::polar(1.0, rng.uniform(0, 2 * kPi));
        p2(i) = std::polar(1.0, rng.uniform(0, 2 * kPi));
    }
    const BiphotonPure masked(g, g, p1.asDiagonal() * s.amplitude() * p2.asDiagonal());
    const auto after = schmidt_spectrum(masked);
    CHECK(after.entropy == doctest::Approx(base.entropy).epsilon(1e-10));
    CHECK(after.participation == doctest::Approx(base.participation).epsilon(1e-10));
    CHECK(base.singular_values.squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spdc amplitude")
{
    const Grid g = make_grid(41, 1.0);
    CVector pump = CVector::Zero(41);
    pump(20) = 1.0;
    const BiphotonPure s = spdc_amplitude({pump, 3.0}, g);
    // single-term sum: zeta(x, x') centered at the origin
    Index r, c;
    s.amplitude().cwiseAbs().maxCoeff(&r, &c);
    CHECK(r == 20);
    CHECK(c == 20);
    const double b = 3.0;
    for (Index i = 0; i < 41; ++i)
        for (Index j = 0; j < 41; ++j) {
            const double u = g.point(i), v = g.point(j);
            const double expected = std::exp(-(u * u + v * v) / (2 * b * b));
            CHECK(std::abs(s.amplitude()(i, j) / s.amplitude()(20, 20) - expected) < 1e-12);
        }

    SUBCASE("narrow phase matching approaches the delta source")
    {
        const Grid h = make_grid(64, 1.0);
        const CVector ep = gaussian(h, 12.0);
        const CMatrix delta = entangled_delta(SinglePhotonPure(h, ep)).amplitude();
        double previous = 1e300;
        for (double width : {2.0, 1.0, 0.5, 0.25, 0.125}) {
            const double d = (spdc_amplitude({ep, width}, h).amplitude() - delta).cwiseAbs().maxCoeff();
            CHECK(d < previous);
            previous = d;
        }
        CHECK(previous < 1e-10 * delta.cwiseAbs().maxCoeff());
    }

    SUBCASE("wide phase matching approaches a product state")
    {
        const Grid h = make_grid(128, 1.0);
        const CVector ep = gaussian(h, 3.0);
        double previous = 1e300;
        for (double width : {2.0, 4.0, 8.0, 16.0}) {
            const double k = schmidt_spectrum(spdc_amplitude({ep, width}, h)).participation;
            CHECK(k < previous);
            previous = k;
        }
        CHECK(previous < 1.01);
    }

    CHECK_THROWS_AS(spdc_amplitude({CVector::Zero(41), 1.0}, g), ValidationError);
    CHECK_THROWS_AS(spdc_amplitude({pump, 0.0}, g), ValidationError);
    CHECK_THROWS_AS(spdc_amplitude({pump, -2.0}, g), ValidationError);
}

TEST_CASE("reduced coherence of random states")
{
    oracle::Random rng(25);
    const Grid g1 = make_grid(18, 0.3), g2 = make_grid(22, 0.6);
    for (int trial = 0; trial < 5; ++trial) {
        const BiphotonPure s(g1, g2, rng.matrix(18, 22));
        CHECK(amp_norm(s) == doctest::Approx(1.0).epsilon(1e-12));
        for (Arm arm : {Arm::One, Arm::Two}) {
            const SinglePhotonMixed r = reduced_coherence(s, arm);
            const Grid& g = arm == Arm::One ? g1 : g2;
            CHECK(r.coherence().trace().real() * g.dx() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK((r.coherence() - r.coherence().adjoint()).cwiseAbs().maxCoeff() == 0.0);
            CHECK(coherence_spectrum(r).minCoeff() >= -1e-10);
        }
        // both reduced operators share the Schmidt spectrum
        const RVector e1 = coherence_spectrum(reduced_coherence(s, Arm::One)).reverse().head(18);
        const RVector e2 = coherence_spectrum(reduced_coherence(s, Arm::Two)).reverse().head(18);
        CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-12);
        const RVector sv = schmidt_spectrum(s).singular_values.cwiseAbs2();
        CHECK((e1 - sv).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("correlated pair source")
{
    const Grid g = make_grid(2, 1.0);
    const CorrelatedPairSource c = correlated_from_intensity(Eigen::Vector2d(1.0, 1.0), g);
    CHECK(c.gamma()(0) == 0.5);
    CHECK(c.gamma()(1) == 0.5);
    CHECK_THROWS_AS(correlated_from_intensity(Eigen::Vector2d(1.0, -0.1), g), ValidationError);
    CHECK_THROWS_AS(correlated_from_intensity(Eigen::Vector2d(0.0, 0.0), g), ValidationError);

    const auto point = localized_pair_mixture(correlated_from_intensity(Eigen::Vector2d(1.0, 0.0), g));
    REQUIRE(point.components().size() == 1);
    CHECK(point.components()[0].weight == 1.0);
    CHECK(point.components()[0].state.amplitude() == (CMatrix(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());

    const auto two = localized_pair_mixture(c);
    REQUIRE(two.components().size() == 2);
    CHECK(two.components()[0].weight == 0.5);
    CHECK(two.components()[1].weight == 0.5);
}

TEST_CASE("mixture weights")
{
    const Grid g = make_grid(4, 1.0);
    const BiphotonPure a = entangled_delta(SinglePhotonPure(g, CVector::Ones(4)));
    const BiphotonMixture m({{2.0, a}, {6.0, a}});
    CHECK(m.components()[0].weight == 0.25);
    CHECK(m.components()[1].weight == 0.75);
    CHECK_THROWS_AS(BiphotonMixture({}), ValidationError);
    CHECK_THROWS_AS(BiphotonMixture({{-1.0, a}, {2.0, a}}), ValidationError);
    CHECK_THROWS_AS(BiphotonMixture({{0.0, a}}), ValidationError);
}
