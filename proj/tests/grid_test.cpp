#include <doctest.h>

#include "entimg/errors.hpp"
#include "entimg/grid.hpp"

using namespace entimg;

TEST_CASE("grid points")
{
    const Grid a = make_grid(3, 0.5, 0.0);
    CHECK(a.point(0) == doctest::Approx(-0.5));
    CHECK(a.point(1) == doctest::Approx(0.0));
    CHECK(a.point(2) == doctest::Approx(0.5));

    const Grid b = make_grid(2, 1.0, 0.0);
    CHECK(b.point(0) == -0.5);
    CHECK(b.point(1) == 0.5);

    const Grid c = make_grid(4, 0.25, 1.0);
    const double expected[] = {0.625, 0.875, 1.125, 1.375};
    for (Index i = 0; i < 4; ++i) CHECK(c.point(i) == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(c.points().size() == 4);
}

TEST_CASE("grid rejects bad parameters")
{
    auto field_of = [](auto fn) {
        try {
            fn();
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of([] { make_grid(0, 1.0); }) == "n");
    CHECK(field_of([] { make_grid(1, 1.0); }) == "n");
    CHECK(field_of([] { make_grid(4, -1.0); }) == "dx");
    CHECK(field_of([] { make_grid(4, 0.0); }) == "dx");
    CHECK(field_of([] { make_grid(4, 1.0, std::nan("")); }) == "center");
}

TEST_CASE("nearest index")
{
    const Grid g = make_grid(3, 0.5, 0.0);
    CHECK(nearest_index(g, 0.1) == 1);
    CHECK(nearest_index(g, -0.26) == 0);
    CHECK(nearest_index(make_grid(2, 1.0, 0.0), 0.0) == 0);
    CHECK_THROWS_AS(nearest_index(g, 10.0), ValidationError);

    const Grid h = make_grid(37, 0.3, -2.0);
    for (Index i = 0; i < h.size(); ++i) CHECK(h.point(nearest_index(h, h.point(i))) == h.point(i));
}

TEST_CASE("quadrature of a constant is exact")
{
    const Grid g = make_grid(64, 0.125, 3.0);
    CHECK(integrate(g, RVector::Constant(64, 2.5)) == 2.5 * 64 * 0.125);
}
