#include <doctest.h>

#include <cmath>

#include "smoothlab/error.hpp"
#include "smoothlab/fft.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/symbol_parser.hpp"
#include "test_support.hpp"

using namespace smoothlab;
using namespace smoothlab::testing;

TEST_SUITE("spectral") {

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridSpec::cube(1, 1.0, 4), Error);   // below 8 points
    CHECK_THROWS_AS(GridSpec::cube(1, 1.0, 9), Error);   // odd
    CHECK_THROWS_AS(GridSpec::cube(1, -1.0, 8), Error);
    CHECK_THROWS_AS(GridSpec::cube(4, 1.0, 8), Error);
    CHECK_THROWS_AS(GridSpec::cube(3, 1.0, 512), Error);  // 2^27 points
    const GridSpec g = GridSpec::cube(2, 10.0, 16);
    CHECK(g.size() == 256);
    CHECK(g.spacing(1) == doctest::Approx(10.0 / 16));
    CHECK(g.coordinate(0, 0) == doctest::Approx(-5.0));
}

TEST_CASE("frequency lattice is FFT ordered with Nyquist negative") {
    const auto xi = frequency_lattice(GridSpec::cube(1, 2 * M_PI, 8));
    const double expected[8] = {0, 1, 2, 3, -4, -3, -2, -1};
    for (int i = 0; i < 8; ++i) CHECK(xi[i][0] == doctest::Approx(expected[i]).epsilon(1e-15));

    const auto half = frequency_lattice(GridSpec::cube(1, M_PI, 8));
    for (int i = 0; i < 8; ++i) CHECK(half[i][0] == doctest::Approx(2 * expected[i]).epsilon(1e-15));

    const GridSpec g2 = GridSpec::cube(2, 2 * M_PI, 8);
    const auto xi2 = frequency_lattice(g2);
    REQUIRE(xi2.size() == 64);
    for (std::size_t f = 0; f < xi2.size(); ++f) {
        const auto idx = g2.unravel(f);
        CHECK(xi2[f][0] == doctest::Approx(expected[idx[0]]));
        CHECK(xi2[f][1] == doctest::Approx(expected[idx[1]]));
    }
}

TEST_CASE("ravel and unravel are inverse") {
    const double L[3] = {1, 2, 3};
    const int N[3] = {8, 10, 12};
    const GridSpec g(3, L, N);
    for (std::size_t f = 0; f < g.size(); f += 37) CHECK(g.ravel(g.unravel(f)) == f);
}

TEST_CASE("transform round trip and Parseval") {
    for (int n = 1; n <= 3; ++n) {
        const GridSpec g = GridSpec::cube(n, 7.0, n == 3 ? 16 : 64);
        const ComplexField phi = random_band_limited(g, {}, 100 + n);
        const ComplexField hat = transform(phi, Direction::forward);
        CHECK(hat.space() == Space::frequency);
        CHECK(std::abs(hat.l2_norm() - phi.l2_norm()) < 1e-12 * phi.l2_norm());
        CHECK(relative_distance(transform(hat, Direction::inverse), phi) < 1e-12);
    }
}

TEST_CASE("property: Parseval and round trip over many random fields") {
    const GridSpec grids[] = {GridSpec::cube(1, 9.0, 40), grid2(5.0, 11.0, 16, 24), GridSpec::cube(3, 4.0, 8)};
    for (const GridSpec& g : grids)
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            ComplexField phi = random_band_limited(g, {}, seed);
            phi *= 0.5 + static_cast<double>(seed);
            const ComplexField hat = transform(phi, Direction::forward);
            CHECK(std::abs(hat.l2_norm() - phi.l2_norm()) <= 1e-13 * phi.l2_norm());
            CHECK(relative_distance(transform(hat, Direction::inverse), phi) < 1e-13);
        }
}

TEST_CASE("transform direction must match the field") {
    const GridSpec g = GridSpec::cube(1, 1.0, 8);
    const ComplexField phi(g, Space::physical);
    CHECK_THROWS_AS(transform(phi, Direction::inverse), Error);
}

TEST_CASE("constant field lives in the mean mode") {
    const GridSpec g = GridSpec::cube(1, 2 * M_PI, 8);
    ComplexField one(g, Space::physical);
    for (auto& v : one.data()) v = 1.0;
    const ComplexField hat = transform(one, Direction::forward);
    CHECK(std::abs(hat[0]) == doctest::Approx(std::sqrt(8.0)));
    for (std::size_t i = 1; i < hat.size(); ++i) CHECK(std::abs(hat[i]) < 1e-14);
}

TEST_CASE("raw fft matches the centred definition") {
    const GridSpec g = GridSpec::cube(1, 3.0, 8);
    std::vector<cplx> u(8);
    for (int j = 0; j < 8; ++j) u[j] = cplx(std::sin(1.3 * j), std::cos(0.7 * j * j));
    std::vector<cplx> c = u;
    fft_forward(g, c);
    for (int k = 0; k < 8; ++k) {
        cplx s = 0.0;
        for (int j = 0; j < 8; ++j) s += u[j] * std::polar(1.0, -g.frequency(0, k) * g.coordinate(0, j));
        CHECK(std::abs(c[k] - s / std::sqrt(8.0)) < 1e-13);
    }
}

TEST_CASE("multipliers") {
    const GridSpec g = GridSpec::cube(1, 2 * M_PI, 32);
    const ComplexField phi = random_band_limited(g, {}, 7);
    CHECK(relative_distance(apply_multiplier(phi, [](const Vec&) { return cplx(1.0); }), phi) < 1e-14);

    const ComplexField e = plane_wave(g, 1.0);
    const ComplexField me = apply_multiplier(e, [](const Vec& xi) { return cplx(xi[0]); });
    CHECK(relative_distance(me, e) < 1e-13);

    CHECK_THROWS_AS(apply_multiplier(phi, [](const Vec& xi) { return cplx(1.0 / xi[0]); }), Error);
}

TEST_CASE("invariant multiplier of the ring vanishes on the unit circle") {
    const GridSpec g = GridSpec::cube(1, 2 * M_PI, 32);
    const Symbol ring = parse_symbol("(rho^2-1)^2", 1);
    const auto m = sample_multiplier(g, [&](const Vec& xi) { return cplx(std::sqrt(gradient_norm(ring, xi))); });
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = std::abs(g.frequency(0, static_cast<int>(i)));
        if (r == 0.0 || r == 1.0) CHECK(std::abs(m[i]) == 0.0);
        else CHECK(std::abs(m[i]) > 0.0);
    }
}

TEST_CASE("propagation examples") {
    const GridSpec g = GridSpec::cube(1, 2 * M_PI, 64);
    const ComplexField phi = random_band_limited(g, half_band(g), 3);

    CHECK(relative_distance(propagate(phi, parse_symbol("0*xi1"), 2.7), phi) < 1e-15);

    // a = xi shifts by t: one grid step exactly.
    const double h = g.spacing(0);
    const ComplexField shifted = propagate(phi, parse_symbol("xi1"), h);
    for (int j = 0; j < 64; ++j) CHECK(std::abs(shifted[j] - phi[(j + 1) % 64]) < 1e-13);

    // Plane waves pick up e^{i t a(k)}.
    const Symbol a = parse_symbol("xi1^3 - 2*xi1");
    const ComplexField e = plane_wave(g, 3.0);
    const double t = 0.41;
    const ComplexField u = propagate(e, a, t);
    const cplx phase = std::polar(1.0, t * (27.0 - 6.0));
    for (int j = 0; j < 64; ++j) CHECK(std::abs(u[j] - phase * e[j]) < 1e-12);
}

TEST_CASE("unitarity, group law and commutation with multipliers") {
    const GridSpec g = GridSpec::cube(2, 12.0, 32);
    const Symbol a = parse_symbol("xi1^3 + xi1*xi2");
    const Multiplier m = [](const Vec& xi) { return cplx(1.0 + xi.squaredNorm(), xi[0]); };
    for (int k = 0; k < 5; ++k) {
        const ComplexField phi = random_band_limited(g, half_band(g), mix_seed(9, k));
        const double s = 0.3 * k + 0.1, t = 0.77 - 0.2 * k;
        CHECK(std::abs(propagate(phi, a, t).l2_norm() - 1.0) < 1e-12);
        CHECK(relative_distance(propagate(propagate(phi, a, s), a, t), propagate(phi, a, s + t)) < 1e-12);
        CHECK(relative_distance(apply_multiplier(propagate(phi, a, t), m), propagate(apply_multiplier(phi, m), a, t)) <
              1e-12);
    }
}

TEST_CASE("band split") {
    const GridSpec g = GridSpec::cube(1, 2 * M_PI, 32);
    ComplexField one(g, Space::physical);
    for (auto& v : one.data()) v = 1.0;
    auto [low, high] = band_split(one, {1.0});
    CHECK(relative_distance(low, one) < 1e-14);
    CHECK(high.l2_norm() < 1e-14);

    const ComplexField e3 = plane_wave(g, 3.0);
    std::tie(low, high) = band_split(e3, {1.0});
    CHECK(low.l2_norm() < 1e-14);
    CHECK(relative_distance(high, e3) < 1e-14);

    const ComplexField phi = random_band_limited(g, {}, 5);
    std::tie(low, high) = band_split(phi, {2.0});
    CHECK((phi - low - high).l2_norm() < 1e-12);

    CHECK_THROWS_AS(band_split(phi, {10.0}), Error);  // 2R beyond Nyquist
    CHECK(band_low_weight(0.5, 1.0) == 1.0);
    CHECK(band_low_weight(2.5, 1.0) == 0.0);
    CHECK(band_low_weight(1.5, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("random band-limited fields") {
    const GridSpec g = GridSpec::cube(1, 20.0, 64);
    const SupportPredicate positive = [](const Vec& xi) { return xi[0] > 0.0; };
    const ComplexField a = random_band_limited(g, positive, 42);
    const ComplexField b = random_band_limited(g, positive, 42);
    CHECK(a.data() == b.data());
    CHECK(random_band_limited(g, positive, 43).data() != a.data());
    CHECK(std::abs(a.l2_norm() - 1.0) < 1e-12);
    const ComplexField hat = transform(a, Direction::forward);
    for (std::size_t i = 0; i < hat.size(); ++i)
        if (g.frequency(0, static_cast<int>(i)) <= 0.0) CHECK(std::abs(hat[i]) < 1e-14);
    CHECK_THROWS_AS(random_band_limited(g, [](const Vec&) { return false; }, 1), Error);
}

TEST_CASE("mode values depend on the signed index, not the grid size") {
    const GridSpec coarse = GridSpec::cube(1, 20.0, 32);
    const GridSpec fine = GridSpec::cube(1, 20.0, 64);
    const SupportPredicate low = [](const Vec& xi) { return std::abs(xi[0]) < 2.0; };
    const ComplexField a = transform(random_band_limited(coarse, low, 8), Direction::forward);
    const ComplexField b = transform(random_band_limited(fine, low, 8), Direction::forward);
    // Same modes, same relative coefficients (the normalisation differs by sqrt(N) per unitary scaling).
    const double scale = std::abs(b[1]) / std::abs(a[1]);
    for (int k = 1; k < 6; ++k) CHECK(std::abs(b[k]) == doctest::Approx(scale * std::abs(a[k])).epsilon(1e-12));
}

TEST_CASE("point evaluation interpolates the grid values") {
    const GridSpec g = GridSpec::cube(2, 6.0, 16);
    const ComplexField phi = random_band_limited(g, {}, 21);
    const ComplexField hat = transform(phi, Direction::forward);
    for (std::size_t f = 0; f < g.size(); f += 29) CHECK(std::abs(evaluate_at(hat, g.position_at(f)) - phi[f]) < 1e-12);
}

TEST_CASE("localized fields stay on their support") {
    const GridSpec g = GridSpec::cube(1, 100.0, 256);
    const SupportPredicate ring = [](const Vec& xi) { return std::abs(std::abs(xi[0]) - 1.0) < 0.2; };
    const ComplexField phi = random_localized(g, ring, 2, 10.0, vec(0.0));
    CHECK(std::abs(phi.l2_norm() - 1.0) < 1e-12);
    const ComplexField hat = transform(phi, Direction::forward);
    for (std::size_t i = 0; i < hat.size(); ++i)
        if (!ring(g.frequency_at(i))) CHECK(std::abs(hat[i]) < 1e-15);
}

}  // TEST_SUITE
