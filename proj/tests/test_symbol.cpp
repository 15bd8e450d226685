#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "smoothlab/classify.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/polynomial.hpp"
#include "smoothlab/symbol.hpp"
#include "smoothlab/symbol_parser.hpp"
#include "test_support.hpp"

using namespace smoothlab;
using namespace smoothlab::testing;

TEST_SUITE("symbol") {

TEST_CASE("polynomial arithmetic and derivatives") {
    const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    const Polynomial p = x * y.pow(2) + 3.0 * x - Polynomial::constant(2, 2.0);
    CHECK(p.degree() == 3);
    CHECK(p(vec(2, 3)) == doctest::Approx(2 * 9 + 6 - 2));
    CHECK(p.derivative(0)(vec(2, 3)) == doctest::Approx(9 + 3));
    CHECK(p.derivative(1)(vec(2, 3)) == doctest::Approx(2 * 2 * 3));
    const Mat h = p.hessian(vec(2, 3));
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == doctest::Approx(6));
    CHECK(h(1, 1) == doctest::Approx(4));
    CHECK(p.principal_part().to_string() == "xi1*xi2^2");
    CHECK_FALSE(p.is_homogeneous());
    CHECK((p - p).is_zero());
    CHECK((p - p).degree() == -1);
    CHECK(p.embedded(3)(Vec::Constant(3, 1.0)) == doctest::Approx(2.0));
}

TEST_CASE("axis restriction") {
    const Polynomial p = *parse_symbol("xi1^3 + xi1*xi2 - 2").polynomial();
    const auto c = p.restrict_to_axis(0, vec(0.0, 5.0));
    REQUIRE(c.size() == 4);
    CHECK(c[0] == doctest::Approx(-2));
    CHECK(c[1] == doctest::Approx(5));
    CHECK(c[2] == 0.0);
    CHECK(c[3] == doctest::Approx(1));
}

TEST_CASE("univariate helpers") {
    const std::vector<double> c = {1, -3, 0, 2};  // 1 - 3t + 2t^3
    CHECK(evaluate_univariate(c, 2.0) == doctest::Approx(11));
    const auto d = differentiate_univariate(c);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == -3);
    CHECK(d[2] == 6);
}

TEST_CASE("companion-matrix roots") {
    const auto r = real_roots(std::vector<double>{-1, 0, 3});  // 3t^2 - 1
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));

    CHECK(real_roots(std::vector<double>{1, 0, 1}).empty());  // t^2 + 1
    const auto dbl = real_roots(std::vector<double>{0, 0, 3});  // 3t^2, double root at 0
    REQUIRE(dbl.size() == 1);
    CHECK(dbl[0] == 0.0);
    const auto tpl = real_roots(std::vector<double>{-1, 3, -3, 1});  // (t-1)^3
    REQUIRE(tpl.size() == 1);
    CHECK(tpl[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(complex_roots(std::vector<double>{6, -5, 1}).size() == 2);
    CHECK(real_roots(std::vector<double>{4}).empty());
}

TEST_CASE("gradient examples") {
    const Symbol ring = parse_symbol("(rho^2-1)^2");
    CHECK(ring.gradient(vec(1, 0)).norm() < 1e-14);
    const Vec g = ring.gradient(vec(std::sqrt(2.0), 0));
    CHECK(g[0] == doctest::Approx(4 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(std::abs(g[1]) < 1e-14);
    const Vec m = parse_symbol("xi1*xi2^2").gradient(vec(1, 1));
    CHECK(m[0] == doctest::Approx(1));
    CHECK(m[1] == doctest::Approx(2));
}

TEST_CASE("finite differences agree with analytic derivatives") {
    for (const auto& e : normal_form_catalog()) {
        for (const Vec& xi : {vec(0.3, -1.7), vec(2.0, 0.5), vec(-1.1, 1.3)}) {
            CHECK((e.symbol.fd_gradient(xi) - e.symbol.gradient(xi)).norm() <=
                  1e-6 * std::max(1.0, e.symbol.gradient(xi).norm()));
            CHECK((e.symbol.fd_hessian(xi) - e.symbol.hessian(xi)).norm() <=
                  1e-5 * std::max(1.0, e.symbol.hessian(xi).norm()));
        }
    }
}

TEST_CASE("property: Hessians are symmetric and Euler's identity holds for homogeneous forms") {
    std::uint64_t state = 5;
    auto uniform = [&state]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) / 9007199254740992.0 * 6.0 - 3.0;
    };
    for (const auto& e : normal_form_catalog()) {
        const Symbol& s = e.symbol;
        for (int k = 0; k < 20; ++k) {
            const Vec xi = vec(uniform(), uniform());
            const Mat h = s.hessian(xi);
            CHECK((h - h.transpose()).norm() <= 1e-12 * std::max(1.0, h.norm()));
            if (!s.is_homogeneous()) continue;
            const double lhs = xi.dot(s.gradient(xi)), rhs = s.order() * s(xi);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("radial, homogeneous, rational and composed symbols") {
    const Symbol r = Symbol::radial(3, polynomial_profile({0, 0, 1}));
    CHECK(r(Vec::Constant(3, 1.0)) == doctest::Approx(3));
    CHECK(r.is_homogeneous());
    CHECK(r.polynomial() != nullptr);

    const Symbol h = Symbol::homogeneous(
        2, 1.0, [](const Vec& xi) { return xi.norm(); }, nullptr, nullptr, "norm");
    CHECK_FALSE(h.has_analytic_gradient());
    CHECK(h.gradient(vec(3, 4))[0] == doctest::Approx(0.6).epsilon(1e-8));

    const Symbol cr = catalog_symbol("crossratio");
    CHECK(cr(vec(1, 1)) == doctest::Approx(0.5));
    CHECK(cr(vec(0, 0)) == 0.0);
    CHECK(cr.order() == 2.0);

    Mat rot(2, 2);
    rot << 0, -1, 1, 0;
    const Symbol a = Symbol::compose_linear(parse_symbol("xi1^3 + xi2"), rot);
    CHECK(a(vec(2, 5)) == doctest::Approx(-125 + 2));
    CHECK((a.gradient(vec(2, 5)) - a.fd_gradient(vec(2, 5))).norm() < 1e-6);
    CHECK(a.principal_part().has_value());
    Mat singular = Mat::Zero(2, 2);
    CHECK_THROWS_AS(Symbol::compose_linear(a, singular), Error);

    // Homogeneous composition keeps itself as principal part.
    const Symbol lap = Symbol::compose_linear(parse_symbol("xi1^2 + xi2^2"), rot);
    CHECK(lap.is_homogeneous());
    CHECK((*lap.principal_part())(vec(1, 2)) == doctest::Approx(5));
}

TEST_CASE("catalog") {
    const auto cat = normal_form_catalog();
    int forms = 0;
    for (const auto& e : cat) {
        if (!e.normal_form) continue;
        ++forms;
        REQUIRE(e.symbol.polynomial() != nullptr);
        CHECK(e.symbol.polynomial()->degree() <= 3);
        CHECK(e.symbol.dimension() == 2);
    }
    CHECK(forms == 9);
    CHECK(catalog_symbol("xi1^3")(vec(2, 5)) == doctest::Approx(8));
    CHECK_THROWS_AS(catalog_symbol("nope"), Error);
    CHECK(catalog_symbol("quartic", 3).dimension() == 3);
}

TEST_CASE("parser grammar") {
    CHECK(parse_symbol("xi1^3 + xi2^3 - xi1").dimension() == 2);
    CHECK(parse_symbol("xi1^2", 3).dimension() == 3);
    CHECK(parse_symbol("2*xi1*xi2^2/4")(vec(1, 2)) == doctest::Approx(2));
    CHECK(parse_symbol("-(xi1 - 1)^2")(vec(3)) == doctest::Approx(-4));
    CHECK(parse_symbol("xi1^2^1")(vec(3)) == doctest::Approx(9));
    CHECK(parse_symbol("catalog:ring").name() == "ring");

    const Symbol r = parse_symbol("radial(rho^3)");
    CHECK(r.kind() == SymbolKind::radial);
    CHECK(r(vec(3, 4)) == doctest::Approx(125));
    const Symbol frac = parse_symbol("rho^1.5", 1);
    CHECK(frac(vec(4)) == doctest::Approx(8));
    CHECK(frac.gradient(vec(4))[0] == doctest::Approx(3));
    CHECK(frac.is_homogeneous());
    CHECK(frac.order() == 1.5);

    const auto& zeros = parse_symbol("(rho^2-1)^2").radial_profile()->derivative_zeros;
    REQUIRE(zeros.size() == 2);
    CHECK(zeros[0] == doctest::Approx(0).epsilon(1e-12));
    CHECK(zeros[1] == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("parser errors carry the offset") {
    auto offset = [](const std::string& s) -> long {
        try {
            parse_symbol(s);
        } catch (const ParseError& e) {
            return static_cast<long>(e.position());
        }
        return -1;
    };
    CHECK(offset("xi1 +") == 5);
    CHECK(offset("xi1^-1") == 3);
    CHECK(offset("xi1 $ 2") == 4);
    CHECK(offset("xi4") >= 0);
    CHECK(offset("(xi1") >= 0);
    CHECK(offset("xi1/xi2") >= 0);
    CHECK(offset("xi1^2 + rho") >= 0);
}

}  // TEST_SUITE
