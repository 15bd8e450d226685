#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "smoothlab/error.hpp"
#include "smoothlab/estimator.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/symbol_parser.hpp"
#include "smoothlab/timedep.hpp"
#include "test_support.hpp"

using namespace smoothlab;
using namespace smoothlab::testing;

namespace {

EstimateSpec spec(WeightSpec w, SmootherSpec s, double T, int nt) {
    EstimateSpec e;
    e.weight = w;
    e.smoother = std::move(s);
    e.T = T;
    e.time_samples = nt;
    return e;
}

// Dense normal operator in the frequency basis, assembled from the explicit
// DFT matrix; its top eigenvalue is the squared constant.
double dense_top_eigenvalue(const Symbol& a, const EstimateSpec& s, const GridSpec& g) {
    const int n = static_cast<int>(g.size());
    Eigen::MatrixXcd F(n, n);  // F(k, j) = N^{-1/2} exp(-i xi_k x_j)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            F(k, j) = std::polar(1.0 / std::sqrt(double(n)), -g.frequency_at(k).dot(g.position_at(j)));
    const auto w = weight_values(g, s.weight);
    const auto sig = smoother_values(g, a, s.smoother);
    Eigen::VectorXd w2(n);
    for (int j = 0; j < n; ++j) w2[j] = w[j] * w[j];
    const Eigen::MatrixXcd M = F * w2.asDiagonal() * F.adjoint();
    const TimeGrid tg = TimeGrid::trapezoid(-s.T, s.T, s.time_samples);
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t q = 0; q < tg.t.size(); ++q) {
        Eigen::VectorXcd d(n);
        for (int k = 0; k < n; ++k) d[k] = sig[k] * std::polar(1.0, tg.t[q] * a(g.frequency_at(k)));
        K += tg.weight[q] * (d.conjugate().asDiagonal() * M * d.asDiagonal());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (K + K.adjoint()));
    return eig.eigenvalues().maxCoeff();
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("weights") {
    const GridSpec g = GridSpec::cube(1, 8.0, 16);
    const auto w = weight_values(g, WeightSpec::bracket(1.0));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.position_at(i)[0];
        CHECK(w[i] == doctest::Approx(1 / std::sqrt(1 + x * x)));
    }
    const auto hw = weight_values(g, WeightSpec::homogeneous(-0.5));
    const double half = 0.5 * g.spacing(0);
    const double b[1] = {half};
    CHECK(cell_average_power(b, -0.5) == doctest::Approx(std::pow(half, -0.5) / 0.5));
    CHECK(hw[8] == doctest::Approx(cell_average_power(b, -0.5)));  // x = 0 cell
    CHECK(hw[9] == doctest::Approx(std::pow(g.spacing(0), -0.5)));
    CHECK(WeightSpec::bracket(0.75).decays_enough());
    CHECK_FALSE(WeightSpec::bracket(0.5).decays_enough());
}

TEST_CASE("spec validation") {
    EstimateSpec s = spec(WeightSpec::bracket(1), SmootherSpec::identity(), 1.0, 8);
    CHECK_THROWS_AS(s.validate(), Error);
    s.time_samples = 16;
    s.T = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("translation symbol reproduces the weight integral") {
    const double L = 40.0;
    const GridSpec g = GridSpec::cube(1, L, 256);
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::identity(), L / 2, 513);
    const Symbol a = parse_symbol("xi1");
    double sum = 0.0;
    for (const double w : weight_values(g, s.weight)) sum += w * w * g.spacing(0);
    for (int k = 0; k < 3; ++k) {
        const ComplexField phi = random_band_limited(g, half_band(g), mix_seed(77, k));
        CHECK(smoothing_ratio(a, s, phi) == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
    }
    CHECK(std::sqrt(sum) == doctest::Approx(std::sqrt(2 * std::atan(20.0))).epsilon(1e-3));
}

TEST_CASE("dense operator oracle, translation symbol") {
    const double L = 16.0;
    const GridSpec g = GridSpec::cube(1, L, 64);
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::identity(), L / 2, 65);
    const Symbol a = parse_symbol("xi1");
    const ConstantEstimate e = estimate_constant(a, s, g, EstimateMethod::power_iteration, {}, 3);
    const double lambda = dense_top_eigenvalue(a, s, g);
    CHECK(e.value * e.value == doctest::Approx(lambda).epsilon(1e-10));
    double sum = 0.0;
    for (const double w : weight_values(g, s.weight)) sum += w * w * g.spacing(0);
    CHECK(lambda == doctest::Approx(sum).epsilon(1e-10));
}

TEST_CASE("dense operator oracle, dispersive symbol") {
    const GridSpec g = GridSpec::cube(1, 12.0, 64);
    const Symbol a = parse_symbol("xi1^2");
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::classical(0.5), 1.5, 48);
    EstimateParams p;
    p.max_iterations = 2000;
    p.tolerance = 1e-13;
    const ConstantEstimate e = estimate_constant(a, s, g, EstimateMethod::power_iteration, p, 5);
    CHECK(e.value * e.value == doctest::Approx(dense_top_eigenvalue(a, s, g)).epsilon(1e-6));
}

TEST_CASE("smoother scaling and the invariant/classical ratio") {
    const GridSpec g = GridSpec::cube(2, 16.0, 32);
    const ComplexField phi = random_band_limited(g, half_band(g), 12);
    const Symbol lap = parse_symbol("xi1^2 + xi2^2");
    EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::classical(0.5), 2.0, 32);
    const double base = spacetime_norm(lap, s, phi);
    EstimateSpec doubled = s;
    doubled.smoother.scale = 2.0;
    CHECK(spacetime_norm(lap, doubled, phi) == doctest::Approx(2 * base).epsilon(1e-13));
    EstimateSpec inv = s;
    inv.smoother = SmootherSpec::invariant(0.5);
    CHECK(spacetime_norm(lap, inv, phi) == doctest::Approx(std::sqrt(2.0) * base).epsilon(1e-12));
    CHECK(smoothing_ratio(lap, s, 3.0 * phi) == doctest::Approx(smoothing_ratio(lap, s, phi)).epsilon(1e-12));
}

TEST_CASE("stationary symbol") {
    const GridSpec g = GridSpec::cube(1, 16.0, 16);  // h = 1: w^2 drops to 1/2 next to the origin
    const Symbol zero = parse_symbol("0*xi1");
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::identity(), 3.0, 17);
    EstimateParams p;
    p.max_iterations = 500;
    p.tolerance = 1e-12;
    const ConstantEstimate e = estimate_constant(zero, s, g, EstimateMethod::power_iteration, p, 1);
    CHECK(e.value == doctest::Approx(std::sqrt(6.0)).epsilon(1e-6));

    const GridSpec fine = GridSpec::cube(1, 40.0, 1024);
    const ComplexField bump = random_localized(fine, {}, 4, 0.05, vec(0.0));
    const EstimateSpec sf = spec(WeightSpec::bracket(1.0), SmootherSpec::identity(), 3.0, 17);
    CHECK(smoothing_ratio(zero, sf, bump) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-2));
}

TEST_CASE("power iteration dominates the ensemble and its Rayleigh quotients increase") {
    const GridSpec g = GridSpec::cube(1, 20.0, 64);
    const Symbol a = parse_symbol("xi1^3 - xi1");
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::invariant(0.5), 2.0, 40);
    EstimateParams p;
    p.ensemble_size = 16;
    const ConstantEstimate ens = estimate_constant(a, s, g, EstimateMethod::ensemble, p, 9);
    const ConstantEstimate pow = estimate_constant(a, s, g, EstimateMethod::power_iteration, p, 9);
    CHECK(pow.converged);
    CHECK(pow.value >= ens.value * (1 - 1e-8));
    for (std::size_t i = 1; i < pow.rayleigh.size(); ++i)
        CHECK(pow.rayleigh[i] >= pow.rayleigh[i - 1] * (1 - 1e-12));
    CHECK(ens.iterations == 16);
}

TEST_CASE("norm is nondecreasing in T") {
    const GridSpec g = GridSpec::cube(1, 30.0, 128);
    const Symbol a = parse_symbol("xi1^2");
    const ComplexField phi = random_band_limited(g, half_band(g), 2);
    double prev = 0.0;
    for (double T : {0.5, 1.0, 2.0, 4.0}) {
        const double v = spacetime_norm(a, spec(WeightSpec::bracket(1.0), SmootherSpec::identity(), T, 401), phi);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("refinement with one grid") {
    const Symbol a = parse_symbol("xi1^2");
    const auto rows = refinement_study(a, spec(WeightSpec::bracket(1), SmootherSpec::classical(0.5), 1.0, 16),
                                       {GridSpec::cube(1, 20.0, 32)}, EstimateMethod::ensemble, {}, 1);
    CHECK(rows.size() == 1);
    CHECK(relative_spread({2.0, 2.2, 2.1}) == doctest::Approx(0.1));
    CHECK(fit_slope({0, 1, 2}, {1, 3, 5}) == doctest::Approx(2));
}

TEST_CASE("dispersive concentration has no scaling") {
    const GridSpec g = GridSpec::cube(1, 2048.0, 4096);
    const Symbol lap = parse_symbol("xi1^2");
    const EstimateSpec inv = spec(WeightSpec::bracket(1.0), SmootherSpec::invariant(0.5), 50.0, 201);
    EstimateSpec cls = inv;
    cls.smoother = SmootherSpec::classical(0.5);
    const ConcentrationResult r = concentration_study(lap, cls, inv, g, {0.2, 0.1, 0.05},
                                                      [](const Vec& xi) { return xi.norm() - 1.0; }, 3);
    CHECK(std::abs(r.slope) < 0.1);
    for (const auto& row : r.rows) CHECK(row.ratio_classical / row.ratio_invariant == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK_THROWS_AS(concentration_study(lap, cls, inv, g, {1e-6}, [](const Vec& xi) { return xi.norm() - 1.0; }, 3),
                    Error);
}

TEST_CASE("unweighted Hoshiro smoother is dominated by the invariant one") {
    const GridSpec g = GridSpec::cube(2, 16.0, 32);
    for (const char* e : {"xi1^3 + xi2^3", "xi1^2 + xi2^2", "xi1*xi2^2"}) {
        const Symbol a = parse_symbol(e);
        const double m = a.order();
        for (int k = 0; k < 3; ++k) {
            const ComplexField phi = random_band_limited(g, half_band(g), mix_seed(31, k));
            const double hos = smoothing_ratio(a, spec(WeightSpec::unit(), SmootherSpec::hoshiro(0.5), 2.0, 32), phi);
            const double inv = smoothing_ratio(a, spec(WeightSpec::unit(), SmootherSpec::invariant(0.5), 2.0, 32), phi);
            CHECK(hos <= inv / std::sqrt(m) * (1 + 1e-12));
        }
    }
}

TEST_CASE("time coefficients") {
    const TimeCoefficient lor = TimeCoefficient::lorentzian();
    CHECK(lor.primitive(3.0) == doctest::Approx(std::atan(3.0)).epsilon(1e-12));
    CHECK(lor.inverse_primitive(std::atan(2.0), 0.0, 10.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(TimeCoefficient::constant(2.0).primitive(-1.5) == doctest::Approx(-3.0));
    const TimeCoefficient flip([](double t) { return t; }, "t");
    CHECK_THROWS_AS(flip.require_single_sign(-1.0, 1.0), Error);
    CHECK_NOTHROW(flip.require_single_sign(0.0, 1.0));
}

TEST_CASE("time-dependent norms") {
    const GridSpec g = GridSpec::cube(1, 40.0, 128);
    const Symbol a = parse_symbol("xi1^2");
    const ComplexField phi = random_band_limited(g, half_band(g), 19);
    const EstimateSpec s = spec(WeightSpec::bracket(1.0), SmootherSpec::invariant(0.5), 4.0, 257);
    const double ref = spacetime_norm(a, s, phi);
    CHECK(timedep_norm(a, TimeCoefficient::constant(1.0), s, phi, -4.0, 4.0).value ==
          doctest::Approx(ref).epsilon(1e-13));
    CHECK(timedep_norm(a, TimeCoefficient::constant(2.0), s, phi, -2.0, 2.0).value ==
          doctest::Approx(ref).epsilon(1e-6));
    CHECK(timedep_norm_direct(a, TimeCoefficient::constant(2.0), s, phi, -2.0, 2.0, 257) ==
          doctest::Approx(ref).epsilon(1e-6));

    const TimeCoefficient lor = TimeCoefficient::lorentzian();
    const TimedepResult r = timedep_norm(a, lor, s, phi, 0.0, 50.0);
    CHECK(r.tau_end == doctest::Approx(std::atan(50.0)));
    CHECK(r.nodes.back() == doctest::Approx(50.0).epsilon(1e-8));
    CHECK(r.value == doctest::Approx(timedep_norm_direct(a, lor, s, phi, 0.0, 50.0, 20001)).epsilon(1e-4));
    CHECK_THROWS_AS(timedep_norm(a, lor, s, phi, 1.0, 0.0), Error);
}

}  // TEST_SUITE
