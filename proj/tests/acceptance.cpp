// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "smoothlab/canonical.hpp"
#include "smoothlab/classify.hpp"
#include "smoothlab/comparison.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/estimator.hpp"
#include "smoothlab/experiment.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/symbol_parser.hpp"
#include "smoothlab/timedep.hpp"

using namespace smoothlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

GridSpec grid2(double lx, double ly, int nx, int ny) {
    const double L[2] = {lx, ly};
    const int N[2] = {nx, ny};
    return GridSpec(2, L, N);
}

SupportPredicate half_band(const GridSpec& g) {
    const double b = 0.5 * g.nyquist();
    return [b](const Vec& xi) { return xi.norm() <= b; };
}

// ------------------------------------------------------------------ 1
Outcome spectral_exactness() {
    double worst = 0.0;
    auto probe = [&](const GridSpec& g, const Symbol& a) {
        const ComplexField full = random_band_limited(g, {}, 11);
        const ComplexField hat = transform(full, Direction::forward);
        worst = std::max(worst, std::abs(hat.l2_norm() / full.l2_norm() - 1.0));
        worst = std::max(worst, relative_distance(transform(hat, Direction::inverse), full));
        // Phases t a(xi) carry an absolute rounding error ~ eps |t a|, so the
        // propagator checks stay inside half the Nyquist band.
        const ComplexField phi = random_band_limited(g, half_band(g), 12);
        for (double t : {0.37, 1.0, 2.0}) {
            const ComplexField u = propagate(phi, a, t);
            worst = std::max(worst, std::abs(u.l2_norm() / phi.l2_norm() - 1.0));
            const ComplexField twice = propagate(propagate(phi, a, t), a, 0.5 * t);
            worst = std::max(worst, relative_distance(twice, propagate(phi, a, 1.5 * t)));
        }
    };
    probe(GridSpec::cube(1, 100.0, 1024), parse_symbol("xi1^2"));
    probe(GridSpec::cube(2, 50.0, 256), parse_symbol("xi1^2 + xi2^2"));
    return {worst < 1e-12, "max relative error " + fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ 2
Outcome translation_identity() {
    const GridSpec g = GridSpec::cube(1, 60.0, 1024);
    std::vector<double> xs;
    for (int k = 0; k < 9; ++k) xs.push_back(-30.0 + 7.3 * k);
    double worst = 0.0;
    for (int f = 0; f < 32; ++f) {
        const ComplexField phi = random_band_limited(g, half_band(g), mix_seed(2024, f));
        worst = std::max(worst, translation_identity_check(transform(phi, Direction::forward), xs));
    }
    return {worst < 1e-10, "max deviation over 32 fields " + fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ 3
Outcome comparison_factor() {
    const GridSpec g1 = GridSpec::cube(1, 2048.0, 1024);
    double worst1 = 0.0;
    for (int f = 0; f < 8; ++f) {
        const ComplexField phi = wave_packets(g1, mix_seed(3, f));
        const ModelCheck m = model_equality_check(1.0, 3.0, phi, 1);
        worst1 = std::max(worst1, std::abs(m.ratio - std::sqrt(1.0 / 3.0)));
    }
    const GridSpec g2 = grid2(1024.0, 64.0, 512, 64);
    ModelCheckOptions o2;
    o2.T = 200.0;
    const ModelCheck m2 = model_equality_check(2.0, 3.0, wave_packets(g2, 33), 2, o2);
    const double dev2 = std::abs(m2.ratio - 1.0);
    return {worst1 < 1e-4 && dev2 < 1e-3,
            "1-d max |ratio - sqrt(1/3)| " + fmt("%.3g", worst1) + ", 2-d |ratio - 1| " + fmt("%.3g", dev2)};
}

// ------------------------------------------------------------------ 4
Outcome weighted_norm() {
    const double L = 40.0;
    const GridSpec g = GridSpec::cube(1, L, 256);
    const Symbol a = parse_symbol("xi1");
    EstimateSpec s;
    s.weight = WeightSpec::bracket(1.0);
    s.smoother = SmootherSpec::identity();
    s.T = L / 2.0;
    s.time_samples = 2 * 256 + 1;
    const ComplexField phi = random_band_limited(g, half_band(g), 4);
    const double ratio = smoothing_ratio(a, s, phi);
    const double target = std::sqrt(2.0 * std::atan(20.0));

    // Independent double integral: translate samples on the torus and sum.
    double direct = 0.0;
    const TimeGrid tg = TimeGrid::trapezoid(-s.T, s.T, s.time_samples);
    const ComplexField hat = transform(phi, Direction::forward);
    for (std::size_t k = 0; k < tg.t.size(); ++k) {
        double inner = 0.0;
        for (int j = 0; j < g.points(0); ++j) {
            const double x = g.coordinate(0, j);
            Vec p(1);
            p[0] = x + tg.t[k];
            inner += std::norm(evaluate_at(hat, p)) / (1.0 + x * x) * g.spacing(0);
        }
        direct += tg.weight[k] * inner;
    }
    direct = std::sqrt(direct) / phi.l2_norm();
    const double dev = std::abs(ratio - target);
    return {dev < 1e-3 && std::abs(direct - ratio) < 1e-9,
            "ratio " + fmt("%.6f", ratio) + " vs " + fmt("%.6f", target) + ", quadrature oracle " +
                fmt("%.6f", direct)};
}

// ------------------------------------------------------------------ 5
bool near_point(const std::vector<CriticalPoint>& pts, double x, double y, double tol) {
    for (const auto& p : pts)
        if (std::abs(p.point[0] - x) < tol && std::abs(p.point[1] - y) < tol) return true;
    return false;
}

Outcome classification() {
    bool ok = true;
    std::string why;
    const ClassificationReport h = classify(parse_symbol("xi1^3 + xi2^3"));
    if (h.H != Verdict::holds) ok = false, why += " H(xi1^3+xi2^3)";
    const ClassificationReport l = classify(parse_symbol("xi1^3 + xi2^3 + xi1"));
    if (l.L != Verdict::holds) ok = false, why += " L(+xi1)";
    const ClassificationReport nl = classify(parse_symbol("xi1^3 + xi2^3 - xi1"));
    if (nl.L != Verdict::fails) ok = false, why += " notL(-xi1)";

    int normal = 0;
    for (const auto& e : normal_form_catalog()) {
        if (!e.normal_form) continue;
        const ClassificationReport r = classify(e.symbol);
        if (r.H == Verdict::unverified || r.L == Verdict::unverified) ok = false, why += " " + e.name;
        ++normal;
    }
    if (normal != 9) ok = false, why += " catalog size";

    const double t = 1e-8;
    const auto c1 = find_critical_points(parse_symbol("xi1^3 + xi2^3 + xi1*xi2"));
    if (c1.size() != 2 || !near_point(c1, 0, 0, t) || !near_point(c1, -1.0 / 3, -1.0 / 3, t))
        ok = false, why += " crit(1)";
    const auto c2 = find_critical_points(parse_symbol("xi1^3 - 3*xi1*xi2^2 + xi1^2 + xi2^2"));
    const double r3 = 1.0 / std::sqrt(3.0);
    if (c2.size() != 4 || !near_point(c2, 0, 0, t) || !near_point(c2, 1.0 / 3, r3, t) ||
        !near_point(c2, 1.0 / 3, -r3, t) || !near_point(c2, -2.0 / 3, 0, t))
        ok = false, why += " crit(2)";
    const auto c3 = find_critical_points(parse_symbol("xi1^3 + xi1*xi2"));
    if (c3.size() != 1 || !near_point(c3, 0, 0, t) || c3[0].rank.rank != 2) ok = false, why += " crit(3)";
    return {ok, ok ? "goldens, 9 normal forms and critical points reproduced" : "mismatch:" + why};
}

// ------------------------------------------------------------------ 6
double ladder_constant(const Symbol& a, const GridSpec& g, const EstimateSpec& s) {
    EstimateParams p;
    p.max_iterations = 200;
    p.tolerance = 1e-8;
    return estimate_constant(a, s, g, EstimateMethod::power_iteration, p, 6).value;
}

Outcome invariant_stability() {
    EstimateSpec s;
    s.weight = WeightSpec::bracket(1.0);
    s.smoother = SmootherSpec::invariant(0.5);
    s.T = 4.0;
    s.time_samples = 81;
    const double h = M_PI / 2.0;  // fixed spacing: the frequency box stays [-2, 2]^n

    const Symbol ring = parse_symbol("(rho^2-1)^2", 1);
    std::vector<double> v1;
    for (int n : {256, 512, 1024}) v1.push_back(ladder_constant(ring, GridSpec::cube(1, n * h, n), s));
    const Symbol cusp = parse_symbol("xi1*xi2^2");
    std::vector<double> v2;
    for (int n : {128, 256}) v2.push_back(ladder_constant(cusp, GridSpec::cube(2, n * h, n), s));
    const double s1 = relative_spread(v1), s2 = relative_spread(v2);
    return {s1 < 0.2 && s2 < 0.2, "ring constants " + fmt("%.5f", v1[0]) + "/" + fmt("%.5f", v1[1]) + "/" +
                                      fmt("%.5f", v1[2]) + " spread " + fmt("%.3g", s1) + "; xi1*xi2^2 " +
                                      fmt("%.5f", v2[0]) + "/" + fmt("%.5f", v2[1]) + " spread " + fmt("%.3g", s2)};
}

// ------------------------------------------------------------------ 7
Outcome concentration() {
    const Symbol ring = parse_symbol("(rho^2-1)^2", 1);
    const GridSpec g = GridSpec::cube(1, 0.5 * 32768, 32768);
    EstimateSpec inv;
    inv.weight = WeightSpec::bracket(1.0);
    inv.smoother = SmootherSpec::invariant(0.5);
    inv.T = 4000.0;
    inv.time_samples = 4001;
    EstimateSpec cls = inv;
    cls.smoother = SmootherSpec::classical(1.5);
    const ConcentrationResult r = concentration_study(ring, cls, inv, g, {0.2, 0.1, 0.05, 0.025},
                                                      [](const Vec& xi) { return xi.norm() - 1.0; }, 7);
    const bool ok = std::abs(r.slope + 0.5) <= 0.15 && r.invariant_variation < 0.2;
    return {ok, "slope " + fmt("%.4f", r.slope) + ", invariant variation " + fmt("%.3g", r.invariant_variation)};
}

// ------------------------------------------------------------------ 8
Outcome decomposition() {
    bool ok = true;
    std::string why;
    const Polynomial cubic = *parse_symbol("xi1^3 - xi1").polynomial();
    const MonotoneDecomposition d = monotone_decomposition(cubic, 0, GridSpec::cube(1, 40.0, 256));
    const auto& roots = d.slices.at(0).roots;
    const double r = 1.0 / std::sqrt(3.0);
    if (roots.size() != 2 || std::abs(roots[0] + r) > 1e-10 || std::abs(roots[1] - r) > 1e-10)
        ok = false, why += " breakpoints";
    if (d.piece_count() != 3) ok = false, why += " pieces";

    double eta_max = 0.0;
    const GridSpec g2 = GridSpec::cube(2, 20.0, 64);
    for (const auto& e : normal_form_catalog()) {
        const Polynomial* p = e.symbol.polynomial();
        if (!p) continue;
        const GridSpec g = p->dimension() == 2 ? g2 : GridSpec::cube(p->dimension(), 20.0, 16);
        for (int axis = 0; axis < p->dimension(); ++axis) {
            const DecompositionAudit au = audit_decomposition(*p, monotone_decomposition(*p, axis, g), g);
            eta_max = std::max(eta_max, au.eta_max);
            if (!au.sign_constant || !au.covers) ok = false, why += " audit:" + e.name;
        }
    }
    if (eta_max > 1.0 + 1e-12) ok = false, why += " eta";

    const GridSpec ga = GridSpec::cube(2, 32.0, 64);
    const ComplexField phi = random_band_limited(ga, half_band(ga), 8);
    const AssembledEstimate as = assemble_polynomial_estimate(*parse_symbol("xi1*xi2^2").polynomial(), 1.0, phi,
                                                              4.0, 64);
    if (!std::isfinite(as.combined) || !(as.combined <= as.axis_sum * (1 + 1e-9))) ok = false, why += " assembled";
    return {ok, ok ? "breakpoints +-" + fmt("%.11f", roots.at(1)) + ", max eta " + fmt("%.6f", eta_max) +
                         ", combined " + fmt("%.4f", as.combined) + " <= axis sum " + fmt("%.4f", as.axis_sum)
                   : "mismatch:" + why};
}

// ------------------------------------------------------------------ 9
Outcome time_dependent() {
    const GridSpec g = GridSpec::cube(1, 40.0, 256);
    const Symbol a = parse_symbol("xi1^2");
    const ComplexField phi = random_band_limited(g, half_band(g), 9);
    EstimateSpec s;
    s.weight = WeightSpec::bracket(1.0);
    s.smoother = SmootherSpec::invariant(0.5);
    s.T = 10.0;
    s.time_samples = 801;
    const double ref = spacetime_norm(a, s, phi);
    const double k2 = timedep_norm(a, TimeCoefficient::constant(2.0), s, phi, -s.T / 2, s.T / 2).value;
    const double dev_const = std::abs(k2 - ref) / ref;

    EstimateSpec sl = s;
    sl.time_samples = 801;
    const TimeCoefficient lor = TimeCoefficient::lorentzian();
    const double tau_side = timedep_norm(a, lor, sl, phi, 0.0, 50.0).value;
    const double t_side = timedep_norm_direct(a, lor, sl, phi, 0.0, 50.0, 40001);
    const double dev_lor = std::abs(tau_side - t_side) / t_side;
    return {dev_const < 1e-6 && dev_lor < 1e-4,
            "const c=2 deviation " + fmt("%.3g", dev_const) + ", 1/(1+t^2) deviation " + fmt("%.3g", dev_lor)};
}

// ------------------------------------------------------------------ 10
Outcome canonical_equivalence() {
    const Symbol sigma = parse_symbol("xi1^2 + xi2^2");
    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    const FrequencyMap psi = FrequencyMap::linear(shear);
    const CutoffSpec gamma = CutoffSpec::annulus(0.5, 2.0, 0.25);
    EstimateSpec s;
    s.weight = WeightSpec::bracket(1.0);
    s.smoother = SmootherSpec::invariant(0.5);
    s.T = 4.0;
    s.time_samples = 64;
    const EquivalenceStudy coarse = equivalence_study(sigma, psi, gamma, s, GridSpec::cube(2, 32.0, 64), 16, 10);
    const EquivalenceStudy fine = equivalence_study(sigma, psi, gamma, s, GridSpec::cube(2, 64.0, 128), 16, 10);
    const double drift = std::abs(fine.band / coarse.band - 1.0);

    bool ranks = true;
    int points = 0;
    for (const char* e : {"xi1^3 + xi1*xi2", "xi1^2 + xi2^2", "xi1^3 + xi2^3 + xi1*xi2"}) {
        for (const RankPair& rp : rank_invariance_check(parse_symbol(e), psi)) {
            ranks = ranks && rp.rank_a == rp.rank_sigma;
            ++points;
        }
    }
    const bool ok = coarse.band < 5.0 && fine.band < 5.0 && drift <= 0.2 && ranks && points > 0;
    return {ok, "band " + fmt("%.4f", coarse.band) + " -> " + fmt("%.4f", fine.band) + " (drift " +
                    fmt("%.3g", drift) + "), ranks equal at " + std::to_string(points) + " critical points"};
}

// ------------------------------------------------------------------ 11
Outcome hoshiro_domination() {
    int symbols = 0;
    std::size_t points = 0;
    double worst = -1e300;
    bool ok = true;
    for (const auto& e : normal_form_catalog()) {
        if (!e.symbol.is_homogeneous()) continue;
        const GridSpec g = GridSpec::cube(e.symbol.dimension(), 20.0, 64);
        const double m = e.symbol.order();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec xi = g.frequency_at(i);
            const double lhs = std::sqrt(std::abs(e.symbol(xi)));
            const double rhs = std::sqrt(xi.norm() * gradient_norm(e.symbol, xi) / m);
            worst = std::max(worst, lhs - rhs);
            if (lhs > rhs * (1.0 + 1e-12) + 1e-14) ok = false;
            ++points;
        }
        ++symbols;
    }
    return {ok && symbols > 0, std::to_string(symbols) + " homogeneous symbols, " + std::to_string(points) +
                                   " lattice points, max(lhs - rhs) " + fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ 12
std::string csv_of(const Json& config) {
    const RunResult r = run_experiment(config);
    std::string out = csv_header() + "\n";
    for (const auto& row : r.rows) out += csv_line(row) + "\n";
    return out;
}

Outcome determinism() {
    const std::vector<Json> configs = {
        {{"command", "propagate"}, {"symbol", "xi1^3 + xi2^3"}, {"grid", "2,20,64"}, {"seed", 5}},
        {{"command", "estimate"}, {"symbol", "(rho^2-1)^2"}, {"dimension", 1}, {"study", "refinement"},
         {"smoother", "invariant:0.5"}, {"T", 4.0}, {"time_samples", 33}, {"seed", 5},
         {"ladder", {"1,80,64", "1,160,128"}}},
        {{"command", "estimate"}, {"symbol", "xi1*xi2^2"}, {"method", "ensemble"}, {"ensemble_size", 12},
         {"grid", "2,24,32"}, {"T", 3.0}, {"time_samples", 24}, {"seed", 5}},
        {{"command", "compare"}, {"model", {{"l", 1}, {"m", 3}}}, {"fields", 2}, {"seed", 5}},
        {{"command", "canonical"}, {"symbol", "xi1^2 + xi2^2"}, {"map", "shear"}, {"study", "equivalence"},
         {"grid", "2,32,64"}, {"ensemble_size", 4}, {"T", 2.0}, {"time_samples", 24}, {"seed", 5}},
    };
    int same = 0;
    for (const Json& c : configs) {
        set_worker_count(1);
        const std::string one = csv_of(c);
        set_worker_count(8);
        const std::string eight = csv_of(c);
        const std::string again = csv_of(c);
        same += (one == eight && eight == again);
    }
    set_worker_count(1);
    return {same == static_cast<int>(configs.size()),
            std::to_string(same) + "/" + std::to_string(configs.size()) + " configs byte-identical at 1 and 8 workers"};
}

}  // namespace

// Optional arguments select criteria by number; default is all of them.
int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"spectral exactness", spectral_exactness},
        {"translation identity", translation_identity},
        {"comparison factor", comparison_factor},
        {"weighted norm, a = xi", weighted_norm},
        {"classification goldens", classification},
        {"invariant constants under refinement", invariant_stability},
        {"concentration scaling", concentration},
        {"monotone decomposition", decomposition},
        {"time-dependent coefficient", time_dependent},
        {"canonical equivalence", canonical_equivalence},
        {"Hoshiro domination", hoshiro_domination},
        {"determinism across workers", determinism},
    };
    std::vector<bool> selected(criteria.size(), argc < 2);
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
    }
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!selected[k]) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
