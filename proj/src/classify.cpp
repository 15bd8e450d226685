#include "smoothlab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/tools/minima.hpp>

#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"

namespace smoothlab {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "true";
        case Verdict::fails: return "false";
        case Verdict::unverified: return "unverified at resolution";
    }
    return "unknown";
}

std::vector<Vec> sphere_samples(int dimension, int count) {
    std::vector<Vec> out;
    if (dimension == 1) {
        out.push_back(Vec::Constant(1, 1.0));
        out.push_back(Vec::Constant(1, -1.0));
        return out;
    }
    count = std::max(count, 4);
    out.reserve(static_cast<std::size_t>(count));
    if (dimension == 2) {
        for (int j = 0; j < count; ++j) {
            const double th = 2.0 * std::numbers::pi * j / count;
            Vec v(2);
            v << std::cos(th), std::sin(th);
            out.push_back(v);
        }
        return out;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
        const double z = 1.0 - 2.0 * (j + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vec v(3);
        v << r * std::cos(golden * j), r * std::sin(golden * j), z;
        out.push_back(v);
    }
    return out;
}

std::vector<double> default_radii() {
    std::vector<double> r;
    for (int k = 0; k <= 7; ++k) r.push_back(std::ldexp(1.0, k));
    return r;
}

bool euler_identity_holds(const Symbol& a, double tol) {
    const auto dirs = sphere_samples(a.dimension(), 64);
    for (double r : {0.5, 1.0, 3.0}) {
        for (const Vec& d : dirs) {
            const Vec xi = r * d;
            const double v = a(xi);
            const Vec g = a.gradient(xi);
            const double lhs = std::abs(a.order() * v - xi.dot(g));
            if (lhs > tol * (1.0 + std::abs(v) + xi.norm() * g.norm())) return false;
        }
    }
    return true;
}

HCheck check_H(const Symbol& a, int samples, double tol) {
    if (!euler_identity_holds(a))
        throw Error(ErrorKind::domain, "check_H needs a positively homogeneous symbol (Euler identity fails)");
    const auto dirs = sphere_samples(a.dimension(), samples);
    HCheck out;
    out.min_gradient = INFINITY;
    std::size_t best = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const double g = a.gradient(dirs[i]).norm();
        if (g < out.min_gradient) {
            out.min_gradient = g;
            best = i;
        }
    }
    out.witness = dirs[best];
    if (a.dimension() == 2 && out.min_gradient > 0.0) {
        // Polish the minimum in angle between the neighbouring samples.
        const double step = 2.0 * std::numbers::pi / static_cast<double>(dirs.size());
        const double th0 = std::atan2(dirs[best][1], dirs[best][0]);
        auto g_at = [&](double th) {
            Vec v(2);
            v << std::cos(th), std::sin(th);
            return a.gradient(v).norm();
        };
        const auto [th, g] = boost::math::tools::brent_find_minima(g_at, th0 - step, th0 + step, 52);
        if (g < out.min_gradient) {
            out.min_gradient = g;
            out.witness = Vec(2);
            out.witness << std::cos(th), std::sin(th);
        }
    }
    out.holds = out.min_gradient > tol;
    return out;
}

namespace {

double bracket(const Vec& xi) { return std::sqrt(1.0 + xi.squaredNorm()); }

LCheck gradient_lower_bound(const Symbol& a, const std::vector<double>& radii, int samples, double tol,
                            double threshold, bool search_critical) {
    const auto dirs = sphere_samples(a.dimension(), samples);
    const double e = a.order() - 1.0;
    LCheck out;
    out.c = INFINITY;
    for (double r : radii) {
        if (r < threshold) continue;
        for (const Vec& d : dirs) {
            const Vec xi = r * d;
            const double q = a.gradient(xi).norm() / std::pow(bracket(xi), e);
            if (q < out.c) {
                out.c = q;
                out.witness = xi;
            }
        }
    }
    out.c_ladder = out.c;
    if (search_critical) {
        const auto crit = find_critical_points(a);
        for (const auto& cp : crit) {
            if (cp.point.norm() < threshold) continue;
            ++out.critical_points_found;
            const double q = a.gradient(cp.point).norm() / std::pow(bracket(cp.point), e);
            if (q < out.c) {
                out.c = q;
                out.witness = cp.point;
            }
        }
    }
    if (!std::isfinite(out.c)) out.c = 0.0;
    out.holds = out.c > tol;
    return out;
}

}  // namespace

LCheck check_L(const Symbol& a, const std::vector<double>& radii, int samples, double tol) {
    return gradient_lower_bound(a, radii, samples, tol, 0.0, true);
}

LCheck check_Lprime(const Symbol& a, double threshold, const std::vector<double>& radii, int samples,
                    double tol) {
    std::vector<double> r{threshold};
    for (double v : radii)
        if (v > threshold) r.push_back(v);
    return gradient_lower_bound(a, r, samples, tol, threshold, true);
}

HessianRank matrix_rank(const Mat& h, double rel_tol, double scale) {
    const int n = static_cast<int>(h.rows());
    HessianRank out;
    const Mat sym = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double largest = std::max(ev.cwiseAbs().maxCoeff(), scale);
    if (largest == 0.0) {
        out.zero = n;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(ev[i]) <= rel_tol * largest) ++out.zero;
        else if (ev[i] > 0) ++out.positive;
        else ++out.negative;
    }
    out.rank = out.positive + out.negative;
    return out;
}

HessianRank hessian_rank(const Symbol& a, const Vec& xi, double rel_tol) {
    const Mat h = a.hessian(xi);
    if (!h.allFinite()) throw Error(ErrorKind::non_finite, "Hessian is not finite");
    // Reference size of the Hessian on the unit sphere: a cubic's Hessian at a
    // root 1e-15 from the origin is tiny in absolute terms but not relative to itself.
    double scale = 0.0;
    for (const Vec& u : sphere_samples(a.dimension(), 8)) {
        const Mat hu = a.hessian(u);
        if (hu.allFinite()) scale = std::max(scale, hu.norm());
    }
    return matrix_rank(h, rel_tol, scale);
}

std::vector<CriticalPoint> find_critical_points(const Symbol& a, double half_width, int seeds_per_axis,
                                                double rank_tol) {
    const int n = a.dimension();
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(seeds_per_axis);
    std::vector<std::optional<Vec>> roots(total);
    parallel_for(total, [&](std::size_t s) {
        Vec xi(n);
        std::size_t rest = s;
        for (int k = n - 1; k >= 0; --k) {
            const auto j = static_cast<double>(rest % static_cast<std::size_t>(seeds_per_axis));
            rest /= static_cast<std::size_t>(seeds_per_axis);
            xi[k] = seeds_per_axis == 1 ? 0.0 : -half_width + 2.0 * half_width * j / (seeds_per_axis - 1);
        }
        // Keep stepping after |grad a| is small: at a degenerate root Newton only
        // converges linearly, and stopping early leaves a spurious Hessian rank.
        auto accept = [&] {
            if (a.gradient(xi).norm() < 1e-12 && xi.cwiseAbs().maxCoeff() <= 1.05 * half_width) roots[s] = xi;
        };
        for (int it = 0; it < 400; ++it) {
            const Vec g = a.gradient(xi);
            if (!g.allFinite()) return;
            if (g.norm() == 0.0) return accept();
            const Mat h = a.hessian(xi);
            if (!h.allFinite()) return;
            Eigen::JacobiSVD<Mat> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            const double cut = 1e-12 * std::max(sv.maxCoeff(), 1e-300);
            Vec step = Vec::Zero(n);
            for (int k = 0; k < n; ++k)
                if (sv[k] > cut) step += (svd.matrixU().col(k).dot(g) / sv[k]) * svd.matrixV().col(k);
            if (step.norm() == 0.0) return accept();
            xi -= step;
            if (!xi.allFinite() || xi.norm() > 1e6) return;
            if (step.norm() <= 1e-15 * std::max(1.0, xi.norm())) return accept();
        }
        accept();
    });
    std::vector<CriticalPoint> out;
    for (const auto& r : roots) {
        if (!r) continue;
        const bool seen = std::any_of(out.begin(), out.end(),
                                      [&](const CriticalPoint& c) { return (c.point - *r).norm() < 1e-6; });
        if (seen) continue;
        CriticalPoint cp;
        cp.point = *r;
        cp.rank = hessian_rank(a, *r, rank_tol);
        cp.nondegenerate = cp.rank.rank == n;
        out.push_back(cp);
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& x, const CriticalPoint& y) {
        for (int k = 0; k < x.point.size(); ++k)
            if (x.point[k] != y.point[k]) return x.point[k] < y.point[k];
        return false;
    });
    return out;
}

bool ClassificationReport::applies(const std::string& theorem) const {
    return std::find(applicable_theorems.begin(), applicable_theorems.end(), theorem) !=
           applicable_theorems.end();
}

namespace {

Verdict from_bool(bool b) { return b ? Verdict::holds : Verdict::fails; }

// |d^alpha r| <= C <xi>^{m-1-|alpha|} for |alpha| <= 2, r = a - a_m, judged by
// the ratio not growing along the radii ladder.
bool remainder_bounded(const Symbol& a, const Symbol& am, const ClassifyOptions& opt) {
    const auto dirs = sphere_samples(a.dimension(), std::min(opt.sphere_samples, 512));
    const double m = a.order();
    std::vector<double> worst;
    for (double r : opt.radii) {
        double w = 0.0;
        for (const Vec& d : dirs) {
            const Vec xi = r * d;
            const double b = bracket(xi);
            const double r0 = std::abs(a(xi) - am(xi)) / std::pow(b, m - 1.0);
            const double r1 = (a.gradient(xi) - am.gradient(xi)).norm() / std::pow(b, m - 2.0);
            const double r2 = (a.hessian(xi) - am.hessian(xi)).norm() / std::pow(b, m - 3.0);
            if (!std::isfinite(r0) || !std::isfinite(r1) || !std::isfinite(r2)) return false;
            w = std::max({w, r0, r1, r2});
        }
        worst.push_back(w);
    }
    if (worst.size() < 2) return true;
    const double head = *std::max_element(worst.begin(), worst.end() - 1);
    return worst.back() <= 2.0 * head + 1e-12;
}

}  // namespace

ClassificationReport classify(const Symbol& a, const ClassifyOptions& opt) {
    ClassificationReport rep;
    rep.symbol = a.name();
    rep.dimension = a.dimension();
    rep.order = a.order();
    rep.kind = a.kind();
    rep.homogeneous = a.is_homogeneous() && euler_identity_holds(a);

    const auto principal = a.principal_part();
    bool principal_dispersive = false;
    if (principal && a.order() > 0) {
        const HCheck h = check_H(*principal, opt.sphere_samples, opt.tolerance);
        rep.h_min_gradient = h.min_gradient;
        principal_dispersive = h.holds;
        rep.H = from_bool(rep.homogeneous && h.holds);
    } else if (a.order() <= 0) {
        rep.H = Verdict::fails;
        rep.notes.push_back("order m <= 0");
    } else {
        rep.notes.push_back("no closed-form principal part; H/HL/L tail not decidable");
    }

    bool tail_ok = false;
    if (principal && a.order() > 0) {
        tail_ok = rep.homogeneous || remainder_bounded(a, *principal, opt);
        rep.HL = from_bool(principal_dispersive && tail_ok);
        rep.notes.push_back("HL/L remainder bounds checked for |alpha| <= 2 only");
    }

    const LCheck l = check_L(a, opt.radii, std::min(opt.sphere_samples, 2000), opt.tolerance);
    rep.l_constant = l.c;
    rep.l_constant_ladder = l.c_ladder;
    if (principal && a.order() > 0) rep.L = from_bool(l.holds && principal_dispersive && tail_ok);
    else if (!l.holds) rep.L = Verdict::fails;

    rep.critical_points = find_critical_points(a, opt.box_half_width, opt.seeds_per_axis, opt.rank_tol);
    double reach = 0.0;
    for (const auto& cp : rep.critical_points) {
        rep.critical_points_isolated = rep.critical_points_isolated && cp.nondegenerate;
        reach = std::max(reach, cp.point.norm());
    }
    rep.lprime_threshold = std::max(1.0, std::exp2(std::ceil(std::log2(std::max(2.0 * reach, 1.0)))));
    const LCheck lp = check_Lprime(a, rep.lprime_threshold, opt.radii, std::min(opt.sphere_samples, 2000),
                                   opt.tolerance);
    rep.lprime_constant = lp.c;
    if (principal && a.order() > 0) rep.Lprime = from_bool(lp.holds && tail_ok);
    else if (!lp.holds) rep.Lprime = Verdict::fails;

    if (const RadialProfile* prof = a.radial_profile()) rep.radial_derivative_zeros = prof->derivative_zeros;

    // Which global estimates apply.
    if (rep.H == Verdict::holds) rep.applicable_theorems.push_back("H-theorem");
    if (rep.L == Verdict::holds) rep.applicable_theorems.push_back("L-theorem");
    if (rep.HL == Verdict::holds) rep.applicable_theorems.push_back("HL-theorem");
    if (const RadialProfile* prof = a.radial_profile()) {
        const bool constant_profile = prof->coefficients && prof->coefficients->size() <= 1;
        if (!constant_profile) rep.applicable_theorems.push_back("radial-theorem");
    }
    if (a.polynomial()) rep.applicable_theorems.push_back("polynomial-theorem");
    if (rep.homogeneous && std::abs(a.order() - 2.0) < 1e-12 && a.dimension() >= 2) {
        // Rank >= n-1 wherever the gradient vanishes on the sphere.
        const auto dirs = sphere_samples(a.dimension(), opt.sphere_samples);
        double gmax = 0.0;
        std::vector<double> g(dirs.size());
        for (std::size_t i = 0; i < dirs.size(); ++i) gmax = std::max(gmax, g[i] = a.gradient(dirs[i]).norm());
        bool ok = true;
        for (std::size_t i = 0; i < dirs.size() && ok; ++i)
            if (g[i] <= opt.tolerance * std::max(gmax, 1.0))
                ok = hessian_rank(a, dirs[i], opt.rank_tol).rank >= a.dimension() - 1;
        if (ok) rep.applicable_theorems.push_back("hessian-theorem");
    }
    if (rep.critical_points_isolated && rep.Lprime == Verdict::holds)
        rep.applicable_theorems.push_back("morse-theorem");
    return rep;
}

std::vector<CatalogEntry> normal_form_catalog(int dimension) {
    const int n = dimension == 0 ? 2 : dimension;
    const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    std::vector<CatalogEntry> out;
    auto nf = [&](const std::string& name, const Polynomial& p) {
        out.push_back({name, Symbol::from_polynomial(p, name), true});
    };
    nf("xi1^3", x.pow(3));
    nf("xi1^3+xi2^3", x.pow(3) + y.pow(3));
    nf("xi1^3-xi1*xi2^2", x.pow(3) - x * y.pow(2));
    nf("xi1^3+xi2^2", x.pow(3) + y.pow(2));
    nf("xi1*xi2^2", x * y.pow(2));
    nf("xi1*xi2^2+xi1^2", x * y.pow(2) + x.pow(2));
    nf("xi1^3+xi1*xi2", x.pow(3) + x * y);
    nf("xi1^3+xi2^3+xi1*xi2", x.pow(3) + y.pow(3) + x * y);
    nf("xi1^3-3*xi1*xi2^2+xi1^2+xi2^2", x.pow(3) - 3.0 * x * y.pow(2) + x.pow(2) + y.pow(2));

    out.push_back({"ring", Symbol::radial(n, polynomial_profile({1.0, 0.0, -2.0, 0.0, 1.0}), "ring"), false});
    {
        const Polynomial num = x.pow(2) * y.pow(2);
        const Polynomial den = x.pow(2) + y.pow(2);
        out.push_back({"crossratio", Symbol::rational(num, den, "crossratio"), false});
    }
    {
        Polynomial q(n), lap(n);
        for (int k = 0; k < n; ++k) {
            q += Polynomial::variable(n, k).pow(4);
            lap += Polynomial::variable(n, k).pow(2);
        }
        out.push_back({"quartic", Symbol::from_polynomial(q + lap, "quartic"), false});
        out.push_back({"laplacian", Symbol::from_polynomial(lap, "laplacian"), false});
    }
    return out;
}

Symbol catalog_symbol(const std::string& name, int dimension) {
    for (auto& e : normal_form_catalog(dimension))
        if (e.name == name) {
            if (dimension != 0 && e.symbol.dimension() != dimension)
                throw Error(ErrorKind::invalid_argument, "catalog entry '" + name + "' is fixed to 2 dimensions");
            return e.symbol;
        }
    throw Error(ErrorKind::invalid_argument, "unknown catalog entry '" + name + "'");
}

}  // namespace smoothlab
