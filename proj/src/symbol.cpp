#include "smoothlab/symbol.hpp"

#include <cmath>
#include <limits>
#include <type_traits>

#include "smoothlab/error.hpp"

namespace smoothlab {

const char* to_string(SymbolKind kind) {
    switch (kind) {
        case SymbolKind::polynomial: return "polynomial";
        case SymbolKind::radial: return "radial";
        case SymbolKind::homogeneous_closed_form: return "homogeneous-closed-form";
        case SymbolKind::composed: return "composed";
    }
    return "unknown";
}

struct Symbol::Impl {
    int dim = 1;
    double order = 0.0;
    SymbolKind kind = SymbolKind::polynomial;
    bool homogeneous = false;
    std::string name;
    ValueFn value;
    GradientFn grad;  // empty: finite differences
    HessianFn hess;   // empty: finite differences of the gradient
    std::optional<Polynomial> poly;
    std::optional<RadialProfile> profile;
    std::optional<Symbol> principal;
};

namespace {

void require_dim(const Vec& xi, int dim) {
    if (xi.size() != dim) throw Error(ErrorKind::shape_mismatch, "point dimension does not match symbol");
}

std::vector<double> trimmed(std::vector<double> c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    return c;
}

// sum_k c_{2k} (xi . xi)^k, or nullopt if any odd power is present.
std::optional<Polynomial> even_profile_as_polynomial(const std::vector<double>& c, int dim) {
    for (std::size_t k = 1; k < c.size(); k += 2)
        if (c[k] != 0.0) return std::nullopt;
    Polynomial rho2(dim);
    for (int a = 0; a < dim; ++a) rho2 += Polynomial::variable(dim, a).pow(2);
    Polynomial out(dim);
    Polynomial power = Polynomial::constant(dim, 1.0);
    for (std::size_t k = 0; k < c.size(); k += 2) {
        if (c[k] != 0.0) out += c[k] * power;
        power *= rho2;
    }
    return out;
}

Polynomial substitute_linear(const Polynomial& p, const Mat& m) {
    const int dim = static_cast<int>(m.cols());
    std::array<Polynomial, 3> rows{Polynomial(dim), Polynomial(dim), Polynomial(dim)};
    for (int j = 0; j < m.rows(); ++j)
        for (int k = 0; k < dim; ++k)
            if (m(j, k) != 0.0) rows[j] += m(j, k) * Polynomial::variable(dim, k);
    Polynomial out(dim);
    for (const auto& [alpha, c] : p.terms()) {
        Polynomial term = Polynomial::constant(dim, c);
        for (int j = 0; j < p.dimension(); ++j)
            if (alpha[j] > 0) term *= rows[j].pow(static_cast<unsigned>(alpha[j]));
        out += term;
    }
    return out;
}

}  // namespace

RadialProfile polynomial_profile(std::vector<double> ascending) {
    auto c = trimmed(std::move(ascending));
    RadialProfile prof;
    const auto dc = differentiate_univariate(c);
    const auto d2c = differentiate_univariate(dc);
    prof.f = [c](double r) { return evaluate_univariate(c, r); };
    prof.df = [dc](double r) { return evaluate_univariate(dc, r); };
    prof.d2f = [d2c](double r) { return evaluate_univariate(d2c, r); };
    for (double r : real_roots(dc))
        if (r >= -1e-12) prof.derivative_zeros.push_back(std::max(r, 0.0));
    prof.order = static_cast<double>(c.size() - 1);
    int nonzero = 0;
    for (double v : c) nonzero += v != 0.0;
    prof.homogeneous = nonzero == 1 && c.size() > 1;
    prof.coefficients = c;
    return prof;
}

const Symbol::Impl& Symbol::impl() const {
    if (!impl_) throw Error(ErrorKind::invalid_argument, "empty symbol");
    return *impl_;
}

Symbol Symbol::from_polynomial(Polynomial p, std::string name) {
    if (p.degree() < 0) p = Polynomial::constant(p.dimension(), 0.0);
    auto impl = std::make_shared<Impl>();
    impl->dim = p.dimension();
    impl->order = std::max(p.degree(), 0);
    impl->kind = SymbolKind::polynomial;
    impl->homogeneous = p.is_homogeneous() && p.degree() > 0;
    impl->name = name.empty() ? p.to_string() : std::move(name);
    impl->value = [p](const Vec& xi) { return p(xi); };
    impl->grad = [p](const Vec& xi) { return p.gradient(xi); };
    impl->hess = [p](const Vec& xi) { return p.hessian(xi); };
    if (!impl->homogeneous && p.degree() > 0) {
        Polynomial top = p.principal_part();
        impl->principal = from_polynomial(top);
    }
    impl->poly = std::move(p);
    return Symbol(std::move(impl));
}

Symbol Symbol::radial(int dimension, RadialProfile profile, std::string name) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw Error(ErrorKind::invalid_argument, "radial symbol dimension must be 1, 2 or 3");
    if (!profile.f || !profile.df)
        throw Error(ErrorKind::invalid_argument, "radial profile needs f and f'");
    auto impl = std::make_shared<Impl>();
    impl->dim = dimension;
    impl->order = profile.order;
    impl->kind = SymbolKind::radial;
    impl->homogeneous = profile.homogeneous;
    impl->name = std::move(name);
    if (profile.coefficients) {
        impl->poly = even_profile_as_polynomial(*profile.coefficients, dimension);
        const auto& c = *profile.coefficients;
        if (!profile.homogeneous && c.size() > 1) {
            std::vector<double> top(c.size(), 0.0);
            top.back() = c.back();
            impl->principal = radial(dimension, polynomial_profile(top));
        }
    }
    if (impl->poly) {
        const Polynomial p = *impl->poly;
        impl->value = [p](const Vec& xi) { return p(xi); };
        impl->grad = [p](const Vec& xi) { return p.gradient(xi); };
        impl->hess = [p](const Vec& xi) { return p.hessian(xi); };
    } else {
        const auto f = profile.f, df = profile.df, d2f = profile.d2f;
        impl->value = [f](const Vec& xi) { return f(xi.norm()); };
        impl->grad = [df](const Vec& xi) -> Vec {
            const double r = xi.norm();
            if (r == 0.0) return Vec::Zero(xi.size());
            return (df(r) / r) * xi;
        };
        if (d2f) {
            impl->hess = [df, d2f](const Vec& xi) -> Mat {
                const int n = static_cast<int>(xi.size());
                const double r = xi.norm();
                if (r == 0.0) return d2f(0.0) * Mat::Identity(n, n);
                const Vec u = xi / r;
                const Mat uu = u * u.transpose();
                return d2f(r) * uu + (df(r) / r) * (Mat::Identity(n, n) - uu);
            };
        }
    }
    if (impl->name.empty()) impl->name = "radial";
    impl->profile = std::move(profile);
    return Symbol(std::move(impl));
}

Symbol Symbol::homogeneous(int dimension, double order, ValueFn value, GradientFn gradient,
                           HessianFn hessian, std::string name) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw Error(ErrorKind::invalid_argument, "symbol dimension must be 1, 2 or 3");
    if (!value) throw Error(ErrorKind::invalid_argument, "symbol needs a value function");
    auto impl = std::make_shared<Impl>();
    impl->dim = dimension;
    impl->order = order;
    impl->kind = SymbolKind::homogeneous_closed_form;
    impl->homogeneous = true;
    impl->name = name.empty() ? "closed-form" : std::move(name);
    impl->value = std::move(value);
    impl->grad = std::move(gradient);
    impl->hess = std::move(hessian);
    return Symbol(std::move(impl));
}

Symbol Symbol::rational(Polynomial p, Polynomial q, std::string name) {
    if (!p.is_homogeneous() || !q.is_homogeneous() || q.is_zero())
        throw Error(ErrorKind::invalid_argument, "rational symbol needs homogeneous numerator and denominator");
    const int dim = std::max(p.dimension(), q.dimension());
    p = p.embedded(dim);
    q = q.embedded(dim);
    const double order = p.degree() - q.degree();
    if (name.empty()) name = "(" + p.to_string() + ")/(" + q.to_string() + ")";
    auto value = [p, q](const Vec& xi) {
        const double d = q(xi);
        return d == 0.0 ? 0.0 : p(xi) / d;
    };
    auto gradient = [p, q](const Vec& xi) -> Vec {
        const double d = q(xi);
        if (d == 0.0) return Vec::Zero(xi.size());
        return (p.gradient(xi) * d - p(xi) * q.gradient(xi)) / (d * d);
    };
    auto hessian = [p, q](const Vec& xi) -> Mat {
        const double d = q(xi);
        const int n = static_cast<int>(xi.size());
        if (d == 0.0) return Mat::Zero(n, n);
        const double pv = p(xi);
        const Vec gp = p.gradient(xi), gq = q.gradient(xi);
        return p.hessian(xi) / d - (gp * gq.transpose() + gq * gp.transpose()) / (d * d) -
               pv * q.hessian(xi) / (d * d) + 2.0 * pv * (gq * gq.transpose()) / (d * d * d);
    };
    return homogeneous(dim, order, value, gradient, hessian, std::move(name));
}

Symbol Symbol::compose_linear(const Symbol& sigma, const Mat& m, std::string name) {
    const int dim = sigma.dimension();
    if (m.rows() != dim || m.cols() != dim)
        throw Error(ErrorKind::shape_mismatch, "linear map must be square of the symbol dimension");
    if (std::abs(m.determinant()) < 1e-14)
        throw Error(ErrorKind::invalid_argument, "linear map is not invertible");
    auto impl = std::make_shared<Impl>();
    impl->dim = dim;
    impl->order = sigma.order();
    impl->kind = SymbolKind::composed;
    impl->homogeneous = sigma.is_homogeneous();
    impl->name = name.empty() ? sigma.name() + " o linear" : std::move(name);
    const Mat mt = m.transpose();
    impl->value = [sigma, m](const Vec& xi) { return sigma(Vec(m * xi)); };
    impl->grad = [sigma, m, mt](const Vec& xi) -> Vec { return mt * sigma.gradient(Vec(m * xi)); };
    impl->hess = [sigma, m, mt](const Vec& xi) -> Mat { return mt * sigma.hessian(Vec(m * xi)) * m; };
    if (const Polynomial* p = sigma.polynomial()) impl->poly = substitute_linear(*p, m);
    // A homogeneous symbol is its own principal part; principal_part() handles that.
    if (!impl->homogeneous)
        if (auto pp = sigma.principal_part()) impl->principal = compose_linear(*pp, m);
    return Symbol(std::move(impl));
}

int Symbol::dimension() const { return impl().dim; }
double Symbol::order() const { return impl().order; }
SymbolKind Symbol::kind() const { return impl().kind; }
bool Symbol::is_homogeneous() const { return impl().homogeneous; }
const std::string& Symbol::name() const { return impl().name; }
bool Symbol::has_analytic_gradient() const { return static_cast<bool>(impl().grad); }

double Symbol::operator()(const Vec& xi) const {
    require_dim(xi, impl().dim);
    return impl().value(xi);
}

Vec Symbol::gradient(const Vec& xi) const {
    require_dim(xi, impl().dim);
    Vec g = impl().grad ? impl().grad(xi) : fd_gradient(xi);
    if (!g.allFinite()) throw Error(ErrorKind::non_finite, "gradient is not finite");
    return g;
}

Mat Symbol::hessian(const Vec& xi) const {
    require_dim(xi, impl().dim);
    if (impl().hess) return impl().hess(xi);
    return fd_hessian(xi);
}

namespace {

double step_for(const Vec& xi) {
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, xi.norm());
}

// Richardson-extrapolated five-point derivative of a vector-valued function
// along axis `a`; works for scalar and vector results.
template <class F>
auto richardson(const F& f, const Vec& xi, int a, double h) {
    using R = std::decay_t<decltype(f(xi))>;
    auto d = [&](double step) -> R {
        Vec p1 = xi, p2 = xi, m1 = xi, m2 = xi;
        p1[a] += step;
        p2[a] += 2 * step;
        m1[a] -= step;
        m2[a] -= 2 * step;
        return (-f(p2) + 8.0 * f(p1) - 8.0 * f(m1) + f(m2)) / (12.0 * step);
    };
    return R((16.0 * d(0.5 * h) - d(h)) / 15.0);
}

}  // namespace

Vec Symbol::fd_gradient(const Vec& xi) const {
    require_dim(xi, impl().dim);
    const double h = step_for(xi);
    Vec g(impl().dim);
    const auto& value = impl().value;
    for (int a = 0; a < impl().dim; ++a) g[a] = richardson(value, xi, a, h);
    return g;
}

Mat Symbol::fd_hessian(const Vec& xi) const {
    require_dim(xi, impl().dim);
    const int n = impl().dim;
    const double h = step_for(xi);
    Mat hm(n, n);
    auto grad = [this](const Vec& p) -> Vec { return impl().grad ? impl().grad(p) : fd_gradient(p); };
    for (int a = 0; a < n; ++a) hm.col(a) = richardson(grad, xi, a, h);
    return 0.5 * (hm + hm.transpose());
}

const Polynomial* Symbol::polynomial() const { return impl().poly ? &*impl().poly : nullptr; }

const RadialProfile* Symbol::radial_profile() const {
    return impl().profile ? &*impl().profile : nullptr;
}

std::optional<Symbol> Symbol::principal_part() const {
    if (impl().homogeneous) return *this;
    return impl().principal;
}

double gradient_norm(const Symbol& a, const Vec& xi) { return a.gradient(xi).norm(); }

}  // namespace smoothlab
