#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoothlab/grid.hpp"
#include "smoothlab/polynomial.hpp"

namespace smoothlab {

enum class SymbolKind { polynomial, radial, homogeneous_closed_form, composed };

const char* to_string(SymbolKind kind);

/// Profile f of a radial symbol a(xi) = f(|xi|), with derivatives and the zeros
/// of f' on [0, inf). When f is a polynomial in rho its coefficients are kept.
struct RadialProfile {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
    std::vector<double> derivative_zeros;
    std::optional<std::vector<double>> coefficients;  // ascending powers of rho
    double order = 0.0;
    bool homogeneous = false;
};

/// Builds a profile from a univariate polynomial in rho; the zeros of f' on
/// [0, inf) are found with the companion-matrix root finder.
RadialProfile polynomial_profile(std::vector<double> ascending);

/// Immutable bundle a, grad a, Hess a plus metadata. Cheap to copy.
class Symbol {
public:
    using ValueFn = std::function<double(const Vec&)>;
    using GradientFn = std::function<Vec(const Vec&)>;
    using HessianFn = std::function<Mat(const Vec&)>;

    Symbol() = default;

    static Symbol from_polynomial(Polynomial p, std::string name = {});
    /// Radial symbol in `dimension` variables. If the profile is a polynomial in
    /// rho with only even powers, the equivalent polynomial in xi is attached.
    static Symbol radial(int dimension, RadialProfile profile, std::string name = {});
    /// Positively homogeneous closed form. Missing derivatives fall back to
    /// finite differences.
    static Symbol homogeneous(int dimension, double order, ValueFn value, GradientFn gradient,
                              HessianFn hessian, std::string name = {});
    /// a = p / q for polynomials p, q (both homogeneous); a(0) := 0.
    static Symbol rational(Polynomial p, Polynomial q, std::string name = {});
    /// a(xi) = sigma(M xi) for an invertible matrix M.
    static Symbol compose_linear(const Symbol& sigma, const Mat& m, std::string name = {});

    bool valid() const { return impl_ != nullptr; }
    int dimension() const;
    double order() const;
    SymbolKind kind() const;
    bool is_homogeneous() const;
    const std::string& name() const;
    bool has_analytic_gradient() const;

    double operator()(const Vec& xi) const;
    Vec gradient(const Vec& xi) const;
    Mat hessian(const Vec& xi) const;

    /// Fourth-order central differences with one Richardson step,
    /// h = eps^(1/3) * max(1, |xi|).
    Vec fd_gradient(const Vec& xi) const;
    Mat fd_hessian(const Vec& xi) const;

    const Polynomial* polynomial() const;
    const RadialProfile* radial_profile() const;
    /// Highest-order homogeneous part, when it is known in closed form.
    std::optional<Symbol> principal_part() const;

private:
    struct Impl;
    explicit Symbol(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    const Impl& impl() const;

    std::shared_ptr<const Impl> impl_;
};

/// Euclidean norm of the gradient.
double gradient_norm(const Symbol& a, const Vec& xi);

}  // namespace smoothlab
