#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smoothlab/grid.hpp"

namespace smoothlab {

using MultiIndex = std::array<int, 3>;

/// Real polynomial in xi_1..xi_n (n <= 3), stored sparsely by multi-index.
/// Zero coefficients are never stored, so degree() is max |alpha| over stored terms.
class Polynomial {
public:
    explicit Polynomial(int dimension = 1);

    static Polynomial constant(int dimension, double c);
    static Polynomial variable(int dimension, int axis);
    static Polynomial monomial(int dimension, double c, const MultiIndex& alpha);

    int dimension() const { return dim_; }
    /// -1 for the zero polynomial.
    int degree() const;
    bool is_zero() const { return terms_.empty(); }
    const std::map<MultiIndex, double>& terms() const { return terms_; }
    double coefficient(const MultiIndex& alpha) const;

    double operator()(const Vec& xi) const;
    Vec gradient(const Vec& xi) const;
    Mat hessian(const Vec& xi) const;

    Polynomial derivative(int axis) const;
    Polynomial homogeneous_part(int degree) const;
    Polynomial principal_part() const { return homogeneous_part(degree()); }
    bool is_homogeneous() const;
    /// Same polynomial viewed in a higher (or equal) dimension.
    Polynomial embedded(int dimension) const;

    /// Coefficients (ascending powers of xi_axis) of the univariate restriction
    /// t -> p(xi with xi_axis replaced by t).
    std::vector<double> restrict_to_axis(int axis, const Vec& xi) const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(const Polynomial& other);
    Polynomial& operator*=(double c);
    Polynomial pow(unsigned exponent) const;

    std::string to_string() const;

private:
    void add_term(const MultiIndex& alpha, double c);

    int dim_;
    std::map<MultiIndex, double> terms_;
};

Polynomial operator+(Polynomial a, const Polynomial& b);
Polynomial operator-(Polynomial a, const Polynomial& b);
Polynomial operator*(Polynomial a, const Polynomial& b);
Polynomial operator*(double c, Polynomial a);

/// Horner evaluation of ascending coefficients.
double evaluate_univariate(std::span<const double> ascending, double t);
std::vector<double> differentiate_univariate(std::span<const double> ascending);

/// All complex roots of a univariate polynomial (ascending coefficients) as the
/// eigenvalues of its companion matrix. Exact zero roots are split off first.
std::vector<cplx> complex_roots(std::span<const double> ascending);

/// Sorted distinct real roots: eigenvalues with |Im| < imag_tol are accepted (and
/// near-real pairs that are genuine multiple roots by residual), then roots closer
/// than merge_tol * max(1, |root|), or clusters of residual-zero roots within
/// 1e-4 * max(1, |root|), are merged into their mean.
std::vector<double> real_roots(std::span<const double> ascending, double imag_tol = 1e-9,
                               double merge_tol = 1e-8);

}  // namespace smoothlab
