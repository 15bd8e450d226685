#include "smoothlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "smoothlab/error.hpp"

namespace smoothlab {

namespace {

int total_degree(const MultiIndex& alpha) { return alpha[0] + alpha[1] + alpha[2]; }

double power(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

double monomial_value(const MultiIndex& alpha, const Vec& xi, int dim) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= power(xi[a], alpha[a]);
    return v;
}

}  // namespace

Polynomial::Polynomial(int dimension) : dim_(dimension) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw Error(ErrorKind::invalid_argument, "polynomial dimension must be 1, 2 or 3");
}

Polynomial Polynomial::constant(int dimension, double c) {
    Polynomial p(dimension);
    p.add_term({0, 0, 0}, c);
    return p;
}

Polynomial Polynomial::variable(int dimension, int axis) {
    if (axis < 0 || axis >= dimension)
        throw Error(ErrorKind::invalid_argument, "variable index outside polynomial dimension");
    MultiIndex alpha{0, 0, 0};
    alpha[axis] = 1;
    return monomial(dimension, 1.0, alpha);
}

Polynomial Polynomial::monomial(int dimension, double c, const MultiIndex& alpha) {
    Polynomial p(dimension);
    for (int a = dimension; a < kMaxDimension; ++a)
        if (alpha[a] != 0) throw Error(ErrorKind::invalid_argument, "monomial uses an axis beyond dimension");
    p.add_term(alpha, c);
    return p;
}

void Polynomial::add_term(const MultiIndex& alpha, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(alpha, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [alpha, c] : terms_) d = std::max(d, total_degree(alpha));
    return d;
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::operator()(const Vec& xi) const {
    double s = 0.0;
    for (const auto& [alpha, c] : terms_) s += c * monomial_value(alpha, xi, dim_);
    return s;
}

Vec Polynomial::gradient(const Vec& xi) const {
    Vec g = Vec::Zero(dim_);
    for (const auto& [alpha, c] : terms_) {
        for (int a = 0; a < dim_; ++a) {
            if (alpha[a] == 0) continue;
            MultiIndex beta = alpha;
            beta[a] -= 1;
            g[a] += c * alpha[a] * monomial_value(beta, xi, dim_);
        }
    }
    return g;
}

Mat Polynomial::hessian(const Vec& xi) const {
    Mat h = Mat::Zero(dim_, dim_);
    for (const auto& [alpha, c] : terms_) {
        for (int a = 0; a < dim_; ++a) {
            for (int b = a; b < dim_; ++b) {
                MultiIndex beta = alpha;
                double factor = c;
                factor *= beta[a];
                if (beta[a] == 0) continue;
                beta[a] -= 1;
                factor *= beta[b];
                if (beta[b] == 0) continue;
                beta[b] -= 1;
                const double v = factor * monomial_value(beta, xi, dim_);
                h(a, b) += v;
                if (a != b) h(b, a) += v;
            }
        }
    }
    return h;
}

Polynomial Polynomial::derivative(int axis) const {
    Polynomial d(dim_);
    for (const auto& [alpha, c] : terms_) {
        if (alpha[axis] == 0) continue;
        MultiIndex beta = alpha;
        beta[axis] -= 1;
        d.add_term(beta, c * alpha[axis]);
    }
    return d;
}

Polynomial Polynomial::homogeneous_part(int degree) const {
    Polynomial p(dim_);
    for (const auto& [alpha, c] : terms_)
        if (total_degree(alpha) == degree) p.add_term(alpha, c);
    return p;
}

bool Polynomial::is_homogeneous() const {
    const int d = degree();
    return std::all_of(terms_.begin(), terms_.end(),
                       [d](const auto& t) { return total_degree(t.first) == d; });
}

Polynomial Polynomial::embedded(int dimension) const {
    if (dimension < dim_) throw Error(ErrorKind::invalid_argument, "cannot embed into a lower dimension");
    Polynomial p(dimension);
    p.terms_ = terms_;
    return p;
}

std::vector<double> Polynomial::restrict_to_axis(int axis, const Vec& xi) const {
    std::vector<double> coeffs(static_cast<std::size_t>(std::max(degree(), 0)) + 1, 0.0);
    for (const auto& [alpha, c] : terms_) {
        double v = c;
        for (int a = 0; a < dim_; ++a)
            if (a != axis) v *= power(xi[a], alpha[a]);
        coeffs[static_cast<std::size_t>(alpha[axis])] += v;
    }
    return coeffs;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    if (other.dim_ > dim_) *this = embedded(other.dim_);
    for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    if (other.dim_ > dim_) *this = embedded(other.dim_);
    for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& other) {
    Polynomial out(std::max(dim_, other.dim_));
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : other.terms_)
            out.add_term({a[0] + b[0], a[1] + b[1], a[2] + b[2]}, ca * cb);
    *this = std::move(out);
    return *this;
}

Polynomial& Polynomial::operator*=(double c) {
    if (c == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [alpha, v] : terms_) v *= c;
    return *this;
}

Polynomial Polynomial::pow(unsigned exponent) const {
    Polynomial result = constant(dim_, 1.0);
    Polynomial base = *this;
    while (exponent > 0) {
        if (exponent & 1u) result *= base;
        exponent >>= 1u;
        if (exponent > 0) base *= base;
    }
    return result;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    // Highest degree first reads naturally.
    std::vector<std::pair<MultiIndex, double>> ordered(terms_.begin(), terms_.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        return total_degree(x.first) > total_degree(y.first);
    });
    for (const auto& [alpha, c] : ordered) {
        double mag = c;
        if (!first) {
            os << (c < 0 ? " - " : " + ");
            mag = std::abs(c);
        } else if (c < 0) {
            os << "-";
            mag = -c;
        }
        first = false;
        const bool is_const = total_degree(alpha) == 0;
        if (mag != 1.0 || is_const) {
            os << mag;
            if (!is_const) os << "*";
        }
        bool first_var = true;
        for (int a = 0; a < dim_; ++a) {
            if (alpha[a] == 0) continue;
            if (!first_var) os << "*";
            first_var = false;
            os << "xi" << (a + 1);
            if (alpha[a] > 1) os << "^" << alpha[a];
        }
    }
    return os.str();
}

Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
Polynomial operator*(double c, Polynomial a) { return a *= c; }

double evaluate_univariate(std::span<const double> ascending, double t) {
    double v = 0.0;
    for (std::size_t k = ascending.size(); k-- > 0;) v = v * t + ascending[k];
    return v;
}

std::vector<double> differentiate_univariate(std::span<const double> ascending) {
    std::vector<double> d;
    for (std::size_t k = 1; k < ascending.size(); ++k) d.push_back(static_cast<double>(k) * ascending[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

namespace {

// Drops negligible leading coefficients; returns the effective degree (-1 for zero).
int effective_degree(std::span<const double> c) {
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return -1;
    int d = static_cast<int>(c.size()) - 1;
    while (d > 0 && std::abs(c[static_cast<std::size_t>(d)]) <= 1e-14 * scale) --d;
    return d;
}

}  // namespace

std::vector<cplx> complex_roots(std::span<const double> ascending) {
    const int degree = effective_degree(ascending);
    std::vector<cplx> roots;
    if (degree <= 0) return roots;
    int low = 0;
    while (low < degree && ascending[static_cast<std::size_t>(low)] == 0.0) ++low;
    for (int i = 0; i < low; ++i) roots.emplace_back(0.0, 0.0);
    const int d = degree - low;
    if (d == 0) return roots;
    const double lead = ascending[static_cast<std::size_t>(degree)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) companion(i, d - 1) = -ascending[static_cast<std::size_t>(low + i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::convergence, "companion matrix eigenvalue iteration failed");
    for (int i = 0; i < d; ++i) roots.push_back(solver.eigenvalues()[i]);
    return roots;
}

std::vector<double> real_roots(std::span<const double> ascending, double imag_tol, double merge_tol) {
    const auto roots = complex_roots(ascending);
    std::vector<double> real;
    for (const auto& r : roots) {
        const double re = r.real();
        const double im = std::abs(r.imag());
        if (im < imag_tol) {
            real.push_back(re);
            continue;
        }
        // A multiple root splits into a near-real cluster of size ~ eps^(1/k);
        // keep it when the polynomial genuinely vanishes at the real part.
        if (im < 1e-4 * std::max(1.0, std::abs(re))) {
            double scale = 0.0, p = 0.0, pw = 1.0;
            for (double c : ascending) {
                scale += std::abs(c) * pw;
                p += c * pw;
                pw *= re;
            }
            if (std::abs(p) <= 1e-12 * std::max(scale, 1e-300)) real.push_back(re);
        }
    }
    std::sort(real.begin(), real.end());
    auto vanishes = [&](double x) {
        double scale = 0.0, p = 0.0, pw = 1.0;
        for (double c : ascending) {
            scale += std::abs(c) * pw;
            p += c * pw;
            pw *= x;
        }
        return std::abs(p) <= 1e-12 * std::max(scale, 1e-300);
    };
    // Clusters from one multiple root collapse to their mean, which is far
    // closer to the true root than any member.
    std::vector<double> merged;
    std::size_t members = 0;
    double sum = 0.0;
    for (double r : real) {
        if (!merged.empty()) {
            const double gap = std::abs(r - merged.back()), s = std::max(1.0, std::abs(r));
            if (gap <= merge_tol * s || (gap <= 1e-4 * s && vanishes(r) && vanishes(merged.back()))) {
                sum += r;
                merged.back() = sum / static_cast<double>(++members);
                continue;
            }
        }
        merged.push_back(r);
        sum = r;
        members = 1;
    }
    // Newton polish keeps simple roots at full precision.
    const auto d = differentiate_univariate(ascending);
    for (double& r : merged) {
        for (int it = 0; it < 3; ++it) {
            const double dp = evaluate_univariate(d, r);
            if (dp == 0.0) break;
            const double step = evaluate_univariate(ascending, r) / dp;
            if (!std::isfinite(step) || std::abs(step) > 1e-6 * std::max(1.0, std::abs(r))) break;
            r -= step;
        }
    }
    return merged;
}

}  // namespace smoothlab
