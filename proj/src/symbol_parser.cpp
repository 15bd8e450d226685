#include "smoothlab/symbol_parser.hpp"

#include <cctype>
#include <cmath>
#include <memory>

#include <boost/math/tools/roots.hpp>

#include "smoothlab/classify.hpp"
#include "smoothlab/error.hpp"

namespace smoothlab {

namespace {

struct Node {
    enum Kind { number, xi, rho, add, sub, mul, div, neg, pow } kind;
    double value = 0.0;  // number
    int axis = 0;        // xi
    std::size_t pos = 0;
    std::unique_ptr<Node> lhs, rhs;
};
using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Kind k, std::size_t pos, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->pos = pos;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse_all() {
        NodePtr e = expr();
        skip();
        if (i_ != s_.size()) throw ParseError(i_, "unexpected character '" + std::string(1, s_[i_]) + "'");
        return e;
    }

private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool accept(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    bool accept_word(const std::string& w) {
        skip();
        if (s_.compare(i_, w.size(), w) != 0) return false;
        const std::size_t end = i_ + w.size();
        if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
        i_ = end;
        return true;
    }

    NodePtr expr() {
        NodePtr l = term();
        for (;;) {
            const std::size_t p = (skip(), i_);
            if (accept('+')) l = make(Node::add, p, std::move(l), term());
            else if (accept('-')) l = make(Node::sub, p, std::move(l), term());
            else return l;
        }
    }
    NodePtr term() {
        NodePtr l = unary();
        for (;;) {
            const std::size_t p = (skip(), i_);
            if (accept('*')) l = make(Node::mul, p, std::move(l), unary());
            else if (accept('/')) l = make(Node::div, p, std::move(l), unary());
            else return l;
        }
    }
    NodePtr unary() {
        const std::size_t p = (skip(), i_);
        if (accept('-')) return make(Node::neg, p, unary());
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        const std::size_t p = (skip(), i_);
        if (accept('^')) return make(Node::pow, p, std::move(base), unary());
        return base;
    }
    NodePtr primary() {
        skip();
        const std::size_t p = i_;
        if (i_ >= s_.size()) throw ParseError(p, "unexpected end of input");
        const char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(i_), &used);
            } catch (const std::exception&) {
                throw ParseError(p, "malformed number");
            }
            i_ += used;
            auto n = make(Node::number, p);
            n->value = v;
            return n;
        }
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) throw ParseError(i_, "expected ')'");
            return e;
        }
        for (int a = 1; a <= 3; ++a) {
            if (accept_word("xi" + std::to_string(a))) {
                auto n = make(Node::xi, p);
                n->axis = a - 1;
                return n;
            }
        }
        if (accept_word("rho")) return make(Node::rho, p);
        if (accept_word("radial")) {
            if (!accept('(')) throw ParseError(i_, "expected '(' after radial");
            NodePtr e = expr();
            if (!accept(')')) throw ParseError(i_, "expected ')'");
            return e;
        }
        if (s_.compare(i_, 8, "catalog:") == 0)
            throw ParseError(p, "catalog:<name> must be the whole expression");
        throw ParseError(p, "unexpected character '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

struct Usage {
    int max_axis = -1;
    bool rho = false;
};

void scan(const Node& n, Usage& u) {
    if (n.kind == Node::xi) u.max_axis = std::max(u.max_axis, n.axis);
    if (n.kind == Node::rho) u.rho = true;
    if (n.lhs) scan(*n.lhs, u);
    if (n.rhs) scan(*n.rhs, u);
}

// Constant subexpressions (exponents, divisors).
double constant_value(const Node& n) {
    switch (n.kind) {
        case Node::number: return n.value;
        case Node::neg: return -constant_value(*n.lhs);
        case Node::add: return constant_value(*n.lhs) + constant_value(*n.rhs);
        case Node::sub: return constant_value(*n.lhs) - constant_value(*n.rhs);
        case Node::mul: return constant_value(*n.lhs) * constant_value(*n.rhs);
        case Node::div: return constant_value(*n.lhs) / constant_value(*n.rhs);
        case Node::pow: return std::pow(constant_value(*n.lhs), constant_value(*n.rhs));
        default: throw ParseError(n.pos, "expected a constant expression");
    }
}

bool integer_exponents(const Node& n) {
    if (n.kind == Node::pow) {
        const double e = constant_value(*n.rhs);
        if (e < 0 || e != std::floor(e) || e > 64) return false;
    }
    if (n.kind == Node::div) {
        Usage u;
        scan(*n.rhs, u);
        if (u.rho || u.max_axis >= 0) return false;
    }
    return (!n.lhs || integer_exponents(*n.lhs)) && (!n.rhs || integer_exponents(*n.rhs));
}

// Polynomial in xi (or in rho, mapped onto xi1 of a 1-d polynomial).
Polynomial to_polynomial(const Node& n, int dim) {
    switch (n.kind) {
        case Node::number: return Polynomial::constant(dim, n.value);
        case Node::xi: return Polynomial::variable(dim, n.axis);
        case Node::rho: return Polynomial::variable(1, 0);
        case Node::neg: return -1.0 * to_polynomial(*n.lhs, dim);
        case Node::add: return to_polynomial(*n.lhs, dim) + to_polynomial(*n.rhs, dim);
        case Node::sub: return to_polynomial(*n.lhs, dim) - to_polynomial(*n.rhs, dim);
        case Node::mul: return to_polynomial(*n.lhs, dim) * to_polynomial(*n.rhs, dim);
        case Node::div: {
            const double d = constant_value(*n.rhs);
            if (d == 0.0) throw ParseError(n.pos, "division by zero");
            return (1.0 / d) * to_polynomial(*n.lhs, dim);
        }
        case Node::pow: {
            const double e = constant_value(*n.rhs);
            if (e < 0 || e != std::floor(e))
                throw ParseError(n.pos, "polynomial exponents must be non-negative integers");
            return to_polynomial(*n.lhs, dim).pow(static_cast<unsigned>(e));
        }
    }
    throw ParseError(n.pos, "unsupported expression");
}

// Value and first two derivatives in rho.
struct Jet {
    double v, d, dd;
};

Jet eval_jet(const Node& n, double r) {
    switch (n.kind) {
        case Node::number: return {n.value, 0.0, 0.0};
        case Node::rho: return {r, 1.0, 0.0};
        case Node::neg: {
            const Jet a = eval_jet(*n.lhs, r);
            return {-a.v, -a.d, -a.dd};
        }
        case Node::add:
        case Node::sub: {
            const Jet a = eval_jet(*n.lhs, r), b = eval_jet(*n.rhs, r);
            const double s = n.kind == Node::add ? 1.0 : -1.0;
            return {a.v + s * b.v, a.d + s * b.d, a.dd + s * b.dd};
        }
        case Node::mul: {
            const Jet a = eval_jet(*n.lhs, r), b = eval_jet(*n.rhs, r);
            return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd};
        }
        case Node::div: {
            const Jet a = eval_jet(*n.lhs, r), b = eval_jet(*n.rhs, r);
            const Jet inv{1.0 / b.v, -b.d / (b.v * b.v),
                          2 * b.d * b.d / (b.v * b.v * b.v) - b.dd / (b.v * b.v)};
            return {a.v * inv.v, a.d * inv.v + a.v * inv.d, a.dd * inv.v + 2 * a.d * inv.d + a.v * inv.dd};
        }
        case Node::pow: {
            const Jet a = eval_jet(*n.lhs, r);
            const double p = constant_value(*n.rhs);
            if (a.v == 0.0 && p == 0.0) return {1.0, 0.0, 0.0};
            const double f = std::pow(a.v, p);
            const double f1 = p == 0.0 ? 0.0 : p * std::pow(a.v, p - 1.0);
            const double f2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(a.v, p - 2.0);
            return {f, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
        }
        case Node::xi: break;
    }
    throw ParseError(n.pos, "xi variables cannot appear in a radial profile");
}

// Zeros of f' on (0, 200] located by sign scan plus bracketing; rho = 0 is
// included when f'(0) vanishes.
std::vector<double> scan_derivative_zeros(const std::function<double(double)>& df) {
    std::vector<double> zeros;
    if (std::abs(df(0.0)) < 1e-12) zeros.push_back(0.0);
    const int samples = 20000;
    const double top = 200.0;
    double prev_r = 1e-9, prev = df(prev_r);
    for (int k = 1; k <= samples; ++k) {
        const double r = top * k / samples;
        const double cur = df(r);
        if (cur == 0.0) {
            zeros.push_back(r);
        } else if (std::isfinite(prev) && std::isfinite(cur) && (prev < 0) != (cur < 0) && prev != 0.0) {
            boost::uintmax_t iters = 100;
            const auto bracket = boost::math::tools::toms748_solve(
                df, prev_r, r, prev, cur, boost::math::tools::eps_tolerance<double>(50), iters);
            zeros.push_back(0.5 * (bracket.first + bracket.second));
        }
        prev_r = r;
        prev = cur;
    }
    return zeros;
}

RadialProfile jet_profile(std::shared_ptr<const Node> root) {
    RadialProfile prof;
    prof.f = [root](double r) { return eval_jet(*root, r).v; };
    prof.df = [root](double r) { return eval_jet(*root, r).d; };
    prof.d2f = [root](double r) { return eval_jet(*root, r).dd; };
    prof.derivative_zeros = scan_derivative_zeros(prof.df);
    // Growth order from the far field; homogeneity by exact scaling on samples.
    const double f1 = prof.f(1e4), f2 = prof.f(2e4);
    prof.order = (f1 != 0.0 && f2 != 0.0) ? std::log2(std::abs(f2 / f1)) : 0.0;
    bool homogeneous = true;
    for (double r : {0.3, 1.0, 1.7, 5.0}) {
        const double lhs = prof.f(2.0 * r), rhs = std::pow(2.0, prof.order) * prof.f(r);
        if (std::abs(lhs - rhs) > 1e-9 * (1.0 + std::abs(lhs))) homogeneous = false;
    }
    if (homogeneous) prof.order = std::round(prof.order * 1e9) / 1e9;
    prof.homogeneous = homogeneous;
    return prof;
}

}  // namespace

Symbol parse_symbol(const std::string& text, int dimension) {
    if (dimension < 0 || dimension > kMaxDimension) throw Error(ErrorKind::invalid_argument, "dimension must be 0..3");
    std::size_t lead = 0;
    while (lead < text.size() && std::isspace(static_cast<unsigned char>(text[lead]))) ++lead;
    if (text.compare(lead, 8, "catalog:") == 0) {
        std::string name = text.substr(lead + 8);
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
        try {
            return catalog_symbol(name, dimension);
        } catch (const Error&) {
            throw ParseError(lead + 8, "unknown catalog entry '" + name + "'");
        }
    }
    Parser parser(text);
    NodePtr root = parser.parse_all();
    Usage use;
    scan(*root, use);
    if (use.rho && use.max_axis >= 0) throw ParseError(0, "cannot mix rho with xi variables");

    if (use.rho) {
        const int dim = dimension == 0 ? 2 : dimension;
        if (integer_exponents(*root)) {
            const Polynomial p = to_polynomial(*root, 1);
            std::vector<double> coeffs(static_cast<std::size_t>(std::max(p.degree(), 0)) + 1, 0.0);
            for (const auto& [alpha, c] : p.terms()) coeffs[static_cast<std::size_t>(alpha[0])] = c;
            return Symbol::radial(dim, polynomial_profile(coeffs), text);
        }
        std::shared_ptr<const Node> shared(std::move(root));
        return Symbol::radial(dim, jet_profile(shared), text);
    }

    const int used = use.max_axis + 1;
    const int dim = dimension == 0 ? std::max(used, 1) : dimension;
    if (used > dim) throw ParseError(0, "expression uses xi" + std::to_string(used) + " beyond the requested dimension");
    if (!integer_exponents(*root))
        throw ParseError(root->pos, "polynomial expressions need non-negative integer exponents and constant divisors");
    return Symbol::from_polynomial(to_polynomial(*root, dim));
}

}  // namespace smoothlab
