#include "smoothlab/timedep.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "smoothlab/error.hpp"

namespace smoothlab {

TimeCoefficient::TimeCoefficient(std::function<double(double)> c, std::string label)
    : c_(std::move(c)), label_(std::move(label)) {
    if (!c_) throw Error(ErrorKind::invalid_argument, "time coefficient needs a function");
}

TimeCoefficient TimeCoefficient::constant(double k) {
    return TimeCoefficient([k](double) { return k; }, "const:" + std::to_string(k));
}

TimeCoefficient TimeCoefficient::lorentzian() {
    return TimeCoefficient([](double t) { return 1.0 / (1.0 + t * t); }, "lorentzian");
}

double TimeCoefficient::primitive(double t) const {
    if (t == 0.0) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(c_, 0.0, t, 15, 1e-14, &err);
    if (!std::isfinite(v)) throw Error(ErrorKind::non_finite, "primitive of the time coefficient is not finite");
    return v;
}

double TimeCoefficient::inverse_primitive(double tau, double lo, double hi) const {
    const double clo = primitive(lo), chi = primitive(hi);
    const bool increasing = chi >= clo;
    if ((tau - clo) * (tau - chi) > 0.0)
        throw Error(ErrorKind::domain, "tau outside the range of C on the search interval");
    if (tau == clo) return lo;
    if (tau == chi) return hi;
    auto g = [&](double t) { return increasing ? primitive(t) - tau : tau - primitive(t); };
    const auto r = boost::math::tools::bisect(g, lo, hi, boost::math::tools::eps_tolerance<double>(48));
    return 0.5 * (r.first + r.second);
}

void TimeCoefficient::require_single_sign(double alpha, double beta) const {
    bool pos = false, neg = false;
    const int samples = 2000;
    for (int k = 1; k < samples; ++k) {
        const double v = c_(alpha + (beta - alpha) * k / samples);
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
    }
    if (pos && neg) throw Error(ErrorKind::domain, "time coefficient changes sign inside the interval");
}

TimedepResult timedep_norm(const Symbol& a, const TimeCoefficient& c, const EstimateSpec& spec,
                           const ComplexField& phi, double alpha, double beta) {
    if (!(beta > alpha)) throw Error(ErrorKind::invalid_argument, "need alpha < beta");
    if (spec.time_samples < 16) throw Error(ErrorKind::invalid_argument, "need at least 16 time samples");
    c.require_single_sign(alpha, beta);
    TimedepResult out;
    out.tau_begin = c.primitive(alpha);
    out.tau_end = c.primitive(beta);
    const double lo = std::min(out.tau_begin, out.tau_end), hi = std::max(out.tau_begin, out.tau_end);
    const TimeGrid tau = TimeGrid::trapezoid(lo, hi, spec.time_samples);
    for (double s : tau.t) out.nodes.push_back(c.inverse_primitive(s, alpha, beta));
    const SpacetimeOperator op(phi.grid(), a, spec.weight, spec.smoother);
    const ComplexField hat = transform(phi, Direction::forward);
    out.value = std::sqrt(op.squared_norm(hat.data(), tau));
    return out;
}

double timedep_norm_direct(const Symbol& a, const TimeCoefficient& c, const EstimateSpec& spec,
                           const ComplexField& phi, double alpha, double beta, int t_samples) {
    if (!(beta > alpha)) throw Error(ErrorKind::invalid_argument, "need alpha < beta");
    TimeGrid t = TimeGrid::trapezoid(alpha, beta, t_samples);
    TimeGrid mapped;
    // Propagate to C(t) and fold |c(t)| into the quadrature weight.
    double running = c.primitive(alpha);
    double prev = alpha;
    for (std::size_t k = 0; k < t.t.size(); ++k) {
        if (k > 0) {
            running += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [&c](double s) { return c(s); }, prev, t.t[k], 10, 1e-14);
            prev = t.t[k];
        }
        mapped.t.push_back(running);
        mapped.weight.push_back(t.weight[k] * std::abs(c(t.t[k])));
    }
    const SpacetimeOperator op(phi.grid(), a, spec.weight, spec.smoother);
    const ComplexField hat = transform(phi, Direction::forward);
    return std::sqrt(op.squared_norm(hat.data(), mapped));
}

}  // namespace smoothlab
