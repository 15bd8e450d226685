#pragma once

#include <functional>
#include <string>
#include <vector>

#include "smoothlab/estimator.hpp"

namespace smoothlab {

/// Scalar coefficient c(t) of i u_t + c(t) a(D) u = 0 with primitive
/// C(t) = int_0^t c(s) ds (adaptive Gauss-Kronrod) and its inverse (bisection).
class TimeCoefficient {
public:
    TimeCoefficient(std::function<double(double)> c, std::string label);

    static TimeCoefficient constant(double k);
    /// c(t) = 1 / (1 + t^2), C(t) = arctan t.
    static TimeCoefficient lorentzian();

    const std::string& label() const { return label_; }
    double operator()(double t) const { return c_(t); }
    double primitive(double t) const;
    /// C^{-1}(tau) searched on [lo, hi]; C must be monotone there.
    double inverse_primitive(double tau, double lo, double hi) const;
    /// Throws ErrorKind::domain if c takes both signs inside (alpha, beta).
    void require_single_sign(double alpha, double beta) const;

private:
    std::function<double(double)> c_;
    std::string label_;
};

struct TimedepResult {
    double value = 0.0;
    double tau_begin = 0.0, tau_end = 0.0;
    std::vector<double> nodes;  // physical times C^{-1}(tau_k)
};

/// || w |c(t)|^{1/2} sigma(D) e^{i C(t) a(D)} phi ||_{L^2([alpha, beta] x torus)}
/// evaluated on C-equispaced nodes: the substitution tau = C(t) turns it into a
/// trapezoid rule in tau over [C(alpha), C(beta)] with spec.time_samples nodes.
TimedepResult timedep_norm(const Symbol& a, const TimeCoefficient& c, const EstimateSpec& spec,
                           const ComplexField& phi, double alpha, double beta);

/// Same quantity by a trapezoid rule directly in t with |c(t)| weights; the
/// independent side of the substitution check.
double timedep_norm_direct(const Symbol& a, const TimeCoefficient& c, const EstimateSpec& spec,
                           const ComplexField& phi, double alpha, double beta, int t_samples);

}  // namespace smoothlab
