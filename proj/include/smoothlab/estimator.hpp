#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smoothlab/grid.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/symbol.hpp"

namespace smoothlab {

struct WeightSpec {
    enum class Kind { none, bracket, homogeneous, axis_bracket };
    Kind kind = Kind::bracket;
    /// bracket: s in w = <x>^{-s};  homogeneous: delta in w = |x|^delta;
    /// axis_bracket: s in w = <x_axis>^{-s}.
    double value = 1.0;
    int axis = 0;

    static WeightSpec bracket(double s) { return {Kind::bracket, s, 0}; }
    static WeightSpec homogeneous(double delta) { return {Kind::homogeneous, delta, 0}; }
    static WeightSpec axis_bracket(double s, int axis) { return {Kind::axis_bracket, s, axis}; }
    static WeightSpec unit() { return {Kind::none, 0.0, 0}; }
    /// s > 1/2 for the bracket weights; always false for the others.
    bool decays_enough() const {
        return (kind == Kind::bracket || kind == Kind::axis_bracket) && value > 0.5;
    }
    std::string describe() const;
};

/// w(x) on the physical grid. For |x|^delta with delta < 0 the cell containing
/// x = 0 carries the cell average of |x|^delta (finite for delta > -n).
std::vector<double> weight_values(const GridSpec& grid, const WeightSpec& w);

/// Mean of |x|^delta over the box prod_j [-b_j, b_j].
double cell_average_power(std::span<const double> half_widths, double delta);

struct SmootherSpec {
    enum class Kind { identity, classical, bracket, invariant_power, invariant_bracket, hoshiro, custom };
    Kind kind = Kind::identity;
    /// eta for classical/bracket/invariant kinds, s for hoshiro.
    double exponent = 0.5;
    double scale = 1.0;
    std::function<double(const Vec&)> custom;  // kind == custom

    static SmootherSpec identity() { return {}; }
    static SmootherSpec classical(double eta) { return make(Kind::classical, eta); }
    static SmootherSpec bracket(double eta) { return make(Kind::bracket, eta); }
    static SmootherSpec invariant(double eta = 0.5) { return make(Kind::invariant_power, eta); }
    static SmootherSpec invariant_bracket(double eta = 0.5) { return make(Kind::invariant_bracket, eta); }
    static SmootherSpec hoshiro(double s) { return make(Kind::hoshiro, s); }
    static SmootherSpec from_function(std::function<double(const Vec&)> f) {
        SmootherSpec s;
        s.kind = Kind::custom;
        s.custom = std::move(f);
        return s;
    }
    std::string describe() const;

private:
    static SmootherSpec make(Kind k, double e) {
        SmootherSpec s;
        s.kind = k;
        s.exponent = e;
        return s;
    }
};

/// sigma(xi) on the lattice. Negative powers of a vanishing base give 0.
std::vector<double> smoother_values(const GridSpec& grid, const Symbol& a, const SmootherSpec& s);
double smoother_value(const Symbol& a, const SmootherSpec& s, const Vec& xi);

struct EstimateSpec {
    WeightSpec weight;
    SmootherSpec smoother;
    double T = 1.0;           // window [-T, T]
    int time_samples = 64;    // trapezoid nodes, >= 16

    void validate() const;
};

/// Trapezoid nodes and weights on [begin, end].
struct TimeGrid {
    std::vector<double> t;
    std::vector<double> weight;
    static TimeGrid trapezoid(double begin, double end, int samples);
};

/// The discretised family w(x) sigma(D) e^{i t a(D)} on one grid, with the
/// symbol, smoother and weight tabulated once.
class SpacetimeOperator {
public:
    SpacetimeOperator(const GridSpec& grid, const Symbol& a, const WeightSpec& w, const SmootherSpec& s);
    SpacetimeOperator(const GridSpec& grid, std::vector<double> symbol_values, std::vector<double> weights,
                      std::vector<double> smoother);

    const GridSpec& grid() const { return grid_; }

    /// sum_t q_t || w sigma(D) e^{i t a(D)} phi ||^2 for frequency coefficients phi^.
    double squared_norm(const std::vector<cplx>& hat, const TimeGrid& times) const;
    /// The normal operator K = sum_t q_t e^{-ita} sigma* w^2 sigma e^{ita} on
    /// frequency coefficients; Hermitian and positive semi-definite.
    std::vector<cplx> apply_normal(const std::vector<cplx>& hat, const TimeGrid& times) const;

private:
    GridSpec grid_;
    std::vector<double> a_, w2_, sigma_;
};

/// Trapezoid approximation of ||w sigma(D) e^{ita(D)} phi||_{L^2([-T,T] x torus)}.
double spacetime_norm(const Symbol& a, const EstimateSpec& spec, const ComplexField& phi);
/// spacetime_norm / ||phi||.
double smoothing_ratio(const Symbol& a, const EstimateSpec& spec, const ComplexField& phi);

enum class EstimateMethod { ensemble, power_iteration };
const char* to_string(EstimateMethod m);

struct EstimateParams {
    int ensemble_size = 64;
    int max_iterations = 200;
    double tolerance = 1e-8;
    /// Support of the random fields (ensemble members and the power-iteration
    /// start vector); empty means every lattice mode.
    SupportPredicate support;
};

struct ConstantEstimate {
    double value = 0.0;
    EstimateMethod method = EstimateMethod::power_iteration;
    int iterations = 0;
    double residual = 0.0;       // ||K v - lambda v|| / lambda, or 0 for ensembles
    std::uint64_t fingerprint = 0;  // seed of the arg-max member / start vector
    bool converged = true;
    std::vector<double> rayleigh;   // per-iteration Rayleigh quotients
};

ConstantEstimate estimate_constant(const Symbol& a, const EstimateSpec& spec, const GridSpec& grid,
                                   EstimateMethod method, const EstimateParams& params, std::uint64_t seed);

struct RefinementRow {
    GridSpec grid;
    ConstantEstimate estimate;
};

/// One estimate per grid, same seed for every rung.
std::vector<RefinementRow> refinement_study(const Symbol& a, const EstimateSpec& spec,
                                            const std::vector<GridSpec>& grids, EstimateMethod method,
                                            const EstimateParams& params, std::uint64_t seed);

/// Relative spread (max - min) / min of the values.
double relative_spread(const std::vector<double>& values);

struct ConcentrationRow {
    double width = 0.0;
    double ratio_classical = 0.0;
    double ratio_invariant = 0.0;
    std::size_t modes = 0;
};

struct ConcentrationResult {
    std::vector<ConcentrationRow> rows;
    double slope = 0.0;                // d log(classical/invariant) / d log width
    double invariant_variation = 0.0;  // relative spread of ratio_invariant
};

/// For each width w the test field is supported on {w/2 < offset(xi) < w}, where
/// offset is a signed distance to the centre set (e.g. |xi| - 1), localised in x
/// by a Gaussian window of width 2/w. Throws if a width leaves no lattice modes.
ConcentrationResult concentration_study(const Symbol& a, const EstimateSpec& classical,
                                        const EstimateSpec& invariant, const GridSpec& grid,
                                        const std::vector<double>& widths,
                                        const std::function<double(const Vec&)>& offset, std::uint64_t seed);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace smoothlab
