#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "smoothlab/estimator.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/symbol.hpp"

namespace smoothlab {

using ScalarProfile = std::function<double(double)>;

/// Gaussian wave packets in frequency space: each packet has centre k0 drawn in
/// [k_low, k_high], spatial width sigma_x and position x0 in [x_low, x_high].
/// In 2-d the packets are in xi_1 and every xi_2 mode with y_band_low <= |xi_2|
/// <= y_band_high gets an independent complex amplitude. One-sided fields zero
/// every mode with xi_1 <= 0.
struct PacketOptions {
    int count = 4;
    double k_low = 0.8, k_high = 1.2;
    double sigma_x = 14.0;
    double x_low = -5.0, x_high = 5.0;
    bool one_sided = true;
    double y_band_low = 0.8, y_band_high = 1.2;
};

/// Unit-norm frequency-space field built from packets.
ComplexField wave_packets(const GridSpec& grid, std::uint64_t seed, const PacketOptions& options = {});

/// max over x of | ||e^{itD} phi(x)||_{L^2(one period)} / ||phi|| - 1 | for a 1-d
/// field; the period integral uses 2N equispaced nodes (exact for the
/// trigonometric interpolant).
double translation_identity_check(const ComplexField& phi, const std::vector<double>& x_samples);

struct ModelCheckOptions {
    double x = 0.0;
    double T = 300.0;
    double dt = 0.25;
};

struct ModelCheck {
    double lhs = 0.0;  // order m side
    double rhs = 0.0;  // order l side
    double ratio = 0.0;
    double expected = 0.0;
};

/// 1-d: || |D|^{(m-1)/2} e^{it|D|^m} phi(x) ||_t / || |D|^{(l-1)/2} e^{it|D|^l} phi(x) ||_t,
/// expected sqrt(l/m) for one-sided phi^.
/// 2-d: the same with symbols D_1 |D_2|^{p-1} and smoothers |D_2|^{(p-1)/2}, norms
/// over (t, y) at fixed x; expected 1.
/// `phi_hat` holds frequency coefficients; errors on two-sided 1-d support.
ModelCheck model_equality_check(double l, double m, const ComplexField& phi_hat, int dimension,
                                const ModelCheckOptions& options = {});

/// 1-d comparison case on the lattice: symbols f, g with derivatives, smoothers
/// sigma, tau and the support predicate chi (all functions of xi).
struct ComparisonCase {
    ScalarProfile f, df, g, dg, sigma, tau;
    std::function<bool(double)> chi;
};

struct ComparisonResult {
    double A = 0.0;              // sup over supp chi of |sigma|/|f'|^{1/2} * |g'|^{1/2}/|tau|
    double worst_quotient = 0.0; // max over x samples of LHS / RHS
    std::vector<double> quotients;
};

/// Checks strict monotonicity of f and g on the lattice part of supp chi (throws
/// ErrorKind::domain otherwise) and measures both time norms at each x.
ComparisonResult compare_radial(const ComparisonCase& c, const ComplexField& phi_hat,
                                const std::vector<double>& x_samples, const ModelCheckOptions& options = {});

struct SecondaryCheck {
    double A = 0.0;      // sup |sigma| / |f'|^{1/2} on supp chi
    double ratio = 0.0;  // smoothing ratio of the (f, sigma chi) functional
};

/// Radial symbol f(|xi|) with smoother sigma(|xi|) chi(|xi|); weight <x>^{-s}.
/// Throws ErrorKind::domain if sigma != 0 where f' = 0 on supp chi.
SecondaryCheck secondary_comparison_check(const RadialProfile& f, const ScalarProfile& sigma,
                                          const std::function<bool(double)>& chi, double s,
                                          const ComplexField& phi, double T, int time_samples);

struct SliceRoots {
    Vec xi_prime;               // the lattice point with the axis coordinate set to 0
    std::vector<double> roots;  // sorted real roots of d_j a along the slice
    bool derivative_vanishes = false;  // d_j a is identically zero on the slice
};

struct MonotoneDecomposition {
    int axis = 0;
    std::vector<SliceRoots> slices;           // slice order: lattice order with axis index 0
    std::vector<int> piece;                   // per lattice point; -1 for no piece
    std::vector<std::pair<int, int>> labels;  // piece id -> (k roots on its slice, interval l)
    std::vector<double> eta;                  // |grad a|^{1/2} / sum_j |d_j a|^{1/2}
    int piece_count() const { return static_cast<int>(labels.size()); }
};

/// Breakpoints of the polynomial a along `axis` (0-based) on every lattice slice
/// and the induced pieces of monotonicity. Lattice points within 1e-8 of a root
/// are assigned to no piece.
MonotoneDecomposition monotone_decomposition(const Polynomial& a, int axis, const GridSpec& grid);

struct DecompositionAudit {
    bool sign_constant = true;  // d_j a has one sign on each piece
    bool covers = true;         // every point with d_j a != 0 off the root shell has a piece
    double eta_min = 0.0, eta_max = 0.0;
};
DecompositionAudit audit_decomposition(const Polynomial& a, const MonotoneDecomposition& d,
                                       const GridSpec& grid);

struct AssembledEstimate {
    std::vector<std::vector<double>> piece_ratios;  // [axis][piece], applied to eta(D) phi
    std::vector<double> axis_ratios;                // weight <x_j>^{-s}, smoother |d_j a|^{1/2}, on eta(D) phi
    std::vector<double> shell_ratios;               // [axis], the points no piece claims
    double combined = 0.0;                          // weight <x>^{-s}, smoother |grad a|^{1/2}, on phi
    double axis_sum = 0.0;
    double piece_sum = 0.0;                         // pieces plus shells
    bool bound_holds = false;                       // combined <= axis_sum <= piece_sum (1e-9 slack)
};

/// All ratios are normalised by ||phi||.
AssembledEstimate assemble_polynomial_estimate(const Polynomial& a, double s, const ComplexField& phi, double T,
                                               int time_samples);

}  // namespace smoothlab
