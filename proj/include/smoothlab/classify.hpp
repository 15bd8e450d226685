#pragma once

#include <string>
#include <vector>

#include "smoothlab/symbol.hpp"

namespace smoothlab {

/// Sampled predicates certify at resolution only; `unverified` means the
/// sampler could not decide (e.g. no closed-form principal part).
enum class Verdict { holds, fails, unverified };
const char* to_string(Verdict v);

/// Quasi-uniform unit vectors: {+1, -1} in 1-d, equispaced angles in 2-d,
/// a Fibonacci lattice in 3-d.
std::vector<Vec> sphere_samples(int dimension, int count);

/// Default radii ladder 2^k, k = 0..7.
std::vector<double> default_radii();

/// |m a(xi) - xi . grad a(xi)| <= tol (1 + |a| + |xi||grad a|) on sampled points.
bool euler_identity_holds(const Symbol& a, double tol = 1e-8);

struct HCheck {
    bool holds = false;
    double min_gradient = 0.0;  // min |grad a| over the unit sphere sample
    Vec witness;                // where the minimum was attained
};

/// Requires a positively homogeneous symbol (Euler identity on samples);
/// throws ErrorKind::domain otherwise.
HCheck check_H(const Symbol& a, int sphere_samples = 10000, double tol = 1e-8);

struct LCheck {
    bool holds = false;
    double c = 0.0;         // min |grad a| / <xi>^{m-1} over everything inspected
    double c_ladder = 0.0;  // the same minimum restricted to the radii ladder
    Vec witness;
    int critical_points_found = 0;
};

/// Samples the sphere at every ladder radius and adds a Newton search for
/// exact critical points in [-3, 3]^n, which a radial ladder would miss.
LCheck check_L(const Symbol& a, const std::vector<double>& radii = default_radii(),
               int sphere_samples = 2000, double tol = 1e-8);

/// As check_L restricted to |xi| >= threshold; ladder radii below it are dropped
/// and the threshold itself is always sampled.
LCheck check_Lprime(const Symbol& a, double threshold, const std::vector<double>& radii = default_radii(),
                    int sphere_samples = 2000, double tol = 1e-8);

struct HessianRank {
    int rank = 0;
    int positive = 0;
    int negative = 0;
    int zero = 0;
};

/// Rank = number of |eigenvalues| above rel_tol * max(largest, scale); signature from signs.
HessianRank matrix_rank(const Mat& h, double rel_tol = 1e-8, double scale = 0.0);
/// Uses as scale the largest Hessian norm over a few unit-sphere samples.
HessianRank hessian_rank(const Symbol& a, const Vec& xi, double rel_tol = 1e-8);

struct CriticalPoint {
    Vec point;
    HessianRank rank;
    bool nondegenerate = false;
};

/// Newton iteration (pseudo-inverse step) on grad a = 0 from a uniform lattice
/// of seeds in [-half_width, half_width]^n. Converged roots (|grad a| < 1e-12)
/// are deduplicated at distance 1e-6; divergent seeds are dropped silently.
std::vector<CriticalPoint> find_critical_points(const Symbol& a, double half_width = 3.0,
                                                int seeds_per_axis = 20, double rank_tol = 1e-8);

struct ClassifyOptions {
    int sphere_samples = 10000;
    std::vector<double> radii = default_radii();
    double tolerance = 1e-8;
    double box_half_width = 3.0;
    int seeds_per_axis = 20;
    double rank_tol = 1e-8;
};

struct ClassificationReport {
    std::string symbol;
    int dimension = 0;
    double order = 0.0;
    SymbolKind kind = SymbolKind::polynomial;
    bool homogeneous = false;

    Verdict H = Verdict::unverified;
    double h_min_gradient = 0.0;  // of the principal part, when known
    Verdict L = Verdict::unverified;
    double l_constant = 0.0;
    double l_constant_ladder = 0.0;
    Verdict HL = Verdict::unverified;
    Verdict Lprime = Verdict::unverified;
    double lprime_threshold = 0.0;
    double lprime_constant = 0.0;

    std::vector<CriticalPoint> critical_points;
    bool critical_points_isolated = true;  // every detected point non-degenerate
    std::vector<double> radial_derivative_zeros;
    std::vector<std::string> applicable_theorems;
    std::vector<std::string> notes;

    bool applies(const std::string& theorem) const;
};

ClassificationReport classify(const Symbol& a, const ClassifyOptions& options = {});

struct CatalogEntry {
    std::string name;
    Symbol symbol;
    bool normal_form = false;
};

/// The nine cubic normal forms in two variables followed by the named examples
/// ring = (|xi|^2 - 1)^2, crossratio = xi1^2 xi2^2 / |xi|^2,
/// quartic = xi1^4 + ... + xi_n^4 + |xi|^2 and laplacian = |xi|^2.
/// `dimension` applies to the dimension-free examples (0 means 2).
std::vector<CatalogEntry> normal_form_catalog(int dimension = 0);

/// Lookup by entry name; throws ErrorKind::invalid_argument for unknown names.
Symbol catalog_symbol(const std::string& name, int dimension = 0);

}  // namespace smoothlab
