#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "smoothlab/grid.hpp"
#include "smoothlab/symbol.hpp"

namespace smoothlab {

enum class Direction { forward, inverse };

/// Unitary transform between physical and frequency representations.
ComplexField transform(const ComplexField& field, Direction direction);

using Multiplier = std::function<cplx(const Vec&)>;
using SupportPredicate = std::function<bool(const Vec&)>;

/// m sampled on the (FFT-ordered) frequency lattice; throws naming the first
/// lattice point where m is not finite.
std::vector<cplx> sample_multiplier(const GridSpec& grid, const Multiplier& m);

/// F^{-1}[m F field] for a physical-space field.
ComplexField apply_multiplier(const ComplexField& field, const Multiplier& m);

/// Symbol values a(xi) on the lattice; throws if any value is not real-finite.
std::vector<double> sample_symbol(const GridSpec& grid, const Symbol& a);

/// e^{i t a(D)} phi, exact in time.
ComplexField propagate(const ComplexField& phi, const Symbol& a, double t);

struct BandSpec {
    double radius = 1.0;  // R; the transition occupies R <= |xi| <= 2R
};

/// Low-pass weight: 1 on |xi| <= R, 0 on |xi| >= 2R, C^1 smoothstep in between.
double band_low_weight(double rho, double radius);

/// Smooth partition phi = phi_l + phi_h with supp phi_l^ in |xi| < 2R and
/// supp phi_h^ in |xi| > R.
std::pair<ComplexField, ComplexField> band_split(const ComplexField& phi, const BandSpec& band);

/// Complex Gaussian coefficients on the supported modes (every mode when the
/// predicate is empty), unit physical norm.
/// Each mode's coefficient depends only on (seed, signed multi-index), so the
/// same seed gives the same mode values on any grid sharing the extents.
ComplexField random_band_limited(const GridSpec& grid, const SupportPredicate& support,
                                 std::uint64_t seed);

/// random_band_limited, multiplied by exp(-|x - centre|^2 / (2 width^2)), projected
/// back onto the support and renormalised: a wave packet that stays band-limited.
ComplexField random_localized(const GridSpec& grid, const SupportPredicate& support,
                              std::uint64_t seed, double width, const Vec& centre);

/// u(x) at an arbitrary point from unitary frequency coefficients (trigonometric
/// interpolation of the grid function).
cplx evaluate_at(const ComplexField& frequency_field, const Vec& x);

}  // namespace smoothlab
