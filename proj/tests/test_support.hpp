#pragma once

#include <cmath>
#include <complex>

#include "smoothlab/grid.hpp"
#include "smoothlab/spectral.hpp"

namespace smoothlab::testing {

inline Vec vec(double a) {
    Vec v(1);
    v << a;
    return v;
}
inline Vec vec(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

inline GridSpec grid2(double lx, double ly, int nx, int ny) {
    const double L[2] = {lx, ly};
    const int N[2] = {nx, ny};
    return GridSpec(2, L, N);
}

inline SupportPredicate half_band(const GridSpec& g) {
    const double b = 0.5 * g.nyquist();
    return [b](const Vec& xi) { return xi.norm() <= b; };
}

/// e^{i k x} sampled on a 1-d grid.
inline ComplexField plane_wave(const GridSpec& g, double k) {
    ComplexField f(g, Space::physical);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, k * g.position_at(i)[0]);
    return f;
}

}  // namespace smoothlab::testing
