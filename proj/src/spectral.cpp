#include "smoothlab/spectral.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "smoothlab/error.hpp"
#include "smoothlab/fft.hpp"
#include "smoothlab/parallel.hpp"

namespace smoothlab {

namespace {

std::string describe(const Vec& xi) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (int a = 0; a < xi.size(); ++a) os << (a ? ", " : "") << xi[a];
    os << ")";
    return os.str();
}

void require_space(const ComplexField& f, Space s, const char* what) {
    if (f.space() != s) throw Error(ErrorKind::shape_mismatch, what);
}

ComplexField to_frequency(const ComplexField& phi) {
    require_space(phi, Space::physical, "expected a physical-space field");
    return transform(phi, Direction::forward);
}

}  // namespace

ComplexField transform(const ComplexField& field, Direction direction) {
    const Space want = direction == Direction::forward ? Space::physical : Space::frequency;
    require_space(field, want, "field space does not match transform direction");
    if (field.size() != field.grid().size())
        throw Error(ErrorKind::shape_mismatch, "field length does not match grid size");
    std::vector<cplx> data = field.data();
    if (direction == Direction::forward) {
        fft_forward(field.grid(), data);
        return ComplexField(field.grid(), std::move(data), Space::frequency);
    }
    fft_inverse(field.grid(), data);
    return ComplexField(field.grid(), std::move(data), Space::physical);
}

std::vector<cplx> sample_multiplier(const GridSpec& grid, const Multiplier& m) {
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        out[i] = m(xi);
        if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
            throw Error(ErrorKind::non_finite, "multiplier is not finite at lattice point xi = " + describe(xi));
    }
    return out;
}

ComplexField apply_multiplier(const ComplexField& field, const Multiplier& m) {
    ComplexField hat = to_frequency(field);
    const auto mult = sample_multiplier(field.grid(), m);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= mult[i];
    return transform(hat, Direction::inverse);
}

std::vector<double> sample_symbol(const GridSpec& grid, const Symbol& a) {
    if (a.dimension() != grid.dimension())
        throw Error(ErrorKind::shape_mismatch, "symbol and grid dimensions differ");
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        out[i] = a(xi);
        if (!std::isfinite(out[i]))
            throw Error(ErrorKind::non_finite, "symbol is not real-finite at lattice point xi = " + describe(xi));
    }
    return out;
}

ComplexField propagate(const ComplexField& phi, const Symbol& a, double t) {
    ComplexField hat = to_frequency(phi);
    const auto av = sample_symbol(phi.grid(), a);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= std::polar(1.0, t * av[i]);
    return transform(hat, Direction::inverse);
}

double band_low_weight(double rho, double radius) {
    if (rho <= radius) return 1.0;
    if (rho >= 2.0 * radius) return 0.0;
    const double s = (rho - radius) / radius;
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

std::pair<ComplexField, ComplexField> band_split(const ComplexField& phi, const BandSpec& band) {
    if (!(band.radius > 0.0)) throw Error(ErrorKind::invalid_argument, "band radius must be positive");
    if (2.0 * band.radius > phi.grid().nyquist())
        throw Error(ErrorKind::domain, "band outer radius 2R exceeds the grid Nyquist frequency");
    ComplexField low = to_frequency(phi);
    ComplexField high = low;
    for (std::size_t i = 0; i < low.size(); ++i) {
        const double w = band_low_weight(phi.grid().frequency_at(i).norm(), band.radius);
        low[i] *= w;
        high[i] *= 1.0 - w;
    }
    return {transform(low, Direction::inverse), transform(high, Direction::inverse)};
}

namespace {

// Coefficients live in frequency space; normalisation is applied by the caller.
ComplexField random_coefficients(const GridSpec& grid, const SupportPredicate& support, std::uint64_t seed) {
    ComplexField hat(grid, Space::frequency);
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        if (support && !support(xi)) continue;
        const auto idx = grid.unravel(i);
        std::int64_t k[3] = {0, 0, 0};
        for (int a = 0; a < grid.dimension(); ++a) k[a] = grid.signed_index(a, idx[a]);
        std::mt19937_64 rng(mix_seed(seed, k[0], k[1], k[2]));
        std::normal_distribution<double> normal;
        const double re = normal(rng);
        const double im = normal(rng);
        hat[i] = cplx(re, im);
        any = true;
    }
    if (!any) throw Error(ErrorKind::domain, "support predicate selects no lattice mode");
    return hat;
}

void normalise(ComplexField& f) {
    const double n = f.l2_norm();
    if (!(n > 0.0)) throw Error(ErrorKind::domain, "cannot normalise a zero field");
    f *= 1.0 / n;
}

}  // namespace

ComplexField random_band_limited(const GridSpec& grid, const SupportPredicate& support, std::uint64_t seed) {
    ComplexField hat = random_coefficients(grid, support, seed);
    ComplexField phi = transform(hat, Direction::inverse);
    normalise(phi);
    return phi;
}

ComplexField random_localized(const GridSpec& grid, const SupportPredicate& support, std::uint64_t seed,
                              double width, const Vec& centre) {
    if (!(width > 0.0)) throw Error(ErrorKind::invalid_argument, "window width must be positive");
    if (centre.size() != grid.dimension())
        throw Error(ErrorKind::shape_mismatch, "window centre has the wrong dimension");
    ComplexField phi = random_band_limited(grid, support, seed);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double r2 = (grid.position_at(i) - centre).squaredNorm();
        phi[i] *= std::exp(-0.5 * r2 / (width * width));
    }
    ComplexField hat = transform(phi, Direction::forward);
    for (std::size_t i = 0; i < hat.size(); ++i)
        if (support && !support(grid.frequency_at(i))) hat[i] = 0.0;
    phi = transform(hat, Direction::inverse);
    normalise(phi);
    return phi;
}

cplx evaluate_at(const ComplexField& frequency_field, const Vec& x) {
    require_space(frequency_field, Space::frequency, "point evaluation needs frequency coefficients");
    const GridSpec& g = frequency_field.grid();
    if (x.size() != g.dimension()) throw Error(ErrorKind::shape_mismatch, "point has the wrong dimension");
    cplx sum = 0.0;
    for (std::size_t i = 0; i < frequency_field.size(); ++i) {
        if (frequency_field[i] == cplx(0.0)) continue;
        sum += frequency_field[i] * std::polar(1.0, g.frequency_at(i).dot(x));
    }
    return sum / std::sqrt(static_cast<double>(g.size()));
}

}  // namespace smoothlab
