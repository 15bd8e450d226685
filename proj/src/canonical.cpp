#include "smoothlab/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "smoothlab/classify.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"

namespace smoothlab {

FrequencyMap FrequencyMap::identity(int dimension) {
    if (dimension < 1 || dimension > kMaxDimension) throw Error(ErrorKind::invalid_argument, "bad dimension");
    return linear(Mat::Identity(dimension, dimension));
}

FrequencyMap FrequencyMap::linear(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDimension)
        throw Error(ErrorKind::shape_mismatch, "linear frequency map needs a square matrix of size 1..3");
    const double det = m.determinant();
    if (!(std::abs(det) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())))
        throw Error(ErrorKind::domain, "linear frequency map is singular");
    FrequencyMap f;
    f.kind_ = Kind::linear;
    f.dim_ = static_cast<int>(m.rows());
    f.m_ = m;
    f.m_inv_ = m.inverse();
    f.homogeneous_ = true;
    return f;
}

FrequencyMap FrequencyMap::radial_warp(int dimension, Profile r, Profile dr, Profile r_inverse, bool homogeneous) {
    if (dimension < 1 || dimension > kMaxDimension) throw Error(ErrorKind::invalid_argument, "bad dimension");
    if (!r || !dr || !r_inverse) throw Error(ErrorKind::invalid_argument, "radial warp needs r, r' and r^{-1}");
    FrequencyMap f;
    f.kind_ = Kind::radial_warp;
    f.dim_ = dimension;
    f.r_ = std::move(r);
    f.dr_ = std::move(dr);
    f.r_inv_ = std::move(r_inverse);
    f.homogeneous_ = homogeneous;
    return f;
}

Vec FrequencyMap::forward(const Vec& xi) const {
    if (xi.size() != dim_) throw Error(ErrorKind::shape_mismatch, "frequency has the wrong dimension");
    if (kind_ == Kind::linear) return m_ * xi;
    const double rho = xi.norm();
    if (rho == 0.0) return xi;
    return (r_(rho) / rho) * xi;
}

Vec FrequencyMap::inverse(const Vec& eta) const {
    if (eta.size() != dim_) throw Error(ErrorKind::shape_mismatch, "frequency has the wrong dimension");
    if (kind_ == Kind::linear) return m_inv_ * eta;
    const double rho = eta.norm();
    if (rho == 0.0) return eta;
    return (r_inv_(rho) / rho) * eta;
}

double FrequencyMap::jacobian_det(const Vec& xi) const {
    if (kind_ == Kind::linear) return m_.determinant();
    const double rho = xi.norm();
    // Radial stretch r' times tangential stretch (r / rho) in n - 1 directions.
    if (rho == 0.0) return std::pow(dr_(0.0), dim_);
    return dr_(rho) * std::pow(r_(rho) / rho, dim_ - 1);
}

FrequencyMap FrequencyMap::inverted() const {
    if (kind_ == Kind::linear) return linear(m_inv_);
    auto r = r_, rinv = r_inv_, dr = dr_;
    return radial_warp(
        dim_, rinv, [r, rinv, dr](double s) { return 1.0 / dr(rinv(s)); }, r, homogeneous_);
}

std::string FrequencyMap::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind_ == Kind::radial_warp) return homogeneous_ ? "radial_warp(homogeneous)" : "radial_warp";
    os << "linear[";
    for (int i = 0; i < dim_; ++i) {
        if (i) os << ';';
        for (int j = 0; j < dim_; ++j) os << (j ? "," : "") << m_(i, j);
    }
    os << ']';
    return os.str();
}

double quintic_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

namespace {

double band(double rho, double inner, double outer, double ramp) {
    const double up = inner <= 0.0 ? 1.0 : quintic_ramp((rho - (inner - ramp)) / ramp);
    const double down = quintic_ramp(((outer + ramp) - rho) / ramp);
    return std::min(up, down);
}

}  // namespace

CutoffSpec CutoffSpec::one() {
    return {[](const Vec&) { return 1.0; }, "one"};
}

CutoffSpec CutoffSpec::annulus(double inner, double outer, double ramp) {
    if (!(ramp > 0.0) || !(outer >= inner) || (inner > 0.0 && inner - ramp < 0.0))
        throw Error(ErrorKind::invalid_argument, "annulus needs 0 <= inner - ramp, inner <= outer, ramp > 0");
    std::ostringstream os;
    os << "annulus(" << inner << ',' << outer << ',' << ramp << ')';
    return {[=](const Vec& xi) { return band(xi.norm(), inner, outer, ramp); }, os.str()};
}

CutoffSpec CutoffSpec::ball(double radius, double ramp) {
    if (!(ramp > 0.0) || !(radius >= 0.0)) throw Error(ErrorKind::invalid_argument, "ball needs radius >= 0, ramp > 0");
    std::ostringstream os;
    os << "ball(" << radius << ',' << ramp << ')';
    return {[=](const Vec& xi) { return quintic_ramp((radius + ramp - xi.norm()) / ramp); }, os.str()};
}

CutoffSpec CutoffSpec::cone(const Vec& direction, double aperture, double inner, double outer, double ramp) {
    if (!(aperture > 0.0) || !(direction.norm() > 0.0))
        throw Error(ErrorKind::invalid_argument, "cone needs a direction and a positive aperture");
    const CutoffSpec radial = annulus(inner, outer, ramp);
    const Vec u = direction.normalized();
    std::ostringstream os;
    os << "cone(" << aperture << ',' << inner << ',' << outer << ',' << ramp << ')';
    return {[=](const Vec& xi) {
                const double rho = xi.norm();
                if (rho == 0.0) return 0.0;
                const double angle = std::acos(std::clamp(xi.dot(u) / rho, -1.0, 1.0));
                return std::min(radial(xi), quintic_ramp((2.0 * aperture - angle) / aperture));
            },
            os.str()};
}

namespace {

ComplexField as_frequency(const ComplexField& f) {
    return f.space() == Space::frequency ? f : transform(f, Direction::forward);
}

// Value of the lattice function at a signed multi-index; zero off the lattice.
cplx lattice_value(const ComplexField& hat, const std::array<long long, 3>& k) {
    const GridSpec& g = hat.grid();
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < g.dimension(); ++a) {
        const long long n = g.points(a);
        if (k[a] < -n / 2 || k[a] >= n / 2) return 0.0;
        idx[a] = static_cast<int>(k[a] < 0 ? k[a] + n : k[a]);
    }
    return hat[g.ravel(idx)];
}

void cubic_weights(double t, double w[4]) {
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

// hat evaluated at an arbitrary frequency eta.
cplx resample(const ComplexField& hat, const Vec& eta) {
    const GridSpec& g = hat.grid();
    const int n = g.dimension();
    std::array<double, 3> p{};
    bool exact = true;
    for (int a = 0; a < n; ++a) {
        const double step = 2.0 * std::numbers::pi / g.extent(a);
        const double nyq = 0.5 * g.points(a) * step;
        if (std::abs(eta[a]) > nyq * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "frequency image " << eta.transpose() << " leaves the Nyquist box";
            throw Error(ErrorKind::domain, os.str());
        }
        p[a] = eta[a] / step;
        exact = exact && std::abs(p[a] - std::round(p[a])) <= 1e-9 * std::max(1.0, std::abs(p[a]));
    }
    if (exact) {
        std::array<long long, 3> k{0, 0, 0};
        for (int a = 0; a < n; ++a) k[a] = std::llround(p[a]);
        return lattice_value(hat, k);
    }
    std::array<long long, 3> base{0, 0, 0};
    double w[3][4] = {{0, 1, 0, 0}, {0, 1, 0, 0}, {0, 1, 0, 0}};
    for (int a = 0; a < n; ++a) {
        base[a] = static_cast<long long>(std::floor(p[a]));
        cubic_weights(p[a] - base[a], w[a]);
    }
    const int r1 = n > 1 ? 4 : 1, r2 = n > 2 ? 4 : 1;
    cplx sum = 0.0;
    for (int i0 = 0; i0 < 4; ++i0)
        for (int i1 = 0; i1 < r1; ++i1)
            for (int i2 = 0; i2 < r2; ++i2) {
                const std::array<long long, 3> k{base[0] + i0 - 1, n > 1 ? base[1] + i1 - 1 : 0,
                                                 n > 2 ? base[2] + i2 - 1 : 0};
                const double wt = w[0][i0] * (n > 1 ? w[1][i1] : 1.0) * (n > 2 ? w[2][i2] : 1.0);
                if (wt != 0.0) sum += wt * lattice_value(hat, k);
            }
    return sum;
}

ComplexField pull_back(const ComplexField& u, const std::function<Vec(const Vec&)>& map,
                       const std::function<double(const Vec&)>& cutoff) {
    const ComplexField hat = as_frequency(u);
    const GridSpec& g = hat.grid();
    ComplexField out(g, Space::frequency);
    parallel_for(g.size(), [&](std::size_t i) {
        const Vec xi = g.frequency_at(i);
        const double c = cutoff(xi);
        if (c == 0.0) return;
        out[i] = c * resample(hat, map(xi));
    });
    return u.space() == Space::frequency ? out : transform(out, Direction::inverse);
}

void require_dimension(const FrequencyMap& psi, const GridSpec& g) {
    if (psi.dimension() != g.dimension())
        throw Error(ErrorKind::shape_mismatch, "frequency map and grid dimensions differ");
}

}  // namespace

ComplexField apply_I(const FrequencyMap& psi, const CutoffSpec& gamma, const ComplexField& u) {
    require_dimension(psi, u.grid());
    return pull_back(u, [&psi](const Vec& xi) { return psi.forward(xi); }, gamma.gamma);
}

ComplexField apply_I_inverse(const FrequencyMap& psi, const CutoffSpec& gamma, const ComplexField& u) {
    require_dimension(psi, u.grid());
    return pull_back(
        u, [&psi](const Vec& xi) { return psi.inverse(xi); },
        [&psi, &gamma](const Vec& xi) { return gamma(psi.inverse(xi)); });
}

double determinant_window(const FrequencyMap& psi, const CutoffSpec& gamma, const GridSpec& grid) {
    require_dimension(psi, grid);
    double c = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        if (gamma(xi) == 0.0) continue;
        const double d = std::abs(psi.jacobian_det(xi));
        if (!(d > 0.0) || !std::isfinite(d)) return INFINITY;
        c = std::max({c, d, 1.0 / d});
    }
    return c;
}

BoundednessProbe boundedness_probe(const FrequencyMap& psi, const CutoffSpec& gamma, double kappa,
                                   const GridSpec& grid, int ensemble_size, std::uint64_t seed) {
    require_dimension(psi, grid);
    if (ensemble_size < 1) throw Error(ErrorKind::invalid_argument, "ensemble size must be positive");
    BoundednessProbe out;
    out.ensemble_size = ensemble_size;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        if (gamma(xi) == 0.0) continue;
        out.det_bound = std::max(out.det_bound, 1.0 / std::sqrt(std::abs(psi.jacobian_det(xi))));
    }
    out.guaranteed = psi.kind() == FrequencyMap::Kind::linear ||
                     (psi.homogeneous() && std::abs(kappa) < 0.5 * grid.dimension());

    const double half_box = 0.5 * grid.nyquist();
    const SupportPredicate support = [&](const Vec& xi) {
        return xi.cwiseAbs().maxCoeff() <= half_box && gamma(psi.inverse(xi)) > 0.0;
    };
    const std::vector<double> w = weight_values(grid, WeightSpec::bracket(-kappa));
    auto weighted = [&](const ComplexField& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * w[i] * std::norm(f[i]);
        return std::sqrt(s * grid.cell_volume());
    };
    double extent = grid.extent(0);
    for (int a = 1; a < grid.dimension(); ++a) extent = std::min(extent, grid.extent(a));
    for (int m = 0; m < ensemble_size; ++m) {
        const std::uint64_t s = mix_seed(seed, m);
        ComplexField u;
        if (m % 2 == 0) {
            u = random_band_limited(grid, support, s);
        } else {
            std::mt19937_64 rng(mix_seed(seed, m, 1));
            std::uniform_real_distribution<double> uc(-0.25 * extent, 0.25 * extent);
            Vec centre(grid.dimension());
            for (int a = 0; a < grid.dimension(); ++a) centre[a] = uc(rng);
            u = random_localized(grid, support, s, extent / 16.0, centre);
        }
        const double den = weighted(u);
        if (den > 0.0) out.value = std::max(out.value, weighted(apply_I(psi, gamma, u)) / den);
    }
    return out;
}

EquivalenceCheck equivalence_check(const Symbol& sigma, const FrequencyMap& psi, const CutoffSpec& gamma,
                                   const EstimateSpec& spec, const ComplexField& phi) {
    if (psi.kind() != FrequencyMap::Kind::linear)
        throw Error(ErrorKind::invalid_argument, "equivalence check composes with linear maps only");
    const GridSpec& grid = phi.grid();
    require_dimension(psi, grid);
    if (sigma.dimension() != grid.dimension())
        throw Error(ErrorKind::shape_mismatch, "symbol and grid dimensions differ");
    spec.validate();
    const ComplexField hat = as_frequency(phi);
    double mx = 0.0;
    for (const cplx& z : hat.values()) mx = std::max(mx, std::abs(z));
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(hat[i]) > 1e-12 * mx && gamma(grid.frequency_at(i)) == 0.0)
            throw Error(ErrorKind::domain, "phi^ is not supported inside supp gamma");

    const Symbol a = Symbol::compose_linear(sigma, psi.matrix(), "composed");
    const ComplexField physical = phi.space() == Space::physical ? phi : transform(phi, Direction::inverse);
    EquivalenceCheck out;
    out.lhs = spacetime_norm(a, spec, physical);
    out.rhs = spacetime_norm(sigma, spec, apply_I_inverse(psi, gamma, physical));
    if (!(out.rhs > 0.0)) throw Error(ErrorKind::domain, "transformed side vanishes");
    out.ratio = out.lhs / out.rhs;

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        const double g = gamma(xi);
        if (g == 0.0) continue;
        const double num = g * smoother_value(a, spec.smoother, xi);
        const double den = smoother_value(sigma, spec.smoother, psi.forward(xi));
        if (num == 0.0) continue;
        out.q_sup = den > 0.0 ? std::max(out.q_sup, num / den) : INFINITY;
    }
    out.q_flagged = !(out.q_sup <= 1e6);
    return out;
}

EquivalenceStudy equivalence_study(const Symbol& sigma, const FrequencyMap& psi, const CutoffSpec& gamma,
                                   const EstimateSpec& spec, const GridSpec& grid, int ensemble_size,
                                   std::uint64_t seed) {
    if (ensemble_size < 1) throw Error(ErrorKind::invalid_argument, "ensemble size must be positive");
    const SupportPredicate support = [&](const Vec& xi) { return gamma(xi) >= 0.5; };
    double extent = grid.extent(0);
    for (int a = 1; a < grid.dimension(); ++a) extent = std::min(extent, grid.extent(a));
    EquivalenceStudy out;
    out.low = INFINITY;
    for (int m = 0; m < ensemble_size; ++m) {
        std::mt19937_64 rng(mix_seed(seed, m, 1));
        std::uniform_real_distribution<double> uc(-extent / 8.0, extent / 8.0);
        Vec centre(grid.dimension());
        for (int a = 0; a < grid.dimension(); ++a) centre[a] = uc(rng);
        const ComplexField phi = random_localized(grid, support, mix_seed(seed, m), extent / 16.0, centre);
        const EquivalenceCheck c = equivalence_check(sigma, psi, gamma, spec, phi);
        out.ratios.push_back(c.ratio);
        out.low = std::min(out.low, c.ratio);
        out.high = std::max(out.high, c.ratio);
        out.q_sup = std::max(out.q_sup, c.q_sup);
        out.q_flagged = out.q_flagged || c.q_flagged;
    }
    out.band = std::max(out.high, 1.0 / out.low);
    return out;
}

std::vector<RankPair> rank_invariance_check(const Symbol& sigma, const FrequencyMap& psi, std::vector<Vec> points) {
    if (psi.kind() != FrequencyMap::Kind::linear)
        throw Error(ErrorKind::invalid_argument, "rank invariance is checked for linear maps");
    if (sigma.dimension() != psi.dimension()) throw Error(ErrorKind::shape_mismatch, "dimensions differ");
    const Symbol a = Symbol::compose_linear(sigma, psi.matrix(), "composed");
    if (points.empty())
        for (const CriticalPoint& c : find_critical_points(a)) points.push_back(c.point);
    std::vector<RankPair> out;
    for (const Vec& xi : points) {
        RankPair r;
        r.point = xi;
        r.rank_a = hessian_rank(a, xi).rank;
        r.rank_sigma = hessian_rank(sigma, psi.forward(xi)).rank;
        out.push_back(r);
    }
    return out;
}

}  // namespace smoothlab
