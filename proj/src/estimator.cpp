#include "smoothlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "smoothlab/error.hpp"
#include "smoothlab/fft.hpp"
#include "smoothlab/parallel.hpp"

namespace smoothlab {

namespace {

// Time nodes are grouped into fixed blocks so the summation order never depends
// on how many workers run.
constexpr std::size_t kTimeBlock = 8;

double euclidean_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

cplx euclidean_dot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
}

double safe_power(double base, double p) {
    if (base == 0.0) return p > 0.0 ? 0.0 : (p == 0.0 ? 1.0 : 0.0);
    return std::pow(base, p);
}

}  // namespace

std::string WeightSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::none: return "1";
        case Kind::bracket: os << "<x>^-" << value; break;
        case Kind::homogeneous: os << "|x|^" << value; break;
        case Kind::axis_bracket: os << "<x" << (axis + 1) << ">^-" << value; break;
    }
    return os.str();
}

double cell_average_power(std::span<const double> b, double delta) {
    const int n = static_cast<int>(b.size());
    if (!(delta > -n)) throw Error(ErrorKind::domain, "|x|^delta is not integrable at the origin for delta <= -n");
    if (n == 1) return std::pow(b[0], delta) / (delta + 1.0);
    // Split [0,b]^n into n pyramids with apex 0; pyramid k over the face x_k = b_k
    // contributes b_k/(delta+n) * int_face |y|^delta dA (smooth integrand).
    using Rule = boost::math::quadrature::gauss<double, 20>;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        std::vector<int> free;
        for (int j = 0; j < n; ++j)
            if (j != k) free.push_back(j);
        double face = 0.0;
        if (n == 2) {
            const int j = free[0];
            face = Rule::integrate([&](double y) { return std::pow(b[k] * b[k] + y * y, 0.5 * delta); }, 0.0, b[j]);
        } else {
            const int j1 = free[0], j2 = free[1];
            face = Rule::integrate(
                [&](double y1) {
                    return Rule::integrate(
                        [&](double y2) { return std::pow(b[k] * b[k] + y1 * y1 + y2 * y2, 0.5 * delta); }, 0.0,
                        b[j2]);
                },
                0.0, b[j1]);
        }
        total += b[k] / (delta + n) * face;
    }
    double volume = 1.0;
    for (double v : b) volume *= v;
    return total / volume;
}

std::vector<double> weight_values(const GridSpec& grid, const WeightSpec& w) {
    std::vector<double> out(grid.size(), 1.0);
    if (w.kind == WeightSpec::Kind::none) return out;
    if (w.kind == WeightSpec::Kind::axis_bracket && (w.axis < 0 || w.axis >= grid.dimension()))
        throw Error(ErrorKind::invalid_argument, "weight axis outside the grid dimension");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (w.kind == WeightSpec::Kind::axis_bracket) {
            const double xa = grid.position_at(i)[w.axis];
            out[i] = std::pow(1.0 + xa * xa, -0.5 * w.value);
            continue;
        }
        const double r2 = grid.position_at(i).squaredNorm();
        if (w.kind == WeightSpec::Kind::bracket) {
            out[i] = std::pow(1.0 + r2, -0.5 * w.value);
        } else if (r2 > 0.0) {
            out[i] = std::pow(r2, 0.5 * w.value);
        } else if (w.value >= 0.0) {
            out[i] = w.value == 0.0 ? 1.0 : 0.0;
        } else {
            std::array<double, 3> half{};
            for (int a = 0; a < grid.dimension(); ++a) half[a] = 0.5 * grid.spacing(a);
            out[i] = cell_average_power(std::span<const double>(half.data(), grid.dimension()), w.value);
        }
    }
    return out;
}

std::string SmootherSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::identity: os << "1"; break;
        case Kind::classical: os << "|xi|^" << exponent; break;
        case Kind::bracket: os << "<xi>^" << exponent; break;
        case Kind::invariant_power: os << "|grad a|^" << exponent; break;
        case Kind::invariant_bracket: os << "<grad a>^" << exponent; break;
        case Kind::hoshiro: os << "<xi>^-" << exponent << "|a|^0.5"; break;
        case Kind::custom: os << "custom"; break;
    }
    if (scale != 1.0) os << "*" << scale;
    return os.str();
}

double smoother_value(const Symbol& a, const SmootherSpec& s, const Vec& xi) {
    double v = 1.0;
    switch (s.kind) {
        case SmootherSpec::Kind::identity: break;
        case SmootherSpec::Kind::classical: v = safe_power(xi.norm(), s.exponent); break;
        case SmootherSpec::Kind::bracket: v = std::pow(1.0 + xi.squaredNorm(), 0.5 * s.exponent); break;
        case SmootherSpec::Kind::invariant_power: v = safe_power(a.gradient(xi).norm(), s.exponent); break;
        case SmootherSpec::Kind::invariant_bracket:
            v = std::pow(1.0 + a.gradient(xi).squaredNorm(), 0.5 * s.exponent);
            break;
        case SmootherSpec::Kind::hoshiro:
            v = std::pow(1.0 + xi.squaredNorm(), -0.5 * s.exponent) * std::sqrt(std::abs(a(xi)));
            break;
        case SmootherSpec::Kind::custom:
            if (!s.custom) throw Error(ErrorKind::invalid_argument, "custom smoother without a function");
            v = s.custom(xi);
            break;
    }
    return s.scale * v;
}

std::vector<double> smoother_values(const GridSpec& grid, const Symbol& a, const SmootherSpec& s) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = smoother_value(a, s, grid.frequency_at(i));
        if (!std::isfinite(out[i])) throw Error(ErrorKind::non_finite, "smoother is not finite on the lattice");
    }
    return out;
}

void EstimateSpec::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::invalid_argument, "time window T must be positive");
    if (time_samples < 16) throw Error(ErrorKind::invalid_argument, "need at least 16 time samples");
}

TimeGrid TimeGrid::trapezoid(double begin, double end, int samples) {
    if (samples < 2) throw Error(ErrorKind::invalid_argument, "trapezoid rule needs two nodes");
    TimeGrid g;
    const double dt = (end - begin) / (samples - 1);
    for (int k = 0; k < samples; ++k) {
        g.t.push_back(k == samples - 1 ? end : begin + k * dt);
        g.weight.push_back((k == 0 || k == samples - 1) ? 0.5 * dt : dt);
    }
    return g;
}

SpacetimeOperator::SpacetimeOperator(const GridSpec& grid, const Symbol& a, const WeightSpec& w,
                                     const SmootherSpec& s)
    : SpacetimeOperator(grid, sample_symbol(grid, a), weight_values(grid, w), smoother_values(grid, a, s)) {}

SpacetimeOperator::SpacetimeOperator(const GridSpec& grid, std::vector<double> symbol_values,
                                     std::vector<double> weights, std::vector<double> smoother)
    : grid_(grid), a_(std::move(symbol_values)), sigma_(std::move(smoother)) {
    if (a_.size() != grid.size() || weights.size() != grid.size() || sigma_.size() != grid.size())
        throw Error(ErrorKind::shape_mismatch, "tabulated operator data do not match the grid");
    w2_.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) w2_[i] = weights[i] * weights[i];
}

double SpacetimeOperator::squared_norm(const std::vector<cplx>& hat, const TimeGrid& times) const {
    if (hat.size() != grid_.size()) throw Error(ErrorKind::shape_mismatch, "coefficient length mismatch");
    const std::size_t nt = times.t.size();
    const std::size_t blocks = (nt + kTimeBlock - 1) / kTimeBlock;
    std::vector<double> partial(blocks, 0.0);
    const double cell = grid_.cell_volume();
    parallel_for(blocks, [&](std::size_t b) {
        std::vector<cplx> buf(hat.size());
        double acc = 0.0;
        for (std::size_t k = b * kTimeBlock; k < std::min(nt, (b + 1) * kTimeBlock); ++k) {
            const double t = times.t[k];
            for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = sigma_[i] * hat[i] * std::polar(1.0, t * a_[i]);
            fft_inverse(grid_, buf);
            double s = 0.0;
            for (std::size_t i = 0; i < buf.size(); ++i) s += w2_[i] * std::norm(buf[i]);
            acc += times.weight[k] * s * cell;
        }
        partial[b] = acc;
    });
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

std::vector<cplx> SpacetimeOperator::apply_normal(const std::vector<cplx>& hat, const TimeGrid& times) const {
    if (hat.size() != grid_.size()) throw Error(ErrorKind::shape_mismatch, "coefficient length mismatch");
    const std::size_t nt = times.t.size();
    const std::size_t blocks = (nt + kTimeBlock - 1) / kTimeBlock;
    std::vector<std::vector<cplx>> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        std::vector<cplx> buf(hat.size()), acc(hat.size(), 0.0);
        for (std::size_t k = b * kTimeBlock; k < std::min(nt, (b + 1) * kTimeBlock); ++k) {
            const double t = times.t[k];
            for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = sigma_[i] * hat[i] * std::polar(1.0, t * a_[i]);
            fft_inverse(grid_, buf);
            for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= w2_[i];
            fft_forward(grid_, buf);
            const double q = times.weight[k];
            for (std::size_t i = 0; i < buf.size(); ++i)
                acc[i] += q * sigma_[i] * std::polar(1.0, -t * a_[i]) * buf[i];
        }
        partial[b] = std::move(acc);
    });
    std::vector<cplx> out(hat.size(), 0.0);
    for (const auto& p : partial)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
    return out;
}

namespace {

void require_field(const ComplexField& phi, const Symbol& a) {
    if (phi.space() != Space::physical) throw Error(ErrorKind::shape_mismatch, "expected a physical-space field");
    if (phi.grid().dimension() != a.dimension())
        throw Error(ErrorKind::shape_mismatch, "field and symbol dimensions differ");
}

}  // namespace

double spacetime_norm(const Symbol& a, const EstimateSpec& spec, const ComplexField& phi) {
    spec.validate();
    require_field(phi, a);
    if (!(phi.l2_norm() > 0.0)) throw Error(ErrorKind::domain, "spacetime norm of a zero field");
    const SpacetimeOperator op(phi.grid(), a, spec.weight, spec.smoother);
    const ComplexField hat = transform(phi, Direction::forward);
    return std::sqrt(op.squared_norm(hat.data(), TimeGrid::trapezoid(-spec.T, spec.T, spec.time_samples)));
}

double smoothing_ratio(const Symbol& a, const EstimateSpec& spec, const ComplexField& phi) {
    const double n = phi.l2_norm();
    if (!(n > 0.0)) throw Error(ErrorKind::domain, "smoothing ratio of a zero field");
    return spacetime_norm(a, spec, phi) / n;
}

const char* to_string(EstimateMethod m) {
    return m == EstimateMethod::ensemble ? "ensemble" : "power_iteration";
}

ConstantEstimate estimate_constant(const Symbol& a, const EstimateSpec& spec, const GridSpec& grid,
                                   EstimateMethod method, const EstimateParams& params, std::uint64_t seed) {
    spec.validate();
    const SpacetimeOperator op(grid, a, spec.weight, spec.smoother);
    const TimeGrid times = TimeGrid::trapezoid(-spec.T, spec.T, spec.time_samples);
    const SupportPredicate support = params.support ? params.support : [](const Vec&) { return true; };
    ConstantEstimate out;
    out.method = method;

    if (method == EstimateMethod::ensemble) {
        if (params.ensemble_size < 1) throw Error(ErrorKind::invalid_argument, "ensemble size must be positive");
        double best = -1.0;
        for (int m = 0; m < params.ensemble_size; ++m) {
            const std::uint64_t s = mix_seed(seed, m);
            const ComplexField phi = random_band_limited(grid, support, s);
            const ComplexField hat = transform(phi, Direction::forward);
            const double r = std::sqrt(op.squared_norm(hat.data(), times)) / phi.l2_norm();
            if (r > best) {
                best = r;
                out.fingerprint = s;
            }
        }
        out.value = best;
        out.iterations = params.ensemble_size;
        return out;
    }

    out.fingerprint = mix_seed(seed, -1);
    std::vector<cplx> v = transform(random_band_limited(grid, support, out.fingerprint), Direction::forward).data();
    double nv = euclidean_norm(v);
    for (auto& z : v) z /= nv;
    double lambda = 0.0;
    out.converged = false;
    for (int it = 1; it <= params.max_iterations; ++it) {
        std::vector<cplx> kv = op.apply_normal(v, times);
        const double prev = lambda;
        lambda = euclidean_dot(v, kv).real();
        out.rayleigh.push_back(lambda);
        out.iterations = it;
        const double nk = euclidean_norm(kv);
        if (nk == 0.0) {
            lambda = 0.0;
            out.converged = true;
            break;
        }
        double res = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) res += std::norm(kv[i] - lambda * v[i]);
        out.residual = std::sqrt(res) / std::max(lambda, 1e-300);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = kv[i] / nk;
        if (it > 1 && std::abs(lambda - prev) <= params.tolerance * std::abs(lambda)) {
            out.converged = true;
            break;
        }
    }
    out.value = std::sqrt(std::max(lambda, 0.0));
    return out;
}

std::vector<RefinementRow> refinement_study(const Symbol& a, const EstimateSpec& spec,
                                            const std::vector<GridSpec>& grids, EstimateMethod method,
                                            const EstimateParams& params, std::uint64_t seed) {
    std::vector<RefinementRow> rows;
    for (const auto& g : grids) rows.push_back({g, estimate_constant(a, spec, g, method, params, seed)});
    return rows;
}

double relative_spread(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *lo > 0.0 ? (*hi - *lo) / *lo : INFINITY;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::invalid_argument, "slope fit needs two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

ConcentrationResult concentration_study(const Symbol& a, const EstimateSpec& classical,
                                        const EstimateSpec& invariant, const GridSpec& grid,
                                        const std::vector<double>& widths,
                                        const std::function<double(const Vec&)>& offset, std::uint64_t seed) {
    ConcentrationResult res;
    std::vector<double> lw, lq, inv;
    for (double w : widths) {
        if (!(w > 0.0)) throw Error(ErrorKind::invalid_argument, "widths must be positive");
        auto support = [&offset, w](const Vec& xi) {
            const double d = offset(xi);
            return d > 0.5 * w && d < w;
        };
        ConcentrationRow row;
        row.width = w;
        for (std::size_t i = 0; i < grid.size(); ++i) row.modes += support(grid.frequency_at(i));
        if (row.modes == 0)
            throw Error(ErrorKind::domain, "concentration width " + std::to_string(w) + " leaves no lattice modes");
        const ComplexField phi =
            random_localized(grid, support, seed, 2.0 / w, Vec::Zero(grid.dimension()));
        row.ratio_classical = smoothing_ratio(a, classical, phi);
        row.ratio_invariant = smoothing_ratio(a, invariant, phi);
        lw.push_back(std::log(w));
        lq.push_back(std::log(row.ratio_classical / row.ratio_invariant));
        inv.push_back(row.ratio_invariant);
        res.rows.push_back(row);
    }
    if (res.rows.size() >= 2) res.slope = fit_slope(lw, lq);
    res.invariant_variation = relative_spread(inv);
    return res;
}

}  // namespace smoothlab
