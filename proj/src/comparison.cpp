#include "smoothlab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"

namespace smoothlab {

namespace {

ComplexField as_frequency(const ComplexField& f) {
    return f.space() == Space::frequency ? f : transform(f, Direction::forward);
}

// A nonzero mode of a frequency field, pre-multiplied by everything that does
// not depend on t.
struct Mode {
    double xi1 = 0.0;
    double phase_rate = 0.0;  // symbol value
    cplx weight;              // smoother * coefficient * e^{i xi.x}
    int row = 0;              // xi_2 bucket in 2-d, 0 in 1-d
};

std::vector<double> time_nodes(double T, double dt, std::vector<double>& q) {
    if (!(T > 0.0) || !(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "need T > 0 and dt > 0");
    const int n = static_cast<int>(std::llround(2.0 * T / dt)) + 1;
    if (n < 16) throw Error(ErrorKind::invalid_argument, "fewer than 16 time nodes");
    const TimeGrid g = TimeGrid::trapezoid(-T, T, n);
    q = g.weight;
    return g.t;
}

// sum_t q_t sum_rows |sum_{modes in row} weight e^{i t rate}|^2, per-node slots
// reduced in node order.
double time_energy(const std::vector<Mode>& modes, int rows, double T, double dt) {
    std::vector<double> q;
    const std::vector<double> t = time_nodes(T, dt, q);
    std::vector<double> slot(t.size(), 0.0);
    parallel_for(t.size(), [&](std::size_t k) {
        std::vector<cplx> acc(static_cast<std::size_t>(rows), 0.0);
        for (const Mode& m : modes) acc[m.row] += m.weight * std::polar(1.0, t[k] * m.phase_rate);
        double e = 0.0;
        for (const cplx& z : acc) e += std::norm(z);
        slot[k] = q[k] * e;
    });
    double total = 0.0;
    for (double v : slot) total += v;
    return total;
}

double nonzero_threshold(const ComplexField& hat) {
    double mx = 0.0;
    for (const cplx& z : hat.values()) mx = std::max(mx, std::abs(z));
    return 1e-14 * mx;
}

}  // namespace

ComplexField wave_packets(const GridSpec& grid, std::uint64_t seed, const PacketOptions& o) {
    if (grid.dimension() > 2) throw Error(ErrorKind::invalid_argument, "wave packets are defined in 1-d and 2-d");
    if (o.count < 1 || !(o.sigma_x > 0.0) || !(o.k_high >= o.k_low))
        throw Error(ErrorKind::invalid_argument, "bad packet options");
    std::mt19937_64 rng(mix_seed(seed, 0x5eed));
    std::uniform_real_distribution<double> uk(o.k_low, o.k_high), ux(o.x_low, o.x_high);
    std::normal_distribution<double> normal;
    struct Packet {
        double k0, x0;
        cplx amp;
    };
    std::vector<Packet> packets;
    for (int p = 0; p < o.count; ++p) {
        const double k0 = uk(rng), x0 = ux(rng);
        const double re = normal(rng), im = normal(rng);
        packets.push_back({k0, x0, cplx(re, im)});
    }
    ComplexField hat(grid, Space::frequency);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        if (o.one_sided && xi[0] <= 0.0) continue;
        std::int64_t k2 = 0;
        if (grid.dimension() == 2) {
            const double r = std::abs(xi[1]);
            if (r < o.y_band_low || r > o.y_band_high) continue;
            k2 = grid.signed_index(1, grid.unravel(i)[1]);
        }
        cplx c = 0.0;
        for (int p = 0; p < o.count; ++p) {
            const Packet& pk = packets[p];
            const double d = (xi[0] - pk.k0) * o.sigma_x;
            cplx amp = pk.amp;
            if (grid.dimension() == 2) {
                std::mt19937_64 r2(mix_seed(seed, p, k2));
                std::normal_distribution<double> nd;
                const double re = nd(r2), im = nd(r2);
                amp *= cplx(re, im);
            }
            c += amp * std::exp(-0.5 * d * d) * std::polar(1.0, -xi[0] * pk.x0);
        }
        hat[i] = c;
    }
    const double n = hat.l2_norm();
    if (!(n > 0.0)) throw Error(ErrorKind::domain, "wave packets leave no lattice mode on this grid");
    hat *= 1.0 / n;
    return hat;
}

double translation_identity_check(const ComplexField& phi, const std::vector<double>& xs) {
    const ComplexField hat = as_frequency(phi);
    const GridSpec& g = hat.grid();
    if (g.dimension() != 1) throw Error(ErrorKind::invalid_argument, "translation identity is checked in 1-d");
    const int n = g.points(0);
    const int m_nodes = 2 * n;
    // e^{i xi_k t_m} = e^{2 pi i s_k m / M} exactly; tabulate once.
    std::vector<cplx> table(static_cast<std::size_t>(m_nodes));
    for (int r = 0; r < m_nodes; ++r) table[r] = std::polar(1.0, 2.0 * std::numbers::pi * r / m_nodes);
    const double norm2 = hat.squared_norm();
    double worst = 0.0;
    for (double x : xs) {
        std::vector<cplx> d(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) d[k] = hat[k] * std::polar(1.0, g.frequency(0, k) * x);
        std::vector<double> slot(static_cast<std::size_t>(m_nodes), 0.0);
        parallel_for(static_cast<std::size_t>(m_nodes), [&](std::size_t m) {
            cplx u = 0.0;
            for (int k = 0; k < n; ++k) {
                const long long s = g.signed_index(0, k);
                const long long r = ((s * static_cast<long long>(m)) % m_nodes + m_nodes) % m_nodes;
                u += d[k] * table[r];
            }
            slot[m] = std::norm(u) / n;
        });
        double e = 0.0;
        for (double v : slot) e += v;
        e *= g.extent(0) / m_nodes;
        worst = std::max(worst, std::abs(std::sqrt(e / norm2) - 1.0));
    }
    return worst;
}

ModelCheck model_equality_check(double l, double m, const ComplexField& phi_hat, int dimension,
                                const ModelCheckOptions& o) {
    if (!(l >= 1.0) || !(m >= 1.0)) throw Error(ErrorKind::invalid_argument, "model orders must be >= 1");
    const ComplexField hat = as_frequency(phi_hat);
    const GridSpec& g = hat.grid();
    if (g.dimension() != dimension) throw Error(ErrorKind::shape_mismatch, "field dimension differs from the model");
    const double cut = nonzero_threshold(hat);
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    ModelCheck out;

    if (dimension == 1) {
        for (std::size_t i = 0; i < hat.size(); ++i)
            if (std::abs(hat[i]) > cut && g.frequency(0, static_cast<int>(i)) < 0.0)
                throw Error(ErrorKind::domain, "the 1-d model identity needs one-sided frequency support");
        auto side = [&](double p) {
            std::vector<Mode> modes;
            for (std::size_t i = 0; i < hat.size(); ++i) {
                if (std::abs(hat[i]) <= cut) continue;
                const double xi = g.frequency(0, static_cast<int>(i));
                const double r = std::abs(xi);
                modes.push_back({xi, std::pow(r, p), std::pow(r, 0.5 * (p - 1.0)) * hat[i] * scale *
                                                          std::polar(1.0, xi * o.x), 0});
            }
            return std::sqrt(time_energy(modes, 1, o.T, o.dt));
        };
        out.lhs = side(m);
        out.rhs = side(l);
        out.expected = std::sqrt(l / m);
    } else if (dimension == 2) {
        // Rows are xi_2 values; the y-integral is exact by discrete Parseval.
        std::map<int, int> row_of;
        for (std::size_t i = 0; i < hat.size(); ++i) {
            if (std::abs(hat[i]) <= cut) continue;
            const auto idx = g.unravel(i);
            if (g.frequency(1, idx[1]) == 0.0)
                throw Error(ErrorKind::domain, "the 2-d model identity needs xi_2 != 0 on the support");
            row_of.emplace(idx[1], 0);
        }
        int rows = 0;
        for (auto& [k, r] : row_of) r = rows++;
        auto side = [&](double p) {
            std::vector<Mode> modes;
            for (std::size_t i = 0; i < hat.size(); ++i) {
                if (std::abs(hat[i]) <= cut) continue;
                const auto idx = g.unravel(i);
                const double x1 = g.frequency(0, idx[0]);
                const double r2 = std::abs(g.frequency(1, idx[1]));
                modes.push_back({x1, x1 * std::pow(r2, p - 1.0),
                                 std::pow(r2, 0.5 * (p - 1.0)) * hat[i] * std::polar(1.0, x1 * o.x),
                                 row_of.at(idx[1])});
            }
            const double hy = g.spacing(1);
            return std::sqrt(time_energy(modes, rows, o.T, o.dt) * hy / g.points(0));
        };
        out.lhs = side(m);
        out.rhs = side(l);
        out.expected = 1.0;
    } else {
        throw Error(ErrorKind::invalid_argument, "model identities are defined in 1-d and 2-d");
    }
    if (!(out.rhs > 0.0)) throw Error(ErrorKind::domain, "order-l side vanishes for this field");
    out.ratio = out.lhs / out.rhs;
    return out;
}

ComparisonResult compare_radial(const ComparisonCase& c, const ComplexField& phi_hat,
                                const std::vector<double>& xs, const ModelCheckOptions& o) {
    if (!c.f || !c.df || !c.g || !c.dg || !c.sigma || !c.tau || !c.chi)
        throw Error(ErrorKind::invalid_argument, "comparison case is incomplete");
    const ComplexField hat = as_frequency(phi_hat);
    const GridSpec& grid = hat.grid();
    if (grid.dimension() != 1) throw Error(ErrorKind::invalid_argument, "compare_radial works on 1-d grids");

    ComparisonResult out;
    int sign_f = 0, sign_g = 0;
    auto check_sign = [](int& sign, double v, const char* which) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign))
            throw Error(ErrorKind::domain, std::string(which) + " is not strictly monotone on supp chi");
        sign = s;
    };
    bool any = false;
    for (int k = 0; k < grid.points(0); ++k) {
        const double xi = grid.frequency(0, k);
        if (!c.chi(xi)) continue;
        any = true;
        const double df = c.df(xi), dg = c.dg(xi);
        check_sign(sign_f, df, "f");
        check_sign(sign_g, dg, "g");
        const double tau = std::abs(c.tau(xi));
        const double num = std::abs(c.sigma(xi)) * std::sqrt(std::abs(dg));
        if (num == 0.0) continue;
        if (tau == 0.0) throw Error(ErrorKind::domain, "tau vanishes where sigma does not");
        out.A = std::max(out.A, num / (std::sqrt(std::abs(df)) * tau));
    }
    if (!any) throw Error(ErrorKind::domain, "supp chi contains no lattice mode");

    const double cut = nonzero_threshold(hat);
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid.size()));
    for (double x : xs) {
        std::vector<Mode> lhs, rhs;
        for (int k = 0; k < grid.points(0); ++k) {
            const double xi = grid.frequency(0, k);
            if (std::abs(hat[k]) <= cut || !c.chi(xi)) continue;
            const cplx base = hat[k] * scale * std::polar(1.0, xi * x);
            lhs.push_back({xi, c.f(xi), c.sigma(xi) * base, 0});
            rhs.push_back({xi, c.g(xi), c.tau(xi) * base, 0});
        }
        const double l = std::sqrt(time_energy(lhs, 1, o.T, o.dt));
        const double r = std::sqrt(time_energy(rhs, 1, o.T, o.dt));
        const double q = r > 0.0 ? l / r : (l > 0.0 ? INFINITY : 0.0);
        out.quotients.push_back(q);
        out.worst_quotient = std::max(out.worst_quotient, q);
    }
    return out;
}

SecondaryCheck secondary_comparison_check(const RadialProfile& f, const ScalarProfile& sigma,
                                          const std::function<bool(double)>& chi, double s,
                                          const ComplexField& phi, double T, int time_samples) {
    const GridSpec& grid = phi.grid();
    SecondaryCheck out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.frequency_at(i).norm();
        if (!chi(r)) continue;
        const double sv = std::abs(sigma(r)), d = std::abs(f.df(r));
        if (sv == 0.0) continue;
        if (d < 1e-12) throw Error(ErrorKind::domain, "sigma does not vanish where f' = 0 on supp chi");
        out.A = std::max(out.A, sv / std::sqrt(d));
    }
    const Symbol a = Symbol::radial(grid.dimension(), f, "secondary");
    EstimateSpec spec;
    spec.weight = WeightSpec::bracket(s);
    spec.smoother = SmootherSpec::from_function([sigma, chi](const Vec& xi) {
        const double r = xi.norm();
        return chi(r) ? sigma(r) : 0.0;
    });
    spec.T = T;
    spec.time_samples = time_samples;
    out.ratio = smoothing_ratio(a, spec, phi);
    return out;
}

MonotoneDecomposition monotone_decomposition(const Polynomial& a, int axis, const GridSpec& grid) {
    const int n = grid.dimension();
    if (a.dimension() != n) throw Error(ErrorKind::shape_mismatch, "polynomial and grid dimensions differ");
    if (axis < 0 || axis >= n) throw Error(ErrorKind::invalid_argument, "axis out of range");
    const Polynomial d = a.derivative(axis);
    double dscale = 0.0;
    for (const auto& [alpha, c] : d.terms()) dscale = std::max(dscale, std::abs(c));

    MonotoneDecomposition out;
    out.axis = axis;
    out.piece.assign(grid.size(), -1);
    std::map<std::pair<int, int>, int> id_of;
    std::vector<std::size_t> slice_of(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.unravel(i)[axis] != 0) continue;
        SliceRoots s;
        s.xi_prime = grid.frequency_at(i);
        s.xi_prime[axis] = 0.0;
        const auto coeffs = d.restrict_to_axis(axis, s.xi_prime);
        double mx = 0.0;
        for (double c : coeffs) mx = std::max(mx, std::abs(c));
        s.derivative_vanishes = mx <= 1e-13 * std::max(1.0, dscale);
        if (!s.derivative_vanishes && coeffs.size() > 1) s.roots = real_roots(coeffs);
        const std::size_t slice = out.slices.size();
        out.slices.push_back(std::move(s));
        // Walk the slice.
        auto idx = grid.unravel(i);
        for (int k = 0; k < grid.points(axis); ++k) {
            idx[axis] = k;
            const std::size_t flat = grid.ravel(idx);
            slice_of[flat] = slice;
            const SliceRoots& sr = out.slices[slice];
            if (sr.derivative_vanishes) continue;
            const double t = grid.frequency(axis, k);
            bool on_shell = false;
            int below = 0;
            for (double r : sr.roots) {
                if (std::abs(t - r) <= 1e-8 * std::max(1.0, std::abs(r))) on_shell = true;
                if (r < t) ++below;
            }
            if (on_shell) continue;
            const std::pair<int, int> label{static_cast<int>(sr.roots.size()), below};
            auto [it, fresh] = id_of.emplace(label, static_cast<int>(out.labels.size()));
            if (fresh) out.labels.push_back(label);
            out.piece[flat] = it->second;
        }
    }

    out.eta.assign(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec gr = a.gradient(grid.frequency_at(i));
        double den = 0.0;
        for (int j = 0; j < n; ++j) den += std::sqrt(std::abs(gr[j]));
        if (den > 0.0) out.eta[i] = std::sqrt(gr.norm()) / den;
    }
    return out;
}

DecompositionAudit audit_decomposition(const Polynomial& a, const MonotoneDecomposition& d, const GridSpec& grid) {
    DecompositionAudit out;
    const Polynomial da = a.derivative(d.axis);
    // Sign per (slice, piece).
    std::map<std::pair<std::size_t, int>, int> sign;
    out.eta_min = INFINITY;
    out.eta_max = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec xi = grid.frequency_at(i);
        const double v = da(xi);
        auto idx = grid.unravel(i);
        idx[d.axis] = 0;
        const std::size_t slice_key = grid.ravel(idx);
        const int p = d.piece[i];
        if (p < 0) {
            // Off-piece points must sit on a root shell or a vanishing slice.
            bool explained = false;
            const Vec xp = [&] {
                Vec t = xi;
                t[d.axis] = 0.0;
                return t;
            }();
            const auto coeffs = da.restrict_to_axis(d.axis, xp);
            double mx = 0.0;
            for (double c : coeffs) mx = std::max(mx, std::abs(c));
            if (mx == 0.0 || std::abs(v) <= 1e-6 * std::max(1.0, mx)) explained = true;
            if (!explained && coeffs.size() > 1)
                for (double r : real_roots(coeffs))
                    if (std::abs(xi[d.axis] - r) <= 1e-8 * std::max(1.0, std::abs(r))) explained = true;
            if (!explained) out.covers = false;
        } else {
            const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            auto [it, fresh] = sign.emplace(std::make_pair(slice_key, p), s);
            if (s == 0 || (!fresh && it->second != s)) out.sign_constant = false;
        }
        if (d.eta[i] > 0.0) {
            out.eta_min = std::min(out.eta_min, d.eta[i]);
            out.eta_max = std::max(out.eta_max, d.eta[i]);
        }
    }
    if (!std::isfinite(out.eta_min)) out.eta_min = 0.0;
    return out;
}

AssembledEstimate assemble_polynomial_estimate(const Polynomial& a, double s, const ComplexField& phi, double T,
                                               int time_samples) {
    const GridSpec& grid = phi.grid();
    const int n = grid.dimension();
    if (a.dimension() != n) throw Error(ErrorKind::shape_mismatch, "polynomial and grid dimensions differ");
    const double phi_norm = phi.l2_norm();
    if (!(phi_norm > 0.0)) throw Error(ErrorKind::domain, "zero test field");
    const TimeGrid times = TimeGrid::trapezoid(-T, T, time_samples);
    const Symbol sym = Symbol::from_polynomial(a);
    const std::vector<double> av = sample_symbol(grid, sym);
    const ComplexField hat = as_frequency(phi);

    std::vector<Vec> grads(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) grads[i] = a.gradient(grid.frequency_at(i));

    AssembledEstimate out;
    {
        std::vector<double> sm(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) sm[i] = std::sqrt(grads[i].norm());
        const SpacetimeOperator op(grid, av, weight_values(grid, WeightSpec::bracket(s)), std::move(sm));
        out.combined = std::sqrt(op.squared_norm(hat.data(), times)) / phi_norm;
    }

    for (int j = 0; j < n; ++j) {
        const MonotoneDecomposition dec = monotone_decomposition(a, j, grid);
        std::vector<cplx> eh = hat.data();
        for (std::size_t i = 0; i < grid.size(); ++i) eh[i] *= dec.eta[i];
        const std::vector<double> w = weight_values(grid, WeightSpec::axis_bracket(s, j));
        auto ratio = [&](const std::function<bool(std::size_t)>& keep) {
            std::vector<double> sm(grid.size(), 0.0);
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (keep(i)) sm[i] = std::sqrt(std::abs(grads[i][j]));
            const SpacetimeOperator op(grid, av, w, std::move(sm));
            return std::sqrt(op.squared_norm(eh, times)) / phi_norm;
        };
        out.axis_ratios.push_back(ratio([](std::size_t) { return true; }));
        out.shell_ratios.push_back(ratio([&](std::size_t i) { return dec.piece[i] < 0; }));
        std::vector<double> pieces;
        for (int p = 0; p < dec.piece_count(); ++p)
            pieces.push_back(ratio([&](std::size_t i) { return dec.piece[i] == p; }));
        out.piece_ratios.push_back(std::move(pieces));
    }
    for (int j = 0; j < n; ++j) {
        out.axis_sum += out.axis_ratios[j];
        out.piece_sum += out.shell_ratios[j];
        for (double r : out.piece_ratios[j]) out.piece_sum += r;
    }
    const double slack = 1e-9 * std::max(1.0, out.piece_sum);
    out.bound_holds = out.combined <= out.axis_sum + slack && out.axis_sum <= out.piece_sum + slack;
    return out;
}

}  // namespace smoothlab
