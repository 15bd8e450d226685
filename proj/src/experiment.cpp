#include "smoothlab/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "smoothlab/canonical.hpp"
#include "smoothlab/comparison.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/estimator.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/symbol_parser.hpp"
#include "smoothlab/timedep.hpp"

namespace smoothlab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- CSV

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {"symbol", "study",  "ladder_value", "flags", "estimate_kind",
                                                  "weight", "smoother", "grid",       "T",     "time_samples",
                                                  "value",  "method", "residual"};
    return cols;
}

std::string csv_header() {
    std::string out;
    for (const auto& c : csv_columns()) out += (out.empty() ? "" : ",") + c;
    return out;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    return cells;
}

}  // namespace

std::string csv_line(const ReportRow& r) {
    for (double v : {r.ladder_value, r.T, r.value, r.residual})
        if (!std::isfinite(v))
            throw Error(ErrorKind::non_finite, "report row for " + r.symbol + "/" + r.study + " has a non-finite cell");
    std::ostringstream os;
    os << quote(r.symbol) << ',' << quote(r.study) << ',' << format_number(r.ladder_value) << ',' << quote(r.flags)
       << ',' << quote(r.estimate_kind) << ',' << quote(r.weight) << ',' << quote(r.smoother) << ','
       << quote(r.grid) << ',' << format_number(r.T) << ',' << r.time_samples << ',' << format_number(r.value)
       << ',' << quote(r.method) << ',' << format_number(r.residual);
    return os.str();
}

// ---------------------------------------------------------------- grids, hashing

GridSpec parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    if (parts.size() != 3) throw ParseError(0, "grid must be n,L,N");
    try {
        std::size_t used = 0;
        const int n = std::stoi(parts[0], &used);
        if (used != parts[0].size()) throw ParseError(0, "bad dimension in grid");
        const double L = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw ParseError(parts[0].size() + 1, "bad extent in grid");
        const int N = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw ParseError(parts[0].size() + parts[1].size() + 2, "bad point count in grid");
        return GridSpec::cube(n, L, N);
    } catch (const std::logic_error&) {
        throw ParseError(0, "grid must be n,L,N with numeric fields");
    }
}

GridSpec grid_from_json(const Json& j) {
    if (j.is_string()) return parse_grid(j.get<std::string>());
    if (j.is_array() && j.size() == 3) return GridSpec::cube(j[0].get<int>(), j[1].get<double>(), j[2].get<int>());
    if (j.is_object()) {
        const int n = j.at("n").get<int>();
        std::vector<double> L(n);
        std::vector<int> N(n);
        for (int a = 0; a < n; ++a) {
            L[a] = j.at("L").is_array() ? j.at("L").at(a).get<double>() : j.at("L").get<double>();
            N[a] = j.at("N").is_array() ? j.at("N").at(a).get<int>() : j.at("N").get<int>();
        }
        return GridSpec(n, L, N);
    }
    throw Error(ErrorKind::invalid_argument, "grid must be \"n,L,N\", [n,L,N] or {n,L,N}");
}

std::string describe_grid(const GridSpec& g) {
    std::ostringstream os;
    os << g.dimension();
    for (int a = 0; a < g.dimension(); ++a) os << (a ? "x" : ",") << format_number(g.extent(a));
    for (int a = 0; a < g.dimension(); ++a) os << (a ? "x" : ",") << g.points(a);
    return os.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::invalid_argument, "SHA-256 failed");
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string config_hash(const Json& config) { return sha256_hex(config.dump()); }

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse:
        case ErrorKind::invalid_argument:
        case ErrorKind::shape_mismatch:
        case ErrorKind::domain: return 2;
        case ErrorKind::budget: return 3;
        case ErrorKind::missing_artifact: return 4;
        default: return 1;
    }
}

// ---------------------------------------------------------------- classification rendering

namespace {

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// JSON has no infinity; such values are written as null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string flag_string(const ClassificationReport& r) {
    return std::string("H=") + to_string(r.H) + ";L=" + to_string(r.L) + ";HL=" + to_string(r.HL) +
           ";L'=" + to_string(r.Lprime);
}

}  // namespace

Json classification_json(const ClassificationReport& r) {
    Json j;
    j["symbol"] = r.symbol;
    j["dimension"] = r.dimension;
    j["order"] = r.order;
    j["kind"] = to_string(r.kind);
    j["homogeneous"] = r.homogeneous;
    j["H"] = to_string(r.H);
    j["h_min_gradient"] = finite_or_null(r.h_min_gradient);
    j["L"] = to_string(r.L);
    j["l_constant"] = finite_or_null(r.l_constant);
    j["l_constant_ladder"] = finite_or_null(r.l_constant_ladder);
    j["HL"] = to_string(r.HL);
    j["Lprime"] = to_string(r.Lprime);
    j["lprime_threshold"] = r.lprime_threshold;
    j["lprime_constant"] = finite_or_null(r.lprime_constant);
    Json cps = Json::array();
    for (const auto& c : r.critical_points)
        cps.push_back({{"point", vec_json(c.point)},
                       {"rank", c.rank.rank},
                       {"positive", c.rank.positive},
                       {"negative", c.rank.negative},
                       {"nondegenerate", c.nondegenerate}});
    j["critical_points"] = cps;
    j["critical_points_isolated"] = r.critical_points_isolated;
    j["radial_derivative_zeros"] = r.radial_derivative_zeros;
    j["applicable_theorems"] = r.applicable_theorems;
    for (const std::string t : {"H-theorem", "L-theorem", "HL-theorem", "radial-theorem", "polynomial-theorem",
                                "hessian-theorem", "morse-theorem"})
        j["applies"][t] = r.applies(t);
    j["notes"] = r.notes;
    return j;
}

std::string classification_table(const ClassificationReport& r) {
    std::ostringstream os;
    os << std::left;
    auto line = [&](const std::string& k, const std::string& v) { os << "  " << std::setw(22) << k << v << '\n'; };
    os << "symbol " << r.symbol << " (n=" << r.dimension << ", m=" << format_number(r.order) << ", "
       << to_string(r.kind) << ")\n";
    line("homogeneous", r.homogeneous ? "yes" : "no");
    line("H", to_string(r.H));
    line("min |grad a_m| (S)", format_number(r.h_min_gradient));
    line("L", to_string(r.L));
    line("L constant (ladder)", format_number(r.l_constant_ladder));
    line("HL", to_string(r.HL));
    line("L'", std::string(to_string(r.Lprime)) + " from |xi| >= " + format_number(r.lprime_threshold));
    line("critical points", std::to_string(r.critical_points.size()) +
                                (r.critical_points_isolated ? " (all non-degenerate)" : " (some degenerate)"));
    const std::size_t shown = std::min<std::size_t>(r.critical_points.size(), 12);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& c = r.critical_points[i];
        std::ostringstream p;
        p << c.point.transpose() << "  rank " << c.rank.rank;
        line("", p.str());
    }
    if (shown < r.critical_points.size()) line("", "... (" + std::to_string(r.critical_points.size() - shown) + " more)");
    if (!r.radial_derivative_zeros.empty()) {
        std::ostringstream z;
        for (double v : r.radial_derivative_zeros) z << format_number(v) << ' ';
        line("f' zeros", z.str());
    }
    std::string th;
    for (const auto& t : r.applicable_theorems) th += (th.empty() ? "" : ", ") + t;
    line("applicable", th.empty() ? "-" : th);
    for (const auto& n : r.notes) line("note", n);
    return os.str();
}

// ---------------------------------------------------------------- config helpers

namespace {

template <class T>
T opt(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

std::pair<std::string, double> split_spec(const std::string& text, double fallback) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {text, fallback};
    try {
        return {text.substr(0, colon), std::stod(text.substr(colon + 1))};
    } catch (const std::logic_error&) {
        throw ParseError(colon + 1, "expected a number after ':' in \"" + text + "\"");
    }
}

WeightSpec weight_from(const std::string& text) {
    const auto [kind, v] = split_spec(text, 1.0);
    if (kind == "none" || kind == "1") return WeightSpec::unit();
    if (kind == "bracket") return WeightSpec::bracket(v);
    if (kind == "homogeneous") return WeightSpec::homogeneous(v);
    throw ParseError(0, "unknown weight \"" + text + "\" (none | bracket:s | homogeneous:delta)");
}

SmootherSpec smoother_from(const std::string& text) {
    const auto [kind, v] = split_spec(text, 0.5);
    if (kind == "identity" || kind == "1") return SmootherSpec::identity();
    if (kind == "classical") return SmootherSpec::classical(v);
    if (kind == "bracket") return SmootherSpec::bracket(v);
    if (kind == "invariant") return SmootherSpec::invariant(v);
    if (kind == "invariant_bracket") return SmootherSpec::invariant_bracket(v);
    if (kind == "hoshiro") return SmootherSpec::hoshiro(v);
    throw ParseError(0, "unknown smoother \"" + text + "\"");
}

Symbol symbol_from(const Json& c) {
    if (!c.contains("symbol")) throw Error(ErrorKind::invalid_argument, "config needs a \"symbol\"");
    return parse_symbol(c.at("symbol").get<std::string>(), opt<int>(c, "dimension", 0));
}

GridSpec default_grid(int n) { return GridSpec::cube(n, 40.0, n == 1 ? 256 : (n == 2 ? 64 : 16)); }

GridSpec grid_of(const Json& c, int n) {
    const GridSpec g = c.contains("grid") ? grid_from_json(c.at("grid")) : default_grid(n);
    if (g.dimension() != n) throw Error(ErrorKind::shape_mismatch, "grid dimension differs from the symbol");
    return g;
}

EstimateSpec estimate_spec_of(const Json& c) {
    EstimateSpec s;
    s.weight = weight_from(opt<std::string>(c, "weight", "bracket:1"));
    s.smoother = smoother_from(opt<std::string>(c, "smoother", "invariant:0.5"));
    s.T = opt<double>(c, "T", 1.0);
    s.time_samples = opt<int>(c, "time_samples", 64);
    s.validate();
    return s;
}

void check_budget(const Json& c, double work) {
    const double budget = opt<double>(c, "budget", 4e10);
    if (work > budget) {
        std::ostringstream os;
        os << "work estimate " << work << " exceeds the budget " << budget;
        throw Error(ErrorKind::budget, os.str());
    }
}

ReportRow base_row(const std::string& symbol, const std::string& study) {
    ReportRow r;
    r.symbol = symbol;
    r.study = study;
    return r;
}

void fill_spec(ReportRow& r, const EstimateSpec& s, const GridSpec& g) {
    r.weight = s.weight.describe();
    r.smoother = s.smoother.describe();
    r.grid = describe_grid(g);
    r.T = s.T;
    r.time_samples = s.time_samples;
}

SupportPredicate band_support(const GridSpec& g, double band) {
    const double b = band > 0.0 ? band : 0.5 * g.nyquist();
    return [b](const Vec& xi) { return xi.norm() <= b; };
}

// ---------------------------------------------------------------- commands

RunResult cmd_classify(const Json& c) {
    const Symbol a = symbol_from(c);
    const ClassificationReport rep = classify(a);
    RunResult out;
    out.details = classification_json(rep);
    out.table = classification_table(rep);
    ReportRow r = base_row(rep.symbol, "classify");
    r.flags = flag_string(rep);
    r.estimate_kind = "classification";
    r.value = static_cast<double>(rep.critical_points.size());
    r.method = "sphere+newton";
    out.rows.push_back(r);
    return out;
}

RunResult cmd_propagate(const Json& c) {
    const Symbol a = symbol_from(c);
    const GridSpec g = grid_of(c, a.dimension());
    const std::uint64_t seed = opt<std::uint64_t>(c, "seed", 1);
    const auto times = opt<std::vector<double>>(c, "times", {0.5, 1.0, 2.0});
    const ComplexField phi = random_band_limited(g, band_support(g, opt<double>(c, "band", 0.0)), seed);
    RunResult out;
    Json norms = Json::array();
    for (double t : times) {
        const ComplexField u = propagate(phi, a, t);
        const ComplexField twice = propagate(u, a, t);
        const ComplexField direct = propagate(phi, a, 2.0 * t);
        ReportRow r = base_row(a.name(), "unitarity");
        r.grid = describe_grid(g);
        r.ladder_value = t;
        r.estimate_kind = "propagator";
        r.value = u.l2_norm() / phi.l2_norm();
        r.residual = std::abs(r.value - 1.0);
        r.method = "fft";
        out.rows.push_back(r);
        ReportRow q = r;
        q.study = "group_law";
        q.value = relative_distance(twice, direct);
        q.residual = q.value;
        out.rows.push_back(q);
        norms.push_back({{"t", t}, {"norm", u.l2_norm()}});
    }
    out.details["norms"] = norms;
    return out;
}

ConstantEstimate run_estimate(const Symbol& a, const EstimateSpec& s, const GridSpec& g, const Json& c,
                              std::uint64_t seed, EstimateMethod& method_out) {
    const std::string m = opt<std::string>(c, "method", "power");
    EstimateParams p;
    p.ensemble_size = opt<int>(c, "ensemble_size", 64);
    p.max_iterations = opt<int>(c, "max_iterations", 200);
    p.tolerance = opt<double>(c, "tolerance", 1e-8);
    if (m == "power") method_out = EstimateMethod::power_iteration;
    else if (m == "ensemble") method_out = EstimateMethod::ensemble;
    else throw ParseError(0, "method must be power or ensemble");
    return estimate_constant(a, s, g, method_out, p, seed);
}

double work_factor(const Json& c) {
    return opt<std::string>(c, "method", "power") == "ensemble" ? opt<int>(c, "ensemble_size", 64)
                                                                 : 2.0 * opt<int>(c, "max_iterations", 200);
}

RunResult cmd_estimate(const Json& c) {
    const Symbol a = symbol_from(c);
    const EstimateSpec s = estimate_spec_of(c);
    const std::uint64_t seed = opt<std::uint64_t>(c, "seed", 1);
    const std::string study = opt<std::string>(c, "study", "single");
    RunResult out;

    auto row_for = [&](const GridSpec& g, const ConstantEstimate& e, EstimateMethod m, const std::string& st) {
        ReportRow r = base_row(a.name(), st);
        fill_spec(r, s, g);
        r.ladder_value = g.points(0);
        r.estimate_kind = "constant";
        r.value = e.value;
        r.method = to_string(m);
        r.residual = e.residual;
        r.flags = e.converged ? "converged" : "not-converged";
        return r;
    };

    if (study == "single") {
        const GridSpec g = grid_of(c, a.dimension());
        check_budget(c, double(g.size()) * s.time_samples * work_factor(c));
        EstimateMethod m;
        const ConstantEstimate e = run_estimate(a, s, g, c, seed, m);
        out.rows.push_back(row_for(g, e, m, "single"));
        out.details["rayleigh"] = e.rayleigh;
    } else if (study == "refinement") {
        if (!c.contains("ladder") || !c.at("ladder").is_array() || c.at("ladder").empty())
            throw Error(ErrorKind::invalid_argument, "refinement study needs a non-empty \"ladder\" of grids");
        std::vector<GridSpec> grids;
        for (const Json& gj : c.at("ladder")) {
            grids.push_back(grid_from_json(gj));
            if (grids.back().dimension() != a.dimension())
                throw Error(ErrorKind::shape_mismatch, "ladder grid dimension differs from the symbol");
            check_budget(c, double(grids.back().size()) * s.time_samples * work_factor(c));
        }
        std::vector<double> values;
        Json ladder = Json::array();
        for (const GridSpec& g : grids) {
            EstimateMethod m;
            const ConstantEstimate e = run_estimate(a, s, g, c, seed, m);
            out.rows.push_back(row_for(g, e, m, "refinement"));
            values.push_back(e.value);
            ladder.push_back({{"grid", describe_grid(g)}, {"value", e.value}, {"iterations", e.iterations}});
        }
        ReportRow r = base_row(a.name(), "refinement_spread");
        fill_spec(r, s, grids.back());
        r.estimate_kind = "spread";
        r.value = relative_spread(values);
        r.method = "max-min/min";
        out.rows.push_back(r);
        out.details["ladder"] = ladder;
    } else if (study == "concentration") {
        const GridSpec g = grid_of(c, a.dimension());
        const auto widths = opt<std::vector<double>>(c, "widths", {});
        if (widths.empty()) throw Error(ErrorKind::invalid_argument, "concentration study needs \"widths\"");
        const double radius = opt<double>(c, "radius", 1.0);
        EstimateSpec classical = s;
        classical.smoother = smoother_from(opt<std::string>(c, "classical", "classical:1.5"));
        EstimateSpec invariant = s;
        check_budget(c, double(g.size()) * s.time_samples * 2.0 * widths.size());
        const ConcentrationResult res = concentration_study(
            a, classical, invariant, g, widths, [radius](const Vec& xi) { return xi.norm() - radius; }, seed);
        Json rows = Json::array();
        for (const auto& row : res.rows) {
            for (int k = 0; k < 3; ++k) {
                ReportRow r = base_row(a.name(), k == 0   ? "concentration_classical"
                                                 : k == 1 ? "concentration_invariant"
                                                          : "concentration_quotient");
                fill_spec(r, k == 0 ? classical : invariant, g);
                r.ladder_value = row.width;
                r.estimate_kind = "ratio";
                r.value = k == 0 ? row.ratio_classical
                                 : (k == 1 ? row.ratio_invariant : row.ratio_classical / row.ratio_invariant);
                r.method = "localized-field";
                out.rows.push_back(r);
            }
            rows.push_back({{"width", row.width},
                            {"classical", row.ratio_classical},
                            {"invariant", row.ratio_invariant},
                            {"modes", row.modes}});
        }
        ReportRow r = base_row(a.name(), "concentration_slope");
        fill_spec(r, invariant, g);
        r.estimate_kind = "slope";
        r.value = res.slope;
        r.residual = res.invariant_variation;
        r.method = "least-squares";
        out.rows.push_back(r);
        out.details["rows"] = rows;
        out.details["slope"] = res.slope;
        out.details["invariant_variation"] = res.invariant_variation;
    } else {
        throw Error(ErrorKind::invalid_argument, "study must be single, refinement or concentration");
    }
    return out;
}

RunResult cmd_compare(const Json& c) {
    const std::string mode = opt<std::string>(c, "mode", "model");
    const std::uint64_t seed = opt<std::uint64_t>(c, "seed", 1);
    const int fields = opt<int>(c, "fields", 8);
    if (fields < 1) throw Error(ErrorKind::invalid_argument, "fields must be positive");
    RunResult out;
    if (mode == "model") {
        const Json model = c.value("model", Json::object());
        const double l = opt<double>(model, "l", 1.0), m = opt<double>(model, "m", 3.0);
        const int dim = opt<int>(c, "dim", 1);
        GridSpec g;
        if (c.contains("grid")) g = grid_from_json(c.at("grid"));
        else if (dim == 1) g = GridSpec::cube(1, 2048.0, 1024);
        else g = GridSpec(2, std::vector<double>{1024.0, 64.0}, std::vector<int>{512, 64});
        ModelCheckOptions o;
        o.T = opt<double>(c, "T", dim == 1 ? 300.0 : 200.0);
        o.dt = opt<double>(c, "dt", 0.25);
        o.x = opt<double>(c, "x", 0.0);
        PacketOptions po;
        po.one_sided = dim == 1;
        std::ostringstream name;
        name << "model l=" << l << " m=" << m << " n=" << dim;
        double worst = 0.0;
        Json ratios = Json::array();
        for (int f = 0; f < fields; ++f) {
            const ComplexField phi = wave_packets(g, mix_seed(seed, f), po);
            const ModelCheck mc = model_equality_check(l, m, phi, dim, o);
            ReportRow r = base_row(name.str(), "model_ratio");
            r.grid = describe_grid(g);
            r.T = o.T;
            r.time_samples = static_cast<int>(std::llround(2.0 * o.T / o.dt)) + 1;
            r.ladder_value = f;
            r.estimate_kind = "ratio";
            r.value = mc.ratio;
            r.residual = std::abs(mc.ratio - mc.expected);
            r.method = "mode-sum";
            out.rows.push_back(r);
            worst = std::max(worst, r.residual);
            ratios.push_back({{"lhs", mc.lhs}, {"rhs", mc.rhs}, {"ratio", mc.ratio}, {"expected", mc.expected}});
        }
        ReportRow r = base_row(name.str(), "model_max_deviation");
        r.grid = describe_grid(g);
        r.T = o.T;
        r.estimate_kind = "deviation";
        r.value = worst;
        r.method = "max";
        out.rows.push_back(r);
        out.details["fields"] = ratios;
    } else if (mode == "translation") {
        const GridSpec g = c.contains("grid") ? grid_from_json(c.at("grid")) : GridSpec::cube(1, 64.0, 1024);
        const std::vector<double> xs = opt<std::vector<double>>(c, "x", {-10.0, 0.0, 3.7});
        for (int f = 0; f < fields; ++f) {
            const ComplexField phi =
                random_band_limited(g, band_support(g, opt<double>(c, "band", 0.0)), mix_seed(seed, f));
            ReportRow r = base_row("xi1", "translation_identity");
            r.grid = describe_grid(g);
            r.T = 0.5 * g.extent(0);
            r.time_samples = 2 * g.points(0);
            r.ladder_value = f;
            r.estimate_kind = "deviation";
            r.value = translation_identity_check(phi, xs);
            r.residual = r.value;
            r.method = "exact-phase-table";
            out.rows.push_back(r);
        }
    } else {
        throw Error(ErrorKind::invalid_argument, "compare mode must be model or translation");
    }
    return out;
}

RunResult cmd_decompose(const Json& c) {
    const Symbol a = symbol_from(c);
    const Polynomial* p = a.polynomial();
    if (!p) throw Error(ErrorKind::invalid_argument, "decompose needs a polynomial symbol");
    const int axis = opt<int>(c, "axis", 1) - 1;
    const GridSpec g = c.contains("grid") ? grid_from_json(c.at("grid")) : GridSpec::cube(a.dimension(), 64.0, 128);
    if (g.dimension() != a.dimension()) throw Error(ErrorKind::shape_mismatch, "grid dimension differs");
    const MonotoneDecomposition d = monotone_decomposition(*p, axis, g);
    const DecompositionAudit audit = audit_decomposition(*p, d, g);
    RunResult out;

    Json slices = Json::array();
    const SliceRoots* centre = nullptr;
    for (const auto& s : d.slices) {
        slices.push_back({{"xi_prime", vec_json(s.xi_prime)}, {"roots", s.roots}, {"vanishes", s.derivative_vanishes}});
        if (s.xi_prime.norm() == 0.0) centre = &s;
    }
    out.details["axis"] = axis + 1;
    out.details["slices"] = slices;
    const std::string grid = describe_grid(g);
    if (centre)
        for (std::size_t k = 0; k < centre->roots.size(); ++k) {
            ReportRow r = base_row(a.name(), "breakpoint");
            r.grid = grid;
            r.ladder_value = static_cast<double>(k);
            r.estimate_kind = "root";
            r.flags = "axis=" + std::to_string(axis + 1) + ";slice=origin";
            r.value = centre->roots[k];
            r.method = "companion-matrix";
            out.rows.push_back(r);
        }
    std::vector<double> counts(d.labels.size(), 0.0);
    for (int id : d.piece)
        if (id >= 0) counts[id] += 1.0;
    for (std::size_t id = 0; id < d.labels.size(); ++id) {
        ReportRow r = base_row(a.name(), "piece");
        r.grid = grid;
        r.ladder_value = static_cast<double>(id);
        r.estimate_kind = "lattice_points";
        r.flags = "k=" + std::to_string(d.labels[id].first) + ";l=" + std::to_string(d.labels[id].second);
        r.value = counts[id];
        r.method = "slice-roots";
        out.rows.push_back(r);
    }
    ReportRow e = base_row(a.name(), "eta_max");
    e.grid = grid;
    e.estimate_kind = "eta";
    e.flags = std::string("sign_constant=") + (audit.sign_constant ? "true" : "false") +
              ";covers=" + (audit.covers ? "true" : "false");
    e.value = audit.eta_max;
    e.residual = audit.eta_min;
    e.method = "lattice";
    out.rows.push_back(e);

    if (c.contains("assemble")) {
        const Json& as = c.at("assemble");
        const double s = opt<double>(as, "s", 1.0), T = opt<double>(as, "T", 2.0);
        const int nt = opt<int>(as, "time_samples", 32);
        check_budget(c, double(g.size()) * nt * (2.0 + 4.0 * g.dimension()));
        const ComplexField phi = random_band_limited(g, band_support(g, opt<double>(as, "band", 0.0)),
                                                     opt<std::uint64_t>(c, "seed", 1));
        const AssembledEstimate ae = assemble_polynomial_estimate(*p, s, phi, T, nt);
        for (int k = 0; k < 3; ++k) {
            ReportRow r = base_row(a.name(), k == 0 ? "assembled_combined" : (k == 1 ? "assembled_axis_sum"
                                                                                     : "assembled_piece_sum"));
            r.grid = grid;
            r.T = T;
            r.time_samples = nt;
            r.weight = WeightSpec::bracket(s).describe();
            r.estimate_kind = "ratio";
            r.flags = std::string("bound_holds=") + (ae.bound_holds ? "true" : "false");
            r.value = k == 0 ? ae.combined : (k == 1 ? ae.axis_sum : ae.piece_sum);
            r.method = "trapezoid";
            out.rows.push_back(r);
        }
        out.details["assembled"] = {{"combined", ae.combined},     {"axis_ratios", ae.axis_ratios},
                                    {"shell_ratios", ae.shell_ratios}, {"piece_ratios", ae.piece_ratios},
                                    {"bound_holds", ae.bound_holds}};
    }
    return out;
}

FrequencyMap map_from(const Json& c, int n) {
    const Json m = c.value("map", Json("shear"));
    if (m.is_string()) {
        const auto [kind, v] = split_spec(m.get<std::string>(), 1.0);
        if (kind == "identity") return FrequencyMap::identity(n);
        if (kind == "shear") {
            if (n != 2) throw Error(ErrorKind::invalid_argument, "shear map is 2-d");
            Mat s(2, 2);
            s << 1.0, 1.0, 0.0, 1.0;
            return FrequencyMap::linear(s);
        }
        if (kind == "rotation") {
            if (n != 2) throw Error(ErrorKind::invalid_argument, "rotation map is 2-d");
            Mat r(2, 2);
            r << std::cos(v), -std::sin(v), std::sin(v), std::cos(v);
            return FrequencyMap::linear(r);
        }
        if (kind == "radial") {
            if (!(v > 0.0)) throw Error(ErrorKind::invalid_argument, "radial scale must be positive");
            return FrequencyMap::radial_warp(
                n, [v](double r) { return v * r; }, [v](double) { return v; }, [v](double r) { return r / v; },
                true);
        }
        throw ParseError(0, "unknown map \"" + m.get<std::string>() + "\"");
    }
    Mat mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mat(i, j) = m.at("matrix").at(i).at(j).get<double>();
    return FrequencyMap::linear(mat);
}

CutoffSpec cutoff_from(const Json& c) {
    const std::string text = opt<std::string>(c, "cutoff", "annulus:0.5,2,0.25");
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> v;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        for (std::string p; std::getline(ss, p, ',');) {
            try {
                v.push_back(std::stod(p));
            } catch (const std::logic_error&) {
                throw ParseError(colon + 1, "bad cutoff parameter in \"" + text + "\"");
            }
        }
    }
    if (kind == "one") return CutoffSpec::one();
    if (kind == "annulus" && v.size() == 3) return CutoffSpec::annulus(v[0], v[1], v[2]);
    if (kind == "ball" && v.size() == 2) return CutoffSpec::ball(v[0], v[1]);
    throw ParseError(0, "cutoff must be one, annulus:inner,outer,ramp or ball:radius,ramp");
}

RunResult cmd_canonical(const Json& c) {
    const Symbol sigma = symbol_from(c);
    const int n = sigma.dimension();
    const FrequencyMap psi = map_from(c, n);
    const CutoffSpec gamma = cutoff_from(c);
    const std::string study = opt<std::string>(c, "study", "equivalence");
    const std::uint64_t seed = opt<std::uint64_t>(c, "seed", 1);
    const int ensemble = opt<int>(c, "ensemble_size", 16);
    RunResult out;
    if (study == "rank") {
        for (const RankPair& rp : rank_invariance_check(sigma, psi)) {
            ReportRow r = base_row(sigma.name(), "rank_pair");
            r.flags = psi.describe();
            r.ladder_value = static_cast<double>(out.rows.size());
            r.estimate_kind = "hessian_rank";
            r.value = rp.rank_a;
            r.residual = std::abs(rp.rank_a - rp.rank_sigma);
            r.method = "eigen";
            out.rows.push_back(r);
            out.details["points"].push_back({{"point", vec_json(rp.point)},
                                             {"rank_a", rp.rank_a},
                                             {"rank_sigma", rp.rank_sigma}});
        }
        return out;
    }
    const GridSpec g = grid_of(c, n);
    ReportRow dw = base_row(sigma.name(), "determinant_window");
    dw.grid = describe_grid(g);
    dw.flags = psi.describe() + ";" + gamma.label;
    dw.estimate_kind = "C";
    dw.value = determinant_window(psi, gamma, g);
    dw.method = "lattice";
    if (study == "equivalence") {
        const EstimateSpec s = estimate_spec_of(c);
        check_budget(c, double(g.size()) * s.time_samples * 2.0 * ensemble);
        const EquivalenceStudy st = equivalence_study(sigma, psi, gamma, s, g, ensemble, seed);
        for (std::size_t m = 0; m < st.ratios.size(); ++m) {
            ReportRow r = base_row(sigma.name(), "equivalence_ratio");
            fill_spec(r, s, g);
            r.flags = psi.describe() + ";" + gamma.label;
            r.ladder_value = static_cast<double>(m);
            r.estimate_kind = "ratio";
            r.value = st.ratios[m];
            r.method = "inverse-transform";
            out.rows.push_back(r);
        }
        ReportRow b = base_row(sigma.name(), "equivalence_band");
        fill_spec(b, s, g);
        b.flags = std::string("q_flagged=") + (st.q_flagged ? "true" : "false");
        b.estimate_kind = "band";
        b.value = st.band;
        b.residual = std::isfinite(st.q_sup) ? st.q_sup : 0.0;
        b.method = "max(high,1/low)";
        out.rows.push_back(b);
        out.details["ratios"] = st.ratios;
        out.details["q_sup"] = finite_or_null(st.q_sup);
    } else if (study == "boundedness") {
        const double kappa = opt<double>(c, "kappa", 0.0);
        check_budget(c, double(g.size()) * ensemble * 4.0);
        const BoundednessProbe bp = boundedness_probe(psi, gamma, kappa, g, ensemble, seed);
        ReportRow r = base_row(sigma.name(), "boundedness");
        r.grid = describe_grid(g);
        r.weight = WeightSpec::bracket(-kappa).describe();
        r.flags = std::string("guaranteed=") + (bp.guaranteed ? "true" : "false");
        r.ladder_value = kappa;
        r.estimate_kind = "operator_norm";
        r.value = bp.value;
        r.residual = bp.det_bound;
        r.method = "ensemble";
        out.rows.push_back(r);
    } else {
        throw Error(ErrorKind::invalid_argument, "canonical study must be equivalence, boundedness or rank");
    }
    out.rows.push_back(dw);
    return out;
}

TimeCoefficient coefficient_from(const std::string& text) {
    if (text == "lorentzian") return TimeCoefficient::lorentzian();
    const auto [kind, v] = split_spec(text, 1.0);
    if (kind == "const") {
        if (v == 0.0) throw Error(ErrorKind::domain, "c(t) = 0 gives no evolution");
        return TimeCoefficient::constant(v);
    }
    throw ParseError(0, "coefficient must be const:k or lorentzian");
}

RunResult cmd_timedep(const Json& c) {
    const Symbol a = symbol_from(c);
    const GridSpec g = grid_of(c, a.dimension());
    EstimateSpec s = estimate_spec_of(c);
    const TimeCoefficient coef = coefficient_from(opt<std::string>(c, "c", "const:1"));
    const double alpha = opt<double>(c, "alpha", -s.T), beta = opt<double>(c, "beta", s.T);
    const int direct = opt<int>(c, "direct_samples", s.time_samples);
    check_budget(c, double(g.size()) * (s.time_samples + direct));
    const ComplexField phi =
        random_band_limited(g, band_support(g, opt<double>(c, "band", 0.0)), opt<std::uint64_t>(c, "seed", 1));
    const TimedepResult tr = timedep_norm(a, coef, s, phi, alpha, beta);
    const double dv = timedep_norm_direct(a, coef, s, phi, alpha, beta, direct);
    RunResult out;
    ReportRow r = base_row(a.name(), "timedep");
    fill_spec(r, s, g);
    r.flags = coef.label();
    r.estimate_kind = "norm";
    r.value = tr.value;
    r.residual = std::abs(tr.value - dv) / std::max(dv, 1e-300);
    r.method = "substitution";
    out.rows.push_back(r);
    ReportRow q = r;
    q.study = "timedep_direct";
    q.time_samples = direct;
    q.value = dv;
    q.method = "direct";
    out.rows.push_back(q);
    out.details = {{"tau_begin", tr.tau_begin}, {"tau_end", tr.tau_end}, {"nodes", tr.nodes}, {"direct", dv}};
    return out;
}

}  // namespace

RunResult run_experiment(const Json& config) {
    if (!config.is_object()) throw Error(ErrorKind::invalid_argument, "config must be a JSON object");
    const std::string cmd = opt<std::string>(config, "command", "");
    try {
        if (cmd == "classify") return cmd_classify(config);
        if (cmd == "propagate") return cmd_propagate(config);
        if (cmd == "estimate") return cmd_estimate(config);
        if (cmd == "compare") return cmd_compare(config);
        if (cmd == "decompose") return cmd_decompose(config);
        if (cmd == "canonical") return cmd_canonical(config);
        if (cmd == "timedep") return cmd_timedep(config);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("config: ") + e.what());
    }
    throw Error(ErrorKind::invalid_argument, "unknown command \"" + cmd + "\"");
}

// ---------------------------------------------------------------- persistence

namespace {

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::missing_artifact, "cannot write " + p.string());
    f << bytes;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::missing_artifact, "cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

fs::path write_run(const fs::path& out_root, const Json& config, const RunResult& result) {
    const std::string hash = config_hash(config);
    const fs::path dir = out_root / hash;
    fs::create_directories(dir);
    std::string csv = "# schema " + std::to_string(kSchemaVersion) + "\n" + csv_header() + "\n";
    for (const auto& r : result.rows) csv += csv_line(r) + "\n";
    write_file(dir / "results.csv", csv);
    write_file(dir / "details.json", result.details.dump(2) + "\n");
    Json manifest;
    manifest["config_hash"] = hash;
    manifest["tool_version"] = kToolVersion;
    manifest["schema_version"] = kSchemaVersion;
    manifest["timestamp"] = utc_now();
    manifest["seed"] = opt<std::uint64_t>(config, "seed", 1);
    manifest["config"] = config;
    manifest["files"] = {"results.csv", "details.json"};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return dir;
}

MergedReport merge_reports(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(ErrorKind::missing_artifact, "no such run directory: " + root.string());
    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json")) runs.push_back(e.path());
    if (runs.empty()) throw Error(ErrorKind::missing_artifact, "no run manifests under " + root.string());
    std::sort(runs.begin(), runs.end());

    struct Line {
        std::string symbol, study;
        double ladder;
        std::string text;
    };
    std::vector<Line> lines;
    MergedReport out;
    out.summary["schema_version"] = kSchemaVersion;
    out.summary["runs"] = Json::array();
    for (const fs::path& dir : runs) {
        Json manifest;
        try {
            manifest = Json::parse(read_file(dir / "manifest.json"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::missing_artifact, "unreadable manifest in " + dir.string());
        }
        const std::string stored = manifest.value("config_hash", "");
        if (config_hash(manifest.at("config")) != stored)
            throw Error(ErrorKind::missing_artifact, "manifest hash mismatch in " + dir.string());
        std::istringstream csv(read_file(dir / "results.csv"));
        std::size_t count = 0;
        for (std::string l; std::getline(csv, l);) {
            if (l.empty() || l[0] == '#' || l == csv_header()) continue;
            const auto cells = split_csv(l);
            if (cells.size() != csv_columns().size())
                throw Error(ErrorKind::missing_artifact, "malformed row in " + (dir / "results.csv").string());
            lines.push_back({cells[0], cells[1], std::stod(cells[2]), l});
            ++count;
        }
        out.summary["runs"].push_back({{"config_hash", stored},
                                       {"command", manifest.at("config").value("command", "")},
                                       {"rows", count}});
    }
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tie(a.symbol, a.study, a.ladder, a.text) < std::tie(b.symbol, b.study, b.ladder, b.text);
    });
    out.csv = "# schema " + std::to_string(kSchemaVersion) + "\n" + csv_header() + "\n";
    for (const auto& l : lines) out.csv += l.text + "\n";
    out.summary["rows"] = lines.size();
    return out;
}

}  // namespace smoothlab
