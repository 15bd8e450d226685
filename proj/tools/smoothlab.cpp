// smoothlab command-line front end.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "smoothlab/error.hpp"
#include "smoothlab/experiment.hpp"
#include "smoothlab/parallel.hpp"

namespace sl = smoothlab;

namespace {

struct Common {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string grid;
    unsigned threads = 1;
};

sl::Json load_config(const std::string& path) {
    if (path.empty()) return sl::Json::object();
    std::ifstream f(path);
    if (!f) throw sl::Error(sl::ErrorKind::missing_artifact, "cannot open config " + path);
    try {
        return sl::Json::parse(f);
    } catch (const sl::Json::exception& e) {
        throw sl::Error(sl::ErrorKind::parse, std::string("config ") + path + ": " + e.what());
    }
}

// Command-line values override the config file, which overrides the defaults.
template <class T>
void put(sl::Json& c, const char* key, const CLI::Option* o, const T& v) {
    if (o->count() > 0) c[key] = v;
}

int run_and_write(sl::Json config, const Common& common, const CLI::App& app, bool classify) {
    if (app.get_option("--seed")->count() > 0 || !config.contains("seed")) config["seed"] = common.seed;
    if (!common.grid.empty()) {
        sl::parse_grid(common.grid);  // validate early
        config["grid"] = common.grid;
    }
    const sl::RunResult result = sl::run_experiment(config);
    const auto dir = sl::write_run(common.out, config, result);
    if (classify) {
        std::cout << result.details.dump(2) << '\n';
        std::cerr << result.table;
    } else {
        std::cout << sl::csv_header() << '\n';
        for (const auto& r : result.rows) std::cout << sl::csv_line(r) << '\n';
    }
    std::cerr << "run written to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smoothlab: smoothing estimates for i u_t + a(D) u = 0 on periodic grids"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "JSON experiment config");
    app.add_option("--seed", common.seed, "master seed");
    app.add_option("--out", common.out, "output root directory");
    app.add_option("--grid", common.grid, "cube grid n,L,N");
    app.add_option("--threads", common.threads, "worker threads (speed only)")->check(CLI::PositiveNumber);

    std::string expr, weight, smoother, study, method, map, cutoff, coef, report_dir, mode;
    int dimension = 0, axis = 1, time_samples = 0, ensemble = 0, dim = 1, fields = 0, direct = 0;
    double T = 0.0, kappa = 0.0, alpha = 0.0, beta = 0.0;
    std::vector<double> times, widths;
    std::vector<std::string> model, ladder;

    auto symbol_arg = [&](CLI::App* s) {
        s->add_option("expr", expr, "symbol expression")->required();
        s->add_option("--dimension", dimension, "number of variables (0 infers)");
    };
    auto spec_args = [&](CLI::App* s) {
        s->add_option("--weight", weight, "none | bracket:s | homogeneous:delta");
        s->add_option("--smoother", smoother, "identity | classical:eta | bracket:eta | invariant:eta | hoshiro:s");
        s->add_option("--T", T, "half-window: t in [-T, T]");
        s->add_option("--time-samples", time_samples, "trapezoid nodes");
    };

    auto* classify = app.add_subcommand("classify", "classify a symbol");
    symbol_arg(classify);
    auto* propagate = app.add_subcommand("propagate", "propagator unitarity and group law");
    symbol_arg(propagate);
    propagate->add_option("--times", times, "propagation times");
    auto* estimate = app.add_subcommand("estimate", "smoothing constants");
    symbol_arg(estimate);
    spec_args(estimate);
    estimate->add_option("--study", study, "single | refinement | concentration");
    estimate->add_option("--method", method, "power | ensemble");
    estimate->add_option("--ensemble", ensemble, "ensemble size");
    estimate->add_option("--ladder", ladder, "refinement grids n,L,N ...");
    estimate->add_option("--widths", widths, "concentration widths");
    auto* compare = app.add_subcommand("compare", "comparison identities");
    compare->add_option("--model", model, "l=<order> m=<order>")->expected(1, 2);
    compare->add_option("--dim", dim, "model dimension (1 or 2)");
    compare->add_option("--mode", mode, "model | translation");
    compare->add_option("--fields", fields, "number of test fields");
    auto* decompose = app.add_subcommand("decompose", "monotone decomposition of a polynomial");
    symbol_arg(decompose);
    decompose->add_option("--axis", axis, "axis (1-based)");
    auto* canonical = app.add_subcommand("canonical", "canonical transformation checks");
    symbol_arg(canonical);
    spec_args(canonical);
    canonical->add_option("--map", map, "identity | shear | rotation:angle | radial:c");
    canonical->add_option("--cutoff", cutoff, "one | annulus:in,out,ramp | ball:r,ramp");
    canonical->add_option("--study", study, "equivalence | boundedness | rank");
    canonical->add_option("--kappa", kappa, "weight exponent for boundedness");
    canonical->add_option("--ensemble", ensemble, "ensemble size");
    auto* timedep = app.add_subcommand("timedep", "time-dependent coefficient");
    symbol_arg(timedep);
    spec_args(timedep);
    timedep->add_option("--c", coef, "const:k | lorentzian");
    timedep->add_option("--alpha", alpha, "interval start");
    timedep->add_option("--beta", beta, "interval end");
    timedep->add_option("--direct-samples", direct, "nodes of the direct t-side rule");
    auto* report = app.add_subcommand("report", "merge run directories");
    report->add_option("dir", report_dir, "root holding run directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sl::set_worker_count(common.threads);
        if (report->parsed()) {
            const sl::MergedReport m = sl::merge_reports(report_dir);
            std::ofstream(std::filesystem::path(report_dir) / "report.csv", std::ios::binary) << m.csv;
            std::ofstream(std::filesystem::path(report_dir) / "report.json", std::ios::binary)
                << m.summary.dump(2) << '\n';
            std::cout << m.csv;
            return 0;
        }

        sl::Json c = load_config(common.config_path);
        CLI::App* sub = app.get_subcommands().front();
        c["command"] = sub->get_name();
        if (sub->get_option_no_throw("expr") && sub->get_option("expr")->count() > 0) c["symbol"] = expr;
        auto opt = [&](const char* name) { return sub->get_option_no_throw(name); };
        auto set = [&](const char* name, const char* key, const auto& v) {
            if (const CLI::Option* o = opt(name)) put(c, key, o, v);
        };
        set("--dimension", "dimension", dimension);
        set("--weight", "weight", weight);
        set("--smoother", "smoother", smoother);
        set("--T", "T", T);
        set("--time-samples", "time_samples", time_samples);
        set("--study", "study", study);
        set("--method", "method", method);
        set("--ensemble", "ensemble_size", ensemble);
        set("--widths", "widths", widths);
        set("--times", "times", times);
        set("--axis", "axis", axis);
        set("--map", "map", map);
        set("--cutoff", "cutoff", cutoff);
        set("--kappa", "kappa", kappa);
        set("--c", "c", coef);
        set("--alpha", "alpha", alpha);
        set("--beta", "beta", beta);
        set("--direct-samples", "direct_samples", direct);
        set("--dim", "dim", dim);
        set("--mode", "mode", mode);
        set("--fields", "fields", fields);
        if (const CLI::Option* o = opt("--ladder"); o && o->count() > 0) c["ladder"] = ladder;
        if (const CLI::Option* o = opt("--model"); o && o->count() > 0) {
            for (const auto& kv : model) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw sl::ParseError(0, "--model expects l=<order> m=<order>");
                try {
                    c["model"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
                } catch (const std::logic_error&) {
                    throw sl::ParseError(eq + 1, "--model value is not a number");
                }
            }
        }
        return run_and_write(c, common, app, sub == classify);
    } catch (const sl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sl::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
