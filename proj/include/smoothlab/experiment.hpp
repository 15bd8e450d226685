#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "smoothlab/classify.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/grid.hpp"

namespace smoothlab {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// One CSV line. Numbers are written with %.17g so a re-run is byte-identical.
struct ReportRow {
    std::string symbol;
    std::string study;
    double ladder_value = 0.0;
    std::string flags;
    std::string estimate_kind;
    std::string weight;
    std::string smoother;
    std::string grid;
    double T = 0.0;
    int time_samples = 0;
    double value = 0.0;
    std::string method;
    double residual = 0.0;
};

const std::vector<std::string>& csv_columns();
std::string csv_header();
/// Throws ErrorKind::non_finite if a numeric cell is not finite.
std::string csv_line(const ReportRow& row);
std::string format_number(double v);

struct RunResult {
    std::vector<ReportRow> rows;
    Json details = Json::object();
    std::string table;  // human-readable rendering, when the command has one
};

/// "n,L,N" (cube grid) -> GridSpec; throws ErrorKind::parse on malformed text.
GridSpec parse_grid(const std::string& text);
/// Accepts "n,L,N", [n, L, N] or {"n":..,"L":..,"N":..}; `L` and `N` may be arrays.
GridSpec grid_from_json(const Json& j);
std::string describe_grid(const GridSpec& g);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);
/// Hash of the canonical (sorted-key, compact) dump of the config.
std::string config_hash(const Json& config);

/// Runs config["command"]: classify, propagate, estimate, compare, decompose,
/// canonical or timedep. Throws Error with ErrorKind::budget when the work
/// estimate prod N_j * N_t * ensemble exceeds config["budget"] (default 4e10).
RunResult run_experiment(const Json& config);

/// JSON rendering of a classification report.
Json classification_json(const ClassificationReport& rep);
/// Fixed-width table of the same report.
std::string classification_table(const ClassificationReport& rep);

/// Writes out/<hash>/{manifest.json, results.csv, details.json} and returns the
/// run directory.
std::filesystem::path write_run(const std::filesystem::path& out_root, const Json& config, const RunResult& result);

struct MergedReport {
    std::string csv;
    Json summary;
};

/// Merges every run directory below `root` (one level). Rows are sorted by
/// (symbol, study, ladder value); manifests are re-hashed. Throws
/// ErrorKind::missing_artifact when no manifest is found or a hash mismatches.
MergedReport merge_reports(const std::filesystem::path& root);

/// CLI exit code for an exception kind: 2 parse/config/domain, 3 budget, 4 artifacts, 1 otherwise.
int exit_code_for(ErrorKind kind);

}  // namespace smoothlab
