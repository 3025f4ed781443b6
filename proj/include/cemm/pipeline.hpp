#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cemm/conformal.hpp"
#include "cemm/mining.hpp"
#include "cemm/predictor.hpp"
#include "cemm/tabular.hpp"

namespace cemm {

enum class ReportFormat { json, csv, text };

ReportFormat report_format_from_string(std::string_view name);
std::string_view to_string(ReportFormat format);

// Configuration / flag validation failures; the CLI maps these to exit 1.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Failures inside the pipeline, tagged with the stage they happened in; the
// CLI maps these to exit 2.
struct PipelineError : std::runtime_error {
    std::string stage;
    PipelineError(std::string stage_name, const std::string& message)
        : std::runtime_error("[" + stage_name + "] " + message), stage(std::move(stage_name)) {}
};

struct OutputConfig {
    ReportFormat format = ReportFormat::json;
    std::string path;  // empty: stdout
    bool emit_diagnostics = false;
};

struct RunConfig {
    std::string dataset_path;
    std::string schema_path;
    std::optional<std::string> predictions_path;
    std::optional<Task> task;                 // default: inferred from the schema
    double alpha = 0.1;
    std::optional<ScoreMethod> score_method;  // default: aps / cqr by task
    double calib_fraction = 0.5;
    std::uint64_t seed = 0;
    MiningParams mining;
    std::vector<Direction> directions{Direction::maximize, Direction::minimize};
    OutputConfig output;
    bool calibrate_only = false;  // stop after target generation
};

struct ParsedCli {
    std::string subcommand;  // mine | calibrate | report
    RunConfig config;
    std::string report_input;  // report subcommand: stored JSON path
    std::string help;          // non-empty when help was requested
};

// Flags override config-file values override defaults. Throws ConfigError on
// validation failures (unknown flags, incompatible method/task, bad ranges).
ParsedCli parse_config(const std::vector<std::string>& args);

struct SubgroupReportEntry {
    int rank = 0;
    std::string direction;
    std::string description;
    std::size_t size = 0;
    double aul = 0.0;
    double raul = 0.0;
};

struct Report {
    nlohmann::ordered_json manifest;
    double global_aul = 0.0;
    double coverage = 0.0;
    CalibrationResult calibration;
    std::vector<SubgroupReportEntry> entries;

    // per-test-record diagnostics, record_id order
    std::vector<int> diag_record_ids;
    std::vector<double> diag_r;
    std::vector<bool> diag_covered;

    double timing_seconds = 0.0;  // never serialized; reports stay byte-stable

    nlohmann::ordered_json to_json() const;
    static Report from_json(const nlohmann::ordered_json& j);
    std::string render(ReportFormat format) const;
};

Report run_pipeline(const RunConfig& config);

// path empty: write to stdout.
void emit_report(const Report& report, ReportFormat format, const std::string& path);
void emit_diagnostics_csv(const Report& report, const std::string& path);
std::string render_diagnostics_csv(const Report& report);

// Fingerprint of the canonicalized CSV bytes (CRLF folded to LF, exactly one
// trailing newline), length-prefixed FNV-1a 64.
std::string dataset_fingerprint(std::string_view raw_bytes);

std::string_view to_string(Task task);

}  // namespace cemm
