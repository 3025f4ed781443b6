#include "cemm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "cemm/csv.hpp"

namespace cemm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename F>
auto run_stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

Task task_from_string(std::string_view name) {
    if (name == "classification") return Task::classification;
    if (name == "regression") return Task::regression;
    throw ConfigError("unknown task '" + std::string(name) + "'");
}

void check_method_task(ScoreMethod method, Task task) {
    bool classification_method =
        method == ScoreMethod::true_class_threshold || method == ScoreMethod::aps;
    if (classification_method && task != Task::classification)
        throw ConfigError("method/task mismatch: " + std::string(to_string(method)) +
                          " requires a classification task");
    if (method == ScoreMethod::cqr && task != Task::regression)
        throw ConfigError("method/task mismatch: cqr requires a regression task");
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

std::string_view to_string(Task task) {
    return task == Task::classification ? "classification" : "regression";
}

ReportFormat report_format_from_string(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    if (name == "text") return ReportFormat::text;
    throw ConfigError("unknown format '" + std::string(name) + "'");
}

std::string_view to_string(ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return "json";
        case ReportFormat::csv: return "csv";
        case ReportFormat::text: return "text";
    }
    return "?";
}

namespace {

struct CliBindings {
    RunConfig config;
    std::string predictions, task_s, method_s;
    std::string direction_s = "both", format_s = "json";
    std::string cut_s = "equal_width", lambda_base_s = "test";
    std::string config_file;
    std::string report_input;
};

void wire_common(CLI::App* cmd, CliBindings& b) {
    // TakeLast lets config-file values (injected first) lose to flags
    auto last = [](CLI::Option* opt) {
        return opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };
    last(cmd->add_option("--data", b.config.dataset_path, "dataset CSV path"));
    last(cmd->add_option("--schema", b.config.schema_path, "schema file path"));
    last(cmd->add_option("--predictions", b.predictions, "external predictions CSV"));
    last(cmd->add_option("--task", b.task_s, "classification or regression")
             ->check(CLI::IsMember({"classification", "regression"})));
    last(cmd->add_option("--alpha", b.config.alpha, "miscoverage level in (0,1)"));
    last(cmd->add_option("--score-method", b.method_s, "true_class_threshold, aps, or cqr")
             ->check(CLI::IsMember({"true_class_threshold", "aps", "cqr"})));
    last(cmd->add_option("--calib-fraction", b.config.calib_fraction,
                         "fraction of records used for calibration"));
    last(cmd->add_option("--seed", b.config.seed, "split / fit seed"));
    last(cmd->add_option("--depth", b.config.mining.depth, "max conditions per description"));
    last(cmd->add_option("--beam-width", b.config.mining.beam_width, "beam width per level"));
    last(cmd->add_option("--lambda", b.config.mining.lambda_min_pct,
                         "minimum subgroup size, percent"));
    last(cmd->add_option("--lambda-base", b.lambda_base_s, "size floor basis: test or full")
             ->check(CLI::IsMember({"test", "full"})));
    last(cmd->add_option("--bins", b.config.mining.bins, "numeric bins (bins-1 cut points)"));
    last(cmd->add_option("--cut-strategy", b.cut_s, "equal_width or equal_frequency")
             ->check(CLI::IsMember({"equal_width", "equal_frequency"})));
    last(cmd->add_option("--direction", b.direction_s,
                         "maximize, minimize, absolute, or both")
             ->check(CLI::IsMember({"maximize", "minimize", "absolute", "both"})));
    last(cmd->add_option("--top-k", b.config.mining.top_k, "subgroups reported per direction"));
    last(cmd->add_option("--format", b.format_s, "json, csv, or text")
             ->check(CLI::IsMember({"json", "csv", "text"})));
    last(cmd->add_option("--out", b.config.output.path, "report output path (default stdout)"));
    cmd->add_flag("--emit-diagnostics", b.config.output.emit_diagnostics,
                  "dump per-record (record_id,r,covered) CSV");
    last(cmd->add_option("--config", b.config_file,
                         "config file, key=value lines (flags take precedence)"));
}

// key=value lines, '#' comments; keys are long flag names (dashes or
// underscores); returns flag tokens to splice in front of the real ones.
std::vector<std::string> config_file_args(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    std::vector<std::string> out;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto strip = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
                s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.pop_back();
            return s;
        };
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file line " + std::to_string(line_no) +
                              ": expected key=value");
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        for (char& c : key)
            if (c == '_') c = '-';
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw ConfigError("config file line " + std::to_string(line_no) + ": empty key");
        if (key == "config")
            throw ConfigError("config file cannot nest another config file");
        if (key == "emit-diagnostics") {
            if (value == "true" || value == "1" || value == "yes")
                out.push_back("--emit-diagnostics");
            else if (!(value == "false" || value == "0" || value == "no"))
                throw ConfigError("config file line " + std::to_string(line_no) +
                                  ": emit-diagnostics expects a boolean");
            continue;
        }
        out.push_back("--" + key);
        out.push_back(value);
    }
    return out;
}

// Parses one pass; returns the chosen subcommand, or "" when help was asked.
std::string parse_pass(const std::vector<std::string>& tokens, CliBindings& bindings,
                       std::string& help_out) {
    CLI::App app{"conformalized uncertainty subgroup miner"};
    app.require_subcommand(1);
    CLI::App* mine = app.add_subcommand("mine", "run the full pipeline and report subgroups");
    wire_common(mine, bindings);
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "stop after target generation; dump diagnostics");
    wire_common(calibrate, bindings);
    CLI::App* report = app.add_subcommand("report", "re-render a stored JSON report");
    report->add_option("input", bindings.report_input, "stored report (json)")->required();
    report->add_option("--format", bindings.format_s, "json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    report->add_option("--out", bindings.config.output.path, "output path (default stdout)");

    std::vector<const char*> argv;
    argv.push_back("cemm");
    for (const std::string& a : tokens) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        help_out = app.help("", CLI::AppFormatMode::All);
        return "";
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    if (report->parsed()) return "report";
    return mine->parsed() ? "mine" : "calibrate";
}

}  // namespace

ParsedCli parse_config(const std::vector<std::string>& args) {
    CliBindings first;
    std::string help;
    std::string subcommand = parse_pass(args, first, help);
    if (!help.empty()) {
        ParsedCli out;
        out.help = help;
        return out;
    }

    CliBindings merged_bindings;
    CliBindings* bindings = &first;
    if (subcommand != "report" && !first.config_file.empty()) {
        // reparse with file-derived tokens spliced before the explicit flags
        std::vector<std::string> merged;
        merged.push_back(args.front());
        auto file_args = config_file_args(first.config_file);
        merged.insert(merged.end(), file_args.begin(), file_args.end());
        merged.insert(merged.end(), args.begin() + 1, args.end());
        parse_pass(merged, merged_bindings, help);
        bindings = &merged_bindings;
    }

    ParsedCli out;
    out.subcommand = subcommand;
    out.config = bindings->config;
    out.report_input = bindings->report_input;
    RunConfig& cfg = out.config;

    if (subcommand == "report") {
        cfg.output.format = report_format_from_string(bindings->format_s);
        return out;
    }

    cfg.calibrate_only = subcommand == "calibrate";
    if (cfg.dataset_path.empty()) throw ConfigError("--data is required");
    if (cfg.schema_path.empty()) throw ConfigError("--schema is required");
    if (!bindings->predictions.empty()) cfg.predictions_path = bindings->predictions;
    if (!bindings->task_s.empty()) cfg.task = task_from_string(bindings->task_s);
    if (!bindings->method_s.empty())
        cfg.score_method = score_method_from_string(bindings->method_s);
    cfg.output.format = report_format_from_string(bindings->format_s);
    cfg.mining.cut_strategy = bindings->cut_s == "equal_width" ? CutStrategy::equal_width
                                                               : CutStrategy::equal_frequency;
    cfg.mining.lambda_base =
        bindings->lambda_base_s == "test" ? LambdaBase::test : LambdaBase::full;
    if (bindings->direction_s == "both")
        cfg.directions = {Direction::maximize, Direction::minimize};
    else
        cfg.directions = {direction_from_string(bindings->direction_s)};

    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("--alpha must be in (0,1)");
    if (!(cfg.calib_fraction > 0.0 && cfg.calib_fraction < 1.0))
        throw ConfigError("--calib-fraction must be in (0,1)");
    if (cfg.mining.depth < 1) throw ConfigError("--depth must be >= 1");
    if (cfg.mining.beam_width < 1) throw ConfigError("--beam-width must be >= 1");
    if (!(cfg.mining.lambda_min_pct > 0.0 && cfg.mining.lambda_min_pct <= 100.0))
        throw ConfigError("--lambda must be in (0,100]");
    if (cfg.mining.bins < 2) throw ConfigError("--bins must be >= 2");
    if (cfg.mining.top_k < 1) throw ConfigError("--top-k must be >= 1");
    if (cfg.task && cfg.score_method) check_method_task(*cfg.score_method, *cfg.task);
    return out;
}

std::string dataset_fingerprint(std::string_view raw_bytes) {
    std::string canon;
    canon.reserve(raw_bytes.size());
    for (char c : raw_bytes)
        if (c != '\r') canon += c;
    if (canon.empty() || canon.back() != '\n') canon += '\n';

    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&](unsigned char byte) {
        hash ^= byte;
        hash *= 1099511628211ull;
    };
    std::uint64_t length = canon.size();
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((length >> (8 * i)) & 0xff));
    for (unsigned char c : canon) mix(c);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

Report run_pipeline(const RunConfig& config) {
    auto start = std::chrono::steady_clock::now();

    Schema declared = run_stage("load_schema", [&] { return load_schema(config.schema_path); });
    std::string raw_csv = run_stage("load_dataset", [&] { return read_file(config.dataset_path); });
    Dataset dataset =
        run_stage("load_dataset", [&] { return parse_dataset_csv(raw_csv, declared); });
    const Schema& schema = dataset.schema();

    Task task = run_stage("config", [&] {
        Task t = schema.task();
        if (config.task && *config.task != t)
            throw std::invalid_argument("task mismatch: schema declares " +
                                        std::string(to_string(t)));
        return t;
    });
    ScoreMethod method = config.score_method.value_or(
        task == Task::classification ? ScoreMethod::aps : ScoreMethod::cqr);
    run_stage("config", [&] { check_method_task(method, task); });

    SplitPair split = run_stage("split", [&] {
        return split_calibration_test(dataset, config.calib_fraction, config.seed);
    });
    std::size_t n_split_calibration = split.calibration.size();
    std::size_t n_test = split.test.size();

    PredictionBundle bundle;
    SplitPair conformal_pair;
    std::size_t n_train = 0;

    if (config.predictions_path) {
        run_stage("predictions", [&] {
            bundle = load_external_predictions(*config.predictions_path, task);
            if (bundle.size() != dataset.size())
                throw std::invalid_argument(
                    "row-count mismatch: predictions file has " + std::to_string(bundle.size()) +
                    " rows, dataset has " + std::to_string(dataset.size()));
            if (task == Task::classification && bundle.num_classes != schema.num_classes())
                throw std::invalid_argument("class count mismatch: predictions have " +
                                            std::to_string(bundle.num_classes) +
                                            " classes, dataset has " +
                                            std::to_string(schema.num_classes()));
            for (std::size_t r = 0; r < dataset.size(); ++r) {
                int rid = dataset.record_id(r);
                const std::size_t* row = bundle.find(rid);
                if (!row)
                    throw std::invalid_argument("misaligned record_ids: missing record " +
                                                std::to_string(rid));
                if (task == Task::classification) {
                    if (bundle.true_class[*row] != dataset.label_class(r))
                        throw std::invalid_argument("truth mismatch at record_id " +
                                                    std::to_string(rid));
                } else {
                    double y = dataset.label_real(r);
                    if (std::abs(bundle.true_y[*row] - y) >
                        1e-9 * std::max(1.0, std::abs(y)))
                        throw std::invalid_argument("truth mismatch at record_id " +
                                                    std::to_string(rid));
                }
            }
        });
        conformal_pair = std::move(split);
    } else {
        run_stage("fit", [&] {
            if (split.calibration.size() < 4)
                throw std::invalid_argument(
                    "calibration side too small to carve a training slice (need >= 4 records)");
            SplitPair inner = split_calibration_test(split.calibration, 0.5, config.seed + 1);
            n_train = inner.calibration.size();
            if (task == Task::classification) {
                ClassifierConfig fit_config;
                fit_config.seed = config.seed;
                SoftClassifierModel model = fit_softmax_classifier(inner.calibration, fit_config);
                bundle = predict_bundle(model, {&inner.test, &split.test});
            } else {
                QuantileConfig fit_config;
                fit_config.seed = config.seed;
                QuantileRegressorModel model = fit_quantile_regressor(
                    inner.calibration, config.alpha / 2.0, 1.0 - config.alpha / 2.0, fit_config);
                bundle = predict_bundle(model, {&inner.test, &split.test});
            }
            conformal_pair =
                SplitPair{std::move(inner.test), std::move(split.test), config.seed};
        });
    }

    TargetGeneration generation = run_stage("calibrate", [&] {
        return generate_targets(bundle, conformal_pair, method, config.alpha);
    });

    std::vector<SubgroupReportEntry> entries;
    if (!config.calibrate_only) {
        run_stage("mine", [&] {
            MiningParams params = config.mining;
            params.full_size = dataset.size();
            for (Direction direction : config.directions) {
                params.direction = direction;
                auto ranked =
                    filter_and_rank(beam_search(conformal_pair.test, generation.targets, params),
                                    params);
                for (const Subgroup& sub : ranked) {
                    entries.push_back({sub.rank, std::string(to_string(direction)),
                                       sub.description.to_string(), sub.size, sub.aul,
                                       sub.quality});
                }
            }
        });
    }

    double global_sum = 0.0;
    for (double v : generation.targets.r) global_sum += v;
    double global_aul = global_sum / static_cast<double>(generation.targets.r.size());

    Report report;
    report.global_aul = global_aul;
    report.coverage = empirical_coverage(generation.covered);
    report.calibration = generation.calibration;
    report.entries = std::move(entries);
    report.diag_record_ids = generation.targets.record_ids;
    report.diag_r = generation.targets.r;
    report.diag_covered = generation.covered;

    nlohmann::ordered_json manifest;
    manifest["tool"] = "cemm";
    manifest["version"] = "0.1.0";
    manifest["dataset"] = config.dataset_path;
    manifest["schema"] = config.schema_path;
    manifest["predictions"] =
        config.predictions_path ? nlohmann::ordered_json(*config.predictions_path)
                                : nlohmann::ordered_json(nullptr);
    manifest["dataset_fingerprint"] = dataset_fingerprint(raw_csv);
    manifest["task"] = std::string(to_string(task));
    manifest["alpha"] = config.alpha;
    manifest["score_method"] = std::string(to_string(method));
    manifest["calib_fraction"] = config.calib_fraction;
    manifest["seed"] = config.seed;
    manifest["n_records"] = dataset.size();
    manifest["n_calibration_split"] = n_split_calibration;
    manifest["n_train"] = n_train;
    manifest["n_conformal"] = conformal_pair.calibration.size();
    manifest["n_test"] = n_test;
    nlohmann::ordered_json mining;
    mining["depth"] = config.mining.depth;
    mining["beam_width"] = config.mining.beam_width;
    mining["lambda_min_pct"] = config.mining.lambda_min_pct;
    mining["lambda_base"] =
        config.mining.lambda_base == LambdaBase::test ? "test" : "full";
    mining["bins"] = config.mining.bins;
    mining["cut_strategy"] = config.mining.cut_strategy == CutStrategy::equal_width
                                 ? "equal_width"
                                 : "equal_frequency";
    mining["top_k"] = config.mining.top_k;
    manifest["mining"] = std::move(mining);
    nlohmann::ordered_json directions = nlohmann::ordered_json::array();
    if (!config.calibrate_only)
        for (Direction d : config.directions) directions.push_back(std::string(to_string(d)));
    manifest["directions"] = std::move(directions);
    manifest["format"] = std::string(to_string(config.output.format));
    report.manifest = std::move(manifest);

    report.timing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json j;
    j["manifest"] = manifest;
    nlohmann::ordered_json calib;
    calib["method"] = std::string(to_string(calibration.method));
    calib["alpha"] = calibration.alpha;
    if (std::isfinite(calibration.q_hat))
        calib["q_hat"] = calibration.q_hat;
    else
        calib["q_hat"] = "inf";
    calib["n_calib"] = calibration.n_calib;
    j["calibration"] = std::move(calib);
    j["global_aul"] = global_aul;
    j["coverage"] = coverage;

    nlohmann::ordered_json results;
    std::vector<std::string> order;
    for (const SubgroupReportEntry& e : entries)
        if (std::find(order.begin(), order.end(), e.direction) == order.end())
            order.push_back(e.direction);
    if (manifest.contains("directions") && manifest["directions"].is_array()) {
        for (const auto& d : manifest["directions"]) {
            std::string name = d.get<std::string>();
            if (std::find(order.begin(), order.end(), name) == order.end())
                order.push_back(name);
        }
    }
    for (const std::string& direction : order) {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const SubgroupReportEntry& e : entries) {
            if (e.direction != direction) continue;
            nlohmann::ordered_json row;
            row["rank"] = e.rank;
            row["description"] = e.description;
            row["size"] = e.size;
            row["aul"] = e.aul;
            row["raul"] = e.raul;
            list.push_back(std::move(row));
        }
        results[direction] = std::move(list);
    }
    j["results"] = std::move(results);
    return j;
}

Report Report::from_json(const nlohmann::ordered_json& j) {
    Report report;
    report.manifest = j.value("manifest", nlohmann::ordered_json::object());
    report.global_aul = j.value("global_aul", 0.0);
    report.coverage = j.value("coverage", 0.0);
    if (j.contains("calibration")) {
        const auto& calib = j["calibration"];
        report.calibration.method =
            score_method_from_string(calib.value("method", "aps"));
        report.calibration.alpha = calib.value("alpha", 0.1);
        if (calib.contains("q_hat") && calib["q_hat"].is_number())
            report.calibration.q_hat = calib["q_hat"].get<double>();
        else
            report.calibration.q_hat = kInf;
        report.calibration.n_calib = calib.value("n_calib", 0);
    }
    if (j.contains("results")) {
        for (const auto& [direction, list] : j["results"].items()) {
            for (const auto& row : list) {
                SubgroupReportEntry e;
                e.rank = row.value("rank", 0);
                e.direction = direction;
                e.description = row.value("description", "");
                e.size = row.value("size", std::size_t{0});
                e.aul = row.value("aul", 0.0);
                e.raul = row.value("raul", 0.0);
                report.entries.push_back(std::move(e));
            }
        }
    }
    return report;
}

std::string Report::render(ReportFormat format) const {
    if (format == ReportFormat::json) return to_json().dump(2) + "\n";

    if (format == ReportFormat::csv) {
        std::string out = "rank,direction,description,size,aul,raul\n";
        for (const SubgroupReportEntry& e : entries) {
            out += std::to_string(e.rank);
            out += ',';
            out += e.direction;
            out += ',';
            out += csv_escape(e.description);
            out += ',';
            out += std::to_string(e.size);
            out += ',';
            out += format_number(e.aul);
            out += ',';
            out += format_number(e.raul);
            out += '\n';
        }
        return out;
    }

    // text
    std::ostringstream out;
    out << "conformalized uncertainty subgroup report\n";
    out << "dataset: " << manifest.value("dataset", std::string("?")) << "  (N="
        << manifest.value("n_records", 0) << ", conformal calib="
        << manifest.value("n_conformal", 0) << ", test=" << manifest.value("n_test", 0) << ")\n";
    out << "task: " << manifest.value("task", std::string("?"))
        << "  method: " << to_string(calibration.method) << "  alpha: "
        << format_number(calibration.alpha) << "\n";
    out << "q_hat: "
        << (std::isfinite(calibration.q_hat) ? format_number(calibration.q_hat)
                                             : std::string("inf"))
        << "  coverage: " << format_number(coverage)
        << "  global AUL: " << format_number(global_aul) << "\n";

    std::vector<std::string> order;
    for (const SubgroupReportEntry& e : entries)
        if (std::find(order.begin(), order.end(), e.direction) == order.end())
            order.push_back(e.direction);
    for (const std::string& direction : order) {
        out << "\ndirection: " << direction << "\n";
        out << "rank  size      aul        raul      description\n";
        for (const SubgroupReportEntry& e : entries) {
            if (e.direction != direction) continue;
            char line[96];
            std::snprintf(line, sizeof(line), "%4d  %6zu  %-9s  %-9s  ", e.rank, e.size,
                          format_number(e.aul).c_str(), format_number(e.raul).c_str());
            out << line << replace_all(e.description, " AND ", " and ") << "\n";
        }
    }
    if (entries.empty()) out << "\n(no subgroups met the size floor and sign filter)\n";
    return out.str();
}

void emit_report(const Report& report, ReportFormat format, const std::string& path) {
    std::string rendered = report.render(format);
    if (path.empty()) {
        std::cout << rendered;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << rendered;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string render_diagnostics_csv(const Report& report) {
    std::string out = "record_id,r,covered\n";
    for (std::size_t i = 0; i < report.diag_record_ids.size(); ++i) {
        out += std::to_string(report.diag_record_ids[i]);
        out += ',';
        out += format_full(report.diag_r[i]);
        out += ',';
        out += report.diag_covered[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

void emit_diagnostics_csv(const Report& report, const std::string& path) {
    std::string rendered = render_diagnostics_csv(report);
    if (path.empty()) {
        std::cout << rendered;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << rendered;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cemm
