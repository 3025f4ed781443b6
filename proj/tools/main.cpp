#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cemm/csv.hpp"
#include "cemm/pipeline.hpp"

using namespace cemm;

namespace {

int run(const std::vector<std::string>& args) {
    ParsedCli cli = parse_config(args);
    if (!cli.help.empty()) {
        std::cout << cli.help;
        return 0;
    }

    if (cli.subcommand == "report") {
        nlohmann::ordered_json stored;
        try {
            stored = nlohmann::ordered_json::parse(read_file(cli.report_input));
        } catch (const std::exception& e) {
            throw PipelineError("report", e.what());
        }
        Report report = Report::from_json(stored);
        emit_report(report, cli.config.output.format, cli.config.output.path);
        return 0;
    }

    Report report = run_pipeline(cli.config);

    if (cli.subcommand == "calibrate") {
        emit_diagnostics_csv(report, cli.config.output.path);
    } else {
        emit_report(report, cli.config.output.format, cli.config.output.path);
        if (cli.config.output.emit_diagnostics) {
            std::string diag_path = cli.config.output.path.empty()
                                        ? "diagnostics.csv"
                                        : cli.config.output.path + ".diagnostics.csv";
            emit_diagnostics_csv(report, diag_path);
        }
        if (report.entries.empty())
            std::cerr << "warning: no subgroups met the size floor and sign filter\n";
    }

    std::fprintf(stderr,
                 "n_conformal=%d q_hat=%s coverage=%.4f global_aul=%.6g elapsed=%.2fs\n",
                 report.calibration.n_calib,
                 std::isfinite(report.calibration.q_hat)
                     ? std::to_string(report.calibration.q_hat).c_str()
                     : "inf",
                 report.coverage, report.global_aul, report.timing_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
