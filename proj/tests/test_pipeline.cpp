#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "cemm/pipeline.hpp"
#include "test_support.hpp"

using namespace cemm;
using testsup::TempDir;

namespace {

// 500-record 4-class fixture: classes follow the quadrant of (x1,x2); flag=1
// records are nearly noise-free so the classifier is demonstrably more
// certain there.
void write_classification_fixture(const TempDir& dir) {
    testsup::write_file(dir.file("s.txt"),
                        "x1,numeric\nx2,numeric\nflag,binary\ncolor,nominal\nlabel,label_class\n");
    std::mt19937_64 gen(42);
    std::string csv = "x1,x2,flag,color,label\n";
    const char* colors[] = {"r", "g", "b"};
    for (int i = 0; i < 500; ++i) {
        double x1 = next_unit(gen) * 4.0 - 2.0;
        double x2 = next_unit(gen) * 4.0 - 2.0;
        int flag = static_cast<int>(next_below(gen, 2));
        int quadrant = (x1 > 0 ? 0 : 1) + (x2 > 0 ? 0 : 2);
        double noise = flag ? 0.03 : 0.4;
        int label = next_unit(gen) < noise ? static_cast<int>(next_below(gen, 4)) : quadrant;
        csv += testsup::fmt(x1) + "," + testsup::fmt(x2) + "," + std::to_string(flag) + "," +
               colors[next_below(gen, 3)] + ",c" + std::to_string(label) + "\n";
    }
    testsup::write_file(dir.file("d.csv"), csv);
}

RunConfig fixture_config(const TempDir& dir) {
    RunConfig config;
    config.dataset_path = dir.file("d.csv");
    config.schema_path = dir.file("s.txt");
    config.seed = 3;
    return config;
}

}  // namespace

TEST_CASE("parse_config fills defaults") {
    ParsedCli cli = parse_config({"mine", "--data", "d.csv", "--schema", "s.txt", "--task",
                                  "classification", "--alpha", "0.1"});
    CHECK(cli.subcommand == "mine");
    const RunConfig& c = cli.config;
    CHECK(c.dataset_path == "d.csv");
    CHECK(c.task == Task::classification);
    CHECK(c.alpha == 0.1);
    CHECK_FALSE(c.score_method.has_value());
    CHECK(c.calib_fraction == 0.5);
    CHECK(c.seed == 0);
    CHECK(c.mining.depth == 2);
    CHECK(c.mining.beam_width == 20);
    CHECK(c.mining.lambda_min_pct == 5.0);
    CHECK(c.mining.bins == 9);
    CHECK(c.mining.top_k == 3);
    CHECK(c.directions ==
          std::vector<Direction>{Direction::maximize, Direction::minimize});
    CHECK(c.output.format == ReportFormat::json);
    CHECK_FALSE(c.output.emit_diagnostics);
}

TEST_CASE("parse_config rejects incompatible or malformed flags") {
    CHECK_THROWS_WITH_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--task",
                                       "regression", "--score-method", "aps"}),
                         doctest::Contains("method/task mismatch"), ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--task",
                                  "classification", "--score-method", "cqr"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--frobnicate"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--alpha", "1.5"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--lambda", "0"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--data", "d", "--schema", "s", "--depth", "0"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"mine", "--schema", "s"}), ConfigError);
    CHECK_THROWS_AS(parse_config({}), ConfigError);
}

TEST_CASE("flags override config-file values override defaults") {
    TempDir dir("cfg");
    testsup::write_file(dir.file("run.ini"), "alpha=0.2\nseed=9\n");
    ParsedCli from_file = parse_config({"mine", "--data", "d", "--schema", "s", "--config",
                                        dir.file("run.ini")});
    CHECK(from_file.config.alpha == 0.2);
    CHECK(from_file.config.seed == 9);

    ParsedCli overridden = parse_config({"mine", "--data", "d", "--schema", "s", "--alpha",
                                         "0.05", "--config", dir.file("run.ini")});
    CHECK(overridden.config.alpha == 0.05);
    CHECK(overridden.config.seed == 9);
}

TEST_CASE("help request is surfaced, not an error") {
    ParsedCli cli = parse_config({"--help"});
    CHECK(!cli.help.empty());
}

TEST_CASE("pipeline runs end to end on the classification fixture") {
    TempDir dir("pipe");
    write_classification_fixture(dir);
    RunConfig config = fixture_config(dir);
    Report report = run_pipeline(config);

    CHECK(report.coverage >= 0.85);
    CHECK(report.coverage <= 1.0);
    CHECK(report.global_aul > 0.0);

    std::set<std::string> directions;
    for (const auto& e : report.entries) directions.insert(e.direction);
    CHECK(directions.count("maximize") == 1);
    CHECK(directions.count("minimize") == 1);

    // manifest materializes resolved defaults
    CHECK(report.manifest["score_method"] == "aps");
    CHECK(report.manifest["task"] == "classification");
    CHECK(report.manifest["calib_fraction"] == 0.5);
    CHECK(report.manifest["n_records"] == 500);
    CHECK(report.manifest["n_test"] == 250);
    std::string fingerprint = report.manifest["dataset_fingerprint"];
    CHECK(fingerprint.substr(0, 8) == "fnv1a64:");
}

TEST_CASE("lambda=100 yields an empty result set without failing") {
    TempDir dir("floor");
    write_classification_fixture(dir);
    RunConfig config = fixture_config(dir);
    config.mining.lambda_min_pct = 100.0;
    Report report = run_pipeline(config);
    CHECK(report.entries.empty());
    CHECK(report.coverage > 0.0);
}

TEST_CASE("pipeline errors carry their stage") {
    TempDir dir("err");
    write_classification_fixture(dir);

    RunConfig missing = fixture_config(dir);
    missing.predictions_path = dir.file("nope.csv");
    try {
        run_pipeline(missing);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage == "predictions");
    }

    RunConfig bad_task = fixture_config(dir);
    bad_task.task = Task::regression;
    try {
        run_pipeline(bad_task);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage == "config");
    }

    RunConfig no_data = fixture_config(dir);
    no_data.dataset_path = dir.file("missing.csv");
    try {
        run_pipeline(no_data);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage == "load_dataset");
    }
}

TEST_CASE("reports are byte-identical across reruns") {
    TempDir dir("repro");
    write_classification_fixture(dir);
    RunConfig config = fixture_config(dir);
    Report a = run_pipeline(config);
    Report b = run_pipeline(config);
    CHECK(a.render(ReportFormat::json) == b.render(ReportFormat::json));
    CHECK(a.render(ReportFormat::csv) == b.render(ReportFormat::csv));
    CHECK(a.render(ReportFormat::text) == b.render(ReportFormat::text));
    CHECK(render_diagnostics_csv(a) == render_diagnostics_csv(b));
}

TEST_CASE("report renders carry the pinned shapes") {
    TempDir dir("render");
    write_classification_fixture(dir);
    Report report = run_pipeline(fixture_config(dir));

    std::string csv = report.render(ReportFormat::csv);
    CHECK(csv.rfind("rank,direction,description,size,aul,raul\n", 0) == 0);

    std::string text = report.render(ReportFormat::text);
    bool has_two_condition_entry = false;
    for (const auto& e : report.entries)
        if (e.description.find(" AND ") != std::string::npos) has_two_condition_entry = true;
    if (has_two_condition_entry) {
        CHECK(text.find(" and ") != std::string::npos);
        CHECK(text.find(" AND ") == std::string::npos);
    }

    std::string json_text = report.render(ReportFormat::json);
    auto parsed = nlohmann::ordered_json::parse(json_text);
    CHECK(parsed.contains("manifest"));
    CHECK(parsed.contains("results"));
    auto first_key = parsed.begin().key();
    CHECK(first_key == "manifest");  // canonical key order
}

TEST_CASE("stored reports re-render identically") {
    TempDir dir("rt");
    write_classification_fixture(dir);
    Report report = run_pipeline(fixture_config(dir));
    auto round_tripped = Report::from_json(report.to_json());
    CHECK(round_tripped.render(ReportFormat::csv) == report.render(ReportFormat::csv));
    CHECK(round_tripped.render(ReportFormat::json) == report.render(ReportFormat::json));
}

TEST_CASE("an unbounded classification threshold survives the json round trip") {
    Report report;
    report.manifest = nlohmann::ordered_json::object();
    report.calibration.q_hat = std::numeric_limits<double>::infinity();
    report.calibration.n_calib = 3;
    auto j = report.to_json();
    CHECK(j["calibration"]["q_hat"] == "inf");
    Report back = Report::from_json(j);
    CHECK(std::isinf(back.calibration.q_hat));
    CHECK(back.render(ReportFormat::text).find("q_hat: inf") != std::string::npos);
}

TEST_CASE("printed coverage equals coverage recomputed from the diagnostics dump") {
    TempDir dir("diag");
    write_classification_fixture(dir);
    Report report = run_pipeline(fixture_config(dir));
    std::string dump = render_diagnostics_csv(report);

    std::size_t rows = 0, hits = 0, pos = dump.find('\n') + 1;
    while (pos < dump.size()) {
        std::size_t eol = dump.find('\n', pos);
        std::string line = dump.substr(pos, eol - pos);
        ++rows;
        if (line.back() == '1') ++hits;
        pos = eol + 1;
    }
    REQUIRE(rows == 250);
    CHECK(static_cast<double>(hits) / static_cast<double>(rows) ==
          doctest::Approx(report.coverage).epsilon(1e-12));
}

TEST_CASE("external predictions drive the model-agnostic path") {
    TempDir dir("ext");
    write_classification_fixture(dir);

    // uniform probabilities for every record: honest, if useless, soft model
    std::string preds = "record_id,prob_0,prob_1,prob_2,prob_3,true_class\n";
    Schema schema = load_schema(dir.file("s.txt"));
    Dataset dataset = load_dataset(dir.file("d.csv"), schema);
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        preds += std::to_string(dataset.record_id(r)) + ",0.25,0.25,0.25,0.25," +
                 std::to_string(dataset.label_class(r)) + "\n";
    }
    testsup::write_file(dir.file("p.csv"), preds);

    RunConfig config = fixture_config(dir);
    config.predictions_path = dir.file("p.csv");
    Report report = run_pipeline(config);
    // uniform probs make every APS set the full label set
    CHECK(report.coverage == 1.0);
    CHECK(report.global_aul == 4.0);
    CHECK(report.manifest["n_conformal"] == 250);  // whole calibration side is used

    // row-count mismatch is rejected
    testsup::write_file(dir.file("short.csv"),
                        "record_id,prob_0,prob_1,prob_2,prob_3,true_class\n0,0.25,0.25,0.25,0.25,0\n");
    config.predictions_path = dir.file("short.csv");
    try {
        run_pipeline(config);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.stage == "predictions");
        CHECK(std::string(e.what()).find("row-count mismatch") != std::string::npos);
    }
}

TEST_CASE("dataset fingerprint normalizes line endings and tracks content") {
    std::string unix_bytes = "a,b\n1,2\n";
    std::string dos_bytes = "a,b\r\n1,2\r\n";
    std::string no_trailing = "a,b\n1,2";
    CHECK(dataset_fingerprint(unix_bytes) == dataset_fingerprint(dos_bytes));
    CHECK(dataset_fingerprint(unix_bytes) == dataset_fingerprint(no_trailing));
    CHECK(dataset_fingerprint(unix_bytes) != dataset_fingerprint("a,b\n1,3\n"));
}

TEST_CASE("regression pipeline produces calibrated interval targets") {
    TempDir dir("reg");
    testsup::write_file(dir.file("s.txt"), "x,numeric\nabsx,numeric\ny,label_real\n");
    std::mt19937_64 gen(8);
    std::string csv = "x,absx,y\n";
    for (int i = 0; i < 600; ++i) {
        double x = next_unit(gen) * 6.0 - 3.0;
        double y = x + (1.0 + std::abs(x)) * (next_unit(gen) * 2.0 - 1.0);
        csv += testsup::fmt(x) + "," + testsup::fmt(std::abs(x)) + "," + testsup::fmt(y) + "\n";
    }
    testsup::write_file(dir.file("d.csv"), csv);

    RunConfig config;
    config.dataset_path = dir.file("d.csv");
    config.schema_path = dir.file("s.txt");
    config.seed = 11;
    Report report = run_pipeline(config);
    CHECK(report.manifest["score_method"] == "cqr");
    CHECK(report.coverage >= 0.8);
    CHECK(report.global_aul > 0.0);
    for (double r : report.diag_r) CHECK(r >= 0.0);
}
