#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cemm/predictor.hpp"
#include "cemm/tabular.hpp"

namespace cemm {

enum class ScoreMethod { true_class_threshold, aps, cqr, residual };

std::string_view to_string(ScoreMethod method);
ScoreMethod score_method_from_string(std::string_view name);

struct CalibrationResult {
    ScoreMethod method = ScoreMethod::aps;
    double alpha = 0.1;
    double q_hat = 0.0;  // +infinity when ceil((n+1)(1-alpha)) > n
    int n_calib = 0;
    std::vector<double> score_trace;  // calibration scores, insertion order
};

struct PredictionSet {
    std::vector<int> members;  // ascending class indices
    int size() const { return static_cast<int>(members.size()); }
    bool contains(int cls) const;
};

struct PredictionInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool is_empty = false;
    double length() const { return is_empty ? 0.0 : hi - lo; }
    bool contains(double y) const { return !is_empty && lo <= y && y <= hi; }
};

// Per test record: r = prediction-set size (count) or interval length.
struct UncertaintyTarget {
    std::vector<int> record_ids;
    std::vector<double> r;
    std::unordered_map<int, std::size_t> row_of;

    double r_of(int record_id) const;
    void rebuild_index();
};

// k-th smallest with k = ceil((n+1)(1-alpha)); +infinity when k > n.
double conformal_quantile(const std::vector<double>& scores, double alpha);

double true_class_score(std::span<const double> probs, int true_class);

// Cumulative probability through the true class, classes ordered by
// descending probability (ties by ascending index).
double aps_score(std::span<const double> probs, int true_class);

PredictionSet aps_oracle_set(std::span<const double> probs, double alpha);
PredictionSet threshold_prediction_set(std::span<const double> probs, double q_hat);
PredictionSet aps_prediction_set(std::span<const double> probs, double q_hat);

double residual_score(double prediction, double y);
double cqr_score(double lo, double hi, double y);
PredictionInterval cqr_interval(double lo, double hi, double q_hat);

struct TargetGeneration {
    CalibrationResult calibration;
    UncertaintyTarget targets;
    std::vector<bool> covered;  // aligned with targets.record_ids
};

// Scores the calibration records, computes q_hat, then evaluates every test
// record in record_id order: r plus a covered flag per record.
TargetGeneration generate_targets(const PredictionBundle& bundle, const SplitPair& split,
                                  ScoreMethod method, double alpha);

double empirical_coverage(const std::vector<bool>& covered);
double empirical_coverage(const std::vector<PredictionSet>& sets, const std::vector<int>& truths);
double empirical_coverage(const std::vector<PredictionInterval>& intervals,
                          const std::vector<double>& truths);

}  // namespace cemm
