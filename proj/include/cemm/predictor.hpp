#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cemm/tabular.hpp"

namespace cemm {

// Pinball loss rho_alpha: alpha*(y - y_hat) when y - y_hat > 0, else
// (1 - alpha)*(y_hat - y).
double pinball_loss(double y, double y_hat, double alpha);

// Numerically stable softmax.
std::vector<double> softmax(std::vector<double> scores);

// Monotonicity repair: swaps a crossing (lo, hi) pair.
std::pair<double, double> repair_quantile_pair(double lo, double hi);

// Maps descriptor columns to a dense feature vector: binary pass-through,
// numeric standardized by training mean/stdev, nominal one-hot. Unseen
// nominal tokens encode as all zeros and bump a warning counter.
class FeatureEncoder {
public:
    static FeatureEncoder fit(const Dataset& train);

    int dim() const { return dim_; }
    void encode(const Dataset& data, std::size_t row, std::span<double> out,
                std::uint64_t* unseen_counter = nullptr) const;

private:
    struct ColumnEncoding {
        int column = -1;
        ColumnKind kind = ColumnKind::numeric;
        int offset = 0;
        int width = 0;
        double mean = 0.0;
        double stdev = 1.0;
        std::unordered_map<std::string, int> slot_of_value;
    };
    std::vector<ColumnEncoding> columns_;
    int dim_ = 0;
};

struct TrainingMeta {
    int epochs = 0;
    double learning_rate = 0.0;
    double l2 = 0.0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
};

struct ClassifierConfig {
    int epochs = 500;
    double learning_rate = 0.5;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

// Linear softmax classifier trained by deterministic full-batch gradient
// descent on cross-entropy plus an l2 penalty on the weights.
class SoftClassifierModel {
public:
    std::vector<double> predict_proba(const Dataset& data, std::size_t row) const;
    int num_classes() const { return num_classes_; }
    const TrainingMeta& meta() const { return meta_; }
    std::uint64_t unseen_nominal_count() const { return *unseen_count_; }

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& bias() const { return bias_; }

    friend SoftClassifierModel fit_softmax_classifier(const Dataset&, const ClassifierConfig&);

private:
    FeatureEncoder encoder_;
    int num_classes_ = 0;
    std::vector<double> weights_;  // K x d, row-major
    std::vector<double> bias_;     // K
    TrainingMeta meta_;
    std::shared_ptr<std::atomic<std::uint64_t>> unseen_count_ =
        std::make_shared<std::atomic<std::uint64_t>>(0);
};

SoftClassifierModel fit_softmax_classifier(const Dataset& train, const ClassifierConfig& config);

// Loss/gradient of the softmax objective, exposed so tests can check the
// analytic gradient against finite differences.
double softmax_objective(const std::vector<double>& weights, const std::vector<double>& bias,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, int num_classes, double l2);
void softmax_objective_grad(const std::vector<double>& weights, const std::vector<double>& bias,
                            const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, int num_classes, double l2,
                            std::vector<double>& grad_weights, std::vector<double>& grad_bias);

struct QuantileConfig {
    int epochs = 2000;
    double learning_rate = 0.5;
    double l2 = 0.0;
    std::uint64_t seed = 0;
};

// Two independent linear pinball-loss fits (subgradient descent with a
// decaying step) at levels alpha_lo < alpha_hi. The target is standardized
// internally; quantiles are affine-equivariant so predictions map back
// exactly. Crossing predictions are repaired by swapping.
class QuantileRegressorModel {
public:
    std::pair<double, double> predict_quantiles(const Dataset& data, std::size_t row) const;
    double alpha_lo() const { return alpha_lo_; }
    double alpha_hi() const { return alpha_hi_; }
    // Effective prediction at the feature means (x standardized to zero).
    double lower_bias() const;
    double upper_bias() const;
    const TrainingMeta& meta() const { return meta_; }
    std::uint64_t unseen_nominal_count() const { return *unseen_count_; }

    friend QuantileRegressorModel fit_quantile_regressor(const Dataset&, double, double,
                                                         const QuantileConfig&);

private:
    FeatureEncoder encoder_;
    double alpha_lo_ = 0.05;
    double alpha_hi_ = 0.95;
    std::vector<double> weights_lo_, weights_hi_;
    double bias_lo_ = 0.0, bias_hi_ = 0.0;
    double y_mean_ = 0.0, y_stdev_ = 1.0;
    TrainingMeta meta_;
    std::shared_ptr<std::atomic<std::uint64_t>> unseen_count_ =
        std::make_shared<std::atomic<std::uint64_t>>(0);
};

QuantileRegressorModel fit_quantile_regressor(const Dataset& train, double alpha_lo,
                                              double alpha_hi, const QuantileConfig& config);

// Per-record soft outputs covering a set of records, keyed by record_id:
// a class-probability vector per record for classification, a quantile pair
// for regression. Ground truth tags along for alignment validation.
struct PredictionBundle {
    Task task = Task::classification;
    int num_classes = 0;
    std::vector<int> record_ids;
    std::vector<std::vector<double>> probs;              // classification
    std::vector<std::pair<double, double>> intervals;    // regression
    std::vector<int> true_class;
    std::vector<double> true_y;
    std::unordered_map<int, std::size_t> row_of;

    std::size_t size() const { return record_ids.size(); }
    const std::size_t* find(int record_id) const {
        auto it = row_of.find(record_id);
        return it == row_of.end() ? nullptr : &it->second;
    }
    void rebuild_index();
};

// Classification CSV: record_id,prob_0,...,prob_{K-1},true_class
// Regression CSV:     record_id,pred_lo,pred_hi,true_y
PredictionBundle parse_predictions_csv(std::string_view text, Task task);
PredictionBundle load_external_predictions(const std::string& path, Task task);

PredictionBundle predict_bundle(const SoftClassifierModel& model,
                                const std::vector<const Dataset*>& parts);
PredictionBundle predict_bundle(const QuantileRegressorModel& model,
                                const std::vector<const Dataset*>& parts);

}  // namespace cemm
