#include "cemm/predictor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cemm/csv.hpp"

namespace cemm {

double pinball_loss(double y, double y_hat, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("pinball_loss: alpha must be in (0,1)");
    double diff = y - y_hat;
    return diff > 0.0 ? alpha * diff : (1.0 - alpha) * (-diff);
}

FeatureEncoder FeatureEncoder::fit(const Dataset& train) {
    FeatureEncoder enc;
    const Schema& schema = train.schema();
    int offset = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        const Column& col = schema.columns[c];
        if (!is_descriptor(col.kind)) continue;
        ColumnEncoding e;
        e.column = static_cast<int>(c);
        e.kind = col.kind;
        e.offset = offset;
        if (col.kind == ColumnKind::binary) {
            e.width = 1;
        } else if (col.kind == ColumnKind::numeric) {
            e.width = 1;
            double sum = 0.0, sq = 0.0;
            auto n = static_cast<double>(train.size());
            for (std::size_t r = 0; r < train.size(); ++r) sum += train.numeric_value(e.column, r);
            e.mean = n > 0 ? sum / n : 0.0;
            for (std::size_t r = 0; r < train.size(); ++r) {
                double d = train.numeric_value(e.column, r) - e.mean;
                sq += d * d;
            }
            e.stdev = n > 0 ? std::sqrt(sq / n) : 1.0;
            if (e.stdev == 0.0) e.stdev = 1.0;
        } else {  // nominal
            e.width = static_cast<int>(col.values.size());
            for (std::size_t v = 0; v < col.values.size(); ++v)
                e.slot_of_value.emplace(col.values[v], static_cast<int>(v));
        }
        offset += e.width;
        enc.columns_.push_back(std::move(e));
    }
    enc.dim_ = offset;
    return enc;
}

void FeatureEncoder::encode(const Dataset& data, std::size_t row, std::span<double> out,
                            std::uint64_t* unseen_counter) const {
    std::fill(out.begin(), out.end(), 0.0);
    const Schema& schema = data.schema();
    for (const ColumnEncoding& e : columns_) {
        int col = schema.column_index(schema.columns[e.column].name);
        switch (e.kind) {
            case ColumnKind::binary:
                out[e.offset] = data.numeric_value(col, row);
                break;
            case ColumnKind::numeric:
                out[e.offset] = (data.numeric_value(col, row) - e.mean) / e.stdev;
                break;
            default: {
                int cat = data.category_value(col, row);
                const std::string& token = schema.columns[col].values[cat];
                auto it = e.slot_of_value.find(token);
                if (it == e.slot_of_value.end()) {
                    if (unseen_counter) ++*unseen_counter;  // all-zero one-hot
                } else {
                    out[e.offset + it->second] = 1.0;
                }
                break;
            }
        }
    }
}

std::vector<double> softmax(std::vector<double> scores) {
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (double& s : scores) s /= sum;
    return scores;
}

std::pair<double, double> repair_quantile_pair(double lo, double hi) {
    if (lo > hi) std::swap(lo, hi);
    return {lo, hi};
}

namespace {

void softmax_inplace(std::vector<double>& scores) {
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (double& s : scores) s /= sum;
}

std::vector<std::vector<double>> encode_all(const FeatureEncoder& enc, const Dataset& data) {
    std::vector<std::vector<double>> rows(data.size(), std::vector<double>(enc.dim()));
    for (std::size_t r = 0; r < data.size(); ++r) enc.encode(data, r, rows[r]);
    return rows;
}

}  // namespace

double softmax_objective(const std::vector<double>& weights, const std::vector<double>& bias,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, int num_classes, double l2) {
    std::size_t n = features.size();
    std::size_t d = n > 0 ? features[0].size() : 0;
    double loss = 0.0;
    std::vector<double> scores(num_classes);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < num_classes; ++k) {
            double z = bias[k];
            for (std::size_t j = 0; j < d; ++j) z += weights[k * d + j] * features[i][j];
            scores[k] = z;
        }
        double mx = *std::max_element(scores.begin(), scores.end());
        double logsum = 0.0;
        for (int k = 0; k < num_classes; ++k) logsum += std::exp(scores[k] - mx);
        logsum = mx + std::log(logsum);
        loss += logsum - scores[labels[i]];
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + l2 * reg;
}

void softmax_objective_grad(const std::vector<double>& weights, const std::vector<double>& bias,
                            const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, int num_classes, double l2,
                            std::vector<double>& grad_weights, std::vector<double>& grad_bias) {
    std::size_t n = features.size();
    std::size_t d = n > 0 ? features[0].size() : 0;
    grad_weights.assign(weights.size(), 0.0);
    grad_bias.assign(bias.size(), 0.0);
    std::vector<double> p(num_classes);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < num_classes; ++k) {
            double z = bias[k];
            for (std::size_t j = 0; j < d; ++j) z += weights[k * d + j] * features[i][j];
            p[k] = z;
        }
        softmax_inplace(p);
        p[labels[i]] -= 1.0;
        for (int k = 0; k < num_classes; ++k) {
            for (std::size_t j = 0; j < d; ++j) grad_weights[k * d + j] += p[k] * features[i][j];
            grad_bias[k] += p[k];
        }
    }
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < grad_weights.size(); ++j)
        grad_weights[j] = grad_weights[j] * inv_n + 2.0 * l2 * weights[j];
    for (double& g : grad_bias) g *= inv_n;
}

SoftClassifierModel fit_softmax_classifier(const Dataset& train, const ClassifierConfig& config) {
    const Schema& schema = train.schema();
    if (schema.task() != Task::classification)
        throw std::invalid_argument("fit_softmax_classifier: dataset has no label_class column");
    int num_classes = schema.num_classes();
    if (num_classes < 2) throw std::invalid_argument("fit_softmax_classifier: single-class training set");

    std::set<int> present;
    std::vector<int> labels(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
        labels[r] = train.label_class(r);
        present.insert(labels[r]);
    }
    if (present.size() < 2)
        throw std::invalid_argument("fit_softmax_classifier: single-class training set");

    SoftClassifierModel model;
    model.encoder_ = FeatureEncoder::fit(train);
    model.num_classes_ = num_classes;
    std::size_t d = static_cast<std::size_t>(model.encoder_.dim());
    model.weights_.assign(static_cast<std::size_t>(num_classes) * d, 0.0);
    model.bias_.assign(num_classes, 0.0);

    auto features = encode_all(model.encoder_, train);
    std::vector<double> gw, gb;
    double loss = softmax_objective(model.weights_, model.bias_, features, labels, num_classes,
                                    config.l2);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        softmax_objective_grad(model.weights_, model.bias_, features, labels, num_classes,
                               config.l2, gw, gb);
        for (std::size_t j = 0; j < model.weights_.size(); ++j)
            model.weights_[j] -= config.learning_rate * gw[j];
        for (int k = 0; k < num_classes; ++k) model.bias_[k] -= config.learning_rate * gb[k];
        loss = softmax_objective(model.weights_, model.bias_, features, labels, num_classes,
                                 config.l2);
        if (!std::isfinite(loss))
            throw std::runtime_error("fit_softmax_classifier: non-finite loss at epoch " +
                                     std::to_string(epoch));
    }
    model.meta_ = TrainingMeta{config.epochs, config.learning_rate, config.l2, config.seed, loss};
    return model;
}

std::vector<double> SoftClassifierModel::predict_proba(const Dataset& data, std::size_t row) const {
    std::size_t d = static_cast<std::size_t>(encoder_.dim());
    std::vector<double> x(d);
    std::uint64_t unseen = 0;
    encoder_.encode(data, row, x, &unseen);
    if (unseen) unseen_count_->fetch_add(unseen);
    std::vector<double> scores(num_classes_);
    for (int k = 0; k < num_classes_; ++k) {
        double z = bias_[k];
        for (std::size_t j = 0; j < d; ++j) z += weights_[static_cast<std::size_t>(k) * d + j] * x[j];
        scores[k] = z;
    }
    softmax_inplace(scores);
    return scores;
}

namespace {

struct LinearQuantileFit {
    std::vector<double> weights;
    double bias = 0.0;
    double final_loss = 0.0;
};

// Full-batch subgradient descent on mean pinball loss + l2, step decaying
// as lr / sqrt(t+1).
LinearQuantileFit fit_pinball(const std::vector<std::vector<double>>& features,
                              const std::vector<double>& targets, double alpha,
                              const QuantileConfig& config) {
    std::size_t n = features.size();
    std::size_t d = n > 0 ? features[0].size() : 0;
    LinearQuantileFit fit;
    fit.weights.assign(d, 0.0);
    std::vector<double> gw(d);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = fit.bias;
            for (std::size_t j = 0; j < d; ++j) pred += fit.weights[j] * features[i][j];
            double diff = targets[i] - pred;
            double slope = diff > 0.0 ? -alpha : (1.0 - alpha);
            loss += diff > 0.0 ? alpha * diff : (1.0 - alpha) * (-diff);
            for (std::size_t j = 0; j < d; ++j) gw[j] += slope * features[i][j];
            gb += slope;
        }
        double inv_n = 1.0 / static_cast<double>(n);
        loss *= inv_n;
        for (std::size_t j = 0; j < d; ++j) {
            double reg = 2.0 * config.l2 * fit.weights[j];
            loss += config.l2 * fit.weights[j] * fit.weights[j];
            gw[j] = gw[j] * inv_n + reg;
        }
        gb *= inv_n;
        if (!std::isfinite(loss))
            throw std::runtime_error("fit_quantile_regressor: non-finite loss at epoch " +
                                     std::to_string(epoch));
        double step = config.learning_rate / std::sqrt(static_cast<double>(epoch) + 1.0);
        for (std::size_t j = 0; j < d; ++j) fit.weights[j] -= step * gw[j];
        fit.bias -= step * gb;
        fit.final_loss = loss;
    }
    return fit;
}

}  // namespace

QuantileRegressorModel fit_quantile_regressor(const Dataset& train, double alpha_lo,
                                              double alpha_hi, const QuantileConfig& config) {
    if (!(alpha_lo > 0.0 && alpha_lo < 1.0 && alpha_hi > 0.0 && alpha_hi < 1.0))
        throw std::invalid_argument("fit_quantile_regressor: quantile levels must be in (0,1)");
    if (!(alpha_lo < alpha_hi))
        throw std::invalid_argument("fit_quantile_regressor: alpha_lo must be < alpha_hi");
    if (train.schema().task() != Task::regression)
        throw std::invalid_argument("fit_quantile_regressor: dataset has no label_real column");

    QuantileRegressorModel model;
    model.encoder_ = FeatureEncoder::fit(train);
    model.alpha_lo_ = alpha_lo;
    model.alpha_hi_ = alpha_hi;

    std::vector<double> y(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) y[r] = train.label_real(r);
    double sum = 0.0;
    for (double v : y) sum += v;
    model.y_mean_ = sum / static_cast<double>(y.size());
    double sq = 0.0;
    for (double v : y) sq += (v - model.y_mean_) * (v - model.y_mean_);
    model.y_stdev_ = std::sqrt(sq / static_cast<double>(y.size()));
    if (model.y_stdev_ == 0.0) model.y_stdev_ = 1.0;
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = (y[i] - model.y_mean_) / model.y_stdev_;

    auto features = encode_all(model.encoder_, train);
    LinearQuantileFit lo = fit_pinball(features, z, alpha_lo, config);
    LinearQuantileFit hi = fit_pinball(features, z, alpha_hi, config);
    model.weights_lo_ = std::move(lo.weights);
    model.bias_lo_ = lo.bias;
    model.weights_hi_ = std::move(hi.weights);
    model.bias_hi_ = hi.bias;
    model.meta_ = TrainingMeta{config.epochs, config.learning_rate, config.l2, config.seed,
                               model.y_stdev_ * (lo.final_loss + hi.final_loss)};
    return model;
}

std::pair<double, double> QuantileRegressorModel::predict_quantiles(const Dataset& data,
                                                                    std::size_t row) const {
    std::size_t d = static_cast<std::size_t>(encoder_.dim());
    std::vector<double> x(d);
    std::uint64_t unseen = 0;
    encoder_.encode(data, row, x, &unseen);
    if (unseen) unseen_count_->fetch_add(unseen);
    double zlo = bias_lo_, zhi = bias_hi_;
    for (std::size_t j = 0; j < d; ++j) {
        zlo += weights_lo_[j] * x[j];
        zhi += weights_hi_[j] * x[j];
    }
    return repair_quantile_pair(y_mean_ + y_stdev_ * zlo, y_mean_ + y_stdev_ * zhi);
}

double QuantileRegressorModel::lower_bias() const { return y_mean_ + y_stdev_ * bias_lo_; }
double QuantileRegressorModel::upper_bias() const { return y_mean_ + y_stdev_ * bias_hi_; }

void PredictionBundle::rebuild_index() {
    row_of.clear();
    row_of.reserve(record_ids.size());
    for (std::size_t i = 0; i < record_ids.size(); ++i) {
        if (!row_of.emplace(record_ids[i], i).second)
            throw std::invalid_argument("predictions: duplicate record_id " +
                                        std::to_string(record_ids[i]));
    }
}

namespace {

double parse_num(const std::string& token, std::size_t row, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
        throw std::invalid_argument("predictions row " + std::to_string(row) + ": bad " +
                                    std::string(what) + " '" + token + "'");
    return v;
}

long parse_int(const std::string& token, std::size_t row, const char* what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::invalid_argument("predictions row " + std::to_string(row) + ": bad " +
                                    std::string(what) + " '" + token + "'");
    return v;
}

}  // namespace

PredictionBundle parse_predictions_csv(std::string_view text, Task task) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw std::invalid_argument("predictions: empty file");
    const auto& header = rows.front();

    PredictionBundle bundle;
    bundle.task = task;
    if (task == Task::classification) {
        if (header.size() < 4 || header.front() != "record_id" || header.back() != "true_class")
            throw std::invalid_argument(
                "predictions: expected header record_id,prob_0,...,true_class");
        int k = static_cast<int>(header.size()) - 2;
        for (int j = 0; j < k; ++j) {
            if (header[static_cast<std::size_t>(j) + 1] != "prob_" + std::to_string(j))
                throw std::invalid_argument("predictions: expected column prob_" +
                                            std::to_string(j));
        }
        bundle.num_classes = k;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != header.size())
                throw std::invalid_argument("predictions row " + std::to_string(r) +
                                            ": wrong field count");
            bundle.record_ids.push_back(static_cast<int>(parse_int(row[0], r, "record_id")));
            std::vector<double> p(k);
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                p[j] = parse_num(row[static_cast<std::size_t>(j) + 1], r, "probability");
                if (p[j] < 0.0 || p[j] > 1.0 + 1e-6)
                    throw std::invalid_argument("predictions row " + std::to_string(r) +
                                                ": probability outside [0,1]");
                sum += p[j];
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw std::invalid_argument("predictions row " + std::to_string(r) +
                                            ": not a probability vector (sum=" +
                                            std::to_string(sum) + ")");
            for (double& v : p) v /= sum;  // renormalize within tolerance
            long tc = parse_int(row.back(), r, "true_class");
            if (tc < 0 || tc >= k)
                throw std::invalid_argument("predictions row " + std::to_string(r) +
                                            ": true_class out of range");
            bundle.probs.push_back(std::move(p));
            bundle.true_class.push_back(static_cast<int>(tc));
        }
    } else {
        if (header.size() != 4 || header[0] != "record_id" || header[1] != "pred_lo" ||
            header[2] != "pred_hi" || header[3] != "true_y")
            throw std::invalid_argument(
                "predictions: expected header record_id,pred_lo,pred_hi,true_y");
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != 4)
                throw std::invalid_argument("predictions row " + std::to_string(r) +
                                            ": wrong field count");
            bundle.record_ids.push_back(static_cast<int>(parse_int(row[0], r, "record_id")));
            double lo = parse_num(row[1], r, "pred_lo");
            double hi = parse_num(row[2], r, "pred_hi");
            if (lo > hi)
                throw std::invalid_argument("predictions row " + std::to_string(r) +
                                            ": pred_lo > pred_hi");
            bundle.intervals.emplace_back(lo, hi);
            bundle.true_y.push_back(parse_num(row[3], r, "true_y"));
        }
    }
    if (bundle.record_ids.empty()) throw std::invalid_argument("predictions: no data rows");
    bundle.rebuild_index();
    return bundle;
}

PredictionBundle load_external_predictions(const std::string& path, Task task) {
    return parse_predictions_csv(read_file(path), task);
}

PredictionBundle predict_bundle(const SoftClassifierModel& model,
                                const std::vector<const Dataset*>& parts) {
    PredictionBundle bundle;
    bundle.task = Task::classification;
    bundle.num_classes = model.num_classes();
    for (const Dataset* part : parts) {
        for (std::size_t r = 0; r < part->size(); ++r) {
            bundle.record_ids.push_back(part->record_id(r));
            bundle.probs.push_back(model.predict_proba(*part, r));
            bundle.true_class.push_back(part->label_class(r));
        }
    }
    bundle.rebuild_index();
    return bundle;
}

PredictionBundle predict_bundle(const QuantileRegressorModel& model,
                                const std::vector<const Dataset*>& parts) {
    PredictionBundle bundle;
    bundle.task = Task::regression;
    for (const Dataset* part : parts) {
        for (std::size_t r = 0; r < part->size(); ++r) {
            bundle.record_ids.push_back(part->record_id(r));
            bundle.intervals.push_back(model.predict_quantiles(*part, r));
            bundle.true_y.push_back(part->label_real(r));
        }
    }
    bundle.rebuild_index();
    return bundle;
}

}  // namespace cemm
