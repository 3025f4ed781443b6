#include "cemm/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cemm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probs(std::span<const double> probs, int true_class) {
    if (true_class < 0 || true_class >= static_cast<int>(probs.size()))
        throw std::invalid_argument("class index out of range");
}

// Class order used by all APS pieces: descending probability, ties broken by
// ascending class index.
std::vector<int> aps_order(std::span<const double> probs) {
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return probs[a] > probs[b]; });
    return order;
}

PredictionSet prefix_set(std::span<const double> probs, double mass_needed) {
    auto order = aps_order(probs);
    std::size_t k = order.size();
    double cum = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        cum += probs[order[i]];
        if (cum >= mass_needed) {
            k = i + 1;
            break;
        }
    }
    PredictionSet set;
    set.members.assign(order.begin(), order.begin() + k);
    std::sort(set.members.begin(), set.members.end());
    return set;
}

PredictionSet full_set(std::size_t num_classes) {
    PredictionSet set;
    set.members.resize(num_classes);
    std::iota(set.members.begin(), set.members.end(), 0);
    return set;
}

}  // namespace

std::string_view to_string(ScoreMethod method) {
    switch (method) {
        case ScoreMethod::true_class_threshold: return "true_class_threshold";
        case ScoreMethod::aps: return "aps";
        case ScoreMethod::cqr: return "cqr";
        case ScoreMethod::residual: return "residual";
    }
    return "?";
}

ScoreMethod score_method_from_string(std::string_view name) {
    if (name == "true_class_threshold") return ScoreMethod::true_class_threshold;
    if (name == "aps") return ScoreMethod::aps;
    if (name == "cqr") return ScoreMethod::cqr;
    if (name == "residual") return ScoreMethod::residual;
    throw std::invalid_argument("unknown score method '" + std::string(name) + "'");
}

bool PredictionSet::contains(int cls) const {
    return std::binary_search(members.begin(), members.end(), cls);
}

double UncertaintyTarget::r_of(int record_id) const {
    auto it = row_of.find(record_id);
    if (it == row_of.end())
        throw std::invalid_argument("no uncertainty target for record_id " +
                                    std::to_string(record_id));
    return r[it->second];
}

void UncertaintyTarget::rebuild_index() {
    row_of.clear();
    row_of.reserve(record_ids.size());
    for (std::size_t i = 0; i < record_ids.size(); ++i) row_of.emplace(record_ids[i], i);
}

double conformal_quantile(const std::vector<double>& scores, double alpha) {
    if (scores.empty()) throw std::invalid_argument("conformal_quantile: empty score list");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("conformal_quantile: alpha must be in (0,1)");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("conformal_quantile: non-finite score");
    std::size_t n = scores.size();
    auto k = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n + 1) * (1.0 - alpha)));
    if (k > n) return kInf;
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    return sorted[k - 1];
}

double true_class_score(std::span<const double> probs, int true_class) {
    check_probs(probs, true_class);
    return 1.0 - probs[true_class];
}

double aps_score(std::span<const double> probs, int true_class) {
    check_probs(probs, true_class);
    auto order = aps_order(probs);
    double cum = 0.0;
    for (int cls : order) {
        cum += probs[cls];
        if (cls == true_class) return cum;
    }
    return cum;  // unreachable
}

PredictionSet aps_oracle_set(std::span<const double> probs, double alpha) {
    return prefix_set(probs, 1.0 - alpha);
}

PredictionSet threshold_prediction_set(std::span<const double> probs, double q_hat) {
    if (q_hat == kInf) return full_set(probs.size());
    PredictionSet set;
    for (int cls = 0; cls < static_cast<int>(probs.size()); ++cls) {
        // membership evaluated as score <= q_hat so it matches calibration
        // bit for bit; algebraically this is probs[cls] >= 1 - q_hat
        if (1.0 - probs[cls] <= q_hat) set.members.push_back(cls);
    }
    return set;
}

PredictionSet aps_prediction_set(std::span<const double> probs, double q_hat) {
    if (q_hat == kInf) return full_set(probs.size());
    return prefix_set(probs, q_hat);
}

double residual_score(double prediction, double y) { return std::abs(y - prediction); }

double cqr_score(double lo, double hi, double y) {
    if (lo > hi) throw std::invalid_argument("cqr_score: lo > hi");
    return std::max(lo - y, y - hi);
}

PredictionInterval cqr_interval(double lo, double hi, double q_hat) {
    if (lo > hi) throw std::invalid_argument("cqr_interval: lo > hi");
    if (!std::isfinite(q_hat))
        throw std::invalid_argument("cqr_interval: calibration set too small for alpha (q_hat not finite)");
    PredictionInterval interval;
    interval.lo = lo - q_hat;
    interval.hi = hi + q_hat;
    if (interval.hi < interval.lo) {
        double mid = 0.5 * (interval.lo + interval.hi);
        interval.lo = mid;
        interval.hi = mid;
        interval.is_empty = true;
    }
    return interval;
}

namespace {

std::size_t bundle_row(const PredictionBundle& bundle, int record_id) {
    const std::size_t* row = bundle.find(record_id);
    if (!row)
        throw std::invalid_argument("misaligned record_ids: predictions missing record " +
                                    std::to_string(record_id));
    return *row;
}

}  // namespace

TargetGeneration generate_targets(const PredictionBundle& bundle, const SplitPair& split,
                                  ScoreMethod method, double alpha) {
    bool classification_method =
        method == ScoreMethod::true_class_threshold || method == ScoreMethod::aps;
    if (classification_method && bundle.task != Task::classification)
        throw std::invalid_argument("method/task mismatch: " + std::string(to_string(method)) +
                                    " requires classification predictions");
    if (!classification_method && bundle.task != Task::regression)
        throw std::invalid_argument("method/task mismatch: " + std::string(to_string(method)) +
                                    " requires regression predictions");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("generate_targets: alpha must be in (0,1)");

    const Dataset& calib = split.calibration;
    const Dataset& test = split.test;
    if (calib.size() == 0 || test.size() == 0)
        throw std::invalid_argument("generate_targets: empty calibration or test set");

    std::vector<double> scores;
    scores.reserve(calib.size());
    for (std::size_t r = 0; r < calib.size(); ++r) {
        std::size_t row = bundle_row(bundle, calib.record_id(r));
        switch (method) {
            case ScoreMethod::true_class_threshold:
                scores.push_back(true_class_score(bundle.probs[row], calib.label_class(r)));
                break;
            case ScoreMethod::aps:
                scores.push_back(aps_score(bundle.probs[row], calib.label_class(r)));
                break;
            case ScoreMethod::cqr: {
                auto [lo, hi] = bundle.intervals[row];
                scores.push_back(cqr_score(lo, hi, calib.label_real(r)));
                break;
            }
            case ScoreMethod::residual: {
                auto [lo, hi] = bundle.intervals[row];
                scores.push_back(residual_score(0.5 * (lo + hi), calib.label_real(r)));
                break;
            }
        }
    }

    double q_hat = conformal_quantile(scores, alpha);
    if (!classification_method && q_hat == kInf)
        throw std::runtime_error(
            "generate_targets: calibration set too small for alpha (interval unbounded)");

    TargetGeneration out;
    out.calibration = CalibrationResult{method, alpha, q_hat, static_cast<int>(calib.size()),
                                        std::move(scores)};
    out.targets.record_ids.reserve(test.size());
    out.targets.r.reserve(test.size());
    out.covered.reserve(test.size());

    for (std::size_t r = 0; r < test.size(); ++r) {
        int rid = test.record_id(r);
        std::size_t row = bundle_row(bundle, rid);
        double target = 0.0;
        bool covered = false;
        switch (method) {
            case ScoreMethod::true_class_threshold: {
                PredictionSet set = threshold_prediction_set(bundle.probs[row], q_hat);
                target = set.size();
                covered = set.contains(test.label_class(r));
                break;
            }
            case ScoreMethod::aps: {
                PredictionSet set = aps_prediction_set(bundle.probs[row], q_hat);
                target = set.size();
                covered = set.contains(test.label_class(r));
                break;
            }
            case ScoreMethod::cqr: {
                auto [lo, hi] = bundle.intervals[row];
                PredictionInterval interval = cqr_interval(lo, hi, q_hat);
                target = interval.length();
                covered = cqr_score(lo, hi, test.label_real(r)) <= q_hat;
                break;
            }
            case ScoreMethod::residual: {
                auto [lo, hi] = bundle.intervals[row];
                double mid = 0.5 * (lo + hi);
                PredictionInterval interval = cqr_interval(mid, mid, q_hat);
                target = interval.length();
                covered = residual_score(mid, test.label_real(r)) <= q_hat;
                break;
            }
        }
        out.targets.record_ids.push_back(rid);
        out.targets.r.push_back(target);
        out.covered.push_back(covered);
    }
    out.targets.rebuild_index();
    return out;
}

double empirical_coverage(const std::vector<bool>& covered) {
    if (covered.empty()) throw std::invalid_argument("empirical_coverage: no records");
    std::size_t hits = 0;
    for (bool c : covered) hits += c ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(covered.size());
}

double empirical_coverage(const std::vector<PredictionSet>& sets, const std::vector<int>& truths) {
    if (sets.size() != truths.size())
        throw std::invalid_argument("empirical_coverage: misaligned records");
    std::vector<bool> covered(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) covered[i] = sets[i].contains(truths[i]);
    return empirical_coverage(covered);
}

double empirical_coverage(const std::vector<PredictionInterval>& intervals,
                          const std::vector<double>& truths) {
    if (intervals.size() != truths.size())
        throw std::invalid_argument("empirical_coverage: misaligned records");
    std::vector<bool> covered(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) covered[i] = intervals[i].contains(truths[i]);
    return empirical_coverage(covered);
}

}  // namespace cemm
