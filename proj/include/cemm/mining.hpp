#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cemm/conformal.hpp"
#include "cemm/tabular.hpp"

namespace cemm {

enum class ConditionOp { equals, leq, gt };

struct Condition {
    std::string attribute;
    ConditionOp op = ConditionOp::equals;
    std::variant<double, std::string> value;  // double for binary/numeric, string for nominal

    std::string to_string() const;  // e.g. "age <= 41.5", "smoker = 1", "color = red"
};

bool operator<(const Condition& a, const Condition& b);
bool operator==(const Condition& a, const Condition& b);

// A conjunction of up to `depth` conditions, kept in canonical order
// (attribute, operator, value) so equal descriptions compare equal.
struct Description {
    std::vector<Condition> conditions;

    void canonicalize();
    std::string to_string(std::string_view separator = " AND ") const;
};

struct Subgroup {
    Description description;
    std::vector<int> members;  // test record_ids, ascending
    std::size_t size = 0;
    double aul = 0.0;
    double quality = 0.0;  // global AUL minus subgroup AUL
    int rank = 0;
};

enum class Direction { maximize, minimize, absolute };
enum class LambdaBase { test, full };

std::string_view to_string(Direction direction);
Direction direction_from_string(std::string_view name);

struct MiningParams {
    int depth = 2;
    int beam_width = 20;
    double lambda_min_pct = 5.0;  // minimum subgroup size, percent
    int bins = 9;
    Direction direction = Direction::maximize;
    int top_k = 3;
    CutStrategy cut_strategy = CutStrategy::equal_width;
    LambdaBase lambda_base = LambdaBase::test;
    std::size_t full_size = 0;  // required when lambda_base == full
};

// Mean of r over the member records.
double aul(const std::vector<int>& members, const UncertaintyTarget& targets);

// quality = global_aul - subgroup_aul; positive means more certain than the
// dataset baseline.
double raul(double subgroup_aul, double global_aul);

using CutpointMap = std::map<std::string, std::vector<double>>;

// Extends `base` by one condition: binary {=0,=1}, nominal {=v_j per value},
// numeric {<=t, >t per cut point}; attributes already constrained with the
// same operator are skipped, and canonical duplicates removed.
std::vector<Description> generate_refinements(const Description& base, const Schema& schema,
                                              const CutpointMap& cutpoints, int depth);

// Record ids of the test records satisfying every condition (<= closed, > open).
std::vector<int> evaluate_membership(const Description& description, const Dataset& test);

// Levelwise beam search; the result is the deduplicated union of every
// candidate that met the size floor, ranked by the run's objective with
// ties broken by size (descending) then canonical string (ascending).
std::vector<Subgroup> beam_search(const Dataset& test, const UncertaintyTarget& targets,
                                  const MiningParams& params);

// Among depth-1 numeric subgroups sharing (attribute, operator) keeps only
// the best ranked one; deeper descriptions pass through untouched.
std::vector<Subgroup> numeric_best_pair_filter(std::vector<Subgroup> results);

// Sign filter (maximize keeps quality >= 0, minimize <= 0, absolute keeps
// all), then the numeric best-pair filter, then truncation to top_k with
// ranks assigned.
std::vector<Subgroup> filter_and_rank(std::vector<Subgroup> results, const MiningParams& params);

// Size floor implied by the params: ceil(lambda% of the base population).
std::size_t min_subgroup_size(const MiningParams& params, std::size_t test_size);

std::string format_condition_value(double value);  // 6 significant digits

}  // namespace cemm
