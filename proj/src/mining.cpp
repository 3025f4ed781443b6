#include "cemm/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace cemm {

namespace {

int op_rank(ConditionOp op) {
    switch (op) {
        case ConditionOp::equals: return 0;
        case ConditionOp::leq: return 1;
        case ConditionOp::gt: return 2;
    }
    return 3;
}

std::string_view op_token(ConditionOp op) {
    switch (op) {
        case ConditionOp::equals: return "=";
        case ConditionOp::leq: return "<=";
        case ConditionOp::gt: return ">";
    }
    return "?";
}

double objective(const Subgroup& s, Direction direction) {
    switch (direction) {
        case Direction::maximize: return s.quality;
        case Direction::minimize: return -s.quality;
        case Direction::absolute: return std::fabs(s.quality);
    }
    return 0.0;
}

// Ranking order: objective descending, then size descending, then canonical
// description string ascending.
struct SubgroupOrder {
    Direction direction;
    bool operator()(const Subgroup& a, const Subgroup& b) const {
        double oa = objective(a, direction);
        double ob = objective(b, direction);
        if (oa != ob) return oa > ob;
        if (a.size != b.size) return a.size > b.size;
        return a.description.to_string() < b.description.to_string();
    }
};

}  // namespace

std::string format_condition_value(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

std::string Condition::to_string() const {
    std::string out = attribute;
    out += ' ';
    out += op_token(op);
    out += ' ';
    if (std::holds_alternative<double>(value))
        out += format_condition_value(std::get<double>(value));
    else
        out += std::get<std::string>(value);
    return out;
}

bool operator<(const Condition& a, const Condition& b) {
    if (a.attribute != b.attribute) return a.attribute < b.attribute;
    if (op_rank(a.op) != op_rank(b.op)) return op_rank(a.op) < op_rank(b.op);
    return a.value < b.value;
}

bool operator==(const Condition& a, const Condition& b) {
    return a.attribute == b.attribute && a.op == b.op && a.value == b.value;
}

void Description::canonicalize() { std::sort(conditions.begin(), conditions.end()); }

std::string Description::to_string(std::string_view separator) const {
    std::string out;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (i > 0) out += separator;
        out += conditions[i].to_string();
    }
    return out;
}

std::string_view to_string(Direction direction) {
    switch (direction) {
        case Direction::maximize: return "maximize";
        case Direction::minimize: return "minimize";
        case Direction::absolute: return "absolute";
    }
    return "?";
}

Direction direction_from_string(std::string_view name) {
    if (name == "maximize") return Direction::maximize;
    if (name == "minimize") return Direction::minimize;
    if (name == "absolute") return Direction::absolute;
    throw std::invalid_argument("unknown direction '" + std::string(name) + "'");
}

double aul(const std::vector<int>& members, const UncertaintyTarget& targets) {
    if (members.empty()) throw std::invalid_argument("aul: empty member set");
    double sum = 0.0;
    for (int rid : members) sum += targets.r_of(rid);
    return sum / static_cast<double>(members.size());
}

double raul(double subgroup_aul, double global_aul) { return global_aul - subgroup_aul; }

std::vector<Description> generate_refinements(const Description& base, const Schema& schema,
                                              const CutpointMap& cutpoints, int depth) {
    if (static_cast<int>(base.conditions.size()) >= depth) return {};

    std::vector<Description> out;
    std::unordered_set<std::string> seen;
    auto emit = [&](Condition cond) {
        Description refined = base;
        refined.conditions.push_back(std::move(cond));
        refined.canonicalize();
        if (seen.insert(refined.to_string()).second) out.push_back(std::move(refined));
    };
    auto constrained = [&](const std::string& attr, ConditionOp op) {
        for (const Condition& c : base.conditions)
            if (c.attribute == attr && c.op == op) return true;
        return false;
    };

    for (const Column& col : schema.columns) {
        if (!is_descriptor(col.kind)) continue;
        switch (col.kind) {
            case ColumnKind::binary:
                if (constrained(col.name, ConditionOp::equals)) break;
                emit({col.name, ConditionOp::equals, 0.0});
                emit({col.name, ConditionOp::equals, 1.0});
                break;
            case ColumnKind::nominal:
                if (constrained(col.name, ConditionOp::equals)) break;
                for (const std::string& v : col.values) emit({col.name, ConditionOp::equals, v});
                break;
            case ColumnKind::numeric: {
                auto it = cutpoints.find(col.name);
                if (it == cutpoints.end()) break;
                for (ConditionOp op : {ConditionOp::leq, ConditionOp::gt}) {
                    if (constrained(col.name, op)) continue;
                    for (double t : it->second) emit({col.name, op, t});
                }
                break;
            }
            default: break;
        }
    }
    return out;
}

namespace {

struct CompiledCondition {
    int column = -1;
    ConditionOp op = ConditionOp::equals;
    double num_value = 0.0;
    int cat_value = -1;  // -1: value absent from the column's domain
    bool is_cat = false;
};

CompiledCondition compile_condition(const Condition& cond, const Schema& schema) {
    int col = schema.column_index(cond.attribute);
    if (col < 0)
        throw std::invalid_argument("unknown attribute '" + cond.attribute + "'");
    const Column& column = schema.columns[col];
    if (!is_descriptor(column.kind))
        throw std::invalid_argument("attribute '" + cond.attribute + "' is not a descriptor");

    CompiledCondition out;
    out.column = col;
    out.op = cond.op;
    if (column.kind == ColumnKind::nominal) {
        if (cond.op != ConditionOp::equals)
            throw std::invalid_argument("nominal attribute '" + cond.attribute +
                                        "' supports only equality");
        out.is_cat = true;
        const std::string& token = std::get<std::string>(cond.value);
        auto it = std::lower_bound(column.values.begin(), column.values.end(), token);
        out.cat_value = (it != column.values.end() && *it == token)
                            ? static_cast<int>(it - column.values.begin())
                            : -1;
    } else {
        if (column.kind == ColumnKind::binary && cond.op != ConditionOp::equals)
            throw std::invalid_argument("binary attribute '" + cond.attribute +
                                        "' supports only equality");
        if (column.kind == ColumnKind::numeric && cond.op == ConditionOp::equals)
            throw std::invalid_argument("numeric attribute '" + cond.attribute +
                                        "' supports only <= and >");
        out.num_value = std::get<double>(cond.value);
    }
    return out;
}

bool matches(const CompiledCondition& cond, const Dataset& data, std::size_t row) {
    if (cond.is_cat) return data.category_value(cond.column, row) == cond.cat_value;
    double v = data.numeric_value(cond.column, row);
    switch (cond.op) {
        case ConditionOp::equals: return v == cond.num_value;
        case ConditionOp::leq: return v <= cond.num_value;
        case ConditionOp::gt: return v > cond.num_value;
    }
    return false;
}

std::vector<std::size_t> matching_rows(const Description& description, const Dataset& test) {
    std::vector<CompiledCondition> compiled;
    compiled.reserve(description.conditions.size());
    for (const Condition& c : description.conditions)
        compiled.push_back(compile_condition(c, test.schema()));
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < test.size(); ++r) {
        bool ok = true;
        for (const CompiledCondition& c : compiled) {
            if (!matches(c, test, r)) {
                ok = false;
                break;
            }
        }
        if (ok) rows.push_back(r);
    }
    return rows;
}

}  // namespace

std::vector<int> evaluate_membership(const Description& description, const Dataset& test) {
    std::vector<int> ids;
    for (std::size_t row : matching_rows(description, test)) ids.push_back(test.record_id(row));
    return ids;
}

std::size_t min_subgroup_size(const MiningParams& params, std::size_t test_size) {
    if (!(params.lambda_min_pct > 0.0 && params.lambda_min_pct <= 100.0))
        throw std::invalid_argument("lambda_min_pct must be in (0,100]");
    std::size_t base = test_size;
    if (params.lambda_base == LambdaBase::full) {
        if (params.full_size == 0)
            throw std::invalid_argument("lambda_base=full requires full_size");
        base = params.full_size;
    }
    auto floor_size = static_cast<std::size_t>(
        std::ceil(params.lambda_min_pct / 100.0 * static_cast<double>(base)));
    return std::max<std::size_t>(1, floor_size);
}

std::vector<Subgroup> beam_search(const Dataset& test, const UncertaintyTarget& targets,
                                  const MiningParams& params) {
    if (test.size() == 0) throw std::invalid_argument("beam_search: empty test set");
    if (params.depth < 1) throw std::invalid_argument("beam_search: depth must be >= 1");
    if (params.beam_width < 1) throw std::invalid_argument("beam_search: beam_width must be >= 1");

    // Targets must cover every test record.
    std::vector<double> r_by_row(test.size());
    for (std::size_t row = 0; row < test.size(); ++row)
        r_by_row[row] = targets.r_of(test.record_id(row));
    double global_sum = 0.0;
    for (double v : r_by_row) global_sum += v;
    double global_aul = global_sum / static_cast<double>(test.size());

    std::size_t floor_size = min_subgroup_size(params, test.size());

    CutpointMap cutpoints;
    for (const Column& col : test.schema().columns) {
        if (col.kind != ColumnKind::numeric) continue;
        cutpoints[col.name] = numeric_cut_points(test, col.name, params.bins, params.cut_strategy);
    }

    SubgroupOrder order{params.direction};
    std::vector<Subgroup> pool;
    std::unordered_set<std::string> evaluated;

    auto evaluate_level = [&](const std::vector<Description>& candidates) {
        std::vector<Subgroup> level;
        for (const Description& desc : candidates) {
            std::string key = desc.to_string();
            if (!evaluated.insert(key).second) continue;
            auto rows = matching_rows(desc, test);
            if (rows.size() < floor_size) continue;
            Subgroup sub;
            sub.description = desc;
            sub.members.reserve(rows.size());
            double sum = 0.0;
            for (std::size_t row : rows) {
                sub.members.push_back(test.record_id(row));
                sum += r_by_row[row];
            }
            sub.size = rows.size();
            sub.aul = sum / static_cast<double>(rows.size());
            sub.quality = raul(sub.aul, global_aul);
            level.push_back(sub);
            pool.push_back(std::move(sub));
        }
        return level;
    };

    Description empty;
    std::vector<Subgroup> beam = evaluate_level(generate_refinements(empty, test.schema(),
                                                                     cutpoints, params.depth));
    std::sort(beam.begin(), beam.end(), order);
    if (beam.size() > static_cast<std::size_t>(params.beam_width))
        beam.resize(static_cast<std::size_t>(params.beam_width));

    for (int level = 2; level <= params.depth && !beam.empty(); ++level) {
        std::vector<Description> candidates;
        for (const Subgroup& member : beam) {
            auto refinements =
                generate_refinements(member.description, test.schema(), cutpoints, params.depth);
            candidates.insert(candidates.end(), refinements.begin(), refinements.end());
        }
        std::vector<Subgroup> next = evaluate_level(candidates);
        std::sort(next.begin(), next.end(), order);
        if (next.size() > static_cast<std::size_t>(params.beam_width))
            next.resize(static_cast<std::size_t>(params.beam_width));
        beam = std::move(next);
    }

    std::sort(pool.begin(), pool.end(), order);
    return pool;
}

std::vector<Subgroup> numeric_best_pair_filter(std::vector<Subgroup> results) {
    std::unordered_set<std::string> kept_pairs;
    std::vector<Subgroup> out;
    out.reserve(results.size());
    for (Subgroup& sub : results) {
        if (sub.description.conditions.size() == 1) {
            const Condition& cond = sub.description.conditions.front();
            if (cond.op == ConditionOp::leq || cond.op == ConditionOp::gt) {
                std::string key = cond.attribute + '\x1f' + std::string(op_token(cond.op));
                if (!kept_pairs.insert(key).second) continue;  // a better value already kept
            }
        }
        out.push_back(std::move(sub));
    }
    return out;
}

std::vector<Subgroup> filter_and_rank(std::vector<Subgroup> results, const MiningParams& params) {
    std::vector<Subgroup> filtered;
    filtered.reserve(results.size());
    for (Subgroup& sub : results) {
        if (params.direction == Direction::maximize && sub.quality < 0.0) continue;
        if (params.direction == Direction::minimize && sub.quality > 0.0) continue;
        filtered.push_back(std::move(sub));
    }
    filtered = numeric_best_pair_filter(std::move(filtered));
    if (params.top_k >= 0 && filtered.size() > static_cast<std::size_t>(params.top_k))
        filtered.resize(static_cast<std::size_t>(params.top_k));
    for (std::size_t i = 0; i < filtered.size(); ++i) filtered[i].rank = static_cast<int>(i) + 1;
    return filtered;
}

}  // namespace cemm
