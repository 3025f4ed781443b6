#pragma once

// Exhaustive depth<=2 subgroup enumeration used as an independent oracle for
// beam_search. It builds the candidate vocabulary with plain loops, evaluates
// membership with its own record scan, and ranks with its own comparator --
// nothing here goes through the library's refinement or beam machinery.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cemm/mining.hpp"
#include "cemm/tabular.hpp"

namespace testsup {

struct OracleCondition {
    std::string attribute;
    int column = -1;
    int op_rank = 0;  // 0 equals, 1 leq, 2 gt
    double num_value = 0.0;
    int cat_value = -1;
    bool is_cat = false;
    std::string text;
};

struct OracleSubgroup {
    std::string description;
    std::vector<int> members;
    std::size_t size = 0;
    double aul = 0.0;
    double quality = 0.0;
};

inline bool oracle_matches(const OracleCondition& c, const cemm::Dataset& data, std::size_t row) {
    if (c.is_cat) return data.category_value(c.column, row) == c.cat_value;
    double v = data.numeric_value(c.column, row);
    if (c.op_rank == 0) return v == c.num_value;
    if (c.op_rank == 1) return v <= c.num_value;
    return v > c.num_value;
}

inline std::vector<OracleCondition> oracle_vocabulary(const cemm::Dataset& test,
                                                      const cemm::MiningParams& params) {
    std::vector<OracleCondition> vocab;
    const cemm::Schema& schema = test.schema();
    for (std::size_t col = 0; col < schema.columns.size(); ++col) {
        const cemm::Column& column = schema.columns[col];
        if (!cemm::is_descriptor(column.kind)) continue;
        if (column.kind == cemm::ColumnKind::binary) {
            for (double v : {0.0, 1.0}) {
                OracleCondition c;
                c.attribute = column.name;
                c.column = static_cast<int>(col);
                c.num_value = v;
                c.text = column.name + " = " + cemm::format_condition_value(v);
                vocab.push_back(c);
            }
        } else if (column.kind == cemm::ColumnKind::nominal) {
            for (std::size_t v = 0; v < column.values.size(); ++v) {
                OracleCondition c;
                c.attribute = column.name;
                c.column = static_cast<int>(col);
                c.is_cat = true;
                c.cat_value = static_cast<int>(v);
                c.text = column.name + " = " + column.values[v];
                vocab.push_back(c);
            }
        } else {
            auto cuts = cemm::numeric_cut_points(test, column.name, params.bins,
                                                 params.cut_strategy);
            for (int op = 1; op <= 2; ++op) {
                for (double t : cuts) {
                    OracleCondition c;
                    c.attribute = column.name;
                    c.column = static_cast<int>(col);
                    c.op_rank = op;
                    c.num_value = t;
                    c.text = column.name + (op == 1 ? " <= " : " > ") +
                             cemm::format_condition_value(t);
                    vocab.push_back(c);
                }
            }
        }
    }
    return vocab;
}

inline std::vector<OracleSubgroup> exhaustive_depth2(const cemm::Dataset& test,
                                                     const cemm::UncertaintyTarget& targets,
                                                     const cemm::MiningParams& params) {
    std::vector<double> r_by_row(test.size());
    double global_sum = 0.0;
    for (std::size_t row = 0; row < test.size(); ++row) {
        r_by_row[row] = targets.r_of(test.record_id(row));
        global_sum += r_by_row[row];
    }
    double global_aul = global_sum / static_cast<double>(test.size());
    auto floor_size = static_cast<std::size_t>(
        std::ceil(params.lambda_min_pct / 100.0 * static_cast<double>(test.size())));
    if (floor_size < 1) floor_size = 1;

    auto vocab = oracle_vocabulary(test, params);

    std::vector<OracleSubgroup> out;
    auto evaluate = [&](const std::vector<const OracleCondition*>& conds) {
        std::vector<int> members;
        double sum = 0.0;
        for (std::size_t row = 0; row < test.size(); ++row) {
            bool ok = true;
            for (const OracleCondition* c : conds)
                if (!oracle_matches(*c, test, row)) {
                    ok = false;
                    break;
                }
            if (ok) {
                members.push_back(test.record_id(row));
                sum += r_by_row[row];
            }
        }
        if (members.size() < floor_size) return;
        OracleSubgroup sub;
        // canonical order: (attribute, operator, value)
        std::vector<const OracleCondition*> sorted = conds;
        std::sort(sorted.begin(), sorted.end(),
                  [](const OracleCondition* a, const OracleCondition* b) {
                      if (a->attribute != b->attribute) return a->attribute < b->attribute;
                      if (a->op_rank != b->op_rank) return a->op_rank < b->op_rank;
                      if (a->is_cat != b->is_cat) return !a->is_cat;
                      if (a->is_cat) return a->text < b->text;
                      return a->num_value < b->num_value;
                  });
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0) sub.description += " AND ";
            sub.description += sorted[i]->text;
        }
        sub.size = members.size();
        sub.aul = sum / static_cast<double>(members.size());
        sub.quality = global_aul - sub.aul;
        sub.members = std::move(members);
        out.push_back(std::move(sub));
    };

    for (std::size_t i = 0; i < vocab.size(); ++i) evaluate({&vocab[i]});
    if (params.depth >= 2) {
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            for (std::size_t j = i + 1; j < vocab.size(); ++j) {
                if (vocab[i].attribute == vocab[j].attribute &&
                    vocab[i].op_rank == vocab[j].op_rank)
                    continue;  // one condition per (attribute, operator)
                evaluate({&vocab[i], &vocab[j]});
            }
        }
    }

    auto objective = [&](const OracleSubgroup& s) {
        switch (params.direction) {
            case cemm::Direction::maximize: return s.quality;
            case cemm::Direction::minimize: return -s.quality;
            case cemm::Direction::absolute: return std::fabs(s.quality);
        }
        return 0.0;
    };
    std::sort(out.begin(), out.end(), [&](const OracleSubgroup& a, const OracleSubgroup& b) {
        double oa = objective(a), ob = objective(b);
        if (oa != ob) return oa > ob;
        if (a.size != b.size) return a.size > b.size;
        return a.description < b.description;
    });
    return out;
}

}  // namespace testsup
