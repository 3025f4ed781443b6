#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cemm {

enum class Task { classification, regression };

enum class ColumnKind { binary, nominal, numeric, label_class, label_real, prediction };

std::string_view to_string(ColumnKind kind);

// Descriptor columns are the ones subgroup descriptions and model features
// may draw from.
constexpr bool is_descriptor(ColumnKind k) {
    return k == ColumnKind::binary || k == ColumnKind::nominal || k == ColumnKind::numeric;
}

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // Observed value set for nominal / label_class columns, sorted; filled
    // when a dataset is loaded against the schema.
    std::vector<std::string> values;
};

struct Schema {
    std::vector<Column> columns;

    int column_index(std::string_view name) const;  // -1 when absent
    int label_column() const;
    Task task() const;
    int num_classes() const;  // label_class value count
};

// Schema file: one "name,kind" pair per line.
Schema parse_schema(std::string_view text);
Schema load_schema(const std::string& path);

class Dataset {
public:
    Dataset() = default;

    const Schema& schema() const { return schema_; }
    std::size_t size() const { return record_ids_.size(); }
    int record_id(std::size_t row) const { return record_ids_[row]; }
    const std::vector<int>& record_ids() const { return record_ids_; }

    // binary / numeric / prediction / label_real cells
    double numeric_value(int col, std::size_t row) const { return columns_[col].num[row]; }
    // nominal / label_class cells, as an index into schema().columns[col].values
    int category_value(int col, std::size_t row) const { return columns_[col].cat[row]; }

    int label_class(std::size_t row) const;
    double label_real(std::size_t row) const;

    Dataset subset(const std::vector<std::size_t>& rows) const;

    struct ColumnStorage {
        std::vector<double> num;
        std::vector<int> cat;
    };

    static Dataset from_parts(Schema schema, std::vector<int> record_ids,
                              std::vector<ColumnStorage> columns);

private:
    Schema schema_;
    std::vector<int> record_ids_;
    std::vector<ColumnStorage> columns_;
};

// RFC-4180 CSV with a header row; columns are matched to the schema by name.
Dataset parse_dataset_csv(std::string_view csv, const Schema& schema);
Dataset load_dataset(const std::string& path, const Schema& schema);

struct SplitPair {
    Dataset calibration;
    Dataset test;
    std::uint64_t seed = 0;
};

// Uniform random partition, deterministic under (dataset, fraction, seed).
// n = floor(calib_fraction * N); both sides must end up with >= 2 records.
SplitPair split_calibration_test(const Dataset& dataset, double calib_fraction,
                                 std::uint64_t seed);

enum class CutStrategy { equal_width, equal_frequency };

// bins >= 2 yields at most bins-1 strictly increasing thresholds, all strictly
// inside (min, max) of the observed values. Constant columns yield none.
std::vector<double> numeric_cut_points(const Dataset& dataset, std::string_view attribute,
                                       int bins, CutStrategy strategy = CutStrategy::equal_width);

}  // namespace cemm
