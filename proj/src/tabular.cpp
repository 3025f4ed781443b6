#include "cemm/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "cemm/csv.hpp"
#include "cemm/rng.hpp"

namespace cemm {

namespace {

ColumnKind parse_kind(std::string_view token, std::size_t line) {
    if (token == "binary") return ColumnKind::binary;
    if (token == "nominal") return ColumnKind::nominal;
    if (token == "numeric") return ColumnKind::numeric;
    if (token == "label_class") return ColumnKind::label_class;
    if (token == "label_real") return ColumnKind::label_real;
    if (token == "prediction") return ColumnKind::prediction;
    throw std::invalid_argument("schema line " + std::to_string(line) + ": unknown kind '" +
                                std::string(token) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view token, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw std::invalid_argument("row " + std::to_string(row) + " column '" + column +
                                    "': non-numeric value '" + std::string(token) + "'");
    if (!std::isfinite(value))
        throw std::invalid_argument("row " + std::to_string(row) + " column '" + column +
                                    "': non-finite value");
    return value;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::binary: return "binary";
        case ColumnKind::nominal: return "nominal";
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::label_class: return "label_class";
        case ColumnKind::label_real: return "label_real";
        case ColumnKind::prediction: return "prediction";
    }
    return "?";
}

int Schema::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

int Schema::label_column() const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        ColumnKind k = columns[i].kind;
        if (k == ColumnKind::label_class || k == ColumnKind::label_real)
            return static_cast<int>(i);
    }
    return -1;
}

Task Schema::task() const {
    int label = label_column();
    if (label < 0) throw std::logic_error("schema has no label column");
    return columns[label].kind == ColumnKind::label_class ? Task::classification
                                                          : Task::regression;
}

int Schema::num_classes() const {
    int label = label_column();
    if (label < 0 || columns[label].kind != ColumnKind::label_class) return 0;
    return static_cast<int>(columns[label].values.size());
}

Schema parse_schema(std::string_view text) {
    Schema schema;
    std::unordered_set<std::string> seen;
    int labels = 0;
    std::size_t line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line;
        std::string_view body = trim(raw);
        if (body.empty()) continue;
        std::size_t comma = body.find(',');
        if (comma == std::string_view::npos)
            throw std::invalid_argument("schema line " + std::to_string(line) +
                                        ": expected 'name,kind'");
        std::string name(trim(body.substr(0, comma)));
        std::string_view kind_tok = trim(body.substr(comma + 1));
        if (name.empty())
            throw std::invalid_argument("schema line " + std::to_string(line) + ": empty column name");
        if (!seen.insert(name).second)
            throw std::invalid_argument("schema: duplicate column name '" + name + "'");
        Column col;
        col.name = std::move(name);
        col.kind = parse_kind(kind_tok, line);
        if (col.kind == ColumnKind::label_class || col.kind == ColumnKind::label_real) ++labels;
        schema.columns.push_back(std::move(col));
    }
    if (schema.columns.empty()) throw std::invalid_argument("schema: no columns");
    if (labels == 0) throw std::invalid_argument("schema: no label column");
    if (labels > 1) throw std::invalid_argument("schema: multiple labels");
    return schema;
}

Schema load_schema(const std::string& path) { return parse_schema(read_file(path)); }

int Dataset::label_class(std::size_t row) const {
    int label = schema_.label_column();
    if (label < 0 || schema_.columns[label].kind != ColumnKind::label_class)
        throw std::logic_error("dataset has no label_class column");
    return columns_[label].cat[row];
}

double Dataset::label_real(std::size_t row) const {
    int label = schema_.label_column();
    if (label < 0 || schema_.columns[label].kind != ColumnKind::label_real)
        throw std::logic_error("dataset has no label_real column");
    return columns_[label].num[row];
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.schema_ = schema_;
    out.record_ids_.reserve(rows.size());
    for (std::size_t r : rows) out.record_ids_.push_back(record_ids_[r]);
    out.columns_.resize(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        const ColumnStorage& src = columns_[c];
        ColumnStorage& dst = out.columns_[c];
        if (!src.num.empty()) {
            dst.num.reserve(rows.size());
            for (std::size_t r : rows) dst.num.push_back(src.num[r]);
        }
        if (!src.cat.empty()) {
            dst.cat.reserve(rows.size());
            for (std::size_t r : rows) dst.cat.push_back(src.cat[r]);
        }
    }
    return out;
}

Dataset Dataset::from_parts(Schema schema, std::vector<int> record_ids,
                            std::vector<ColumnStorage> columns) {
    if (columns.size() != schema.columns.size())
        throw std::invalid_argument("from_parts: column count mismatch");
    Dataset out;
    out.schema_ = std::move(schema);
    out.record_ids_ = std::move(record_ids);
    out.columns_ = std::move(columns);
    for (std::size_t c = 0; c < out.columns_.size(); ++c) {
        const auto& col = out.columns_[c];
        std::size_t n = col.num.empty() ? col.cat.size() : col.num.size();
        if (n != out.record_ids_.size())
            throw std::invalid_argument("from_parts: row count mismatch in column " +
                                        out.schema_.columns[c].name);
        const auto& values = out.schema_.columns[c].values;
        if (!std::is_sorted(values.begin(), values.end()))
            throw std::invalid_argument("from_parts: value set of column " +
                                        out.schema_.columns[c].name + " must be sorted");
    }
    return out;
}

Dataset parse_dataset_csv(std::string_view csv, const Schema& schema) {
    auto rows = parse_csv(csv);
    if (rows.empty()) throw std::invalid_argument("dataset: empty file");
    const auto& header = rows.front();

    // Match columns by name; order in the file is free.
    std::unordered_map<std::string, std::size_t> file_pos;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!file_pos.emplace(std::string(trim(header[i])), i).second)
            throw std::invalid_argument("dataset: duplicate header field '" + header[i] + "'");
    }
    if (file_pos.size() != schema.columns.size())
        throw std::invalid_argument("dataset: header mismatch (expected " +
                                    std::to_string(schema.columns.size()) + " columns, got " +
                                    std::to_string(file_pos.size()) + ")");
    std::vector<std::size_t> source(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        auto it = file_pos.find(schema.columns[c].name);
        if (it == file_pos.end())
            throw std::invalid_argument("dataset: header mismatch, missing column '" +
                                        schema.columns[c].name + "'");
        source[c] = it->second;
    }

    std::size_t n = rows.size() - 1;
    if (n == 0) throw std::invalid_argument("dataset: no data rows");

    Schema filled = schema;
    std::vector<Dataset::ColumnStorage> columns(schema.columns.size());
    // First pass: raw tokens for categorical columns so value sets can be
    // interned in sorted order.
    std::vector<std::vector<std::string>> raw_cats(schema.columns.size());

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw std::invalid_argument("row " + std::to_string(r) + ": missing field (got " +
                                        std::to_string(row.size()) + " of " +
                                        std::to_string(header.size()) + ")");
        for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            const Column& col = schema.columns[c];
            const std::string& token = row[source[c]];
            switch (col.kind) {
                case ColumnKind::binary: {
                    if (token != "0" && token != "1")
                        throw std::invalid_argument("row " + std::to_string(r) + " column '" +
                                                    col.name + "': binary value outside {0,1}: '" +
                                                    token + "'");
                    columns[c].num.push_back(token == "1" ? 1.0 : 0.0);
                    break;
                }
                case ColumnKind::numeric:
                case ColumnKind::label_real:
                case ColumnKind::prediction:
                    columns[c].num.push_back(parse_double(token, r, col.name));
                    break;
                case ColumnKind::nominal:
                case ColumnKind::label_class: {
                    if (trim(token).empty())
                        throw std::invalid_argument("row " + std::to_string(r) + " column '" +
                                                    col.name + "': missing value");
                    raw_cats[c].push_back(token);
                    break;
                }
            }
        }
    }

    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        const Column& col = schema.columns[c];
        if (col.kind != ColumnKind::nominal && col.kind != ColumnKind::label_class) continue;
        std::set<std::string> uniq(raw_cats[c].begin(), raw_cats[c].end());
        filled.columns[c].values.assign(uniq.begin(), uniq.end());
        std::unordered_map<std::string, int> index;
        for (std::size_t v = 0; v < filled.columns[c].values.size(); ++v)
            index.emplace(filled.columns[c].values[v], static_cast<int>(v));
        columns[c].cat.reserve(raw_cats[c].size());
        for (const std::string& token : raw_cats[c]) columns[c].cat.push_back(index.at(token));
    }

    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    return Dataset::from_parts(std::move(filled), std::move(ids), std::move(columns));
}

Dataset load_dataset(const std::string& path, const Schema& schema) {
    return parse_dataset_csv(read_file(path), schema);
}

SplitPair split_calibration_test(const Dataset& dataset, double calib_fraction,
                                 std::uint64_t seed) {
    if (!(calib_fraction > 0.0 && calib_fraction < 1.0))
        throw std::invalid_argument("calib_fraction must be in (0,1)");
    std::size_t n_total = dataset.size();
    auto n_calib = static_cast<std::size_t>(std::floor(calib_fraction * static_cast<double>(n_total)));
    if (n_calib < 2 || n_total - n_calib < 2)
        throw std::invalid_argument("split: side too small (n=" + std::to_string(n_calib) +
                                    ", N-n=" + std::to_string(n_total - n_calib) + ")");

    auto order = shuffled_indices(n_total, seed);
    std::vector<std::size_t> calib_rows(order.begin(), order.begin() + n_calib);
    std::vector<std::size_t> test_rows(order.begin() + n_calib, order.end());
    std::sort(calib_rows.begin(), calib_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    SplitPair pair;
    pair.calibration = dataset.subset(calib_rows);
    pair.test = dataset.subset(test_rows);
    pair.seed = seed;
    return pair;
}

std::vector<double> numeric_cut_points(const Dataset& dataset, std::string_view attribute,
                                       int bins, CutStrategy strategy) {
    if (bins < 2) throw std::invalid_argument("numeric_cut_points: bins must be >= 2");
    int col = dataset.schema().column_index(attribute);
    if (col < 0)
        throw std::invalid_argument("numeric_cut_points: unknown attribute '" +
                                    std::string(attribute) + "'");
    ColumnKind kind = dataset.schema().columns[col].kind;
    if (kind != ColumnKind::numeric)
        throw std::invalid_argument("numeric_cut_points: attribute '" + std::string(attribute) +
                                    "' is not numeric");
    if (dataset.size() == 0) throw std::invalid_argument("numeric_cut_points: empty dataset");

    std::vector<double> values;
    values.reserve(dataset.size());
    for (std::size_t r = 0; r < dataset.size(); ++r) values.push_back(dataset.numeric_value(col, r));
    std::sort(values.begin(), values.end());
    double lo = values.front();
    double hi = values.back();
    if (lo == hi) return {};

    std::vector<double> thresholds;
    if (strategy == CutStrategy::equal_width) {
        double width = (hi - lo) / static_cast<double>(bins);
        for (int i = 1; i < bins; ++i) thresholds.push_back(lo + width * static_cast<double>(i));
    } else {
        for (int i = 1; i < bins; ++i) {
            auto idx = static_cast<std::size_t>(
                std::floor(static_cast<double>(values.size()) * static_cast<double>(i) /
                           static_cast<double>(bins)));
            if (idx >= values.size()) idx = values.size() - 1;
            thresholds.push_back(values[idx]);
        }
    }

    // Keep strictly increasing thresholds strictly inside (min, max).
    std::vector<double> out;
    for (double t : thresholds) {
        if (t <= lo || t >= hi) continue;
        if (!out.empty() && t <= out.back()) continue;
        out.push_back(t);
    }
    return out;
}

}  // namespace cemm
