#ifndef ISA_METADATA_HPP
#define ISA_METADATA_HPP

#include "isa/common.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace isa {

using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature/outcome table, one row per scenario.
///
/// Missing cells hold NaN in `values` and are flagged in `missing`. The mask
/// is kept after imputation so reports can still show which cells were filled.
struct MetadataTable {
    std::vector<std::string> instance_ids;
    std::vector<std::string> feature_names;
    Matrix values;
    MissingMask missing;
    std::vector<Outcome> outcomes;

    std::size_t rows() const { return instance_ids.size(); }
    std::size_t cols() const { return feature_names.size(); }

    bool has_missing() const { return missing.size() > 0 && missing.any(); }

    std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j)
            if (feature_names[j] == name) return j;
        return std::nullopt;
    }

    std::size_t require_column(std::string_view name) const {
        auto j = column_index(name);
        if (!j) throw Error(ErrorCode::UnknownFeature, "no feature named '" + std::string(name) + "'");
        return *j;
    }

    Vector outcome_vector() const {
        Vector y(static_cast<Eigen::Index>(rows()));
        for (std::size_t i = 0; i < rows(); ++i) y(static_cast<Eigen::Index>(i)) = to_int(outcomes[i]);
        return y;
    }

    std::vector<int> outcome_ints() const {
        std::vector<int> y(rows());
        for (std::size_t i = 0; i < rows(); ++i) y[i] = to_int(outcomes[i]);
        return y;
    }

    /// Throws InvalidArgument if any structural invariant is broken.
    void validate() const {
        const auto n = static_cast<Eigen::Index>(rows());
        const auto p = static_cast<Eigen::Index>(cols());
        if (outcomes.size() != rows() || values.rows() != n || values.cols() != p)
            throw Error(ErrorCode::InvalidArgument, "metadata table shape mismatch");
        if (missing.rows() != n || missing.cols() != p)
            throw Error(ErrorCode::InvalidArgument, "missing mask shape mismatch");
        std::unordered_set<std::string> seen;
        for (const auto& f : feature_names)
            if (!seen.insert(f).second) throw Error(ErrorCode::InvalidArgument, "duplicate feature name '" + f + "'");
        seen.clear();
        for (const auto& id : instance_ids)
            if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate instance id '" + id + "'");
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (!missing(i, j) && !std::isfinite(values(i, j)))
                    throw Error(ErrorCode::NonNumericCell, "non-finite value at row " + instance_ids[static_cast<std::size_t>(i)]);
    }

    MetadataTable select_columns(const std::vector<std::size_t>& cols_) const {
        MetadataTable out;
        out.instance_ids = instance_ids;
        out.outcomes = outcomes;
        out.values.resize(values.rows(), static_cast<Eigen::Index>(cols_.size()));
        out.missing.resize(values.rows(), static_cast<Eigen::Index>(cols_.size()));
        for (std::size_t k = 0; k < cols_.size(); ++k) {
            const auto src = static_cast<Eigen::Index>(cols_[k]);
            out.feature_names.push_back(feature_names.at(cols_[k]));
            out.values.col(static_cast<Eigen::Index>(k)) = values.col(src);
            out.missing.col(static_cast<Eigen::Index>(k)) = missing.col(src);
        }
        return out;
    }

    MetadataTable select_columns(const std::vector<std::string>& names) const {
        std::vector<std::size_t> idx;
        idx.reserve(names.size());
        for (const auto& n : names) idx.push_back(require_column(n));
        return select_columns(idx);
    }

    MetadataTable select_rows(const std::vector<std::size_t>& rows_) const {
        MetadataTable out;
        out.feature_names = feature_names;
        out.values.resize(static_cast<Eigen::Index>(rows_.size()), values.cols());
        out.missing.resize(static_cast<Eigen::Index>(rows_.size()), values.cols());
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const auto src = static_cast<Eigen::Index>(rows_[k]);
            out.instance_ids.push_back(instance_ids.at(rows_[k]));
            out.outcomes.push_back(outcomes.at(rows_[k]));
            out.values.row(static_cast<Eigen::Index>(k)) = values.row(src);
            out.missing.row(static_cast<Eigen::Index>(k)) = missing.row(src);
        }
        return out;
    }
};

/// Column naming convention of a metadata CSV.
struct CsvSchema {
    std::string id_column = "id";
    std::string feature_prefix = "feature_";
    std::string outcome_column = "outcome";
};

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Empty, "NA" and "NaN" cells parse as missing (nullopt).
inline std::optional<double> parse_cell(std::string_view raw, bool& ok) {
    ok = true;
    const auto s = trim(raw);
    if (s.empty()) return std::nullopt;
    const auto l = lower(s);
    if (l == "na" || l == "nan") return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        ok = false;
        return std::nullopt;
    }
    return v;
}

inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

} // namespace csv

inline Outcome parse_outcome(std::string_view raw, const std::string& where) {
    const auto v = csv::lower(csv::trim(raw));
    if (v == "unsafe" || v == "1" || v == "fail") return Outcome::Unsafe;
    if (v == "safe" || v == "0" || v == "pass") return Outcome::Safe;
    throw Error(ErrorCode::BadCsv, "unrecognised outcome '" + std::string(raw) + "' at " + where);
}

inline MetadataTable parse_metadata(std::istream& in, const std::string& source, const CsvSchema& schema = {}) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadCsv, source + ": empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = csv::split_line(line);

    std::optional<std::size_t> id_col, outcome_col;
    std::vector<std::size_t> feature_cols;
    MetadataTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = std::string(csv::trim(header[c]));
        if (name == schema.outcome_column) {
            outcome_col = c;
        } else if (name.rfind(schema.feature_prefix, 0) == 0 && name.size() > schema.feature_prefix.size()) {
            feature_cols.push_back(c);
            table.feature_names.push_back(name.substr(schema.feature_prefix.size()));
        } else if (name == schema.id_column) {
            id_col = c;
        }
    }
    if (!outcome_col) throw Error(ErrorCode::MissingOutcome, source + ": no '" + schema.outcome_column + "' column");
    if (!id_col) throw Error(ErrorCode::BadCsv, source + ": no '" + schema.id_column + "' column");
    if (feature_cols.empty()) throw Error(ErrorCode::BadCsv, source + ": no '" + schema.feature_prefix + "' columns");
    {
        std::unordered_set<std::string> names;
        for (const auto& n : table.feature_names)
            if (!names.insert(n).second) throw Error(ErrorCode::BadCsv, source + ": duplicate feature column '" + n + "'");
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> miss;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        std::string where = source + ":" + std::to_string(line_no);
        if (fields.size() != header.size())
            throw Error(ErrorCode::BadCsv, where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
        std::string id(csv::trim(fields[*id_col]));
        where += " (id " + id + ")";
        if (!ids.insert(id).second) throw Error(ErrorCode::DuplicateId, where + ": duplicate id '" + id + "'");
        table.instance_ids.push_back(id);
        table.outcomes.push_back(parse_outcome(fields[*outcome_col], where));
        std::vector<double> row(feature_cols.size());
        std::vector<bool> row_missing(feature_cols.size(), false);
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            bool ok = true;
            auto v = csv::parse_cell(fields[feature_cols[k]], ok);
            if (!ok)
                throw Error(ErrorCode::NonNumericCell, where + ": non-numeric value '" + fields[feature_cols[k]] +
                                                           "' in column '" + header[feature_cols[k]] + "'");
            if (v) {
                row[k] = *v;
            } else {
                row[k] = std::numeric_limits<double>::quiet_NaN();
                row_missing[k] = true;
            }
        }
        rows.push_back(std::move(row));
        miss.push_back(std::move(row_missing));
    }
    if (rows.empty()) throw Error(ErrorCode::NoRows, source + ": no data rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(feature_cols.size());
    table.values.resize(n, p);
    table.missing.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            table.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            table.missing(i, j) = miss[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    return table;
}

inline MetadataTable load_metadata(const std::filesystem::path& path, const CsvSchema& schema = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open metadata file " + path.string());
    return parse_metadata(in, path.string(), schema);
}

inline void write_metadata(const MetadataTable& table, std::ostream& out, const CsvSchema& schema = {}) {
    table.validate();
    out << csv::quote(schema.id_column);
    for (const auto& f : table.feature_names) out << ',' << csv::quote(schema.feature_prefix + f);
    out << ',' << csv::quote(schema.outcome_column) << '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out << csv::quote(table.instance_ids[i]);
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            out << ',';
            if (!table.missing(r, j)) out << csv::format_number(table.values(r, j));
        }
        out << ',' << (table.outcomes[i] == Outcome::Unsafe ? "unsafe" : "safe") << '\n';
    }
}

inline void save_metadata(const MetadataTable& table, const std::filesystem::path& path, const CsvSchema& schema = {}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write metadata file " + path.string());
    write_metadata(table, out, schema);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

/// Builds a fully observed table from a dense matrix.
inline MetadataTable make_table(std::vector<std::string> ids, std::vector<std::string> names, Matrix values,
                                std::vector<Outcome> outcomes) {
    MetadataTable t;
    t.instance_ids = std::move(ids);
    t.feature_names = std::move(names);
    t.values = std::move(values);
    t.missing = MissingMask::Constant(t.values.rows(), t.values.cols(), false);
    t.outcomes = std::move(outcomes);
    t.validate();
    return t;
}

} // namespace isa

#endif // ISA_METADATA_HPP
