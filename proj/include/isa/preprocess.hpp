#ifndef ISA_PREPROCESS_HPP
#define ISA_PREPROCESS_HPP

#include "isa/common.hpp"
#include "isa/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace isa::preprocess {

/// Per-feature mean and sample standard deviation (n - 1 denominator).
struct NormalizationParams {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw Error(ErrorCode::UnknownFeature, "no normalization parameters for '" + name + "'");
    }

    NormalizationParams subset(const std::vector<std::string>& keep) const {
        NormalizationParams out;
        for (const auto& n : keep) {
            const auto i = index_of(n);
            out.names.push_back(n);
            out.mean.push_back(mean[i]);
            out.stddev.push_back(stddev[i]);
        }
        return out;
    }
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Replaces missing cells with the column median of the observed cells.
/// The missing mask is carried over unchanged.
inline MetadataTable impute_missing(const MetadataTable& table) {
    MetadataTable out = table;
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
        if (!table.missing.col(j).any()) continue;
        std::vector<double> seen;
        for (Eigen::Index i = 0; i < table.values.rows(); ++i)
            if (!table.missing(i, j)) seen.push_back(table.values(i, j));
        if (seen.empty())
            throw Error(ErrorCode::AllMissing, "feature '" + table.feature_names[static_cast<std::size_t>(j)] +
                                                   "' has no observed values");
        const double m = median(std::move(seen));
        for (Eigen::Index i = 0; i < table.values.rows(); ++i)
            if (table.missing(i, j)) out.values(i, j) = m;
    }
    return out;
}

struct ZScoreResult {
    MetadataTable table;
    NormalizationParams params;
    std::vector<std::string> zero_variance;
};

/// Standardizes every column; zero-variance columns are dropped and reported.
inline ZScoreResult zscore(const MetadataTable& table) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j)
        for (Eigen::Index i = 0; i < table.values.rows(); ++i)
            if (!std::isfinite(table.values(i, j)))
                throw Error(ErrorCode::InvalidArgument, "zscore requires imputed data; column '" +
                                                            table.feature_names[static_cast<std::size_t>(j)] + "'");
    ZScoreResult r;
    std::vector<std::size_t> keep;
    const double n = static_cast<double>(table.rows());
    for (std::size_t j = 0; j < table.cols(); ++j) {
        const auto col = table.values.col(static_cast<Eigen::Index>(j));
        const double mean = col.mean();
        const double ss = (col.array() - mean).square().sum();
        const double sd = table.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            r.zero_variance.push_back(table.feature_names[j]);
            continue;
        }
        keep.push_back(j);
        r.params.names.push_back(table.feature_names[j]);
        r.params.mean.push_back(mean);
        r.params.stddev.push_back(sd);
    }
    r.table = table.select_columns(keep);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        auto col = r.table.values.col(static_cast<Eigen::Index>(k));
        col = (col.array() - r.params.mean[k]) / r.params.stddev[k];
    }
    return r;
}

/// Standardizes the named columns of `table` with previously fitted parameters.
/// Returns instances x features.
inline Matrix apply_normalization(const MetadataTable& table, const NormalizationParams& params) {
    Matrix out(table.values.rows(), static_cast<Eigen::Index>(params.names.size()));
    for (std::size_t k = 0; k < params.names.size(); ++k) {
        const auto j = static_cast<Eigen::Index>(table.require_column(params.names[k]));
        out.col(static_cast<Eigen::Index>(k)) = (table.values.col(j).array() - params.mean[k]) / params.stddev[k];
    }
    return out;
}

/// Fractional (average-tie) ranks, 1-based.
inline std::vector<double> fractional_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    return rank;
}

struct Correlation {
    double rho = 0.0;
    bool degenerate = false; // one side had zero rank variance
};

inline Correlation pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return {0.0, true};
    return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

/// Spearman rank correlation as the Pearson correlation of fractional ranks.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "spearman needs two equal-length vectors of length >= 2");
    const auto rx = fractional_ranks(x);
    const auto ry = fractional_ranks(y);
    return pearson(rx, ry);
}

/// Feature-feature and feature-outcome Spearman correlations.
struct CorrelationMatrix {
    std::vector<std::string> names;
    Matrix features; // p x p, unit diagonal
    Vector outcome;  // p

    CorrelationMatrix subset(const std::vector<std::string>& keep) const {
        std::vector<Eigen::Index> idx;
        for (const auto& k : keep) {
            auto it = std::find(names.begin(), names.end(), k);
            if (it == names.end()) throw Error(ErrorCode::UnknownFeature, k);
            idx.push_back(it - names.begin());
        }
        CorrelationMatrix out;
        out.names = keep;
        const auto m = static_cast<Eigen::Index>(idx.size());
        out.features.resize(m, m);
        out.outcome.resize(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            out.outcome(a) = outcome(idx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < m; ++b)
                out.features(a, b) = features(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        return out;
    }
};

inline CorrelationMatrix correlations(const MetadataTable& table) {
    const std::size_t p = table.cols();
    const std::size_t n = table.rows();
    std::vector<std::vector<double>> ranks(p);
    parallel_for(p, [&](std::size_t j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i)
            col[i] = table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        ranks[j] = fractional_ranks(col);
    });
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = to_int(table.outcomes[i]);
    const auto ry = fractional_ranks(y);

    CorrelationMatrix c;
    c.names = table.feature_names;
    c.features = Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    c.outcome.resize(static_cast<Eigen::Index>(p));
    parallel_for(p, [&](std::size_t a) {
        const auto ia = static_cast<Eigen::Index>(a);
        c.outcome(ia) = pearson(ranks[a], ry).rho;
        for (std::size_t b = a + 1; b < p; ++b) {
            const double r = pearson(ranks[a], ranks[b]).rho;
            c.features(ia, static_cast<Eigen::Index>(b)) = r;
            c.features(static_cast<Eigen::Index>(b), ia) = r;
        }
    });
    return c;
}

struct RedundantDrop {
    std::string kept;
    std::string dropped;
    double rho = 0.0;
};

struct WeakDrop {
    std::string name;
    double rho_outcome = 0.0;
};

struct PruneReport {
    std::vector<std::string> zero_variance;
    std::vector<RedundantDrop> redundant;
    std::vector<WeakDrop> weak;
    std::vector<std::pair<std::string, std::size_t>> imputed; // feature -> imputed cell count
    std::vector<std::string> retained;

    std::string to_text() const {
        std::ostringstream os;
        os << "Feature pruning report\n";
        os << "retained (" << retained.size() << "):";
        for (const auto& r : retained) os << ' ' << r;
        os << "\n\nimputed cells (column median):\n";
        for (const auto& [name, count] : imputed) os << "  " << name << ": " << count << '\n';
        os << "\ndropped, zero variance (" << zero_variance.size() << "):\n";
        for (const auto& z : zero_variance) os << "  " << z << '\n';
        os << "\ndropped, redundant (" << redundant.size() << "):\n";
        for (const auto& r : redundant)
            os << "  " << r.dropped << " (kept " << r.kept << ", rho=" << csv::format_number(r.rho) << ")\n";
        os << "\ndropped, weak outcome correlation (" << weak.size() << "):\n";
        for (const auto& w : weak) os << "  " << w.name << " (rho_y=" << csv::format_number(w.rho_outcome) << ")\n";
        return os.str();
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "feature,action,related_feature,rho\n";
        for (const auto& r : retained) os << csv::quote(r) << ",retained,,\n";
        for (const auto& z : zero_variance) os << csv::quote(z) << ",zero_variance,,\n";
        for (const auto& r : redundant)
            os << csv::quote(r.dropped) << ",redundant," << csv::quote(r.kept) << ',' << csv::format_number(r.rho) << '\n';
        for (const auto& w : weak) os << csv::quote(w.name) << ",weak,," << csv::format_number(w.rho_outcome) << '\n';
        for (const auto& [name, count] : imputed) os << csv::quote(name) << ",imputed_cells,," << count << '\n';
        return os.str();
    }
};

struct PruneResult {
    MetadataTable table;
    PruneReport report;
};

/// Drops one member of every strongly correlated pair (the one less correlated
/// with the outcome; ties drop the larger column index), visiting pairs by
/// descending |rho|, then drops features whose |rho_y| is below `weak_threshold`.
inline PruneResult prune_features(const MetadataTable& table, const CorrelationMatrix& corr, double redundant_threshold,
                                  double weak_threshold) {
    if (!(redundant_threshold > 0.0 && redundant_threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "redundancy threshold must be in (0, 1]");
    if (!(weak_threshold >= 0.0 && weak_threshold < 1.0))
        throw Error(ErrorCode::InvalidArgument, "weak threshold must be in [0, 1)");
    const std::size_t p = table.cols();
    if (corr.features.rows() != static_cast<Eigen::Index>(p) || corr.outcome.size() != static_cast<Eigen::Index>(p))
        throw Error(ErrorCode::DimensionMismatch, "correlation matrix does not match table");

    struct Pair {
        std::size_t i, j;
        double abs_rho;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            const double r = std::abs(corr.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            if (r >= redundant_threshold) pairs.push_back({i, j, r});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.abs_rho > b.abs_rho; });

    PruneResult out;
    std::vector<bool> dropped(p, false);
    auto ry = [&](std::size_t k) { return std::abs(corr.outcome(static_cast<Eigen::Index>(k))); };
    for (const auto& pr : pairs) {
        if (dropped[pr.i] || dropped[pr.j]) continue;
        std::size_t drop = ry(pr.i) < ry(pr.j) ? pr.i : (ry(pr.j) < ry(pr.i) ? pr.j : std::max(pr.i, pr.j));
        const std::size_t keep = drop == pr.i ? pr.j : pr.i;
        dropped[drop] = true;
        out.report.redundant.push_back({table.feature_names[keep], table.feature_names[drop],
                                        corr.features(static_cast<Eigen::Index>(pr.i), static_cast<Eigen::Index>(pr.j))});
    }
    for (std::size_t k = 0; k < p; ++k) {
        if (dropped[k]) continue;
        if (ry(k) < weak_threshold) {
            dropped[k] = true;
            out.report.weak.push_back({table.feature_names[k], corr.outcome(static_cast<Eigen::Index>(k))});
        }
    }
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < p; ++k)
        if (!dropped[k]) keep.push_back(k);
    if (keep.empty()) throw Error(ErrorCode::NothingLeft, "every feature was pruned; relax the thresholds");
    out.table = table.select_columns(keep);
    out.report.retained = out.table.feature_names;
    return out;
}

struct PreprocessOptions {
    double redundant_threshold = 0.95;
    double weak_threshold = 0.10;
};

struct PreprocessResult {
    MetadataTable normalized;   // standardized, pruned
    NormalizationParams params; // of the retained features, in raw units
    CorrelationMatrix correlation; // among retained features
    PruneReport report;
};

/// impute -> z-score -> Spearman correlations -> prune.
inline PreprocessResult preprocess(const MetadataTable& raw, const PreprocessOptions& opt = {}) {
    raw.validate();
    const auto imputed = impute_missing(raw);
    auto z = zscore(imputed);
    if (z.table.cols() == 0) throw Error(ErrorCode::NothingLeft, "every feature has zero variance");
    const auto corr = correlations(z.table);
    auto pruned = prune_features(z.table, corr, opt.redundant_threshold, opt.weak_threshold);

    PreprocessResult r;
    r.report = std::move(pruned.report);
    r.report.zero_variance = z.zero_variance;
    for (std::size_t j = 0; j < raw.cols(); ++j) {
        const auto count = static_cast<std::size_t>(raw.missing.col(static_cast<Eigen::Index>(j)).count());
        if (count > 0) r.report.imputed.emplace_back(raw.feature_names[j], count);
    }
    r.normalized = std::move(pruned.table);
    r.normalized.missing.setConstant(false);
    r.params = z.params.subset(r.normalized.feature_names);
    r.correlation = corr.subset(r.normalized.feature_names);
    return r;
}

} // namespace isa::preprocess

#endif // ISA_PREPROCESS_HPP
