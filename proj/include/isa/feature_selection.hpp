#ifndef ISA_FEATURE_SELECTION_HPP
#define ISA_FEATURE_SELECTION_HPP

#include "isa/classifiers.hpp"
#include "isa/common.hpp"
#include "isa/metadata.hpp"
#include "isa/preprocess.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace isa::selection {

/// Clusters of features under the dissimilarity 1 - |rho|.
struct FeatureClustering {
    std::vector<std::string> names;
    std::size_t k = 0;
    std::vector<std::size_t> assignment; // feature index -> cluster id
    std::vector<std::size_t> medoids;    // cluster id -> feature index
    std::vector<std::pair<std::size_t, double>> silhouettes; // (k, mean silhouette) per candidate

    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> m(k);
        for (std::size_t i = 0; i < assignment.size(); ++i) m[assignment[i]].push_back(i);
        return m;
    }
};

inline Matrix dissimilarity(const Matrix& rho) { return (1.0 - rho.array().abs()).matrix(); }

/// Mean silhouette width. Points in singleton clusters score 0.
inline double silhouette(const std::vector<std::size_t>& assignment, const Matrix& d) {
    const std::size_t n = assignment.size();
    if (n == 0) return 0.0;
    const std::size_t k = *std::max_element(assignment.begin(), assignment.end()) + 1;
    std::vector<std::size_t> size(k, 0);
    for (auto c : assignment) ++size[c];
    double total = 0.0;
    std::vector<double> sum(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (size[assignment[i]] <= 1) continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[assignment[j]] += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double a = sum[assignment[i]] / static_cast<double>(size[assignment[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (c != assignment[i] && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
        const double m = std::max(a, b);
        if (m > 0.0 && std::isfinite(b)) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

namespace detail {

struct PamResult {
    std::vector<std::size_t> medoids;
    std::vector<std::size_t> assignment;
    double cost = 0.0;
};

inline double assign(const Matrix& d, const std::vector<std::size_t>& medoids, std::vector<std::size_t>* out) {
    const auto n = static_cast<std::size_t>(d.rows());
    double cost = 0.0;
    if (out) out->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[c]));
            if (v < bd) {
                bd = v;
                best = c;
            }
        }
        cost += bd;
        if (out) (*out)[i] = best;
    }
    return cost;
}

// Swap descent from a random start: apply the best improving medoid swap until none improves.
inline PamResult pam_once(const Matrix& d, std::size_t k, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(d.rows());
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::size_t> med(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(med.begin(), med.end());
    double cost = assign(d, med, nullptr);
    for (;;) {
        double best_cost = cost;
        std::size_t bm = 0, bo = 0;
        bool found = false;
        for (std::size_t m = 0; m < k; ++m) {
            for (std::size_t o = 0; o < n; ++o) {
                if (std::find(med.begin(), med.end(), o) != med.end()) continue;
                auto trial = med;
                trial[m] = o;
                const double c = assign(d, trial, nullptr);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    bm = m;
                    bo = o;
                    found = true;
                }
            }
        }
        if (!found) break;
        med[bm] = bo;
        std::sort(med.begin(), med.end());
        cost = best_cost;
    }
    PamResult r;
    r.cost = assign(d, med, &r.assignment);
    r.medoids = med;
    return r;
}

// Relabel clusters in order of their smallest member index.
inline void canonicalize(PamResult& r) {
    const std::size_t k = r.medoids.size();
    std::vector<std::size_t> first(k, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < r.assignment.size(); ++i)
        first[r.assignment[i]] = std::min(first[r.assignment[i]], i);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
    std::vector<std::size_t> relabel(k);
    for (std::size_t c = 0; c < k; ++c) relabel[order[c]] = c;
    std::vector<std::size_t> med(k);
    for (std::size_t c = 0; c < k; ++c) med[relabel[c]] = r.medoids[c];
    for (auto& a : r.assignment) a = relabel[a];
    r.medoids = med;
}

} // namespace detail

inline constexpr int pam_restarts = 10;

/// Default candidate range for k: [2, min(15, p - 1)].
inline std::pair<std::size_t, std::size_t> default_k_range(std::size_t p) { return {2, std::min<std::size_t>(15, p - 1)}; }

inline FeatureClustering cluster_features(const preprocess::CorrelationMatrix& corr, std::size_t k_min,
                                          std::size_t k_max, std::uint64_t seed) {
    const auto p = static_cast<std::size_t>(corr.features.rows());
    if (p < 3) throw Error(ErrorCode::InvalidArgument, "clustering needs at least 3 features, got " + std::to_string(p));
    if (k_min < 2 || k_max > p - 1 || k_min > k_max)
        throw Error(ErrorCode::InvalidArgument, "k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                                                    "] must lie within [2, " + std::to_string(p - 1) + "]");
    const Matrix d = dissimilarity(corr.features);
    if (d.maxCoeff() <= 0.0) throw Error(ErrorCode::AllIdentical, "all features are perfectly correlated");

    FeatureClustering best;
    best.names = corr.names;
    double best_s = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_min; k <= k_max; ++k) {
        detail::PamResult chosen;
        bool have = false;
        for (int r = 0; r < pam_restarts; ++r) {
            std::mt19937_64 rng(derive_seed(seed, std::vector<std::uint64_t>{k, static_cast<std::uint64_t>(r)}));
            auto res = detail::pam_once(d, k, rng);
            if (!have || res.cost < chosen.cost - 1e-12) {
                chosen = std::move(res);
                have = true;
            }
        }
        detail::canonicalize(chosen);
        const double s = silhouette(chosen.assignment, d);
        best.silhouettes.emplace_back(k, s);
        if (s > best_s + 1e-12) {
            best_s = s;
            best.k = k;
            best.assignment = chosen.assignment;
            best.medoids = chosen.medoids;
        }
    }
    return best;
}

// ---- PCA --------------------------------------------------------------------

struct Pca2 {
    Matrix coords;   // instances x 2
    Matrix loadings; // m x 2
    double explained[2] = {0.0, 0.0};
    bool rank_deficient = false; // second component carries no variance
};

/// Flips v so its largest-magnitude entry is positive (first such entry on ties).
inline void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    if (v(arg) < 0.0) v = -v;
}

inline Pca2 pca2(const Matrix& X) {
    if (X.cols() < 2 || X.rows() < 2)
        throw Error(ErrorCode::InvalidArgument, "pca2 needs at least 2 rows and 2 columns");
    const Matrix centered = X.rowwise() - X.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const auto m = X.cols();
    Pca2 r;
    r.loadings.resize(m, 2);
    for (int c = 0; c < 2; ++c) {
        Vector v = es.eigenvectors().col(m - 1 - c);
        fix_sign(v);
        r.loadings.col(c) = v;
        r.explained[c] = std::max(0.0, es.eigenvalues()(m - 1 - c));
    }
    r.rank_deficient = r.explained[1] <= 1e-12 * std::max(1.0, r.explained[0]);
    r.coords = X * r.loadings;
    return r;
}

// ---- combination scoring ----------------------------------------------------

struct CombinationScore {
    std::vector<std::size_t> tuple; // sorted feature indices
    double error = 1.0;
    Matrix loadings;
};

inline constexpr int cv_folds = 5;

/// Scoring data in canonical instance order (sorted by id) with fixed folds.
struct ScoringData {
    Matrix X;
    std::vector<int> y;
    std::vector<int> fold;
    std::vector<std::string> names;
};

inline ScoringData scoring_data(const MetadataTable& table, std::uint64_t seed) {
    std::vector<std::size_t> order(table.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return table.instance_ids[a] < table.instance_ids[b]; });
    ScoringData s;
    s.names = table.feature_names;
    s.X.resize(static_cast<Eigen::Index>(order.size()), table.values.cols());
    s.y.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        s.X.row(static_cast<Eigen::Index>(i)) = table.values.row(static_cast<Eigen::Index>(order[i]));
        s.y[i] = to_int(table.outcomes[order[i]]);
    }
    if (!s.X.allFinite()) throw Error(ErrorCode::NonFiniteInput, "feature selection needs a complete, finite table");
    std::vector<std::size_t> cls[2];
    for (std::size_t i = 0; i < s.y.size(); ++i) cls[s.y[i]].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (cls[c].size() < static_cast<std::size_t>(cv_folds))
            throw Error(ErrorCode::TooFewPerClass, std::string(c ? "Unsafe" : "Safe") + " class has " +
                                                       std::to_string(cls[c].size()) + " instances; " +
                                                       std::to_string(cv_folds) + "-fold stratification needs " +
                                                       std::to_string(cv_folds));
    s.fold.assign(s.y.size(), 0);
    std::mt19937_64 rng(derive_seed(seed, 0xf01dULL));
    for (int c = 0; c < 2; ++c) {
        std::shuffle(cls[c].begin(), cls[c].end(), rng);
        for (std::size_t i = 0; i < cls[c].size(); ++i) s.fold[cls[c][i]] = static_cast<int>(i % cv_folds);
    }
    return s;
}

inline ml::ForestParams scoring_forest() { return ml::ForestParams{50, 1, true, 2, 0}; }

inline CombinationScore evaluate_combination(const std::vector<std::size_t>& tuple, const ScoringData& data,
                                             std::uint64_t seed) {
    CombinationScore cs;
    cs.tuple = tuple;
    std::sort(cs.tuple.begin(), cs.tuple.end());
    Matrix sub(data.X.rows(), static_cast<Eigen::Index>(cs.tuple.size()));
    for (std::size_t c = 0; c < cs.tuple.size(); ++c) {
        if (cs.tuple[c] >= static_cast<std::size_t>(data.X.cols()))
            throw Error(ErrorCode::InvalidArgument, "feature index out of range");
        sub.col(static_cast<Eigen::Index>(c)) = data.X.col(static_cast<Eigen::Index>(cs.tuple[c]));
    }
    Matrix coords;
    if (sub.cols() >= 2) {
        auto pca = pca2(sub);
        coords = pca.coords;
        cs.loadings = pca.loadings;
    } else {
        coords = sub;
        cs.loadings = Matrix::Ones(1, 1);
    }
    const std::uint64_t combo_seed = derive_seed(seed, cs.tuple);
    double err = 0.0;
    for (int f = 0; f < cv_folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < data.y.size(); ++i) (data.fold[i] == f ? te : tr).push_back(i);
        Matrix Xtr(static_cast<Eigen::Index>(tr.size()), coords.cols());
        std::vector<int> ytr(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            Xtr.row(static_cast<Eigen::Index>(i)) = coords.row(static_cast<Eigen::Index>(tr[i]));
            ytr[i] = data.y[tr[i]];
        }
        const auto forest = ml::train_forest(Xtr, ytr, scoring_forest(), derive_seed(combo_seed, static_cast<std::uint64_t>(f)));
        std::size_t wrong = 0;
        for (auto i : te) {
            const int pred = forest.predict_proba(coords.row(static_cast<Eigen::Index>(i))) > 0.5 ? 1 : 0;
            wrong += pred != data.y[i];
        }
        err += static_cast<double>(wrong) / static_cast<double>(te.size());
    }
    cs.error = err / cv_folds;
    return cs;
}

inline CombinationScore evaluate_combination(const std::vector<std::size_t>& tuple, const MetadataTable& table,
                                             std::uint64_t seed) {
    return evaluate_combination(tuple, scoring_data(table, seed), seed);
}

// ---- combination search -----------------------------------------------------

struct SelectedFeatures {
    std::vector<std::string> names; // in table column order
    CombinationScore best;
    std::vector<CombinationScore> evaluated; // lexicographic tuple order
    double total_combinations = 0.0;
    bool sampled = false;

    std::string to_csv(const std::vector<std::string>& feature_names) const {
        std::ostringstream os;
        os << "features,error\n";
        for (const auto& c : evaluated) {
            std::string f;
            for (std::size_t i = 0; i < c.tuple.size(); ++i) f += (i ? ";" : "") + feature_names[c.tuple[i]];
            os << csv::quote(f) << ',' << csv::format_number(c.error) << '\n';
        }
        return os.str();
    }
};

inline constexpr std::size_t default_budget = 20000;

/// Scores one-feature-per-cluster combinations and keeps the lowest-error one
/// (ties: lexicographically smallest tuple). Products above `budget` are
/// sampled uniformly without replacement.
inline SelectedFeatures select_features(const MetadataTable& table, const FeatureClustering& clustering,
                                        std::size_t budget, std::uint64_t seed) {
    if (budget < 1) throw Error(ErrorCode::InvalidArgument, "combination budget must be at least 1");
    // clusters as lists of table column indices
    std::vector<std::vector<std::size_t>> clusters(clustering.k);
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i)
        clusters[clustering.assignment[i]].push_back(table.require_column(clustering.names[i]));
    for (auto& c : clusters) {
        if (c.empty()) throw Error(ErrorCode::InvalidArgument, "clustering has an empty cluster");
        std::sort(c.begin(), c.end());
    }
    double product = 1.0;
    for (const auto& c : clusters) product *= static_cast<double>(c.size());

    SelectedFeatures out;
    out.total_combinations = product;
    std::vector<std::vector<std::size_t>> tuples;
    if (product <= static_cast<double>(budget)) {
        std::vector<std::size_t> digit(clusters.size(), 0);
        for (;;) {
            std::vector<std::size_t> t;
            for (std::size_t c = 0; c < clusters.size(); ++c) t.push_back(clusters[c][digit[c]]);
            tuples.push_back(std::move(t));
            std::size_t c = clusters.size();
            while (c > 0 && ++digit[c - 1] == clusters[c - 1].size()) digit[--c] = 0;
            if (c == 0) break;
        }
    } else {
        out.sampled = true;
        std::mt19937_64 rng(derive_seed(seed, 0x5a3b1eULL));
        std::set<std::vector<std::size_t>> seen;
        while (seen.size() < budget) {
            std::vector<std::size_t> t;
            for (const auto& c : clusters) {
                std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
                t.push_back(c[pick(rng)]);
            }
            seen.insert(std::move(t));
        }
        tuples.assign(seen.begin(), seen.end());
    }
    for (auto& t : tuples) std::sort(t.begin(), t.end());
    std::sort(tuples.begin(), tuples.end());

    const ScoringData data = scoring_data(table, seed);
    out.evaluated.resize(tuples.size());
    parallel_for(tuples.size(), [&](std::size_t i) { out.evaluated[i] = evaluate_combination(tuples[i], data, seed); });

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.evaluated.size(); ++i)
        if (out.evaluated[i].error < out.evaluated[best].error) best = i;
    out.best = out.evaluated[best];
    for (auto j : out.best.tuple) out.names.push_back(table.feature_names[j]);
    return out;
}

} // namespace isa::selection

#endif // ISA_FEATURE_SELECTION_HPP
