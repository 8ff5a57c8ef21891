#ifndef ISA_PREDICTION_HPP
#define ISA_PREDICTION_HPP

#include "isa/classifiers.hpp"
#include "isa/common.hpp"
#include "isa/metadata.hpp"
#include "isa/preprocess.hpp"
#include "isa/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace isa::prediction {

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified, seeded split. Each class contributes round(fraction * n_c)
/// instances to the training side (at least one to each side).
inline Split split_train_test(std::span<const int> y, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidArgument, "split fraction must be in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] != 0 ? 1 : 0].push_back(i);
    Split s;
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 2)
            throw Error(ErrorCode::ClassTooSmall, std::string(c ? "Unsafe" : "Safe") + " class has " +
                                                      std::to_string(idx.size()) + " instance(s); a stratified split needs 2");
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        std::shuffle(idx.begin(), idx.end(), rng);
        auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
        s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

/// A classifier bound to named features, with the imputation medians and
/// standardization fitted on its training data.
struct TableModel {
    ml::TrainedModel model;
    std::vector<std::string> features;
    std::vector<double> medians;
    preprocess::NormalizationParams normalization;
};

namespace detail {

inline Matrix prepared(const MetadataTable& table, const std::vector<std::string>& features,
                       const std::vector<double>& medians, const preprocess::NormalizationParams& norm) {
    Matrix X(table.values.rows(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t k = 0; k < features.size(); ++k) {
        const auto j = static_cast<Eigen::Index>(table.require_column(features[k]));
        const auto kk = static_cast<Eigen::Index>(k);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double v = table.missing(i, j) ? medians[k] : table.values(i, j);
            X(i, kk) = (v - norm.mean[k]) / norm.stddev[k];
        }
    }
    return X;
}

} // namespace detail

inline TableModel train_on_table(const ml::ClassifierSpec& spec, const MetadataTable& table,
                                 const std::vector<std::string>& features) {
    TableModel tm;
    tm.features = features;
    tm.normalization.names = features;
    for (const auto& f : features) {
        const auto j = static_cast<Eigen::Index>(table.require_column(f));
        std::vector<double> seen;
        for (Eigen::Index i = 0; i < table.values.rows(); ++i)
            if (!table.missing(i, j)) seen.push_back(table.values(i, j));
        if (seen.empty()) throw Error(ErrorCode::AllMissing, "feature '" + f + "' has no observed training values");
        tm.medians.push_back(preprocess::median(seen));
        double mean = 0.0;
        for (Eigen::Index i = 0; i < table.values.rows(); ++i)
            mean += table.missing(i, j) ? tm.medians.back() : table.values(i, j);
        mean /= static_cast<double>(table.values.rows());
        double ss = 0.0;
        for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
            const double v = (table.missing(i, j) ? tm.medians.back() : table.values(i, j)) - mean;
            ss += v * v;
        }
        double sd = table.values.rows() > 1 ? std::sqrt(ss / static_cast<double>(table.values.rows() - 1)) : 0.0;
        if (!(sd > 0.0)) sd = 1.0; // constant in training data: centre only
        tm.normalization.mean.push_back(mean);
        tm.normalization.stddev.push_back(sd);
    }
    const Matrix X = detail::prepared(table, features, tm.medians, tm.normalization);
    tm.model = ml::train(spec, X, table.outcome_ints());
    return tm;
}

inline std::vector<int> predict_table(const TableModel& tm, const MetadataTable& table) {
    return tm.model.predict(detail::prepared(table, tm.features, tm.medians, tm.normalization));
}

inline nlohmann::json to_json(const TableModel& tm) {
    nlohmann::json j = ml::to_json(tm.model);
    j["features"] = tm.features;
    j["medians"] = tm.medians;
    j["normalization"] = {{"mean", tm.normalization.mean}, {"stddev", tm.normalization.stddev}};
    return j;
}

inline TableModel table_model_from_json(const nlohmann::json& j) {
    TableModel tm;
    tm.model = ml::model_from_json(j);
    try {
        tm.features = j.at("features").get<std::vector<std::string>>();
        tm.medians = j.at("medians").get<std::vector<double>>();
        tm.normalization.names = tm.features;
        tm.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        tm.normalization.stddev = j.at("normalization").at("stddev").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedJson, std::string("classifier document: ") + e.what());
    }
    if (tm.medians.size() != tm.features.size() || tm.normalization.mean.size() != tm.features.size() ||
        static_cast<Eigen::Index>(tm.features.size()) != tm.model.arity)
        throw Error(ErrorCode::MalformedJson, "classifier document: inconsistent feature arity");
    return tm;
}

// ---- ISA vs random feature comparison ---------------------------------------

struct ComparisonRow {
    ml::ClassifierKind kind = ml::ClassifierKind::RandomForest;
    std::size_t repetition = 0;
    std::vector<std::string> random_features;
    stats::EvalReport isa;
    stats::EvalReport random;
};

struct MetricSummary {
    ml::ClassifierKind kind = ml::ClassifierKind::RandomForest;
    std::string metric;
    double mean_isa = 0.0;
    double mean_random = 0.0;
    double p = 1.0;
    bool significant = false;
};

inline const std::vector<std::pair<std::string, double stats::EvalReport::*>>& compared_metrics() {
    static const std::vector<std::pair<std::string, double stats::EvalReport::*>> m{
        {"precision", &stats::EvalReport::precision},       {"recall", &stats::EvalReport::recall},
        {"f1", &stats::EvalReport::f1},                     {"macro_precision", &stats::EvalReport::macro_precision},
        {"macro_recall", &stats::EvalReport::macro_recall}, {"macro_f1", &stats::EvalReport::macro_f1}};
    return m;
}

struct ComparisonReport {
    std::vector<ComparisonRow> rows; // ordered by (kind, repetition)
    std::vector<MetricSummary> summaries;
    double alpha = 0.05;

    std::vector<const ComparisonRow*> rows_for(ml::ClassifierKind k) const {
        std::vector<const ComparisonRow*> out;
        for (const auto& r : rows)
            if (r.kind == k) out.push_back(&r);
        return out;
    }

    const MetricSummary& summary(ml::ClassifierKind k, std::string_view metric) const {
        for (const auto& s : summaries)
            if (s.kind == k && s.metric == metric) return s;
        throw Error(ErrorCode::InvalidArgument, "no summary for metric " + std::string(metric));
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "classifier,repetition,arm,precision,recall,f1,macro_precision,macro_recall,macro_f1,random_features\n";
        for (const auto& r : rows) {
            auto line = [&](const char* arm, const stats::EvalReport& e, const std::string& feats) {
                os << ml::to_string(r.kind) << ',' << r.repetition << ',' << arm << ',' << csv::format_number(e.precision)
                   << ',' << csv::format_number(e.recall) << ',' << csv::format_number(e.f1) << ','
                   << csv::format_number(e.macro_precision) << ',' << csv::format_number(e.macro_recall) << ','
                   << csv::format_number(e.macro_f1) << ',' << csv::quote(feats) << '\n';
            };
            std::string feats;
            for (std::size_t i = 0; i < r.random_features.size(); ++i) feats += (i ? ";" : "") + r.random_features[i];
            line("isa", r.isa, "");
            line("random", r.random, feats);
        }
        return os.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["alpha"] = alpha;
        j["repetitions"] = rows.empty() ? 0 : rows_for(rows.front().kind).size();
        nlohmann::json s = nlohmann::json::array();
        for (const auto& m : summaries)
            s.push_back({{"classifier", ml::to_string(m.kind)},
                         {"metric", m.metric},
                         {"mean_isa", m.mean_isa},
                         {"mean_random", m.mean_random},
                         {"p_value", m.p},
                         {"significant", m.significant}});
        j["summaries"] = std::move(s);
        return j;
    }
};

struct CompareOptions {
    std::size_t repetitions = 10;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    ml::ClassifierSpec base;
    std::vector<ml::ClassifierKind> kinds{ml::all_kinds.begin(), ml::all_kinds.end()};
    double alpha = 0.05;
};

/// Trains every classifier kind on the selected features and on an equally
/// sized random draw from `pool`, once per repetition, and tests the paired
/// metrics with Wilcoxon signed-rank. With `test_table` the model is trained
/// on all of `table` and evaluated on `test_table`; otherwise each repetition
/// draws a fresh stratified split of `table`.
inline ComparisonReport compare_isa_vs_random(const MetadataTable& table, const std::vector<std::string>& selected,
                                              const std::vector<std::string>& pool, const CompareOptions& opt,
                                              const MetadataTable* test_table = nullptr) {
    if (opt.repetitions < 5) throw Error(ErrorCode::InvalidArgument, "at least 5 repetitions are required");
    if (pool.size() < selected.size())
        throw Error(ErrorCode::PoolTooSmall, "random-feature pool has " + std::to_string(pool.size()) +
                                                 " features, fewer than the " + std::to_string(selected.size()) + " selected");
    for (const auto& f : selected) table.require_column(f);
    for (const auto& f : pool) table.require_column(f);

    const auto y = table.outcome_ints();
    std::vector<Split> splits(opt.repetitions);
    std::vector<std::vector<std::string>> random_sets(opt.repetitions);
    for (std::size_t r = 0; r < opt.repetitions; ++r) {
        if (!test_table) splits[r] = split_train_test(y, opt.train_fraction, derive_seed(opt.seed, 1000 + r));
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(derive_seed(opt.seed, 2000 + r));
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(selected.size());
        std::sort(order.begin(), order.end());
        for (auto i : order) random_sets[r].push_back(pool[i]);
    }

    const std::size_t nk = opt.kinds.size();
    const std::size_t tasks = nk * opt.repetitions * 2;
    std::vector<stats::EvalReport> results(tasks);
    parallel_for(tasks, [&](std::size_t t) {
        const std::size_t arm = t % 2;
        const std::size_t r = (t / 2) % opt.repetitions;
        const std::size_t k = t / (2 * opt.repetitions);
        ml::ClassifierSpec spec = opt.base;
        spec.kind = opt.kinds[k];
        spec.seed = derive_seed(opt.seed, 3000 + r);
        const auto& feats = arm == 0 ? selected : random_sets[r];
        if (test_table) {
            const auto model = train_on_table(spec, table, feats);
            const auto pred = predict_table(model, *test_table);
            const auto truth = test_table->outcome_ints();
            results[t] = stats::evaluate(pred, truth);
        } else {
            const auto train = table.select_rows(splits[r].train);
            const auto test = table.select_rows(splits[r].test);
            const auto model = train_on_table(spec, train, feats);
            const auto pred = predict_table(model, test);
            const auto truth = test.outcome_ints();
            results[t] = stats::evaluate(pred, truth);
        }
    });

    ComparisonReport rep;
    rep.alpha = opt.alpha;
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t r = 0; r < opt.repetitions; ++r) {
            const std::size_t base = (k * opt.repetitions + r) * 2;
            rep.rows.push_back({opt.kinds[k], r, random_sets[r], results[base], results[base + 1]});
        }
        for (const auto& [name, field] : compared_metrics()) {
            std::vector<double> a, b;
            for (std::size_t r = 0; r < opt.repetitions; ++r) {
                const std::size_t base = (k * opt.repetitions + r) * 2;
                a.push_back(results[base].*field);
                b.push_back(results[base + 1].*field);
            }
            MetricSummary s;
            s.kind = opt.kinds[k];
            s.metric = name;
            s.mean_isa = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
            s.mean_random = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
            s.p = stats::wilcoxon_signed_rank(a, b).p;
            s.significant = s.p <= opt.alpha;
            rep.summaries.push_back(s);
        }
    }
    return rep;
}

} // namespace isa::prediction

#endif // ISA_PREDICTION_HPP
