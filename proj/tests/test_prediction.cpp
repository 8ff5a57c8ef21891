#include "isa/prediction.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace isa;
using namespace isa::prediction;
using testing_support::planted_selection_table;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Io;
}

std::vector<std::string> fs(std::initializer_list<const char*> l) { return {l.begin(), l.end()}; }

} // namespace

TEST(Split, StratifiedCounts) {
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = i % 2;
    const auto s = split_train_test(y, 0.8, 4);
    ASSERT_EQ(s.train.size(), 80u);
    ASSERT_EQ(s.test.size(), 20u);
    int train_pos = 0, test_pos = 0;
    for (auto i : s.train) train_pos += y[i];
    for (auto i : s.test) test_pos += y[i];
    EXPECT_EQ(train_pos, 40);
    EXPECT_EQ(test_pos, 10);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    EXPECT_EQ(all.size(), 100u);
}

TEST(Split, SeededAndVarying) {
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = i < 20;
    const auto a = split_train_test(y, 0.75, 9), b = split_train_test(y, 0.75, 9), c = split_train_test(y, 0.75, 10);
    EXPECT_EQ(a.train, b.train);
    EXPECT_NE(a.train, c.train);
}

TEST(Split, ClassTooSmall) {
    std::vector<int> y(10, 0);
    y[3] = 1;
    EXPECT_EQ(code_of([&] { split_train_test(y, 0.8, 0); }), ErrorCode::ClassTooSmall);
    EXPECT_EQ(code_of([&] { split_train_test(y, 1.0, 0); }), ErrorCode::InvalidArgument);
}

TEST(TableModel, ImputesWithTrainingMedians) {
    auto t = planted_selection_table(200, 3);
    const auto feats = fs({"f0", "f3"});
    ml::ClassifierSpec spec;
    spec.kind = ml::ClassifierKind::KNN;
    const auto m = train_on_table(spec, t, feats);
    ASSERT_EQ(m.medians.size(), 2u);
    auto holed = t;
    holed.missing(5, 0) = true;
    holed.values(5, 0) = 0.0;
    const auto pred = predict_table(m, holed);
    EXPECT_EQ(pred.size(), 200u);
    auto filled = t;
    filled.values(5, 0) = m.medians[0];
    EXPECT_EQ(pred, predict_table(m, filled));
}

TEST(TableModel, JsonRoundTripPredictsIdentically) {
    const auto t = planted_selection_table(300, 5);
    for (auto kind : ml::all_kinds) {
        ml::ClassifierSpec spec;
        spec.kind = kind;
        spec.seed = 11;
        const auto m = train_on_table(spec, t, fs({"f0", "f3", "f6"}));
        const auto back = table_model_from_json(nlohmann::json::parse(to_json(m).dump()));
        EXPECT_EQ(back.features, m.features);
        EXPECT_EQ(predict_table(back, t), predict_table(m, t)) << ml::to_string(kind);
    }
}

TEST(TableModel, UnknownFeature) {
    const auto t = planted_selection_table(50, 1);
    EXPECT_EQ(code_of([&] { train_on_table({}, t, fs({"nope"})); }), ErrorCode::UnknownFeature);
}

TEST(Compare, ShapeAndSummaries) {
    const auto t = planted_selection_table(200, 8);
    CompareOptions opt;
    opt.repetitions = 5;
    opt.kinds = {ml::ClassifierKind::NaiveBayes, ml::ClassifierKind::KNN};
    const auto rep = compare_isa_vs_random(t, fs({"f0", "f3"}), fs({"f6", "f7", "f8"}), opt);
    EXPECT_EQ(rep.rows.size(), 10u);
    EXPECT_EQ(rep.summaries.size(), 2u * compared_metrics().size());
    for (const auto& r : rep.rows) {
        ASSERT_EQ(r.random_features.size(), 2u);
        for (const auto& f : r.random_features) EXPECT_TRUE(f == "f6" || f == "f7" || f == "f8");
    }
    const auto csv_text = rep.to_csv();
    EXPECT_EQ(std::count(csv_text.begin(), csv_text.end(), '\n'), 21);
    EXPECT_EQ(rep.to_json()["repetitions"], 5);
}

TEST(Compare, IdenticalArmsAreNotSignificant) {
    const auto t = planted_selection_table(200, 2);
    CompareOptions opt;
    opt.repetitions = 6;
    opt.kinds = {ml::ClassifierKind::DecisionTree, ml::ClassifierKind::NaiveBayes};
    const auto sel = fs({"f0", "f3"});
    const auto rep = compare_isa_vs_random(t, sel, sel, opt);
    for (const auto& s : rep.summaries) {
        EXPECT_EQ(s.p, 1.0) << s.metric;
        EXPECT_FALSE(s.significant);
        EXPECT_EQ(s.mean_isa, s.mean_random);
    }
}

TEST(Compare, PlantedFeaturesBeatNoise) {
    const auto t = planted_selection_table(400, 12);
    CompareOptions opt;
    opt.kinds = {ml::ClassifierKind::NaiveBayes, ml::ClassifierKind::KNN, ml::ClassifierKind::DecisionTree};
    const auto rep = compare_isa_vs_random(t, fs({"f0", "f3"}), fs({"f6", "f7", "f8"}), opt);
    for (auto k : opt.kinds) {
        const auto& s = rep.summary(k, "macro_f1");
        EXPECT_GT(s.mean_isa, s.mean_random + 0.2) << ml::to_string(k);
        EXPECT_TRUE(s.significant) << ml::to_string(k);
        EXPECT_NEAR(s.p, 0.001953125, 1e-12);
    }
}

TEST(Compare, SeparateTestTable) {
    const auto train = planted_selection_table(200, 20), test = planted_selection_table(100, 21);
    CompareOptions opt;
    opt.repetitions = 5;
    opt.kinds = {ml::ClassifierKind::NaiveBayes};
    const auto rep = compare_isa_vs_random(train, fs({"f0", "f3"}), fs({"f6", "f7", "f8"}), opt, &test);
    // the ISA arm sees the same data every repetition
    for (const auto* r : rep.rows_for(ml::ClassifierKind::NaiveBayes)) EXPECT_EQ(r->isa.macro_f1, rep.rows.front().isa.macro_f1);
}

TEST(Compare, Errors) {
    const auto t = planted_selection_table(100, 4);
    CompareOptions opt;
    EXPECT_EQ(code_of([&] { compare_isa_vs_random(t, fs({"f0", "f3"}), fs({"f6"}), opt); }), ErrorCode::PoolTooSmall);
    opt.repetitions = 4;
    EXPECT_EQ(code_of([&] { compare_isa_vs_random(t, fs({"f0", "f3"}), fs({"f6", "f7"}), opt); }), ErrorCode::InvalidArgument);
    opt.repetitions = 5;
    EXPECT_EQ(code_of([&] { compare_isa_vs_random(t, fs({"f0", "zz"}), fs({"f6", "f7"}), opt); }), ErrorCode::UnknownFeature);
}
