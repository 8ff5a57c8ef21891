#include "isa/classifiers.hpp"
#include "isa/stats.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace isa;
using namespace isa::ml;

namespace {

ClassifierSpec spec_of(ClassifierKind k, std::uint64_t seed = 1) {
    ClassifierSpec s;
    s.kind = k;
    s.seed = seed;
    return s;
}

int brute_knn(const Matrix& X, const std::vector<int>& y, const Eigen::RowVectorXd& q, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) s += (X(i, j) - q(j)) * (X(i, j) - q(j));
        d.push_back({std::sqrt(s), static_cast<std::size_t>(i)});
    }
    std::sort(d.begin(), d.end());
    double votes[2] = {0, 0}, dist[2] = {0, 0};
    for (std::size_t i = 0; i < k; ++i) {
        votes[y[d[i].second]] += 1;
        dist[y[d[i].second]] += d[i].first;
    }
    if (votes[0] != votes[1]) return votes[1] > votes[0];
    return dist[1] / votes[1] < dist[0] / votes[0];
}

} // namespace

TEST(Classifiers, KindNamesRoundTrip) {
    for (auto k : all_kinds) EXPECT_EQ(kind_from_string(to_string(k)), k);
    EXPECT_THROW(kind_from_string("SVM"), Error);
}

TEST(Classifiers, SeparableBlobsAreLearnedByEveryKind) {
    const auto [X, y] = testing_support::two_gaussians(200, 2, 12.0, 4);
    for (auto k : all_kinds) {
        const auto m = train(spec_of(k), X, y);
        const auto pred = m.predict(X);
        const auto r = stats::evaluate(pred, y);
        EXPECT_GE(r.accuracy, 0.99) << to_string(k);
    }
}

TEST(Classifiers, WellSeparatedGaussiansReachHighF1) {
    const auto [X, y] = testing_support::two_gaussians(400, 2, 6.0, 8);
    const auto [Xt, yt] = testing_support::two_gaussians(400, 2, 6.0, 9);
    for (auto k : all_kinds) {
        const auto m = train(spec_of(k), X, y);
        EXPECT_GE(stats::evaluate(m.predict(Xt), yt).f1, 0.9) << to_string(k);
    }
}

TEST(Classifiers, NaiveBayesParametersMatchHandArithmetic) {
    Matrix X(4, 2);
    X << 0, 1, 2, 3, 4, 0, 8, 2;
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = train(spec_of(ClassifierKind::NaiveBayes), X, y);
    const auto& nb = std::get<NaiveBayesModel>(m.params);
    // column variances (population): col0 mean 3.5 -> 8.75, col1 mean 1.5 -> 1.25
    const double eps = 1e-9 * 8.75;
    EXPECT_DOUBLE_EQ(nb.prior[0], 0.5);
    EXPECT_DOUBLE_EQ(nb.mean[0](0), 1.0);
    EXPECT_DOUBLE_EQ(nb.mean[0](1), 2.0);
    EXPECT_DOUBLE_EQ(nb.mean[1](0), 6.0);
    EXPECT_DOUBLE_EQ(nb.mean[1](1), 1.0);
    EXPECT_NEAR(nb.var[0](0), 1.0 + eps, 1e-15);
    EXPECT_NEAR(nb.var[0](1), 1.0 + eps, 1e-15);
    EXPECT_NEAR(nb.var[1](0), 4.0 + eps, 1e-15);
    EXPECT_NEAR(nb.var[1](1), 1.0 + eps, 1e-15);
}

TEST(Classifiers, NaiveBayesBoundaryBetweenUnitGaussians) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    const int n = 4000;
    Matrix X(n, 1);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
        X(i, 0) = g(rng) + (i % 2 ? 4.0 : 0.0);
    }
    const auto m = train(spec_of(ClassifierKind::NaiveBayes), X, y);
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        Eigen::RowVectorXd q(1);
        q << mid;
        (m.score(q) > 0.5 ? hi : lo) = mid;
    }
    EXPECT_NEAR(lo, 2.0, 0.1);
}

TEST(Classifiers, KnnSingleNeighbourReturnsTrainingLabel) {
    const auto [X, y] = testing_support::two_gaussians(30, 3, 1.0, 2);
    ClassifierSpec s = spec_of(ClassifierKind::KNN);
    s.knn.k = 1;
    const auto m = train(s, X, y);
    EXPECT_EQ(m.predict(X), y);
}

TEST(Classifiers, KnnMatchesExhaustiveReference) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    Matrix X(20, 2);
    std::vector<int> y(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = u(rng);
        y[static_cast<std::size_t>(i)] = (X(i, 0) + 0.3 * X(i, 1) > 6.0) ? 1 : 0;
    }
    const auto m = train(spec_of(ClassifierKind::KNN), X, y);
    for (int q = 0; q < 200; ++q) {
        Eigen::RowVectorXd p(2);
        p << u(rng), u(rng);
        EXPECT_EQ(static_cast<int>(m.score(p)), brute_knn(X, y, p, 5));
    }
}

TEST(Classifiers, KnnEvenTieFallsToCloserClassThenSafe) {
    Matrix X(2, 1);
    X << 0.0, 3.0;
    const std::vector<int> y{0, 1};
    ClassifierSpec s = spec_of(ClassifierKind::KNN);
    s.knn.k = 2;
    const auto m = train(s, X, y);
    Eigen::RowVectorXd q(1);
    q << 2.0;
    EXPECT_EQ(m.score(q), 1);
    q << 1.5;
    EXPECT_EQ(m.score(q), 0);
}

TEST(Classifiers, SingleUnbaggedForestEqualsDecisionTree) {
    const auto [X, y] = testing_support::two_gaussians(150, 4, 1.5, 17);
    ClassifierSpec rf = spec_of(ClassifierKind::RandomForest, 5);
    rf.forest = ForestParams{1, static_cast<int>(X.cols()), false, 2, 0};
    const auto a = train(rf, X, y);
    const auto b = train(spec_of(ClassifierKind::DecisionTree, 5), X, y);
    const auto [P, unused] = testing_support::two_gaussians(300, 4, 1.5, 18);
    EXPECT_EQ(a.predict(P), b.predict(P));
    const auto& ta = std::get<ForestModel>(a.params).trees.at(0).nodes;
    const auto& tb = std::get<ForestModel>(b.params).trees.at(0).nodes;
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
        EXPECT_EQ(ta[i].feature, tb[i].feature);
        EXPECT_EQ(ta[i].threshold, tb[i].threshold);
    }
}

TEST(Classifiers, TrainingIsDeterministic) {
    const auto [X, y] = testing_support::two_gaussians(120, 3, 1.0, 31);
    const auto [P, unused] = testing_support::two_gaussians(100, 3, 1.0, 32);
    for (auto k : all_kinds) {
        const auto a = train(spec_of(k, 77), X, y);
        const auto b = train(spec_of(k, 77), X, y);
        EXPECT_EQ(a.predict(P), b.predict(P)) << to_string(k);
    }
}

TEST(Classifiers, JsonRoundTripPreservesScores) {
    const auto [X, y] = testing_support::two_gaussians(80, 3, 1.5, 41);
    for (auto k : all_kinds) {
        const auto m = train(spec_of(k, 3), X, y);
        const auto back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
        EXPECT_EQ(back.kind, k);
        for (Eigen::Index i = 0; i < X.rows(); ++i) EXPECT_EQ(back.score(X.row(i)), m.score(X.row(i))) << to_string(k);
    }
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"kind": "RF"})")), Error);
}

TEST(Classifiers, InputErrors) {
    Matrix X(4, 1);
    X << 1, 2, 3, 4;
    try {
        train(spec_of(ClassifierKind::RandomForest), X, {1, 1, 1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OneClass);
    }
    const auto m = train(spec_of(ClassifierKind::NaiveBayes), X, {0, 0, 1, 1});
    Matrix bad(1, 1);
    bad << std::numeric_limits<double>::quiet_NaN();
    try {
        m.predict(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
    }
    EXPECT_THROW(m.predict(Matrix::Zero(1, 2)), Error);
}
