#ifndef ISA_CLASSIFIERS_HPP
#define ISA_CLASSIFIERS_HPP

#include "isa/common.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace isa::ml {

enum class ClassifierKind { RandomForest, DecisionTree, KNN, MLP, NaiveBayes };

inline constexpr std::array<ClassifierKind, 5> all_kinds{ClassifierKind::RandomForest, ClassifierKind::DecisionTree,
                                                         ClassifierKind::KNN, ClassifierKind::MLP,
                                                         ClassifierKind::NaiveBayes};

inline std::string to_string(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::RandomForest: return "RF";
    case ClassifierKind::DecisionTree: return "DT";
    case ClassifierKind::KNN: return "KNN";
    case ClassifierKind::MLP: return "MLP";
    case ClassifierKind::NaiveBayes: return "NB";
    }
    return "?";
}

inline ClassifierKind kind_from_string(std::string_view s) {
    for (auto k : all_kinds)
        if (to_string(k) == s) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown classifier kind '" + std::string(s) + "'");
}

struct ForestParams {
    int trees = 100;
    int max_features = 0; // 0 => floor(sqrt(p)), at least 1
    bool bootstrap = true;
    int min_samples_split = 2;
    int max_depth = 0; // 0 => unlimited
};

struct KnnParams {
    int k = 5;
};

struct MlpParams {
    int hidden = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2 = 1e-4;
    int max_epochs = 200;
    int batch = 32;
    double tol = 1e-4;
    int patience = 10;
};

struct NaiveBayesParams {
    double var_smoothing = 1e-9;
};

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::RandomForest;
    ForestParams forest;
    ForestParams tree{1, -1, false, 2, 0}; // decision tree: all features, no bootstrap
    KnnParams knn;
    MlpParams mlp;
    NaiveBayesParams nb;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1 => leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // fraction of Unsafe training samples reaching the node
};

struct Tree {
    std::vector<TreeNode> nodes;

    template <class Row>
    double predict_proba(const Row& x) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(n)];
            n = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
    }
};

namespace detail {

struct SplitScratch {
    std::vector<std::pair<double, int>> buf;
    std::vector<int> features;
};

/// Grows one CART tree with Gini impurity over `idx` (indices may repeat for
/// bootstrap samples). max_features < 0 evaluates every feature.
inline Tree grow_tree(const Matrix& X, const std::vector<int>& y, std::vector<std::size_t> idx,
                      const ForestParams& params, std::mt19937_64& rng) {
    const int p = static_cast<int>(X.cols());
    const int mtry = params.max_features < 0 ? p
                     : params.max_features == 0
                         ? std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))))
                         : std::min(p, params.max_features);
    Tree tree;
    SplitScratch s;
    s.features.resize(static_cast<std::size_t>(p));

    struct Task {
        int node;
        std::size_t begin, end;
        int depth;
    };
    std::vector<Task> stack;
    tree.nodes.push_back({});
    stack.push_back({0, 0, idx.size(), 0});
    while (!stack.empty()) {
        const Task t = stack.back();
        stack.pop_back();
        const std::size_t n = t.end - t.begin;
        std::size_t pos = 0;
        for (std::size_t i = t.begin; i < t.end; ++i) pos += static_cast<std::size_t>(y[idx[i]]);
        tree.nodes[static_cast<std::size_t>(t.node)].value = static_cast<double>(pos) / static_cast<double>(n);
        const bool pure = pos == 0 || pos == n;
        if (pure || n < static_cast<std::size_t>(params.min_samples_split) ||
            (params.max_depth > 0 && t.depth >= params.max_depth))
            continue;

        // Candidate features: all in index order, or a random draw that keeps
        // going past features that are constant within the node.
        std::iota(s.features.begin(), s.features.end(), 0);
        const bool sample = mtry < p;
        int evaluated = 0;
        int best_f = -1;
        double best_thr = 0.0, best_imp = std::numeric_limits<double>::infinity();
        for (int c = 0; c < p && evaluated < mtry; ++c) {
            if (sample) {
                std::uniform_int_distribution<int> pick(c, p - 1);
                std::swap(s.features[static_cast<std::size_t>(c)], s.features[static_cast<std::size_t>(pick(rng))]);
            }
            const int f = s.features[static_cast<std::size_t>(c)];
            s.buf.clear();
            for (std::size_t i = t.begin; i < t.end; ++i) s.buf.emplace_back(X(static_cast<Eigen::Index>(idx[i]), f), y[idx[i]]);
            std::sort(s.buf.begin(), s.buf.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (s.buf.front().first == s.buf.back().first) continue; // constant here
            ++evaluated;
            double left_n = 0.0, left_pos = 0.0;
            const double tot_n = static_cast<double>(n), tot_pos = static_cast<double>(pos);
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left_n += 1.0;
                left_pos += s.buf[k].second;
                if (s.buf[k].first == s.buf[k + 1].first) continue;
                const double rn = tot_n - left_n, rp = tot_pos - left_pos;
                // n * gini = n - (pos^2 + neg^2) / n, summed over children.
                const double ln_neg = left_n - left_pos, rn_neg = rn - rp;
                const double imp = (left_n - (left_pos * left_pos + ln_neg * ln_neg) / left_n) +
                                   (rn - (rp * rp + rn_neg * rn_neg) / rn);
                const bool better = imp < best_imp - 1e-12 || (std::abs(imp - best_imp) <= 1e-12 && f < best_f);
                if (better) {
                    best_imp = imp;
                    best_f = f;
                    double thr = 0.5 * (s.buf[k].first + s.buf[k + 1].first);
                    if (!(thr < s.buf[k + 1].first)) thr = s.buf[k].first;
                    best_thr = thr;
                }
            }
        }
        if (best_f < 0) continue;

        auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                  idx.begin() + static_cast<std::ptrdiff_t>(t.end),
                                  [&](std::size_t i) { return X(static_cast<Eigen::Index>(i), best_f) <= best_thr; });
        const std::size_t split = static_cast<std::size_t>(mid - idx.begin());
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& node = tree.nodes[static_cast<std::size_t>(t.node)];
        node.feature = best_f;
        node.threshold = best_thr;
        node.left = left;
        node.right = left + 1;
        stack.push_back({left + 1, split, t.end, t.depth + 1});
        stack.push_back({left, t.begin, split, t.depth + 1});
    }
    return tree;
}

} // namespace detail

struct ForestModel {
    std::vector<Tree> trees;

    template <class Row>
    double predict_proba(const Row& x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict_proba(x);
        return s / static_cast<double>(trees.size());
    }
};

inline ForestModel train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                                std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    ForestModel m;
    m.trees.reserve(static_cast<std::size_t>(params.trees));
    for (int t = 0; t < params.trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> idx(n);
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& i : idx) i = pick(rng);
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        m.trees.push_back(detail::grow_tree(X, y, std::move(idx), params, rng));
    }
    return m;
}

struct KnnModel {
    int k = 5;
    Matrix X;
    std::vector<int> y;

    template <class Row>
    int predict(const Row& x) const {
        const auto n = X.rows();
        std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = {(X.row(i) - x).squaredNorm(), i};
        const auto kk = static_cast<std::size_t>(std::min<Eigen::Index>(k, n));
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
        int votes[2] = {0, 0};
        double dist[2] = {0.0, 0.0};
        for (std::size_t j = 0; j < kk; ++j) {
            const int c = y[static_cast<std::size_t>(d[j].second)];
            ++votes[c];
            dist[c] += std::sqrt(d[j].first);
        }
        if (votes[1] != votes[0]) return votes[1] > votes[0] ? 1 : 0;
        // Equal votes: smaller mean neighbour distance wins, then Safe.
        const double m0 = dist[0] / votes[0], m1 = dist[1] / votes[1];
        return m1 < m0 ? 1 : 0;
    }
};

struct NaiveBayesModel {
    double prior[2] = {0.5, 0.5};
    Vector mean[2];
    Vector var[2];

    template <class Row>
    double predict_proba(const Row& x) const {
        double jll[2];
        for (int c = 0; c < 2; ++c) {
            jll[c] = std::log(prior[c]);
            for (Eigen::Index j = 0; j < mean[c].size(); ++j) {
                const double d = x(j) - mean[c](j);
                jll[c] -= 0.5 * std::log(2.0 * std::numbers::pi * var[c](j)) + 0.5 * d * d / var[c](j);
            }
        }
        const double m = std::max(jll[0], jll[1]);
        const double e0 = std::exp(jll[0] - m), e1 = std::exp(jll[1] - m);
        return e1 / (e0 + e1);
    }
};

inline NaiveBayesModel train_naive_bayes(const Matrix& X, const std::vector<int>& y, const NaiveBayesParams& params) {
    NaiveBayesModel m;
    const auto p = X.cols();
    const double n = static_cast<double>(X.rows());
    double max_var = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = X.col(j).mean();
        max_var = std::max(max_var, (X.col(j).array() - mu).square().sum() / n);
    }
    const double eps = params.var_smoothing * max_var;
    for (int c = 0; c < 2; ++c) {
        m.mean[c] = Vector::Zero(p);
        m.var[c] = Vector::Zero(p);
        double cnt = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (y[static_cast<std::size_t>(i)] == c) {
                m.mean[c] += X.row(i).transpose();
                cnt += 1.0;
            }
        m.mean[c] /= cnt;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (y[static_cast<std::size_t>(i)] == c) m.var[c] += (X.row(i).transpose() - m.mean[c]).array().square().matrix();
        m.var[c] = (m.var[c] / cnt).array() + eps;
        m.prior[c] = cnt / n;
    }
    return m;
}

struct MlpModel {
    Matrix W1; // hidden x p
    Vector b1;
    Vector w2; // hidden
    double b2 = 0.0;
    int epochs_run = 0;

    template <class Row>
    double predict_proba(const Row& x) const {
        const Vector h = (W1 * x.transpose() + b1).cwiseMax(0.0);
        const double z = h.dot(w2) + b2;
        return 1.0 / (1.0 + std::exp(-z));
    }
};

inline MlpModel train_mlp(const Matrix& X, const std::vector<int>& y, const MlpParams& params, std::uint64_t seed) {
    const auto n = X.rows();
    const auto p = X.cols();
    const auto h = static_cast<Eigen::Index>(params.hidden);
    std::mt19937_64 rng(seed);
    MlpModel m;
    auto glorot = [&](Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, double factor) {
        const double bound = std::sqrt(factor / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = u(rng);
        return w;
    };
    m.W1 = glorot(h, p, static_cast<double>(p), static_cast<double>(h), 6.0);
    m.b1 = glorot(h, 1, static_cast<double>(p), static_cast<double>(h), 6.0).col(0);
    m.w2 = glorot(h, 1, static_cast<double>(h), 1.0, 2.0).col(0);
    m.b2 = glorot(1, 1, static_cast<double>(h), 1.0, 2.0)(0, 0);

    // Adam state.
    Matrix mW1 = Matrix::Zero(h, p), vW1 = Matrix::Zero(h, p);
    Vector mb1 = Vector::Zero(h), vb1 = Vector::Zero(h), mw2 = Vector::Zero(h), vw2 = Vector::Zero(h);
    double mb2 = 0.0, vb2 = 0.0;
    long step = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    double best_loss = std::numeric_limits<double>::infinity();
    int no_improve = 0;
    const auto bs_max = static_cast<Eigen::Index>(std::max(1, std::min<int>(params.batch, static_cast<int>(n))));
    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += bs_max) {
            const Eigen::Index bs = std::min(bs_max, n - start);
            Matrix Xb(bs, p);
            Vector yb(bs);
            for (Eigen::Index r = 0; r < bs; ++r) {
                const auto src = order[static_cast<std::size_t>(start + r)];
                Xb.row(r) = X.row(src);
                yb(r) = y[static_cast<std::size_t>(src)];
            }
            Matrix H = (Xb * m.W1.transpose()).rowwise() + m.b1.transpose();
            H = H.cwiseMax(0.0);
            Vector z = (H * m.w2).array() + m.b2;
            Vector prob = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
            double loss = 0.0;
            for (Eigen::Index r = 0; r < bs; ++r) {
                const double pr = std::clamp(prob(r), 1e-15, 1.0 - 1e-15);
                loss -= yb(r) * std::log(pr) + (1.0 - yb(r)) * std::log(1.0 - pr);
            }
            const double bsd = static_cast<double>(bs);
            loss = loss / bsd + 0.5 * params.l2 * (m.W1.squaredNorm() + m.w2.squaredNorm()) / bsd;
            epoch_loss += loss * bsd;

            const Vector d_out = (prob - yb) / bsd;
            const Vector g_w2 = H.transpose() * d_out + params.l2 * m.w2 / bsd;
            const double g_b2 = d_out.sum();
            Matrix dH = d_out * m.w2.transpose();
            dH = dH.cwiseProduct((H.array() > 0.0).cast<double>().matrix());
            const Matrix g_W1 = dH.transpose() * Xb + params.l2 * m.W1 / bsd;
            const Vector g_b1 = dH.colwise().sum().transpose();

            ++step;
            const double b1c = 1.0 - std::pow(params.beta1, static_cast<double>(step));
            const double b2c = 1.0 - std::pow(params.beta2, static_cast<double>(step));
            const double lr = params.learning_rate * std::sqrt(b2c) / b1c;
            auto adam = [&](auto& w, auto& mm, auto& vv, const auto& g) {
                mm = params.beta1 * mm + (1.0 - params.beta1) * g;
                vv = params.beta2 * vv + (1.0 - params.beta2) * g.cwiseProduct(g);
                w -= (lr * mm.array() / (vv.array().sqrt() + params.epsilon)).matrix();
            };
            adam(m.W1, mW1, vW1, g_W1);
            adam(m.b1, mb1, vb1, g_b1);
            adam(m.w2, mw2, vw2, g_w2);
            mb2 = params.beta1 * mb2 + (1.0 - params.beta1) * g_b2;
            vb2 = params.beta2 * vb2 + (1.0 - params.beta2) * g_b2 * g_b2;
            m.b2 -= lr * mb2 / (std::sqrt(vb2) + params.epsilon);
        }
        epoch_loss /= static_cast<double>(n);
        m.epochs_run = epoch + 1;
        if (epoch_loss > best_loss - params.tol) {
            if (++no_improve >= params.patience) break;
        } else {
            no_improve = 0;
        }
        best_loss = std::min(best_loss, epoch_loss);
    }
    return m;
}

/// A fitted classifier of any of the five kinds.
struct TrainedModel {
    ClassifierKind kind = ClassifierKind::RandomForest;
    std::variant<ForestModel, KnnModel, MlpModel, NaiveBayesModel> params;
    Eigen::Index arity = 0;

    /// Probability of Unsafe for probabilistic kinds; 0/1 for KNN.
    template <class Row>
    double score(const Row& x) const {
        return std::visit(
            [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, KnnModel>) {
                    return m.predict(x);
                } else {
                    return m.predict_proba(x);
                }
            },
            params);
    }

    std::vector<int> predict(const Matrix& X) const {
        if (X.cols() != arity)
            throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(arity) + " features, got " +
                                                          std::to_string(X.cols()));
        if (!X.allFinite()) throw Error(ErrorCode::NonFiniteInput, "prediction input contains non-finite values");
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = score(X.row(i)) > 0.5 ? 1 : 0;
        return out;
    }
};

inline TrainedModel train(const ClassifierSpec& spec, const Matrix& X, const std::vector<int>& y) {
    if (static_cast<std::size_t>(X.rows()) != y.size() || X.rows() == 0)
        throw Error(ErrorCode::DimensionMismatch, "training matrix and labels disagree");
    if (!X.allFinite()) throw Error(ErrorCode::NonFiniteInput, "training data contains non-finite values");
    std::size_t pos = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0/1");
        pos += static_cast<std::size_t>(v);
    }
    if (pos == 0 || pos == y.size()) throw Error(ErrorCode::OneClass, "training labels contain a single class");

    TrainedModel tm;
    tm.kind = spec.kind;
    tm.arity = X.cols();
    switch (spec.kind) {
    case ClassifierKind::RandomForest: tm.params = train_forest(X, y, spec.forest, spec.seed); break;
    case ClassifierKind::DecisionTree: tm.params = train_forest(X, y, spec.tree, spec.seed); break;
    case ClassifierKind::KNN: tm.params = KnnModel{spec.knn.k, X, y}; break;
    case ClassifierKind::MLP: tm.params = train_mlp(X, y, spec.mlp, spec.seed); break;
    case ClassifierKind::NaiveBayes: tm.params = train_naive_bayes(X, y, spec.nb); break;
    }
    return tm;
}

// ---- JSON serialization ----------------------------------------------------

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Matrix json_matrix(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
            throw Error(ErrorCode::MalformedJson, "ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector json_vector(const nlohmann::json& j) {
    const auto s = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

inline nlohmann::json forest_json(const ForestModel& f) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : f.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        trees.push_back(std::move(nodes));
    }
    return trees;
}

inline ForestModel json_forest(const nlohmann::json& j) {
    ForestModel f;
    for (const auto& t : j) {
        Tree tree;
        for (const auto& n : t)
            tree.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(), n[4].get<double>()});
        f.trees.push_back(std::move(tree));
    }
    return f;
}

} // namespace detail

inline nlohmann::json to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["kind"] = to_string(m.kind);
    j["arity"] = m.arity;
    std::visit(
        [&](const auto& p) {
            using M = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<M, ForestModel>) {
                j["trees"] = detail::forest_json(p);
            } else if constexpr (std::is_same_v<M, KnnModel>) {
                j["k"] = p.k;
                j["X"] = detail::matrix_json(p.X);
                j["y"] = p.y;
            } else if constexpr (std::is_same_v<M, MlpModel>) {
                j["W1"] = detail::matrix_json(p.W1);
                j["b1"] = detail::vector_json(p.b1);
                j["w2"] = detail::vector_json(p.w2);
                j["b2"] = p.b2;
                j["epochs_run"] = p.epochs_run;
            } else {
                j["prior"] = {p.prior[0], p.prior[1]};
                j["mean"] = {detail::vector_json(p.mean[0]), detail::vector_json(p.mean[1])};
                j["var"] = {detail::vector_json(p.var[0]), detail::vector_json(p.var[1])};
            }
        },
        m.params);
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        TrainedModel m;
        m.kind = kind_from_string(j.at("kind").get<std::string>());
        m.arity = j.at("arity").get<Eigen::Index>();
        switch (m.kind) {
        case ClassifierKind::RandomForest:
        case ClassifierKind::DecisionTree: m.params = detail::json_forest(j.at("trees")); break;
        case ClassifierKind::KNN:
            m.params = KnnModel{j.at("k").get<int>(), detail::json_matrix(j.at("X")), j.at("y").get<std::vector<int>>()};
            break;
        case ClassifierKind::MLP: {
            MlpModel p;
            p.W1 = detail::json_matrix(j.at("W1"));
            p.b1 = detail::json_vector(j.at("b1"));
            p.w2 = detail::json_vector(j.at("w2"));
            p.b2 = j.at("b2").get<double>();
            p.epochs_run = j.value("epochs_run", 0);
            m.params = std::move(p);
            break;
        }
        case ClassifierKind::NaiveBayes: {
            NaiveBayesModel p;
            for (int c = 0; c < 2; ++c) {
                p.prior[c] = j.at("prior")[static_cast<std::size_t>(c)].get<double>();
                p.mean[c] = detail::json_vector(j.at("mean")[static_cast<std::size_t>(c)]);
                p.var[c] = detail::json_vector(j.at("var")[static_cast<std::size_t>(c)]);
            }
            m.params = std::move(p);
            break;
        }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedJson, std::string("classifier document: ") + e.what());
    }
}

} // namespace isa::ml

#endif // ISA_CLASSIFIERS_HPP
