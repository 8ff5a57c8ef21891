#ifndef ISA_PILOT_HPP
#define ISA_PILOT_HPP

#include "isa/common.hpp"
#include "isa/feature_selection.hpp"
#include "isa/metadata.hpp"
#include "isa/preprocess.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace isa::pilot {

using RowVector = Eigen::RowVectorXd;

inline constexpr double ridge = 1e-10;

struct ObjectiveValue {
    double value = 0.0;
    Matrix B; // n x 2
    Matrix C; // 1 x 2
    bool ridged = false; // Z Z^T was singular and a ridge term was added
};

namespace detail {

// Inverts the 2x2 Gram matrix, adding a ridge when it is (nearly) singular.
inline Eigen::Matrix2d gram_inverse(Eigen::Matrix2d g, bool& ridged) {
    const double tr = g.trace();
    ridged = !(std::abs(g.determinant()) > 1e-14 * tr * tr) || !(tr > 0.0);
    if (ridged) g += ridge * Eigen::Matrix2d::Identity();
    return g.inverse();
}

} // namespace detail

/// Residual of the two linear reconstructions given the projection A, with B
/// and C at their least-squares optimum for Z = A F.
inline ObjectiveValue pilot_objective(const Matrix& A, const Matrix& F, const RowVector& Y) {
    if (A.rows() != 2 || A.cols() != F.rows() || Y.size() != F.cols())
        throw Error(ErrorCode::DimensionMismatch, "pilot objective: A must be 2 x n, F n x i and Y 1 x i");
    const Matrix Z = A * F;
    ObjectiveValue o;
    const Eigen::Matrix2d inv = detail::gram_inverse(Z * Z.transpose(), o.ridged);
    o.B = F * Z.transpose() * inv;
    o.C = Y * Z.transpose() * inv;
    o.value = (F - o.B * Z).squaredNorm() + (Y - o.C * Z).squaredNorm();
    return o;
}

/// The reduced objective over A, evaluated through the Gram matrices F F^T
/// and F Y^T so each evaluation is independent of the instance count.
class Problem {
public:
    Problem(const Matrix& F, const RowVector& Y)
        : S_(F * F.transpose()), fy_(F * Y.transpose()), ff_(F.squaredNorm()), yy_(Y.squaredNorm()), n_(F.rows()) {}

    Eigen::Index features() const { return n_; }

    /// Objective value; writes the 2 x n gradient when `grad` is non-null.
    double evaluate(const Matrix& A, Matrix* grad, bool* ridged = nullptr) const {
        const Matrix SA = S_ * A.transpose();             // F Z^T, n x 2
        const Eigen::Matrix2d G = A * SA;                 // Z Z^T
        const Eigen::RowVector2d q = fy_.transpose() * A.transpose(); // Y Z^T
        bool r = false;
        const Eigen::Matrix2d inv = detail::gram_inverse(G, r);
        if (ridged) *ridged = r;
        const Matrix B = SA * inv;
        const Eigen::RowVector2d C = q * inv;
        const double value = ff_ - 2.0 * (B.transpose() * SA).trace() + (B * G * B.transpose()).trace() + yy_ -
                             2.0 * C.dot(q) + C * G * C.transpose();
        if (grad) {
            // d/dA = -2 [ B^T (F - B Z) F^T + C^T (Y - C Z) F^T ]
            const Matrix ASt = A * S_; // Z F^T, 2 x n
            *grad = -2.0 * (B.transpose() * (S_ - B * ASt) + C.transpose() * (fy_.transpose() - C * ASt));
        }
        return std::max(0.0, value);
    }

    double scale() const { return ff_ + yy_; }

private:
    Matrix S_;
    Vector fy_;
    double ff_, yy_;
    Eigen::Index n_;
};

struct FitOptions {
    int restarts = 30;
    int max_iterations = 1000;
    double relative_tolerance = 1e-8;
    double perturbation = 0.3;
    std::uint64_t seed = 0;
};

struct RunResult {
    Matrix A;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<double> trace; // objective after each accepted step, starting value first
};

/// BFGS on vec(A) with a backtracking Armijo line search.
inline RunResult minimize(const Problem& prob, const Matrix& A0, const FitOptions& opt) {
    const Eigen::Index n = prob.features();
    const Eigen::Index m = 2 * n;
    auto to_mat = [&](const Vector& x) { return Matrix(Eigen::Map<const Matrix>(x.data(), 2, n)); };

    RunResult r;
    Vector x = Eigen::Map<const Vector>(A0.data(), m);
    Matrix g_mat;
    double f = prob.evaluate(to_mat(x), &g_mat);
    Vector g = Eigen::Map<const Vector>(g_mat.data(), m);
    r.trace.push_back(f);
    if (!std::isfinite(f)) {
        r.A = to_mat(x);
        r.objective = f;
        return r;
    }
    Matrix H = Matrix::Identity(m, m);
    const double floor = 1e-14 * std::max(1.0, prob.scale());
    for (int it = 0; it < opt.max_iterations; ++it) {
        r.iterations = it + 1;
        if (f <= floor || g.norm() <= 1e-14 * std::max(1.0, prob.scale())) break;
        Vector d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) { // lost descent direction: reset to steepest descent
            H.setIdentity();
            d = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        double f_new = f;
        Vector x_new = x;
        Matrix g_new_mat;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * d;
            f_new = prob.evaluate(to_mat(x_new), &g_new_mat);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const Vector g_new = Eigen::Map<const Vector>(g_new_mat.data(), m);
        const Vector s = x_new - x;
        const Vector yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (it == 0) H *= sy / yv.squaredNorm();
            const double rho = 1.0 / sy;
            const Vector Hy = H * yv;
            H += (rho * rho * yv.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
        }
        const double change = std::abs(f - f_new);
        x = x_new;
        g = g_new;
        const double f_old = f;
        f = f_new;
        r.trace.push_back(f);
        if (change <= opt.relative_tolerance * std::max(std::abs(f_old), floor)) break;
    }
    r.A = to_mat(x);
    r.objective = f;
    return r;
}

/// Fitted projection with everything needed to reproduce Z = A F.
struct ProjectionModel {
    Matrix A; // 2 x n
    Matrix B; // n x 2
    Matrix C; // 1 x 2
    double objective = 0.0;
    double initial_objective = 0.0; // at the PCA initialization
    bool ridged = false;
    std::vector<std::string> features;
    preprocess::NormalizationParams normalization; // raw units of the selected features
    std::uint64_t seed = 0;
    int restarts = 0;

    Eigen::Index arity() const { return A.cols(); }
};

inline RowVector standardize_outcome(const std::vector<int>& y) {
    RowVector Y(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) Y(static_cast<Eigen::Index>(i)) = y[i];
    const double mean = Y.mean();
    const double sd = Y.size() > 1 ? std::sqrt((Y.array() - mean).square().sum() / static_cast<double>(Y.size() - 1)) : 0.0;
    Y.array() -= mean;
    if (sd > 0.0) Y /= sd;
    return Y;
}

/// PCA loadings of the instances (columns of F), transposed to 2 x n.
inline Matrix pca_initialization(const Matrix& F) { return selection::pca2(F.transpose()).loadings.transpose(); }

inline ProjectionModel fit_pilot(const Matrix& F, const RowVector& Y, const FitOptions& opt = {}) {
    if (F.rows() < 2 || F.cols() <= F.rows())
        throw Error(ErrorCode::InvalidArgument, "PILOT needs at least 2 features and more instances than features");
    if (Y.size() != F.cols()) throw Error(ErrorCode::DimensionMismatch, "outcome length differs from instance count");
    if (opt.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be at least 1");
    if (!F.allFinite() || !Y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "PILOT input contains non-finite values");

    const Problem prob(F, Y);
    const Matrix A0 = pca_initialization(F);
    std::vector<RunResult> runs(static_cast<std::size_t>(opt.restarts));
    parallel_for(runs.size(), [&](std::size_t r) {
        Matrix start = A0;
        if (r > 0) {
            std::mt19937_64 rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
            std::normal_distribution<double> noise(0.0, opt.perturbation);
            for (Eigen::Index k = 0; k < start.size(); ++k) start.data()[k] += noise(rng);
        }
        runs[r] = minimize(prob, start, opt);
    });
    const RunResult* best = nullptr;
    for (const auto& r : runs)
        if (std::isfinite(r.objective) && r.A.allFinite() && (!best || r.objective < best->objective)) best = &r;
    if (!best) throw Error(ErrorCode::OptimizerDiverged, "every PILOT restart produced a non-finite objective");

    ProjectionModel model;
    model.A = best->A;
    model.initial_objective = runs.front().trace.front();
    model.seed = opt.seed;
    model.restarts = opt.restarts;

    // The objective depends on A only through its row space. Report the
    // representative with orthonormal rows, z1 along the largest spread.
    {
        Eigen::JacobiSVD<Matrix> svd(model.A, Eigen::ComputeFullV);
        const Matrix basis = svd.matrixV().leftCols(2).transpose();
        const Matrix Zb = basis * F;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(Zb * Zb.transpose()));
        Eigen::Matrix2d R;
        R.row(0) = es.eigenvectors().col(1).transpose();
        R.row(1) = es.eigenvectors().col(0).transpose();
        model.A = R * basis;
    }

    // orientation: corr(z_r, Y) >= 0, else largest-magnitude loading positive
    const Matrix Z = model.A * F;
    for (Eigen::Index r = 0; r < 2; ++r) {
        const Vector zr = Z.row(r).transpose();
        const Vector yv = Y.transpose();
        const auto c = preprocess::pearson(std::span<const double>(zr.data(), static_cast<std::size_t>(zr.size())),
                                           std::span<const double>(yv.data(), static_cast<std::size_t>(yv.size())));
        bool flip = false;
        if (!c.degenerate && std::abs(c.rho) >= 1e-6) {
            flip = c.rho < 0.0;
        } else {
            Eigen::Index arg = 0;
            for (Eigen::Index k = 1; k < model.A.cols(); ++k)
                if (std::abs(model.A(r, k)) > std::abs(model.A(r, arg)) + 1e-12) arg = k;
            flip = model.A(r, arg) < 0.0;
        }
        if (flip) model.A.row(r) *= -1.0;
    }
    const auto o = pilot_objective(model.A, F, Y);
    model.B = o.B;
    model.C = o.C;
    model.objective = o.value;
    model.ridged = o.ridged;
    return model;
}

/// Z = A F for standardized columns F (n x j).
inline Matrix project(const ProjectionModel& model, const Matrix& F) {
    if (F.rows() != model.A.cols())
        throw Error(ErrorCode::DimensionMismatch, "projection expects " + std::to_string(model.A.cols()) +
                                                      " features, got " + std::to_string(F.rows()));
    return model.A * F;
}

/// Standardizes raw table columns with the model's parameters and projects them.
inline Matrix project_table(const ProjectionModel& model, const MetadataTable& raw) {
    Matrix F(static_cast<Eigen::Index>(model.features.size()), raw.values.rows());
    for (std::size_t k = 0; k < model.features.size(); ++k) {
        const auto j = static_cast<Eigen::Index>(raw.require_column(model.features[k]));
        const auto i = model.normalization.index_of(model.features[k]);
        F.row(static_cast<Eigen::Index>(k)) =
            ((raw.values.col(j).array() - model.normalization.mean[i]) / model.normalization.stddev[i]).matrix().transpose();
    }
    return project(model, F);
}

/// The 2D instance space: one projected point per instance.
struct InstanceSpace {
    std::vector<std::string> ids;
    Matrix coords; // i x 2
    std::vector<Outcome> outcomes;
    Matrix features; // i x n, standardized selected features
    std::vector<std::string> feature_names;

    std::size_t size() const { return ids.size(); }

    std::string to_csv() const {
        std::string out = "id,z1,z2,outcome\n";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            out += csv::quote(ids[i]) + ',' + csv::format_number(coords(r, 0)) + ',' + csv::format_number(coords(r, 1)) +
                   ',' + (outcomes[i] == Outcome::Unsafe ? "unsafe" : "safe") + '\n';
        }
        return out;
    }
};

/// Builds the instance space from a standardized table holding the model's features.
inline InstanceSpace build_space(const ProjectionModel& model, const MetadataTable& normalized) {
    InstanceSpace s;
    s.ids = normalized.instance_ids;
    s.outcomes = normalized.outcomes;
    s.feature_names = model.features;
    s.features = normalized.select_columns(model.features).values;
    if (!s.features.allFinite()) throw Error(ErrorCode::NonFiniteInput, "instance space features must be complete");
    s.coords = project(model, s.features.transpose()).transpose();
    return s;
}

/// Fits PILOT on the selected columns of a standardized table.
inline ProjectionModel fit_table(const MetadataTable& normalized, const std::vector<std::string>& features,
                                 const preprocess::NormalizationParams& params, const FitOptions& opt = {}) {
    const Matrix F = normalized.select_columns(features).values.transpose();
    auto model = fit_pilot(F, standardize_outcome(normalized.outcome_ints()), opt);
    model.features = features;
    model.normalization = params.subset(features);
    return model;
}

// ---- JSON -------------------------------------------------------------------

inline nlohmann::json to_json(const ProjectionModel& m) {
    auto rows = [](const Matrix& x) {
        nlohmann::json j = nlohmann::json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(x.cols()));
            for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
            j.push_back(row);
        }
        return j;
    };
    return {{"features", m.features},
            {"A", rows(m.A)},
            {"B", rows(m.B)},
            {"C", rows(m.C)},
            {"objective", m.objective},
            {"initial_objective", m.initial_objective},
            {"ridged", m.ridged},
            {"seed", m.seed},
            {"restarts", m.restarts},
            {"normalization", {{"mean", m.normalization.mean}, {"stddev", m.normalization.stddev}}}};
}

inline ProjectionModel model_from_json(const nlohmann::json& j) {
    auto matrix = [](const nlohmann::json& a, Eigen::Index rows, Eigen::Index cols, const char* what) {
        if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows)
            throw Error(ErrorCode::MalformedJson, std::string("projection model: bad shape for ") + what);
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto& row = a[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
                throw Error(ErrorCode::MalformedJson, std::string("projection model: bad shape for ") + what);
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        return m;
    };
    ProjectionModel m;
    try {
        m.features = j.at("features").get<std::vector<std::string>>();
        const auto n = static_cast<Eigen::Index>(m.features.size());
        m.A = matrix(j.at("A"), 2, n, "A");
        m.B = matrix(j.at("B"), n, 2, "B");
        m.C = matrix(j.at("C"), 1, 2, "C");
        m.objective = j.at("objective").get<double>();
        m.initial_objective = j.value("initial_objective", m.objective);
        m.ridged = j.value("ridged", false);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.restarts = j.value("restarts", 0);
        m.normalization.names = m.features;
        m.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        m.normalization.stddev = j.at("normalization").at("stddev").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedJson, std::string("projection model: ") + e.what());
    }
    if (m.normalization.mean.size() != m.features.size() || m.normalization.stddev.size() != m.features.size())
        throw Error(ErrorCode::MalformedJson, "projection model: normalization arity differs from feature count");
    return m;
}

} // namespace isa::pilot

#endif // ISA_PILOT_HPP
