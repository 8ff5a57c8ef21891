// Independent reference implementations and data generators for the tests.
#ifndef ISA_TESTS_SUPPORT_HPP
#define ISA_TESTS_SUPPORT_HPP

#include "isa/geometry.hpp"
#include "isa/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testing_support {

using isa::Matrix;
using isa::Vector;
using isa::geometry::Point;

// Cyclic Jacobi rotations; returns eigenvalues descending with matching columns.
inline std::pair<Vector, Matrix> jacobi_eigen(Matrix a) {
    const auto n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
    Vector vals(n);
    Matrix vecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vals(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        vecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return {vals, vecs};
}

// Moore-Penrose pseudo-inverse through the SVD.
inline Matrix pinv(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    const double tol = 1e-12 * std::max(m.rows(), m.cols()) * (s.size() ? s(0) : 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) > tol ? 1.0 / s(i) : 0.0;
    return svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
}

// Hull vertices by testing every directed pair as a candidate edge.
inline std::set<std::pair<double, double>> brute_hull(const std::vector<Point>& pts) {
    std::set<std::pair<double, double>> out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool edge = true;
            for (std::size_t k = 0; k < n && edge; ++k) {
                if (k == i || k == j) continue;
                const double c = isa::geometry::cross(pts[i], pts[j], pts[k]);
                if (c < 0) edge = false;
                if (c == 0) {
                    // collinear points must lie strictly between the endpoints
                    const double t = (pts[k].x - pts[i].x) * (pts[j].x - pts[i].x) + (pts[k].y - pts[i].y) * (pts[j].y - pts[i].y);
                    const double len = (pts[j].x - pts[i].x) * (pts[j].x - pts[i].x) + (pts[j].y - pts[i].y) * (pts[j].y - pts[i].y);
                    if (t <= 0 || t >= len) edge = false;
                }
            }
            if (edge) {
                out.insert({pts[i].x, pts[i].y});
                out.insert({pts[j].x, pts[j].y});
            }
        }
    return out;
}

// Textbook DBSCAN with exhaustive neighbour scans.
inline std::vector<int> naive_dbscan(const std::vector<Point>& pts, std::size_t k, double eps) {
    const std::size_t n = pts.size();
    auto near = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps) out.push_back(j);
        return out;
    };
    std::vector<int> label(n, -1);
    int c = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != -1 || near(i).size() < k) continue;
        std::deque<std::size_t> q{i};
        label[i] = c;
        while (!q.empty()) {
            const auto p = q.front();
            q.pop_front();
            const auto nb = near(p);
            if (nb.size() < k) continue;
            for (auto j : nb)
                if (label[j] == -1) {
                    label[j] = c;
                    q.push_back(j);
                }
        }
        ++c;
    }
    return label;
}

inline bool inside_ring(const Point& p, const std::vector<Point>& ring) {
    bool in = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const auto& a = ring[i];
        const auto& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

// Monte-Carlo area of a set of disjoint regions (holes subtracted).
inline double mc_area(const std::vector<isa::geometry::Region>& regions, std::size_t samples, std::uint64_t seed) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& r : regions)
        for (const auto& p : r.outer.vertices) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Point p{ux(rng), uy(rng)};
        for (const auto& r : regions) {
            if (!inside_ring(p, r.outer.vertices)) continue;
            bool in_hole = false;
            for (const auto& h : r.holes) in_hole = in_hole || inside_ring(p, h.vertices);
            if (!in_hole) {
                ++hits;
                break;
            }
        }
    }
    return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / static_cast<double>(samples);
}

inline std::vector<Point> random_points(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    return p;
}

inline std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%05zu", i);
        v.push_back(buf);
    }
    return v;
}

inline std::vector<std::string> names(std::size_t p, const std::string& prefix = "f") {
    std::vector<std::string> v;
    for (std::size_t j = 0; j < p; ++j) v.push_back(prefix + std::to_string(j));
    return v;
}

inline std::vector<isa::Outcome> outcomes(const std::vector<int>& y) {
    std::vector<isa::Outcome> o;
    for (int v : y) o.push_back(isa::outcome_from_int(v));
    return o;
}

// Standardizes the columns of X in place (sample standard deviation).
inline void standardize(Matrix& X) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double m = X.col(j).mean();
        X.col(j).array() -= m;
        const double sd = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(X.rows() - 1));
        if (sd > 0) X.col(j) /= sd;
    }
}

// Nine features in three correlated triples. Features 0 and 3 (one in each of
// the first two triples) carry the outcome: y = [x0 + x3 > 0]. The third triple
// is noise. Within a triple, members share a latent factor plus small noise.
inline isa::MetadataTable planted_selection_table(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix X(static_cast<Eigen::Index>(n), 9);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (int c = 0; c < 3; ++c) {
            const double latent = g(rng);
            for (int m = 0; m < 3; ++m) X(r, 3 * c + m) = latent + 0.35 * g(rng);
        }
        // the informative members carry an extra signal shared with the label;
        // s0 and s1 are correlated (0.6) so f0 + f3 is a leading principal direction
        const double s0 = g(rng), s1 = 0.6 * s0 + 0.8 * g(rng);
        X(r, 0) += 1.5 * s0;
        X(r, 3) += 1.5 * s1;
        y[i] = X(r, 0) + X(r, 3) > 0 ? 1 : 0;
    }
    standardize(X);
    return isa::make_table(ids(n), names(9), X, outcomes(y));
}

// Two isotropic Gaussian classes whose means are `separation` sigmas apart.
inline std::pair<Matrix, std::vector<int>> two_gaussians(std::size_t n, std::size_t dims, double separation,
                                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
    std::vector<int> y(n);
    const double shift = separation / std::sqrt(static_cast<double>(dims));
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t d = 0; d < dims; ++d)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = g(rng) + (y[i] ? shift : 0.0);
    }
    return {X, y};
}

} // namespace testing_support

#endif // ISA_TESTS_SUPPORT_HPP
