#ifndef ISA_GEOMETRY_HPP
#define ISA_GEOMETRY_HPP

#include "isa/common.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

namespace isa::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
    friend bool operator<(const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
};

/// Counterclockwise vertex ring, closed implicitly.
struct Polygon {
    std::vector<Point> vertices;
    std::size_t size() const { return vertices.size(); }
};

/// A polygon with holes. The outer ring is counterclockwise, holes clockwise.
struct Region {
    Polygon outer;
    std::vector<Polygon> holes;
};

inline double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double signed_area(const std::vector<Point>& ring) {
    double s = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        const auto& a = ring[i];
        const auto& b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

namespace detail {

inline bool on_segment(const Point& p, const Point& q, const Point& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) && std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

inline bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
    const int d1 = sgn(cross(q1, q2, p1)), d2 = sgn(cross(q1, q2, p2));
    const int d3 = sgn(cross(p1, p2, q1)), d4 = sgn(cross(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(q1, p1, q2)) return true;
    if (d2 == 0 && on_segment(q1, p2, q2)) return true;
    if (d3 == 0 && on_segment(p1, q1, p2)) return true;
    if (d4 == 0 && on_segment(p1, q2, p2)) return true;
    return false;
}

} // namespace detail

/// True when no two non-adjacent edges touch and adjacent edges meet only at their shared vertex.
inline bool is_simple(const Polygon& p) {
    const auto& v = p.vertices;
    const std::size_t n = v.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] == v[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Point &a = v[i], &b = v[(i + 1) % n], &c = v[j], &d = v[(j + 1) % n];
            if (adjacent) {
                // collinear overlap of neighbouring edges folds the boundary back on itself
                const Point& shared = j == i + 1 ? b : a;
                const Point& e1 = j == i + 1 ? a : b;
                const Point& e2 = j == i + 1 ? d : c;
                if (cross(shared, e1, e2) == 0.0 && (e1.x - shared.x) * (e2.x - shared.x) + (e1.y - shared.y) * (e2.y - shared.y) > 0.0)
                    return false;
                continue;
            }
            if (detail::segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

/// Shoelace area of a simple polygon.
inline double polygon_area(const Polygon& p) {
    if (!is_simple(p)) throw Error(ErrorCode::NotSimple, "polygon with " + std::to_string(p.size()) + " vertices is not simple");
    return std::abs(signed_area(p.vertices));
}

inline double region_area(const Region& r) {
    double a = std::abs(signed_area(r.outer.vertices));
    for (const auto& h : r.holes) a -= std::abs(signed_area(h.vertices));
    return std::max(0.0, a);
}

// ---- convex hull -------------------------------------------------------------

/// Monotone-chain convex hull, counterclockwise, collinear boundary points omitted.
inline Polygon convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw Error(ErrorCode::DegenerateHull, "convex hull needs 3 distinct points, got " + std::to_string(pts.size()));
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    if (h.size() < 3) throw Error(ErrorCode::DegenerateHull, "all points are collinear");
    return Polygon{std::move(h)};
}

// ---- boundary hypercube ------------------------------------------------------

struct Elimination {
    std::uint32_t vertex = 0; // bit j set => upper bound for feature j
    std::size_t i = 0, j = 0;
    double rho = 0.0;
};

struct BoundaryVertexSet {
    Vector upper;
    Vector lower;
    std::vector<std::uint32_t> vertices; // surviving, ascending
    std::vector<Elimination> eliminated;

    Vector vertex_values(std::uint32_t v) const {
        Vector x(upper.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = (v >> j) & 1u ? upper(j) : lower(j);
        return x;
    }
};

inline constexpr std::size_t max_boundary_features = 20;

/// Enumerates the 2^n bound combinations and removes those that contradict a
/// strong correlation: rho >= theta forbids opposite bounds on the pair,
/// rho <= -theta forbids equal bounds.
inline BoundaryVertexSet build_boundary(const Vector& upper, const Vector& lower, const Matrix& rho, double theta) {
    const auto n = static_cast<std::size_t>(upper.size());
    if (n > max_boundary_features)
        throw Error(ErrorCode::TooManyFeatures, std::to_string(n) + " features give 2^" + std::to_string(n) +
                                                    " boundary vertices; select at most " +
                                                    std::to_string(max_boundary_features));
    if (lower.size() != upper.size() || rho.rows() != upper.size() || rho.cols() != upper.size())
        throw Error(ErrorCode::DimensionMismatch, "bounds and correlation matrix sizes differ");
    if (!(theta > 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta_strong must lie in (0, 1]");
    BoundaryVertexSet b;
    b.upper = upper;
    b.lower = lower;
    const std::uint32_t q = 1u << n;
    for (std::uint32_t v = 0; v < q; ++v) {
        bool keep = true;
        for (std::size_t i = 0; i < n && keep; ++i) {
            for (std::size_t j = i + 1; j < n && keep; ++j) {
                const double r = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                const bool ui = (v >> i) & 1u, uj = (v >> j) & 1u;
                if ((r >= theta && ui != uj) || (r <= -theta && ui == uj)) {
                    b.eliminated.push_back({v, i, j, r});
                    keep = false;
                }
            }
        }
        if (keep) b.vertices.push_back(v);
    }
    return b;
}

// ---- DBSCAN ----------------------------------------------------------------

struct DbscanParams {
    std::size_t k = 3;
    double eps = 0.0;
};

/// Automatic DBSCAN parameters from the instance count and coordinate ranges.
/// Neighbourhood radius for k neighbours among r points spread over the given ranges.
inline double dbscan_eps(std::size_t k, std::size_t r, double range_z1, double range_z2) {
    if (r < 1) throw Error(ErrorCode::InvalidArgument, "dbscan_eps needs at least one instance");
    const double gamma2 = std::tgamma(2.0);
    return static_cast<double>(k) * gamma2 / std::sqrt(static_cast<double>(r) * M_PI) * (range_z1 * range_z2);
}

inline DbscanParams dbscan_params(std::size_t r, double range_z1, double range_z2) {
    if (r < 1) throw Error(ErrorCode::InvalidArgument, "dbscan_params needs at least one instance");
    const std::size_t k = std::max<std::size_t>(std::min<std::size_t>((r + 19) / 20, 50), 3);
    return {k, dbscan_eps(k, r, range_z1, range_z2)};
}

inline constexpr int noise = -1;

/// Density clustering. A point is core when at least k points (itself
/// included) lie within eps. Seeds are scanned in index order and a border
/// point keeps the first cluster that reaches it.
inline std::vector<int> dbscan(std::span<const Point> pts, std::size_t k, double eps) {
    if (!(eps > 0.0) || k < 1) throw Error(ErrorCode::InvalidArgument, "dbscan needs eps > 0 and k >= 1");
    const std::size_t n = pts.size();
    std::vector<int> label(n, noise);
    if (n == 0) return label;

    // uniform grid with cell size eps
    double minx = pts[0].x, miny = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
    }
    auto cell_of = [&](const Point& p) {
        return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor((p.x - minx) / eps)),
                                                     static_cast<std::int64_t>(std::floor((p.y - miny) / eps))};
    };
    struct Hash {
        std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& c) const {
            return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(c.first) * 0x9e3779b97f4a7c15ULL ^
                                                  static_cast<std::uint64_t>(c.second)));
        }
    };
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>, Hash> grid;
    for (std::size_t i = 0; i < n; ++i) grid[cell_of(pts[i])].push_back(i);
    const double eps2 = eps * eps;
    auto neighbours = [&](std::size_t i, std::vector<std::size_t>& out) {
        out.clear();
        const auto [cx, cy] = cell_of(pts[i]);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({cx + dx, cy + dy});
                if (it == grid.end()) continue;
                for (auto j : it->second) {
                    const double ex = pts[j].x - pts[i].x, ey = pts[j].y - pts[i].y;
                    if (ex * ex + ey * ey <= eps2) out.push_back(j);
                }
            }
    };

    std::vector<char> core(n, 0);
    {
        std::vector<std::size_t> nb;
        for (std::size_t i = 0; i < n; ++i) {
            neighbours(i, nb);
            core[i] = nb.size() >= k;
        }
    }
    int cluster = 0;
    std::vector<std::size_t> nb;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != noise || !core[i]) continue;
        label[i] = cluster;
        queue.push_back(i);
        while (!queue.empty()) {
            const auto c = queue.front();
            queue.pop_front();
            neighbours(c, nb);
            for (auto j : nb) {
                if (label[j] != noise) continue;
                label[j] = cluster;
                if (core[j]) queue.push_back(j);
            }
        }
        ++cluster;
    }
    return label;
}

// ---- Delaunay triangulation --------------------------------------------------

struct Triangle {
    std::array<std::size_t, 3> v{}; // counterclockwise
};

namespace detail {

inline long double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline long double orient(const Point& a, const Point& b, const Point& c) {
    return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
           (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

// A finite super triangle can swallow thin triangles along the hull. Each
// uncovered side of a boundary edge gets the candidate seeing it under the
// widest angle, provided the new triangle overlaps nothing already kept.
inline void fill_hull_pockets(const std::vector<Point>& P, std::vector<Triangle>& tris) {
    const std::size_t n = P.size();
    auto key = [](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    };
    auto strictly_inside = [&](const Point& q, const Triangle& t) {
        return orient(P[t.v[0]], P[t.v[1]], q) > 0 && orient(P[t.v[1]], P[t.v[2]], q) > 0 && orient(P[t.v[2]], P[t.v[0]], q) > 0;
    };
    for (bool changed = true; changed;) {
        changed = false;
        std::unordered_map<std::uint64_t, int> count;
        std::vector<char> used(n, 0), open_vertex(n, 0);
        for (const auto& t : tris)
            for (std::size_t e = 0; e < 3; ++e) {
                ++count[key(t.v[e], t.v[(e + 1) % 3])];
                used[t.v[e]] = 1;
            }
        std::vector<std::pair<std::size_t, std::size_t>> open;
        for (const auto& t : tris)
            for (std::size_t e = 0; e < 3; ++e)
                if (count[key(t.v[e], t.v[(e + 1) % 3])] == 1) {
                    open.emplace_back(t.v[e], t.v[(e + 1) % 3]);
                    open_vertex[t.v[e]] = open_vertex[t.v[(e + 1) % 3]] = 1;
                }
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < n; ++i)
            if (open_vertex[i] || !used[i]) cand.push_back(i);
        auto crosses = [&](std::size_t u, std::size_t v) {
            for (const auto& [a, b] : open) {
                if (a == u || a == v || b == u || b == v) continue;
                if (orient(P[u], P[v], P[a]) * orient(P[u], P[v], P[b]) < 0 && orient(P[a], P[b], P[u]) * orient(P[a], P[b], P[v]) < 0)
                    return true;
            }
            return false;
        };
        auto edge_ok = [&](std::size_t u, std::size_t v) {
            const auto it = count.find(key(u, v));
            if (it != count.end()) return it->second == 1;
            if (crosses(u, v)) return false;
            const Point mid{0.5 * (P[u].x + P[v].x), 0.5 * (P[u].y + P[v].y)};
            for (const auto& t : tris)
                if (strictly_inside(mid, t)) return false;
            return true;
        };
        for (const auto& [a, b] : open) {
            std::ptrdiff_t best = -1;
            double best_cos = 2.0;
            for (auto c : cand) {
                if (orient(P[a], P[b], P[c]) >= 0) continue;
                const double ux = P[a].x - P[c].x, uy = P[a].y - P[c].y, vx = P[b].x - P[c].x, vy = P[b].y - P[c].y;
                const double cs = (ux * vx + uy * vy) / std::sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy));
                if (cs < best_cos) {
                    best_cos = cs;
                    best = static_cast<std::ptrdiff_t>(c);
                }
            }
            if (best < 0) continue;
            const auto c = static_cast<std::size_t>(best);
            if (!edge_ok(a, c) || !edge_ok(c, b)) continue;
            tris.push_back({{b, a, c}});
            changed = true;
            break;
        }
    }
}

} // namespace detail

/// Incremental Bowyer-Watson triangulation of distinct points. Returned
/// triangles index into `pts` and are counterclockwise.
inline std::vector<Triangle> delaunay(const std::vector<Point>& input) {
    const std::size_t n = input.size();
    if (n < 3) return {};
    double minx = input[0].x, maxx = minx, miny = input[0].y, maxy = miny;
    for (const auto& p : input) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double span = std::max({maxx - minx, maxy - miny, 1e-300});
    const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
    std::vector<Point> P = input;
    P.push_back({cx - 200.0 * span, cy - 100.0 * span});
    P.push_back({cx + 200.0 * span, cy - 100.0 * span});
    P.push_back({cx, cy + 200.0 * span});

    struct T {
        std::array<std::size_t, 3> v;
        std::array<std::ptrdiff_t, 3> nb; // neighbour opposite v[i]
        bool alive;
    };
    std::vector<T> tris;
    tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

    // insertion order: rows of a grid, snaking, for walk locality
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    {
        const std::size_t g = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n) / 4.0)));
        auto row = [&](std::size_t i) {
            return std::min(g - 1, static_cast<std::size_t>((input[i].y - miny) / span * static_cast<double>(g)));
        };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ra = row(a), rb = row(b);
            if (ra != rb) return ra < rb;
            return ra % 2 == 0 ? input[a].x < input[b].x : input[a].x > input[b].x;
        });
    }

    std::ptrdiff_t last = 0;
    std::vector<std::ptrdiff_t> cavity;
    std::vector<char> in_cavity;
    for (auto pi : order) {
        const Point& p = P[pi];
        // walk to a triangle containing p
        std::ptrdiff_t t = last;
        for (std::size_t steps = 0; steps < 4 * tris.size() + 16; ++steps) {
            const auto& tr = tris[static_cast<std::size_t>(t)];
            std::ptrdiff_t next = -1;
            for (int e = 0; e < 3; ++e) {
                const auto& a = P[tr.v[static_cast<std::size_t>((e + 1) % 3)]];
                const auto& b = P[tr.v[static_cast<std::size_t>((e + 2) % 3)]];
                if (detail::orient(a, b, p) < 0 && tr.nb[static_cast<std::size_t>(e)] >= 0) {
                    next = tr.nb[static_cast<std::size_t>(e)];
                    break;
                }
            }
            if (next < 0) break;
            t = next;
        }
        // grow the cavity of triangles whose circumcircle holds p
        in_cavity.resize(tris.size(), 0);
        cavity.assign(1, t);
        in_cavity[static_cast<std::size_t>(t)] = 1;
        for (std::size_t c = 0; c < cavity.size(); ++c) {
            const auto& tr = tris[static_cast<std::size_t>(cavity[c])];
            for (int e = 0; e < 3; ++e) {
                const auto nbi = tr.nb[static_cast<std::size_t>(e)];
                if (nbi < 0 || in_cavity[static_cast<std::size_t>(nbi)]) continue;
                const auto& o = tris[static_cast<std::size_t>(nbi)];
                const auto& a = P[tr.v[static_cast<std::size_t>((e + 1) % 3)]];
                const auto& b = P[tr.v[static_cast<std::size_t>((e + 2) % 3)]];
                if (detail::incircle(P[o.v[0]], P[o.v[1]], P[o.v[2]], p) > 0 || detail::orient(a, b, p) <= 0) {
                    in_cavity[static_cast<std::size_t>(nbi)] = 1;
                    cavity.push_back(nbi);
                }
            }
        }
        // boundary edges (a -> b, outer neighbour)
        struct Edge {
            std::size_t a, b;
            std::ptrdiff_t outer;
        };
        std::vector<Edge> boundary;
        bool duplicate = false;
        for (auto c : cavity) {
            const auto& tr = tris[static_cast<std::size_t>(c)];
            for (int e = 0; e < 3; ++e) {
                const auto nbi = tr.nb[static_cast<std::size_t>(e)];
                if (nbi >= 0 && in_cavity[static_cast<std::size_t>(nbi)]) continue;
                boundary.push_back({tr.v[static_cast<std::size_t>((e + 1) % 3)], tr.v[static_cast<std::size_t>((e + 2) % 3)], nbi});
            }
            for (auto v : tr.v)
                if (P[v] == p) duplicate = true;
        }
        if (duplicate) {
            for (auto c : cavity) in_cavity[static_cast<std::size_t>(c)] = 0;
            continue;
        }
        std::unordered_map<std::size_t, std::ptrdiff_t> starting_at;
        const std::size_t first_new = tris.size();
        for (const auto& e : boundary) {
            const auto id = static_cast<std::ptrdiff_t>(tris.size());
            tris.push_back({{pi, e.a, e.b}, {e.outer, -1, -1}, true});
            starting_at[e.a] = id;
            if (e.outer >= 0) {
                auto& o = tris[static_cast<std::size_t>(e.outer)];
                for (int k = 0; k < 3; ++k)
                    if (o.v[static_cast<std::size_t>(k)] != e.a && o.v[static_cast<std::size_t>(k)] != e.b)
                        o.nb[static_cast<std::size_t>(k)] = id;
            }
        }
        // new triangle (pi, a, b): the edge (b, pi) is shared with the one starting at b,
        // and that triangle's edge (pi, b) is shared back with this one
        for (std::size_t id = first_new; id < tris.size(); ++id) tris[id].nb[1] = starting_at.at(tris[id].v[2]);
        for (std::size_t id = first_new; id < tris.size(); ++id) {
            const auto nb1 = tris[id].nb[1];
            tris[static_cast<std::size_t>(nb1)].nb[2] = static_cast<std::ptrdiff_t>(id);
        }
        for (auto c : cavity) {
            tris[static_cast<std::size_t>(c)].alive = false;
            in_cavity[static_cast<std::size_t>(c)] = 0;
        }
        last = static_cast<std::ptrdiff_t>(tris.size()) - 1;
    }

    std::vector<Triangle> out;
    for (const auto& t : tris)
        if (t.alive && t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back({t.v});
    detail::fill_hull_pockets(input, out);
    return out;
}

inline double circumradius(const Point& a, const Point& b, const Point& c) {
    const double ab = std::hypot(a.x - b.x, a.y - b.y);
    const double bc = std::hypot(b.x - c.x, b.y - c.y);
    const double ca = std::hypot(c.x - a.x, c.y - a.y);
    const double area2 = std::abs(cross(a, b, c));
    if (area2 <= 0.0) return std::numeric_limits<double>::infinity();
    return ab * bc * ca / (2.0 * area2);
}

// ---- alpha shapes ------------------------------------------------------------

struct AlphaShape {
    std::vector<Region> regions;
    double alpha = 0.0;
    bool degenerate = false; // fewer than 3 distinct or collinear points
    double area() const {
        double a = 0.0;
        for (const auto& r : regions) a += region_area(r);
        return a;
    }
};

namespace detail {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

inline std::uint64_t edge_key(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Rings from the one-sided edges of the kept triangles. At a vertex with
// several outgoing edges the walk takes the first one counterclockwise from
// the reversed incoming edge, which keeps it on the same uncovered side, so
// touching rings come out separately.
inline std::vector<std::vector<std::size_t>> trace_rings(const std::vector<Point>& pts, const std::vector<Triangle>& tris) {
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& t : tris)
        for (int e = 0; e < 3; ++e) ++count[edge_key(t.v[static_cast<std::size_t>(e)], t.v[static_cast<std::size_t>((e + 1) % 3)])];
    std::unordered_map<std::size_t, std::vector<std::size_t>> out_edges;
    std::vector<std::pair<std::size_t, std::size_t>> directed;
    for (const auto& t : tris)
        for (int e = 0; e < 3; ++e) {
            const auto a = t.v[static_cast<std::size_t>(e)], b = t.v[static_cast<std::size_t>((e + 1) % 3)];
            if (count[edge_key(a, b)] == 1) {
                out_edges[a].push_back(b);
                directed.emplace_back(a, b);
            }
        }
    std::sort(directed.begin(), directed.end());
    std::unordered_map<std::uint64_t, char> used;
    auto key = [](std::size_t a, std::size_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
    std::vector<std::vector<std::size_t>> rings;
    for (const auto& [a0, b0] : directed) {
        if (used[key(a0, b0)]) continue;
        std::vector<std::size_t> ring{a0};
        std::size_t a = a0, b = b0;
        used[key(a, b)] = 1;
        while (b != a0) {
            ring.push_back(b);
            const auto& cand = out_edges[b];
            std::size_t next = cand.front();
            if (cand.size() > 1) {
                const double back = std::atan2(pts[a].y - pts[b].y, pts[a].x - pts[b].x);
                double best = std::numeric_limits<double>::infinity();
                for (auto c : cand) {
                    if (used[key(b, c)]) continue;
                    double ang = std::atan2(pts[c].y - pts[b].y, pts[c].x - pts[b].x) - back;
                    while (ang <= 0.0) ang += 2.0 * M_PI;
                    while (ang > 2.0 * M_PI) ang -= 2.0 * M_PI;
                    if (ang < best) {
                        best = ang;
                        next = c;
                    }
                }
            }
            if (used[key(b, next)]) break; // malformed boundary
            used[key(b, next)] = 1;
            a = b;
            b = next;
        }
        if (ring.size() >= 3) rings.push_back(std::move(ring));
    }
    return rings;
}

inline bool point_in_ring(const Point& p, const std::vector<Point>& ring) {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const auto& a = ring[i];
        const auto& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

} // namespace detail

/// Tightest single-region alpha shape: the smallest circumradius threshold
/// whose kept Delaunay triangles are edge-connected and touch every point.
inline AlphaShape alpha_shape(std::vector<Point> pts) {
    AlphaShape shape;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    bool collinear = true;
    for (std::size_t i = 2; i < pts.size() && collinear; ++i) collinear = cross(pts[0], pts[1], pts[i]) == 0.0;
    if (pts.size() < 3 || collinear) {
        shape.degenerate = true;
        return shape;
    }
    auto tris = delaunay(pts);
    std::vector<double> radius(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t)
        radius[t] = circumradius(pts[tris[t].v[0]], pts[tris[t].v[1]], pts[tris[t].v[2]]);
    std::vector<std::size_t> order(tris.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });

    // kept = first m triangles in radius order, extended over equal radii
    auto valid = [&](std::size_t m) {
        std::vector<char> touched(pts.size(), 0);
        detail::DisjointSet ds(m);
        std::unordered_map<std::uint64_t, std::size_t> owner;
        for (std::size_t r = 0; r < m; ++r) {
            const auto& t = tris[order[r]];
            for (int e = 0; e < 3; ++e) {
                touched[t.v[static_cast<std::size_t>(e)]] = 1;
                const auto k = detail::edge_key(t.v[static_cast<std::size_t>(e)], t.v[static_cast<std::size_t>((e + 1) % 3)]);
                auto [it, fresh] = owner.emplace(k, r);
                if (!fresh) ds.join(it->second, r);
            }
        }
        if (std::find(touched.begin(), touched.end(), 0) != touched.end()) return false;
        for (std::size_t r = 1; r < m; ++r)
            if (ds.find(r) != ds.find(0)) return false;
        return m > 0;
    };
    auto extend = [&](std::size_t m) {
        while (m < order.size() && m > 0 && radius[order[m]] == radius[order[m - 1]]) ++m;
        return m;
    };
    std::size_t lo = 1, hi = order.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (valid(extend(mid))) hi = mid;
        else lo = mid + 1;
    }
    const std::size_t m = extend(lo);
    shape.alpha = m > 0 ? radius[order[m - 1]] : 0.0;
    std::vector<Triangle> kept;
    for (std::size_t r = 0; r < m; ++r) kept.push_back(tris[order[r]]);

    std::vector<Polygon> outers, holes;
    for (const auto& ring : detail::trace_rings(pts, kept)) {
        Polygon poly;
        for (auto i : ring) poly.vertices.push_back(pts[i]);
        (signed_area(poly.vertices) > 0.0 ? outers : holes).push_back(std::move(poly));
    }
    for (auto& o : outers) shape.regions.push_back({std::move(o), {}});
    for (auto& h : holes) {
        // attach to the smallest enclosing outer ring, tested at the hole's centroid-adjacent vertex midpoint
        const Point probe{0.5 * (h.vertices[0].x + h.vertices[1].x), 0.5 * (h.vertices[0].y + h.vertices[1].y)};
        std::ptrdiff_t best = -1;
        double best_area = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < shape.regions.size(); ++r) {
            const double a = signed_area(shape.regions[r].outer.vertices);
            if (a < best_area && detail::point_in_ring(probe, shape.regions[r].outer.vertices)) {
                best_area = a;
                best = static_cast<std::ptrdiff_t>(r);
            }
        }
        if (best >= 0) shape.regions[static_cast<std::size_t>(best)].holes.push_back(std::move(h));
    }
    return shape;
}

// ---- polygon union -----------------------------------------------------------

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, false, false>; // counterclockwise, open
using BMultiPolygon = bg::model::multi_polygon<BPolygon>;

inline BPolygon to_boost(const Region& r) {
    BPolygon p;
    for (const auto& v : r.outer.vertices) bg::append(p.outer(), BPoint(v.x, v.y));
    for (const auto& h : r.holes) {
        p.inners().emplace_back();
        for (const auto& v : h.vertices) p.inners().back().push_back(BPoint(v.x, v.y));
    }
    bg::correct(p);
    return p;
}

inline std::vector<Region> from_boost(const BMultiPolygon& mp) {
    std::vector<Region> out;
    for (const auto& p : mp) {
        Region r;
        for (const auto& v : p.outer()) r.outer.vertices.push_back({v.x(), v.y()});
        for (const auto& in : p.inners()) {
            Polygon h;
            for (const auto& v : in) h.vertices.push_back({v.x(), v.y()});
            r.holes.push_back(std::move(h));
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Union of regions; overlapping parts are counted once.
inline std::vector<Region> union_regions(const std::vector<Region>& regions) {
    BMultiPolygon acc;
    for (const auto& r : regions) {
        BMultiPolygon next;
        bg::union_(acc, to_boost(r), next);
        acc = std::move(next);
    }
    return from_boost(acc);
}

inline double total_area(const std::vector<Region>& regions) {
    double a = 0.0;
    for (const auto& r : regions) a += region_area(r);
    return a;
}

} // namespace isa::geometry

#endif // ISA_GEOMETRY_HPP
