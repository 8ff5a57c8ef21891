#ifndef ISA_COVERAGE_HPP
#define ISA_COVERAGE_HPP

#include "isa/common.hpp"
#include "isa/geometry.hpp"
#include "isa/pilot.hpp"

#include "json.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <vector>

namespace isa::coverage {

using geometry::Point;
using geometry::Polygon;
using geometry::Region;

/// Percentage of the boundary area covered by footprints.
inline double coverage_percent(double area_is, double area_bound) {
    if (!(area_bound > 0.0)) throw Error(ErrorCode::DegenerateBoundary, "boundary polygon has zero area");
    return 100.0 * area_is / area_bound;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct Footprint {
    int cluster = 0;
    std::size_t size = 0;
    double alpha = 0.0;
    double area = 0.0;
    bool degenerate = false;
    std::vector<Region> regions;
};

struct CoverageReport {
    double area_is = 0.0;
    double area_bound = 0.0;
    double coverage_percent = 0.0;
    Polygon boundary;
    std::size_t boundary_vertices = 0;
    std::size_t eliminated_vertices = 0;
    std::vector<Footprint> footprints;
    std::vector<Region> covered; // union of all footprints
    geometry::DbscanParams dbscan;
    std::size_t noise = 0;

    nlohmann::json to_json() const {
        auto ring = [](const std::vector<Point>& v) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& p : v) a.push_back({p.x, p.y});
            return a;
        };
        auto regions = [&](const std::vector<Region>& rs) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& r : rs) {
                nlohmann::json holes = nlohmann::json::array();
                for (const auto& h : r.holes) holes.push_back(ring(h.vertices));
                a.push_back({{"outer", ring(r.outer.vertices)}, {"holes", holes}});
            }
            return a;
        };
        nlohmann::json fps = nlohmann::json::array();
        for (const auto& f : footprints)
            fps.push_back({{"cluster", f.cluster},
                           {"size", f.size},
                           {"alpha", f.alpha},
                           {"area", f.area},
                           {"degenerate", f.degenerate},
                           {"regions", regions(f.regions)}});
        return {{"area_IS", area_is},
                {"area_bound", area_bound},
                {"coverage_percent", round2(coverage_percent)},
                {"coverage_percent_unrounded", coverage_percent},
                {"boundary", ring(boundary.vertices)},
                {"boundary_vertices", boundary_vertices},
                {"eliminated_vertices", eliminated_vertices},
                {"dbscan", {{"k", dbscan.k}, {"eps", dbscan.eps}}},
                {"noise", noise},
                {"footprints", fps},
                {"covered", regions(covered)}};
    }
};

struct CoverageOptions {
    double theta_strong = 0.7;
    std::optional<geometry::DbscanParams> dbscan; // automatic when empty
};

/// Per-feature bounds of the standardized instances.
inline std::pair<Vector, Vector> feature_bounds(const Matrix& features) {
    return {features.colwise().maxCoeff().transpose(), features.colwise().minCoeff().transpose()};
}

inline std::vector<Point> points_of(const Matrix& coords) {
    std::vector<Point> pts(static_cast<std::size_t>(coords.rows()));
    for (Eigen::Index i = 0; i < coords.rows(); ++i) pts[static_cast<std::size_t>(i)] = {coords(i, 0), coords(i, 1)};
    return pts;
}

/// Footprints of the dense regions of a point set (no boundary involved).
inline std::vector<Footprint> footprints(const std::vector<Point>& pts, const geometry::DbscanParams& params,
                                         std::size_t* noise_count = nullptr) {
    const auto labels = geometry::dbscan(pts, params.k, params.eps);
    std::map<int, std::vector<Point>> clusters;
    std::size_t noise = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (labels[i] == geometry::noise) ++noise;
        else clusters[labels[i]].push_back(pts[i]);
    }
    if (noise_count) *noise_count = noise;
    std::vector<Footprint> out;
    for (auto& [id, members] : clusters) out.push_back({id, members.size(), 0.0, 0.0, false, {}});
    parallel_for(out.size(), [&](std::size_t c) {
        const auto& members = clusters.at(out[c].cluster);
        if (members.size() < 3) {
            out[c].degenerate = true;
            return;
        }
        auto shape = geometry::alpha_shape(members);
        out[c].alpha = shape.alpha;
        out[c].degenerate = shape.degenerate;
        out[c].area = shape.area();
        out[c].regions = std::move(shape.regions);
    });
    return out;
}

inline CoverageReport compute_coverage(const pilot::InstanceSpace& space, const pilot::ProjectionModel& model,
                                       const Vector& upper, const Vector& lower, const Matrix& rho,
                                       const CoverageOptions& opt = {}) {
    if (space.size() < 3) throw Error(ErrorCode::InvalidArgument, "coverage needs at least 3 instances");
    CoverageReport rep;
    const auto boundary = geometry::build_boundary(upper, lower, rho, opt.theta_strong);
    rep.boundary_vertices = boundary.vertices.size();
    rep.eliminated_vertices = boundary.eliminated.size();
    std::vector<Point> corners;
    for (auto v : boundary.vertices) {
        const Vector z = model.A * boundary.vertex_values(v);
        corners.push_back({z(0), z(1)});
    }
    try {
        rep.boundary = geometry::convex_hull(corners);
    } catch (const Error&) {
        throw Error(ErrorCode::DegenerateBoundary, std::to_string(corners.size()) +
                                                       " surviving boundary vertices do not enclose an area");
    }
    rep.area_bound = std::abs(geometry::signed_area(rep.boundary.vertices));
    if (!(rep.area_bound > 0.0)) throw Error(ErrorCode::DegenerateBoundary, "boundary polygon has zero area");

    const auto pts = points_of(space.coords);
    if (opt.dbscan) {
        rep.dbscan = *opt.dbscan;
    } else {
        const double r1 = space.coords.col(0).maxCoeff() - space.coords.col(0).minCoeff();
        const double r2 = space.coords.col(1).maxCoeff() - space.coords.col(1).minCoeff();
        rep.dbscan = geometry::dbscan_params(pts.size(), r1, r2);
        if (!(rep.dbscan.eps > 0.0))
            throw Error(ErrorCode::DegenerateBoundary, "instances span no area, so DBSCAN radius is zero");
    }
    rep.footprints = footprints(pts, rep.dbscan, &rep.noise);
    std::vector<Region> all;
    for (const auto& f : rep.footprints) all.insert(all.end(), f.regions.begin(), f.regions.end());
    rep.covered = geometry::union_regions(all);
    rep.area_is = geometry::total_area(rep.covered);
    rep.coverage_percent = coverage_percent(rep.area_is, rep.area_bound);
    return rep;
}

/// Convenience form using the space's own feature bounds.
inline CoverageReport compute_coverage(const pilot::InstanceSpace& space, const pilot::ProjectionModel& model,
                                       const Matrix& rho, const CoverageOptions& opt = {}) {
    const auto [upper, lower] = feature_bounds(space.features);
    return compute_coverage(space, model, upper, lower, rho, opt);
}

} // namespace isa::coverage

#endif // ISA_COVERAGE_HPP
