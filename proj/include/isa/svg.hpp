#ifndef ISA_SVG_HPP
#define ISA_SVG_HPP

#include "isa/common.hpp"
#include "isa/geometry.hpp"
#include "isa/pilot.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace isa::svg {

struct Overlay {
    std::optional<geometry::Polygon> boundary;
    std::vector<geometry::Region> footprints;
};

struct Style {
    int size = 640;
    int margin = 60;
    double radius = 3.0;
};

inline constexpr std::array<int, 3> low_colour{215, 48, 39};   // red
inline constexpr std::array<int, 3> high_colour{69, 117, 180}; // blue

/// Linear red to blue ramp for t in [0, 1].
inline std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    char buf[8];
    int c[3];
    for (int i = 0; i < 3; ++i)
        c[i] = static_cast<int>(std::lround(low_colour[static_cast<std::size_t>(i)] +
                                            t * (high_colour[static_cast<std::size_t>(i)] - low_colour[static_cast<std::size_t>(i)])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

} // namespace detail

/// Scatter plot of the instance space; `t` holds one colour position per point.
inline std::string render(const Matrix& coords, const std::vector<double>& t, const std::string& title,
                          const Overlay& overlay = {}, const Style& style = {}) {
    double x0 = coords.rows() ? coords.col(0).minCoeff() : -1.0, x1 = coords.rows() ? coords.col(0).maxCoeff() : 1.0;
    double y0 = coords.rows() ? coords.col(1).minCoeff() : -1.0, y1 = coords.rows() ? coords.col(1).maxCoeff() : 1.0;
    if (overlay.boundary)
        for (const auto& p : overlay.boundary->vertices) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    if (!(x1 > x0)) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if (!(y1 > y0)) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double inner = style.size - 2.0 * style.margin;
    auto px = [&](double x) { return style.margin + (x - x0) / (x1 - x0) * inner; };
    auto py = [&](double y) { return style.size - style.margin - (y - y0) / (y1 - y0) * inner; };
    using detail::num;

    std::string s;
    const std::string sz = std::to_string(style.size);
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + sz + "\" height=\"" + sz + "\" viewBox=\"0 0 " + sz + " " +
         sz + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(style.size / 2.0) + "\" y=\"" + num(style.margin / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + detail::escape(title) + "</text>\n";
    // axes
    const double left = style.margin, bottom = style.size - style.margin, right = style.size - style.margin,
                 top = style.margin;
    s += "<g stroke=\"black\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) + "\" y2=\"" + num(bottom) + "\"/>\n";
    s += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top) + "\"/>\n";
    s += "</g>\n";
    s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(bottom + 40) + "\" text-anchor=\"middle\">z1</text>\n";
    s += "<text x=\"" + num(left - 40) + "\" y=\"" + num((top + bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
         num(left - 40) + " " + num((top + bottom) / 2) + ")\">z2</text>\n";
    s += "<text x=\"" + num(left) + "\" y=\"" + num(bottom + 18) + "\" text-anchor=\"middle\">" + num(x0) + "</text>\n";
    s += "<text x=\"" + num(right) + "\" y=\"" + num(bottom + 18) + "\" text-anchor=\"middle\">" + num(x1) + "</text>\n";
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(bottom) + "\" text-anchor=\"end\">" + num(y0) + "</text>\n";
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top) + "\" text-anchor=\"end\">" + num(y1) + "</text>\n";
    s += "</g>\n";

    auto ring_path = [&](const std::vector<geometry::Point>& ring) {
        std::string d;
        for (std::size_t i = 0; i < ring.size(); ++i)
            d += (i ? " L " : "M ") + num(px(ring[i].x)) + " " + num(py(ring[i].y));
        return d + " Z";
    };
    s += "<g>\n";
    for (Eigen::Index i = 0; i < coords.rows(); ++i)
        s += "<circle cx=\"" + num(px(coords(i, 0))) + "\" cy=\"" + num(py(coords(i, 1))) + "\" r=\"" + num(style.radius) +
             "\" fill=\"" + ramp(t[static_cast<std::size_t>(i)]) + "\"/>\n";
    s += "</g>\n";
    if (overlay.boundary)
        s += "<path d=\"" + ring_path(overlay.boundary->vertices) +
             "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    for (const auto& r : overlay.footprints) {
        std::string d = ring_path(r.outer.vertices);
        for (const auto& h : r.holes) d += " " + ring_path(h.vertices);
        s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#1a9641\" stroke-width=\"1.5\" fill-rule=\"evenodd\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Colour positions for a feature column: min maps to red, max to blue, a
/// constant column sits mid-scale.
inline std::vector<double> scale_values(const Vector& v) {
    std::vector<double> t(static_cast<std::size_t>(v.size()), 0.5);
    if (v.size() == 0) return t;
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    if (hi > lo)
        for (Eigen::Index i = 0; i < v.size(); ++i) t[static_cast<std::size_t>(i)] = (v(i) - lo) / (hi - lo);
    return t;
}

/// Renders the space coloured by one of its features, or by "outcome"
/// (Safe red, Unsafe blue).
inline std::string render_svg(const pilot::InstanceSpace& space, const std::string& colour_by, const Overlay& overlay = {}) {
    std::vector<double> t;
    if (colour_by == "outcome") {
        for (auto o : space.outcomes) t.push_back(o == Outcome::Unsafe ? 1.0 : 0.0);
    } else {
        auto it = std::find(space.feature_names.begin(), space.feature_names.end(), colour_by);
        if (it == space.feature_names.end()) throw Error(ErrorCode::UnknownFeature, "cannot colour by '" + colour_by + "'");
        t = scale_values(space.features.col(it - space.feature_names.begin()));
    }
    return render(space.coords, t, colour_by, overlay);
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << svg;
}

} // namespace isa::svg

#endif // ISA_SVG_HPP
