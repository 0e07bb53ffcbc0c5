#include "dumbbell/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dumbbell/errors.hpp"

namespace dumbbell {

namespace {

// 12-band diverging colormap, low to high.
const char* kBandColors[12] = {"#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#f7fbff",
                               "#fee090", "#fdae61", "#f46d43", "#d73027", "#a50026", "#67001f"};

struct Mapper {
    double x0, y1, scale;
    double map_x(double x) const { return (x - x0) * scale; }
    double map_y(double y) const { return (y1 - y) * scale; }
};

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Clip a triangle with linear vertex values to the band [lo, hi].
std::vector<Vec2> clip_band(std::array<Vec2, 3> pts, std::array<double, 3> vals, double lo,
                            double hi) {
    std::vector<std::pair<Vec2, double>> poly;
    for (int i = 0; i < 3; ++i) poly.push_back({pts[i], vals[i]});
    auto clip = [&](double level, int keep_sign) {
        std::vector<std::pair<Vec2, double>> out;
        std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            auto [pa, va] = poly[i];
            auto [pb, vb] = poly[(i + 1) % n];
            bool ina = keep_sign * (va - level) >= 0;
            bool inb = keep_sign * (vb - level) >= 0;
            if (ina) out.push_back({pa, va});
            if (ina != inb && va != vb) {
                double t = (level - va) / (vb - va);
                out.push_back({pa + (pb - pa) * t, level});
            }
        }
        poly = std::move(out);
    };
    clip(lo, 1);
    if (!poly.empty()) clip(hi, -1);
    std::vector<Vec2> out;
    for (const auto& [p, v] : poly) out.push_back(p);
    return out;
}

} // namespace

std::string render_svg(const PolygonDomain& outline, const Mesh* mesh, const Eigen::VectorXd* u,
                       const NodalPath* nodal, const SubregionLayout* layout,
                       const SvgStyle& style) {
    auto bb = outline.bbox();
    double margin = 0.05 * std::max(bb[1].x - bb[0].x, bb[1].y - bb[0].y);
    double x0 = bb[0].x - margin, x1 = bb[1].x + margin;
    double y0 = bb[0].y - margin, y1 = bb[1].y + margin;
    double scale = style.width_px / (x1 - x0);
    int height = static_cast<int>(std::ceil((y1 - y0) * scale));
    Mapper map{x0, y1, scale};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width_px
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << style.width_px << " " << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (mesh != nullptr && u != nullptr) {
        if (static_cast<std::size_t>(u->size()) != mesh->vertices.size())
            throw Error("field length does not match the mesh");
        double umin = u->minCoeff(), umax = u->maxCoeff();
        if (umax <= umin) umax = umin + 1.0;
        int nb = std::max(1, std::min(style.bands, 12));
        for (int b = 0; b < nb; ++b) {
            double lo = umin + (umax - umin) * b / nb;
            double hi = umin + (umax - umin) * (b + 1) / nb;
            if (b == 0) lo -= 1e-12 * (umax - umin) + 1e-300;
            if (b == nb - 1) hi += 1e-12 * (umax - umin) + 1e-300;
            svg << "<g fill=\"" << kBandColors[b * 12 / nb] << "\" stroke=\"none\">\n";
            for (const auto& tri : mesh->triangles) {
                std::array<Vec2, 3> pts{mesh->vertices[tri[0]], mesh->vertices[tri[1]],
                                        mesh->vertices[tri[2]]};
                std::array<double, 3> vals{(*u)[tri[0]], (*u)[tri[1]], (*u)[tri[2]]};
                double vmin = std::min({vals[0], vals[1], vals[2]});
                double vmax = std::max({vals[0], vals[1], vals[2]});
                if (vmax < lo || vmin > hi) continue;
                auto poly = clip_band(pts, vals, lo, hi);
                if (poly.size() < 3) continue;
                svg << "<polygon points=\"";
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    if (i) svg << " ";
                    svg << coord(map.map_x(poly[i].x)) << "," << coord(map.map_y(poly[i].y));
                }
                svg << "\"/>\n";
            }
            svg << "</g>\n";
        }
    }

    if (mesh != nullptr && style.draw_mesh) {
        svg << "<g stroke=\"#cccccc\" stroke-width=\"0.5\" fill=\"none\">\n";
        for (const auto& tri : mesh->triangles) {
            svg << "<polygon points=\"";
            for (int j = 0; j < 3; ++j) {
                if (j) svg << " ";
                svg << coord(map.map_x(mesh->vertices[tri[j]].x)) << ","
                    << coord(map.map_y(mesh->vertices[tri[j]].y));
            }
            svg << "\"/>\n";
        }
        svg << "</g>\n";
    }

    // domain outline
    for (const Ring& ring : outline.rings) {
        svg << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"";
        for (std::size_t i = 0; i < ring.pts.size(); ++i)
            svg << (i == 0 ? "M" : "L") << coord(map.map_x(ring.pts[i].x)) << " "
                << coord(map.map_y(ring.pts[i].y));
        svg << "Z\"/>\n";
    }

    if (layout != nullptr) {
        for (const auto* arc : {&layout->s1, &layout->s2}) {
            svg << "<path fill=\"none\" stroke=\"#555555\" stroke-width=\"1\" "
                   "stroke-dasharray=\"6,4\" d=\"";
            for (std::size_t i = 0; i < arc->size(); ++i)
                svg << (i == 0 ? "M" : "L") << coord(map.map_x((*arc)[i].x)) << " "
                    << coord(map.map_y((*arc)[i].y));
            svg << "\"/>\n";
        }
    }

    if (nodal != nullptr) {
        for (const auto& comp : nodal->components) {
            if (comp.pts.empty()) continue;
            svg << "<path fill=\"none\" stroke=\"black\" stroke-width=\"2\" d=\"";
            for (std::size_t i = 0; i < comp.pts.size(); ++i)
                svg << (i == 0 ? "M" : "L") << coord(map.map_x(comp.pts[i].x)) << " "
                    << coord(map.map_y(comp.pts[i].y));
            if (comp.closed) svg << "Z";
            svg << "\"/>\n";
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace dumbbell
