#include "dumbbell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dumbbell {

// ---- Mesh helpers ----

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

Vec2 Mesh::centroid(int t) const {
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::total_area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(static_cast<int>(t));
    return a;
}

int Mesh::euler_characteristic() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(triangles.size() * 3);
    for (const auto& tri : triangles)
        for (int j = 0; j < 3; ++j) {
            int a = tri[j], b = tri[(j + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(triangles.size());
}

std::vector<char> Mesh::boundary_vertex_mask() const {
    std::vector<char> mask(vertices.size(), 0);
    for (const auto& e : boundary_edges) {
        mask[e.a] = 1;
        mask[e.b] = 1;
    }
    return mask;
}

namespace {

// d strictly inside the circumcircle of CCW (a, b, c) iff > 0.
long double incircle_det(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
    long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
    long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
    long double ad = adx * adx + ady * ady;
    long double bd = bdx * bdx + bdy * bdy;
    long double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Vec2 circumcenter_of(const Vec2& a, const Vec2& b, const Vec2& c) {
    long double ax = a.x, ay = a.y, bx = b.x, by = b.y, cx = c.x, cy = c.y;
    long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if (d == 0.0L) return (a + b + c) / 3.0;
    long double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    return {static_cast<double>(ux), static_cast<double>(uy)};
}

bool point_in_rings_local(const Vec2& p, const std::vector<Ring>& rings) {
    bool inside = false;
    for (const Ring& ring : rings) {
        std::size_t n = ring.pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = ring.pts[i];
            const Vec2& b = ring.pts[(i + 1) % n];
            if ((a.y > p.y) != (b.y > p.y)) {
                double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (p.x < xint) inside = !inside;
            }
        }
    }
    return inside;
}

struct MTri {
    std::array<int, 3> v{};                      // CCW; edge j is opposite v[j]
    std::array<int, 3> nbr{-1, -1, -1};
    std::array<char, 3> seg{0, 0, 0};            // constrained edge flags
    std::array<EdgeMarker, 3> mark{EdgeMarker::Outer, EdgeMarker::Outer, EdgeMarker::Outer};
    bool alive = true;
};

class Triangulator {
public:
    Triangulator(const PolygonDomain& domain, const MeshOptions& opts)
        : domain_(domain), opts_(opts) {
        auto bb = domain.bbox();
        diag_ = dist(bb[0], bb[1]);
        orient_tol_ = 1e-12 * diag_ * diag_;
        if (!opts_.size_field) {
            double h = opts_.h_max;
            opts_.size_field = [h](const Vec2&) { return h; };
        }
    }

    Mesh run();

private:
    const PolygonDomain& domain_;
    MeshOptions opts_;
    double diag_ = 0.0;
    double orient_tol_ = 0.0;

    std::vector<Vec2> pts_;
    std::vector<MTri> tris_;
    std::vector<int> v2t_;
    int last_tri_ = 0;

    struct Constraint {
        int a, b;
        EdgeMarker mark;
    };
    std::vector<Constraint> constraints_;

    int add_point(const Vec2& p) {
        pts_.push_back(p);
        v2t_.push_back(-1);
        return static_cast<int>(pts_.size()) - 1;
    }

    int new_tri(int a, int b, int c) {
        MTri t;
        t.v = {a, b, c};
        tris_.push_back(t);
        int id = static_cast<int>(tris_.size()) - 1;
        v2t_[a] = v2t_[b] = v2t_[c] = id;
        return id;
    }

    int local_index(int t, int v) const {
        for (int j = 0; j < 3; ++j)
            if (tris_[t].v[j] == v) return j;
        throw MeshError("vertex not in triangle");
    }

    void link(int t, int j, int n) {
        tris_[t].nbr[j] = n;
        if (n >= 0) {
            for (int k = 0; k < 3; ++k) {
                int a = tris_[t].v[(j + 1) % 3], b = tris_[t].v[(j + 2) % 3];
                int na = tris_[n].v[(k + 1) % 3], nb = tris_[n].v[(k + 2) % 3];
                if ((na == a && nb == b) || (na == b && nb == a)) {
                    tris_[n].nbr[k] = t;
                    return;
                }
            }
            throw MeshError("neighbor link mismatch");
        }
    }

    // --- point location ---

    // Walks toward p; returns the containing triangle, with on_edge set to the
    // local edge index when p lies on an edge (within tolerance), else -1.
    int locate(const Vec2& p, int hint, int& on_edge) {
        int t = hint;
        if (t < 0 || !tris_[t].alive)
            for (std::size_t i = 0; i < tris_.size(); ++i)
                if (tris_[i].alive) { t = static_cast<int>(i); break; }
        std::size_t guard = tris_.size() * 4 + 64;
        while (guard--) {
            double worst = -orient_tol_;
            int cross = -1;
            std::array<double, 3> o{};
            for (int j = 0; j < 3; ++j) {
                const Vec2& a = pts_[tris_[t].v[(j + 1) % 3]];
                const Vec2& b = pts_[tris_[t].v[(j + 2) % 3]];
                o[j] = orient2d(a, b, p);
                if (o[j] < worst) {
                    worst = o[j];
                    cross = j;
                }
            }
            if (cross < 0) {
                on_edge = -1;
                double best = orient_tol_;
                for (int j = 0; j < 3; ++j)
                    if (std::abs(o[j]) < best) {
                        best = std::abs(o[j]);
                        on_edge = j;
                    }
                return t;
            }
            int n = tris_[t].nbr[cross];
            if (n < 0 || !tris_[n].alive) throw MeshError("point location left the triangulation");
            t = n;
        }
        throw MeshError("point location did not terminate");
    }

    // --- Bowyer-Watson insertion ---

    // Inserts vertex vid located in triangle t0 (on edge on_edge if >= 0).
    // When the insertion point lies on a constrained or boundary edge, the two
    // derived subsegments inherit (seg_mark) and the caller passes split_seg.
    void insert_vertex(int vid, int t0, int on_edge, bool split_seg = false,
                       EdgeMarker seg_mark = EdgeMarker::Outer) {
        const Vec2& p = pts_[vid];
        int su = -1, sw = -1;  // endpoints of the split edge
        std::vector<int> cavity;
        std::vector<char> in_cavity(tris_.size(), 0);
        auto push_cavity = [&](int t) {
            cavity.push_back(t);
            in_cavity[t] = 1;
        };
        push_cavity(t0);
        if (on_edge >= 0) {
            su = tris_[t0].v[(on_edge + 1) % 3];
            sw = tris_[t0].v[(on_edge + 2) % 3];
            int n = tris_[t0].nbr[on_edge];
            if (tris_[t0].seg[on_edge]) {
                if (!split_seg) throw MeshError("unexpected insertion on a constrained edge");
                if (n >= 0 && tris_[n].alive) push_cavity(n);
            } else if (n >= 0 && tris_[n].alive) {
                push_cavity(n);
            }
        } else if (split_seg) {
            throw MeshError("split insertion not on an edge");
        }

        // Grow across non-constrained edges into circumcircles containing p.
        for (std::size_t k = 0; k < cavity.size(); ++k) {
            int t = cavity[k];
            for (int j = 0; j < 3; ++j) {
                if (tris_[t].seg[j]) continue;
                int n = tris_[t].nbr[j];
                if (n < 0 || !tris_[n].alive || in_cavity[n]) continue;
                const auto& nv = tris_[n].v;
                if (incircle_det(pts_[nv[0]], pts_[nv[1]], pts_[nv[2]], p) > 0) push_cavity(n);
            }
        }

        struct Border {
            int a, b, out;
            char seg;
            EdgeMarker mark;
        };
        std::vector<Border> border;
        for (int t : cavity) {
            for (int j = 0; j < 3; ++j) {
                int n = tris_[t].nbr[j];
                if (n >= 0 && tris_[n].alive && in_cavity[n]) continue;
                int a = tris_[t].v[(j + 1) % 3], b = tris_[t].v[(j + 2) % 3];
                if (split_seg && ((a == su && b == sw) || (a == sw && b == su))) continue;
                border.push_back({a, b, n, tris_[t].seg[j], tris_[t].mark[j]});
            }
        }
        for (const Border& e : border)
            if (orient2d(pts_[e.a], pts_[e.b], p) <= 0)
                throw MeshError("insertion cavity is not star-shaped");

        for (int t : cavity) tris_[t].alive = false;

        // Fan the border; side edges link up via the shared-edge map.
        std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> open_sides;
        auto find_side = [&open_sides](int a, int b) -> std::pair<int, int>* {
            for (auto& s : open_sides)
                if (s.first == std::make_pair(std::min(a, b), std::max(a, b))) return &s.second;
            return nullptr;
        };
        std::vector<int> created;
        for (const Border& e : border) {
            int t = new_tri(vid, e.a, e.b);
            created.push_back(t);
            tris_[t].seg[0] = e.seg;
            tris_[t].mark[0] = e.mark;
            link(t, 0, (e.out >= 0 && tris_[e.out].alive) ? e.out : -1);
            for (int j = 1; j < 3; ++j) {
                int a = tris_[t].v[(j + 1) % 3], b = tris_[t].v[(j + 2) % 3];
                if (auto* other = find_side(a, b)) {
                    link(t, j, other->first);
                } else {
                    open_sides.push_back({{std::min(a, b), std::max(a, b)}, {t, j}});
                }
            }
        }
        // Any side edge left unmatched must be a half of the split segment on
        // the domain boundary.
        for (int t : created) {
            for (int j = 1; j < 3; ++j) {
                int a = tris_[t].v[(j + 1) % 3], b = tris_[t].v[(j + 2) % 3];
                if (tris_[t].nbr[j] < 0) {
                    if (!split_seg) throw MeshError("dangling fan edge");
                    bool is_half = (a == vid || b == vid) &&
                                   (a == su || b == su || a == sw || b == sw);
                    if (!is_half) throw MeshError("dangling fan edge off the split segment");
                    tris_[t].seg[j] = 1;
                    tris_[t].mark[j] = seg_mark;
                }
            }
        }
        if (split_seg) {
            // Interior split: the two halves are fan side edges shared between
            // consecutive fan triangles; mark them on both sides.
            for (int t : created)
                for (int j = 1; j < 3; ++j) {
                    int a = tris_[t].v[(j + 1) % 3], b = tris_[t].v[(j + 2) % 3];
                    bool is_half = (a == vid || b == vid) && (a == su || b == su || a == sw || b == sw);
                    if (is_half) {
                        tris_[t].seg[j] = 1;
                        tris_[t].mark[j] = seg_mark;
                    }
                }
        }
        last_tri_ = created.empty() ? last_tri_ : created.back();
    }

    // --- edge utilities ---

    // Finds a live triangle with directed edge (a -> b); returns {tri, edge}.
    std::pair<int, int> find_edge(int a, int b) const {
        int t0 = v2t_[a];
        if (t0 < 0 || !tris_[t0].alive) return {-1, -1};
        int t = t0;
        // walk around a in both directions
        for (int dir = 0; dir < 2; ++dir) {
            t = t0;
            int guard = 4096;
            while (guard--) {
                int la = -1;
                for (int j = 0; j < 3; ++j)
                    if (tris_[t].v[j] == a) la = j;
                if (la < 0) break;
                for (int j = 0; j < 3; ++j) {
                    int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];
                    if (u == a && w == b) return {t, j};
                }
                int cross = dir == 0 ? (la + 1) % 3 : (la + 2) % 3;
                int n = tris_[t].nbr[cross];
                if (n < 0 || !tris_[n].alive || n == t0) break;
                t = n;
            }
        }
        return {-1, -1};
    }

    void set_segment_flag(int a, int b, EdgeMarker mark) {
        auto [t, j] = find_edge(a, b);
        if (t < 0) throw MeshError("segment edge vanished");
        tris_[t].seg[j] = 1;
        tris_[t].mark[j] = mark;
        int n = tris_[t].nbr[j];
        if (n >= 0) {
            for (int k = 0; k < 3; ++k)
                if (tris_[n].nbr[k] == t) {
                    tris_[n].seg[k] = 1;
                    tris_[n].mark[k] = mark;
                }
        }
    }

    // Flip the shared edge j of triangle t (endpoints u,w; apexes c,d) into
    // (c,d). Caller guarantees the quad is strictly convex.
    void flip_edge(int t, int j) {
        int n = tris_[t].nbr[j];
        if (n < 0) throw MeshError("cannot flip a boundary edge");
        int jn = -1;
        for (int k = 0; k < 3; ++k)
            if (tris_[n].nbr[k] == t) jn = k;
        int c = tris_[t].v[j], d = tris_[n].v[jn];
        int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];

        int tu_n = tris_[t].nbr[(j + 2) % 3];  // edge (c,u)
        char tu_s = tris_[t].seg[(j + 2) % 3];
        EdgeMarker tu_m = tris_[t].mark[(j + 2) % 3];
        int tw_n = tris_[t].nbr[(j + 1) % 3];  // edge (w,c)
        char tw_s = tris_[t].seg[(j + 1) % 3];
        EdgeMarker tw_m = tris_[t].mark[(j + 1) % 3];
        int nu_j = -1, nw_j = -1;
        for (int k = 0; k < 3; ++k) {
            if (tris_[n].v[k] == u) nu_j = k;  // edge opposite u in n = (d-side, w)
            if (tris_[n].v[k] == w) nw_j = k;
        }
        int nu_n = tris_[n].nbr[nu_j];
        char nu_s = tris_[n].seg[nu_j];
        EdgeMarker nu_m = tris_[n].mark[nu_j];
        int nw_n = tris_[n].nbr[nw_j];
        char nw_s = tris_[n].seg[nw_j];
        EdgeMarker nw_m = tris_[n].mark[nw_j];

        // t := (c, u, d), n := (c, d, w)
        tris_[t].v = {c, u, d};
        tris_[t].seg = {nw_s, 0, tu_s};
        tris_[t].mark = {nw_m, EdgeMarker::Outer, tu_m};
        tris_[n].v = {c, d, w};
        tris_[n].seg = {nu_s, tw_s, 0};
        tris_[n].mark = {nu_m, tw_m, EdgeMarker::Outer};
        tris_[t].nbr = {-1, -1, -1};
        tris_[n].nbr = {-1, -1, -1};
        link(t, 1, n);  // shared edge (d,c)
        link(t, 0, nw_n >= 0 ? nw_n : -1);
        link(t, 2, tu_n >= 0 ? tu_n : -1);
        link(n, 0, nu_n >= 0 ? nu_n : -1);
        link(n, 1, tw_n >= 0 ? tw_n : -1);
        v2t_[c] = t;
        v2t_[u] = t;
        v2t_[d] = n;
        v2t_[w] = n;
    }

    bool is_delaunay(int t, int j) const {
        int n = tris_[t].nbr[j];
        if (n < 0 || tris_[t].seg[j]) return true;
        int jn = -1;
        for (int k = 0; k < 3; ++k)
            if (tris_[n].nbr[k] == t) jn = k;
        const Vec2& d = pts_[tris_[n].v[jn]];
        const auto& tv = tris_[t].v;
        return incircle_det(pts_[tv[0]], pts_[tv[1]], pts_[tv[2]], d) <= 0;
    }

    void restore_delaunay() {
        bool changed = true;
        int guard = 64;
        while (changed && guard--) {
            changed = false;
            for (std::size_t t = 0; t < tris_.size(); ++t) {
                if (!tris_[t].alive) continue;
                for (int j = 0; j < 3; ++j) {
                    if (tris_[t].seg[j] || tris_[t].nbr[j] < 0) continue;
                    if (!is_delaunay(static_cast<int>(t), j)) {
                        int n = tris_[t].nbr[j];
                        int jn = -1;
                        for (int k = 0; k < 3; ++k)
                            if (tris_[n].nbr[k] == static_cast<int>(t)) jn = k;
                        const Vec2& c = pts_[tris_[t].v[j]];
                        const Vec2& d = pts_[tris_[n].v[jn]];
                        const Vec2& u = pts_[tris_[t].v[(j + 1) % 3]];
                        const Vec2& w = pts_[tris_[t].v[(j + 2) % 3]];
                        if (orient2d(c, d, u) * orient2d(c, d, w) < 0) {
                            flip_edge(static_cast<int>(t), j);
                            changed = true;
                        }
                    }
                }
            }
        }
    }

    // Sloan-style recovery: flip crossing edges until (a,b) appears.
    void recover_segment(int a, int b, EdgeMarker mark) {
        for (int rounds = 0; rounds < 100000; ++rounds) {
            if (find_edge(a, b).first >= 0) {
                set_segment_flag(a, b, mark);
                return;
            }
            // Find the triangle in a's fan crossed by segment (a,b).
            int t = -1, e = -1;
            {
                int t0 = v2t_[a];
                int cur = t0;
                int guard = 8192;
                std::vector<int> fan;
                while (guard--) {
                    fan.push_back(cur);
                    int la = local_index(cur, a);
                    int n = tris_[cur].nbr[(la + 1) % 3];
                    if (n < 0 || !tris_[n].alive) break;
                    if (n == t0) break;
                    cur = n;
                }
                if (!fan.empty() && tris_[fan.back()].nbr[(local_index(fan.back(), a) + 1) % 3] != fan.front()) {
                    cur = t0;
                    guard = 8192;
                    while (guard--) {
                        int la = local_index(cur, a);
                        int n = tris_[cur].nbr[(la + 2) % 3];
                        if (n < 0 || !tris_[n].alive) break;
                        bool seen = false;
                        for (int f : fan)
                            if (f == n) seen = true;
                        if (seen) break;
                        fan.push_back(n);
                        cur = n;
                    }
                }
                for (int f : fan) {
                    int la = local_index(f, a);
                    int u = tris_[f].v[(la + 1) % 3], w = tris_[f].v[(la + 2) % 3];
                    double o1 = orient2d(pts_[a], pts_[b], pts_[u]);
                    double o2 = orient2d(pts_[a], pts_[b], pts_[w]);
                    double o3 = orient2d(pts_[u], pts_[w], pts_[a]);
                    double o4 = orient2d(pts_[u], pts_[w], pts_[b]);
                    if (o1 > 0 && o2 < 0 && o3 * o4 < 0) {
                        t = f;
                        e = la;  // crossing edge is opposite a
                        break;
                    }
                }
            }
            if (t < 0) throw MeshError("segment recovery lost the corridor");

            // March along the corridor flipping the first convex crossing edge.
            int guard = 8192;
            bool flipped = false;
            while (guard--) {
                if (tris_[t].seg[e]) throw MeshError("constraint segments cross");
                int n = tris_[t].nbr[e];
                if (n < 0) throw MeshError("segment recovery hit the hull");
                int jn = -1;
                for (int k = 0; k < 3; ++k)
                    if (tris_[n].nbr[k] == t) jn = k;
                int c = tris_[t].v[e], d = tris_[n].v[jn];
                int u = tris_[t].v[(e + 1) % 3], w = tris_[t].v[(e + 2) % 3];
                if (orient2d(pts_[c], pts_[d], pts_[u]) * orient2d(pts_[c], pts_[d], pts_[w]) < 0) {
                    flip_edge(t, e);
                    flipped = true;
                    break;
                }
                // advance: next crossing edge inside neighbor n
                int next_e = -1;
                for (int k = 0; k < 3; ++k) {
                    if (k == jn) continue;
                    int uu = tris_[n].v[(k + 1) % 3], ww = tris_[n].v[(k + 2) % 3];
                    double o1 = orient2d(pts_[a], pts_[b], pts_[uu]);
                    double o2 = orient2d(pts_[a], pts_[b], pts_[ww]);
                    double o3 = orient2d(pts_[uu], pts_[ww], pts_[a]);
                    double o4 = orient2d(pts_[uu], pts_[ww], pts_[b]);
                    if (o1 * o2 < 0 && o3 * o4 < 0) {
                        next_e = k;
                        break;
                    }
                }
                if (next_e < 0) throw MeshError("segment recovery stalled");
                t = n;
                e = next_e;
            }
            if (!flipped) throw MeshError("segment recovery did not converge");
        }
        throw MeshError("segment recovery exceeded its budget");
    }

    // --- refinement ---

    double circumradius(int t) const {
        Vec2 c = circumcenter_of(pts_[tris_[t].v[0]], pts_[tris_[t].v[1]], pts_[tris_[t].v[2]]);
        return dist(c, pts_[tris_[t].v[0]]);
    }

    double shortest_edge(int t) const {
        double s = std::numeric_limits<double>::max();
        for (int j = 0; j < 3; ++j)
            s = std::min(s, dist(pts_[tris_[t].v[(j + 1) % 3]], pts_[tris_[t].v[(j + 2) % 3]]));
        return s;
    }

    double longest_edge(int t) const {
        double s = 0.0;
        for (int j = 0; j < 3; ++j)
            s = std::max(s, dist(pts_[tris_[t].v[(j + 1) % 3]], pts_[tris_[t].v[(j + 2) % 3]]));
        return s;
    }

    Vec2 tri_centroid(int t) const {
        return (pts_[tris_[t].v[0]] + pts_[tris_[t].v[1]] + pts_[tris_[t].v[2]]) / 3.0;
    }

    bool encroached(int u, int w, const Vec2& p) const {
        return (pts_[u] - p).dot(pts_[w] - p) < 0.0;
    }

    void split_subsegment(int t, int j) {
        int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];
        EdgeMarker m = tris_[t].mark[j];
        Vec2 mid = (pts_[u] + pts_[w]) * 0.5;
        if (dist(pts_[u], pts_[w]) < 1e-5 * diag_)
            throw MeshError("refinement wants to split a vanishing segment");
        int vid = add_point(mid);
        insert_vertex(vid, t, j, true, m);
    }

    bool triangle_bad(int t, double ratio_bound) const {
        double size = opts_.size_field(tri_centroid(t));
        if (longest_edge(t) > size * (1.0 + 1e-9)) return true;
        return circumradius(t) / shortest_edge(t) > ratio_bound * (1.0 + 1e-12);
    }

    // Split every encroached subsegment; returns number of splits.
    int split_encroached() {
        int total = 0;
        bool again = true;
        while (again) {
            again = false;
            for (std::size_t t = 0; t < tris_.size(); ++t) {
                if (!tris_[t].alive) continue;
                for (int j = 0; j < 3; ++j) {
                    if (!tris_[t].seg[j]) continue;
                    // only test from the canonical (inside) side once
                    int apex = tris_[t].v[j];
                    int u = tris_[t].v[(j + 1) % 3], w = tris_[t].v[(j + 2) % 3];
                    bool enc = encroached(u, w, pts_[apex]);
                    if (!enc) {
                        int n = tris_[t].nbr[j];
                        if (n >= 0 && tris_[n].alive) {
                            int jn = -1;
                            for (int k = 0; k < 3; ++k)
                                if (tris_[n].nbr[k] == static_cast<int>(t)) jn = k;
                            enc = encroached(u, w, pts_[tris_[n].v[jn]]);
                        }
                    }
                    if (enc) {
                        split_subsegment(static_cast<int>(t), j);
                        ++total;
                        again = true;
                        check_budget();
                        break;
                    }
                }
                if (again) break;
            }
        }
        return total;
    }

    void check_budget() const {
        if (static_cast<int>(pts_.size()) > opts_.max_vertices)
            throw MeshError("refinement exceeded the vertex budget (unreachable quality?)");
    }

    // Walk from triangle t toward point c; returns {tri, on_edge} or, when a
    // constrained edge blocks the path, {-1, blocking tri * 4 + edge}.
    std::pair<int, int> walk_toward(int t, const Vec2& c) {
        std::size_t guard = tris_.size() * 4 + 64;
        while (guard--) {
            double worst = -orient_tol_;
            int cross = -1;
            std::array<double, 3> o{};
            for (int j = 0; j < 3; ++j) {
                const Vec2& a = pts_[tris_[t].v[(j + 1) % 3]];
                const Vec2& b = pts_[tris_[t].v[(j + 2) % 3]];
                o[j] = orient2d(a, b, c);
                if (o[j] < worst) {
                    worst = o[j];
                    cross = j;
                }
            }
            if (cross < 0) {
                int on_edge = -1;
                double best = orient_tol_;
                for (int j = 0; j < 3; ++j)
                    if (std::abs(o[j]) < best) {
                        best = std::abs(o[j]);
                        on_edge = j;
                    }
                return {t, on_edge};
            }
            if (tris_[t].seg[cross]) return {-1, t * 4 + cross};
            int n = tris_[t].nbr[cross];
            if (n < 0 || !tris_[n].alive) return {-1, t * 4 + cross};
            t = n;
        }
        throw MeshError("walk did not terminate");
    }

    void refine() {
        double theta = opts_.min_angle_deg * M_PI / 180.0;
        double ratio_bound = 0.5 / std::sin(theta);

        split_encroached();
        for (int round = 0; round < 1000000; ++round) {
            std::vector<int> bad;
            for (std::size_t t = 0; t < tris_.size(); ++t)
                if (tris_[t].alive && triangle_bad(static_cast<int>(t), ratio_bound))
                    bad.push_back(static_cast<int>(t));
            if (bad.empty()) return;
            bool progressed = false;
            for (int t : bad) {
                if (!tris_[t].alive || !triangle_bad(t, ratio_bound)) continue;
                Vec2 c = circumcenter_of(pts_[tris_[t].v[0]], pts_[tris_[t].v[1]], pts_[tris_[t].v[2]]);
                auto [tc, info] = walk_toward(t, c);
                if (tc < 0) {
                    split_subsegment(info / 4, info % 4);
                    progressed = true;
                    check_budget();
                    split_encroached();
                    continue;
                }
                // Reject circumcenters that would encroach a cavity-border
                // segment; split those segments instead.
                bool too_close = false;
                for (int j = 0; j < 3; ++j)
                    if (dist(c, pts_[tris_[tc].v[j]]) < 1e-9 * diag_) too_close = true;
                if (too_close) continue;
                std::vector<std::pair<int, int>> enc;
                {
                    // peek at the cavity border segments
                    std::vector<int> cav{tc};
                    std::vector<char> inc(tris_.size(), 0);
                    inc[tc] = 1;
                    if (info >= 0 && !tris_[tc].seg[info]) {
                        int n = tris_[tc].nbr[info];
                        if (n >= 0 && tris_[n].alive) {
                            cav.push_back(n);
                            inc[n] = 1;
                        }
                    }
                    for (std::size_t k = 0; k < cav.size(); ++k) {
                        int ct = cav[k];
                        for (int j = 0; j < 3; ++j) {
                            if (tris_[ct].seg[j]) continue;
                            int n = tris_[ct].nbr[j];
                            if (n < 0 || !tris_[n].alive || inc[n]) continue;
                            const auto& nv = tris_[n].v;
                            if (incircle_det(pts_[nv[0]], pts_[nv[1]], pts_[nv[2]], c) > 0) {
                                cav.push_back(n);
                                inc[n] = 1;
                            }
                        }
                    }
                    for (int ct : cav)
                        for (int j = 0; j < 3; ++j) {
                            if (!tris_[ct].seg[j]) continue;
                            int u = tris_[ct].v[(j + 1) % 3], w = tris_[ct].v[(j + 2) % 3];
                            if (encroached(u, w, c)) enc.push_back({ct, j});
                        }
                }
                if (!enc.empty()) {
                    for (auto [et, ej] : enc)
                        if (tris_[et].alive && tris_[et].seg[ej]) split_subsegment(et, ej);
                    progressed = true;
                    check_budget();
                    split_encroached();
                    continue;
                }
                if (info >= 0 && tris_[tc].seg[info]) {
                    split_subsegment(tc, info);
                } else {
                    int vid = add_point(c);
                    insert_vertex(vid, tc, info, false);
                }
                progressed = true;
                check_budget();
                split_encroached();
            }
            if (!progressed) {
                double worst = 180.0;
                Vec2 where{};
                for (std::size_t t = 0; t < tris_.size(); ++t)
                    if (tris_[t].alive && triangle_bad(static_cast<int>(t), ratio_bound)) {
                        double s = shortest_edge(static_cast<int>(t));
                        double ang = std::asin(std::min(1.0, s / (2.0 * circumradius(static_cast<int>(t))))) * 180.0 / M_PI;
                        if (ang < worst) {
                            worst = ang;
                            where = tri_centroid(static_cast<int>(t));
                        }
                    }
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "unreachable mesh quality: worst angle %.3f deg near (%.4f, %.4f)",
                              worst, where.x, where.y);
                throw MeshError(buf);
            }
        }
        throw MeshError("refinement did not terminate");
    }

    void rebuild_v2t() {
        std::fill(v2t_.begin(), v2t_.end(), -1);
        for (std::size_t t = 0; t < tris_.size(); ++t)
            if (tris_[t].alive)
                for (int j = 0; j < 3; ++j) v2t_[tris_[t].v[j]] = static_cast<int>(t);
    }

    // Interior points come from a hierarchical triangular lattice anchored at
    // the origin rather than from the refinement cascade alone. Lattice
    // coordinates are independent of the domain, so meshes of a parameter
    // family share their vertex cloud wherever the size fields agree; sweep
    // measurements (hot-spot distances, obstacle landscapes) then compare
    // fields on common sample points instead of re-randomized ones.
    void seed_interior_lattice() {
        auto bb = domain_.bbox();
        double size_min = opts_.h_max;
        {
            int probes = 64;
            for (int i = 0; i <= probes; ++i)
                for (int j = 0; j <= probes; ++j) {
                    Vec2 p{bb[0].x + (bb[1].x - bb[0].x) * i / probes,
                           bb[0].y + (bb[1].y - bb[0].y) * j / probes};
                    size_min = std::min(size_min, opts_.size_field(p));
                }
            size_min = std::max(size_min, 1e-5 * diag_);
        }
        int levels = std::max(0, static_cast<int>(std::ceil(std::log2(opts_.h_max / size_min))));

        for (int level = 0; level <= levels; ++level) {
            double s = opts_.h_max / static_cast<double>(1 << level);
            double dy = s * std::sqrt(3.0) / 2.0;
            long row_lo = static_cast<long>(std::floor(bb[0].y / dy)) - 1;
            long row_hi = static_cast<long>(std::ceil(bb[1].y / dy)) + 1;
            for (long row = row_lo; row <= row_hi; ++row) {
                double y = row * dy;
                double x_off = (row % 2 != 0) ? s / 2.0 : 0.0;
                long col_lo = static_cast<long>(std::floor((bb[0].x - x_off) / s)) - 1;
                long col_hi = static_cast<long>(std::ceil((bb[1].x - x_off) / s)) + 1;
                for (long col = col_lo; col <= col_hi; ++col) {
                    Vec2 p{x_off + col * s, y};
                    double local = opts_.size_field(p);
                    // each point belongs to the level matching the local size
                    if (local > s * 1.0001 && level > 0) continue;
                    if (local <= s / 2.0 * 1.0001 && level < levels) continue;
                    if (!point_in_rings_local(p, domain_.rings)) continue;
                    if (domain_.boundary_distance(p) < 0.5 * s) continue;
                    int on_edge = -1;
                    int t = locate(p, last_tri_, on_edge);
                    if (!tris_[t].alive) continue;
                    if (on_edge >= 0 && tris_[t].seg[on_edge]) continue;
                    bool close = false;
                    for (int j = 0; j < 3; ++j)
                        if (dist(p, pts_[tris_[t].v[j]]) < 0.35 * s) close = true;
                    if (close) continue;
                    insert_vertex(add_point(p), t, on_edge, false);
                }
            }
        }
    }
};

Mesh Triangulator::run() {
    domain_.validate();
    if (opts_.h_max <= 0.0) throw MeshError("h_max must be positive");
    if (opts_.min_angle_deg <= 0.0 || opts_.min_angle_deg > 28.0)
        throw MeshError("min_angle must be in (0, 28] degrees");

    // Bounding box triangulation far outside the domain.
    auto bb = domain_.bbox();
    Vec2 lo = bb[0] - Vec2{diag_, diag_} * 2.0;
    Vec2 hi = bb[1] + Vec2{diag_, diag_} * 2.0;
    int c0 = add_point(lo);
    int c1 = add_point({hi.x, lo.y});
    int c2 = add_point(hi);
    int c3 = add_point({lo.x, hi.y});
    int t0 = new_tri(c0, c1, c2);
    int t1 = new_tri(c0, c2, c3);
    link(t0, 1, t1);  // edge (c2, c0) of t0 is opposite local 1

    // Pre-split ring edges to the size field and queue the constraints.
    for (const Ring& ring : domain_.rings) {
        std::size_t n = ring.pts.size();
        std::vector<int> first_ids(n, -1);
        std::vector<std::vector<int>> chain(n);
        std::vector<int> ids;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = ring.pts[i];
            const Vec2& b = ring.pts[(i + 1) % n];
            double len = dist(a, b);
            double target = std::min({opts_.size_field(a), opts_.size_field(b),
                                      opts_.size_field((a + b) * 0.5)});
            target = std::max(target, 1e-6 * diag_);
            int pieces = std::max(1, static_cast<int>(std::ceil(len / target - 1e-9)));
            chain[i].push_back(-1);  // placeholder for a's id
            for (int k = 1; k < pieces; ++k)
                chain[i].push_back(add_point(a + (b - a) * (static_cast<double>(k) / pieces)));
        }
        for (std::size_t i = 0; i < n; ++i) first_ids[i] = add_point(ring.pts[i]);
        for (std::size_t i = 0; i < n; ++i) {
            chain[i][0] = first_ids[i];
            chain[i].push_back(first_ids[(i + 1) % n]);
            for (std::size_t k = 0; k + 1 < chain[i].size(); ++k)
                constraints_.push_back({chain[i][k], chain[i][k + 1], ring.markers[i]});
        }
    }

    // Insert all boundary points (plain Delaunay), then recover constraints.
    for (int vid = 4; vid < static_cast<int>(pts_.size()); ++vid) {
        int on_edge = -1;
        int t = locate(pts_[vid], last_tri_, on_edge);
        insert_vertex(vid, t, on_edge, false);
    }
    for (const Constraint& c : constraints_) recover_segment(c.a, c.b, c.mark);
    restore_delaunay();

    // Seed while the triangulation still covers the convex super-box, so the
    // locate walks cannot get trapped in a non-convex pocket.
    seed_interior_lattice();

    // Drop triangles outside the domain (holes and the super-box collar).
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        Vec2 cen = tri_centroid(static_cast<int>(t));
        if (!point_in_rings_local(cen, domain_.rings)) tris_[t].alive = false;
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        for (int j = 0; j < 3; ++j) {
            int n = tris_[t].nbr[j];
            if (n >= 0 && !tris_[n].alive) {
                if (!tris_[t].seg[j]) throw MeshError("domain boundary is not sealed by constraints");
                tris_[t].nbr[j] = -1;
            }
        }
    }
    rebuild_v2t();

    refine();

    // ---- extract ----
    Mesh mesh;
    std::vector<int> remap(pts_.size(), -1);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        for (int j = 0; j < 3; ++j) {
            int v = tris_[t].v[j];
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(mesh.vertices.size());
                mesh.vertices.push_back(pts_[v]);
            }
        }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        mesh.triangles.push_back({remap[tris_[t].v[0]], remap[tris_[t].v[1]], remap[tris_[t].v[2]]});
        for (int j = 0; j < 3; ++j) {
            if (tris_[t].seg[j] && tris_[t].nbr[j] < 0) {
                EdgeMarker m = tris_[t].mark[j] == EdgeMarker::Obstacle ? EdgeMarker::Obstacle
                                                                        : EdgeMarker::Outer;
                mesh.boundary_edges.push_back({remap[tris_[t].v[(j + 1) % 3]],
                                               remap[tris_[t].v[(j + 2) % 3]], m});
            }
        }
    }
    mesh.vertex_region.resize(mesh.vertices.size(), Region::Omega1);
    if (opts_.classifier)
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            mesh.vertex_region[v] = opts_.classifier(mesh.vertices[v]);
    mesh.h_max_used = opts_.h_max;

    // ---- verify the contract ----
    double min_angle = 180.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        double area = mesh.triangle_area(static_cast<int>(t));
        if (area <= 0.0) throw MeshError("non-positive triangle area in output");
        const auto& tri = mesh.triangles[t];
        for (int j = 0; j < 3; ++j) {
            Vec2 e1 = mesh.vertices[tri[(j + 1) % 3]] - mesh.vertices[tri[j]];
            Vec2 e2 = mesh.vertices[tri[(j + 2) % 3]] - mesh.vertices[tri[j]];
            double ang = std::acos(std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0));
            min_angle = std::min(min_angle, ang * 180.0 / M_PI);
        }
    }
    mesh.min_angle_achieved = min_angle;
    if (min_angle < opts_.min_angle_deg - 1e-6) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "mesh quality not met: min angle %.3f deg", min_angle);
        throw MeshError(buf);
    }
    // Conformity: every edge belongs to at most two triangles, and edges on a
    // single triangle are exactly the boundary edges.
    {
        std::vector<std::pair<std::pair<int, int>, int>> counts;
        for (const auto& tri : mesh.triangles)
            for (int j = 0; j < 3; ++j) {
                int a = tri[j], b = tri[(j + 1) % 3];
                counts.push_back({{std::min(a, b), std::max(a, b)}, 1});
            }
        std::sort(counts.begin(), counts.end());
        std::size_t singles = 0;
        for (std::size_t i = 0; i < counts.size();) {
            std::size_t k = i;
            while (k < counts.size() && counts[k].first == counts[i].first) ++k;
            if (k - i > 2) throw MeshError("non-conforming edge (more than two incident triangles)");
            if (k - i == 1) ++singles;
            i = k;
        }
        if (singles != mesh.boundary_edges.size())
            throw MeshError("boundary edge bookkeeping mismatch");
    }
    for (const auto& e : mesh.boundary_edges) {
        if (domain_.boundary_distance(mesh.vertices[e.a]) > 1e-10 ||
            domain_.boundary_distance(mesh.vertices[e.b]) > 1e-10)
            throw MeshError("boundary vertex strayed from the input polygon");
    }
    return mesh;
}

} // namespace

Mesh triangulate(const PolygonDomain& domain, const MeshOptions& opts) {
    Triangulator tri(domain, opts);
    return tri.run();
}

QualityReport mesh_quality(const Mesh& mesh) {
    QualityReport q;
    q.vertex_count = static_cast<int>(mesh.vertices.size());
    q.triangle_count = static_cast<int>(mesh.triangles.size());
    q.boundary_edge_count = static_cast<int>(mesh.boundary_edges.size());
    q.min_angle_deg = 180.0;
    q.max_angle_deg = 0.0;
    q.min_edge = std::numeric_limits<double>::max();
    q.max_edge = 0.0;

    std::vector<double> edge_lengths;
    for (const auto& tri : mesh.triangles) {
        for (int j = 0; j < 3; ++j) {
            Vec2 e1 = mesh.vertices[tri[(j + 1) % 3]] - mesh.vertices[tri[j]];
            Vec2 e2 = mesh.vertices[tri[(j + 2) % 3]] - mesh.vertices[tri[j]];
            double ang = std::acos(std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0)) * 180.0 / M_PI;
            q.min_angle_deg = std::min(q.min_angle_deg, ang);
            q.max_angle_deg = std::max(q.max_angle_deg, ang);
            if (tri[j] < tri[(j + 1) % 3])
                edge_lengths.push_back(dist(mesh.vertices[tri[j]], mesh.vertices[tri[(j + 1) % 3]]));
        }
        int votes[4] = {0, 0, 0, 0};
        for (int j = 0; j < 3; ++j) votes[static_cast<int>(mesh.vertex_region[tri[j]])]++;
        int best = 0;
        for (int r = 1; r < 4; ++r)
            if (votes[r] > votes[best]) best = r;
        q.region_counts[static_cast<Region>(best)]++;
    }
    for (double L : edge_lengths) {
        q.min_edge = std::min(q.min_edge, L);
        q.max_edge = std::max(q.max_edge, L);
    }
    if (!edge_lengths.empty() && q.max_edge > q.min_edge) {
        for (double L : edge_lengths) {
            int bin = static_cast<int>((L - q.min_edge) / (q.max_edge - q.min_edge) * 16.0);
            q.edge_length_histogram[std::min(bin, 15)]++;
        }
    }
    return q;
}

std::string mesh_to_text(const Mesh& mesh) {
    std::ostringstream os;
    char buf[96];
    os << mesh.vertices.size() << " " << mesh.boundary_edges.size() << " "
       << mesh.triangles.size() << "\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %s\n", mesh.vertices[v].x, mesh.vertices[v].y,
                      region_name(mesh.vertex_region[v]));
        os << buf;
    }
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& e : mesh.boundary_edges)
        os << e.a << " " << e.b << " " << marker_name(e.marker) << "\n";
    return os.str();
}

Mesh mesh_from_text(const std::string& text) {
    std::istringstream is(text);
    std::size_t V, E, T;
    if (!(is >> V >> E >> T)) throw MeshError("bad mesh header");
    Mesh mesh;
    mesh.vertices.resize(V);
    mesh.vertex_region.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
        std::string region;
        if (!(is >> mesh.vertices[v].x >> mesh.vertices[v].y >> region))
            throw MeshError("bad vertex line");
        auto r = region_from_name(region);
        if (!r) throw MeshError("unknown region tag: " + region);
        mesh.vertex_region[v] = *r;
    }
    mesh.triangles.resize(T);
    for (std::size_t t = 0; t < T; ++t)
        if (!(is >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2]))
            throw MeshError("bad triangle line");
    mesh.boundary_edges.resize(E);
    for (std::size_t e = 0; e < E; ++e) {
        std::string marker;
        if (!(is >> mesh.boundary_edges[e].a >> mesh.boundary_edges[e].b >> marker))
            throw MeshError("bad boundary edge line");
        mesh.boundary_edges[e].marker =
            marker == "obstacle" ? EdgeMarker::Obstacle : EdgeMarker::Outer;
    }
    return mesh;
}

std::function<double(const Vec2&)> dumbbell_size_field(const DumbbellSpec& spec, double h_max,
                                                       double connector_factor, double grading) {
    double eps = spec.epsilon;
    double floor = eps / connector_factor;
    double x0 = -1.0, x1 = 1.0, y0 = -2.0 * eps, y1 = 2.0 * eps;
    return [=](const Vec2& p) {
        double dx = std::max({x0 - p.x, 0.0, p.x - x1});
        double dy = std::max({y0 - p.y, 0.0, p.y - y1});
        double d = std::hypot(dx, dy);
        return std::min(h_max, floor + grading * d);
    };
}

} // namespace dumbbell
