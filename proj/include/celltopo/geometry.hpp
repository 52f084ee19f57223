#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "predicates.hpp"

namespace celltopo {

using VertexId = std::int32_t;
using Edge = std::array<VertexId, 2>;
using Triangle = std::array<VertexId, 3>;

struct Circle {
    Point2 center;
    double radius = 0.0;
};

inline Circle circumcircle(const Point2& a, const Point2& b, const Point2& c) {
    if (predicates::orient2d(a, b, c) == 0)
        fail(Category::Collinear, "circumcircle of collinear points");
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const double d = 2.0 * (bx * cy - by * cx);
    // nearly flat: the rounded determinant may have lost every digit
    if (std::abs(d) <= 1e-10 * (std::abs(bx * cy) + std::abs(by * cx))) {
        using predicates::detail::Exact;
        const Exact ebx = Exact(b.x) - Exact(a.x), eby = Exact(b.y) - Exact(a.y);
        const Exact ecx = Exact(c.x) - Exact(a.x), ecy = Exact(c.y) - Exact(a.y);
        const Exact eb2 = ebx * ebx + eby * eby, ec2 = ecx * ecx + ecy * ecy;
        const Exact ed = 2 * (ebx * ecy - eby * ecx);
        const Exact eux = (ecy * eb2 - eby * ec2) / ed, euy = (ebx * ec2 - ecx * eb2) / ed;
        const double ux = eux.convert_to<double>(), uy = euy.convert_to<double>();
        return {{a.x + ux, a.y + uy}, std::hypot(ux, uy)};
    }
    const double ux = (cy * b2 - by * c2) / d;
    const double uy = (bx * c2 - cx * b2) / d;
    return {{a.x + ux, a.y + uy}, std::hypot(ux, uy)};
}

inline double circumradius(const Point2& a, const Point2& b, const Point2& c) {
    return circumcircle(a, b, c).radius;
}

struct Triangulation {
    std::vector<Point2> vertices;
    std::vector<Edge> edges;                              // i < j, sorted
    std::vector<Triangle> triangles;                      // i < j < k, sorted
    std::vector<std::array<std::int32_t, 2>> edge_triangles; // indices into triangles, -1 if absent

    std::optional<std::size_t> find_edge(VertexId i, VertexId j) const {
        const Edge e = i < j ? Edge{i, j} : Edge{j, i};
        const auto it = std::lower_bound(edges.begin(), edges.end(), e);
        if (it == edges.end() || *it != e) return std::nullopt;
        return static_cast<std::size_t>(it - edges.begin());
    }

    bool is_hull_edge(std::size_t e) const { return edge_triangles[e][1] < 0; }
};

namespace detail {

inline constexpr VertexId kInfinite = -1;

struct Face {
    Triangle v;                        // counterclockwise; kInfinite marks a ghost face
    std::array<std::int32_t, 3> n{};   // n[i] is across the edge opposite v[i]
};

// Hilbert index on a 2^16 grid, used only to order insertions.
inline std::uint64_t hilbert_key(std::uint32_t x, std::uint32_t y) {
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << 15; s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1u : 0u;
        const std::uint32_t ry = (y & s) ? 1u : 0u;
        d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - (x & (s - 1)) + (x & ~(s - 1));
                y = s - 1 - (y & (s - 1)) + (y & ~(s - 1));
            }
            std::swap(x, y);
        }
    }
    return d;
}

class DelaunayBuilder {
public:
    explicit DelaunayBuilder(std::span<const Point2> pts) : pts_(pts) {}

    std::vector<Face> run() {
        const auto order = insertion_order();
        start(order);
        for (VertexId p : order)
            if (p != seed_[0] && p != seed_[1] && p != seed_[2]) insert(p);
        std::vector<Face> out;
        out.reserve(faces_.size());
        for (std::size_t f = 0; f < faces_.size(); ++f)
            if (alive_[f]) out.push_back(faces_[f]);
        return out;
    }

private:
    std::span<const Point2> pts_;
    std::vector<Face> faces_;
    std::vector<char> alive_;
    std::vector<std::int32_t> free_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    std::vector<std::int32_t> by_start_; // indexed by vertex + 1
    std::int32_t hint_ = 0;
    std::array<VertexId, 3> seed_{};

    const Point2& P(VertexId v) const { return pts_[static_cast<std::size_t>(v)]; }

    static bool ghost(const Face& f) {
        return f.v[0] == kInfinite || f.v[1] == kInfinite || f.v[2] == kInfinite;
    }

    std::vector<VertexId> insertion_order() const {
        double x0 = pts_[0].x, x1 = x0, y0 = pts_[0].y, y1 = y0;
        for (const auto& p : pts_) {
            x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
        }
        const double span = std::max(x1 - x0, y1 - y0);
        const double scale = span > 0.0 ? 65535.0 / span : 0.0;
        std::vector<std::pair<std::uint64_t, VertexId>> keyed(pts_.size());
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            const auto gx = static_cast<std::uint32_t>((pts_[i].x - x0) * scale);
            const auto gy = static_cast<std::uint32_t>((pts_[i].y - y0) * scale);
            keyed[i] = {hilbert_key(gx, gy), static_cast<VertexId>(i)};
        }
        std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return lex_less(P(a.second), P(b.second));
        });
        std::vector<VertexId> order(keyed.size());
        for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
        return order;
    }

    std::int32_t new_face(const Triangle& v) {
        std::int32_t f;
        if (!free_.empty()) {
            f = free_.back();
            free_.pop_back();
            faces_[static_cast<std::size_t>(f)] = Face{v, {-1, -1, -1}};
            alive_[static_cast<std::size_t>(f)] = 1;
        } else {
            f = static_cast<std::int32_t>(faces_.size());
            faces_.push_back(Face{v, {-1, -1, -1}});
            alive_.push_back(1);
            stamp_.push_back(0);
        }
        return f;
    }

    void start(const std::vector<VertexId>& order) {
        const VertexId a = order[0], b = order[1];
        VertexId c = kInfinite;
        for (std::size_t k = 2; k < order.size(); ++k) {
            if (predicates::orient2d(P(a), P(b), P(order[k])) != 0) {
                c = order[k];
                break;
            }
        }
        if (c == kInfinite) fail(Category::DegenerateAllCollinear, "all input points are collinear");
        seed_ = {a, b, c};
        const Triangle t = predicates::orient2d(P(a), P(b), P(c)) > 0 ? Triangle{a, b, c}
                                                                       : Triangle{a, c, b};
        std::array<std::int32_t, 4> f{};
        f[0] = new_face(t);
        for (int i = 0; i < 3; ++i) f[static_cast<std::size_t>(i + 1)] =
            new_face({t[static_cast<std::size_t>((i + 1) % 3)], t[static_cast<std::size_t>(i)], kInfinite});
        for (auto fi : f) {
            Face& F = faces_[static_cast<std::size_t>(fi)];
            for (int k = 0; k < 3; ++k) {
                const VertexId u = F.v[static_cast<std::size_t>((k + 1) % 3)];
                const VertexId w = F.v[static_cast<std::size_t>((k + 2) % 3)];
                for (auto gi : f) {
                    const Face& G = faces_[static_cast<std::size_t>(gi)];
                    for (int m = 0; m < 3; ++m) {
                        if (G.v[static_cast<std::size_t>((m + 1) % 3)] == w &&
                            G.v[static_cast<std::size_t>((m + 2) % 3)] == u)
                            F.n[static_cast<std::size_t>(k)] = gi;
                    }
                }
            }
        }
        hint_ = f[0];
        by_start_.assign(pts_.size() + 1, -1);
    }

    // CGAL-style symbolic perturbation: the lexicographically largest point of
    // the four receives the largest lift.
    bool in_circle_perturbed(const Face& f, VertexId q) const {
        const Point2 &a = P(f.v[0]), &b = P(f.v[1]), &c = P(f.v[2]), &p = P(q);
        const int s = predicates::incircle(a, b, c, p);
        if (s != 0) return s > 0;
        std::array<VertexId, 4> ids{f.v[0], f.v[1], f.v[2], q};
        std::sort(ids.begin(), ids.end(),
                  [&](VertexId u, VertexId w) { return lex_less(P(u), P(w)); });
        for (int i = 3; i > 1; --i) {
            const VertexId top = ids[static_cast<std::size_t>(i)];
            if (top == q) return false;
            int o = 0;
            if (top == f.v[2]) o = predicates::orient2d(a, b, p);
            else if (top == f.v[1]) o = predicates::orient2d(a, p, c);
            else o = predicates::orient2d(p, b, c);
            if (o != 0) return o > 0;
        }
        return false;
    }

    bool in_conflict(const Face& f, VertexId q) const {
        if (!ghost(f)) return in_circle_perturbed(f, q);
        std::size_t i = 0;
        while (f.v[i] != kInfinite) ++i;
        const Point2& a = P(f.v[(i + 1) % 3]);
        const Point2& b = P(f.v[(i + 2) % 3]);
        const Point2& p = P(q);
        const int o = predicates::orient2d(a, b, p);
        if (o != 0) return o > 0;
        // collinear: conflict only strictly inside the segment
        return predicates::dot_sign(a, b, p) < 0;
    }

    std::int32_t locate(VertexId q) const {
        const Point2& p = P(q);
        std::int32_t f = hint_;
        std::int32_t prev = -1;
        for (;;) {
            const Face& F = faces_[static_cast<std::size_t>(f)];
            if (ghost(F)) return f;
            std::int32_t next = -1;
            for (std::size_t k = 0; k < 3; ++k) {
                const std::int32_t g = F.n[k];
                if (g == prev) continue;
                if (predicates::orient2d(P(F.v[(k + 1) % 3]), P(F.v[(k + 2) % 3]), p) < 0) {
                    next = g;
                    break;
                }
            }
            if (next < 0) return f;
            prev = f;
            f = next;
        }
    }

    struct BoundaryEdge {
        VertexId u, w;
        std::int32_t outside;
    };

    void insert(VertexId q) {
        const std::int32_t f0 = locate(q);
        const std::uint32_t in = ++epoch_;
        const std::uint32_t out = ++epoch_;

        std::vector<std::int32_t> cavity{f0};
        std::vector<BoundaryEdge> boundary;
        stamp_[static_cast<std::size_t>(f0)] = in;
        for (std::size_t s = 0; s < cavity.size(); ++s) {
            const std::int32_t f = cavity[s];
            for (std::size_t k = 0; k < 3; ++k) {
                const Face& F = faces_[static_cast<std::size_t>(f)];
                const std::int32_t g = F.n[k];
                auto& st = stamp_[static_cast<std::size_t>(g)];
                if (st == in) continue;
                if (st != out) {
                    if (in_conflict(faces_[static_cast<std::size_t>(g)], q)) {
                        st = in;
                        cavity.push_back(g);
                        continue;
                    }
                    st = out;
                }
                boundary.push_back({F.v[(k + 1) % 3], F.v[(k + 2) % 3], g});
            }
        }

        for (auto f : cavity) {
            alive_[static_cast<std::size_t>(f)] = 0;
            free_.push_back(f);
        }

        std::vector<std::int32_t> created(boundary.size());
        for (std::size_t e = 0; e < boundary.size(); ++e) {
            const auto& be = boundary[e];
            const std::int32_t nf = new_face({be.u, be.w, q});
            created[e] = nf;
            Face& N = faces_[static_cast<std::size_t>(nf)];
            N.n[2] = be.outside;
            Face& O = faces_[static_cast<std::size_t>(be.outside)];
            for (std::size_t j = 0; j < 3; ++j)
                if (O.v[j] != be.u && O.v[j] != be.w) O.n[j] = nf;
            by_start_[static_cast<std::size_t>(be.u + 1)] = nf;
        }
        for (std::size_t e = 0; e < boundary.size(); ++e) {
            Face& N = faces_[static_cast<std::size_t>(created[e])];
            const std::int32_t across_wq = by_start_[static_cast<std::size_t>(boundary[e].w + 1)];
            N.n[0] = across_wq;
            faces_[static_cast<std::size_t>(across_wq)].n[1] = created[e];
        }
        for (std::size_t e = 0; e < boundary.size(); ++e) {
            by_start_[static_cast<std::size_t>(boundary[e].u + 1)] = -1;
            if (!ghost(faces_[static_cast<std::size_t>(created[e])])) hint_ = created[e];
        }
    }
};

inline void check_input(std::span<const Point2> pts) {
    for (const auto& p : pts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            fail(Category::InvalidArgument, "non-finite point coordinate");
    std::vector<Point2> sorted(pts.begin(), pts.end());
    std::sort(sorted.begin(), sorted.end(), lex_less);
    const auto distinct = static_cast<std::size_t>(
        std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    if (distinct < 3)
        fail(Category::TooFewPoints, "need at least 3 distinct points, got " + std::to_string(distinct));
    if (distinct != pts.size())
        fail(Category::DuplicatePoint, std::to_string(pts.size() - distinct) + " duplicate point(s)");
}

} // namespace detail

inline Triangulation delaunay(std::span<const Point2> points) {
    detail::check_input(points);
    if (points.size() > static_cast<std::size_t>(std::numeric_limits<VertexId>::max() / 4))
        fail(Category::TooManyPoints, "too many points for 32-bit vertex ids");

    const auto faces = detail::DelaunayBuilder(points).run();

    Triangulation tri;
    tri.vertices.assign(points.begin(), points.end());
    for (const auto& f : faces) {
        if (f.v[0] < 0 || f.v[1] < 0 || f.v[2] < 0) continue;
        Triangle t = f.v;
        std::sort(t.begin(), t.end());
        tri.triangles.push_back(t);
    }
    std::sort(tri.triangles.begin(), tri.triangles.end());

    std::vector<std::pair<Edge, std::int32_t>> incid;
    incid.reserve(tri.triangles.size() * 3);
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t];
        const auto ti = static_cast<std::int32_t>(t);
        incid.push_back({{v[0], v[1]}, ti});
        incid.push_back({{v[0], v[2]}, ti});
        incid.push_back({{v[1], v[2]}, ti});
    }
    std::sort(incid.begin(), incid.end());
    for (std::size_t i = 0; i < incid.size();) {
        std::size_t j = i + 1;
        while (j < incid.size() && incid[j].first == incid[i].first) ++j;
        tri.edges.push_back(incid[i].first);
        tri.edge_triangles.push_back({incid[i].second, j - i > 1 ? incid[i + 1].second : -1});
        i = j;
    }
    return tri;
}

inline Triangulation delaunay(const std::vector<Point2>& points) {
    return delaunay(std::span<const Point2>(points));
}

// Voronoi cell of one site: circumcenters in counterclockwise order.
// neighbors[k] is the site across side k. Bounded cells: side k joins
// vertices[k] and vertices[k+1 mod m]. Unbounded cells: side 0 is the ray
// leaving vertices.front() along ray_first, side k (1..m-1) joins
// vertices[k-1] and vertices[k], side m is the ray leaving vertices.back()
// along ray_last.
struct VoronoiCell {
    VertexId site = 0;
    bool bounded = true;
    std::vector<Point2> vertices;
    std::vector<VertexId> neighbors;
    Point2 ray_first;
    Point2 ray_last;
};

struct VoronoiDiagram {
    std::vector<VoronoiCell> cells;
};

inline VoronoiDiagram voronoi(const Triangulation& tri) {
    const auto n = tri.vertices.size();
    const auto& pts = tri.vertices;

    std::vector<Point2> centers(tri.triangles.size());
    std::vector<Triangle> ccw(tri.triangles.size());
    std::vector<std::uint32_t> offset(n + 1, 0);
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        Triangle v = tri.triangles[t];
        if (predicates::orient2d(pts[static_cast<std::size_t>(v[0])], pts[static_cast<std::size_t>(v[1])],
                                 pts[static_cast<std::size_t>(v[2])]) < 0)
            std::swap(v[1], v[2]);
        ccw[t] = v;
        centers[t] = circumcircle(pts[static_cast<std::size_t>(v[0])], pts[static_cast<std::size_t>(v[1])],
                                  pts[static_cast<std::size_t>(v[2])]).center;
        for (auto x : v) ++offset[static_cast<std::size_t>(x) + 1];
    }
    std::partial_sum(offset.begin(), offset.end(), offset.begin());
    std::vector<std::int32_t> incident(offset.back());
    {
        auto fill = offset;
        for (std::size_t t = 0; t < ccw.size(); ++t)
            for (auto x : ccw[t]) incident[fill[static_cast<std::size_t>(x)]++] = static_cast<std::int32_t>(t);
    }

    // rotate t so that v comes first: returns (a, b) with (v, a, b) counterclockwise
    auto around = [&](std::int32_t t, VertexId v) {
        const auto& c = ccw[static_cast<std::size_t>(t)];
        if (c[0] == v) return std::pair{c[1], c[2]};
        if (c[1] == v) return std::pair{c[2], c[0]};
        return std::pair{c[0], c[1]};
    };
    auto other = [&](VertexId v, VertexId w, std::int32_t t) {
        const auto e = *tri.find_edge(v, w);
        const auto& et = tri.edge_triangles[e];
        return et[0] == t ? et[1] : et[0];
    };
    auto unit = [](double x, double y) {
        const double len = std::hypot(x, y);
        return Point2{x / len, y / len};
    };

    VoronoiDiagram vd;
    vd.cells.resize(n);
    for (std::size_t vi = 0; vi < n; ++vi) {
        const auto v = static_cast<VertexId>(vi);
        VoronoiCell& cell = vd.cells[vi];
        cell.site = v;
        if (offset[vi] == offset[vi + 1]) continue;

        // walk clockwise to the first triangle (hull start), or all the way round
        const std::int32_t t0 = incident[offset[vi]];
        std::int32_t start = t0;
        bool bounded = true;
        for (;;) {
            const auto prev = other(v, around(start, v).first, start);
            if (prev < 0) {
                bounded = false;
                break;
            }
            start = prev;
            if (start == t0) break;
        }
        cell.bounded = bounded;
        if (!bounded) {
            const VertexId a = around(start, v).first;
            const Point2 d{pts[static_cast<std::size_t>(a)].x - pts[vi].x,
                           pts[static_cast<std::size_t>(a)].y - pts[vi].y};
            cell.ray_first = unit(d.y, -d.x);
            cell.neighbors.push_back(a);
        }
        std::int32_t t = start;
        for (;;) {
            cell.vertices.push_back(centers[static_cast<std::size_t>(t)]);
            const VertexId b = around(t, v).second;
            cell.neighbors.push_back(b);
            const auto next = other(v, b, t);
            if (next < 0) {
                const Point2 d{pts[static_cast<std::size_t>(b)].x - pts[vi].x,
                               pts[static_cast<std::size_t>(b)].y - pts[vi].y};
                cell.ray_last = unit(-d.y, d.x);
                break;
            }
            if (next == start) break;
            t = next;
        }
    }
    return vd;
}

} // namespace celltopo
