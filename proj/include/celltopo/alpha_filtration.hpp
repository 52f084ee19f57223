#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "geometry.hpp"

namespace celltopo {

// alpha is a radius (km), not a squared radius.
struct Simplex {
    int dim = 0;
    std::array<VertexId, 3> vertices{-1, -1, -1}; // sorted; unused slots are -1
    double birth = 0.0;

    friend bool operator==(const Simplex&, const Simplex&) = default;
};

inline bool filtration_less(const Simplex& a, const Simplex& b) {
    return std::tie(a.birth, a.dim, a.vertices) < std::tie(b.birth, b.dim, b.vertices);
}

struct Filtration {
    std::vector<Simplex> simplices; // sorted by (birth, dim, vertices)
    double alpha_max = 0.0;
    std::size_t vertex_count = 0;

    // Number of leading simplices with birth <= alpha.
    std::size_t prefix(double alpha) const {
        const auto it = std::upper_bound(simplices.begin(), simplices.end(), alpha,
                                         [](double a, const Simplex& s) { return a < s.birth; });
        return static_cast<std::size_t>(it - simplices.begin());
    }
};

// True iff no other vertex lies in the closed disk with diameter `edge`.
// For a Delaunay edge it suffices to test the opposite vertices of the
// incident triangles.
inline bool is_gabriel(const Triangulation& tri, std::size_t edge) {
    const auto [i, j] = tri.edges[edge];
    const Point2& a = tri.vertices[static_cast<std::size_t>(i)];
    const Point2& b = tri.vertices[static_cast<std::size_t>(j)];
    for (const auto t : tri.edge_triangles[edge]) {
        if (t < 0) continue;
        for (const auto k : tri.triangles[static_cast<std::size_t>(t)]) {
            if (k == i || k == j) continue;
            if (predicates::dot_sign(a, b, tri.vertices[static_cast<std::size_t>(k)]) <= 0) return false;
        }
    }
    return true;
}

inline Filtration alpha_values(const Triangulation& tri) {
    const auto& pts = tri.vertices;
    Filtration f;
    f.vertex_count = pts.size();
    f.simplices.reserve(pts.size() + tri.edges.size() + tri.triangles.size());

    for (std::size_t v = 0; v < pts.size(); ++v)
        f.simplices.push_back({0, {static_cast<VertexId>(v), -1, -1}, 0.0});

    std::vector<double> radius(tri.triangles.size());
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t];
        radius[t] = circumradius(pts[static_cast<std::size_t>(v[0])], pts[static_cast<std::size_t>(v[1])],
                                 pts[static_cast<std::size_t>(v[2])]);
    }

    std::vector<double> edge_birth(tri.edges.size());
    for (std::size_t e = 0; e < tri.edges.size(); ++e) {
        double attach = std::numeric_limits<double>::infinity();
        for (const auto t : tri.edge_triangles[e])
            if (t >= 0) attach = std::min(attach, radius[static_cast<std::size_t>(t)]);
        if (is_gabriel(tri, e)) {
            const auto [i, j] = tri.edges[e];
            const Point2& a = pts[static_cast<std::size_t>(i)];
            const Point2& b = pts[static_cast<std::size_t>(j)];
            // the clamp only matters at the ulp level; it keeps faces no later than cofaces
            edge_birth[e] = std::min(0.5 * std::hypot(b.x - a.x, b.y - a.y), attach);
        } else {
            edge_birth[e] = attach;
        }
        f.simplices.push_back({1, {tri.edges[e][0], tri.edges[e][1], -1}, edge_birth[e]});
    }

    for (std::size_t t = 0; t < tri.triangles.size(); ++t)
        f.simplices.push_back({2, tri.triangles[t], radius[t]});

    std::sort(f.simplices.begin(), f.simplices.end(), filtration_less);
    for (const auto& s : f.simplices) f.alpha_max = std::max(f.alpha_max, s.birth);
    return f;
}

inline std::vector<double> critical_alphas(const Filtration& f) {
    std::vector<double> out;
    for (const auto& s : f.simplices)
        if (out.empty() || s.birth != out.back()) out.push_back(s.birth);
    return out;
}

struct ComplexSize {
    std::size_t vertices = 0, edges = 0, triangles = 0;
};

inline ComplexSize complex_size(const Filtration& f, double alpha) {
    ComplexSize c;
    const auto m = f.prefix(alpha);
    for (std::size_t i = 0; i < m; ++i) {
        switch (f.simplices[i].dim) {
        case 0: ++c.vertices; break;
        case 1: ++c.edges; break;
        default: ++c.triangles; break;
        }
    }
    return c;
}

} // namespace celltopo
