#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "alpha_filtration.hpp"
#include "text.hpp"

namespace celltopo {

// Right-continuous step functions: the value at alphas[i] holds on
// [alphas[i], alphas[i+1]).
struct BettiCurve {
    std::vector<double> alphas;
    std::vector<std::int64_t> beta0;
    std::vector<std::int64_t> beta1;

    // Index of the step containing alpha, or -1 when alpha < alphas.front().
    std::ptrdiff_t step(double alpha) const {
        const auto it = std::upper_bound(alphas.begin(), alphas.end(), alpha);
        return (it - alphas.begin()) - 1;
    }
    std::int64_t beta0_at(double alpha) const {
        const auto i = step(alpha);
        return i < 0 ? 0 : beta0[static_cast<std::size_t>(i)];
    }
    std::int64_t beta1_at(double alpha) const {
        const auto i = step(alpha);
        return i < 0 ? 0 : beta1[static_cast<std::size_t>(i)];
    }
    std::size_t size() const { return alphas.size(); }
};

struct EulerCurve {
    std::vector<double> alphas;
    std::vector<std::int64_t> chi;

    std::int64_t chi_at(double alpha) const {
        const auto it = std::upper_bound(alphas.begin(), alphas.end(), alpha);
        return it == alphas.begin() ? 0 : chi[static_cast<std::size_t>(it - alphas.begin() - 1)];
    }
};

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // false if already in the same set
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

inline BettiCurve betti_curves(const Filtration& f) {
    BettiCurve c;
    DisjointSets ds(f.vertex_count);
    std::int64_t b0 = 0, b1 = 0;
    const auto& s = f.simplices;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& x = s[i];
        if (x.dim == 0) {
            ++b0;
        } else if (x.dim == 1) {
            if (ds.unite(static_cast<std::size_t>(x.vertices[0]), static_cast<std::size_t>(x.vertices[1])))
                --b0;
            else
                ++b1;
        } else {
            --b1;
        }
        if (i + 1 == s.size() || s[i + 1].birth != x.birth) {
            c.alphas.push_back(x.birth);
            c.beta0.push_back(b0);
            c.beta1.push_back(b1);
        }
    }
    return c;
}

inline EulerCurve euler_curve(const BettiCurve& b) {
    EulerCurve e;
    e.alphas = b.alphas;
    e.chi.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) e.chi[i] = b.beta0[i] - b.beta1[i];
    return e;
}

namespace detail {

// Rank over GF(2) of a set of sparse columns given as lists of row indices.
inline std::size_t gf2_rank(const std::vector<std::vector<std::size_t>>& columns, std::size_t rows) {
    const std::size_t words = (rows + 63) / 64;
    std::vector<std::vector<std::uint64_t>> pivot(rows); // pivot[r]: reduced column with lowest set bit r
    std::size_t rank = 0;
    for (const auto& col : columns) {
        std::vector<std::uint64_t> v(words, 0);
        for (auto r : col) v[r / 64] ^= std::uint64_t{1} << (r % 64);
        for (;;) {
            std::size_t low = rows;
            for (std::size_t w = 0; w < words; ++w) {
                if (v[w]) {
                    low = w * 64 + static_cast<std::size_t>(std::countr_zero(v[w]));
                    break;
                }
            }
            if (low == rows) break;
            if (pivot[low].empty()) {
                pivot[low] = std::move(v);
                ++rank;
                break;
            }
            for (std::size_t w = 0; w < words; ++w) v[w] ^= pivot[low][w];
        }
    }
    return rank;
}

} // namespace detail

struct BettiPair {
    std::int64_t beta0 = 0;
    std::int64_t beta1 = 0;

    friend bool operator==(const BettiPair&, const BettiPair&) = default;
};

// Boundary-matrix oracle. Cubic; refuses complexes above max_simplices.
inline BettiPair brute_force_betti(const Filtration& f, double alpha, std::size_t max_simplices = 512) {
    if (alpha < 0.0) return {};
    const auto m = f.prefix(alpha);
    if (m > max_simplices)
        fail(Category::TooLarge, "complex has " + std::to_string(m) + " simplices, oracle limit is " +
                                     std::to_string(max_simplices));
    std::map<VertexId, std::size_t> vid;
    std::map<std::array<VertexId, 2>, std::size_t> eid;
    std::vector<std::vector<std::size_t>> d1, d2;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& s = f.simplices[i];
        if (s.dim == 0) vid.emplace(s.vertices[0], vid.size());
    }
    for (std::size_t i = 0; i < m; ++i) {
        const auto& s = f.simplices[i];
        if (s.dim == 1) {
            eid.emplace(std::array<VertexId, 2>{s.vertices[0], s.vertices[1]}, eid.size());
            d1.push_back({vid.at(s.vertices[0]), vid.at(s.vertices[1])});
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        const auto& s = f.simplices[i];
        if (s.dim == 2) {
            const auto [a, b, c] = s.vertices;
            d2.push_back({eid.at({a, b}), eid.at({a, c}), eid.at({b, c})});
        }
    }
    const auto r1 = detail::gf2_rank(d1, vid.size());
    const auto r2 = detail::gf2_rank(d2, eid.size());
    return {static_cast<std::int64_t>(vid.size() - r1),
            static_cast<std::int64_t>(eid.size() - r1 - r2)};
}

inline void write_curves_csv(std::ostream& out, const BettiCurve& c) {
    out << "alpha,beta0,beta1,chi\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        out << format_double(c.alphas[i]) << ',' << c.beta0[i] << ',' << c.beta1[i] << ','
            << (c.beta0[i] - c.beta1[i]) << '\n';
}

} // namespace celltopo
