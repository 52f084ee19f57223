#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "predicates.hpp"
#include "random.hpp"
#include "text.hpp"

namespace celltopo {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct BSRecord {
    std::string radio;
    int mcc = 0;
    double lon = 0.0;
    double lat = 0.0;
    std::vector<std::pair<std::string, std::string>> extra; // other columns, verbatim
};

struct ParseResult {
    std::vector<BSRecord> records;
    std::size_t rows = 0;       // data rows read
    std::size_t malformed = 0;  // rows skipped as unparseable or out of range
    std::size_t filtered = 0;   // valid rows with another mcc
};

inline ParseResult parse_opencellid_csv(std::istream& in, std::optional<int> mcc_filter = std::nullopt) {
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) fail(Category::EmptyInput, "CSV input has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_csv_line(line);
    for (auto& h : header) {
        h = std::string(trim(h));
        std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
    }
    auto column = [&](std::string_view name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto c_radio = column("radio"), c_mcc = column("mcc"), c_lon = column("lon"), c_lat = column("lat");
    std::string missing;
    for (auto [name, idx] : {std::pair{"radio", c_radio}, {"mcc", c_mcc}, {"lon", c_lon}, {"lat", c_lat}})
        if (idx < 0) missing += missing.empty() ? name : std::string(",") + name;
    if (!missing.empty()) fail(Category::MissingColumns, "CSV header lacks column(s): " + missing);
    const auto needed = static_cast<std::size_t>(std::max({c_radio, c_mcc, c_lon, c_lat}));

    ParseResult out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++out.rows;
        const auto cells = split_csv_line(line);
        if (cells.size() <= needed) {
            ++out.malformed;
            continue;
        }
        const auto mcc = parse_number<int>(cells[static_cast<std::size_t>(c_mcc)]);
        const auto lon = parse_number<double>(cells[static_cast<std::size_t>(c_lon)]);
        const auto lat = parse_number<double>(cells[static_cast<std::size_t>(c_lat)]);
        if (!mcc || !lon || !lat || !(*lat >= -90.0 && *lat <= 90.0) || !(*lon >= -180.0 && *lon <= 180.0)) {
            ++out.malformed;
            continue;
        }
        if (mcc_filter && *mcc != *mcc_filter) {
            ++out.filtered;
            continue;
        }
        BSRecord r;
        r.radio = std::string(trim(cells[static_cast<std::size_t>(c_radio)]));
        r.mcc = *mcc;
        r.lon = *lon;
        r.lat = *lat;
        for (std::size_t i = 0; i < cells.size() && i < header.size(); ++i) {
            const auto idx = static_cast<std::ptrdiff_t>(i);
            if (idx != c_radio && idx != c_mcc && idx != c_lon && idx != c_lat)
                r.extra.emplace_back(header[i], cells[i]);
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

struct PointSet {
    std::vector<Point2> points; // km
    double lat0 = 0.0;
    double lon0 = 0.0;
    std::string source;
    double dedup_epsilon = 0.0; // km; 0 means only exact duplicates are excluded
};

struct Projection {
    PointSet set;
    std::size_t merged = 0; // records dropped as duplicates
};

namespace detail {

// Keeps the first point of every cluster closer than eps (first come, first kept).
inline std::vector<Point2> dedup(const std::vector<Point2>& pts, double eps, std::size_t& merged) {
    std::vector<Point2> out;
    out.reserve(pts.size());
    merged = 0;
    if (!(eps > 0.0)) {
        std::set<std::pair<double, double>> seen;
        for (const auto& p : pts) {
            if (seen.insert({p.x, p.y}).second) out.push_back(p);
            else ++merged;
        }
        return out;
    }
    struct KeyHash {
        std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const noexcept {
            return static_cast<std::size_t>(splitmix64(static_cast<std::uint64_t>(k.first) * 0x9e3779b97f4a7c15ULL ^
                                                       static_cast<std::uint64_t>(k.second)));
        }
    };
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>, KeyHash> grid;
    for (const auto& p : pts) {
        const auto gx = static_cast<std::int64_t>(std::floor(p.x / eps));
        const auto gy = static_cast<std::int64_t>(std::floor(p.y / eps));
        bool dup = false;
        for (std::int64_t dx = -1; dx <= 1 && !dup; ++dx) {
            for (std::int64_t dy = -1; dy <= 1 && !dup; ++dy) {
                const auto it = grid.find({gx + dx, gy + dy});
                if (it == grid.end()) continue;
                for (auto k : it->second) {
                    if (std::hypot(out[k].x - p.x, out[k].y - p.y) < eps) {
                        dup = true;
                        break;
                    }
                }
            }
        }
        if (dup) {
            ++merged;
            continue;
        }
        grid[{gx, gy}].push_back(out.size());
        out.push_back(p);
    }
    return out;
}

} // namespace detail

// Equirectangular projection about the centroid of the records.
inline Projection project(const std::vector<BSRecord>& records, double dedup_epsilon = 0.001,
                          std::string source = "records") {
    if (records.empty()) fail(Category::EmptyInput, "no records to project");
    require(dedup_epsilon >= 0.0, "dedup_epsilon must be non-negative");
    double lat0 = 0.0, lon0 = 0.0;
    for (const auto& r : records) {
        lat0 += r.lat;
        lon0 += r.lon;
    }
    lat0 /= static_cast<double>(records.size());
    lon0 /= static_cast<double>(records.size());

    const double k = kEarthRadiusKm * std::numbers::pi / 180.0;
    const double kx = k * std::cos(lat0 * std::numbers::pi / 180.0);
    std::vector<Point2> pts;
    pts.reserve(records.size());
    for (const auto& r : records) pts.push_back({kx * (r.lon - lon0), k * (r.lat - lat0)});

    Projection out;
    out.set.points = detail::dedup(pts, dedup_epsilon, out.merged);
    out.set.lat0 = lat0;
    out.set.lon0 = lon0;
    out.set.source = std::move(source);
    out.set.dedup_epsilon = dedup_epsilon;
    return out;
}

inline void write_points_csv(std::ostream& out, const PointSet& s) {
    out << "# origin=" << format_double(s.lat0) << ',' << format_double(s.lon0) << " source=" << s.source << '\n';
    out << "x_km,y_km\n";
    for (const auto& p : s.points) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

inline PointSet read_points_csv(std::istream& in) {
    PointSet s;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto o = t.find("origin=");
            if (o != std::string_view::npos) {
                const auto rest = t.substr(o + 7);
                const auto comma = rest.find(',');
                const auto space = rest.find(' ');
                if (comma != std::string_view::npos) {
                    const auto lat = parse_number<double>(rest.substr(0, comma));
                    const auto lon = parse_number<double>(rest.substr(comma + 1, space == std::string_view::npos
                                                                                     ? std::string_view::npos
                                                                                     : space - comma - 1));
                    if (lat && lon) {
                        s.lat0 = *lat;
                        s.lon0 = *lon;
                    }
                }
            }
            const auto src = t.find("source=");
            if (src != std::string_view::npos) s.source = std::string(t.substr(src + 7));
            continue;
        }
        if (!header) {
            if (t != "x_km,y_km") fail(Category::MalformedInput, "expected header x_km,y_km");
            header = true;
            continue;
        }
        const auto cells = split_csv_line(t);
        std::optional<double> x, y;
        if (cells.size() == 2) {
            x = parse_number<double>(cells[0]);
            y = parse_number<double>(cells[1]);
        }
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
            fail(Category::MalformedInput, "bad point row at line " + std::to_string(lineno));
        s.points.push_back({*x, *y});
    }
    if (!header || s.points.empty()) fail(Category::EmptyInput, "points CSV holds no points");
    return s;
}

inline PointSet gen_uniform(std::size_t n, double side, std::uint64_t seed) {
    require(n >= 1, "n must be at least 1");
    require(side > 0.0 && std::isfinite(side), "side must be positive");
    Rng rng(derive_seed(seed, 0));
    PointSet s;
    s.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = side * rng.uniform();
        const double y = side * rng.uniform();
        s.points.push_back({x, y});
    }
    std::size_t merged = 0;
    s.points = detail::dedup(s.points, 0.0, merged);
    std::ostringstream tag;
    tag << "uniform:n=" << n << ";side=" << format_double(side) << ";seed=" << seed;
    s.source = tag.str();
    return s;
}

struct FractalParams {
    int levels = 3;
    int branching = 5;
    double scale_ratio = 0.15;
    int leaf_points = 20;
    double side = 100.0;
    double jitter = 0.3;
    std::uint64_t seed = 0;
    double max_points = 5e6;
};

// Hierarchical partition: every cell of side e splits into `branching`
// children of side e * scale_ratio, set at equal angles (random phase) on a
// ring of radius (e - e * scale_ratio) / 2 around the parent centre and
// jittered within jitter * child side. Leaves are rings of `leaf_points`.
inline PointSet gen_fractal(const FractalParams& p) {
    require(p.levels >= 1, "levels must be at least 1");
    require(p.branching >= 2, "branching must be at least 2");
    require(p.scale_ratio > 0.0 && p.scale_ratio < 1.0, "scale_ratio must lie in (0, 1)");
    require(p.leaf_points >= 1, "leaf_points must be at least 1");
    require(p.side > 0.0 && std::isfinite(p.side), "side must be positive");
    require(p.jitter >= 0.0 && p.jitter < 1.0, "jitter must lie in [0, 1)");
    const double total = std::pow(static_cast<double>(p.branching), p.levels) * p.leaf_points;
    if (total > p.max_points)
        fail(Category::TooManyPoints, "fractal would hold " + format_double(total) + " points, cap is " +
                                          format_double(p.max_points));

    Rng rng(derive_seed(p.seed, 1));
    auto ring = [&](const Point2& c, int count, double radius, double jitter_side, std::vector<Point2>& out) {
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        for (int k = 0; k < count; ++k) {
            const double th = phase + 2.0 * std::numbers::pi * k / count;
            const double jx = (rng.uniform() - 0.5) * jitter_side;
            const double jy = (rng.uniform() - 0.5) * jitter_side;
            out.push_back({c.x + radius * std::cos(th) + jx, c.y + radius * std::sin(th) + jy});
        }
    };

    std::vector<Point2> centers{{0.5 * p.side, 0.5 * p.side}};
    double e = p.side;
    for (int level = 0; level < p.levels; ++level) {
        const double ce = e * p.scale_ratio;
        std::vector<Point2> next;
        next.reserve(centers.size() * static_cast<std::size_t>(p.branching));
        for (const auto& c : centers) ring(c, p.branching, 0.5 * (e - ce), p.jitter * ce, next);
        centers = std::move(next);
        e = ce;
    }
    PointSet s;
    s.points.reserve(static_cast<std::size_t>(total));
    for (const auto& c : centers) ring(c, p.leaf_points, 0.5 * e * (1.0 - p.jitter), p.jitter * e, s.points);

    std::size_t merged = 0;
    s.points = detail::dedup(s.points, 0.0, merged);
    std::ostringstream tag;
    tag << "fractal:levels=" << p.levels << ";branching=" << p.branching
        << ";scale_ratio=" << format_double(p.scale_ratio) << ";leaf_points=" << p.leaf_points
        << ";side=" << format_double(p.side) << ";jitter=" << format_double(p.jitter) << ";seed=" << p.seed;
    s.source = tag.str();
    return s;
}

inline PointSet gen_fractal(int levels, int branching, double scale_ratio, int leaf_points, double side,
                            double jitter, std::uint64_t seed) {
    return gen_fractal(FractalParams{levels, branching, scale_ratio, leaf_points, side, jitter, seed});
}

} // namespace celltopo
