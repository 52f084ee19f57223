#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "homology.hpp"
#include "random.hpp"
#include "text.hpp"

namespace celltopo {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// ---------------------------------------------------------------- ripples

struct RippleEvent {
    double alpha = 0.0;
    double slope_before = 0.0;
    double slope_after = 0.0;
    double ratio = 0.0; // max(|after/before|, |before/after|)
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
};

struct RippleOptions {
    double min_slope_ratio = 5.0;
    double window_fraction = 0.10;
    std::size_t grid_size = 256;
    double min_slope = 0.3;       // steeper half must decline at least this fast
    std::int64_t stop_beta0 = 2;  // scan ends where beta0 first drops to this
};

namespace detail {

// Positive part of a step curve sampled on a uniform grid in log(alpha).
struct LogGrid {
    std::vector<double> x;
    double lo = 0.0, hi = 0.0;
    std::size_t first = 0; // index of the first positive critical alpha
    std::vector<double> log_alpha; // log of alphas[first..]

    std::size_t step(double xv) const {
        const auto it = std::upper_bound(log_alpha.begin(), log_alpha.end(), xv);
        return first + static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - log_alpha.begin() - 1, 0));
    }
};

inline std::optional<LogGrid> log_grid(const std::vector<double>& alphas, std::size_t end_index,
                                       std::size_t size) {
    LogGrid g;
    while (g.first < alphas.size() && !(alphas[g.first] > 0.0)) ++g.first;
    if (g.first >= alphas.size() || end_index <= g.first) return std::nullopt;
    for (std::size_t i = g.first; i < alphas.size(); ++i) g.log_alpha.push_back(std::log(alphas[i]));
    g.lo = g.log_alpha.front();
    g.hi = g.log_alpha[end_index - g.first];
    if (!(g.hi > g.lo)) return std::nullopt;
    g.x.resize(size);
    for (std::size_t k = 0; k < size; ++k)
        g.x[k] = g.lo + (g.hi - g.lo) * static_cast<double>(k) / static_cast<double>(size - 1);
    g.x.back() = g.hi;
    return g;
}

} // namespace detail

inline std::vector<RippleEvent> detect_ripples(const BettiCurve& curve, const RippleOptions& opt = {}) {
    require(opt.min_slope_ratio > 1.0, "min_slope_ratio must exceed 1");
    require(opt.window_fraction > 0.0 && opt.window_fraction < 1.0, "window_fraction must lie in (0, 1)");
    require(opt.grid_size >= 16, "grid_size must be at least 16");
    if (curve.size() < 8)
        fail(Category::CurveTooShort, "ripple detection needs at least 8 critical scales, got " +
                                          std::to_string(curve.size()));

    std::size_t end = curve.size() - 1;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.alphas[i] > 0.0 && curve.beta0[i] <= opt.stop_beta0) {
            end = i;
            break;
        }
    }
    const auto grid = detail::log_grid(curve.alphas, end, opt.grid_size);
    if (!grid) return {};
    const auto& xs = grid->x;
    const std::size_t G = xs.size();
    std::vector<double> ys(G);
    for (std::size_t k = 0; k < G; ++k)
        ys[k] = std::log(static_cast<double>(std::max<std::int64_t>(curve.beta0[grid->step(xs[k])], 1)));

    const double width = opt.window_fraction * (grid->hi - grid->lo);
    const double half = 0.5 * width;

    struct Candidate {
        std::size_t k;
        double before, after, ratio;
    };
    std::vector<double> ratio(G, 0.0);
    std::vector<Candidate> scored(G);
    for (std::size_t k = 0; k < G; ++k) {
        scored[k] = {k, 0.0, 0.0, 0.0};
        if (xs[k] - half < grid->lo || xs[k] + half > grid->hi) continue;
        std::vector<double> lx, ly, rx, ry;
        for (std::size_t j = 0; j < G; ++j) {
            if (xs[j] >= xs[k] - half && xs[j] < xs[k]) {
                lx.push_back(xs[j]);
                ly.push_back(ys[j]);
            } else if (xs[j] >= xs[k] && xs[j] <= xs[k] + half) {
                rx.push_back(xs[j]);
                ry.push_back(ys[j]);
            }
        }
        if (lx.size() < 2 || rx.size() < 2) continue;
        const double sb = least_squares(lx, ly).slope;
        const double sa = least_squares(rx, ry).slope;
        const double big = std::max(std::abs(sa), std::abs(sb));
        const double small = std::min(std::abs(sa), std::abs(sb));
        if (big < opt.min_slope) continue;
        ratio[k] = big / std::max(small, 1e-9);
        scored[k] = {k, sb, sa, ratio[k]};
    }

    std::vector<Candidate> peaks;
    for (std::size_t k = 0; k < G; ++k) {
        if (ratio[k] < opt.min_slope_ratio) continue;
        if (k > 0 && ratio[k] < ratio[k - 1]) continue;
        if (k + 1 < G && ratio[k] < ratio[k + 1]) continue;
        peaks.push_back(scored[k]);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Candidate& a, const Candidate& b) { return a.ratio > b.ratio; });
    std::vector<Candidate> kept;
    for (const auto& c : peaks) {
        const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Candidate& o) {
            return std::abs(xs[c.k] - xs[o.k]) >= width;
        });
        if (clear) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return a.k < b.k; });

    std::vector<RippleEvent> out;
    for (const auto& c : kept)
        out.push_back({std::exp(xs[c.k]), c.before, c.after, c.ratio, std::exp(xs[c.k] - half),
                       std::exp(xs[c.k] + half)});
    return out;
}

inline std::vector<RippleEvent> detect_ripples(const BettiCurve& curve, double min_slope_ratio,
                                               double window_fraction) {
    RippleOptions opt;
    opt.min_slope_ratio = min_slope_ratio;
    opt.window_fraction = window_fraction;
    return detect_ripples(curve, opt);
}

// ---------------------------------------------------------------- peaks

struct PeakEvent {
    double alpha = 0.0;
    std::int64_t height = 0;
    double prominence = 0.0;
};

struct PeakOptions {
    double min_prominence_fraction = 0.05;
    std::size_t grid_size = 256;
    std::size_t smoothing = 5; // centred moving-average width, 1 disables
};

namespace detail {

struct Prominence {
    double value;
    std::size_t left_base, right_base;
};

// Topographic prominence of the plateau y[l..r], which must be a strict local
// maximum with neighbours on both sides.
inline Prominence prominence(const std::vector<double>& y, std::size_t l, std::size_t r) {
    const double top = y[l];
    double left_min = top, right_min = top;
    std::size_t lb = l, rb = r;
    for (std::size_t j = l; j-- > 0;) {
        if (y[j] > top) break;
        if (y[j] < left_min) {
            left_min = y[j];
            lb = j;
        }
    }
    for (std::size_t j = r + 1; j < y.size(); ++j) {
        if (y[j] > top) break;
        if (y[j] < right_min) {
            right_min = y[j];
            rb = j;
        }
    }
    return {top - std::max(left_min, right_min), lb, rb};
}

} // namespace detail

inline std::vector<PeakEvent> detect_peaks(const BettiCurve& curve, const PeakOptions& opt = {}) {
    require(opt.min_prominence_fraction > 0.0 && opt.min_prominence_fraction <= 1.0,
            "min_prominence_fraction must lie in (0, 1]");
    require(opt.grid_size >= 3, "grid_size must be at least 3");
    require(opt.smoothing >= 1, "smoothing width must be at least 1");
    if (curve.size() == 0) return {};

    // the scan ends where beta1 returns to zero for the last time
    std::size_t end = curve.size() - 1;
    while (end > 0 && curve.beta1[end] == 0 && curve.beta1[end - 1] == 0) --end;
    const auto grid = detail::log_grid(curve.alphas, end, opt.grid_size);
    if (!grid) return {};
    const auto& xs = grid->x;
    const std::size_t G = xs.size();

    std::vector<double> raw(G + 2), smooth(G + 2);
    raw.front() = grid->first > 0 ? static_cast<double>(curve.beta1[grid->first - 1])
                                  : static_cast<double>(curve.beta1[grid->first]);
    for (std::size_t k = 0; k < G; ++k) raw[k + 1] = static_cast<double>(curve.beta1[grid->step(xs[k])]);
    raw.back() = static_cast<double>(curve.beta1[end]);

    const auto half = static_cast<std::ptrdiff_t>(opt.smoothing / 2);
    const auto width = static_cast<std::ptrdiff_t>(opt.smoothing);
    smooth.front() = raw.front();
    smooth.back() = raw.back();
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(G); ++k) {
        double s = 0.0;
        for (std::ptrdiff_t j = k - half; j < k - half + width; ++j)
            s += raw[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(G) - 1) + 1)];
        smooth[static_cast<std::size_t>(k) + 1] = s / static_cast<double>(width);
    }
    const double top = *std::max_element(smooth.begin() + 1, smooth.end() - 1);
    if (!(top > 0.0)) return {};
    const double threshold = opt.min_prominence_fraction * top;

    std::vector<PeakEvent> out;
    std::vector<std::size_t> seen;
    const std::size_t last = smooth.size() - 1;
    for (std::size_t i = 1; i < last;) {
        std::size_t r = i;
        while (r + 1 < last && smooth[r + 1] == smooth[i]) ++r;
        const bool is_max = smooth[i - 1] < smooth[i] && smooth[r + 1] < smooth[i];
        if (is_max) {
            const auto p = detail::prominence(smooth, i, r);
            if (p.value >= threshold && p.value > 0.0) {
                // climb the raw curve to its nearest local maximum
                std::size_t j = i;
                for (;;) {
                    if (j + 1 < last && raw[j + 1] > raw[j]) ++j;
                    else if (j > 1 && raw[j - 1] > raw[j]) --j;
                    else break;
                }
                while (j > 1 && raw[j - 1] == raw[j]) --j;
                if (std::find(seen.begin(), seen.end(), j) == seen.end()) {
                    seen.push_back(j);
                    const auto h = static_cast<std::int64_t>(raw[j]);
                    out.push_back({std::exp(xs[j - 1]), h, std::min(p.value, static_cast<double>(h))});
                }
            }
        }
        i = r + 1;
    }
    std::sort(out.begin(), out.end(), [](const PeakEvent& a, const PeakEvent& b) { return a.alpha < b.alpha; });
    return out;
}

inline std::vector<PeakEvent> detect_peaks(const BettiCurve& curve, double min_prominence_fraction) {
    PeakOptions opt;
    opt.min_prominence_fraction = min_prominence_fraction;
    return detect_peaks(curve, opt);
}

inline void write_features_csv(std::ostream& out, const std::vector<RippleEvent>& ripples,
                               const std::vector<PeakEvent>& peaks) {
    out << "kind,alpha,value,extra\n";
    for (const auto& r : ripples)
        out << "ripple," << format_double(r.alpha) << ',' << format_double(r.ratio)
            << ",slope_before=" << format_double(r.slope_before)
            << ";slope_after=" << format_double(r.slope_after)
            << ";alpha_lo=" << format_double(r.alpha_lo) << ";alpha_hi=" << format_double(r.alpha_hi)
            << '\n';
    for (const auto& p : peaks)
        out << "peak," << format_double(p.alpha) << ',' << p.height
            << ",prominence=" << format_double(p.prominence) << '\n';
}

// ---------------------------------------------------------------- Hurst

struct RsPoint {
    std::size_t n = 0;
    double rs = 0.0;
};

struct HurstEstimate {
    double h = 0.0;
    double c = 0.0;
    double r_squared = 0.0;
    std::vector<RsPoint> points;
};

// Mean R/S over the floor(N/n) blocks of length n; nullopt when every block
// is constant.
inline std::optional<double> rescaled_range(std::span<const double> series, std::size_t n) {
    require(n >= 2 && n <= series.size(), "block length must lie in [2, N]");
    const std::size_t blocks = series.size() / n;
    double sum = 0.0;
    std::size_t used = 0;
    std::vector<double> y(n);
    for (std::size_t a = 0; a < blocks; ++a) {
        const auto block = series.subspan(a * n, n);
        const auto [lo, hi] = std::minmax_element(block.begin(), block.end());
        if (*lo == *hi) continue;
        double mu = 0.0;
        for (double v : block) mu += v;
        mu /= static_cast<double>(n);
        double z = 0.0, zmin = 0.0, zmax = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = block[i] - mu;
            z += d;
            zmin = i == 0 ? z : std::min(zmin, z);
            zmax = i == 0 ? z : std::max(zmax, z);
            ss += d * d;
        }
        const double s = std::sqrt(ss / static_cast<double>(n));
        sum += (zmax - zmin) / s;
        ++used;
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
}

// Powers of two from 16 up to N/4.
inline std::vector<std::size_t> default_block_lengths(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t b = 16; b <= n / 4; b *= 2) out.push_back(b);
    return out;
}

inline HurstEstimate rs_hurst(std::span<const double> series, std::span<const std::size_t> block_lengths) {
    const std::size_t N = series.size();
    if (N < 32) fail(Category::SeriesTooShort, "R/S analysis needs at least 32 values, got " + std::to_string(N));
    require(block_lengths.size() >= 3, "R/S regression needs at least 3 block lengths");
    for (auto n : block_lengths)
        require(n >= 4 && n <= N / 2, "block length " + std::to_string(n) + " outside [4, N/2]");

    HurstEstimate est;
    std::vector<double> lx, ly;
    for (auto n : block_lengths) {
        const auto rs = rescaled_range(series, n);
        if (!rs)
            fail(Category::AllBlocksZeroVariance, "every block of length " + std::to_string(n) + " is constant");
        est.points.push_back({n, *rs});
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(*rs));
    }
    const auto fit = least_squares(lx, ly);
    est.h = fit.slope;
    est.c = std::exp(fit.intercept);
    est.r_squared = fit.r_squared;
    return est;
}

inline HurstEstimate rs_hurst(std::span<const double> series) {
    const auto ladder = default_block_lengths(series.size());
    if (ladder.size() < 3)
        fail(Category::SeriesTooShort, "default block ladder needs at least 256 values, got " +
                                           std::to_string(series.size()));
    return rs_hurst(series, ladder);
}

enum class SeriesOrder { Ascending, Record };

inline std::vector<double> distance_series(std::span<const Point2> points, std::size_t center, double radius,
                                           SeriesOrder order = SeriesOrder::Ascending) {
    if (center >= points.size())
        fail(Category::IndexOutOfRange, "center index " + std::to_string(center) + " out of range");
    require(radius > 0.0, "radius must be positive");
    const Point2 c = points[center];
    std::vector<double> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == center) continue;
        const double d = std::hypot(points[i].x - c.x, points[i].y - c.y);
        if (d < radius) out.push_back(d);
    }
    if (order == SeriesOrder::Ascending) std::sort(out.begin(), out.end());
    return out;
}

struct HurstTrialOptions {
    std::size_t trials = 100;
    std::optional<std::pair<double, double>> radius_range; // default: 5%..25% of the bbox diagonal
    std::size_t min_series_len = 256;
    std::uint64_t seed = 0;
    SeriesOrder order = SeriesOrder::Ascending;
};

struct HurstTrials {
    double mean_h = 0.0;
    std::vector<HurstEstimate> estimates;
    std::size_t attempts = 0;
    double radius_lo = 0.0, radius_hi = 0.0;
};

inline std::pair<double, double> default_radius_range(std::span<const Point2> points) {
    double x0 = points[0].x, x1 = x0, y0 = points[0].y, y1 = y0;
    for (const auto& p : points) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    const double diag = std::hypot(x1 - x0, y1 - y0);
    return {0.05 * diag, 0.25 * diag};
}

inline HurstTrials hurst_trials(std::span<const Point2> points, const HurstTrialOptions& opt = {}) {
    require(opt.trials >= 1, "trials must be at least 1");
    require(!points.empty(), "point set is empty");
    const auto [lo, hi] = opt.radius_range ? *opt.radius_range : default_radius_range(points);
    require(lo > 0.0 && hi >= lo, "radius range must satisfy 0 < lo <= hi");
    require(opt.min_series_len >= 32, "min_series_len must be at least 32");

    HurstTrials out;
    out.radius_lo = lo;
    out.radius_hi = hi;
    const std::size_t cap = 10 * opt.trials;
    double sum = 0.0;
    while (out.estimates.size() < opt.trials) {
        if (out.attempts == cap)
            fail(Category::InsufficientData, "only " + std::to_string(out.estimates.size()) + " of " +
                                                 std::to_string(opt.trials) + " trials succeeded in " +
                                                 std::to_string(cap) + " attempts");
        Rng rng(derive_seed(opt.seed, out.attempts));
        ++out.attempts;
        const auto center = static_cast<std::size_t>(rng.below(points.size()));
        const double radius = rng.uniform(lo, hi);
        const auto series = distance_series(points, center, radius, opt.order);
        if (series.size() < opt.min_series_len) continue;
        const auto ladder = default_block_lengths(series.size());
        if (ladder.size() < 3) continue;
        try {
            out.estimates.push_back(rs_hurst(series, ladder));
        } catch (const Error& e) {
            if (e.category() != Category::AllBlocksZeroVariance) throw;
            continue;
        }
        sum += out.estimates.back().h;
    }
    out.mean_h = sum / static_cast<double>(out.estimates.size());
    return out;
}

} // namespace celltopo
