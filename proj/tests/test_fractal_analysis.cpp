#include <cmath>
#include <sstream>

#include "test_support.hpp"

using namespace celltopo;
using testing_support::random_points;

namespace {

// beta0 = C a^-s1 below the break, C b^(s2-s1) a^-s2 above it (continuous).
BettiCurve two_regime(double s1, double s2, double brk, double C = 1e9, std::size_t n = 2000) {
    BettiCurve c;
    c.alphas.push_back(0.0);
    c.beta0.push_back(static_cast<std::int64_t>(C * std::pow(0.01, -s1)));
    c.beta1.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 0.01 * std::pow(1e4, static_cast<double>(i) / static_cast<double>(n - 1));
        const double v = a < brk ? C * std::pow(a, -s1) : C * std::pow(brk, s2 - s1) * std::pow(a, -s2);
        c.alphas.push_back(a);
        c.beta0.push_back(std::max<std::int64_t>(static_cast<std::int64_t>(std::llround(v)), 1));
        c.beta1.push_back(0);
    }
    return c;
}

// Gaussian bumps in log(alpha) for beta1, ending at zero.
BettiCurve bumps(const std::vector<std::pair<double, double>>& centres_heights, double width = 0.3) {
    BettiCurve c;
    c.alphas.push_back(0.0);
    c.beta0.push_back(1000);
    c.beta1.push_back(0);
    for (int i = 0; i < 3000; ++i) {
        const double a = 0.01 * std::pow(1e4, i / 2999.0);
        double v = 0;
        for (const auto& [m, h] : centres_heights) {
            const double z = (std::log(a) - std::log(m)) / width;
            v += h * std::exp(-z * z);
        }
        c.alphas.push_back(a);
        c.beta0.push_back(1);
        c.beta1.push_back(std::llround(v));
    }
    c.beta1.back() = 0;
    return c;
}

// R/S straight from the definition, long double throughout.
long double rs_oracle(const std::vector<double>& x, std::size_t n) {
    long double total = 0;
    std::size_t used = 0;
    for (std::size_t a = 0; a + n <= x.size(); a += n) {
        long double mean = 0;
        for (std::size_t i = 0; i < n; ++i) mean += x[a + i];
        mean /= n;
        std::vector<long double> z(n + 1, 0);
        long double var = 0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i + 1] = z[i] + (x[a + i] - mean);
            var += (x[a + i] - mean) * (x[a + i] - mean);
        }
        // z[0] = 0 and z[n] = 0 (up to rounding) so including them does not move the range
        const auto [lo, hi] = std::minmax_element(z.begin() + 1, z.end());
        if (var == 0) continue;
        total += (*hi - *lo) / std::sqrt(var / n);
        ++used;
    }
    return total / used;
}

} // namespace

TEST(LeastSquares, ExactLine) {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = least_squares(x, y);
    EXPECT_DOUBLE_EQ(f.slope, 2.0);
    EXPECT_DOUBLE_EQ(f.intercept, 1.0);
    EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
}

TEST(Ripples, TwoRegimeCurveHasOneRippleAtTheBreak) {
    const auto r = detect_ripples(two_regime(0.3, 2.5, 1.0));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_GE(r[0].alpha, 0.8);
    EXPECT_LE(r[0].alpha, 1.25);
    EXPECT_NEAR(r[0].slope_before, -0.3, 0.05);
    EXPECT_NEAR(r[0].slope_after, -2.5, 0.2);
    EXPECT_LT(r[0].alpha_lo, r[0].alpha);
    EXPECT_GT(r[0].alpha_hi, r[0].alpha);
}

TEST(Ripples, BreakFoundWhereverItSits) {
    for (double brk : {0.1, 0.5, 3.0}) {
        const auto r = detect_ripples(two_regime(0.2, 2.0, brk));
        ASSERT_EQ(r.size(), 1u) << brk;
        EXPECT_NEAR(std::log(r[0].alpha), std::log(brk), std::log(1.25)) << brk;
    }
}

TEST(Ripples, PowerLawHasNone) {
    EXPECT_TRUE(detect_ripples(two_regime(1.5, 1.5, 1.0)).empty());
    EXPECT_TRUE(detect_ripples(two_regime(0.5, 0.5, 1.0)).empty());
}

TEST(Ripples, MildBendBelowThreshold) {
    // slope ratio 2 is below the default 5
    EXPECT_TRUE(detect_ripples(two_regime(1.0, 2.0, 1.0)).empty());
    EXPECT_EQ(detect_ripples(two_regime(1.0, 2.0, 1.0), 1.5, 0.10).size(), 1u);
}

TEST(Ripples, Errors) {
    BettiCurve c;
    c.alphas = {0, 1, 2};
    c.beta0 = {3, 2, 1};
    c.beta1 = {0, 0, 0};
    EXPECT_CATEGORY(detect_ripples(c), Category::CurveTooShort);
    const auto ok = two_regime(0.3, 2.5, 1.0);
    EXPECT_CATEGORY(detect_ripples(ok, 1.0, 0.1), Category::InvalidArgument);
    EXPECT_CATEGORY(detect_ripples(ok, 5.0, 0.0), Category::InvalidArgument);
}

TEST(Ripples, UniformPointsHaveNone) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto p = gen_uniform(2000, 100.0, s);
        EXPECT_TRUE(detect_ripples(betti_curves(alpha_values(delaunay(p.points)))).empty()) << s;
    }
}

TEST(Ripples, FractalPointsHaveSeveral) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto p = gen_fractal(3, 5, 0.15, 20, 100.0, 0.3, s);
        EXPECT_GE(detect_ripples(betti_curves(alpha_values(delaunay(p.points)))).size(), 2u) << s;
    }
}

TEST(Peaks, TwoSeparatedBumps) {
    const auto p = detect_peaks(bumps({{0.1, 100}, {3.0, 60}}));
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(std::log(p[0].alpha), std::log(0.1), 0.1);
    EXPECT_NEAR(std::log(p[1].alpha), std::log(3.0), 0.1);
    EXPECT_EQ(p[0].height, 100);
    EXPECT_EQ(p[1].height, 60);
    EXPECT_LE(p[1].prominence, 60.0);
    EXPECT_GT(p[1].prominence, 50.0);
}

TEST(Peaks, SmallBumpBelowProminenceThreshold) {
    const auto c = bumps({{0.1, 100}, {3.0, 3}});
    EXPECT_EQ(detect_peaks(c).size(), 1u);
    EXPECT_EQ(detect_peaks(c, 0.01).size(), 2u);
}

TEST(Peaks, FlatZeroCurveHasNone) {
    const auto c = bumps({});
    EXPECT_TRUE(detect_peaks(c).empty());
}

TEST(Peaks, UniformHasOneFractalHasTwo) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto u = gen_uniform(2000, 100.0, s);
        EXPECT_EQ(detect_peaks(betti_curves(alpha_values(delaunay(u.points)))).size(), 1u) << s;
        const auto f = gen_fractal(3, 5, 0.15, 20, 100.0, 0.3, s);
        EXPECT_EQ(detect_peaks(betti_curves(alpha_values(delaunay(f.points)))).size(), 2u) << s;
    }
}

TEST(Peaks, HeightIsARealCurveValue) {
    const auto c = betti_curves(alpha_values(delaunay(random_points(1500, 2))));
    for (const auto& p : detect_peaks(c)) {
        EXPECT_EQ(c.beta1_at(p.alpha), p.height);
        EXPECT_GT(p.prominence, 0.0);
        EXPECT_LE(p.prominence, static_cast<double>(p.height));
    }
}

TEST(FeaturesCsv, Format) {
    std::ostringstream out;
    write_features_csv(out, {{1.0, -0.5, -3.0, 6.0, 0.5, 2.0}}, {{0.25, 7, 3.5}});
    EXPECT_EQ(out.str(), "kind,alpha,value,extra\n"
                         "ripple,1,6,slope_before=-0.5;slope_after=-3;alpha_lo=0.5;alpha_hi=2\n"
                         "peak,0.25,7,prominence=3.5\n");
}

TEST(RescaledRange, FourValues) {
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_NEAR(*rescaled_range(x, 4), 1.7888543819998317, 1e-12);
}

TEST(RescaledRange, MatchesDefinition) {
    Rng rng(4);
    std::vector<double> x(1000);
    for (auto& v : x) v = rng.normal() * 3 + 10;
    for (std::size_t n : {4u, 7u, 16u, 100u, 333u, 1000u})
        EXPECT_NEAR(*rescaled_range(x, n), static_cast<double>(rs_oracle(x, n)), 1e-9) << n;
}

TEST(RescaledRange, ConstantBlocksSkipped) {
    std::vector<double> x(64, 5.0);
    EXPECT_FALSE(rescaled_range(x, 16).has_value());
    x[3] = 6.0;
    // only the first block varies
    const std::vector<double> first(x.begin(), x.begin() + 16);
    EXPECT_DOUBLE_EQ(*rescaled_range(x, 16), *rescaled_range(first, 16));
}

TEST(Hurst, IidNoiseNearOneHalf) {
    double sum = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s);
        std::vector<double> x(4096);
        for (auto& v : x) v = rng.normal();
        const auto h = rs_hurst(x);
        EXPECT_EQ(h.points.size(), default_block_lengths(4096).size());
        sum += h.h;
    }
    EXPECT_GE(sum / 20, 0.45);
    EXPECT_LE(sum / 20, 0.62);
}

TEST(Hurst, TrendingSeriesIsPersistent) {
    Rng rng(1);
    std::vector<double> x(4096);
    double w = 0;
    for (auto& v : x) v = (w += rng.normal());
    EXPECT_GT(rs_hurst(x).h, 0.9);
}

TEST(Hurst, PowerOfTwoLadder) {
    EXPECT_EQ(default_block_lengths(4096), (std::vector<std::size_t>{16, 32, 64, 128, 256, 512, 1024}));
    EXPECT_EQ(default_block_lengths(256), (std::vector<std::size_t>{16, 32, 64}));
}

TEST(Hurst, Errors) {
    EXPECT_CATEGORY(rs_hurst(std::vector<double>(4096, 1.0)), Category::AllBlocksZeroVariance);
    EXPECT_CATEGORY(rs_hurst(std::vector<double>(31, 1.0)), Category::SeriesTooShort);
    EXPECT_CATEGORY(rs_hurst(std::vector<double>(200, 1.0)), Category::SeriesTooShort);
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<double>(i));
    const std::vector<std::size_t> bad{4, 8, 60};
    EXPECT_CATEGORY(rs_hurst(x, bad), Category::InvalidArgument);
    const std::vector<std::size_t> ok{4, 8, 16};
    EXPECT_NO_THROW(rs_hurst(x, ok));
}

TEST(DistanceSeries, RadiusIsStrict) {
    const std::vector<Point2> p{{0, 0}, {1, 0}, {0, 2}, {3, 0}, {0, 2.5}};
    EXPECT_EQ(distance_series(p, 0, 2.5), (std::vector<double>{1, 2}));
    EXPECT_EQ(distance_series(p, 0, 2.5000001), (std::vector<double>{1, 2, 2.5}));
    EXPECT_CATEGORY(distance_series(p, 5, 1.0), Category::IndexOutOfRange);
}

TEST(DistanceSeries, RecordOrderKeepsInputOrder) {
    const std::vector<Point2> p{{0, 0}, {3, 0}, {1, 0}, {2, 0}};
    EXPECT_EQ(distance_series(p, 0, 10, SeriesOrder::Record), (std::vector<double>{3, 1, 2}));
    EXPECT_EQ(distance_series(p, 0, 10, SeriesOrder::Ascending), (std::vector<double>{1, 2, 3}));
}

TEST(HurstTrials, DeterministicAndWithinRange) {
    const auto p = gen_uniform(3000, 100.0, 1).points;
    HurstTrialOptions o;
    o.trials = 20;
    o.seed = 9;
    const auto a = hurst_trials(p, o), b = hurst_trials(p, o);
    EXPECT_EQ(a.mean_h, b.mean_h);
    EXPECT_EQ(a.estimates.size(), 20u);
    EXPECT_GE(a.attempts, 20u);
    const auto [lo, hi] = default_radius_range(p);
    EXPECT_EQ(a.radius_lo, lo);
    EXPECT_EQ(a.radius_hi, hi);
    double sum = 0;
    for (const auto& e : a.estimates) sum += e.h;
    EXPECT_NEAR(a.mean_h, sum / 20, 1e-12);
}

TEST(HurstTrials, TooFewPointsIsInsufficientData) {
    const auto p = gen_uniform(500, 100.0, 1).points;
    HurstTrialOptions o;
    o.trials = 5;
    EXPECT_CATEGORY(hurst_trials(p, o), Category::InsufficientData);
}

TEST(HurstTrials, FractalIsMorePersistentThanUniform) {
    HurstTrialOptions o;
    o.trials = 30;
    const auto f = hurst_trials(gen_fractal(3, 5, 0.15, 20, 100.0, 0.3, 2).points, o);
    const auto u = hurst_trials(gen_uniform(2500, 100.0, 2).points, o);
    EXPECT_GT(f.mean_h, u.mean_h);
    EXPECT_GE(f.mean_h, 0.8);
}
