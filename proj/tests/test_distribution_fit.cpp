#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace celltopo;

namespace {

// Golden-section maximiser on [lo, hi].
template <class F>
double argmax(F f, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 200 && b - a > 1e-12 * (1 + std::abs(a)); ++i) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Profile log-likelihoods with the scale maximised out analytically.
double weibull_profile(const std::vector<double>& x, double k) {
    const double n = static_cast<double>(x.size());
    long double mk = 0, sl = 0;
    for (double v : x) {
        mk += std::pow(static_cast<long double>(v), k);
        sl += std::log(v);
    }
    return static_cast<double>(n * std::log(k) - n * std::log(mk / n) + (k - 1) * sl - n);
}

double gamma_profile(const std::vector<double>& x, double k) {
    const double n = static_cast<double>(x.size());
    long double s = 0, sl = 0;
    for (double v : x) {
        s += v;
        sl += std::log(v);
    }
    const double theta = static_cast<double>(s / n) / k;
    return static_cast<double>((k - 1) * sl - s / theta - n * std::lgamma(k) - n * k * std::log(theta));
}

std::vector<double> draw(std::size_t n, std::uint64_t seed, Family f, double p1, double p2 = 0) {
    Rng r(seed);
    std::vector<double> x(n);
    for (auto& v : x) {
        switch (f) {
        case Family::LogNormal: v = std::exp(p1 + p2 * r.normal()); break;
        case Family::Weibull: v = p2 * std::pow(r.exponential(), 1 / p1); break;
        case Family::Exponential: v = r.exponential() / p1; break;
        case Family::Rayleigh: v = p1 * std::sqrt(2 * r.exponential()); break;
        case Family::Pareto: v = p1 / std::pow(1 - r.uniform(), 1 / p2); break;
        case Family::Gamma: {
            // integer shape p1: sum of exponentials
            double s = 0;
            for (int i = 0; i < static_cast<int>(p1); ++i) s += r.exponential();
            v = s * p2;
            break;
        }
        }
    }
    return x;
}

FittedDistribution fake(Family f, double rmse) {
    FittedDistribution d;
    d.family = f;
    d.rmse = rmse;
    return d;
}

} // namespace

TEST(ChiSamples, UnitSquareGrid) {
    const auto e = euler_curve(betti_curves(alpha_values(delaunay(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}))));
    const auto s = chi_samples(e, 1000);
    EXPECT_EQ(s.dropped_nonpositive, 292u);
    ASSERT_EQ(s.values.size(), 708u);
    EXPECT_EQ(std::count(s.values.begin(), s.values.end(), 4.0), 707);
    EXPECT_EQ(s.values.back(), 1.0);
}

TEST(ChiSamples, Errors) {
    EulerCurve e;
    e.alphas = {0, 1};
    e.chi = {0, 0};
    EXPECT_CATEGORY(chi_samples(e), Category::NoPositiveSamples);
    EXPECT_CATEGORY(chi_samples(e, 10), Category::InvalidArgument);
}

TEST(EmpiricalPdf, IntegratesToOne) {
    const auto x = draw(5000, 1, Family::LogNormal, 0.0, 0.5);
    const auto p = empirical_pdf(x);
    double mass = 0;
    for (double d : p.densities) mass += d * p.bin_width;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_NEAR(p.bin_centers.front() - 0.5 * p.bin_width, *std::min_element(x.begin(), x.end()), 1e-12);
    EXPECT_NEAR(p.bin_centers.back() + 0.5 * p.bin_width, *std::max_element(x.begin(), x.end()), 1e-9);
}

TEST(EmpiricalPdf, IntegerDataUsesIntegerBins) {
    Rng r(2);
    std::vector<double> x(3000);
    for (auto& v : x) v = static_cast<double>(1 + r.below(40));
    const auto p = empirical_pdf(x);
    EXPECT_EQ(p.bin_width, std::round(p.bin_width));
    EXPECT_EQ(p.bin_centers.front() - 0.5 * p.bin_width, 0.5);
    double mass = 0;
    for (double d : p.densities) mass += d * p.bin_width;
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(EmpiricalPdf, ConstantAndTooFew) {
    const auto p = empirical_pdf(std::vector<double>(60, 3.0));
    ASSERT_EQ(p.bin_centers.size(), 1u);
    EXPECT_EQ(p.bin_centers[0], 3.0);
    EXPECT_CATEGORY(empirical_pdf(std::vector<double>(49, 1.0)), Category::TooFewSamples);
}

TEST(Fit, ExponentialClosedForm) {
    const auto f = fit_family(std::vector<double>{1, 2, 3}, Family::Exponential);
    EXPECT_DOUBLE_EQ(f.param("rate"), 0.5);
    EXPECT_NEAR(f.pdf(2.0), 0.5 * std::exp(-1.0), 1e-15);
}

TEST(Fit, LogNormalClosedForm) {
    const std::vector<double> x{1, std::numbers::e, std::exp(2.0)};
    const auto f = fit_family(x, Family::LogNormal);
    EXPECT_NEAR(f.param("mu"), 1.0, 1e-12);
    EXPECT_NEAR(f.param("sigma"), std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(Fit, RayleighAndPareto) {
    const std::vector<double> x{1, 2, 4};
    EXPECT_NEAR(fit_family(x, Family::Rayleigh).param("sigma"), std::sqrt(21.0 / 6.0), 1e-12);
    const auto p = fit_family(x, Family::Pareto);
    EXPECT_EQ(p.param("xm"), 1.0);
    EXPECT_NEAR(p.param("alpha"), 3.0 / (std::log(2.0) + std::log(4.0)), 1e-12);
}

TEST(Fit, WeibullMatchesProfileLikelihood) {
    for (double k : {0.6, 1.0, 2.5, 7.0}) {
        const auto x = draw(2000, 10, Family::Weibull, k, 3.0);
        const auto f = fit_family(x, Family::Weibull);
        const double ref = argmax([&](double kk) { return weibull_profile(x, kk); }, 0.05, 50);
        EXPECT_NEAR(f.param("shape"), ref, 1e-6 * ref) << k;
        long double mk = 0;
        for (double v : x) mk += std::pow(static_cast<long double>(v), f.param("shape"));
        const double scale = std::pow(static_cast<double>(mk / x.size()), 1 / f.param("shape"));
        EXPECT_NEAR(f.param("scale"), scale, 1e-9 * scale);
    }
}

TEST(Fit, GammaMatchesProfileLikelihood) {
    for (double k : {1.0, 3.0, 9.0}) {
        const auto x = draw(2000, 11, Family::Gamma, k, 0.7);
        const auto f = fit_family(x, Family::Gamma);
        const double ref = argmax([&](double kk) { return gamma_profile(x, kk); }, 0.05, 100);
        EXPECT_NEAR(f.param("shape"), ref, 1e-6 * ref) << k;
        double mean = 0;
        for (double v : x) mean += v;
        EXPECT_NEAR(f.param("shape") * f.param("scale"), mean / x.size(), 1e-9);
    }
}

TEST(Fit, DensitiesIntegrateToOne) {
    const std::vector<double> x = draw(500, 3, Family::LogNormal, 0.2, 0.6);
    for (auto fam : kAllFamilies) {
        const auto f = fit_family(x, fam);
        // trapezoid on a fine log grid from 1e-6 to 1e4
        double mass = 0, prev_x = 1e-6, prev = f.pdf(prev_x);
        for (int i = 1; i <= 200000; ++i) {
            const double t = 1e-6 * std::pow(1e10, i / 200000.0);
            const double d = f.pdf(t);
            if (std::isfinite(prev) && std::isfinite(d)) mass += 0.5 * (prev + d) * (t - prev_x);
            prev_x = t;
            prev = d;
        }
        // heavy Pareto tail past the grid, added analytically
        if (fam == Family::Pareto) mass += std::pow(f.param("xm") / prev_x, f.param("alpha"));
        EXPECT_NEAR(mass, 1.0, 1e-3) << family_name(fam);
    }
}

TEST(Fit, Errors) {
    EXPECT_CATEGORY(fit_family(std::vector<double>{1, 0, 2}, Family::LogNormal), Category::NonPositiveSample);
    EXPECT_CATEGORY(fit_family(std::vector<double>{2, 2, 2}, Family::Weibull), Category::NoConvergence);
    EXPECT_CATEGORY(fit_family(std::vector<double>{2, 2, 2}, Family::Gamma), Category::NoConvergence);
    EXPECT_CATEGORY(fit_family(std::vector<double>{2, 2, 2}, Family::Pareto), Category::NoConvergence);
}

TEST(Families, NamesRoundTrip) {
    for (auto f : kAllFamilies) EXPECT_EQ(family_from_name(family_name(f)), f);
    EXPECT_FALSE(family_from_name("cauchy"));
    EXPECT_EQ(parameter_count(Family::Exponential), 1u);
    EXPECT_EQ(parameter_count(Family::Rayleigh), 1u);
    EXPECT_EQ(parameter_count(Family::Gamma), 2u);
}

TEST(Parsimony, FewerParametersWinWithinTolerance) {
    auto r = order_by_parsimony({fake(Family::LogNormal, 1.00), fake(Family::Exponential, 1.05),
                                 fake(Family::Weibull, 1.50)},
                                0.10);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].family, Family::Exponential);
    EXPECT_EQ(r[1].family, Family::LogNormal);
    EXPECT_EQ(r[2].family, Family::Weibull);
    r = order_by_parsimony({fake(Family::LogNormal, 1.00), fake(Family::Exponential, 1.2)}, 0.10);
    EXPECT_EQ(r[0].family, Family::LogNormal);
    r = order_by_parsimony({fake(Family::LogNormal, 1.00), fake(Family::Exponential, 1.05)}, 0.0);
    EXPECT_EQ(r[0].family, Family::LogNormal);
}

TEST(Parsimony, FailedFitsLast) {
    auto bad = fake(Family::Pareto, std::numeric_limits<double>::infinity());
    bad.error = "x";
    const auto r = order_by_parsimony({bad, fake(Family::Gamma, 2.0)}, 0.1);
    EXPECT_EQ(r[0].family, Family::Gamma);
    EXPECT_EQ(r[1].family, Family::Pareto);
}

TEST(Ranking, RecoversGeneratingFamily) {
    struct Case {
        Family f;
        double p1, p2;
    };
    for (const auto& c : {Case{Family::LogNormal, 1.0, 0.5}, Case{Family::Exponential, 0.3, 0},
                          Case{Family::Weibull, 2.5, 4.0}}) {
        const auto x = draw(20000, 4, c.f, c.p1, c.p2);
        const auto rep = rank_candidates(x);
        EXPECT_EQ(rep.candidates.front().family, c.f) << family_name(c.f);
        EXPECT_EQ(rep.candidates.size(), kAllFamilies.size());
        EXPECT_EQ(rep.sample_count, x.size());
        for (std::size_t i = 1; i < rep.candidates.size(); ++i) EXPECT_TRUE(rep.candidates[i].ok());
    }
}

TEST(Ranking, DropsNonPositiveAndNeedsFifty) {
    auto x = draw(100, 5, Family::Exponential, 1.0);
    x.push_back(0.0);
    x.push_back(-2.0);
    const auto rep = rank_candidates(x);
    EXPECT_EQ(rep.dropped_nonpositive, 2u);
    EXPECT_EQ(rep.sample_count, 100u);
    EXPECT_CATEGORY(rank_candidates(draw(49, 5, Family::Exponential, 1.0)), Category::TooFewSamples);
}
