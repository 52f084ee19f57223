#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "errors.hpp"
#include "homology.hpp"

namespace celltopo {

struct ChiSamples {
    std::vector<double> values;
    std::size_t dropped_nonpositive = 0;
};

// chi sampled at alpha_k = alpha_max * k / grid_size, k = 1..grid_size;
// only strictly positive values are kept.
inline ChiSamples chi_samples(const EulerCurve& e, std::size_t grid_size = 1000) {
    require(grid_size >= 100, "grid_size must be at least 100");
    require(!e.alphas.empty(), "Euler curve is empty");
    const double alpha_max = e.alphas.back();
    ChiSamples out;
    out.values.reserve(grid_size);
    for (std::size_t k = 1; k <= grid_size; ++k) {
        const double a = k == grid_size ? alpha_max
                                        : alpha_max * static_cast<double>(k) / static_cast<double>(grid_size);
        const auto chi = e.chi_at(a);
        if (chi > 0) out.values.push_back(static_cast<double>(chi));
        else ++out.dropped_nonpositive;
    }
    if (out.values.empty()) fail(Category::NoPositiveSamples, "no positive Euler characteristic on the grid");
    return out;
}

struct EmpiricalPdf {
    std::vector<double> bin_centers;
    std::vector<double> densities;
    double bin_width = 0.0;
};

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> v, double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

// Freedman-Diaconis histogram (Sturges when IQR = 0). Integer-valued data
// get whole-number widths with bins centred on integers.
inline EmpiricalPdf empirical_pdf(std::span<const double> samples, std::size_t max_bins = 100000) {
    const std::size_t n = samples.size();
    if (n < 50) fail(Category::TooFewSamples, "histogram needs at least 50 samples, got " + std::to_string(n));
    std::vector<double> v(samples.begin(), samples.end());
    for (double x : v) require(std::isfinite(x), "non-finite sample");
    std::sort(v.begin(), v.end());
    const double mn = v.front(), mx = v.back();

    EmpiricalPdf pdf;
    if (mn == mx) {
        pdf.bin_centers = {mn};
        pdf.densities = {1.0};
        pdf.bin_width = 1.0;
        return pdf;
    }
    const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
    const auto dn = static_cast<double>(n);
    double h = iqr > 0.0 ? 2.0 * iqr * std::cbrt(1.0 / dn) : (mx - mn) / (std::ceil(std::log2(dn)) + 1.0);
    const bool integral = std::all_of(v.begin(), v.end(), [](double x) {
        return std::abs(x) < 0x1p52 && x == std::round(x);
    });

    double lo;
    std::size_t bins;
    if (integral) {
        h = std::max(1.0, std::round(h));
        lo = mn - 0.5;
        const double need = std::floor((mx - lo) / h) + 1.0;
        if (need > static_cast<double>(max_bins)) h = std::ceil((mx - lo) / static_cast<double>(max_bins - 1));
        bins = static_cast<std::size_t>(std::floor((mx - lo) / h)) + 1;
    } else {
        lo = mn;
        const double need = std::max(1.0, std::ceil((mx - mn) / h));
        bins = static_cast<std::size_t>(std::min(need, static_cast<double>(max_bins)));
        h = (mx - mn) / static_cast<double>(bins);
    }

    std::vector<double> count(bins, 0.0);
    for (double x : v) {
        auto i = static_cast<std::size_t>(std::floor((x - lo) / h));
        count[std::min(i, bins - 1)] += 1.0;
    }
    pdf.bin_width = h;
    pdf.bin_centers.resize(bins);
    pdf.densities.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        pdf.bin_centers[i] = lo + (static_cast<double>(i) + 0.5) * h;
        pdf.densities[i] = count[i] / (dn * h);
    }
    return pdf;
}

enum class Family { LogNormal, Weibull, Gamma, Exponential, Rayleigh, Pareto };

inline constexpr std::array<Family, 6> kAllFamilies{Family::LogNormal, Family::Weibull, Family::Gamma,
                                                    Family::Exponential, Family::Rayleigh, Family::Pareto};

constexpr std::string_view family_name(Family f) noexcept {
    switch (f) {
    case Family::LogNormal: return "lognormal";
    case Family::Weibull: return "weibull";
    case Family::Gamma: return "gamma";
    case Family::Exponential: return "exponential";
    case Family::Rayleigh: return "rayleigh";
    case Family::Pareto: return "pareto";
    }
    return "unknown";
}

inline std::optional<Family> family_from_name(std::string_view s) {
    for (auto f : kAllFamilies)
        if (family_name(f) == s) return f;
    return std::nullopt;
}

constexpr std::size_t parameter_count(Family f) noexcept {
    return (f == Family::Exponential || f == Family::Rayleigh) ? 1 : 2;
}

struct Param {
    std::string name;
    double value = 0.0;
};

struct FittedDistribution {
    Family family = Family::LogNormal;
    std::vector<Param> params;
    double rmse = 0.0;
    std::string error; // set when the fit failed; rmse is then +inf

    bool ok() const { return error.empty(); }

    double param(std::string_view name) const {
        for (const auto& p : params)
            if (p.name == name) return p.value;
        fail(Category::InvalidArgument, "no parameter '" + std::string(name) + "'");
    }

    double pdf(double x) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (family) {
        case Family::LogNormal: {
            if (x <= 0.0) return 0.0;
            const double mu = params[0].value, sigma = params[1].value;
            const double z = (std::log(x) - mu) / sigma;
            return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * std::numbers::pi));
        }
        case Family::Weibull: {
            const double k = params[0].value, lambda = params[1].value;
            if (x < 0.0) return 0.0;
            if (x == 0.0) return k < 1.0 ? inf : (k == 1.0 ? 1.0 / lambda : 0.0);
            const double t = x / lambda;
            return (k / lambda) * std::pow(t, k - 1.0) * std::exp(-std::pow(t, k));
        }
        case Family::Gamma: {
            const double k = params[0].value, theta = params[1].value;
            if (x < 0.0) return 0.0;
            if (x == 0.0) return k < 1.0 ? inf : (k == 1.0 ? 1.0 / theta : 0.0);
            return std::exp((k - 1.0) * std::log(x) - x / theta - std::lgamma(k) - k * std::log(theta));
        }
        case Family::Exponential: {
            const double rate = params[0].value;
            return x < 0.0 ? 0.0 : rate * std::exp(-rate * x);
        }
        case Family::Rayleigh: {
            const double s = params[0].value;
            return x < 0.0 ? 0.0 : x / (s * s) * std::exp(-x * x / (2.0 * s * s));
        }
        case Family::Pareto: {
            const double xm = params[0].value, a = params[1].value;
            return x < xm ? 0.0 : (a / x) * std::pow(xm / x, a);
        }
        }
        return 0.0;
    }
};

namespace detail {

inline constexpr double kFitTolerance = 1e-9;
inline constexpr int kFitMaxIterations = 200;

inline double weibull_shape(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    std::vector<double> y(x.size());
    double ymean = 0.0, ymax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::log(x[i]);
        ymean += y[i];
        ymax = std::max(ymax, y[i]);
    }
    ymean /= n;
    double var = 0.0;
    for (double v : y) var += (v - ymean) * (v - ymean);
    var /= n;
    if (!(var > 0.0)) fail(Category::NoConvergence, "Weibull shape undefined for constant samples");

    // g(k) = E_w[y] - 1/k - mean(y), increasing in k; weights w = exp(k (y - ymax))
    auto eval = [&](double k, double& g, double& dg) {
        double sw = 0.0, swy = 0.0, swyy = 0.0;
        for (double v : y) {
            const double d = v - ymax;
            const double w = std::exp(k * d);
            sw += w;
            swy += w * d;
            swyy += w * d * d;
        }
        const double m1 = swy / sw;
        g = m1 + ymax - 1.0 / k - ymean;
        dg = swyy / sw - m1 * m1 + 1.0 / (k * k);
    };

    double k = 1.2825498301618641 / std::sqrt(var); // pi / sqrt(6) over the sd of logs
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kFitMaxIterations; ++it) {
        double g, dg;
        eval(k, g, dg);
        if (g < 0.0) lo = k;
        else hi = k;
        double next = k - g / dg;
        if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * k;
        if (std::abs(next - k) <= kFitTolerance * k) return next;
        k = next;
    }
    fail(Category::NoConvergence, "Weibull shape iteration did not converge");
}

inline double gamma_shape(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0, mlog = 0.0;
    for (double v : x) {
        mean += v;
        mlog += std::log(v);
    }
    mean /= n;
    mlog /= n;
    const double s = std::log(mean) - mlog;
    if (!(s > 0.0)) fail(Category::NoConvergence, "gamma shape undefined for constant samples");

    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < kFitMaxIterations; ++it) {
        const double f = std::log(k) - boost::math::digamma(k) - s;
        const double df = 1.0 / k - boost::math::trigamma(k);
        double next = k - f / df;
        if (!(next > 0.0)) next = 0.5 * k;
        if (std::abs(next - k) <= kFitTolerance * k) return next;
        k = next;
    }
    fail(Category::NoConvergence, "gamma shape iteration did not converge");
}

} // namespace detail

// Maximum-likelihood fit.
inline FittedDistribution fit_family(std::span<const double> samples, Family family) {
    require(!samples.empty(), "no samples to fit");
    for (double v : samples)
        if (!(v > 0.0) || !std::isfinite(v))
            fail(Category::NonPositiveSample, "samples must be finite and strictly positive");
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0, sumsq = 0.0, slog = 0.0, mn = samples[0];
    for (double v : samples) {
        sum += v;
        sumsq += v * v;
        slog += std::log(v);
        mn = std::min(mn, v);
    }

    FittedDistribution fit;
    fit.family = family;
    switch (family) {
    case Family::LogNormal: {
        const double mu = slog / n;
        double ss = 0.0;
        for (double v : samples) ss += (std::log(v) - mu) * (std::log(v) - mu);
        fit.params = {{"mu", mu}, {"sigma", std::max(std::sqrt(ss / n), 1e-12)}};
        break;
    }
    case Family::Weibull: {
        const double k = detail::weibull_shape(samples);
        double smax = -std::numeric_limits<double>::infinity();
        for (double v : samples) smax = std::max(smax, std::log(v));
        double sw = 0.0;
        for (double v : samples) sw += std::exp(k * (std::log(v) - smax));
        fit.params = {{"shape", k}, {"scale", std::exp(smax + std::log(sw / n) / k)}};
        break;
    }
    case Family::Gamma: {
        const double k = detail::gamma_shape(samples);
        fit.params = {{"shape", k}, {"scale", sum / n / k}};
        break;
    }
    case Family::Exponential:
        fit.params = {{"rate", n / sum}};
        break;
    case Family::Rayleigh:
        fit.params = {{"sigma", std::sqrt(sumsq / n / 2.0)}};
        break;
    case Family::Pareto: {
        const double s = slog - n * std::log(mn);
        if (!(s > 0.0)) fail(Category::NoConvergence, "Pareto index undefined for constant samples");
        fit.params = {{"xm", mn}, {"alpha", n / s}};
        break;
    }
    }
    return fit;
}

inline double rmse(const FittedDistribution& fit, const EmpiricalPdf& pdf) {
    if (!fit.ok()) return std::numeric_limits<double>::infinity();
    double ss = 0.0;
    for (std::size_t i = 0; i < pdf.bin_centers.size(); ++i) {
        const double d = fit.pdf(pdf.bin_centers[i]) - pdf.densities[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(pdf.bin_centers.size()));
}

struct RankOptions {
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    // Families within this relative RMSE of the best remaining one compete on
    // parameter count first.
    double parsimony_tolerance = 0.10;
};

struct FitReport {
    std::vector<FittedDistribution> candidates; // ranked, best first
    std::size_t sample_count = 0;
    std::size_t dropped_nonpositive = 0;
    EmpiricalPdf pdf;
};

inline std::vector<FittedDistribution> order_by_parsimony(std::vector<FittedDistribution> fits, double tolerance) {
    std::vector<FittedDistribution> ranked;
    std::stable_sort(fits.begin(), fits.end(),
                     [](const auto& a, const auto& b) { return a.rmse < b.rmse; });
    std::vector<FittedDistribution> failed;
    std::vector<FittedDistribution> pool;
    for (auto& f : fits) (std::isfinite(f.rmse) ? pool : failed).push_back(std::move(f));
    while (!pool.empty()) {
        const double limit = pool.front().rmse * (1.0 + tolerance);
        std::size_t pick = 0;
        for (std::size_t i = 1; i < pool.size() && pool[i].rmse <= limit; ++i)
            if (parameter_count(pool[i].family) < parameter_count(pool[pick].family)) pick = i;
        ranked.push_back(std::move(pool[pick]));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    for (auto& f : failed) ranked.push_back(std::move(f));
    return ranked;
}

inline FitReport rank_candidates(std::span<const double> samples, const RankOptions& opt = {}) {
    require(!opt.families.empty(), "no candidate families");
    require(opt.parsimony_tolerance >= 0.0, "parsimony_tolerance must be non-negative");
    FitReport report;
    std::vector<double> pos;
    pos.reserve(samples.size());
    for (double v : samples) {
        require(std::isfinite(v), "non-finite sample");
        if (v > 0.0) pos.push_back(v);
        else ++report.dropped_nonpositive;
    }
    if (pos.size() < 50)
        fail(Category::TooFewSamples, "ranking needs at least 50 positive samples, got " + std::to_string(pos.size()));
    report.sample_count = pos.size();
    report.pdf = empirical_pdf(pos);

    std::vector<FittedDistribution> fits;
    for (auto family : opt.families) {
        FittedDistribution fit;
        try {
            fit = fit_family(pos, family);
            fit.rmse = rmse(fit, report.pdf);
            if (!std::isfinite(fit.rmse)) {
                fit.error = "non-finite density on the histogram support";
                fit.rmse = std::numeric_limits<double>::infinity();
            }
        } catch (const Error& e) {
            fit = FittedDistribution{};
            fit.family = family;
            fit.error = std::string(e.name()) + ": " + e.what();
            fit.rmse = std::numeric_limits<double>::infinity();
        }
        fits.push_back(std::move(fit));
    }
    report.candidates = order_by_parsimony(std::move(fits), opt.parsimony_tolerance);
    return report;
}

} // namespace celltopo
