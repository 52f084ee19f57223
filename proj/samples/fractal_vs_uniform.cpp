// Betti-curve signatures of a uniform and a fractal deployment side by side.
#include <cstdio>

#include "celltopo.hpp"

int main() {
    using namespace celltopo;
    const PointSet sets[] = {gen_uniform(2500, 100.0, 1), gen_fractal(3, 5, 0.15, 20, 100.0, 0.3, 1)};
    for (const auto& s : sets) {
        const auto curve = betti_curves(alpha_values(delaunay(s.points)));
        const auto ripples = detect_ripples(curve);
        const auto peaks = detect_peaks(curve);
        std::printf("%s\n  %zu points, %zu critical scales, %zu ripples, %zu peaks\n", s.source.c_str(),
                    s.points.size(), curve.size(), ripples.size(), peaks.size());
        for (const auto& r : ripples)
            std::printf("  ripple  alpha=%.4g  slopes %.2f -> %.2f\n", r.alpha, r.slope_before, r.slope_after);
        for (const auto& p : peaks)
            std::printf("  peak    alpha=%.4g  beta1=%lld\n", p.alpha, static_cast<long long>(p.height));
    }
}
