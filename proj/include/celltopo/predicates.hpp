#pragma once

#include <cmath>
#include <compare>

#include <boost/multiprecision/cpp_int.hpp>

namespace celltopo {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend std::partial_ordering operator<=>(const Point2&, const Point2&) = default;
};

inline bool lex_less(const Point2& a, const Point2& b) noexcept {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

namespace predicates {

namespace detail {

using Exact = boost::multiprecision::cpp_rational;

inline constexpr double kEps = 0x1p-53;
inline constexpr double kCcwBound = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIccBound = (10.0 + 96.0 * kEps) * kEps;

inline int sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

inline int orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
    const Exact acx = Exact(a.x) - Exact(c.x), bcx = Exact(b.x) - Exact(c.x);
    const Exact acy = Exact(a.y) - Exact(c.y), bcy = Exact(b.y) - Exact(c.y);
    return Exact(acx * bcy - acy * bcx).sign();
}

inline int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const Exact adx = Exact(a.x) - Exact(d.x), ady = Exact(a.y) - Exact(d.y);
    const Exact bdx = Exact(b.x) - Exact(d.x), bdy = Exact(b.y) - Exact(d.y);
    const Exact cdx = Exact(c.x) - Exact(d.x), cdy = Exact(c.y) - Exact(d.y);
    const Exact alift = adx * adx + ady * ady;
    const Exact blift = bdx * bdx + bdy * bdy;
    const Exact clift = cdx * cdx + cdy * cdy;
    const Exact det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                      clift * (adx * bdy - bdx * ady);
    return det.sign();
}

inline int dot_exact(const Point2& a, const Point2& b, const Point2& c) {
    const Exact acx = Exact(a.x) - Exact(c.x), bcx = Exact(b.x) - Exact(c.x);
    const Exact acy = Exact(a.y) - Exact(c.y), bcy = Exact(b.y) - Exact(c.y);
    return Exact(acx * bcx + acy * bcy).sign();
}

} // namespace detail

// +1 if a, b, c turn counterclockwise, -1 clockwise, 0 collinear. Exact.
inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    double detsum;
    if (detleft > 0.0) {
        if (detright <= 0.0) return detail::sign(det);
        detsum = detleft + detright;
    } else if (detleft < 0.0) {
        if (detright >= 0.0) return detail::sign(det);
        detsum = -detleft - detright;
    } else {
        return detail::sign(det);
    }
    const double bound = detail::kCcwBound * detsum;
    if (det >= bound || -det >= bound) return detail::sign(det);
    return detail::orient2d_exact(a, b, c);
}

// +1 if d lies inside the circle through a, b, c (counterclockwise), -1 outside,
// 0 on it. Exact.
inline int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double alift = adx * adx + ady * ady;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double blift = bdx * bdx + bdy * bdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                       clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = detail::kIccBound * permanent;
    if (det > bound || -det > bound) return detail::sign(det);
    return detail::incircle_exact(a, b, c, d);
}

// Sign of (a - c) . (b - c): negative or zero iff c lies in the closed disk
// with diameter ab. Exact.
inline int dot_sign(const Point2& a, const Point2& b, const Point2& c) {
    const double t1 = (a.x - c.x) * (b.x - c.x);
    const double t2 = (a.y - c.y) * (b.y - c.y);
    const double det = t1 + t2;
    const double bound = detail::kCcwBound * (std::abs(t1) + std::abs(t2));
    if (det > bound || -det > bound) return detail::sign(det);
    return detail::dot_exact(a, b, c);
}

} // namespace predicates
} // namespace celltopo
