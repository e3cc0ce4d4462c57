#include "carleson/dyadic.hpp"

#include <cmath>
#include <limits>

namespace carleson {

double DyadicInterval::length() const {
    return std::ldexp(1.0, static_cast<int>(-scale));
}

bool DyadicInterval::contained_in(const DyadicInterval& other) const {
    if (scale < other.scale) return false;
    std::int64_t shift = scale - other.scale;
    if (shift >= 63) return false;
    return (index >> shift) == other.index;
}

double center(const RealInterval& I) { return I.center(); }
double center(const DyadicInterval& I) { return I.center(); }

RealInterval dilate(const RealInterval& I, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("dilate: factor must be positive");
    double c = I.center();
    double h = 0.5 * a * I.length();
    return {c - h, c + h};
}

RealInterval dilate(const DyadicInterval& I, double a) {
    return dilate(I.as_real(), a);
}

StarIntervals star(const DyadicInterval& I) {
    double c = I.center();
    double L = I.length();
    return {{c - 5.5 * L, c - 3.5 * L}, {c + 3.5 * L, c + 5.5 * L}};
}

double NodeSystem::min_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            gap = std::min(gap, std::abs(points[i] - points[j]));
    return gap;
}

NodeSystem node_points(const RealInterval& I, int d) {
    if (d < 1) throw std::invalid_argument("node_points: d must be >= 1");
    NodeSystem ns;
    ns.points.reserve(static_cast<std::size_t>(d));
    ns.points.push_back(I.lo);
    if (d >= 2) ns.points.push_back(I.hi);
    // Breadth-first midpoints: level l has 2^(l-1) midpoints of the uniform
    // refinement, left to right.
    double len = I.length();
    for (int level = 1; static_cast<int>(ns.points.size()) < d; ++level) {
        std::int64_t cells = std::int64_t{1} << level;
        for (std::int64_t i = 1; i < cells && static_cast<int>(ns.points.size()) < d; i += 2)
            ns.points.push_back(I.lo + len * static_cast<double>(i) / static_cast<double>(cells));
    }
    return ns;
}

NodeSystem node_points(const DyadicInterval& I, int d) {
    return node_points(I.as_real(), d);
}

DyadicInterval largest_dyadic_in(const RealInterval& jbar, std::int64_t k_max) {
    if (!(jbar.hi - jbar.lo > 0.0))
        throw std::invalid_argument("largest_dyadic_in: empty interval");
    for (std::int64_t k = 0; k <= k_max; ++k) {
        double len = std::ldexp(1.0, static_cast<int>(-k));
        std::int64_t n = static_cast<std::int64_t>(std::ceil(jbar.lo / len));
        // Closed hull containment: [n*len, (n+1)*len) fits if (n+1)*len <= hi.
        if (static_cast<double>(n + 1) * len <= jbar.hi) return {k, n};
    }
    throw std::runtime_error("largest_dyadic_in: no dyadic interval fits at scale <= k_max");
}

std::vector<DyadicInterval> dyadic_cover(double lo, double hi, std::int64_t k) {
    double len = std::ldexp(1.0, static_cast<int>(-k));
    auto first = static_cast<std::int64_t>(std::floor(lo / len));
    auto last = static_cast<std::int64_t>(std::ceil(hi / len));
    std::vector<DyadicInterval> out;
    for (std::int64_t n = first; n < last; ++n) out.push_back({k, n});
    return out;
}

}  // namespace carleson
