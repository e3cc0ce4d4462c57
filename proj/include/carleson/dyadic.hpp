#ifndef CARLESON_DYADIC_HPP
#define CARLESON_DYADIC_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace carleson {

// Half-open interval [lo, hi).
struct RealInterval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x < hi; }
    bool contains(const RealInterval& other) const {
        return lo <= other.lo && other.hi <= hi;
    }
    bool intersects(const RealInterval& other) const {
        return lo < other.hi && other.lo < hi;
    }
    RealInterval intersect(const RealInterval& other) const {
        double a = lo > other.lo ? lo : other.lo;
        double b = hi < other.hi ? hi : other.hi;
        return {a, b < a ? a : b};
    }
    bool empty() const { return hi <= lo; }
};

// Dyadic interval [n*2^-k, (n+1)*2^-k). Scale k may be negative (frequency
// grid intervals longer than 1). All containment tests are exact integer
// arithmetic on (k, n).
struct DyadicInterval {
    std::int64_t scale = 0;  // k
    std::int64_t index = 0;  // n

    double length() const;
    double lo() const { return static_cast<double>(index) * length(); }
    double hi() const { return static_cast<double>(index + 1) * length(); }
    double center() const { return (static_cast<double>(index) + 0.5) * length(); }

    bool operator==(const DyadicInterval& o) const {
        return scale == o.scale && index == o.index;
    }

    // Exact: is *this contained in other?
    bool contained_in(const DyadicInterval& other) const;
    bool contains_point(double x) const { return lo() <= x && x < hi(); }

    DyadicInterval parent() const { return {scale - 1, index >> 1}; }
    DyadicInterval left_child() const { return {scale + 1, index * 2}; }
    DyadicInterval right_child() const { return {scale + 1, index * 2 + 1}; }
    DyadicInterval right_brother() const { return {scale, index + 1}; }
    DyadicInterval left_brother() const { return {scale, index - 1}; }

    RealInterval as_real() const { return {lo(), hi()}; }
};

// Node points x_I^1..x_I^d: endpoints first, then breadth-first midpoints of
// the binary refinement, left-to-right within each level.
struct NodeSystem {
    std::vector<double> points;

    int size() const { return static_cast<int>(points.size()); }
    double min_gap() const;
};

double center(const RealInterval& I);
double center(const DyadicInterval& I);

// Same center, length a*|I|.
RealInterval dilate(const RealInterval& I, double a);
RealInterval dilate(const DyadicInterval& I, double a);

// Enlarged intervals: I*_r = [c+3.5|I|, c+5.5|I|), I*_l mirrored,
// I* their union (two disjoint pieces).
struct StarIntervals {
    RealInterval left;
    RealInterval right;
    bool contains(double x) const { return left.contains(x) || right.contains(x); }
};
StarIntervals star(const DyadicInterval& I);

// I~ = 13I.
inline RealInterval enlarged(const DyadicInterval& I) { return dilate(I, 13.0); }

NodeSystem node_points(const RealInterval& I, int d);
NodeSystem node_points(const DyadicInterval& I, int d);

// Maximal-length dyadic interval inside the closed hull of Jbar, ties broken
// leftmost. Throws if nothing of scale <= k_max fits.
DyadicInterval largest_dyadic_in(const RealInterval& jbar, std::int64_t k_max = 60);

// All dyadic intervals of scale k whose intersection with [lo, hi] is
// nonempty, i.e. indices floor(lo*2^k) .. ceil(hi*2^k)-1.
std::vector<DyadicInterval> dyadic_cover(double lo, double hi, std::int64_t k);

}  // namespace carleson

#endif
