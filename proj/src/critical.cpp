#include "carleson/critical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace carleson {

namespace {

const char* stage_name(CriticalStage s) {
    switch (s) {
        case CriticalStage::S1: return "s1";
        case CriticalStage::S2: return "s2";
        case CriticalStage::S3: return "s3";
        case CriticalStage::C: return "c";
        case CriticalStage::MergedGap: return "gap";
    }
    return "?";
}

double delta_on(const Poly& q, const DyadicInterval& I) {
    RealInterval r{I.lo(), I.hi()};
    return sup_norm(q, r) * r.length();
}

// Merge sorted pieces that overlap or touch into maximal intervals,
// keeping the provenance of the first contributor.
std::vector<CriticalPiece> coalesce(std::vector<CriticalPiece> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const CriticalPiece& a, const CriticalPiece& b) {
        if (a.iv.lo != b.iv.lo) return a.iv.lo < b.iv.lo;
        return a.iv.hi < b.iv.hi;
    });
    std::vector<CriticalPiece> out;
    for (const auto& p : pieces) {
        if (!out.empty() && p.iv.lo <= out.back().iv.hi) {
            out.back().iv.hi = std::max(out.back().iv.hi, p.iv.hi);
            out.back().capped = out.back().capped || p.capped;
        } else {
            out.push_back(p);
        }
    }
    return out;
}

// Absorb interior gaps shorter than an adjacent piece; boundary gaps stay.
std::vector<CriticalPiece> absorb_gaps(std::vector<CriticalPiece> pieces) {
    if (pieces.size() < 2) return pieces;
    std::vector<CriticalPiece> with_gaps;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        with_gaps.push_back(pieces[i]);
        if (i + 1 == pieces.size()) continue;
        double gap = pieces[i + 1].iv.lo - pieces[i].iv.hi;
        double eps = 1e-12 * std::max({1.0, gap, pieces[i].iv.length(), pieces[i + 1].iv.length()});
        if (gap + eps < pieces[i].iv.length() || gap + eps < pieces[i + 1].iv.length()) {
            CriticalPiece g;
            g.iv = RealInterval{pieces[i].iv.hi, pieces[i + 1].iv.lo};
            g.stage = CriticalStage::MergedGap;
            g.local_min = pieces[i].local_min;
            with_gaps.push_back(g);
        }
    }
    return coalesce(std::move(with_gaps));
}

CriticalSetResult assemble(std::vector<CriticalPiece> raw, const CriticalParams& params) {
    CriticalSetResult r;
    r.params = params;
    r.pieces = absorb_gaps(coalesce(std::move(raw)));
    return r;
}

int trailing_zeros(std::int64_t n) {
    return std::countr_zero(static_cast<std::uint64_t>(n));
}

// Smallest dyadic interval in [0,1] with left endpoint (n+1)*2^-k (dir=+1)
// or right endpoint n*2^-k (dir=-1) whose Delta exceeds thr.
bool abutting_interval(const Poly& q, std::int64_t k, std::int64_t n, int dir,
                       double thr, DyadicInterval* out) {
    std::int64_t e = (dir > 0) ? n + 1 : n;  // endpoint numerator at scale k
    if (dir > 0 && e == (std::int64_t{1} << k)) return false;  // endpoint is 1
    if (dir < 0 && e == 0) return false;                       // endpoint is 0
    std::int64_t j = std::max<std::int64_t>(0, k - trailing_zeros(e));
    auto make = [&](std::int64_t jj) {
        std::int64_t m = (jj >= k) ? (e << (jj - k)) : (e >> (k - jj));
        return DyadicInterval{jj, dir > 0 ? m : m - 1};
    };
    while (dir > 0) {  // keep the interval inside [0,1]
        DyadicInterval cand = make(j);
        if (cand.index + 1 <= (std::int64_t{1} << j)) break;
        ++j;
    }
    DyadicInterval cur = make(j);
    if (delta_on(q, cur) <= thr) return false;
    while (j < 60) {
        DyadicInterval next = make(j + 1);
        if (delta_on(q, next) <= thr) break;
        cur = next;
        ++j;
    }
    *out = cur;
    return true;
}

// Uniform sample from the tile's polynomial box via node values.
Poly sample_in_tile(const Tile& P, std::mt19937_64& rng) {
    auto nodes = P.nodes();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(nodes.size()));
    for (std::size_t j = 0; j < static_cast<std::size_t>(nodes.size()); ++j) {
        const RealInterval& a = P.alphas[j];
        std::uniform_real_distribution<double> U(a.lo, a.hi);
        values.push_back(U(rng));
    }
    return lagrange(nodes.points, values);
}

}  // namespace

double CriticalSetResult::measure() const {
    double m = 0.0;
    for (const auto& p : pieces) m += p.iv.length();
    return m;
}

bool CriticalSetResult::contains(double x) const {
    for (const auto& p : pieces)
        if (x >= p.iv.lo && x <= p.iv.hi) return true;
    return false;
}

std::vector<RealInterval> CriticalSetResult::intervals() const {
    std::vector<RealInterval> out;
    out.reserve(pieces.size());
    for (const auto& p : pieces) out.push_back(p.iv);
    return out;
}

std::string CriticalSetResult::to_json() const {
    nlohmann::json j;
    j["params"] = {{"eta", params.eta}, {"v", params.v},   {"w", params.w},
                   {"eps0", params.eps0}, {"c_d", params.c_d}};
    j["pieces"] = nlohmann::json::array();
    for (const auto& p : pieces)
        j["pieces"].push_back({{"lo", p.iv.lo},
                               {"hi", p.iv.hi},
                               {"stage", stage_name(p.stage)},
                               {"x", p.local_min},
                               {"capped", p.capped}});
    return j.dump();
}

std::vector<std::pair<double, double>> local_minima(const Poly& q, double eta,
                                                    const RealInterval& jbar) {
    if (q.is_constant())
        throw std::invalid_argument("local_minima: constant polynomial");
    if (!(jbar.length() > 0))
        throw std::invalid_argument("local_minima: empty interval");

    double h = std::max(1e-9 * jbar.length(), 1e-13);
    auto absq = [&](double x) { return std::abs(q.eval(x)); };

    std::vector<double> candidates{jbar.lo, jbar.hi};
    for (double r : isolate_roots(q, jbar).roots) candidates.push_back(r);
    Poly dq = q.derivative();
    if (!dq.is_zero() && !dq.is_constant())
        for (double r : isolate_roots(dq, jbar).roots) candidates.push_back(r);
    std::sort(candidates.begin(), candidates.end());

    std::vector<std::pair<double, double>> out;
    for (double x : candidates) {
        double v = absq(x);
        bool left_ok = (x - h <= jbar.lo) || v <= absq(x - h) + 1e-15;
        bool right_ok = (x + h >= jbar.hi) || v <= absq(x + h) + 1e-15;
        if (!(left_ok && right_ok)) continue;
        if (!(v < eta)) continue;
        if (!out.empty() && x - out.back().first < 1e-9 * jbar.length()) {
            if (v < out.back().second) out.back() = {x, v};
            continue;
        }
        out.emplace_back(x, v);
    }
    std::size_t d = static_cast<std::size_t>(q.degree()) + 1;
    if (out.size() > 2 * d) throw std::logic_error("local_minima: more than 2d minima");
    return out;
}

SIntervals s_intervals(const Poly& q, double x_j, double v, double c_d) {
    if (!(x_j >= 0.0 && x_j <= 1.0) || !(v > 0.0))
        throw std::invalid_argument("s_intervals: bad arguments");
    Poly qt = q - Poly::constant(q.eval(x_j));
    double thr = c_d * v;

    SIntervals out;
    DyadicInterval I{0, 0};
    if (delta_on(qt, I) <= thr) {
        out.i1 = I;
        out.has_i1 = true;
        out.capped = true;
        return out;
    }
    while (I.scale < 60) {
        DyadicInterval c = I.left_child();
        if (x_j >= c.hi()) c = I.right_child();
        if (delta_on(qt, c) <= thr) break;
        I = c;
    }
    out.i1 = I;
    out.has_i1 = true;
    out.has_i2 = abutting_interval(qt, I.scale, I.index, +1, thr, &out.i2);
    out.has_i3 = abutting_interval(qt, I.scale, I.index, -1, thr, &out.i3);
    return out;
}

std::vector<RealInterval> merge_E(const RealInterval& jbar,
                                  const std::vector<RealInterval>& A) {
    std::vector<CriticalPiece> raw;
    double prev_hi = jbar.lo;
    for (const auto& a : A) {
        if (a.lo < prev_hi || a.lo < jbar.lo || a.hi > jbar.hi)
            throw std::invalid_argument("merge_E: pieces must be sorted, disjoint, inside the domain");
        prev_hi = a.hi;
        CriticalPiece p;
        p.iv = a;
        p.stage = CriticalStage::S1;
        raw.push_back(p);
    }
    std::vector<RealInterval> out;
    for (const auto& p : absorb_gaps(std::move(raw))) out.push_back(p.iv);
    return out;
}

CriticalSetResult critical_set_s(const Poly& q, const RealInterval& jbar,
                                 double eta, double v, double c_d, double thr_cd) {
    CriticalParams params{eta, v, 0.0, 0.0, c_d};
    if (q.is_constant()) return CriticalSetResult{{}, params};
    if (thr_cd <= 0.0) thr_cd = c_d;
    std::vector<CriticalPiece> raw;
    for (const auto& [x, val] : local_minima(q, eta, jbar)) {
        SIntervals si = s_intervals(q, x, v, thr_cd);
        auto add = [&](const DyadicInterval& I, CriticalStage st) {
            RealInterval iv = RealInterval{I.lo(), I.hi()}.intersect(jbar);
            if (iv.length() <= 0) return;
            raw.push_back(CriticalPiece{iv, st, x, si.capped});
        };
        if (si.has_i1) add(si.i1, CriticalStage::S1);
        if (si.has_i2) add(si.i2, CriticalStage::S2);
        if (si.has_i3) add(si.i3, CriticalStage::S3);
    }
    return assemble(std::move(raw), params);
}

CriticalSetResult critical_set_c(const Poly& q, const RealInterval& jbar,
                                 double eta, double w, double c_d) {
    CriticalParams params{eta, 0.0, w, 0.0, c_d};
    if (q.is_constant()) return CriticalSetResult{{}, params};
    std::vector<CriticalPiece> raw;
    for (const auto& [x, val] : local_minima(q, eta, jbar)) {
        RealInterval iv = RealInterval{x - w, x + w}.intersect(jbar);
        if (iv.length() <= 0) continue;
        raw.push_back(CriticalPiece{iv, CriticalStage::C, x, false});
    }
    return assemble(std::move(raw), params);
}

CanonicalParams canonical_params(const Poly& q, const RealInterval& jbar, int d,
                                 double eps0, double c_d) {
    DyadicInterval J = largest_dyadic_in(jbar);
    double D = delta_q(q, RealInterval{J.lo(), J.hi()});
    CanonicalParams p;
    p.ceil_delta = 1.0 / (1.0 + D);
    p.w = c_d * J.length() * std::pow(p.ceil_delta, 1.0 / d - eps0);
    p.v = c_d * std::pow(p.ceil_delta, -2.0 * eps0);
    p.eta = c_d * p.v / p.w;
    return p;
}

std::pair<CriticalSetResult, CriticalSetResult> critical_sets(
    const Poly& q, const RealInterval& jbar, int d, double eps0, double c_d) {
    if (q.is_constant()) {
        CriticalParams params{0.0, 0.0, 0.0, eps0, c_d};
        return {CriticalSetResult{{}, params}, CriticalSetResult{{}, params}};
    }
    CanonicalParams p = canonical_params(q, jbar, d, eps0, c_d);
    // Two free constants keep each S-piece inside the matching C-ball of
    // radius w: a smaller S-walk threshold tames the dyadic snap of the
    // walk, and a smaller minimum filter on the S side drops offset-heavy
    // minima whose walk intervals outrun w. The C side keeps the full eta
    // so its coverage (which the near-collision check relies on) is intact.
    CriticalSetResult is =
        critical_set_s(q, jbar, p.eta / 64.0, p.v, c_d, c_d / 64.0);
    CriticalSetResult ic = critical_set_c(q, jbar, p.eta, p.w, c_d);
    bool capped = false;
    for (const auto& piece : is.pieces) capped = capped || piece.capped;
    if (capped) {
        // no dyadic scale separates q from a constant at this threshold: the
        // S-set saturates to the whole domain, so the C-set must as well
        ic.pieces = {CriticalPiece{jbar, CriticalStage::C,
                                   is.pieces.front().local_min, true}};
    }
    is.params.eps0 = ic.params.eps0 = eps0;
    return {is, ic};
}

CriticalSetResult pair_critical_set(const Tile& P1, const Tile& P2, double eps0,
                                    double c_d) {
    int d = P1.d();
    if (c_d <= 0.0) c_d = default_cd(d);
    RealInterval cap = enlarged(P1.time).intersect(enlarged(P2.time));
    if (cap.length() <= 0)
        throw std::invalid_argument("pair_critical_set: disjoint enlarged intervals");
    RealInterval jbar = cap.intersect(RealInterval{0.0, 1.0});
    if (jbar.length() <= 0)
        throw std::invalid_argument("pair_critical_set: intersection misses the unit interval");
    Poly q12 = central_poly(P1) - central_poly(P2);
    if (q12.is_constant()) {
        CriticalParams params{0.0, 0.0, 0.0, eps0, c_d};
        return CriticalSetResult{{}, params};
    }
    return critical_sets(q12, jbar, d, eps0, c_d).second;
}

CtbsReport ctbs_check(const Tile& P1, const Tile& P2, double eps0, int samples,
                      std::uint64_t seed, double c_d) {
    CtbsReport rep;
    if (P1.time.length() < P2.time.length()) return ctbs_check(P2, P1, eps0, samples, seed, c_d);
    Poly q12 = central_poly(P1) - central_poly(P2);
    if (q12.is_constant()) return rep;  // vacuous: critical set empty by fiat
    if (pair_delta(P1, P2).time_disjoint) return rep;  // star intervals apart

    CriticalSetResult i12 = pair_critical_set(P1, P2, eps0, c_d);
    int d = P1.d();
    double d1 = delta_q_P(central_poly(P1), P2);
    double d2 = delta_q_P(central_poly(P2), P1);
    double ceil12 = 1.0 / (1.0 + std::max(d1, d2));
    double threshold = std::pow(ceil12, -1.0 / d - eps0);

    RealInterval y_range = enlarged(P2.time).intersect(RealInterval{0.0, 1.0});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Y(y_range.lo, y_range.hi);
    double len2 = P2.time.length();
    for (int t = 0; t < samples; ++t) {
        Poly q1 = sample_in_tile(P1, rng);
        Poly q2 = sample_in_tile(P2, rng);
        double y = Y(rng);
        if (std::abs(q1.eval(y) - q2.eval(y)) * len2 > threshold) continue;
        ++rep.checked;
        if (!i12.contains(y)) rep.counterexamples.push_back(y);
    }
    rep.pass = rep.counterexamples.empty();
    return rep;
}

SeparatedPairSets separated_pair_sets(const Poly& q12, const RealInterval& jbar,
                                      int d, double eps0, double c_d, double delta) {
    SeparatedPairSets out;
    CriticalParams base{0.0, c_d / delta, 0.0, eps0, c_d};
    out.i_s.params = out.i_c.params = base;
    if (q12.is_constant()) return out;

    CanonicalParams p = canonical_params(q12, jbar, d, eps0, c_d);
    out.i_s = critical_set_s(q12, jbar, p.eta, c_d / delta, c_d);
    out.i_s.params.eps0 = eps0;

    std::vector<CriticalPiece> raw;
    for (const auto& piece : out.i_s.pieces) {
        if (piece.iv.length() <= 1e-15) continue;
        CanonicalParams pj = canonical_params(q12, piece.iv, d, eps0, c_d);
        CriticalSetResult icj = critical_set_c(q12, piece.iv, pj.eta, pj.w, c_d);
        raw.insert(raw.end(), icj.pieces.begin(), icj.pieces.end());
    }
    out.i_c = assemble(std::move(raw), base);
    return out;
}

double WhitneyPartition::total_length() const {
    double s = 0.0;
    for (const auto& w : intervals) s += w.iv.length();
    return s;
}

WhitneyPartition whitney_partition(const RealInterval& jbar,
                                   const std::vector<RealInterval>& i_s, double c_d) {
    double prev = jbar.lo;
    for (const auto& p : i_s) {
        if (p.lo < prev - 1e-15 || p.lo < jbar.lo - 1e-15 || p.hi > jbar.hi + 1e-15)
            throw std::invalid_argument("whitney_partition: malformed separation set");
        prev = p.hi;
    }

    WhitneyPartition out;
    auto push = [&](double lo, double hi, WhitneyKind kind) {
        if (hi < lo) return;
        out.intervals.push_back(WhitneyInterval{RealInterval{lo, hi}, kind});
    };

    // Geometric chain filling (a, b], anchored at the piece sitting at `a`
    // when from_left, else at `b`. Intervals shorter than thr merge into a
    // single boundary block next to the anchor.
    auto chain = [&](double a, double b, bool from_left, double thr) {
        double h = b - a;
        if (h <= 0) return;
        std::vector<double> cuts;  // interior breakpoints, anchor side first
        double len = h;
        for (int n = 1; n <= 52; ++n) {
            len *= 0.5;
            if (len < thr) break;
            cuts.push_back(len);
        }
        if (from_left) {
            // boundary block next to the anchor, then the chain up to b
            double lo = cuts.empty() ? b : a + cuts.back();
            push(a, lo, WhitneyKind::Boundary);
            for (std::size_t i = cuts.size(); i-- > 1;) push(a + cuts[i], a + cuts[i - 1], WhitneyKind::Plain);
            if (!cuts.empty()) push(a + cuts.front(), b, WhitneyKind::Plain);
        } else {
            if (!cuts.empty()) push(a, b - cuts.front(), WhitneyKind::Plain);
            for (std::size_t i = 1; i < cuts.size(); ++i) push(b - cuts[i - 1], b - cuts[i], WhitneyKind::Plain);
            double hi = cuts.empty() ? a : b - cuts.back();
            push(hi, b, WhitneyKind::Boundary);
        }
    };

    double cursor = jbar.lo;
    for (std::size_t i = 0; i <= i_s.size(); ++i) {
        bool has_left = i > 0;
        bool has_right = i < i_s.size();
        double a = cursor;
        double b = has_right ? i_s[i].lo : jbar.hi;
        double thr_l = has_left ? c_d * (i_s[i - 1].hi - i_s[i - 1].lo) : 0.0;
        double thr_r = has_right ? c_d * (i_s[i].hi - i_s[i].lo) : 0.0;
        if (b > a) {
            if (has_left && has_right) {
                double m = 0.5 * (a + b);
                chain(a, m, true, thr_l);
                chain(m, b, false, thr_r);
            } else if (has_left) {
                chain(a, b, true, thr_l);
            } else if (has_right) {
                chain(a, b, false, thr_r);
            } else {
                push(a, b, WhitneyKind::Plain);
            }
        }
        if (has_right) {
            push(i_s[i].lo, i_s[i].hi, WhitneyKind::Separation);
            cursor = i_s[i].hi;
        }
    }
    return out;
}

}  // namespace carleson
