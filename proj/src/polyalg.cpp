#include "carleson/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carleson {

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

int Poly::degree() const {
    for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i)
        if (c_[static_cast<std::size_t>(i)] != 0.0) return i;
    return -1;
}

double Poly::eval(double y) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * y + c_[i];
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
        d[i - 1] = static_cast<double>(i) * c_[i];
    return Poly(std::move(d));
}

Poly Poly::operator+(const Poly& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
    std::vector<double> r(c_);
    for (double& v : r) v = -v;
    return Poly(std::move(r));
}

Poly Poly::operator*(double s) const {
    std::vector<double> r(c_);
    for (double& v : r) v *= s;
    return Poly(std::move(r));
}

Poly Poly::operator*(const Poly& o) const {
    if (c_.empty() || o.c_.empty()) return Poly();
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j)
            r[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(r));
}

double default_cd(int d) { return std::pow(static_cast<double>(d), d); }

Poly lagrange_basis(const std::vector<double>& nodes, std::size_t j) {
    Poly num = Poly::constant(1.0);
    double den = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k == j) continue;
        num = num * Poly({-nodes[k], 1.0});
        den *= nodes[j] - nodes[k];
    }
    if (den == 0.0) throw std::invalid_argument("lagrange: coincident nodes");
    return num * (1.0 / den);
}

Poly lagrange(const std::vector<double>& nodes, const std::vector<double>& values) {
    if (nodes.size() != values.size())
        throw std::invalid_argument("lagrange: size mismatch");
    Poly p;
    for (std::size_t j = 0; j < nodes.size(); ++j)
        if (values[j] != 0.0) p = p + lagrange_basis(nodes, j) * values[j];
    // Ensure pairwise distinct nodes even when all values vanish.
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (nodes[i] == nodes[j]) throw std::invalid_argument("lagrange: coincident nodes");
    return p;
}

namespace {

// Canonical (negated-remainder) Sturm-like sequence, truncated when the
// remainder collapses numerically.
std::vector<Poly> sturm_sequence(const Poly& p) {
    std::vector<Poly> seq;
    seq.push_back(p);
    Poly d = p.derivative();
    if (d.is_zero()) return seq;
    seq.push_back(d);
    double scale = 0.0;
    for (double c : p.coeffs()) scale = std::max(scale, std::abs(c));
    const double eps = 1e-14 * std::max(scale, 1.0);
    while (true) {
        const Poly& a = seq[seq.size() - 2];
        const Poly& b = seq.back();
        // rem(a, b)
        std::vector<double> r(a.coeffs());
        int db = b.degree();
        double lead = b.coeff(db);
        while (static_cast<int>(r.size()) - 1 >= db) {
            int dr = static_cast<int>(r.size()) - 1;
            double f = r.back() / lead;
            for (int i = 0; i <= db; ++i)
                r[static_cast<std::size_t>(dr - db + i)] -= f * b.coeff(i);
            r.pop_back();
        }
        double rmax = 0.0;
        for (double c : r) rmax = std::max(rmax, std::abs(c));
        if (rmax <= eps) break;
        Poly rem(std::move(r));
        seq.push_back(-rem);
        if (seq.back().degree() <= 0) break;
    }
    return seq;
}

int sign_changes(const std::vector<Poly>& seq, double x) {
    int changes = 0;
    int prev = 0;
    for (const Poly& q : seq) {
        double v = q.eval(x);
        int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

// Number of distinct roots in (a, b].
int count_roots(const std::vector<Poly>& seq, double a, double b) {
    return sign_changes(seq, a) - sign_changes(seq, b);
}

void isolate_rec(const std::vector<Poly>& seq, double a, double b, double tau,
                 std::vector<RealInterval>& out) {
    int n = count_roots(seq, a, b);
    if (n <= 0) return;
    if (n == 1 || b - a <= tau) {
        // Refine to width tau keeping the count positive.
        while (b - a > tau) {
            double m = 0.5 * (a + b);
            if (count_roots(seq, a, m) > 0)
                b = m;
            else
                a = m;
        }
        out.push_back({a, b});
        return;
    }
    double m = 0.5 * (a + b);
    isolate_rec(seq, a, m, tau, out);
    isolate_rec(seq, m, b, tau, out);
}

}  // namespace

RootList isolate_roots(const Poly& p, const RealInterval& I, double tau) {
    if (p.is_zero()) throw std::invalid_argument("isolate_roots: zero polynomial");
    RootList rl;
    if (p.is_constant()) return rl;
    auto seq = sturm_sequence(p);
    double pad = 1e-15 * (1.0 + std::abs(I.lo) + std::abs(I.hi));
    double a = I.lo - pad;
    double b = I.hi + pad;
    // Nudge off exact roots of the sequence at the left endpoint.
    for (int tries = 0; tries < 64 && p.eval(a) == 0.0; ++tries)
        a -= std::max(pad, 1e-300);
    isolate_rec(seq, a, b, tau, rl.isolating);
    std::sort(rl.isolating.begin(), rl.isolating.end(),
              [](const RealInterval& x, const RealInterval& y) { return x.lo < y.lo; });
    for (const auto& iv : rl.isolating) rl.roots.push_back(iv.center());
    return rl;
}

double sup_norm(const Poly& p, const RealInterval& I) {
    double m = std::max(std::abs(p.eval(I.lo)), std::abs(p.eval(I.hi)));
    Poly d = p.derivative();
    if (!d.is_zero() && !d.is_constant()) {
        for (double r : isolate_roots(d, I).roots)
            if (I.lo <= r && r <= I.hi) m = std::max(m, std::abs(p.eval(r)));
    }
    return m;
}

double sublevel_measure(const Poly& p, const RealInterval& I, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("sublevel_measure: eta must be positive");
    if (p.is_constant()) return std::abs(p.eval(0.0)) < eta ? I.length() : 0.0;
    std::vector<double> cuts{I.lo, I.hi};
    for (double s : {eta, -eta}) {
        Poly shifted = p - Poly::constant(s);
        if (shifted.is_zero()) continue;
        for (double r : isolate_roots(shifted, I).roots)
            if (I.lo < r && r < I.hi) cuts.push_back(r);
    }
    std::sort(cuts.begin(), cuts.end());
    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (std::abs(p.eval(mid)) < eta) measure += cuts[i + 1] - cuts[i];
    }
    return measure;
}

double dist_sup(const Poly& p1, const Poly& p2, const RealInterval& A) {
    return sup_norm(p1 - p2, A);
}

double delta_q(const Poly& q, const RealInterval& J) {
    if (!(J.length() > 0.0)) throw std::invalid_argument("delta_q: empty interval");
    return sup_norm(q, J) * J.length();
}

CheckResult lemma_a_check(const Poly& q, const RealInterval& I, const RealInterval& J,
                          int d, double c_d) {
    if (c_d < 0.0) c_d = default_cd(d);
    double nj = sup_norm(q, J);
    if (nj <= 0.0) throw std::invalid_argument("lemma_a_check: q vanishes on J");
    CheckResult r;
    r.ratio = sup_norm(q, I) / nj;
    r.bound = c_d * std::pow(I.length() / J.length(), d - 1);
    r.pass = r.ratio <= r.bound * (1.0 + 1e-9);
    return r;
}

CheckResult lemma_b_check(const Poly& q, const RealInterval& I, double eta,
                          int d, double c_d) {
    if (q.is_constant()) throw std::invalid_argument("lemma_b_check: constant polynomial");
    if (c_d < 0.0) c_d = default_cd(d);
    CheckResult r;
    r.ratio = sublevel_measure(q, I, eta);
    double sn = sup_norm(q, I);
    r.bound = c_d * std::pow(eta / sn, 1.0 / (d - 1)) * I.length();
    r.pass = r.ratio <= r.bound * (1.0 + 1e-9);
    return r;
}

}  // namespace carleson
