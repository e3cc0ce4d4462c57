#include "carleson/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace carleson {

namespace {

double glue(double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); }

// Smooth 0 -> 1 transition on [0, 1] via the exp(-1/t) glue.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = glue(t), b = glue(1.0 - t);
    return a / (a + b);
}

constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

constexpr long kRowPanelBudget = 1L << 22;

double cached_sup_abs(const Kernel& kernel) {
    auto compute = [&] {
        double lo = kernel.support_lo(), hi = kernel.support_hi();
        double best = 0.0;
        const int n = 200000;
        for (int i = 0; i <= n; ++i) {
            double y = lo + (hi - lo) * i / n;
            best = std::max(best, std::abs(kernel.psi(y)));
        }
        return best;
    };
    static double cache[2] = {-1.0, -1.0};
    int idx = kernel.mode == KernelMode::Telescoping ? 0 : 1;
    if (cache[idx] < 0.0) cache[idx] = compute();
    return cache[idx];
}

// integral over [a, b] of e^{i(q_val_at_x - Q(y))} psi_k(x - y) dy with
// Gauss-Legendre panels no wider than panel_w.
std::complex<double> segment_integral(double a, double b, double x,
                                      double big_q_x, const Poly& big_q,
                                      const Kernel& kernel, int k,
                                      double panel_w, long& panel_count) {
    long np = static_cast<long>(std::ceil((b - a) / panel_w));
    if (np < 1) np = 1;
    panel_count += np;
    if (panel_count > kRowPanelBudget)
        throw std::runtime_error("quadrature panel budget exceeded");
    std::complex<double> acc = 0.0;
    double w = (b - a) / static_cast<double>(np);
    for (long p = 0; p < np; ++p) {
        double lo = a + w * static_cast<double>(p);
        double mid = lo + 0.5 * w, half = 0.5 * w;
        for (int g = 0; g < 8; ++g) {
            double y = mid + half * kGlNodes[g];
            double phase = big_q_x - big_q.eval(y);
            double ker = kernel.psi_k(k, x - y);
            if (ker == 0.0) continue;
            acc += kGlWeights[g] * half * ker *
                   std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return acc;
}

// The two half-open bands {y in [0,1] : |x - y| in (lo, hi) * 2^-k}.
struct Band {
    double lo, hi;
};
std::vector<Band> kernel_bands(double x, const Kernel& kernel, int k) {
    double s = std::ldexp(1.0, -k);
    double r_lo = kernel.support_lo() * s, r_hi = kernel.support_hi() * s;
    std::vector<Band> out;
    auto push = [&](double a, double b) {
        a = std::max(a, 0.0);
        b = std::min(b, 1.0);
        if (b > a) out.push_back({a, b});
    };
    push(x - r_hi, x - r_lo);  // y below x
    push(x + r_lo, x + r_hi);  // y above x
    return out;
}

double required_panel_width(const Poly& big_q, const Band& band, int k,
                            double cell_h) {
    double s = std::ldexp(1.0, -k);
    double sq = 0.0;
    Poly q = big_q.derivative();
    if (!q.is_zero()) sq = sup_norm(q, RealInterval{band.lo, band.hi});
    return std::min(cell_h, s / (8.0 * (1.0 + sq * s)));
}

// out accumulates either the applied row (sum_j W_ij f_j) or the sparse
// weights themselves, split at grid-cell boundaries so the piecewise
// constant factor is exact.
template <typename Sink>
void row_visit(double x, const Poly& big_q, const Kernel& kernel, int k,
               int m, Sink&& sink) {
    double h = std::ldexp(1.0, -m);
    double big_q_x = big_q.eval(x);
    long panels = 0;
    for (const Band& band : kernel_bands(x, kernel, k)) {
        double pw = required_panel_width(big_q, band, k, h);
        auto first = static_cast<std::int64_t>(std::floor(band.lo / h));
        auto last = static_cast<std::int64_t>(std::ceil(band.hi / h)) - 1;
        for (std::int64_t j = first; j <= last; ++j) {
            double a = std::max(band.lo, static_cast<double>(j) * h);
            double b = std::min(band.hi, static_cast<double>(j + 1) * h);
            if (b <= a) continue;
            std::complex<double> w = segment_integral(a, b, x, big_q_x, big_q,
                                                      kernel, k, pw, panels);
            sink(static_cast<std::size_t>(j), w);
        }
    }
}

}  // namespace

double Kernel::chi(double y) {
    double a = std::abs(y);
    if (a <= 4.0) return 1.0;
    if (a >= 8.0) return 0.0;
    return 1.0 - smooth_step((a - 4.0) / 4.0);
}

double Kernel::psi(double y) const {
    if (mode == KernelMode::Telescoping) {
        if (y == 0.0) return 0.0;
        double n = chi(y) - chi(2.0 * y);
        return n == 0.0 ? 0.0 : n / y;
    }
    double a = std::abs(y);
    double bump = smooth_step((a - 4.0) / 0.5) * (1.0 - smooth_step((a - 4.5) / 0.5));
    return y < 0.0 ? -bump : bump;
}

double Kernel::psi_k(int k, double y) const {
    double s = std::ldexp(1.0, k);
    return s * psi(s * y);
}

double Kernel::support_lo() const {
    return mode == KernelMode::Telescoping ? 2.0 : 4.0;
}
double Kernel::support_hi() const {
    return mode == KernelMode::Telescoping ? 8.0 : 5.0;
}
double Kernel::sup_abs() const { return cached_sup_abs(*this); }

Kernel make_kernel(KernelMode mode) { return Kernel{mode}; }

double psi_identity_check(const Kernel& kernel, int k_max,
                          const std::vector<double>& samples) {
    double worst = 0.0;
    for (double y : samples) {
        if (y == 0.0 || std::abs(y) >= 1.0)
            throw std::invalid_argument("sample outside 0 < |y| < 1");
        double sum = 0.0;
        for (int k = 0; k <= k_max; ++k) sum += kernel.psi_k(k, y);
        worst = std::max(worst, std::abs(sum - 1.0 / y));
    }
    return worst;
}

GridFunction GridFunction::zeros(int m) {
    GridFunction f;
    f.m = m;
    f.v.assign(std::size_t{1} << m, 0.0);
    return f;
}

GridFunction GridFunction::from_fn(
    int m, const std::function<std::complex<double>(double)>& fn) {
    GridFunction f = zeros(m);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = fn(f.x_at(i));
    return f;
}

double GridFunction::h() const { return std::ldexp(1.0, -m); }

double GridFunction::x_at(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) * h();
}

std::complex<double> GridFunction::eval(double x) const {
    if (x < 0.0 || x >= 1.0) return 0.0;
    auto i = static_cast<std::size_t>(x * std::ldexp(1.0, m));
    if (i >= size()) i = size() - 1;
    return v[i];
}

double GridFunction::norm_lp(double p) const {
    if (p < 1.0) throw std::invalid_argument("p < 1");
    double acc = 0.0;
    for (const auto& z : v) acc += std::pow(std::abs(z), p);
    return std::pow(acc * h(), 1.0 / p);
}

double GridFunction::norm_inf() const {
    double best = 0.0;
    for (const auto& z : v) best = std::max(best, std::abs(z));
    return best;
}

std::string GridFunction::to_csv() const {
    std::string out;
    char buf[96];
    for (std::size_t i = 0; i < size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x_at(i),
                      v[i].real(), v[i].imag());
        out += buf;
    }
    return out;
}

GridFunction GridFunction::from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::complex<double>> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double x, re, im;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &re, &im) != 3)
            throw std::invalid_argument("bad grid csv line: " + line);
        vals.emplace_back(re, im);
    }
    std::size_t n = vals.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid csv size is not a power of two");
    GridFunction f;
    f.m = 0;
    while ((std::size_t{1} << f.m) < n) ++f.m;
    f.v = std::move(vals);
    return f;
}

std::complex<double> inner(const GridFunction& f, const GridFunction& g) {
    if (f.m != g.m) throw std::invalid_argument("grid resolution mismatch");
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.v[i] * std::conj(g.v[i]);
    return acc * f.h();
}

PhaseAssignment PhaseAssignment::constant(int m, const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty coefficient list");
    PhaseAssignment s;
    s.m = m;
    s.d = static_cast<int>(coeffs.size());
    s.a.assign(std::size_t{1} << m, coeffs);
    return s;
}

std::size_t PhaseAssignment::cell_of(double x) const {
    auto i = static_cast<std::int64_t>(std::floor(x * std::ldexp(1.0, m)));
    i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(cells()) - 1);
    return static_cast<std::size_t>(i);
}

Poly PhaseAssignment::big_q_at(std::size_t cell) const {
    std::vector<double> c(static_cast<std::size_t>(d) + 1, 0.0);
    for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j) + 1] = a[cell][static_cast<std::size_t>(j)];
    return Poly(c);
}

Poly PhaseAssignment::q_at(std::size_t cell) const {
    return big_q_at(cell).derivative();
}

std::string PhaseAssignment::to_csv() const {
    std::string out;
    char buf[48];
    for (std::size_t i = 0; i < cells(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu", i);
        out += buf;
        for (double c : a[i]) {
            std::snprintf(buf, sizeof buf, ",%.17g", c);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

PhaseAssignment PhaseAssignment::from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> fields;
        while (std::getline(ls, tok, ',')) fields.push_back(std::stod(tok));
        if (fields.size() < 2) throw std::invalid_argument("bad phase csv line");
        if (static_cast<std::size_t>(fields[0]) != rows.size())
            throw std::invalid_argument("phase csv cells out of order");
        rows.emplace_back(fields.begin() + 1, fields.end());
    }
    std::size_t n = rows.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("phase csv size is not a power of two");
    PhaseAssignment s;
    s.m = 0;
    while ((std::size_t{1} << s.m) < n) ++s.m;
    s.d = static_cast<int>(rows.front().size());
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != s.d)
            throw std::invalid_argument("phase csv ragged rows");
    s.a = std::move(rows);
    return s;
}

GridFunction evaluate_TQ(const GridFunction& f, const Poly& big_q,
                         const Kernel& kernel, int k) {
    GridFunction out = GridFunction::zeros(f.m);
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::complex<double> acc = 0.0;
        row_visit(f.x_at(i), big_q, kernel, k, f.m,
                  [&](std::size_t j, std::complex<double> w) { acc += w * f.v[j]; });
        out.v[i] = acc;
    }
    return out;
}

GridFunction evaluate_direct(const GridFunction& f,
                             const std::vector<Poly>& candidates,
                             const Kernel& kernel, int k_max) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate set");
    GridFunction out = GridFunction::zeros(f.m);
    for (const Poly& big_q : candidates) {
        GridFunction total = GridFunction::zeros(f.m);
        for (int k = 0; k <= k_max; ++k) {
            GridFunction piece = evaluate_TQ(f, big_q, kernel, k);
            for (std::size_t i = 0; i < total.size(); ++i) total.v[i] += piece.v[i];
        }
        for (std::size_t i = 0; i < out.size(); ++i)
            out.v[i] = std::max(out.v[i].real(), std::abs(total.v[i]));
    }
    return out;
}

CellSet compute_EP(const Tile& P, const PhaseAssignment& sigma) {
    auto k = P.time.scale;
    if (k < 0 || sigma.m < k)
        throw std::invalid_argument("phase resolution too coarse for tile");
    CellSet out;
    std::size_t per = std::size_t{1} << (sigma.m - k);
    std::size_t first = static_cast<std::size_t>(P.time.index) * per;
    for (std::size_t i = first; i < first + per; ++i)
        if (contains_poly(P, sigma.q_at(i))) out.cells.push_back(i);
    out.a0 = static_cast<double>(out.cells.size()) / static_cast<double>(per);
    return out;
}

TileOperatorResult apply_TP(const Tile& P, const GridFunction& f,
                            const PhaseAssignment& sigma, const Kernel& kernel) {
    if (f.m != sigma.m) throw std::invalid_argument("grid resolution mismatch");
    CellSet ep = compute_EP(P, sigma);
    TileOperatorResult r{GridFunction::zeros(f.m), P, ep.cells, ep.a0};
    int k = static_cast<int>(P.time.scale);
    for (std::size_t i : ep.cells) {
        Poly big_q = sigma.big_q_at(i);
        std::complex<double> acc = 0.0;
        row_visit(f.x_at(i), big_q, kernel, k, f.m,
                  [&](std::size_t j, std::complex<double> w) { acc += w * f.v[j]; });
        r.out.v[i] = acc;
    }
    return r;
}

TileOperatorResult apply_TP_star(const Tile& P, const GridFunction& f,
                                 const PhaseAssignment& sigma,
                                 const Kernel& kernel) {
    if (f.m != sigma.m) throw std::invalid_argument("grid resolution mismatch");
    CellSet ep = compute_EP(P, sigma);
    TileOperatorResult r{GridFunction::zeros(f.m), P, ep.cells, ep.a0};
    int k = static_cast<int>(P.time.scale);
    for (std::size_t i : ep.cells) {
        Poly big_q = sigma.big_q_at(i);
        std::complex<double> fi = f.v[i];
        row_visit(f.x_at(i), big_q, kernel, k, f.m,
                  [&](std::size_t j, std::complex<double> w) {
                      r.out.v[j] += std::conj(w) * fi;
                  });
    }
    return r;
}

TileWeights tile_weights(const Tile& P, const PhaseAssignment& sigma,
                         const Kernel& kernel) {
    CellSet ep = compute_EP(P, sigma);
    TileWeights out;
    out.rows = ep.cells;
    out.a0 = ep.a0;
    int k = static_cast<int>(P.time.scale);
    std::size_t cells = std::size_t{1} << sigma.m;
    double h = std::ldexp(1.0, -sigma.m);
    out.w.assign(ep.cells.size(), std::vector<std::complex<double>>(cells, 0.0));
    for (std::size_t r = 0; r < ep.cells.size(); ++r) {
        std::size_t i = ep.cells[r];
        Poly big_q = sigma.big_q_at(i);
        double x = (static_cast<double>(i) + 0.5) * h;
        row_visit(x, big_q, kernel, k, sigma.m,
                  [&](std::size_t j, std::complex<double> w) { out.w[r][j] += w; });
    }
    return out;
}

std::vector<Tile> active_tiles(const PhaseAssignment& sigma, int k) {
    if (k < 0 || sigma.m < k)
        throw std::invalid_argument("phase resolution too coarse for scale");
    double alpha_len = std::ldexp(1.0, k);  // |I|^-1
    std::map<std::pair<std::int64_t, std::vector<std::int64_t>>, Tile> seen;
    for (std::size_t i = 0; i < sigma.cells(); ++i) {
        auto n = static_cast<std::int64_t>(i >> (sigma.m - k));
        DyadicInterval time{k, n};
        Poly q = sigma.q_at(i);
        NodeSystem nodes = node_points(time, sigma.d);
        std::vector<std::int64_t> idx;
        std::vector<DyadicInterval> alphas;
        for (double x : nodes.points) {
            auto a = static_cast<std::int64_t>(std::floor(q.eval(x) / alpha_len));
            idx.push_back(a);
            alphas.push_back(DyadicInterval{-k, a});
        }
        seen.emplace(std::make_pair(n, std::move(idx)), make_tile(time, alphas));
    }
    std::vector<Tile> out;
    out.reserve(seen.size());
    for (auto& [key, tile] : seen) out.push_back(std::move(tile));
    return out;
}

double reconstruct_check(const GridFunction& f, const PhaseAssignment& sigma,
                         const Kernel& kernel, int k_max) {
    if (f.m != sigma.m) throw std::invalid_argument("grid resolution mismatch");
    GridFunction lhs = GridFunction::zeros(f.m);
    for (int k = 0; k <= k_max; ++k)
        for (const Tile& P : active_tiles(sigma, k)) {
            TileOperatorResult r = apply_TP(P, f, sigma, kernel);
            for (std::size_t i = 0; i < lhs.size(); ++i) lhs.v[i] += r.out.v[i];
        }
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        Poly big_q = sigma.big_q_at(i);
        std::complex<double> ref = 0.0;
        for (int k = 0; k <= k_max; ++k)
            row_visit(f.x_at(i), big_q, kernel, k, f.m,
                      [&](std::size_t j, std::complex<double> w) { ref += w * f.v[j]; });
        worst = std::max(worst, std::abs(lhs.v[i] - ref));
    }
    return worst;
}

int scale_gap(int d) {
    if (d < 1) throw std::invalid_argument("d < 1");
    double val = 2.0 * d * std::log2(2.0 * d);
    return static_cast<int>(std::floor(val)) + 1;
}

std::vector<Tile> restrict_scales(const std::vector<Tile>& tiles, int j, int big_d) {
    if (big_d < 1 || j < 0 || j >= big_d)
        throw std::invalid_argument("bad scale class");
    std::vector<Tile> out;
    for (const Tile& t : tiles)
        if (((t.time.scale % big_d) + big_d) % big_d == j) out.push_back(t);
    return out;
}

}  // namespace carleson
