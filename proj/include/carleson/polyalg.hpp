#ifndef CARLESON_POLYALG_HPP
#define CARLESON_POLYALG_HPP

#include <vector>

#include "carleson/dyadic.hpp"

namespace carleson {

// Real polynomial in the monomial basis, coeffs[i] multiplying y^i.
class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly constant(double v) { return Poly({v}); }
    static Poly zero() { return Poly(); }

    // Largest index with a nonzero stored coefficient; -1 for the zero poly.
    int degree() const;
    bool is_zero() const { return degree() < 0; }
    bool is_constant() const { return degree() <= 0; }

    double eval(double y) const;
    double operator()(double y) const { return eval(y); }

    Poly derivative() const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(double s) const;
    Poly operator*(const Poly& o) const;

    double coeff(int i) const {
        return i >= 0 && i < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(i)] : 0.0;
    }
    const std::vector<double>& coeffs() const { return c_; }

  private:
    void trim();
    std::vector<double> c_;
};

struct RootList {
    std::vector<RealInterval> isolating;  // pairwise disjoint, one root each
    std::vector<double> roots;            // refined values, width <= tau_root
};

inline constexpr double kTauRoot = 1e-12;

// Unique p in Q_{d-1} with p(nodes[j]) = values[j]. Throws on coincident nodes.
Poly lagrange(const std::vector<double>& nodes, const std::vector<double>& values);

// Lagrange basis polynomial l_j for the given nodes.
Poly lagrange_basis(const std::vector<double>& nodes, std::size_t j);

// All real roots of p in the closed hull of I, isolated by Sturm bisection
// and refined to tau. Throws on the identically zero polynomial.
RootList isolate_roots(const Poly& p, const RealInterval& I, double tau = kTauRoot);

// Exact max of |p| over the closure of I (endpoints plus critical points).
double sup_norm(const Poly& p, const RealInterval& I);

// Lebesgue measure of {y in I : |p(y)| < eta}.
double sublevel_measure(const Poly& p, const RealInterval& I, double eta);

// sup_{y in A} |p1(y) - p2(y)|.
double dist_sup(const Poly& p1, const Poly& p2, const RealInterval& A);

// Delta_q(J) = dist^J(q, 0) * |J|.
double delta_q(const Poly& q, const RealInterval& J);

struct CheckResult {
    double ratio = 0.0;   // or measure
    double bound = 0.0;
    bool pass = false;
};

// ||q||_inf(I) <= c(d) (|I|/|J|)^{d-1} ||q||_inf(J) with c(d) = d^d by default.
CheckResult lemma_a_check(const Poly& q, const RealInterval& I, const RealInterval& J,
                          int d, double c_d = -1.0);

// |{y in I : |q(y)| < eta}| <= c(d) (eta/||q||_inf(I))^{1/(d-1)} |I|.
CheckResult lemma_b_check(const Poly& q, const RealInterval& I, double eta,
                          int d, double c_d = -1.0);

double default_cd(int d);

}  // namespace carleson

#endif
