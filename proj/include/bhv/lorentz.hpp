#ifndef BHV_LORENTZ_HPP
#define BHV_LORENTZ_HPP

/// @file lorentz.hpp
/// Decreasing rearrangements and Lorentz quasi-norms of simple functions on
/// annular cells and of sampled functions, with the averaging, stability,
/// duality and dyadic-decomposition checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "check.hpp"
#include "specfun.hpp"

namespace bhv {

struct LorentzExponents {
    double p = 2.0;
    double q = 1.0;  // may be +infinity
    LorentzExponents() = default;
    LorentzExponents(double p_, double q_) : p(p_), q(q_) {
        if (!(p > 1 && std::isfinite(p)) || !(q >= 1)) throw std::invalid_argument("inadmissible Lorentz exponents");
    }
    bool q_infinite() const { return std::isinf(q); }
};

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Step function f_* given by values v_1 > v_2 > ... > 0 on [T_{i-1}, T_i).
struct Rearrangement {
    std::vector<double> values;
    std::vector<double> ends;

    double total_measure() const { return ends.empty() ? 0.0 : ends.back(); }
    double operator()(double t) const {
        auto it = std::upper_bound(ends.begin(), ends.end(), t);
        return it == ends.end() ? 0.0 : values[it - ends.begin()];
    }
    /// Measure of {|f| > lambda}.
    double distribution(double lambda) const {
        double m = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > lambda) m = ends[i];
        return m;
    }
    Rearrangement scaled(double c) const {
        Rearrangement r = *this;
        for (double& v : r.values) v *= std::abs(c);
        if (c == 0) r = Rearrangement{};
        return r;
    }
    Rearrangement power(double alpha) const {
        Rearrangement r = *this;
        for (double& v : r.values) v = std::pow(v, alpha);
        return r;
    }
};

/// Builds f_* from (|value|, measure) pairs.
inline Rearrangement rearrange(std::vector<std::pair<double, double>> vm) {
    for (auto& e : vm) e.first = std::abs(e.first);
    std::sort(vm.begin(), vm.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    Rearrangement r;
    double t = 0;
    for (const auto& [v, m] : vm) {
        if (!(v > 0) || !(m > 0)) continue;
        t += m;
        if (!r.values.empty() && r.values.back() == v)
            r.ends.back() = t;
        else {
            r.values.push_back(v);
            r.ends.push_back(t);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Quasi-norms of step rearrangements

/// |f|_{p,q} = (int t^{q/p} f_*^q dt/t)^{1/q}, sup t^{1/p} f_* for q = inf.
inline double lorentz_seminorm(const Rearrangement& f, const LorentzExponents& e) {
    const double p = e.p, q = e.q;
    if (e.q_infinite()) {
        double s = 0;
        for (std::size_t i = 0; i < f.values.size(); ++i) s = std::max(s, f.values[i] * std::pow(f.ends[i], 1 / p));
        return s;
    }
    double s = 0, prev = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        s += std::pow(f.values[i], q) * (p / q) * (std::pow(f.ends[i], q / p) - std::pow(prev, q / p));
        prev = f.ends[i];
    }
    return std::pow(s, 1 / q);
}

/// ||f||_{p,q} with f_** in place of f_*.
inline double lorentz_norm(const Rearrangement& f, const LorentzExponents& e) {
    const double p = e.p, q = e.q;
    if (f.values.empty()) return 0.0;
    if (!e.q_infinite() && q == 1.0) return p / (p - 1) * lorentz_seminorm(f, e);
    std::vector<double> F(f.values.size());  // int_0^{T_i} f_*
    double acc = 0, prev = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        acc += f.values[i] * (f.ends[i] - prev);
        F[i] = acc;
        prev = f.ends[i];
    }
    if (e.q_infinite()) {
        // t^{1/p} f_**(t) decreases then increases on each segment, so the sup is at a breakpoint
        double s = 0;
        for (std::size_t i = 0; i < F.size(); ++i) s = std::max(s, std::pow(f.ends[i], 1 / p) * F[i] / f.ends[i]);
        return s;
    }
    double s = std::pow(f.values[0], q) * (p / q) * std::pow(f.ends[0], q / p);
    for (std::size_t i = 1; i < f.values.size(); ++i) {
        const double T0 = f.ends[i - 1], F0 = F[i - 1], v = f.values[i];
        auto g = [&](double t) { return std::pow(t, q / p - 1) * std::pow((F0 + v * (t - T0)) / t, q); };
        // singularities sit at t <= 0, so a fixed rule on pieces with ratio <= 2 is converged
        const double T1 = f.ends[i];
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::log2(T1 / T0))));
        const double ratio = std::pow(T1 / T0, 1.0 / pieces);
        double lo = T0;
        for (int k = 0; k < pieces; ++k) {
            const double hi = k + 1 == pieces ? T1 : lo * ratio;
            s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, lo, hi, 0);
            lo = hi;
        }
    }
    const double Tn = f.ends.back();
    s += std::pow(F.back(), q) * std::pow(Tn, q / p - q) / (q - q / p);
    return std::pow(s, 1 / q);
}

/// The L^{p,1} closed form 4 sum (c_i - c_{i-1}) sqrt(sum_{j>=i} M_j) generalised to p:
/// p^2/(p-1) int lambda^{1/p}.
inline double lorentz_p1_closed_form(const Rearrangement& f, double p) {
    double s = 0;
    const std::size_t n = f.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        // values sorted descending; level i in ascending order is values[n-1-i]
        const double ci = f.values[n - 1 - i], cprev = i == 0 ? 0.0 : f.values[n - i];
        s += (ci - cprev) * std::pow(f.ends[n - 1 - i], 1 / p);
    }
    return p * p / (p - 1) * s;
}

// ---------------------------------------------------------------------------
// Simple functions on annular cells

struct Cell {
    double c = 0;       // value >= 0
    double r0 = 0, r1 = 0;
    double omega = 1;   // fraction of the sphere
    double phi0 = 0;    // angular offset in [0,1), cells occupy [phi0, phi0 + omega)
};

struct SimpleFunction {
    int d = 4;
    std::vector<Cell> cells;

    double cell_measure(const Cell& c) const {
        return c.omega * sphere_area(d) * (std::pow(c.r1, d) - std::pow(c.r0, d)) / d;
    }
    void validate() const {
        if (d < 2) throw std::domain_error("SimpleFunction: d >= 2");
        for (const auto& c : cells)
            if (!(c.c >= 0 && c.r0 >= 0 && c.r1 > c.r0 && c.omega > 0 && c.omega <= 1 && c.phi0 >= 0 &&
                  c.phi0 + c.omega <= 1 + 1e-12))
                throw std::domain_error("SimpleFunction: invalid cell");
    }
    double integral_pow(double p) const {
        double s = 0;
        for (const auto& c : cells) s += std::pow(c.c, p) * cell_measure(c);
        return s;
    }
};

inline Rearrangement rearrangement(const SimpleFunction& f) {
    f.validate();
    std::vector<std::pair<double, double>> vm;
    for (const auto& c : f.cells) vm.push_back({c.c, f.cell_measure(c)});
    return rearrange(std::move(vm));
}

inline double lorentz_seminorm(const SimpleFunction& f, const LorentzExponents& e) {
    return lorentz_seminorm(rearrangement(f), e);
}
inline double lorentz_norm(const SimpleFunction& f, const LorentzExponents& e) { return lorentz_norm(rearrangement(f), e); }

/// Random simple function with n cells: disjoint radial shells of [a,b],
/// each split into one or more disjoint angular sectors.
inline SimpleFunction random_simple_function(Rng& g, int d, double a, double b, int n) {
    SimpleFunction f;
    f.d = d;
    const int shells = std::max(1, (n + 1) / 2);
    std::vector<double> cuts{a, b};
    for (int i = 1; i < shells; ++i) cuts.push_back(g.uniform(a, b));
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> per(shells, 0);
    for (int i = 0; i < n; ++i) per[i % shells]++;
    for (int s = 0; s < shells; ++s) {
        if (per[s] == 0 || cuts[s + 1] <= cuts[s]) continue;
        std::vector<double> w(per[s]);
        for (double& x : w) x = g.uniform(0.1, 1.0);
        const double fill = g.uniform(0.5, 1.0), tot = std::accumulate(w.begin(), w.end(), 0.0);
        double phi = 0;
        for (double x : w) {
            const double om = fill * x / tot;
            f.cells.push_back({g.uniform(0.05, 3.0), cuts[s], cuts[s + 1], om, phi});
            phi += om;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Power weights |x|^s on annuli, balls or the whole space

struct PowerNorm {
    double value = 0;
    bool bounded = true;
    std::string note;
};

/// Lorentz norm of |x|^s on B_b \ B_a (a >= 0, b <= inf).
inline PowerNorm power_weight_norm(int d, double s, double a, double b, const LorentzExponents& e, bool seminorm = false) {
    const double beta = sphere_area(d), p = e.p, q = e.q;
    if (!(a >= 0 && b > a)) throw std::domain_error("power_weight_norm: need 0 <= a < b");
    if (s == 0 && std::isinf(b)) return {inf, false, "constant on an unbounded domain"};
    if (s > 0 && std::isinf(b)) return {inf, false, "growing weight on an unbounded domain"};
    if (std::isinf(b)) {
        // |x|^{-alpha} on R^d \ B_a
        const double alpha = -s;
        if (a == 0) {
            if (!e.q_infinite() || std::abs(p - d / alpha) > 1e-12)
                return {inf, false, "only L^{d/alpha,inf} is finite on R^d; the L^{p,q<inf} quantity grows like a logarithm"};
            const double c = std::pow(beta / d, alpha / d);
            return {seminorm ? c : d / (d - alpha) * c, true, ""};
        }
        if (alpha * p <= d) return {inf, false, "tail not integrable"};
    }
    // f_*(t) via the radius r(t) whose super-level set has measure t
    const double Va = beta * std::pow(a, d) / d, Vb = std::isinf(b) ? inf : beta * std::pow(b, d) / d;
    const double M = Vb - Va;
    auto radius = [&](double t) {
        return s < 0 ? std::pow(std::pow(a, d) + d * t / beta, 1.0 / d) : std::pow(std::pow(b, d) - d * t / beta, 1.0 / d);
    };
    auto fstar = [&](double t) { return s == 0 ? 1.0 : std::pow(radius(t), s); };
    // F(t) = int_0^t f_* = int over the level set of |x|^s
    auto F = [&](double t) {
        const double r = radius(t);
        const double lo = s < 0 ? a : r, hi = s < 0 ? r : b;
        if (s + d == 0) return beta * std::log(hi / lo);
        return beta * (std::pow(hi, s + d) - std::pow(lo, s + d)) / (s + d);
    };
    if (s < 0 && a == 0) {
        const double alpha = -s;
        if (alpha / d > 1 / p || (alpha / d == 1 / p && !e.q_infinite()))
            return {inf, false, "singularity at the origin: the Lorentz integral diverges logarithmically at the critical exponent"};
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    if (e.q_infinite()) {
        // sup over a log grid, refined by golden-section
        auto h = [&](double t) { return std::pow(t, 1 / p) * (seminorm ? fstar(t) : F(t) / t); };
        const double tmax = std::isinf(M) ? 1e12 * Vb : M;
        double best = 0, tb = tmax;
        for (int i = 0; i <= 400; ++i) {
            const double t = tmax * std::pow(10.0, -12.0 * (1 - i / 400.0));
            if (h(t) > best) best = h(t), tb = t;
        }
        double lo = tb / 1.1, hi = std::min(tmax, tb * 1.1);
        for (int it = 0; it < 100; ++it) {
            const double m1 = lo + (hi - lo) * 0.382, m2 = lo + (hi - lo) * 0.618;
            if (h(m1) > h(m2)) hi = m2; else lo = m1;
        }
        return {std::max(best, h(0.5 * (lo + hi))), true, ""};
    }
    double val;
    if (seminorm) {
        auto g = [&](double t) { return std::pow(t, q / p - 1) * std::pow(fstar(t), q); };
        val = std::isinf(M) ? ts.integrate(g, 0.0, inf) : ts.integrate(g, 0.0, M);
    } else {
        auto g = [&](double t) { return std::pow(t, q / p - 1) * std::pow(F(t) / t, q); };
        val = ts.integrate(g, 0.0, M);
        if (!std::isinf(M)) val += std::pow(F(M), q) * std::pow(M, q / p - q) / (q - q / p);
    }
    return {std::pow(val, 1 / q), true, ""};
}

/// Closed form d/(d - alpha) beta(d)^{alpha/d} for the weak norm of |x|^{-alpha} on R^d,
/// computed with |{|x| < r}| taken as beta(d) r^d.
inline double weak_power_norm_formula(int d, double alpha) {
    return d / (d - alpha) * std::pow(sphere_area(d), alpha / d);
}

// ---------------------------------------------------------------------------
// Averaging lemma

/// f_bar(r)^2 = S beta r^{d-1} on each piece [lo, hi].
struct RadialProfile {
    int d = 4;
    struct Piece {
        double lo, hi, S;
    };
    std::vector<Piece> pieces;

    double operator()(double r) const {
        for (const auto& p : pieces)
            if (r >= p.lo && r < p.hi) return std::sqrt(p.S * sphere_area(d) * std::pow(r, d - 1));
        return 0.0;
    }
    double l2_sq() const {
        double s = 0;
        for (const auto& p : pieces) s += p.S * sphere_area(d) * (std::pow(p.hi, d) - std::pow(p.lo, d)) / d;
        return s;
    }
    /// Lebesgue measure of {r : f_bar(r) > t}.
    double distribution(double t) const {
        double m = 0;
        for (const auto& p : pieces) {
            if (p.S <= 0) continue;
            const double r = std::pow(t * t / (p.S * sphere_area(d)), 1.0 / (d - 1));
            m += std::max(0.0, p.hi - std::max(p.lo, r));
        }
        return m;
    }
    std::vector<double> breakpoints() const {
        std::vector<double> v{0.0};
        for (const auto& p : pieces) {
            v.push_back((*this)(p.lo));
            v.push_back(std::sqrt(p.S * sphere_area(d) * std::pow(p.hi, d - 1)));
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }
    /// |f_bar|_{2,q} = (2 int t^{q-1} lambda(t)^{q/2} dt)^{1/q}.
    double seminorm_2q(double q) const {
        const auto bp = breakpoints();
        boost::math::quadrature::tanh_sinh<double> ts;
        double s = 0;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            if (bp[i + 1] <= bp[i]) continue;
            s += ts.integrate([&](double t) { return std::pow(t, q - 1) * std::pow(distribution(t), q / 2); }, bp[i], bp[i + 1]);
        }
        return std::pow(2 * s, 1 / q);
    }
};

/// f_bar(r) = ||f||_{L^2(dB_r)} for a simple function.
inline RadialProfile sphere_average_profile(const SimpleFunction& f) {
    f.validate();
    std::vector<double> cuts;
    for (const auto& c : f.cells) {
        cuts.push_back(c.r0);
        cuts.push_back(c.r1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    RadialProfile P;
    P.d = f.d;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1], mid = 0.5 * (lo + hi);
        double S = 0;
        for (const auto& c : f.cells)
            if (c.r0 <= mid && mid < c.r1) S += c.c * c.c * c.omega;
        if (S > 0) P.pieces.push_back({lo, hi, S});
    }
    return P;
}

inline LemmaCheck verify_averaging_lemma(const SimpleFunction& f, double q, double tol = 1e-9) {
    for (const auto& c : f.cells)
        if (c.r0 <= 0) throw precondition_error("averaging lemma: support must lie in an annulus");
    if (!(q >= 1 && std::isfinite(q))) throw precondition_error("averaging lemma: q in [1, inf)");
    const double C = constants::averaging_constant(f.d);
    const auto P = sphere_average_profile(f);
    const LorentzExponents e(2.0, q);
    double lhs, rhs;
    if (q == 1.0) {
        lhs = 2 * P.seminorm_2q(1.0);
        rhs = C * lorentz_norm(f, e);
    } else {
        lhs = P.seminorm_2q(q);
        rhs = C * lorentz_seminorm(f, e);
    }
    return make_check(q == 1.0 ? "averaging_l21" : "averaging_l2q", lhs, rhs, tol,
                      {{"d", static_cast<long long>(f.d)}, {"q", q}, {"constant", C}});
}

/// sum (c_i - c_{i-1}) sqrt(sum_{j>=i} D_j) >= sqrt(sum c_i^2 D_i) for 0 < c_1 < ... < c_n.
inline LemmaCheck verify_ineq_fund(const std::vector<double>& c, const std::vector<double>& D, double tol = 1e-12) {
    if (c.size() != D.size()) throw std::invalid_argument("ineq_fund: size mismatch");
    for (std::size_t i = 0; i < c.size(); ++i)
        if (!(c[i] > (i ? c[i - 1] : 0.0)) || !(D[i] >= 0)) throw precondition_error("ineq_fund: need increasing c > 0, D >= 0");
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double tail = 0;
        for (std::size_t j = i; j < c.size(); ++j) tail += D[j];
        lhs += (c[i] - (i ? c[i - 1] : 0.0)) * std::sqrt(tail);
        rhs += c[i] * c[i] * D[i];
    }
    return make_check("ineq_fund", std::sqrt(rhs), lhs, tol, {{"n", static_cast<long long>(c.size())}});
}

// ---------------------------------------------------------------------------
// Exponentiation, duality, dyadic levels

inline LemmaCheck verify_power_stability(const Rearrangement& f, double alpha, const LorentzExponents& e, double tol = 1e-10) {
    if (!(alpha * e.p > 1) || !(alpha * e.q >= 1)) throw precondition_error("power stability: need alpha p > 1, alpha q >= 1");
    const LorentzExponents ea(alpha * e.p, alpha * e.q);
    const auto fa = f.power(alpha);
    const double semi_l = lorentz_seminorm(fa, e), semi_r = std::pow(lorentz_seminorm(f, ea), alpha);
    Params p{{"alpha", alpha}, {"p", e.p}, {"q", e.q}, {"seminorm_lhs", semi_l}, {"seminorm_rhs", semi_r}};
    p["seminorm_rel_gap"] = std::abs(semi_l - semi_r) / std::max(semi_r, 1e-300);
    return make_check("lorentz_stability_general", lorentz_norm(fa, e), e.p / (e.p - 1) * std::pow(lorentz_norm(f, ea), alpha),
                      tol, p);
}

inline LemmaCheck verify_power_stability(const SimpleFunction& f, double alpha, const LorentzExponents& e, double tol = 1e-10) {
    return verify_power_stability(rearrangement(f), alpha, e, tol);
}

/// Exact int |f g| for simple functions on the same R^d.
inline double pairing_integral(const SimpleFunction& f, const SimpleFunction& g) {
    if (f.d != g.d) throw std::invalid_argument("pairing: dimension mismatch");
    double s = 0;
    for (const auto& x : f.cells)
        for (const auto& y : g.cells) {
            const double lo = std::max(x.r0, y.r0), hi = std::min(x.r1, y.r1);
            const double alo = std::max(x.phi0, y.phi0), ahi = std::min(x.phi0 + x.omega, y.phi0 + y.omega);
            if (hi <= lo || ahi <= alo) continue;
            s += x.c * y.c * (ahi - alo) * sphere_area(f.d) * (std::pow(hi, f.d) - std::pow(lo, f.d)) / f.d;
        }
    return s;
}

inline LemmaCheck duality_pairing_check(const SimpleFunction& f, const SimpleFunction& g, double tol = 1e-12) {
    const double lhs = pairing_integral(f, g);
    const double rhs = lorentz_seminorm(f, {2.0, 1.0}) * lorentz_seminorm(g, {2.0, inf});
    return make_check("duality_l21_l2inf", lhs, rhs, tol);
}

namespace detail {

// smooth step: 0 for s <= 0, 1 for s >= 1
inline double smooth_step(double s) {
    if (s <= 0) return 0.0;
    if (s >= 1) return 1.0;
    const double a = std::exp(-1 / s), b = std::exp(-1 / (1 - s));
    return a / (a + b);
}

}  // namespace detail

/// psi = 1 on [-1/2, 1/2], supported in [-1, 1].
inline double dyadic_psi(double x) { return detail::smooth_step(2 * (1 - std::abs(x))); }
/// phi(x) = x (psi(x/2) - psi(x)), supported in [1/2, 2], sum_j 2^j phi(2^{-j} x) = x.
inline double dyadic_phi(double x) { return x * (dyadic_psi(x / 2) - dyadic_psi(x)); }

/// ||f||_{p,q} <= p/(p-1) (p 2^{3q}/q)^{1/p} ||(||f_k||_p)_k||_{l^q}, f_k = 2^k phi(2^{-k}|f|).
inline LemmaCheck verify_dyadic_decomposition_norm(const SimpleFunction& f, const LorentzExponents& e, double tol = 1e-10) {
    const double p = e.p, q = e.q;
    if (e.q_infinite() || q > p) throw precondition_error("dyadic decomposition: need 1 <= q <= p");
    f.validate();
    std::vector<std::pair<double, double>> vm;
    for (const auto& c : f.cells) vm.push_back({c.c, f.cell_measure(c)});
    int kmin = 0, kmax = -1;
    for (const auto& [v, m] : vm)
        if (v > 0) {
            const int k = static_cast<int>(std::floor(std::log2(v)));
            if (kmax < kmin) kmin = kmax = k;
            kmin = std::min(kmin, k - 2);
            kmax = std::max(kmax, k + 2);
        }
    double lq = 0;
    for (int k = kmin; k <= kmax && kmax >= kmin; ++k) {
        double lp = 0;
        for (const auto& [v, m] : vm) {
            if (v <= 0) continue;
            lp += std::pow(std::abs(std::ldexp(dyadic_phi(std::ldexp(v, -k)), k)), p) * m;
        }
        lq += std::pow(lp, q / p);
    }
    const double C = p / (p - 1) * std::pow(p * std::pow(2.0, 3 * q) / q, 1 / p);
    return make_check("dyadic_decomposition", lorentz_norm(rearrange(vm), e), C * std::pow(lq, 1 / q), tol,
                      {{"p", p}, {"q", q}, {"constant", C}});
}

// ---------------------------------------------------------------------------
// Sampled functions and the improved Sobolev embedding

/// Values with quadrature weights; f_* by weighted sorting.
struct SampledFunction {
    std::vector<double> values, weights;
    Rearrangement rearrangement() const {
        std::vector<std::pair<double, double>> vm(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) vm[i] = {values[i], weights[i]};
        return rearrange(std::move(vm));
    }
};

/// p(d-1)/(d-p) p*/(p*-1) (p* 2^{3p}/p)^{1/p*}.
inline double improved_sobolev_constant(int d, double p) {
    if (!(p >= 1 && p < d)) throw precondition_error("improved Sobolev: 1 <= p < d");
    const double ps = d * p / (d - p);
    return p * (d - 1) / (d - p) * ps / (ps - 1) * std::pow(ps * std::pow(2.0, 3 * p) / p, 1 / ps);
}

/// ||u||_{p*,p} <= C ||grad u||_p with u sampled; grad_lp is ||grad u||_{L^p}.
inline LemmaCheck improved_sobolev_check(const SampledFunction& u, double grad_lp, int d, double p, double constant = -1) {
    if (constant < 0) constant = (d == 4 && p == 2.0) ? 14.0 : improved_sobolev_constant(d, p);
    const double ps = d * p / (d - p);
    const double lhs = lorentz_norm(u.rearrangement(), {ps, p});
    return make_check("improved_sobolev", lhs, constant * grad_lp, 1e-12,
                      {{"d", static_cast<long long>(d)}, {"p", p}, {"constant", constant}});
}

}  // namespace bhv

#endif
