#ifndef BHV_POISSON_HPP
#define BHV_POISSON_HPP

/// @file poisson.hpp
/// Mode-wise Poisson solver on the unit ball with zero Dirichlet data and the
/// dyadic and weighted gradient estimates built on it.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "check.hpp"
#include "harmonics.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace bhv {

// ---------------------------------------------------------------------------
// Piecewise Laurent polynomials in r

/// sum_i c[i] r^{low+i} on [lo, hi].
struct PolyPiece {
    double lo = 0.0, hi = 0.0;
    int low = 0;
    std::vector<double> c;

    double eval(double r) const {
        double s = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) s = s * r + c[i];
        return low == 0 ? s : s * std::pow(r, low);
    }

    PolyPiece derivative() const {
        PolyPiece d{lo, hi, low - 1, std::vector<double>(c.size(), 0.0)};
        for (std::size_t i = 0; i < c.size(); ++i) d.c[i] = c[i] * (low + static_cast<int>(i));
        return d;
    }

    /// int_x^y r^p * piece dr.
    double integral(int p, double x, double y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] == 0.0) continue;
            const int e = p + low + static_cast<int>(i);
            if (e == -1)
                s += c[i] * std::log(y / x);
            else
                s += c[i] * (std::pow(y, e + 1) - std::pow(x, e + 1)) / (e + 1);
        }
        return s;
    }

    bool zero() const {
        return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    }
};

/// Radial profile: disjoint sorted pieces, zero elsewhere.
class PiecewisePoly {
public:
    PiecewisePoly() = default;
    explicit PiecewisePoly(std::vector<PolyPiece> pieces) : pieces_(std::move(pieces)) {
        std::sort(pieces_.begin(), pieces_.end(), [](const PolyPiece& a, const PolyPiece& b) { return a.lo < b.lo; });
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            if (!(pieces_[i].lo < pieces_[i].hi)) throw std::invalid_argument("PiecewisePoly: empty piece");
            if (i > 0 && pieces_[i].lo < pieces_[i - 1].hi) throw std::invalid_argument("PiecewisePoly: overlapping pieces");
        }
    }

    static PiecewisePoly constant(double v, double lo, double hi) { return PiecewisePoly({{lo, hi, 0, {v}}}); }
    static PiecewisePoly monomial(double v, int e, double lo, double hi) { return PiecewisePoly({{lo, hi, e, {v}}}); }

    /// Polynomial q((r - a)/h) on [lo, hi] expanded in powers of r.
    static PolyPiece from_local(const std::vector<double>& q, double a, double h, double lo, double hi) {
        // Horner on polynomials in r: y = r/h - a/h
        std::vector<double> acc;
        for (std::size_t i = q.size(); i-- > 0;) {
            std::vector<double> next(acc.size() + 1, 0.0);
            for (std::size_t j = 0; j < acc.size(); ++j) {
                next[j + 1] += acc[j] / h;
                next[j] -= acc[j] * a / h;
            }
            next[0] += q[i];
            acc = std::move(next);
        }
        return {lo, hi, 0, acc};
    }

    /// C^1 piecewise-cubic Hermite interpolant.
    static PiecewisePoly hermite(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& s) {
        if (x.size() < 2 || v.size() != x.size() || s.size() != x.size())
            throw std::invalid_argument("PiecewisePoly::hermite: size mismatch");
        std::vector<PolyPiece> ps;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double h = x[i + 1] - x[i];
            const double y0 = v[i], y1 = v[i + 1], m0 = s[i] * h, m1 = s[i + 1] * h;
            const std::vector<double> q = {y0, m0, 3 * (y1 - y0) - 2 * m0 - m1, 2 * (y0 - y1) + m0 + m1};
            ps.push_back(from_local(q, x[i], h, x[i], x[i + 1]));
        }
        return PiecewisePoly(std::move(ps));
    }

    const std::vector<PolyPiece>& pieces() const { return pieces_; }
    bool empty() const {
        return std::all_of(pieces_.begin(), pieces_.end(), [](const PolyPiece& p) { return p.zero(); });
    }

    /// Index of the piece containing r, or -1.
    int locate(double r) const {
        auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r, [](double v, const PolyPiece& p) { return v < p.lo; });
        if (it == pieces_.begin()) return -1;
        const int i = static_cast<int>(it - pieces_.begin()) - 1;
        return r <= pieces_[i].hi ? i : -1;
    }

    double operator()(double r) const {
        const int i = locate(r);
        return i < 0 ? 0.0 : pieces_[i].eval(r);
    }

    PiecewisePoly derivative() const {
        std::vector<PolyPiece> ps;
        for (const auto& p : pieces_) ps.push_back(p.derivative());
        return PiecewisePoly(std::move(ps));
    }

    /// Smallest and largest r where some piece is nonzero; {0,0} if none.
    std::pair<double, double> support() const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : pieces_)
            if (!p.zero()) {
                lo = std::min(lo, p.lo);
                hi = std::max(hi, p.hi);
            }
        return lo <= hi ? std::make_pair(lo, hi) : std::make_pair(0.0, 0.0);
    }

    std::vector<double> breaks() const {
        std::vector<double> b;
        for (const auto& p : pieces_) {
            b.push_back(p.lo);
            b.push_back(p.hi);
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// max |value| and |slope| jump across interior breakpoints (and at the ends of the support).
    std::pair<double, double> continuity_defect() const {
        double jv = 0.0, js = 0.0;
        const PiecewisePoly d = derivative();
        for (double b : breaks()) {
            const double e = 1e-13 * std::max(b, 1e-300);
            auto side = [&](const PiecewisePoly& f, double r, bool left) {
                for (const auto& p : f.pieces_)
                    if (left ? (p.lo < r && r <= p.hi + e && std::abs(p.hi - r) <= e) : (std::abs(p.lo - r) <= e))
                        return p.eval(r);
                return 0.0;
            };
            if (b == 0.0) continue;
            jv = std::max(jv, std::abs(side(*this, b, true) - side(*this, b, false)));
            js = std::max(js, std::abs(side(d, b, true) - side(d, b, false)));
        }
        return {jv, js};
    }

    template <class Op>
    static PiecewisePoly combine(const PiecewisePoly& a, const PiecewisePoly& b, Op op, bool need_both) {
        std::vector<double> x = a.breaks();
        const auto xb = b.breaks();
        x.insert(x.end(), xb.begin(), xb.end());
        std::sort(x.begin(), x.end());
        x.erase(std::unique(x.begin(), x.end()), x.end());
        std::vector<PolyPiece> out;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double m = 0.5 * (x[i] + x[i + 1]);
            const int ia = a.locate(m), ib = b.locate(m);
            if (need_both ? (ia < 0 || ib < 0) : (ia < 0 && ib < 0)) continue;
            static const PolyPiece none{0, 0, 0, {}};
            PolyPiece p = op(ia < 0 ? none : a.pieces_[ia], ib < 0 ? none : b.pieces_[ib]);
            p.lo = x[i];
            p.hi = x[i + 1];
            out.push_back(std::move(p));
        }
        return PiecewisePoly(std::move(out));
    }

    friend PiecewisePoly operator+(const PiecewisePoly& a, const PiecewisePoly& b) {
        return combine(a, b, [](const PolyPiece& p, const PolyPiece& q) {
            if (p.c.empty()) return q;
            if (q.c.empty()) return p;
            const int low = std::min(p.low, q.low);
            const int top = std::max(p.low + static_cast<int>(p.c.size()), q.low + static_cast<int>(q.c.size()));
            PolyPiece s{0, 0, low, std::vector<double>(top - low, 0.0)};
            for (std::size_t i = 0; i < p.c.size(); ++i) s.c[p.low - low + i] += p.c[i];
            for (std::size_t i = 0; i < q.c.size(); ++i) s.c[q.low - low + i] += q.c[i];
            return s;
        }, false);
    }

    friend PiecewisePoly operator*(const PiecewisePoly& a, const PiecewisePoly& b) {
        return combine(a, b, [](const PolyPiece& p, const PolyPiece& q) {
            PolyPiece s{0, 0, p.low + q.low, std::vector<double>(p.c.size() + q.c.size() - 1, 0.0)};
            for (std::size_t i = 0; i < p.c.size(); ++i)
                for (std::size_t j = 0; j < q.c.size(); ++j) s.c[i + j] += p.c[i] * q.c[j];
            return s;
        }, true);
    }

    friend PiecewisePoly operator*(double s, PiecewisePoly a) {
        for (auto& p : a.pieces_)
            for (auto& v : p.c) v *= s;
        return a;
    }

    friend PiecewisePoly operator-(const PiecewisePoly& a, const PiecewisePoly& b) { return a + (-1.0) * b; }

private:
    std::vector<PolyPiece> pieces_;
};

/// g'' + (d-1)/r g' - n(n+d-2)/r^2 g, the radial part of the Laplacian on mode n.
inline PiecewisePoly mode_laplacian(const PiecewisePoly& g, int d, int n) {
    std::vector<PolyPiece> out;
    const double lam = laplace_eigenvalue(d, n);
    for (const auto& p : g.pieces()) {
        const PolyPiece d1 = p.derivative(), d2 = d1.derivative();
        PolyPiece s{p.lo, p.hi, p.low - 2, std::vector<double>(p.c.size(), 0.0)};
        for (std::size_t i = 0; i < p.c.size(); ++i) s.c[i] = d2.c[i] + (d - 1) * d1.c[i] - lam * p.c[i];
        out.push_back(std::move(s));
    }
    return PiecewisePoly(std::move(out));
}

// ---------------------------------------------------------------------------
// Dyadic annuli and the partition of unity

struct Shell {
    double lo, hi;
};

struct DyadicAnnuli {
    /// A_k = B_{2^-k} \ B_{2^-(k+1)}
    static Shell A(int k) { return {std::ldexp(1.0, -(k + 1)), std::ldexp(1.0, -k)}; }
    /// extended annulus B_{2^-(k-1)} \ B_{2^-(k+1)}
    static Shell extended(int k) { return {std::ldexp(1.0, -(k + 1)), std::ldexp(1.0, -(k - 1))}; }
    /// extended annulus intersected with the unit ball
    static Shell extended_in_ball(int k) { return {std::ldexp(1.0, -(k + 1)), std::min(1.0, std::ldexp(1.0, -(k - 1)))}; }
    /// k with r in A_k (r = 2^-k belongs to A_k), -1 outside (0,1].
    static int index(double r) { return r > 0.0 && r <= 1.0 ? static_cast<int>(std::floor(-std::log2(r))) : -1; }
};

namespace detail {
// quintic C^2 step 10y^3 - 15y^4 + 6y^5 and its mirror
inline const std::vector<double>& step_up() {
    static const std::vector<double> q = {0, 0, 0, 10, -15, 6};
    return q;
}
inline const std::vector<double>& step_down() {
    static const std::vector<double> q = {1, 0, 0, -10, 15, -6};
    return q;
}
}  // namespace detail

/// chi_k on [0,1]: rises on A_k's inner half-shell [2^-(k+1), 2^-k], falls on [2^-k, 2^-(k-1)].
/// C^2, 0 <= chi_k <= 1, supported in the closure of the extended annulus, and sum_k chi_k = 1 on (0,1].
inline PiecewisePoly partition_function(int k) {
    if (k < 0) throw std::invalid_argument("partition_function: k >= 0");
    const double a = std::ldexp(1.0, -(k + 1)), m = std::ldexp(1.0, -k);
    std::vector<PolyPiece> ps;
    ps.push_back(PiecewisePoly::from_local(detail::step_up(), a, a, a, m));
    if (k >= 1) ps.push_back(PiecewisePoly::from_local(detail::step_down(), m, m, m, 2 * m));
    return PiecewisePoly(std::move(ps));
}

// ---------------------------------------------------------------------------
// Sources and the solver

using ModeKey = std::pair<int, int>;

/// f = sum f_{n,k}(r) Y_n^k(omega) on B(0,1).
struct RadialSource {
    int d = 4;
    std::map<ModeKey, PiecewisePoly> modes;

    void validate() const {
        if (d < 3) throw precondition_error("RadialSource: d >= 3");
        for (const auto& [key, f] : modes) {
            const auto [n, k] = key;
            if (n < 0 || k < 1 || static_cast<std::uint64_t>(k) > dim_harmonics(d, n))
                throw precondition_error("RadialSource: mode index out of range");
            for (const auto& p : f.pieces()) {
                if (p.lo < 0.0 || p.hi > 1.0 + 1e-15) throw precondition_error("RadialSource: profile leaves [0,1]");
                for (std::size_t i = 0; i < p.c.size(); ++i) {
                    if (!std::isfinite(p.c[i])) throw precondition_error("RadialSource: non-finite coefficient");
                    if (p.lo == 0.0 && p.c[i] != 0.0 && p.low + static_cast<int>(i) < 0)
                        throw precondition_error("RadialSource: unbounded profile at the origin");
                }
            }
        }
    }

    RadialSource& add(int n, int k, const PiecewisePoly& f) {
        auto it = modes.find({n, k});
        if (it == modes.end())
            modes.emplace(ModeKey{n, k}, f);
        else
            it->second = it->second + f;
        return *this;
    }

    friend RadialSource operator+(RadialSource a, const RadialSource& b) {
        if (a.d != b.d) throw precondition_error("RadialSource: dimension mismatch");
        for (const auto& [key, f] : b.modes) a.add(key.first, key.second, f);
        return a;
    }
    friend RadialSource operator*(double s, RadialSource a) {
        for (auto& [key, f] : a.modes) f = s * f;
        return a;
    }

    /// Largest r in the support over all modes.
    std::pair<double, double> support() const {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& [key, f] : modes)
            if (!f.empty()) {
                const auto s = f.support();
                lo = std::min(lo, s.first);
                hi = std::max(hi, s.second);
            }
        return hi > 0.0 ? std::make_pair(lo, hi) : std::make_pair(0.0, 0.0);
    }
};

/// Radial solution of one mode: u = (-r^{-m} J_a(r) + r^n (J_a(1) - J_b(r))) / (2n+d-2) + h r^n,
/// J_a(r) = int_0^r s^{n+d-1} f, J_b(r) = int_r^1 s^{1-n} f, m = n+d-2.
class ModeSolution {
public:
    ModeSolution(int d, int n, PiecewisePoly f) : d_(d), n_(n), m_(n + d - 2), C_(2.0 * n + d - 2), f_(std::move(f)) {
        const auto& ps = f_.pieces();
        pa_.assign(ps.size() + 1, 0.0);
        sb_.assign(ps.size() + 1, 0.0);
        for (std::size_t i = 0; i < ps.size(); ++i) pa_[i + 1] = pa_[i] + ps[i].integral(n_ + d_ - 1, ps[i].lo, ps[i].hi);
        for (std::size_t i = ps.size(); i-- > 0;) sb_[i] = sb_[i + 1] + ps[i].integral(1 - n_, ps[i].lo, ps[i].hi);
        ja1_ = pa_.back();
    }

    int n() const { return n_; }
    const PiecewisePoly& source() const { return f_; }
    double harmonic() const { return h_; }
    void add_harmonic(double c) { h_ += c; }

    double value(double r) const {
        if (r <= 0.0) return n_ == 0 ? (ja1_ - jb(0.0)) / C_ + h_ : 0.0;
        const double rn = std::pow(r, n_);
        return (-std::pow(r, -m_) * ja(r) + rn * (ja1_ - jb(r))) / C_ + h_ * rn;
    }

    double derivative(double r) const {
        if (r <= 0.0) return n_ == 1 ? (ja1_ - jb(0.0)) / C_ + h_ : 0.0;
        const double rn1 = n_ >= 1 ? std::pow(r, n_ - 1) : 0.0;
        return (m_ * std::pow(r, -m_ - 1) * ja(r) + n_ * rn1 * (ja1_ - jb(r))) / C_ + h_ * n_ * rn1;
    }

    /// Second derivative from the representation (not from the ODE).
    double second(double r) const {
        const double rn2 = n_ >= 2 ? std::pow(r, n_ - 2) : 0.0;
        return (-m_ * (m_ + 1.0) * std::pow(r, -m_ - 2) * ja(r) + n_ * (n_ - 1.0) * rn2 * (ja1_ - jb(r))) / C_ +
               f_(r) + h_ * n_ * (n_ - 1.0) * rn2;
    }

    /// int_0^r s^{n+d-1} f(s) ds
    double ja(double r) const {
        const auto& ps = f_.pieces();
        auto it = std::upper_bound(ps.begin(), ps.end(), r, [](double v, const PolyPiece& p) { return v < p.lo; });
        const std::size_t i = static_cast<std::size_t>(it - ps.begin());
        if (i == 0) return 0.0;
        const auto& p = ps[i - 1];
        return r >= p.hi ? pa_[i] : pa_[i - 1] + p.integral(n_ + d_ - 1, p.lo, r);
    }

    /// int_r^1 s^{1-n} f(s) ds
    double jb(double r) const {
        const auto& ps = f_.pieces();
        auto it = std::upper_bound(ps.begin(), ps.end(), r, [](double v, const PolyPiece& p) { return v < p.lo; });
        const std::size_t i = static_cast<std::size_t>(it - ps.begin());
        if (i == 0) return sb_[0];
        const auto& p = ps[i - 1];
        return r >= p.hi ? sb_[i] : sb_[i] + p.integral(1 - n_, r, p.hi);
    }

    double total_moment() const { return ja1_; }

private:
    int d_, n_, m_;
    double C_;
    PiecewisePoly f_;
    std::vector<double> pa_, sb_;
    double ja1_ = 0.0, h_ = 0.0;
};

struct SpectralSolution {
    int d = 4;
    std::map<ModeKey, ModeSolution> modes;
    double max_residual = 0.0;

    double value(int n, int k, double r) const {
        auto it = modes.find({n, k});
        return it == modes.end() ? 0.0 : it->second.value(r);
    }
    double derivative(int n, int k, double r) const {
        auto it = modes.find({n, k});
        return it == modes.end() ? 0.0 : it->second.derivative(r);
    }

    /// Adds c r^n Y_n^k (harmonic, changes the boundary data).
    SpectralSolution& add_harmonic(int n, int k, double c) {
        auto it = modes.find({n, k});
        if (it == modes.end()) it = modes.emplace(ModeKey{n, k}, ModeSolution(d, n, PiecewisePoly())).first;
        it->second.add_harmonic(c);
        return *this;
    }

    /// Break points of all sources, for quadrature.
    std::vector<double> breaks() const {
        std::vector<double> b;
        for (const auto& [key, m] : modes) {
            const auto x = m.source().breaks();
            b.insert(b.end(), x.begin(), x.end());
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }
};

namespace detail {

/// Relative residual of the mode ODE at r.
inline double mode_residual(const ModeSolution& s, int d, double r) {
    const double lam = laplace_eigenvalue(d, s.n());
    const double u = s.value(r), du = s.derivative(r), d2 = s.second(r), f = s.source()(r);
    const double t1 = (d - 1) * du / r, t2 = lam * u / (r * r);
    const double res = d2 + t1 - t2 - f;
    const double scale = std::abs(d2) + std::abs(t1) + std::abs(t2) + std::abs(f);
    return scale > 0.0 ? std::abs(res) / scale : 0.0;
}

inline std::vector<double> residual_grid(const PiecewisePoly& f) {
    std::vector<double> g;
    for (const auto& p : f.pieces())
        for (int i = 1; i <= 5; ++i) g.push_back(p.lo + (p.hi - p.lo) * i / 6.0);
    for (int k = 0; k <= 12; ++k) g.push_back(0.3 * std::ldexp(1.0, -k) + 0.5 * std::ldexp(1.0, -k));
    return g;
}

}  // namespace detail

/// Solves Delta u = f in B(0,1), u = 0 on the sphere, mode by mode.
inline SpectralSolution solve_dirichlet_ball(const RadialSource& f) {
    f.validate();
    SpectralSolution s;
    s.d = f.d;
    for (const auto& [key, prof] : f.modes) {
        auto it = s.modes.emplace(key, ModeSolution(f.d, key.first, prof)).first;
        for (double r : detail::residual_grid(prof))
            s.max_residual = std::max(s.max_residual, detail::mode_residual(it->second, f.d, r));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Radial quadrature: Gauss in log r on every dyadic shell, split at profile breaks

namespace detail {

inline const Rule1D& reference_gauss(int n) {
    static std::mutex mu;
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}

/// Innermost shell index used when an integral reaches the origin.
inline constexpr int origin_shell = 48;

}  // namespace detail

/// int_lo^hi g(r) dr; [lo,hi] is cut at dyadic radii and at `breaks`.
template <class G>
double radial_integral(G&& g, double lo, double hi, const std::vector<double>& breaks, int nodes = 64) {
    lo = std::max(lo, std::ldexp(1.0, -detail::origin_shell));
    if (!(lo < hi)) return 0.0;
    std::vector<double> cut = {lo, hi};
    for (int k = static_cast<int>(std::floor(-std::log2(hi))); k <= detail::origin_shell; ++k) {
        const double x = std::ldexp(1.0, -k);
        if (x > lo && x < hi) cut.push_back(x);
    }
    for (double b : breaks)
        if (b > lo && b < hi) cut.push_back(b);
    std::sort(cut.begin(), cut.end());
    const Rule1D& R = detail::reference_gauss(nodes);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
        const double a = std::log(cut[i]), b = std::log(cut[i + 1]);
        if (!(b > a)) continue;
        const double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (std::size_t q = 0; q < R.size(); ++q) {
            const double r = std::exp(c + h * R.x[q]);
            s += h * R.w[q] * r * g(r);
        }
    }
    return s;
}

/// log-type weight (1 + log2(1/r)) log(e + log2(1/r)).
inline double dyadic_log_weight(double r) {
    const double L = std::log2(1.0 / r);
    return (1.0 + L) * std::log(std::exp(1.0) + L);
}

/// beta * sum_modes int_lo^hi w(r) [u'^2 + lambda u^2 / r^2] r^{d-1} dr = int w |grad u|^2.
template <class W>
double weighted_gradient_sq(const SpectralSolution& u, double lo, double hi, W&& w, int nodes = 64) {
    const auto br = u.breaks();
    double s = 0.0;
    for (const auto& [key, m] : u.modes) {
        const double lam = laplace_eigenvalue(u.d, key.first);
        s += radial_integral([&](double r) {
            const double v = m.value(r), dv = m.derivative(r);
            return w(r) * (dv * dv + lam * v * v / (r * r)) * std::pow(r, u.d - 1);
        }, lo, hi, br, nodes);
    }
    return sphere_area(u.d) * s;
}

inline double gradient_sq(const SpectralSolution& u, double lo = 0.0, double hi = 1.0, int nodes = 64) {
    return weighted_gradient_sq(u, lo, hi, [](double) { return 1.0; }, nodes);
}

inline double value_sq(const SpectralSolution& u, double lo = 0.0, double hi = 1.0, int nodes = 64) {
    const auto br = u.breaks();
    double s = 0.0;
    for (const auto& [key, m] : u.modes)
        s += radial_integral([&](double r) {
            const double v = m.value(r);
            return v * v * std::pow(r, u.d - 1);
        }, lo, hi, br, nodes);
    return sphere_area(u.d) * s;
}

/// int w(r) |f|^2 over lo < |x| < hi.
template <class W>
double weighted_source_sq(const RadialSource& f, double lo, double hi, W&& w, int nodes = 64) {
    double s = 0.0;
    for (const auto& [key, p] : f.modes)
        s += radial_integral([&](double r) {
            const double v = p(r);
            return w(r) * v * v * std::pow(r, f.d - 1);
        }, lo, hi, p.breaks(), nodes);
    return sphere_area(f.d) * s;
}

inline double source_sq(const RadialSource& f, double lo = 0.0, double hi = 1.0, int nodes = 64) {
    return weighted_source_sq(f, lo, hi, [](double) { return 1.0; }, nodes);
}

/// int u g over B(0,1).
inline double pairing(const SpectralSolution& u, const RadialSource& g, int nodes = 64) {
    double s = 0.0;
    for (const auto& [key, p] : g.modes) {
        auto it = u.modes.find(key);
        if (it == u.modes.end()) continue;
        auto br = p.breaks();
        const auto b2 = it->second.source().breaks();
        br.insert(br.end(), b2.begin(), b2.end());
        s += radial_integral([&](double r) { return it->second.value(r) * p(r) * std::pow(r, g.d - 1); }, 0.0, 1.0, br, nodes);
    }
    return sphere_area(g.d) * s;
}

/// (int_{lo<|x|<hi} |grad u|^q)^{1/q} by angular x radial quadrature (d in {3,4}).
inline double gradient_lq_norm(const SpectralSolution& u, double lo, double hi, double q, int level = 6, int radial_nodes = 12) {
    if (u.d != 3 && u.d != 4) throw unsupported_dimension("gradient_lq_norm: d must be 3 or 4");
    int N = 0;
    for (const auto& [key, m] : u.modes) N = std::max(N, key.first);
    const auto& basis = HarmonicBasis::get(u.d, std::max(N, 1));
    const AngularQuadrature Q(u.d, level);
    // P, grad P at every node for every mode
    std::vector<std::vector<std::array<double, 5>>> tab(Q.size());
    for (std::size_t i = 0; i < Q.size(); ++i) {
        Powers pw(Q.node(i).data(), N + 1);
        for (const auto& [key, m] : u.modes) {
            const auto& P = basis.compiled(key.first, key.second);
            std::array<double, 5> e{P.value(pw), 0, 0, 0, 0};
            for (int j = 0; j < u.d; ++j) e[1 + j] = P.grad(j, pw);
            tab[i].push_back(e);
        }
    }
    const double val = radial_integral([&](double r) {
        std::vector<double> a, b;
        for (const auto& [key, m] : u.modes) {
            const double v = m.value(r), dv = m.derivative(r);
            a.push_back(dv - key.first * v / r);
            b.push_back(v / r);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < Q.size(); ++i) {
            const auto& w = Q.node(i);
            double g[4] = {0, 0, 0, 0};
            for (std::size_t j = 0; j < a.size(); ++j) {
                const auto& e = tab[i][j];
                for (int c = 0; c < u.d; ++c) g[c] += a[j] * e[0] * w[c] + b[j] * e[1 + c];
            }
            double n2 = 0.0;
            for (int c = 0; c < u.d; ++c) n2 += g[c] * g[c];
            s += Q.weight(i) * std::pow(n2, 0.5 * q);
        }
        return s * std::pow(r, u.d - 1);
    }, lo, hi, u.breaks(), radial_nodes);
    return std::pow(val, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Source constructors

/// f = Delta g mode by mode; g must be C^1 (so Delta g has no singular part).
inline RadialSource gradient_potential_source(const RadialSource& g) {
    g.validate();
    RadialSource f;
    f.d = g.d;
    for (const auto& [key, p] : g.modes) {
        const auto [jv, js] = p.continuity_defect();
        double scale = 1.0;
        for (const auto& pc : p.pieces()) scale = std::max(scale, std::abs(pc.eval(0.5 * (pc.lo + pc.hi))));
        if (jv > 1e-9 * scale || js > 1e-9 * scale / std::max(p.support().first, 1e-3))
            throw precondition_error("gradient_potential_source: potential must be C^1");
        f.modes.emplace(key, mode_laplacian(p, g.d, key.first));
    }
    return f;
}

/// Hermite interpolant of r^{1-d/2} J_{d/2-1}(j r), the first Dirichlet eigenfunction (mode 0).
inline RadialSource near_eigenfunction_source(int d, int knots) {
    const double nu = 0.5 * d - 1.0, j = std::sqrt(constants::ball_lambda1(d));
    std::vector<double> x, v, s;
    for (int i = 0; i <= knots; ++i) {
        const double r = static_cast<double>(i) / knots;
        x.push_back(r);
        if (r == 0.0) {
            v.push_back(std::pow(0.5 * j, nu) / std::tgamma(nu + 1.0));
            s.push_back(0.0);
        } else {
            v.push_back(std::pow(r, -nu) * bessel_j(nu, j * r));
            s.push_back(-j * std::pow(r, -nu) * bessel_j(nu + 1.0, j * r));
        }
    }
    v.back() = 0.0;
    RadialSource f;
    f.d = d;
    f.modes.emplace(ModeKey{0, 1}, PiecewisePoly::hermite(x, v, s));
    return f;
}

/// Cubic Hermite interpolant of sum_{j in shells} c_j chi_j with `per_shell` knots per dyadic shell.
inline PiecewisePoly shell_profile(const std::vector<std::pair<int, double>>& shells, int per_shell) {
    PiecewisePoly h;
    int kmax = 0;
    for (const auto& [k, c] : shells) {
        h = h + c * partition_function(k);
        kmax = std::max(kmax, k);
    }
    const PiecewisePoly dh = h.derivative();
    std::vector<double> x, v, s;
    for (int j = kmax + 1; j >= 0; --j)
        for (int i = 0; i < per_shell; ++i) {
            const double r = std::ldexp(1.0, -(j + 1)) * std::pow(2.0, static_cast<double>(i) / per_shell);
            x.push_back(r);
        }
    x.push_back(1.0);
    double vmax = 0.0;
    for (double r : x) {
        v.push_back(h(r));
        s.push_back(dh(r));
        vmax = std::max(vmax, std::abs(v.back()));
    }
    // the monomial form of chi_k leaves ~1e-13 residues at the ends of its support
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(v[i]) <= 1e-11 * vmax && std::abs(s[i]) * x[i] <= 1e-10 * vmax) v[i] = s[i] = 0.0;
    return PiecewisePoly::hermite(x, v, s);
}

struct SourceOptions {
    int N = 8;           // max degree
    int kmax = 10;       // deepest shell
    int per_shell = 4;   // Hermite knots per dyadic shell
    int modes = 4;       // modes per source
    int shells = 3;      // active shells per mode
};

/// Random multi-shell source: a few modes, each a Hermite cubic of a random combination of chi_k.
inline RadialSource random_multishell_source(Rng& g, int d = 4, SourceOptions opt = {}) {
    RadialSource f;
    f.d = d;
    for (int i = 0; i < opt.modes; ++i) {
        const int n = g.integer(0, opt.N);
        const int k = g.integer(1, static_cast<int>(dim_harmonics(d, n)));
        std::vector<std::pair<int, double>> sh;
        for (int s = 0; s < opt.shells; ++s) sh.push_back({g.integer(0, opt.kmax), g.normal()});
        f.add(n, k, shell_profile(sh, opt.per_shell));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Lemma checks

/// ||grad u||_2 / ||f||_2 for the Dirichlet solution.
inline double dirichlet_gradient_ratio(const RadialSource& f) {
    const double F = std::sqrt(source_sq(f));
    if (F == 0.0) return 0.0;
    return std::sqrt(gradient_sq(solve_dirichlet_ball(f))) / F;
}

namespace detail {
inline void require_support(const RadialSource& f, double lo, double hi, const char* what) {
    const double e = 1e-14;
    for (const auto& [key, p] : f.modes) {
        if (p.empty()) continue;
        const auto s = p.support();
        if (s.first < lo * (1 - e) || s.second > hi * (1 + e)) throw precondition_error(what);
    }
}
}  // namespace detail

/// ||grad u||_2 <= ||f||_2 / sqrt(lambda_1) for f supported in the k-th extended annulus.
inline LemmaCheck verify_shell_gradient_bound(const RadialSource& f, int k, double tol = 1e-10) {
    f.validate();
    if (k < 0) throw precondition_error("verify_shell_gradient_bound: k >= 0");
    const Shell S = DyadicAnnuli::extended_in_ball(k);
    detail::require_support(f, S.lo, S.hi, "verify_shell_gradient_bound: source leaves the extended annulus");
    const auto u = solve_dirichlet_ball(f);
    const double G = std::sqrt(gradient_sq(u)), F = std::sqrt(source_sq(f));
    const double inv_j = 1.0 / std::sqrt(constants::ball_lambda1(f.d));
    return make_check("elementary_gradient_estimate", G, inv_j * F, tol,
                      {{"k", static_cast<long long>(k)}, {"inverse_j", inv_j}, {"ratio", F > 0 ? G / F : 0.0},
                       {"residual", u.max_residual}});
}

/// || |x| grad u ||_2 <= Gamma_1 || |x| w f ||_2 in B(0,1) subset R^4.
inline LemmaCheck verify_weighted_gradient_lemma(const RadialSource& f, double tol = 1e-10) {
    f.validate();
    if (f.d != 4) throw precondition_error("verify_weighted_gradient_lemma: d = 4");
    const auto u = solve_dirichlet_ball(f);
    const double L = std::sqrt(weighted_gradient_sq(u, 0.0, 1.0, [](double r) { return r * r; }));
    const double R = std::sqrt(weighted_source_sq(f, 0.0, 1.0, [](double r) {
        const double w = dyadic_log_weight(r) * r;
        return w * w;
    }));
    const double G1 = constants::gamma1();
    return make_check("dyadic_gradient", L, G1 * R, tol, {{"gamma1", G1}, {"ratio", R > 0 ? L / R : 0.0}});
}

/// ||grad u||_2 / || w |x| f ||_2.
inline double weighted_dirichlet_ratio(const RadialSource& f, int nodes = 64) {
    f.validate();
    const double R = std::sqrt(weighted_source_sq(f, 0.0, 1.0, [](double r) {
        const double w = dyadic_log_weight(r) * r;
        return w * w;
    }, nodes));
    if (R == 0.0) return 0.0;
    return std::sqrt(gradient_sq(solve_dirichlet_ball(f), 0.0, 1.0, nodes)) / R;
}

/// Empirical constant: max ratio over an ensemble.
inline double fit_weighted_dirichlet_constant(const std::vector<RadialSource>& ensemble, int nodes = 64) {
    double m = 0.0;
    for (const auto& f : ensemble) m = std::max(m, weighted_dirichlet_ratio(f, nodes));
    return m;
}

/// Recorded empirical constant for the weighted Dirichlet estimate (d = 4): maximum ratio over
/// random_multishell_source(Rng(2), 4, {per_shell = 8}) x 100.
inline constexpr double weighted_dirichlet_gamma_hat = 0.2015302897;

/// ||grad u||_2 <= gamma_hat || w |x| f ||_2 with an empirical gamma_hat.
inline LemmaCheck verify_weighted_dirichlet_lemma(const RadialSource& f, double gamma_hat = weighted_dirichlet_gamma_hat,
                                                  double tol = 1e-10) {
    f.validate();
    if (f.d != 4) throw precondition_error("verify_weighted_dirichlet_lemma: d = 4");
    const auto u = solve_dirichlet_ball(f);
    const double L = std::sqrt(gradient_sq(u));
    const double R = std::sqrt(weighted_source_sq(f, 0.0, 1.0, [](double r) {
        const double w = dyadic_log_weight(r) * r;
        return w * w;
    }));
    return make_check("weighted_modified_dirichlet", L, gamma_hat * R, tol,
                      {{"gamma_hat", gamma_hat}, {"ratio", R > 0 ? L / R : 0.0}});
}

/// Coefficients (a, b) of a r^n + b r^{-(n+d-2)} fitted at two exterior radii.
inline std::pair<double, double> exterior_coefficients(const SpectralSolution& u, int n, int k, double r1, double r2) {
    const int m = n + u.d - 2;
    const double u1 = u.value(n, k, r1), u2 = u.value(n, k, r2);
    const double a11 = std::pow(r1, n), a12 = std::pow(r1, -m), a21 = std::pow(r2, n), a22 = std::pow(r2, -m);
    const double det = a11 * a22 - a12 * a21;
    return {(u1 * a22 - a12 * u2) / det, (a11 * u2 - a21 * u1) / det};
}

/// int s^{d-1} f_{0,1}: the flux of a divergence source through large spheres, up to beta.
inline double source_flux(const RadialSource& f) {
    auto it = f.modes.find({0, 1});
    if (it == f.modes.end()) return 0.0;
    double s = 0.0;
    for (const auto& p : it->second.pieces()) s += p.integral(f.d - 1, p.lo, p.hi);
    return sphere_area(f.d) * s;
}

/// Decay of a divergence-form solution away from the support of its source.
///   k < j: supp f in B_{2^-j}, zero flux;  int_{A_k} u^2 <= (8/3) 2^{2(k+1-j)} int_{B_1 \ B_{2^-j}} u^2
///   k > j: supp f in A_j;                 int_{B_{2^-k}} u^2 <= 2^{4(j+1-k)} int_{B_{2^-j}} u^2
inline LemmaCheck verify_decay_lemma(const RadialSource& f, int j, int k, double tol = 1e-9) {
    f.validate();
    if (f.d != 4) throw precondition_error("verify_decay_lemma: d = 4");
    if (j < 1 || k < 0 || k == j) throw precondition_error("verify_decay_lemma: need j >= 1, k >= 0, k != j");
    const double rj = std::ldexp(1.0, -j);
    Params P{{"j", static_cast<long long>(j)}, {"k", static_cast<long long>(k)}};
    if (k < j) {
        detail::require_support(f, 0.0, rj, "verify_decay_lemma: source leaves B_{2^-j}");
        const double flux = source_flux(f);
        double abs_flux = 0.0;
        if (auto it = f.modes.find({0, 1}); it != f.modes.end())
            abs_flux = sphere_area(f.d) * radial_integral([&](double r) { return std::abs(it->second(r)) * std::pow(r, f.d - 1); },
                                                          0.0, rj, it->second.breaks());
        if (std::abs(flux) > 1e-10 * abs_flux) throw precondition_error("verify_decay_lemma: source has nonzero flux");
        const auto u = solve_dirichlet_ball(f);
        const Shell A = DyadicAnnuli::A(k);
        const double lhs = value_sq(u, A.lo, A.hi);
        const double rhs = 8.0 / 3.0 * std::ldexp(1.0, 2 * (k + 1 - j)) * value_sq(u, rj, 1.0);
        const auto [a01, b01] = exterior_coefficients(u, 0, 1, std::max(rj, 0.5), 0.75);
        P["b01"] = b01;
        P["a01"] = a01;
        P["flux"] = flux;
        return make_check("lemmae3_exterior", lhs, rhs, tol, P);
    }
    detail::require_support(f, 0.5 * rj, rj, "verify_decay_lemma: source leaves A_j");
    const auto u = solve_dirichlet_ball(f);
    const double lhs = value_sq(u, 0.0, std::ldexp(1.0, -k));
    const double rhs = std::ldexp(1.0, 4 * (j + 1 - k)) * value_sq(u, 0.0, rj);
    return make_check("lemmae3_interior", lhs, rhs, tol, P);
}

/// Per-shell quantities of the iteration estimates.
enum class IterationKind { divergence, gradient, gradient_over_x };

inline const char* iteration_kind_name(IterationKind k) {
    switch (k) {
        case IterationKind::divergence: return "u";
        case IterationKind::gradient: return "grad_u";
        default: return "grad_u_over_x";
    }
}

struct IterationProfile {
    IterationKind kind;
    std::vector<double> lhs;     // ||Q||_{L^2(A_k)}, k = 0..kmax
    std::vector<double> source;  // squared source norm on A_l, l = 0..lmax
    double factor = 0.25;        // homogeneous decay per shell
};

/// divergence: Q = u, source ||grad u||_{4/3, A_l}^2 (Delta u = div K with K = grad u);
/// gradient: Q = grad u, source ||f||_{2, A_l}^2; gradient_over_x: Q = grad u / |x|.
inline IterationProfile iteration_profile(const SpectralSolution& u, const RadialSource& f, IterationKind kind, int kmax = 8,
                                          int lmax = 24) {
    IterationProfile P;
    P.kind = kind;
    P.factor = kind == IterationKind::gradient_over_x ? 0.5 : 0.25;
    for (int k = 0; k <= kmax; ++k) {
        const Shell A = DyadicAnnuli::A(k);
        double v = 0.0;
        if (kind == IterationKind::divergence)
            v = value_sq(u, A.lo, A.hi);
        else if (kind == IterationKind::gradient)
            v = gradient_sq(u, A.lo, A.hi);
        else
            v = weighted_gradient_sq(u, A.lo, A.hi, [](double r) { return 1.0 / (r * r); });
        P.lhs.push_back(std::sqrt(v));
    }
    for (int l = 0; l <= lmax; ++l) {
        const Shell A = DyadicAnnuli::A(l);
        if (kind == IterationKind::divergence) {
            const double n = gradient_lq_norm(u, A.lo, A.hi, 4.0 / 3.0);
            P.source.push_back(n * n);
        } else {
            P.source.push_back(source_sq(f, A.lo, A.hi));
        }
    }
    return P;
}

/// (sum_l 2^{-2 alpha |l-k+1|} S_l)^{1/2}
inline double iteration_tail(const IterationProfile& P, int k, double alpha) {
    double s = 0.0;
    for (std::size_t l = 0; l < P.source.size(); ++l)
        s += std::pow(2.0, -2.0 * alpha * std::abs(static_cast<int>(l) - k + 1)) * P.source[l];
    return std::sqrt(s);
}

/// Smallest C with lhs_k <= factor^k lhs_0 + C/(1-alpha)^3 tail_k for all k.
inline double iteration_constant(const IterationProfile& P, double alpha) {
    double C = 0.0;
    for (std::size_t k = 0; k < P.lhs.size(); ++k) {
        const double excess = P.lhs[k] - std::pow(P.factor, static_cast<double>(k)) * P.lhs[0];
        if (excess <= 1e-14 * P.lhs[0]) continue;
        const double t = iteration_tail(P, static_cast<int>(k), alpha);
        C = std::max(C, t > 0.0 ? excess * std::pow(1.0 - alpha, 3) / t : std::numeric_limits<double>::infinity());
    }
    return C;
}

inline double fit_iteration_constant(const std::vector<RadialSource>& ensemble, double alpha, IterationKind kind, int kmax = 8) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw precondition_error("fit_iteration_constant: alpha in (0,1)");
    double C = 0.0;
    for (const auto& f : ensemble) C = std::max(C, iteration_constant(iteration_profile(solve_dirichlet_ball(f), f, kind, kmax), alpha));
    return C;
}

/// Checks the iteration inequality for all k <= kmax with a given constant.
inline LemmaCheck verify_iteration_theorem(const RadialSource& f, double alpha, double C, IterationKind kind, int kmax = 8,
                                           double tol = 1e-10) {
    f.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw precondition_error("verify_iteration_theorem: alpha in (0,1)");
    const auto P = iteration_profile(solve_dirichlet_ball(f), f, kind, kmax);
    double worst = 0.0;
    for (std::size_t k = 0; k < P.lhs.size(); ++k) {
        const double rhs = std::pow(P.factor, static_cast<double>(k)) * P.lhs[0] +
                           C / std::pow(1.0 - alpha, 3) * iteration_tail(P, static_cast<int>(k), alpha);
        if (P.lhs[k] > 0.0) worst = std::max(worst, rhs > 0.0 ? P.lhs[k] / rhs : std::numeric_limits<double>::infinity());
    }
    return make_check(std::string("dyadic_main_theorem_") + iteration_kind_name(kind), worst, 1.0, tol,
                      {{"alpha", alpha}, {"C", C}, {"fitted_C", iteration_constant(P, alpha)}});
}

/// Fitted constant on the first half versus the whole ensemble; pass if the relative change is <= rel.
inline LemmaCheck verify_iteration_stability(const std::vector<RadialSource>& ensemble, double alpha, IterationKind kind,
                                             double rel = 0.1, int kmax = 8) {
    if (ensemble.size() < 2) throw precondition_error("verify_iteration_stability: need at least two sources");
    const std::vector<RadialSource> half(ensemble.begin(), ensemble.begin() + ensemble.size() / 2);
    const double Ch = fit_iteration_constant(half, alpha, kind, kmax);
    const double Cf = fit_iteration_constant(ensemble, alpha, kind, kmax);
    const double change = Cf > 0.0 ? Cf / Ch - 1.0 : 0.0;
    return make_check(std::string("dyadic_main_theorem_stability_") + iteration_kind_name(kind), change, rel, 0.0,
                      {{"alpha", alpha}, {"C_half", Ch}, {"C_full", Cf}, {"size", static_cast<long long>(ensemble.size())}});
}

}  // namespace bhv

#endif
