#ifndef BHV_STABILITY_HPP
#define BHV_STABILITY_HPP

/// @file stability.hpp
/// Second variation of the extrinsic biharmonic energy for sphere targets,
/// the Pohozaev flux, Hardy-Rellich inequalities on annuli of R^4 as per-mode
/// Rayleigh problems, and the neck-positivity assembly.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annulus.hpp"
#include "calculus.hpp"
#include "check.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace bhv {

namespace jet {

/// Jet of f(S) from f(S), f'(S), f''(S).
inline Jet compose(const Jet& S, double f0, double f1, double f2) {
    Jet J;
    J.u = f0;
    for (int i = 0; i < 4; ++i) {
        J.g[i] = f1 * S.g[i];
        for (int j = 0; j < 4; ++j) J.H[i][j] = f2 * S.g[i] * S.g[j] + f1 * S.H[i][j];
    }
    return J;
}

}  // namespace jet

// ---------------------------------------------------------------------------
// Sphere-valued maps

constexpr int kMaxTarget = 8;

/// u : Omega -> S^m in R^{m+1}, components on a common grid.
struct SphereMap {
    VectorGridField field;

    int target_dim() const { return static_cast<int>(field.comps.size()) - 1; }
    const GridField& grid() const { return field.comps.front(); }
    std::size_t nodes() const { return grid().jets.size(); }
};

inline SphereMap make_sphere_map(VectorGridField u, double tol = 1e-10) {
    if (u.comps.size() < 2 || u.comps.size() > static_cast<std::size_t>(kMaxTarget))
        throw precondition_error("SphereMap: target dimension out of range");
    u.sphere_valued = true;
    if (u.unit_defect() > tol) throw precondition_error("SphereMap: |u| != 1");
    return SphereMap{std::move(u)};
}

/// The constant map e_0 in S^m on the grid of `like`.
inline SphereMap constant_sphere_map(const GridField& like, int m = 3) {
    VectorGridField v;
    for (int c = 0; c <= m; ++c) {
        GridField f = like;
        for (auto& J : f.jets) J = jet::constant(c == 0 ? 1.0 : 0.0);
        v.comps.push_back(std::move(f));
    }
    return make_sphere_map(std::move(v));
}

inline SphereMap identity_sphere_map(double lo, double hi, GridSpec spec) {
    return make_sphere_map(sample_identity_map(4, lo, hi, spec));
}

namespace detail {

inline void require_same_grid(const SphereMap& u, const VectorGridField& w) {
    if (w.comps.size() != u.field.comps.size()) throw precondition_error("second_variation: target dimensions differ");
    const GridField& a = u.grid();
    for (const auto& c : w.comps)
        if (c.jets.size() != a.jets.size() || c.lo != a.lo || c.hi != a.hi || c.level != a.level)
            throw precondition_error("second_variation: u and w live on different grids");
}

using Vec = std::array<double, kMaxTarget>;

inline double dot(const Vec& a, const Vec& b, int n) {
    double s = 0;
    for (int c = 0; c < n; ++c) s += a[c] * b[c];
    return s;
}

}  // namespace detail

/// P_u v, with jets, at every node: the tangent part of v.
inline VectorGridField tangent_projection(const SphereMap& u, const VectorGridField& v) {
    detail::require_same_grid(u, v);
    const int n = static_cast<int>(u.field.comps.size());
    VectorGridField w = v;
    for (std::size_t k = 0; k < u.nodes(); ++k) {
        Jet s;
        for (int c = 0; c < n; ++c) s = jet::sum(s, jet::product(u.field.comps[c].jets[k], v.comps[c].jets[k]));
        for (int c = 0; c < n; ++c)
            w.comps[c].jets[k] = jet::sum(v.comps[c].jets[k], jet::scaled(jet::product(u.field.comps[c].jets[k], s), -1.0));
    }
    return w;
}

/// max |<u, w>| over the nodes.
inline double normal_defect(const SphereMap& u, const VectorGridField& w) {
    double m = 0;
    for (std::size_t k = 0; k < u.nodes(); ++k) {
        double s = 0;
        for (std::size_t c = 0; c < w.comps.size(); ++c) s += u.field.comps[c].jets[k].u * w.comps[c].jets[k].u;
        m = std::max(m, std::abs(s));
    }
    return m;
}

/// Integrand of Q_u(w) at node k, assembled from the closed forms
///   A_u(X,Y) = -<X,Y>u,  (d_i A)(X,Y) = -<X,Y> d_i u,  (Delta A)(X,Y) = -<X,Y> Delta u,
///   d_i P = -(d_i u u^T + u d_i u^T),  Delta P = -(Delta u u^T + 2 sum_i d_i u d_i u^T + u Delta u^T).
/// `last_sign` multiplies the term <<Delta P, Delta u>, A_u(w,w)>: -1 gives the
/// second derivative of the energy, +1 the sign as usually printed.
inline double second_variation_density(const SphereMap& u, const VectorGridField& w, std::size_t k,
                                       double last_sign = -1.0) {
    using detail::dot;
    using detail::Vec;
    const int n = static_cast<int>(u.field.comps.size());
    const int d = u.grid().d;
    Vec U{}, L{}, W{}, LW{};
    std::array<Vec, 4> DU{}, DW{};
    for (int c = 0; c < n; ++c) {
        const Jet& a = u.field.comps[c].jets[k];
        const Jet& b = w.comps[c].jets[k];
        U[c] = a.u;
        L[c] = a.laplacian();
        W[c] = b.u;
        LW[c] = b.laplacian();
        for (int i = 0; i < d; ++i) {
            DU[i][c] = a.g[i];
            DW[i][c] = b.g[i];
        }
    }
    auto A = [&](const Vec& X, const Vec& Y) {
        Vec r{};
        const double s = dot(X, Y, n);
        for (int c = 0; c < n; ++c) r[c] = -s * U[c];
        return r;
    };
    auto dA = [&](int i, const Vec& X, const Vec& Y) {
        Vec r{};
        const double s = dot(X, Y, n);
        for (int c = 0; c < n; ++c) r[c] = -s * DU[i][c];
        return r;
    };
    auto lapA = [&](const Vec& X, const Vec& Y) {
        Vec r{};
        const double s = dot(X, Y, n);
        for (int c = 0; c < n; ++c) r[c] = -s * L[c];
        return r;
    };
    auto dP_apply = [&](int i, const Vec& X) {
        Vec r{};
        const double a = dot(U, X, n), b = dot(DU[i], X, n);
        for (int c = 0; c < n; ++c) r[c] = -(DU[i][c] * a + U[c] * b);
        return r;
    };
    auto lapP_apply = [&](const Vec& X) {
        Vec r{};
        const double a = dot(U, X, n), b = dot(L, X, n);
        for (int c = 0; c < n; ++c) r[c] = -(L[c] * a + U[c] * b);
        for (int i = 0; i < d; ++i) {
            const double e = dot(DU[i], X, n);
            for (int c = 0; c < n; ++c) r[c] -= 2 * DU[i][c] * e;
        }
        return r;
    };

    Vec Agu{}, inner = lapA(W, W);
    for (int i = 0; i < d; ++i) {
        const Vec a = A(DU[i], DU[i]), b = dA(i, DW[i], W), c2 = A(DW[i], DW[i]);
        for (int c = 0; c < n; ++c) {
            Agu[c] += a[c];
            inner[c] += 2 * b[c] + 2 * c2[c];
        }
    }
    const Vec awl = A(W, LW);
    for (int c = 0; c < n; ++c) inner[c] += 2 * awl[c];

    double t2 = 0;
    for (int i = 0; i < d; ++i) {
        const Vec p = dP_apply(i, L), a = dA(i, W, W), b = A(DW[i], W);
        Vec s{};
        for (int c = 0; c < n; ++c) s[c] = a[c] + 2 * b[c];
        t2 += dot(p, s, n);
    }
    return dot(LW, LW, n) + dot(Agu, inner, n) - 2 * t2 + last_sign * dot(lapP_apply(L), A(W, W), n);
}

namespace detail {

inline double integrate_density(const SphereMap& u, const VectorGridField& w, double last_sign, double tangent_tol) {
    require_same_grid(u, w);
    if (normal_defect(u, w) > tangent_tol) throw precondition_error("second_variation: w is not tangent to u");
    const GridField& g = u.grid();
    double s = 0;
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t q = 0; q < g.nq(); ++q)
            s += g.weight(i, q) * second_variation_density(u, w, i * g.nq() + q, last_sign);
    return s;
}

}  // namespace detail

/// Q_u(w) for tangent w compactly supported in the grid's shell.
inline double second_variation(const SphereMap& u, const VectorGridField& w, double tangent_tol = 1e-10) {
    return detail::integrate_density(u, w, -1.0, tangent_tol);
}

/// Same assembly with + in front of <<Delta P, Delta u>, A_u(w,w)>.
inline double second_variation_printed(const SphereMap& u, const VectorGridField& w, double tangent_tol = 1e-10) {
    return detail::integrate_density(u, w, 1.0, tangent_tol);
}

/// Q_u(w) before integrating by parts: int |Delta w|^2 + <Delta u, Delta(A_u(w,w))>.
inline double second_variation_direct(const SphereMap& u, const VectorGridField& w) {
    detail::require_same_grid(u, w);
    const GridField& g = u.grid();
    const std::size_t n = u.field.comps.size();
    double s = 0;
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t q = 0; q < g.nq(); ++q) {
            const std::size_t k = i * g.nq() + q;
            Jet w2;
            for (std::size_t c = 0; c < n; ++c) w2 = jet::sum(w2, jet::product(w.comps[c].jets[k], w.comps[c].jets[k]));
            double v = 0;
            for (std::size_t c = 0; c < n; ++c) {
                const double lw = w.comps[c].jets[k].laplacian();
                const Jet a = jet::scaled(jet::product(w2, u.field.comps[c].jets[k]), -1.0);
                v += lw * lw + u.field.comps[c].jets[k].laplacian() * a.laplacian();
            }
            s += g.weight(i, q) * v;
        }
    return s;
}

/// E(Pi(u + t w)) = 1/2 int |Delta Pi(u + t w)|^2 with Pi(y) = y/|y|.
inline double projected_energy(const SphereMap& u, const VectorGridField& w, double t) {
    detail::require_same_grid(u, w);
    const GridField& g = u.grid();
    const std::size_t n = u.field.comps.size();
    std::vector<Jet> Y(n);
    double s = 0;
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t q = 0; q < g.nq(); ++q) {
            const std::size_t k = i * g.nq() + q;
            Jet S;
            for (std::size_t c = 0; c < n; ++c) {
                Y[c] = jet::sum(u.field.comps[c].jets[k], jet::scaled(w.comps[c].jets[k], t));
                S = jet::sum(S, jet::product(Y[c], Y[c]));
            }
            const double r = std::sqrt(S.u);
            const Jet F = jet::compose(S, 1 / r, -0.5 / (r * S.u), 0.75 / (r * S.u * S.u));
            double v = 0;
            for (std::size_t c = 0; c < n; ++c) {
                const double l = jet::product(Y[c], F).laplacian();
                v += l * l;
            }
            s += g.weight(i, q) * v;
        }
    return 0.5 * s;
}

struct VariationFD {
    double first = 0, second = 0;
};

/// Central differences of t -> E(Pi(u + t w)) at steps h and h/2, Richardson-extrapolated.
inline VariationFD variation_fd(const SphereMap& u, const VectorGridField& w, double h = 1e-2) {
    const double e0 = projected_energy(u, w, 0);
    auto pair = [&](double s) {
        const double ep = projected_energy(u, w, s), em = projected_energy(u, w, -s);
        return std::array<double, 2>{(ep - em) / (2 * s), (ep - 2 * e0 + em) / (s * s)};
    };
    const auto a = pair(h), b = pair(h / 2);
    return {(4 * b[0] - a[0]) / 3, (4 * b[1] - a[1]) / 3};
}

inline double bilaplace_energy(const VectorGridField& w) {
    double s = 0;
    for (const auto& c : w.comps)
        s += c.integrate([](const Jet& J, double, const auto&) { return J.laplacian() * J.laplacian(); });
    return s;
}

/// bump(r) * (a + B x + quadratic), one polynomial per component; the bump
/// ((r - lo)(hi - r))^4 vanishes to fourth order at both ends of the grid.
inline VectorGridField random_bump_field(Rng& g, const GridField& like, int components) {
    const double lo = like.lo, hi = like.hi, sc = std::pow(2.0 / (hi - lo), 8);
    VectorGridField v;
    for (int c = 0; c < components; ++c) {
        std::array<double, 4> b{};
        std::array<std::array<double, 4>, 4> M{};
        const double a0 = g.normal();
        for (int i = 0; i < 4; ++i) {
            b[i] = g.normal() / hi;
            for (int j = 0; j <= i; ++j) M[i][j] = M[j][i] = 0.5 * g.normal() / (hi * hi);
        }
        const FieldSource src = from_function(4, [=](const double* x) {
            double r2 = 0;
            for (int i = 0; i < 4; ++i) r2 += x[i] * x[i];
            const double r = std::sqrt(r2);
            const double p = (r - lo) * (hi - r), p1 = hi + lo - 2 * r;
            const double f = sc * std::pow(p, 4), f1 = sc * 4 * std::pow(p, 3) * p1,
                         f2 = sc * (12 * p * p * p1 * p1 - 8 * std::pow(p, 3));
            Jet P;
            P.u = a0;
            for (int i = 0; i < 4; ++i) {
                double Mx = 0;
                for (int j = 0; j < 4; ++j) Mx += M[i][j] * x[j];
                P.u += b[i] * x[i] + x[i] * Mx;
                P.g[i] = b[i] + 2 * Mx;
                for (int j = 0; j < 4; ++j) P.H[i][j] = 2 * M[i][j];
            }
            return jet::product(jet::radial(4, x, f, f1, f2), P);
        });
        v.comps.push_back(sample(src, lo, hi, GridSpec{static_cast<int>(like.nr()), like.level}));
    }
    return v;
}

/// Random tangent test field P_u(v) with v from random_bump_field.
inline VectorGridField random_tangent_field(Rng& g, const SphereMap& u) {
    return tangent_projection(u, random_bump_field(g, u.grid(), static_cast<int>(u.field.comps.size())));
}

/// Pieces of the lower bound
///   Q >= (1-eps) int|Delta w|^2 - C int(|grad u|^2+|Delta u|)|grad w|^2 - C int|Delta u|^2 w^2 - (C/eps) int|grad u|^4 w^2.
struct D2Terms {
    double q = 0, bilaplace = 0, gradient = 0, zeroth = 0, quartic = 0;
};

inline D2Terms d2_terms(const SphereMap& u, const VectorGridField& w) {
    D2Terms t;
    t.q = second_variation(u, w);
    const GridField& g = u.grid();
    const std::size_t n = u.field.comps.size();
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t q = 0; q < g.nq(); ++q) {
            const std::size_t k = i * g.nq() + q;
            double gu = 0, lu = 0, gw = 0, ww = 0, lw = 0;
            for (std::size_t c = 0; c < n; ++c) {
                const Jet& a = u.field.comps[c].jets[k];
                const Jet& b = w.comps[c].jets[k];
                gu += jet::grad_sq(a);
                lu += a.laplacian() * a.laplacian();
                gw += jet::grad_sq(b);
                ww += b.u * b.u;
                lw += b.laplacian() * b.laplacian();
            }
            const double wt = g.weight(i, q);
            t.bilaplace += wt * lw;
            t.gradient += wt * (gu + std::sqrt(lu)) * gw;
            t.zeroth += wt * lu * ww;
            t.quartic += wt * gu * gu * ww;
        }
    return t;
}

/// Smallest C making the bound hold for t; 0 if it holds with C = 0.
inline double d2_required_constant(const D2Terms& t, double eps) {
    const double need = (1 - eps) * t.bilaplace - t.q;
    const double per = t.gradient + t.zeroth + t.quartic / eps;
    if (need <= 0) return 0.0;
    return per > 0 ? need / per : INFINITY;
}

inline double fit_d2_constant(const std::vector<D2Terms>& ensemble, double eps) {
    double c = 0;
    for (const auto& t : ensemble) c = std::max(c, d2_required_constant(t, eps));
    return c;
}

inline LemmaCheck verify_d2_lower_bound(const D2Terms& t, double eps, double C) {
    if (!(eps > 0 && eps < 1)) throw precondition_error("verify_d2_lower_bound: eps in (0,1)");
    const double rhs = (1 - eps) * t.bilaplace - C * (t.gradient + t.zeroth + t.quartic / eps);
    const double scale = std::max(t.bilaplace, 1e-300);
    return make_check("second_variation_lower_bound", rhs / scale, t.q / scale, 1e-10,
                      {{"eps", eps}, {"C_hat", C}, {"Q", t.q}});
}

inline LemmaCheck verify_d2_lower_bound(const SphereMap& u, const VectorGridField& w, double eps, double C) {
    return verify_d2_lower_bound(d2_terms(u, w), eps, C);
}

/// Q_u(w) against the Richardson-extrapolated second difference of E(Pi(u + t w)).
inline LemmaCheck verify_second_variation(const SphereMap& u, const VectorGridField& w, double tol = 1e-4) {
    const double q = second_variation(u, w);
    const VariationFD fd = variation_fd(u, w);
    return make_rel_equality("second_variation_fd", q, fd.second, tol, 1e-300, {{"first_variation", fd.first}});
}

// ---------------------------------------------------------------------------
// Pohozaev flux

/// A map R^4 -> R^n known through component jets at arbitrary points.
struct VectorSource {
    std::vector<FieldSource> comps;
    bool ball_regular = false;
};

inline VectorSource identity_map_source() {
    VectorSource s;
    for (int c = 0; c < 4; ++c)
        s.comps.push_back(from_function(4, [c](const double* x) {
            double r2 = 0;
            for (int i = 0; i < 4; ++i) r2 += x[i] * x[i];
            const double r = std::sqrt(r2);
            Jet J;
            J.u = x[c] / r;
            for (int i = 0; i < 4; ++i) {
                J.g[i] = ((i == c) - x[i] * x[c] / r2) / r;
                for (int j = 0; j < 4; ++j)
                    J.H[i][j] = (-(i == c) * x[j] - (j == c) * x[i] - (i == j) * x[c] + 3 * x[i] * x[j] * x[c] / r2) /
                                (r * r2);
            }
            return J;
        }));
    return s;
}

inline VectorSource constant_map_source(int components = 4) {
    VectorSource s;
    s.ball_regular = true;
    for (int c = 0; c < components; ++c) s.comps.push_back(constant_source(4, c == 0 ? 1.0 : 0.0));
    return s;
}

/// Components H + |x|^2 K with H, K random harmonic polynomials of degree <= N:
/// biharmonic and smooth across the origin.
inline VectorSource ball_biharmonic_source(Rng& g, int components = 4, int N = 3) {
    VectorSource s;
    s.ball_regular = true;
    FieldOptions opt;
    opt.ball = true;
    for (int c = 0; c < components; ++c) {
        const SpectralField H = random_field(g, 4, 0.0, 1.0, N, opt), K = random_field(g, 4, 0.0, 1.0, N, opt);
        s.comps.push_back(from_function(4, [H, K](const double* x) {
            double r2 = 0;
            for (int i = 0; i < 4; ++i) r2 += x[i] * x[i];
            const double r = std::sqrt(r2);
            return jet::sum(evaluate(H, x), jet::product(jet::radial(4, x, r2, 2 * r, 2), evaluate(K, x)));
        }));
    }
    return s;
}

/// Harmonic (hence biharmonic) components with singular parts: flux is
/// constant in R but need not vanish.
inline VectorSource annulus_biharmonic_source(Rng& g, int components = 4, int N = 3, double a = 0.5, double b = 2.0) {
    VectorSource s;
    for (int c = 0; c < components; ++c) {
        const SpectralField H = random_field(g, 4, a, b, N), K = random_field(g, 4, a, b, N);
        s.comps.push_back(from_function(4, [H, K](const double* x) {
            double r2 = 0;
            for (int i = 0; i < 4; ++i) r2 += x[i] * x[i];
            const double r = std::sqrt(r2);
            return jet::sum(evaluate(H, x), jet::product(jet::radial(4, x, r2, 2 * r, 2), evaluate(K, x)));
        }));
    }
    return s;
}

namespace detail {

/// Radial quantities of one component along the ray r omega.
struct RayData {
    double dr = 0, drr = 0, lap = 0, lap_sphere = 0;
};

inline RayData ray_data(const FieldSource& f, double r, const std::array<double, 4>& w) {
    double x[4];
    for (int i = 0; i < 4; ++i) x[i] = r * w[i];
    const Jet J = f.extra ? f.extra(x) : Jet{};
    RayData d;
    for (int i = 0; i < 4; ++i) {
        d.dr += J.g[i] * w[i];
        for (int j = 0; j < 4; ++j) d.drr += w[i] * J.H[i][j] * w[j];
    }
    d.lap = J.laplacian();
    d.lap_sphere = r * r * (d.lap - d.drr - 3 * d.dr / r);
    return d;
}

/// Ray data at r + k h, k = -4..4, for eighth-order central differences.
struct RayStencil {
    std::array<RayData, 9> v;
    double h = 0;

    RayStencil(const FieldSource& f, double r, const std::array<double, 4>& w, double step) : h(step) {
        for (int k = -4; k <= 4; ++k) v[k + 4] = ray_data(f, r + k * h, w);
    }
    const RayData& centre() const { return v[4]; }
    template <class F>
    double derivative(F&& field) const {
        static constexpr double c[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
        double s = 0;
        for (int k = 1; k <= 4; ++k) s += c[k - 1] * (field(v[4 + k]) - field(v[4 - k]));
        return s / h;
    }
};

inline const AngularQuadrature& sphere_rule(int level) { return AngularCache::get(4, 0, level).quad(); }

inline void require_function_source(const VectorSource& u) {
    for (const auto& c : u.comps)
        if (!c.extra || (c.spectral && !c.spectral->zero()))
            throw precondition_error("pohozaev: components must be closed-form sources");
}

}  // namespace detail

/// int_{dB_R} ( r/2 |Delta u|^2 + r d_r u . d_r Delta u - r d_r^2 u . Delta u - d_r u . Delta u ) dH^3.
inline double pohozaev_flux(const VectorSource& u, double R, int level = 8) {
    detail::require_function_source(u);
    const auto& Q = detail::sphere_rule(level);
    const double h = 1e-2 * R;
    double s = 0;
    for (std::size_t q = 0; q < Q.size(); ++q) {
        const auto& w = Q.node(q);
        double v = 0;
        for (const auto& c : u.comps) {
            const detail::RayStencil st(c, R, w, h);
            const auto& d = st.centre();
            const double dlap = st.derivative([](const detail::RayData& e) { return e.lap; });
            v += 0.5 * R * d.lap * d.lap + R * d.dr * dlap - R * d.drr * d.lap - d.dr * d.lap;
        }
        s += Q.weight(q) * v;
    }
    return s * R * R * R;
}

struct PohozaevSides {
    double lhs = 0, rhs = 0;
};

/// The two sphere integrals
///   int ( |d_r^2 u|^2 + 3/r^2 |d_r u|^2 - 2 d_r u . (d_r^3 u + 2/r d_r^2 u) )
///   int ( r^{-4} |Delta_{S^3} u|^2 + 2 r^{-2} d_r u . d_r Delta_{S^3} u )
/// on dB_R; lhs - rhs = -2 Q(R)/R.
inline PohozaevSides pohozaev_sides(const VectorSource& u, double R, int level = 8) {
    detail::require_function_source(u);
    const auto& Q = detail::sphere_rule(level);
    const double h = 1e-2 * R;
    PohozaevSides p;
    for (std::size_t q = 0; q < Q.size(); ++q) {
        const auto& w = Q.node(q);
        double l = 0, r = 0;
        for (const auto& c : u.comps) {
            const detail::RayStencil st(c, R, w, h);
            const auto& d = st.centre();
            const double d3 = st.derivative([](const detail::RayData& e) { return e.drr; });
            const double ds = st.derivative([](const detail::RayData& e) { return e.lap_sphere; });
            l += d.drr * d.drr + 3 / (R * R) * d.dr * d.dr - 2 * d.dr * (d3 + 2 / R * d.drr);
            r += d.lap_sphere * d.lap_sphere / std::pow(R, 4) + 2 / (R * R) * d.dr * ds;
        }
        p.lhs += Q.weight(q) * l;
        p.rhs += Q.weight(q) * r;
    }
    p.lhs *= R * R * R;
    p.rhs *= R * R * R;
    return p;
}

/// max_i |Q(R_i) - Q(R_0)| relative to max(1, |Q(R_0)|).
inline LemmaCheck verify_pohozaev_flux_constancy(const VectorSource& u, const std::vector<double>& radii,
                                                 double tol = 1e-7, int level = 8) {
    if (radii.empty()) throw precondition_error("pohozaev: no radii");
    const double q0 = pohozaev_flux(u, radii.front(), level);
    double dev = 0;
    for (double R : radii) dev = std::max(dev, std::abs(pohozaev_flux(u, R, level) - q0));
    const double scale = std::max(1.0, std::abs(q0));
    return make_check("pohozaev_flux_constancy", dev / scale, tol, 0.0, {{"flux", q0}});
}

/// For ball-regular maps both sides agree at every radius; singular maps are
/// routed to the flux-constancy check.
inline LemmaCheck verify_pohozaev_identity(const VectorSource& u, const std::vector<double>& radii, double tol = 1e-6,
                                           int level = 8) {
    if (!u.ball_regular) return verify_pohozaev_flux_constancy(u, radii, 1e-7, level);
    double dev = 0, scale = 0;
    for (double R : radii) {
        const auto p = pohozaev_sides(u, R, level);
        dev = std::max(dev, std::abs(p.lhs - p.rhs));
        scale = std::max(scale, std::abs(p.lhs) + std::abs(p.rhs));
    }
    return make_check("pohozaev_identity", dev / std::max(scale, 1.0), tol, 0.0, {{"scale", scale}});
}

// ---------------------------------------------------------------------------
// Hardy-Rellich inequalities on annuli of R^4

/// In t = log(r/a) in [0, L] and u = g(t) Y_n with int_{S^3} Y_n^2 = 1 the
/// forms are conformal:
///   int (Delta u)^2        = int (g'' + 2g' - lambda g)^2 dt
///   int u^2/|x|^4          = int g^2 dt
///   int |grad u|^2/|x|^2   = int (g'^2 + lambda g^2) dt
/// with lambda = n(n+2).  Trial basis s^2(1-s)^2 T_j(2s-1), s = t/L.
struct RellichForms {
    double L = 0;
    int n = 0, size = 0;
    double beta = 0;
    Eigen::MatrixXd bilaplace, hardy, gradient, weighted;
};

namespace detail {

struct BasisValues {
    Eigen::MatrixXd g, g1, g2;  // [node, j], derivatives in t
    std::vector<double> t, w;
};

/// Composite Gauss-Legendre in t on [0, L].
inline BasisValues rellich_basis(double L, int P, int panels = 24, int per = 48) {
    BasisValues B;
    for (int p = 0; p < panels; ++p) {
        const Rule1D r = gauss_legendre(per, L * p / panels, L * (p + 1) / panels);
        B.t.insert(B.t.end(), r.x.begin(), r.x.end());
        B.w.insert(B.w.end(), r.w.begin(), r.w.end());
    }
    const int m = static_cast<int>(B.t.size());
    B.g.resize(m, P);
    B.g1.resize(m, P);
    B.g2.resize(m, P);
    for (int k = 0; k < m; ++k) {
        const double s = B.t[k] / L, x = 2 * s - 1;
        const double p = s * s * (1 - s) * (1 - s), p1 = 2 * s * (1 - s) * (1 - 2 * s), p2 = 2 - 12 * s + 12 * s * s;
        double T0 = 1, T1 = x, D0 = 0, D1 = 1, E0 = 0, E1 = 0;
        for (int j = 0; j < P; ++j) {
            double T, D, E;
            if (j == 0) {
                T = T0, D = D0, E = E0;
            } else if (j == 1) {
                T = T1, D = D1, E = E1;
            } else {
                T = 2 * x * T1 - T0;
                D = 2 * T1 + 2 * x * D1 - D0;
                E = 4 * D1 + 2 * x * E1 - E0;
                T0 = T1, T1 = T, D0 = D1, D1 = D, E0 = E1, E1 = E;
            }
            // d/ds of T(2s-1) = 2 T'
            const double gs = p * T, gs1 = p1 * T + 2 * p * D, gs2 = p2 * T + 4 * p1 * D + 4 * p * E;
            B.g(k, j) = gs;
            B.g1(k, j) = gs1 / L;
            B.g2(k, j) = gs2 / (L * L);
        }
    }
    return B;
}

}  // namespace detail

inline RellichForms rellich_forms(double L, int n, int P = 40, double beta = 0) {
    if (!(L > 0) || n < 0 || P < 1) throw precondition_error("rellich_forms: need L > 0, n >= 0, P >= 1");
    const auto B = detail::rellich_basis(L, P);
    const double lam = n * (n + 2.0);
    const int m = static_cast<int>(B.t.size());
    Eigen::MatrixXd D = B.g2 + 2 * B.g1 - lam * B.g;
    Eigen::VectorXd w(m), ww(m);
    for (int k = 0; k < m; ++k) {
        w(k) = B.w[k];
        ww(k) = beta > 0 ? B.w[k] * (std::exp(beta * (B.t[k] - L)) + std::exp(-beta * B.t[k])) : 0.0;
    }
    RellichForms f;
    f.L = L;
    f.n = n;
    f.size = P;
    f.beta = beta;
    f.bilaplace = D.transpose() * w.asDiagonal() * D;
    f.hardy = B.g.transpose() * w.asDiagonal() * B.g;
    f.gradient = B.g1.transpose() * w.asDiagonal() * B.g1 + lam * f.hardy;
    if (beta > 0)
        f.weighted = B.g.transpose() * ww.asDiagonal() * B.g * (1 + lam) + B.g1.transpose() * ww.asDiagonal() * B.g1;
    return f;
}

/// Eigenvalues of K x = mu M x, ascending, computed as reciprocals of
/// M x = nu K x so that only K (positive definite) is factored.
inline std::vector<double> generalized_spectrum(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, K);
    if (es.info() != Eigen::Success) throw numeric_error("generalized_spectrum: eigensolver failed");
    std::vector<double> mu;
    for (int i = es.eigenvalues().size() - 1; i >= 0; --i) {
        const double nu = es.eigenvalues()(i);
        mu.push_back(nu > 0 ? 1 / nu : INFINITY);
    }
    return mu;
}

inline double rayleigh_min(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
    return generalized_spectrum(K, M).front();
}

inline double rellich_a_bound(double L) { return (4 + M_PI * M_PI / (L * L)) * M_PI * M_PI / (L * L); }

inline double rellich_a_threshold() { return 15 * std::sqrt(4 + 3 * M_PI * (M_PI + 1)) / 2; }

inline double rellich_b_bound(double L) {
    const double e = M_PI * M_PI / (L * L);
    return (9 + 10 * e + std::pow(M_PI, 4) / (L * L)) / (3 + e);
}

/// Same expression with pi^4/L^4 in place of pi^4/L^2.
inline double rellich_b_bound_quartic(double L) {
    const double e = M_PI * M_PI / (L * L);
    return (9 + 10 * e + e * e) / (3 + e);
}

/// Mode-n term of the supremum in the log(b/a) condition of the gradient inequality.
inline double rellich_b_threshold_term(int n) {
    const double l = n * (n + 2.0), c = 8 + 204 * l;
    return M_PI * std::sqrt(c + std::sqrt(c * c + 4 * l + 16 * l * l)) / std::sqrt(32 * l + 16 * l * l);
}

inline double rellich_b_threshold(int nmax = 50) {
    double s = 0;
    for (int n = 1; n <= nmax; ++n) s = std::max(s, rellich_b_threshold_term(n));
    return s;
}

struct ModeMinimum {
    int n = 0;
    double value = 0;
};

inline std::vector<ModeMinimum> rellich_a_minima(double L, int nmax = 10, int P = 40) {
    std::vector<ModeMinimum> out;
    for (int n = 0; n <= nmax; ++n) {
        const auto f = rellich_forms(L, n, P);
        out.push_back({n, rayleigh_min(f.bilaplace, f.hardy)});
    }
    return out;
}

inline std::vector<ModeMinimum> rellich_b_minima(double L, int nmax = 10, int P = 40) {
    std::vector<ModeMinimum> out;
    for (int n = 0; n <= nmax; ++n) {
        const auto f = rellich_forms(L, n, P);
        out.push_back({n, rayleigh_min(f.bilaplace, f.gradient)});
    }
    return out;
}

namespace detail {

inline double min_over(const std::vector<ModeMinimum>& v, int* arg = nullptr) {
    double m = INFINITY;
    for (const auto& e : v)
        if (e.value < m) {
            m = e.value;
            if (arg) *arg = e.n;
        }
    return m;
}

inline double log_length(double a, double b) {
    if (!(a > 0 && b > a)) throw precondition_error("rellich: need 0 < a < b");
    return std::log(b / a);
}

}  // namespace detail

inline LemmaCheck verify_rellich_A(int d, double a, double b, int nmax = 10, int P = 40) {
    if (d != 4) throw unsupported_dimension("verify_rellich_A: d = 4 only");
    const double L = detail::log_length(a, b);
    if (L < rellich_a_threshold()) throw precondition_error("verify_rellich_A: log(b/a) below the conformal-class threshold");
    int arg = 0;
    const double m = detail::min_over(rellich_a_minima(L, nmax, P), &arg);
    return make_check("rellich_hardy", rellich_a_bound(L), m, 0.0,
                      {{"L", L}, {"basis", static_cast<long long>(P)}, {"minimising_mode", static_cast<long long>(arg)}});
}

inline LemmaCheck verify_rellich_B(int d, double a, double b, int nmax = 10, int P = 40) {
    if (d != 4) throw unsupported_dimension("verify_rellich_B: d = 4 only");
    const double L = detail::log_length(a, b);
    if (L < rellich_b_threshold()) throw precondition_error("verify_rellich_B: log(b/a) below the threshold");
    int arg = 0;
    const double m = detail::min_over(rellich_b_minima(L, nmax, P), &arg);
    return make_check("rellich_gradient", rellich_b_bound(L), m, 0.0,
                      {{"L", L},
                       {"basis", static_cast<long long>(P)},
                       {"minimising_mode", static_cast<long long>(arg)},
                       {"quartic_variant_bound", rellich_b_bound_quartic(L)}});
}

/// Best weighted constant over modes n <= nmax.
inline double rellich_c_constant(double L, double beta, int nmax = 10, int P = 40) {
    if (!(beta > 0)) throw precondition_error("rellich_c: beta > 0");
    double m = INFINITY;
    for (int n = 0; n <= nmax; ++n) {
        const auto f = rellich_forms(L, n, P, beta);
        m = std::min(m, rayleigh_min(f.bilaplace, f.weighted));
    }
    return m;
}

/// C_beta > 0 and stable within `rel` between basis sizes P and P + 8.
inline LemmaCheck verify_rellich_C(int d, double a, double b, double beta, int nmax = 10, int P = 40, double rel = 0.01) {
    if (d != 4) throw unsupported_dimension("verify_rellich_C: d = 4 only");
    const double L = detail::log_length(a, b);
    const double c1 = rellich_c_constant(L, beta, nmax, P), c2 = rellich_c_constant(L, beta, nmax, P + 8);
    LemmaCheck c = make_check("rellich_weighted", std::abs(c1 - c2) / c2, rel, 0.0,
                              {{"L", L}, {"beta", beta}, {"C_beta", c2}, {"C_beta_coarse", c1}});
    c.pass = c.pass && c2 > 0 && std::isfinite(c2);
    return c;
}

struct ModeSpectrum {
    int n = 0;
    std::vector<double> values;
};

/// Spectra of int (Delta u)^2 against int u^2/|x|^4, modes 0..nmax.
inline std::vector<ModeSpectrum> rellich_spectra(double L, int nmax = 10, int P = 40) {
    std::vector<ModeSpectrum> out;
    for (int n = 0; n <= nmax; ++n) {
        const auto f = rellich_forms(L, n, P);
        out.push_back({n, generalized_spectrum(f.bilaplace, f.hardy)});
    }
    return out;
}

inline void write_spectra_csv(const std::vector<ModeSpectrum>& s, std::ostream& os) {
    os << "mode,index,value\n";
    os.precision(17);
    for (const auto& m : s)
        for (std::size_t i = 0; i < m.values.size(); ++i) os << m.n << ',' << i << ',' << m.values[i] << '\n';
}

/// First Dirichlet eigenvalue of the Laplacian on B^4 from the radial Rayleigh
/// problem with trial functions (1 - r^2) P_j(2r^2 - 1).
inline double ball_dirichlet_eigenvalue(int P = 14) {
    const Rule1D R = gauss_legendre(64, 0.0, 1.0);
    const int m = static_cast<int>(R.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(P, P), M = Eigen::MatrixXd::Zero(P, P);
    std::vector<double> f(P), f1(P);
    for (int k = 0; k < m; ++k) {
        const double r = R.x[k], w = R.w[k] * r * r * r, x = 2 * r * r - 1;
        double L0 = 1, L1 = x, D0 = 0, D1 = 1;
        for (int j = 0; j < P; ++j) {
            double Lj, Dj;
            if (j == 0) {
                Lj = L0, Dj = D0;
            } else if (j == 1) {
                Lj = L1, Dj = D1;
            } else {
                Lj = ((2 * j - 1) * x * L1 - (j - 1) * L0) / j;
                Dj = D0 + (2 * j - 1) * L1;
                L0 = L1, L1 = Lj, D0 = D1, D1 = Dj;
            }
            f[j] = (1 - r * r) * Lj;
            f1[j] = -2 * r * Lj + (1 - r * r) * Dj * 4 * r;
        }
        for (int i = 0; i < P; ++i)
            for (int j = 0; j < P; ++j) {
                K(i, j) += w * f1[i] * f1[j];
                M(i, j) += w * f[i] * f[j];
            }
    }
    return rayleigh_min(K, M);
}

/// Largest normalised cross-mode entry of the four Rellich forms, assembled by
/// tensor quadrature on the annulus (1, e^L) from u_i = g(t) Y_{n_i,k_i}.
/// Also returns the largest relative deviation of the diagonal entries from
/// the per-mode one-dimensional forms.
struct CouplingReport {
    double cross = 0, diagonal = 0;
};

inline CouplingReport rellich_cross_mode_coupling(double L = 3.0, int N = 3, double beta = 1.0, int level = 8) {
    // g(t) = s^2 (1-s)^2 (1 + s/2), s = t/L
    auto prof = [L](double t, double& g, double& g1, double& g2) {
        const double s = t / L, p = s * s * (1 - s) * (1 - s), p1 = 2 * s * (1 - s) * (1 - 2 * s),
                     p2 = 2 - 12 * s + 12 * s * s, q = 1 + s / 2;
        g = p * q;
        g1 = (p1 * q + p / 2) / L;
        g2 = (p2 * q + p1) / (L * L);
    };
    struct Mode {
        int n, k;
    };
    std::vector<Mode> modes;
    for (int n = 0; n <= N; ++n)
        for (int k = 1; k <= std::min(2, static_cast<int>(dim_harmonics(4, n))); ++k) modes.push_back({n, k});
    const int M = static_cast<int>(modes.size());
    const Rule1D R = radial_rule(64, 1.0, std::exp(L));
    const auto& Q = detail::sphere_rule(level);
    const double Y2 = 2 * M_PI * M_PI;  // int_{S^3} Y^2 with mean-one normalisation
    std::vector<SpectralField> hs;
    for (const auto& md : modes) {
        hs.emplace_back(4, 0.0, 1.0, md.n);
        hs.back().ca(md.n, md.k) = 1.0;
    }
    std::array<Eigen::MatrixXd, 4> F;
    for (auto& m : F) m = Eigen::MatrixXd::Zero(M, M);
    std::vector<Jet> J(M);
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double r = R.x[i], t = std::log(r), wr = R.w[i] * r * r * r;
        double g, g1, g2;
        prof(t, g, g1, g2);
        // f(r) = g(log r) r^{-n}: harmonic polynomial r^n Y times f
        for (std::size_t q = 0; q < Q.size(); ++q) {
            double x[4];
            for (int c = 0; c < 4; ++c) x[c] = r * Q.node(q)[c];
            for (int a = 0; a < M; ++a) {
                const int n = modes[a].n;
                const double f = g * std::pow(r, -n), f1 = (g1 - n * g) * std::pow(r, -n - 1),
                             f2 = (g2 - (2 * n + 1) * g1 + n * (n + 1) * g) * std::pow(r, -n - 2);
                J[a] = jet::product(jet::radial(4, x, f, f1, f2), evaluate(hs[a], x));
            }
            const double wt = wr * Q.weight(q);
            const double wb = std::pow(r / std::exp(L), beta) + std::pow(1 / r, beta);
            for (int a = 0; a < M; ++a)
                for (int b = 0; b < M; ++b) {
                    double gg = 0;
                    for (int c = 0; c < 4; ++c) gg += J[a].g[c] * J[b].g[c];
                    F[0](a, b) += wt * J[a].laplacian() * J[b].laplacian();
                    F[1](a, b) += wt * J[a].u * J[b].u / std::pow(r, 4);
                    F[2](a, b) += wt * gg / (r * r);
                    F[3](a, b) += wt * wb * (J[a].u * J[b].u / std::pow(r, 4) + gg / (r * r));
                }
        }
    }
    CouplingReport rep;
    for (int a = 0; a < M; ++a) {
        const int n = modes[a].n;
        // one-dimensional forms for the same profile
        double e[4] = {0, 0, 0, 0};
        const double lam = n * (n + 2.0);
        const Rule1D T = gauss_legendre(200, 0.0, L);
        for (std::size_t k = 0; k < T.size(); ++k) {
            double g, g1, g2;
            prof(T.x[k], g, g1, g2);
            const double wb = std::exp(beta * (T.x[k] - L)) + std::exp(-beta * T.x[k]);
            e[0] += T.w[k] * std::pow(g2 + 2 * g1 - lam * g, 2);
            e[1] += T.w[k] * g * g;
            e[2] += T.w[k] * (g1 * g1 + lam * g * g);
            e[3] += T.w[k] * wb * (g * g + g1 * g1 + lam * g * g);
        }
        for (int f = 0; f < 4; ++f) rep.diagonal = std::max(rep.diagonal, std::abs(F[f](a, a) / Y2 - e[f]) / e[f]);
        for (int b = 0; b < M; ++b)
            if (a != b)
                for (int f = 0; f < 4; ++f)
                    rep.cross = std::max(rep.cross, std::abs(F[f](a, b)) / std::sqrt(F[f](a, a) * F[f](b, b)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Neck weight and positivity

/// omega(x) = |x|^{-4} ((|x|/alpha)^{2 beta} + (rho/(alpha |x|))^{2 beta} + 1/log^2(alpha^2/rho))
/// on alpha^{-1} rho <= |x| <= alpha, constant inside and outside.
struct NeckWeight {
    double alpha = 0.5, rho = 1e-6, beta = 0.5;

    double inner() const { return rho / alpha; }
    double outer() const { return alpha; }
    double operator()(double r) const {
        if (!(rho > 0 && alpha > 0 && inner() < outer() && beta > 0 && beta < 1))
            throw precondition_error("NeckWeight: need 0 < rho/alpha < alpha, 0 < beta < 1");
        const double t = std::clamp(r, inner(), outer());
        const double l = std::log(alpha * alpha / rho);
        return (std::pow(t / alpha, 2 * beta) + std::pow(inner() / t, 2 * beta) + 1 / (l * l)) / std::pow(t, 4);
    }
};

/// Radial test function v = g(t) Y_n on Omega_{1/2} = B_{b/2} \ B_{2a}, with
/// g = s^2 (1-s)^2, s the normalised log-radius of Omega_{1/2}.
struct NeckTerms {
    double bilaplace = 0, gradient = 0, hardy = 0, weighted = 0, omega = 0;
};

inline NeckTerms neck_terms(double a, double b, int n, double beta, double amplitude = 1.0,
                            const NeckWeight* w = nullptr) {
    const double t0 = std::log(2.0), t1 = std::log(b / a) - std::log(2.0);
    if (!(t1 > t0)) throw precondition_error("neck_terms: Omega_{1/2} is empty");
    const double L = std::log(b / a), ell = t1 - t0, lam = n * (n + 2.0);
    const Rule1D T = gauss_legendre(48, t0, t1);
    NeckTerms nt;
    for (std::size_t k = 0; k < T.size(); ++k) {
        const double t = T.x[k], s = (t - t0) / ell;
        const double g = amplitude * s * s * (1 - s) * (1 - s), g1 = amplitude * 2 * s * (1 - s) * (1 - 2 * s) / ell,
                     g2 = amplitude * (2 - 12 * s + 12 * s * s) / (ell * ell);
        const double wb = std::exp(beta * (t - L)) + std::exp(-beta * t);
        nt.bilaplace += T.w[k] * std::pow(g2 + 2 * g1 - lam * g, 2);
        nt.gradient += T.w[k] * (g1 * g1 + lam * g * g);
        nt.hardy += T.w[k] * g * g;
        nt.weighted += T.w[k] * wb * g * g;
        if (w) nt.omega += T.w[k] * g * g * std::pow(a * std::exp(t), 4) * (*w)(a * std::exp(t));
    }
    return nt;
}

/// (3/4) int|Delta v|^2 >= int|grad v|^2/|x|^2 + (2 pi^2/L^2) int v^2/|x|^4 + (C_{2 beta}/12) int v^2 w_{2 beta}/|x|^4
/// with C_{2 beta} computed on Omega, for the given test function; and whether
/// 3/4 suffices for every v, i.e. 1/C_B + (2 pi^2/L^2)/C_A + 1/12 <= 3/4 with
/// the computed Rayleigh minima.
inline std::vector<LemmaCheck> assemble_neck_positivity(double a, double b, int n, double beta, double amplitude = 1.0,
                                                        int P = 40) {
    const double L = detail::log_length(a, b);
    if (L < rellich_a_threshold() || L < rellich_b_threshold())
        throw precondition_error("assemble_neck_positivity: Rellich preconditions violated");
    const double C2b = rellich_c_constant(L, 2 * beta, 10, P);
    const NeckTerms t = neck_terms(a, b, n, 2 * beta, amplitude);
    const double lhs = 0.75 * t.bilaplace;
    const double rhs = t.gradient + 2 * M_PI * M_PI / (L * L) * t.hardy + C2b / 12 * t.weighted;
    std::vector<LemmaCheck> out;
    const double scale = std::max(lhs, 1e-300);
    out.push_back(make_check("neck_positivity_assembly", rhs / scale, lhs / scale, 1e-12,
                             {{"L", L}, {"beta", beta}, {"C_2beta", C2b}, {"mode", static_cast<long long>(n)}}));
    // smallest fractions of int|Delta v|^2 that the three inequalities need
    const double cA = detail::min_over(rellich_a_minima(L, 10, P)), cB = detail::min_over(rellich_b_minima(L, 10, P));
    const double need = 1 / cB + 2 * M_PI * M_PI / (L * L) / cA + 1.0 / 12;
    out.push_back(make_check("neck_positivity_split", need, 0.75, 0.0,
                             {{"C_A", cA}, {"C_B", cB}, {"gradient_share", 1 / cB}, {"printed_gradient_share", 1.0 / 6}}));
    return out;
}

/// Q(v) >= (1/4) int|grad v|^2/|x|^2 + lambda0 int v^2 omega at the constant
/// map, where Q(v) = int |Delta v|^2, on the neck B_alpha \ B_{rho/alpha}, with
/// lambda0 = min(pi^2, C_{2 beta}/12).
inline LemmaCheck verify_neck_stability_constant_map(const NeckWeight& w, int n, double amplitude = 1.0, int P = 40) {
    const double a = w.inner(), b = w.outer(), L = detail::log_length(a, b);
    const double C2b = rellich_c_constant(L, 2 * w.beta, 10, P);
    const double lambda0 = std::min(M_PI * M_PI, C2b / 12);
    const NeckTerms t = neck_terms(a, b, n, 2 * w.beta, amplitude, &w);
    const double rhs = 0.25 * t.gradient + lambda0 * t.omega;
    const double scale = std::max(t.bilaplace, 1e-300);
    return make_check("neck_stability", rhs / scale, t.bilaplace / scale, 1e-12,
                      {{"lambda0", lambda0}, {"C_2beta", C2b}, {"mode", static_cast<long long>(n)}});
}

}  // namespace bhv

#endif
