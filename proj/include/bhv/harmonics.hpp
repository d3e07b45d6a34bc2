#ifndef BHV_HARMONICS_HPP
#define BHV_HARMONICS_HPP

/// @file harmonics.hpp
/// Spherical harmonics on S^{d-1}: dimension counts, eigenvalues, and explicit
/// real bases for d = 3, 4 built as solid harmonic polynomials.
///
/// Normalisation: the sphere average of (Y_n^k)^2 is 1, so the integral over
/// S^{d-1} is beta(d).

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "polynomial.hpp"
#include "specfun.hpp"

namespace bhv {

struct unsupported_dimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

using u128 = unsigned __int128;

inline u128 binomial_u128(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    u128 c = 1;
    for (int i = 0; i < k; ++i) {
        const u128 f = static_cast<u128>(n - i);
        const u128 lim = ~static_cast<u128>(0);
        if (c > lim / f) throw std::overflow_error("binomial exceeds 128-bit range");
        c = c * f / static_cast<u128>(i + 1);
    }
    return c;
}

}  // namespace detail

/// N_d(n) = C(n+d-1, d-1) - C(n+d-3, d-1).
inline std::uint64_t dim_harmonics(int d, int n) {
    if (d < 3 || n < 0) throw std::domain_error("dim_harmonics: need d >= 3, n >= 0");
    const detail::u128 v = detail::binomial_u128(n + d - 1, d - 1) - detail::binomial_u128(n + d - 3, d - 1);
    if (v > static_cast<detail::u128>(UINT64_MAX)) throw std::overflow_error("dim_harmonics exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

/// lambda_n = n(n+d-2), eigenvalue of -Laplace-Beltrami on S^{d-1}.
inline double laplace_eigenvalue(int d, int n) { return static_cast<double>(n) * (n + d - 2); }

/// Integral over S^{d-1} of |covariant Hessian of Y|^2 for a unit-average harmonic.
inline double bochner_hessian_integral(int d, int n) {
    const double l = laplace_eigenvalue(d, n);
    return sphere_area(d) * l * (static_cast<double>(n) * n + (d - 2.0) * (n - 1.0));
}

/// Coefficients g_j of C^lambda_m(t) = sum_j g_j t^{m-2j}.
inline std::vector<double> gegenbauer_coefficients(int m, double lambda) {
    // full coefficient arrays by the three-term recurrence
    std::vector<double> c0{1.0}, c1{0.0, 2.0 * lambda};
    if (m == 0) return {1.0};
    for (int k = 2; k <= m; ++k) {
        std::vector<double> c2(k + 1, 0.0);
        for (int i = 0; i < static_cast<int>(c1.size()); ++i) c2[i + 1] += 2.0 * (k + lambda - 1.0) * c1[i] / k;
        for (int i = 0; i < static_cast<int>(c0.size()); ++i) c2[i] -= (k + 2.0 * lambda - 2.0) * c0[i] / k;
        c0 = std::move(c1);
        c1 = std::move(c2);
    }
    std::vector<double> g;
    for (int j = 0; 2 * j <= m; ++j) g.push_back(c1[m - 2 * j]);
    return g;
}

/// Real orthogonal basis of degree-n solid harmonics in d in {3,4} variables.
class HarmonicBasis {
public:
    HarmonicBasis(int d, int nmax) : d_(d), nmax_(nmax) {
        if (d != 3 && d != 4) throw unsupported_dimension("HarmonicBasis: pointwise bases exist for d = 3, 4 only");
        polys_.resize(nmax + 1);
        compiled_.resize(nmax + 1);
        for (int n = 0; n <= nmax; ++n) {
            polys_[n] = build(d, n);
            for (auto& p : polys_[n]) {
                const double avg = square_integral(d, p) / sphere_area(d);
                p *= 1.0 / std::sqrt(avg);
                compiled_[n].emplace_back(p, d);
            }
        }
    }

    int dim() const { return d_; }
    int max_degree() const { return nmax_; }
    int count(int n) const { return static_cast<int>(polys_.at(n).size()); }

    /// Solid harmonic r^n Y_n^k(x/r) as a polynomial; k is 1-based.
    const Poly& poly(int n, int k) const { return polys_.at(n).at(k - 1); }
    const CompiledPoly& compiled(int n, int k) const { return compiled_.at(n).at(k - 1); }

    /// Y_n^k(omega) for |omega| = 1.
    double eval(int n, int k, const double* omega) const {
        Powers pw(omega, n);
        return compiled(n, k).value(pw);
    }

    /// Shared instance, built on first use.
    static const HarmonicBasis& get(int d, int nmax) {
        static std::mutex mu;
        static std::vector<std::unique_ptr<HarmonicBasis>> cache;
        std::lock_guard<std::mutex> lock(mu);
        for (const auto& b : cache)
            if (b->dim() == d && b->max_degree() >= nmax) return *b;
        cache.push_back(std::make_unique<HarmonicBasis>(d, std::max(nmax, 12)));
        return *cache.back();
    }

    /// Builds the unnormalised degree-n harmonics in the documented order.
    static std::vector<Poly> build(int d, int n) {
        std::vector<Poly> out;
        const Poly r2 = radius_squared(d);
        const Poly xd = Poly::variable(d - 1);
        for (int l = 0; l <= n; ++l) {
            // r^{n-l} C^{l+(d-2)/2}_{n-l}(x_d / r)
            const int m = n - l;
            const auto g = gegenbauer_coefficients(m, l + 0.5 * (d - 2));
            Poly radial;
            for (int j = 0; 2 * j <= m; ++j) radial += pow(xd, m - 2 * j) * pow(r2, j) * g[j];
            for (const Poly& h : lower(d, l)) out.push_back(radial * h);
        }
        return out;
    }

private:
    // integral of p^2 over S^{d-1} without expanding the square
    static double square_integral(int d, const Poly& p) {
        std::vector<std::pair<Exponent, double>> t(p.terms().begin(), p.terms().end());
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i; j < t.size(); ++j) {
                Exponent e;
                bool even = true;
                for (int q = 0; q < 4; ++q) {
                    e[q] = t[i].first[q] + t[j].first[q];
                    even = even && e[q] % 2 == 0;
                }
                if (!even) continue;
                s += (i == j ? 1.0 : 2.0) * t[i].second * t[j].second * sphere_monomial_integral(d, e);
            }
        return s;
    }

    // degree-l harmonics in the first d-1 variables
    static std::vector<Poly> lower(int d, int l) {
        if (d == 3) {
            if (l == 0) return {Poly(1.0)};
            // Re and Im of (x1 + i x2)^l
            Poly re(1.0), im;
            const Poly x = Poly::variable(0), y = Poly::variable(1);
            for (int i = 0; i < l; ++i) {
                Poly nre = re * x - im * y;
                Poly nim = re * y + im * x;
                re = std::move(nre);
                im = std::move(nim);
            }
            return {re, im};
        }
        return build(3, l);
    }

    int d_, nmax_;
    std::vector<std::vector<Poly>> polys_;
    std::vector<std::vector<CompiledPoly>> compiled_;
};

/// Y_n^k(omega) with k in 1..N_d(n).
inline double eval_basis(int d, int n, int k, const double* omega) {
    if (d != 3 && d != 4) throw unsupported_dimension("eval_basis: d must be 3 or 4");
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += omega[i] * omega[i];
    if (std::abs(r2 - 1.0) > 2e-12) throw std::domain_error("eval_basis: omega must lie on the unit sphere");
    const auto& B = HarmonicBasis::get(d, n);
    if (k < 1 || k > B.count(n)) throw std::out_of_range("eval_basis: k out of range");
    double w[4] = {0, 0, 0, 0};
    for (int i = 0; i < d; ++i) w[i] = omega[i];
    return B.eval(n, k, w);
}

}  // namespace bhv

#endif
