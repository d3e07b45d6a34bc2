#ifndef BHV_SPECFUN_HPP
#define BHV_SPECFUN_HPP

/// @file specfun.hpp
/// Gamma-based sphere areas, Gegenbauer polynomials, Bessel J with first
/// zeros, principal Lambert W, and the explicit constants built from them.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bhv {

inline constexpr double pi = std::numbers::pi;

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d) {
    if (d < 2) throw std::domain_error("sphere_area: d must be >= 2");
    return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^d.
inline double ball_volume(int d) { return sphere_area(d) / d; }

// ---------------------------------------------------------------------------
// Gegenbauer polynomials C^lambda_n

inline double gegenbauer(int n, double lambda, double x) {
    if (n < 0) throw std::domain_error("gegenbauer: negative degree");
    if (!(lambda > 0)) throw std::domain_error("gegenbauer: order must be positive");
    if (std::abs(x) > 1.0 + 1e-14) throw std::domain_error("gegenbauer: |x| > 1");
    if (n == 0) return 1.0;
    double c0 = 1.0, c1 = 2.0 * lambda * x;
    for (int m = 2; m <= n; ++m) {
        double c2 = (2.0 * x * (m + lambda - 1.0) * c1 - (m + 2.0 * lambda - 2.0) * c0) / m;
        c0 = c1;
        c1 = c2;
    }
    return c1;
}

/// d/dx C^lambda_n = 2 lambda C^{lambda+1}_{n-1}
inline double gegenbauer_prime(int n, double lambda, double x) {
    if (n == 0) return 0.0;
    return 2.0 * lambda * gegenbauer(n - 1, lambda + 1.0, x);
}

inline double gegenbauer_second(int n, double lambda, double x) {
    if (n < 2) return 0.0;
    return 4.0 * lambda * (lambda + 1.0) * gegenbauer(n - 2, lambda + 2.0, x);
}

// ---------------------------------------------------------------------------
// Bessel functions of the first kind

namespace detail {

inline double bessel_series(double nu, double x) {
    // sum_k (-1)^k (x/2)^{2k+nu} / (k! Gamma(k+nu+1))
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    // extended precision absorbs the cancellation near the switch point
    const long double h = 0.5L * x;
    long double term = std::exp(nu * std::log(h) - std::lgamma(static_cast<long double>(nu) + 1.0L));
    long double sum = term;
    const long double q = -h * h;
    for (int k = 1; k < 500; ++k) {
        term *= q / (k * (k + static_cast<long double>(nu)));
        sum += term;
        if (std::abs(term) < 1e-20L * std::abs(sum) && k > h) break;
    }
    return static_cast<double>(sum);
}

// Miller backward recurrence, normalised by
// (x/2)^mu = sum_k (mu+2k) Gamma(mu+k)/k! J_{mu+2k}(x),  0 <= mu < 1.
inline double bessel_miller(double nu, double x) {
    const double mu = nu - std::floor(nu);
    const int n = static_cast<int>(std::floor(nu));
    const int top = n + static_cast<int>(x) + 40 + static_cast<int>(2.0 * std::sqrt(x + 40.0 + n));
    double jp1 = 0.0, j = 1e-300, target = 0.0, norm = 0.0;
    // weight w_k for J_{mu+k}: k even -> (mu+k) Gamma(mu+k/2)/(k/2)!, with mu=0,k=0 -> 1
    auto weight = [mu](int k) -> double {
        if (k % 2) return 0.0;
        const int h = k / 2;
        if (mu == 0.0) return k == 0 ? 1.0 : 2.0;
        return (mu + k) * std::exp(std::lgamma(mu + h) - std::lgamma(h + 1.0));
    };
    for (int k = top; k >= 0; --k) {
        // j holds J_{mu+k}, jp1 holds J_{mu+k+1}
        if (k == n) target = j;
        norm += weight(k) * j;
        if (k == 0) break;
        const double jm1 = 2.0 * (mu + k) / x * j - jp1;
        jp1 = j;
        j = jm1;
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            target *= 1e-250;
            norm *= 1e-250;
        }
    }
    return target * std::pow(0.5 * x, mu) / norm;
}

}  // namespace detail

inline double bessel_j(double nu, double x) {
    if (nu < 0) throw std::domain_error("bessel_j: order must be >= 0");
    if (x < 0) throw std::domain_error("bessel_j: x must be >= 0");
    if (x < std::max(12.0, 2.0 * nu)) return detail::bessel_series(nu, x);
    return detail::bessel_miller(nu, x);
}

/// J'_nu(x) = (nu/x) J_nu - J_{nu+1}
inline double bessel_j_prime(double nu, double x) {
    if (x == 0.0) return nu == 1.0 ? 0.5 : 0.0;
    return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

inline double bessel_first_zero(double nu) {
    if (nu < 0) throw std::domain_error("bessel_first_zero: order must be >= 0");
    double lo = nu, flo = bessel_j(nu, std::max(lo, 1e-300));
    if (nu == 0.0) flo = 1.0;
    double hi = lo;
    bool found = false;
    while (hi <= nu + 20.0) {
        hi = lo + 0.25;
        const double fhi = bessel_j(nu, hi);
        if ((flo > 0) != (fhi > 0) || fhi == 0.0) {
            found = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if (!found) throw numeric_error("bessel_first_zero: no bracket in [nu, nu+20]");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double fx = bessel_j(nu, x);
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double fp = bessel_j_prime(nu, x);
        double xn = x - fx / fp;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15 * x) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Lambert W, principal branch

inline double lambert_w(double x) {
    constexpr double inv_e = 0.36787944117144233;
    if (x < -inv_e - 1e-15) throw std::domain_error("lambert_w: x < -1/e");
    if (x <= -inv_e) return -1.0;
    if (x == 0.0) return 0.0;
    double w;
    if (x < -0.32) {
        const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (x < 3.0) {
        const double l = std::log1p(x);
        w = l * (1.0 - std::log1p(l) / (2.0 + l));
    } else {
        const double l = std::log(x);
        w = l - std::log(l);
    }
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Explicit constants

namespace constants {

inline double j01() { return bessel_first_zero(0.0); }
inline double j11() { return bessel_first_zero(1.0); }

/// First Dirichlet eigenvalue of the unit ball in R^d: j_{(d-2)/2,1}^2.
inline double ball_lambda1(int d) {
    const double j = bessel_first_zero(0.5 * (d - 2));
    return j * j;
}

/// Weighted gradient constant Gamma_1.
inline double gamma1() {
    const double l2 = std::log(2.0);
    const double s = 72.0 + 16384.0 / (27.0 * 49.0) + 192.0 * (1.0 / l2 + 1.0 / (2.0 * l2 * l2));
    return std::sqrt(s) / j11();
}

/// 1 + 160 (sqrt[4](2 log 2) + 4 sqrt[4](30))
inline double whitney_l4_factor() {
    return 1.0 + 160.0 * (std::pow(2.0 * std::log(2.0), 0.25) + 4.0 * std::pow(30.0, 0.25));
}

/// Norm-equivalence constant Gamma_W.
inline double gamma_w() {
    return 28.0 * std::pow(2.0, 0.25) * std::sqrt(pi) * whitney_l4_factor();
}

inline double lambda4() { return 8.0 * std::sqrt(30.0) / pi; }
inline double lambda3() { return 2.0 * std::sqrt(38.0 / pi); }

/// Averaging-lemma constant 2^{d/4} sqrt(beta(d)).
inline double averaging_constant(int d) { return std::pow(2.0, 0.25 * d) * std::sqrt(sphere_area(d)); }

/// Improved Sobolev constant for d=4, p=2.
inline double improved_sobolev_c42() { return 8.0 * std::pow(2.0, 0.75); }

/// Conformal-class threshold log(b/a) >= (1/(2W(1))) log(4 W(1)(W(1)+2)/3).
inline double conformal_threshold_log() {
    const double w = lambert_w(1.0);
    return std::log(4.0 * w * (w + 2.0) / 3.0) / (2.0 * w);
}

}  // namespace constants

}  // namespace bhv

#endif
