#ifndef BHV_POLYNOMIAL_HPP
#define BHV_POLYNOMIAL_HPP

/// @file polynomial.hpp
/// Sparse real polynomials in up to four variables, with exact sphere
/// moments and compiled evaluation of values, gradients and Hessians.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "specfun.hpp"

namespace bhv {

using Exponent = std::array<int, 4>;

class Poly {
public:
    Poly() = default;
    explicit Poly(double c) {
        if (c != 0.0) terms_[Exponent{0, 0, 0, 0}] = c;
    }
    static Poly monomial(const Exponent& e, double c = 1.0) {
        Poly p;
        if (c != 0.0) p.terms_[e] = c;
        return p;
    }
    static Poly variable(int i) {
        Exponent e{0, 0, 0, 0};
        e[i] = 1;
        return monomial(e);
    }

    const std::map<Exponent, double>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    Poly& operator+=(const Poly& o) {
        for (const auto& [e, c] : o.terms_) terms_[e] += c;
        prune();
        return *this;
    }
    Poly& operator*=(double s) {
        for (auto& t : terms_) t.second *= s;
        prune();
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) {
        for (const auto& [e, c] : b.terms_) a.terms_[e] -= c;
        a.prune();
        return a;
    }
    friend Poly operator*(Poly a, double s) { return a *= s; }
    friend Poly operator*(double s, Poly a) { return a *= s; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponent e;
                for (int i = 0; i < 4; ++i) e[i] = ea[i] + eb[i];
                r.terms_[e] += ca * cb;
            }
        r.prune();
        return r;
    }

    Poly derivative(int i) const {
        Poly r;
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponent f = e;
            f[i] -= 1;
            r.terms_[f] += c * e[i];
        }
        r.prune();
        return r;
    }

    int degree() const {
        int deg = 0;
        for (const auto& t : terms_) deg = std::max(deg, t.first[0] + t.first[1] + t.first[2] + t.first[3]);
        return deg;
    }

    double operator()(const double* x) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            double m = c;
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < e[i]; ++k) m *= x[i];
            s += m;
        }
        return s;
    }

private:
    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = (it->second == 0.0) ? terms_.erase(it) : std::next(it);
    }
    std::map<Exponent, double> terms_;
};

inline Poly pow(const Poly& p, int k) {
    Poly r(1.0);
    for (int i = 0; i < k; ++i) r = r * p;
    return r;
}

/// |x|^2 in d variables.
inline Poly radius_squared(int d) {
    Poly r;
    for (int i = 0; i < d; ++i) r += Poly::variable(i) * Poly::variable(i);
    return r;
}

/// Integral of x^alpha over S^{d-1}.
inline double sphere_monomial_integral(int d, const Exponent& a) {
    double lg = 0.0;
    int tot = 0;
    for (int i = 0; i < d; ++i) {
        if (a[i] % 2) return 0.0;
        lg += std::lgamma(0.5 * (a[i] + 1));
        tot += a[i];
    }
    for (int i = d; i < 4; ++i)
        if (a[i] != 0) return 0.0;
    return 2.0 * std::exp(lg - std::lgamma(0.5 * (tot + d)));
}

/// Exact integral of p over S^{d-1}.
inline double sphere_integral(int d, const Poly& p) {
    double s = 0.0;
    for (const auto& [e, c] : p.terms()) s += c * sphere_monomial_integral(d, e);
    return s;
}

/// Flat representation of a polynomial for repeated evaluation, with
/// precompiled first and second derivatives.
class CompiledPoly {
public:
    CompiledPoly() = default;
    CompiledPoly(const Poly& p, int d) : d_(d) {
        load(p, val_);
        for (int i = 0; i < d; ++i) {
            Poly di = p.derivative(i);
            load(di, grad_[i]);
            for (int j = i; j < d; ++j) load(di.derivative(j), hess_[i][j]);
        }
    }

    /// Evaluate with precomputed powers pw[i][k] = x_i^k.
    template <class Powers>
    double value(const Powers& pw) const {
        return eval(val_, pw);
    }
    template <class Powers>
    double grad(int i, const Powers& pw) const {
        return eval(grad_[i], pw);
    }
    template <class Powers>
    double hess(int i, int j, const Powers& pw) const {
        return i <= j ? eval(hess_[i][j], pw) : eval(hess_[j][i], pw);
    }

private:
    struct Term {
        std::array<unsigned char, 4> e;
        double c;
    };
    static void load(const Poly& p, std::vector<Term>& out) {
        out.clear();
        for (const auto& [e, c] : p.terms())
            out.push_back({{static_cast<unsigned char>(e[0]), static_cast<unsigned char>(e[1]),
                            static_cast<unsigned char>(e[2]), static_cast<unsigned char>(e[3])},
                           c});
    }
    template <class Powers>
    static double eval(const std::vector<Term>& ts, const Powers& pw) {
        double s = 0.0;
        for (const auto& t : ts) s += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]] * pw[3][t.e[3]];
        return s;
    }

    int d_ = 0;
    std::vector<Term> val_;
    std::array<std::vector<Term>, 4> grad_;
    std::array<std::array<std::vector<Term>, 4>, 4> hess_;
};

/// Power table x_i^k for k <= deg (deg <= 40).
struct Powers {
    static constexpr int max_degree = 40;
    std::array<std::array<double, max_degree + 1>, 4> p;
    Powers(const double* x, int deg) {
        for (int i = 0; i < 4; ++i) {
            p[i][0] = 1.0;
            for (int k = 1; k <= deg; ++k) p[i][k] = p[i][k - 1] * x[i];
        }
    }
    const std::array<double, max_degree + 1>& operator[](int i) const { return p[i]; }
};

}  // namespace bhv

#endif
