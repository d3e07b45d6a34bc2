#ifndef BHV_QUADRATURE_HPP
#define BHV_QUADRATURE_HPP

/// @file quadrature.hpp
/// Gauss rules on intervals and tensor-product rules on S^2 and S^3.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "specfun.hpp"

namespace bhv {

struct Rule1D {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre on [-1,1] via Golub-Welsch.
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        r.w[i] = 2.0 * v * v;
    }
    // symmetrise against eigen-solver round-off
    for (int i = 0; i < n / 2; ++i) {
        const double xm = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        const double wm = 0.5 * (r.w[i] + r.w[n - 1 - i]);
        r.x[i] = -xm;
        r.x[n - 1 - i] = xm;
        r.w[i] = r.w[n - 1 - i] = wm;
    }
    if (n % 2) r.x[n / 2] = 0.0;
    return r;
}

/// Gauss-Legendre mapped to [a,b].
inline Rule1D gauss_legendre(int n, double a, double b) {
    Rule1D r = gauss_legendre(n);
    const double h = 0.5 * (b - a), c = 0.5 * (b + a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.x[i] = c + h * r.x[i];
        r.w[i] *= h;
    }
    return r;
}

/// Gauss-Chebyshev of the second kind: weight sqrt(1-t^2) on [-1,1].
inline Rule1D gauss_chebyshev_u(int n) {
    Rule1D r;
    for (int i = 1; i <= n; ++i) {
        const double th = i * pi / (n + 1);
        r.x.push_back(std::cos(th));
        const double s = std::sin(th);
        r.w.push_back(pi / (n + 1) * s * s);
    }
    return r;
}

/// Radial rule for int_a^b g(r) dr using Gauss-Legendre in log r (a > 0),
/// or in r when a == 0.
inline Rule1D radial_rule(int n, double a, double b) {
    if (a == 0.0) return gauss_legendre(n, 0.0, b);
    Rule1D t = gauss_legendre(n, std::log(a), std::log(b));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.x[i] = std::exp(t.x[i]);
        t.w[i] *= t.x[i];
    }
    return t;
}

/// Composite radial rule with one Gauss block per piece of a partition.
inline Rule1D radial_rule_composite(int n_per, const std::vector<double>& breaks) {
    Rule1D r;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        Rule1D p = radial_rule(n_per, breaks[i], breaks[i + 1]);
        r.x.insert(r.x.end(), p.x.begin(), p.x.end());
        r.w.insert(r.w.end(), p.w.begin(), p.w.end());
    }
    return r;
}

/// Tensor-product rule on S^{d-1}, d in {3,4}.  Level L integrates every
/// polynomial of degree <= 2L+1 exactly; the weights sum to beta(d).
class AngularQuadrature {
public:
    AngularQuadrature(int d, int level) : d_(d), level_(level) {
        if (d != 3 && d != 4) throw std::invalid_argument("AngularQuadrature: unsupported dimension");
        if (level < 0) throw std::invalid_argument("AngularQuadrature: negative level");
        const int nphi = 2 * level + 2;
        const Rule1D t = gauss_legendre(level + 1);
        std::vector<std::array<double, 3>> s2;
        std::vector<double> w2;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double st = std::sqrt(std::max(0.0, 1.0 - t.x[i] * t.x[i]));
            for (int j = 0; j < nphi; ++j) {
                const double ph = 2.0 * pi * (j + 0.5) / nphi;
                s2.push_back({st * std::cos(ph), st * std::sin(ph), t.x[i]});
                w2.push_back(t.w[i] * 2.0 * pi / nphi);
            }
        }
        if (d == 3) {
            for (std::size_t i = 0; i < s2.size(); ++i) {
                nodes_.push_back({s2[i][0], s2[i][1], s2[i][2], 0.0});
                weights_.push_back(w2[i]);
            }
        } else {
            const Rule1D u = gauss_chebyshev_u(level + 1);
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double sp = std::sqrt(std::max(0.0, 1.0 - u.x[i] * u.x[i]));
                for (std::size_t j = 0; j < s2.size(); ++j) {
                    nodes_.push_back({sp * s2[j][0], sp * s2[j][1], sp * s2[j][2], u.x[i]});
                    weights_.push_back(u.w[i] * w2[j]);
                }
            }
        }
    }

    int dim() const { return d_; }
    int level() const { return level_; }
    std::size_t size() const { return weights_.size(); }
    const std::array<double, 4>& node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<std::array<double, 4>>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * f(nodes_[i]);
        return s;
    }

private:
    int d_, level_;
    std::vector<std::array<double, 4>> nodes_;
    std::vector<double> weights_;
};

}  // namespace bhv

#endif
