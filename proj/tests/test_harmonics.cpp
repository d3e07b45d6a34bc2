/// @file test_harmonics.cpp
/// Harmonic bases: counts, orthonormality, eigenfunction property, Bochner.

#include <gtest/gtest.h>

#include <array>

#include "bhv/check.hpp"
#include "bhv/harmonics.hpp"
#include "bhv/quadrature.hpp"

using namespace bhv;

namespace {

std::array<double, 4> random_unit(Rng& g, int d) {
    std::array<double, 4> w{0, 0, 0, 0};
    double s = 0;
    for (int i = 0; i < d; ++i) {
        w[i] = g.normal();
        s += w[i] * w[i];
    }
    for (int i = 0; i < d; ++i) w[i] /= std::sqrt(s);
    return w;
}

// Y(x/|x|) for a point off the sphere
double homog(int d, int n, int k, std::array<double, 4> x) {
    double r = 0;
    for (int i = 0; i < d; ++i) r += x[i] * x[i];
    r = std::sqrt(r);
    for (int i = 0; i < d; ++i) x[i] /= r;
    return HarmonicBasis::get(d, n).eval(n, k, x.data());
}

// Laplace-Beltrami of Y by fourth-order finite differences of the degree-0 extension
double laplace_beltrami_fd(int d, int n, int k, const std::array<double, 4>& w) {
    const double h = 2e-3;
    double lap = 0;
    for (int i = 0; i < d; ++i) {
        auto at = [&](double t) {
            auto x = w;
            x[i] += t;
            return homog(d, n, k, x);
        };
        lap += (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
    }
    return lap;
}

}  // namespace

TEST(DimHarmonics, Examples) {
    EXPECT_EQ(dim_harmonics(3, 5), 11u);
    EXPECT_EQ(dim_harmonics(4, 2), 9u);
    EXPECT_EQ(dim_harmonics(5, 1), 5u);
    for (int n = 0; n <= 50; ++n) {
        EXPECT_EQ(dim_harmonics(3, n), static_cast<std::uint64_t>(2 * n + 1));
        EXPECT_EQ(dim_harmonics(4, n), static_cast<std::uint64_t>((n + 1) * (n + 1)));
    }
    EXPECT_THROW(dim_harmonics(2, 1), std::domain_error);
}

TEST(DimHarmonics, FactoredForm) {
    // (n+d-3)! / ((d-2)! n!) (2n+d-2)
    for (int d = 3; d <= 20; ++d)
        for (int n = 0; n <= 30; ++n) {
            const double f = std::exp(std::lgamma(n + d - 2.0) - std::lgamma(d - 1.0) - std::lgamma(n + 1.0)) * (2 * n + d - 2);
            EXPECT_NEAR(static_cast<double>(dim_harmonics(d, n)), f, 1e-9 * f);
        }
}

TEST(DimHarmonics, OverflowGuard) {
    EXPECT_NO_THROW(dim_harmonics(30, 30));
    EXPECT_THROW(dim_harmonics(100, 100), std::overflow_error);
}

TEST(Eigenvalues, Examples) {
    EXPECT_EQ(laplace_eigenvalue(4, 0), 0.0);
    EXPECT_EQ(laplace_eigenvalue(4, 1), 3.0);
    EXPECT_EQ(laplace_eigenvalue(3, 2), 6.0);
}

TEST(Basis, CountsMatchDimension) {
    for (int d : {3, 4}) {
        const auto& B = HarmonicBasis::get(d, 8);
        for (int n = 0; n <= 8; ++n) EXPECT_EQ(static_cast<std::uint64_t>(B.count(n)), dim_harmonics(d, n));
    }
}

TEST(Basis, ConstantHarmonic) {
    const double w[4] = {0.5, 0.5, 0.5, 0.5};
    EXPECT_NEAR(eval_basis(4, 0, 1, w), 1.0, 1e-14);
    EXPECT_THROW(eval_basis(5, 0, 1, w), unsupported_dimension);
    const double off[4] = {1, 1, 0, 0};
    EXPECT_THROW(eval_basis(4, 0, 1, off), std::domain_error);
}

TEST(Basis, SolidHarmonicsAreHarmonic) {
    for (int d : {3, 4}) {
        const auto& B = HarmonicBasis::get(d, 10);
        for (int n = 0; n <= 10; ++n)
            for (int k = 1; k <= B.count(n); ++k) {
                Poly lap;
                for (int i = 0; i < d; ++i) lap += B.poly(n, k).derivative(i).derivative(i);
                double mx = 0;
                for (const auto& t : lap.terms()) mx = std::max(mx, std::abs(t.second));
                EXPECT_LT(mx, 1e-9) << d << " " << n << " " << k;
            }
    }
}

TEST(Basis, OrthonormalUnderQuadrature) {
    for (int d : {3, 4}) {
        const int N = 6;
        const auto& B = HarmonicBasis::get(d, N);
        AngularQuadrature Q(d, N + 1);
        const double beta = sphere_area(d);
        EXPECT_NEAR(Q.integrate([](const auto&) { return 1.0; }), beta, 1e-12);
        std::vector<std::pair<int, int>> idx;
        std::vector<std::vector<double>> val;
        for (int n = 0; n <= N; ++n)
            for (int k = 1; k <= B.count(n); ++k) {
                idx.push_back({n, k});
                std::vector<double> v;
                for (const auto& w : Q.nodes()) v.push_back(B.eval(n, k, w.data()));
                val.push_back(std::move(v));
            }
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) {
                double v = 0;
                for (std::size_t q = 0; q < Q.size(); ++q) v += Q.weight(q) * val[i][q] * val[j][q];
                EXPECT_NEAR(v, i == j ? beta : 0.0, 1e-10) << d << " " << idx[i].first << idx[i].second << " " << idx[j].first << idx[j].second;
            }
    }
}

TEST(Basis, AdditionTheorem) {
    Rng g(11);
    for (int d : {3, 4}) {
        const auto& B = HarmonicBasis::get(d, 8);
        for (int rep = 0; rep < 100; ++rep) {
            auto w = random_unit(g, d);
            for (int n = 0; n <= 8; ++n) {
                double s = 0;
                for (int k = 1; k <= B.count(n); ++k) s += std::pow(B.eval(n, k, w.data()), 2);
                EXPECT_NEAR(s, static_cast<double>(dim_harmonics(d, n)), 1e-9);
            }
        }
    }
    double w[4] = {0.1, -0.7, 0.1, 0.7};
    const double nrm = std::sqrt(0.01 + 0.49 + 0.01 + 0.49);
    for (double& x : w) x /= nrm;
    double s = 0;
    for (int k = 1; k <= 4; ++k) s += std::pow(eval_basis(4, 1, k, w), 2);
    EXPECT_NEAR(s, 4.0, 1e-10);
}

TEST(Basis, LaplaceBeltramiEigenfunction) {
    Rng g(5);
    for (int d : {3, 4})
        for (int n = 0; n <= 4; ++n)
            for (int k = 1; k <= static_cast<int>(dim_harmonics(d, n)); ++k) {
                auto w = random_unit(g, d);
                const double y = HarmonicBasis::get(d, n).eval(n, k, w.data());
                const double res = laplace_beltrami_fd(d, n, k, w) + laplace_eigenvalue(d, n) * y;
                EXPECT_LE(std::abs(res), 1e-6) << d << " " << n << " " << k;
            }
}

TEST(Basis, GradientScaling) {
    // sup |grad_omega Y| / (n sqrt(N)) stays bounded in n
    for (int d : {3, 4}) {
        const auto& B = HarmonicBasis::get(d, 8);
        AngularQuadrature Q(d, 12);
        std::vector<double> ratios;
        for (int n = 1; n <= 8; ++n) {
            double sup = 0;
            for (int k = 1; k <= B.count(n); ++k)
                for (const auto& w : Q.nodes()) {
                    Powers pw(w.data(), n);
                    // tangential gradient of the degree-n solid harmonic at |x| = 1
                    double g[4], rad = 0;
                    for (int i = 0; i < d; ++i) {
                        g[i] = B.compiled(n, k).grad(i, pw);
                        rad += g[i] * w[i];
                    }
                    double t = 0;
                    for (int i = 0; i < d; ++i) t += std::pow(g[i] - rad * w[i], 2);
                    sup = std::max(sup, std::sqrt(t));
                }
            ratios.push_back(sup / (n * std::sqrt(static_cast<double>(dim_harmonics(d, n)))));
        }
        const double gmax = *std::max_element(ratios.begin(), ratios.end());
        EXPECT_LT(gmax, 2.0);
        EXPECT_GT(ratios.back(), 0.1 * gmax);
    }
}

TEST(Bochner, Examples) {
    EXPECT_EQ(bochner_hessian_integral(4, 0), 0.0);
    EXPECT_NEAR(bochner_hessian_integral(4, 1), 6 * pi * pi, 1e-12);
    // n(n+d-2)(n^2+(d-2)(n-1)) = 2 at (d,n) = (3,1); the linear function
    // omega_1 has covariant Hessian -omega_1 g, giving (d-1) beta(d) = 8 pi.
    EXPECT_NEAR(bochner_hessian_integral(3, 1), 8 * pi, 1e-12);
}

TEST(Bochner, CovariantHessianQuadrature) {
    // For F = P |x|^{-n}, the covariant Hessian on S^{d-1} is Pi D^2F Pi with Pi = I - w w^T.
    for (int d : {3, 4}) {
        const auto& B = HarmonicBasis::get(d, 6);
        AngularQuadrature Q(d, 10);
        for (int n = 0; n <= 6; ++n)
            for (int k = 1; k <= B.count(n); k += 2) {
                const auto& P = B.compiled(n, k);
                const double v = Q.integrate([&](const auto& w) {
                    Powers pw(w.data(), n);
                    double p = P.value(pw), g[4], H[4][4];
                    for (int i = 0; i < d; ++i) g[i] = P.grad(i, pw);
                    // D^2 (P r^{-n}) at r = 1
                    double D[4][4];
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) {
                            H[i][j] = P.hess(i, j, pw);
                            D[i][j] = H[i][j] - n * (g[i] * w[j] + w[i] * g[j]) - n * p * (i == j) + n * (n + 2.0) * p * w[i] * w[j];
                        }
                    double s = 0;
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) {
                            double c = 0;
                            for (int a = 0; a < d; ++a)
                                for (int b = 0; b < d; ++b)
                                    c += ((i == a) - w[i] * w[a]) * D[a][b] * ((b == j) - w[b] * w[j]);
                            s += c * c;
                        }
                    return s;
                });
                EXPECT_NEAR(v, bochner_hessian_integral(d, n), 1e-9 * (1 + v)) << d << " " << n << " " << k;
            }
    }
}
