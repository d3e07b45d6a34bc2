/// @file test_poisson.cpp
/// Spectral Dirichlet solver on the ball and the dyadic gradient estimates.

#include <gtest/gtest.h>

#include "bhv/poisson.hpp"

using namespace bhv;

namespace {

RadialSource single(int d, int n, int k, const PiecewisePoly& p) {
    RadialSource f;
    f.d = d;
    f.add(n, k, p);
    return f;
}

// bump supported in [lo, hi] with random interior values
PiecewisePoly bump(Rng& g, double lo, double hi, int knots = 8) {
    std::vector<double> x, v, s;
    for (int q = 0; q <= knots; ++q) {
        const double y = static_cast<double>(q) / knots;
        x.push_back(lo + (hi - lo) * y);
        v.push_back(q == 0 || q == knots ? 0.0 : g.normal() * std::pow(y * (1 - y), 2));
        s.push_back(q == 0 || q == knots ? 0.0 : g.normal() / (hi - lo));
    }
    return PiecewisePoly::hermite(x, v, s);
}

// source supported in B_{2^-j}, mode 0 corrected to zero flux
RadialSource zero_flux_source(Rng& g, int j) {
    RadialSource f;
    f.d = 4;
    for (int i = 0; i < 4; ++i) {
        const int n = i == 0 ? 0 : g.integer(0, 6);
        const int k = g.integer(1, (n + 1) * (n + 1));
        f.add(n, k, shell_profile({{g.integer(j + 1, j + 4), g.normal()}, {g.integer(j + 1, j + 4), g.normal()}}, 4));
    }
    const auto b = shell_profile({{j + 2, 1.0}}, 4);
    const double fb = source_flux(single(4, 0, 1, b));
    f.add(0, 1, (-source_flux(f) / fb) * b);
    return f;
}

// finite differences for u'' + 3/r u' - 3/r^2 u = r, u(0) = u(1) = 0, value at r = 1/2
double fd_mode1(int M) {
    const double h = 1.0 / M;
    std::vector<double> a(M + 1), b(M + 1), c(M + 1), rhs(M + 1), u(M + 1, 0.0);
    for (int i = 1; i < M; ++i) {
        const double r = i * h;
        a[i] = 1 / (h * h) - 1.5 / (r * h);
        b[i] = -2 / (h * h) - 3 / (r * r);
        c[i] = 1 / (h * h) + 1.5 / (r * h);
        rhs[i] = r;
    }
    // Thomas
    for (int i = 2; i < M; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    u[M - 1] = rhs[M - 1] / b[M - 1];
    for (int i = M - 2; i >= 1; --i) u[i] = (rhs[i] - c[i] * u[i + 1]) / b[i];
    return u[M / 2];
}

std::vector<RadialSource> ensemble(std::uint64_t seed, int count, SourceOptions opt = {}) {
    Rng g(seed);
    std::vector<RadialSource> out;
    for (int i = 0; i < count; ++i) out.push_back(random_multishell_source(g, 4, opt));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Profiles

TEST(PiecewisePoly, HermiteReproducesCubics) {
    auto p = [](double r) { return 1 - 2 * r + 0.5 * r * r * r; };
    auto dp = [](double r) { return -2 + 1.5 * r * r; };
    std::vector<double> x = {0.1, 0.3, 0.45, 0.9}, v, s;
    for (double r : x) {
        v.push_back(p(r));
        s.push_back(dp(r));
    }
    const auto h = PiecewisePoly::hermite(x, v, s);
    for (double r = 0.1; r <= 0.9; r += 0.01) EXPECT_NEAR(h(r), p(r), 1e-13);
    EXPECT_EQ(h(0.05), 0.0);
    EXPECT_EQ(h(0.95), 0.0);
}

TEST(PiecewisePoly, Arithmetic) {
    Rng g(3);
    const auto a = bump(g, 0.1, 0.6), b = bump(g, 0.3, 0.9);
    const auto s = a + b, m = a * b, d = a - a;
    for (double r = 0.0; r <= 1.0; r += 0.013) {
        EXPECT_NEAR(s(r), a(r) + b(r), 1e-13);
        // power-basis pieces of width ~r/16 lose a few digits in the degree-6 product
        EXPECT_NEAR(m(r), a(r) * b(r), 1e-9);
        EXPECT_NEAR(d(r), 0.0, 1e-13);
    }
    EXPECT_THROW(PiecewisePoly({{0.5, 0.2, 0, {1.0}}}), std::invalid_argument);
    EXPECT_THROW(PiecewisePoly({{0.1, 0.5, 0, {1.0}}, {0.4, 0.6, 0, {1.0}}}), std::invalid_argument);
}

TEST(PiecewisePoly, ModeLaplacianMatchesDifferences) {
    Rng g(4);
    const auto p = bump(g, 0.2, 0.8);
    for (int n : {0, 1, 3}) {
        const auto L = mode_laplacian(p, 4, n);
        for (double r : {0.27, 0.41, 0.66}) {
            const double h = 1e-4;
            const double d2 = (p(r + h) - 2 * p(r) + p(r - h)) / (h * h), d1 = (p(r + h) - p(r - h)) / (2 * h);
            EXPECT_NEAR(L(r), d2 + 3 * d1 / r - n * (n + 2.0) * p(r) / (r * r), 1e-5 * (1 + std::abs(L(r))));
        }
    }
}

TEST(Partition, SupportBoundsAndSum) {
    for (int k = 0; k <= 10; ++k) {
        const auto chi = partition_function(k);
        const Shell S = DyadicAnnuli::extended_in_ball(k);
        const auto sup = chi.support();
        EXPECT_GE(sup.first, S.lo * (1 - 1e-15));
        EXPECT_LE(sup.second, S.hi * (1 + 1e-15));
        for (double r = sup.first; r <= sup.second; r += (sup.second - sup.first) / 200) {
            EXPECT_GE(chi(r), -1e-12);
            EXPECT_LE(chi(r), 1 + 1e-12);
        }
    }
    for (double r = std::ldexp(1.0, -10); r <= 1.0; r *= 1.0173) {
        double s = 0;
        for (int k = 0; k <= 11; ++k) s += partition_function(k)(r);
        EXPECT_NEAR(s, 1.0, 1e-11) << r;
    }
}

TEST(Partition, IsC2) {
    for (int k : {0, 1, 4}) {
        const auto chi = partition_function(k);
        const auto d1 = chi.derivative(), d2 = d1.derivative();
        for (double b : chi.breaks()) {
            if (b >= 1.0) continue;
            const double e = 1e-9 * b;
            EXPECT_NEAR(chi(b - e), chi(b + e), 1e-8);
            EXPECT_NEAR(d1(b - e) * b, d1(b + e) * b, 1e-7);
            EXPECT_NEAR(d2(b - e) * b * b, d2(b + e) * b * b, 1e-6);
        }
    }
}

TEST(DyadicAnnuli, DisjointCover) {
    for (int k = 0; k < 20; ++k) {
        const Shell A = DyadicAnnuli::A(k), B = DyadicAnnuli::A(k + 1);
        EXPECT_EQ(A.lo, B.hi);
        EXPECT_EQ(DyadicAnnuli::extended(k + 1).lo, B.lo);
        EXPECT_EQ(DyadicAnnuli::extended(k + 1).hi, A.hi);
    }
    EXPECT_EQ(DyadicAnnuli::A(0).hi, 1.0);
    Rng g(9);
    for (int i = 0; i < 1000; ++i) {
        const double r = std::pow(g.uniform(), 6.0) + 1e-12;
        const int k = DyadicAnnuli::index(r);
        EXPECT_GT(r, DyadicAnnuli::A(k).lo);
        EXPECT_LE(r, DyadicAnnuli::A(k).hi);
    }
    EXPECT_EQ(DyadicAnnuli::index(1.5), -1);
}

// ---------------------------------------------------------------------------
// Solver

TEST(Solver, ConstantSource) {
    const auto u = solve_dirichlet_ball(single(4, 0, 1, PiecewisePoly::constant(1.0, 0.0, 1.0)));
    for (double r : {0.0, 0.1, 0.37, 0.8, 1.0}) EXPECT_NEAR(u.value(0, 1, r), (r * r - 1) / 8, 1e-15);
    EXPECT_LE(u.max_residual, 1e-8);
}

TEST(Solver, ZeroSource) {
    const auto u = solve_dirichlet_ball(single(4, 2, 3, PiecewisePoly()));
    for (double r : {0.0, 0.3, 1.0}) EXPECT_EQ(u.value(2, 3, r), 0.0);
    EXPECT_EQ(gradient_sq(u), 0.0);
}

TEST(Solver, ModeOneAgainstFiniteDifferences) {
    const auto u = solve_dirichlet_ball(single(4, 1, 1, PiecewisePoly::monomial(1.0, 1, 0.0, 1.0)));
    const double fd = (4 * fd_mode1(4000) - fd_mode1(2000)) / 3;
    EXPECT_NEAR(u.value(1, 1, 0.5), fd, 1e-6);
    EXPECT_NEAR(u.value(1, 1, 0.5), (0.125 - 0.5) / 12, 1e-15);
}

TEST(Solver, ResidualOnRandomSources) {
    for (const auto& f : ensemble(21, 20)) EXPECT_LE(solve_dirichlet_ball(f).max_residual, 1e-8);
    Rng g(5);
    RadialSource f;
    f.d = 3;
    for (int n = 0; n <= 8; ++n) f.add(n, 1, bump(g, 0.01, 0.9, 12));
    EXPECT_LE(solve_dirichlet_ball(f).max_residual, 1e-8);
}

TEST(Solver, DerivativeMatchesDifferences) {
    const auto f = ensemble(22, 1)[0];
    const auto u = solve_dirichlet_ball(f);
    for (const auto& [key, m] : u.modes)
        for (double r : {0.013, 0.2, 0.71}) {
            const double h = 1e-6 * r;
            EXPECT_NEAR(m.derivative(r), (m.value(r + h) - m.value(r - h)) / (2 * h),
                        1e-6 * (1 + std::abs(m.derivative(r))));
        }
}

TEST(Solver, EnergyIdentity) {
    // int |grad u|^2 = -int u f for zero boundary data
    for (const auto& f : ensemble(23, 10)) {
        const auto u = solve_dirichlet_ball(f);
        EXPECT_NEAR(gradient_sq(u), -pairing(u, f), 1e-10 * gradient_sq(u));
    }
}

TEST(Solver, GradientPotentialGivesBackPotential) {
    // Delta u = Delta g with g compactly supported in the ball: u = g
    Rng g(6);
    RadialSource pot;
    pot.d = 4;
    pot.add(0, 1, bump(g, 0.05, 0.5)).add(2, 3, bump(g, 0.1, 0.4)).add(5, 7, bump(g, 0.01, 0.2));
    const auto u = solve_dirichlet_ball(gradient_potential_source(pot));
    for (const auto& [key, p] : pot.modes)
        for (double r = 0.005; r < 1.0; r += 0.0173) EXPECT_NEAR(u.value(key.first, key.second, r), p(r), 1e-11);
    RadialSource jump;
    jump.d = 4;
    jump.add(0, 1, PiecewisePoly::constant(1.0, 0.2, 0.4));
    EXPECT_THROW(gradient_potential_source(jump), precondition_error);
}

TEST(Solver, Errors) {
    EXPECT_THROW(solve_dirichlet_ball(single(4, 0, 1, PiecewisePoly::monomial(1.0, -1, 0.0, 0.5))), precondition_error);
    EXPECT_THROW(solve_dirichlet_ball(single(4, 1, 5, PiecewisePoly::constant(1.0, 0.0, 0.5))), precondition_error);
    EXPECT_THROW(solve_dirichlet_ball(single(4, 0, 1, PiecewisePoly::constant(1.0, 0.5, 1.5))), precondition_error);
    EXPECT_THROW(solve_dirichlet_ball(single(2, 0, 1, PiecewisePoly::constant(1.0, 0.0, 0.5))), precondition_error);
    // negative powers away from the origin are bounded and accepted
    EXPECT_NO_THROW(solve_dirichlet_ball(single(4, 0, 1, PiecewisePoly::monomial(1.0, -2, 0.1, 0.5))));
}

TEST(SolverProperties, Linearity) {
    const auto fs = ensemble(31, 20);
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2) {
        const auto u1 = solve_dirichlet_ball(fs[i]), u2 = solve_dirichlet_ball(fs[i + 1]);
        const auto u12 = solve_dirichlet_ball(fs[i] + 2.5 * fs[i + 1]);
        for (const auto& [key, m] : u12.modes)
            for (double r = 0.001; r < 1.0; r *= 1.3) {
                const double a = u1.value(key.first, key.second, r), b = u2.value(key.first, key.second, r);
                const double scale = std::abs(a) + 2.5 * std::abs(b) + 1e-300;
                EXPECT_LE(std::abs(m.value(r) - a - 2.5 * b), 1e-12 * std::max(scale, 1e-3));
            }
    }
}

TEST(SolverProperties, MaximumPrinciple) {
    Rng g(32);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::pair<int, double>> sh;
        for (int s = 0; s < 3; ++s) sh.push_back({g.integer(0, 10), -std::abs(g.normal())});
        const auto p = shell_profile(sh, 8);
        for (double r = 1e-4; r <= 1.0; r *= 1.05) ASSERT_LE(p(r), 1e-14);
        const auto u = solve_dirichlet_ball(single(4, 0, 1, p));
        for (double r = 0.0; r <= 1.0; r += 0.001) EXPECT_GE(u.value(0, 1, r), -1e-15);
    }
}

TEST(SolverProperties, GreenSymmetry) {
    SourceOptions opt;
    opt.N = 2;
    opt.modes = 6;
    const auto fs = ensemble(33, 40, opt);
    int nonzero = 0;
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2) {
        const double a = pairing(solve_dirichlet_ball(fs[i]), fs[i + 1]);
        const double b = pairing(solve_dirichlet_ball(fs[i + 1]), fs[i]);
        EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
        nonzero += std::abs(a) > 1e-8;
    }
    EXPECT_GE(nonzero, 10);
}

// ---------------------------------------------------------------------------
// Shell gradient bound

TEST(ShellGradient, BumpPasses) {
    Rng g(41);
    const Shell S = DyadicAnnuli::extended_in_ball(1);
    const auto c = verify_shell_gradient_bound(single(4, 0, 1, bump(g, S.lo, S.hi)), 1);
    EXPECT_TRUE(c.pass);
    EXPECT_LT(c.lhs, 0.9 * c.rhs);
    EXPECT_NEAR(std::get<double>(c.params.at("inverse_j")), 0.26098, 5e-6);
}

TEST(ShellGradient, ZeroSource) {
    const auto c = verify_shell_gradient_bound(single(4, 0, 1, PiecewisePoly()), 2);
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_EQ(c.rhs, 0.0);
}

TEST(ShellGradient, EigenvalueConstant) {
    EXPECT_NEAR(constants::ball_lambda1(4), 14.681970, 1e-6);
    EXPECT_NEAR(1 / std::sqrt(constants::ball_lambda1(4)), 0.26098, 5e-6);
}

TEST(ShellGradient, NearEigenfunctionApproachesFromBelow) {
    const double inv_j = 1 / std::sqrt(constants::ball_lambda1(4));
    double prev = -1;
    for (int knots : {4, 8, 16, 32}) {
        const double q = dirichlet_gradient_ratio(near_eigenfunction_source(4, knots));
        EXPECT_LE(q, inv_j * (1 + 1e-14));
        EXPECT_GE(q, prev - 1e-15);
        prev = q;
    }
    EXPECT_NEAR(prev, inv_j, 1e-12);
    // restricted to the first extended annulus the ratio stays below but close
    const Shell S = DyadicAnnuli::extended_in_ball(1);
    const auto eig = near_eigenfunction_source(4, 32).modes.at({0, 1});
    RadialSource f = single(4, 0, 1, eig * shell_profile({{1, 1.0}, {0, 1.0}}, 8));
    f.modes.at({0, 1}) = f.modes.at({0, 1}) * PiecewisePoly::constant(1.0, S.lo, S.hi);
    const auto c = verify_shell_gradient_bound(f, 1);
    EXPECT_TRUE(c.pass);
    EXPECT_GT(std::get<double>(c.params.at("ratio")), 0.95 * inv_j);
}

TEST(ShellGradient, RandomShellSources) {
    Rng g(42);
    for (int t = 0; t < 30; ++t) {
        const int k = g.integer(0, 10);
        const Shell S = DyadicAnnuli::extended_in_ball(k);
        RadialSource f;
        f.d = 4;
        for (int i = 0; i < 3; ++i) {
            const int n = g.integer(0, 8);
            f.add(n, g.integer(1, (n + 1) * (n + 1)), bump(g, S.lo, S.hi));
        }
        EXPECT_TRUE(verify_shell_gradient_bound(f, k).pass);
    }
}

TEST(ShellGradient, SupportViolation) {
    Rng g(43);
    EXPECT_THROW(verify_shell_gradient_bound(single(4, 0, 1, bump(g, 0.1, 0.6)), 1), precondition_error);
    EXPECT_THROW(verify_shell_gradient_bound(single(4, 0, 1, bump(g, 0.3, 0.6)), -1), precondition_error);
}

// ---------------------------------------------------------------------------
// Weighted gradient lemma

TEST(WeightedGradient, Constant) {
    EXPECT_NEAR(constants::gamma1(), 6.1824966, 1e-6);
    EXPECT_NEAR(constants::gamma1() * constants::gamma1(), 38.223, 1e-3);
}

TEST(WeightedGradient, ZeroSource) {
    const auto c = verify_weighted_gradient_lemma(single(4, 0, 1, PiecewisePoly()));
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(c.lhs, 0.0);
}

TEST(WeightedGradient, RandomMultiShell) {
    double worst = 0;
    for (const auto& f : ensemble(51, 30)) {
        const auto c = verify_weighted_gradient_lemma(f);
        EXPECT_TRUE(c.pass);
        worst = std::max(worst, std::get<double>(c.params.at("ratio")));
    }
    EXPECT_GT(worst, 0.0);
    EXPECT_LT(worst, constants::gamma1());
}

TEST(WeightedGradient, Errors) {
    EXPECT_THROW(verify_weighted_gradient_lemma(single(3, 0, 1, PiecewisePoly::constant(1, 0, 1))), precondition_error);
}

// ---------------------------------------------------------------------------
// Weighted Dirichlet lemma

TEST(WeightedDirichlet, ZeroSource) {
    EXPECT_TRUE(verify_weighted_dirichlet_lemma(single(4, 0, 1, PiecewisePoly())).pass);
    EXPECT_EQ(weighted_dirichlet_ratio(single(4, 0, 1, PiecewisePoly())), 0.0);
}

TEST(WeightedDirichlet, SingleShellRatio) {
    for (int k : {0, 3, 8}) {
        const double q = weighted_dirichlet_ratio(single(4, 1, 2, shell_profile({{k, 1.0}}, 8)));
        EXPECT_TRUE(std::isfinite(q));
        EXPECT_GT(q, 0.0);
        EXPECT_LT(q, weighted_dirichlet_gamma_hat);
    }
}

TEST(WeightedDirichlet, RecordedConstant) {
    SourceOptions opt;
    opt.per_shell = 8;
    const auto ens = ensemble(2, 100, opt);
    EXPECT_NEAR(fit_weighted_dirichlet_constant(ens), weighted_dirichlet_gamma_hat, 1e-8);
    for (const auto& f : ensemble(1, 50, opt)) EXPECT_TRUE(verify_weighted_dirichlet_lemma(f).pass);
}

TEST(WeightedDirichlet, StableUnderRefinement) {
    std::vector<double> fits;
    for (int per_shell : {2, 4, 8}) {
        SourceOptions opt;
        opt.per_shell = per_shell;
        fits.push_back(fit_weighted_dirichlet_constant(ensemble(2, 100, opt)));
    }
    EXPECT_NEAR(fits[1] / fits[2], 1.0, 0.05);
    EXPECT_NEAR(fits[0] / fits[2], 1.0, 0.05);
    SourceOptions opt;
    opt.per_shell = 8;
    const auto ens = ensemble(2, 100, opt);
    EXPECT_NEAR(fit_weighted_dirichlet_constant(ens, 24) / fit_weighted_dirichlet_constant(ens, 64), 1.0, 1e-6);
}

// ---------------------------------------------------------------------------
// Decay lemma

TEST(DecayLemma, ExteriorJ3K1) {
    Rng g(61);
    const auto f = zero_flux_source(g, 3);
    const auto c = verify_decay_lemma(f, 3, 1);
    EXPECT_TRUE(c.pass);
    EXPECT_GT(c.lhs, 0.0);
}

TEST(DecayLemma, ExteriorHasNoFluxMode) {
    Rng g(62);
    for (int t = 0; t < 5; ++t) {
        const auto f = zero_flux_source(g, 3);
        const auto c = verify_decay_lemma(f, 3, 0);
        // b01 = -int s^3 f_{0,1} / 2; compare with the same moment of |f_{0,1}|
        const auto& p = f.modes.at({0, 1});
        const double scale = 0.5 * radial_integral([&](double r) { return std::abs(p(r)) * r * r * r; }, 0.0, 1.0, p.breaks());
        EXPECT_GT(scale, 0.0);
        EXPECT_LE(std::abs(std::get<double>(c.params.at("b01"))), 1e-10 * scale);
    }
}

TEST(DecayLemma, AllExteriorShells) {
    Rng g(63);
    for (int j : {1, 2, 3, 5, 7})
        for (int t = 0; t < 4; ++t) {
            const auto f = zero_flux_source(g, j);
            for (int k = 0; k < j; ++k) EXPECT_TRUE(verify_decay_lemma(f, j, k).pass) << j << " " << k;
        }
}

TEST(DecayLemma, BoundaryCaseKEqualsJMinusOne) {
    Rng g(64);
    double worst = 0;
    for (int t = 0; t < 10; ++t) {
        const auto c = verify_decay_lemma(zero_flux_source(g, 4), 4, 3);
        EXPECT_TRUE(c.pass);
        worst = std::max(worst, c.lhs / c.rhs);
    }
    EXPECT_LT(worst, 1.0);
}

TEST(DecayLemma, Interior) {
    Rng g(65);
    for (int j : {1, 3, 5})
        for (int t = 0; t < 4; ++t) {
            const Shell A = DyadicAnnuli::A(j);
            RadialSource f;
            f.d = 4;
            for (int i = 0; i < 3; ++i) {
                const int n = g.integer(0, 8);
                f.add(n, g.integer(1, (n + 1) * (n + 1)), bump(g, A.lo, A.hi));
            }
            for (int k = j + 1; k <= j + 8; ++k) EXPECT_TRUE(verify_decay_lemma(f, j, k).pass) << j << " " << k;
        }
}

TEST(DecayLemma, GradientPotentialSource) {
    // K = grad g with supp g in B_{2^-j}: u = g vanishes outside, so the exterior side is 0 <= 0
    Rng g(66);
    RadialSource pot;
    pot.d = 4;
    pot.add(0, 1, bump(g, 0.02, 0.12)).add(3, 2, bump(g, 0.05, 0.125));
    const auto c = verify_decay_lemma(gradient_potential_source(pot), 3, 1);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.lhs, 0.0, 1e-25);
    EXPECT_NEAR(std::get<double>(c.params.at("flux")), 0.0, 1e-12);
}

TEST(DecayLemma, Errors) {
    Rng g(67);
    EXPECT_THROW(verify_decay_lemma(single(4, 0, 1, bump(g, 0.01, 0.1)), 3, 1), precondition_error);  // flux
    EXPECT_THROW(verify_decay_lemma(single(4, 1, 1, bump(g, 0.01, 0.3)), 3, 1), precondition_error);  // support
    EXPECT_THROW(verify_decay_lemma(single(4, 1, 1, bump(g, 0.01, 0.1)), 3, 3), precondition_error);
    EXPECT_THROW(verify_decay_lemma(single(4, 1, 1, bump(g, 0.03, 0.1)), 3, 5), precondition_error);  // not in A_3
}

// ---------------------------------------------------------------------------
// Iteration theorems

TEST(Iteration, ZeroSource) {
    const auto f = single(4, 0, 1, PiecewisePoly());
    for (auto kind : {IterationKind::gradient, IterationKind::gradient_over_x, IterationKind::divergence}) {
        const auto c = verify_iteration_theorem(f, 0.5, 0.0, kind);
        EXPECT_TRUE(c.pass);
        EXPECT_EQ(std::get<double>(c.params.at("fitted_C")), 0.0);
    }
}

TEST(Iteration, HarmonicPartDecays) {
    const auto zero = single(4, 0, 1, PiecewisePoly());
    for (int n = 0; n <= 3; ++n) {
        auto u = solve_dirichlet_ball(zero);
        u.add_harmonic(n, 1, 1.0);
        const auto Pu = iteration_profile(u, zero, IterationKind::divergence);
        for (std::size_t k = 0; k < Pu.lhs.size(); ++k) {
            EXPECT_LE(Pu.lhs[k], std::pow(0.25, k) * Pu.lhs[0] * (1 + 1e-12));
            if (n == 0) {
                EXPECT_NEAR(Pu.lhs[k], std::pow(0.25, k) * Pu.lhs[0], 1e-12 * Pu.lhs[0]);
            }
        }
        EXPECT_EQ(iteration_constant(Pu, 0.5), 0.0);
        if (n == 0) continue;
        for (auto kind : {IterationKind::gradient, IterationKind::gradient_over_x}) {
            const auto P = iteration_profile(u, zero, kind);
            for (std::size_t k = 0; k < P.lhs.size(); ++k) EXPECT_LE(P.lhs[k], std::pow(P.factor, k) * P.lhs[0] * (1 + 1e-12));
            EXPECT_EQ(iteration_constant(P, 0.25), 0.0);
        }
    }
}

TEST(Iteration, FarShellDecay) {
    // source in shell l: the gradient on A_k, k < l - 1, falls off at least like 2^{-alpha (l-1-k)} for alpha <= 1
    const int l = 8;
    for (int n : {0, 1, 3}) {
        const auto f = single(4, n, 1, shell_profile({{l, 1.0}}, 8));
        const auto P = iteration_profile(solve_dirichlet_ball(f), f, IterationKind::gradient);
        for (int k = 0; k + 2 < l; ++k) EXPECT_LE(P.lhs[k], std::pow(2.0, -(l - 2 - k)) * P.lhs[l - 2] * (1 + 1e-9)) << n << " " << k;
        for (int ll = 0; ll < static_cast<int>(P.source.size()); ++ll)
            if (ll < l - 1 || ll > l) {
                EXPECT_EQ(P.source[ll], 0.0);
            }
    }
}

TEST(Iteration, FittedConstantsStable) {
    const auto ens = ensemble(7, 40);
    for (double alpha : {0.25, 0.5, 0.75})
        for (auto kind : {IterationKind::gradient, IterationKind::gradient_over_x}) {
            const auto c = verify_iteration_stability(ens, alpha, kind);
            EXPECT_TRUE(c.pass) << alpha << " " << iteration_kind_name(kind);
            const double C = std::get<double>(c.params.at("C_full"));
            EXPECT_GT(C, 0.0);
            for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(verify_iteration_theorem(ens[i], alpha, C, kind).pass);
        }
}

TEST(Iteration, FrozenFits) {
    const auto ens = ensemble(7, 40);
    EXPECT_NEAR(fit_iteration_constant(ens, 0.25, IterationKind::gradient), 0.0279096, 1e-6);
    EXPECT_NEAR(fit_iteration_constant(ens, 0.5, IterationKind::gradient_over_x), 0.0289702, 1e-6);
}

TEST(Iteration, DivergenceFormStable) {
    const auto ens = ensemble(7, 24);
    for (double alpha : {0.25, 0.5, 0.75}) {
        const auto c = verify_iteration_stability(ens, alpha, IterationKind::divergence);
        EXPECT_TRUE(c.pass) << alpha << " change " << c.lhs;
    }
}

TEST(Iteration, Errors) {
    const auto f = single(4, 0, 1, PiecewisePoly());
    EXPECT_THROW(verify_iteration_theorem(f, 1.0, 1.0, IterationKind::gradient), precondition_error);
    EXPECT_THROW(fit_iteration_constant({f}, 0.0, IterationKind::gradient), precondition_error);
    EXPECT_THROW(verify_iteration_stability({f}, 0.5, IterationKind::gradient), precondition_error);
}
