/// @file test_lorentz.cpp
/// Rearrangements, Lorentz quasi-norms and the averaging/stability lemmas.

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bhv/lorentz.hpp"

using namespace bhv;

namespace {

SimpleFunction one_cell(int d, double c, double r0, double r1, double omega = 1.0) {
    SimpleFunction f;
    f.d = d;
    f.cells.push_back({c, r0, r1, omega, 0.0});
    return f;
}

// integral definition of the norm by brute-force quadrature of f_** on a fine grid
double norm_by_definition(const Rearrangement& f, double p, double q) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto F = [&](double t) {
        double s = 0, prev = 0;
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            const double e = std::min(t, f.ends[i]);
            if (e > prev) s += f.values[i] * (e - prev);
            prev = f.ends[i];
        }
        return s;
    };
    const double M = f.total_measure();
    double s = 0;
    std::vector<double> pts{0.0};
    pts.insert(pts.end(), f.ends.begin(), f.ends.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        s += ts.integrate([&](double t) { return std::pow(t, q / p - 1) * std::pow(F(t) / t, q); }, pts[i], pts[i + 1]);
    s += ts.integrate([&](double t) { return std::pow(t, q / p - 1) * std::pow(F(M) / t, q); }, M, inf);
    return std::pow(s, 1 / q);
}

}  // namespace

TEST(Rearrangement, Examples) {
    auto f = one_cell(4, 2.5, 1, 2);
    auto R = rearrangement(f);
    const double M = f.cell_measure(f.cells[0]);
    ASSERT_EQ(R.values.size(), 1u);
    EXPECT_EQ(R.values[0], 2.5);
    EXPECT_NEAR(R.ends[0], M, 1e-14);
    EXPECT_EQ(R(0.5 * M), 2.5);
    EXPECT_EQ(R(M), 0.0);
    EXPECT_TRUE(rearrangement(SimpleFunction{}).values.empty());
    // cells (1, M=1), (2, M=1)
    auto S = rearrange({{1.0, 1.0}, {2.0, 1.0}});
    EXPECT_EQ(S(0.5), 2.0);
    EXPECT_EQ(S(1.5), 1.0);
    EXPECT_EQ(S(2.0), 0.0);
}

TEST(Rearrangement, MeasurePreservingAndHomogeneous) {
    Rng g(1);
    for (int rep = 0; rep < 50; ++rep) {
        auto f = random_simple_function(g, 4, 0.5, 2.0, 8);
        auto R = rearrangement(f);
        for (const auto& c : f.cells) {
            double direct = 0;
            for (const auto& x : f.cells)
                if (x.c > c.c * 0.999) direct += f.cell_measure(x);
            EXPECT_NEAR(R.distribution(c.c * 0.999), direct, 1e-12 * direct);
        }
        const auto S = R.scaled(3.5);
        for (std::size_t i = 0; i < R.values.size(); ++i) EXPECT_EQ(S.values[i], 3.5 * R.values[i]);
    }
}

TEST(LorentzNorm, ConstantOnSet) {
    auto f = one_cell(4, 1.7, 1, 2);
    const double M = f.cell_measure(f.cells[0]);
    EXPECT_NEAR(lorentz_norm(f, {2, 1}), 4 * 1.7 * std::sqrt(M), 1e-12);
    EXPECT_EQ(lorentz_norm(SimpleFunction{}, {2, 1}), 0.0);
    EXPECT_THROW(LorentzExponents(1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(LorentzExponents(2.0, 0.5), std::invalid_argument);
}

TEST(LorentzNorm, DiagonalEqualsLebesgue) {
    Rng g(2);
    for (int rep = 0; rep < 20; ++rep) {
        auto f = random_simple_function(g, 3, 0.3, 1.5, 6);
        for (double p : {1.5, 2.0, 4.0})
            EXPECT_NEAR(lorentz_seminorm(f, {p, p}), std::pow(f.integral_pow(p), 1 / p),
                        1e-10 * std::pow(f.integral_pow(p), 1 / p));
    }
}

TEST(LorentzNorm, L21ClosedFormMatchesDefinition) {
    Rng g(3);
    for (int rep = 0; rep < 30; ++rep) {
        auto R = rearrangement(random_simple_function(g, 4, 0.5, 2.0, 7));
        const double closed = lorentz_p1_closed_form(R, 2.0);
        EXPECT_NEAR(lorentz_norm(R, {2, 1}), closed, 1e-12 * closed);
        EXPECT_NEAR(norm_by_definition(R, 2, 1), closed, 1e-10 * closed);
    }
}

TEST(LorentzNorm, GeneralQMatchesDefinition) {
    Rng g(4);
    for (int rep = 0; rep < 20; ++rep) {
        auto R = rearrangement(random_simple_function(g, 4, 0.5, 2.0, 6));
        for (auto [p, q] : {std::pair{2.0, 2.0}, {4.0, 2.0}, {3.0, 1.5}}) {
            const double n = lorentz_norm(R, {p, q});
            EXPECT_NEAR(n, norm_by_definition(R, p, q), 1e-9 * n);
        }
    }
}

TEST(LorentzNorm, Sandwich) {
    Rng g(5);
    for (int rep = 0; rep < 30; ++rep) {
        auto R = rearrangement(random_simple_function(g, 4, 0.5, 2.0, 6));
        for (auto [p, q] : {std::pair{2.0, 1.0}, {2.0, 2.0}, {4.0, 2.0}, {2.0, inf}}) {
            const double s = lorentz_seminorm(R, {p, q}), n = lorentz_norm(R, {p, q});
            EXPECT_LE(s, n * (1 + 1e-12));
            EXPECT_LE(n, p / (p - 1) * s * (1 + 1e-12));
        }
    }
}

TEST(LorentzNorm, EmbeddingConstant) {
    Rng g(6);
    for (int rep = 0; rep < 50; ++rep) {
        auto R = rearrangement(random_simple_function(g, 4, 0.5, 2.0, 6));
        for (auto [p, q, r] : {std::tuple{2.0, 1.0, 2.0}, {4.0, 2.0, 4.0}}) {
            const double lhs = lorentz_norm(R, {p, r}), rhs = std::pow(p / q, 1 / q - 1 / r) * lorentz_norm(R, {p, q});
            EXPECT_LE(lhs, rhs * (1 + 1e-10));
        }
    }
}

TEST(PowerWeight, WholeSpaceWeakNorms) {
    const auto a = power_weight_norm(4, -2, 0, inf, {2, inf});
    ASSERT_TRUE(a.bounded);
    // exact distribution |{|x|^{-2} > l}| = (beta/4) l^{-2}
    EXPECT_NEAR(a.value, pi * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(weak_power_norm_formula(4, 2), 2 * pi * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(weak_power_norm_formula(4, 1), 4.0 / 3 * std::pow(2 * pi * pi, 0.25), 1e-12);
    EXPECT_NEAR(power_weight_norm(4, -1, 0, inf, {4, inf}).value, 4.0 / 3 * std::pow(pi * pi / 2, 0.25), 1e-12);
    for (int d = 3; d <= 8; ++d)
        EXPECT_NEAR(power_weight_norm(d, -1.5, 0, inf, {d / 1.5, inf}).value,
                    weak_power_norm_formula(d, 1.5) * std::pow(d, -1.5 / d), 1e-12);
}

TEST(PowerWeight, Unbounded) {
    const auto r = power_weight_norm(4, -2, 0, inf, {2, 1});
    EXPECT_FALSE(r.bounded);
    EXPECT_FALSE(power_weight_norm(4, -2, 0, 1, {2, 1}).bounded);
    EXPECT_TRUE(power_weight_norm(4, -2, 0, 1, {2, inf}).bounded);
}

TEST(PowerWeight, AnnulusAgainstSampled) {
    // |x|^2 on B_1 \ B_{1/2} in R^4, norm (2,1), compared with a fine radial sampling
    const auto v = power_weight_norm(4, 2, 0.5, 1, {2, 1});
    ASSERT_TRUE(v.bounded);
    EXPECT_LE(v.value, 4 * std::sqrt(sphere_area(4)) * std::pow(1.0, 2 + 2));
    SampledFunction s;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double r0 = 0.5 + 0.5 * i / n, r1 = 0.5 + 0.5 * (i + 1) / n, rm = 0.5 * (r0 + r1);
        s.values.push_back(rm * rm);
        s.weights.push_back(sphere_area(4) * (std::pow(r1, 4) - std::pow(r0, 4)) / 4);
    }
    EXPECT_NEAR(lorentz_norm(s.rearrangement(), {2, 1}), v.value, 1e-4 * v.value);
    const auto w = power_weight_norm(4, -1, 0.5, 1, {2, 2});
    // (2,2) seminorm is the L^2 norm: int r^{-2} beta r^3 dr = beta (1 - 1/4)/2
    EXPECT_NEAR(power_weight_norm(4, -1, 0.5, 1, {2, 2}, true).value, std::sqrt(sphere_area(4) * 0.375), 1e-10);
    EXPECT_GE(w.value, std::sqrt(sphere_area(4) * 0.375));
}

TEST(Averaging, ProfileExamples) {
    auto f = one_cell(4, 2.0, 1, 2);
    auto P = sphere_average_profile(f);
    for (double r : {1.0, 1.3, 1.99}) EXPECT_NEAR(P(r), 2.0 * std::sqrt(sphere_area(4)) * std::pow(r, 1.5), 1e-12);
    EXPECT_TRUE(sphere_average_profile(SimpleFunction{}).pieces.empty());
    Rng g(7);
    for (int rep = 0; rep < 20; ++rep) {
        auto h = random_simple_function(g, 3, 0.5, 2.0, 9);
        EXPECT_NEAR(sphere_average_profile(h).l2_sq(), h.integral_pow(2), 1e-12 * h.integral_pow(2));
    }
}

TEST(Averaging, LemmaOnRandomFunctions) {
    Rng g(8);
    for (int d : {2, 3, 4})
        for (double q : {1.0, 2.0})
            for (int rep = 0; rep < 100; ++rep) {
                auto f = random_simple_function(g, d, g.uniform(0.1, 1.0), g.uniform(1.2, 4.0), static_cast<int>(g.integer(1, 10)));
                const auto c = verify_averaging_lemma(f, q);
                EXPECT_TRUE(c.pass) << d << " " << q << " " << c.lhs << " " << c.rhs;
            }
    EXPECT_NEAR(constants::averaging_constant(4), 2 * pi * std::sqrt(2.0), 1e-12);
    EXPECT_THROW(verify_averaging_lemma(one_cell(4, 1, 0, 1), 1.0), precondition_error);
}

TEST(Averaging, SingleCellClosedForms) {
    auto f = one_cell(4, 1.0, 1, 2);
    const auto c = verify_averaging_lemma(f, 1.0);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.rhs, constants::averaging_constant(4) * 4 * std::sqrt(f.cell_measure(f.cells[0])), 1e-10);
}

TEST(IneqFund, DocumentedAndBruteForce) {
    const auto c = verify_ineq_fund({1, 2}, {1, 1});
    EXPECT_NEAR(c.rhs, std::sqrt(2.0) + 1, 1e-14);
    EXPECT_NEAR(c.lhs, std::sqrt(5.0), 1e-14);
    EXPECT_TRUE(c.pass);
    Rng g(9);
    for (int rep = 0; rep < 10000; ++rep) {
        const int n = static_cast<int>(g.integer(1, 6));
        std::vector<double> cs(n), D(n);
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            acc += g.uniform(1e-3, 2.0);
            cs[i] = acc;
            D[i] = g.uniform(0, 3.0);
        }
        ASSERT_TRUE(verify_ineq_fund(cs, D).pass);
    }
}

TEST(PowerStability, SquaringSeminormEquality) {
    Rng g(10);
    for (int rep = 0; rep < 20; ++rep) {
        auto f = random_simple_function(g, 4, 0.5, 2.0, 6);
        const auto c = verify_power_stability(f, 2.0, {2, 1});
        EXPECT_TRUE(c.pass);
        EXPECT_LE(std::get<double>(c.params.at("seminorm_rel_gap")), 1e-10);
    }
    auto ind = one_cell(4, 1.0, 1, 2);
    EXPECT_TRUE(verify_power_stability(ind, 2.0, {2, 1}).pass);
    const auto id = verify_power_stability(ind, 1.0, {2, 1});
    EXPECT_NEAR(id.lhs * 2, id.rhs, 1e-12);
    EXPECT_THROW(verify_power_stability(ind, 0.4, {2, 1}), precondition_error);
}

TEST(Duality, Pairing) {
    auto f = one_cell(4, 1, 1, 2, 0.5);
    SimpleFunction h;
    h.d = 4;
    h.cells.push_back({1, 1, 2, 0.5, 0.5});
    EXPECT_EQ(duality_pairing_check(f, h).lhs, 0.0);
    const auto same = duality_pairing_check(f, f);
    const double M = f.cell_measure(f.cells[0]);
    EXPECT_NEAR(same.lhs, M, 1e-12);
    EXPECT_NEAR(same.rhs, 2 * std::sqrt(M) * std::sqrt(M), 1e-12);
    EXPECT_TRUE(same.pass);
    Rng g(11);
    for (int rep = 0; rep < 50; ++rep) {
        auto a = random_simple_function(g, 4, 0.5, 2.0, 6), b = random_simple_function(g, 4, 0.5, 2.0, 6);
        EXPECT_TRUE(duality_pairing_check(a, b).pass);
    }
}

TEST(Dyadic, PartitionOfUnity) {
    for (double x : {0.01, 0.3, 1.0, 1.7, 5.0, 123.0}) {
        double s = 0;
        for (int j = -20; j <= 20; ++j) s += std::ldexp(dyadic_phi(std::ldexp(x, -j)), j);
        EXPECT_NEAR(s, x, 1e-12 * x);
    }
    EXPECT_EQ(dyadic_phi(0.49), 0.0);
    EXPECT_EQ(dyadic_phi(2.01), 0.0);
}

TEST(Dyadic, DecompositionNorm) {
    auto single = one_cell(4, 1.0, 1, 2);
    const auto c = verify_dyadic_decomposition_norm(single, {2, 1});
    EXPECT_TRUE(c.pass);
    EXPECT_GT(c.margin, 0);
    EXPECT_TRUE(verify_dyadic_decomposition_norm(SimpleFunction{}, {2, 1}).pass);
    Rng g(12);
    for (int rep = 0; rep < 30; ++rep) {
        auto f = random_simple_function(g, 4, 0.5, 2.0, 8);
        EXPECT_TRUE(verify_dyadic_decomposition_norm(f, {4, 2}).pass);
    }
    EXPECT_THROW(verify_dyadic_decomposition_norm(single, {2, 4}), precondition_error);
}

TEST(ImprovedSobolev, ConstantValue) {
    EXPECT_NEAR(improved_sobolev_constant(4, 2), 8 * std::pow(2.0, 0.75), 1e-12);
    EXPECT_LT(improved_sobolev_constant(4, 2), 14.0);
    EXPECT_EQ(std::pow(2.0, 11), 2048.0);
}

TEST(ImprovedSobolev, RadialBumps) {
    for (int k = 0; k < 10; ++k) {
        const double R = 0.5 + 0.3 * k, m = 2 + k % 4;
        // u = (1 - (r/R)^2)^m on B_R
        SampledFunction s;
        double grad2 = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            const double r0 = R * i / n, r1 = R * (i + 1) / n, r = 0.5 * (r0 + r1), t = r / R;
            const double w = sphere_area(4) * (std::pow(r1, 4) - std::pow(r0, 4)) / 4;
            s.values.push_back(std::pow(1 - t * t, m));
            s.weights.push_back(w);
            const double du = m * std::pow(1 - t * t, m - 1) * 2 * t / R;
            grad2 += du * du * w;
        }
        const auto c = improved_sobolev_check(s, std::sqrt(grad2), 4, 2.0);
        EXPECT_TRUE(c.pass) << k << " " << c.lhs << " " << c.rhs;
    }
    SampledFunction z{{0.0, 0.0}, {1.0, 1.0}};
    EXPECT_TRUE(improved_sobolev_check(z, 0.0, 4, 2.0).pass);
}
