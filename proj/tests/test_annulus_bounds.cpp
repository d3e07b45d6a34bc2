/// @file test_annulus_bounds.cpp
/// Pointwise bounds and sampled Lorentz decay for harmonic fields on annuli.

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bhv/annulus_bounds.hpp"

using namespace bhv;

namespace {

std::array<double, 4> point_at(Rng& g, int d, double r) {
    std::array<double, 4> x{0, 0, 0, 0};
    double s = 0;
    for (int i = 0; i < d; ++i) {
        x[i] = g.normal();
        s += x[i] * x[i];
    }
    for (int i = 0; i < d; ++i) x[i] *= r / std::sqrt(s);
    return x;
}

// exact ||c r^{-m}||_{p,1} on B_hi \ B_lo from the distribution function
double radial_power_norm(int d, double c, double m, double lo, double hi, double p) {
    const double beta = sphere_area(d), top = c * std::pow(lo, -m), bottom = c * std::pow(hi, -m);
    auto lam = [&](double t) {
        const double r = t <= bottom ? hi : std::pow(c / t, 1 / m);
        return beta / d * (std::pow(r, d) - std::pow(lo, d));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double I = bottom * std::pow(lam(0), 1 / p) + ts.integrate([&](double t) { return std::pow(lam(t), 1 / p); }, bottom, top);
    return p * p / (p - 1) * I;
}

}  // namespace

TEST(AngularConstants, Values) {
    // sum_k |grad_omega Y_1^k|^2 = (d-1) d everywhere, so some k has |grad_omega Y_1^k| >= sqrt(d-1),
    // giving g1 >= sqrt((d-1)/d)
    for (int d : {3, 4}) {
        const double g1 = angular_derivative_constant(d, 1), g2 = angular_derivative_constant(d, 2);
        EXPECT_GE(g1, std::sqrt((d - 1.0) / d) * 0.999);
        EXPECT_LT(g1, 2.0);
        EXPECT_GT(g2, 0.5);
        EXPECT_LT(g2, 4.0);
    }
    EXPECT_THROW(angular_derivative_constant(5, 1), unsupported_dimension);
}

TEST(Pointwise, LambdaValues) {
    EXPECT_NEAR(pointwise_lambda(4), 8 * std::sqrt(30.0) / pi, 1e-14);
    EXPECT_NEAR(pointwise_lambda(3), 2 * std::sqrt(38 / pi), 1e-14);
    // 2 sqrt(2 C_d / beta(d)) with C_3 = 76 reproduces Lambda_3
    EXPECT_NEAR(2 * std::sqrt(2 * 76 / sphere_area(3)), pointwise_lambda(3), 1e-13);
    EXPECT_GT(pointwise_lambda(4), 2 * std::sqrt(2 * 240 / sphere_area(4)));
    EXPECT_THROW(pointwise_lambda(5), registry_error);
}

TEST(Pointwise, DocumentedCases) {
    Rng g(1);
    FieldOptions o;
    o.no_flux = true;
    auto u = random_field(g, 4, 0.5, 2.0, 6, o);
    u.ca(0, 1) = 0;
    const auto c = verify_pointwise_bound("pointwise_harmonic_u", u, point_at(g, 4, 1.25));
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(std::get<double>(c.params.at("constant")), 8 * std::sqrt(30.0) / pi, 1e-14);

    const SpectralField z(4, 0.5, 2.0, 4);
    for (const auto& id : pointwise_theorem_ids()) {
        const auto zc = verify_pointwise_bound(id, z, point_at(g, 4, 1.0));
        EXPECT_EQ(zc.lhs, 0.0);
        EXPECT_EQ(zc.rhs, 0.0);
        EXPECT_TRUE(zc.pass) << id;
    }
    auto v = random_field(g, 3, 0.5, 2.0, 6, o);
    EXPECT_TRUE(verify_pointwise_bound("pointwise_harmonic_u", v, point_at(g, 3, 1.0)).pass);
}

TEST(Pointwise, Errors) {
    Rng g(2);
    auto u = random_field(g, 4, 0.5, 2.0, 4);
    EXPECT_THROW(verify_pointwise_bound("pointwise_harmonic_u", u, point_at(g, 4, 1.0)), precondition_error);
    EXPECT_THROW(verify_pointwise_bound("pointwise_harmonic_u_Du", u, point_at(g, 4, 1.0)), precondition_error);
    EXPECT_THROW(verify_pointwise_bound("pointwise_harmonic_Du", u, point_at(g, 4, 3.0)), precondition_error);
    EXPECT_THROW(verify_pointwise_bound("no_such_bound", u, point_at(g, 4, 1.0)), registry_error);
    EXPECT_THROW(verify_pointwise_bound("pointwise_harmonic_Du", SpectralField(5, 0.5, 2.0, 2), {1, 0, 0, 0}), registry_error);
    auto close = random_field(g, 4, 1.0, 2.0, 4, {false, true});
    EXPECT_THROW(verify_pointwise_bound("pointwise_harmonic_u", close, point_at(g, 4, 1.5)), precondition_error);
}

TEST(Pointwise, RandomFieldsAndPoints) {
    Rng g(3);
    for (int d : {3, 4})
        for (int rep = 0; rep < 60; ++rep) {
            FieldOptions o;
            o.no_flux = true;
            o.adversarial = rep % 2;
            o.only_b = rep % 5 == 0;
            const double a = g.uniform(0.2, 1.0), b = a * g.uniform(2.25, 60.0);
            const auto u = random_field(g, d, a, b, 6, o);
            const double r = std::exp(g.uniform(std::log(a) + 1e-3, std::log(b) - 1e-3));
            for (const auto& id : pointwise_theorem_ids()) {
                const auto c = verify_pointwise_bound(id, u, point_at(g, d, r));
                EXPECT_TRUE(c.pass) << d << " " << id << " " << c.lhs << " " << c.rhs;
            }
        }
}

TEST(Pointwise, SingleModesNearTheBoundary) {
    // one mode at a time, evaluated close to the sphere where it is largest
    for (int d : {3, 4})
        for (int n = 1; n <= 6; ++n) {
            SpectralField ua(d, 0.1, 1.0, 6), ub(d, 0.1, 1.0, 6);
            ua.ca(n, 1) = 1;
            ub.cb(n, 1) = 1;
            for (double r : {0.11, 0.5, 0.99})
                for (const auto& id : pointwise_theorem_ids()) {
                    const std::array<double, 4> x{r, 0, 0, 0};
                    EXPECT_TRUE(verify_pointwise_bound(id, ua, x).pass) << d << n << id << r;
                    EXPECT_TRUE(verify_pointwise_bound(id, ub, x).pass) << d << n << id << r;
                }
        }
}

TEST(Pointwise, FluxModeDefeatsUMinusC) {
    // u = r^{2-d}: |u(x)| / (|x|^{-(d-2)/2} shape ||grad u||) grows like |x|/a, so no constant works
    const int d = 4;
    const double a = 1, b = 1e8;
    SpectralField u(d, a, b, 0);
    u.cb(0, 1) = 1;
    auto ratio = [&](double r) {
        const double t = r / b, s = a / r;
        const double shape = std::pow(t, 2.0) / std::pow(1 - t * t, 2) + std::pow(s, 2.0) / std::pow(1 - s * s, 2);
        return std::pow(r, 2.0 - d) / (std::pow(r, -1.0) * shape * std::sqrt(dirichlet_norm_sq(u)));
    };
    EXPECT_NEAR(ratio(1e3) / ratio(1e2), 10.0, 0.1);
    EXPECT_GT(ratio(1e3), 10 * pointwise_u_du_constant(d, a / b));
}

TEST(SampledLorentz, RadialOracle) {
    // u = r^{2-d} has an explicit distribution function
    for (int d : {3, 4}) {
        SpectralField u(d, 0.2, 5.0, 2);
        u.cb(0, 1) = 1;
        for (auto [lo, hi] : {std::pair{0.4, 2.5}, {0.8, 1.25}}) {
            for (double p : {2.0, 2.0 * d / (d - 2)}) {
                const auto s = sampled_lorentz_norm(u, SampledQuantity::value, lo, hi, {p, 1});
                EXPECT_TRUE(s.converged);
                const double exact = radial_power_norm(d, 1.0, d - 2.0, lo, hi, p);
                EXPECT_NEAR(s.value, exact, 1e-2 * exact) << d << " " << p;
            }
            // |grad r^{2-d}| = (d-2) r^{1-d}
            const auto gsn = sampled_lorentz_norm(u, SampledQuantity::gradient, lo, hi, {2, 1});
            const double ge = radial_power_norm(d, d - 2.0, d - 1.0, lo, hi, 2);
            EXPECT_NEAR(gsn.value, ge, 1e-2 * ge);
        }
    }
}

TEST(SampledLorentz, ThirdDerivativeOfRadialMode) {
    // fourth-order differences against plain central differences of the exact Hessian
    SpectralField u(4, 0.5, 2.0, 1);
    u.cb(1, 2) = 1;
    const double x[4] = {0.3, 0.4, -0.5, 0.6};
    const double r = std::sqrt(0.09 + 0.16 + 0.25 + 0.36);
    const double v = detail::third_derivative_norm(u, x, r);
    const double h = 1e-4;
    double s = 0;
    for (int k = 0; k < 4; ++k) {
        double xp[4] = {x[0], x[1], x[2], x[3]}, xm[4] = {x[0], x[1], x[2], x[3]};
        xp[k] += h;
        xm[k] -= h;
        const auto Hp = evaluate(u, xp).H, Hm = evaluate(u, xm).H;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += std::pow((Hp[i][j] - Hm[i][j]) / (2 * h), 2);
    }
    EXPECT_NEAR(v, std::sqrt(s), 1e-6 * v);
}

TEST(LorentzScaling, PureBModesSlope) {
    // lowest admissible b-modes r^{-(d-1)} Y_1 decay exactly at the stated rate
    Rng g(4);
    SpectralField u(4, 0.01, 4.0, 1);
    for (int k = 1; k <= 4; ++k) u.cb(1, k) = g.normal();
    const auto c = verify_lorentz_scaling("lorentz_l2_gen_d", u, 0.3);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(std::get<double>(c.params.at("slope")), 1.0, 0.1);
    EXPECT_NEAR(std::get<double>(c.params.at("explicit_constant")), 128 * std::sqrt(5.0), 1e-12);
    // higher b-modes only steepen the decay
    FieldOptions o;
    o.only_b = true;
    o.no_flux = true;
    const auto w = verify_lorentz_scaling("lorentz_l2_gen_d", random_field(g, 4, 0.05, 4.0, 4, o), 0.3);
    EXPECT_TRUE(w.pass);
    EXPECT_GE(std::get<double>(w.params.at("slope")), 1.0);
}

TEST(LorentzScaling, ZeroField) {
    const SpectralField z(4, 0.1, 4.0, 3);
    for (const auto& id : lorentz_scaling_ids()) {
        const auto c = verify_lorentz_scaling(id, z, 0.4);
        EXPECT_EQ(c.lhs, 0.0);
        EXPECT_EQ(c.rhs, 0.0);
        EXPECT_TRUE(c.pass) << id;
    }
}

TEST(LorentzScaling, AllTheoremsOnRandomFields) {
    Rng g(5);
    for (int d : {3, 4})
        for (const auto& id : lorentz_scaling_ids()) {
            FieldOptions o;
            o.no_flux = true;
            const auto u = random_field(g, d, 0.1, 4.0, id == "d3_l21" ? 2 : 4, o);
            const auto c = verify_lorentz_scaling(id, u, 0.3);
            EXPECT_TRUE(c.pass) << d << " " << id << " " << c.lhs << " " << c.rhs;
            EXPECT_GE(std::get<double>(c.params.at("slope")), 0.85 * std::get<double>(c.params.at("expected_exponent")));
        }
}

TEST(LorentzScaling, AbsoluteBoundDim4) {
    Rng g(6);
    for (int rep = 0; rep < 4; ++rep) {
        FieldOptions o;
        o.no_flux = true;
        o.adversarial = rep % 2;
        const auto u = random_field(g, 4, 0.1, g.uniform(2.0, 6.0), 4, o);
        const auto c = verify_lorentz_scaling("lorentz_l2_gen_d", u, g.uniform(0.26, 0.6));
        EXPECT_TRUE(c.pass);
        EXPECT_LT(c.lhs, c.rhs);
    }
}

TEST(LorentzScaling, Errors) {
    Rng g(7);
    auto u = random_field(g, 4, 0.1, 4.0, 3);
    EXPECT_THROW(verify_lorentz_scaling("lorentz_l2_gen_d", u, 0.3), precondition_error);
    EXPECT_NO_THROW(verify_lorentz_scaling("dirichlet_dim_arbitraire", u, 0.3));
    EXPECT_THROW(verify_lorentz_scaling("dirichlet_dim_arbitraire", random_field(g, 4, 0.5, 4.0, 3), 0.3), precondition_error);
    EXPECT_THROW(verify_lorentz_scaling("dirichlet_dim_arbitraire", u, 1.5), precondition_error);
    EXPECT_THROW(verify_lorentz_scaling("no_such", u, 0.3), registry_error);
}
