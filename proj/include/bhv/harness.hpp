#ifndef BHV_HARNESS_HPP
#define BHV_HARNESS_HPP

/// @file harness.hpp
/// Named verification suites, the lemma-id registry and JSON reports.
///
/// Random loops are folded per lemma id (and per dimension or exponent where
/// relevant): the report keeps the worst instance, with `instances` and
/// `failures` added to its params.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include "bhv/annulus.hpp"
#include "bhv/annulus_bounds.hpp"
#include "bhv/calculus.hpp"
#include "bhv/harmonics.hpp"
#include "bhv/lorentz.hpp"
#include "bhv/poisson.hpp"
#include "bhv/quadrature.hpp"
#include "bhv/specfun.hpp"
#include "bhv/stability.hpp"

namespace bhv {

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Zero in dim, grid, tol and samples selects the suite default.
struct SuiteConfig {
    int dim = 0;                 // restricts the field dimension of multi-dimension suites
    int trunc = 6;               // max harmonic degree of random fields
    int grid = 0;                // angular quadrature level
    std::uint64_t seed = 7;
    double tol = 0.0;            // tolerance of the harness cross-checks
    int samples = 0;             // size of every random ensemble
    double inner = 1.0;          // Rellich annulus B_outer \ B_inner
    double outer = std::exp(50.0);
};

struct SuiteReport {
    std::string suite;
    SuiteConfig config;
    std::vector<LemmaCheck> checks;
    int passed = 0;
    int failed = 0;
    double wall_time = 0.0;
    bool ok() const { return failed == 0; }
};

// ---------------------------------------------------------------------------
// Registry

struct LemmaInfo {
    std::string id;
    std::string topic;
};

inline const std::vector<LemmaInfo>& lemma_registry() {
    static const std::vector<LemmaInfo> r = {
        {"constant_j01", "first zero of J_0"},
        {"constant_j_half", "first zero of J_{1/2} equals pi"},
        {"constant_j11", "first zero of J_1"},
        {"constant_ball_lambda1", "first Dirichlet eigenvalue of the unit ball in R^4 from Bessel roots"},
        {"constant_ball_lambda1_ritz", "Bessel eigenvalue against a Rayleigh-Ritz route"},
        {"constant_gamma1", "weighted gradient constant Gamma_1"},
        {"constant_gamma1_sq", "Gamma_1 squared"},
        {"constant_lambda4", "pointwise constant Lambda_4 = 8 sqrt30 / pi"},
        {"constant_lambert_2w", "2 W(1/(2 sqrt2))"},
        {"constant_lambert_w32", "W(3/2)"},
        {"constant_exp_w32", "exp W(3/2)"},
        {"constant_lambert_ratio", "2 / (3 W(9/4))"},
        {"constant_lambert_margin", "1 - 8/(9 W(9/4))"},
        {"constant_lambert_margin_bound", "1 - 8/(9 W(9/4)) > 1/50"},
        {"constant_lambert_identity", "W(x) e^{W(x)} = x"},
        {"constant_conformal_threshold", "conformal-class threshold from W(1)"},
        {"constant_gamma_w", "norm-equivalence constant Gamma_W"},
        {"constant_sobolev_c42", "improved Sobolev constant 8 2^{3/4} < 14"},
        {"constant_averaging_c4", "averaging constant 2^{d/4} sqrt beta(d) at d = 4"},
        {"constant_weak_norm", "weak L^2 norm of |x|^{-2} on R^4, stated formula"},
        {"constant_rellich_a_threshold", "log(b/a) threshold of the Hardy-Rellich bound"},
        {"constant_rellich_b_threshold", "log(b/a) threshold of the gradient-Rellich bound"},
        {"harmonic_dimension", "dimension of degree-n spherical harmonics"},
        {"harmonic_orthonormality", "Gram matrix of the harmonic basis under sphere quadrature"},
        {"harmonic_addition", "addition theorem sum_k Y_{n,k}^2 = N(d, n)"},
        {"ipp_hessien_sphere", "Bochner identity for the covariant Hessian on the sphere"},
        {"est_below_hessian_harmonic2", "coefficient lower bound for the Hessian norm"},
        {"l2_annulus", "exact L^2 norm of a harmonic expansion"},
        {"dirichlet_annulus", "exact Dirichlet energy of a harmonic expansion"},
        {"dirichlet_weighted", "exact weighted Dirichlet energy"},
        {"hessian_annulus", "exact Hessian norm"},
        {"flux_condition", "radius independence of the flux"},
        {"series_c3", "closed form of the d = 3 coefficient series as stated"},
        {"series_c3_corrected", "corrected closed form of the d = 3 coefficient series"},
        {"series_c4", "closed form of the d = 4 coefficient series"},
        {"dirichlet_comp", "dyadic Dirichlet comparison"},
        {"dirichlet_comp_weighted0", "weighted Dirichlet comparison"},
        {"dirichlet_comp2", "second Dirichlet comparison"},
        {"dirichlet_comp_weighted2", "second weighted comparison"},
        {"dirichlet_weighted_typeI", "weighted comparison on B_{2r} \\ B_r"},
        {"dirichlet_comp3", "ball decay of the Dirichlet energy"},
        {"dirichlet_comp_weighted", "ball decay of the weighted energy"},
        {"function_comp_dyadic", "dyadic function comparison"},
        {"function_comp_dyadic2", "second dyadic function comparison"},
        {"no_flux_ineq", "coefficient lower bound without flux"},
        {"pointwise_harmonic_u", "pointwise bound on u - c"},
        {"pointwise_harmonic_Du", "pointwise bound on grad u"},
        {"pointwise_harmonic_D2u", "pointwise bound on D^2 u"},
        {"pointwise_harmonic_u_Du", "pointwise bound of u - c by grad u"},
        {"pointwise_harmonic_Du_D2u", "pointwise bound of grad(u - lambda.x) by D^2 u"},
        {"lorentz_l2_gen_d", "Lorentz decay of harmonic functions"},
        {"dirichlet_dim_arbitraire", "Lorentz decay of the gradient"},
        {"lorentz_l2_hessian", "Lorentz decay of the Hessian"},
        {"pre_dirichlet_arbitraire", "Lorentz decay, gradient variant"},
        {"lorentz_l2_grad_hessian", "Lorentz decay, gradient and Hessian"},
        {"d2_l21", "L^{2,1} decay of the Hessian"},
        {"d3_l21", "L^{2,1} decay of third derivatives"},
        {"lorentz_l21_closed_form", "L^{2,1} closed form against the piecewise definition"},
        {"lorentz_l21_definition", "L^{2,1} closed form against adaptive quadrature of f_**"},
        {"ineq_fund", "combinatorial inequality on increasing sequences"},
        {"lorentz_stability_general", "power lemma for Lorentz quasi-norms"},
        {"lorentz_power_seminorm", "squaring lemma seminorm equality"},
        {"duality_l21_l2inf", "L^{2,1} / L^{2,inf} duality pairing"},
        {"improved_sobolev", "improved Sobolev inequality into L^{4,2}"},
        {"dyadic_decomposition", "dyadic decomposition norm bound"},
        {"lp_infty_weight", "weak norm of a power weight"},
        {"averaging_l21", "averaging lemma in L^{2,1}"},
        {"averaging_l2q", "averaging lemma in L^{2,q}"},
        {"elementary_gradient_estimate", "shell gradient bound with 1/j_{1,1}"},
        {"dyadic_gradient", "weighted gradient lemma with Gamma_1"},
        {"weighted_modified_dirichlet", "weighted Dirichlet lemma with the fitted constant"},
        {"lemmae3_exterior", "exterior decay lemma"},
        {"lemmae3_interior", "interior decay lemma"},
        {"dyadic_main_theorem_u", "dyadic iteration, divergence form"},
        {"dyadic_main_theorem_grad_u", "dyadic iteration, gradient"},
        {"dyadic_main_theorem_grad_u_over_x", "dyadic iteration, gradient over |x|"},
        {"dyadic_main_theorem_stability_u", "fitted iteration constant stability, divergence form"},
        {"dyadic_main_theorem_stability_grad_u", "fitted iteration constant stability, gradient"},
        {"dyadic_main_theorem_stability_grad_u_over_x", "fitted iteration constant stability, gradient over |x|"},
        {"whitney_line1", "extension Hessian by Hessian and weighted gradient"},
        {"whitney_line2", "extension Hessian by Hessian and L^4 gradient"},
        {"whitney_line3", "extension weighted gradient by weighted gradient"},
        {"whitney_line4", "extension weighted gradient by Hessian and L^4 gradient"},
        {"whitney_line5", "extension L^{4,2} gradient by Hessian and weighted gradient"},
        {"whitney_line6", "extension L^{4,2} gradient by Hessian and L^4 gradient"},
        {"whitney_line7", "extension L^4 gradient by Hessian and weighted gradient"},
        {"whitney_line8", "extension L^4 gradient by Hessian and L^4 gradient"},
        {"whitney_norm_equivalence", "equivalence of the three norms with Gamma_W"},
        {"dyadic_poincare_wirtinger", "Poincare-Wirtinger constant 4/(d-2)^2 on B_2 \\ B_1"},
        {"dyadic_poincare_wirtinger_mode", "per-degree Neumann eigenvalue bound"},
        {"cutoff_sup", "cutoff profile derivative bound"},
        {"cutoff_gradient", "cutoff gradient bound 2/r"},
        {"cutoff_hessian", "cutoff Hessian bound 4/(r|x|)"},
        {"poincare_sobolev", "fitted Poincare-Sobolev constant stability"},
        {"rellich_hardy", "Hardy-Rellich lower bound on a long annulus"},
        {"rellich_gradient", "gradient Rellich lower bound on a long annulus"},
        {"rellich_weighted", "weighted Rellich constant positive and refinement-stable"},
        {"rellich_mode_coupling", "harmonic modes decouple in the Rellich forms"},
        {"neck_positivity_assembly", "neck positivity from the three Rellich bounds"},
        {"neck_positivity_split", "coefficient split of the neck positivity argument"},
        {"neck_stability", "weighted stability inequality at a constant map"},
        {"pohozaev_flux_value", "Pohozaev flux of x/|x| equals 9 pi^2"},
        {"pohozaev_flux_constancy", "Pohozaev flux is radius independent"},
        {"pohozaev_identity", "Pohozaev identity for ball-regular biharmonic maps"},
        {"second_variation_fd", "second variation against finite differences of the energy"},
        {"second_variation_routes", "closed-form second variation against the direct route"},
        {"second_variation_constant_map", "second variation at a constant map is the bilaplace energy"},
        {"second_variation_lower_bound", "lower bound on the second variation with a fitted constant"},
        {"numeric_failure", "a check that threw instead of returning"},
    };
    return r;
}

inline bool is_registered(const std::string& id) {
    const auto& r = lemma_registry();
    return std::any_of(r.begin(), r.end(), [&](const LemmaInfo& i) { return i.id == id; });
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n = {"constants", "harmonics", "annulus-norms", "lorentz", "averaging", "poisson-wente",
                                               "whitney", "rellich", "pohozaev", "second-variation", "all"};
    return n;
}

// ---------------------------------------------------------------------------
// Helpers

namespace detail {

/// Folds repeated checks of one id into the worst instance.
class Fold {
public:
    void add(LemmaCheck c, const Params& tag = {}) {
        std::string key = c.lemma_id;
        for (const auto& [k, v] : tag) key += "|" + k + "=" + std::visit([](const auto& x) { return to_text(x); }, v);
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_[key] = slots_.size();
            slots_.push_back({std::move(c), tag, 1, 0});
            auto& s = slots_.back();
            s.failures = s.worst.pass ? 0 : 1;
            return;
        }
        auto& s = slots_[it->second];
        ++s.instances;
        if (!c.pass) ++s.failures;
        if (worse(c, s.worst)) s.worst = std::move(c);
    }

    void flush(std::vector<LemmaCheck>& out) {
        for (auto& s : slots_) {
            LemmaCheck c = std::move(s.worst);
            for (const auto& [k, v] : s.tag) c.params[k] = v;
            c.params["instances"] = static_cast<long long>(s.instances);
            c.params["failures"] = static_cast<long long>(s.failures);
            c.pass = s.failures == 0;
            out.push_back(std::move(c));
        }
        slots_.clear();
        index_.clear();
    }

private:
    struct Slot {
        LemmaCheck worst;
        Params tag;
        int instances = 0, failures = 0;
    };

    static std::string to_text(double x) { return std::to_string(x); }
    static std::string to_text(long long x) { return std::to_string(x); }
    static std::string to_text(const std::string& x) { return x; }

    static double badness(const LemmaCheck& c) {
        const double b = c.rhs != 0.0 ? (c.lhs - c.rhs) / std::abs(c.rhs) : c.lhs - c.rhs;
        return std::isnan(b) ? INFINITY : b;
    }

    static bool worse(const LemmaCheck& a, const LemmaCheck& b) {
        if (a.pass != b.pass) return !a.pass;
        return badness(a) > badness(b);
    }

    std::vector<Slot> slots_;
    std::map<std::string, std::size_t> index_;
};

inline int count_or(const SuiteConfig& c, int dflt) { return c.samples > 0 ? c.samples : dflt; }
inline double tol_or(const SuiteConfig& c, double dflt) { return c.tol > 0 ? c.tol : dflt; }
inline int level_or(const SuiteConfig& c, int dflt) { return c.grid > 0 ? c.grid : dflt; }

inline std::vector<int> dims(const SuiteConfig& c, std::vector<int> dflt, const std::string& suite) {
    if (c.dim == 0) return dflt;
    if (std::find(dflt.begin(), dflt.end(), c.dim) == dflt.end()) {
        std::string s;
        for (int d : dflt) s += (s.empty() ? "" : ", ") + std::to_string(d);
        throw usage_error("suite " + suite + " supports dim in {" + s + "}");
    }
    return {c.dim};
}

inline std::array<double, 4> point_at(Rng& g, int d, double r) {
    std::array<double, 4> x{0, 0, 0, 0};
    double s = 0;
    for (int i = 0; i < d; ++i) {
        x[i] = g.normal();
        s += x[i] * x[i];
    }
    for (int i = 0; i < d; ++i) x[i] *= r / std::sqrt(s);
    return x;
}

inline double rel_gap(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

// Lorentz (2,1) norm by adaptive quadrature of t^{-1/2} f_**(t).
inline double l21_by_quadrature(const Rearrangement& f) {
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
    std::vector<double> pts{0.0};
    pts.insert(pts.end(), f.ends.begin(), f.ends.end());
    double s = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        s += ts.integrate([&](double t) { return std::pow(t, -0.5) * F(t) / t; }, pts[i], pts[i + 1]);
    s += ts.integrate([&](double t) { return std::pow(t, -0.5) * F(M) / t; }, M, inf);
    return s;
}

inline PiecewisePoly random_bump(Rng& g, double lo, double hi, int knots = 8) {
    std::vector<double> x, v, s;
    for (int q = 0; q <= knots; ++q) {
        const double y = static_cast<double>(q) / knots;
        x.push_back(lo + (hi - lo) * y);
        const double a = g.normal(), b = g.normal();
        v.push_back(q == 0 || q == knots ? 0.0 : a * std::pow(y * (1 - y), 2));
        s.push_back(q == 0 || q == knots ? 0.0 : b / (hi - lo));
    }
    return PiecewisePoly::hermite(x, v, s);
}

inline RadialSource random_shell_source(Rng& g, double lo, double hi, int modes = 3) {
    RadialSource f;
    f.d = 4;
    for (int i = 0; i < modes; ++i) {
        const int n = g.integer(0, 8);
        const int k = g.integer(1, (n + 1) * (n + 1));
        f.add(n, k, random_bump(g, lo, hi));
    }
    return f;
}

// supported in B_{2^-j}, mode 0 corrected to zero flux
inline RadialSource zero_flux_source(Rng& g, int j) {
    RadialSource f;
    f.d = 4;
    for (int i = 0; i < 4; ++i) {
        const int n = i == 0 ? 0 : g.integer(0, 6);
        const int k = g.integer(1, (n + 1) * (n + 1));
        const int k1 = g.integer(j + 1, j + 4);
        const double c1 = g.normal();
        const int k2 = g.integer(j + 1, j + 4);
        const double c2 = g.normal();
        f.add(n, k, shell_profile({{k1, c1}, {k2, c2}}, 4));
    }
    const auto b = shell_profile({{j + 2, 1.0}}, 4);
    RadialSource unit;
    unit.d = 4;
    unit.add(0, 1, b);
    f.add(0, 1, (-source_flux(f) / source_flux(unit)) * b);
    return f;
}

inline std::vector<RadialSource> multishell_ensemble(Rng g, int count, SourceOptions opt = {}) {
    std::vector<RadialSource> out;
    for (int i = 0; i < count; ++i) out.push_back(random_multishell_source(g, 4, opt));
    return out;
}

inline void guarded(std::vector<LemmaCheck>& out, const std::string& group, const std::function<void()>& body) {
    try {
        body();
    } catch (const usage_error&) {
        throw;
    } catch (const std::exception& e) {
        LemmaCheck c;
        c.lemma_id = "numeric_failure";
        c.lhs = INFINITY;
        c.rhs = 0.0;
        c.margin = -INFINITY;
        c.pass = false;
        c.params = {{"group", group}, {"what", std::string(e.what())}};
        out.push_back(std::move(c));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Suites.  Each group draws from its own stream of the configured seed.

namespace suites {

inline std::vector<LemmaCheck> constants(const SuiteConfig&) {
    namespace K = bhv::constants;
    std::vector<LemmaCheck> out;
    detail::guarded(out, "constants", [&] {
        const double w32 = lambert_w(1.5), w94 = lambert_w(2.25);
        const double g1 = K::gamma1();
        out.push_back(make_equality("constant_j01", K::j01(), 2.4048, 1e-3));
        out.push_back(make_equality("constant_j_half", bessel_first_zero(0.5), pi, 1e-10));
        out.push_back(make_equality("constant_j11", K::j11(), 3.83170, 1e-4));
        out.push_back(make_equality("constant_ball_lambda1", K::ball_lambda1(4), 14.681970, 1e-3));
        out.push_back(make_rel_equality("constant_ball_lambda1_ritz", ball_dirichlet_eigenvalue(), K::ball_lambda1(4), 1e-8));
        out.push_back(make_equality("constant_gamma1", g1, 6.1824966, 1e-6));
        out.push_back(make_equality("constant_gamma1_sq", g1 * g1, 38.223, 1e-2));
        out.push_back(make_equality("constant_lambda4", pointwise_lambda(4), 8 * std::sqrt(30.0) / pi, 1e-10));
        out.push_back(make_equality("constant_lambert_2w", 2 * lambert_w(1 / (2 * std::sqrt(2.0))), 0.5398, 1e-3));
        out.push_back(make_equality("constant_lambert_w32", w32, 0.72586, 1e-4));
        out.push_back(make_equality("constant_exp_w32", std::exp(w32), 2.06651, 1e-4));
        out.push_back(make_equality("constant_lambert_ratio", 2 / (3 * w94), 0.7344, 1e-3));
        out.push_back(make_equality("constant_lambert_margin", 1 - 8 / (9 * w94), 0.020760, 1e-6));
        out.push_back(make_check("constant_lambert_margin_bound", 1.0 / 50, 1 - 8 / (9 * w94), 0.0));
        for (double x : {0.1, 1.0, 1.5, 2.25, 10.0})
            out.push_back(make_rel_equality("constant_lambert_identity", lambert_w(x) * std::exp(lambert_w(x)), x, 1e-14, 1e-300,
                                            {{"x", x}}));
        out.push_back(make_equality("constant_conformal_threshold", K::conformal_threshold_log(), 0.5848015076, 1e-9));
        out.push_back(make_equality("constant_gamma_w", K::gamma_w(), 98705.182, 0.01));
        out.push_back(make_check("constant_sobolev_c42", K::improved_sobolev_c42(), 14.0, 0.0));
        out.push_back(make_equality("constant_averaging_c4", K::averaging_constant(4), 2 * pi * std::sqrt(2.0), 1e-12));
        out.push_back(make_equality("constant_weak_norm", weak_power_norm_formula(4, 2), 2 * pi * std::sqrt(2.0), 1e-12));
        out.push_back(make_equality("constant_rellich_a_threshold", rellich_a_threshold(), 49.19999, 1e-4));
        out.push_back(make_equality("constant_rellich_b_threshold", rellich_b_threshold(), 7.141297, 1e-6));
    });
    return out;
}

inline std::vector<LemmaCheck> harmonics(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    const auto ds = detail::dims(cfg, {3, 4}, "harmonics");
    const int N = cfg.trunc;
    const double tol = detail::tol_or(cfg, 1e-9);
    detail::guarded(out, "basis", [&] {
        Rng g(cfg.seed, 101);
        for (int d : ds) {
            const auto& B = HarmonicBasis::get(d, N);
            double dim_gap = 0;
            for (int n = 0; n <= N; ++n) {
                const double closed = (2.0 * n + d - 2) / (n + d - 2) * std::tgamma(n + d - 1.0) / (std::tgamma(n + 1.0) * std::tgamma(d - 1.0));
                dim_gap = std::max({dim_gap, std::abs(closed - static_cast<double>(dim_harmonics(d, n))),
                                    std::abs(static_cast<double>(B.count(n)) - static_cast<double>(dim_harmonics(d, n)))});
            }
            out.push_back(make_equality("harmonic_dimension", dim_gap, 0.0, 1e-9, {{"d", static_cast<long long>(d)}}));

            AngularQuadrature Q(d, detail::level_or(cfg, N + 1));
            const double beta = sphere_area(d);
            std::vector<std::vector<double>> val;
            for (int n = 0; n <= N; ++n)
                for (int k = 1; k <= B.count(n); ++k) {
                    std::vector<double> v;
                    for (const auto& w : Q.nodes()) v.push_back(B.eval(n, k, w.data()));
                    val.push_back(std::move(v));
                }
            double gram = 0;
            for (std::size_t i = 0; i < val.size(); ++i)
                for (std::size_t j = 0; j < val.size(); ++j) {
                    double v = 0;
                    for (std::size_t q = 0; q < Q.size(); ++q) v += Q.weight(q) * val[i][q] * val[j][q];
                    gram = std::max(gram, std::abs(v - (i == j ? beta : 0.0)) / beta);
                }
            out.push_back(make_equality("harmonic_orthonormality", gram, 0.0, tol, {{"d", static_cast<long long>(d)}}));

            double add = 0;
            for (int rep = 0; rep < detail::count_or(cfg, 100); ++rep) {
                const auto w = detail::point_at(g, d, 1.0);
                for (int n = 0; n <= N; ++n) {
                    double s = 0;
                    for (int k = 1; k <= B.count(n); ++k) s += std::pow(B.eval(n, k, w.data()), 2);
                    add = std::max(add, std::abs(s - static_cast<double>(dim_harmonics(d, n))) / static_cast<double>(dim_harmonics(d, n)));
                }
            }
            out.push_back(make_equality("harmonic_addition", add, 0.0, tol, {{"d", static_cast<long long>(d)}}));
        }
    });
    detail::guarded(out, "bochner", [&] {
        detail::Fold fold;
        for (int d : ds) {
            const auto& B = HarmonicBasis::get(d, N);
            AngularQuadrature Q(d, detail::level_or(cfg, N + 4));
            for (int n = 0; n <= N; ++n)
                for (int k = 1; k <= B.count(n); k += 2) {
                    const auto& P = B.compiled(n, k);
                    // covariant Hessian on the sphere = Pi D^2(P r^{-n}) Pi, Pi = I - w w^T
                    const double v = Q.integrate([&](const auto& w) {
                        Powers pw(w.data(), n);
                        double p = P.value(pw), gr[4], D[4][4];
                        for (int i = 0; i < d; ++i) gr[i] = P.grad(i, pw);
                        for (int i = 0; i < d; ++i)
                            for (int j = 0; j < d; ++j)
                                D[i][j] = P.hess(i, j, pw) - n * (gr[i] * w[j] + w[i] * gr[j]) - n * p * (i == j) +
                                          n * (n + 2.0) * p * w[i] * w[j];
                        double s = 0;
                        for (int i = 0; i < d; ++i)
                            for (int j = 0; j < d; ++j) {
                                double c = 0;
                                for (int a = 0; a < d; ++a)
                                    for (int b = 0; b < d; ++b) c += ((i == a) - w[i] * w[a]) * D[a][b] * ((b == j) - w[b] * w[j]);
                                s += c * c;
                            }
                        return s;
                    });
                    fold.add(make_rel_equality("ipp_hessien_sphere", v, bochner_hessian_integral(d, n), tol, 1.0,
                                               {{"n", static_cast<long long>(n)}, {"k", static_cast<long long>(k)}}),
                             {{"d", static_cast<long long>(d)}});
                }
        }
        fold.flush(out);
    });
    detail::guarded(out, "hessian_bound", [&] {
        Rng g(cfg.seed, 102);
        detail::Fold fold;
        for (int d : ds)
            for (int rep = 0; rep < detail::count_or(cfg, 40); ++rep) {
                FieldOptions opt;
                opt.adversarial = rep % 2 == 0;
                const double b = g.uniform(1.05, 30.0);
                fold.add(verify_hessian_lower_bound(random_field(g, d, 1.0, b, N, opt)), {{"d", static_cast<long long>(d)}});
            }
        fold.flush(out);
    });
    return out;
}

/// Exact norms against tensor quadrature, flux and the coefficient series.
inline std::vector<LemmaCheck> annulus_spectral(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    const auto ds = detail::dims(cfg, {3, 4}, "annulus-norms");
    const double tol = detail::tol_or(cfg, 1e-7);
    detail::guarded(out, "quadrature", [&] {
        Rng g(cfg.seed, 201);
        detail::Fold fold;
        const int level = cfg.grid > 0 ? cfg.grid : -1;
        for (int d : ds)
            for (int rep = 0; rep < detail::count_or(cfg, 50); ++rep) {
                const int N = g.integer(0, cfg.trunc);
                const double a = g.uniform(0.2, 1.0), b = a * g.uniform(1.5, 5.0);
                const auto u = random_field(g, d, a, b, N);
                const auto Q = quadrature_norms(u, 24, level);
                const Params tag{{"d", static_cast<long long>(d)}};
                fold.add(make_rel_equality("l2_annulus", Q.l2, l2_norm_sq(u), tol), tag);
                fold.add(make_rel_equality("dirichlet_annulus", Q.dirichlet, dirichlet_norm_sq(u), tol), tag);
                fold.add(make_rel_equality("dirichlet_weighted", Q.weighted_dirichlet, weighted_dirichlet_norm_sq(u), tol), tag);
                fold.add(make_rel_equality("hessian_annulus", Q.hessian, hessian_norm_sq(u), tol), tag);
            }
        fold.flush(out);
    });
    detail::guarded(out, "flux", [&] {
        Rng g(cfg.seed, 202);
        const double ftol = detail::tol_or(cfg, 1e-10);
        for (int d : ds) {
            const auto u = random_field(g, d, 0.5, 2.0, std::min(cfg.trunc, 5));
            const double exact = flux(u, 1.0);
            double gap = 0;
            for (double r : {0.55, 0.7, 1.0, 1.6, 1.95}) gap = std::max(gap, std::abs(flux_quadrature(u, r) - exact));
            out.push_back(make_equality("flux_condition", gap, 0.0, ftol, {{"d", static_cast<long long>(d)}, {"flux", exact}}));
        }
    });
    detail::guarded(out, "series", [&] {
        const double stol = detail::tol_or(cfg, 1e-10);
        detail::Fold fold;
        for (int i = 1; i <= 9; ++i) {
            const double t = i / 10.0;
            const int terms = series_terms_for(t);
            const Params p{{"t", t}};
            fold.add(make_rel_equality("series_c3", series_c3_closed(t), series_c3_partial(t, terms), stol, 1e-300, p));
            fold.add(make_rel_equality("series_c3_corrected", series_c3_exact(t), series_c3_partial(t, terms), stol, 1e-300, p));
            fold.add(make_rel_equality("series_c4", series_c4_closed(t), series_c4_partial(t, terms), stol, 1e-300, p));
        }
        fold.flush(out);
    });
    return out;
}

/// Comparison lemmas and the no-flux coefficient bound on randomized instances.
inline std::vector<LemmaCheck> comparison(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    const auto ds = detail::dims(cfg, {3, 4, 5, 6, 7, 8}, "annulus-norms");
    detail::guarded(out, "comparison", [&] {
        Rng g(cfg.seed, 203);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 100); ++rep) {
            const int d = ds[rep % ds.size()];
            const double a = 1.0;
            const double b = rep % 4 == 0 ? 9.0 / 4 : g.uniform(9.0 / 4, 20.0);
            FieldOptions opt;
            opt.adversarial = rep % 2 == 0;
            const auto u = random_field(g, d, a, b, cfg.trunc, opt);
            const double r = a * std::exp(g.uniform(0, 1) * std::log(b / a));
            const double s = r * std::exp(g.uniform(0, 1) * std::log(b / r));
            const double r2 = std::exp(g.uniform(0, 1) * std::log(b / 2));
            for (const auto& id : comparison_lemma_ids()) {
                if (id == "dirichlet_weighted_typeI")
                    fold.add(verify_comparison_lemma(id, u, r2, 2 * r2));
                else
                    fold.add(verify_comparison_lemma(id, u, r, s));
            }
        }
        fold.flush(out);
    });
    detail::guarded(out, "no_flux", [&] {
        Rng g(cfg.seed, 204);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 100); ++rep) {
            const int d = ds[rep % ds.size()];
            FieldOptions opt;
            opt.adversarial = true;
            opt.no_flux = true;
            const double b = rep % 2 == 0 ? 9.0 / 4 : g.uniform(2.25, 10.0);
            auto v = random_field(g, d, 1.0, b, std::max(cfg.trunc, 1), opt);
            if (d >= 5) v.cb(0, 1) = g.normal();
            fold.add(verify_coefficient_lower_bound(v));
        }
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> pointwise(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    const auto ds = detail::dims(cfg, {3, 4}, "annulus-norms");
    detail::guarded(out, "pointwise", [&] {
        Rng g(cfg.seed, 205);
        detail::Fold fold;
        for (int d : ds)
            for (int rep = 0; rep < detail::count_or(cfg, 30); ++rep) {
                FieldOptions o;
                o.no_flux = true;
                o.adversarial = rep % 2;
                o.only_b = rep % 5 == 0;
                const double a = g.uniform(0.2, 1.0), b = a * g.uniform(2.25, 60.0);
                const auto u = random_field(g, d, a, b, cfg.trunc, o);
                const double r = std::exp(g.uniform(std::log(a) + 1e-3, std::log(b) - 1e-3));
                const auto x = detail::point_at(g, d, r);
                for (const auto& id : pointwise_theorem_ids()) fold.add(verify_pointwise_bound(id, u, x), {{"d", static_cast<long long>(d)}});
            }
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> annulus_norms(const SuiteConfig& cfg) {
    auto out = annulus_spectral(cfg);
    for (auto&& part : {comparison(cfg), pointwise(cfg)}) out.insert(out.end(), part.begin(), part.end());
    return out;
}

inline std::vector<LemmaCheck> lorentz(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "lorentz");
    detail::guarded(out, "l21", [&] {
        Rng g(cfg.seed, 301);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 30); ++rep) {
            const auto R = rearrangement(random_simple_function(g, 4, 0.5, 2.0, 7));
            const double closed = lorentz_p1_closed_form(R, 2.0);
            fold.add(make_rel_equality("lorentz_l21_closed_form", lorentz_norm(R, {2, 1}), closed, detail::tol_or(cfg, 1e-12)));
            fold.add(make_rel_equality("lorentz_l21_definition", detail::l21_by_quadrature(R), closed, detail::tol_or(cfg, 1e-10)));
        }
        fold.flush(out);
    });
    detail::guarded(out, "ineq_fund", [&] {
        Rng g(cfg.seed, 302);
        detail::Fold fold;
        fold.add(verify_ineq_fund({1, 2}, {1, 1}));
        for (int rep = 0; rep < detail::count_or(cfg, 10000); ++rep) {
            const int n = g.integer(1, 6);
            std::vector<double> cs(n), D(n);
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                acc += g.uniform(1e-3, 2.0);
                cs[i] = acc;
                D[i] = g.uniform(0, 3.0);
            }
            fold.add(verify_ineq_fund(cs, D));
        }
        fold.flush(out);
    });
    detail::guarded(out, "power", [&] {
        Rng g(cfg.seed, 303);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 20); ++rep) {
            const auto f = random_simple_function(g, 4, 0.5, 2.0, 6);
            const auto c = verify_power_stability(f, 2.0, {2, 1});
            fold.add(make_check("lorentz_power_seminorm", std::get<double>(c.params.at("seminorm_rel_gap")), detail::tol_or(cfg, 1e-10), 0.0));
            fold.add(c);
        }
        fold.flush(out);
    });
    detail::guarded(out, "duality", [&] {
        Rng g(cfg.seed, 304);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 50); ++rep) {
            const auto a = random_simple_function(g, 4, 0.5, 2.0, 6);
            const auto b = random_simple_function(g, 4, 0.5, 2.0, 6);
            fold.add(duality_pairing_check(a, b));
        }
        fold.flush(out);
    });
    detail::guarded(out, "dyadic", [&] {
        Rng g(cfg.seed, 305);
        detail::Fold fold;
        for (int rep = 0; rep < detail::count_or(cfg, 30); ++rep) fold.add(verify_dyadic_decomposition_norm(random_simple_function(g, 4, 0.5, 2.0, 8), {4, 2}));
        fold.flush(out);
    });
    detail::guarded(out, "sobolev", [&] {
        detail::Fold fold;
        for (int k = 0; k < detail::count_or(cfg, 10); ++k) {
            // u = (1 - (r/R)^2)^m on B_R, midpoint cells in r
            const double R = 0.5 + 0.3 * (k % 10), m = 2 + k % 4;
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
            fold.add(improved_sobolev_check(s, std::sqrt(grad2), 4, 2.0, 14.0));
        }
        fold.flush(out);
    });
    detail::guarded(out, "power_weight", [&] {
        out.push_back(make_equality("lp_infty_weight", power_weight_norm(4, -2, 0, inf, {2, inf}).value, pi * std::sqrt(2.0), 1e-12,
                                    {{"d", 4LL}, {"alpha", 2.0}}));
        detail::Fold fold;
        for (int d = 3; d <= 8; ++d)
            fold.add(make_rel_equality("lp_infty_weight", power_weight_norm(d, -1.5, 0, inf, {d / 1.5, inf}).value,
                                       weak_power_norm_formula(d, 1.5) * std::pow(d, -1.5 / d), 1e-12, 1e-300,
                                       {{"d", static_cast<long long>(d)}, {"alpha", 1.5}}));
        fold.flush(out);
    });
    detail::guarded(out, "scaling", [&] {
        Rng g(cfg.seed, 306);
        for (int d : {3, 4})
            for (const auto& id : lorentz_scaling_ids()) {
                FieldOptions o;
                o.no_flux = true;
                const auto u = random_field(g, d, 0.1, 4.0, id == "d3_l21" ? 2 : 4, o);
                auto c = verify_lorentz_scaling(id, u, 0.3);
                c.params["d"] = static_cast<long long>(d);
                out.push_back(std::move(c));
            }
    });
    return out;
}

inline std::vector<LemmaCheck> averaging(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    const auto ds = detail::dims(cfg, {2, 3, 4}, "averaging");
    detail::guarded(out, "averaging", [&] {
        Rng g(cfg.seed, 401);
        detail::Fold fold;
        for (int d : ds)
            for (double q : {1.0, 2.0})
                for (int rep = 0; rep < detail::count_or(cfg, 100); ++rep) {
                    const double lo = g.uniform(0.1, 1.0), hi = g.uniform(1.2, 4.0);
                    const int cells = g.integer(1, 10);
                    fold.add(verify_averaging_lemma(random_simple_function(g, d, lo, hi, cells), q),
                             {{"d", static_cast<long long>(d)}, {"q", q}});
                }
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> poisson_wente(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "poisson-wente");
    detail::guarded(out, "shell", [&] {
        Rng g(cfg.seed, 501);
        detail::Fold fold;
        for (int t = 0; t < detail::count_or(cfg, 30); ++t) {
            const int k = g.integer(0, 10);
            const Shell S = DyadicAnnuli::extended_in_ball(k);
            fold.add(verify_shell_gradient_bound(detail::random_shell_source(g, S.lo, S.hi), k));
        }
        fold.flush(out);
    });
    detail::guarded(out, "weighted", [&] {
        detail::Fold fold;
        for (const auto& f : detail::multishell_ensemble(Rng(cfg.seed, 502), detail::count_or(cfg, 30))) fold.add(verify_weighted_gradient_lemma(f));
        SourceOptions opt;
        opt.per_shell = 8;
        for (const auto& f : detail::multishell_ensemble(Rng(cfg.seed, 503), detail::count_or(cfg, 30), opt))
            fold.add(verify_weighted_dirichlet_lemma(f));
        fold.flush(out);
    });
    detail::guarded(out, "decay", [&] {
        Rng g(cfg.seed, 504);
        detail::Fold fold;
        const int reps = std::max(1, detail::count_or(cfg, 12) / 4);
        for (int j : {1, 2, 3, 5, 7})
            for (int t = 0; t < reps; ++t) {
                const auto f = detail::zero_flux_source(g, j);
                for (int k = 0; k < j; ++k) fold.add(verify_decay_lemma(f, j, k));
            }
        for (int j : {1, 3, 5})
            for (int t = 0; t < reps; ++t) {
                const Shell A = DyadicAnnuli::A(j);
                const auto f = detail::random_shell_source(g, A.lo, A.hi);
                for (int k = j + 1; k <= j + 8; ++k) fold.add(verify_decay_lemma(f, j, k));
            }
        fold.flush(out);
    });
    detail::guarded(out, "iteration", [&] {
        const auto ens = detail::multishell_ensemble(Rng(cfg.seed, 505), std::max(4, detail::count_or(cfg, 40)));
        detail::Fold fold;
        for (double alpha : {0.25, 0.5, 0.75})
            for (auto kind : {IterationKind::gradient, IterationKind::gradient_over_x}) {
                const auto c = verify_iteration_stability(ens, alpha, kind, 0.2);
                const double C = std::get<double>(c.params.at("C_full"));
                out.push_back(c);
                for (std::size_t i = 0; i < std::min<std::size_t>(5, ens.size()); ++i)
                    fold.add(verify_iteration_theorem(ens[i], alpha, C, kind), {{"alpha", alpha}});
            }
        const std::vector<RadialSource> half(ens.begin(), ens.begin() + std::max<std::size_t>(2, ens.size() * 3 / 5));
        for (double alpha : {0.25, 0.5, 0.75}) {
            const auto c = verify_iteration_stability(half, alpha, IterationKind::divergence, 0.2);
            const double C = std::get<double>(c.params.at("C_full"));
            out.push_back(c);
            for (std::size_t i = 0; i < std::min<std::size_t>(5, half.size()); ++i)
                fold.add(verify_iteration_theorem(half[i], alpha, C, IterationKind::divergence), {{"alpha", alpha}});
        }
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> whitney(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "whitney");
    const GridSpec spec{24, detail::level_or(cfg, 6)};
    detail::guarded(out, "extension", [&] {
        Rng g(cfg.seed, 601);
        detail::Fold fold;
        for (int t = 0; t < detail::count_or(cfg, 30); ++t) {
            const double a = g.uniform(0.1, 1.0), b = a * g.uniform(2.05, 6.0);
            const auto u = random_annulus_source(g, 4, a, b, std::min(cfg.trunc, 3));
            for (auto& c : verify_whitney_extension(u, a, b, spec)) fold.add(std::move(c));
            fold.add(verify_norm_equivalence(u, a, b, spec));
        }
        fold.flush(out);
    });
    detail::guarded(out, "poincare_wirtinger", [&] {
        for (int d = 3; d <= 10; ++d) out.push_back(verify_poincare_wirtinger_constant(d));
        // radial mode; for n >= 1 a constant profile is an exact Neumann solution
        detail::Fold fold;
        for (int d = 3; d <= 10; ++d) fold.add(verify_poincare_wirtinger(d, 0));
        fold.flush(out);
    });
    detail::guarded(out, "cutoff", [&] {
        out.push_back(verify_cutoff_sup());
        for (auto& c : verify_cutoff_estimate(1.0)) out.push_back(std::move(c));
    });
    detail::guarded(out, "poincare_sobolev", [&] {
        const auto f = estimate_poincare_sobolev(std::max(2, detail::count_or(cfg, 8)), cfg.seed);
        auto c = make_check("poincare_sobolev", std::abs(f.gamma_hat / f.gamma_half - 1), 0.1, 0.0,
                            {{"gamma_hat", f.gamma_hat}, {"gamma_half", f.gamma_half}, {"ensemble", static_cast<long long>(f.ensemble)}});
        c.pass = c.pass && f.gamma_hat > 0;
        out.push_back(std::move(c));
    });
    return out;
}

inline std::vector<LemmaCheck> rellich(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "rellich");
    const double a = cfg.inner, b = cfg.outer;
    detail::guarded(out, "hardy", [&] { out.push_back(verify_rellich_A(4, a, b)); });
    detail::guarded(out, "gradient", [&] { out.push_back(verify_rellich_B(4, a, b)); });
    for (double beta : {0.5, 1.0, 2.0})
        detail::guarded(out, "weighted", [&] { out.push_back(verify_rellich_C(4, a, b, beta)); });
    detail::guarded(out, "coupling", [&] {
        const auto r = rellich_cross_mode_coupling(3.0, 3, 1.0, detail::level_or(cfg, 8));
        out.push_back(make_check("rellich_mode_coupling", std::max(r.cross, r.diagonal), detail::tol_or(cfg, 1e-10), 0.0,
                                 {{"cross", r.cross}, {"diagonal_rel_gap", r.diagonal}}));
    });
    detail::guarded(out, "neck", [&] {
        const double L = std::log(b / a);
        detail::Fold fold;
        for (int n : {0, 1, 2}) {
            const auto cs = assemble_neck_positivity(a, b, n, 0.5);
            fold.add(cs[0], {{"n", static_cast<long long>(n)}});
            if (n == 0) out.push_back(cs[1]);
            fold.add(verify_neck_stability_constant_map(NeckWeight{0.5, 0.25 * std::exp(-L), 0.5}, n));
        }
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> pohozaev(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "pohozaev");
    const int level = detail::level_or(cfg, 8);
    detail::guarded(out, "identity_map", [&] {
        const auto u = identity_map_source();
        detail::Fold fold;
        for (double R : {0.3, 1.0, 4.0})
            fold.add(make_rel_equality("pohozaev_flux_value", pohozaev_flux(u, R, level), 9 * pi * pi, detail::tol_or(cfg, 1e-7), 1e-300, {{"R", R}}));
        fold.flush(out);
        out.push_back(verify_pohozaev_flux_constancy(u, {0.3, 1.0, 4.0}));
    });
    detail::guarded(out, "singular", [&] {
        Rng g(cfg.seed, 801);
        detail::Fold fold;
        for (int t = 0; t < std::max(1, detail::count_or(cfg, 3)); ++t) fold.add(verify_pohozaev_flux_constancy(annulus_biharmonic_source(g), {0.7, 1.0, 1.5}));
        fold.flush(out);
    });
    detail::guarded(out, "ball", [&] {
        Rng g(cfg.seed, 802);
        detail::Fold fold;
        fold.add(verify_pohozaev_identity(constant_map_source(), {0.5, 1.0}));
        for (int t = 0; t < std::max(1, detail::count_or(cfg, 5)); ++t)
            fold.add(verify_pohozaev_identity(ball_biharmonic_source(g), {0.3, 0.7, 1.0}, detail::tol_or(cfg, 1e-6)));
        fold.flush(out);
    });
    return out;
}

inline std::vector<LemmaCheck> second_variation(const SuiteConfig& cfg) {
    std::vector<LemmaCheck> out;
    detail::dims(cfg, {4}, "second-variation");
    const GridSpec spec{32, detail::level_or(cfg, 10)};
    std::optional<SphereMap> id;
    detail::guarded(out, "identity_map", [&] {
        const SphereMap& u = id.emplace(identity_sphere_map(1.0, 2.0, spec));
        Rng g(cfg.seed, 901);
        detail::Fold fold;
        std::vector<D2Terms> terms;
        for (int k = 0; k < detail::count_or(cfg, 10); ++k) {
            const auto w = random_tangent_field(g, u);
            fold.add(verify_second_variation(u, w, detail::tol_or(cfg, 1e-4)));
            fold.add(make_rel_equality("second_variation_routes", second_variation_direct(u, w), second_variation(u, w), 1e-8));
            terms.push_back(d2_terms(u, w));
        }
        const std::vector<D2Terms> half(terms.begin(), terms.begin() + std::max<std::size_t>(1, terms.size() / 2));
        const double C = fit_d2_constant(half, 0.5);
        for (const auto& t : terms) fold.add(verify_d2_lower_bound(t, 0.5, C));
        fold.flush(out);
    });
    detail::guarded(out, "constant_map", [&] {
        const SphereMap c = constant_sphere_map(id ? id->grid() : identity_sphere_map(1.0, 2.0, spec).grid());
        Rng g(cfg.seed, 902);
        detail::Fold fold;
        for (int k = 0; k < std::max(1, detail::count_or(cfg, 10) / 2); ++k) {
            const auto w = random_tangent_field(g, c);
            fold.add(make_rel_equality("second_variation_constant_map", second_variation(c, w), bilaplace_energy(w), 1e-12));
            fold.add(verify_second_variation(c, w, detail::tol_or(cfg, 1e-4)));
        }
        fold.flush(out);
    });
    return out;
}

}  // namespace suites

// ---------------------------------------------------------------------------
// Running and reporting

inline void validate(const SuiteConfig& c) {
    if (c.dim < 0 || c.dim > 10) throw usage_error("dim must be 0 (suite default) or in 2..10");
    if (c.trunc < 0 || c.trunc > 12) throw usage_error("trunc must be in 0..12");
    if (c.grid < 0 || c.grid > 20) throw usage_error("grid must be in 0..20");
    if (!(c.tol >= 0) || !std::isfinite(c.tol)) throw usage_error("tol must be >= 0");
    if (c.samples < 0) throw usage_error("samples must be >= 0");
    if (!(c.inner > 0 && c.outer > c.inner) || !std::isfinite(c.outer)) throw usage_error("need 0 < inner < outer");
}

inline std::vector<LemmaCheck> run_checks(const std::string& name, const SuiteConfig& cfg) {
    using Runner = std::vector<LemmaCheck> (*)(const SuiteConfig&);
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"constants", suites::constants},   {"harmonics", suites::harmonics},         {"annulus-norms", suites::annulus_norms},
        {"lorentz", suites::lorentz},       {"averaging", suites::averaging},         {"poisson-wente", suites::poisson_wente},
        {"whitney", suites::whitney},       {"rellich", suites::rellich},             {"pohozaev", suites::pohozaev},
        {"second-variation", suites::second_variation}};
    if (name == "all") {
        for (const auto& [n, f] : table)
            if (n != "constants") detail::dims(cfg, n == "harmonics" || n == "annulus-norms" ? std::vector<int>{3, 4}
                                                    : n == "averaging" ? std::vector<int>{2, 3, 4} : std::vector<int>{4}, "all");
        std::vector<LemmaCheck> out;
        for (const auto& [n, f] : table) {
            auto part = f(cfg);
            for (auto& c : part) c.params["suite"] = n;
            out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        return out;
    }
    for (const auto& [n, f] : table)
        if (n == name) return f(cfg);
    throw usage_error("unknown suite '" + name + "'");
}

inline SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg = {}) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.suite = name;
    r.config = cfg;
    r.checks = run_checks(name, cfg);
    for (const auto& c : r.checks) (c.pass ? r.passed : r.failed)++;
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline nlohmann::ordered_json to_json(const SuiteConfig& c) {
    return {{"dim", c.dim}, {"trunc", c.trunc}, {"grid", c.grid},   {"seed", c.seed},
            {"tol", c.tol}, {"samples", c.samples}, {"inner", c.inner}, {"outer", c.outer}};
}

inline nlohmann::ordered_json to_json(const LemmaCheck& c) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.params) std::visit([&](const auto& x) { p[k] = x; }, v);
    return {{"lemma_id", c.lemma_id}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin}, {"pass", c.pass}, {"params", p}};
}

/// Wall time is left out unless asked for, so equal inputs give equal bytes.
inline nlohmann::ordered_json to_json(const SuiteReport& r, bool with_time = false) {
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    nlohmann::ordered_json summary = {{"pass", r.passed}, {"fail", r.failed}, {"total", r.passed + r.failed}};
    if (with_time) summary["wall_time_s"] = r.wall_time;
    return {{"suite", r.suite}, {"config", to_json(r.config)}, {"checks", checks}, {"summary", summary}};
}

/// Applies the keys present in `j`; unknown keys are a usage error.
inline void apply_config(SuiteConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw usage_error("config must be a JSON object");
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "dim") c.dim = v.get<int>();
            else if (k == "trunc") c.trunc = v.get<int>();
            else if (k == "grid") c.grid = v.get<int>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (k == "tol") c.tol = v.get<double>();
            else if (k == "samples") c.samples = v.get<int>();
            else if (k == "inner") c.inner = v.get<double>();
            else if (k == "outer") c.outer = v.get<double>();
            else throw usage_error("unknown config key '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw usage_error(std::string("bad config value: ") + e.what());
    }
}

}  // namespace bhv

#endif
