/// @file test_harness.cpp
/// Suite runner, registry, report determinism and the verify CLI.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bhv/harness.hpp"

using namespace bhv;

namespace {

const LemmaCheck* find(const SuiteReport& r, const std::string& id) {
    for (const auto& c : r.checks)
        if (c.lemma_id == id) return &c;
    return nullptr;
}

SuiteConfig small() {
    SuiteConfig c;
    c.samples = 2;
    c.trunc = 3;
    return c;
}

const SuiteReport& small_all() {
    static const SuiteReport r = run_suite("all", small());
    return r;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BHV_VERIFY_PATH) + " " + args + " > /dev/null 2>&1";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Registry, IdsUniqueAndDescribed) {
    std::set<std::string> seen;
    for (const auto& i : lemma_registry()) {
        EXPECT_TRUE(seen.insert(i.id).second) << i.id;
        EXPECT_FALSE(i.topic.empty()) << i.id;
    }
}

TEST(Registry, CoversLibraryIdLists) {
    for (const auto* ids : {&comparison_lemma_ids(), &pointwise_theorem_ids(), &lorentz_scaling_ids()})
        for (const auto& id : *ids) EXPECT_TRUE(is_registered(id)) << id;
    for (int i = 1; i <= 8; ++i) EXPECT_TRUE(is_registered("whitney_line" + std::to_string(i)));
    for (auto k : {IterationKind::divergence, IterationKind::gradient, IterationKind::gradient_over_x}) {
        EXPECT_TRUE(is_registered(std::string("dyadic_main_theorem_") + iteration_kind_name(k)));
        EXPECT_TRUE(is_registered(std::string("dyadic_main_theorem_stability_") + iteration_kind_name(k)));
    }
    EXPECT_FALSE(is_registered("no_such_lemma"));
}

TEST(Registry, EveryEmittedIdIsRegistered) {
    const auto& r = small_all();
    std::set<std::string> ids;
    for (const auto& c : r.checks) {
        EXPECT_TRUE(is_registered(c.lemma_id)) << c.lemma_id;
        EXPECT_NE(c.lemma_id, "numeric_failure") << std::get<std::string>(c.params.at("what"));
        ids.insert(c.lemma_id);
    }
    // every registered id except the failure marker is exercised by some suite
    for (const auto& i : lemma_registry()) {
        if (i.id == "numeric_failure") continue;
        EXPECT_TRUE(ids.count(i.id)) << i.id;
    }
}

TEST(Suite, UnknownNameIsUsageError) {
    EXPECT_THROW(run_suite("nope"), usage_error);
    EXPECT_THROW(run_suite(""), usage_error);
}

TEST(Suite, BadConfigIsUsageError) {
    SuiteConfig c;
    c.trunc = -1;
    EXPECT_THROW(run_suite("constants", c), usage_error);
    c = {};
    c.inner = 2.0;
    c.outer = 1.0;
    EXPECT_THROW(run_suite("rellich", c), usage_error);
    c = {};
    c.dim = 3;
    EXPECT_THROW(run_suite("whitney", c), usage_error);
    EXPECT_THROW(run_suite("all", c), usage_error);
    EXPECT_THROW(apply_config(c, nlohmann::json{{"seeds", 3}}), usage_error);
    EXPECT_THROW(apply_config(c, nlohmann::json{{"dim", "four"}}), usage_error);
    apply_config(c, nlohmann::json{{"dim", 4}, {"seed", 99}, {"outer", 1e10}});
    EXPECT_EQ(c.dim, 4);
    EXPECT_EQ(c.seed, 99u);
    EXPECT_EQ(c.outer, 1e10);
}

TEST(Suite, SummaryCountsMatchChecks) {
    for (const auto* r : {&small_all()}) {
        int p = 0, f = 0;
        for (const auto& c : r->checks) (c.pass ? p : f)++;
        EXPECT_EQ(r->passed, p);
        EXPECT_EQ(r->failed, f);
        const auto j = to_json(*r);
        EXPECT_EQ(j["summary"]["pass"], p);
        EXPECT_EQ(j["summary"]["fail"], f);
        EXPECT_EQ(j["checks"].size(), r->checks.size());
        EXPECT_FALSE(j["summary"].contains("wall_time_s"));
        EXPECT_TRUE(to_json(*r, true)["summary"].contains("wall_time_s"));
    }
}

TEST(Suite, ConstantsLedgerPasses) {
    const auto r = run_suite("constants");
    EXPECT_TRUE(r.ok());
    EXPECT_GE(r.checks.size(), 20u);
}

TEST(Suite, AllTwiceIsByteIdentical) {
    const std::string a = to_json(small_all()).dump(), b = to_json(run_suite("all", small())).dump();
    EXPECT_EQ(a, b);
    SuiteConfig other = small();
    other.seed = 8;
    EXPECT_NE(to_json(run_suite("lorentz", other)).dump(), to_json(run_suite("lorentz", small())).dump());
}

TEST(Suite, RellichReportsTheHardyBound) {
    const auto r = run_suite("rellich");
    const auto* hardy = find(r, "rellich_hardy");
    ASSERT_NE(hardy, nullptr);
    EXPECT_NEAR(hardy->lhs, 1.5807e-2, 1e-6);
    EXPECT_TRUE(hardy->pass);
    EXPECT_GT(hardy->margin, 0.0);
    // the gradient bound as stated does not hold at this length
    const auto* grad = find(r, "rellich_gradient");
    ASSERT_NE(grad, nullptr);
    EXPECT_FALSE(grad->pass);
    EXPECT_FALSE(r.ok());
}

TEST(Suite, FoldKeepsWorstAndCounts) {
    detail::Fold fold;
    fold.add(make_check("x", 0.5, 1.0, 0.0));
    fold.add(make_check("x", 0.9, 1.0, 0.0));
    fold.add(make_check("x", 0.1, 1.0, 0.0));
    fold.add(make_check("y", 2.0, 1.0, 0.0));
    fold.add(make_check("x", 0.7, 1.0, 0.0), {{"d", 3LL}});
    std::vector<LemmaCheck> out;
    fold.flush(out);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].lhs, 0.9);
    EXPECT_EQ(std::get<long long>(out[0].params.at("instances")), 3);
    EXPECT_TRUE(out[0].pass);
    EXPECT_FALSE(out[1].pass);
    EXPECT_EQ(std::get<long long>(out[1].params.at("failures")), 1);
    EXPECT_EQ(std::get<long long>(out[2].params.at("d")), 3);
}

// frozen values from 30-digit arithmetic
TEST(Constants, FrozenHighPrecision) {
    EXPECT_NEAR(constants::j01(), 2.404825557695773, 1e-12);
    EXPECT_NEAR(constants::j11(), 3.831705970207512, 1e-12);
    EXPECT_NEAR(constants::ball_lambda1(4), 14.68197064212389, 1e-11);
    EXPECT_NEAR(constants::gamma1(), 6.182496615847057, 1e-12);
    EXPECT_NEAR(constants::gamma_w(), 98705.18226093404, 1e-8);
    EXPECT_NEAR(lambert_w(1.5), 0.7258613577662263, 1e-14);
    EXPECT_NEAR(1 - 8 / (9 * lambert_w(2.25)), 0.02076066651386540, 1e-14);
    EXPECT_NEAR(constants::conformal_threshold_log(), 0.5848015076373701, 1e-13);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("constants"), 0);
    EXPECT_EQ(run_cli("rellich"), 1);
    EXPECT_EQ(run_cli("bogus"), 2);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("constants --trunc x"), 2);
    EXPECT_EQ(run_cli("constants --no-such-flag"), 2);
    EXPECT_EQ(run_cli("whitney --dim 3"), 2);
    EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, ConfigFileEnvAndFlagsLayer) {
    const std::string dir = ::testing::TempDir();
    {
        std::ofstream f(dir + "cfg.json");
        f << R"({"seed": 5, "trunc": 4, "samples": 3})";
    }
    ASSERT_EQ(run_cli("averaging --config " + dir + "cfg.json --out " + dir + "a.json"), 0);
    auto j = nlohmann::json::parse(slurp(dir + "a.json"));
    EXPECT_EQ(j["config"]["seed"], 5);
    EXPECT_EQ(j["config"]["samples"], 3);
    ASSERT_EQ(run_cli("averaging --config " + dir + "cfg.json --seed 6 --out " + dir + "b.json"), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir + "b.json"))["config"]["seed"], 6);
    ASSERT_EQ(std::system(("BHV_SEED=9 BHV_SAMPLES=2 " + std::string(BHV_VERIFY_PATH) + " averaging --config " + dir +
                           "cfg.json --out " + dir + "c.json > /dev/null 2>&1")
                              .c_str()),
              0);
    j = nlohmann::json::parse(slurp(dir + "c.json"));
    EXPECT_EQ(j["config"]["seed"], 9);
    EXPECT_EQ(j["config"]["samples"], 2);
    EXPECT_NE(std::system(("BHV_SEED=abc " + std::string(BHV_VERIFY_PATH) + " constants > /dev/null 2>&1").c_str()), 0);
    {
        std::ofstream f(dir + "bad.json");
        f << R"({"sed": 5})";
    }
    EXPECT_EQ(run_cli("constants --config " + dir + "bad.json"), 2);
}

TEST(Cli, ReportAndCsvFiles) {
    const std::string dir = ::testing::TempDir();
    ASSERT_EQ(run_cli("constants --out " + dir + "r1.json"), 0);
    ASSERT_EQ(run_cli("constants --out " + dir + "r2.json"), 0);
    EXPECT_EQ(slurp(dir + "r1.json"), slurp(dir + "r2.json"));
    const auto j = nlohmann::json::parse(slurp(dir + "r1.json"));
    EXPECT_EQ(j["suite"], "constants");
    for (const char* k : {"suite", "config", "checks", "summary"}) EXPECT_TRUE(j.contains(k)) << k;
    for (const char* k : {"lemma_id", "lhs", "rhs", "margin", "pass", "params"}) EXPECT_TRUE(j["checks"][0].contains(k)) << k;
    EXPECT_EQ(run_cli("rellich --inner 1 --outer 1e4 --csv " + dir + "s.csv --out " + dir + "r3.json"), 1);  // below threshold: recorded as a failing check
    EXPECT_EQ(run_cli("constants --inner 1 --outer 1e4 --csv " + dir + "s.csv"), 0);
    const std::string csv = slurp(dir + "s.csv");
    EXPECT_EQ(csv.rfind("mode,index,value\n", 0), 0u);
}
