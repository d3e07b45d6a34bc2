/// @file verify.cpp
/// verify <suite> [--dim D] [--trunc N] [--grid L] [--seed S] [--tol T] [--out report.json] [--csv spectra.csv]
///
/// Settings are layered: defaults, then --config, then BHV_* environment
/// variables, then flags.  Exit code 0 when every check passes, 1 when one
/// fails, 2 on a usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bhv/harness.hpp"

namespace {

// BHV_DIM, BHV_TRUNC, ... use the config-file keys
void apply_env(bhv::SuiteConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const char* key : {"dim", "trunc", "grid", "seed", "tol", "samples", "inner", "outer"}) {
        std::string name = "BHV_";
        for (const char* c = key; *c; ++c) name += static_cast<char>(std::toupper(*c));
        const char* v = std::getenv(name.c_str());
        if (!v || !*v) continue;
        try {
            j[key] = nlohmann::json::parse(v);
        } catch (const nlohmann::json::exception&) {
            throw bhv::usage_error(name + " is not a number");
        }
    }
    bhv::apply_config(cfg, j);
}

template <class T>
void set_if(T& dst, const std::optional<T>& v) {
    if (v) dst = *v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run a named verification suite and write a JSON report."};
    std::string suite, out, csv, config_path;
    std::optional<int> dim, trunc, grid, samples;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol, inner, outer;
    bool timing = false, list = false;

    std::string names;
    for (const auto& n : bhv::suite_names()) names += (names.empty() ? "" : ", ") + n;
    app.add_option("suite", suite, "one of: " + names);
    app.add_option("--dim", dim, "field dimension (suites with several)");
    app.add_option("--trunc", trunc, "max harmonic degree of random fields");
    app.add_option("--grid", grid, "angular quadrature level");
    app.add_option("--seed", seed, "64-bit seed");
    app.add_option("--tol", tol, "tolerance of the cross-checks");
    app.add_option("--samples", samples, "size of every random ensemble");
    app.add_option("--inner", inner, "inner radius of the Rellich annulus");
    app.add_option("--outer", outer, "outer radius of the Rellich annulus");
    app.add_option("--config", config_path, "JSON file with the same keys");
    app.add_option("--out", out, "write the JSON report here (default: stdout)");
    app.add_option("--csv", csv, "write Rellich mode spectra as CSV");
    app.add_flag("--timing", timing, "include wall time in the report");
    app.add_flag("--list", list, "print the lemma registry and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (list) {
        for (const auto& i : bhv::lemma_registry()) std::cout << i.id << "\t" << i.topic << "\n";
        return 0;
    }

    bhv::SuiteConfig cfg;
    try {
        if (suite.empty()) throw bhv::usage_error("missing suite name");
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw bhv::usage_error("cannot read " + config_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw bhv::usage_error(config_path + ": " + e.what());
            }
            bhv::apply_config(cfg, j);
        }
        apply_env(cfg);
        set_if(cfg.dim, dim);
        set_if(cfg.trunc, trunc);
        set_if(cfg.grid, grid);
        set_if(cfg.seed, seed);
        set_if(cfg.tol, tol);
        set_if(cfg.samples, samples);
        set_if(cfg.inner, inner);
        set_if(cfg.outer, outer);

        const auto report = bhv::run_suite(suite, cfg);
        const std::string text = bhv::to_json(report, timing).dump(2) + "\n";
        if (out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out);
            if (!f) throw bhv::usage_error("cannot write " + out);
            f << text;
        }
        if (!csv.empty()) {
            std::ofstream f(csv);
            if (!f) throw bhv::usage_error("cannot write " + csv);
            bhv::write_spectra_csv(bhv::rellich_spectra(std::log(cfg.outer / cfg.inner)), f);
        }
        for (const auto& c : report.checks)
            if (!c.pass) std::cerr << "FAIL " << c.lemma_id << "  lhs=" << c.lhs << " rhs=" << c.rhs << "\n";
        std::cerr << report.suite << ": " << report.passed << " pass, " << report.failed << " fail (" << report.wall_time << " s)\n";
        return report.ok() ? 0 : 1;
    } catch (const bhv::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }
}
