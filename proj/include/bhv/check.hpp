#ifndef BHV_CHECK_HPP
#define BHV_CHECK_HPP

/// @file check.hpp
/// LemmaCheck records and the counter-based random stream used by every suite.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace bhv {

struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct registry_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using ParamValue = std::variant<double, long long, std::string>;
using Params = std::map<std::string, ParamValue>;

/// Outcome of one inequality or identity check.  `pass` is lhs <= rhs*(1+tol).
struct LemmaCheck {
    std::string lemma_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
    Params params;
};

/// lhs <= rhs (1 + tol); margin = rhs - lhs.
inline LemmaCheck make_check(std::string id, double lhs, double rhs, double tol, Params params = {}) {
    LemmaCheck c;
    c.lemma_id = std::move(id);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = rhs - lhs;
    c.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + tol * std::abs(rhs);
    c.params = std::move(params);
    c.params["tol"] = tol;
    return c;
}

/// |value - expected| <= tol, recorded as lhs = |value - expected|, rhs = tol.
inline LemmaCheck make_equality(std::string id, double value, double expected, double tol, Params params = {}) {
    params["value"] = value;
    params["expected"] = expected;
    LemmaCheck c;
    c.lemma_id = std::move(id);
    c.lhs = std::abs(value - expected);
    c.rhs = tol;
    c.margin = tol - c.lhs;
    c.pass = std::isfinite(value) && c.lhs <= tol;
    c.params = std::move(params);
    c.params["tol"] = tol;
    return c;
}

/// Relative version: |value - expected| <= tol * max(|expected|, floor).
inline LemmaCheck make_rel_equality(std::string id, double value, double expected, double tol, double floor = 1e-300,
                                    Params params = {}) {
    const double scale = std::max(std::abs(expected), floor);
    params["value"] = value;
    params["expected"] = expected;
    LemmaCheck c;
    c.lemma_id = std::move(id);
    c.lhs = std::abs(value - expected) / scale;
    c.rhs = tol;
    c.margin = tol - c.lhs;
    c.pass = std::isfinite(value) && c.lhs <= tol;
    c.params = std::move(params);
    c.params["tol"] = tol;
    return c;
}

/// Counter-based generator: value i of stream s is splitmix64(seed, s, i).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return mix(seed_ ^ mix(stream_ + 0x632be59bd9b4e019ULL) ^ mix(counter_++)); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

    /// Independent child stream.
    Rng split(std::uint64_t tag) const { return Rng(mix(seed_ + tag), mix(stream_ ^ (tag * 0x9e3779b97f4a7c15ULL))); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_, stream_, counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bhv

#endif
