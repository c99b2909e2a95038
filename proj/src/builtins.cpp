#include "semimono/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semimono::monotone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBig = std::numeric_limits<double>::max();

// exp saturated at the largest finite double so that bracketing searches on
// very large arguments see a huge but finite graph value.
double saturating_exp(double r) { return r > 709.0 ? kBig : std::exp(r); }

IncreasingFunction continuous(std::function<double(double)> value, std::function<double(double)> slope) {
    IncreasingFunction fn;
    fn.left = value;
    fn.right = std::move(value);
    fn.slope = std::move(slope);
    return fn;
}

double param(const GraphSpec& spec, const std::string& key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

void reject_extra_params(const GraphSpec& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : spec.params) {
        (void)value;
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw std::invalid_argument("graph block: unknown key '" + key + "' for graph '" + spec.name + "'");
    }
}

}  // namespace

ScalarGraph zero_graph() {
    return ScalarGraph("zero", continuous([](double) { return 0.0; }, [](double) { return 0.0; }));
}

ScalarGraph identity_graph() {
    return ScalarGraph("identity", continuous([](double r) { return r; }, [](double) { return 1.0; }));
}

ScalarGraph power_graph(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("graph block: power exponent p must be >= 1");
    return ScalarGraph("power",
                       continuous([p](double r) { return std::copysign(std::pow(std::abs(r), p), r); },
                                  [p](double r) { return p * std::pow(std::abs(r), p - 1.0); }));
}

ScalarGraph exponential_graph() {
    return ScalarGraph("exponential",
                       continuous([](double r) { return r > 709.0 ? kBig : std::expm1(r); }, saturating_exp));
}

ScalarGraph heaviside_graph() {
    IncreasingFunction fn;
    fn.left = [](double r) { return r > 0.0 ? 1.0 : 0.0; };
    fn.right = [](double r) { return r >= 0.0 ? 1.0 : 0.0; };
    fn.nearest_jump = [](double) { return 0.0; };
    return ScalarGraph("heaviside-filled", std::move(fn));
}

ScalarGraph floor_graph() {
    IncreasingFunction fn;
    fn.left = [](double r) { return std::ceil(r) - 1.0; };
    fn.right = [](double r) { return std::floor(r); };
    fn.nearest_jump = [](double r) { return std::round(r); };
    return ScalarGraph("floor", std::move(fn));
}

ConvexPotential zero_potential() {
    return ConvexPotential("zero", [](double) { return 0.0; }, zero_graph(), 1.0);
}

ConvexPotential quadratic_potential() {
    return ConvexPotential("identity", [](double x) { return 0.5 * x * x; }, identity_graph(), 1.0);
}

ConvexPotential power_potential(double p) {
    return ConvexPotential(
        "power", [p](double x) { return std::pow(std::abs(x), p + 1.0) / (p + 1.0); }, power_graph(p), 1.0);
}

ConvexPotential exponential_potential() {
    // j(x) = e^x - x - 1 grows exponentially on one side only.
    return ConvexPotential(
        "exponential", [](double x) { return x > 709.0 ? kBig : std::expm1(x) - x; }, exponential_graph(), kInf);
}

ConvexPotential heaviside_potential() {
    return ConvexPotential("heaviside-filled", [](double x) { return std::max(x, 0.0); }, heaviside_graph(), kInf);
}

ConvexPotential floor_potential() {
    // j(x) = integral of floor over [0, x] = k(k-1)/2 + k(x-k), k = floor(x).
    return ConvexPotential(
        "floor",
        [](double x) {
            const double k = std::floor(x);
            return 0.5 * k * (k - 1.0) + k * (x - k);
        },
        floor_graph(), 2.0);
}

std::vector<std::string> builtin_graph_names() {
    return {"exponential", "floor", "heaviside-filled", "identity", "power", "zero"};
}

ScalarGraph make_graph(const GraphSpec& spec) { return make_potential(spec).graph(); }

ConvexPotential make_potential(const GraphSpec& spec) {
    if (spec.name == "zero") {
        reject_extra_params(spec, {});
        return zero_potential();
    }
    if (spec.name == "identity") {
        reject_extra_params(spec, {});
        return quadratic_potential();
    }
    if (spec.name == "power") {
        reject_extra_params(spec, {"p"});
        return power_potential(param(spec, "p", 3.0));
    }
    if (spec.name == "exponential") {
        reject_extra_params(spec, {});
        return exponential_potential();
    }
    if (spec.name == "heaviside-filled") {
        reject_extra_params(spec, {});
        return heaviside_potential();
    }
    if (spec.name == "floor") {
        reject_extra_params(spec, {});
        return floor_potential();
    }
    throw std::invalid_argument("graph block: unknown name '" + spec.name + "'");
}

std::vector<GraphSpec> builtin_library() {
    return {
        {"identity", {}},
        {"power", {{"p", 3.0}}},
        {"exponential", {}},
        {"heaviside-filled", {}},
        {"floor", {}},
    };
}

}  // namespace semimono::monotone
