#include "semimono/monotone.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace semimono::monotone;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent oracle for J_lambda: plain bisection for the y with
// y + lambda g(y-) <= x <= y + lambda g(y+), on a fixed wide bracket.
double bisection_resolvent(const std::function<double(double)>& left, const std::function<double(double)>& right,
                           double lambda, double x) {
    double lo = -100.0;
    double hi = 100.0;
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid + lambda * left(mid) > x) {
            hi = mid;
        } else if (mid + lambda * right(mid) < x) {
            lo = mid;
        } else {
            return mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Grid search oracle for a 1-D minimum or maximum.
template <class F>
double grid_extremum(F f, double lo, double hi, std::size_t n, bool maximise) {
    double best = maximise ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i) {
        const double v = f(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
        best = maximise ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

ConvexPotential abs_potential() {
    IncreasingFunction fn;
    fn.left = [](double r) { return r > 0.0 ? 1.0 : -1.0; };
    fn.right = [](double r) { return r >= 0.0 ? 1.0 : -1.0; };
    fn.nearest_jump = [](double) { return 0.0; };
    return ConvexPotential("abs", [](double x) { return std::abs(x); }, fill_jumps(fn, "sign"), 1.0);
}

}  // namespace

TEST_CASE("fill_jumps evaluates one-sided limits", "[monotone]") {
    const ScalarGraph h = heaviside_graph();
    CHECK(h.at(0.0).lo == 0.0);
    CHECK(h.at(0.0).hi == 1.0);
    CHECK(h.at(-1.0).single_valued());
    CHECK(h.at(-1.0).lo == 0.0);
    CHECK(h.at(1.0).lo == 1.0);

    const ScalarGraph id = identity_graph();
    for (double x : {-3.0, 0.0, 2.5}) {
        CHECK(id.at(x).lo == x);
        CHECK(id.at(x).single_valued());
    }

    const ScalarGraph fl = floor_graph();
    CHECK(fl.at(1.0).lo == 0.0);
    CHECK(fl.at(1.0).hi == 1.0);
    CHECK(fl.at(0.5).lo == 0.0);
    CHECK(fl.at(0.5).single_valued());
}

TEST_CASE("fill_jumps from a plain callable detects jumps", "[monotone]") {
    const ScalarGraph g = fill_jumps([](double r) { return r < 0.0 ? 0.0 : 1.0; }, "step");
    CHECK_THAT(g.at(0.0).lo, WithinAbs(0.0, 1e-12));
    CHECK_THAT(g.at(0.0).hi, WithinAbs(1.0, 1e-12));
    CHECK(g.at(2.0).single_valued());
}

TEST_CASE("fill_jumps rejects non-finite or decreasing functions", "[monotone]") {
    IncreasingFunction blowup;
    blowup.left = [](double r) { return r > 1.0 ? std::numeric_limits<double>::infinity() : r; };
    blowup.right = blowup.left;
    CHECK_THROWS_AS(fill_jumps(blowup), std::invalid_argument);

    IncreasingFunction decreasing;
    decreasing.left = [](double r) { return -r; };
    decreasing.right = decreasing.left;
    CHECK_THROWS_AS(fill_jumps(decreasing), std::invalid_argument);

    IncreasingFunction shifted;
    shifted.left = [](double r) { return r + 1.0; };
    shifted.right = shifted.left;
    CHECK_THROWS_AS(fill_jumps(shifted), std::invalid_argument);
}

TEST_CASE("resolvent examples", "[monotone]") {
    CHECK_THAT(resolvent(identity_graph(), 1.0, 3.0), WithinAbs(1.5, 1e-12));
    CHECK_THAT(resolvent(power_graph(3.0), 1.0, 2.0), WithinAbs(1.0, 1e-12));

    // Heaviside, lambda = 2, x = 1.5: frozen from the bisection oracle.
    const double oracle = bisection_resolvent([](double r) { return r > 0.0 ? 1.0 : 0.0; },
                                              [](double r) { return r >= 0.0 ? 1.0 : 0.0; }, 2.0, 1.5);
    REQUIRE_THAT(oracle, WithinAbs(0.0, 1e-12));
    CHECK_THAT(resolvent(heaviside_graph(), 2.0, 1.5), WithinAbs(0.0, 1e-12));

    CHECK_THROWS_AS(resolvent(identity_graph(), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("resolvent agrees with the bisection oracle on the library", "[monotone]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (const auto& spec : builtin_library()) {
        const ScalarGraph g = make_graph(spec);
        auto left = [&](double r) { return g.at(r).lo; };
        auto right = [&](double r) { return g.at(r).hi; };
        for (int i = 0; i < 200; ++i) {
            const double x = u(rng);
            const double lambda = i % 2 ? 0.3 : 2.0;
            CHECK_THAT(resolvent(g, lambda, x), WithinAbs(bisection_resolvent(left, right, lambda, x), 1e-9));
        }
    }
}

TEST_CASE("yosida examples", "[monotone]") {
    CHECK_THAT(yosida(identity_graph(), 1.0, 3.0), WithinAbs(1.5, 1e-12));
    // (x - J x)/lambda with J x = 0 from the oracle above.
    CHECK_THAT(yosida(heaviside_graph(), 2.0, 1.5), WithinAbs(0.75, 1e-12));
    for (const auto& spec : builtin_library()) CHECK(yosida(make_graph(spec), 0.5, 0.0) == 0.0);
}

TEST_CASE("yosida resolvent closed form matches direct solve", "[monotone]") {
    // (I + mu beta_lambda) y = x solved by bisection on y + mu beta_lambda(y).
    const ScalarGraph g = exponential_graph();
    const double lambda = 0.05;
    const double mu = 0.01;
    for (double x : {-3.0, -0.2, 0.0, 0.7, 4.0}) {
        double lo = -10.0;
        double hi = 10.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (mid + mu * yosida(g, lambda, mid) > x ? hi : lo) = mid;
        }
        CHECK_THAT(yosida_resolvent(g, lambda, mu, x), WithinAbs(0.5 * (lo + hi), 1e-9));
    }
}

TEST_CASE("moreau examples", "[monotone]") {
    CHECK_THAT(moreau(quadratic_potential(), 1.0, 2.0), WithinAbs(1.0, 1e-10));
    const auto p = abs_potential();
    const double oracle = grid_extremum([](double s) { return (0.5 - s) * (0.5 - s) / 2.0 + std::abs(s); }, -1.0, 1.0,
                                        2'000'000, false);
    REQUIRE_THAT(oracle, WithinAbs(0.125, 1e-9));
    CHECK_THAT(moreau(p, 1.0, 0.5), WithinAbs(0.125, 1e-10));
    for (const auto& spec : builtin_library()) CHECK(moreau(make_potential(spec), 0.3, 0.0) == 0.0);
}

TEST_CASE("conjugate examples", "[monotone]") {
    CHECK_THAT(conjugate(quadratic_potential(), 3.0), WithinAbs(4.5, 1e-10));
    const double oracle = grid_extremum([](double x) { return x - (std::exp(x) - x - 1.0); }, -5.0, 5.0, 2'000'000, true);
    REQUIRE_THAT(oracle, WithinAbs(2.0 * std::log(2.0) - 1.0, 1e-9));
    CHECK_THAT(conjugate(exponential_potential(), 1.0), WithinAbs(2.0 * std::log(2.0) - 1.0, 1e-10));
    for (const auto& spec : builtin_library()) CHECK_THAT(conjugate(make_potential(spec), 0.0), WithinAbs(0.0, 1e-14));
}

TEST_CASE("conjugate of a linearly bounded potential diverges", "[monotone]") {
    const auto detail = conjugate_detail(heaviside_potential(), 2.0);
    CHECK(std::isinf(detail.value));
    CHECK_FALSE(detail.attained);
    CHECK(std::isinf(conjugate(exponential_potential(), -2.0)));
}

TEST_CASE("membership examples", "[monotone]") {
    CHECK(membership(quadratic_potential(), 2.0, 2.0, 1e-9));
    CHECK_FALSE(membership(quadratic_potential(), 2.0, 1.0, 1e-9));
    // j*(y) = 0 on [0, 1] for the heaviside potential (grid oracle).
    const double oracle = grid_extremum([](double x) { return 0.3 * x - std::max(x, 0.0); }, -50.0, 50.0, 1'000'000, true);
    REQUIRE_THAT(oracle, WithinAbs(0.0, 1e-12));
    CHECK(membership(heaviside_potential(), 0.0, 0.3, 1e-9));
    CHECK_THROWS_AS(membership(quadratic_potential(), 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("resolvent and yosida invariants", "[monotone][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (const auto& spec : builtin_library()) {
        const ScalarGraph g = make_graph(spec);
        for (int i = 0; i < 2000; ++i) {
            const double lambda = std::array{1.0, 0.1, 0.01}[i % 3];
            const double x = u(rng);
            const double y = u(rng);
            const double jx = resolvent(g, lambda, x);
            const double jy = resolvent(g, lambda, y);
            CHECK(std::abs(jx - jy) <= std::abs(x - y) + 2e-12);
            const double bx = yosida(g, lambda, x);
            const double by = yosida(g, lambda, y);
            CHECK(std::abs(bx - by) <= std::abs(x - y) / lambda + 2e-12 / lambda);
            // Each resolvent is accurate to the prox tolerance relative to max(1, |x|).
            const double slack = 2.0 * 1e-12 * (1.0 + std::max(std::abs(x), std::abs(y))) / lambda;
            CHECK((bx - by) * (x - y) >= -slack * std::abs(x - y));
            CHECK(g.contains(jx, bx, 1e-10, 1e-9 * (1.0 + std::abs(bx))));
        }
    }
}

TEST_CASE("moreau identity and monotone convergence", "[monotone][property]") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (const auto& spec : builtin_library()) {
        const auto p = make_potential(spec);
        for (int i = 0; i < 300; ++i) {
            const double x = u(rng);
            for (double lambda : {1.0, 0.1, 0.01}) {
                const double env = moreau(p, lambda, x);
                CHECK(std::abs(moreau_identity_residual(p, lambda, x)) <= 1e-8 * std::max(1.0, std::abs(env)));
                CHECK(env <= p(x) * (1.0 + 1e-12) + 1e-12);
            }
            CHECK(moreau(p, 0.01, x) >= moreau(p, 0.1, x) - 1e-9);
            CHECK(moreau(p, 0.1, x) >= moreau(p, 1.0, x) - 1e-9);
        }
        // Continuity points: j_lambda -> j.
        CHECK_THAT(moreau(p, 1e-6, 0.37), WithinAbs(p(0.37), 1e-5));
    }
}

TEST_CASE("fenchel-young inequality, equality and duality positivity", "[monotone][property]") {
    for (const auto& spec : builtin_library()) {
        const auto p = make_potential(spec);
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const double x = -5.0 + 0.1 * i;
                const double y = -5.0 + 0.1 * j;
                CHECK(fenchel_young_gap(p, x, y) >= -1e-9 * (1.0 + std::abs(x * y)));
            }
        }
        for (double x : {-4.0, -1.0, -0.3, 0.0, 0.6, 2.0, 4.5}) {
            const double jx = resolvent(p.graph(), 0.5, x);
            const double bx = yosida(p.graph(), 0.5, x);
            CHECK(std::abs(fenchel_young_gap(p, jx, bx)) <= 1e-8 * (1.0 + std::abs(jx * bx) + p(jx)));
            // xi x = j(x) + j*(xi) >= 0 on graph pairs.
            CHECK(jx * bx >= -1e-12);
        }
    }
}

TEST_CASE("convexity on sampled triples", "[monotone][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    std::uniform_real_distribution<double> theta(0.0, 1.0);
    for (const auto& spec : builtin_library()) {
        const auto p = make_potential(spec);
        for (int i = 0; i < 1000; ++i) {
            const double x = u(rng);
            const double y = u(rng);
            const double t = theta(rng);
            CHECK(p(t * x + (1 - t) * y) <= t * p(x) + (1 - t) * p(y) + 1e-12 * (1 + p(x) + p(y)));
            CHECK(p(x) >= 0.0);
        }
    }
}

TEST_CASE("symmetry comparability", "[monotone]") {
    CHECK(check_symmetry(quadratic_potential(), 10.0).within);
    CHECK(check_symmetry(power_potential(3.0), 10.0).within);
    CHECK(check_symmetry(floor_potential(), 10.0).within);
    CHECK(std::isinf(exponential_potential().symmetry_constant()));
    CHECK(std::isinf(heaviside_potential().symmetry_constant()));
}

TEST_CASE("time modulation scales the graph", "[monotone]") {
    const ScalarGraph g = exponential_graph().with_modulation([](double t) { return 1.0 + t; });
    CHECK(g.modulated());
    CHECK_THAT(resolvent(g, 0.5, 2.0, 1.0), WithinAbs(resolvent(exponential_graph(), 1.0, 2.0), 1e-12));
    CHECK_THAT(g.at(1.0, 1.0).lo, WithinRel(2.0 * std::expm1(1.0), 1e-15));
}

TEST_CASE("graph specs round-trip and validate", "[monotone]") {
    const GraphSpec spec{"power", {{"p", 5.0}}};
    CHECK(GraphSpec::from_config_block(spec.to_config_block()) == spec);
    CHECK_THROWS_WITH(make_graph({"nonsense", {}}), Catch::Matchers::ContainsSubstring("graph block: unknown name"));
    CHECK_THROWS_AS(make_graph({"identity", {{"p", 2.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(GraphSpec::from_config_block("name = power\np = abc\n"), std::invalid_argument);
    const auto names = builtin_graph_names();
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(std::find(names.begin(), names.end(), "exponential") != names.end());
    CHECK(std::find(names.begin(), names.end(), "heaviside-filled") != names.end());
    for (double p : {2.0, 3.0, 5.0}) CHECK_THAT(resolvent(power_graph(p), 1.0, 2.0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("prox stays exact on very large arguments", "[monotone]") {
    const double x = 1e6;
    const double y = resolvent(exponential_graph(), 1.0, x);
    CHECK(std::isfinite(y));
    CHECK(y > 0.0);
    // The root is bracketed to the prox tolerance relative to |y|.
    const double d = 1e-12 * std::max(1.0, std::abs(y));
    CHECK((y - d) + std::expm1(y - d) < x);
    CHECK((y + d) + std::expm1(y + d) > x);
}
