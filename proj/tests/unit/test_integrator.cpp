#include "semimono/integrator.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace semimono;
using namespace semimono::integrator;
using monotone::exponential_graph;
using monotone::heaviside_graph;
using monotone::identity_graph;
using monotone::zero_graph;
using Catch::Matchers::WithinAbs;

namespace {

Vector sine_mode(std::size_t n, int k) {
    Vector w(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        w[static_cast<Eigen::Index>(j)] = std::sin(static_cast<double>((j + 1) * k) * std::numbers::pi / static_cast<double>(n + 1));
    }
    return w;
}

AdditiveNoise constant_g(const Matrix& g, std::size_t steps) { return {noise::OperatorPath::constant(g, steps)}; }

noise::SemimartingaleSpec mixed(std::size_t k) {
    auto spec = noise::SemimartingaleSpec::wiener(k, 0.5);
    spec.jump_rate = 3.0;
    spec.marks.kind = noise::MarkLaw::Kind::gaussian;
    spec.marks.location = Vector::Zero(static_cast<Eigen::Index>(k));
    spec.marks.scale = 0.5;
    return spec;
}

double sup_gap(const SolutionPath& p, const SolutionPath& q) {
    double d = 0.0;
    for (std::size_t k = 0; k < p.x.size(); ++k) d = std::max(d, (p.x[k] - q.x[k]).cwiseAbs().maxCoeff());
    return d;
}

MultiplicativeNoise sine_coefficient(double c, std::size_t steps, double slope) {
    MultiplicativeNoise m;
    m.b = [c](std::size_t, std::span<const Vector> past) -> Matrix {
        return Matrix(c * past.back().array().sin().matrix().asDiagonal());
    };
    for (std::size_t i = 0; i <= steps; ++i) m.lipschitz.values.push_back(slope * static_cast<double>(i) / static_cast<double>(steps));
    return m;
}

}  // namespace

TEST_CASE("heat equation against the eigen semigroup", "[integrator]") {
    const std::size_t n = 16;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const double dx = 1.0 / 17.0;
    const int k = 2;
    const double mu = (2.0 - 2.0 * std::cos(k * std::numbers::pi / 17.0)) / (dx * dx);
    const Vector w = sine_mode(n, k);
    const double horizon = 0.1;
    std::vector<double> errors;
    for (std::size_t steps : {200u, 400u}) {
        const auto z = noise::SemimartingalePath::zero({horizon, steps}, 1);
        const auto g = constant_g(Matrix::Zero(n, 1), steps);
        const auto lim = solve_limit(a, zero_graph(), g, z, w);
        const auto reg = solve_regularized(a, zero_graph(), 0.3, g, z, w);
        CHECK(sup_gap(lim, reg) <= 1e-13);
        errors.push_back((lim.x.back() - std::exp(-mu * horizon) * w).cwiseAbs().maxCoeff());
        CHECK(errors.back() <= horizon / static_cast<double>(steps) * mu * mu * horizon * std::exp(-mu * horizon));
    }
    CHECK(errors[0] / errors[1] > 1.8);
    CHECK(errors[0] / errors[1] < 2.2);
}

TEST_CASE("scalar linear ODE limit", "[integrator]") {
    const auto a = grid::GridOperator::zero(3, 1.0);
    const Vector x0 = Vector::Constant(3, 2.0);
    const std::size_t steps = 1000;
    const auto z = noise::SemimartingalePath::zero({1.0, steps}, 1);
    const auto g = constant_g(Matrix::Zero(3, 1), steps);
    const auto reg = solve_regularized(a, identity_graph(), 1e-9, g, z, x0);
    CHECK((reg.x.back() - std::exp(-1.0) * x0).norm() <= 2.0 / static_cast<double>(steps) * x0.norm());
    // Implicit Euler closed form.
    const auto lim = solve_limit(a, identity_graph(), g, z, x0);
    CHECK((lim.x.back() - x0 * std::pow(1.0 + 1.0 / static_cast<double>(steps), -static_cast<double>(steps))).norm() <=
          1e-12);
}

TEST_CASE("pure stochastic integral", "[integrator]") {
    const std::size_t n = 4;
    const auto a = grid::GridOperator::zero(n, 0.25);
    const auto z = noise::sample_path(mixed(n), {1.0, 128}, 3);
    const Vector x0 = Vector::LinSpaced(4, -1.0, 1.0);
    const auto g = constant_g(Matrix::Identity(n, n), 128);
    const auto reg = solve_regularized(a, zero_graph(), 0.1, g, z, x0);
    const auto lim = solve_limit(a, zero_graph(), g, z, x0);
    for (std::size_t k = 0; k <= 128; ++k) {
        CHECK((reg.x[k] - (x0 + z.values()[k])).norm() <= 1e-13);
        CHECK((lim.x[k] - (x0 + z.values()[k])).norm() <= 1e-13);
    }
}

TEST_CASE("identity graph: limit and regularized agree to O(dt)", "[integrator]") {
    const std::size_t n = 8;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const Vector x0 = sine_mode(n, 1);
    std::vector<double> gaps;
    for (std::size_t steps : {128u, 256u, 512u}) {
        const auto z = noise::sample_path(mixed(2), {1.0, 512}, 5).coarsen(512 / steps);
        Matrix g(n, 2);
        g.col(0) = 0.5 * sine_mode(n, 1);
        g.col(1) = 0.5 * sine_mode(n, 2);
        const auto noise = constant_g(g, steps);
        const double dt = 1.0 / static_cast<double>(steps);
        gaps.push_back(sup_gap(solve_limit(a, identity_graph(), noise, z, x0),
                               solve_regularized(a, identity_graph(), dt, noise, z, x0)));
        CHECK(gaps.back() <= dt);
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("exponential graph decays monotonically", "[integrator]") {
    const auto a = grid::GridOperator::zero(2, 1.0);
    const std::size_t steps = 50;
    const double dt = 0.04;
    const auto z = noise::SemimartingalePath::zero({2.0, steps}, 1);
    const auto lim = solve_limit(a, exponential_graph(), constant_g(Matrix::Zero(2, 1), steps), z, Vector::Ones(2));
    // Independent scalar implicit-Euler oracle: x' + dt (e^{x'} - 1) = x by bisection.
    double x = 1.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        double lo = 0.0;
        double hi = x;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mid + dt * std::expm1(mid) > x ? hi : lo) = mid;
        }
        x = 0.5 * (lo + hi);
        CHECK_THAT(lim.x[k][0], WithinAbs(x, 1e-11));
        CHECK(lim.x[k][0] < lim.x[k - 1][0]);
        CHECK(lim.x[k][0] > 0.0);
    }
}

TEST_CASE("zero data gives the zero solution", "[integrator]") {
    const auto a = grid::GridOperator::laplacian_1d(6, 1.0);
    const auto z = noise::SemimartingalePath::zero({1.0, 20}, 2);
    const auto g = constant_g(Matrix::Ones(6, 2), 20);
    for (const auto& graph : {identity_graph(), exponential_graph(), heaviside_graph(), monotone::floor_graph()}) {
        const auto lim = solve_limit(a, graph, g, z, Vector::Zero(6));
        for (std::size_t k = 0; k <= 20; ++k) {
            CHECK(lim.x[k].isZero(0.0));
            CHECK(lim.xi[k].isZero(0.0));
        }
    }
}

TEST_CASE("limit scheme keeps xi in beta(x) and the duality integral nonnegative", "[integrator][property]") {
    const std::size_t n = 12;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    Matrix g(n, 2);
    g.col(0) = sine_mode(n, 1);
    g.col(1) = sine_mode(n, 3);
    for (const auto& graph : {heaviside_graph(), monotone::floor_graph(), exponential_graph()}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto z = noise::sample_path(mixed(2), {1.0, 128}, seed);
            const auto lim = solve_limit(a, graph, constant_g(g, 128), z, 2.0 * sine_mode(n, 1));
            double duality = 0.0;
            for (std::size_t k = 1; k <= 128; ++k) {
                for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
                    CHECK(graph.contains(lim.x[k][i], lim.xi[k][i], 1e-9, 1e-7));
                }
                duality += a.inner(lim.xi[k], lim.x[k]) / 128.0;
            }
            CHECK(duality >= 0.0);
        }
    }
}

TEST_CASE("direct-system consistency", "[integrator]") {
    const std::size_t n = 10;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const auto z = noise::sample_path(mixed(1), {1.0, 100}, 8);
    const auto g = constant_g(Matrix(sine_mode(n, 1)), 100);
    const auto full = solve_limit(a, exponential_graph(), g, z, sine_mode(n, 1));
    const std::size_t stop = 40;
    const auto part = solve_limit(a, exponential_graph(), g, z.stopped_before(stop), sine_mode(n, 1));
    for (std::size_t k = 0; k < stop; ++k) CHECK(part.x[k] == full.x[k]);
}

TEST_CASE("regularized overflow guard aborts once splits run out", "[integrator]") {
    const auto a = grid::GridOperator::laplacian_1d(4, 1.0);
    const auto z = noise::SemimartingalePath::zero({1.0, 10}, 1);
    SchemeOptions tight;
    tight.overflow_guard = 1e-3;
    tight.max_splits = 3;
    CHECK_THROWS_AS(solve_regularized(a, identity_graph(), 0.1, constant_g(Matrix::Zero(4, 1), 10), z, Vector::Ones(4), tight),
                    NumericalAbort);
    const auto ok = solve_regularized(a, identity_graph(), 0.1, constant_g(Matrix::Zero(4, 1), 10), z, Vector::Ones(4));
    CHECK(ok.split_steps == 0);
    CHECK_THROWS_AS(solve_regularized(a, identity_graph(), 0.0, constant_g(Matrix::Zero(4, 1), 10), z, Vector::Ones(4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_limit(a, identity_graph(), constant_g(Matrix::Zero(4, 1), 10), z, Vector::Ones(3)),
                    std::invalid_argument);
}

TEST_CASE("picard with a constant coefficient reproduces the limit scheme", "[integrator]") {
    const std::size_t n = 8;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const auto z = noise::sample_path(mixed(2), {1.0, 64}, 4);
    Matrix g0(n, 2);
    g0.col(0) = sine_mode(n, 1);
    g0.col(1) = sine_mode(n, 2);
    MultiplicativeNoise m;
    m.b = [g0](std::size_t, std::span<const Vector>) { return g0; };
    m.lipschitz.values.assign(65, 0.0);
    const Vector x0 = sine_mode(n, 1);
    const auto r = solve_multiplicative(a, exponential_graph(), m, z, x0);
    const auto lim = solve_limit(a, exponential_graph(), constant_g(g0, 64), z, x0);
    CHECK(r.stop == 64);
    CHECK(r.converged);
    CHECK(r.iterations == 2);
    CHECK(r.distances.back() == 0.0);
    CHECK(sup_gap(r.path, lim) == 0.0);

    const auto ext = extend_solution(a, exponential_graph(), m, z, x0);
    CHECK(ext.taus == std::vector<std::size_t>{64});
    CHECK(ext.segments == 1);
}

TEST_CASE("picard on the sine coefficient contracts", "[integrator]") {
    const std::size_t n = 8;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const auto z = noise::sample_path(noise::SemimartingaleSpec::wiener(n, 1.0 / n), {1.0, 128}, 2);
    const auto m = sine_coefficient(0.1, 128, 8.0 * 0.01);
    PicardOptions options;
    const auto r = solve_multiplicative(a, zero_graph(), m, z, sine_mode(n, 1), options);
    CHECK(r.converged);
    CHECK(r.iterations <= 25);
    for (double q : r.ratios) CHECK(q < 1.0);

    // Localized uniqueness from a different starting iterate.
    std::vector<Vector> guess(129, sine_mode(n, 1) + 0.5 * sine_mode(n, 3));
    const auto other = solve_multiplicative(a, zero_graph(), m, z, sine_mode(n, 1), options, 0, &guess);
    for (std::size_t k = 0; k <= r.stop; ++k) CHECK(a.h_norm(r.path.x[k] - other.path.x[k]) < 10.0 * options.tolerance);

    // B(0) = 0 keeps the zero solution.
    const auto zero = solve_multiplicative(a, zero_graph(), m, z, Vector::Zero(n), options);
    for (const auto& x : zero.path.x) CHECK(x.isZero(0.0));

    options.max_picard = 1;
    CHECK_THROWS_AS(solve_multiplicative(a, zero_graph(), m, z, sine_mode(n, 1), options), NumericalAbort);
    options.alpha = 1.0;
    CHECK_THROWS_AS(solve_multiplicative(a, zero_graph(), m, z, sine_mode(n, 1), options), std::invalid_argument);
}

TEST_CASE("extension: deterministic budget and zero noise", "[integrator]") {
    const std::size_t n = 6;
    const std::size_t steps = 256;
    const auto a = grid::GridOperator::laplacian_1d(n, 1.0);
    const auto z = noise::SemimartingalePath::zero({1.0, steps}, n);
    // C = 4 and L(t) = t: each segment lasts alpha/4 = 1/16, so 16 segments.
    const auto m = sine_coefficient(0.1, steps, 1.0);
    const Vector x0 = 0.5 * sine_mode(n, 1);
    const auto ext = extend_solution(a, exponential_graph(), m, z, x0);
    CHECK(ext.segments == 16);
    CHECK(ext.degenerate == 0);
    CHECK(ext.taus.back() == steps);
    for (std::size_t s = 0; s < ext.taus.size(); ++s) CHECK(ext.taus[s] == 16 * (s + 1));
    CHECK_THAT(predicted_segments(noise::control_process(z), m.lipschitz, 0.25), WithinAbs(16.0, 1e-9));

    const auto lim = solve_limit(a, exponential_graph(), constant_g(Matrix::Zero(n, n), steps), z, x0);
    CHECK(sup_gap(ext.path, lim) == 0.0);
}
