#include "semimono/grid_operator.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace semimono;
using namespace semimono::grid;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Closed-form Dirichlet eigenpairs: mu_k = (2 - 2 cos(k pi/(n+1)))/dx^2,
// w_k(j) = sin(j k pi/(n+1)).
double eigenvalue(std::size_t n, double dx, int k) {
    return (2.0 - 2.0 * std::cos(k * std::numbers::pi / static_cast<double>(n + 1))) / (dx * dx);
}

Vector eigenvector(std::size_t n, int k) {
    Vector w(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        w[static_cast<Eigen::Index>(j)] = std::sin(static_cast<double>((j + 1) * k) * std::numbers::pi / static_cast<double>(n + 1));
    }
    return w;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = g(rng);
    return v;
}

}  // namespace

TEST_CASE("laplacian stencil", "[operator]") {
    const auto a = GridOperator::laplacian_1d(3, 4.0);
    Matrix expected(3, 3);
    expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    CHECK(a.matrix() == expected);
    CHECK(a.weight() == 1.0);
    CHECK(a.tridiagonal());

    const auto b = GridOperator::laplacian_1d(10, 1.1);
    const double dx = 0.1;
    const Vector au = b.apply(Vector::Ones(10));
    CHECK_THAT(au[0], WithinRel(1.0 / (dx * dx), 1e-12));
    CHECK_THAT(au[9], WithinRel(1.0 / (dx * dx), 1e-12));
    for (int i = 1; i < 9; ++i) CHECK_THAT(au[i], WithinAbs(0.0, 1e-9));

    CHECK_THROWS_AS(GridOperator::laplacian_1d(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridOperator::laplacian_1d(4, 0.0), std::invalid_argument);
}

TEST_CASE("eigenvalues match closed form and a dense solver", "[operator]") {
    const auto a = GridOperator::laplacian_1d(3, 4.0);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
    const double r2 = std::sqrt(2.0);
    CHECK_THAT(es.eigenvalues()[0], WithinAbs(2.0 - r2, 1e-12));
    CHECK_THAT(es.eigenvalues()[1], WithinAbs(2.0, 1e-12));
    CHECK_THAT(es.eigenvalues()[2], WithinAbs(2.0 + r2, 1e-12));
    for (int k = 1; k <= 3; ++k) CHECK_THAT(eigenvalue(3, 1.0, k), WithinAbs(es.eigenvalues()[k - 1], 1e-12));
    CHECK_THAT(a.min_eigenvalue(), WithinAbs(2.0 - r2, 1e-12));
}

TEST_CASE("symmetry, coercivity and positive definiteness", "[operator][property]") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {2u, 7u, 32u, 100u}) {
        const auto a = GridOperator::laplacian_1d(n, 1.0);
        CHECK(a.min_eigenvalue() > 0.0);
        for (int i = 0; i < 50; ++i) {
            const Vector u = random_vector(n, rng);
            const Vector v = random_vector(n, rng);
            const double scale = a.h_norm(a.apply(u)) * a.h_norm(v) + a.h_norm(a.apply(v)) * a.h_norm(u);
            CHECK_THAT(a.inner(a.apply(u), v), WithinAbs(a.inner(u, a.apply(v)), 1e-12 * scale));
            CHECK(a.inner(a.apply(u), u) >= a.v_norm_sq(u) * (1.0 - 1e-14));
            CHECK(a.v_norm_sq(u) > 0.0);
        }
    }
    Matrix asym(2, 2);
    asym << 1, 2, 0, 1;
    CHECK_THROWS_AS(GridOperator::from_dense(asym, 1.0), std::invalid_argument);
}

TEST_CASE("resolvent examples", "[operator]") {
    const std::size_t n = 16;
    const auto a = GridOperator::laplacian_1d(n, 1.0);
    const double dx = 1.0 / 17.0;
    const Vector v = eigenvector(n, 1) + 0.3 * eigenvector(n, 4);
    CHECK((op_resolvent(a, 1e-12, v) - v).norm() <= 1e-8 * v.norm());
    CHECK(op_resolvent(a, 0.5, Vector::Zero(n)).isZero(0.0));
    for (int k : {1, 5, 16}) {
        for (double lambda : {1e-3, 0.1, 2.0}) {
            const Vector w = eigenvector(n, k);
            const Vector y = op_resolvent(a, lambda, w);
            CHECK((y - w / (1.0 + lambda * eigenvalue(n, dx, k))).norm() <= 1e-12 * w.norm());
        }
    }
    CHECK_THROWS_AS(op_resolvent(a, 0.0, v), std::invalid_argument);
}

TEST_CASE("resolvent contraction and maximum principle", "[operator][property]") {
    std::mt19937_64 rng(2);
    const auto a = GridOperator::laplacian_1d(24, 2.0);
    for (double lambda : {1e-3, 0.1, 10.0}) {
        for (int i = 0; i < 50; ++i) {
            const Vector v = random_vector(24, rng);
            CHECK(a.h_norm(op_resolvent(a, lambda, v)) <= a.h_norm(v) * (1.0 + 1e-14));
        }
        for (Eigen::Index j = 0; j < 24; ++j) {
            const Vector col = op_resolvent(a, lambda, Vector::Unit(24, j));
            CHECK(col.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("thomas solve agrees with a dense factorisation", "[operator]") {
    std::mt19937_64 rng(3);
    const auto a = GridOperator::laplacian_1d(40, 1.0);
    // A dense SPD operator exercises the Cholesky branch.
    Matrix m = Matrix::Random(12, 12);
    m = (m * m.transpose()).eval() + Matrix::Identity(12, 12);
    const auto dense = GridOperator::from_dense(m, 0.5);
    CHECK_FALSE(dense.tridiagonal());
    for (double lambda : {1e-2, 1.0}) {
        const Vector v = random_vector(40, rng);
        const Matrix shifted = Matrix::Identity(40, 40) + lambda * a.matrix();
        CHECK((a.solve_shifted(lambda, v) - shifted.ldlt().solve(v)).norm() <= 1e-10 * v.norm());
        const Vector u = random_vector(12, rng);
        const Matrix s2 = Matrix::Identity(12, 12) + lambda * m;
        CHECK((dense.solve_shifted(lambda, u) - s2.ldlt().solve(u)).norm() <= 1e-10 * u.norm());
    }
}

TEST_CASE("yosida examples", "[operator]") {
    const std::size_t n = 16;
    const auto a = GridOperator::laplacian_1d(n, 1.0);
    const double dx = 1.0 / 17.0;
    for (int k : {1, 7}) {
        const double lambda = 0.01;
        const Vector w = eigenvector(n, k);
        const double mu = eigenvalue(n, dx, k);
        CHECK((op_yosida(a, lambda, w) - (mu / (1.0 + lambda * mu)) * w).norm() <= 1e-10 * mu * w.norm());
    }
    CHECK(op_yosida(a, 0.1, Vector::Zero(n)).isZero(0.0));

    const Vector smooth = eigenvector(n, 1);
    const Vector av = a.apply(smooth);
    double previous = INFINITY;
    for (double lambda : {1e-2, 1e-4, 1e-6}) {
        const double err = (op_yosida(a, lambda, smooth) - av).norm() / av.norm();
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 1e-4);
}

TEST_CASE("yosida energy identity", "[operator][property]") {
    std::mt19937_64 rng(4);
    const auto a = GridOperator::laplacian_1d(32, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vector v = random_vector(32, rng);
        const double lambda = std::pow(10.0, -1.0 - (i % 4));
        const Vector al = op_yosida(a, lambda, v);
        const Vector j = op_resolvent(a, lambda, v);
        const double lhs = a.inner(al, v);
        const double rhs = a.inner(a.apply(j), j) + lambda * a.h_norm_sq(al);
        CHECK_THAT(lhs - rhs, WithinAbs(0.0, 1e-9 * std::abs(lhs)));
    }
}

TEST_CASE("smoothing family", "[operator]") {
    const std::size_t n = 32;
    const auto a = GridOperator::laplacian_1d(n, 1.0);
    const double dx = 1.0 / 33.0;

    for (double idx : {1.0, 4.0, 100.0}) {
        const Vector t1 = smoothing_apply({a, 2, idx}, Vector::Ones(n));
        CHECK(t1.minCoeff() >= 0.0);
        CHECK(t1.maxCoeff() <= 1.0);
    }

    for (int k : {1, 9}) {
        const Vector w = eigenvector(n, k);
        const double idx = 7.0;
        CHECK((smoothing_apply({a, 1, idx}, w) - w / (1.0 + eigenvalue(n, dx, k) / idx)).norm() <= 1e-12 * w.norm());
    }

    // Smallest integer n with |T_n v - v| <= 0.01 |v| for v = w_1, m = 2,
    // from 1 - (1 + mu_1/n)^{-2} <= 0.01 in closed form: 1958.
    const Vector v = eigenvector(n, 1);
    auto rel = [&](double idx) { return (smoothing_apply({a, 2, idx}, v) - v).norm() / v.norm(); };
    CHECK(rel(1958.0) <= 0.01);
    CHECK(rel(1957.0) > 0.01);
}

TEST_CASE("smoothing invariants", "[operator][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 32;
    const auto a = GridOperator::laplacian_1d(n, 1.0);
    const Vector v = random_vector(n, rng);
    double previous = INFINITY;
    for (double idx : {4.0, 16.0, 64.0, 256.0}) {
        const SmoothingFamily f{a, 2, idx};
        // Sub-Markov on random f in [0, 1].
        for (int i = 0; i < 20; ++i) {
            Vector u(static_cast<Eigen::Index>(n));
            for (auto& x : u) x = unit(rng);
            const Vector tu = smoothing_apply(f, u);
            CHECK(tu.minCoeff() >= 0.0);
            CHECK(tu.maxCoeff() <= 1.0);
            CHECK(a.h_norm(smoothing_apply(f, u)) <= a.h_norm(u) * (1.0 + 1e-14));
        }
        // Commutation with A.
        const Vector lhs = smoothing_apply(f, a.apply(v));
        const Vector rhs = a.apply(smoothing_apply(f, v));
        CHECK((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        // T_n is symmetric, so T_n* v -> v is the same sequence.
        const double err = (smoothing_apply(f, v) - v).norm();
        CHECK(err < previous);
        previous = err;
    }
}
