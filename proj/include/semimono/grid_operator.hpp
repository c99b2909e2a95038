#pragma once

#include "semimono/types.hpp"

namespace semimono::grid {

/// Symmetric nonnegative n x n discretisation of A acting on grid functions.
///
/// H is R^n with the quadrature inner product <u,v>_H = w sum u_i v_i, and the
/// V-norm is |v|_V = <Av, v>_H^{1/2}, so coercivity holds with c = 1.
/// Tridiagonal operators are solved with the Thomas algorithm; anything else
/// falls back to a dense Cholesky factorisation.
class GridOperator {
public:
    /// Dirichlet finite-difference Laplacian on (0, length) with n interior
    /// nodes: diag 2/dx^2, off-diag -1/dx^2, dx = length/(n+1), weight dx.
    /// Throws std::invalid_argument for n < 2 or length <= 0.
    static GridOperator laplacian_1d(std::size_t n, double length);

    /// Wraps a dense symmetric matrix; throws if it is not symmetric.
    static GridOperator from_dense(Matrix a, double weight);

    /// The zero operator (used for ODE-limit checks).
    static GridOperator zero(std::size_t n, double weight);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }
    double weight() const { return weight_; }
    bool tridiagonal() const { return tridiagonal_; }

    Vector apply(const Vector& v) const;

    double inner(const Vector& u, const Vector& v) const { return weight_ * u.dot(v); }
    double h_norm_sq(const Vector& v) const { return weight_ * v.squaredNorm(); }
    double h_norm(const Vector& v) const;
    double v_norm_sq(const Vector& v) const { return inner(apply(v), v); }

    /// Solves (I + lambda A) y = v.
    Vector solve_shifted(double lambda, const Vector& v) const;

    /// Smallest eigenvalue (dense symmetric eigensolver).
    double min_eigenvalue() const;

private:
    GridOperator(Matrix a, double weight);

    Matrix matrix_;
    double weight_;
    bool tridiagonal_;
    Vector diag_;
    Vector off_;
};

/// (I + lambda A)^{-1} v; throws std::invalid_argument for lambda <= 0.
Vector op_resolvent(const GridOperator& a, double lambda, const Vector& v);

/// A_lambda v = A (I + lambda A)^{-1} v.
Vector op_yosida(const GridOperator& a, double lambda, const Vector& v);

/// T_n = (I + A/n)^{-m}.
struct SmoothingFamily {
    GridOperator base;
    int power = 2;
    double scale_index = 1.0;
};

/// Applies T_n by `power` sequential shifted solves.
Vector smoothing_apply(const SmoothingFamily& family, const Vector& v);

}  // namespace semimono::grid
