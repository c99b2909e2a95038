#include "semimono/grid_operator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace semimono::grid {

GridOperator::GridOperator(Matrix a, double weight) : matrix_(std::move(a)), weight_(weight), tridiagonal_(true) {
    const Eigen::Index n = matrix_.rows();
    for (Eigen::Index i = 0; i < n && tridiagonal_; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(i - j) > 1 && matrix_(i, j) != 0.0) {
                tridiagonal_ = false;
                break;
            }
        }
    }
    if (tridiagonal_) {
        diag_ = matrix_.diagonal();
        off_ = n > 1 ? Vector(matrix_.diagonal(1)) : Vector();
    }
}

GridOperator GridOperator::laplacian_1d(std::size_t n, double length) {
    if (n < 2) throw std::invalid_argument("laplacian_1d: need at least 2 nodes");
    if (!(length > 0.0)) throw std::invalid_argument("laplacian_1d: length must be positive");
    const double dx = length / static_cast<double>(n + 1);
    const double inv = 1.0 / (dx * dx);
    const auto m = static_cast<Eigen::Index>(n);
    Matrix a = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        a(i, i) = 2.0 * inv;
        if (i > 0) a(i, i - 1) = -inv;
        if (i + 1 < m) a(i, i + 1) = -inv;
    }
    return GridOperator(std::move(a), dx);
}

GridOperator GridOperator::from_dense(Matrix a, double weight) {
    if (a.rows() != a.cols() || a.rows() < 1) throw std::invalid_argument("from_dense: matrix must be square");
    if (!(weight > 0.0)) throw std::invalid_argument("from_dense: weight must be positive");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("from_dense: matrix must be symmetric");
    }
    return GridOperator(std::move(a), weight);
}

GridOperator GridOperator::zero(std::size_t n, double weight) {
    const auto m = static_cast<Eigen::Index>(n);
    return from_dense(Matrix::Zero(m, m), weight);
}

Vector GridOperator::apply(const Vector& v) const {
    if (!tridiagonal_) return matrix_ * v;
    const Eigen::Index n = diag_.size();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = diag_[i] * v[i];
        if (i > 0) s += off_[i - 1] * v[i - 1];
        if (i + 1 < n) s += off_[i] * v[i + 1];
        out[i] = s;
    }
    return out;
}

double GridOperator::h_norm(const Vector& v) const { return std::sqrt(h_norm_sq(v)); }

Vector GridOperator::solve_shifted(double lambda, const Vector& v) const {
    const Eigen::Index n = static_cast<Eigen::Index>(dim());
    if (!tridiagonal_) {
        Matrix shifted = lambda * matrix_;
        shifted.diagonal().array() += 1.0;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) throw std::logic_error("solve_shifted: I + lambda A is not SPD");
        return llt.solve(v);
    }
    // Thomas algorithm on the tridiagonal system.
    Vector c(n);
    Vector d(n);
    double b0 = 1.0 + lambda * diag_[0];
    c[0] = n > 1 ? lambda * off_[0] / b0 : 0.0;
    d[0] = v[0] / b0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double a = lambda * off_[i - 1];
        const double b = 1.0 + lambda * diag_[i] - a * c[i - 1];
        c[i] = i + 1 < n ? lambda * off_[i] / b : 0.0;
        d[i] = (v[i] - a * d[i - 1]) / b;
    }
    Vector y(n);
    y[n - 1] = d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) y[i] = d[i] - c[i] * y[i + 1];
    return y;
}

double GridOperator::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Vector op_resolvent(const GridOperator& a, double lambda, const Vector& v) {
    if (!(lambda > 0.0)) throw std::invalid_argument("op_resolvent: lambda must be positive");
    return a.solve_shifted(lambda, v);
}

Vector op_yosida(const GridOperator& a, double lambda, const Vector& v) {
    return a.apply(op_resolvent(a, lambda, v));
}

Vector smoothing_apply(const SmoothingFamily& family, const Vector& v) {
    if (family.power < 1) throw std::invalid_argument("smoothing_apply: power must be >= 1");
    if (!(family.scale_index > 0.0)) throw std::invalid_argument("smoothing_apply: scale index must be positive");
    Vector out = v;
    for (int k = 0; k < family.power; ++k) out = family.base.solve_shifted(1.0 / family.scale_index, out);
    return out;
}

}  // namespace semimono::grid
