#include "semimono/noise.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semimono::noise {

namespace {

Vector or_zero(const Vector& v, std::size_t k) {
    return v.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(k)) : v;
}

// Square root S of a symmetric PSD matrix, S S^T = Q.
Matrix psd_sqrt(const Matrix& q) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(q);
    const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal();
}

}  // namespace

void TimeGrid::validate() const {
    if (steps == 0) throw std::invalid_argument("time grid: empty grid (steps must be >= 1)");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("time grid: horizon must be positive");
}

Vector MarkLaw::mean() const {
    if (kind == Kind::rademacher) return Vector::Zero(location.size());
    return location;
}

double MarkLaw::second_moment() const {
    double m = location.squaredNorm();
    if (kind == Kind::gaussian) m += static_cast<double>(location.size()) * scale * scale;
    return m;
}

Vector MarkLaw::sample(std::mt19937_64& rng) const {
    Vector out = location;
    switch (kind) {
        case Kind::constant:
            break;
        case Kind::gaussian: {
            std::normal_distribution<double> normal(0.0, 1.0);
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += scale * normal(rng);
            break;
        }
        case Kind::rademacher: {
            std::bernoulli_distribution coin(0.5);
            for (Eigen::Index i = 0; i < out.size(); ++i) {
                if (coin(rng)) out[i] = -out[i];
            }
            break;
        }
    }
    return out;
}

void SemimartingaleSpec::validate() const {
    if (k_dim == 0) throw std::invalid_argument("noise block: k_dim must be >= 1");
    const auto k = static_cast<Eigen::Index>(k_dim);
    if (wiener_cov.size() != 0) {
        if (wiener_cov.rows() != k || wiener_cov.cols() != k) {
            throw std::invalid_argument("noise block: wiener covariance must be k_dim x k_dim");
        }
        const double scale = std::max(1.0, wiener_cov.cwiseAbs().maxCoeff());
        if ((wiener_cov - wiener_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw std::invalid_argument("noise block: wiener covariance must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(wiener_cov, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -1e-12 * scale) {
            throw std::invalid_argument("noise block: wiener covariance must be positive semidefinite");
        }
    }
    if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) throw std::invalid_argument("noise block: jump rate must be >= 0");
    if (jump_rate > 0.0) {
        if (marks.location.size() != k) throw std::invalid_argument("noise block: mark dimension must equal k_dim");
        if (!(marks.scale >= 0.0)) throw std::invalid_argument("noise block: mark scale must be >= 0");
    }
    if (drift.size() != 0 && drift.size() != k) throw std::invalid_argument("noise block: drift dimension must equal k_dim");
}

SemimartingaleSpec SemimartingaleSpec::zero(std::size_t k) {
    SemimartingaleSpec s;
    s.k_dim = k;
    return s;
}

SemimartingaleSpec SemimartingaleSpec::wiener(std::size_t k, double variance) {
    SemimartingaleSpec s = zero(k);
    const auto n = static_cast<Eigen::Index>(k);
    s.wiener_cov = variance * Matrix::Identity(n, n);
    return s;
}

SemimartingaleSpec SemimartingaleSpec::compound_poisson(std::size_t k, double rate, MarkLaw marks) {
    SemimartingaleSpec s = zero(k);
    s.jump_rate = rate;
    s.marks = std::move(marks);
    return s;
}

SemimartingalePath::SemimartingalePath(TimeGrid grid, std::size_t k_dim, std::vector<Vector> wiener_increments,
                                       std::vector<Jump> jumps, PathLaw law)
    : grid_(grid), k_dim_(k_dim), wiener_(std::move(wiener_increments)), jumps_(std::move(jumps)),
      law_(std::move(law)), stop_(grid.no_stop()) {
    grid_.validate();
    const auto k = static_cast<Eigen::Index>(k_dim_);
    if (wiener_.empty()) wiener_.assign(grid_.steps, Vector::Zero(k));
    if (wiener_.size() != grid_.steps) throw std::invalid_argument("semimartingale path: one Wiener increment per step");
    for (const auto& w : wiener_) {
        if (w.size() != k) throw std::invalid_argument("semimartingale path: Wiener increment has wrong dimension");
    }
    for (const auto& j : jumps_) {
        if (j.index < 1 || j.index > grid_.steps) throw std::invalid_argument("semimartingale path: jump off the grid");
        if (j.mark.size() != k) throw std::invalid_argument("semimartingale path: jump mark has wrong dimension");
    }
    std::stable_sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.index < b.index; });
    law_.compensator = or_zero(law_.compensator, k_dim_);
    law_.drift = or_zero(law_.drift, k_dim_);
    rebuild();
}

SemimartingalePath SemimartingalePath::zero(TimeGrid grid, std::size_t k_dim) {
    return SemimartingalePath(grid, k_dim, {}, {}, PathLaw{});
}

double SemimartingalePath::active_time(std::size_t i) const {
    if (stop_ == 0) return 0.0;
    return grid_.time(std::min(i, stop_ - 1));
}

void SemimartingalePath::rebuild() {
    const std::size_t n = grid_.steps;
    const auto k = static_cast<Eigen::Index>(k_dim_);
    const Vector drift_step = law_.drift * grid_.dt();
    dz_.assign(n + 1, Vector::Zero(k));
    for (std::size_t i = 1; i <= n; ++i) {
        if (i >= stop_) continue;
        dz_[i] = wiener_[i - 1] + drift_step;
    }
    for (const auto& j : jumps_) {
        if (j.index < stop_) dz_[j.index] += j.mark;
    }
    z_.assign(n + 1, Vector::Zero(k));
    for (std::size_t i = 1; i <= n; ++i) z_[i] = z_[i - 1] + dz_[i];
}

std::vector<double> SemimartingalePath::predictable_bracket() const {
    std::vector<double> out(grid_.steps + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = law_.bracket_rate * active_time(i);
    return out;
}

std::vector<double> SemimartingalePath::jump_bracket() const {
    std::vector<double> per_step(grid_.steps + 1, 0.0);
    for (const auto& j : jumps_) {
        if (j.index < stop_) per_step[j.index] += j.mark.squaredNorm();
    }
    std::vector<double> out(per_step.size(), 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] + per_step[i];
    return out;
}

std::vector<double> SemimartingalePath::variation() const {
    const double speed = (law_.drift + law_.compensator).norm();
    std::vector<double> out(grid_.steps + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = speed * active_time(i);
    return out;
}

std::vector<Vector> SemimartingalePath::jump_martingale_part() const {
    const auto k = static_cast<Eigen::Index>(k_dim_);
    std::vector<Vector> jumps_at(grid_.steps + 1, Vector::Zero(k));
    for (const auto& j : jumps_) {
        if (j.index < stop_) jumps_at[j.index] += j.mark;
    }
    std::vector<Vector> out(grid_.steps + 1, Vector::Zero(k));
    Vector acc = Vector::Zero(k);
    for (std::size_t i = 0; i < out.size(); ++i) {
        acc += jumps_at[i];
        out[i] = acc - law_.compensator * active_time(i);
    }
    return out;
}

std::vector<Vector> SemimartingalePath::martingale_part() const {
    std::vector<Vector> out = jump_martingale_part();
    const auto k = static_cast<Eigen::Index>(k_dim_);
    Vector w = Vector::Zero(k);
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (i < stop_) w += wiener_[i - 1];
        out[i] += w;
    }
    return out;
}

std::vector<Vector> SemimartingalePath::fv_increments() const {
    const Vector rate = law_.drift + law_.compensator;
    std::vector<Vector> out(grid_.steps + 1, Vector::Zero(static_cast<Eigen::Index>(k_dim_)));
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = rate * (active_time(i) - active_time(i - 1));
    return out;
}

SemimartingalePath SemimartingalePath::coarsen(std::size_t factor) const {
    if (factor == 0 || grid_.steps % factor != 0) {
        throw std::invalid_argument("coarsen: factor must divide the step count");
    }
    if (stop_ != grid_.no_stop()) throw std::invalid_argument("coarsen: path is stopped");
    TimeGrid coarse{grid_.horizon, grid_.steps / factor};
    std::vector<Vector> w(coarse.steps, Vector::Zero(static_cast<Eigen::Index>(k_dim_)));
    for (std::size_t i = 0; i < grid_.steps; ++i) w[i / factor] += wiener_[i];
    std::vector<Jump> jumps = jumps_;
    for (auto& j : jumps) j.index = (j.index + factor - 1) / factor;
    return SemimartingalePath(coarse, k_dim_, std::move(w), std::move(jumps), law_);
}

SemimartingalePath SemimartingalePath::stopped_before(std::size_t stop) const {
    SemimartingalePath out = *this;
    out.stop_ = std::min({stop, stop_, grid_.no_stop()});
    out.rebuild();
    return out;
}

SemimartingalePath sample_path(const SemimartingaleSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
    grid.validate();
    spec.validate();
    const auto k = static_cast<Eigen::Index>(spec.k_dim);

    std::vector<Vector> wiener(grid.steps, Vector::Zero(k));
    const bool has_wiener = spec.wiener_cov.size() != 0 && spec.wiener_cov.cwiseAbs().maxCoeff() > 0.0;
    if (has_wiener) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        const Matrix root = psd_sqrt(spec.wiener_cov) * std::sqrt(grid.dt());
        Vector xi(k);
        for (auto& w : wiener) {
            for (Eigen::Index i = 0; i < k; ++i) xi[i] = normal(rng);
            w = root * xi;
        }
    }

    std::vector<Jump> jumps;
    if (spec.jump_rate > 0.0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
        std::mt19937_64 rng(seq);
        std::poisson_distribution<long> count(spec.jump_rate * grid.horizon);
        std::uniform_real_distribution<double> when(0.0, grid.horizon);
        const long n = count(rng);
        jumps.reserve(static_cast<std::size_t>(n));
        for (long j = 0; j < n; ++j) {
            const double t = when(rng);
            const auto raw = static_cast<std::size_t>(std::llround(t / grid.dt()));
            Jump jump;
            jump.index = std::clamp<std::size_t>(raw, 1, grid.steps);
            jump.mark = spec.marks.sample(rng);
            jumps.push_back(std::move(jump));
        }
    }

    PathLaw law;
    law.bracket_rate = (has_wiener ? spec.wiener_cov.trace() : 0.0) + spec.jump_rate * spec.marks.second_moment();
    law.compensator = spec.jump_rate > 0.0 ? Vector(spec.jump_rate * spec.marks.mean()) : Vector::Zero(k);
    law.drift = or_zero(spec.drift, spec.k_dim);
    return SemimartingalePath(grid, spec.k_dim, std::move(wiener), std::move(jumps), std::move(law));
}

ControlPath control_process(const SemimartingalePath& path) {
    const auto pb = path.predictable_bracket();
    const auto jb = path.jump_bracket();
    const auto var = path.variation();
    ControlPath c;
    c.values.resize(pb.size());
    for (std::size_t i = 0; i < pb.size(); ++i) c.values[i] = 8.0 * (pb[i] + jb[i]) + 2.0 * std::max(2.0, var[i]);
    return c;
}

ControlPath stopped_control(const ControlPath& c, std::size_t stop) {
    if (stop >= c.values.size()) return c;
    ControlPath out = c;
    const double frozen = stop == 0 ? c.values.front() : c.values[stop - 1];
    for (std::size_t j = stop; j < out.values.size(); ++j) out.values[j] = frozen;
    return out;
}

OperatorPath OperatorPath::constant(Matrix value, std::size_t steps) {
    OperatorPath p(std::vector<Matrix>{std::move(value)});
    p.steps_ = steps;
    return p;
}

OperatorPath::OperatorPath(std::vector<Matrix> values) : values_(std::move(values)), steps_(values_.size()) {
    if (values_.empty()) throw std::invalid_argument("operator path: no values");
    for (const auto& m : values_) {
        if (m.rows() != values_.front().rows() || m.cols() != values_.front().cols()) {
            throw std::invalid_argument("operator path: inconsistent shapes");
        }
    }
}

double OperatorPath::sq_norm(std::size_t i, double weight) const { return weight * at(i).squaredNorm(); }

std::vector<double> lambda_series(const ControlPath& c, const std::vector<double>& sq_norms) {
    const std::size_t n = c.values.size();
    if (n == 0 || sq_norms.size() + 1 < n) throw std::invalid_argument("lambda functional: integrand shorter than grid");
    std::vector<double> out(n, 0.0);
    double integral = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        integral += sq_norms[j - 1] * (c.values[j] - c.values[j - 1]);
        out[j] = c.values[j] * integral;
    }
    return out;
}

double lambda_functional(const ControlPath& c, const OperatorPath& y, std::size_t index, double weight) {
    if (y.steps() + 1 != c.values.size()) throw std::invalid_argument("lambda functional: integrand on a different grid");
    if (index >= c.values.size()) throw std::out_of_range("lambda functional: index past the grid");
    double integral = 0.0;
    for (std::size_t i = 0; i < index; ++i) integral += y.sq_norm(i, weight) * (c.values[i + 1] - c.values[i]);
    return c.values[index] * integral;
}

std::vector<Vector> stochastic_integral(const OperatorPath& y, const SemimartingalePath& path) {
    if (y.steps() != path.steps()) throw std::invalid_argument("stochastic integral: integrand on a different grid");
    if (y.cols() != path.k_dim()) throw std::invalid_argument("stochastic integral: integrand has wrong column count");
    std::vector<Vector> out(path.steps() + 1, Vector::Zero(static_cast<Eigen::Index>(y.rows())));
    for (std::size_t j = 1; j <= path.steps(); ++j) out[j] = out[j - 1] + y.at(j - 1) * path.increment(j);
    return out;
}

std::vector<double> quadratic_variation(const std::vector<Vector>& w, double weight) {
    std::vector<double> out(w.size(), 0.0);
    for (std::size_t j = 1; j < w.size(); ++j) out[j] = out[j - 1] + weight * (w[j] - w[j - 1]).squaredNorm();
    return out;
}

double gronwall_bound(double a, double b, double ell) {
    if (!(a >= 0.0) || !(b >= 0.0) || !(ell >= 0.0)) {
        throw std::invalid_argument("gronwall_bound: a, b, l must be nonnegative");
    }
    const double r = 2.0 * b * ell;
    if (!std::isfinite(r) || r > 1e7) return std::numeric_limits<double>::infinity();
    const auto terms = static_cast<long>(std::floor(r));
    double sum = 0.0;
    double power = 1.0;
    for (long k = 0; k <= terms; ++k) {
        sum += power;
        power *= r;
        if (!std::isfinite(sum)) return std::numeric_limits<double>::infinity();
    }
    return a * sum;
}

}  // namespace semimono::noise
