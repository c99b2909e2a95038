#pragma once

#include "semimono/stats.hpp"
#include "semimono/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace semimono::noise {

/// Uniform grid 0 = t_0 < ... < t_N = horizon.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 256;

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t i) const { return horizon * static_cast<double>(i) / static_cast<double>(steps); }
    /// Throws std::invalid_argument for an empty grid.
    void validate() const;
    /// Index one past the last grid point; the stopping index meaning
    /// "not stopped on [0, T]".
    std::size_t no_stop() const { return steps + 1; }
};

/// Distribution of jump marks in R^k.
struct MarkLaw {
    enum class Kind { constant, gaussian, rademacher };
    Kind kind = Kind::constant;
    /// Constant value, Gaussian mean, or Rademacher magnitude (per component).
    Vector location;
    /// Per-component standard deviation for the Gaussian law.
    double scale = 0.0;

    Vector mean() const;
    double second_moment() const;
    Vector sample(std::mt19937_64& rng) const;
};

/// K = R^k valued semimartingale: Wiener(Q) + compound Poisson + linear drift.
struct SemimartingaleSpec {
    std::size_t k_dim = 1;
    Matrix wiener_cov;  // k x k, SPD or zero; empty means zero
    double jump_rate = 0.0;
    MarkLaw marks;
    Vector drift;  // drift rate; empty means zero

    void validate() const;

    static SemimartingaleSpec zero(std::size_t k);
    static SemimartingaleSpec wiener(std::size_t k, double variance);
    static SemimartingaleSpec compound_poisson(std::size_t k, double rate, MarkLaw marks);
};

struct Jump {
    std::size_t index = 0;  // grid index in [1, N]
    Vector mark;
};

/// Constants of the canonical decomposition Z = M + V of the simulated class:
/// M = W + (J - compensator t), V = (drift + compensator) t.
struct PathLaw {
    double bracket_rate = 0.0;  // tr Q + rate E|mark|^2, so <M,M>(t) = bracket_rate t
    Vector compensator;         // rate E[mark]
    Vector drift;
};

/// One trajectory of Z on a grid, with its decomposition.
///
/// Increment i (i = 1..N) is Z(t_i) - Z(t_{i-1}); jumps sit on grid points.
class SemimartingalePath {
public:
    SemimartingalePath(TimeGrid grid, std::size_t k_dim, std::vector<Vector> wiener_increments,
                       std::vector<Jump> jumps, PathLaw law);

    static SemimartingalePath zero(TimeGrid grid, std::size_t k_dim);

    const TimeGrid& grid() const { return grid_; }
    std::size_t steps() const { return grid_.steps; }
    std::size_t k_dim() const { return k_dim_; }
    const PathLaw& law() const { return law_; }
    const std::vector<Jump>& jumps() const { return jumps_; }
    const std::vector<Vector>& wiener_increments() const { return wiener_; }
    /// Stopping index of Z^{tau-}; grid().no_stop() when not stopped.
    std::size_t stop() const { return stop_; }

    /// dZ_i for i in [1, N]; increment(0) is zero.
    const Vector& increment(std::size_t i) const { return dz_[i]; }
    /// Z(t_0), ..., Z(t_N) with Z(0) = 0.
    const std::vector<Vector>& values() const { return z_; }

    std::vector<double> predictable_bracket() const;  // <M,M>(t_i)
    std::vector<double> jump_bracket() const;         // [M^d,M^d](t_i)
    std::vector<double> variation() const;            // |V|(t_i)
    std::vector<Vector> martingale_part() const;      // M(t_i)
    std::vector<Vector> jump_martingale_part() const; // M^d(t_i)
    std::vector<Vector> fv_increments() const;        // V increments

    /// Aggregates increments onto the grid with steps/factor steps; jumps
    /// in (t_{c-1}, t_c] of the coarse grid land on t_c.
    SemimartingalePath coarsen(std::size_t factor) const;

    /// Z^{tau-} for a grid stopping index: increments from `stop` on removed.
    SemimartingalePath stopped_before(std::size_t stop) const;

private:
    void rebuild();
    double active_time(std::size_t i) const;

    TimeGrid grid_;
    std::size_t k_dim_;
    std::vector<Vector> wiener_;
    std::vector<Jump> jumps_;
    PathLaw law_;
    std::size_t stop_;
    std::vector<Vector> dz_;
    std::vector<Vector> z_;
};

/// Reproducible per (spec, grid, seed); Wiener and jump parts use separate
/// engines so that changing one part of the noise spec leaves the other untouched.
/// Jump times are uniform on [0, T] and snapped to the nearest grid point
/// (never t_0).
SemimartingalePath sample_path(const SemimartingaleSpec& spec, const TimeGrid& grid, std::uint64_t seed);

/// Nondecreasing right-continuous real path on a grid.
struct ControlPath {
    std::vector<double> values;
};

/// Increasing, nonnegative, right-continuous adapted path.
struct LipschitzProcess {
    std::vector<double> values;
};

/// C = 8(<M,M> + [M^d,M^d]) + 2 max(2, |V|).
ControlPath control_process(const SemimartingalePath& path);

/// C^{tau-}: C(t_j) for j < stop, C(t_{stop-1}) afterwards. stop = 0 freezes
/// at C(0); stop >= N+1 leaves C unchanged.
ControlPath stopped_control(const ControlPath& c, std::size_t stop);

/// Operator-valued predictable path: at(i) multiplies increment i+1.
class OperatorPath {
public:
    static OperatorPath constant(Matrix value, std::size_t steps);
    explicit OperatorPath(std::vector<Matrix> values);

    std::size_t steps() const { return steps_; }
    const Matrix& at(std::size_t i) const { return values_.size() == 1 ? values_.front() : values_[i]; }
    std::size_t rows() const { return static_cast<std::size_t>(values_.front().rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.front().cols()); }
    bool is_constant() const { return values_.size() == 1; }

    /// weight * |Y_i|_F^2, the Hilbert-Schmidt bound of the operator norm
    /// into a space with quadrature weight `weight`.
    double sq_norm(std::size_t i, double weight = 1.0) const;

private:
    std::vector<Matrix> values_;
    std::size_t steps_;
};

/// lambda^C_t(Y) = C(t_j) sum_{i<j} |Y_i|^2 (C_{i+1} - C_i), t = t_j.
double lambda_functional(const ControlPath& c, const OperatorPath& y, std::size_t index, double weight = 1.0);

/// Same functional from precomputed squared norms |Y_i|^2, for every index.
std::vector<double> lambda_series(const ControlPath& c, const std::vector<double>& sq_norms);

/// (Y.Z)(t_j) = sum_{i<j} Y_i dZ_{i+1}. Throws std::invalid_argument when Y
/// lives on a different grid or has the wrong column count.
std::vector<Vector> stochastic_integral(const OperatorPath& y, const SemimartingalePath& path);

/// Discrete bracket sum_{i<=j} weight |W_i - W_{i-1}|^2.
std::vector<double> quadratic_variation(const std::vector<Vector>& w, double weight = 1.0);

/// Predictable integrand rule: the matrix for increment step+1, computed
/// from Z(t_0..t_step) only.
using IntegrandRule = std::function<Matrix(std::size_t step, const SemimartingalePath& z)>;

/// Grid stopping rule: returns an index in [0, N+1] (N+1 = not stopped),
/// deciding at t_j from data up to t_j only.
using StopRule = std::function<std::size_t(const SemimartingalePath& z, const std::vector<Vector>& integral)>;

struct InequalityCheck {
    Estimate lhs;
    Estimate rhs;
    Estimate difference;  // paired lhs - rhs
    double relative_error = 0.0;
    bool pass = false;
};

struct MpAuditReport {
    InequalityCheck square;  // E sup |Y.Z|^2 <= E C_{tau-} int |Y|^2 dC
    InequalityCheck root;    // E sup |Y.Z| <= 2 E (C_{tau-} int |Y|^2 dC)^{1/2}
    std::size_t n_paths = 0;
    std::uint64_t seed_base = 0;
    bool pass() const { return square.pass && root.pass; }
};

/// Monte Carlo audit of the control-process inequality and its square-root
/// variant. Path p uses seed seed_base + p. A check passes iff
/// lhs <= rhs (1 + 3 sigma), sigma the standard error of the paired
/// difference relative to rhs. Throws std::invalid_argument for
/// n_paths < 1000.
MpAuditReport mp_inequality_audit(const SemimartingaleSpec& spec, const TimeGrid& grid, const IntegrandRule& y,
                                  const StopRule& stop, std::size_t n_paths, std::uint64_t seed_base,
                                  std::size_t workers = 1);

/// a sum_{k=0}^{floor(2 b l)} (2 b l)^k.
double gronwall_bound(double a, double b, double ell);

}  // namespace semimono::noise
