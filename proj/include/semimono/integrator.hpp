#pragma once

#include "semimono/grid_operator.hpp"
#include "semimono/monotone.hpp"
#include "semimono/noise.hpp"

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace semimono::integrator {

/// G given as an operator path on the noise grid (n x k per step).
struct AdditiveNoise {
    noise::OperatorPath g;
};

/// B(t_i, u): the n x k operator multiplying increment i+1, computed from
/// u(t_0), ..., u(t_i) (`past.back()` is u(t_i)).
using CoefficientRule = std::function<Matrix(std::size_t step, std::span<const Vector> past)>;

/// Multiplicative coefficient with its Lipschitz process L on the noise grid.
struct MultiplicativeNoise {
    CoefficientRule b;
    noise::LipschitzProcess lipschitz;
};

using NoiseCoefficient = std::variant<AdditiveNoise, MultiplicativeNoise>;

/// Discrete trajectory (X, xi) on a grid, plus the forcing G_k dZ_{k+1}
/// actually applied in each step.
struct SolutionPath {
    noise::TimeGrid grid;
    std::vector<Vector> x;        // x_0 .. x_N
    std::vector<Vector> xi;       // xi_0 .. xi_N
    std::vector<Vector> forcing;  // forcing[k+1] = G_k dZ_{k+1}; forcing[0] = 0
    /// Segment boundaries tau_0 = 0 < tau_1 < ... (extend_solution only).
    std::vector<std::size_t> segments;
    /// Steps the overflow guard had to split.
    std::size_t split_steps = 0;

    std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

struct SchemeOptions {
    monotone::ProxOptions prox;
    double overflow_guard = 1e12;
    int max_splits = 20;
    /// Slack for the per-step check xi_{k+1} in beta(x_{k+1}).
    double membership_tol = 1e-7;
};

/// Regularized scheme: y = x_k + G_k dZ_{k+1}, z = (I + dt A)^{-1} y,
/// x_{k+1} = (I + dt beta_lambda)^{-1} z per node, xi_{k+1} = beta_lambda(x_{k+1}).
/// Steps whose result exceeds the overflow guard are split in halves (drift
/// step and increment alike); NumericalAbort once max_splits is exhausted.
SolutionPath solve_regularized(const grid::GridOperator& a, const monotone::ScalarGraph& g, double lambda,
                               const AdditiveNoise& noise, const noise::SemimartingalePath& z, const Vector& x0,
                               const SchemeOptions& options = {});

/// Limit scheme: same splitting with the exact resolvent of beta; throws
/// NumericalAbort when the prox fails or xi_{k+1} leaves beta(x_{k+1}).
SolutionPath solve_limit(const grid::GridOperator& a, const monotone::ScalarGraph& g, const AdditiveNoise& noise,
                         const noise::SemimartingalePath& z, const Vector& x0, const SchemeOptions& options = {});

struct PicardOptions {
    double alpha = 0.25;
    int max_picard = 25;
    double tolerance = 1e-10;
    SchemeOptions scheme;
};

struct PicardResult {
    SolutionPath path;         // valid on [start, stop]; earlier entries copy x0
    std::size_t start = 0;
    std::size_t stop = 0;      // tau as a grid index
    int iterations = 0;
    std::vector<double> distances;  // sup_k |Y^{m+1}_k - Y^m_k|_H
    std::vector<double> ratios;     // distances[m] / distances[m-1]
    bool converged = false;
};

/// First index j >= start with C_j (L_j - L_start) >= alpha, capped at N.
std::size_t budget_stop(const noise::ControlPath& c, const noise::LipschitzProcess& l, std::size_t start,
                        double alpha);

/// Picard iteration for the multiplicative equation on [t_start, tau]:
/// Y^0 = x0 (or `initial_guess`), Y^{m+1} = limit scheme with G = B(., Y^m).
/// Stops when successive iterates are within tolerance; throws
/// NumericalAbort after three consecutive ratios >= 1 or when max_picard is
/// exhausted. `history` supplies u(t_0..t_start) for coefficients that look
/// further back than the segment start; by default the past is frozen at x0.
PicardResult solve_multiplicative(const grid::GridOperator& a, const monotone::ScalarGraph& g,
                                  const MultiplicativeNoise& noise, const noise::SemimartingalePath& z,
                                  const Vector& x0, const PicardOptions& options = {}, std::size_t start = 0,
                                  const std::vector<Vector>* initial_guess = nullptr,
                                  std::span<const Vector> history = {});

struct ExtensionResult {
    SolutionPath path;
    std::vector<std::size_t> taus;  // tau_1, tau_2, ... including repeated (degenerate) entries
    std::size_t segments = 0;       // nondegenerate segments solved
    std::size_t degenerate = 0;     // steps with |X(tau_n)| > n
    int max_iterations = 0;
    double max_ratio = 0.0;
};

/// Patches Picard segments: tau_{n+1} = tau_n if |X(tau_n)|_H > n, otherwise
/// the next budget stop from tau_n. Additive noise is solved directly by the
/// limit scheme. NumericalAbort after 10^6 stopping times without reaching T.
ExtensionResult extend_solution(const grid::GridOperator& a, const monotone::ScalarGraph& g,
                                const NoiseCoefficient& noise, const noise::SemimartingalePath& z, const Vector& x0,
                                const PicardOptions& options = {});

/// sum_k C_k (L_{k+1} - L_k) / alpha: the deterministic segment budget.
double predicted_segments(const noise::ControlPath& c, const noise::LipschitzProcess& l, double alpha);

}  // namespace semimono::integrator
