#pragma once

#include "semimono/grid_operator.hpp"
#include "semimono/integrator.hpp"
#include "semimono/monotone.hpp"
#include "semimono/noise.hpp"
#include "semimono/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semimono::analysis {

/// Cumulative terms of the Ito formula for the square, one entry per grid
/// point. Inner products are H inner products.
struct EnergyLedger {
    std::vector<double> half_norm_sq;  // |x_j|^2 / 2
    std::vector<double> v_integral;    // sum_{k<j} dt <A x_{k+1}, x_{k+1}>
    std::vector<double> xi_integral;   // sum_{k<j} dt <xi_{k+1}, x_{k+1}>
    std::vector<double> half_bracket;  // [G.Z, G.Z]_j / 2
    std::vector<double> cross;         // ((X_- G).Z)_j
    std::vector<double> residual;

    double max_abs_residual() const;
    double terminal_residual() const { return residual.empty() ? 0.0 : residual.back(); }
};

/// Builds the ledger from the solution and (G, Z) directly; the forcing is
/// recomputed from G and Z rather than read from the solver.
EnergyLedger energy_ledger(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                           const noise::OperatorPath& g, const noise::SemimartingalePath& z);

std::vector<double> ito_residual(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                                 const noise::OperatorPath& g, const noise::SemimartingalePath& z);

struct AprioriTriple {
    double sup_norm_sq = 0.0;  // sup_k |x_k|^2
    double v_integral = 0.0;   // sum dt |x_{k+1}|_V^2
    double xi_integral = 0.0;  // sum dt <xi_{k+1}, x_{k+1}>
    double total() const { return sup_norm_sq + v_integral + xi_integral; }
};

AprioriTriple apriori_monitor(const grid::GridOperator& a, const integrator::SolutionPath& sol);

/// Data side of the a priori estimate: |x0|^2, lambda^C_T(G), [G.Z, G.Z]_T.
struct AprioriData {
    double initial = 0.0;
    double lambda_c = 0.0;
    double bracket = 0.0;
    double total() const { return initial + lambda_c + bracket; }
};

AprioriData apriori_data(const grid::GridOperator& a, const noise::OperatorPath& g,
                         const noise::SemimartingalePath& z, const Vector& x0);

/// Quantities used by the uniform-integrability criterion. Each sample is a
/// function on a probability space of equally weighted atoms.
struct UiReport {
    double epsilon = 0.0;
    double bound = 0.0;        // declared C
    double sup_mean = 0.0;     // sup over the family of mean j*(g)
    double level = 0.0;        // M, with C/M < epsilon/2
    double radius = 0.0;       // R with j*(y) > M|y| for |y| > R
    double delta = 0.0;        // epsilon / (2R)
    double worst_tail = 0.0;   // largest integral of |g| over a set of measure < delta
    bool bounded = false;
    bool superlinear = false;
    bool tail_ok = false;
    bool pass() const { return bounded && superlinear && tail_ok; }
};

UiReport uniform_integrability_diag(const std::vector<std::vector<double>>& family,
                                    const monotone::ConvexPotential& p, double bound, double epsilon);

// ---------------------------------------------------------------------------
// Study reports

struct StudyRow {
    std::string quantity;
    double parameter = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct StudyReport {
    std::string kind;
    std::uint64_t seed_base = 0;
    std::vector<StudyRow> rows;
    std::vector<Check> checks;
    double runtime_seconds = 0.0;

    bool pass() const;
    void add(std::string quantity, double parameter, const Estimate& e);
    void add(std::string quantity, double parameter, double value, std::size_t n_paths = 1);
    void check(std::string name, bool pass, std::string detail);
};

/// Shared SPDE test problem: Dirichlet Laplacian on (0, length), smooth
/// noise coefficient G with columns g_scale sin((c+1) pi x / length),
/// x0 = x0_scale sin(pi x / length).
struct ProblemSetup {
    std::size_t nodes = 32;
    double length = 1.0;
    double horizon = 1.0;
    std::size_t steps = 1024;
    double g_scale = 0.5;
    double x0_scale = 1.0;
    noise::SemimartingaleSpec noise = mixed_noise();

    grid::GridOperator op() const;
    noise::TimeGrid grid() const { return {horizon, steps}; }
    Matrix g_matrix() const;
    Vector x0() const;
    Vector mode(int k) const;  // sin(k pi x / length) on the nodes

    /// k = 2: Wiener with Q = I/2, rate-2 Gaussian marks (sd 0.5), small drift.
    static noise::SemimartingaleSpec mixed_noise();
};

struct MonotoneSuiteConfig {
    std::size_t samples = 10000;
    std::uint64_t seed_base = 1;
};
StudyReport monotone_suite(const MonotoneSuiteConfig& config);

struct HeatOracleConfig {
    std::size_t nodes = 64;
    double horizon = 1.0;
    std::size_t steps = 1024;
    double tolerance_factor = 5.0;  // error <= factor (dt + dx^2)
};
StudyReport heat_oracle(const HeatOracleConfig& config);

struct MpMatrixConfig {
    std::size_t n_paths = 10000;
    std::size_t steps = 256;
    std::uint64_t seed_base = 1000;
    std::size_t workers = 1;
};
/// {Wiener, compound Poisson, mixed} x {constant, path-dependent Y} x
/// {fixed time, first-passage stop}.
StudyReport mp_audit_matrix(const MpMatrixConfig& config);

struct ResidualConfig {
    ProblemSetup setup{16, 1.0, 1.0, 256};
    std::vector<std::size_t> levels{256, 512, 1024};
    std::size_t n_paths = 50;
    std::uint64_t seed_base = 2000;
    double ratio_lo = 1.6;
    double ratio_hi = 2.4;
    std::size_t workers = 1;
};
/// Energy residual under dyadic refinement for identity (Lipschitz) and
/// exponential graphs, nested grids sampled at the finest level.
StudyReport energy_residual_study(const ResidualConfig& config);

struct AprioriConfig {
    ProblemSetup setup{16, 1.0, 1.0, 256};
    std::size_t n_paths = 1000;
    double kappa = 64.0;
    double min_fraction = 0.99;
    std::uint64_t seed_base = 3000;
    std::size_t workers = 1;
};
StudyReport apriori_study(const AprioriConfig& config);

struct LambdaConfig {
    ProblemSetup setup{32, 1.0, 1.0, 1024};
    std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<monotone::GraphSpec> graphs{{"exponential", {}}, {"heaviside-filled", {}}};
    std::size_t n_paths = 20;
    std::uint64_t seed_base = 4000;
    std::size_t workers = 1;
};
/// e_lambda = mean sup_k |x^lambda_k - x^{lambda/2}_k|_H and the distance to
/// the limit scheme, per graph, with same-seed coupling.
StudyReport lambda_study(const LambdaConfig& config);

struct PicardConfig {
    std::size_t nodes = 16;
    std::size_t steps = 512;
    double horizon = 1.0;
    double alpha = 0.25;
    double tolerance = 1e-10;
    int max_picard = 25;
    double coupling = 0.1;  // B(u) = coupling diag(sin u)
    std::uint64_t seed_base = 5000;
    std::size_t n_paths = 4;
};
StudyReport picard_study(const PicardConfig& config);

struct DependenceConfig {
    ProblemSetup setup{16, 1.0, 1.0, 256};
    monotone::GraphSpec graph{"exponential", {}};
    std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    std::size_t n_paths = 200;
    double max_spread = 4.0;
    std::uint64_t seed_base = 6000;
    std::size_t workers = 1;
};
StudyReport dependence_study(const DependenceConfig& config);

struct GronwallConfig {
    std::size_t runs = 1000;
    std::size_t paths_per_run = 64;
    std::size_t steps = 64;
    std::uint64_t seed_base = 7000;
};
/// Synthetic (phi, A) pairs with phi = phi_0 + b int phi_- dA pathwise and
/// sup A = l; the bound is checked against the empirical expectation.
StudyReport gronwall_study(const GronwallConfig& config);

}  // namespace semimono::analysis
