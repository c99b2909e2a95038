#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semimono::monotone {

/// Closed interval [lo, hi]; a single value when lo == hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double y, double tol = 0.0) const { return y >= lo - tol && y <= hi + tol; }
    bool single_valued() const { return lo == hi; }
};

/// One-sided evaluators of a nondecreasing function gamma0 : R -> R.
///
/// `left(x)` and `right(x)` return gamma0(x-) and gamma0(x+). `slope` is the
/// derivative of gamma0 and is only supplied for continuous, differentiable
/// functions; it enables Newton refinement in the prox solver. `nearest_jump`
/// returns the discontinuity closest to x (NaN when gamma0 is continuous) and
/// lets solvers land exactly on jump points.
struct IncreasingFunction {
    std::function<double(double)> left;
    std::function<double(double)> right;
    std::function<double(double)> slope;
    std::function<double(double)> nearest_jump;
};

/// Deterministic time modulation g(t) > 0 of a graph: beta(t, x) = g(t) beta(x).
using Modulation = std::function<double(double)>;

/// Name plus numeric parameters of a graph or potential, serialisable to a
/// text config block.
struct GraphSpec {
    std::string name;
    std::map<std::string, double> params;

    std::string to_config_block(const std::string& section = "graph") const;
    static GraphSpec from_config_block(const std::string& text);
    bool operator==(const GraphSpec&) const = default;
};

/// Maximal monotone graph on R obtained from an increasing function by
/// filling its jumps: beta(x) = [gamma0(x-), gamma0(x+)].
///
/// Invariants: everywhere defined with bounded values, and 0 in beta(0).
class ScalarGraph {
public:
    ScalarGraph(std::string name, IncreasingFunction fn, Modulation modulation = {});

    const std::string& name() const { return name_; }

    /// beta(x); throws std::domain_error if gamma0 is not finite at x.
    Interval at(double x) const;
    /// g(t) beta(x).
    Interval at(double x, double t) const;

    double scale(double t) const { return modulation_ ? modulation_(t) : 1.0; }
    bool modulated() const { return static_cast<bool>(modulation_); }
    ScalarGraph with_modulation(Modulation modulation) const;

    bool differentiable() const { return static_cast<bool>(fn_.slope); }
    double slope(double x) const { return fn_.slope(x); }
    std::optional<double> nearest_jump(double x) const;

    /// Element of beta(x) with the smallest absolute value.
    double min_section(double x) const;

    /// y in g(t) beta([x - eps, x + eps]) up to tol. Used to test graph
    /// membership of solver output whose x is only known to solver accuracy.
    bool contains(double x, double y, double eps, double tol, double t = 0.0) const;

private:
    std::string name_;
    IncreasingFunction fn_;
    Modulation modulation_;
};

/// Builds the filled graph from exact one-sided evaluators.
/// Throws std::invalid_argument if the function is not finite on a probe
/// grid, is not nondecreasing there, or violates 0 in beta(0).
ScalarGraph fill_jumps(IncreasingFunction fn, std::string name = "custom");

/// Builds the filled graph from a plain callable, estimating one-sided limits
/// by probing at x -/+ probe*max(1,|x|). A difference larger than
/// 1e-6*(1+|gamma0(x)|) is treated as a jump.
ScalarGraph fill_jumps(std::function<double(double)> gamma0, std::string name = "custom",
                       double probe = 1e-9);

struct ProxOptions {
    double tolerance = 1e-12;
    int max_iterations = 200;
};

/// (I + lambda beta(t, .))^{-1} x. Throws std::invalid_argument for
/// lambda <= 0 and NumericalAbort if the bracketed solve does not converge.
double resolvent(const ScalarGraph& g, double lambda, double x, double t = 0.0,
                 const ProxOptions& options = {});

/// Yosida approximation (x - J_lambda x) / lambda.
double yosida(const ScalarGraph& g, double lambda, double x, double t = 0.0,
              const ProxOptions& options = {});

/// Resolvent of the Yosida approximation: (I + mu beta_lambda)^{-1} x, via
/// the closed form lambda/(lambda+mu) x + mu/(lambda+mu) J_{lambda+mu} x.
double yosida_resolvent(const ScalarGraph& g, double lambda, double mu, double x, double t = 0.0,
                        const ProxOptions& options = {});

/// Convex potential j >= 0 with j(0) = 0 and subdifferential `graph`.
class ConvexPotential {
public:
    ConvexPotential(std::string name, std::function<double(double)> j, ScalarGraph graph,
                    double symmetry_constant);

    const std::string& name() const { return name_; }
    double operator()(double x) const { return j_(x); }
    const ScalarGraph& graph() const { return graph_; }
    /// Bound on j(x)/j(-x) for large |x|; +inf when the potential is one-sided
    /// or grows faster on one side.
    double symmetry_constant() const { return symmetry_constant_; }

private:
    std::string name_;
    std::function<double(double)> j_;
    ScalarGraph graph_;
    double symmetry_constant_;
};

/// Moreau envelope inf_s |x-s|^2/(2 lambda) + j(s), computed by direct 1-D
/// minimisation (independent of the resolvent).
double moreau(const ConvexPotential& p, double lambda, double x);

/// j_lambda(x) - j(J x) - |x - J x|^2/(2 lambda).
double moreau_identity_residual(const ConvexPotential& p, double lambda, double x);

struct ConjugateValue {
    double value = 0.0;
    /// false when the supremum is not attained at a finite point
    bool attained = true;
};

/// j*(y) = sup_x xy - j(x), evaluated at a point x with y in beta(x).
/// Returns +inf when the supremum diverges.
ConjugateValue conjugate_detail(const ConvexPotential& p, double y);
double conjugate(const ConvexPotential& p, double y);

/// j(x) + j*(y) - xy (nonnegative; zero iff y in beta(x)).
double fenchel_young_gap(const ConvexPotential& p, double x, double y);

/// |xy - j(x) - j*(y)| <= tol.
bool membership(const ConvexPotential& p, double x, double y, double tol);

struct SymmetryCheck {
    double max_ratio = 0.0;
    double bound = 0.0;
    bool within = false;
};

/// Samples j(x)/j(-x) for x_big <= |x| <= 100 x_big and compares the
/// maximum against the stored constant.
SymmetryCheck check_symmetry(const ConvexPotential& p, double x_big, int samples = 64);

// Built-in library.
ScalarGraph zero_graph();
ScalarGraph identity_graph();
ScalarGraph power_graph(double p);
ScalarGraph exponential_graph();
ScalarGraph heaviside_graph();
ScalarGraph floor_graph();

ConvexPotential zero_potential();
ConvexPotential quadratic_potential();
ConvexPotential power_potential(double p);
ConvexPotential exponential_potential();
ConvexPotential heaviside_potential();
ConvexPotential floor_potential();

/// Sorted names accepted by make_graph / make_potential.
std::vector<std::string> builtin_graph_names();

/// Throws std::invalid_argument("graph block: unknown name ...") for
/// unknown names and for invalid parameters.
ScalarGraph make_graph(const GraphSpec& spec);
ConvexPotential make_potential(const GraphSpec& spec);

/// The five-graph verification library: identity, power p=3, exponential,
/// heaviside-filled, floor.
std::vector<GraphSpec> builtin_library();

}  // namespace semimono::monotone
