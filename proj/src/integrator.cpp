#include "semimono/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace semimono::integrator {

namespace {

using monotone::ScalarGraph;
using noise::SemimartingalePath;

// Per-node drift solve x = (I + dt beta_t)^{-1} z for either scheme.
using NodeSolve = std::function<double(double z, double dt, double t)>;

struct Stepper {
    const grid::GridOperator& a;
    NodeSolve node;
    SchemeOptions options;
    bool guarded;

    // One splitting step from x with forcing f over dt ending at t_next.
    // Writes x_{k+1} and xi_{k+1}; returns the number of extra splits used.
    std::size_t step(const Vector& x, const Vector& f, double dt, double t_next, Vector& x_out, Vector& xi_out,
                     int depth = 0) const {
        const Vector y = x + f;
        const Vector z = a.solve_shifted(dt, y);
        x_out.resize(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) x_out[i] = node(z[i], dt, t_next);
        xi_out = (z - x_out) / dt;
        if (!guarded) return 0;
        const bool blown = !x_out.allFinite() || x_out.cwiseAbs().maxCoeff() > options.overflow_guard;
        if (!blown) return 0;
        if (depth >= options.max_splits) {
            throw NumericalAbort("regularized scheme: overflow guard exceeded after " + std::to_string(depth) +
                                 " step splits");
        }
        Vector mid;
        Vector mid_xi;
        std::size_t used = 1;
        used += step(x, 0.5 * f, 0.5 * dt, t_next - 0.5 * dt, mid, mid_xi, depth + 1);
        used += step(mid, 0.5 * f, 0.5 * dt, t_next, x_out, xi_out, depth + 1);
        return used;
    }
};

void check_inputs(const grid::GridOperator& a, const SemimartingalePath& z, const Vector& x0) {
    if (static_cast<std::size_t>(x0.size()) != a.dim()) throw std::invalid_argument("solver: x0 has wrong dimension");
    (void)z;
}

void check_additive(const grid::GridOperator& a, const AdditiveNoise& noise, const SemimartingalePath& z) {
    if (noise.g.steps() != z.steps()) throw std::invalid_argument("solver: G lives on a different grid");
    if (noise.g.rows() != a.dim() || noise.g.cols() != z.k_dim()) {
        throw std::invalid_argument("solver: G must be n x k");
    }
}

SolutionPath blank_path(const SemimartingalePath& z, const Vector& x0) {
    SolutionPath p;
    p.grid = z.grid();
    p.x.assign(z.steps() + 1, x0);
    p.xi.assign(z.steps() + 1, Vector::Zero(x0.size()));
    p.forcing.assign(z.steps() + 1, Vector::Zero(x0.size()));
    return p;
}

Vector min_section(const ScalarGraph& g, const Vector& x, double t) {
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = g.scale(t) * g.min_section(x[i]);
    return out;
}

void check_membership(const ScalarGraph& g, const Vector& x, const Vector& xi, double t, const SchemeOptions& o,
                      std::size_t k) {
    const double eps = 10.0 * o.prox.tolerance * (1.0 + x.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!g.contains(x[i], xi[i], eps, o.membership_tol * (1.0 + std::abs(xi[i])), t)) {
            throw NumericalAbort("limit scheme: xi left beta(x) at step " + std::to_string(k) + ", node " +
                                 std::to_string(i));
        }
    }
}

Stepper limit_stepper(const grid::GridOperator& a, const ScalarGraph& g, const SchemeOptions& options) {
    return Stepper{a,
                   [&g, prox = options.prox](double z, double dt, double t) {
                       return monotone::resolvent(g, dt, z, t, prox);
                   },
                   options, false};
}

// Runs the limit scheme on steps (start, stop] with forcing from `forcing_at`.
template <class Forcing>
void march_limit(const Stepper& stepper, const ScalarGraph& g, const SemimartingalePath& z, SolutionPath& path,
                 std::size_t start, std::size_t stop, Forcing&& forcing_at) {
    const double dt = z.grid().dt();
    for (std::size_t k = start; k < stop; ++k) {
        path.forcing[k + 1] = forcing_at(k);
        const double t_next = z.grid().time(k + 1);
        try {
            stepper.step(path.x[k], path.forcing[k + 1], dt, t_next, path.x[k + 1], path.xi[k + 1]);
        } catch (const NumericalAbort& e) {
            throw NumericalAbort(std::string(e.what()) + " (step " + std::to_string(k + 1) + ")");
        }
        check_membership(g, path.x[k + 1], path.xi[k + 1], t_next, stepper.options, k + 1);
    }
}

}  // namespace

SolutionPath solve_regularized(const grid::GridOperator& a, const ScalarGraph& g, double lambda,
                               const AdditiveNoise& noise, const SemimartingalePath& z, const Vector& x0,
                               const SchemeOptions& options) {
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_regularized: lambda must be positive");
    check_inputs(a, z, x0);
    check_additive(a, noise, z);
    const Stepper stepper{a,
                          [&g, lambda, prox = options.prox](double zi, double dt, double t) {
                              return monotone::yosida_resolvent(g, lambda, dt, zi, t, prox);
                          },
                          options, true};
    SolutionPath path = blank_path(z, x0);
    for (Eigen::Index i = 0; i < x0.size(); ++i) path.xi[0][i] = monotone::yosida(g, lambda, x0[i], 0.0, options.prox);
    const double dt = z.grid().dt();
    for (std::size_t k = 0; k < z.steps(); ++k) {
        path.forcing[k + 1] = noise.g.at(k) * z.increment(k + 1);
        path.split_steps += stepper.step(path.x[k], path.forcing[k + 1], dt, z.grid().time(k + 1), path.x[k + 1],
                                         path.xi[k + 1]) > 0
                                ? 1
                                : 0;
    }
    return path;
}

SolutionPath solve_limit(const grid::GridOperator& a, const ScalarGraph& g, const AdditiveNoise& noise,
                         const SemimartingalePath& z, const Vector& x0, const SchemeOptions& options) {
    check_inputs(a, z, x0);
    check_additive(a, noise, z);
    const Stepper stepper = limit_stepper(a, g, options);
    SolutionPath path = blank_path(z, x0);
    path.xi[0] = min_section(g, x0, 0.0);
    march_limit(stepper, g, z, path, 0, z.steps(), [&](std::size_t k) { return Vector(noise.g.at(k) * z.increment(k + 1)); });
    return path;
}

std::size_t budget_stop(const noise::ControlPath& c, const noise::LipschitzProcess& l, std::size_t start,
                        double alpha) {
    const std::size_t n = c.values.size() - 1;
    if (l.values.size() != c.values.size()) throw std::invalid_argument("budget_stop: L lives on a different grid");
    for (std::size_t j = start; j <= n; ++j) {
        if (c.values[j] * (l.values[j] - l.values[start]) >= alpha) return j;
    }
    return n;
}

PicardResult solve_multiplicative(const grid::GridOperator& a, const ScalarGraph& g, const MultiplicativeNoise& noise,
                                  const SemimartingalePath& z, const Vector& x0, const PicardOptions& options,
                                  std::size_t start, const std::vector<Vector>* initial_guess,
                                  std::span<const Vector> history) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw std::invalid_argument("solve_multiplicative: alpha must lie in (0, 1)");
    }
    check_inputs(a, z, x0);
    if (start > z.steps()) throw std::invalid_argument("solve_multiplicative: start past the grid");
    if (noise.lipschitz.values.size() != z.steps() + 1) {
        throw std::invalid_argument("solve_multiplicative: L lives on a different grid");
    }

    PicardResult result;
    result.start = start;
    result.stop = budget_stop(noise::control_process(z), noise.lipschitz, start, options.alpha);

    const Stepper stepper = limit_stepper(a, g, options.scheme);
    SolutionPath current = blank_path(z, x0);
    if (initial_guess != nullptr) {
        if (initial_guess->size() != z.steps() + 1) throw std::invalid_argument("solve_multiplicative: bad initial guess");
        for (std::size_t k = start + 1; k <= result.stop; ++k) current.x[k] = (*initial_guess)[k];
    }
    if (!history.empty()) {
        if (history.size() != start + 1) throw std::invalid_argument("solve_multiplicative: history must end at start");
        for (std::size_t k = 0; k < start; ++k) current.x[k] = history[k];
    }
    current.xi[start] = min_section(g, x0, z.grid().time(start));

    int bad_ratios = 0;
    while (true) {
        SolutionPath next = current;
        next.x[start] = x0;
        const std::span<const Vector> previous(current.x);
        march_limit(stepper, g, z, next, start, result.stop, [&](std::size_t k) {
            return Vector(noise.b(k, previous.first(k + 1)) * z.increment(k + 1));
        });
        ++result.iterations;

        double distance = 0.0;
        for (std::size_t k = start; k <= result.stop; ++k) distance = std::max(distance, a.h_norm(next.x[k] - current.x[k]));
        if (!result.distances.empty()) {
            const double ratio = result.distances.back() > 0.0 ? distance / result.distances.back() : 0.0;
            result.ratios.push_back(ratio);
            bad_ratios = ratio >= 1.0 ? bad_ratios + 1 : 0;
        }
        result.distances.push_back(distance);
        current = std::move(next);

        if (distance < options.tolerance) {
            result.converged = true;
            break;
        }
        if (bad_ratios >= 3) {
            throw NumericalAbort("picard iteration does not contract (3 consecutive ratios >= 1); try a smaller alpha");
        }
        if (result.iterations >= options.max_picard) {
            throw NumericalAbort("picard iteration did not reach tolerance in " + std::to_string(options.max_picard) +
                                 " iterations; try a smaller alpha");
        }
    }
    result.path = std::move(current);
    return result;
}

ExtensionResult extend_solution(const grid::GridOperator& a, const ScalarGraph& g, const NoiseCoefficient& noise,
                                const SemimartingalePath& z, const Vector& x0, const PicardOptions& options) {
    ExtensionResult out;
    if (const auto* additive = std::get_if<AdditiveNoise>(&noise)) {
        out.path = solve_limit(a, g, *additive, z, x0, options.scheme);
        out.path.segments = {0, z.steps()};
        out.taus = {z.steps()};
        out.segments = 1;
        return out;
    }
    const auto& mult = std::get<MultiplicativeNoise>(noise);
    constexpr std::size_t kMaxStops = 1'000'000;

    SolutionPath path = blank_path(z, x0);
    path.xi[0] = min_section(g, x0, 0.0);
    path.segments = {0};
    std::size_t tau = 0;
    std::size_t n = 1;
    auto record = [&](const PicardResult& r) {
        for (std::size_t k = r.start + 1; k <= r.stop; ++k) {
            path.x[k] = r.path.x[k];
            path.xi[k] = r.path.xi[k];
            path.forcing[k] = r.path.forcing[k];
        }
        out.max_iterations = std::max(out.max_iterations, r.iterations);
        for (double q : r.ratios) out.max_ratio = std::max(out.max_ratio, q);
        ++out.segments;
    };
    auto picard_from = [&](std::size_t start) {
        return solve_multiplicative(a, g, mult, z, path.x[start], options, start, nullptr,
                                    std::span<const Vector>(path.x).first(start + 1));
    };

    const PicardResult first = picard_from(0);
    record(first);
    tau = first.stop;
    out.taus.push_back(tau);
    path.segments.push_back(tau);
    while (tau < z.steps()) {
        if (out.taus.size() >= kMaxStops) {
            throw NumericalAbort("extend_solution: T not reached after 10^6 stopping times");
        }
        if (a.h_norm(path.x[tau]) > static_cast<double>(n)) {
            ++out.degenerate;
        } else {
            const PicardResult r = picard_from(tau);
            record(r);
            tau = r.stop;
            path.segments.push_back(tau);
        }
        out.taus.push_back(tau);
        ++n;
    }
    out.path = std::move(path);
    return out;
}

double predicted_segments(const noise::ControlPath& c, const noise::LipschitzProcess& l, double alpha) {
    if (l.values.size() != c.values.size()) throw std::invalid_argument("predicted_segments: grids differ");
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < c.values.size(); ++k) s += c.values[k] * (l.values[k + 1] - l.values[k]);
    return s / alpha;
}

}  // namespace semimono::integrator
