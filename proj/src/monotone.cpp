#include "semimono/monotone.hpp"

#include "semimono/types.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace semimono::monotone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked(double v, double x) {
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "graph value is not finite at x = " << x;
        throw std::domain_error(msg.str());
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// GraphSpec

std::string GraphSpec::to_config_block(const std::string& section) const {
    std::ostringstream out;
    out.precision(17);
    out << '[' << section << "]\n";
    out << "name = " << name << '\n';
    for (const auto& [key, value] : params) out << key << " = " << value << '\n';
    return out.str();
}

GraphSpec GraphSpec::from_config_block(const std::string& text) {
    GraphSpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("graph block: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            spec.name = value;
        } else {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size()) throw std::invalid_argument("graph block: non-numeric value for '" + key + "'");
            spec.params[key] = v;
        }
    }
    if (spec.name.empty()) throw std::invalid_argument("graph block: missing name");
    return spec;
}

// ---------------------------------------------------------------------------
// ScalarGraph

ScalarGraph::ScalarGraph(std::string name, IncreasingFunction fn, Modulation modulation)
    : name_(std::move(name)), fn_(std::move(fn)), modulation_(std::move(modulation)) {
    if (!fn_.left || !fn_.right) throw std::invalid_argument("ScalarGraph: one-sided evaluators are required");
}

Interval ScalarGraph::at(double x) const {
    return {checked(fn_.left(x), x), checked(fn_.right(x), x)};
}

Interval ScalarGraph::at(double x, double t) const {
    const Interval b = at(x);
    const double s = scale(t);
    return {s * b.lo, s * b.hi};
}

ScalarGraph ScalarGraph::with_modulation(Modulation modulation) const {
    return ScalarGraph(name_, fn_, std::move(modulation));
}

std::optional<double> ScalarGraph::nearest_jump(double x) const {
    if (!fn_.nearest_jump) return std::nullopt;
    const double j = fn_.nearest_jump(x);
    if (std::isnan(j)) return std::nullopt;
    return j;
}

double ScalarGraph::min_section(double x) const {
    const Interval b = at(x);
    if (b.lo > 0.0) return b.lo;
    if (b.hi < 0.0) return b.hi;
    return 0.0;
}

bool ScalarGraph::contains(double x, double y, double eps, double tol, double t) const {
    const double s = scale(t);
    const double lo = s * checked(fn_.left(x - eps), x - eps);
    const double hi = s * checked(fn_.right(x + eps), x + eps);
    return y >= lo - tol && y <= hi + tol;
}

ScalarGraph fill_jumps(IncreasingFunction fn, std::string name) {
    if (!fn.left || !fn.right) throw std::invalid_argument("fill_jumps: one-sided evaluators are required");
    // Probe a symmetric grid for finiteness and monotonicity.
    double previous_hi = -kInf;
    for (int i = -400; i <= 400; ++i) {
        const double x = 0.125 * i;
        const double lo = fn.left(x);
        const double hi = fn.right(x);
        if (!std::isfinite(lo) || !std::isfinite(hi)) {
            std::ostringstream msg;
            msg << "fill_jumps: gamma0 is not finite at x = " << x;
            throw std::invalid_argument(msg.str());
        }
        if (lo > hi || lo < previous_hi) {
            std::ostringstream msg;
            msg << "fill_jumps: gamma0 is not nondecreasing near x = " << x;
            throw std::invalid_argument(msg.str());
        }
        previous_hi = hi;
    }
    if (fn.left(0.0) > 0.0 || fn.right(0.0) < 0.0) {
        throw std::invalid_argument("fill_jumps: 0 must belong to beta(0)");
    }
    return ScalarGraph(std::move(name), std::move(fn));
}

ScalarGraph fill_jumps(std::function<double(double)> gamma0, std::string name, double probe) {
    auto limit = [gamma0, probe](double x, double side) {
        const double v = gamma0(x);
        const double w = gamma0(x + side * probe * std::max(1.0, std::abs(x)));
        const double jump_tol = 1e-6 * (1.0 + std::abs(v));
        return std::abs(w - v) > jump_tol ? w : v;
    };
    IncreasingFunction fn;
    fn.left = [limit](double x) { return limit(x, -1.0); };
    fn.right = [limit](double x) { return limit(x, +1.0); };
    return fill_jumps(std::move(fn), std::move(name));
}

// ---------------------------------------------------------------------------
// Resolvent and Yosida approximation

double resolvent(const ScalarGraph& g, double lambda, double x, double t, const ProxOptions& options) {
    if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
    if (!std::isfinite(x)) throw std::invalid_argument("resolvent: x must be finite");
    const double mu = lambda * g.scale(t);
    if (mu == 0.0 || x == 0.0) return x;

    // Position of y relative to the root of y + mu beta(y) ∋ x:
    // -1 below, +1 above, 0 when x lies in y + mu beta(y).
    auto classify = [&](double y) {
        const Interval b = g.at(y);
        if (y + mu * b.hi < x) return -1;
        if (y + mu * b.lo > x) return +1;
        return 0;
    };

    // 0 ∈ beta(0) brackets the root between 0 and x.
    double a = std::min(0.0, x);
    double b = std::max(0.0, x);
    if (classify(a) == 0) return a;
    if (classify(b) == 0) return b;

    const bool newton = g.differentiable();
    double y = 0.5 * (a + b);
    double last_step = b - a;
    for (int it = 0; it < options.max_iterations; ++it) {
        const int c = classify(y);
        if (c == 0) return y;
        (c < 0 ? a : b) = y;
        double next = 0.5 * (a + b);
        const bool stuck = next <= a || next >= b;
        if (stuck || b - a <= options.tolerance * std::max(1.0, std::abs(next))) {
            if (auto jump = g.nearest_jump(next); jump && *jump >= a && *jump <= b && classify(*jump) == 0) {
                return *jump;
            }
            // On a flat piece of the graph the root is explicit.
            const Interval ga = g.at(a);
            const Interval gb = g.at(b);
            if (ga.single_valued() && gb.single_valued() && ga.lo == gb.lo) {
                const double exact = x - mu * ga.lo;
                if (exact >= a && exact <= b) return exact;
            }
            return next;
        }
        if (newton) {
            const double f = y + mu * g.at(y).hi - x;
            const double d = 1.0 + mu * g.slope(y);
            const double candidate = y - f / d;
            // Newton only while it at least halves the previous step.
            if (std::isfinite(candidate) && candidate > a && candidate < b &&
                std::abs(candidate - y) <= 0.5 * last_step) {
                if (std::abs(candidate - y) <= 0.25 * options.tolerance) return candidate;
                next = candidate;
            }
        }
        last_step = std::abs(next - y);
        y = next;
    }
    std::ostringstream msg;
    msg << "resolvent: no convergence for x = " << x << ", lambda = " << lambda << " on graph '" << g.name() << "'";
    throw NumericalAbort(msg.str());
}

double yosida(const ScalarGraph& g, double lambda, double x, double t, const ProxOptions& options) {
    const double j = resolvent(g, lambda, x, t, options);
    const double b = (x - j) / lambda;
    if (g.differentiable()) return b;
    // Rounding in x - j can push the value just outside a flat or vertical
    // piece of the graph, where the conjugate jumps to +inf.
    const Interval range = g.at(j, t);
    return std::clamp(b, range.lo, range.hi);
}

double yosida_resolvent(const ScalarGraph& g, double lambda, double mu, double x, double t,
                        const ProxOptions& options) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw std::invalid_argument("yosida_resolvent: parameters must be positive");
    const double s = lambda + mu;
    return (lambda / s) * x + (mu / s) * resolvent(g, s, x, t, options);
}

// ---------------------------------------------------------------------------
// Potentials

ConvexPotential::ConvexPotential(std::string name, std::function<double(double)> j, ScalarGraph graph,
                                 double symmetry_constant)
    : name_(std::move(name)), j_(std::move(j)), graph_(std::move(graph)), symmetry_constant_(symmetry_constant) {
    if (!j_) throw std::invalid_argument("ConvexPotential: j is required");
    if (j_(0.0) != 0.0) throw std::invalid_argument("ConvexPotential: j(0) must be 0");
}

double moreau(const ConvexPotential& p, double lambda, double x) {
    if (!(lambda > 0.0)) throw std::invalid_argument("moreau: lambda must be positive");
    if (x == 0.0) return 0.0;
    // The minimiser lies between 0 and x; pad the bracket so it is interior.
    const double pad = 0.01 * (1.0 + std::abs(x));
    const double lo = std::min(0.0, x) - pad;
    const double hi = std::max(0.0, x) + pad;
    auto objective = [&](double s) { return (x - s) * (x - s) / (2.0 * lambda) + p(s); };
    std::uintmax_t max_iter = 1000;
    const auto [s, value] = boost::math::tools::brent_find_minima(objective, lo, hi, 40, max_iter);
    // Brent only resolves a kink of j to about sqrt(eps); kinks sit at the
    // jumps of the graph, so evaluate there as well.
    double best = std::min({value, objective(0.0), objective(x)});
    if (const auto kink = p.graph().nearest_jump(s); kink && *kink >= lo && *kink <= hi) {
        best = std::min(best, objective(*kink));
    }
    return best;
}

double moreau_identity_residual(const ConvexPotential& p, double lambda, double x) {
    const double jx = resolvent(p.graph(), lambda, x);
    return moreau(p, lambda, x) - p(jx) - (x - jx) * (x - jx) / (2.0 * lambda);
}

ConjugateValue conjugate_detail(const ConvexPotential& p, double y) {
    if (!std::isfinite(y)) return {kInf, false};
    const ScalarGraph& g = p.graph();
    // Position of x relative to the inverse graph at y.
    auto classify = [&](double x) {
        const Interval b = g.at(x);
        if (b.hi < y) return -1;
        if (b.lo > y) return +1;
        return 0;
    };
    auto value_at = [&](double x) { return x * y - p(x); };

    const int c0 = classify(0.0);
    if (c0 == 0) return {0.0, true};

    const double dir = c0 < 0 ? 1.0 : -1.0;
    constexpr double kFar = 1099511627776.0;  // 2^40
    double inner = 0.0;
    double outer = dir;
    int c = classify(outer);
    while (c == c0) {
        inner = outer;
        outer *= 2.0;
        if (std::abs(outer) > kFar) {
            // No point of the graph reaches y: the supremum is approached at
            // infinity. Finite iff the concave profile has flattened out.
            const double v1 = value_at(inner);
            const double v2 = value_at(outer);
            if (!std::isfinite(v2) || v2 > v1 + 1e-9 * (1.0 + std::abs(v1))) return {kInf, false};
            return {std::max(v1, v2), false};
        }
        c = classify(outer);
    }
    if (c == 0) return {value_at(outer), true};

    double a = std::min(inner, outer);
    double b = std::max(inner, outer);
    for (int it = 0; it < 400; ++it) {
        const double m = 0.5 * (a + b);
        const int cm = classify(m);
        if (cm == 0) return {value_at(m), true};
        (cm < 0 ? a : b) = m;
        if (b - a <= 1e-14 * (1.0 + std::abs(m))) break;
    }
    double x = 0.5 * (a + b);
    if (auto jump = g.nearest_jump(x); jump && *jump >= a && *jump <= b && classify(*jump) == 0) x = *jump;
    return {value_at(x), true};
}

double conjugate(const ConvexPotential& p, double y) { return conjugate_detail(p, y).value; }

double fenchel_young_gap(const ConvexPotential& p, double x, double y) {
    return p(x) + conjugate(p, y) - x * y;
}

bool membership(const ConvexPotential& p, double x, double y, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("membership: tol must be positive");
    const double jstar = conjugate(p, y);
    if (!std::isfinite(jstar)) return false;
    return std::abs(x * y - p(x) - jstar) <= tol;
}

SymmetryCheck check_symmetry(const ConvexPotential& p, double x_big, int samples) {
    SymmetryCheck out;
    out.bound = p.symmetry_constant();
    for (int i = 0; i < samples; ++i) {
        const double x = x_big * std::pow(100.0, static_cast<double>(i) / std::max(1, samples - 1));
        for (double s : {x, -x}) {
            const double num = p(s);
            const double den = p(-s);
            const double ratio = den > 0.0 ? num / den : (num > 0.0 ? kInf : 1.0);
            out.max_ratio = std::max(out.max_ratio, ratio);
        }
    }
    out.within = out.max_ratio <= out.bound;
    return out;
}

}  // namespace semimono::monotone
