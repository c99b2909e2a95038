#include "semimono/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace semimono::analysis {

double EnergyLedger::max_abs_residual() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, std::abs(r));
    return m;
}

EnergyLedger energy_ledger(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                           const noise::OperatorPath& g, const noise::SemimartingalePath& z) {
    const std::size_t n = sol.steps();
    if (n != z.steps() || g.steps() != z.steps()) throw std::invalid_argument("energy_ledger: grids differ");
    const double dt = sol.grid.dt();
    EnergyLedger e;
    e.half_norm_sq.assign(n + 1, 0.0);
    e.v_integral.assign(n + 1, 0.0);
    e.xi_integral.assign(n + 1, 0.0);
    e.half_bracket.assign(n + 1, 0.0);
    e.cross.assign(n + 1, 0.0);
    e.residual.assign(n + 1, 0.0);
    e.half_norm_sq[0] = 0.5 * a.h_norm_sq(sol.x[0]);
    for (std::size_t j = 1; j <= n; ++j) {
        const Vector& x = sol.x[j];
        const Vector f = g.at(j - 1) * z.increment(j);
        e.half_norm_sq[j] = 0.5 * a.h_norm_sq(x);
        e.v_integral[j] = e.v_integral[j - 1] + dt * a.v_norm_sq(x);
        e.xi_integral[j] = e.xi_integral[j - 1] + dt * a.inner(sol.xi[j], x);
        e.half_bracket[j] = e.half_bracket[j - 1] + 0.5 * a.h_norm_sq(f);
        e.cross[j] = e.cross[j - 1] + a.inner(sol.x[j - 1], f);
        e.residual[j] = e.half_norm_sq[j] - e.half_norm_sq[0] + e.v_integral[j] + e.xi_integral[j] -
                        e.half_bracket[j] - e.cross[j];
    }
    return e;
}

std::vector<double> ito_residual(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                                 const noise::OperatorPath& g, const noise::SemimartingalePath& z) {
    return energy_ledger(a, sol, g, z).residual;
}

AprioriTriple apriori_monitor(const grid::GridOperator& a, const integrator::SolutionPath& sol) {
    AprioriTriple t;
    const double dt = sol.grid.dt();
    for (std::size_t k = 0; k < sol.x.size(); ++k) {
        t.sup_norm_sq = std::max(t.sup_norm_sq, a.h_norm_sq(sol.x[k]));
        if (k == 0) continue;
        t.v_integral += dt * a.v_norm_sq(sol.x[k]);
        t.xi_integral += dt * a.inner(sol.xi[k], sol.x[k]);
    }
    return t;
}

AprioriData apriori_data(const grid::GridOperator& a, const noise::OperatorPath& g,
                         const noise::SemimartingalePath& z, const Vector& x0) {
    AprioriData d;
    d.initial = a.h_norm_sq(x0);
    const noise::ControlPath c = noise::control_process(z);
    d.lambda_c = noise::lambda_functional(c, g, z.steps(), a.weight());
    for (std::size_t j = 1; j <= z.steps(); ++j) d.bracket += a.h_norm_sq(g.at(j - 1) * z.increment(j));
    return d;
}

UiReport uniform_integrability_diag(const std::vector<std::vector<double>>& family,
                                    const monotone::ConvexPotential& p, double bound, double epsilon) {
    if (!(epsilon > 0.0) || !(bound > 0.0)) throw std::invalid_argument("uniform_integrability_diag: bad epsilon/bound");
    UiReport r;
    r.epsilon = epsilon;
    r.bound = bound;
    for (const auto& g : family) {
        if (g.empty()) continue;
        std::vector<double> js(g.size());
        std::transform(g.begin(), g.end(), js.begin(), [&](double y) { return monotone::conjugate(p, y); });
        r.sup_mean = std::max(r.sup_mean, pairwise_sum(js) / static_cast<double>(g.size()));
    }
    r.bounded = r.sup_mean < bound;
    r.level = 4.0 * bound / epsilon;

    // j*(y)/|y| is nondecreasing along each ray, so the first radius where
    // both rays exceed M works for every larger |y|.
    auto exceeds = [&](double radius) {
        return monotone::conjugate(p, radius) > r.level * radius && monotone::conjugate(p, -radius) > r.level * radius;
    };
    double hi = 1.0;
    while (!exceeds(hi) && hi < 1e18) hi *= 2.0;
    r.superlinear = exceeds(hi);
    if (r.superlinear) {
        double lo = 0.0;
        for (int i = 0; i < 100 && hi - lo > 1e-12 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (exceeds(mid) ? hi : lo) = mid;
        }
        r.radius = hi;
        r.delta = epsilon / (2.0 * r.radius);
    }

    r.tail_ok = r.superlinear;
    for (const auto& g : family) {
        if (g.empty() || !r.superlinear) continue;
        std::vector<double> mags(g.size());
        std::transform(g.begin(), g.end(), mags.begin(), [](double y) { return std::abs(y); });
        std::sort(mags.begin(), mags.end(), std::greater<>());
        // Atoms have mass 1/n; a set of measure < delta holds fewer than delta n of them.
        const double n = static_cast<double>(g.size());
        const auto atoms = static_cast<std::size_t>(std::max(0.0, std::ceil(r.delta * n) - 1.0));
        const std::size_t take = std::min(atoms, mags.size());
        const double tail = pairwise_sum(std::span<const double>(mags.data(), take)) / n;
        r.worst_tail = std::max(r.worst_tail, tail);
    }
    if (r.superlinear) r.tail_ok = r.worst_tail < epsilon;
    return r;
}

bool StudyReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void StudyReport::add(std::string quantity, double parameter, const Estimate& e) {
    rows.push_back({std::move(quantity), parameter, e.mean, e.std_error, e.count});
}

void StudyReport::add(std::string quantity, double parameter, double value, std::size_t n_paths) {
    rows.push_back({std::move(quantity), parameter, value, 0.0, n_paths});
}

void StudyReport::check(std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
}

grid::GridOperator ProblemSetup::op() const { return grid::GridOperator::laplacian_1d(nodes, length); }

Vector ProblemSetup::mode(int k) const {
    const double dx = length / static_cast<double>(nodes + 1);
    Vector v(static_cast<Eigen::Index>(nodes));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = std::sin(k * std::numbers::pi * static_cast<double>(i + 1) * dx / length);
    }
    return v;
}

Matrix ProblemSetup::g_matrix() const {
    Matrix g(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(noise.k_dim));
    for (Eigen::Index c = 0; c < g.cols(); ++c) g.col(c) = g_scale * mode(static_cast<int>(c) + 1);
    return g;
}

Vector ProblemSetup::x0() const { return x0_scale * mode(1); }

noise::SemimartingaleSpec ProblemSetup::mixed_noise() {
    noise::SemimartingaleSpec s;
    s.k_dim = 2;
    s.wiener_cov = 0.5 * Matrix::Identity(2, 2);
    s.jump_rate = 2.0;
    s.marks.kind = noise::MarkLaw::Kind::gaussian;
    s.marks.location = Vector::Zero(2);
    s.marks.scale = 0.5;
    s.drift = Vector(2);
    s.drift << 0.2, -0.1;
    return s;
}

}  // namespace semimono::analysis
