#include "semimono/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace semimono::analysis {

namespace {

using integrator::AdditiveNoise;
using integrator::SolutionPath;
using monotone::ScalarGraph;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

ScalarGraph zero_graph() {
    monotone::IncreasingFunction fn;
    fn.left = [](double) { return 0.0; };
    fn.right = [](double) { return 0.0; };
    fn.slope = [](double) { return 0.0; };
    return ScalarGraph("zero", std::move(fn));
}

AdditiveNoise additive(const ProblemSetup& s) { return {noise::OperatorPath::constant(s.g_matrix(), s.steps)}; }

double sup_distance(const grid::GridOperator& a, const SolutionPath& p, const SolutionPath& q) {
    double d = 0.0;
    for (std::size_t k = 0; k < p.x.size(); ++k) d = std::max(d, a.h_norm(p.x[k] - q.x[k]));
    return d;
}

double l2_distance(const grid::GridOperator& a, const SolutionPath& p, const SolutionPath& q) {
    double s = 0.0;
    for (std::size_t k = 1; k < p.x.size(); ++k) s += p.grid.dt() * a.h_norm_sq(p.x[k] - q.x[k]);
    return std::sqrt(s);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

}  // namespace

StudyReport monotone_suite(const MonotoneSuiteConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "monotone";
    report.seed_base = config.seed_base;
    const double lambdas[] = {1.0, 0.1, 0.01};
    const monotone::ProxOptions prox;
    const double tol = prox.tolerance;

    const auto library = monotone::builtin_library();
    for (std::size_t gi = 0; gi < library.size(); ++gi) {
        const auto p = monotone::make_potential(library[gi]);
        const ScalarGraph& g = p.graph();
        std::mt19937_64 rng(config.seed_base + gi);
        std::uniform_real_distribution<double> uniform(-10.0, 10.0);

        double contraction = 0.0;  // max of |Jx - Jy| - |x - y|
        double lipschitz = 0.0;    // max of lambda |b(x) - b(y)| - |x - y|
        double consistency = 0.0;  // count of beta_lambda(x) outside beta(J x)
        double fy_equality = 0.0;  // max relative Fenchel-Young gap on graph pairs
        double moreau_rel = 0.0;   // max relative Moreau identity residual
        for (std::size_t s = 0; s < config.samples; ++s) {
            const double lambda = lambdas[s % 3];
            const double x = uniform(rng);
            const double y = uniform(rng);
            const double jx = monotone::resolvent(g, lambda, x, 0.0, prox);
            const double jy = monotone::resolvent(g, lambda, y, 0.0, prox);
            contraction = std::max(contraction, std::abs(jx - jy) - std::abs(x - y) - 2.0 * tol);
            const double bx = monotone::yosida(g, lambda, x, 0.0, prox);
            const double by = monotone::yosida(g, lambda, y, 0.0, prox);
            lipschitz = std::max(lipschitz, lambda * std::abs(bx - by) - std::abs(x - y) - 2.0 * tol);
            if (!g.contains(jx, bx, 10.0 * tol * (1.0 + std::abs(x)), 1e-9 * (1.0 + std::abs(bx)))) consistency += 1.0;
            const double scale = 1.0 + std::abs(jx * bx) + p(jx);
            fy_equality = std::max(fy_equality, std::abs(monotone::fenchel_young_gap(p, jx, bx)) / scale);
            const double env = monotone::moreau(p, lambda, x);
            moreau_rel = std::max(moreau_rel, std::abs(monotone::moreau_identity_residual(p, lambda, x)) /
                                                  std::max(1.0, std::abs(env)));
        }

        double fy_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const double x = -5.0 + 10.0 * i / 99.0;
                const double y = -5.0 + 10.0 * j / 99.0;
                const double gap = monotone::fenchel_young_gap(p, x, y);
                fy_min = std::min(fy_min, gap / (1.0 + std::abs(x * y)));
            }
        }

        const std::string& name = library[gi].name;
        report.add(name + ".contraction_excess", 0.0, contraction, config.samples);
        report.add(name + ".lipschitz_excess", 0.0, lipschitz, config.samples);
        report.add(name + ".consistency_failures", 0.0, consistency, config.samples);
        report.add(name + ".fenchel_young_equality_gap", 0.0, fy_equality, config.samples);
        report.add(name + ".moreau_identity_residual", 0.0, moreau_rel, config.samples);
        report.add(name + ".fenchel_young_min_gap", 0.0, fy_min, 10000);
        report.check(name + ": resolvent contraction", contraction <= 0.0, "max excess " + fmt(contraction));
        report.check(name + ": yosida 1/lambda-Lipschitz", lipschitz <= 0.0, "max excess " + fmt(lipschitz));
        report.check(name + ": yosida value in beta(J x)", consistency == 0.0, fmt(consistency) + " failures");
        report.check(name + ": moreau identity", moreau_rel <= 1e-8, "max relative residual " + fmt(moreau_rel));
        report.check(name + ": fenchel-young inequality", fy_min >= -1e-9, "min relative gap " + fmt(fy_min));
        report.check(name + ": fenchel-young equality on graph pairs", fy_equality <= 1e-8,
                     "max relative gap " + fmt(fy_equality));
    }
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport heat_oracle(const HeatOracleConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "heat_oracle";
    ProblemSetup setup;
    setup.nodes = config.nodes;
    setup.horizon = config.horizon;
    setup.steps = config.steps;
    const auto a = setup.op();
    const auto grid = setup.grid();
    const Vector x0 = setup.mode(1);
    const auto z = noise::SemimartingalePath::zero(grid, 1);
    const AdditiveNoise zero_noise{noise::OperatorPath::constant(Matrix::Zero(x0.size(), 1), grid.steps)};
    const SolutionPath sol = integrator::solve_limit(a, zero_graph(), zero_noise, z, x0);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix());
    const Vector coeff = eig.eigenvectors().transpose() * x0;
    const double dx = setup.length / static_cast<double>(setup.nodes + 1);
    const double mu_cont = std::numbers::pi * std::numbers::pi / (setup.length * setup.length);
    double err = 0.0;
    double err_cont = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        const double t = grid.time(k);
        const Vector exact = eig.eigenvectors() * (coeff.array() * (-eig.eigenvalues().array() * t).exp()).matrix();
        err = std::max(err, (sol.x[k] - exact).cwiseAbs().maxCoeff());
        err_cont = std::max(err_cont, (sol.x[k] - std::exp(-mu_cont * t) * x0).cwiseAbs().maxCoeff());
    }
    const double tol = config.tolerance_factor * (grid.dt() + dx * dx);
    report.add("sup_error_eigen_oracle", static_cast<double>(grid.steps), err);
    report.add("sup_error_continuum", static_cast<double>(grid.steps), err_cont);
    report.add("tolerance", static_cast<double>(grid.steps), tol);
    report.check("heat equation vs eigendecomposition", err <= tol, "error " + fmt(err) + " <= " + fmt(tol));
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport mp_audit_matrix(const MpMatrixConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "mp_audit";
    report.seed_base = config.seed_base;
    const noise::TimeGrid grid{1.0, config.steps};

    struct Named {
        std::string name;
        noise::SemimartingaleSpec spec;
    };
    noise::MarkLaw unit;
    unit.location = Vector::Ones(1);
    noise::SemimartingaleSpec mixed = noise::SemimartingaleSpec::wiener(1, 0.5);
    mixed.jump_rate = 1.0;
    mixed.marks.kind = noise::MarkLaw::Kind::gaussian;
    mixed.marks.location = Vector::Constant(1, 0.5);
    mixed.marks.scale = 0.5;
    mixed.drift = Vector::Constant(1, 0.3);
    const std::vector<Named> specs{{"wiener", noise::SemimartingaleSpec::wiener(1, 1.0)},
                                   {"poisson", noise::SemimartingaleSpec::compound_poisson(1, 1.0, unit)},
                                   {"mixed", mixed}};

    const std::vector<std::pair<std::string, noise::IntegrandRule>> integrands{
        {"constant", [](std::size_t, const noise::SemimartingalePath&) { return Matrix::Ones(1, 1); }},
        {"path_dependent",
         [](std::size_t step, const noise::SemimartingalePath& z) {
             return Matrix::Constant(1, 1, std::cos(3.0 * z.values()[step][0]));
         }}};

    const std::size_t half = grid.steps / 2;
    const std::vector<std::pair<std::string, noise::StopRule>> stops{
        {"fixed_time", [half](const noise::SemimartingalePath&, const std::vector<Vector>&) { return half; }},
        {"first_passage", [](const noise::SemimartingalePath& z, const std::vector<Vector>& integral) {
             for (std::size_t j = 0; j < integral.size(); ++j) {
                 if (integral[j].norm() >= 0.5) return j;
             }
             return z.grid().no_stop();
         }}};

    std::size_t cell = 0;
    for (const auto& s : specs) {
        for (const auto& y : integrands) {
            for (const auto& stop : stops) {
                const std::string name = s.name + "/" + y.first + "/" + stop.first;
                const auto r = noise::mp_inequality_audit(s.spec, grid, y.second, stop.second, config.n_paths,
                                                          config.seed_base + cell * config.n_paths, config.workers);
                report.add(name + ".lhs", static_cast<double>(cell), r.square.lhs);
                report.add(name + ".rhs", static_cast<double>(cell), r.square.rhs);
                report.add(name + ".sqrt_lhs", static_cast<double>(cell), r.root.lhs);
                report.add(name + ".sqrt_rhs", static_cast<double>(cell), r.root.rhs);
                report.check(name, r.pass(),
                             "E sup|Y.Z|^2 " + fmt(r.square.lhs.mean) + " vs " + fmt(r.square.rhs.mean) +
                                 "; sqrt variant " + fmt(r.root.lhs.mean) + " vs " + fmt(r.root.rhs.mean));
                ++cell;
            }
        }
    }
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport energy_residual_study(const ResidualConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "energy_residual";
    report.seed_base = config.seed_base;
    if (config.levels.empty()) throw std::invalid_argument("energy_residual_study: no refinement levels");
    const std::size_t finest = *std::max_element(config.levels.begin(), config.levels.end());
    const auto a = config.setup.op();

    for (const std::string graph_name : {"identity", "exponential"}) {
        const ScalarGraph g = monotone::make_graph({graph_name, {}});
        std::vector<std::vector<double>> max_r(config.levels.size(), std::vector<double>(config.n_paths));
        std::vector<std::vector<double>> end_r(config.levels.size(), std::vector<double>(config.n_paths));
        parallel_for(config.n_paths, config.workers, [&](std::size_t p) {
            const auto fine = noise::sample_path(config.setup.noise, {config.setup.horizon, finest}, config.seed_base + p);
            for (std::size_t l = 0; l < config.levels.size(); ++l) {
                ProblemSetup s = config.setup;
                s.steps = config.levels[l];
                const auto z = fine.coarsen(finest / s.steps);
                const auto noise = additive(s);
                const auto sol = integrator::solve_limit(a, g, noise, z, s.x0());
                const auto ledger = energy_ledger(a, sol, noise.g, z);
                max_r[l][p] = ledger.max_abs_residual();
                end_r[l][p] = std::abs(ledger.terminal_residual());
            }
        });
        std::vector<double> means;
        for (std::size_t l = 0; l < config.levels.size(); ++l) {
            const Estimate e = estimate(max_r[l]);
            means.push_back(e.mean);
            report.add(graph_name + ".max_abs_residual", static_cast<double>(config.levels[l]), e);
            report.add(graph_name + ".terminal_abs_residual", static_cast<double>(config.levels[l]), estimate(end_r[l]));
        }
        std::vector<double> ratios;
        for (std::size_t l = 1; l < means.size(); ++l) ratios.push_back(means[l - 1] / means[l]);
        for (std::size_t l = 0; l < ratios.size(); ++l) {
            report.add(graph_name + ".refinement_ratio", static_cast<double>(config.levels[l + 1]), ratios[l]);
        }
        if (graph_name == std::string("identity")) {
            const bool ok = std::all_of(ratios.begin(), ratios.end(),
                                        [&](double r) { return r >= config.ratio_lo && r <= config.ratio_hi; });
            report.check("identity: residual halves under refinement", ok, "ratios " + join(ratios));
        } else {
            report.check("exponential: residual decreases under refinement", strictly_decreasing(means),
                         "mean max|r| " + join(means));
        }
    }
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport apriori_study(const AprioriConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "apriori";
    report.seed_base = config.seed_base;
    const auto a = config.setup.op();
    const auto noise = additive(config.setup);
    const Vector x0 = config.setup.x0();

    for (const auto& spec : monotone::builtin_library()) {
        const ScalarGraph g = monotone::make_graph(spec);
        std::vector<double> holds(config.n_paths);
        std::vector<double> ratio(config.n_paths);
        std::vector<double> xi_part(config.n_paths);
        parallel_for(config.n_paths, config.workers, [&](std::size_t p) {
            const auto z = noise::sample_path(config.setup.noise, config.setup.grid(), config.seed_base + p);
            const auto sol = integrator::solve_limit(a, g, noise, z, x0);
            const AprioriTriple lhs = apriori_monitor(a, sol);
            const AprioriData rhs = apriori_data(a, noise.g, z, x0);
            holds[p] = lhs.total() <= config.kappa * rhs.total() ? 1.0 : 0.0;
            ratio[p] = lhs.total() / rhs.total();
            xi_part[p] = lhs.xi_integral;
        });
        const Estimate frac = estimate(holds);
        const double min_xi = *std::min_element(xi_part.begin(), xi_part.end());
        report.add(spec.name + ".fraction_within_kappa", config.kappa, frac);
        report.add(spec.name + ".lhs_over_data", config.kappa, estimate(ratio));
        report.add(spec.name + ".min_duality_integral", config.kappa, min_xi, config.n_paths);
        report.check(spec.name + ": a priori bound", frac.mean >= config.min_fraction,
                     "fraction " + fmt(frac.mean) + ", max lhs/data " +
                         fmt(*std::max_element(ratio.begin(), ratio.end())));
        report.check(spec.name + ": duality integral nonnegative", min_xi >= -1e-10, "min " + fmt(min_xi));
    }
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport lambda_study(const LambdaConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "lambda";
    report.seed_base = config.seed_base;
    const auto a = config.setup.op();
    const auto noise = additive(config.setup);
    const Vector x0 = config.setup.x0();
    const std::size_t nl = config.lambdas.size();

    for (const auto& spec : config.graphs) {
        const std::string& name = spec.name;
        const ScalarGraph g = monotone::make_graph(spec);
        std::vector<std::vector<double>> cauchy(nl, std::vector<double>(config.n_paths));
        std::vector<std::vector<double>> cauchy_l2(nl, std::vector<double>(config.n_paths));
        std::vector<std::vector<double>> to_limit(nl, std::vector<double>(config.n_paths));
        std::vector<double> same(config.n_paths);
        parallel_for(config.n_paths, config.workers, [&](std::size_t p) {
            const auto z = noise::sample_path(config.setup.noise, config.setup.grid(), config.seed_base + p);
            const auto limit = integrator::solve_limit(a, g, noise, z, x0);
            for (std::size_t i = 0; i < nl; ++i) {
                const double lambda = config.lambdas[i];
                const auto coarse = integrator::solve_regularized(a, g, lambda, noise, z, x0);
                const auto fine = integrator::solve_regularized(a, g, 0.5 * lambda, noise, z, x0);
                cauchy[i][p] = sup_distance(a, coarse, fine);
                cauchy_l2[i][p] = l2_distance(a, coarse, fine);
                to_limit[i][p] = sup_distance(a, coarse, limit);
                if (i == 0) same[p] = sup_distance(a, coarse, integrator::solve_regularized(a, g, lambda, noise, z, x0));
            }
        });
        std::vector<double> e;
        std::vector<double> d;
        for (std::size_t i = 0; i < nl; ++i) {
            const Estimate ei = estimate(cauchy[i]);
            const Estimate di = estimate(to_limit[i]);
            e.push_back(ei.mean);
            d.push_back(di.mean);
            report.add(name + ".e_lambda_sup", config.lambdas[i], ei);
            report.add(name + ".e_lambda_l2", config.lambdas[i], estimate(cauchy_l2[i]));
            report.add(name + ".distance_to_limit_sup", config.lambdas[i], di);
        }
        const double same_max = *std::max_element(same.begin(), same.end());
        report.add(name + ".identical_lambda_distance", config.lambdas.front(), same_max, config.n_paths);
        report.check(name + ": e_lambda strictly decreasing", strictly_decreasing(e), "e_lambda " + join(e));
        report.check(name + ": distance to limit scheme decreasing", strictly_decreasing(d), "distances " + join(d));
        report.check(name + ": identical lambda gives zero distance", same_max == 0.0, fmt(same_max));
    }
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport picard_study(const PicardConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "picard";
    report.seed_base = config.seed_base;
    ProblemSetup setup;
    setup.nodes = config.nodes;
    setup.horizon = config.horizon;
    setup.steps = config.steps;
    const auto a = setup.op();
    const auto grid = setup.grid();
    const double trace_q = 1.0;
    const auto spec = noise::SemimartingaleSpec::wiener(config.nodes, trace_q / static_cast<double>(config.nodes));
    const double c = config.coupling;

    integrator::MultiplicativeNoise mult;
    mult.b = [c](std::size_t, std::span<const Vector> past) -> Matrix {
        return Matrix(c * past.back().array().sin().matrix().asDiagonal());
    };
    // |B(u) - B(v)|^2_{L(K,H)} <= c^2 |u - v|_H^2 and dC = 8 tr Q dt.
    mult.lipschitz.values.resize(grid.steps + 1);
    for (std::size_t i = 0; i <= grid.steps; ++i) mult.lipschitz.values[i] = 8.0 * c * c * trace_q * grid.time(i);

    integrator::PicardOptions options;
    options.alpha = config.alpha;
    options.tolerance = config.tolerance;
    options.max_picard = config.max_picard;
    const Vector x0 = setup.mode(1);

    int worst_iterations = 0;
    double worst_ratio = 0.0;
    double worst_unique = 0.0;
    bool all_converged = true;
    bool reached_t = true;
    bool budget_ok = true;
    std::string budget_detail;
    for (std::size_t p = 0; p < config.n_paths; ++p) {
        const auto z = noise::sample_path(spec, grid, config.seed_base + p);
        const auto first = integrator::solve_multiplicative(a, zero_graph(), mult, z, x0, options);
        worst_iterations = std::max(worst_iterations, first.iterations);
        for (double r : first.ratios) worst_ratio = std::max(worst_ratio, r);
        all_converged = all_converged && first.converged;

        // A different starting iterate must reach the same fixed point.
        std::vector<Vector> guess(grid.steps + 1, x0 + 0.5 * setup.mode(3));
        const auto other = integrator::solve_multiplicative(a, zero_graph(), mult, z, x0, options, 0, &guess);
        double gap = 0.0;
        for (std::size_t j = 0; j <= first.stop; ++j) gap = std::max(gap, a.h_norm(first.path.x[j] - other.path.x[j]));
        worst_unique = std::max(worst_unique, gap);

        const auto ext = integrator::extend_solution(a, zero_graph(), mult, z, x0, options);
        reached_t = reached_t && !ext.taus.empty() && ext.taus.back() == grid.steps;
        worst_iterations = std::max(worst_iterations, ext.max_iterations);
        worst_ratio = std::max(worst_ratio, ext.max_ratio);
        const double predicted = integrator::predicted_segments(noise::control_process(z), mult.lipschitz, config.alpha);
        const double segs = static_cast<double>(ext.segments);
        budget_ok = budget_ok && segs <= 2.0 * predicted && segs >= 0.5 * predicted;
        budget_detail = fmt(segs) + " segments vs predicted " + fmt(predicted);
        report.add("segments", static_cast<double>(p), segs);
        report.add("predicted_segments", static_cast<double>(p), predicted);
        report.add("first_stop_time", static_cast<double>(p), grid.time(first.stop));
        report.add("picard_iterations", static_cast<double>(p), first.iterations);
        report.add("uniqueness_gap", static_cast<double>(p), gap);
    }
    report.add("max_ratio", config.alpha, worst_ratio, config.n_paths);
    report.check("picard contracts", worst_ratio < 1.0, "max successive-distance ratio " + fmt(worst_ratio));
    report.check("picard converges within budget", all_converged && worst_iterations <= config.max_picard,
                 "max iterations " + std::to_string(worst_iterations) + " at tol " + fmt(config.tolerance));
    report.check("localized uniqueness", worst_unique < 10.0 * config.tolerance, "max gap " + fmt(worst_unique));
    report.check("extension reaches T", reached_t, reached_t ? "all paths" : "some path stopped early");
    report.check("segment count within x2 of budget", budget_ok, budget_detail);
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport dependence_study(const DependenceConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "dependence";
    report.seed_base = config.seed_base;
    const auto a = config.setup.op();
    const ScalarGraph g = monotone::make_graph(config.graph);
    const auto base_noise = additive(config.setup);
    const Vector x0 = config.setup.x0();
    const Vector x_dir = config.setup.mode(2);
    Matrix g_dir(base_noise.g.rows(), base_noise.g.cols());
    for (Eigen::Index c = 0; c < g_dir.cols(); ++c) g_dir.col(c) = config.setup.g_scale * config.setup.mode(static_cast<int>(c) + 3);

    // Same data twice: bitwise identical, and zero distance.
    {
        const auto z = noise::sample_path(config.setup.noise, config.setup.grid(), config.seed_base);
        const auto z_again = noise::sample_path(config.setup.noise, config.setup.grid(), config.seed_base);
        const auto p1 = integrator::solve_limit(a, g, base_noise, z, x0);
        const auto p2 = integrator::solve_limit(a, g, base_noise, z_again, x0);
        bool identical = true;
        for (std::size_t k = 0; k < p1.x.size(); ++k) {
            identical = identical && p1.x[k].size() == p2.x[k].size() && (p1.x[k].array() == p2.x[k].array()).all() &&
                        (p1.xi[k].array() == p2.xi[k].array()).all();
        }
        report.add("double_run_distance", 0.0, sup_distance(a, p1, p2));
        report.check("same seed and data give bitwise identical paths", identical, identical ? "identical" : "differ");
    }

    std::vector<double> x_ratios;
    std::vector<double> g_ratios;
    for (double delta : config.deltas) {
        std::vector<double> dx_num(config.n_paths), dx_den(config.n_paths);
        std::vector<double> dg_num(config.n_paths), dg_den(config.n_paths);
        const Vector x0d = x0 + delta * x_dir;
        const AdditiveNoise pert{noise::OperatorPath::constant(base_noise.g.at(0) + delta * g_dir, config.setup.steps)};
        const noise::OperatorPath diff = noise::OperatorPath::constant(delta * g_dir, config.setup.steps);
        parallel_for(config.n_paths, config.workers, [&](std::size_t p) {
            const auto z = noise::sample_path(config.setup.noise, config.setup.grid(), config.seed_base + p);
            const auto base = integrator::solve_limit(a, g, base_noise, z, x0);
            const auto moved = integrator::solve_limit(a, g, base_noise, z, x0d);
            const auto forced = integrator::solve_limit(a, g, pert, z, x0);
            const double sx = sup_distance(a, base, moved);
            const double sg = sup_distance(a, base, forced);
            dx_num[p] = sx * sx;
            dx_den[p] = a.h_norm_sq(x0 - x0d);
            dg_num[p] = sg * sg;
            dg_den[p] = noise::lambda_functional(noise::control_process(z), diff, z.steps(), a.weight());
        });
        const double rx = estimate(dx_num).mean / estimate(dx_den).mean;
        const double rg = estimate(dg_num).mean / estimate(dg_den).mean;
        x_ratios.push_back(rx);
        g_ratios.push_back(rg);
        report.add("x0_ratio", delta, rx, config.n_paths);
        report.add("x0_sup_distance_sq", delta, estimate(dx_num));
        report.add("g_ratio", delta, rg, config.n_paths);
        report.add("g_sup_distance_sq", delta, estimate(dg_num));
        report.add("g_lambda_c", delta, estimate(dg_den));
    }
    auto spread = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    };
    const double sx = spread(x_ratios);
    const double sg = spread(g_ratios);
    report.add("x0_ratio_spread", 0.0, sx, config.n_paths);
    report.add("g_ratio_spread", 0.0, sg, config.n_paths);
    report.check("x0 perturbation ratio spread", sx <= config.max_spread, "ratios " + join(x_ratios));
    report.check("G perturbation ratio spread", sg <= config.max_spread, "ratios " + join(g_ratios));
    report.runtime_seconds = clock.seconds();
    return report;
}

StudyReport gronwall_study(const GronwallConfig& config) {
    Stopwatch clock;
    StudyReport report;
    report.kind = "gronwall";
    report.seed_base = config.seed_base;
    const std::size_t m = config.paths_per_run;
    const std::size_t n = config.steps;

    std::size_t violations = 0;
    std::size_t violations_small = 0;  // among runs with 2 b l < 1
    std::size_t runs_small = 0;
    std::size_t ceiling_violations = 0;
    double worst_hypothesis = 0.0;
    double worst_excess = 0.0;
    for (std::size_t r = 0; r < config.runs; ++r) {
        std::mt19937_64 rng(config.seed_base + r);
        std::uniform_real_distribution<double> ua(0.5, 2.0), ub(0.1, 3.0), ul(0.05, 2.0), u01(0.5, 1.5);
        std::exponential_distribution<double> expo(1.0);
        const double a_nominal = ua(rng);
        const double b = ub(rng);
        const double ell = ul(rng);

        // phi_k = phi_0 prod (1 + b dA_i), so phi(t) = phi_0 + b int phi_- dA on every path.
        std::vector<std::vector<double>> phi(m, std::vector<double>(n + 1));
        std::vector<std::vector<double>> big_a(m, std::vector<double>(n + 1, 0.0));
        for (std::size_t p = 0; p < m; ++p) {
            std::vector<double> inc(n);
            double total = 0.0;
            for (auto& v : inc) total += (v = expo(rng));
            phi[p][0] = a_nominal * u01(rng);
            for (std::size_t k = 1; k <= n; ++k) {
                big_a[p][k] = k == n ? ell : big_a[p][k - 1] + ell * inc[k - 1] / total;
                phi[p][k] = phi[p][k - 1] * (1.0 + b * (big_a[p][k] - big_a[p][k - 1]));
            }
        }
        std::vector<double> phi0(m);
        for (std::size_t p = 0; p < m; ++p) phi0[p] = phi[p][0];
        // The empirical measure is itself a probability space; a is E phi(0).
        const double a = pairwise_sum(phi0) / static_cast<double>(m);

        // Hypothesis at every deterministic time t_1..t_n, at tau, and at a
        // first-passage time. `last` is the grid index of sigma-.
        for (std::size_t s = 1; s <= n + 2; ++s) {
            std::vector<double> lhs(m), rhs(m);
            for (std::size_t p = 0; p < m; ++p) {
                std::size_t last = std::min(s, n + 1) - 1;
                if (s == n + 2) {
                    last = n;
                    for (std::size_t k = 0; k <= n; ++k) {
                        if (phi[p][k] > 2.0 * a) {
                            last = k == 0 ? 0 : k - 1;
                            break;
                        }
                    }
                }
                lhs[p] = phi[p][last];
                double integral = 0.0;
                for (std::size_t k = 1; k <= last; ++k) integral += phi[p][k - 1] * (big_a[p][k] - big_a[p][k - 1]);
                rhs[p] = integral;
            }
            const double mm = static_cast<double>(m);
            const double gap = pairwise_sum(lhs) / mm - a - b * pairwise_sum(rhs) / mm;
            worst_hypothesis = std::max(worst_hypothesis, gap / (1.0 + a));
        }

        std::vector<double> terminal(m);
        for (std::size_t p = 0; p < m; ++p) terminal[p] = phi[p][n];
        const double e_phi = pairwise_sum(terminal) / static_cast<double>(m);
        const double bound = noise::gronwall_bound(a, b, ell);
        const double r2 = 2.0 * b * ell;
        double ceiling = 0.0;
        for (int k = 0, top = static_cast<int>(std::ceil(r2)); k <= top; ++k) ceiling += a * std::pow(r2, k);
        const bool small = r2 < 1.0;
        runs_small += small ? 1 : 0;
        if (e_phi > bound) {
            ++violations;
            violations_small += small ? 1 : 0;
            worst_excess = std::max(worst_excess, e_phi / bound - 1.0);
        }
        if (e_phi > ceiling) ++ceiling_violations;
    }
    report.add("runs", 0.0, static_cast<double>(config.runs), m);
    report.add("violations", 0.0, static_cast<double>(violations), m);
    report.add("violations_with_2bl_below_1", 0.0, static_cast<double>(violations_small), m);
    report.add("runs_with_2bl_below_1", 0.0, static_cast<double>(runs_small), m);
    report.add("violations_with_ceiling_sum", 0.0, static_cast<double>(ceiling_violations), m);
    report.add("max_relative_excess", 0.0, worst_excess, m);
    report.add("max_hypothesis_gap", 0.0, worst_hypothesis, m);
    report.check("hypothesis holds on every run", worst_hypothesis <= 1e-12,
                 "max relative gap " + fmt(worst_hypothesis));
    report.check("E phi(tau-) <= bound on every run", violations == 0,
                 std::to_string(violations) + " of " + std::to_string(config.runs) + " runs exceed the bound (" +
                     std::to_string(violations_small) + " with 2bl < 1; " + std::to_string(ceiling_violations) +
                     " exceed the sum taken to ceil(2bl))");
    report.runtime_seconds = clock.seconds();
    return report;
}

}  // namespace semimono::analysis
