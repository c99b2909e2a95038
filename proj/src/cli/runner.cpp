#include "semimono/cli/runner.hpp"

#include "semimono/acceptance.hpp"
#include "semimono/report_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace semimono::cli {

namespace {

using nlohmann::ordered_json;

std::string hex_sha1(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("sha1 digest failed");
    }
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        out += buf;
    }
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string study_file(const std::string& kind, std::size_t nodes, std::size_t steps, std::uint64_t seed) {
    return kind + "_n" + std::to_string(nodes) + "_N" + std::to_string(steps) + "_s" + std::to_string(seed) + ".csv";
}

ordered_json checks_json(const analysis::StudyReport& r) {
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return checks;
}

// Everything a study run produces before it is written to disk.
struct StudyOutput {
    std::vector<Artifact> files;
    ordered_json studies = ordered_json::array();
    ordered_json runs = ordered_json::array();
    ordered_json timing = ordered_json::object();
    bool pass = true;
};

void add_report(StudyOutput& out, const analysis::StudyReport& r, const std::string& file) {
    out.files.push_back({file, report::study_csv(r)});
    out.studies.push_back({{"kind", r.kind}, {"file", file}, {"pass", r.pass()}, {"checks", checks_json(r)}});
    out.timing[file] = r.runtime_seconds;
    out.pass = out.pass && r.pass();
}

integrator::SchemeOptions scheme_options(const ExperimentConfig& c) {
    integrator::SchemeOptions o;
    o.overflow_guard = c.scheme.overflow_guard;
    o.max_splits = c.scheme.max_splits;
    o.membership_tol = c.scheme.membership_tol;
    return o;
}

// B(u) = coupling diag(sin u) G, with |B(u) - B(v)|^2 <= coupling^2 max_i |G_i.|^2 |u - v|_H^2,
// so L = coupling^2 max_i |G_i.|^2 (C - C_0) along each path.
integrator::MultiplicativeNoise multiplicative(const Matrix& g, double coupling, const noise::ControlPath& c) {
    integrator::MultiplicativeNoise m;
    m.b = [g, coupling](std::size_t, std::span<const Vector> past) -> Matrix {
        return coupling * past.back().array().sin().matrix().asDiagonal() * g;
    };
    const double kappa = coupling * coupling * g.rowwise().squaredNorm().maxCoeff();
    m.lipschitz.values.resize(c.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i) m.lipschitz.values[i] = kappa * (c.values[i] - c.values.front());
    return m;
}

StudyOutput solve_study(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto setup = c.setup();
    const auto a = setup.op();
    const auto grid = setup.grid();
    const auto graph = monotone::make_graph(c.graph);
    const Matrix g = setup.g_matrix();
    const Vector x0 = setup.x0();
    const integrator::AdditiveNoise additive{noise::OperatorPath::constant(g, grid.steps)};
    const auto options = scheme_options(c);

    struct PathResult {
        integrator::SolutionPath path;
        noise::OperatorPath g_path = noise::OperatorPath::constant(Matrix(), 1);
        std::vector<std::size_t> taus;
        double residual = 0.0;
        double ratio = 0.0;
        bool finite = true;
    };
    const grid::SmoothingFamily smoothing{a, c.op.m, static_cast<double>(grid.steps)};
    std::vector<PathResult> results(c.study.n_paths);
    parallel_for(c.study.n_paths, c.runner.workers, [&](std::size_t p) {
        const auto z = noise::sample_path(setup.noise, grid, c.study.seed_base + p);
        PathResult& r = results[p];
        if (c.scheme.kind == "regularized") {
            r.path = integrator::solve_regularized(a, graph, c.scheme.lambda, additive, z, x0, options);
            r.g_path = additive.g;
        } else if (c.scheme.kind == "limit") {
            r.path = integrator::solve_limit(a, graph, additive, z, x0, options);
            r.g_path = additive.g;
        } else {
            const auto mult = multiplicative(g, c.scheme.coupling, noise::control_process(z));
            integrator::PicardOptions po;
            po.alpha = c.scheme.alpha;
            po.tolerance = c.scheme.tolerance;
            po.max_picard = c.scheme.max_picard;
            po.scheme = options;
            auto ext = integrator::extend_solution(a, graph, mult, z, x0, po);
            r.taus = ext.taus;
            r.path = std::move(ext.path);
            std::vector<Matrix> ops;
            ops.reserve(grid.steps);
            for (std::size_t k = 0; k < grid.steps; ++k) {
                ops.push_back(mult.b(k, std::span<const Vector>(r.path.x.data(), k + 1)));
            }
            r.g_path = noise::OperatorPath(std::move(ops));
        }
        for (const auto& x : r.path.x) r.finite = r.finite && x.allFinite();
        r.residual = analysis::energy_ledger(a, r.path, r.g_path, z).max_abs_residual();
        const double data = analysis::apriori_data(a, r.g_path, z, x0).total();
        const double triple = analysis::apriori_monitor(a, r.path).total();
        r.ratio = data > 0.0 ? triple / data : (triple > 0.0 ? INFINITY : 0.0);
    });

    analysis::StudyReport report;
    report.kind = "solve";
    report.seed_base = c.study.seed_base;
    std::vector<double> norms;
    std::vector<double> residuals;
    std::vector<double> ratios;
    bool finite = true;
    StudyOutput out;
    for (std::size_t p = 0; p < results.size(); ++p) {
        const auto& r = results[p];
        const double parameter = static_cast<double>(p);
        norms.push_back(a.h_norm(r.path.x.back()));
        residuals.push_back(r.residual);
        ratios.push_back(r.ratio);
        finite = finite && r.finite;
        report.add("terminal_h_norm", parameter, norms.back());
        report.add("smoothed_terminal_h_norm", parameter, a.h_norm(grid::smoothing_apply(smoothing, r.path.x.back())));
        report.add("max_abs_energy_residual", parameter, r.residual);
        report.add("apriori_ratio", parameter, r.ratio);
        report.add("split_steps", parameter, static_cast<double>(r.path.split_steps));
        ordered_json run = {{"seed", c.study.seed_base + p}, {"split_steps", r.path.split_steps}};
        if (c.scheme.kind == "multiplicative") {
            ordered_json taus = ordered_json::array();
            for (auto t : r.taus) taus.push_back(grid.time(t));
            run["segment_boundaries"] = taus;
            report.add("segments", parameter, static_cast<double>(r.path.segments.size()));
        }
        out.runs.push_back(run);
    }
    report.add("terminal_h_norm", -1.0, estimate(norms));
    report.add("max_abs_energy_residual", -1.0, estimate(residuals));
    report.add("apriori_ratio", -1.0, estimate(ratios));
    const double worst = *std::max_element(ratios.begin(), ratios.end());
    report.check("solution finite", finite, finite ? "all paths" : "non-finite values");
    report.check("apriori ratio <= kappa", worst <= c.study.kappa,
                 "max ratio " + report::number(worst) + " vs kappa " + report::number(c.study.kappa));
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    add_report(out, report, study_file("solve", c.op.nodes, grid.steps, c.study.seed_base));
    if (c.output.verbosity >= 1) {
        const auto z = noise::sample_path(setup.noise, grid, c.study.seed_base);
        const auto ledger = analysis::energy_ledger(a, results.front().path, results.front().g_path, z);
        out.files.push_back({"solution_" + c.scheme.kind + "_n" + std::to_string(c.op.nodes) + "_N" +
                                 std::to_string(grid.steps) + "_s" + std::to_string(c.study.seed_base) + ".csv",
                             report::solution_csv(a, results.front().path, &ledger, c.output.verbosity)});
    }
    return out;
}

StudyOutput run_study(const ExperimentConfig& c) {
    const std::string& kind = c.study.kind;
    const std::size_t workers = c.runner.workers;
    if (kind == "solve") return solve_study(c);

    StudyOutput out;
    if (kind == "acceptance") {
        for (int id : c.study.criteria) {
            const auto r = acceptance::run_criterion(id, workers);
            const std::string file = "criterion" + std::to_string(id) + "_" + r.report.kind + "_s" +
                                     std::to_string(r.report.seed_base) + ".csv";
            out.files.push_back({file, report::study_csv(r.report)});
            ordered_json checks = checks_json(r.report);
            if (r.runtime_limit > 0.0) {
                checks.push_back({{"name", "runtime limit"},
                                  {"pass", r.runtime_seconds <= r.runtime_limit},
                                  {"detail", "<= " + report::number(r.runtime_limit) + " s"}});
            }
            out.studies.push_back({{"kind", "acceptance"},
                                   {"criterion", id},
                                   {"title", r.title},
                                   {"file", file},
                                   {"pass", r.pass},
                                   {"checks", checks}});
            out.timing[file] = r.runtime_seconds;
            out.pass = out.pass && r.pass;
        }
        return out;
    }

    const auto setup = c.setup();
    const std::size_t n = c.op.nodes;
    const std::size_t steps = c.scheme.steps;
    const std::uint64_t seed = c.study.seed_base;
    analysis::StudyReport r;
    if (kind == "heat_oracle") {
        r = analysis::heat_oracle({n, c.scheme.horizon, steps, c.study.tolerance_factor});
    } else if (kind == "lambda") {
        analysis::LambdaConfig lc;
        lc.setup = setup;
        lc.lambdas = c.study.lambdas;
        lc.graphs = {c.graph};
        lc.n_paths = c.study.n_paths;
        lc.seed_base = seed;
        lc.workers = workers;
        r = analysis::lambda_study(lc);
    } else if (kind == "dependence") {
        analysis::DependenceConfig dc;
        dc.setup = setup;
        dc.graph = c.graph;
        dc.deltas = c.study.deltas;
        dc.n_paths = c.study.n_paths;
        dc.seed_base = seed;
        dc.workers = workers;
        r = analysis::dependence_study(dc);
    } else if (kind == "mp_audit") {
        r = analysis::mp_audit_matrix({c.study.n_paths, steps, seed, workers});
    } else if (kind == "energy_residual") {
        analysis::ResidualConfig rc;
        rc.setup = setup;
        rc.levels = c.study.levels;
        rc.n_paths = c.study.n_paths;
        rc.seed_base = seed;
        rc.workers = workers;
        r = analysis::energy_residual_study(rc);
    } else if (kind == "apriori") {
        analysis::AprioriConfig ac;
        ac.setup = setup;
        ac.n_paths = c.study.n_paths;
        ac.kappa = c.study.kappa;
        ac.seed_base = seed;
        ac.workers = workers;
        r = analysis::apriori_study(ac);
    } else if (kind == "picard") {
        analysis::PicardConfig pc;
        pc.nodes = n;
        pc.steps = steps;
        pc.horizon = c.scheme.horizon;
        pc.alpha = c.scheme.alpha;
        pc.tolerance = c.scheme.tolerance;
        pc.max_picard = c.scheme.max_picard;
        pc.coupling = c.scheme.coupling;
        pc.seed_base = seed;
        pc.n_paths = c.study.n_paths;
        r = analysis::picard_study(pc);
    } else if (kind == "gronwall") {
        analysis::GronwallConfig gc;
        gc.runs = c.study.n_paths;
        gc.steps = steps;
        gc.seed_base = seed;
        r = analysis::gronwall_study(gc);
    } else if (kind == "monotone") {
        r = analysis::monotone_suite({c.study.n_paths, seed});
    } else {
        throw std::logic_error("unhandled study kind " + kind);
    }
    const std::size_t grid_steps = kind == "energy_residual" ? c.study.levels.back() : steps;
    add_report(out, r, study_file(kind, n, grid_steps, seed));
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

}  // namespace

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::string& root) {
    const std::filesystem::path dir(config.output.directory);
    if (root.empty()) return dir;
    auto leaf = dir.filename();
    if (leaf.empty()) leaf = dir.parent_path().filename();
    return std::filesystem::path(root) / leaf;
}

std::string blob_hash(const std::string& content) {
    return hex_sha1("blob " + std::to_string(content.size()) + std::string(1, '\0') + content);
}

std::string content_hash(std::vector<Artifact> artifacts) {
    std::sort(artifacts.begin(), artifacts.end(), [](const Artifact& a, const Artifact& b) { return a.name < b.name; });
    std::string tree;
    for (const auto& a : artifacts) tree += a.name + std::string(1, '\0') + blob_hash(a.content) + "\n";
    return hex_sha1("tree " + std::to_string(tree.size()) + std::string(1, '\0') + tree);
}

RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory) {
    RunOutcome outcome;
    outcome.directory = directory;
    std::filesystem::create_directories(directory);

    StudyOutput study;
    std::string diagnostic;
    const auto start = std::chrono::steady_clock::now();
    try {
        study = run_study(config);
        outcome.exit_code = study.pass ? kExitPass : kExitCheckFailed;
    } catch (const NumericalAbort& e) {
        study = StudyOutput{};
        diagnostic = e.what();
        outcome.exit_code = kExitNumericalAbort;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ordered_json summary;
    summary["schema_version"] = report::kSchemaVersion;
    summary["study"] = config.study.kind;
    summary["status"] = outcome.exit_code == kExitPass          ? "pass"
                        : outcome.exit_code == kExitCheckFailed ? "fail"
                                                                : "abort";
    summary["exit_code"] = outcome.exit_code;
    if (!diagnostic.empty()) summary["diagnostic"] = diagnostic;
    summary["studies"] = study.studies;
    outcome.summary = summary;

    outcome.artifacts = study.files;
    outcome.artifacts.push_back({"summary.json", summary.dump(2) + "\n"});

    ordered_json manifest;
    manifest["schema_version"] = report::kSchemaVersion;
    manifest["tool"] = "semimono";
    manifest["created_utc"] = utc_timestamp();
    manifest["config"] = to_json(config);
    ordered_json files = ordered_json::array();
    for (const auto& a : outcome.artifacts) files.push_back({{"file", a.name}, {"blob", blob_hash(a.content)}});
    manifest["artifacts"] = files;
    manifest["content_hash"] = content_hash(outcome.artifacts);
    manifest["runs"] = study.runs;
    study.timing["total"] = elapsed;
    manifest["runtime_seconds"] = study.timing;
    outcome.manifest = manifest;

    for (const auto& a : outcome.artifacts) write_file(directory / a.name, a.content);
    write_file(directory / "manifest.json", manifest.dump(2) + "\n");
    return outcome;
}

std::string list_builtins() {
    std::ostringstream os;
    os << "graphs:\n";
    for (const auto& name : monotone::builtin_graph_names()) {
        os << "  " << name << (name == "power" ? " (p >= 1, default 3)" : "") << "\n";
    }
    os << "potentials:\n";
    for (const auto& name : monotone::builtin_graph_names()) os << "  " << name << "\n";
    os << "noise:\n"
       << "  compound-poisson (q = 0, rate > 0)\n"
       << "  mixed (q > 0, rate > 0, drift)\n"
       << "  wiener (q > 0, rate = 0)\n"
       << "  zero (q = 0, rate = 0)\n";
    os << "marks:\n  constant\n  gaussian\n  rademacher\n";
    os << "schemes:\n  limit\n  multiplicative\n  regularized\n";
    os << "studies:\n";
    for (const auto& kind : study_kinds()) os << "  " << kind << "\n";
    return os.str();
}

int run_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    const char* root = std::getenv(kOutputRootEnv);
    const auto dir = resolve_output_dir(config, root ? root : "");
    const auto outcome = run_experiment(config, dir);
    for (const auto& s : outcome.summary["studies"]) {
        const std::string label = s.contains("criterion") ? "criterion " + std::to_string(s["criterion"].get<int>())
                                                          : s["kind"].get<std::string>();
        out << (s["pass"].get<bool>() ? "PASS " : "FAIL ") << label << " -> " << s["file"].get<std::string>() << "\n";
        for (const auto& check : s["checks"]) {
            out << "  " << (check["pass"].get<bool>() ? "ok   " : "FAIL ") << check["name"].get<std::string>() << ": "
                << check["detail"].get<std::string>() << "\n";
        }
    }
    if (outcome.exit_code == kExitNumericalAbort) {
        err << "numerical abort: " << outcome.summary["diagnostic"].get<std::string>() << "\n";
    }
    out << "artifacts: " << dir.string() << " (content hash " << outcome.manifest["content_hash"].get<std::string>()
        << ")\n";
    return outcome.exit_code;
}

int validate_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    try {
        out << to_ini(load_config(config_path));
        return kExitPass;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace semimono::cli
