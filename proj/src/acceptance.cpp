#include "semimono/acceptance.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace semimono::acceptance {

namespace {

struct Definition {
    int id;
    const char* title;
    double runtime_limit;
};

constexpr Definition kCriteria[] = {
    {1, "monotone calculus suite", 10.0},
    {2, "heat equation oracle", 5.0},
    {3, "control-process inequality audit", 300.0},
    {4, "energy identity residual", 0.0},
    {5, "a priori estimate", 0.0},
    {6, "lambda convergence", 120.0},
    {7, "fixed-point construction", 0.0},
    {8, "uniqueness and continuous dependence", 0.0},
    {9, "stochastic gronwall bound", 0.0},
};

const Definition& lookup(int id) {
    for (const auto& d : kCriteria) {
        if (d.id == id) return d;
    }
    throw std::out_of_range("unknown acceptance criterion " + std::to_string(id));
}

analysis::StudyReport run_study(int id, std::size_t workers) {
    switch (id) {
        case 1:
            return analysis::monotone_suite({});
        case 2:
            return analysis::heat_oracle({});
        case 3: {
            analysis::MpMatrixConfig c;
            c.workers = workers;
            return analysis::mp_audit_matrix(c);
        }
        case 4: {
            analysis::ResidualConfig c;
            c.workers = workers;
            return analysis::energy_residual_study(c);
        }
        case 5: {
            analysis::AprioriConfig c;
            c.workers = workers;
            return analysis::apriori_study(c);
        }
        case 6: {
            analysis::LambdaConfig c;
            c.workers = workers;
            return analysis::lambda_study(c);
        }
        case 7:
            return analysis::picard_study({});
        case 8: {
            analysis::DependenceConfig c;
            c.workers = workers;
            return analysis::dependence_study(c);
        }
        case 9:
            return analysis::gronwall_study({});
        default:
            throw std::out_of_range("unknown acceptance criterion " + std::to_string(id));
    }
}

}  // namespace

std::vector<int> criterion_ids() {
    std::vector<int> ids;
    for (const auto& d : kCriteria) ids.push_back(d.id);
    return ids;
}

std::string criterion_title(int id) { return lookup(id).title; }

CriterionResult run_criterion(int id, std::size_t workers) {
    const Definition& def = lookup(id);
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = id;
    r.title = def.title;
    r.runtime_limit = def.runtime_limit;
    r.report = run_study(id, workers);
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t failed = 0;
    std::string first_failure;
    for (const auto& c : r.report.checks) {
        if (c.pass) continue;
        if (failed++ == 0) first_failure = c.name + " (" + c.detail + ")";
    }
    const bool in_time = def.runtime_limit <= 0.0 || r.runtime_seconds <= def.runtime_limit;
    r.pass = failed == 0 && in_time;

    std::ostringstream os;
    os.precision(3);
    if (failed > 0) {
        os << failed << " of " << r.report.checks.size() << " checks failed; first: " << first_failure;
    } else {
        os << r.report.checks.size() << " checks passed";
    }
    os << "; runtime " << r.runtime_seconds << " s";
    if (def.runtime_limit > 0.0) os << (in_time ? " <= " : " > ") << def.runtime_limit << " s";
    r.summary = os.str();
    return r;
}

std::string format_line(const CriterionResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.title + ": " + r.summary;
}

}  // namespace semimono::acceptance
