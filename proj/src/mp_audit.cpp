#include "semimono/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semimono::noise {

namespace {

struct PathSample {
    double lhs_square = 0.0;
    double rhs_square = 0.0;
    double lhs_root = 0.0;
    double rhs_root = 0.0;
};

PathSample audit_one(const SemimartingalePath& z, const IntegrandRule& rule, const StopRule& stop_rule) {
    const std::size_t n = z.steps();
    std::vector<Matrix> ys;
    ys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ys.push_back(rule(i, z));
    const OperatorPath y(std::move(ys));
    const auto integral = stochastic_integral(y, z);
    const std::size_t stop = std::min(stop_rule(z, integral), z.grid().no_stop());

    PathSample s;
    if (stop == 0) return s;
    // Everything strictly before tau: grid points t_0..t_{stop-1}.
    const std::size_t last = stop - 1;
    double sup_sq = 0.0;
    for (std::size_t j = 0; j <= last; ++j) sup_sq = std::max(sup_sq, integral[j].squaredNorm());

    const ControlPath c = control_process(z);
    double integral_dc = 0.0;
    for (std::size_t i = 0; i < last; ++i) integral_dc += y.sq_norm(i) * (c.values[i + 1] - c.values[i]);
    const double lambda = c.values[last] * integral_dc;

    s.lhs_square = sup_sq;
    s.rhs_square = lambda;
    s.lhs_root = std::sqrt(sup_sq);
    s.rhs_root = 2.0 * std::sqrt(lambda);
    return s;
}

InequalityCheck judge(const std::vector<double>& lhs, const std::vector<double>& rhs) {
    std::vector<double> diff(lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
    InequalityCheck check;
    check.lhs = estimate(lhs);
    check.rhs = estimate(rhs);
    check.difference = estimate(diff);
    check.relative_error = check.rhs.mean > 0.0 ? check.difference.std_error / check.rhs.mean : 0.0;
    check.pass = check.difference.mean <= 3.0 * check.difference.std_error;
    return check;
}

}  // namespace

MpAuditReport mp_inequality_audit(const SemimartingaleSpec& spec, const TimeGrid& grid, const IntegrandRule& y,
                                  const StopRule& stop, std::size_t n_paths, std::uint64_t seed_base,
                                  std::size_t workers) {
    if (n_paths < 1000) throw std::invalid_argument("mp_inequality_audit: need at least 1000 paths");
    spec.validate();
    grid.validate();
    std::vector<PathSample> samples(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t p) {
        samples[p] = audit_one(sample_path(spec, grid, seed_base + p), y, stop);
    });

    std::vector<double> ls(n_paths), rs(n_paths), lr(n_paths), rr(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        ls[p] = samples[p].lhs_square;
        rs[p] = samples[p].rhs_square;
        lr[p] = samples[p].lhs_root;
        rr[p] = samples[p].rhs_root;
    }
    MpAuditReport report;
    report.square = judge(ls, rs);
    report.root = judge(lr, rr);
    report.n_paths = n_paths;
    report.seed_base = seed_base;
    return report;
}

}  // namespace semimono::noise
