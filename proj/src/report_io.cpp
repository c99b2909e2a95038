#include "semimono/report_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace semimono::report {

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

std::string study_csv_header() { return "quantity,parameter,estimate,std_error,n_paths,seed_base"; }

std::string study_csv(const analysis::StudyReport& report) {
    std::ostringstream os;
    os << study_csv_header() << '\n';
    for (const auto& row : report.rows) {
        os << row.quantity << ',' << number(row.parameter) << ',' << number(row.estimate) << ','
           << number(row.std_error) << ',' << row.n_paths << ',' << report.seed_base << '\n';
    }
    return os.str();
}

std::string solution_csv_header(std::size_t nodes, bool with_ledger, int verbosity) {
    std::string h = "t,x_norm,xi_norm";
    if (with_ledger) h += ",half_norm_sq,v_integral,xi_integral,half_bracket,cross,residual";
    if (verbosity >= 2) {
        for (std::size_t i = 0; i < nodes; ++i) h += ",x_" + std::to_string(i);
    }
    return h;
}

std::string solution_csv(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                         const analysis::EnergyLedger* ledger, int verbosity) {
    std::ostringstream os;
    os << solution_csv_header(a.dim(), ledger != nullptr, verbosity) << '\n';
    for (std::size_t k = 0; k < sol.x.size(); ++k) {
        os << number(sol.grid.time(k)) << ',' << number(a.h_norm(sol.x[k])) << ',' << number(a.h_norm(sol.xi[k]));
        if (ledger != nullptr) {
            os << ',' << number(ledger->half_norm_sq[k]) << ',' << number(ledger->v_integral[k]) << ','
               << number(ledger->xi_integral[k]) << ',' << number(ledger->half_bracket[k]) << ','
               << number(ledger->cross[k]) << ',' << number(ledger->residual[k]);
        }
        if (verbosity >= 2) {
            for (Eigen::Index i = 0; i < sol.x[k].size(); ++i) os << ',' << number(sol.x[k][i]);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace semimono::report
