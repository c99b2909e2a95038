#pragma once

#include "semimono/analysis.hpp"

#include <string>

namespace semimono::report {

inline constexpr int kSchemaVersion = 1;

/// quantity,parameter,estimate,std_error,n_paths,seed_base
std::string study_csv_header();
std::string study_csv(const analysis::StudyReport& report);

/// t,x_norm,xi_norm and, when a ledger is given, the ledger columns
/// half_norm_sq,v_integral,xi_integral,half_bracket,cross,residual. With
/// verbosity >= 2 the node values x_0..x_{n-1} follow.
std::string solution_csv_header(std::size_t nodes, bool with_ledger, int verbosity);
std::string solution_csv(const grid::GridOperator& a, const integrator::SolutionPath& sol,
                         const analysis::EnergyLedger* ledger, int verbosity);

/// Shortest round-trip decimal text for a double ("inf", "-inf", "nan" for
/// non-finite values).
std::string number(double v);

}  // namespace semimono::report
