#pragma once

#include "semimono/analysis.hpp"

#include <string>
#include <vector>

namespace semimono::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double runtime_seconds = 0.0;
    double runtime_limit = 0.0;  // 0 = no limit
    analysis::StudyReport report;
    std::string summary;         // one-line reason
};

/// Criterion ids 1..9.
std::vector<int> criterion_ids();
std::string criterion_title(int id);

/// Runs one criterion at its declared scale. Throws std::out_of_range for an
/// unknown id.
CriterionResult run_criterion(int id, std::size_t workers = 1);

/// "PASS [k] title: summary" / "FAIL [k] ...".
std::string format_line(const CriterionResult& r);

}  // namespace semimono::acceptance
