#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semimono {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a numerical procedure cannot deliver its contract
/// (non-convergent prox solve, non-contracting Picard map, overflow).
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace semimono
