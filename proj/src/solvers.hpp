#ifndef LOCC_SOLVERS_HPP
#define LOCC_SOLVERS_HPP

#include "locc/solve.hpp"
#include "solve_stdform.hpp"

namespace locc::detail {

struct SolverResult {
    SolveStatus status = SolveStatus::numerical_trouble;
    double primal_max = 0.0;  // objective values in maximization sense
    double dual_max = 0.0;
    Eigen::VectorXd x;  // packed svec coordinates of all blocks
    int iterations = 0;
    const char* name = "";
};

// Dense Nesterov-Todd primal-dual interior-point method; intended for
// programs whose (deduplicated, rank-filtered) equality count stays below a
// few thousand.
SolverResult solve_ipm(const StdForm& f, const SolveOptions& opt);

// Operator-splitting solver on the homogeneous self-dual embedding; handles
// the large hierarchy programs at moderate accuracy.
SolverResult solve_admm(const StdForm& f, const SolveOptions& opt);

}  // namespace locc::detail

#endif
