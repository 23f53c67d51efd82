#ifndef LOCC_SOLVE_HPP
#define LOCC_SOLVE_HPP

#include <map>
#include <string>

#include "locc/conic.hpp"

namespace locc {

enum class SolveStatus { optimal, infeasible, numerical_trouble };

std::string to_string(SolveStatus s);

struct SolveOptions {
    double eps = 1e-6;  // target absolute duality gap
    enum class Method { automatic, interior_point, splitting } method = Method::automatic;
    int max_iterations = 0;     // 0: solver default
    double time_limit_s = 0.0;  // 0: none
    bool verbose = false;       // progress to stderr
};

struct SolveReport {
    SolveStatus status = SolveStatus::numerical_trouble;
    double primal_value = 0.0;  // maximization sense
    double dual_value = 0.0;
    double gap = 0.0;  // |primal - dual|
    std::map<std::string, HermitianOp> block_values;
    int iterations = 0;
    double wall_time_s = 0.0;
    std::string solver;  // "ipm" or "admm"
};

// Solves the program to absolute duality gap eps. Complex Hermitian blocks
// pass through the doubled real embedding at this boundary and are mapped
// back on return; infeasibility is reported as a status, never thrown.
SolveReport solve(const ConicProgram& p, double eps);
SolveReport solve(const ConicProgram& p, const SolveOptions& options);

}  // namespace locc

#endif
