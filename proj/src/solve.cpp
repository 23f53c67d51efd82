#include "locc/solve.hpp"

#include <chrono>
#include <iostream>

#include "solvers.hpp"

namespace locc {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::numerical_trouble: return "numerical_trouble";
    }
    return "unknown";
}

SolveReport solve(const ConicProgram& p, double eps) {
    SolveOptions opt;
    opt.eps = eps;
    return solve(p, opt);
}

SolveReport solve(const ConicProgram& p, const SolveOptions& options) {
    if (p.empty()) throw std::invalid_argument("solve: program has no blocks");
    const auto t0 = std::chrono::steady_clock::now();

    detail::StdForm f = detail::assemble(p);
    SolveReport rep;
    if (f.trivially_infeasible) {
        rep.status = SolveStatus::infeasible;
        rep.solver = "presolve";
        return rep;
    }

    bool use_ipm;
    switch (options.method) {
        case SolveOptions::Method::interior_point: use_ipm = true; break;
        case SolveOptions::Method::splitting: use_ipm = false; break;
        default: {
            int max_edim = 0;
            for (const auto& b : f.blocks) max_edim = std::max(max_edim, b.edim);
            use_ipm = f.rows.size() <= 4200 && f.ncoord <= 400000 && max_edim <= 160;
        }
    }

    detail::SolverResult sr =
        use_ipm ? detail::solve_ipm(f, options) : detail::solve_admm(f, options);

    rep.status = sr.status;
    rep.primal_value = sr.primal_max;
    rep.dual_value = sr.dual_max;
    rep.gap = std::abs(sr.primal_max - sr.dual_max);
    rep.iterations = sr.iterations;
    rep.solver = sr.name;

    if (sr.x.size() == f.ncoord) {
        // residuals of the full (pre-selection) equality set
        if (sr.status == SolveStatus::optimal) {
            double worst = 0.0;
            for (const auto& row : f.rows) {
                double acc = 0.0;
                for (size_t k = 0; k < row.idx.size(); ++k) acc += row.val[k] * sr.x[row.idx[k]];
                worst = std::max(worst, std::abs(acc - row.rhs));
            }
            const double allow = std::max(1e-6, 200.0 * options.eps);
            if (worst > allow) rep.status = SolveStatus::numerical_trouble;
        }
        for (size_t j = 0; j < f.blocks.size(); ++j) {
            MatrixXcd m = detail::extract_complex_block(f, static_cast<int>(j), sr.x);
            rep.block_values.emplace(
                p.blocks()[j].label,
                HermitianOp(SystemShape::single(p.blocks()[j].dim), std::move(m)));
        }
    }

    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace locc
