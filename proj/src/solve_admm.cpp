#include <chrono>
#include <cmath>
#include <iostream>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "solvers.hpp"

namespace locc::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kRoot2 = 1.4142135623730951;

// PSD projection of one packed svec segment.
void project_psd_segment(double* seg, int edim) {
    MatrixXd y(edim, edim);
    int t = 0;
    for (int c = 0; c < edim; ++c)
        for (int r = 0; r <= c; ++r) {
            const double v = seg[t++];
            if (r == c) {
                y(r, c) = v;
            } else {
                y(r, c) = v / kRoot2;
                y(c, r) = y(r, c);
            }
        }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(y);
    VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    y.noalias() = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    t = 0;
    for (int c = 0; c < edim; ++c)
        for (int r = 0; r <= c; ++r) seg[t++] = (r == c) ? y(r, c) : kRoot2 * y(r, c);
}

}  // namespace

SolverResult solve_admm(const StdForm& f, const SolveOptions& opt) {
    SolverResult res;
    res.name = "admm";
    const int N = f.ncoord;
    const int p = static_cast<int>(f.rows.size());
    const int M = p + N;  // constraint rows: equalities then cone identity

    // c in minimization sense
    VectorXd cmin = -Eigen::Map<const VectorXd>(f.cmax.data(), N);
    VectorXd btil = VectorXd::Zero(M);
    for (int t = 0; t < p; ++t) btil[t] = f.rows[t].rhs;

    // ---- scaling: Ruiz equilibration with per-block-uniform cone rows ------
    VectorXd d = VectorXd::Ones(M), e = VectorXd::Ones(N);
    {
        for (int sweep = 0; sweep < 10; ++sweep) {
            VectorXd rown = VectorXd::Zero(M), coln = VectorXd::Zero(N);
            for (int t = 0; t < p; ++t)
                for (size_t k = 0; k < f.rows[t].idx.size(); ++k) {
                    const double a = std::abs(d[t] * f.rows[t].val[k] * e[f.rows[t].idx[k]]);
                    rown[t] = std::max(rown[t], a);
                    coln[f.rows[t].idx[k]] = std::max(coln[f.rows[t].idx[k]], a);
                }
            for (int i = 0; i < N; ++i) {
                const double a = std::abs(d[p + i] * e[i]);
                rown[p + i] = std::max(rown[p + i], a);
                coln[i] = std::max(coln[i], a);
            }
            for (int t = 0; t < p; ++t)
                if (rown[t] > 0) d[t] /= std::sqrt(rown[t]);
            for (const auto& blk : f.blocks) {
                double mx = 0.0;
                for (int i = blk.offset; i < blk.offset + blk.len; ++i)
                    mx = std::max(mx, rown[p + i]);
                if (mx > 0)
                    for (int i = blk.offset; i < blk.offset + blk.len; ++i)
                        d[p + i] /= std::sqrt(mx);
            }
            for (int i = 0; i < N; ++i)
                if (coln[i] > 0) e[i] /= std::sqrt(coln[i]);
        }
    }
    VectorXd bhat = d.cwiseProduct(btil);
    VectorXd chat = e.cwiseProduct(cmin);
    double sigma_b = 1.0 / std::max(1e-6, bhat.norm());
    const double rho_c = 1.0 / std::max(1e-6, chat.norm());
    bhat *= sigma_b;
    chat *= rho_c;

    // ---- KKT factorization [[I, Ahat'],[Ahat, -I]] --------------------------
    std::vector<Triplet> trips;
    long long nnz_guess = N + M;
    for (int t = 0; t < p; ++t) nnz_guess += static_cast<long long>(f.rows[t].idx.size());
    trips.reserve(static_cast<size_t>(nnz_guess + N));
    for (int i = 0; i < N; ++i) trips.emplace_back(i, i, 1.0);
    for (int t = 0; t < p; ++t)
        for (size_t k = 0; k < f.rows[t].idx.size(); ++k) {
            const int ccol = f.rows[t].idx[k];
            const double a = d[t] * f.rows[t].val[k] * e[ccol];
            trips.emplace_back(N + t, ccol, a);
        }
    for (int i = 0; i < N; ++i) trips.emplace_back(N + p + i, i, -d[p + i] * e[i]);
    for (int r = 0; r < M; ++r) trips.emplace_back(N + r, N + r, -1.0);
    SpMat kkt(N + M, N + M);
    kkt.setFromTriplets(trips.begin(), trips.end());
    trips.clear();
    trips.shrink_to_fit();
    SpMat kktLower = kkt.triangularView<Eigen::Lower>();
    kkt.resize(0, 0);

    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    ldlt.compute(kktLower);
    if (ldlt.info() != Eigen::Success) {
        res.status = SolveStatus::numerical_trouble;
        return res;
    }

    // scaled operator applications
    auto apply_A = [&](const VectorXd& x, VectorXd& out) {
        out.setZero(M);
        for (int t = 0; t < p; ++t) {
            double acc = 0.0;
            for (size_t k = 0; k < f.rows[t].idx.size(); ++k)
                acc += d[t] * f.rows[t].val[k] * e[f.rows[t].idx[k]] * x[f.rows[t].idx[k]];
            out[t] = acc;
        }
        for (int i = 0; i < N; ++i) out[p + i] = -d[p + i] * e[i] * x[i];
    };
    // lin_solve of (I + Q) via the KKT system plus a rank-one update in tau
    VectorXd kkt_rhs(N + M), kkt_sol(N + M);
    VectorXd ap_work(M);
    auto m2_solve = [&](const VectorXd& wx, const VectorXd& wy, VectorXd& px, VectorXd& qy) {
        kkt_rhs.head(N) = wx;
        kkt_rhs.tail(M) = -wy;
        kkt_sol = ldlt.solve(kkt_rhs);
        px = kkt_sol.head(N);
        // q = wy + A p, recomputed directly for accuracy
        apply_A(px, ap_work);
        qy = wy + ap_work;
    };
    VectorXd gx(N), gy(M);
    m2_solve(chat, bhat, gx, gy);
    double gdenom = 1.0 + chat.dot(gx) + bhat.dot(gy);

    // HSD iterate: u = (x, y, tau), v = (0, s, kappa)
    VectorXd ux = VectorXd::Zero(N), uy = VectorXd::Zero(M);
    double utau = 1.0;
    VectorXd vs = VectorXd::Zero(M);
    double vkappa = 1.0;

    const double alpha = 1.7;
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 200000;
    const int check_every = 25;
    const double eps = opt.eps;
    const double bnorm = 1.0 + btil.norm();
    const double cnorm = 1.0 + cmin.norm();
    int rescales_left = 12;

    VectorXd tx(N), ty(M), px(N), qy(M);
    VectorXd xhat(N), yhat(M), shat(M), work(M), workN(N);

    const auto t0 = std::chrono::steady_clock::now();
    for (int iter = 1; iter <= max_iter; ++iter) {
        res.iterations = iter;
        // w = u + v (x-part of v is zero)
        const double wtau = utau + vkappa;
        m2_solve(ux, uy + vs, tx, ty);
        const double r = (wtau + chat.dot(tx) + bhat.dot(ty)) / gdenom;
        px = tx - r * gx;
        qy = ty - r * gy;
        // over-relaxation
        const double ohat_tau = alpha * r + (1 - alpha) * utau;
        px = alpha * px + (1 - alpha) * ux;
        qy = alpha * qy + (1 - alpha) * uy;

        // u = Pi(ohat - v); v += u - ohat
        ux = px;  // free variables
        work = qy - vs;
        // equality rows: dual free; cone rows: project onto PSD
        for (const auto& blk : f.blocks) {
            double* seg = work.data() + p + blk.offset;
            project_psd_segment(seg, blk.edim);
        }
        uy = work;
        const double tau_new = std::max(0.0, ohat_tau - vkappa);
        vs += uy - qy;
        vkappa += tau_new - ohat_tau;
        utau = tau_new;

        if (iter % check_every != 0 && iter != max_iter) continue;

        // ---- unscaled termination checks ---------------------------------
        if (utau > 1e-9) {
            // x = E x'/(sigma tau), y = D y'/(rho tau), s = D^{-1} s'/(sigma tau)
            xhat = e.cwiseProduct(ux) / (sigma_b * utau);
            yhat = d.cwiseProduct(uy) / (rho_c * utau);
            shat = vs.cwiseQuotient(d) / (sigma_b * utau);

            // primal residual over both row groups (unscaled operator)
            double pr2 = 0.0;
            for (int t = 0; t < p; ++t) {
                double acc = 0.0;
                for (size_t k = 0; k < f.rows[t].idx.size(); ++k)
                    acc += f.rows[t].val[k] * xhat[f.rows[t].idx[k]];
                const double rres = acc + shat[t] - btil[t];
                pr2 += rres * rres;
            }
            for (int i = 0; i < N; ++i) {
                const double rres = -xhat[i] + shat[p + i];
                pr2 += rres * rres;
            }
            const double pres = std::sqrt(pr2) / bnorm;

            workN = cmin;
            for (int t = 0; t < p; ++t) {
                const double w = yhat[t];
                if (w == 0.0) continue;
                for (size_t k = 0; k < f.rows[t].idx.size(); ++k)
                    workN[f.rows[t].idx[k]] += w * f.rows[t].val[k];
            }
            for (int i = 0; i < N; ++i) workN[i] -= yhat[p + i];
            const double dres = workN.norm() / cnorm;

            const double pobj_min = cmin.dot(xhat);
            const double dobj_min = -btil.dot(yhat);
            const double gap = std::abs(pobj_min - dobj_min);

            res.primal_max = -pobj_min;
            res.dual_max = -dobj_min;

            if (opt.verbose && (iter % (check_every * 20) == 0 || iter == max_iter))
                std::cerr << "admm " << iter << " pres=" << pres << " dres=" << dres
                          << " gap=" << gap << " val=" << -pobj_min << "\n";

            if (pres <= eps && dres <= eps &&
                (gap <= eps || gap <= eps * (std::abs(pobj_min) + std::abs(dobj_min)))) {
                // report the cone-feasible side: x from the projected slack
                res.x = shat.tail(N);
                res.status = SolveStatus::optimal;
                return res;
            }

            // rebalance the primal/dual weighting when one residual lags far
            // behind; the data rescaling keeps the unscaled candidate intact
            // and only costs one extra linear solve for the cached g
            if (rescales_left > 0 && iter % 250 == 0 && iter < max_iter / 2) {
                const double lo = 1e-12;
                const double ratio = std::max(pres, lo) / std::max(dres, lo);
                if (ratio > 5.0 || ratio < 0.2) {
                    double fscale = std::sqrt(ratio);
                    fscale = std::min(3.0, std::max(1.0 / 3.0, fscale));
                    bhat *= fscale;
                    sigma_b *= fscale;
                    ux *= fscale;
                    for (int t = 0; t < M; ++t) vs[t] *= fscale;
                    vkappa *= fscale;
                    m2_solve(chat, bhat, gx, gy);
                    gdenom = 1.0 + chat.dot(gx) + bhat.dot(gy);
                    --rescales_left;
                }
            }
        } else {
            // infeasibility certificates from the unscaled ray
            yhat = d.cwiseProduct(uy) / rho_c;
            const double bty = btil.dot(yhat);
            if (bty < -1e-12) {
                workN.setZero(N);
                for (int t = 0; t < p; ++t) {
                    const double w = yhat[t];
                    if (w == 0.0) continue;
                    for (size_t k = 0; k < f.rows[t].idx.size(); ++k)
                        workN[f.rows[t].idx[k]] += w * f.rows[t].val[k];
                }
                for (int i = 0; i < N; ++i) workN[i] -= yhat[p + i];
                if (workN.norm() * bnorm <= 1e-7 * (-bty)) {
                    res.status = SolveStatus::infeasible;
                    return res;
                }
            }
        }

        if (opt.time_limit_s > 0) {
            const double el = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - t0).count();
            if (el > opt.time_limit_s) break;
        }
    }

    // best effort: return the last iterate without the optimal flag
    if (utau > 1e-9) res.x = vs.tail(N).cwiseQuotient(d.tail(N)) / (sigma_b * utau);
    res.status = SolveStatus::numerical_trouble;
    return res;
}

}  // namespace locc::detail
