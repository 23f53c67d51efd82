#include <chrono>
#include <cmath>
#include <iostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "solvers.hpp"

namespace locc::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BlockRows {
    // rows (by local index into the selected set) touching this block,
    // with their matrix-convention triplets
    std::vector<int> row;
    std::vector<std::vector<BlockTriplet>> trip;
};

double block_inner(const std::vector<BlockTriplet>& trip, const MatrixXd& v) {
    double acc = 0.0;
    for (const auto& t : trip) acc += (t.r == t.c) ? t.a * v(t.r, t.r) : 2.0 * t.a * v(t.r, t.c);
    return acc;
}

void add_scaled_functional(MatrixXd& m, const std::vector<BlockTriplet>& trip, double w) {
    for (const auto& t : trip) {
        m(t.r, t.c) += w * t.a;
        if (t.r != t.c) m(t.c, t.r) += w * t.a;
    }
}

// Maximum step alpha with X + alpha*D staying PSD, given the Cholesky of X.
double max_step(const Eigen::LLT<MatrixXd>& lltx, const MatrixXd& d) {
    MatrixXd t = lltx.matrixL().solve(d);
    MatrixXd t2 = lltx.matrixL().solve(t.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (t2 + t2.transpose()),
                                               Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    return lmin >= -1e-14 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

}  // namespace

SolverResult solve_ipm(const StdForm& f, const SolveOptions& opt) {
    SolverResult res;
    res.name = "ipm";
    const int nb = static_cast<int>(f.blocks.size());
    const int nrows_all = static_cast<int>(f.rows.size());

    // ---- rank-revealing row selection (pivoted Cholesky of the Gram matrix)
    std::vector<int> selected;
    {
        MatrixXd gram = MatrixXd::Zero(nrows_all, nrows_all);
        // sparse accumulation: group rows by coordinate via a coordinate->rows index
        std::vector<std::vector<std::pair<int, double>>> bycoord(f.ncoord);
        for (int t = 0; t < nrows_all; ++t)
            for (size_t k = 0; k < f.rows[t].idx.size(); ++k)
                bycoord[f.rows[t].idx[k]].push_back({t, f.rows[t].val[k]});
        for (const auto& col : bycoord)
            for (size_t a = 0; a < col.size(); ++a)
                for (size_t b = a; b < col.size(); ++b) {
                    gram(col[a].first, col[b].first) += col[a].second * col[b].second;
                    if (a != b) gram(col[b].first, col[a].first) = gram(col[a].first, col[b].first);
                }
        const double dmax = gram.diagonal().maxCoeff();
        const double cut = std::max(1e-20, 1e-11 * dmax);
        std::vector<char> active(nrows_all, 1);
        VectorXd diag = gram.diagonal();
        for (int step = 0; step < nrows_all; ++step) {
            int piv = -1;
            double best = cut;
            for (int t = 0; t < nrows_all; ++t)
                if (active[t] && diag[t] > best) {
                    best = diag[t];
                    piv = t;
                }
            if (piv < 0) break;
            active[piv] = 0;
            selected.push_back(piv);
            const double dp = diag[piv];
            VectorXd gcol = gram.col(piv);
            // Schur update restricted to still-active rows
            for (int t = 0; t < nrows_all; ++t) {
                if (!active[t]) continue;
                const double gtp = gcol[t];
                if (gtp == 0.0) continue;
                gram.col(t).noalias() -= gcol * (gtp / dp);
                diag[t] -= gtp * gtp / dp;
            }
        }
        std::sort(selected.begin(), selected.end());
    }
    const int p = static_cast<int>(selected.size());
    if (p == 0) {
        // no constraints survive: unbounded unless objective is zero; the
        // hierarchy never produces this, so flag it
        res.status = SolveStatus::numerical_trouble;
        return res;
    }

    std::vector<BlockRows> brows(nb);
    VectorXd b(p);
    std::vector<std::vector<int>> row_blocks(p);
    {
        std::vector<BlockTriplet> tmp;
        for (int t = 0; t < p; ++t) {
            const StdRow& row = f.rows[selected[t]];
            b[t] = row.rhs;
            for (int j = 0; j < nb; ++j) {
                row_block_triplets(f, row, j, tmp);
                if (!tmp.empty()) {
                    brows[j].row.push_back(t);
                    brows[j].trip.push_back(tmp);
                    row_blocks[t].push_back(j);
                }
            }
        }
    }

    // objective in minimization sense
    VectorXd cvec = -Eigen::Map<const VectorXd>(f.cmax.data(), f.ncoord);
    std::vector<MatrixXd> cmat(nb);
    for (int j = 0; j < nb; ++j) cmat[j] = unpack_block(f, j, cvec);

    double nu = 0.0;
    for (const auto& blk : f.blocks) nu += blk.edim;

    // starting point
    const double bmax = b.size() ? b.cwiseAbs().maxCoeff() : 1.0;
    double cmax_abs = 0.0;
    for (int j = 0; j < nb; ++j) cmax_abs = std::max(cmax_abs, cmat[j].cwiseAbs().maxCoeff());
    const double eta_p = std::max(10.0, 2.0 * bmax * std::sqrt(nu));
    const double eta_d = std::max(10.0, 1.0 + cmax_abs);

    std::vector<MatrixXd> X(nb), S(nb);
    for (int j = 0; j < nb; ++j) {
        X[j] = eta_p * MatrixXd::Identity(f.blocks[j].edim, f.blocks[j].edim);
        S[j] = eta_d * MatrixXd::Identity(f.blocks[j].edim, f.blocks[j].edim);
    }
    VectorXd y = VectorXd::Zero(p);

    const double eps = opt.eps;
    // feasibility floor: equality residuals of degenerate optima bottom out
    // around 1e-8 relative in double precision
    const double ftol = std::max(1.5e-8, 0.1 * eps);
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 100;
    const double bnorm = 1.0 + b.norm();
    double cnorm = 1.0;
    for (int j = 0; j < nb; ++j) cnorm += cmat[j].squaredNorm();
    cnorm = std::sqrt(cnorm);

    VectorXd xvec(f.ncoord);
    auto pack_all = [&]() {
        for (int j = 0; j < nb; ++j) pack_block(f, j, X[j], xvec);
    };

    // best iterate seen so far, judged by the worst normalized residual
    double best_merit = std::numeric_limits<double>::infinity();
    double best_pres = 0, best_dres = 0, best_gap = 0, best_p = 0, best_d = 0;
    VectorXd best_x;
    int no_progress = 0;

    auto accepts = [&](double pres, double dres, double gap, double pobj, double dobj) {
        return pres <= ftol && dres <= ftol &&
               (gap <= eps || gap <= eps * (std::abs(pobj) + std::abs(dobj)));
    };

    int stall = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter;
        pack_all();

        VectorXd rp(p);
        for (int t = 0; t < p; ++t) {
            const StdRow& row = f.rows[selected[t]];
            double acc = 0.0;
            for (size_t k = 0; k < row.idx.size(); ++k) acc += row.val[k] * xvec[row.idx[k]];
            rp[t] = b[t] - acc;
        }

        std::vector<MatrixXd> aty(nb), rd(nb);
        for (int j = 0; j < nb; ++j) {
            aty[j] = MatrixXd::Zero(f.blocks[j].edim, f.blocks[j].edim);
            for (size_t k = 0; k < brows[j].row.size(); ++k)
                add_scaled_functional(aty[j], brows[j].trip[k], y[brows[j].row[k]]);
            rd[j] = cmat[j] - S[j] - aty[j];
        }

        double mu = 0.0, dres2 = 0.0;
        for (int j = 0; j < nb; ++j) {
            mu += X[j].cwiseProduct(S[j]).sum();
            dres2 += rd[j].squaredNorm();
        }
        mu /= nu;
        const double pres = rp.norm() / bnorm;
        const double dres = std::sqrt(dres2) / cnorm;
        const double pobj_min = cvec.dot(xvec);
        const double dobj_min = b.dot(y);
        const double gap = std::abs(pobj_min - dobj_min);
        res.primal_max = -pobj_min;
        res.dual_max = -dobj_min;
        res.x = xvec;

        if (opt.verbose)
            std::cerr << "ipm " << iter << " mu=" << mu << " pres=" << pres << " dres=" << dres
                      << " gap=" << gap << " p=" << -pobj_min << "\n";

        if (accepts(pres, dres, gap, pobj_min, dobj_min)) {
            res.status = SolveStatus::optimal;
            return res;
        }

        // Farkas-style infeasibility probe on the scaled dual iterate
        if (iter >= 3 && pres > 1e3 * ftol) {
            const double ynorm = y.norm();
            if (ynorm > 1.0 && b.dot(y) / ynorm > 1e-7) {
                bool cert = true;
                for (int j = 0; j < nb && cert; ++j) {
                    MatrixXd z = -aty[j] / ynorm;
                    Eigen::SelfAdjointEigenSolver<MatrixXd> es(z, Eigen::EigenvaluesOnly);
                    if (es.eigenvalues().minCoeff() < -1e-9 *
                            std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
                        cert = false;
                }
                if (cert) {
                    res.status = SolveStatus::infeasible;
                    return res;
                }
            }
        }

        const double merit =
            std::max({pres, dres, gap / (1.0 + std::abs(pobj_min) + std::abs(dobj_min))});
        if (merit < 0.98 * best_merit) {
            best_merit = merit;
            best_pres = pres;
            best_dres = dres;
            best_gap = gap;
            best_p = -pobj_min;
            best_d = -dobj_min;
            best_x = xvec;
            no_progress = 0;
        } else {
            ++no_progress;
        }
        // double precision is exhausted: fall back to the best iterate
        if (mu < 1e-13 || (no_progress >= 6 && iter >= 12)) break;

        if (opt.time_limit_s > 0) {
            const double el = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - t0).count();
            if (el > opt.time_limit_s) break;
        }

        // NT scaling
        std::vector<MatrixXd> W(nb), Sinv(nb);
        std::vector<Eigen::LLT<MatrixXd>> lltX(nb), lltS(nb);
        bool scale_ok = true;
        for (int j = 0; j < nb; ++j) {
            lltX[j].compute(X[j]);
            lltS[j].compute(S[j]);
            if (lltX[j].info() != Eigen::Success || lltS[j].info() != Eigen::Success) {
                scale_ok = false;
                break;
            }
            MatrixXd lx = lltX[j].matrixL();
            MatrixXd inner = lx.transpose() * S[j] * lx;
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (inner + inner.transpose()));
            if (es.eigenvalues().minCoeff() <= 0) {
                scale_ok = false;
                break;
            }
            const VectorXd lam = es.eigenvalues();
            MatrixXd q = es.eigenvectors();
            W[j] = lx * q * lam.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose() *
                   lx.transpose();
            W[j] = 0.5 * (W[j] + W[j].transpose()).eval();
            Sinv[j] = lx * q * lam.cwiseInverse().asDiagonal() * q.transpose() * lx.transpose();
            Sinv[j] = 0.5 * (Sinv[j] + Sinv[j].transpose()).eval();
        }
        if (!scale_ok) {
            res.status = SolveStatus::numerical_trouble;
            return res;
        }

        // Schur complement M(t,t') = tr(A_t W A_t' W)
        MatrixXd M = MatrixXd::Zero(p, p);
        for (int j = 0; j < nb; ++j) {
            const auto& br = brows[j];
            const MatrixXd& w = W[j];
            const int nr = static_cast<int>(br.row.size());
            for (int a = 0; a < nr; ++a) {
                MatrixXd v = MatrixXd::Zero(w.rows(), w.cols());
                for (const auto& t : br.trip[a]) {
                    v.noalias() += t.a * (w.col(t.r) * w.row(t.c));
                    if (t.r != t.c) v.noalias() += t.a * (w.col(t.c) * w.row(t.r));
                }
                for (int bb = a; bb < nr; ++bb) {
                    const double m = block_inner(br.trip[bb], v);
                    M(br.row[a], br.row[bb]) += m;
                    if (bb != a) M(br.row[bb], br.row[a]) += m;
                }
            }
        }
        double delta = 1e-13 * std::max(1.0, M.diagonal().mean());
        Eigen::LLT<MatrixXd> lltM;
        for (int attempt = 0; attempt < 3; ++attempt) {
            MatrixXd Mreg = M + delta * MatrixXd::Identity(p, p);
            lltM.compute(Mreg);
            if (lltM.info() == Eigen::Success) break;
            delta *= 1e4;
        }
        if (lltM.info() != Eigen::Success) {
            res.status = SolveStatus::numerical_trouble;
            return res;
        }

        // direction for a given centering target R_j
        std::vector<MatrixXd> G(nb), dX(nb), dS(nb);
        VectorXd dy(p);
        auto compute_direction = [&](const std::vector<MatrixXd>& R) {
            VectorXd rhs = rp;
            for (int j = 0; j < nb; ++j) {
                G[j].noalias() = W[j] * rd[j] * W[j];
                const MatrixXd gj = R[j] - G[j];
                const auto& br = brows[j];
                for (size_t k = 0; k < br.row.size(); ++k)
                    rhs[br.row[k]] -= block_inner(br.trip[k], gj);
            }
            dy = lltM.solve(rhs);
            for (int j = 0; j < nb; ++j) {
                MatrixXd atdy = MatrixXd::Zero(f.blocks[j].edim, f.blocks[j].edim);
                const auto& br = brows[j];
                for (size_t k = 0; k < br.row.size(); ++k)
                    add_scaled_functional(atdy, br.trip[k], dy[br.row[k]]);
                dS[j] = rd[j] - atdy;
                dX[j] = R[j] - W[j] * dS[j] * W[j];
                dX[j] = 0.5 * (dX[j] + dX[j].transpose()).eval();
            }
        };

        // predictor
        std::vector<MatrixXd> R(nb);
        for (int j = 0; j < nb; ++j) R[j] = -X[j];
        compute_direction(R);
        double ap = 1.0, ad = 1.0;
        for (int j = 0; j < nb; ++j) {
            ap = std::min(ap, max_step(lltX[j], dX[j]));
            ad = std::min(ad, max_step(lltS[j], dS[j]));
        }
        double mu_aff = 0.0;
        for (int j = 0; j < nb; ++j)
            mu_aff += (X[j] + ap * dX[j]).cwiseProduct(S[j] + ad * dS[j]).sum();
        mu_aff = std::max(0.0, mu_aff / nu);
        double sigma = std::pow(mu_aff / mu, 3);
        sigma = std::min(0.9999, std::max(1e-8, sigma));

        // corrector (centering) pass, reusing the factorization
        for (int j = 0; j < nb; ++j) R[j] = sigma * mu * Sinv[j] - X[j];
        compute_direction(R);
        ap = ad = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nb; ++j) {
            ap = std::min(ap, max_step(lltX[j], dX[j]));
            ad = std::min(ad, max_step(lltS[j], dS[j]));
        }
        const double gamma = 0.98;
        ap = std::min(1.0, gamma * ap);
        ad = std::min(1.0, gamma * ad);
        if (ap < 1e-9 && ad < 1e-9) {
            if (++stall >= 3) {
                res.status = SolveStatus::numerical_trouble;
                return res;
            }
        } else {
            stall = 0;
        }
        for (int j = 0; j < nb; ++j) {
            X[j] += ap * dX[j];
            S[j] += ad * dS[j];
        }
        y += ad * dy;
    }

    if (best_x.size() == f.ncoord &&
        accepts(best_pres, best_dres, best_gap, best_p, best_d)) {
        res.primal_max = best_p;
        res.dual_max = best_d;
        res.x = best_x;
        res.status = SolveStatus::optimal;
        return res;
    }
    res.status = SolveStatus::numerical_trouble;
    return res;
}

}  // namespace locc::detail
