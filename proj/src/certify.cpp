#include "locc/certify.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace locc {

using json = nlohmann::json;

namespace {

double opnorm(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double neg_eig(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return std::max(0.0, -es.eigenvalues().minCoeff());
}

std::vector<std::vector<int>> enumerate_tuples(int m, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> t(k, 0);
    while (true) {
        out.push_back(t);
        int pos = k - 1;
        while (pos >= 0 && ++t[pos] == m) t[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

// sigma with sigma(sorted) = target; index map u on d^k with
// R_target[u(I), u(J)] = R_sorted[I, J] is built from sigma^{-1}
std::vector<int> expansion_map(const std::vector<int>& sorted, const std::vector<int>& target,
                               int d) {
    const int k = static_cast<int>(sorted.size());
    std::vector<char> used(k, 0);
    std::vector<int> sinv(k);
    for (int t = 0; t < k; ++t) {
        int pick = -1;
        for (int i = 0; i < k; ++i)
            if (!used[i] && sorted[i] == target[t]) {
                pick = i;
                break;
            }
        if (pick < 0) throw std::invalid_argument("certificate: tuple is not a rearrangement");
        used[pick] = 1;
        sinv[t] = pick + 1;
    }
    const Permutation sigma = Permutation(sinv).inverse();
    return permutation_index_map(k, d, sigma.inverse());
}

MatrixXcd remap(const MatrixXcd& src, const std::vector<int>& amap, int dB) {
    const int dim = static_cast<int>(src.rows());
    MatrixXcd out(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const int mi = amap[i / dB] * dB + i % dB;
        for (int j = 0; j < dim; ++j) {
            const int mj = amap[j / dB] * dB + j % dB;
            out(i, j) = src(mi, mj);
        }
    }
    return out;
}

struct Expanded {
    // full index set, keys as in the certificate
    std::map<std::vector<int>, MatrixXcd> blocks;
};

template <typename Cert>
Expanded expand_certificate(const Cert& c, int second_len) {
    int dAk = 1;
    for (int t = 0; t < c.k; ++t) dAk *= c.d_A;
    const int dim = dAk * c.d_B;
    Expanded out;
    const auto a_tuples = enumerate_tuples(c.m, c.k);
    const auto seconds =
        second_len == 2 ? std::vector<std::vector<int>>{} : enumerate_tuples(c.n, c.m);
    // iterate over all (a, second) keys
    std::vector<std::vector<int>> second_keys;
    if (second_len == 2) {
        for (int l = 0; l < c.n; ++l)
            for (int b = 0; b < c.m; ++b) second_keys.push_back({l, b});
    } else {
        for (const auto& bv : seconds) second_keys.push_back(bv);
    }
    for (const auto& a : a_tuples) {
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& sk : second_keys) {
            std::vector<int> key = a;
            key.insert(key.end(), sk.begin(), sk.end());
            auto it = c.entries.find(key);
            if (it != c.entries.end()) {
                if (it->second.dim() != dim)
                    throw std::invalid_argument("certificate: entry has wrong dimension");
                out.blocks[key] = it->second.matrix();
                continue;
            }
            std::vector<int> rkey = sorted;
            rkey.insert(rkey.end(), sk.begin(), sk.end());
            auto rit = c.entries.find(rkey);
            if (rit == c.entries.end())
                throw std::invalid_argument(
                    "certificate: incomplete index set (missing representative)");
            if (rit->second.dim() != dim)
                throw std::invalid_argument("certificate: entry has wrong dimension");
            const auto amap = expansion_map(sorted, a, c.d_A);
            out.blocks[key] = remap(rit->second.matrix(), amap, c.d_B);
        }
    }
    return out;
}

std::vector<int> first_l(int l) {
    std::vector<int> out;
    for (int t = 1; t <= l; ++t) out.push_back(t);
    return out;
}

}  // namespace

double ResidualReport::worst() const {
    double w = std::max({psd_min_eig, marginal_A, marginal_B, symmetry, normalization});
    for (double v : ppt_min_eig) w = std::max(w, v);
    if (reconstruction) w = std::max(w, *reconstruction);
    return w;
}

std::string ResidualReport::to_json() const {
    json j;
    j["psd_min_eig"] = psd_min_eig;
    j["ppt_min_eig"] = ppt_min_eig;
    j["marginal_A"] = marginal_A;
    j["marginal_B"] = marginal_B;
    j["symmetry"] = symmetry;
    j["normalization"] = normalization;
    if (reconstruction)
        j["reconstruction"] = *reconstruction;
    else
        j["reconstruction"] = nullptr;
    j["tol"] = tol;
    j["verdict"] = pass ? "pass" : "fail";
    return j.dump(2);
}

namespace {

template <typename Cert>
ResidualReport check_common(const Cert& c, bool nonadaptive,
                            const std::optional<std::vector<HermitianOp>>& claimed, double tol) {
    if (c.m < 1 || c.k < 1 || c.n < 1 || c.d_A < 1 || c.d_B < 1)
        throw std::invalid_argument("certificate: invalid header fields");
    ResidualReport rep;
    rep.tol = tol;
    const int m = c.m, k = c.k, n = c.n, dA = c.d_A, dB = c.d_B;
    int dAk = 1;
    for (int t = 0; t < k; ++t) dAk *= dA;
    const int dim = dAk * dB;

    Expanded ex = expand_certificate(c, nonadaptive ? 0 : 2);

    std::vector<int> shape(k, dA);
    shape.push_back(dB);

    // cone memberships
    rep.ppt_min_eig.assign(k, 0.0);
    for (const auto& [key, blk] : ex.blocks) {
        rep.psd_min_eig = std::max(rep.psd_min_eig, neg_eig(blk));
        for (int l = 1; l <= k; ++l) {
            std::vector<int> tr0 = first_l(l);
            for (auto& t : tr0) --t;
            rep.ppt_min_eig[l - 1] =
                std::max(rep.ppt_min_eig[l - 1], neg_eig(partial_transpose_matrix(blk, shape, tr0)));
        }
    }

    const auto a_tuples = enumerate_tuples(m, k);
    const auto second_keys = [&] {
        std::vector<std::vector<int>> out;
        if (!nonadaptive) {
            for (int l = 0; l < n; ++l)
                for (int b = 0; b < m; ++b) out.push_back({l, b});
        } else {
            for (const auto& bv : enumerate_tuples(n, m)) out.push_back(bv);
        }
        return out;
    }();
    auto block_of = [&](const std::vector<int>& a, const std::vector<int>& sk) -> const MatrixXcd& {
        std::vector<int> key = a;
        key.insert(key.end(), sk.begin(), sk.end());
        return ex.blocks.at(key);
    };

    // first-party marginal
    {
        const auto tails = enumerate_tuples(m, k - 1);
        const int drest = (dAk / dA) * dB;
        for (const auto& tail : tails)
            for (const auto& sk : second_keys) {
                MatrixXcd lhs = MatrixXcd::Zero(dim, dim);
                for (int a1 = 0; a1 < m; ++a1) {
                    std::vector<int> a{a1};
                    a.insert(a.end(), tail.begin(), tail.end());
                    lhs += block_of(a, sk);
                }
                MatrixXcd traced = partial_trace_matrix(lhs, shape, {0});
                MatrixXcd rhs = kron(MatrixXcd::Identity(dA, dA), traced) / dA;
                (void)drest;
                rep.marginal_A = std::max(rep.marginal_A, opnorm(lhs - rhs));
            }
    }

    // second-party marginal
    if (!nonadaptive) {
        for (const auto& a : a_tuples) {
            MatrixXcd tracesum = MatrixXcd::Zero(dAk, dAk);
            for (int l = 0; l < n; ++l)
                for (int b = 0; b < m; ++b)
                    tracesum += partial_trace_matrix(block_of(a, {l, b}), shape, {k});
            const MatrixXcd rhs = kron(tracesum, MatrixXcd::Identity(dB, dB)) / (m * dB);
            for (int b = 0; b < m; ++b) {
                MatrixXcd lhs = MatrixXcd::Zero(dim, dim);
                for (int l = 0; l < n; ++l) lhs += block_of(a, {l, b});
                rep.marginal_B = std::max(rep.marginal_B, opnorm(lhs - rhs));
            }
        }
    } else {
        const auto bvecs = enumerate_tuples(n, m);
        for (const auto& a : a_tuples) {
            MatrixXcd lhs = MatrixXcd::Zero(dim, dim);
            MatrixXcd tracesum = MatrixXcd::Zero(dAk, dAk);
            for (const auto& bv : bvecs) {
                lhs += block_of(a, bv);
                tracesum += partial_trace_matrix(block_of(a, bv), shape, {k});
            }
            const MatrixXcd rhs = kron(tracesum, MatrixXcd::Identity(dB, dB)) / dB;
            rep.marginal_B = std::max(rep.marginal_B, opnorm(lhs - rhs));
        }
    }

    // copy-permutation symmetry
    if (k > 1) {
        for (const auto& sigma : all_permutations(k)) {
            const auto umap = permutation_index_map(k, dA, sigma);
            const Permutation sinv = sigma.inverse();
            for (const auto& a : a_tuples) {
                std::vector<int> sa(k);
                for (int t = 0; t < k; ++t) sa[t] = a[sinv(t + 1) - 1];
                for (const auto& sk : second_keys) {
                    const MatrixXcd& src = block_of(a, sk);
                    const MatrixXcd& dst = block_of(sa, sk);
                    // dst[u(I), u(J)] should equal src[I, J]
                    MatrixXcd lifted(dim, dim);
                    for (int i = 0; i < dim; ++i) {
                        const int ui = umap[i / dB] * dB + i % dB;
                        for (int j = 0; j < dim; ++j) {
                            const int uj = umap[j / dB] * dB + j % dB;
                            lifted(ui, uj) = src(i, j);
                        }
                    }
                    rep.symmetry = std::max(rep.symmetry, opnorm(lifted - dst));
                }
            }
        }
    }

    // normalization
    if (!nonadaptive) {
        for (int b = 0; b < m; ++b) {
            double tr = 0.0;
            for (const auto& a : a_tuples)
                for (int l = 0; l < n; ++l) tr += block_of(a, {l, b}).trace().real();
            rep.normalization =
                std::max(rep.normalization, std::abs(tr - static_cast<double>(dAk) * dB));
        }
    } else {
        double tr = 0.0;
        for (const auto& a : a_tuples)
            for (const auto& bv : enumerate_tuples(n, m)) tr += block_of(a, bv).trace().real();
        rep.normalization = std::abs(tr - static_cast<double>(dAk) * dB);
    }

    // reconstruction of the measurement
    if (claimed) {
        if (static_cast<int>(claimed->size()) != n)
            throw std::invalid_argument("certificate: claimed measurement has wrong length");
        double worst = 0.0;
        std::vector<int> tr0;
        for (int t = 0; t < k - 1; ++t) tr0.push_back(t);
        const int dAk1 = dAk / dA;
        for (int l = 0; l < n; ++l) {
            MatrixXcd acc = MatrixXcd::Zero(dA * dB, dA * dB);
            for (const auto& a : a_tuples) {
                if (!nonadaptive) {
                    const MatrixXcd& blk = block_of(a, {l, a[k - 1]});
                    acc += tr0.empty() ? blk : partial_trace_matrix(blk, shape, tr0);
                } else {
                    for (const auto& bv : enumerate_tuples(n, m))
                        if (bv[a[k - 1]] == l) {
                            const MatrixXcd& blk = block_of(a, bv);
                            acc += tr0.empty() ? blk : partial_trace_matrix(blk, shape, tr0);
                        }
                }
            }
            acc /= dAk1;
            worst = std::max(worst, opnorm(acc - (*claimed)[l].matrix()));
        }
        rep.reconstruction = worst;
    }

    rep.pass = rep.worst() <= tol;
    return rep;
}

}  // namespace

ResidualReport check_1r_certificate(const CertificateArray1R& c,
                                    const std::optional<std::vector<HermitianOp>>& claimed,
                                    double tol) {
    return check_common(c, false, claimed, tol);
}

ResidualReport check_na_certificate(const CertificateArrayNA& c,
                                    const std::optional<std::vector<HermitianOp>>& claimed,
                                    double tol) {
    return check_common(c, true, claimed, tol);
}

// ---- closed forms and explicit strategies -------------------------------------

double analytic_p_succ_AtoB(double tau) { return (std::sqrt(2.0) * std::cos(tau) + 2.0) / 4.0; }
double analytic_p_succ_BtoA(double tau) { return (1.0 + std::cos(tau)) / 2.0; }

namespace {

Povm observable_projectors(double nx, double ny, double nz) {
    const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (norm < 1e-14) throw std::invalid_argument("observable_projectors: zero axis");
    nx /= norm;
    ny /= norm;
    nz /= norm;
    MatrixXcd obs(2, 2);
    obs << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(obs);
    // order: [0] -> +1 eigenvalue, [1] -> -1 eigenvalue
    Povm out(2);
    const int plus = es.eigenvalues()(0) > es.eigenvalues()(1) ? 0 : 1;
    VectorXcd vp = es.eigenvectors().col(plus);
    VectorXcd vm = es.eigenvectors().col(1 - plus);
    out[0] = vp * vp.adjoint();
    out[1] = vm * vm.adjoint();
    return out;
}

}  // namespace

NonAdaptiveStrategy analytic_strategy_AtoB(double tau) {
    const StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);
    NonAdaptiveStrategy s;
    const double isq = 1.0 / std::sqrt(2.0);
    s.alice = observable_projectors(isq, isq, 0.0);
    // Bob's fixed observable: the axis that separates each state pair exactly,
    // proportional to ((2 cos t + sqrt2) sin t, sqrt2 sin t, (2 cos t + sqrt2) cos t)
    const double st = std::sin(tau), ct = std::cos(tau);
    const double w = 2.0 * ct + std::sqrt(2.0);
    s.bob = observable_projectors(w * st, std::sqrt(2.0) * st, w * ct);
    // optimal deterministic guess for these fixed measurements
    s.post.assign(2, std::vector<VectorXd>(2));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            int arg = 0;
            double best = -1.0;
            for (int l = 0; l < 4; ++l) {
                const double t = bell.items[l].prior *
                                 (kron(s.alice[a], s.bob[b]) * bell.items[l].state.matrix())
                                     .trace()
                                     .real();
                if (t > best) {
                    best = t;
                    arg = l;
                }
            }
            VectorXd v = VectorXd::Zero(4);
            v[arg] = 1.0;
            s.post[a][b] = v;
        }
    return s;
}

OneRoundStrategy analytic_strategy_BtoA(double tau) {
    // expressed on the swapped ensemble: the first measuring party (original
    // Bob) occupies the first tensor factor
    const StateEnsemble swapped = swap_parties(bell_basis_family(M_PI / 4, tau, M_PI / 2));
    OneRoundStrategy s;
    s.direction = Direction::BtoA;
    s.alice = observable_projectors(std::sin(tau), 0.0, std::cos(tau));
    // adaptive response: sigma_y after outcome +, sigma_x after outcome -
    const Povm resp_plus = observable_projectors(0.0, 1.0, 0.0);
    const Povm resp_minus = observable_projectors(1.0, 0.0, 0.0);
    for (int a = 0; a < 2; ++a) {
        const Povm& resp = (a == 0) ? resp_plus : resp_minus;
        // assign each response projector to its best ensemble index
        std::vector<MatrixXcd> cond(4);
        for (int l = 0; l < 4; ++l) {
            const MatrixXcd big = kron(s.alice[a], MatrixXcd::Identity(2, 2));
            cond[l] = swapped.items[l].prior *
                      partial_trace_matrix(big * swapped.items[l].state.matrix(), {2, 2}, {0});
        }
        Povm guess(4, MatrixXcd::Zero(2, 2));
        for (const auto& proj : resp) {
            int arg = 0;
            double best = -1.0;
            for (int l = 0; l < 4; ++l) {
                const double t = (proj * cond[l]).trace().real();
                if (t > best) {
                    best = t;
                    arg = l;
                }
            }
            guess[arg] += proj;
        }
        s.bob.push_back(std::move(guess));
    }
    return s;
}

// ---- forward constructions ------------------------------------------------------

CertificateArray1R certificate_from_strategy(const StateEnsemble& e, const OneRoundStrategy& s,
                                             int k) {
    const StateEnsemble frame = (s.direction == Direction::BtoA) ? swap_parties(e) : e;
    CertificateArray1R c;
    c.m = static_cast<int>(s.alice.size());
    c.k = k;
    c.n = frame.size();
    c.d_A = frame.d_A;
    c.d_B = frame.d_B;
    const auto a_tuples = enumerate_tuples(c.m, k);
    for (const auto& a : a_tuples) {
        MatrixXcd atens = MatrixXcd::Identity(1, 1);
        for (int t = 0; t < k; ++t) atens = kron(atens, s.alice[a[t]]).eval();
        for (int l = 0; l < c.n; ++l)
            for (int b = 0; b < c.m; ++b) {
                std::vector<int> key = a;
                key.push_back(l);
                key.push_back(b);
                std::vector<int> dims(k, c.d_A);
                dims.push_back(c.d_B);
                c.entries.emplace(std::move(key),
                                  HermitianOp(SystemShape(dims), kron(atens, s.bob[b][l])));
            }
    }
    return c;
}

CertificateArrayNA certificate_from_strategy(const StateEnsemble& e,
                                             const NonAdaptiveStrategy& s, int k) {
    CertificateArrayNA c;
    c.m = static_cast<int>(s.alice.size());
    c.k = k;
    c.n = e.size();
    c.d_A = e.d_A;
    c.d_B = e.d_B;
    const int mB = static_cast<int>(s.bob.size());
    // parent measurement: S^{bvec} = sum_b B_b prod_a post[a][b][bvec_a]
    const auto bvecs = enumerate_tuples(c.n, c.m);
    std::vector<MatrixXcd> parent;
    for (const auto& bv : bvecs) {
        MatrixXcd acc = MatrixXcd::Zero(c.d_B, c.d_B);
        for (int b = 0; b < mB; ++b) {
            double w = 1.0;
            for (int a = 0; a < c.m; ++a) w *= s.post[a][b][bv[a]];
            if (w != 0.0) acc += w * s.bob[b];
        }
        parent.push_back(acc);
    }
    const auto a_tuples = enumerate_tuples(c.m, k);
    for (const auto& a : a_tuples) {
        MatrixXcd atens = MatrixXcd::Identity(1, 1);
        for (int t = 0; t < k; ++t) atens = kron(atens, s.alice[a[t]]).eval();
        for (size_t bi = 0; bi < bvecs.size(); ++bi) {
            std::vector<int> key = a;
            key.insert(key.end(), bvecs[bi].begin(), bvecs[bi].end());
            std::vector<int> dims(k, c.d_A);
            dims.push_back(c.d_B);
            c.entries.emplace(std::move(key),
                              HermitianOp(SystemShape(dims), kron(atens, parent[bi])));
        }
    }
    return c;
}

CertificateArray1R contract_to_oneround(const CertificateArrayNA& c) {
    CertificateArray1R out;
    out.m = c.m;
    out.k = c.k;
    out.n = c.n;
    out.d_A = c.d_A;
    out.d_B = c.d_B;
    int dAk = 1;
    for (int t = 0; t < c.k; ++t) dAk *= c.d_A;
    const int dim = dAk * c.d_B;
    Expanded ex = expand_certificate(c, 0);
    std::vector<int> dims(c.k, c.d_A);
    dims.push_back(c.d_B);
    const SystemShape sh(dims);
    for (const auto& a : enumerate_tuples(c.m, c.k))
        for (int l = 0; l < c.n; ++l)
            for (int b = 0; b < c.m; ++b) {
                MatrixXcd acc = MatrixXcd::Zero(dim, dim);
                for (const auto& bv : enumerate_tuples(c.n, c.m)) {
                    if (bv[b] != l) continue;
                    std::vector<int> key = a;
                    key.insert(key.end(), bv.begin(), bv.end());
                    acc += ex.blocks.at(key);
                }
                std::vector<int> key = a;
                key.push_back(l);
                key.push_back(b);
                out.entries.emplace(std::move(key), HermitianOp(sh, acc));
            }
    return out;
}

// ---- extraction from solved programs --------------------------------------------

CertificateArray1R certificate_from_solution_1r(const HierarchyBuild& build,
                                                const SolveReport& report) {
    if (build.nonadaptive)
        throw std::invalid_argument("certificate_from_solution_1r: build is non-adaptive");
    CertificateArray1R c;
    c.m = build.params.m;
    c.k = build.params.k;
    c.n = build.n;
    c.d_A = build.d_A;
    c.d_B = build.d_B;
    std::vector<int> dims(c.k, c.d_A);
    dims.push_back(c.d_B);
    const SystemShape sh(dims);
    std::vector<int> t(c.k, 0);
    // all non-decreasing tuples
    while (true) {
        for (int l = 0; l < c.n; ++l)
            for (int b = 0; b < c.m; ++b) {
                const auto& r = build.resolve_1r(t, l, b);
                std::vector<int> key = t;
                key.push_back(l);
                key.push_back(b);
                c.entries.emplace(std::move(key),
                                  HermitianOp(sh, build.virtual_block(report.block_values, r)));
            }
        int pos = c.k - 1;
        while (pos >= 0 && t[pos] == c.m - 1) --pos;
        if (pos < 0) break;
        const int v = t[pos] + 1;
        for (int q = pos; q < c.k; ++q) t[q] = v;
    }
    return c;
}

CertificateArrayNA certificate_from_solution_na(const HierarchyBuild& build,
                                                const SolveReport& report) {
    if (!build.nonadaptive)
        throw std::invalid_argument("certificate_from_solution_na: build is one-round");
    CertificateArrayNA c;
    c.m = build.params.m;
    c.k = build.params.k;
    c.n = build.n;
    c.d_A = build.d_A;
    c.d_B = build.d_B;
    std::vector<int> dims(c.k, c.d_A);
    dims.push_back(c.d_B);
    const SystemShape sh(dims);
    std::vector<int> t(c.k, 0);
    while (true) {
        for (const auto& bv : enumerate_tuples(c.n, c.m)) {
            const auto& r = build.resolve_na(t, bv);
            std::vector<int> key = t;
            key.insert(key.end(), bv.begin(), bv.end());
            c.entries.emplace(std::move(key),
                              HermitianOp(sh, build.virtual_block(report.block_values, r)));
        }
        int pos = c.k - 1;
        while (pos >= 0 && t[pos] == c.m - 1) --pos;
        if (pos < 0) break;
        const int v = t[pos] + 1;
        for (int q = pos; q < c.k; ++q) t[q] = v;
    }
    return c;
}

// ---- JSON -----------------------------------------------------------------------

namespace {

json matrix_json(const MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXcd matrix_unjson(const json& j) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("certificate: op must be a matrix");
    const size_t n = j.size();
    MatrixXcd m(n, n);
    for (size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
            throw std::invalid_argument("certificate: op must be square");
        for (size_t k2 = 0; k2 < n; ++k2) {
            const auto& cell = j[i][k2];
            if (!cell.is_array() || cell.size() != 2)
                throw std::invalid_argument("certificate: op entries are [re, im] pairs");
            m(i, k2) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

template <typename Cert>
json cert_header(const Cert& c, const char* variant) {
    json j;
    j["variant"] = variant;
    j["m"] = c.m;
    j["k"] = c.k;
    j["n"] = c.n;
    j["d_A"] = c.d_A;
    j["d_B"] = c.d_B;
    j["entries"] = json::array();
    return j;
}

}  // namespace

std::string certificate_to_json(const CertificateArray1R& c) {
    json j = cert_header(c, "1r");
    for (const auto& [key, op] : c.entries) {
        json e;
        json a = json::array();
        for (int t = 0; t < c.k; ++t) a.push_back(key[t] + 1);
        e["a"] = a;
        e["lambda"] = key[c.k] + 1;
        e["b"] = key[c.k + 1] + 1;
        e["op"] = matrix_json(op.matrix());
        j["entries"].push_back(std::move(e));
    }
    return j.dump();
}

std::string certificate_to_json(const CertificateArrayNA& c) {
    json j = cert_header(c, "na");
    for (const auto& [key, op] : c.entries) {
        json e;
        json a = json::array(), bv = json::array();
        for (int t = 0; t < c.k; ++t) a.push_back(key[t] + 1);
        for (int t = 0; t < c.m; ++t) bv.push_back(key[c.k + t] + 1);
        e["a"] = a;
        e["b_vec"] = bv;
        e["op"] = matrix_json(op.matrix());
        j["entries"].push_back(std::move(e));
    }
    return j.dump();
}

namespace {

template <typename Cert>
void parse_header(const json& j, Cert& c, const char* variant) {
    if (!j.contains("variant") || j["variant"] != variant)
        throw std::invalid_argument("certificate: wrong or missing variant");
    for (const char* f : {"m", "k", "n", "d_A", "d_B", "entries"})
        if (!j.contains(f))
            throw std::invalid_argument(std::string("certificate: missing field ") + f);
    c.m = j["m"].get<int>();
    c.k = j["k"].get<int>();
    c.n = j["n"].get<int>();
    c.d_A = j["d_A"].get<int>();
    c.d_B = j["d_B"].get<int>();
    if (c.m < 1 || c.k < 1 || c.n < 1 || c.d_A < 1 || c.d_B < 1)
        throw std::invalid_argument("certificate: invalid dimensions");
}

json parse_json_or_throw(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument(std::string("certificate: malformed JSON: ") + err.what());
    }
}

}  // namespace

CertificateArray1R certificate_1r_from_json(const std::string& text) {
    json j = parse_json_or_throw(text);
    CertificateArray1R c;
    parse_header(j, c, "1r");
    std::vector<int> dims(c.k, c.d_A);
    dims.push_back(c.d_B);
    const SystemShape sh(dims);
    for (const auto& e : j["entries"]) {
        if (!e.contains("a") || !e.contains("lambda") || !e.contains("b") || !e.contains("op"))
            throw std::invalid_argument("certificate: entry missing a, lambda, b or op");
        if (!e["a"].is_array() || static_cast<int>(e["a"].size()) != c.k)
            throw std::invalid_argument("certificate: index tuple a has wrong length");
        std::vector<int> key;
        for (const auto& v : e["a"]) {
            const int a = v.get<int>() - 1;
            if (a < 0 || a >= c.m) throw std::invalid_argument("certificate: a out of range");
            key.push_back(a);
        }
        const int l = e["lambda"].get<int>() - 1, b = e["b"].get<int>() - 1;
        if (l < 0 || l >= c.n || b < 0 || b >= c.m)
            throw std::invalid_argument("certificate: lambda or b out of range");
        key.push_back(l);
        key.push_back(b);
        MatrixXcd m = matrix_unjson(e["op"]);
        if (m.rows() != sh.total())
            throw std::invalid_argument("certificate: op has wrong dimension");
        c.entries.emplace(std::move(key), HermitianOp(sh, std::move(m)));
    }
    return c;
}

CertificateArrayNA certificate_na_from_json(const std::string& text) {
    json j = parse_json_or_throw(text);
    CertificateArrayNA c;
    parse_header(j, c, "na");
    std::vector<int> dims(c.k, c.d_A);
    dims.push_back(c.d_B);
    const SystemShape sh(dims);
    for (const auto& e : j["entries"]) {
        if (!e.contains("a") || !e.contains("b_vec") || !e.contains("op"))
            throw std::invalid_argument("certificate: entry missing a, b_vec or op");
        if (!e["a"].is_array() || static_cast<int>(e["a"].size()) != c.k ||
            !e["b_vec"].is_array() || static_cast<int>(e["b_vec"].size()) != c.m)
            throw std::invalid_argument("certificate: index tuple has wrong length");
        std::vector<int> key;
        for (const auto& v : e["a"]) {
            const int a = v.get<int>() - 1;
            if (a < 0 || a >= c.m) throw std::invalid_argument("certificate: a out of range");
            key.push_back(a);
        }
        for (const auto& v : e["b_vec"]) {
            const int b = v.get<int>() - 1;
            if (b < 0 || b >= c.n) throw std::invalid_argument("certificate: b_vec out of range");
            key.push_back(b);
        }
        MatrixXcd m = matrix_unjson(e["op"]);
        if (m.rows() != sh.total())
            throw std::invalid_argument("certificate: op has wrong dimension");
        c.entries.emplace(std::move(key), HermitianOp(sh, std::move(m)));
    }
    return c;
}

void save_certificate(const std::string& jsonText, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("certificate: cannot write " + path);
    out << jsonText << "\n";
}

std::string load_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace locc
