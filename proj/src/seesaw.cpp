#include "locc/seesaw.hpp"

#include <cmath>
#include <iostream>

namespace locc {

// ---- rng ----------------------------------------------------------------------

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Rng Rng::split(std::uint64_t stream) const {
    Rng child(state_ ^ (0x632be59bd9b4e019ull * (stream + 1)));
    child.next_u64();
    return child;
}

// ---- random POVM ----------------------------------------------------------------

Povm random_povm(int d, int outcomes, Rng& rng) {
    if (outcomes < 1) throw std::invalid_argument("random_povm: outcomes >= 1");
    const int per = outcomes >= d ? 1 : (d + outcomes - 1) / outcomes;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<MatrixXcd> x(outcomes);
        MatrixXcd g = MatrixXcd::Zero(d, d);
        for (int a = 0; a < outcomes; ++a) {
            x[a] = MatrixXcd::Zero(d, d);
            for (int r = 0; r < per; ++r) {
                VectorXcd v(d);
                for (int i = 0; i < d; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
                x[a] += v * v.adjoint();
            }
            g += x[a];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
        if (es.eigenvalues().minCoeff() < 1e-10 * es.eigenvalues().maxCoeff()) continue;
        MatrixXcd ginv = es.operatorInverseSqrt();
        Povm out(outcomes);
        for (int a = 0; a < outcomes; ++a) {
            MatrixXcd e = ginv * x[a] * ginv;
            out[a] = 0.5 * (e + e.adjoint());
        }
        return out;
    }
    throw std::runtime_error("random_povm: Gram matrix repeatedly singular");
}

// ---- strategy evaluation ---------------------------------------------------------

namespace {

MatrixXcd cond_on_alice(const StateEnsemble& e, const MatrixXcd& effect, int lambda) {
    // p * Tr_A[(E (x) 1) rho]
    const MatrixXcd big = kron(effect, MatrixXcd::Identity(e.d_B, e.d_B));
    const MatrixXcd prod = big * e.items[lambda].state.matrix();
    return e.items[lambda].prior * partial_trace_matrix(prod, {e.d_A, e.d_B}, {0});
}

MatrixXcd cond_on_bob(const StateEnsemble& e, const MatrixXcd& effect, int lambda) {
    const MatrixXcd big = kron(MatrixXcd::Identity(e.d_A, e.d_A), effect);
    const MatrixXcd prod = big * e.items[lambda].state.matrix();
    return e.items[lambda].prior * partial_trace_matrix(prod, {e.d_A, e.d_B}, {1});
}

// maximize sum_a tr(K_a X_a) over POVMs {X_a}; tiny interior-point solves
std::pair<Povm, double> povm_sdp(const std::vector<MatrixXcd>& rewards, double eps) {
    const int d = static_cast<int>(rewards.front().rows());
    ConicProgram prog;
    std::vector<int> handles;
    for (size_t a = 0; a < rewards.size(); ++a)
        handles.push_back(prog.add_psd_block("E_" + std::to_string(a + 1), d));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            std::vector<Coeff> re, im;
            for (int h : handles) {
                re.push_back({EntryRef{h, i, j, false}, 1.0});
                if (i != j) im.push_back({EntryRef{h, i, j, true}, 1.0});
            }
            prog.add_equality(re, i == j ? 1.0 : 0.0);
            if (i != j) prog.add_equality(im, 0.0);
        }
    for (size_t a = 0; a < rewards.size(); ++a)
        prog.add_objective_trace(handles[a], 0.5 * (rewards[a] + rewards[a].adjoint()));
    SolveOptions opt;
    opt.eps = eps;
    opt.method = SolveOptions::Method::interior_point;
    SolveReport rep = solve(prog, opt);
    if (rep.status != SolveStatus::optimal)
        throw std::runtime_error("povm update solve failed: " + to_string(rep.status));
    Povm out;
    MatrixXcd sum = MatrixXcd::Zero(d, d);
    for (int h : handles) {
        out.push_back(rep.block_values.at(prog.blocks()[h].label).matrix());
        sum += out.back();
    }
    // congruence by sum^{-1/2} restores exact completeness and preserves
    // positive semidefiniteness of every effect
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sum);
    const MatrixXcd ginv = es.operatorInverseSqrt();
    for (auto& eff : out) {
        eff = (ginv * eff * ginv).eval();
        eff = 0.5 * (eff + eff.adjoint()).eval();
    }
    return {out, rep.primal_value};
}

}  // namespace

double strategy_value(const StateEnsemble& e, const OneRoundStrategy& s) {
    // strategies with the reversed direction are expressed on the swapped
    // ensemble (the first measuring party always owns the left factor)
    const StateEnsemble frame = (s.direction == Direction::BtoA) ? swap_parties(e) : e;
    const int n = frame.size();
    double value = 0.0;
    for (int l = 0; l < n; ++l) {
        MatrixXcd ml = MatrixXcd::Zero(frame.d_A * frame.d_B, frame.d_A * frame.d_B);
        for (size_t a = 0; a < s.alice.size(); ++a) ml += kron(s.alice[a], s.bob[a][l]);
        value += frame.items[l].prior * (ml * frame.items[l].state.matrix()).trace().real();
    }
    return value;
}

double strategy_value(const StateEnsemble& e, const NonAdaptiveStrategy& s) {
    const int n = e.size();
    double value = 0.0;
    for (int l = 0; l < n; ++l) {
        MatrixXcd ml = MatrixXcd::Zero(e.d_A * e.d_B, e.d_A * e.d_B);
        for (size_t a = 0; a < s.alice.size(); ++a)
            for (size_t b = 0; b < s.bob.size(); ++b)
                if (s.post[a][b][l] != 0.0) ml += s.post[a][b][l] * kron(s.alice[a], s.bob[b]);
        value += e.items[l].prior * (ml * e.items[l].state.matrix()).trace().real();
    }
    return value;
}

std::pair<std::vector<Povm>, double> optimal_bob_given_alice(const StateEnsemble& e,
                                                             const Povm& alice, double eps) {
    std::vector<Povm> bob;
    double total = 0.0;
    for (size_t a = 0; a < alice.size(); ++a) {
        std::vector<MatrixXcd> rewards;
        for (int l = 0; l < e.size(); ++l) rewards.push_back(cond_on_alice(e, alice[a], l));
        try {
            auto [povm, value] = povm_sdp(rewards, eps);
            bob.push_back(std::move(povm));
            total += value;
        } catch (const std::runtime_error& err) {
            throw std::runtime_error("bob update failed for message a=" +
                                     std::to_string(a + 1) + ": " + err.what());
        }
    }
    return {bob, total};
}

std::pair<Povm, double> optimal_alice_given_bob(const StateEnsemble& e,
                                                const std::vector<Povm>& bob, double eps) {
    std::vector<MatrixXcd> rewards;
    for (size_t a = 0; a < bob.size(); ++a) {
        MatrixXcd k = MatrixXcd::Zero(e.d_A, e.d_A);
        for (int l = 0; l < e.size(); ++l) k += cond_on_bob(e, bob[a][l], l);
        rewards.push_back(k);
    }
    return povm_sdp(rewards, eps);
}

// ---- deterministic starting points ------------------------------------------------

namespace {

Povm zero_padded(Povm base, int outcomes, int d) {
    while (static_cast<int>(base.size()) < outcomes)
        base.push_back(MatrixXcd::Zero(d, d));
    return base;
}

// projectors onto m consecutive groups of basis vectors
Povm basis_partition(int d, int m) {
    Povm out;
    const int outcomes = std::min(d, m);
    for (int g = 0; g < outcomes; ++g) {
        MatrixXcd e = MatrixXcd::Zero(d, d);
        for (int i = g * d / outcomes; i < (g + 1) * d / outcomes; ++i) e(i, i) = 1.0;
        out.push_back(e);
    }
    return zero_padded(std::move(out), m, d);
}

Povm projective_from_bloch(double nx, double ny, double nz, int m) {
    MatrixXcd obs(2, 2);
    obs << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(obs);
    Povm out;
    for (int i = 0; i < 2; ++i) {
        VectorXcd v = es.eigenvectors().col(i);
        out.push_back(v * v.adjoint());
    }
    return zero_padded(std::move(out), m, 2);
}

std::vector<Povm> alice_seed_povms(const StateEnsemble& e, int m) {
    std::vector<Povm> seeds;
    const int d = e.d_A;
    seeds.push_back(zero_padded({MatrixXcd::Identity(d, d)}, m, d));  // no-communication
    seeds.push_back(basis_partition(d, m));
    if (d == 2 && m >= 2) {
        const double isq = 1.0 / std::sqrt(2.0);
        seeds.push_back(projective_from_bloch(isq, isq, 0.0, m));
        for (int g = 0; g <= 8; ++g) {
            const double tau = g * (M_PI / 2) / 8;
            seeds.push_back(projective_from_bloch(std::sin(tau), 0.0, std::cos(tau), m));
        }
        seeds.push_back(projective_from_bloch(0.0, 1.0, 0.0, m));
    }
    return seeds;
}

}  // namespace

SeesawOneRoundResult seesaw_oneround(const StateEnsemble& e, int m, const SeesawOptions& o) {
    if (m < 1) throw std::invalid_argument("seesaw_oneround: m >= 1");
    e.validate();
    Rng base(o.seed);

    std::vector<Povm> starts;
    if (o.inject_seeds) starts = alice_seed_povms(e, m);
    const int total = o.restarts + static_cast<int>(starts.size());

    SeesawOneRoundResult result;
    result.bound.value = -1.0;
    for (int r = 0; r < total; ++r) {
        Povm alice;
        try {
            if (r < o.restarts) {
                Rng rng = base.split(r);
                alice = random_povm(e.d_A, m, rng);
            } else {
                alice = starts[r - o.restarts];
            }
            std::vector<Povm> bob;
            double value = -1.0;
            for (int it = 0; it < o.max_iters; ++it) {
                auto [bmap, v1] = optimal_bob_given_alice(e, alice, o.inner_eps);
                bob = std::move(bmap);
                auto [anew, v2] = optimal_alice_given_bob(e, bob, o.inner_eps);
                alice = std::move(anew);
                if (value >= 0 && v2 - value < o.conv_tol) {
                    value = std::max(value, v2);
                    break;
                }
                value = v2;
            }
            OneRoundStrategy s{alice, bob, Direction::AtoB};
            const double exact = strategy_value(e, s);
            if (exact > result.bound.value) {
                result.bound.value = exact;
                result.strategy = std::move(s);
            }
            if (o.verbose) std::cerr << "seesaw-1r restart " << r << ": " << exact << "\n";
        } catch (const std::exception& err) {
            ++result.failed_restarts;
            if (o.verbose) std::cerr << "seesaw-1r restart " << r << " failed: " << err.what() << "\n";
        }
    }
    if (result.bound.value < 0) throw std::runtime_error("seesaw_oneround: all restarts failed");
    result.bound.kind = BoundKind::lower;
    result.bound.method = BoundMethod::seesaw_oneround;
    result.bound.params = HierarchyParams{m, 1, Direction::AtoB};
    result.bound.gap = o.inner_eps;
    return result;
}

SeesawNonAdaptiveResult seesaw_nonadaptive(const StateEnsemble& e, int m, int m_B,
                                           const SeesawOptions& o) {
    if (m < 1) throw std::invalid_argument("seesaw_nonadaptive: m >= 1");
    e.validate();
    if (m_B <= 0) m_B = e.d_B * e.d_B;
    const int n = e.size();
    Rng base(o.seed ^ 0x9e4a57c31d2fb6a1ull);

    // deterministic argmax post-processing for fixed POVMs; ties go to the
    // lowest ensemble index
    auto best_post = [&](const Povm& alice, const Povm& bob) {
        std::vector<std::vector<VectorXd>> post(alice.size(),
                                                std::vector<VectorXd>(bob.size()));
        for (size_t a = 0; a < alice.size(); ++a)
            for (size_t b = 0; b < bob.size(); ++b) {
                int arg = 0;
                double best = -1.0;
                for (int l = 0; l < n; ++l) {
                    const double t = e.items[l].prior *
                                     (kron(alice[a], bob[b]) * e.items[l].state.matrix())
                                         .trace()
                                         .real();
                    if (t > best) {
                        best = t;
                        arg = l;
                    }
                }
                VectorXd v = VectorXd::Zero(n);
                v[arg] = 1.0;
                post[a][b] = v;
            }
        return post;
    };

    std::vector<std::pair<Povm, Povm>> starts;
    if (o.inject_seeds) {
        starts.push_back({basis_partition(e.d_A, m), basis_partition(e.d_B, m_B)});
        starts.push_back({zero_padded({MatrixXcd::Identity(e.d_A, e.d_A)}, m, e.d_A),
                          basis_partition(e.d_B, m_B)});
    }
    const int total = o.restarts + static_cast<int>(starts.size());

    SeesawNonAdaptiveResult result;
    result.bound.value = -1.0;
    for (int r = 0; r < total; ++r) {
        try {
            Povm alice, bob;
            if (r < o.restarts) {
                Rng rng = base.split(r);
                alice = random_povm(e.d_A, m, rng);
                bob = random_povm(e.d_B, m_B, rng);
            } else {
                alice = starts[r - o.restarts].first;
                bob = starts[r - o.restarts].second;
            }
            auto post = best_post(alice, bob);
            double value = -1.0;
            for (int it = 0; it < o.max_iters; ++it) {
                post = best_post(alice, bob);
                // alice update with bob and post fixed
                {
                    std::vector<MatrixXcd> rewards;
                    for (int a = 0; a < m; ++a) {
                        MatrixXcd k = MatrixXcd::Zero(e.d_A, e.d_A);
                        for (int b = 0; b < m_B; ++b)
                            for (int l = 0; l < n; ++l)
                                if (post[a][b][l] != 0.0)
                                    k += post[a][b][l] * cond_on_bob(e, bob[b], l);
                        rewards.push_back(k);
                    }
                    alice = povm_sdp(rewards, o.inner_eps).first;
                }
                // bob update with alice and post fixed
                double v2;
                {
                    std::vector<MatrixXcd> rewards;
                    for (int b = 0; b < m_B; ++b) {
                        MatrixXcd k = MatrixXcd::Zero(e.d_B, e.d_B);
                        for (int a = 0; a < m; ++a)
                            for (int l = 0; l < n; ++l)
                                if (post[a][b][l] != 0.0)
                                    k += post[a][b][l] * cond_on_alice(e, alice[a], l);
                        rewards.push_back(k);
                    }
                    auto res = povm_sdp(rewards, o.inner_eps);
                    bob = std::move(res.first);
                    v2 = res.second;
                }
                if (value >= 0 && v2 - value < o.conv_tol) {
                    value = std::max(value, v2);
                    break;
                }
                value = v2;
            }
            post = best_post(alice, bob);
            NonAdaptiveStrategy s{alice, bob, post};
            const double exact = strategy_value(e, s);
            if (exact > result.bound.value) {
                result.bound.value = exact;
                result.strategy = std::move(s);
            }
            if (o.verbose) std::cerr << "seesaw-na restart " << r << ": " << exact << "\n";
        } catch (const std::exception& err) {
            ++result.failed_restarts;
            if (o.verbose) std::cerr << "seesaw-na restart " << r << " failed: " << err.what() << "\n";
        }
    }
    if (result.bound.value < 0) throw std::runtime_error("seesaw_nonadaptive: all restarts failed");
    result.bound.kind = BoundKind::lower;
    result.bound.method = BoundMethod::seesaw_nonadaptive;
    result.bound.params = HierarchyParams{m, 1, Direction::AtoB};
    result.bound.gap = o.inner_eps;
    return result;
}

}  // namespace locc
