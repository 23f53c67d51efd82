#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <locc/certify.hpp>
#include <locc/hierarchy.hpp>

using namespace locc;

namespace {

double solve_value(const ConicProgram& p, double eps = 1e-8) {
    SolveReport rep = solve(p, eps);
    REQUIRE(rep.status == SolveStatus::optimal);
    return rep.primal_value;
}

// square-root-measurement value, the independent oracle for symmetric pure
// ensembles
double srm_value(const StateEnsemble& e) {
    const int d = e.d_A * e.d_B;
    MatrixXcd avg = MatrixXcd::Zero(d, d);
    for (const auto& it : e.items) avg += it.prior * it.state.matrix();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(avg);
    VectorXd inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] > 1e-12 ? 1.0 / std::sqrt(inv[i]) : 0.0;
    MatrixXcd isqrt = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
    double value = 0.0;
    for (const auto& it : e.items) {
        MatrixXcd eff = isqrt * (it.prior * it.state.matrix()) * isqrt;
        value += it.prior * (eff * it.state.matrix()).trace().real();
    }
    return value;
}

StateEnsemble single_state_ensemble() {
    VectorXcd v(4);
    v << 1, 0, 0, 0;
    StateEnsemble e;
    e.d_A = 2;
    e.d_B = 2;
    e.items.push_back({1.0, HermitianOp::projector(SystemShape({2, 2}), v)});
    return e;
}

StateEnsemble orthogonal_product_pair() {
    VectorXcd v0(2), v1(2);
    v0 << 1, 0;
    v1 << 0, 1;
    StateEnsemble e;
    e.d_A = 2;
    e.d_B = 2;
    const SystemShape sh({2, 2});
    e.items.push_back({0.5, HermitianOp::projector(sh, kron(v0, v0))});
    e.items.push_back({0.5, HermitianOp::projector(sh, kron(v1, v1))});
    return e;
}

}  // namespace

TEST_CASE("orbit representatives") {
    auto reps22 = orbit_representatives(2, 2);
    REQUIRE(reps22.size() == 3);
    CHECK(reps22[0].first == std::vector<int>{1, 1});
    CHECK(reps22[0].second == 1);
    CHECK(reps22[1].first == std::vector<int>{1, 2});
    CHECK(reps22[1].second == 2);
    CHECK(reps22[2].first == std::vector<int>{2, 2});
    CHECK(reps22[2].second == 1);

    CHECK(orbit_representatives(4, 3).size() == 20);
    auto reps1 = orbit_representatives(1, 3);
    REQUIRE(reps1.size() == 1);
    CHECK(reps1[0].second == 1);

    // orbit sizes always sum to m^k
    for (int m = 1; m <= 4; ++m)
        for (int k = 1; k <= 4; ++k) {
            long long total = 0, expect = 1;
            for (const auto& [rep, size] : orbit_representatives(m, k)) total += size;
            for (int t = 0; t < k; ++t) expect *= m;
            CHECK(total == expect);
        }
}

TEST_CASE("saturation cutoff") {
    CHECK(saturation_cutoff(2) == 4);
    CHECK(saturation_cutoff(4) == 16);
    CHECK(saturation_cutoff(1) == 1);
}

TEST_CASE("global discrimination values") {
    CHECK(solve_value(build_global_sdp(single_state_ensemble())) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(solve_value(build_global_sdp(bell_basis_family(0.9, 0.4, 2.0))) ==
          doctest::Approx(1.0).epsilon(1e-6));
    // frozen regression constant for the double trine, cross-checked with the
    // square-root measurement
    const double frozen = (3.0 + 2.0 * std::sqrt(2.0)) / 6.0;
    CHECK(srm_value(double_trine()) == doctest::Approx(frozen).epsilon(1e-12));
    CHECK(solve_value(build_global_sdp(double_trine()), 1e-9) ==
          doctest::Approx(frozen).epsilon(1e-7));
}

TEST_CASE("ppt relaxation values") {
    CHECK(solve_value(build_ppt_sdp(ququart_ensemble())) == doctest::Approx(1.0).epsilon(2e-6));
    CHECK(solve_value(build_ppt_sdp(orthogonal_product_pair())) ==
          doctest::Approx(1.0).epsilon(1e-6));
    for (double tau : {0.0, M_PI / 3, M_PI / 2}) {
        const double expect = (1.0 + std::cos(tau)) / 2.0;
        CHECK(solve_value(build_ppt_sdp(bell_basis_family(M_PI / 4, tau, M_PI / 2))) ==
              doctest::Approx(expect).epsilon(5e-6));
    }
}

TEST_CASE("one-round build structure") {
    HierarchyBuild b = build_1r(double_trine(), {2, 1, Direction::AtoB});
    CHECK(b.stored.size() == 12);                 // 2 * 3 * 2 variable blocks
    CHECK(b.program.blocks().size() == 24);       // plus one transpose slack each
    for (const auto& st : b.stored) CHECK(b.program.blocks()[st.handle].dim == 4);
    // normalization right-hand side d_A^k d_B = 4
    bool found_norm = false;
    for (const auto& eq : b.program.equalities())
        if (eq.rhs == doctest::Approx(4.0)) found_norm = true;
    CHECK(found_norm);
}

TEST_CASE("non-adaptive build structure") {
    HierarchyBuild b = build_na(double_trine(), {2, 1, Direction::AtoB});
    CHECK(b.stored.size() == 18);  // a in {1,2}, b-vector in {1,2,3}^2
    for (const auto& st : b.stored) CHECK(b.program.blocks()[st.handle].dim == 4);
}

TEST_CASE("single-state ensembles are trivially discriminated") {
    CHECK(solve_value(build_na(single_state_ensemble(), {2, 1, Direction::AtoB}).program) ==
          doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bell family, communication toward the second party at level 1") {
    for (double tau : {0.3, 1.1}) {
        const double expect = (1.0 + std::cos(tau)) / 2.0;
        HierarchyBuild b =
            build_1r(bell_basis_family(M_PI / 4, tau, M_PI / 2), {2, 1, Direction::BtoA});
        CHECK(solve_value(b.program) == doctest::Approx(expect).epsilon(2e-5));
    }
}

TEST_CASE("bell family, disadvantaged direction needs level 2") {
    const double tau = M_PI / 3;
    StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);
    const double k1 = solve_value(build_1r(bell, {2, 1, Direction::AtoB}).program);
    const double k2 = solve_value(build_1r(bell, {2, 2, Direction::AtoB}).program, 2e-6);
    const double expect = (std::sqrt(2.0) * std::cos(tau) + 2.0) / 4.0;
    CHECK(k2 == doctest::Approx(expect).epsilon(5e-4));
    // monotone in the level
    CHECK(k2 <= k1 + 2e-6);
}

TEST_CASE("hierarchy is sandwiched by ppt and dominated by global") {
    StateEnsemble trine = double_trine();
    const double global = solve_value(build_global_sdp(trine));
    const double ppt = solve_value(build_ppt_sdp(trine));
    const double r1 = solve_value(build_1r(trine, {2, 1, Direction::AtoB}).program);
    const double na = solve_value(build_na(trine, {2, 1, Direction::AtoB}).program);
    CHECK(r1 <= ppt + 2e-6);
    CHECK(ppt <= global + 2e-6);
    CHECK(na <= r1 + 2e-6);
}

TEST_CASE("sorted and relabel reductions are lossless") {
    StateEnsemble trine = double_trine();
    BuildOptions unreduced;
    unreduced.sorted_reduction = false;
    BuildOptions relabel;
    relabel.relabel_reduction = true;

    for (bool na : {false, true}) {
        for (int k = 1; k <= 2; ++k) {
            if (na && k == 2) continue;  // covered at k=1; k=2 runs in acceptance
            HierarchyParams p{2, k, Direction::AtoB};
            auto build = [&](const BuildOptions& o) {
                return na ? build_na(trine, p, o) : build_1r(trine, p, o);
            };
            const double v_full = solve_value(build(unreduced).program);
            const double v_sorted = solve_value(build(BuildOptions{}).program);
            const double v_relabel = solve_value(build(relabel).program);
            CHECK(v_sorted == doctest::Approx(v_full).epsilon(2e-6));
            CHECK(v_relabel == doctest::Approx(v_full).epsilon(2e-6));
        }
    }
}

TEST_CASE("size cap refuses oversized builds with an estimate") {
    BuildOptions tiny;
    tiny.size_cap = 100;
    try {
        build_1r(double_trine(), {2, 1, Direction::AtoB}, tiny);
        FAIL("expected SizeCapExceeded");
    } catch (const SizeCapExceeded& err) {
        CHECK(err.estimate > err.cap);
    }
}

TEST_CASE("assembled measurement from an optimal solution is a POVM") {
    StateEnsemble trine = double_trine();
    UpperBoundOutput out = upper_bound_full(trine, BoundMethod::oneround,
                                            HierarchyParams{2, 1, Direction::AtoB}, 1e-8);
    auto ms = out.build->assemble_measurement(out.report.block_values);
    REQUIRE(static_cast<int>(ms.size()) == trine.size());
    MatrixXcd sum = MatrixXcd::Zero(4, 4);
    for (const auto& mop : ms) {
        CHECK(mop.min_eigenvalue() > -1e-6);
        sum += mop.matrix();
    }
    CHECK((sum - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
    // objective agreement with the reported bound
    double val = 0.0;
    for (int l = 0; l < trine.size(); ++l)
        val += trine.items[l].prior * (ms[l].matrix() * trine.items[l].state.matrix())
                                          .trace()
                                          .real();
    CHECK(val == doctest::Approx(out.bound.value).epsilon(1e-5));
}

TEST_CASE("upper_bound dispatch") {
    StateEnsemble trine = double_trine();
    BoundResult g = upper_bound(trine, BoundMethod::global, std::nullopt, 1e-8);
    CHECK(g.kind == BoundKind::upper);
    CHECK(g.method == BoundMethod::global);
    CHECK(g.value >= 0.0);
    CHECK(g.value <= 1.0 + 10 * g.gap);
    CHECK_THROWS_AS(upper_bound(trine, BoundMethod::oneround, std::nullopt, 1e-8),
                    std::invalid_argument);
}
