#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <locc/conic.hpp>
#include <locc/ensemble.hpp>
#include <locc/hierarchy.hpp>
#include <locc/seesaw.hpp>
#include <locc/solve.hpp>

using namespace locc;

namespace {

ConicProgram top_eigenvalue_program(const MatrixXcd& h) {
    ConicProgram p;
    const int d = static_cast<int>(h.rows());
    const int x = p.add_psd_block("X", d);
    std::vector<Coeff> tr;
    for (int i = 0; i < d; ++i) tr.push_back({EntryRef{x, i, i, false}, 1.0});
    p.add_equality(tr, 1.0);
    p.add_objective_trace(x, h);
    return p;
}

MatrixXcd pauli_z() {
    MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

}  // namespace

TEST_CASE("block registration") {
    ConicProgram p;
    const int h = p.add_psd_block("A", 4);
    CHECK(h == 0);
    CHECK(p.blocks().size() == 1);
    CHECK_THROWS_AS(p.add_psd_block("A", 2), std::invalid_argument);
    CHECK_THROWS_AS(p.add_equality({{EntryRef{0, 2, 1, false}, 1.0}}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(p.add_equality({{EntryRef{0, 1, 1, true}, 1.0}}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(p.add_equality({{EntryRef{5, 0, 0, false}, 1.0}}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("psd image slack construction") {
    ConicProgram p;
    const int h = p.add_psd_block("R", 4);
    const int same = p.add_psd_image(h, SystemShape({2, 2}), {});
    CHECK(same == h);
    CHECK(p.blocks().size() == 1);
    const int slack = p.add_psd_image(h, SystemShape({2, 2}), {1});
    CHECK(slack != h);
    CHECK(p.blocks().size() == 2);
    CHECK(p.blocks()[slack].dim == 4);
    // a k=2-style block gets two slack blocks for one- and two-copy transposes
    ConicProgram q;
    const int r = q.add_psd_block("R", 8);
    q.add_psd_image(r, SystemShape({2, 2, 2}), {1});
    q.add_psd_image(r, SystemShape({2, 2, 2}), {1, 2});
    CHECK(q.blocks().size() == 3);
}

TEST_CASE("top eigenvalue program solves to 1") {
    for (auto method : {SolveOptions::Method::interior_point, SolveOptions::Method::splitting}) {
        SolveOptions opt;
        opt.eps = 1e-8;
        opt.method = method;
        SolveReport rep = solve(top_eigenvalue_program(pauli_z()), opt);
        CHECK(rep.status == SolveStatus::optimal);
        CHECK(rep.primal_value == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rep.gap <= 1e-7);
        // returned block is PSD within 10 eps and has unit trace
        const auto& x = rep.block_values.at("X");
        CHECK(x.min_eigenvalue() > -1e-7);
        CHECK(x.trace() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("complex objective through the embedding") {
    MatrixXcd h(2, 2);
    h << 0.3, Complex(0.2, -0.7), Complex(0.2, 0.7), -0.1;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    const double expect = es.eigenvalues().maxCoeff();
    for (auto method : {SolveOptions::Method::interior_point, SolveOptions::Method::splitting}) {
        SolveOptions opt;
        opt.eps = 1e-8;
        opt.method = method;
        SolveReport rep = solve(top_eigenvalue_program(h), opt);
        CHECK(rep.status == SolveStatus::optimal);
        CHECK(rep.primal_value == doctest::Approx(expect).epsilon(1e-6));
        const MatrixXcd& m = rep.block_values.at("X").matrix();
        CHECK((m - m.adjoint()).norm() < 1e-10);
    }
}

TEST_CASE("infeasible program is reported, not thrown") {
    ConicProgram p;
    const int x = p.add_psd_block("X", 2);
    std::vector<Coeff> tr;
    for (int i = 0; i < 2; ++i) tr.push_back({EntryRef{x, i, i, false}, 1.0});
    p.add_equality(tr, -1.0);
    p.add_objective_trace(x, pauli_z());
    SolveReport rep = solve(p, 1e-8);
    CHECK(rep.status == SolveStatus::infeasible);
}

TEST_CASE("global discrimination of an orthonormal basis reaches 1") {
    SolveReport rep = solve(build_global_sdp(bell_basis_family(0.7, 0.3, 1.1)), 1e-8);
    CHECK(rep.status == SolveStatus::optimal);
    CHECK(rep.primal_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("helstrom pair closed form") {
    // optimum = 1/2 (1 + || p1 rho1 - p2 rho2 ||_1) for two states
    VectorXcd v1(2), v2(2);
    v1 << 1, 0;
    v2 << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    StateEnsemble e;
    e.d_A = 1;
    e.d_B = 2;
    const SystemShape sh({1, 2});
    e.items.push_back({0.6, HermitianOp::projector(sh, v1)});
    e.items.push_back({0.4, HermitianOp::projector(sh, v2)});
    MatrixXcd diff = 0.6 * e.items[0].state.matrix() - 0.4 * e.items[1].state.matrix();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(diff);
    const double expect = 0.5 * (1.0 + es.eigenvalues().cwiseAbs().sum());
    SolveReport rep = solve(build_global_sdp(e), 1e-9);
    CHECK(rep.status == SolveStatus::optimal);
    CHECK(rep.primal_value == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("splitting and interior point agree on a structured program") {
    StateEnsemble e = double_trine();
    ConicProgram p = build_ppt_sdp(e);
    SolveOptions ipm, admm;
    ipm.eps = 1e-9;
    ipm.method = SolveOptions::Method::interior_point;
    admm.eps = 1e-7;
    admm.method = SolveOptions::Method::splitting;
    SolveReport a = solve(p, ipm);
    SolveReport b = solve(p, admm);
    CHECK(a.status == SolveStatus::optimal);
    CHECK(b.status == SolveStatus::optimal);
    CHECK(a.primal_value == doctest::Approx(b.primal_value).epsilon(5e-6));
}

TEST_CASE("resolves are deterministic") {
    ConicProgram p = build_global_sdp(double_trine());
    SolveReport a = solve(p, 1e-8);
    SolveReport b = solve(p, 1e-8);
    CHECK(a.primal_value == doctest::Approx(b.primal_value).epsilon(1e-12));
}

TEST_CASE("program dump is self-describing JSON") {
    ConicProgram p = top_eigenvalue_program(pauli_z());
    const std::string dump = p.dump();
    CHECK(dump.find("\"blocks\"") != std::string::npos);
    CHECK(dump.find("\"equalities\"") != std::string::npos);
    CHECK(dump.find("\"objective\"") != std::string::npos);
}
