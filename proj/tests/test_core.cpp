#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <locc/core.hpp>
#include <locc/seesaw.hpp>

using namespace locc;

namespace {

MatrixXcd pauli_x() {
    MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
MatrixXcd pauli_y() {
    MatrixXcd m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
MatrixXcd pauli_z() {
    MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

HermitianOp qubit_op(const MatrixXcd& m) { return HermitianOp(SystemShape::single(2), m); }

HermitianOp random_hermitian(const SystemShape& shape, Rng& rng) {
    const int d = shape.total();
    MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return HermitianOp(shape, 0.5 * (m + m.adjoint()).eval());
}

}  // namespace

TEST_CASE("tensor product basics") {
    auto id2 = HermitianOp::identity(SystemShape::single(2));
    auto t = tensor(id2, id2);
    CHECK(t.dim() == 4);
    CHECK((t.matrix() - MatrixXcd::Identity(4, 4)).norm() == doctest::Approx(0.0));

    // diagonal action of sigma_z (x) 1 on |10>
    auto zs = tensor(qubit_op(pauli_z()), id2);
    VectorXcd e10 = VectorXcd::Zero(4);
    e10(2) = 1.0;
    VectorXcd out = zs.matrix() * e10;
    CHECK((out + e10).norm() == doctest::Approx(0.0));

    // trace multiplicativity on projectors
    VectorXcd v0(2), v1(2);
    v0 << 1, 0;
    v1 << 0, 1;
    auto p0 = HermitianOp::projector(SystemShape::single(2), v0);
    auto p1 = HermitianOp::projector(SystemShape::single(2), v1);
    CHECK(tensor(p0, p1).trace() == doctest::Approx(1.0));
}

TEST_CASE("partial trace") {
    Rng rng(7);
    auto rho = random_hermitian(SystemShape::single(2), rng);
    auto gamma = random_hermitian(SystemShape::single(3), rng);
    auto prod = tensor(rho, gamma);
    auto back = partial_trace(prod, {2});
    CHECK((back.matrix() - gamma.trace() * rho.matrix()).norm() < 1e-12);

    // maximally entangled state has maximally mixed marginals
    VectorXcd bell(4);
    bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    auto phi = HermitianOp::projector(SystemShape({2, 2}), bell);
    for (int side = 1; side <= 2; ++side) {
        auto red = partial_trace(phi, {side});
        CHECK((red.matrix() - 0.5 * MatrixXcd::Identity(2, 2)).norm() < 1e-12);
    }

    // sequential traces equal the full trace as a 1x1 operator
    auto full = partial_trace(partial_trace(prod, {2}), {1});
    CHECK(full.dim() == 1);
    CHECK(full.matrix()(0, 0).real() == doctest::Approx(prod.trace()));

    CHECK_THROWS_AS(partial_trace(prod, {3}), std::out_of_range);
}

TEST_CASE("partial transpose") {
    Rng rng(13);
    auto x = random_hermitian(SystemShape({2, 2}), rng);
    auto twice = partial_transpose(partial_transpose(x, {1}), {1});
    CHECK((twice.matrix() - x.matrix()).norm() < 1e-14);
    CHECK(partial_transpose(x, {1}).trace() == doctest::Approx(x.trace()));

    // separable two-qubit state stays PSD
    VectorXcd v0(2), vp(2);
    v0 << 1, 0;
    vp << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    auto sep = tensor(HermitianOp::projector(SystemShape::single(2), v0),
                      HermitianOp::projector(SystemShape::single(2), vp))
                   .scaled(0.5)
                   .plus(tensor(HermitianOp::projector(SystemShape::single(2), vp),
                                HermitianOp::projector(SystemShape::single(2), v0))
                             .scaled(0.5));
    CHECK(is_psd(partial_transpose(sep, {1}), 1e-12));

    // maximally entangled state: least eigenvalue of the partial transpose
    VectorXcd bell(4);
    bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    auto phi = HermitianOp::projector(SystemShape({2, 2}), bell);
    CHECK(partial_transpose(phi, {1}).min_eigenvalue() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("partial trace and transpose commute on disjoint subsystems") {
    Rng rng(21);
    auto x = random_hermitian(SystemShape({2, 3, 2}), rng);
    auto a = partial_transpose(partial_trace(x, {2}), {1});
    auto b = partial_trace(partial_transpose(x, {1}), {2});
    CHECK((a.matrix() - b.matrix()).norm() < 1e-12);
}

TEST_CASE("permutation unitaries") {
    // swap on two qubits
    Permutation swap({2, 1});
    MatrixXcd u = permutation_unitary(2, 2, swap);
    VectorXcd e01 = VectorXcd::Zero(4), e10 = VectorXcd::Zero(4);
    e01(1) = 1.0;
    e10(2) = 1.0;
    CHECK((u * e01 - e10).norm() == doctest::Approx(0.0));

    CHECK((permutation_unitary(3, 2, Permutation::identity(3)) - MatrixXcd::Identity(8, 8))
              .norm() == doctest::Approx(0.0));

    // group law for k = 3, d = 2, checked against explicit index relabeling
    for (const auto& s : all_permutations(3))
        for (const auto& p : all_permutations(3)) {
            MatrixXcd lhs = permutation_unitary(3, 2, s) * permutation_unitary(3, 2, p);
            MatrixXcd rhs = permutation_unitary(3, 2, s.compose(p));
            CHECK((lhs - rhs).norm() == doctest::Approx(0.0));
        }

    // faithfulness for k <= 4, d = 2
    for (int k = 2; k <= 4; ++k) {
        auto perms = all_permutations(k);
        for (size_t i = 0; i < perms.size(); ++i)
            for (size_t j = i + 1; j < perms.size(); ++j)
                CHECK((permutation_unitary(k, 2, perms[i]) - permutation_unitary(k, 2, perms[j]))
                          .norm() > 0.5);
    }
}

TEST_CASE("real embedding") {
    // real symmetric input: block-diagonal duplicate
    MatrixXcd s(2, 2);
    s << 2, 1, 1, -1;
    auto x = qubit_op(s);
    MatrixXd emb = real_embedding(x);
    CHECK((emb.topRightCorner(2, 2)).norm() == doctest::Approx(0.0));
    CHECK((emb.topLeftCorner(2, 2) - emb.bottomRightCorner(2, 2)).norm() ==
          doctest::Approx(0.0));

    // sigma_y: eigenvalues +1, +1, -1, -1
    MatrixXd ey = real_embedding(qubit_op(pauli_y()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ey);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(3) == doctest::Approx(1.0));

    // embedding of a pure-state projector is PSD
    VectorXcd v(2);
    v << Complex(0.6, 0.3), Complex(0.0, -0.74);
    v.normalize();
    MatrixXd ep = real_embedding(HermitianOp::projector(SystemShape::single(2), v));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es2(ep);
    CHECK(es2.eigenvalues().minCoeff() > -1e-13);

    // spectrum match on random Hermitian inputs + round trip
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto h = random_hermitian(SystemShape::single(5), rng);
        MatrixXd e = real_embedding(h);
        Eigen::SelfAdjointEigenSolver<MatrixXd> ee(e);
        CHECK(std::abs(ee.eigenvalues().minCoeff() - h.min_eigenvalue()) < 1e-10);
        CHECK((embedding_inverse(e) - h.matrix()).norm() < 1e-12);
    }
}

TEST_CASE("psd and povm tests") {
    auto id2 = HermitianOp::identity(SystemShape::single(2));
    CHECK(is_povm({id2.scaled(0.5), id2.scaled(0.5)}, 1e-12));

    VectorXcd v0(2);
    v0 << 1, 0;
    auto p0 = HermitianOp::projector(SystemShape::single(2), v0);
    CHECK_FALSE(is_povm({p0, p0}, 1e-9));
    CHECK_FALSE(is_psd(qubit_op(pauli_x()), 1e-9));
    CHECK(is_psd(id2, 0.0));

    auto id3 = HermitianOp::identity(SystemShape::single(3));
    CHECK_THROWS_AS(is_povm({id2, id3}, 1e-9), std::invalid_argument);
}

TEST_CASE("hermiticity is enforced") {
    MatrixXcd bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(qubit_op(bad), std::invalid_argument);
    CHECK_THROWS_AS(Permutation({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(SystemShape({2, 0}), std::invalid_argument);
}
