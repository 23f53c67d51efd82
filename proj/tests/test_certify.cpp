#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <locc/certify.hpp>

using namespace locc;

TEST_CASE("closed forms") {
    CHECK(analytic_p_succ_AtoB(M_PI / 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(analytic_p_succ_BtoA(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(analytic_p_succ_BtoA(M_PI / 3) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(analytic_p_succ_AtoB(0.0) ==
          doctest::Approx((std::sqrt(2.0) + 2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("analytic strategies reproduce the closed forms on a tau grid") {
    for (int g = 0; g <= 63; ++g) {
        const double tau = g * (M_PI / 2) / 63;
        StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);
        CHECK(std::abs(strategy_value(bell, analytic_strategy_AtoB(tau)) -
                       analytic_p_succ_AtoB(tau)) < 1e-9);
        CHECK(std::abs(strategy_value(bell, analytic_strategy_BtoA(tau)) -
                       analytic_p_succ_BtoA(tau)) < 1e-9);
    }
    StateEnsemble b4 = bell_basis_family(M_PI / 4, M_PI / 4, M_PI / 2);
    CHECK(strategy_value(b4, analytic_strategy_BtoA(M_PI / 4)) ==
          doctest::Approx((1.0 + std::sqrt(2.0) / 2.0) / 2.0).epsilon(1e-12));
    StateEnsemble b2 = bell_basis_family(M_PI / 4, M_PI / 2, M_PI / 2);
    CHECK(strategy_value(b2, analytic_strategy_AtoB(M_PI / 2)) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("first-measurement outcome probabilities match the stated table") {
    const double tau = 0.7;
    StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);
    NonAdaptiveStrategy s = analytic_strategy_AtoB(tau);
    auto outcome_prob = [&](int a, int lambda) {
        const MatrixXcd big = kron(s.alice[a], MatrixXcd::Identity(2, 2));
        return (big * bell.items[lambda].state.matrix()).trace().real();
    };
    const double plus_23 = (std::sqrt(2.0) * std::cos(tau) + 2.0) / 4.0;
    const double plus_14 = (-std::sqrt(2.0) * std::cos(tau) + 2.0) / 4.0;
    // outcome labeled 0 carries the +1 eigenvalue
    CHECK(outcome_prob(0, 1) == doctest::Approx(plus_23).epsilon(1e-10));
    CHECK(outcome_prob(0, 2) == doctest::Approx(plus_23).epsilon(1e-10));
    CHECK(outcome_prob(0, 0) == doctest::Approx(plus_14).epsilon(1e-10));
    CHECK(outcome_prob(0, 3) == doctest::Approx(plus_14).epsilon(1e-10));
}

TEST_CASE("post-measurement orthogonality within the guessed pairs") {
    const double tau = 1.0;
    StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);

    // second party first: the other side's conditional states are pairwise
    // orthogonal within {1,2} and {3,4} for each outcome
    {
        StateEnsemble swapped = swap_parties(bell);
        OneRoundStrategy s = analytic_strategy_BtoA(tau);
        for (int a = 0; a < 2; ++a) {
            std::vector<MatrixXcd> cond(4);
            for (int l = 0; l < 4; ++l) {
                const MatrixXcd big = kron(s.alice[a], MatrixXcd::Identity(2, 2));
                cond[l] = partial_trace_matrix(big * swapped.items[l].state.matrix(), {2, 2},
                                               {0});
            }
            CHECK(std::abs((cond[0] * cond[1]).trace().real()) < 1e-12);
            CHECK(std::abs((cond[2] * cond[3]).trace().real()) < 1e-12);
        }
    }
    // first party first: conditional states on the second side are pairwise
    // orthogonal within {1,4} and {2,3}
    {
        NonAdaptiveStrategy s = analytic_strategy_AtoB(tau);
        for (int a = 0; a < 2; ++a) {
            std::vector<MatrixXcd> cond(4);
            for (int l = 0; l < 4; ++l) {
                const MatrixXcd big = kron(s.alice[a], MatrixXcd::Identity(2, 2));
                cond[l] =
                    partial_trace_matrix(big * bell.items[l].state.matrix(), {2, 2}, {0});
            }
            CHECK(std::abs((cond[0] * cond[3]).trace().real()) < 1e-12);
            CHECK(std::abs((cond[1] * cond[2]).trace().real()) < 1e-12);
        }
    }
}

TEST_CASE("forward-constructed certificates pass tightly") {
    StateEnsemble bell = bell_basis_family(M_PI / 4, 0.8, M_PI / 2);
    OneRoundStrategy s = analytic_strategy_BtoA(0.8);
    for (int k = 1; k <= 2; ++k) {
        CertificateArray1R c = certificate_from_strategy(bell, s, k);
        ResidualReport rep = check_1r_certificate(c, std::nullopt, 1e-10);
        CHECK(rep.pass);
        CHECK(rep.worst() < 1e-10);
        // monotone in the tolerance
        CHECK(check_1r_certificate(c, std::nullopt, 1e-6).pass);
    }

    NonAdaptiveStrategy na = analytic_strategy_AtoB(0.8);
    for (int k = 1; k <= 2; ++k) {
        CertificateArrayNA c = certificate_from_strategy(bell, na, k);
        CHECK(check_na_certificate(c, std::nullopt, 1e-10).pass);
        // the contraction to the one-round system also passes
        CertificateArray1R contracted = contract_to_oneround(c);
        CHECK(check_1r_certificate(contracted, std::nullopt, 1e-10).pass);
    }
}

TEST_CASE("certificates from solver output pass at solver accuracy") {
    StateEnsemble trine = double_trine();
    UpperBoundOutput out = upper_bound_full(trine, BoundMethod::oneround,
                                            HierarchyParams{2, 1, Direction::AtoB}, 1e-8);
    CertificateArray1R c = certificate_from_solution_1r(*out.build, out.report);
    auto claimed = out.build->assemble_measurement(out.report.block_values);
    ResidualReport rep = check_1r_certificate(c, claimed, 1e-5);
    CHECK(rep.pass);
    CHECK(rep.reconstruction.has_value());
    CHECK(*rep.reconstruction <= 10 * std::max(out.report.gap, 1e-9));

    UpperBoundOutput na = upper_bound_full(trine, BoundMethod::nonadaptive,
                                           HierarchyParams{2, 1, Direction::AtoB}, 1e-8);
    CertificateArrayNA cna = certificate_from_solution_na(*na.build, na.report);
    CHECK(check_na_certificate(cna, std::nullopt, 1e-5).pass);
}

TEST_CASE("corrupted certificates are flagged with the failing family") {
    StateEnsemble bell = bell_basis_family(M_PI / 4, 0.8, M_PI / 2);
    CertificateArray1R c = certificate_from_strategy(bell, analytic_strategy_BtoA(0.8), 1);

    // negate one non-vanishing block: cone membership fails
    CertificateArray1R bad = c;
    for (auto& [key, op] : bad.entries)
        if (op.norm() > 0.1) {
            op = op.scaled(-1.0);
            break;
        }
    ResidualReport rep = check_1r_certificate(bad, std::nullopt, 1e-10);
    CHECK_FALSE(rep.pass);
    CHECK(rep.psd_min_eig > 1e-3);

    // rescale everything: normalization fails
    CertificateArray1R scaled = c;
    for (auto& [key, op] : scaled.entries) op = op.scaled(1.25);
    ResidualReport rep2 = check_1r_certificate(scaled, std::nullopt, 1e-8);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.normalization > 1e-2);

    // missing representative: incomplete index set
    CertificateArray1R missing = c;
    missing.entries.erase(missing.entries.begin());
    CHECK_THROWS_AS(check_1r_certificate(missing, std::nullopt, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("certificate json round trip and schema validation") {
    StateEnsemble bell = bell_basis_family(M_PI / 4, 0.4, M_PI / 2);
    CertificateArray1R c = certificate_from_strategy(bell, analytic_strategy_BtoA(0.4), 1);
    CertificateArray1R back = certificate_1r_from_json(certificate_to_json(c));
    CHECK(back.entries.size() == c.entries.size());
    CHECK(check_1r_certificate(back, std::nullopt, 1e-10).pass);

    CHECK_THROWS_AS(certificate_1r_from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(certificate_1r_from_json(R"({"variant":"na"})"), std::invalid_argument);
    CHECK_THROWS_AS(certificate_1r_from_json(
                        R"({"variant":"1r","m":2,"k":1,"n":2,"d_A":2,"d_B":2,
                            "entries":[{"a":[5],"lambda":1,"b":1,"op":[]}]})"),
                    std::invalid_argument);

    NonAdaptiveStrategy na = analytic_strategy_AtoB(0.4);
    CertificateArrayNA cna = certificate_from_strategy(bell, na, 1);
    CertificateArrayNA nback = certificate_na_from_json(certificate_to_json(cna));
    CHECK(check_na_certificate(nback, std::nullopt, 1e-10).pass);
}

TEST_CASE("one-round certificates from see-saw strategies") {
    StateEnsemble trine = double_trine();
    SeesawOptions o;
    o.restarts = 2;
    o.seed = 23;
    auto res = seesaw_oneround(trine, 2, o);
    CertificateArray1R c = certificate_from_strategy(trine, res.strategy, 2);
    ResidualReport rep = check_1r_certificate(c, std::nullopt, 1e-8);
    CHECK(rep.pass);
}
