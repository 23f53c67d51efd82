#ifndef LOCC_CERTIFY_HPP
#define LOCC_CERTIFY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locc/hierarchy.hpp"
#include "locc/seesaw.hpp"

namespace locc {

// Feasibility certificates for the hierarchy constraint systems: the variable
// arrays indexed by (a_1..a_k, lambda, b) for the one-round relaxation and by
// (a_1..a_k, b_1..b_m) for the non-adaptive one. Entries may be supplied for
// the non-decreasing representatives only; the checker expands the remaining
// indices by permutation conjugation.

struct CertificateArray1R {
    int m = 0, k = 0, n = 0, d_A = 0, d_B = 0;
    // key: a_1..a_k, lambda, b (0-based)
    std::map<std::vector<int>, HermitianOp> entries;
};

struct CertificateArrayNA {
    int m = 0, k = 0, n = 0, d_A = 0, d_B = 0;
    // key: a_1..a_k, b_1..b_m (0-based)
    std::map<std::vector<int>, HermitianOp> entries;
};

// Maximum violations per constraint family: operator norm for equalities,
// negative-eigenvalue magnitude for cone memberships. verdict is "pass" iff
// every residual is at most tol.
struct ResidualReport {
    double psd_min_eig = 0.0;
    std::vector<double> ppt_min_eig;  // one entry per transposed copy count 1..k
    double marginal_A = 0.0;
    double marginal_B = 0.0;
    double symmetry = 0.0;
    double normalization = 0.0;
    std::optional<double> reconstruction;
    double tol = 0.0;
    bool pass = false;

    double worst() const;
    std::string to_json() const;
};

ResidualReport check_1r_certificate(const CertificateArray1R& c,
                                    const std::optional<std::vector<HermitianOp>>& claimed,
                                    double tol);
ResidualReport check_na_certificate(const CertificateArrayNA& c,
                                    const std::optional<std::vector<HermitianOp>>& claimed,
                                    double tol);

// Success probabilities of the closed-form strategies for the Bell-basis
// family at delta = pi/4, xi = pi/2.
double analytic_p_succ_AtoB(double tau);
double analytic_p_succ_BtoA(double tau);

// The explicit strategies behind those values, built from the spectral
// projectors of the measuring observables with the optimal deterministic
// guessing rule.
NonAdaptiveStrategy analytic_strategy_AtoB(double tau);
OneRoundStrategy analytic_strategy_BtoA(double tau);

// Forward constructions of certificates from explicit strategies (the
// product form at level k), and the non-adaptive-to-one-round contraction.
CertificateArray1R certificate_from_strategy(const StateEnsemble& e, const OneRoundStrategy& s,
                                             int k);
CertificateArrayNA certificate_from_strategy(const StateEnsemble& e,
                                             const NonAdaptiveStrategy& s, int k);
CertificateArray1R contract_to_oneround(const CertificateArrayNA& c);

// Certificates extracted from a solved hierarchy program (entries for every
// non-decreasing representative).
CertificateArray1R certificate_from_solution_1r(const HierarchyBuild& build,
                                                const SolveReport& report);
CertificateArrayNA certificate_from_solution_na(const HierarchyBuild& build,
                                                const SolveReport& report);

// JSON serialization (schema documented in the README).
std::string certificate_to_json(const CertificateArray1R& c);
std::string certificate_to_json(const CertificateArrayNA& c);
CertificateArray1R certificate_1r_from_json(const std::string& text);
CertificateArrayNA certificate_na_from_json(const std::string& text);
void save_certificate(const std::string& json, const std::string& path);
std::string load_text_file(const std::string& path);

}  // namespace locc

#endif
