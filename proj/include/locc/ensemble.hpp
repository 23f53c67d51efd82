#ifndef LOCC_ENSEMBLE_HPP
#define LOCC_ENSEMBLE_HPP

#include <string>
#include <vector>

#include "locc/core.hpp"

namespace locc {

// A finite set of bipartite states with prior probabilities. Pure states are
// stored as density matrices so that every ensemble shares one representation.
//
// Invariants (checked by validate()):
//   - priors are strictly positive and sum to 1 within 1e-12,
//   - every state is PSD with unit trace within 1e-10,
//   - all states share the shape [d_A, d_B].
struct StateEnsemble {
    int d_A = 0;
    int d_B = 0;
    struct Item {
        double prior;
        HermitianOp state;
    };
    std::vector<Item> items;

    int size() const { return static_cast<int>(items.size()); }
    SystemShape shape() const { return SystemShape({d_A, d_B}); }
    void validate() const;  // throws std::invalid_argument naming the failing invariant
};

// The two-qubit Bell-basis family: four mutually orthonormal pure states with
// common tangle sin^2(2*delta) sin^2(tau), uniform priors. Angles in radians.
StateEnsemble bell_basis_family(double delta, double tau, double xi);

// Tangle 2(1 - Tr[(Tr_B rho_A)^2]) of a pure bipartite state given as a rank-1
// density matrix; throws if the input is not pure (rank-1 within 1e-10).
double tangle(const HermitianOp& pure_state);

// Equiprobable ensemble of the three product states |s_i>|s_i| on two qubits,
// where the |s_i> form a planar trine (pairwise overlap -1/2).
StateEnsemble double_trine();

// Equiprobable ensemble of three mutually orthogonal maximally entangled
// states on d_A = d_B = 4.
StateEnsemble ququart_ensemble();

// JSON serialization:
//   {"d_A": int, "d_B": int,
//    "items": [{"prior": float, "state": [[[re, im], ...], ...]}, ...]}
// with row-major matrices. Round trips are exact to 1e-15.
StateEnsemble load_ensemble(const std::string& path);
void save_ensemble(const StateEnsemble& e, const std::string& path);
StateEnsemble ensemble_from_json_string(const std::string& text);
std::string ensemble_to_json_string(const StateEnsemble& e);

// Conjugate every state by the swap of the two tensor factors and exchange
// d_A with d_B; involutive.
StateEnsemble swap_parties(const StateEnsemble& e);

// Convenience: ensemble from pure-state vectors with the given priors.
StateEnsemble ensemble_from_vectors(int d_A, int d_B, const std::vector<VectorXcd>& states,
                                    const std::vector<double>& priors);

}  // namespace locc

#endif
