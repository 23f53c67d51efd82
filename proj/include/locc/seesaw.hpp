#ifndef LOCC_SEESAW_HPP
#define LOCC_SEESAW_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "locc/hierarchy.hpp"

namespace locc {

// Seedable, splittable generator (splitmix64 core, Box-Muller gaussians).
// The sampling procedure, not the generator brand, is what the strategies
// depend on; seeded runs are reproducible bit for bit.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform();   // [0, 1)
    double gaussian();  // standard normal
    Rng split(std::uint64_t stream) const;

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

using Povm = std::vector<MatrixXcd>;

// Random POVM from isotropic complex vectors: each effect is a sum of
// outer products v v^dag (one vector per effect when outcomes >= d, more
// otherwise so the Gram stays invertible), symmetrically normalized by
// G^{-1/2} (.) G^{-1/2} with G their sum. Resamples on a singular Gram.
Povm random_povm(int d, int outcomes, Rng& rng);

struct OneRoundStrategy {
    Povm alice;               // m outcomes on d_A
    std::vector<Povm> bob;    // per message a: n outcomes on d_B
    Direction direction = Direction::AtoB;
};

struct NonAdaptiveStrategy {
    Povm alice;  // m outcomes on d_A
    Povm bob;    // m_B outcomes on d_B
    // post[a][b] is a probability vector over the ensemble index
    std::vector<std::vector<VectorXd>> post;
};

// Success probability of the measurement assembled from a strategy.
double strategy_value(const StateEnsemble& e, const OneRoundStrategy& s);
double strategy_value(const StateEnsemble& e, const NonAdaptiveStrategy& s);

// Exact coordinate updates (each one an unrestricted discrimination SDP).
std::pair<std::vector<Povm>, double> optimal_bob_given_alice(const StateEnsemble& e,
                                                             const Povm& alice,
                                                             double eps = 1e-8);
std::pair<Povm, double> optimal_alice_given_bob(const StateEnsemble& e,
                                                const std::vector<Povm>& bob,
                                                double eps = 1e-8);

struct SeesawOptions {
    int restarts = 50;
    int max_iters = 200;
    double conv_tol = 1e-8;
    std::uint64_t seed = 0;
    double inner_eps = 1e-8;
    bool inject_seeds = true;  // structured deterministic starting points
    bool verbose = false;
};

struct SeesawOneRoundResult {
    BoundResult bound;
    OneRoundStrategy strategy;
    int failed_restarts = 0;
};
struct SeesawNonAdaptiveResult {
    BoundResult bound;
    NonAdaptiveStrategy strategy;
    int failed_restarts = 0;
};

// Alternating maximization over explicit strategies; lower bounds.
SeesawOneRoundResult seesaw_oneround(const StateEnsemble& e, int m,
                                     const SeesawOptions& o = {});
// m_B <= 0 selects the extremality default d_B^2.
SeesawNonAdaptiveResult seesaw_nonadaptive(const StateEnsemble& e, int m, int m_B,
                                           const SeesawOptions& o = {});

}  // namespace locc

#endif
