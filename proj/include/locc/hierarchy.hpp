#ifndef LOCC_HIERARCHY_HPP
#define LOCC_HIERARCHY_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "locc/ensemble.hpp"
#include "locc/solve.hpp"

namespace locc {

enum class Direction { AtoB, BtoA };
std::string to_string(Direction d);

struct HierarchyParams {
    int m = 2;  // message alphabet size, >= 1
    int k = 1;  // hierarchy level, >= 1
    Direction direction = Direction::AtoB;
};

enum class BoundMethod {
    global,
    ppt,
    oneround,
    nonadaptive,
    seesaw_oneround,
    seesaw_nonadaptive,
    analytic
};
std::string to_string(BoundMethod m);

enum class BoundKind { upper, lower, analytic };
std::string to_string(BoundKind k);

struct BoundResult {
    double value = 0.0;
    BoundKind kind = BoundKind::upper;
    BoundMethod method = BoundMethod::global;
    std::optional<HierarchyParams> params;
    double gap = 0.0;
};

struct BuildOptions {
    // keep one variable block per non-decreasing tuple of first-party
    // outcomes, with permuted references rewritten through permutation
    // conjugation and stabilizer commutation imposed on each representative
    bool sorted_reduction = true;
    // additionally quotient by simultaneous relabeling of the message
    // alphabet (a relabeling of Alice's outcomes together with the matching
    // second-party index); value-preserving, used for the large table runs
    bool relabel_reduction = false;
    // impose partial-transpose positivity on the leading 1..k copies of each
    // representative (the hierarchy's stated constraint family). Setting this
    // to false additionally transposes every subset class that permuted index
    // tuples imply, which is a strictly tighter — still valid — relaxation;
    // the two coincide on the two-qubit ensembles but differ on the ququarts.
    bool ppt_first_l_only = true;
    // refuse builds whose summed embedded block entries exceed this cap
    long long size_cap = 20000000;
};

// Thrown when a build would exceed the size cap.
struct SizeCapExceeded : std::runtime_error {
    long long estimate;
    long long cap;
    SizeCapExceeded(long long est, long long c)
        : std::runtime_error("hierarchy build exceeds size cap: " + std::to_string(est) +
                             " embedded entries > cap " + std::to_string(c) +
                             " (raise the cap to proceed)"),
          estimate(est),
          cap(c) {}
};

// Thrown when a solve does not reach an optimal certificate.
struct SolveError : std::runtime_error {
    SolveStatus status;
    explicit SolveError(SolveStatus s)
        : std::runtime_error("solve failed with status " + to_string(s)), status(s) {}
};

// Non-decreasing representatives of {1..m}^k with their orbit sizes under
// entry permutation; orbit sizes sum to m^k.
std::vector<std::pair<std::vector<int>, long long>> orbit_representatives(int m, int k);

// An extremal POVM on C^d has at most d^2 non-zero elements, so hierarchy
// values saturate from m = d_A^2 on.
int saturation_cutoff(int d_A);

// A built hierarchy program together with the metadata needed to interpret
// solutions (variable block layout and the index reductions applied).
struct HierarchyBuild {
    ConicProgram program;
    bool nonadaptive = false;
    HierarchyParams params;
    BuildOptions options;
    StateEnsemble ensemble;  // after any direction swap
    int n = 0, d_A = 0, d_B = 0;

    struct Stored {
        std::vector<int> a_sorted;  // 0-based, non-decreasing, length k
        int lambda = -1;            // one-round only
        int b = -1;                 // one-round only
        std::vector<int> b_vec;     // non-adaptive only, length m, 0-based
        int handle = -1;
        std::string label;
        std::vector<std::vector<int>> glue_maps;  // self-symmetry index maps on d_A^k
    };
    std::vector<Stored> stored;
    std::map<std::vector<int>, int> lookup;  // canonical key -> stored index

    // Resolution of an arbitrary index onto a stored block: entry (i, j) of
    // the virtual block equals entry (amap[iA]*d_B + iB, amap[jA]*d_B + jB)
    // of the stored one. Cached; instances are meant for single-threaded use
    // (solve different builds concurrently instead).
    struct Resolved {
        int stored_id = -1;
        std::vector<int> amap;  // on d_A^k composite indices
    };
    const Resolved& resolve_1r(const std::vector<int>& a, int lambda, int b) const;
    const Resolved& resolve_na(const std::vector<int>& a, const std::vector<int>& bvec) const;

    // Dense matrix of a virtual block from solved values.
    MatrixXcd virtual_block(const std::map<std::string, HermitianOp>& values,
                            const Resolved& r) const;

    // Measurement operators assembled from solved block values.
    std::vector<HermitianOp> assemble_measurement(
        const std::map<std::string, HermitianOp>& values) const;

  private:
    mutable std::map<std::vector<int>, Resolved> resolve_cache_;
};

// Unrestricted discrimination SDP: POVM {M^lambda} maximizing the average
// success probability.
ConicProgram build_global_sdp(const StateEnsemble& e);
// Global SDP plus positivity of every partial transpose on the first party.
ConicProgram build_ppt_sdp(const StateEnsemble& e);

// One-round hierarchy at level k with message size m (direction handled by
// swapping the parties up front) and the non-adaptive analogue.
HierarchyBuild build_1r(const StateEnsemble& e, const HierarchyParams& p,
                        const BuildOptions& o = {});
HierarchyBuild build_na(const StateEnsemble& e, const HierarchyParams& p,
                        const BuildOptions& o = {});
ConicProgram build_1r_sdp(const StateEnsemble& e, const HierarchyParams& p);
ConicProgram build_na_sdp(const StateEnsemble& e, const HierarchyParams& p);

// Dispatch + solve + extraction; throws SolveError unless the solve reports
// an optimal certificate.
BoundResult upper_bound(const StateEnsemble& e, BoundMethod method,
                        const std::optional<HierarchyParams>& params, double eps,
                        const BuildOptions& build_opts = {}, SolveOptions solve_opts = {});

// upper_bound variant that also returns the solve report and build (for
// certificate extraction); build is null for global/ppt.
struct UpperBoundOutput {
    BoundResult bound;
    SolveReport report;
    std::shared_ptr<HierarchyBuild> build;
};
UpperBoundOutput upper_bound_full(const StateEnsemble& e, BoundMethod method,
                                  const std::optional<HierarchyParams>& params, double eps,
                                  const BuildOptions& build_opts = {},
                                  SolveOptions solve_opts = {});

}  // namespace locc

#endif
