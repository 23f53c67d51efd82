#ifndef LOCC_CONIC_HPP
#define LOCC_CONIC_HPP

#include <map>
#include <string>
#include <vector>

#include "locc/core.hpp"

namespace locc {

// A semidefinite program over complex Hermitian PSD blocks with real affine
// equality constraints and a real linear objective (sense: maximize).
//
// Entries of a block are addressed through the upper triangle: (row <= col)
// with separate real and imaginary parts; diagonal entries are real. A linear
// functional is a sparse list of coefficients over such entries.

struct EntryRef {
    int block = 0;  // block handle from add_psd_block
    int row = 0;    // 0-based, row <= col
    int col = 0;
    bool imag = false;  // imaginary part (requires row < col)
};

struct Coeff {
    EntryRef ref;
    double value = 0.0;
};

class ConicProgram {
  public:
    struct Block {
        std::string label;
        int dim = 0;  // complex dimension
    };
    struct Equality {
        std::vector<Coeff> terms;
        double rhs = 0.0;
    };

    // Registers a PSD block; returns its handle. Throws on duplicate label.
    int add_psd_block(const std::string& label, int complex_dim);

    // Appends sum_i terms[i].value * entry(terms[i].ref) == rhs. Duplicate
    // entry references are rejected.
    void add_equality(std::vector<Coeff> terms, double rhs);

    // Same, but merges duplicate references (summing their values) and drops
    // zero terms first; empty rows with zero rhs are skipped.
    void add_equality_merged(std::vector<Coeff> terms, double rhs);

    // Adds the constraint "partial transpose of `block` on `subsystems` is
    // PSD" by introducing a slack block tied entrywise to the image. `shape`
    // describes the tensor factorization of the block (total == block dim);
    // `subsystems` is 1-based. An empty subsystem set is the identity map and
    // adds nothing (the block is PSD already); returns the slack handle, or
    // `block` itself for the identity map.
    int add_psd_image(int block, const SystemShape& shape, const std::vector<int>& subsystems);

    // Objective accumulators (sense: maximize).
    void add_objective_term(const EntryRef& ref, double value);
    // Adds tr(h * X_block) to the objective.
    void add_objective_trace(int block, const MatrixXcd& h, double scale = 1.0);
    // Convenience for equalities: append tr(h * X_block) * scale to `terms`.
    static void append_trace_terms(std::vector<Coeff>& terms, int block, const MatrixXcd& h,
                                   double scale = 1.0);

    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<Equality>& equalities() const { return equalities_; }
    const std::vector<Coeff>& objective() const { return objective_; }
    int block_handle(const std::string& label) const;
    bool empty() const { return blocks_.empty(); }

    // Total real dimension of the embedded PSD blocks, sum over blocks of
    // (2 * dim)^2; used by size caps.
    long long embedded_entry_count() const;

    // Self-describing JSON dump for debugging (not a stable format).
    std::string dump() const;

  private:
    void check_ref(const EntryRef& ref) const;

    std::vector<Block> blocks_;
    std::vector<Equality> equalities_;
    std::vector<Coeff> objective_;
    std::map<std::string, int> by_label_;
};

}  // namespace locc

#endif
