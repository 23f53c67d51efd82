#ifndef LOCC_SOLVE_STDFORM_HPP
#define LOCC_SOLVE_STDFORM_HPP

// Internal solver-facing representation of a ConicProgram.
//
// Every complex Hermitian block of dimension d becomes a real symmetric block
// of dimension D = 2d through the standard embedding [[Re,-Im],[Im,Re]].
// Block variables are stored in packed svec coordinates (upper triangle,
// column-major, off-diagonal entries scaled by sqrt(2)) so that Euclidean dot
// products of coordinate vectors equal trace inner products of the matrices.
// Functionals over complex entries are translated so that objective and
// constraint values refer to the complex program (the embedding doubles every
// trace, which the translation compensates).

#include <vector>

#include "locc/conic.hpp"

namespace locc::detail {

struct StdBlock {
    int cdim = 0;   // complex dimension
    int edim = 0;   // embedded dimension = 2 * cdim
    int offset = 0; // first svec coordinate
    int len = 0;    // edim * (edim + 1) / 2
};

struct StdRow {
    std::vector<int> idx;     // svec coordinates, strictly increasing
    std::vector<double> val;
    double rhs = 0.0;
};

struct StdForm {
    std::vector<StdBlock> blocks;
    int ncoord = 0;
    std::vector<StdRow> rows;      // deduplicated, max-abs normalized
    std::vector<double> cmax;      // dense objective (maximization sense)
    bool trivially_infeasible = false;
    int dropped_duplicates = 0;
};

inline int svec_index(int r, int c) { return c * (c + 1) / 2 + r; }  // r <= c

StdForm assemble(const ConicProgram& p);

// Dense symmetric matrix from the svec segment of x for one block.
Eigen::MatrixXd unpack_block(const StdForm& f, int blk, const Eigen::VectorXd& x);
void pack_block(const StdForm& f, int blk, const Eigen::MatrixXd& y, Eigen::VectorXd& x);

// Complex Hermitian matrix recovered from the embedded block.
MatrixXcd extract_complex_block(const StdForm& f, int blk, const Eigen::VectorXd& x);

// Matrix-convention triplets (r, c, a) with r <= c of the symmetric functional
// carried by a row restricted to one block; tr(A Y) = sum over triplets of
// (r == c ? a*Y_rr : 2*a*Y_rc).
struct BlockTriplet {
    int r, c;
    double a;
};
void row_block_triplets(const StdForm& f, const StdRow& row, int blk,
                        std::vector<BlockTriplet>& out);

}  // namespace locc::detail

#endif
