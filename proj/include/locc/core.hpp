#ifndef LOCC_CORE_HPP
#define LOCC_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Hermitian linear algebra on multipartite tensor spaces: tensor products,
// partial trace / partial transpose, symmetric-group unitaries, PSD and POVM
// tests, and the complex-to-real embedding used at the solver boundary.
//
// Subsystem indices are 1-based throughout the public interface and refer to
// the order of the factors in a SystemShape.

namespace locc {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Ordered local dimensions of the tensor factors of a finite-dimensional space.
struct SystemShape {
    std::vector<int> dims;

    SystemShape() = default;
    explicit SystemShape(std::vector<int> d) : dims(std::move(d)) { validate(); }
    static SystemShape single(int d) { return SystemShape{{d}}; }

    int factors() const { return static_cast<int>(dims.size()); }
    int total() const {
        long long t = 1;
        for (int d : dims) t *= d;
        return static_cast<int>(t);
    }
    int dim(int index1) const;  // 1-based factor dimension
    void validate() const;

    bool operator==(const SystemShape& o) const { return dims == o.dims; }
    bool operator!=(const SystemShape& o) const { return !(*this == o); }

    // Shape of the tensor product [this, other].
    SystemShape concat(const SystemShape& other) const;
    // Shape after removing the (1-based) factors in `subsystems`.
    SystemShape drop(const std::vector<int>& subsystems) const;
};

// A bijection sigma on {1,...,k}; images[i] = sigma(i+1), values 1-based.
struct Permutation {
    std::vector<int> images;

    Permutation() = default;
    explicit Permutation(std::vector<int> im) : images(std::move(im)) { validate(); }
    static Permutation identity(int k);

    int size() const { return static_cast<int>(images.size()); }
    int operator()(int i1) const { return images.at(i1 - 1); }
    void validate() const;

    Permutation inverse() const;
    // (a.compose(b))(x) = a(b(x))
    Permutation compose(const Permutation& b) const;
    bool operator==(const Permutation& o) const { return images == o.images; }
};

// Enumerate all k! permutations of {1..k} in lexicographic order.
std::vector<Permutation> all_permutations(int k);

// A complex Hermitian operator together with the tensor-factor layout of the
// space it acts on. Construction enforces Hermiticity up to a relative
// tolerance of 1e-12 times the Frobenius norm (the stored matrix is the
// Hermitian average).
class HermitianOp {
  public:
    HermitianOp() = default;
    HermitianOp(SystemShape shape, MatrixXcd entries);

    static HermitianOp identity(const SystemShape& shape);
    static HermitianOp zero(const SystemShape& shape);
    // Rank-1 projector |v><v| (v need not be normalized).
    static HermitianOp projector(const SystemShape& shape, const VectorXcd& v);

    const SystemShape& shape() const { return shape_; }
    const MatrixXcd& matrix() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

    double trace() const { return mat_.trace().real(); }
    double norm() const { return mat_.norm(); }  // Frobenius
    double min_eigenvalue() const;
    double max_abs_eigenvalue() const;

    HermitianOp scaled(double s) const { return HermitianOp(shape_, s * mat_); }
    HermitianOp plus(const HermitianOp& o) const;
    HermitianOp minus(const HermitianOp& o) const;

  private:
    SystemShape shape_;
    MatrixXcd mat_;
};

// --- expression-level helpers on plain Eigen matrices -----------------------

// Kronecker product.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = decltype(typename DerivedA::Scalar{} * typename DerivedB::Scalar{});
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Partial trace over the 0-based factor set `traced` of a matrix on `dims`.
MatrixXcd partial_trace_matrix(const MatrixXcd& m, const std::vector<int>& dims,
                               const std::vector<int>& traced0);
// Partial transpose on the 0-based factor set `transposed0`.
MatrixXcd partial_transpose_matrix(const MatrixXcd& m, const std::vector<int>& dims,
                                   const std::vector<int>& transposed0);

// Index map of the permutation unitary on (C^d)^{tensor k}: basis vector
// |i_1..i_k> is sent to basis vector at index map[I].
std::vector<int> permutation_index_map(int k, int d, const Permutation& sigma);

// --- typed operations --------------------------------------------------------

HermitianOp tensor(const HermitianOp& x, const HermitianOp& y);

// Partial trace over 1-based subsystem indices; the result lives on the
// remaining factors in their original order. Full trace gives a 1x1 operator.
HermitianOp partial_trace(const HermitianOp& x, const std::vector<int>& subsystems);

// Partial transpose of the named 1-based subsystems; involutive and
// trace-preserving.
HermitianOp partial_transpose(const HermitianOp& x, const std::vector<int>& subsystems);

// The standard unitary representation of S_k on (C^d)^{tensor k}. The result
// is a d^k-dimensional permutation matrix (not Hermitian in general; it shares
// the dense complex storage of HermitianOp entries).
MatrixXcd permutation_unitary(int k, int d, const Permutation& sigma);

// Real symmetric embedding [[Re x, -Im x], [Im x, Re x]] of doubled dimension;
// x is PSD iff the embedding is PSD and each eigenvalue of x appears twice.
MatrixXd real_embedding(const HermitianOp& x);
MatrixXd real_embedding_matrix(const MatrixXcd& m);
// Inverse of the embedding: averages the structured parts back to a complex
// matrix (exact on embedded inputs, a projection otherwise).
MatrixXcd embedding_inverse(const MatrixXd& y);

// lambda_min(x) >= -tol * max(1, ||x||) with the spectral norm.
bool is_psd(const HermitianOp& x, double tol);
bool is_psd_matrix(const MatrixXcd& m, double tol);

// Every element PSD and the elements sum to the identity within tol.
bool is_povm(const std::vector<HermitianOp>& ops, double tol);
bool is_povm_matrices(const std::vector<MatrixXcd>& ops, double tol);

}  // namespace locc

#endif
