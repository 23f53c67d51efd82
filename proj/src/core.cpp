#include "locc/core.hpp"

#include <algorithm>
#include <numeric>

namespace locc {

namespace {

std::vector<int> to_zero_based(const std::vector<int>& subsystems, int nfactors,
                               const char* what) {
    std::vector<int> out;
    out.reserve(subsystems.size());
    for (int s : subsystems) {
        if (s < 1 || s > nfactors)
            throw std::out_of_range(std::string(what) + ": subsystem index " +
                                    std::to_string(s) + " out of range 1.." +
                                    std::to_string(nfactors));
        out.push_back(s - 1);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw std::invalid_argument(std::string(what) + ": repeated subsystem index");
    return out;
}

// Row-major strides for a dim list.
std::vector<long long> strides_of(const std::vector<int>& dims) {
    std::vector<long long> s(dims.size());
    long long acc = 1;
    for (int t = static_cast<int>(dims.size()) - 1; t >= 0; --t) {
        s[t] = acc;
        acc *= dims[t];
    }
    return s;
}

}  // namespace

int SystemShape::dim(int index1) const {
    if (index1 < 1 || index1 > factors())
        throw std::out_of_range("SystemShape::dim: index out of range");
    return dims[index1 - 1];
}

void SystemShape::validate() const {
    if (dims.empty()) throw std::invalid_argument("SystemShape: no factors");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("SystemShape: factor dimension < 1");
}

SystemShape SystemShape::concat(const SystemShape& other) const {
    std::vector<int> d = dims;
    d.insert(d.end(), other.dims.begin(), other.dims.end());
    return SystemShape(std::move(d));
}

SystemShape SystemShape::drop(const std::vector<int>& subsystems) const {
    auto traced = to_zero_based(subsystems, factors(), "SystemShape::drop");
    std::vector<int> d;
    for (int t = 0; t < factors(); ++t)
        if (!std::binary_search(traced.begin(), traced.end(), t)) d.push_back(dims[t]);
    if (d.empty()) d.push_back(1);  // full trace leaves a 1x1 operator
    return SystemShape(std::move(d));
}

Permutation Permutation::identity(int k) {
    std::vector<int> im(k);
    std::iota(im.begin(), im.end(), 1);
    return Permutation(std::move(im));
}

void Permutation::validate() const {
    const int k = size();
    if (k == 0) throw std::invalid_argument("Permutation: empty");
    std::vector<char> seen(k, 0);
    for (int v : images) {
        if (v < 1 || v > k || seen[v - 1])
            throw std::invalid_argument("Permutation: images are not a bijection");
        seen[v - 1] = 1;
    }
}

Permutation Permutation::inverse() const {
    std::vector<int> im(size());
    for (int i = 1; i <= size(); ++i) im[(*this)(i)-1] = i;
    return Permutation(std::move(im));
}

Permutation Permutation::compose(const Permutation& b) const {
    if (size() != b.size()) throw std::invalid_argument("Permutation::compose: size mismatch");
    std::vector<int> im(size());
    for (int i = 1; i <= size(); ++i) im[i - 1] = (*this)(b(i));
    return Permutation(std::move(im));
}

std::vector<Permutation> all_permutations(int k) {
    std::vector<int> im(k);
    std::iota(im.begin(), im.end(), 1);
    std::vector<Permutation> out;
    do {
        out.push_back(Permutation(im));
    } while (std::next_permutation(im.begin(), im.end()));
    return out;
}

HermitianOp::HermitianOp(SystemShape shape, MatrixXcd entries)
    : shape_(std::move(shape)), mat_(std::move(entries)) {
    const int n = shape_.total();
    if (mat_.rows() != n || mat_.cols() != n)
        throw std::invalid_argument("HermitianOp: matrix size does not match shape");
    const double asym = (mat_ - mat_.adjoint()).norm();
    if (asym > 1e-12 * std::max(1.0, mat_.norm()))
        throw std::invalid_argument("HermitianOp: entries are not Hermitian");
    mat_ = 0.5 * (mat_ + mat_.adjoint().eval());
}

HermitianOp HermitianOp::identity(const SystemShape& shape) {
    return HermitianOp(shape, MatrixXcd::Identity(shape.total(), shape.total()));
}

HermitianOp HermitianOp::zero(const SystemShape& shape) {
    return HermitianOp(shape, MatrixXcd::Zero(shape.total(), shape.total()));
}

HermitianOp HermitianOp::projector(const SystemShape& shape, const VectorXcd& v) {
    if (v.size() != shape.total())
        throw std::invalid_argument("HermitianOp::projector: vector size mismatch");
    return HermitianOp(shape, v * v.adjoint());
}

double HermitianOp::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(mat_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double HermitianOp::max_abs_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(mat_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

HermitianOp HermitianOp::plus(const HermitianOp& o) const {
    if (shape_ != o.shape_) throw std::invalid_argument("HermitianOp::plus: shape mismatch");
    return HermitianOp(shape_, mat_ + o.mat_);
}

HermitianOp HermitianOp::minus(const HermitianOp& o) const {
    if (shape_ != o.shape_) throw std::invalid_argument("HermitianOp::minus: shape mismatch");
    return HermitianOp(shape_, mat_ - o.mat_);
}

MatrixXcd partial_trace_matrix(const MatrixXcd& m, const std::vector<int>& dims,
                               const std::vector<int>& traced0) {
    const int p = static_cast<int>(dims.size());
    std::vector<char> is_traced(p, 0);
    for (int t : traced0) is_traced[t] = 1;

    std::vector<int> kept, traced;
    for (int t = 0; t < p; ++t) (is_traced[t] ? traced : kept).push_back(t);

    const auto strides = strides_of(dims);
    long long dk = 1, dt = 1;
    for (int t : kept) dk *= dims[t];
    for (int t : traced) dt *= dims[t];

    // flat offsets of every kept / traced digit combination
    auto offsets = [&](const std::vector<int>& factors, long long count) {
        std::vector<long long> off(count, 0);
        std::vector<int> digit(factors.size(), 0);
        for (long long i = 0; i < count; ++i) {
            long long o = 0;
            for (size_t t = 0; t < factors.size(); ++t) o += digit[t] * strides[factors[t]];
            off[i] = o;
            for (int t = static_cast<int>(factors.size()) - 1; t >= 0; --t) {
                if (++digit[t] < dims[factors[t]]) break;
                digit[t] = 0;
            }
        }
        return off;
    };
    const auto koff = offsets(kept, dk);
    const auto toff = offsets(traced, dt);

    MatrixXcd out = MatrixXcd::Zero(dk, dk);
    for (long long i = 0; i < dk; ++i)
        for (long long j = 0; j < dk; ++j) {
            Complex acc = 0.0;
            for (long long x = 0; x < dt; ++x) acc += m(koff[i] + toff[x], koff[j] + toff[x]);
            out(i, j) = acc;
        }
    return out;
}

MatrixXcd partial_transpose_matrix(const MatrixXcd& m, const std::vector<int>& dims,
                                   const std::vector<int>& transposed0) {
    const int p = static_cast<int>(dims.size());
    std::vector<char> flip(p, 0);
    for (int t : transposed0) flip[t] = 1;

    const auto strides = strides_of(dims);
    const long long n = m.rows();

    // Decompose, swap the flagged digits between row and column, recompose.
    MatrixXcd out(n, n);
    std::vector<int> di(p), dj(p);
    for (long long i = 0; i < n; ++i) {
        long long r = i;
        for (int t = 0; t < p; ++t) { di[t] = static_cast<int>(r / strides[t]); r %= strides[t]; }
        for (long long j = 0; j < n; ++j) {
            long long c = j;
            for (int t = 0; t < p; ++t) { dj[t] = static_cast<int>(c / strides[t]); c %= strides[t]; }
            long long ri = 0, rj = 0;
            for (int t = 0; t < p; ++t) {
                ri += (flip[t] ? dj[t] : di[t]) * strides[t];
                rj += (flip[t] ? di[t] : dj[t]) * strides[t];
            }
            out(ri, rj) = m(i, j);
        }
    }
    return out;
}

std::vector<int> permutation_index_map(int k, int d, const Permutation& sigma) {
    if (sigma.size() != k)
        throw std::invalid_argument("permutation_index_map: permutation size != k");
    long long n = 1;
    for (int t = 0; t < k; ++t) n *= d;
    const Permutation sinv = sigma.inverse();
    std::vector<int> map(n);
    std::vector<int> digit(k);
    for (long long I = 0; I < n; ++I) {
        long long r = I;
        for (int t = k - 1; t >= 0; --t) { digit[t] = static_cast<int>(r % d); r /= d; }
        long long img = 0;
        for (int t = 0; t < k; ++t) img = img * d + digit[sinv(t + 1) - 1];
        map[I] = static_cast<int>(img);
    }
    return map;
}

HermitianOp tensor(const HermitianOp& x, const HermitianOp& y) {
    return HermitianOp(x.shape().concat(y.shape()), kron(x.matrix(), y.matrix()));
}

HermitianOp partial_trace(const HermitianOp& x, const std::vector<int>& subsystems) {
    auto traced = to_zero_based(subsystems, x.shape().factors(), "partial_trace");
    return HermitianOp(x.shape().drop(subsystems),
                       partial_trace_matrix(x.matrix(), x.shape().dims, traced));
}

HermitianOp partial_transpose(const HermitianOp& x, const std::vector<int>& subsystems) {
    auto tr = to_zero_based(subsystems, x.shape().factors(), "partial_transpose");
    return HermitianOp(x.shape(), partial_transpose_matrix(x.matrix(), x.shape().dims, tr));
}

MatrixXcd permutation_unitary(int k, int d, const Permutation& sigma) {
    const auto map = permutation_index_map(k, d, sigma);
    const long long n = static_cast<long long>(map.size());
    MatrixXcd u = MatrixXcd::Zero(n, n);
    for (long long I = 0; I < n; ++I) u(map[I], I) = 1.0;
    return u;
}

MatrixXd real_embedding_matrix(const MatrixXcd& m) {
    const long long n = m.rows();
    MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = m.real();
    out.bottomRightCorner(n, n) = m.real();
    out.topRightCorner(n, n) = -m.imag();
    out.bottomLeftCorner(n, n) = m.imag();
    return out;
}

MatrixXd real_embedding(const HermitianOp& x) { return real_embedding_matrix(x.matrix()); }

MatrixXcd embedding_inverse(const MatrixXd& y) {
    const long long n2 = y.rows();
    if (n2 % 2 != 0 || y.cols() != n2)
        throw std::invalid_argument("embedding_inverse: matrix must be square of even size");
    const long long n = n2 / 2;
    MatrixXd p = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
    MatrixXd q = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
    p = 0.5 * (p + p.transpose()).eval();
    q = 0.5 * (q - q.transpose()).eval();
    return p.cast<Complex>() + Complex(0, 1) * q.cast<Complex>();
}

bool is_psd_matrix(const MatrixXcd& m, double tol) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return lmin >= -tol * scale;
}

bool is_psd(const HermitianOp& x, double tol) { return is_psd_matrix(x.matrix(), tol); }

bool is_povm_matrices(const std::vector<MatrixXcd>& ops, double tol) {
    if (ops.empty()) return false;
    const long long n = ops.front().rows();
    MatrixXcd sum = MatrixXcd::Zero(n, n);
    for (const auto& op : ops) {
        if (op.rows() != n || op.cols() != n)
            throw std::invalid_argument("is_povm: shape mismatch between elements");
        if (!is_psd_matrix(op, tol)) return false;
        sum += op;
    }
    return (sum - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= tol * std::max(1.0, 1.0);
}

bool is_povm(const std::vector<HermitianOp>& ops, double tol) {
    if (ops.empty()) return false;
    std::vector<MatrixXcd> ms;
    ms.reserve(ops.size());
    for (const auto& op : ops) {
        if (op.shape() != ops.front().shape())
            throw std::invalid_argument("is_povm: shape mismatch between elements");
        ms.push_back(op.matrix());
    }
    return is_povm_matrices(ms, tol);
}

}  // namespace locc
