#include "solve_stdform.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace locc::detail {

namespace {

constexpr double kRoot2 = 1.4142135623730951;

// Accumulates one real linear functional over svec coordinates.
class RowAccum {
  public:
    void add(int coord, double v) { entries_.emplace_back(coord, v); }

    // Translate a coefficient on a complex Hermitian entry into embedded svec
    // coordinates (see the header note; the factor-2 of the embedding is
    // compensated here).
    void add_complex(const StdForm& f, const Coeff& c) {
        const auto& b = f.blocks[c.ref.block];
        const int d = b.cdim;
        const int i = c.ref.row, j = c.ref.col;
        const double v = c.value;
        if (i == j) {
            add(b.offset + svec_index(i, i), 0.5 * v);
            add(b.offset + svec_index(d + i, d + i), 0.5 * v);
        } else if (!c.ref.imag) {
            add(b.offset + svec_index(i, j), kRoot2 * 0.25 * v);
            add(b.offset + svec_index(d + i, d + j), kRoot2 * 0.25 * v);
        } else {
            add(b.offset + svec_index(j, d + i), kRoot2 * 0.25 * v);
            add(b.offset + svec_index(i, d + j), -kRoot2 * 0.25 * v);
        }
    }

    // Merge duplicates and drop negligible terms; when `normalize` is set,
    // rescale so that max |coeff| = 1 (rhs included). Returns false for an
    // empty row.
    bool finalize(double rhs, StdRow& out, bool normalize) {
        std::sort(entries_.begin(), entries_.end());
        out.idx.clear();
        out.val.clear();
        double maxabs = 0.0;
        for (size_t t = 0; t < entries_.size();) {
            const int coord = entries_[t].first;
            double v = 0.0;
            while (t < entries_.size() && entries_[t].first == coord) v += entries_[t++].second;
            if (v != 0.0) {
                out.idx.push_back(coord);
                out.val.push_back(v);
                maxabs = std::max(maxabs, std::abs(v));
            }
        }
        if (maxabs == 0.0) {
            out.rhs = rhs;
            return false;
        }
        const double scale = normalize ? 1.0 / maxabs : 1.0;
        std::vector<int> idx;
        std::vector<double> val;
        for (size_t t = 0; t < out.idx.size(); ++t) {
            if (std::abs(out.val[t]) > 1e-14 * maxabs) {
                idx.push_back(out.idx[t]);
                val.push_back(out.val[t] * scale);
            }
        }
        out.idx = std::move(idx);
        out.val = std::move(val);
        out.rhs = rhs * scale;
        return !out.idx.empty();
    }

  private:
    std::vector<std::pair<int, double>> entries_;
};

struct RowKeyHash {
    size_t operator()(const std::vector<long long>& key) const {
        size_t h = 1469598103934665603ull;
        for (long long k : key) {
            h ^= static_cast<size_t>(k);
            h *= 1099511628211ull;
        }
        return h;
    }
};

std::vector<long long> row_key(const StdRow& r) {
    std::vector<long long> key;
    key.reserve(2 * r.idx.size() + 1);
    for (size_t t = 0; t < r.idx.size(); ++t) {
        key.push_back(r.idx[t]);
        key.push_back(std::llround(r.val[t] * 1e12));
    }
    key.push_back(std::llround(r.rhs * 1e12));
    return key;
}

}  // namespace

StdForm assemble(const ConicProgram& p) {
    StdForm f;
    int offset = 0;
    for (const auto& b : p.blocks()) {
        StdBlock sb;
        sb.cdim = b.dim;
        sb.edim = 2 * b.dim;
        sb.offset = offset;
        sb.len = sb.edim * (sb.edim + 1) / 2;
        offset += sb.len;
        f.blocks.push_back(sb);
    }
    f.ncoord = offset;

    f.cmax.assign(f.ncoord, 0.0);
    {
        RowAccum acc;
        for (const auto& c : p.objective()) acc.add_complex(f, c);
        StdRow obj;
        acc.finalize(0.0, obj, /*normalize=*/false);
        for (size_t t = 0; t < obj.idx.size(); ++t) f.cmax[obj.idx[t]] = obj.val[t];
    }

    std::unordered_map<std::vector<long long>, int, RowKeyHash> seen;
    for (const auto& eq : p.equalities()) {
        RowAccum acc;
        for (const auto& c : eq.terms) acc.add_complex(f, c);
        StdRow row;
        if (!acc.finalize(eq.rhs, row, /*normalize=*/true)) {
            if (std::abs(row.rhs) > 1e-11) f.trivially_infeasible = true;
            continue;
        }
        auto key = row_key(row);
        if (seen.emplace(std::move(key), 1).second) {
            f.rows.push_back(std::move(row));
        } else {
            ++f.dropped_duplicates;
        }
    }
    return f;
}

Eigen::MatrixXd unpack_block(const StdForm& f, int blk, const Eigen::VectorXd& x) {
    const auto& b = f.blocks[blk];
    Eigen::MatrixXd y(b.edim, b.edim);
    int t = b.offset;
    for (int c = 0; c < b.edim; ++c)
        for (int r = 0; r <= c; ++r) {
            const double v = x[t++];
            if (r == c) {
                y(r, c) = v;
            } else {
                y(r, c) = v / kRoot2;
                y(c, r) = y(r, c);
            }
        }
    return y;
}

void pack_block(const StdForm& f, int blk, const Eigen::MatrixXd& y, Eigen::VectorXd& x) {
    const auto& b = f.blocks[blk];
    int t = b.offset;
    for (int c = 0; c < b.edim; ++c)
        for (int r = 0; r <= c; ++r) x[t++] = (r == c) ? y(r, c) : kRoot2 * y(r, c);
}

MatrixXcd extract_complex_block(const StdForm& f, int blk, const Eigen::VectorXd& x) {
    return embedding_inverse(unpack_block(f, blk, x));
}

void row_block_triplets(const StdForm& f, const StdRow& row, int blk,
                        std::vector<BlockTriplet>& out) {
    out.clear();
    const auto& b = f.blocks[blk];
    const int lo = b.offset, hi = b.offset + b.len;
    for (size_t t = 0; t < row.idx.size(); ++t) {
        const int coord = row.idx[t];
        if (coord < lo || coord >= hi) continue;
        const int local = coord - lo;
        // invert svec_index: find column c with c(c+1)/2 <= local
        int c = static_cast<int>((std::sqrt(8.0 * local + 1.0) - 1.0) / 2.0);
        while (svec_index(0, c + 1) <= local) ++c;
        while (svec_index(0, c) > local) --c;
        const int r = local - svec_index(0, c);
        const double w = row.val[t];
        out.push_back({r, c, (r == c) ? w : w / kRoot2});
    }
}

}  // namespace locc::detail
