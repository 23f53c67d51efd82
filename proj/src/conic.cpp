#include "locc/conic.hpp"

#include <algorithm>

#include <json.hpp>

namespace locc {

int ConicProgram::add_psd_block(const std::string& label, int complex_dim) {
    if (complex_dim < 1) throw std::invalid_argument("add_psd_block: dimension must be >= 1");
    if (by_label_.count(label))
        throw std::invalid_argument("add_psd_block: duplicate label '" + label + "'");
    blocks_.push_back({label, complex_dim});
    const int handle = static_cast<int>(blocks_.size()) - 1;
    by_label_[label] = handle;
    return handle;
}

void ConicProgram::check_ref(const EntryRef& ref) const {
    if (ref.block < 0 || ref.block >= static_cast<int>(blocks_.size()))
        throw std::invalid_argument("conic: coefficient references unknown block");
    const int d = blocks_[ref.block].dim;
    if (ref.row < 0 || ref.col >= d || ref.row > ref.col)
        throw std::invalid_argument("conic: entry reference out of range");
    if (ref.imag && ref.row == ref.col)
        throw std::invalid_argument("conic: diagonal entries are real");
}

void ConicProgram::add_equality(std::vector<Coeff> terms, double rhs) {
    for (const auto& t : terms) check_ref(t.ref);
    // merge duplicate entry references; duplicates are rejected per contract
    std::sort(terms.begin(), terms.end(), [](const Coeff& a, const Coeff& b) {
        return std::tie(a.ref.block, a.ref.row, a.ref.col, a.ref.imag) <
               std::tie(b.ref.block, b.ref.row, b.ref.col, b.ref.imag);
    });
    for (size_t i = 1; i < terms.size(); ++i) {
        const auto& p = terms[i - 1].ref;
        const auto& q = terms[i].ref;
        if (p.block == q.block && p.row == q.row && p.col == q.col && p.imag == q.imag)
            throw std::invalid_argument("add_equality: duplicate entry reference");
    }
    equalities_.push_back({std::move(terms), rhs});
}

void ConicProgram::add_equality_merged(std::vector<Coeff> terms, double rhs) {
    for (const auto& t : terms) check_ref(t.ref);
    std::sort(terms.begin(), terms.end(), [](const Coeff& a, const Coeff& b) {
        return std::tie(a.ref.block, a.ref.row, a.ref.col, a.ref.imag) <
               std::tie(b.ref.block, b.ref.row, b.ref.col, b.ref.imag);
    });
    std::vector<Coeff> merged;
    for (size_t i = 0; i < terms.size();) {
        Coeff acc = terms[i];
        size_t j = i + 1;
        while (j < terms.size()) {
            const auto& p = terms[j].ref;
            const auto& q = acc.ref;
            if (p.block == q.block && p.row == q.row && p.col == q.col && p.imag == q.imag) {
                acc.value += terms[j].value;
                ++j;
            } else {
                break;
            }
        }
        if (acc.value != 0.0) merged.push_back(acc);
        i = j;
    }
    if (merged.empty() && rhs == 0.0) return;
    equalities_.push_back({std::move(merged), rhs});
}

int ConicProgram::add_psd_image(int block, const SystemShape& shape,
                                const std::vector<int>& subsystems) {
    if (block < 0 || block >= static_cast<int>(blocks_.size()))
        throw std::invalid_argument("add_psd_image: unknown block");
    const int d = blocks_[block].dim;
    if (shape.total() != d)
        throw std::invalid_argument("add_psd_image: shape does not match block dimension");
    if (subsystems.empty()) return block;  // identity map, nothing beyond block PSD

    std::vector<char> flip(shape.factors(), 0);
    for (int s : subsystems) {
        if (s < 1 || s > shape.factors())
            throw std::invalid_argument("add_psd_image: subsystem index out of range");
        flip[s - 1] = 1;
    }

    std::string label = blocks_[block].label + "#pt";
    for (int s : subsystems) label += "_" + std::to_string(s);
    const int slack = add_psd_block(label, d);

    // strides of the factorization
    const int p = shape.factors();
    std::vector<long long> strides(p);
    long long acc = 1;
    for (int t = p - 1; t >= 0; --t) {
        strides[t] = acc;
        acc *= shape.dims[t];
    }
    auto transpose_pair = [&](int i, int j) {
        long long ri = 0, rj = 0;
        for (int t = 0; t < p; ++t) {
            const int di = static_cast<int>((i / strides[t]) % shape.dims[t]);
            const int dj = static_cast<int>((j / strides[t]) % shape.dims[t]);
            ri += (flip[t] ? dj : di) * strides[t];
            rj += (flip[t] ? di : dj) * strides[t];
        }
        return std::pair<int, int>(static_cast<int>(ri), static_cast<int>(rj));
    };

    // slack[(i,j)] == block[transpose_pair(i,j)] for the upper triangle
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            auto [si, sj] = transpose_pair(i, j);
            const bool swapped = si > sj;
            if (swapped) std::swap(si, sj);
            // real part
            add_equality({{EntryRef{slack, i, j, false}, 1.0},
                          {EntryRef{block, si, sj, false}, -1.0}},
                         0.0);
            if (i < j) {
                if (si == sj) {
                    // image entry is real: imaginary part of the slack vanishes
                    add_equality({{EntryRef{slack, i, j, true}, 1.0}}, 0.0);
                } else {
                    add_equality({{EntryRef{slack, i, j, true}, 1.0},
                                  {EntryRef{block, si, sj, true}, swapped ? 1.0 : -1.0}},
                                 0.0);
                }
            }
        }
    }
    return slack;
}

void ConicProgram::add_objective_term(const EntryRef& ref, double value) {
    check_ref(ref);
    objective_.push_back({ref, value});
}

void ConicProgram::append_trace_terms(std::vector<Coeff>& terms, int block, const MatrixXcd& h,
                                      double scale) {
    const int d = static_cast<int>(h.rows());
    for (int i = 0; i < d; ++i) {
        const double diag = h(i, i).real() * scale;
        if (diag != 0.0) terms.push_back({EntryRef{block, i, i, false}, diag});
        for (int j = i + 1; j < d; ++j) {
            const double re = 2.0 * h(i, j).real() * scale;
            const double im = 2.0 * h(i, j).imag() * scale;
            if (re != 0.0) terms.push_back({EntryRef{block, i, j, false}, re});
            if (im != 0.0) terms.push_back({EntryRef{block, i, j, true}, im});
        }
    }
}

void ConicProgram::add_objective_trace(int block, const MatrixXcd& h, double scale) {
    if (block < 0 || block >= static_cast<int>(blocks_.size()))
        throw std::invalid_argument("add_objective_trace: unknown block");
    if (h.rows() != blocks_[block].dim)
        throw std::invalid_argument("add_objective_trace: matrix dimension mismatch");
    append_trace_terms(objective_, block, h, scale);
}

int ConicProgram::block_handle(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end())
        throw std::invalid_argument("conic: unknown block label '" + label + "'");
    return it->second;
}

long long ConicProgram::embedded_entry_count() const {
    long long total = 0;
    for (const auto& b : blocks_) total += 4LL * b.dim * b.dim;
    return total;
}

std::string ConicProgram::dump() const {
    nlohmann::json j;
    j["sense"] = "maximize";
    j["blocks"] = nlohmann::json::array();
    for (const auto& b : blocks_) j["blocks"].push_back({{"label", b.label}, {"dim", b.dim}});
    auto coeffs_to_json = [](const std::vector<Coeff>& cs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : cs)
            arr.push_back({{"block", c.ref.block},
                           {"row", c.ref.row},
                           {"col", c.ref.col},
                           {"part", c.ref.imag ? "im" : "re"},
                           {"value", c.value}});
        return arr;
    };
    j["objective"] = coeffs_to_json(objective_);
    j["equalities"] = nlohmann::json::array();
    for (const auto& eq : equalities_)
        j["equalities"].push_back({{"terms", coeffs_to_json(eq.terms)}, {"rhs", eq.rhs}});
    return j.dump(2);
}

}  // namespace locc
