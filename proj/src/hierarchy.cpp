#include "locc/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace locc {

namespace {

// ---- tuple helpers (0-based message values) ---------------------------------

std::vector<std::vector<int>> all_tuples(int m, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> t(k, 0);
    while (true) {
        out.push_back(t);
        int pos = k - 1;
        while (pos >= 0 && ++t[pos] == m) t[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

std::vector<std::vector<int>> sorted_tuples(int m, int k) {
    std::vector<std::vector<int>> out;
    if (k == 0) return {std::vector<int>{}};
    std::vector<int> t(k, 0);
    while (true) {
        out.push_back(t);
        int pos = k - 1;
        while (pos >= 0 && t[pos] == m - 1) --pos;
        if (pos < 0) break;
        const int v = t[pos] + 1;
        for (int q = pos; q < k; ++q) t[q] = v;
    }
    return out;
}

long long orbit_size(const std::vector<int>& sorted, int m) {
    const int k = static_cast<int>(sorted.size());
    long long fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    std::vector<int> counts(m, 0);
    for (int v : sorted) counts[v]++;
    for (int c : counts)
        for (int i = 2; i <= c; ++i) fact /= i;
    return fact;
}

std::vector<std::vector<int>> relabel_group(int m, bool enabled) {
    std::vector<int> pi(m);
    std::iota(pi.begin(), pi.end(), 0);
    std::vector<std::vector<int>> out;
    if (!enabled) return {pi};
    do {
        out.push_back(pi);
    } while (std::next_permutation(pi.begin(), pi.end()));
    return out;
}

std::vector<int> apply_relabel(const std::vector<int>& pi, const std::vector<int>& a) {
    std::vector<int> out(a.size());
    for (size_t t = 0; t < a.size(); ++t) out[t] = pi[a[t]];
    return out;
}

// slot permutation of a non-adaptive index vector: out[pi[a]] = bvec[a]
std::vector<int> apply_relabel_slots(const std::vector<int>& pi, const std::vector<int>& bvec) {
    std::vector<int> out(bvec.size());
    for (size_t a = 0; a < bvec.size(); ++a) out[pi[a]] = bvec[a];
    return out;
}

// sigma with sigma(sorted) = target, i.e. target[t] = sorted[sigma^{-1}(t)]
Permutation sorting_sigma(const std::vector<int>& sorted, const std::vector<int>& target) {
    const int k = static_cast<int>(sorted.size());
    std::vector<char> used(k, 0);
    std::vector<int> sinv(k);
    for (int t = 0; t < k; ++t) {
        int pick = -1;
        for (int i = 0; i < k; ++i)
            if (!used[i] && sorted[i] == target[t]) {
                pick = i;
                break;
            }
        if (pick < 0) throw std::logic_error("sorting_sigma: tuples are not rearrangements");
        used[pick] = 1;
        sinv[t] = pick + 1;
    }
    return Permutation(sinv).inverse();
}

// Accumulates one complex operator equality as real rows on Hermitian params.
class OpRows {
  public:
    explicit OpRows(ConicProgram& prog) : prog_(prog) {}

    void begin() {
        re_.clear();
        im_.clear();
    }
    // contribution coeff * X_block[(i, j)] to the current ambient entry
    void add(int block, int i, int j, double coeff) {
        const bool swap = i > j;
        const int r = swap ? j : i;
        const int c = swap ? i : j;
        re_.push_back({EntryRef{block, r, c, false}, coeff});
        if (r != c) im_.push_back({EntryRef{block, r, c, true}, swap ? -coeff : coeff});
    }
    void commit(bool diagonal, double rhs_re) {
        prog_.add_equality_merged(std::move(re_), rhs_re);
        if (!diagonal) prog_.add_equality_merged(std::move(im_), 0.0);
        re_.clear();
        im_.clear();
    }

  private:
    ConicProgram& prog_;
    std::vector<Coeff> re_, im_;
};

std::string tuple_label(const std::vector<int>& t) {
    std::string s;
    for (int v : t) s += std::to_string(v + 1);
    return s;
}

}  // namespace

std::string to_string(Direction d) { return d == Direction::AtoB ? "ab" : "ba"; }

std::string to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::global: return "global";
        case BoundMethod::ppt: return "ppt";
        case BoundMethod::oneround: return "1r";
        case BoundMethod::nonadaptive: return "na";
        case BoundMethod::seesaw_oneround: return "seesaw-1r";
        case BoundMethod::seesaw_nonadaptive: return "seesaw-na";
        case BoundMethod::analytic: return "analytic";
    }
    return "?";
}

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::upper: return "upper";
        case BoundKind::lower: return "lower";
        case BoundKind::analytic: return "analytic";
    }
    return "?";
}

std::vector<std::pair<std::vector<int>, long long>> orbit_representatives(int m, int k) {
    if (m < 1 || k < 1) throw std::invalid_argument("orbit_representatives: m, k >= 1");
    std::vector<std::pair<std::vector<int>, long long>> out;
    for (auto& t : sorted_tuples(m, k)) {
        std::vector<int> rep(t.size());
        for (size_t i = 0; i < t.size(); ++i) rep[i] = t[i] + 1;
        out.push_back({rep, orbit_size(t, m)});
    }
    return out;
}

int saturation_cutoff(int d_A) {
    if (d_A < 1) throw std::invalid_argument("saturation_cutoff: d_A >= 1");
    return d_A * d_A;
}

// ---- global / PPT ------------------------------------------------------------

ConicProgram build_global_sdp(const StateEnsemble& e) {
    e.validate();
    ConicProgram prog;
    const int d = e.d_A * e.d_B;
    std::vector<int> handles;
    for (int l = 0; l < e.size(); ++l)
        handles.push_back(prog.add_psd_block("M_" + std::to_string(l + 1), d));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            std::vector<Coeff> re, im;
            for (int h : handles) {
                re.push_back({EntryRef{h, i, j, false}, 1.0});
                if (i != j) im.push_back({EntryRef{h, i, j, true}, 1.0});
            }
            prog.add_equality(re, i == j ? 1.0 : 0.0);
            if (i != j) prog.add_equality(im, 0.0);
        }
    for (int l = 0; l < e.size(); ++l)
        prog.add_objective_trace(handles[l], e.items[l].state.matrix(), e.items[l].prior);
    return prog;
}

ConicProgram build_ppt_sdp(const StateEnsemble& e) {
    ConicProgram prog = build_global_sdp(e);
    const SystemShape sh({e.d_A, e.d_B});
    for (int l = 0; l < e.size(); ++l)
        prog.add_psd_image(prog.block_handle("M_" + std::to_string(l + 1)), sh, {1});
    return prog;
}

// ---- resolution ---------------------------------------------------------------

namespace {

// canonical (sorted tuple, b-part) over the relabel group, plus one relabeled
// (unsorted) tuple realizing the canonical key
struct Canonical {
    std::vector<int> sorted;
    int b = -1;
    std::vector<int> b_vec;
    std::vector<int> realization;  // relabeled tuple in original slot order
};

Canonical canonicalize_1r(const std::vector<std::vector<int>>& relabels,
                          const std::vector<int>& a, int b) {
    Canonical best;
    for (const auto& pi : relabels) {
        std::vector<int> cand = apply_relabel(pi, a);
        std::vector<int> sorted = cand;
        std::sort(sorted.begin(), sorted.end());
        const int cb = pi[b];
        if (best.sorted.empty() || std::tie(sorted, cb) < std::tie(best.sorted, best.b)) {
            best.sorted = std::move(sorted);
            best.b = cb;
            best.realization = std::move(cand);
        }
    }
    return best;
}

Canonical canonicalize_na(const std::vector<std::vector<int>>& relabels,
                          const std::vector<int>& a, const std::vector<int>& bvec) {
    Canonical best;
    for (const auto& pi : relabels) {
        std::vector<int> cand = apply_relabel(pi, a);
        std::vector<int> sorted = cand;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> cv = apply_relabel_slots(pi, bvec);
        if (best.sorted.empty() || std::tie(sorted, cv) < std::tie(best.sorted, best.b_vec)) {
            best.sorted = std::move(sorted);
            best.b_vec = std::move(cv);
            best.realization = std::move(cand);
        }
    }
    return best;
}

}  // namespace

const HierarchyBuild::Resolved& HierarchyBuild::resolve_1r(const std::vector<int>& a, int lambda,
                                                           int b) const {
    std::vector<int> raw = a;
    raw.push_back(lambda);
    raw.push_back(b);
    auto it = resolve_cache_.find(raw);
    if (it != resolve_cache_.end()) return it->second;

    const auto relabels = relabel_group(params.m, options.relabel_reduction);
    int dAk = 1;
    for (int t = 0; t < params.k; ++t) dAk *= d_A;
    Resolved r;
    if (!options.sorted_reduction) {
        auto found = lookup.find(raw);
        if (found == lookup.end()) throw std::logic_error("resolve_1r: unknown block");
        r.stored_id = found->second;
        r.amap.resize(dAk);
        std::iota(r.amap.begin(), r.amap.end(), 0);
    } else {
        Canonical c = canonicalize_1r(relabels, a, b);
        std::vector<int> key = c.sorted;
        key.push_back(lambda);
        key.push_back(c.b);
        auto found = lookup.find(key);
        if (found == lookup.end()) throw std::logic_error("resolve_1r: unknown block");
        r.stored_id = found->second;
        const Permutation sigma = sorting_sigma(c.sorted, c.realization);
        r.amap = permutation_index_map(params.k, d_A, sigma.inverse());
    }
    return resolve_cache_.emplace(std::move(raw), std::move(r)).first->second;
}

const HierarchyBuild::Resolved& HierarchyBuild::resolve_na(const std::vector<int>& a,
                                                           const std::vector<int>& bvec) const {
    std::vector<int> raw = a;
    raw.insert(raw.end(), bvec.begin(), bvec.end());
    auto it = resolve_cache_.find(raw);
    if (it != resolve_cache_.end()) return it->second;

    const auto relabels = relabel_group(params.m, options.relabel_reduction);
    int dAk = 1;
    for (int t = 0; t < params.k; ++t) dAk *= d_A;
    Resolved r;
    if (!options.sorted_reduction) {
        auto found = lookup.find(raw);
        if (found == lookup.end()) throw std::logic_error("resolve_na: unknown block");
        r.stored_id = found->second;
        r.amap.resize(dAk);
        std::iota(r.amap.begin(), r.amap.end(), 0);
    } else {
        Canonical c = canonicalize_na(relabels, a, bvec);
        std::vector<int> key = c.sorted;
        key.insert(key.end(), c.b_vec.begin(), c.b_vec.end());
        auto found = lookup.find(key);
        if (found == lookup.end()) throw std::logic_error("resolve_na: unknown block");
        r.stored_id = found->second;
        const Permutation sigma = sorting_sigma(c.sorted, c.realization);
        r.amap = permutation_index_map(params.k, d_A, sigma.inverse());
    }
    return resolve_cache_.emplace(std::move(raw), std::move(r)).first->second;
}

MatrixXcd HierarchyBuild::virtual_block(const std::map<std::string, HermitianOp>& values,
                                        const Resolved& r) const {
    const auto& st = stored[r.stored_id];
    auto it = values.find(st.label);
    if (it == values.end()) throw std::invalid_argument("virtual_block: missing value for " +
                                                        st.label);
    const MatrixXcd& src = it->second.matrix();
    const int dim = static_cast<int>(src.rows());
    MatrixXcd out(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const int mi = r.amap[i / d_B] * d_B + i % d_B;
        for (int j = 0; j < dim; ++j) {
            const int mj = r.amap[j / d_B] * d_B + j % d_B;
            out(i, j) = src(mi, mj);
        }
    }
    return out;
}

std::vector<HermitianOp> HierarchyBuild::assemble_measurement(
    const std::map<std::string, HermitianOp>& values) const {
    const int m = params.m, k = params.k;
    int dAk1 = 1;
    for (int t = 0; t < k - 1; ++t) dAk1 *= d_A;
    std::vector<int> shape_dims(k, d_A);
    shape_dims.push_back(d_B);
    std::vector<int> traced0;
    for (int t = 0; t < k - 1; ++t) traced0.push_back(t);

    const SystemShape mshape({d_A, d_B});
    std::vector<HermitianOp> out;
    for (int l = 0; l < n; ++l) {
        MatrixXcd acc = MatrixXcd::Zero(d_A * d_B, d_A * d_B);
        for (const auto& a : all_tuples(m, k)) {
            auto accumulate = [&](const Resolved& r) {
                MatrixXcd v = virtual_block(values, r);
                acc += traced0.empty() ? v : partial_trace_matrix(v, shape_dims, traced0);
            };
            if (!nonadaptive) {
                accumulate(resolve_1r(a, l, a[k - 1]));
            } else {
                for (const auto& bvec : all_tuples(n, m))
                    if (bvec[a[k - 1]] == l) accumulate(resolve_na(a, bvec));
            }
        }
        out.push_back(HermitianOp(mshape, acc / static_cast<double>(dAk1)));
    }
    return out;
}

// ---- hierarchy program builder ------------------------------------------------

namespace {

// self-symmetry index maps and spatial permutations of one stored block
void stabilizer_of(const std::vector<std::vector<int>>& relabels,
                   const std::vector<Permutation>& perms_k, int dA, int k,
                   const std::vector<int>& a_sorted, int b, const std::vector<int>& b_vec,
                   bool nonadaptive, std::vector<std::vector<int>>& maps_out,
                   std::vector<Permutation>& sigmas_out) {
    std::set<std::vector<int>> maps;
    sigmas_out.clear();
    for (const auto& pi : relabels) {
        if (!nonadaptive && pi[b] != b) continue;
        if (nonadaptive && apply_relabel_slots(pi, b_vec) != b_vec) continue;
        const std::vector<int> relabeled = apply_relabel(pi, a_sorted);
        {
            std::vector<int> sorted = relabeled;
            std::sort(sorted.begin(), sorted.end());
            if (sorted != a_sorted) continue;
        }
        for (const auto& sigma : perms_k) {
            const Permutation sinv = sigma.inverse();
            bool match = true;
            for (int t = 0; t < k && match; ++t)
                if (relabeled[t] != a_sorted[sinv(t + 1) - 1]) match = false;
            if (!match) continue;
            auto map = permutation_index_map(k, dA, sigma);
            if (maps.insert(std::move(map)).second) sigmas_out.push_back(sigma);
        }
    }
    maps_out.assign(maps.begin(), maps.end());
}

// entry-gluing equalities via union-find with sign tracking
void emit_gluing(ConicProgram& prog, int handle, int damb, int dB,
                 const std::vector<std::vector<int>>& glue_maps) {
    bool nontrivial = false;
    for (const auto& g : glue_maps) {
        for (size_t t = 0; t < g.size(); ++t)
            if (g[t] != static_cast<int>(t)) {
                nontrivial = true;
                break;
            }
        if (nontrivial) break;
    }
    if (!nontrivial) return;

    auto pid = [&](int i, int j, int part) { return (i * damb + j) * 2 + part; };
    const int nparam = damb * damb * 2;
    std::vector<int> parent(nparam, -1);
    std::vector<int> sign(nparam, 1);
    std::vector<char> zero(nparam, 0);
    std::function<std::pair<int, int>(int)> find = [&](int x) -> std::pair<int, int> {
        if (parent[x] < 0) return {x, 1};
        auto [r, s] = find(parent[x]);
        parent[x] = r;
        sign[x] *= s;
        return {r, sign[x]};
    };
    auto unite = [&](int x, int y, int s) {
        auto [rx, sx] = find(x);
        auto [ry, sy] = find(y);
        if (rx == ry) {
            if (sx * sy != s) zero[rx] = 1;
            return;
        }
        parent[ry] = rx;
        sign[ry] = s * sx * sy;
    };
    for (const auto& g : glue_maps) {
        for (int i = 0; i < damb; ++i) {
            const int gi = g[i / dB] * dB + i % dB;
            for (int j = i; j < damb; ++j) {
                const int gj = g[j / dB] * dB + j % dB;
                int a = gi, b2 = gj;
                const bool swap = a > b2;
                if (swap) std::swap(a, b2);
                if (a == i && b2 == j && !swap) continue;
                unite(pid(i, j, 0), pid(a, b2, 0), 1);
                if (i != j) unite(pid(i, j, 1), pid(a, b2, 1), swap ? -1 : 1);
            }
        }
    }
    for (int i = 0; i < damb; ++i)
        for (int j = i; j < damb; ++j)
            for (int part = 0; part < (i == j ? 1 : 2); ++part) {
                const int x = pid(i, j, part);
                auto [r, s] = find(x);
                const int ri = (r / 2) / damb, rj = (r / 2) % damb;
                const bool rim = (r % 2) == 1;
                if (zero[r] && x == r) {
                    prog.add_equality({{EntryRef{handle, ri, rj, rim}, 1.0}}, 0.0);
                    continue;
                }
                if (x == r || zero[r]) continue;
                prog.add_equality_merged({{EntryRef{handle, i, j, part == 1}, 1.0},
                                          {EntryRef{handle, ri, rj, rim},
                                           -static_cast<double>(s)}},
                                         0.0);
            }
}

// representatives of nonempty factor subsets of {1..k} under the stabilizer
std::vector<std::vector<int>> ppt_subset_classes(int k, const std::vector<Permutation>& sigmas) {
    std::vector<std::vector<int>> reps;
    std::set<unsigned> seen;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        if (seen.count(mask)) continue;
        std::set<unsigned> orbit{mask};
        std::vector<unsigned> queue{mask};
        while (!queue.empty()) {
            unsigned cur = queue.back();
            queue.pop_back();
            for (const auto& sigma : sigmas) {
                unsigned img = 0;
                for (int t = 0; t < k; ++t)
                    if (cur & (1u << t)) img |= (1u << (sigma(t + 1) - 1));
                if (orbit.insert(img).second) queue.push_back(img);
            }
        }
        for (unsigned o : orbit) seen.insert(o);
        if (*orbit.begin() == mask) {
            std::vector<int> subset;
            for (int t = 0; t < k; ++t)
                if (mask & (1u << t)) subset.push_back(t + 1);
            reps.push_back(subset);
        }
    }
    return reps;
}

void build_common(HierarchyBuild& B, const StateEnsemble& input, const HierarchyParams& p,
                  const BuildOptions& o, bool nonadaptive) {
    if (p.m < 1 || p.k < 1) throw std::invalid_argument("hierarchy: m and k must be >= 1");
    input.validate();
    B.nonadaptive = nonadaptive;
    B.params = p;
    B.options = o;
    B.ensemble = (p.direction == Direction::BtoA) ? swap_parties(input) : input;
    B.n = B.ensemble.size();
    B.d_A = B.ensemble.d_A;
    B.d_B = B.ensemble.d_B;

    const int m = p.m, k = p.k, n = B.n, dA = B.d_A, dB = B.d_B;
    int dAk = 1;
    for (int t = 0; t < k; ++t) dAk *= dA;
    const int damb = dAk * dB;
    const auto perms_k = all_permutations(k);
    const auto relabels = relabel_group(m, o.relabel_reduction);
    const bool reduce = o.sorted_reduction;

    // ---- enumerate stored blocks ---------------------------------------------
    struct Pending {
        std::vector<int> a_part;
        int lambda = -1, b = -1;
        std::vector<int> b_vec;
        std::vector<std::vector<int>> glue;
        std::vector<std::vector<int>> pt_subsets;
    };
    std::vector<Pending> pending;
    std::set<std::vector<int>> keys;

    const auto tuples = reduce ? sorted_tuples(m, k) : all_tuples(m, k);
    const auto bvecs = all_tuples(n, m);  // non-adaptive second index

    auto first_l_subsets = [&]() {
        std::vector<std::vector<int>> out;
        for (int l = 1; l <= k; ++l) {
            std::vector<int> first;
            for (int t = 1; t <= l; ++t) first.push_back(t);
            out.push_back(first);
        }
        return out;
    };

    if (!nonadaptive) {
        for (const auto& a : tuples)
            for (int l = 0; l < n; ++l)
                for (int b = 0; b < m; ++b) {
                    Pending pd;
                    if (reduce) {
                        Canonical c = canonicalize_1r(relabels, a, b);
                        pd.a_part = c.sorted;
                        pd.b = c.b;
                    } else {
                        pd.a_part = a;
                        pd.b = b;
                    }
                    pd.lambda = l;
                    std::vector<int> key = pd.a_part;
                    key.push_back(pd.lambda);
                    key.push_back(pd.b);
                    if (!keys.insert(key).second) continue;
                    if (reduce) {
                        std::vector<Permutation> sigmas;
                        stabilizer_of(relabels, perms_k, dA, k, pd.a_part, pd.b, {}, false,
                                      pd.glue, sigmas);
                        pd.pt_subsets =
                            o.ppt_first_l_only ? first_l_subsets() : ppt_subset_classes(k, sigmas);
                    } else {
                        pd.pt_subsets = first_l_subsets();
                    }
                    pending.push_back(std::move(pd));
                }
    } else {
        for (const auto& a : tuples)
            for (const auto& bvec : bvecs) {
                Pending pd;
                if (reduce) {
                    Canonical c = canonicalize_na(relabels, a, bvec);
                    pd.a_part = c.sorted;
                    pd.b_vec = c.b_vec;
                } else {
                    pd.a_part = a;
                    pd.b_vec = bvec;
                }
                std::vector<int> key = pd.a_part;
                key.insert(key.end(), pd.b_vec.begin(), pd.b_vec.end());
                if (!keys.insert(key).second) continue;
                if (reduce) {
                    std::vector<Permutation> sigmas;
                    stabilizer_of(relabels, perms_k, dA, k, pd.a_part, -1, pd.b_vec, true,
                                  pd.glue, sigmas);
                    pd.pt_subsets =
                        o.ppt_first_l_only ? first_l_subsets() : ppt_subset_classes(k, sigmas);
                } else {
                    pd.pt_subsets = first_l_subsets();
                }
                pending.push_back(std::move(pd));
            }
    }

    long long entries = 0;
    for (const auto& pd : pending)
        entries += (1 + static_cast<long long>(pd.pt_subsets.size())) * 4LL * damb * damb;
    if (entries > o.size_cap) throw SizeCapExceeded(entries, o.size_cap);

    // ---- create conic blocks, gluing, and partial-transpose slacks -----------
    std::vector<int> shape_dims(k, dA);
    shape_dims.push_back(dB);
    const SystemShape block_shape(shape_dims);
    for (auto& pd : pending) {
        HierarchyBuild::Stored st;
        st.a_sorted = pd.a_part;
        st.lambda = pd.lambda;
        st.b = pd.b;
        st.b_vec = pd.b_vec;
        st.label = "R_a" + tuple_label(pd.a_part);
        if (!nonadaptive)
            st.label += "_l" + std::to_string(pd.lambda + 1) + "_b" + std::to_string(pd.b + 1);
        else
            st.label += "_b" + tuple_label(pd.b_vec);
        st.handle = B.program.add_psd_block(st.label, damb);
        st.glue_maps = pd.glue;
        std::vector<int> key = pd.a_part;
        if (!nonadaptive) {
            key.push_back(pd.lambda);
            key.push_back(pd.b);
        } else {
            key.insert(key.end(), pd.b_vec.begin(), pd.b_vec.end());
        }
        B.lookup[key] = static_cast<int>(B.stored.size());
        B.stored.push_back(st);
        for (const auto& subset : pd.pt_subsets)
            B.program.add_psd_image(st.handle, block_shape, subset);
        emit_gluing(B.program, st.handle, damb, dB, pd.glue);
    }

    OpRows rows(B.program);
    auto mapped = [&](const HierarchyBuild::Resolved& r, int i) {
        return r.amap[i / dB] * dB + i % dB;
    };
    auto handle_of = [&](const HierarchyBuild::Resolved& r) {
        return B.stored[r.stored_id].handle;
    };

    // ---- first-party marginal condition --------------------------------------
    // sum_{a_1} R^{(a_1, tail)..} = (1_{A_1}/d_A) (x) sum_{a_1} Tr_{A_1} R^{(a_1, tail)..}
    {
        const auto tails = reduce ? sorted_tuples(m, k - 1) : all_tuples(m, k - 1);
        const int drest = (dAk / dA) * dB;  // composite of copies 2..k and B
        auto emit_for = [&](const std::vector<int>& tail, int lambda,
                            const std::vector<int>& bvec, int b) {
            std::vector<const HierarchyBuild::Resolved*> rs;
            for (int a1 = 0; a1 < m; ++a1) {
                std::vector<int> a{a1};
                a.insert(a.end(), tail.begin(), tail.end());
                rs.push_back(nonadaptive ? &B.resolve_na(a, bvec) : &B.resolve_1r(a, lambda, b));
            }
            for (int i = 0; i < damb; ++i) {
                const int p1 = i / drest;
                const int irest = i % drest;
                for (int j = i; j < damb; ++j) {
                    const int q1 = j / drest;
                    const int jrest = j % drest;
                    rows.begin();
                    for (const auto* r : rs)
                        rows.add(handle_of(*r), mapped(*r, i), mapped(*r, j), 1.0);
                    if (p1 == q1) {
                        for (const auto* r : rs)
                            for (int x = 0; x < dA; ++x)
                                rows.add(handle_of(*r), mapped(*r, x * drest + irest),
                                         mapped(*r, x * drest + jrest), -1.0 / dA);
                    }
                    rows.commit(i == j, 0.0);
                }
            }
        };
        if (!nonadaptive) {
            for (const auto& tail : tails)
                for (int l = 0; l < n; ++l)
                    for (int b = 0; b < m; ++b) emit_for(tail, l, {}, b);
        } else {
            for (const auto& tail : tails)
                for (const auto& bvec : bvecs) emit_for(tail, -1, bvec, -1);
        }
    }

    // ---- second-party marginal condition --------------------------------------
    if (!nonadaptive) {
        // imposed at the canonical message b = 1 plus equality of the
        // left-hand sides across the remaining m - 1 messages
        for (const auto& a : tuples) {
            std::vector<std::vector<const HierarchyBuild::Resolved*>> rs(m);
            for (int b = 0; b < m; ++b)
                for (int l = 0; l < n; ++l) rs[b].push_back(&B.resolve_1r(a, l, b));
            for (int i = 0; i < damb; ++i) {
                const int iA = i / dB, iB = i % dB;
                for (int j = i; j < damb; ++j) {
                    const int jA = j / dB, jB = j % dB;
                    rows.begin();
                    for (const auto* r : rs[0])
                        rows.add(handle_of(*r), mapped(*r, i), mapped(*r, j), 1.0);
                    if (iB == jB) {
                        for (int b = 0; b < m; ++b)
                            for (const auto* r : rs[b])
                                for (int x = 0; x < dB; ++x)
                                    rows.add(handle_of(*r), mapped(*r, iA * dB + x),
                                             mapped(*r, jA * dB + x), -1.0 / (m * dB));
                    }
                    rows.commit(i == j, 0.0);
                    for (int b = 1; b < m; ++b) {
                        rows.begin();
                        for (const auto* r : rs[b])
                            rows.add(handle_of(*r), mapped(*r, i), mapped(*r, j), 1.0);
                        for (const auto* r : rs[0])
                            rows.add(handle_of(*r), mapped(*r, i), mapped(*r, j), -1.0);
                        rows.commit(i == j, 0.0);
                    }
                }
            }
        }
    } else {
        for (const auto& a : tuples) {
            std::vector<const HierarchyBuild::Resolved*> rs;
            for (const auto& bvec : bvecs) rs.push_back(&B.resolve_na(a, bvec));
            for (int i = 0; i < damb; ++i) {
                const int iA = i / dB, iB = i % dB;
                for (int j = i; j < damb; ++j) {
                    const int jA = j / dB, jB = j % dB;
                    rows.begin();
                    for (const auto* r : rs)
                        rows.add(handle_of(*r), mapped(*r, i), mapped(*r, j), 1.0);
                    if (iB == jB) {
                        for (const auto* r : rs)
                            for (int x = 0; x < dB; ++x)
                                rows.add(handle_of(*r), mapped(*r, iA * dB + x),
                                         mapped(*r, jA * dB + x), -1.0 / dB);
                    }
                    rows.commit(i == j, 0.0);
                }
            }
        }
    }

    // ---- copy-permutation symmetry (explicit rows for the unreduced build) ----
    if (!reduce && k > 1) {
        for (const auto& sigma : perms_k) {
            bool identity = true;
            for (int t = 1; t <= k; ++t)
                if (sigma(t) != t) identity = false;
            if (identity) continue;
            const auto amap = permutation_index_map(k, dA, sigma);
            const Permutation sinv = sigma.inverse();
            auto emit_sym = [&](const std::vector<int>& a, int lambda,
                                const std::vector<int>& bvec, int b) {
                std::vector<int> sa(k);
                for (int t = 0; t < k; ++t) sa[t] = a[sinv(t + 1) - 1];
                const auto& r0 = nonadaptive ? B.resolve_na(a, bvec) : B.resolve_1r(a, lambda, b);
                const auto& r1 =
                    nonadaptive ? B.resolve_na(sa, bvec) : B.resolve_1r(sa, lambda, b);
                for (int i = 0; i < damb; ++i) {
                    const int gi = amap[i / dB] * dB + i % dB;
                    for (int j = i; j < damb; ++j) {
                        const int gj = amap[j / dB] * dB + j % dB;
                        rows.begin();
                        rows.add(handle_of(r1), mapped(r1, gi), mapped(r1, gj), 1.0);
                        rows.add(handle_of(r0), mapped(r0, i), mapped(r0, j), -1.0);
                        rows.commit(i == j, 0.0);
                    }
                }
            };
            for (const auto& a : tuples) {
                if (!nonadaptive) {
                    for (int l = 0; l < n; ++l)
                        for (int b = 0; b < m; ++b) emit_sym(a, l, {}, b);
                } else {
                    for (const auto& bvec : bvecs) emit_sym(a, -1, bvec, -1);
                }
            }
        }
    }

    // ---- normalization ---------------------------------------------------------
    {
        const double rhs = static_cast<double>(dAk) * dB;
        auto add_norm_row = [&](int b_fixed) {
            std::map<std::pair<int, int>, double> acc;
            auto add_trace = [&](const HierarchyBuild::Resolved& r) {
                for (int i = 0; i < damb; ++i) acc[{handle_of(r), mapped(r, i)}] += 1.0;
            };
            for (const auto& a : all_tuples(m, k)) {
                if (!nonadaptive) {
                    for (int l = 0; l < n; ++l) add_trace(B.resolve_1r(a, l, b_fixed));
                } else {
                    for (const auto& bvec : bvecs) add_trace(B.resolve_na(a, bvec));
                }
            }
            std::vector<Coeff> terms;
            for (const auto& [key, v] : acc)
                terms.push_back({EntryRef{key.first, key.second, key.second, false}, v});
            B.program.add_equality(terms, rhs);
        };
        if (!nonadaptive) {
            for (int b = 0; b < m; ++b) add_norm_row(b);
        } else {
            add_norm_row(-1);
        }
    }

    // ---- objective --------------------------------------------------------------
    {
        const int dAk1 = dAk / dA;
        const int dloc = dA * dB;
        auto add_obj = [&](const HierarchyBuild::Resolved& r, int lambda) {
            const MatrixXcd& rho = B.ensemble.items[lambda].state.matrix();
            const double scale = B.ensemble.items[lambda].prior / dAk1;
            // tr[(1 (x) rho) R_virtual]: block-diagonal over the leading copies
            for (int rest = 0; rest < dAk1; ++rest) {
                const int base = rest * dloc;
                for (int u = 0; u < dloc; ++u) {
                    const int i = base + u;
                    const int mi = mapped(r, i);
                    const double hd = rho(u, u).real();
                    if (hd != 0.0)
                        B.program.add_objective_term(EntryRef{handle_of(r), mi, mi, false},
                                                     hd * scale);
                    for (int v = u + 1; v < dloc; ++v) {
                        const Complex hv = rho(u, v);
                        if (hv == Complex(0, 0)) continue;
                        const int j = base + v;
                        int a2 = mi, b2 = mapped(r, j);
                        const bool swap = a2 > b2;
                        if (swap) std::swap(a2, b2);
                        B.program.add_objective_term(EntryRef{handle_of(r), a2, b2, false},
                                                     2.0 * hv.real() * scale);
                        B.program.add_objective_term(EntryRef{handle_of(r), a2, b2, true},
                                                     (swap ? -2.0 : 2.0) * hv.imag() * scale);
                    }
                }
            }
        };
        for (const auto& a : all_tuples(m, k)) {
            if (!nonadaptive) {
                for (int l = 0; l < n; ++l) add_obj(B.resolve_1r(a, l, a[k - 1]), l);
            } else {
                for (const auto& bvec : bvecs) add_obj(B.resolve_na(a, bvec), bvec[a[k - 1]]);
            }
        }
    }
}

}  // namespace

HierarchyBuild build_1r(const StateEnsemble& e, const HierarchyParams& p, const BuildOptions& o) {
    HierarchyBuild B;
    build_common(B, e, p, o, false);
    return B;
}

HierarchyBuild build_na(const StateEnsemble& e, const HierarchyParams& p, const BuildOptions& o) {
    HierarchyBuild B;
    build_common(B, e, p, o, true);
    return B;
}

ConicProgram build_1r_sdp(const StateEnsemble& e, const HierarchyParams& p) {
    HierarchyBuild b = build_1r(e, p);
    return std::move(b.program);
}

ConicProgram build_na_sdp(const StateEnsemble& e, const HierarchyParams& p) {
    HierarchyBuild b = build_na(e, p);
    return std::move(b.program);
}

UpperBoundOutput upper_bound_full(const StateEnsemble& e, BoundMethod method,
                                  const std::optional<HierarchyParams>& params, double eps,
                                  const BuildOptions& build_opts, SolveOptions solve_opts) {
    UpperBoundOutput out;
    solve_opts.eps = eps;
    switch (method) {
        case BoundMethod::global:
            out.report = solve(build_global_sdp(e), solve_opts);
            break;
        case BoundMethod::ppt:
            out.report = solve(build_ppt_sdp(e), solve_opts);
            break;
        case BoundMethod::oneround: {
            if (!params) throw std::invalid_argument("upper_bound: oneround needs params");
            out.build = std::make_shared<HierarchyBuild>(build_1r(e, *params, build_opts));
            out.report = solve(out.build->program, solve_opts);
            break;
        }
        case BoundMethod::nonadaptive: {
            if (!params) throw std::invalid_argument("upper_bound: nonadaptive needs params");
            out.build = std::make_shared<HierarchyBuild>(build_na(e, *params, build_opts));
            out.report = solve(out.build->program, solve_opts);
            break;
        }
        default:
            throw std::invalid_argument("upper_bound: not an upper-bound method");
    }
    if (out.report.status != SolveStatus::optimal) throw SolveError(out.report.status);
    out.bound.value = std::max(0.0, out.report.primal_value);
    out.bound.kind = BoundKind::upper;
    out.bound.method = method;
    out.bound.params = params;
    out.bound.gap = out.report.gap;
    return out;
}

BoundResult upper_bound(const StateEnsemble& e, BoundMethod method,
                        const std::optional<HierarchyParams>& params, double eps,
                        const BuildOptions& build_opts, SolveOptions solve_opts) {
    return upper_bound_full(e, method, params, eps, build_opts, solve_opts).bound;
}

}  // namespace locc
