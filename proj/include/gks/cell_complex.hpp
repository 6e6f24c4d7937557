#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gks/chain_complex.hpp"
#include "gks/rational.hpp"

namespace gks {

// Finite regular cell complex with signed incidences. Regularity is a
// construction guarantee of the generators below; finalize() verifies that
// the induced boundary squares to zero.
struct CellComplex {
    std::vector<uint8_t> cell_dim;
    std::vector<std::vector<std::pair<index_t, int8_t>>> facets;  // codim-1 faces with signs
    std::vector<std::vector<index_t>> cofacets;                   // derived
    std::vector<std::vector<index_t>> corners;                    // vertex ids per cell, sorted
    std::vector<std::vector<index_t>> faces;                      // all faces including self, sorted
    std::vector<std::vector<index_t>> stars;                      // all cofaces including self, sorted
    int top_dim = 0;

    // geometry tags (optional): exact chart coordinates per vertex and a
    // representative point; time lives in chart coordinates where present
    std::vector<std::vector<Rat>> vtx_chart;
    std::vector<std::vector<double>> vtx_point;
    std::vector<std::string> axis_names;

    size_t size() const { return cell_dim.size(); }

    index_t add_cell(uint8_t dim, std::vector<std::pair<index_t, int8_t>> fs = {}) {
        cell_dim.push_back(dim);
        facets.push_back(std::move(fs));
        top_dim = std::max(top_dim, static_cast<int>(dim));
        return static_cast<index_t>(cell_dim.size() - 1);
    }

    void finalize() {
        size_t n = size();
        cofacets.assign(n, {});
        corners.assign(n, {});
        faces.assign(n, {});
        for (index_t c = 0; c < n; ++c)
            for (auto& [f, s] : facets[c]) {
                if (cell_dim[f] + 1 != cell_dim[c]) throw std::logic_error("CellComplex: facet not codimension 1");
                cofacets[f].push_back(c);
            }
        // faces by increasing dimension
        std::vector<index_t> order(n);
        for (index_t c = 0; c < n; ++c) order[c] = c;
        std::stable_sort(order.begin(), order.end(),
                         [&](index_t a, index_t b) { return cell_dim[a] < cell_dim[b]; });
        for (index_t c : order) {
            std::vector<index_t> fs{c};
            for (auto& [f, s] : facets[c]) fs.insert(fs.end(), faces[f].begin(), faces[f].end());
            std::sort(fs.begin(), fs.end());
            fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
            faces[c] = std::move(fs);
            for (index_t f : faces[c])
                if (cell_dim[f] == 0) corners[c].push_back(f);
        }
        stars.assign(n, {});
        for (index_t c = 0; c < n; ++c)
            for (index_t f : faces[c]) stars[f].push_back(c);
        for (auto& s : stars) std::sort(s.begin(), s.end());
        check_boundary_squares_to_zero();
    }

    void check_boundary_squares_to_zero() const {
        for (index_t c = 0; c < size(); ++c) {
            std::map<index_t, int> acc;
            for (auto& [f, s] : facets[c])
                for (auto& [g, t] : facets[f]) acc[g] += s * t;
            for (auto& [g, v] : acc)
                if (v != 0) throw std::logic_error("CellComplex: boundary does not square to zero");
        }
    }

    int8_t incidence(index_t cell, index_t facet) const {
        for (auto& [f, s] : facets[cell])
            if (f == facet) return s;
        return 0;
    }

    int64_t euler_characteristic() const {
        int64_t chi = 0;
        for (index_t c = 0; c < size(); ++c) chi += cell_dim[c] % 2 == 0 ? 1 : -1;
        return chi;
    }

    std::vector<size_t> cells_by_dim() const {
        std::vector<size_t> n(top_dim + 1, 0);
        for (index_t c = 0; c < size(); ++c) n[cell_dim[c]]++;
        return n;
    }
};

enum class SetKind { open_set, closed_set, locally_closed };

// A set of cells of a fixed complex. Open sets are up-closed in the face
// poset (unions of open stars), closed sets down-closed, locally closed sets
// poset-convex.
struct CellSet {
    const CellComplex* X = nullptr;
    std::vector<char> member;
    SetKind kind = SetKind::locally_closed;

    CellSet() = default;
    CellSet(const CellComplex& x, SetKind k) : X(&x), member(x.size(), 0), kind(k) {}

    bool contains(index_t c) const { return member[c] != 0; }
    size_t count() const { return std::count(member.begin(), member.end(), 1); }
    bool empty() const { return count() == 0; }

    std::vector<index_t> cells() const {
        std::vector<index_t> out;
        for (index_t c = 0; c < member.size(); ++c)
            if (member[c]) out.push_back(c);
        return out;
    }
};

inline CellSet whole_complex(const CellComplex& X) {
    CellSet s(X, SetKind::closed_set);
    std::fill(s.member.begin(), s.member.end(), 1);
    return s;
}

inline CellSet empty_set(const CellComplex& X) { return CellSet(X, SetKind::closed_set); }

// Union of open stars of the seed cells.
inline CellSet up_closure(const CellComplex& X, const std::vector<char>& seeds, SetKind kind = SetKind::open_set) {
    CellSet s(X, kind);
    for (index_t c = 0; c < X.size(); ++c)
        for (index_t f : X.faces[c])
            if (seeds[f]) {
                s.member[c] = 1;
                break;
            }
    return s;
}

inline CellSet down_closure(const CellComplex& X, const std::vector<char>& seeds, SetKind kind = SetKind::closed_set) {
    CellSet s(X, kind);
    for (index_t c = 0; c < X.size(); ++c)
        if (seeds[c])
            for (index_t f : X.faces[c]) s.member[f] = 1;
    return s;
}

inline bool is_up_closed(const CellSet& s) {
    const auto& X = *s.X;
    for (index_t c = 0; c < X.size(); ++c)
        if (s.member[c])
            for (index_t cf : X.cofacets[c])
                if (!s.member[cf]) return false;
    return true;
}

inline bool is_down_closed(const CellSet& s) {
    const auto& X = *s.X;
    for (index_t c = 0; c < X.size(); ++c)
        if (s.member[c])
            for (auto& [f, sg] : X.facets[c])
                if (!s.member[f]) return false;
    return true;
}

// Locally closed = poset-convex: no gap cell strictly between two members.
inline bool is_locally_closed(const CellSet& s) {
    const auto& X = *s.X;
    CellSet up = up_closure(X, s.member);
    CellSet down = down_closure(X, s.member);
    for (index_t c = 0; c < X.size(); ++c)
        if (!s.member[c] && up.member[c] && down.member[c]) return false;
    return true;
}

inline CellSet complement(const CellSet& s) {
    CellSet out(*s.X, s.kind == SetKind::open_set    ? SetKind::closed_set
                      : s.kind == SetKind::closed_set ? SetKind::open_set
                                                      : SetKind::locally_closed);
    for (index_t c = 0; c < s.member.size(); ++c) out.member[c] = s.member[c] ? 0 : 1;
    return out;
}

inline CellSet set_closure(const CellSet& s) { return down_closure(*s.X, s.member); }

inline CellSet intersect(const CellSet& a, const CellSet& b, SetKind kind = SetKind::locally_closed) {
    CellSet out(*a.X, kind);
    for (index_t c = 0; c < a.member.size(); ++c) out.member[c] = a.member[c] && b.member[c];
    return out;
}

inline CellSet set_minus(const CellSet& a, const CellSet& b, SetKind kind = SetKind::locally_closed) {
    CellSet out(*a.X, kind);
    for (index_t c = 0; c < a.member.size(); ++c) out.member[c] = a.member[c] && !b.member[c];
    return out;
}

// Corner-certificate predicate: supplies an exact value g(vertex); the
// region is {g < 0} (strict, open) or {g <= 0} (closed). A cell's closed
// hull satisfies the bound iff all of its corner vertices do, which is the
// grid-alignment contract; callers that cannot provide exact corner values
// must snap (and validate) upstream.
struct CornerPredicate {
    std::function<Rat(index_t)> value;
    bool strict = true;
};

inline CellSet cells_where(const CellComplex& X, const CornerPredicate& p) {
    std::vector<char> seeds(X.size(), 0);
    Rat zero(0);
    for (index_t c = 0; c < X.size(); ++c) {
        if (X.corners[c].empty()) continue;  // no geometry on this cell
        bool ok = true;
        for (index_t v : X.corners[c]) {
            Rat g = p.value(v);
            if (p.strict ? !(g < zero) : !(g <= zero)) {
                ok = false;
                break;
            }
        }
        seeds[c] = ok ? 1 : 0;
    }
    if (p.strict) return up_closure(X, seeds, SetKind::open_set);
    CellSet s(X, SetKind::closed_set);
    s.member = seeds;
    return s;
}

// Cellular cochain complex of a locally closed cell set (extension by zero):
// basis in degree k = cells of S of dimension k sorted by id; the cochain
// differential keeps only cofacets inside S. For S closed this is C*(S); for
// S = X \ A with A closed it is the relative complex C*(X, A).
template <class F>
ChainComplex<F> cochain_complex(const F& field, const CellSet& S) {
    const CellComplex& X = *S.X;
    std::vector<std::vector<index_t>> by_dim(X.top_dim + 1);
    std::vector<index_t> pos(X.size(), 0);
    for (index_t c = 0; c < X.size(); ++c)
        if (S.member[c]) {
            pos[c] = static_cast<index_t>(by_dim[X.cell_dim[c]].size());
            by_dim[X.cell_dim[c]].push_back(c);
        }
    ChainComplex<F> cx(field);
    cx.lo = 0;
    for (int k = 0; k <= X.top_dim; ++k) cx.dims.push_back(static_cast<index_t>(by_dim[k].size()));
    for (int k = 0; k <= X.top_dim; ++k) {
        index_t rows = k + 1 <= X.top_dim ? cx.dims[k + 1] : 0;
        SparseMatrix<F> m(field, rows, cx.dims[k]);
        for (index_t j = 0; j < by_dim[k].size(); ++j) {
            index_t c = by_dim[k][j];
            for (index_t cf : X.cofacets[c])
                if (S.member[cf]) m.cols[j].emplace_back(pos[cf], field.from_int(X.incidence(cf, c)));
            std::sort(m.cols[j].begin(), m.cols[j].end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        cx.d.push_back(std::move(m));
    }
    cx.trim();
    return cx;
}

template <class F>
ChainComplex<F> cochain_complex(const F& field, const CellComplex& X) {
    return cochain_complex(field, whole_complex(X));
}

// C*(X, A) for A closed in X.
template <class F>
ChainComplex<F> relative_cochain(const F& field, const CellComplex& X, const CellSet& A) {
    if (!is_down_closed(A)) throw std::invalid_argument("relative_cochain: A is not closed");
    CellSet rest = set_minus(whole_complex(X), A, SetKind::open_set);
    return cochain_complex(field, rest);
}

// Simplicial cochain complex of the order complex of the sub-poset S: one
// vertex per cell of S, one k-simplex per chain of k+1 cells. Its
// realization is homotopy equivalent to the subspace |S|, which makes it the
// honest cochain model of a locally closed region.
template <class F>
ChainComplex<F> order_complex_cochain(const F& field, const CellSet& S) {
    const CellComplex& X = *S.X;
    std::vector<index_t> cells = S.cells();
    std::unordered_map<index_t, index_t> idx;
    for (index_t i = 0; i < cells.size(); ++i) idx[cells[i]] = i;
    // strict up-neighbors within S (transitive)
    std::vector<std::vector<index_t>> up(cells.size());
    for (index_t i = 0; i < cells.size(); ++i) {
        index_t c = cells[i];
        // collect members of S strictly above c by BFS over cofacets
        std::vector<index_t> stack = {c};
        std::vector<index_t> seen;
        std::unordered_map<index_t, char> vis;
        while (!stack.empty()) {
            index_t cur = stack.back();
            stack.pop_back();
            for (index_t cf : X.cofacets[cur]) {
                if (vis.count(cf)) continue;
                vis[cf] = 1;
                stack.push_back(cf);
                if (S.member[cf]) seen.push_back(cf);
            }
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        up[i] = std::move(seen);
    }
    // enumerate chains by DFS; chains stored per length
    std::vector<std::vector<std::vector<index_t>>> chains;  // [k][simplex] = cell ids ascending in poset
    std::vector<index_t> cur;
    std::function<void(index_t)> grow = [&](index_t i) {
        cur.push_back(cells[i]);
        size_t k = cur.size() - 1;
        if (chains.size() <= k) chains.resize(k + 1);
        chains[k].push_back(cur);
        for (index_t nxt : up[i]) grow(idx[nxt]);
        cur.pop_back();
    };
    for (index_t i = 0; i < cells.size(); ++i) grow(i);
    // index chains
    struct VecHash {
        size_t operator()(const std::vector<index_t>& v) const {
            size_t h = 1469598103934665603ull;
            for (auto x : v) h = (h ^ x) * 1099511628211ull;
            return h;
        }
    };
    std::vector<std::unordered_map<std::vector<index_t>, index_t, VecHash>> chain_idx(chains.size());
    for (size_t k = 0; k < chains.size(); ++k)
        for (index_t j = 0; j < chains[k].size(); ++j) chain_idx[k][chains[k][j]] = j;
    ChainComplex<F> cx(field);
    cx.lo = 0;
    for (size_t k = 0; k < chains.size(); ++k) cx.dims.push_back(static_cast<index_t>(chains[k].size()));
    for (size_t k = 0; k < chains.size(); ++k) {
        index_t rows = k + 1 < chains.size() ? cx.dims[k + 1] : 0;
        SparseMatrix<F> m(field, rows, cx.dims[k]);
        if (k + 1 < chains.size()) {
            // cochain differential = transpose of face-dropping with simplicial signs
            for (index_t j = 0; j < chains[k + 1].size(); ++j) {
                const auto& ch = chains[k + 1][j];
                std::vector<index_t> face(ch.size() - 1);
                for (size_t drop = 0; drop < ch.size(); ++drop) {
                    size_t w = 0;
                    for (size_t t = 0; t < ch.size(); ++t)
                        if (t != drop) face[w++] = ch[t];
                    auto it = chain_idx[k].find(face);
                    if (it == chain_idx[k].end()) throw std::logic_error("order_complex: missing face chain");
                    m.cols[it->second].emplace_back(j, field.from_int(drop % 2 == 0 ? 1 : -1));
                }
            }
            for (auto& col : m.cols)
                std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        cx.d.push_back(std::move(m));
    }
    cx.trim();
    return cx;
}

}  // namespace gks
