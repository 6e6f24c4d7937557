#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "gks/cell_complex.hpp"
#include "gks/chain_complex.hpp"
#include "gks/small_linalg.hpp"

namespace gks {

// ---------------------------------------------------------------------------
// Cellular sheaves as bounded complexes of elementary summands.
//
// Working representation: every summand is the constant sheaf on the open
// star of a cell (the projective elementary sheaves of the face poset),
// placed in some degree. A map of summands K_{star(s)} -> K_{star(t)} exists
// iff t <= s and is a scalar. Constant sheaves on general locally closed
// sets enter through resolve_constant, which replaces them by a
// quasi-isomorphic complex of star summands; Hom, sections, stalks, cones
// and slices are then chain-level constructions on this shape.
// ---------------------------------------------------------------------------

template <class F>
struct CellularSheaf {
    using scalar = typename F::scalar;

    const CellComplex* X = nullptr;
    F field;

    struct Summand {
        index_t cell;  // summand = constant sheaf on star(cell)
        int degree;
    };
    std::vector<Summand> gens;
    // differential: per source gen, entries (target gen, coeff); target degree
    // = source degree + 1, target cell a face of the source cell
    std::vector<std::vector<std::pair<index_t, scalar>>> dcols;

    size_t size() const { return gens.size(); }

    int lo_degree() const {
        int lo = 0;
        for (auto& g : gens) lo = std::min(lo, g.degree);
        return lo;
    }
    int hi_degree() const {
        int hi = 0;
        for (auto& g : gens) hi = std::max(hi, g.degree);
        return hi;
    }

    void validate() const {
        const CellComplex& cx = *X;
        for (index_t i = 0; i < gens.size(); ++i)
            for (auto& [j, c] : dcols[i]) {
                if (gens[j].degree != gens[i].degree + 1) throw std::logic_error("CellularSheaf: differential degree");
                if (!std::binary_search(cx.faces[gens[i].cell].begin(), cx.faces[gens[i].cell].end(),
                                        gens[j].cell))
                    throw std::logic_error("CellularSheaf: differential violates face condition");
            }
        for (index_t i = 0; i < gens.size(); ++i) {
            std::map<index_t, scalar> acc;
            for (auto& [j, c] : dcols[i])
                for (auto& [k, c2] : dcols[j]) {
                    auto& slot = acc.try_emplace(k, field.zero()).first->second;
                    slot = field.add(slot, field.mul(c, c2));
                }
            for (auto& [k, v] : acc)
                if (!field.is_zero(v)) throw std::logic_error("CellularSheaf: d∘d != 0");
        }
    }
};

// Degree-d morphism: a chain map source -> target[d], stored as entry pairs.
template <class F>
struct SheafMorphism {
    using scalar = typename F::scalar;
    const CellularSheaf<F>* source = nullptr;
    const CellularSheaf<F>* target = nullptr;
    int degree = 0;
    std::vector<std::tuple<index_t, index_t, scalar>> entries;

    void validate() const {
        const F& field = source->field;
        const CellComplex& cx = *source->X;
        for (auto& [i, j, c] : entries) {
            if (target->gens[j].degree != source->gens[i].degree + degree)
                throw std::logic_error("SheafMorphism: degree mismatch");
            if (!std::binary_search(cx.faces[source->gens[i].cell].begin(),
                                    cx.faces[source->gens[i].cell].end(), target->gens[j].cell))
                throw std::logic_error("SheafMorphism: face condition");
        }
        // chain map: d_G phi - (-1)^degree phi d_F = 0
        std::map<std::pair<index_t, index_t>, scalar> acc;
        auto bump = [&](index_t a, index_t b, const scalar& v) {
            auto& s = acc.try_emplace(std::make_pair(a, b), field.zero()).first->second;
            s = field.add(s, v);
        };
        bool odd = ((degree % 2) + 2) % 2 == 1;
        std::vector<std::vector<std::pair<index_t, scalar>>> phi_of(source->gens.size());
        for (auto& [i, j, c] : entries) phi_of[i].emplace_back(j, c);
        for (index_t i = 0; i < source->gens.size(); ++i) {
            for (auto& [j, c] : phi_of[i])
                for (auto& [j2, c2] : target->dcols[j]) bump(i, j2, field.mul(c, c2));
            for (auto& [i2, c] : source->dcols[i])
                for (auto& [j, c2] : phi_of[i2]) {
                    auto term = field.mul(c, c2);
                    bump(i, j, odd ? term : field.neg(term));
                }
        }
        for (auto& [key, v] : acc)
            if (!field.is_zero(v)) throw std::logic_error("SheafMorphism: not a chain map");
    }
};

// (F[k])^i = F^{i+k}: degrees drop by k, differentials pick up (-1)^k.
template <class F>
CellularSheaf<F> shift_sheaf(const CellularSheaf<F>& A, int k) {
    CellularSheaf<F> out = A;
    for (auto& g : out.gens) g.degree -= k;
    if (((k % 2) + 2) % 2 == 1)
        for (auto& col : out.dcols)
            for (auto& e : col) e.second = A.field.neg(e.second);
    return out;
}

// Cone of a degree-0 morphism: A-gens shifted down by one, B-gens unchanged,
// differential (-d_A, phi + d_B). A-block first.
template <class F>
CellularSheaf<F> sheaf_cone(const SheafMorphism<F>& phi) {
    if (phi.degree != 0) throw std::invalid_argument("sheaf_cone: need a degree-0 morphism");
    const CellularSheaf<F>& A = *phi.source;
    const CellularSheaf<F>& B = *phi.target;
    const F& field = A.field;
    CellularSheaf<F> out;
    out.X = A.X;
    out.field = field;
    index_t na = static_cast<index_t>(A.gens.size());
    for (auto& g : A.gens) out.gens.push_back({g.cell, g.degree - 1});
    for (auto& g : B.gens) out.gens.push_back(g);
    out.dcols.resize(out.gens.size());
    for (index_t i = 0; i < na; ++i)
        for (auto& [j, c] : A.dcols[i]) out.dcols[i].emplace_back(j, field.neg(c));
    for (auto& [i, j, c] : phi.entries) out.dcols[i].emplace_back(na + j, c);
    for (index_t i = 0; i < B.gens.size(); ++i)
        for (auto& [j, c] : B.dcols[i]) out.dcols[na + i].emplace_back(na + j, c);
    return out;
}

template <class F>
CellularSheaf<F> sheaf_cocone(const SheafMorphism<F>& phi) {
    return shift_sheaf(sheaf_cone(phi), -1);
}

template <class F>
CellularSheaf<F> sheaf_sum(const CellularSheaf<F>& A, const CellularSheaf<F>& B) {
    CellularSheaf<F> out = A;
    index_t na = static_cast<index_t>(A.gens.size());
    for (auto& g : B.gens) out.gens.push_back(g);
    out.dcols.resize(out.gens.size());
    for (index_t i = 0; i < B.gens.size(); ++i)
        for (auto& [j, c] : B.dcols[i]) out.dcols[na + i].emplace_back(na + j, c);
    return out;
}

// ---------------------------------------------------------------------------
// Minimal resolution of a constant sheaf on a locally closed set by star
// summands; level-k generators land in degree -k. This is constant_on: the
// result is quasi-isomorphic to K_Z with stalk K at cells of Z, 0 elsewhere.
// ---------------------------------------------------------------------------

template <class F>
CellularSheaf<F> resolve_constant(const F& field, const CellSet& S, int level_cap = 32) {
    if (!is_locally_closed(S)) throw std::invalid_argument("resolve_constant: set is not locally closed");
    const CellComplex& X = *S.X;
    using scalar = typename F::scalar;
    size_t n = X.size();

    CellularSheaf<F> R;
    R.X = S.X;
    R.field = field;

    // current functor M: per-cell dimension, per-facet-slot arrows M(facet)->M(x)
    std::vector<index_t> dims(n);
    std::vector<std::vector<SmallMat<F>>> arrows(n);
    for (index_t x = 0; x < n; ++x) {
        dims[x] = S.member[x] ? 1 : 0;
        arrows[x].resize(X.facets[x].size());
        for (size_t s = 0; s < X.facets[x].size(); ++s) {
            index_t f = X.facets[x][s].first;
            SmallMat<F> m(field, dims[x], S.member[f] ? 1 : 0);
            if (S.member[x] && S.member[f]) m.at(0, 0) = field.one();
            arrows[x][s] = std::move(m);
        }
    }
    // expansion of a current-coordinate unit vector over the previous level's
    // generator ids; empty at level 0
    std::vector<std::vector<std::vector<std::pair<index_t, scalar>>>> expand(n);

    std::vector<index_t> order(n);
    for (index_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](index_t a, index_t b) { return X.cell_dim[a] < X.cell_dim[b]; });

    for (int level = 0;; ++level) {
        if (level > level_cap) throw std::logic_error("resolve_constant: resolution did not terminate");
        // ---- generators: greedily extend the horizontal span to all of M(x)
        std::vector<std::vector<index_t>> gen_unit(n);  // chosen unit coordinates per cell
        bool any = false;
        for (index_t x = 0; x < n; ++x) {
            if (!dims[x]) continue;
            DenseEliminator<F> elim(field, dims[x]);
            for (size_t s = 0; s < arrows[x].size(); ++s) {
                const auto& m = arrows[x][s];
                for (index_t c = 0; c < m.cols; ++c) {
                    std::vector<scalar> col(m.rows);
                    for (index_t r = 0; r < m.rows; ++r) col[r] = m.at(r, c);
                    elim.add(std::move(col));
                }
            }
            for (index_t e = 0; e < dims[x] && elim.rank() < dims[x]; ++e) {
                std::vector<scalar> unit(dims[x], field.zero());
                unit[e] = field.one();
                if (elim.add(unit)) {
                    gen_unit[x].push_back(e);
                    any = true;
                }
            }
        }
        if (!any) break;

        index_t begin = static_cast<index_t>(R.gens.size());
        std::vector<index_t> gen_cell, gen_coord;
        std::vector<std::vector<index_t>> at_cell(n);
        for (index_t x = 0; x < n; ++x)
            for (index_t e : gen_unit[x]) {
                at_cell[x].push_back(static_cast<index_t>(R.gens.size()));
                R.gens.push_back({x, -level});
                R.dcols.emplace_back();
                gen_cell.push_back(x);
                gen_coord.push_back(e);
            }
        // differential to the previous level via the expansion tables
        if (level > 0)
            for (index_t gi = begin; gi < R.gens.size(); ++gi)
                R.dcols[gi] = expand[gen_cell[gi - begin]][gen_coord[gi - begin]];

        // ---- per-cell images of the new generators over "gens below x"
        std::vector<std::vector<index_t>> below(n);
        std::vector<std::vector<std::vector<scalar>>> img(n);
        for (index_t oi = 0; oi < n; ++oi) {
            index_t x = order[oi];
            std::vector<index_t> merged;
            for (auto& [f, sg] : X.facets[x]) merged.insert(merged.end(), below[f].begin(), below[f].end());
            merged.insert(merged.end(), at_cell[x].begin(), at_cell[x].end());
            std::sort(merged.begin(), merged.end());
            merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
            below[x] = std::move(merged);
            img[x].resize(below[x].size());
            for (size_t bi = 0; bi < below[x].size(); ++bi) {
                index_t g = below[x][bi];
                index_t sigma = gen_cell[g - begin];
                if (sigma == x) {
                    std::vector<scalar> v(dims[x], field.zero());
                    v[gen_coord[g - begin]] = field.one();
                    img[x][bi] = std::move(v);
                    continue;
                }
                bool done = false;
                for (size_t s = 0; s < X.facets[x].size() && !done; ++s) {
                    index_t f = X.facets[x][s].first;
                    if (!std::binary_search(X.faces[f].begin(), X.faces[f].end(), sigma)) continue;
                    auto it = std::lower_bound(below[f].begin(), below[f].end(), g);
                    if (it == below[f].end() || *it != g)
                        throw std::logic_error("resolve_constant: generator missing below a facet");
                    img[x][bi] = arrows[x][s].apply(field, img[f][static_cast<size_t>(it - below[f].begin())]);
                    done = true;
                }
                if (!done) throw std::logic_error("resolve_constant: face propagation failed");
            }
        }

        // ---- kernels: the next module, with arrows and expansion tables
        std::vector<index_t> kdims(n, 0);
        std::vector<std::vector<std::vector<scalar>>> kbasis(n);
        for (index_t x = 0; x < n; ++x) {
            index_t m_cols = static_cast<index_t>(below[x].size());
            if (!m_cols) continue;
            SmallMat<F> eps(field, dims[x], m_cols);
            for (index_t c = 0; c < m_cols; ++c)
                for (index_t r = 0; r < dims[x]; ++r) eps.at(r, c) = img[x][c][r];
            kbasis[x] = dense_kernel(field, eps);
            kdims[x] = static_cast<index_t>(kbasis[x].size());
        }
        std::vector<std::vector<SmallMat<F>>> karrows(n);
        for (index_t x = 0; x < n; ++x) {
            karrows[x].resize(X.facets[x].size());
            for (size_t s = 0; s < X.facets[x].size(); ++s) {
                index_t f = X.facets[x][s].first;
                SmallMat<F> m(field, kdims[x], kdims[f]);
                for (index_t c = 0; c < kdims[f]; ++c) {
                    std::vector<scalar> v(below[x].size(), field.zero());
                    for (size_t bi = 0; bi < below[f].size(); ++bi) {
                        auto it = std::lower_bound(below[x].begin(), below[x].end(), below[f][bi]);
                        v[static_cast<size_t>(it - below[x].begin())] = kbasis[f][c][bi];
                    }
                    auto coords = dense_solve_cols(field, kbasis[x], std::move(v));
                    for (index_t r = 0; r < kdims[x]; ++r) m.at(r, c) = coords[r];
                }
                karrows[x][s] = std::move(m);
            }
        }
        std::vector<std::vector<std::vector<std::pair<index_t, scalar>>>> kexpand(n);
        for (index_t x = 0; x < n; ++x) {
            kexpand[x].resize(kbasis[x].size());
            for (size_t c = 0; c < kbasis[x].size(); ++c)
                for (size_t bi = 0; bi < below[x].size(); ++bi)
                    if (!field.is_zero(kbasis[x][c][bi]))
                        kexpand[x][c].emplace_back(below[x][bi], kbasis[x][c][bi]);
        }
        dims = std::move(kdims);
        arrows = std::move(karrows);
        expand = std::move(kexpand);
    }
    return R;
}

// Single elementary constant sheaf on a locally closed set, in resolved form.
template <class F>
CellularSheaf<F> constant_on(const F& field, const CellSet& Z) {
    return resolve_constant(field, Z);
}

template <class F>
CellularSheaf<F> zero_sheaf(const F& field, const CellComplex& X) {
    CellularSheaf<F> s;
    s.X = &X;
    s.field = field;
    return s;
}

// ---------------------------------------------------------------------------
// Derived functors on the resolved shape.
// ---------------------------------------------------------------------------

// Per-sheaf index: generator ids grouped by their star's center cell.
template <class F>
struct SheafCellIndex {
    std::vector<std::vector<index_t>> at_cell;

    explicit SheafCellIndex(const CellularSheaf<F>& A) : at_cell(A.X->size()) {
        for (index_t i = 0; i < A.gens.size(); ++i) at_cell[A.gens[i].cell].push_back(i);
    }
};

// Stalk complex at a cell: summands whose star contains the cell.
template <class F>
ChainComplex<F> stalk_complex_from(const CellularSheaf<F>& A, std::vector<index_t> keep, index_t cell);

template <class F>
ChainComplex<F> stalk_complex(const CellularSheaf<F>& A, const SheafCellIndex<F>& index, index_t cell) {
    const CellComplex& X = *A.X;
    std::vector<index_t> keep;
    for (index_t f : X.faces[cell])
        for (index_t i : index.at_cell[f]) keep.push_back(i);
    std::sort(keep.begin(), keep.end());
    return stalk_complex_from(A, std::move(keep), cell);
}

template <class F>
ChainComplex<F> stalk_complex(const CellularSheaf<F>& A, index_t cell) {
    const CellComplex& X = *A.X;
    std::vector<index_t> keep;
    for (index_t i = 0; i < A.gens.size(); ++i)
        if (std::binary_search(X.faces[cell].begin(), X.faces[cell].end(), A.gens[i].cell))
            keep.push_back(i);
    return stalk_complex_from(A, std::move(keep), cell);
}

template <class F>
ChainComplex<F> stalk_complex_from(const CellularSheaf<F>& A, std::vector<index_t> keep, index_t cell) {
    (void)cell;
    std::map<index_t, index_t> pos;
    std::map<int, std::vector<index_t>> by_deg;
    for (index_t k : keep) by_deg[A.gens[k].degree].push_back(k);
    if (by_deg.empty()) return ChainComplex<F>(A.field);
    int lo = by_deg.begin()->first, hi = by_deg.rbegin()->first;
    ChainComplex<F> c(A.field);
    c.lo = lo;
    std::map<index_t, index_t> local;
    for (int k = lo; k <= hi; ++k) {
        auto it = by_deg.find(k);
        index_t d = it == by_deg.end() ? 0 : static_cast<index_t>(it->second.size());
        c.dims.push_back(d);
        if (it != by_deg.end())
            for (index_t j = 0; j < it->second.size(); ++j) local[it->second[j]] = j;
    }
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? c.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(A.field, rows, c.dims[k - lo]);
        auto it = by_deg.find(k);
        if (it != by_deg.end())
            for (index_t j = 0; j < it->second.size(); ++j) {
                index_t gi = it->second[j];
                for (auto& [t, v] : A.dcols[gi]) {
                    auto lt = local.find(t);
                    if (lt == local.end()) continue;  // target not over this cell: impossible (faces nest)
                    m.cols[j].emplace_back(lt->second, v);
                }
                std::sort(m.cols[j].begin(), m.cols[j].end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
            }
        c.d.push_back(std::move(m));
    }
    c.trim();
    return c;
}

template <class F>
std::map<int, index_t> stalk(const CellularSheaf<F>& A, index_t cell) {
    return cohomology_ranks(stalk_complex(A, cell));
}

template <class F>
std::map<int, index_t> stalk(const CellularSheaf<F>& A, const SheafCellIndex<F>& index, index_t cell) {
    return cohomology_ranks(stalk_complex(A, index, cell));
}

// Global sections complex: basis (summand, cell of its star), total degree =
// summand degree + cell dimension. Computes RGamma(X; A).
template <class F>
ChainComplex<F> global_sections_complex(const CellularSheaf<F>& A) {
    const CellComplex& X = *A.X;
    const F& field = A.field;
    if (A.gens.empty()) return ChainComplex<F>(field);
    // enumerate (gen, cell >= gen.cell): group by total degree
    struct Ent {
        index_t gen, cell;
    };
    std::map<int, std::vector<Ent>> by_deg;
    for (index_t i = 0; i < A.gens.size(); ++i)
        for (index_t c : X.stars[A.gens[i].cell])
            by_deg[A.gens[i].degree + X.cell_dim[c]].push_back({i, c});
    int lo = by_deg.begin()->first, hi = by_deg.rbegin()->first;
    // index within degree: order by (gen, cell)
    std::map<int, std::map<std::pair<index_t, index_t>, index_t>> pos;
    for (auto& [k, v] : by_deg) {
        std::sort(v.begin(), v.end(), [](const Ent& a, const Ent& b) {
            return a.gen != b.gen ? a.gen < b.gen : a.cell < b.cell;
        });
        auto& p = pos[k];
        for (index_t j = 0; j < v.size(); ++j) p[{v[j].gen, v[j].cell}] = j;
    }
    ChainComplex<F> out(field);
    out.lo = lo;
    for (int k = lo; k <= hi; ++k) {
        auto it = by_deg.find(k);
        out.dims.push_back(it == by_deg.end() ? 0 : static_cast<index_t>(it->second.size()));
    }
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? out.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(field, rows, out.dims[k - lo]);
        auto it = by_deg.find(k);
        if (it != by_deg.end()) {
            auto pit = pos.find(k + 1);
            for (index_t j = 0; j < it->second.size(); ++j) {
                auto [gi, c] = it->second[j];
                auto& col = m.cols[j];
                if (pit != pos.end()) {
                    // resolution part
                    for (auto& [t, v] : A.dcols[gi]) {
                        auto q = pit->second.find({t, c});
                        if (q != pit->second.end()) col.emplace_back(q->second, v);
                    }
                    // cellular part, sign (-1)^{gen degree}
                    bool odd = ((A.gens[gi].degree % 2) + 2) % 2 == 1;
                    for (index_t cf : X.cofacets[c]) {
                        auto q = pit->second.find({gi, cf});
                        if (q != pit->second.end()) {
                            auto v = field.from_int(X.incidence(cf, c));
                            col.emplace_back(q->second, odd ? field.neg(v) : v);
                        }
                    }
                }
                std::sort(col.begin(), col.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
            }
        }
        out.d.push_back(std::move(m));
    }
    out.trim();
    return out;
}

// ---------------------------------------------------------------------------
// Hom complexes between resolved sheaves. Basis in degree k: pairs (i, j)
// with deg(j) - deg(i) = k and cell(j) a face of cell(i), ordered by (i, j).
// ---------------------------------------------------------------------------

template <class F>
struct HomComplex {
    const CellularSheaf<F>* A = nullptr;
    const CellularSheaf<F>* B = nullptr;
    int lo = 0;
    std::vector<std::vector<std::pair<index_t, index_t>>> basis;  // per degree-offset
    std::vector<std::vector<std::pair<index_t, typename F::scalar>>> d_in_A;  // reverse adjacency of A.dcols

    int hi() const { return lo + static_cast<int>(basis.size()) - 1; }
    size_t dim(int k) const {
        if (k < lo || k > hi()) return 0;
        return basis[k - lo].size();
    }
    index_t index_of(int k, index_t i, index_t j) const {
        const auto& b = basis[k - lo];
        auto it = std::lower_bound(b.begin(), b.end(), std::make_pair(i, j));
        if (it == b.end() || *it != std::make_pair(i, j)) return static_cast<index_t>(-1);
        return static_cast<index_t>(it - b.begin());
    }

    // column of the degree-k differential for basis element (i, j)
    void column(int k, index_t idx, SparseVec<F>& out) const {
        out.clear();
        if (k + 1 > hi()) return;
        const F& field = A->field;
        auto [i, j] = basis[k - lo][idx];
        bool odd = ((k % 2) + 2) % 2 == 1;
        for (auto& [j2, c] : B->dcols[j]) {
            index_t r = index_of(k + 1, i, j2);
            if (r != static_cast<index_t>(-1)) out.emplace_back(r, c);
        }
        for (auto& [i2, c] : d_in_A[i]) {
            index_t r = index_of(k + 1, i2, j);
            if (r != static_cast<index_t>(-1)) out.emplace_back(r, odd ? c : field.neg(c));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        // merge duplicates (i2 == i with j2 == j cannot happen; play safe)
        SparseVec<F> merged;
        for (auto& e : out) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second = field.add(merged.back().second, e.second);
            else
                merged.push_back(e);
        }
        out.clear();
        for (auto& e : merged)
            if (!field.is_zero(e.second)) out.push_back(e);
    }
};

template <class F>
HomComplex<F> build_hom(const CellularSheaf<F>& A, const CellularSheaf<F>& B) {
    if (A.X != B.X) throw std::invalid_argument("build_hom: sheaves on different complexes");
    HomComplex<F> H;
    H.A = &A;
    H.B = &B;
    const CellComplex& X = *A.X;
    // B gens indexed by cell
    std::vector<std::vector<index_t>> at_cell(X.size());
    for (index_t j = 0; j < B.gens.size(); ++j) at_cell[B.gens[j].cell].push_back(j);
    int lo = 1, hi = -1;  // empty
    std::map<int, std::vector<std::pair<index_t, index_t>>> buckets;
    for (index_t i = 0; i < A.gens.size(); ++i)
        for (index_t f : X.faces[A.gens[i].cell])
            for (index_t j : at_cell[f]) buckets[B.gens[j].degree - A.gens[i].degree].emplace_back(i, j);
    if (buckets.empty()) {
        H.lo = 0;
        return H;
    }
    lo = buckets.begin()->first;
    hi = buckets.rbegin()->first;
    H.lo = lo;
    H.basis.resize(hi - lo + 1);
    for (auto& [k, v] : buckets) {
        std::sort(v.begin(), v.end());
        H.basis[k - lo] = std::move(v);
    }
    H.d_in_A.resize(A.gens.size());
    for (index_t i = 0; i < A.gens.size(); ++i)
        for (auto& [t, c] : A.dcols[i]) H.d_in_A[t].emplace_back(i, c);
    return H;
}

// Ranks of the Hom-complex differentials, streamed degree by degree so large
// matrices are never materialized. Returns Ext^k(A, B) per degree.
template <class F>
std::map<int, index_t> ext_ranks(const CellularSheaf<F>& A, const CellularSheaf<F>& B) {
    HomComplex<F> H = build_hom(A, B);
    std::map<int, index_t> out;
    if (H.basis.empty()) return out;
    std::map<int, uint64_t> rank_d;
    for (int k = H.lo; k <= H.hi(); ++k) {
        ColumnSpace<F> cs(A.field);
        SparseVec<F> col;
        for (index_t idx = 0; idx < H.dim(k); ++idx) {
            H.column(k, idx, col);
            cs.add(std::move(col));
            col = {};
        }
        rank_d[k] = cs.rank();
    }
    for (int k = H.lo; k <= H.hi(); ++k) {
        uint64_t r = H.dim(k) - rank_d[k] - (k - 1 >= H.lo ? rank_d[k - 1] : 0);
        if (r) out[k] = static_cast<index_t>(r);
    }
    return out;
}

// Hom complex materialized as a plain chain complex (for callers that need
// the object rather than its ranks).
template <class F>
ChainComplex<F> hom_sheaf(const CellularSheaf<F>& A, const CellularSheaf<F>& B) {
    HomComplex<F> H = build_hom(A, B);
    ChainComplex<F> c(A.field);
    if (H.basis.empty()) return c;
    c.lo = H.lo;
    for (int k = H.lo; k <= H.hi(); ++k) c.dims.push_back(static_cast<index_t>(H.dim(k)));
    for (int k = H.lo; k <= H.hi(); ++k) {
        index_t rows = k + 1 <= H.hi() ? c.dims[k + 1 - H.lo] : 0;
        SparseMatrix<F> m(A.field, rows, c.dims[k - H.lo]);
        for (index_t idx = 0; idx < H.dim(k); ++idx) H.column(k, idx, m.cols[idx]);
        c.d.push_back(std::move(m));
    }
    c.trim();
    return c;
}

// Deterministic chain-level representative of the selector-th basis class of
// Ext^d(A, B). The degree-d columns are reduced in ascending basis order
// with combination tracking; each column that reduces to zero yields a
// cocycle, and the first ones independent of the image of the degree-(d-1)
// differential are the chosen classes.
template <class F>
SheafMorphism<F> lift_ext_class(const CellularSheaf<F>& A, const CellularSheaf<F>& B, int d,
                                index_t selector = 0) {
    HomComplex<F> H = build_hom(A, B);
    if (H.basis.empty() || d < H.lo || d > H.hi()) throw std::domain_error("lift_ext_class: Ext rank 0");
    const F& field = A.field;
    ColumnSpace<F> image(field);
    if (d - 1 >= H.lo) {
        SparseVec<F> col;
        for (index_t idx = 0; idx < H.dim(d - 1); ++idx) {
            H.column(d - 1, idx, col);
            image.add(std::move(col));
            col = {};
        }
    }
    std::map<index_t, std::pair<SparseVec<F>, SparseVec<F>>> lead;  // lead row -> (column, combination)
    index_t found = 0;
    SparseVec<F> col, combo;
    for (index_t idx = 0; idx < H.dim(d); ++idx) {
        H.column(d, idx, col);
        combo = {{idx, field.one()}};
        while (!col.empty()) {
            auto it = lead.find(col.back().first);
            if (it == lead.end()) break;
            auto lambda = field.neg(col.back().second);
            axpy(field, col, lambda, it->second.first);
            axpy(field, combo, lambda, it->second.second);
        }
        if (!col.empty()) {
            auto inv = field.inv(col.back().second);
            scale(field, col, inv);
            scale(field, combo, inv);
            index_t l = col.back().first;
            lead.emplace(l, std::make_pair(std::move(col), std::move(combo)));
            col = {};
            combo = {};
            continue;
        }
        // cocycle: test against coboundaries
        SparseVec<F> reduced = combo;
        if (image.reduce(reduced)) continue;
        if (found++ < selector) {
            image.add(combo);
            continue;
        }
        SheafMorphism<F> phi;
        phi.source = &A;
        phi.target = &B;
        phi.degree = d;
        for (auto& [k, c] : combo) {
            auto [i, j] = H.basis[d - H.lo][k];
            phi.entries.emplace_back(i, j, c);
        }
        phi.validate();
        return phi;
    }
    throw std::domain_error("lift_ext_class: Ext rank 0 in degree " + std::to_string(d));
}

inline bool less_in_poset(const CellComplex& X, index_t a, index_t b) {
    return a != b && std::binary_search(X.faces[b].begin(), X.faces[b].end(), a);
}

// ---------------------------------------------------------------------------
// Restriction to a closed subcomplex whose stars factor (time slices).
// ---------------------------------------------------------------------------

struct Subcomplex {
    CellComplex X;
    std::vector<index_t> to_sub;    // ambient cell -> sub cell id (or -1)
    std::vector<index_t> to_ambient;
};

inline Subcomplex extract_subcomplex(const CellComplex& X, const CellSet& A) {
    if (!is_down_closed(A)) throw std::invalid_argument("extract_subcomplex: set is not closed");
    Subcomplex out;
    out.to_sub.assign(X.size(), static_cast<index_t>(-1));
    for (index_t c = 0; c < X.size(); ++c)
        if (A.member[c]) {
            out.to_sub[c] = out.X.add_cell(X.cell_dim[c]);
            out.to_ambient.push_back(c);
        }
    for (index_t c = 0; c < X.size(); ++c)
        if (A.member[c])
            for (auto& [f, s] : X.facets[c]) out.X.facets[out.to_sub[c]].emplace_back(out.to_sub[f], s);
    out.X.axis_names = X.axis_names;
    out.X.vtx_chart.assign(out.X.size(), {});
    out.X.vtx_point.assign(out.X.size(), {});
    for (index_t c = 0; c < X.size(); ++c)
        if (A.member[c] && X.cell_dim[c] == 0) {
            out.X.vtx_chart[out.to_sub[c]] = X.vtx_chart[c];
            out.X.vtx_point[out.to_sub[c]] = X.vtx_point[c];
        }
    out.X.finalize();
    return out;
}

// Pullback of a resolved sheaf to a closed subcomplex. Each star summand
// restricts to the star of the minimal subcomplex cell above its center (or
// vanishes); this is exact for slice-like subcomplexes where such a minimal
// cell exists, and throws otherwise.
template <class F>
CellularSheaf<F> restrict_sheaf(const CellularSheaf<F>& A, const Subcomplex& sub) {
    const CellComplex& X = *A.X;
    const F& field = A.field;
    // ambient star lists restricted to the subcomplex
    std::vector<std::vector<index_t>> star_in_sub(X.size());
    for (index_t sc = 0; sc < sub.to_ambient.size(); ++sc)
        for (index_t f : X.faces[sub.to_ambient[sc]]) star_in_sub[f].push_back(sc);
    CellularSheaf<F> out;
    out.X = &sub.X;
    out.field = field;
    std::vector<index_t> new_gen(A.gens.size(), static_cast<index_t>(-1));
    for (index_t i = 0; i < A.gens.size(); ++i) {
        const auto& cand = star_in_sub[A.gens[i].cell];
        if (cand.empty()) continue;
        index_t minimal = cand[0];
        for (index_t sc : cand)
            if (sub.X.cell_dim[sc] < sub.X.cell_dim[minimal]) minimal = sc;
        for (index_t sc : cand)
            if (!std::binary_search(sub.X.faces[sc].begin(), sub.X.faces[sc].end(), minimal))
                throw std::logic_error("restrict_sheaf: star does not factor over the subcomplex");
        out.gens.push_back({minimal, A.gens[i].degree});
        new_gen[i] = static_cast<index_t>(out.gens.size() - 1);
    }
    out.dcols.resize(out.gens.size());
    for (index_t i = 0; i < A.gens.size(); ++i) {
        if (new_gen[i] == static_cast<index_t>(-1)) continue;
        for (auto& [j, c] : A.dcols[i])
            if (new_gen[j] != static_cast<index_t>(-1)) out.dcols[new_gen[i]].emplace_back(new_gen[j], c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local sections over a sub-poset of a star, and the microsupport test.
// ---------------------------------------------------------------------------

// RGamma(V; A|_V) over a sub-poset V of cells, by the bar construction over
// chains of V: basis (summand g, chain c) with the summand's cell a face of
// the chain's top cell, total degree deg(g) + length(c) - 1. The
// differential inserts one element into the chain (sign (-1)^position) and
// applies the sheaf differential with sign (-1)^{chain degree}.
template <class F>
ChainComplex<F> sections_over_poset(const CellularSheaf<F>& A, const SheafCellIndex<F>& index,
                                    const std::vector<index_t>& V) {
    const CellComplex& X = *A.X;
    const F& field = A.field;
    if (V.empty() || A.gens.empty()) return ChainComplex<F>(field);
    std::vector<std::vector<index_t>> up(V.size());
    for (index_t i = 0; i < V.size(); ++i)
        for (index_t j = 0; j < V.size(); ++j)
            if (i != j && less_in_poset(X, V[i], V[j])) up[i].push_back(j);
    std::vector<std::vector<std::vector<index_t>>> chains;  // [k] -> chains as V-index tuples
    std::vector<index_t> cur;
    std::function<void(index_t)> grow = [&](index_t i) {
        cur.push_back(i);
        size_t k = cur.size() - 1;
        if (chains.size() <= k) chains.resize(k + 1);
        chains[k].push_back(cur);
        for (index_t nxt : up[i]) grow(nxt);
        cur.pop_back();
    };
    for (index_t i = 0; i < V.size(); ++i) grow(i);
    struct VecHash {
        size_t operator()(const std::vector<index_t>& v) const {
            size_t h = 1469598103934665603ull;
            for (auto x : v) h = (h ^ x) * 1099511628211ull;
            return h;
        }
    };
    std::vector<std::unordered_map<std::vector<index_t>, index_t, VecHash>> chain_pos(chains.size());
    for (size_t k = 0; k < chains.size(); ++k)
        for (index_t j = 0; j < chains[k].size(); ++j) chain_pos[k][chains[k][j]] = j;
    // basis: for each chain, summands at faces of its top cell
    using Key = std::tuple<index_t, index_t, index_t>;  // (gen, k, chain idx)
    std::map<int, std::vector<Key>> by_deg;
    for (size_t k = 0; k < chains.size(); ++k)
        for (index_t cj = 0; cj < chains[k].size(); ++cj) {
            index_t top = V[chains[k][cj].back()];
            for (index_t f : X.faces[top])
                for (index_t gi : index.at_cell[f])
                    by_deg[A.gens[gi].degree + static_cast<int>(k)].emplace_back(gi, static_cast<index_t>(k), cj);
        }
    if (by_deg.empty()) return ChainComplex<F>(field);
    int lo = by_deg.begin()->first, hi = by_deg.rbegin()->first;
    std::map<int, std::map<Key, index_t>> pos;
    for (auto& [k, v] : by_deg) {
        std::sort(v.begin(), v.end());
        auto& p = pos[k];
        for (index_t j = 0; j < v.size(); ++j) p[v[j]] = j;
    }
    ChainComplex<F> out(field);
    out.lo = lo;
    for (int k = lo; k <= hi; ++k) {
        auto it = by_deg.find(k);
        out.dims.push_back(it == by_deg.end() ? 0 : static_cast<index_t>(it->second.size()));
    }
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? out.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(field, rows, out.dims[k - lo]);
        auto it = by_deg.find(k);
        if (it != by_deg.end()) {
            auto pnext = pos.find(k + 1);
            for (index_t col_i = 0; col_i < it->second.size(); ++col_i) {
                auto [gi, ck, cj] = it->second[col_i];
                if (pnext == pos.end()) continue;
                auto& col = m.cols[col_i];
                const auto& ch = chains[ck][cj];
                // bar part: insert a V-element at each position
                for (index_t w = 0; w < V.size(); ++w) {
                    for (size_t ins = 0; ins <= ch.size(); ++ins) {
                        bool ok = true;
                        if (ins > 0 && !less_in_poset(X, V[ch[ins - 1]], V[w])) ok = false;
                        if (ok && ins < ch.size() && !less_in_poset(X, V[w], V[ch[ins]])) ok = false;
                        if (!ok) continue;
                        std::vector<index_t> longer;
                        longer.reserve(ch.size() + 1);
                        longer.insert(longer.end(), ch.begin(), ch.begin() + ins);
                        longer.push_back(w);
                        longer.insert(longer.end(), ch.begin() + ins, ch.end());
                        auto q = chain_pos[ck + 1].find(longer);
                        if (q == chain_pos[ck + 1].end()) continue;
                        auto r = pnext->second.find({gi, static_cast<index_t>(ck + 1), q->second});
                        if (r == pnext->second.end()) continue;
                        col.emplace_back(r->second, field.from_int(ins % 2 == 0 ? 1 : -1));
                    }
                }
                // sheaf part, sign (-1)^{chain degree}
                bool odd = (ck % 2) == 1;
                index_t top = V[ch.back()];
                for (auto& [t, c] : A.dcols[gi]) {
                    if (!std::binary_search(X.faces[top].begin(), X.faces[top].end(), A.gens[t].cell)) continue;
                    auto r = pnext->second.find({t, ck, cj});
                    if (r == pnext->second.end()) continue;
                    col.emplace_back(r->second, odd ? field.neg(c) : c);
                }
                std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
                SparseVec<F> merged;
                for (auto& e : col) {
                    if (!merged.empty() && merged.back().first == e.first)
                        merged.back().second = field.add(merged.back().second, e.second);
                    else
                        merged.push_back(e);
                }
                col.clear();
                for (auto& e : merged)
                    if (!field.is_zero(e.second)) col.push_back(e);
            }
        }
        out.d.push_back(std::move(m));
    }
    // do not trim: degree bookkeeping of callers relies on lo as-is
    return out;
}

// Direction-class query: the sub-poset of the open star of `cell` selected by
// a linear certificate f on corner displacements ({f < 0} side), followed by
// the local sections cocone. f is supplied as exact values per vertex; the
// class is admissible only if f vanishes on the cell's own corners.
struct HalfStarQuery {
    std::function<Rat(index_t)> f;  // per-vertex value, relative to the base cell
};

template <class F>
std::vector<index_t> half_star_cells(const CellularSheaf<F>& A, index_t cell, const HalfStarQuery& q) {
    const CellComplex& X = *A.X;
    for (index_t v : X.corners[cell])
        if (!(q.f(v) == Rat(0))) throw std::invalid_argument("half_star: class not conormal to the cell");
    std::vector<index_t> out;
    for (index_t c : X.stars[cell]) {
        if (c == cell) continue;
        bool all_le = true, some_lt = false;
        for (index_t v : X.corners[c]) {
            Rat fv = q.f(v);
            if (fv > Rat(0)) {
                all_le = false;
                break;
            }
            if (fv < Rat(0)) some_lt = true;
        }
        if (all_le && some_lt) out.push_back(c);
    }
    return out;
}

// Gamma_{f >= 0}(A)_cell as ranks: Cocone(stalk -> RGamma(star ∩ {f<0})).
template <class F>
std::map<int, index_t> gamma_stalk(const CellularSheaf<F>& A, const SheafCellIndex<F>& index, index_t cell,
                                   const HalfStarQuery& q) {
    const F& field = A.field;
    std::vector<index_t> V = half_star_cells(A, cell, q);
    ChainComplex<F> st = stalk_complex(A, index, cell);
    ChainComplex<F> sec = sections_over_poset(A, index, V);
    // restriction map: summand over the cell -> constant family over singleton chains
    ComplexMap<F> rho;
    rho.source = &st;
    rho.target = &sec;
    // rebuild the index maps used by both constructions
    const CellComplex& X = *A.X;
    std::vector<index_t> keep;
    for (index_t f : X.faces[cell])
        for (index_t i : index.at_cell[f]) keep.push_back(i);
    std::sort(keep.begin(), keep.end());
    // stalk basis in degree k: keep-gens of that degree ordered by id (matches stalk_complex)
    // sections basis in degree k: sorted (gen, k-chain, chain idx); singleton chains have k = 0,
    // chain idx = position of the cell in V (enumeration order of grow())
    // Recompute the section basis ordering the same way:
    std::vector<std::vector<index_t>> up(V.size());
    for (index_t i = 0; i < V.size(); ++i)
        for (index_t j = 0; j < V.size(); ++j)
            if (i != j && less_in_poset(X, V[i], V[j])) up[i].push_back(j);
    std::vector<std::vector<std::vector<index_t>>> chains;
    std::vector<index_t> cur;
    std::function<void(index_t)> grow = [&](index_t i) {
        cur.push_back(i);
        size_t k = cur.size() - 1;
        if (chains.size() <= k) chains.resize(k + 1);
        chains[k].push_back(cur);
        for (index_t nxt : up[i]) grow(nxt);
        cur.pop_back();
    };
    for (index_t i = 0; i < V.size(); ++i) grow(i);
    using Key = std::tuple<index_t, index_t, index_t>;
    std::map<int, std::vector<Key>> by_deg;
    for (size_t k = 0; k < chains.size(); ++k)
        for (index_t cj = 0; cj < chains[k].size(); ++cj) {
            index_t top = V[chains[k][cj].back()];
            for (index_t f : X.faces[top])
                for (index_t gi : index.at_cell[f])
                    by_deg[A.gens[gi].degree + static_cast<int>(k)].emplace_back(gi, static_cast<index_t>(k), cj);
        }
    std::map<int, std::map<Key, index_t>> pos;
    for (auto& [k, v] : by_deg) {
        std::sort(v.begin(), v.end());
        auto& p = pos[k];
        for (index_t j = 0; j < v.size(); ++j) p[v[j]] = j;
    }
    // chain-index of singleton (i): position of chain {i} among chains[0]
    std::vector<index_t> singleton_pos(V.size(), 0);
    if (!chains.empty())
        for (index_t j = 0; j < chains[0].size(); ++j) singleton_pos[chains[0][j][0]] = j;
    std::map<int, std::vector<index_t>> stalk_by_deg;
    for (index_t i : keep) stalk_by_deg[A.gens[i].degree].push_back(i);
    for (auto& [k, gens_k] : stalk_by_deg) {
        if (st.dim(k) != gens_k.size()) throw std::logic_error("gamma_stalk: stalk basis mismatch");
        SparseMatrix<F> m(field, sec.dim(k), st.dim(k));
        auto pit = pos.find(k);
        for (index_t col_i = 0; col_i < gens_k.size(); ++col_i) {
            if (pit == pos.end()) break;
            index_t gi = gens_k[col_i];
            for (index_t vi = 0; vi < V.size(); ++vi) {
                auto r = pit->second.find({gi, 0, singleton_pos[vi]});
                if (r == pit->second.end()) continue;
                m.cols[col_i].emplace_back(r->second, field.one());
            }
            std::sort(m.cols[col_i].begin(), m.cols[col_i].end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        if (m.n_rows || m.n_cols) rho.components.emplace(k, std::move(m));
    }
    ChainComplex<F> gam = cocone(rho);
    return cohomology_ranks(gam);
}

template <class F>
bool micro_test(const CellularSheaf<F>& A, const SheafCellIndex<F>& index, index_t cell,
                const HalfStarQuery& q) {
    auto ranks = gamma_stalk(A, index, cell, q);
    return !ranks.empty();
}

}  // namespace gks
