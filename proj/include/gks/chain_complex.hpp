#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "gks/sparse_matrix.hpp"

namespace gks {

// Bounded cochain complex over F, cohomological grading: d^k : C^k -> C^{k+1}.
// dims[i] is the dimension in degree lo+i; d[i] the differential out of it.
// The differential out of the top stored degree is zero.
template <class F>
struct ChainComplex {
    F field;
    int lo = 0;
    std::vector<index_t> dims;
    std::vector<SparseMatrix<F>> d;  // d[i]: dims[i] -> dims[i+1]; size == dims.size(), last has 0 rows

    ChainComplex() : field() {}
    explicit ChainComplex(const F& f) : field(f) {}

    int hi() const { return lo + static_cast<int>(dims.size()) - 1; }  // meaningful only if nonempty
    bool empty() const { return dims.empty(); }

    index_t dim(int k) const {
        if (k < lo || k > hi()) return 0;
        return dims[k - lo];
    }

    SparseMatrix<F> diff(int k) const {
        if (k < lo || k > hi()) return SparseMatrix<F>(field, dim(k + 1), dim(k));
        return d[k - lo];
    }

    void validate() const {
        for (size_t i = 0; i < dims.size(); ++i) {
            if (d[i].n_cols != dims[i]) throw std::logic_error("ChainComplex: differential width mismatch");
            index_t next = i + 1 < dims.size() ? dims[i + 1] : 0;
            if (d[i].n_rows != next) throw std::logic_error("ChainComplex: differential height mismatch");
            if (i + 1 < dims.size()) {
                if (!d[i + 1].times(d[i]).is_zero()) throw std::logic_error("ChainComplex: d∘d != 0");
            }
        }
    }

    // Drops zero-dimensional degrees at both ends.
    void trim() {
        while (!dims.empty() && dims.front() == 0) {
            dims.erase(dims.begin());
            d.erase(d.begin());
            ++lo;
        }
        while (!dims.empty() && dims.back() == 0) {
            dims.pop_back();
            d.pop_back();
            if (!d.empty()) d.back() = SparseMatrix<F>(field, 0, dims.back());
        }
    }
};

template <class F>
ChainComplex<F> make_complex(const F& field, int lo, std::vector<index_t> dims,
                             std::vector<SparseMatrix<F>> diffs) {
    ChainComplex<F> c(field);
    c.lo = lo;
    c.dims = std::move(dims);
    c.d = std::move(diffs);
    if (c.d.size() + 1 == c.dims.size()) c.d.emplace_back(field, 0, c.dims.back());
    if (c.d.size() != c.dims.size()) throw std::invalid_argument("make_complex: size mismatch");
    c.validate();
    return c;
}

// The field placed in a single degree.
template <class F>
ChainComplex<F> one_dim_complex(const F& field, int degree, index_t dim = 1) {
    ChainComplex<F> c(field);
    c.lo = degree;
    c.dims = {dim};
    c.d = {SparseMatrix<F>(field, 0, dim)};
    return c;
}

template <class F>
std::map<int, index_t> cohomology_ranks(const ChainComplex<F>& c) {
    std::map<int, index_t> h;
    std::vector<uint64_t> rk(c.dims.size(), 0);
    for (size_t i = 0; i < c.dims.size(); ++i) rk[i] = c.d[i].rank();
    for (size_t i = 0; i < c.dims.size(); ++i) {
        uint64_t below = i > 0 ? rk[i - 1] : 0;
        uint64_t r = c.dims[i] - rk[i] - below;
        if (r) h[c.lo + static_cast<int>(i)] = static_cast<index_t>(r);
    }
    return h;
}

template <class F>
int64_t euler_characteristic(const ChainComplex<F>& c) {
    int64_t chi = 0;
    for (size_t i = 0; i < c.dims.size(); ++i) {
        int k = c.lo + static_cast<int>(i);
        chi += (k % 2 == 0 ? 1 : -1) * static_cast<int64_t>(c.dims[i]);
    }
    return chi;
}

// (C[k])^i = C^{i+k}; differentials pick up (-1)^k.
template <class F>
ChainComplex<F> shift(const ChainComplex<F>& c, int k) {
    ChainComplex<F> s = c;
    s.lo = c.lo - k;
    if (k % 2 != 0) {
        for (auto& m : s.d)
            for (auto& col : m.cols)
                for (auto& e : col) e.second = c.field.neg(e.second);
    }
    return s;
}

// Degreewise map of complexes; components[k]: source^k -> target^k.
template <class F>
struct ComplexMap {
    const ChainComplex<F>* source = nullptr;
    const ChainComplex<F>* target = nullptr;
    std::map<int, SparseMatrix<F>> components;

    SparseMatrix<F> component(int k) const {
        auto it = components.find(k);
        if (it != components.end()) return it->second;
        return SparseMatrix<F>(source->field, target->dim(k), source->dim(k));
    }

    void validate() const {
        int a = std::min(source->lo, target->lo) - 1;
        int b = std::max(source->empty() ? a : source->hi(), target->empty() ? a : target->hi()) + 1;
        for (int k = a; k <= b; ++k) {
            auto lhs = target->diff(k).times(component(k));
            auto rhs = component(k + 1).times(source->diff(k));
            for (index_t c = 0; c < lhs.n_cols; ++c)
                if (lhs.cols[c] != rhs.cols[c]) throw std::logic_error("ComplexMap: does not commute with d");
        }
    }
};

template <class F>
ComplexMap<F> identity_map(const ChainComplex<F>& c) {
    ComplexMap<F> f;
    f.source = &c;
    f.target = &c;
    for (int k = c.lo; !c.empty() && k <= c.hi(); ++k)
        if (c.dim(k)) f.components.emplace(k, SparseMatrix<F>::identity(c.field, c.dim(k)));
    return f;
}

template <class F>
ComplexMap<F> zero_map(const ChainComplex<F>& a, const ChainComplex<F>& b) {
    ComplexMap<F> f;
    f.source = &a;
    f.target = &b;
    return f;
}

// Cone(f: A -> B): degree k part A^{k+1} (+) B^k, d(a,b) = (-d_A a, f(a) + d_B b).
// A-block first in the index order.
template <class F>
ChainComplex<F> cone(const ComplexMap<F>& f) {
    const auto& A = *f.source;
    const auto& B = *f.target;
    const F& field = A.field;
    int lo = std::min(A.lo - 1, B.lo);
    int hi = std::max(A.empty() ? lo : A.hi() - 1, B.empty() ? lo : B.hi());
    ChainComplex<F> c(field);
    c.lo = lo;
    for (int k = lo; k <= hi; ++k) c.dims.push_back(A.dim(k + 1) + B.dim(k));
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? c.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(field, rows, c.dims[k - lo]);
        index_t aw = A.dim(k + 1);
        index_t ah = A.dim(k + 2);
        auto da = A.diff(k + 1);
        auto db = B.diff(k);
        auto fk = f.component(k + 1);
        for (index_t col = 0; col < aw; ++col) {
            for (const auto& [r, v] : da.cols[col]) m.cols[col].emplace_back(r, field.neg(v));
            for (const auto& [r, v] : fk.cols[col]) m.cols[col].emplace_back(ah + r, v);
            std::sort(m.cols[col].begin(), m.cols[col].end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
        }
        for (index_t col = 0; col < B.dim(k); ++col)
            for (const auto& [r, v] : db.cols[col]) m.cols[aw + col].emplace_back(ah + r, v);
        c.d.push_back(std::move(m));
    }
    c.trim();
    if (c.d.size() + 1 == c.dims.size()) c.d.emplace_back(field, 0, c.dims.back());
    return c;
}

template <class F>
ChainComplex<F> cocone(const ComplexMap<F>& f) {
    return shift(cone(f), -1);
}

// Total Hom complex: Hom^k = (+)_j Hom(A^j, B^{j+k}), basis pairs ordered by
// (j, source index, target index); d(phi) = d_B phi - (-1)^k phi d_A.
template <class F>
ChainComplex<F> hom_complex(const ChainComplex<F>& A, const ChainComplex<F>& B) {
    const F& field = A.field;
    ChainComplex<F> h(field);
    if (A.empty() || B.empty()) return h;
    int lo = B.lo - A.hi(), hi = B.hi() - A.lo;
    h.lo = lo;
    // index offsets per (k, j)
    auto block_dims = [&](int k) {
        std::vector<std::pair<int, index_t>> blocks;  // (j, size)
        for (int j = A.lo; j <= A.hi(); ++j)
            blocks.emplace_back(j, A.dim(j) * B.dim(j + k));
        return blocks;
    };
    auto offset_of = [&](int k, int j) {
        index_t off = 0;
        for (int jj = A.lo; jj < j; ++jj) off += A.dim(jj) * B.dim(jj + k);
        return off;
    };
    for (int k = lo; k <= hi; ++k) {
        index_t total = 0;
        for (auto& [j, s] : block_dims(k)) total += s;
        h.dims.push_back(total);
    }
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? h.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(field, rows, h.dims[k - lo]);
        bool odd = ((k % 2) + 2) % 2 == 1;
        for (int j = A.lo; j <= A.hi(); ++j) {
            index_t na = A.dim(j), nb = B.dim(j + k);
            if (!na || !nb) continue;
            index_t base = offset_of(k, j);
            auto db = B.diff(j + k);
            auto da = A.diff(j - 1);
            index_t tgt_same_j = k + 1 <= hi ? offset_of(k + 1, j) : 0;
            index_t tgt_prev_j = k + 1 <= hi ? offset_of(k + 1, j - 1) : 0;
            for (index_t p = 0; p < na; ++p) {
                for (index_t q = 0; q < nb; ++q) {
                    index_t colidx = base + p * nb + q;
                    if (k + 1 > hi) continue;
                    auto& col = m.cols[colidx];
                    // d_B ∘ phi
                    if (B.dim(j + k + 1))
                        for (const auto& [r, v] : db.cols[q])
                            col.emplace_back(tgt_same_j + p * B.dim(j + k + 1) + r, v);
                    // -(-1)^k phi ∘ d_A : contributes at source degree j-1
                    if (A.dim(j - 1) && B.dim(j + k)) {
                        for (index_t pp = 0; pp < A.dim(j - 1); ++pp) {
                            auto v = field.zero();
                            for (const auto& [r, w] : da.cols[pp])
                                if (r == p) v = w;
                            if (!field.is_zero(v)) {
                                auto coeff = odd ? v : field.neg(v);
                                col.emplace_back(tgt_prev_j + pp * B.dim(j + k) + q, coeff);
                            }
                        }
                    }
                    std::sort(col.begin(), col.end(),
                              [](const auto& x, const auto& y) { return x.first < y.first; });
                }
            }
        }
        h.d.push_back(std::move(m));
    }
    h.trim();
    if (h.d.size() + 1 == h.dims.size()) h.d.emplace_back(field, 0, h.dims.back());
    return h;
}

// Tensor product of complexes: (A (x) B)^k = (+)_{i+j=k} A^i (x) B^j,
// d(a (x) b) = da (x) b + (-1)^i a (x) db. Basis pairs ordered by (i, p, q).
template <class F>
ChainComplex<F> tensor(const ChainComplex<F>& A, const ChainComplex<F>& B) {
    const F& field = A.field;
    ChainComplex<F> t(field);
    if (A.empty() || B.empty()) return t;
    int lo = A.lo + B.lo, hi = A.hi() + B.hi();
    t.lo = lo;
    auto offset_of = [&](int k, int i) {
        index_t off = 0;
        for (int ii = A.lo; ii < i; ++ii) off += A.dim(ii) * B.dim(k - ii);
        return off;
    };
    for (int k = lo; k <= hi; ++k) {
        index_t total = 0;
        for (int i = A.lo; i <= A.hi(); ++i) total += A.dim(i) * B.dim(k - i);
        t.dims.push_back(total);
    }
    for (int k = lo; k <= hi; ++k) {
        index_t rows = k + 1 <= hi ? t.dims[k + 1 - lo] : 0;
        SparseMatrix<F> m(field, rows, t.dims[k - lo]);
        for (int i = A.lo; i <= A.hi(); ++i) {
            index_t na = A.dim(i), nb = B.dim(k - i);
            if (!na || !nb) continue;
            index_t base = offset_of(k, i);
            auto da = A.diff(i);
            auto db = B.diff(k - i);
            bool odd = ((i % 2) + 2) % 2 == 1;
            for (index_t p = 0; p < na; ++p) {
                for (index_t q = 0; q < nb; ++q) {
                    if (k + 1 > hi) continue;
                    auto& col = m.cols[base + p * nb + q];
                    if (A.dim(i + 1))
                        for (const auto& [r, v] : da.cols[p])
                            col.emplace_back(offset_of(k + 1, i + 1) + r * nb + q, v);
                    if (B.dim(k - i + 1))
                        for (const auto& [r, v] : db.cols[q])
                            col.emplace_back(offset_of(k + 1, i) + p * B.dim(k - i + 1) + r,
                                             odd ? field.neg(v) : v);
                    std::sort(col.begin(), col.end(),
                              [](const auto& x, const auto& y) { return x.first < y.first; });
                }
            }
        }
        t.d.push_back(std::move(m));
    }
    t.trim();
    if (t.d.size() + 1 == t.dims.size()) t.d.emplace_back(field, 0, t.dims.back());
    return t;
}

}  // namespace gks
