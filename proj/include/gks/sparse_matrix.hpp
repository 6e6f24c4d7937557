#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gks/fields.hpp"

namespace gks {

using index_t = uint32_t;

// Sparse vector: entries sorted by index, no zeros stored.
template <class F>
using SparseVec = std::vector<std::pair<index_t, typename F::scalar>>;

// r += lambda * s, both sorted.
template <class F>
void axpy(const F& field, SparseVec<F>& r, const typename F::scalar& lambda,
          const SparseVec<F>& s) {
    if (field.is_zero(lambda)) return;
    SparseVec<F> out;
    out.reserve(r.size() + s.size());
    size_t i = 0, j = 0;
    while (i < r.size() || j < s.size()) {
        if (j == s.size() || (i < r.size() && r[i].first < s[j].first)) {
            out.push_back(r[i++]);
        } else if (i == r.size() || s[j].first < r[i].first) {
            auto v = field.mul(lambda, s[j].second);
            if (!field.is_zero(v)) out.emplace_back(s[j].first, v);
            ++j;
        } else {
            auto v = field.add(r[i].second, field.mul(lambda, s[j].second));
            if (!field.is_zero(v)) out.emplace_back(r[i].first, v);
            ++i, ++j;
        }
    }
    r.swap(out);
}

template <class F>
void scale(const F& field, SparseVec<F>& r, const typename F::scalar& lambda) {
    if (field.is_zero(lambda)) {
        r.clear();
        return;
    }
    for (auto& e : r) e.second = field.mul(e.second, lambda);
}

// Streaming column-space accumulator. Feed columns one at a time; keeps a
// reduced basis keyed by leading (largest) row index. Used for rank of
// matrices too large to keep around, and for image-membership tests.
template <class F>
struct ColumnSpace {
    F field;
    std::map<index_t, SparseVec<F>> lead;  // leading row -> reduced column, lead coeff 1

    explicit ColumnSpace(const F& f) : field(f) {}

    // Reduces v against the stored basis in place. Returns true if v became zero.
    bool reduce(SparseVec<F>& v) const {
        while (!v.empty()) {
            auto it = lead.find(v.back().first);
            if (it == lead.end()) return false;
            axpy(field, v, field.neg(v.back().second), it->second);
        }
        return true;
    }

    // Adds column v to the span. Returns true if it enlarged the space.
    bool add(SparseVec<F> v) {
        if (reduce(v)) return false;
        scale(field, v, field.inv(v.back().second));
        index_t l = v.back().first;
        lead.emplace(l, std::move(v));
        return true;
    }

    size_t rank() const { return lead.size(); }
};

// Sparse matrix, column-major. Entries exact over F; no stored zeros.
template <class F>
struct SparseMatrix {
    F field;
    index_t n_rows = 0, n_cols = 0;
    std::vector<SparseVec<F>> cols;

    SparseMatrix() : field() {}
    SparseMatrix(const F& f, index_t r, index_t c) : field(f), n_rows(r), n_cols(c), cols(c) {}

    static SparseMatrix identity(const F& f, index_t n) {
        SparseMatrix m(f, n, n);
        for (index_t i = 0; i < n; ++i) m.cols[i].emplace_back(i, f.one());
        return m;
    }

    void set(index_t r, index_t c, const typename F::scalar& v) {
        if (r >= n_rows || c >= n_cols) throw std::out_of_range("SparseMatrix::set");
        auto& col = cols[c];
        auto it = std::lower_bound(col.begin(), col.end(), r,
                                   [](const auto& e, index_t x) { return e.first < x; });
        if (it != col.end() && it->first == r) {
            if (field.is_zero(v))
                col.erase(it);
            else
                it->second = v;
        } else if (!field.is_zero(v)) {
            col.insert(it, {r, v});
        }
    }

    typename F::scalar get(index_t r, index_t c) const {
        const auto& col = cols[c];
        auto it = std::lower_bound(col.begin(), col.end(), r,
                                   [](const auto& e, index_t x) { return e.first < x; });
        if (it != col.end() && it->first == r) return it->second;
        return field.zero();
    }

    size_t nnz() const {
        size_t n = 0;
        for (const auto& c : cols) n += c.size();
        return n;
    }

    SparseMatrix transposed() const {
        SparseMatrix t(field, n_cols, n_rows);
        for (index_t c = 0; c < n_cols; ++c)
            for (const auto& [r, v] : cols[c]) t.cols[r].emplace_back(c, v);
        return t;
    }

    std::vector<typename F::scalar> apply(const std::vector<typename F::scalar>& x) const {
        if (x.size() != n_cols) throw std::invalid_argument("SparseMatrix::apply: dimension mismatch");
        std::vector<typename F::scalar> y(n_rows, field.zero());
        for (index_t c = 0; c < n_cols; ++c)
            for (const auto& [r, v] : cols[c]) y[r] = field.add(y[r], field.mul(v, x[c]));
        return y;
    }

    SparseMatrix times(const SparseMatrix& other) const {
        if (other.n_rows != n_cols) throw std::invalid_argument("SparseMatrix::times: dimension mismatch");
        SparseMatrix out(field, n_rows, other.n_cols);
        for (index_t c = 0; c < other.n_cols; ++c) {
            SparseVec<F> acc;
            for (const auto& [k, v] : other.cols[c]) axpy(field, acc, v, cols[k]);
            out.cols[c] = std::move(acc);
        }
        return out;
    }

    bool is_zero() const {
        for (const auto& c : cols)
            if (!c.empty()) return false;
        return true;
    }

    uint64_t rank() const {
        ColumnSpace<F> cs(field);
        for (const auto& c : cols) cs.add(c);
        return cs.rank();
    }
};

// Row-reduction state used by kernel_basis and solve. Pivoting rule: columns
// are scanned in ascending order and the pivot is the not-yet-used row of
// lowest index, so kernel bases and solutions are reproducible across runs.
template <class F>
struct Rref {
    F field;
    index_t n_rows, n_cols;
    std::vector<SparseVec<F>> rows;           // reduced rows, indexed by original row
    std::vector<std::pair<index_t, index_t>> pivots;  // (col, row), ascending col
    std::vector<char> row_used;

    explicit Rref(const SparseMatrix<F>& m)
        : field(m.field), n_rows(m.n_rows), n_cols(m.n_cols), rows(m.n_rows), row_used(m.n_rows, 0) {
        for (index_t c = 0; c < m.n_cols; ++c)
            for (const auto& [r, v] : m.cols[c]) rows[r].emplace_back(c, v);
        for (index_t c = 0; c < n_cols; ++c) {
            index_t pr = n_rows;
            for (index_t r = 0; r < n_rows; ++r) {
                if (row_used[r]) continue;
                if (!rows[r].empty() && rows[r].front().first == c) {
                    pr = r;
                    break;
                }
            }
            if (pr == n_rows) continue;
            scale(field, rows[pr], field.inv(rows[pr].front().second));
            for (index_t r = 0; r < n_rows; ++r) {
                if (r == pr || rows[r].empty()) continue;
                auto lead = field.zero();
                for (const auto& [cc, v] : rows[r]) {
                    if (cc == c) {
                        lead = v;
                        break;
                    }
                    if (cc > c) break;
                }
                if (!field.is_zero(lead)) axpy(field, rows[r], field.neg(lead), rows[pr]);
            }
            row_used[pr] = 1;
            pivots.emplace_back(c, pr);
        }
    }

    typename F::scalar coeff(index_t row, index_t col) const {
        for (const auto& [c, v] : rows[row])
            if (c == col) return v;
        return field.zero();
    }
};

// Basis of the null space; one vector per free column, ordered by ascending
// free column index (reduced echelon pivots ascending).
template <class F>
std::vector<SparseVec<F>> kernel_basis(const SparseMatrix<F>& m) {
    Rref<F> rr(m);
    std::vector<char> is_pivot(m.n_cols, 0);
    for (auto& [c, r] : rr.pivots) is_pivot[c] = 1;
    std::vector<SparseVec<F>> basis;
    for (index_t f = 0; f < m.n_cols; ++f) {
        if (is_pivot[f]) continue;
        SparseVec<F> x;
        for (auto& [c, r] : rr.pivots) {
            auto v = rr.coeff(r, f);
            if (!m.field.is_zero(v)) x.emplace_back(c, m.field.neg(v));
        }
        x.emplace_back(f, m.field.one());
        std::sort(x.begin(), x.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        basis.push_back(std::move(x));
    }
    return basis;
}

// Some x with Mx = b, or nullopt when inconsistent.
template <class F>
std::optional<std::vector<typename F::scalar>> solve(const SparseMatrix<F>& m,
                                                     const std::vector<typename F::scalar>& b) {
    if (b.size() != m.n_rows) throw std::invalid_argument("solve: dimension mismatch");
    SparseMatrix<F> aug(m.field, m.n_rows, m.n_cols + 1);
    aug.cols = m.cols;
    aug.cols.resize(m.n_cols + 1);
    for (index_t r = 0; r < m.n_rows; ++r)
        if (!m.field.is_zero(b[r])) aug.cols[m.n_cols].emplace_back(r, b[r]);
    Rref<F> rr(aug);
    std::vector<typename F::scalar> x(m.n_cols, m.field.zero());
    for (auto& [c, r] : rr.pivots) {
        if (c == m.n_cols) return std::nullopt;  // pivot in the augmented column
        x[c] = rr.coeff(r, m.n_cols);
    }
    return x;
}

inline std::string field_tag_of(const F2&) { return "f2"; }
inline std::string field_tag_of(const PrimeField& f) { return "fp:" + std::to_string(f.p); }
inline std::string field_tag_of(const RationalField&) { return "rational"; }

// Text dump: header "rows cols field", then one "r c value" line per entry
// in column-major order. Round-trips bit-exactly.
template <class F>
std::string dump_matrix(const SparseMatrix<F>& m) {
    std::ostringstream os;
    os << m.n_rows << " " << m.n_cols << " " << field_tag_of(m.field) << "\n";
    for (index_t c = 0; c < m.n_cols; ++c)
        for (const auto& [r, v] : m.cols[c]) os << r << " " << c << " " << m.field.to_string(v) << "\n";
    return os.str();
}

template <class F>
SparseMatrix<F> load_matrix(const F& field, const std::string& text) {
    std::istringstream is(text);
    index_t rows, cols;
    std::string tag;
    if (!(is >> rows >> cols >> tag)) throw std::invalid_argument("load_matrix: bad header");
    if (tag != field_tag_of(field)) throw std::invalid_argument("load_matrix: field mismatch: " + tag);
    SparseMatrix<F> m(field, rows, cols);
    index_t r, c;
    std::string val;
    while (is >> r >> c >> val) m.set(r, c, field.parse(val));
    return m;
}

}  // namespace gks
