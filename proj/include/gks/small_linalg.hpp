#pragma once

#include <stdexcept>
#include <vector>

#include "gks/fields.hpp"

namespace gks {

// Dense row-major matrix for the per-cell local algebra of the resolution
// machinery; dimensions stay tiny.
template <class F>
struct SmallMat {
    using scalar = typename F::scalar;
    index_t rows = 0, cols = 0;
    std::vector<scalar> a;

    SmallMat() = default;
    SmallMat(const F& f, index_t r, index_t c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, f.zero()) {}

    scalar& at(index_t r, index_t c) { return a[static_cast<size_t>(r) * cols + c]; }
    const scalar& at(index_t r, index_t c) const { return a[static_cast<size_t>(r) * cols + c]; }

    static SmallMat identity(const F& f, index_t n) {
        SmallMat m(f, n, n);
        for (index_t i = 0; i < n; ++i) m.at(i, i) = f.one();
        return m;
    }

    std::vector<scalar> apply(const F& f, const std::vector<scalar>& x) const {
        std::vector<scalar> y(rows, f.zero());
        for (index_t r = 0; r < rows; ++r)
            for (index_t c = 0; c < cols; ++c)
                if (!f.is_zero(at(r, c))) y[r] = f.add(y[r], f.mul(at(r, c), x[c]));
        return y;
    }
};

// Gaussian elimination state over columns of a dense matrix; used for greedy
// basis extension, kernels and solves. Deterministic: pivots take the lowest
// available row.
template <class F>
struct DenseEliminator {
    const F& field;
    index_t rows;
    std::vector<std::vector<typename F::scalar>> basis;  // reduced columns
    std::vector<index_t> pivot_row;                      // per basis column

    DenseEliminator(const F& f, index_t r) : field(f), rows(r) {}

    // Reduces v in place; returns true if it vanished (dependent).
    bool reduce(std::vector<typename F::scalar>& v) const {
        for (size_t b = 0; b < basis.size(); ++b) {
            auto lead = v[pivot_row[b]];
            if (field.is_zero(lead)) continue;
            for (index_t r = 0; r < rows; ++r)
                v[r] = field.sub(v[r], field.mul(lead, basis[b][r]));
        }
        for (index_t r = 0; r < rows; ++r)
            if (!field.is_zero(v[r])) return false;
        return true;
    }

    bool add(std::vector<typename F::scalar> v) {
        if (reduce(v)) return false;
        index_t p = 0;
        while (field.is_zero(v[p])) ++p;
        auto inv = field.inv(v[p]);
        for (index_t r = 0; r < rows; ++r) v[r] = field.mul(v[r], inv);
        basis.push_back(std::move(v));
        pivot_row.push_back(p);
        return true;
    }

    size_t rank() const { return basis.size(); }
};

// Kernel basis of a dense matrix, echelon form with ascending free columns.
template <class F>
std::vector<std::vector<typename F::scalar>> dense_kernel(const F& field, const SmallMat<F>& m) {
    // row-reduce a working copy
    std::vector<std::vector<typename F::scalar>> rows(m.rows);
    for (index_t r = 0; r < m.rows; ++r) {
        rows[r].resize(m.cols);
        for (index_t c = 0; c < m.cols; ++c) rows[r][c] = m.at(r, c);
    }
    std::vector<std::pair<index_t, index_t>> pivots;  // (col, row)
    std::vector<char> used(m.rows, 0);
    for (index_t c = 0; c < m.cols; ++c) {
        index_t pr = m.rows;
        for (index_t r = 0; r < m.rows; ++r)
            if (!used[r] && !field.is_zero(rows[r][c])) {
                bool leading = true;
                for (auto& [pc, prr] : pivots)
                    if (prr == r) leading = false;
                (void)leading;
                pr = r;
                break;
            }
        if (pr == m.rows) continue;
        auto inv = field.inv(rows[pr][c]);
        for (index_t cc = 0; cc < m.cols; ++cc) rows[pr][cc] = field.mul(rows[pr][cc], inv);
        for (index_t r = 0; r < m.rows; ++r) {
            if (r == pr) continue;
            auto lead = rows[r][c];
            if (field.is_zero(lead)) continue;
            for (index_t cc = 0; cc < m.cols; ++cc)
                rows[r][cc] = field.sub(rows[r][cc], field.mul(lead, rows[pr][cc]));
        }
        used[pr] = 1;
        pivots.emplace_back(c, pr);
    }
    std::vector<char> is_pivot(m.cols, 0);
    for (auto& [c, r] : pivots) is_pivot[c] = 1;
    std::vector<std::vector<typename F::scalar>> out;
    for (index_t f = 0; f < m.cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<typename F::scalar> x(m.cols, field.zero());
        x[f] = field.one();
        for (auto& [c, r] : pivots) x[c] = field.neg(rows[r][f]);
        out.push_back(std::move(x));
    }
    return out;
}

// Solves B x = v for B given by columns (assumed independent); throws if
// inconsistent.
template <class F>
std::vector<typename F::scalar> dense_solve_cols(const F& field,
                                                 const std::vector<std::vector<typename F::scalar>>& cols,
                                                 std::vector<typename F::scalar> v) {
    size_t n = cols.empty() ? 0 : cols[0].size();
    SmallMat<F> m(field, static_cast<index_t>(n), static_cast<index_t>(cols.size() + 1));
    for (index_t c = 0; c < cols.size(); ++c)
        for (index_t r = 0; r < n; ++r) m.at(r, c) = cols[c][r];
    for (index_t r = 0; r < n; ++r) m.at(r, static_cast<index_t>(cols.size())) = v[r];
    auto ker = dense_kernel(field, m);
    // look for a kernel vector with nonzero last coordinate
    for (auto& k : ker) {
        auto last = k.back();
        if (!field.is_zero(last)) {
            auto s = field.neg(field.inv(last));
            std::vector<typename F::scalar> x(cols.size());
            for (size_t i = 0; i < cols.size(); ++i) x[i] = field.mul(k[i], s);
            return x;
        }
    }
    throw std::logic_error("dense_solve_cols: inconsistent system");
}

}  // namespace gks
