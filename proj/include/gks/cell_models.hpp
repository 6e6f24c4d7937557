#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "gks/cell_complex.hpp"

namespace gks {

// Abstract simplicial complex as sorted vertex tuples; all faces present.
// Incidence signs follow the sorted-tuple convention (drop position i gives
// sign (-1)^i), so the induced boundary squares to zero automatically.
struct SimpComplex {
    size_t n_vertices = 0;
    std::vector<std::vector<index_t>> simplices;  // sorted tuples, deduped

    void close_under_faces() {
        std::set<std::vector<index_t>> all(simplices.begin(), simplices.end());
        std::vector<std::vector<index_t>> stack(simplices.begin(), simplices.end());
        while (!stack.empty()) {
            auto s = stack.back();
            stack.pop_back();
            if (s.size() <= 1) continue;
            for (size_t i = 0; i < s.size(); ++i) {
                std::vector<index_t> f;
                for (size_t j = 0; j < s.size(); ++j)
                    if (j != i) f.push_back(s[j]);
                if (all.insert(f).second) stack.push_back(f);
            }
        }
        simplices.assign(all.begin(), all.end());
        std::sort(simplices.begin(), simplices.end(), [](const auto& a, const auto& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        });
    }
};

// CellComplex from a simplicial complex; cells ordered by (dim, lex tuple).
// Returns the complex plus, for callers that need it, the tuple->cell map.
struct BuiltSimplicial {
    CellComplex X;
    std::map<std::vector<index_t>, index_t> cell_of;
};

inline BuiltSimplicial build_simplicial(const SimpComplex& K) {
    BuiltSimplicial out;
    for (const auto& s : K.simplices) {
        index_t id = out.X.add_cell(static_cast<uint8_t>(s.size() - 1));
        out.cell_of[s] = id;
    }
    for (const auto& s : K.simplices) {
        if (s.size() == 1) continue;
        index_t id = out.cell_of.at(s);
        std::vector<index_t> f(s.size() - 1);
        for (size_t i = 0; i < s.size(); ++i) {
            size_t w = 0;
            for (size_t j = 0; j < s.size(); ++j)
                if (j != i) f[w++] = s[j];
            out.X.facets[id].emplace_back(out.cell_of.at(f), static_cast<int8_t>(i % 2 == 0 ? 1 : -1));
        }
    }
    return out;
}

// m-gon model of the circle; vertex j sits at angle 2*pi*j/m, recorded in the
// chart as a rational multiple of pi.
inline CellComplex circle(index_t m) {
    if (m < 3) throw std::invalid_argument("circle: need m >= 3");
    SimpComplex K;
    K.n_vertices = m;
    for (index_t j = 0; j < m; ++j) K.simplices.push_back({j});
    for (index_t j = 0; j < m; ++j) {
        std::vector<index_t> e{j, (j + 1) % m};
        std::sort(e.begin(), e.end());
        K.simplices.push_back(e);
    }
    auto built = build_simplicial(K);
    CellComplex X = std::move(built.X);
    X.axis_names = {"theta"};
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    for (index_t j = 0; j < m; ++j) {
        index_t v = built.cell_of.at({j});
        X.vtx_chart[v] = {Rat(2 * static_cast<int64_t>(j), m)};
        double ang = 2.0 * M_PI * j / m;
        X.vtx_point[v] = {std::cos(ang), std::sin(ang)};
    }
    X.finalize();
    return X;
}

// 1-dimensional grid on [a, b] with the given step; (b-a)/step must be integral.
inline CellComplex interval_grid(const Rat& a, const Rat& b, const Rat& step) {
    if (!(a < b)) throw std::invalid_argument("interval_grid: need a < b");
    Rat span = (b - a) / step;
    if (span.den != 1 || span.num < 1) throw std::invalid_argument("interval_grid: step does not divide span");
    int64_t n = span.num;
    SimpComplex K;
    K.n_vertices = n + 1;
    for (int64_t j = 0; j <= n; ++j) K.simplices.push_back({static_cast<index_t>(j)});
    for (int64_t j = 0; j < n; ++j)
        K.simplices.push_back({static_cast<index_t>(j), static_cast<index_t>(j + 1)});
    auto built = build_simplicial(K);
    CellComplex X = std::move(built.X);
    X.axis_names = {"t"};
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    for (int64_t j = 0; j <= n; ++j) {
        index_t v = built.cell_of.at({static_cast<index_t>(j)});
        X.vtx_chart[v] = {a + step * Rat(j)};
        X.vtx_point[v] = {(a + step * Rat(j)).to_double()};
    }
    X.finalize();
    return X;
}

// Repeatedly subdivided octahedron boundary: the round 2-sphere. Vertices are
// unit vectors; charts stay empty (no exact grid on S^2).
inline CellComplex sphere2(int subdiv) {
    if (subdiv < 0) throw std::invalid_argument("sphere2: subdiv >= 0");
    struct V3 {
        double x, y, z;
    };
    std::vector<V3> pts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::vector<std::array<index_t, 3>> tris;
    for (int sx : {0, 1})
        for (int sy : {2, 3})
            for (int sz : {4, 5}) tris.push_back({static_cast<index_t>(sx), static_cast<index_t>(sy), static_cast<index_t>(sz)});
    auto normalize = [](V3 p) {
        double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
        return V3{p.x / n, p.y / n, p.z / n};
    };
    for (int s = 0; s < subdiv; ++s) {
        std::map<std::pair<index_t, index_t>, index_t> midpoint;
        auto mid = [&](index_t a, index_t b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find({key.first, key.second});
            if (it != midpoint.end()) return it->second;
            V3 m = normalize({(pts[a].x + pts[b].x) / 2, (pts[a].y + pts[b].y) / 2, (pts[a].z + pts[b].z) / 2});
            pts.push_back(m);
            index_t id = static_cast<index_t>(pts.size() - 1);
            midpoint[{key.first, key.second}] = id;
            return id;
        };
        std::vector<std::array<index_t, 3>> next;
        for (auto& t : tris) {
            index_t ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    SimpComplex K;
    K.n_vertices = pts.size();
    for (auto& t : tris) {
        std::vector<index_t> s(t.begin(), t.end());
        std::sort(s.begin(), s.end());
        K.simplices.push_back(s);
    }
    K.close_under_faces();
    auto built = build_simplicial(K);
    CellComplex X = std::move(built.X);
    X.axis_names = {};
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    for (index_t j = 0; j < pts.size(); ++j) {
        index_t v = built.cell_of.at({j});
        X.vtx_point[v] = {pts[j].x, pts[j].y, pts[j].z};
    }
    X.finalize();
    return X;
}

// Plain cellular product: cells are pairs, dimensions add, and
// del(a x b) = del(a) x b + (-1)^dim(a) a x del(b).
inline CellComplex product(const CellComplex& A, const CellComplex& B) {
    CellComplex X;
    size_t nb = B.size();
    auto id_of = [&](index_t a, index_t b) { return static_cast<index_t>(a * nb + b); };
    for (index_t a = 0; a < A.size(); ++a)
        for (index_t b = 0; b < B.size(); ++b)
            X.add_cell(static_cast<uint8_t>(A.cell_dim[a] + B.cell_dim[b]));
    for (index_t a = 0; a < A.size(); ++a)
        for (index_t b = 0; b < B.size(); ++b) {
            auto& fs = X.facets[id_of(a, b)];
            for (auto& [f, s] : A.facets[a]) fs.emplace_back(id_of(f, b), s);
            int8_t sign = A.cell_dim[a] % 2 == 0 ? 1 : -1;
            for (auto& [f, s] : B.facets[b]) fs.emplace_back(id_of(a, f), static_cast<int8_t>(sign * s));
        }
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    X.axis_names = A.axis_names;
    X.axis_names.insert(X.axis_names.end(), B.axis_names.begin(), B.axis_names.end());
    for (index_t a = 0; a < A.size(); ++a)
        for (index_t b = 0; b < B.size(); ++b) {
            if (A.cell_dim[a] == 0 && B.cell_dim[b] == 0) {
                index_t v = id_of(a, b);
                X.vtx_chart[v] = A.vtx_chart[a];
                X.vtx_chart[v].insert(X.vtx_chart[v].end(), B.vtx_chart[b].begin(), B.vtx_chart[b].end());
                X.vtx_point[v] = A.vtx_point[a];
                X.vtx_point[v].insert(X.vtx_point[v].end(), B.vtx_point[b].begin(), B.vtx_point[b].end());
            }
        }
    X.finalize();
    return X;
}

// Ordered simplicial product (staircase triangulation). Simplices are the
// monotone chains in the vertex-grid of a simplex pair; the diagonal of
// K x K is then an honest subcomplex, which the plain product cannot offer.
struct StaircaseProduct {
    CellComplex X;
    size_t nb = 0;  // vertex-pair id = a * nb + b
    std::map<std::vector<index_t>, index_t> cell_of;
};

inline StaircaseProduct staircase_product(const SimpComplex& K, const SimpComplex& L) {
    SimpComplex P;
    P.n_vertices = K.n_vertices * L.n_vertices;
    size_t nb = L.n_vertices;
    std::set<std::vector<index_t>> cells;
    for (const auto& sk : K.simplices)
        for (const auto& sl : L.simplices) {
            size_t p = sk.size() - 1, q = sl.size() - 1;
            // Delannoy chains from (0,0) to (p,q), steps +(1,0), +(0,1), +(1,1)
            std::vector<std::pair<size_t, size_t>> path{{0, 0}};
            std::function<void()> rec = [&]() {
                auto [i, j] = path.back();
                if (i == p && j == q) {
                    std::vector<index_t> chain;
                    for (auto& [a, b] : path) chain.push_back(static_cast<index_t>(sk[a] * nb + sl[b]));
                    cells.insert(chain);
                    return;
                }
                if (i < p) {
                    path.emplace_back(i + 1, j);
                    rec();
                    path.pop_back();
                }
                if (j < q) {
                    path.emplace_back(i, j + 1);
                    rec();
                    path.pop_back();
                }
                if (i < p && j < q) {
                    path.emplace_back(i + 1, j + 1);
                    rec();
                    path.pop_back();
                }
            };
            rec();
        }
    P.simplices.assign(cells.begin(), cells.end());
    std::sort(P.simplices.begin(), P.simplices.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    StaircaseProduct out;
    auto built = build_simplicial(P);
    out.X = std::move(built.X);
    out.cell_of = std::move(built.cell_of);
    out.nb = nb;
    out.X.vtx_chart.assign(out.X.size(), {});
    out.X.vtx_point.assign(out.X.size(), {});
    out.X.finalize();
    return out;
}

// The nine-vertex triangulation of the complex projective plane. Vertices
// are the points of the affine plane over F_3 (labeled 3x + y); the minimal
// non-faces are the 36 sets "line plus a point of the successor line in its
// parallel class", with the three parallels of each class cycled in order of
// their least point. The complex is 3-neighborly with f-vector
// (9, 36, 84, 90, 36) and Euler characteristic 3.
inline CellComplex cp2_nine_vertex() {
    auto pt = [](int x, int y) { return static_cast<index_t>(3 * ((x % 3 + 3) % 3) + ((y % 3 + 3) % 3)); };
    const int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, 2}};
    std::set<std::vector<index_t>> nonfaces;
    for (auto& d : dirs) {
        std::vector<std::vector<index_t>> cls;
        std::set<std::vector<index_t>> seen;
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y) {
                std::vector<index_t> line;
                for (int k = 0; k < 3; ++k) line.push_back(pt(x + k * d[0], y + k * d[1]));
                std::sort(line.begin(), line.end());
                if (seen.insert(line).second) cls.push_back(line);
            }
        std::sort(cls.begin(), cls.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
        for (size_t j = 0; j < cls.size(); ++j) {
            const auto& nxt = cls[(j + 1) % cls.size()];
            for (index_t p : nxt) {
                std::vector<index_t> nf = cls[j];
                nf.push_back(p);
                std::sort(nf.begin(), nf.end());
                nonfaces.insert(nf);
            }
        }
    }
    auto contains_nonface = [&](const std::vector<index_t>& s) {
        if (s.size() < 4) return false;
        std::vector<index_t> sub(4);
        for (size_t a = 0; a < s.size(); ++a)
            for (size_t b = a + 1; b < s.size(); ++b)
                for (size_t c = b + 1; c < s.size(); ++c)
                    for (size_t d2 = c + 1; d2 < s.size(); ++d2) {
                        sub = {s[a], s[b], s[c], s[d2]};
                        if (nonfaces.count(sub)) return true;
                    }
        return false;
    };
    SimpComplex K;
    K.n_vertices = 9;
    std::vector<index_t> all{0, 1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<index_t> facet(5);
    for (size_t a = 0; a < 9; ++a)
        for (size_t b = a + 1; b < 9; ++b)
            for (size_t c = b + 1; c < 9; ++c)
                for (size_t d2 = c + 1; d2 < 9; ++d2)
                    for (size_t e = d2 + 1; e < 9; ++e) {
                        facet = {all[a], all[b], all[c], all[d2], all[e]};
                        if (!contains_nonface(facet)) K.simplices.push_back(facet);
                    }
    K.close_under_faces();
    auto built = build_simplicial(K);
    CellComplex X = std::move(built.X);
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    X.finalize();
    return X;
}

// Extracts the simplex tuples of a simplicial CellComplex (corner lists are
// exactly the sorted vertex tuples).
inline SimpComplex as_simp_complex(const CellComplex& X) {
    SimpComplex K;
    K.n_vertices = 0;
    for (index_t c = 0; c < X.size(); ++c)
        if (X.cell_dim[c] == 0) K.n_vertices++;
    for (index_t c = 0; c < X.size(); ++c) K.simplices.push_back(X.corners[c]);
    return K;
}

}  // namespace gks
