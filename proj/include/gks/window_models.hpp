#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gks/cell_models.hpp"

namespace gks {

// ---------------------------------------------------------------------------
// Crossed grids. Squares are cut by both diagonals through a center vertex,
// which makes every line {x = c}, {x - t = c}, {x + t = c} on the grid a
// subcomplex. The kernel models need this so that distance cones around
// corner points are unions of cells.
// ---------------------------------------------------------------------------

struct CrossedGrid {
    CellComplex X;
    std::vector<index_t> vertex_shift;  // a -> a + half period (cylinder only)
};

namespace detail {

// Crossed rectangle strip; used both for the flat plane and the cylinder.
// Columns i = 0..A-1 (wrapping iff wrap), rows r = 0..R. h is the grid step
// in units of pi. Margins add half-height zigzag triangles through the
// top/bottom square centers.
inline CrossedGrid crossed_grid(int64_t A, int64_t R, Rat h, Rat a0, Rat t0, bool wrap, bool margins) {
    if (A < (wrap ? 4 : 1) || R < 1) throw std::invalid_argument("crossed_grid: degenerate");
    int64_t nA = wrap ? A : A + 1;  // vertex columns
    auto vid = [&](int64_t i, int64_t r) { return static_cast<index_t>(r * nA + (wrap ? ((i % A) + A) % A : i)); };
    int64_t n_grid = nA * (R + 1);
    int64_t n_sq_cols = wrap ? A : A;  // squares per row
    auto cid = [&](int64_t i, int64_t r) {  // center of square (i, r)
        return static_cast<index_t>(n_grid + r * n_sq_cols + (wrap ? ((i % A) + A) % A : i));
    };
    int64_t n_centers = n_sq_cols * R;
    int64_t margin_base = n_grid + n_centers;
    // margin layout: full vertex rows at t = +-(R h + h/2) plus per-column
    // half-height mids, each margin column cut into three triangles by the
    // slope-±1 diagonals, keeping the cone strata cellular up to the boundary
    auto top_v = [&](int64_t i) { return static_cast<index_t>(margin_base + (wrap ? ((i % A) + A) % A : i)); };
    auto top_m = [&](int64_t i) { return static_cast<index_t>(margin_base + nA + (wrap ? ((i % A) + A) % A : i)); };
    auto bot_v = [&](int64_t i) {
        return static_cast<index_t>(margin_base + nA + n_sq_cols + (wrap ? ((i % A) + A) % A : i));
    };
    auto bot_m = [&](int64_t i) {
        return static_cast<index_t>(margin_base + 2 * nA + n_sq_cols + (wrap ? ((i % A) + A) % A : i));
    };
    int64_t n_vertices = margin_base + (margins ? 2 * (nA + n_sq_cols) : 0);

    SimpComplex K;
    K.n_vertices = n_vertices;
    for (int64_t v = 0; v < n_vertices; ++v) K.simplices.push_back({static_cast<index_t>(v)});
    auto tri = [&](index_t u, index_t v, index_t w) {
        std::vector<index_t> s{u, v, w};
        std::sort(s.begin(), s.end());
        K.simplices.push_back(s);
    };
    for (int64_t r = 0; r < R; ++r)
        for (int64_t i = 0; i < n_sq_cols; ++i) {
            index_t c00 = vid(i, r), c10 = vid(i + 1, r), c01 = vid(i, r + 1), c11 = vid(i + 1, r + 1);
            index_t cc = cid(i, r);
            tri(c00, c10, cc);
            tri(c01, c11, cc);
            tri(c00, c01, cc);
            tri(c10, c11, cc);
        }
    if (margins)
        for (int64_t i = 0; i < n_sq_cols; ++i) {
            tri(vid(i, R), vid(i + 1, R), top_m(i));
            tri(vid(i, R), top_v(i), top_m(i));
            tri(vid(i + 1, R), top_v(i + 1), top_m(i));
            tri(vid(i, 0), vid(i + 1, 0), bot_m(i));
            tri(vid(i, 0), bot_v(i), bot_m(i));
            tri(vid(i + 1, 0), bot_v(i + 1), bot_m(i));
        }
    K.close_under_faces();
    auto built = build_simplicial(K);
    CrossedGrid out;
    out.X = std::move(built.X);
    out.X.axis_names = {"a", "t"};
    out.X.vtx_chart.assign(out.X.size(), {});
    out.X.vtx_point.assign(out.X.size(), {});
    Rat half = h / Rat(2);
    auto set_chart = [&](index_t simp_vertex, Rat a, Rat t) {
        index_t cell = built.cell_of.at({simp_vertex});
        out.X.vtx_chart[cell] = {a, t};
        out.X.vtx_point[cell] = {a.to_double(), t.to_double()};
    };
    for (int64_t r = 0; r <= R; ++r)
        for (int64_t i = 0; i < nA; ++i) set_chart(vid(i, r), a0 + h * Rat(i), t0 + h * Rat(r));
    for (int64_t r = 0; r < R; ++r)
        for (int64_t i = 0; i < n_sq_cols; ++i)
            set_chart(cid(i, r), a0 + h * Rat(i) + half, t0 + h * Rat(r) + half);
    if (margins) {
        Rat t_top = t0 + h * Rat(R) + half, t_bot = t0 - half;
        for (int64_t i = 0; i < nA; ++i) {
            set_chart(top_v(i), a0 + h * Rat(i), t_top);
            set_chart(bot_v(i), a0 + h * Rat(i), t_bot);
        }
        for (int64_t i = 0; i < n_sq_cols; ++i) {
            set_chart(top_m(i), a0 + h * Rat(i) + half, t_top);
            set_chart(bot_m(i), a0 + h * Rat(i) + half, t_bot);
        }
    }
    out.X.finalize();
    if (wrap) {
        // vertex map for a |-> a + half period (A/2 columns)
        out.vertex_shift.assign(out.X.size(), 0);
        for (int64_t r = 0; r <= R; ++r)
            for (int64_t i = 0; i < nA; ++i)
                out.vertex_shift[built.cell_of.at({vid(i, r)})] = built.cell_of.at({vid(i + A / 2, r)});
        for (int64_t r = 0; r < R; ++r)
            for (int64_t i = 0; i < n_sq_cols; ++i)
                out.vertex_shift[built.cell_of.at({cid(i, r)})] = built.cell_of.at({cid(i + A / 2, r)});
        if (margins)
            for (int64_t i = 0; i < n_sq_cols; ++i) {
                out.vertex_shift[built.cell_of.at({top_v(i)})] = built.cell_of.at({top_v(i + A / 2)});
                out.vertex_shift[built.cell_of.at({top_m(i)})] = built.cell_of.at({top_m(i + A / 2)});
                out.vertex_shift[built.cell_of.at({bot_v(i)})] = built.cell_of.at({bot_v(i + A / 2)});
                out.vertex_shift[built.cell_of.at({bot_m(i)})] = built.cell_of.at({bot_m(i + A / 2)});
            }
    }
    return out;
}

}  // namespace detail

// Flat crossed plane on [-L, L] x [-L, L] with step h (units of pi are not
// meaningful here; h is just a length).
inline CellComplex crossed_plane(int64_t n, Rat h) {
    auto g = detail::crossed_grid(2 * n, 2 * n, h, -h * Rat(n), -h * Rat(n), false, false);
    g.X.axis_names = {"x", "t"};
    return std::move(g.X);
}

// Crossed cylinder over the a-circle of circumference 4*pi (columns A = 4m),
// rows covering [-w*pi, w*pi] with crossed half-row margins reaching +-(w*pi + pi/2m).
inline CrossedGrid crossed_cylinder(int64_t m, int64_t w) {
    if (m < 2 || w < 1) throw std::invalid_argument("crossed_cylinder: need m >= 2, w >= 1");
    return detail::crossed_grid(4 * m, 2 * w * m, Rat(1, m), Rat(0), Rat(-w), true, true);
}

// Mapping torus of a simplicial automorphism given on vertices: B layers of
// (base x vertex) and (base x edge) cells; the last edge layer glues to layer
// zero through the automorphism. With the a-shift by half the cylinder
// circumference this realizes M x M x window for M = S^1 exactly: the chart
// is (a, t, b) with theta_1 = (a+b)/2, theta_2 = (b-a)/2.
inline CellComplex mapping_torus(const CellComplex& base, const std::vector<index_t>& vertex_shift,
                                 int64_t layers, Rat b_step) {
    if (layers < 2) throw std::invalid_argument("mapping_torus: need >= 2 layers");
    size_t nb = base.size();
    // cell id: (layer, kind, base cell); kind 0 = base x vertex, 1 = base x edge
    auto id_of = [&](int64_t ell, int kind, index_t c) {
        return static_cast<index_t>((2 * ell + kind) * nb + c);
    };
    // image cell + orientation sign of the shift automorphism
    std::map<std::vector<index_t>, index_t> cell_of_tuple;
    for (index_t c = 0; c < nb; ++c) cell_of_tuple[base.corners[c]] = c;
    std::vector<index_t> shift_cell(nb);
    std::vector<int8_t> shift_sign(nb);
    for (index_t c = 0; c < nb; ++c) {
        std::vector<index_t> img;
        for (index_t v : base.corners[c]) img.push_back(vertex_shift[v]);
        int8_t sg = 1;
        for (size_t i = 0; i < img.size(); ++i)
            for (size_t j = i + 1; j < img.size(); ++j)
                if (img[i] > img[j]) sg = -sg;
        std::sort(img.begin(), img.end());
        auto it = cell_of_tuple.find(img);
        if (it == cell_of_tuple.end()) throw std::logic_error("mapping_torus: shift is not simplicial");
        shift_cell[c] = it->second;
        shift_sign[c] = sg;
    }
    CellComplex X;
    for (int64_t ell = 0; ell < layers; ++ell)
        for (int kind : {0, 1})
            for (index_t c = 0; c < nb; ++c) {
                (void)X.add_cell(static_cast<uint8_t>(base.cell_dim[c] + kind));
            }
    // ids were appended in (ell, kind, c) order; remap to id_of layout
    // (the loop order above matches id_of exactly)
    for (int64_t ell = 0; ell < layers; ++ell)
        for (index_t c = 0; c < nb; ++c) {
            auto& fs_v = X.facets[id_of(ell, 0, c)];
            for (auto& [f, s] : base.facets[c]) fs_v.emplace_back(id_of(ell, 0, f), s);
            auto& fs_e = X.facets[id_of(ell, 1, c)];
            for (auto& [f, s] : base.facets[c]) fs_e.emplace_back(id_of(ell, 1, f), s);
            int8_t sign = base.cell_dim[c] % 2 == 0 ? 1 : -1;
            fs_e.emplace_back(id_of(ell, 0, c), static_cast<int8_t>(-sign));
            if (ell + 1 < layers)
                fs_e.emplace_back(id_of(ell + 1, 0, c), sign);
            else
                fs_e.emplace_back(id_of(0, 0, shift_cell[c]), static_cast<int8_t>(sign * shift_sign[c]));
        }
    X.axis_names = {"a", "t", "b"};
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    for (int64_t ell = 0; ell < layers; ++ell)
        for (index_t c = 0; c < nb; ++c)
            if (base.cell_dim[c] == 0) {
                index_t v = id_of(ell, 0, c);
                Rat a = base.vtx_chart[c][0], t = base.vtx_chart[c][1], b = b_step * Rat(ell);
                X.vtx_chart[v] = {a, t, b};
                // theta representatives, in units of pi
                X.vtx_point[v] = {((a + b) / Rat(2)).to_double(), ((b - a) / Rat(2)).to_double(), t.to_double()};
            }
    X.finalize();
    return X;
}

// Time path with half-step margin vertices: -T, -w*pi .. w*pi by pi/mt, T,
// where T = w*pi + pi/(2*mt).
inline CellComplex time_window_path(int64_t w, int64_t mt) {
    if (w < 1 || mt < 1) throw std::invalid_argument("time_window_path: bad parameters");
    std::vector<Rat> ts;
    Rat h(1, mt), half(1, 2 * mt);
    ts.push_back(Rat(-w) - half);
    for (int64_t k = 0; k <= 2 * w * mt; ++k) ts.push_back(Rat(-w) + h * Rat(k));
    ts.push_back(Rat(w) + half);
    SimpComplex K;
    K.n_vertices = ts.size();
    for (index_t j = 0; j < ts.size(); ++j) K.simplices.push_back({j});
    for (index_t j = 0; j + 1 < ts.size(); ++j) K.simplices.push_back({j, static_cast<index_t>(j + 1)});
    auto built = build_simplicial(K);
    CellComplex X = std::move(built.X);
    X.axis_names = {"t"};
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    for (index_t j = 0; j < ts.size(); ++j) {
        index_t v = built.cell_of.at({j});
        X.vtx_chart[v] = {ts[j]};
        X.vtx_point[v] = {ts[j].to_double()};
    }
    X.finalize();
    return X;
}

// ---------------------------------------------------------------------------
// Kernel-domain models: a window complex over M x M x [-T, T] with exact
// per-vertex distance data (in units of pi) and a direction-class chart for
// microsupport queries.
// ---------------------------------------------------------------------------

enum class ModelKind { sphere_one, flat_plane, sphere_pair };

struct KernelModel {
    ModelKind kind;
    CellComplex X;
    Rat T;                      // window half-width, units of pi
    int time_axis = 1;          // chart index carrying time
    std::vector<Rat> vdist;     // dist(x, y) per vertex, units of pi
    std::vector<Rat> vtime;     // time per vertex
    std::vector<char> vdiag;    // dist == 0
    std::vector<std::string> dir_axes;      // names of the direction chart axes
    std::vector<Rat> axis_period;           // 0 = aperiodic

    Rat dist_to_cut(index_t v) const { return Rat(1) - vdist[v]; }

    // Exact displacement of corner vertex w relative to base vertex v along a
    // direction-chart axis. Periodic axes reduce to the short representative;
    // on the twisted product, crossing the b-wrap applies the deck shift
    // a -> a + 2 pi, so the a-chart of such corners is unwound first. The
    // short b-representative is unambiguous only for >= 3 layers.
    Rat axis_delta(size_t axis, index_t v, index_t w) const {
        if (kind == ModelKind::sphere_pair) {
            // axis 0 = radial distance change, axis 1 = time change
            if (axis == 0) return vdist[w] - vdist[v];
            return vtime[w] - vtime[v];
        }
        Rat d = X.vtx_chart[w][axis] - X.vtx_chart[v][axis];
        if (kind == ModelKind::sphere_one && axis == 0) {
            Rat bper = axis_period[2];
            Rat raw_b = X.vtx_chart[w][2] - X.vtx_chart[v][2];
            Rat short_b = rat_mod(raw_b, bper);
            if (short_b > bper / Rat(2)) short_b = short_b - bper;
            Rat wraps = (raw_b - short_b) / bper;  // integer: -1, 0, or 1 within a star
            d = d + Rat(2) * wraps;
        }
        Rat period = axis < axis_period.size() ? axis_period[axis] : Rat(0);
        if (period.num != 0) {
            d = rat_mod(d, period);
            if (d > period / Rat(2)) d = d - period;
        }
        return d;
    }

    size_t n_dir_axes() const { return dir_axes.size(); }
};

// Snaps x (measured in units of pi) to a nearby rational with small
// denominator; falls back to a fine dyadic approximation. The fallback keeps
// comparisons deterministic but is a surrogate, to be validated by rank
// checks downstream.
inline Rat snap_to_rat(double x, int64_t max_den = 48, double tol = 1e-9) {
    for (int64_t q = 1; q <= max_den; ++q) {
        double scaled = x * static_cast<double>(q);
        double rounded = std::nearbyint(scaled);
        if (std::abs(scaled - rounded) < tol * q) return Rat(static_cast<int64_t>(rounded), q);
    }
    const int64_t den = 1ll << 20;
    return Rat(static_cast<int64_t>(std::llround(x * static_cast<double>(den))), den);
}

// S^1 kernel model: crossed cylinder in (a = theta_1 - theta_2, t), times the
// twisted b-circle. Everything is exact: dist = fold(|a|) in units of pi.
inline KernelModel sphere_one_model(int64_t mesh, int64_t window, int64_t b_layers = 4) {
    if (b_layers < 3) throw std::invalid_argument("sphere_one_model: need >= 3 b-layers (wrap disambiguation)");
    auto cyl = crossed_cylinder(mesh, window);
    KernelModel M;
    M.kind = ModelKind::sphere_one;
    M.X = mapping_torus(cyl.X, cyl.vertex_shift, b_layers, Rat(1));
    M.T = Rat(window) + Rat(1, 2 * mesh);
    M.time_axis = 1;
    M.dir_axes = {"a", "t", "b"};
    M.axis_period = {Rat(4), Rat(0), Rat(b_layers)};
    size_t n = M.X.size();
    M.vdist.assign(n, Rat(0));
    M.vtime.assign(n, Rat(0));
    M.vdiag.assign(n, 0);
    for (index_t v = 0; v < n; ++v) {
        if (M.X.vtx_chart[v].empty()) continue;
        Rat a = rat_mod(M.X.vtx_chart[v][0], Rat(4));
        Rat d = rat_mod(a, Rat(2));
        if (d > Rat(1)) d = Rat(2) - d;
        M.vdist[v] = d;
        M.vtime[v] = M.X.vtx_chart[v][1];
        M.vdiag[v] = d == Rat(0) ? 1 : 0;
    }
    return M;
}

// Flat R^1 x R model on a crossed plane; dist = |x|.
inline KernelModel flat_model(int64_t n, Rat h) {
    KernelModel M;
    M.kind = ModelKind::flat_plane;
    M.X = crossed_plane(n, h);
    M.T = h * Rat(n);
    M.time_axis = 1;
    M.dir_axes = {"x", "t"};
    M.axis_period = {Rat(0), Rat(0)};
    size_t sz = M.X.size();
    M.vdist.assign(sz, Rat(0));
    M.vtime.assign(sz, Rat(0));
    M.vdiag.assign(sz, 0);
    for (index_t v = 0; v < sz; ++v) {
        if (M.X.vtx_chart[v].empty()) continue;
        Rat x = M.X.vtx_chart[v][0];
        M.vdist[v] = x < Rat(0) ? -x : x;
        M.vtime[v] = M.X.vtx_chart[v][1];
        M.vdiag[v] = M.vdist[v] == Rat(0) ? 1 : 0;
    }
    return M;
}

// S^2 x S^2 x window model via the staircase product of subdivided
// octahedra. Serves both the 2-sphere and CP^1 (round metric of diameter pi;
// dist is the angle between unit vectors, snapped to rational multiples of
// pi where possible). subdiv 0 with time mesh 2 is exactly aligned.
inline KernelModel sphere_pair_model(int subdiv, int64_t window, int64_t time_mesh) {
    CellComplex S = sphere2(subdiv);
    SimpComplex K = as_simp_complex(S);
    auto prod = staircase_product(K, K);
    CellComplex XY = std::move(prod.X);
    size_t nb = prod.nb;
    // positions of the S^2 vertices by simplicial index
    std::vector<std::array<double, 3>> pos;
    for (index_t c = 0; c < S.size(); ++c)
        if (S.cell_dim[c] == 0) pos.push_back({S.vtx_point[c][0], S.vtx_point[c][1], S.vtx_point[c][2]});
    XY.vtx_chart.assign(XY.size(), {});
    XY.vtx_point.assign(XY.size(), {});
    XY.axis_names = {"d"};
    for (index_t c = 0; c < XY.size(); ++c)
        if (XY.cell_dim[c] == 0) {
            index_t pair_vertex = XY.corners[c][0];
            index_t va = static_cast<index_t>(pair_vertex / nb), vb = static_cast<index_t>(pair_vertex % nb);
            double dot = pos[va][0] * pos[vb][0] + pos[va][1] * pos[vb][1] + pos[va][2] * pos[vb][2];
            dot = std::max(-1.0, std::min(1.0, dot));
            double ang = std::acos(dot) / M_PI;
            XY.vtx_chart[c] = {snap_to_rat(ang, 4 * (subdiv + 1) * (subdiv + 1))};
            XY.vtx_point[c] = {pos[va][0], pos[va][1], pos[va][2], pos[vb][0], pos[vb][1], pos[vb][2]};
        }
    CellComplex Tm = time_window_path(window, time_mesh);
    KernelModel M;
    M.kind = ModelKind::sphere_pair;
    M.X = product(XY, Tm);
    M.T = Rat(window) + Rat(1, 2 * time_mesh);
    M.dir_axes = {"d", "t"};
    M.axis_period = {Rat(0), Rat(0)};
    size_t n = M.X.size();
    M.vdist.assign(n, Rat(0));
    M.vtime.assign(n, Rat(0));
    M.vdiag.assign(n, 0);
    // product() vertex charts are concatenated (d, t)
    for (index_t v = 0; v < n; ++v) {
        if (M.X.vtx_chart[v].size() != 2) continue;
        M.vdist[v] = M.X.vtx_chart[v][0];
        M.vtime[v] = M.X.vtx_chart[v][1];
        M.vdiag[v] = M.vdist[v] == Rat(0) ? 1 : 0;
    }
    M.time_axis = 1;
    return M;
}

// Region value g at a vertex, in units of pi: membership is {g < 0} for
// positive (open) indices and {g <= 0} for negative (closed) ones.
//   i > 0 odd : dist(x,y)   < t - (i-1)pi
//   i > 0 even: dist(x,D_y) < t - (i-1)pi
//   i < 0 odd : dist(x,y)  <= -t - (|i|-1)pi
//   i < 0 even: dist(x,D_y)<= -t - (|i|-1)pi
// On spheres D_y = {-y}, so dist(x, D_y) = pi - dist(x, y) in both cases.
inline CornerPredicate region_predicate(const KernelModel& M, int region_index) {
    if (region_index == 0) throw std::invalid_argument("region_predicate: index 0");
    bool positive = region_index > 0;
    int64_t k = positive ? region_index - 1 : -region_index - 1;
    bool even = (positive ? region_index : -region_index) % 2 == 0;
    CornerPredicate p;
    p.strict = positive;
    p.value = [&M, positive, k, even](index_t v) {
        Rat base = even ? M.dist_to_cut(v) : M.vdist[v];
        Rat t = M.vtime[v];
        return positive ? base - t + Rat(k) : base + t + Rat(k);
    };
    return p;
}

inline CellSet region_cells(const KernelModel& M, int region_index) {
    return cells_where(M.X, region_predicate(M, region_index));
}

// Closed slice subcomplex {t == tau}; tau must be a vertex time on the grid.
inline CellSet time_slice(const KernelModel& M, const Rat& tau) {
    CellSet s(M.X, SetKind::closed_set);
    bool found = false;
    for (index_t c = 0; c < M.X.size(); ++c) {
        bool all = !M.X.corners[c].empty();
        for (index_t v : M.X.corners[c])
            if (M.vtime[v] != tau) {
                all = false;
                break;
            }
        if (all) {
            s.member[c] = 1;
            if (M.X.cell_dim[c] == 0) found = true;
        }
    }
    if (!found) throw std::invalid_argument("time_slice: tau is not a grid time");
    return s;
}

// Closed diagonal subcomplex {dist == 0}.
inline CellSet diagonal_cells(const KernelModel& M) {
    CellSet s(M.X, SetKind::closed_set);
    for (index_t c = 0; c < M.X.size(); ++c) {
        bool all = !M.X.corners[c].empty();
        for (index_t v : M.X.corners[c])
            if (!M.vdiag[v]) {
                all = false;
                break;
            }
        s.member[c] = all ? 1 : 0;
    }
    return s;
}

}  // namespace gks
