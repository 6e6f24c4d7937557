#pragma once

#include <atomic>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "gks/geometry.hpp"
#include "gks/sheaf.hpp"
#include "gks/window_models.hpp"

namespace gks {

// ---------------------------------------------------------------------------
// Orchestration of the construction: regions, generators, towers, the glued
// kernel, and the verification battery.
// ---------------------------------------------------------------------------

struct BuildConfig {
    Space space = Space::sphere;
    int n = 1;
    int64_t mesh = 12;        // sphere n=1: a-grid step pi/mesh; pair models: time step pi/mesh
    int64_t window = 2;       // T = window*pi + pi/(2*mesh)
    int64_t b_layers = 4;     // sphere n=1 model only (>= 3)
    int subdiv = 0;           // pair models only
    uint64_t seed = 1;
    int jobs = 1;
    bool validate_regions = false;  // rank-compare the discretized regions (slow at scale)
};

struct SsSample {
    index_t cell;
    std::vector<int> dir_class;
    bool got;
    bool expected;
};

struct BuildDiagnostics {
    std::vector<std::string> notes;
    std::map<int, std::map<int, index_t>> ext_table;  // step i -> Ext ranks of (Z_i, Z_next)
    bool t0_check = false;
    std::vector<SsSample> ss_mismatches;
    size_t ss_samples = 0;
};

template <class F>
struct KernelAssembly {
    BuildConfig cfg;
    F field;
    KernelModel model;
    int imax = 0;                                    // largest |i| with a region inside the window
    std::map<int, CellSet> regions;
    std::deque<CellularSheaf<F>> storage;            // owns every intermediate sheaf
    std::map<int, const CellularSheaf<F>*> region_sheaf;
    std::map<int, std::vector<std::tuple<index_t, index_t, typename F::scalar>>> psi_entries;
    const CellularSheaf<F>* k_plus = nullptr;
    const CellularSheaf<F>* k_minus = nullptr;
    const CellularSheaf<F>* kernel = nullptr;
    BuildDiagnostics diag;
};

// Per-step generator degree: n on spheres; 2 for odd steps and 2n for even
// steps on projective space.
inline int generator_degree(const BuildConfig& cfg, int step_parity_index) {
    if (cfg.space == Space::sphere) return cfg.n;
    return std::abs(step_parity_index) % 2 == 1 ? 2 : 2 * cfg.n;
}

// Degree of the final gluing class psi_0.
inline int final_degree(const BuildConfig& cfg) {
    return cfg.space == Space::sphere ? cfg.n + 1 : 2 * cfg.n + 1;
}

// Cumulative shift of the tower target K_{Z_{i+1}}[...] at stage i > 0:
// sum of the first i generator degrees minus (i - 1).
inline int tower_shift_plus(const BuildConfig& cfg, int i) {
    int cum = 0;
    for (int j = 1; j <= i; ++j) cum += generator_degree(cfg, j);
    return cum - (i - 1);
}

// Shift of the tower source K_{Z_{-(k+1)}}[...] at stage k > 0 (negative side).
inline int tower_shift_minus(const BuildConfig& cfg, int k) {
    int cum = 0;
    for (int j = 1; j <= k; ++j) cum += generator_degree(cfg, -j);
    return -cum + (k - 1);
}

template <class F>
KernelModel make_model(const BuildConfig& cfg) {
    if (cfg.space == Space::sphere && cfg.n == 1) return sphere_one_model(cfg.mesh, cfg.window, cfg.b_layers);
    if ((cfg.space == Space::sphere && cfg.n == 2) || (cfg.space == Space::projective && cfg.n == 1))
        return sphere_pair_model(cfg.subdiv, cfg.window, cfg.mesh);
    throw std::invalid_argument("make_model: only S^1, S^2 and CP^1 fit on a desk");
}

// Step 1: the region family. Indices with (|i|-1)*pi >= T give empty sets.
template <class F>
void build_regions(KernelAssembly<F>& A) {
    A.imax = 0;
    while (Rat(A.imax) < A.model.T) ++A.imax;  // (imax-1) pi < T <= imax pi
    for (int i = 1; i <= A.imax; ++i) {
        A.regions.emplace(i, region_cells(A.model, i));
        A.regions.emplace(-i, region_cells(A.model, -i));
    }
    for (auto& [i, Z] : A.regions)
        if (Z.empty()) A.diag.notes.push_back("region " + std::to_string(i) + " is empty in this window");
    if (A.cfg.validate_regions) {
        // Rank checks of the homotopy types: full-sweep regions carry the
        // cohomology of M x M, partial sweeps that of the (anti)diagonal.
        F field = A.field;
        std::map<int, index_t> mxm, diag_t;
        if (A.cfg.space == Space::sphere && A.cfg.n == 1) {
            mxm = {{0, 1}, {1, 2}, {2, 1}};
            diag_t = {{0, 1}, {1, 1}};
        } else {
            mxm = {{0, 1}, {2, 2}, {4, 1}};
            diag_t = {{0, 1}, {2, 1}};
        }
        for (auto& [i, Z] : A.regions) {
            if (Z.empty()) continue;
            Rat sweep = A.model.T - Rat(std::abs(i) - 1);
            auto expect = sweep > Rat(1) ? mxm : diag_t;
            auto got = cohomology_ranks(order_complex_cochain(field, Z));
            if (got != expect) {
                std::ostringstream os;
                os << "region " << i << " rank check failed:";
                for (auto& [k, r] : got) os << " " << k << ":" << r;
                throw std::runtime_error(os.str());
            }
        }
        A.diag.notes.push_back("region rank checks passed");
    }
}

template <class F>
const CellularSheaf<F>* region_sheaf_of(KernelAssembly<F>& A, int i) {
    auto it = A.region_sheaf.find(i);
    if (it != A.region_sheaf.end()) return it->second;
    A.storage.push_back(resolve_constant(A.field, A.regions.at(i)));
    A.region_sheaf[i] = &A.storage.back();
    return &A.storage.back();
}

// Step 2 precondition: Ext rank exactly 1 in the designated degree.
inline void require_rank_one(const std::map<int, index_t>& ranks, int degree, const std::string& what) {
    auto it = ranks.find(degree);
    if (it == ranks.end() || it->second != 1) {
        std::ostringstream os;
        os << what << ": expected rank 1 in degree " << degree << ", table:";
        for (auto& [k, r] : ranks) os << " " << k << ":" << r;
        throw std::runtime_error(os.str());
    }
}

// Step 2 as a standalone operation: the pairwise extension generators
// psi_i : K_{Z_i} -> K_{Z_{i+1}}[d_i] (i > 0) and
// psi_{-k} : K_{Z_{-(k+1)}} -> K_{Z_{-k}}[d_k] (negative side), each after
// confirming rank exactly 1 in the designated degree. An unexpected rank
// signals a discretization failure and aborts.
template <class F>
std::map<int, SheafMorphism<F>> choose_generators(KernelAssembly<F>& A) {
    std::map<int, SheafMorphism<F>> out;
    for (int i = 1; i < A.imax; ++i) {
        if (A.regions.at(i + 1).empty()) break;
        int d = generator_degree(A.cfg, i);
        auto src = region_sheaf_of(A, i);
        auto dst = region_sheaf_of(A, i + 1);
        auto ranks = ext_ranks(*src, *dst);
        A.diag.ext_table[i] = ranks;
        require_rank_one(ranks, d, "choose_generators step " + std::to_string(i));
        out.emplace(i, lift_ext_class(*src, *dst, d));
    }
    for (int k = 1; k < A.imax; ++k) {
        if (A.regions.at(-(k + 1)).empty()) break;
        int d = generator_degree(A.cfg, -k);
        auto src = region_sheaf_of(A, -(k + 1));
        auto dst = region_sheaf_of(A, -k);
        auto ranks = ext_ranks(*src, *dst);
        A.diag.ext_table[-k] = ranks;
        require_rank_one(ranks, d, "choose_generators step " + std::to_string(-k));
        out.emplace(-k, lift_ext_class(*src, *dst, d));
    }
    return out;
}

// Steps 2+3 on the positive side: choose generators and glue by cocones.
// K_1 = Cocone(K_{Z_1} -> K_{Z_2}[d_1]); K_i = Cocone(K_{i-1} -> K_{Z_{i+1}}[s_i]).
template <class F>
void assemble_plus(KernelAssembly<F>& A) {
    const CellularSheaf<F>* current = region_sheaf_of(A, 1);
    for (int i = 1; i <= A.imax; ++i) {
        if (i + 1 > A.imax || A.regions.at(i + 1).empty()) break;  // cocone over zero: unchanged
        const CellularSheaf<F>* next = region_sheaf_of(A, i + 1);
        int shift_amount = tower_shift_plus(A.cfg, i);
        A.storage.push_back(shift_sheaf(*next, shift_amount));
        const CellularSheaf<F>* target = &A.storage.back();
        auto ext = ext_ranks(*current, *target);
        A.diag.ext_table[i] = ext_ranks(*region_sheaf_of(A, i), *next);
        require_rank_one(ext, 0, "assemble_plus stage " + std::to_string(i));
        auto psi = lift_ext_class(*current, *target, 0);
        if (i == 1) A.psi_entries[1] = psi.entries;
        A.storage.push_back(sheaf_cocone(psi));
        current = &A.storage.back();
    }
    A.k_plus = current;
}

// Negative side: K_{-1} = Cone(K_{Z_{-2}}[-d] -> K_{Z_{-1}});
// K_{-k} = Cone(K_{Z_{-(k+1)}}[s] -> K_{-(k-1)}).
template <class F>
void assemble_minus(KernelAssembly<F>& A) {
    const CellularSheaf<F>* current = region_sheaf_of(A, -1);
    for (int k = 1; k <= A.imax; ++k) {
        if (k + 1 > A.imax || A.regions.at(-(k + 1)).empty()) break;
        const CellularSheaf<F>* source_plain = region_sheaf_of(A, -(k + 1));
        int shift_amount = tower_shift_minus(A.cfg, k);
        A.storage.push_back(shift_sheaf(*source_plain, shift_amount));
        const CellularSheaf<F>* source = &A.storage.back();
        auto ext = ext_ranks(*source, *current);
        A.diag.ext_table[-k] = ext_ranks(*source_plain, *region_sheaf_of(A, -k));
        require_rank_one(ext, 0, "assemble_minus stage " + std::to_string(k));
        auto psi = lift_ext_class(*source, *current, 0);
        if (k == 1) A.psi_entries[-1] = psi.entries;
        A.storage.push_back(sheaf_cone(psi));
        current = &A.storage.back();
    }
    A.k_minus = current;
}

// Final gluing: K = Cocone(psi_0 : K_- -> K_+[n+1]) (2n+1 on projective space).
template <class F>
void assemble_kernel(KernelAssembly<F>& A) {
    int d0 = final_degree(A.cfg);
    auto ext = ext_ranks(*A.k_minus, *A.k_plus);
    A.diag.ext_table[0] = ext;
    require_rank_one(ext, d0, "assemble_kernel");
    auto psi0 = lift_ext_class(*A.k_minus, *A.k_plus, d0);
    A.psi_entries[0] = psi0.entries;
    A.storage.push_back(shift_sheaf(*A.k_plus, d0));
    const CellularSheaf<F>* target = &A.storage.back();
    SheafMorphism<F> psi0_deg0;
    psi0_deg0.source = A.k_minus;
    psi0_deg0.target = target;
    psi0_deg0.degree = 0;
    psi0_deg0.entries = psi0.entries;
    A.storage.push_back(sheaf_cocone(psi0_deg0));
    A.kernel = &A.storage.back();
}

template <class F>
KernelAssembly<F> build_kernel(const F& field, const BuildConfig& cfg) {
    KernelAssembly<F> A;
    A.cfg = cfg;
    A.field = field;
    A.model = make_model<F>(cfg);
    build_regions(A);
    assemble_plus(A);
    assemble_minus(A);
    assemble_kernel(A);
    return A;
}

// K|_{t=0} must be the constant sheaf on the diagonal: stalk rank 1 in
// degree 0 on diagonal cells, zero elsewhere.
template <class F>
bool check_t0_profile(KernelAssembly<F>& A) {
    auto slice = time_slice(A.model, Rat(0));
    auto sub = extract_subcomplex(A.model.X, slice);
    auto Ks = restrict_sheaf(*A.kernel, sub);
    auto D = diagonal_cells(A.model);
    bool ok = true;
    for (index_t sc = 0; sc < sub.X.size(); ++sc) {
        auto s = stalk(Ks, sc);
        bool on_diag = D.member[sub.to_ambient[sc]] != 0;
        std::map<int, index_t> want = on_diag ? std::map<int, index_t>{{0, 1}} : std::map<int, index_t>{};
        if (s != want) ok = false;
    }
    A.diag.t0_check = ok;
    return ok;
}

// ---------------------------------------------------------------------------
// Microsupport verification.
// ---------------------------------------------------------------------------

// Expected Lagrangian-lift classes at a model cell, from its exact chart
// data: empty off the wave front, the single outward conormal at generic
// front cells, the two radial classes at corner cells. Returned as sign
// patterns over the model's direction axes. sum_closure additionally carries
// the interior class at corners (the profile of the uncancelled region
// sheaves there).
struct ModelSs {
    bool on_front = false;
    bool corner = false;
    std::vector<std::vector<int>> lambda;
    std::vector<std::vector<int>> sum_closure;
};

inline ModelSs expected_ss_at_cell(const KernelModel& M, index_t cell) {
    ModelSs out;
    auto fold_time = [](Rat t) {
        Rat r = rat_mod(t, Rat(2));
        return r <= Rat(1) ? r : Rat(2) - r;
    };
    bool all_on_front = true, all_corner = true;
    for (index_t v : M.X.corners[cell]) {
        if (M.vdist[v] != fold_time(M.vtime[v])) all_on_front = false;
        bool corner_v = M.vdist[v] == Rat(0) || M.vdist[v] == Rat(1);
        if (!corner_v) all_corner = false;
    }
    if (!all_on_front || M.X.corners[cell].empty()) return out;
    out.on_front = true;
    out.corner = all_corner;
    size_t na = M.n_dir_axes();
    auto cls = [&](int radial, int time) {
        std::vector<int> c(na, 0);
        if (M.kind == ModelKind::sphere_one) {
            c[0] = radial;
            c[1] = time;
        } else {
            c[0] = radial;
            c[1] = time;
        }
        return c;
    };
    if (out.corner) {
        out.lambda = {cls(1, -1), cls(-1, -1)};
        out.sum_closure = {cls(1, -1), cls(-1, -1), cls(0, -1)};
        return out;
    }
    // generic: radial sign = d(dist)/dt along the flow = sign of fold'(t),
    // translated to the a-axis through the local slope of fold(a)
    Rat a_rep(0), t_rep(0);
    for (index_t v : M.X.corners[cell]) {
        if (M.vdist[v] != Rat(0) && M.vdist[v] != Rat(1)) {
            t_rep = M.vtime[v];
            if (M.kind == ModelKind::sphere_one) a_rep = rat_mod(M.X.vtx_chart[v][0], Rat(4));
            break;
        }
    }
    int sigma;  // fold'(t)
    {
        Rat r = rat_mod(t_rep < Rat(0) ? -t_rep : t_rep, Rat(2));
        sigma = r < Rat(1) ? 1 : -1;
        if (t_rep < Rat(0)) sigma = -sigma;
    }
    int radial = sigma;
    if (M.kind == ModelKind::sphere_one) {
        // slope of fold(a) at the representative
        Rat d = rat_mod(a_rep, Rat(2));
        int slope = d < Rat(1) ? 1 : -1;
        radial = sigma * slope;
    }
    out.lambda = {cls(radial, -1)};
    out.sum_closure = out.lambda;
    return out;
}

// Dictionary of direction classes for a model: all sign patterns over the
// direction axes, except zero.
inline std::vector<std::vector<int>> direction_dictionary(const KernelModel& M) {
    size_t na = M.n_dir_axes();
    std::vector<std::vector<int>> out;
    std::vector<int> cur(na, -1);
    while (true) {
        bool nonzero = false;
        for (int c : cur) nonzero = nonzero || c != 0;
        if (nonzero) out.push_back(cur);
        size_t i = 0;
        while (i < na && cur[i] == 1) cur[i++] = -1;
        if (i == na) break;
        cur[i] += 1;
    }
    return out;
}

template <class F>
HalfStarQuery direction_query(const KernelModel& M, index_t base_cell, const std::vector<int>& coeff,
                              const F&) {
    HalfStarQuery q;
    index_t base_vertex = M.X.corners[base_cell][0];
    q.f = [&M, base_vertex, coeff](index_t w) {
        Rat acc(0);
        for (size_t ax = 0; ax < coeff.size(); ++ax)
            if (coeff[ax]) acc = acc + Rat(coeff[ax]) * M.axis_delta(ax, base_vertex, w);
        return acc;
    };
    return q;
}

// Is the class conormal to the cell (vanishes on its span)?
inline bool class_admissible(const KernelModel& M, index_t cell, const HalfStarQuery& q) {
    for (index_t v : M.X.corners[cell])
        if (!(q.f(v) == Rat(0))) return false;
    return true;
}

// Compares micro_test against the expected Lagrangian classes for every
// admissible dictionary class at every sampled cell. Mismatches land in the
// report; zero mismatches is the acceptance condition on the reference run.
template <class F>
void verify_ss_profile(KernelAssembly<F>& A, const std::vector<index_t>& sample_cells) {
    const CellularSheaf<F>& K = *A.kernel;
    SheafCellIndex<F> idx(K);
    auto dict = direction_dictionary(A.model);
    struct Task {
        index_t cell;
        const std::vector<int>* cls;
        bool expected;
    };
    std::vector<Task> tasks;
    for (index_t cell : sample_cells) {
        auto exp = expected_ss_at_cell(A.model, cell);
        for (auto& cls : dict) {
            auto q = direction_query(A.model, cell, cls, A.field);
            if (!class_admissible(A.model, cell, q)) continue;
            bool expected = false;
            for (auto& l : exp.lambda)
                if (l == cls) expected = true;
            tasks.push_back({cell, &cls, expected});
        }
    }
    std::vector<char> got(tasks.size(), 0);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            auto q = direction_query(A.model, tasks[i].cell, *tasks[i].cls, A.field);
            got[i] = micro_test(K, idx, tasks[i].cell, q) ? 1 : 0;
        }
    };
    int jobs = std::max(1, A.cfg.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    A.diag.ss_samples += tasks.size();
    for (size_t i = 0; i < tasks.size(); ++i)
        if ((got[i] != 0) != tasks[i].expected)
            A.diag.ss_mismatches.push_back({tasks[i].cell, *tasks[i].cls, got[i] != 0, tasks[i].expected});
}

// Sampled cells for the reference verification: every cell on the corner
// slices t in {0, pi, ..., w pi} plus a seeded pseudorandom batch of generic
// cells. Cells touching the window boundary |t| = T are skipped: their stars
// are one-sided, so a half-space probe toward the missing side says nothing.
template <class F>
std::vector<index_t> ss_sample_cells(const KernelAssembly<F>& A, size_t generic_count = 200) {
    auto interior = [&](index_t c) {
        for (index_t v : A.model.X.corners[c]) {
            Rat t = A.model.vtime[v];
            if (t == A.model.T || t == -A.model.T) return false;
        }
        return !A.model.X.corners[c].empty();
    };
    std::vector<index_t> cells;
    for (int64_t k = -A.cfg.window; k <= A.cfg.window; ++k) {
        auto slice = time_slice(A.model, Rat(k));
        for (index_t c = 0; c < A.model.X.size(); ++c)
            if (slice.member[c] && interior(c)) cells.push_back(c);
    }
    uint64_t s = A.cfg.seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
    auto rnd = [&]() {
        s += 0x9e3779b97f4a7c15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    for (size_t i = 0; i < generic_count; ++i) {
        index_t c = static_cast<index_t>(rnd() % A.model.X.size());
        if (interior(c)) cells.push_back(c);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

// Slice-constructibility check at t = 2k*pi: the stalk rank vector must be
// constant on the diagonal stratum and on its complement.
template <class F>
struct SliceCheck {
    bool constant_on_diag = false;
    bool constant_off_diag = false;
    std::map<int, index_t> diag_value, off_value;
};

template <class F>
SliceCheck<F> verify_slice_constructibility(KernelAssembly<F>& A, int k) {
    Rat tau(2 * k);
    if (!(tau >= -A.model.T && tau <= A.model.T)) throw std::invalid_argument("slice outside window");
    auto slice = time_slice(A.model, tau);
    auto sub = extract_subcomplex(A.model.X, slice);
    auto Ks = restrict_sheaf(*A.kernel, sub);
    auto D = diagonal_cells(A.model);
    SliceCheck<F> out;
    bool first_d = true, first_o = true;
    out.constant_on_diag = out.constant_off_diag = true;
    for (index_t sc = 0; sc < sub.X.size(); ++sc) {
        auto s = stalk(Ks, sc);
        if (D.member[sub.to_ambient[sc]]) {
            if (first_d) {
                out.diag_value = s;
                first_d = false;
            } else if (s != out.diag_value)
                out.constant_on_diag = false;
        } else {
            if (first_o) {
                out.off_value = s;
                first_o = false;
            } else if (s != out.off_value)
                out.constant_off_diag = false;
        }
    }
    return out;
}

// Stalk table keyed by a canonical cell signature (sorted corner charts), for
// window-growth comparisons across different models.
template <class F>
std::map<std::string, std::map<int, index_t>> stalk_table_in_range(const KernelAssembly<F>& A,
                                                                   const Rat& tmax) {
    std::map<std::string, std::map<int, index_t>> out;
    for (index_t c = 0; c < A.model.X.size(); ++c) {
        bool inside = !A.model.X.corners[c].empty();
        std::vector<std::string> sig;
        for (index_t v : A.model.X.corners[c]) {
            Rat t = A.model.vtime[v];
            if (!(t < tmax) || !(-tmax < t)) inside = false;
            std::ostringstream os;
            for (auto& coord : A.model.X.vtx_chart[v]) os << coord.str() << ",";
            sig.push_back(os.str());
        }
        if (!inside) continue;
        std::sort(sig.begin(), sig.end());
        std::string key;
        for (auto& s : sig) key += s + ";";
        out[key] = stalk(*A.kernel, c);
    }
    return out;
}

}  // namespace gks
