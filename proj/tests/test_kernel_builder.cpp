#include <catch2/catch_amalgamated.hpp>

#include "gks/kernel_builder.hpp"
#include "support.hpp"

using namespace gks;

namespace {
F2 f2;
}

TEST_CASE("shift bookkeeping matches the construction tables") {
    // sphere: K_i = Cocone(K_{i-1} -> K_{Z_{i+1}}[i n - (i - 1)])
    for (int n : {1, 2, 3}) {
        BuildConfig cfg;
        cfg.space = Space::sphere;
        cfg.n = n;
        for (int i = 1; i <= 6; ++i) CHECK(tower_shift_plus(cfg, i) == i * n - (i - 1));
        // negative side: K_{-k} = Cone(K_{Z_{-(k+1)}}[-k n + (k - 1)] -> ...)
        for (int k = 1; k <= 6; ++k) CHECK(tower_shift_minus(cfg, k) == -k * n + (k - 1));
        CHECK(final_degree(cfg) == n + 1);
    }
    // projective: odd stages [ (i-1) n + 2 ], even stages [ i n + 1 ]
    for (int n : {1, 2, 3}) {
        BuildConfig cfg;
        cfg.space = Space::projective;
        cfg.n = n;
        CHECK(tower_shift_plus(cfg, 1) == 2);
        for (int i = 2; i <= 6; ++i) {
            int expect = i % 2 == 1 ? (i - 1) * n + 2 : i * n + 1;
            CHECK(tower_shift_plus(cfg, i) == expect);
        }
        CHECK(tower_shift_minus(cfg, 1) == -2);
        CHECK(tower_shift_minus(cfg, 2) == -2 * n - 1);
        CHECK(tower_shift_minus(cfg, 3) == -2 * n - 2);
        CHECK(tower_shift_minus(cfg, 4) == -4 * n - 1);
        CHECK(final_degree(cfg) == 2 * n + 1);
    }
}

TEST_CASE("sphere kernel at small mesh: towers, gluing degrees, t=0 profile") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 1;
    auto A = build_kernel(f2, cfg);
    CHECK(A.imax == 2);
    REQUIRE(A.kernel != nullptr);
    A.kernel->validate();

    // ext table of the first consecutive pair has rank one in degree n = 1
    REQUIRE(A.diag.ext_table.count(1));
    CHECK(A.diag.ext_table.at(1).at(1) == 1);
    // final gluing found rank 1 in degree n + 1 = 2, matching
    // C*(S^1) (x) C*(R^2, S^0)[-1] = {2:1, 3:1}
    REQUIRE(A.diag.ext_table.count(0));
    CHECK(A.diag.ext_table.at(0) == std::map<int, index_t>{{2, 1}, {3, 1}});

    CHECK(check_t0_profile(A));
}

TEST_CASE("choose_generators on the sphere expects degree n everywhere") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 2;
    KernelAssembly<F2> A;
    A.cfg = cfg;
    A.field = f2;
    A.model = make_model<F2>(cfg);
    build_regions(A);
    auto gens = choose_generators(A);
    CHECK(gens.count(1));
    CHECK(gens.count(2));
    CHECK(gens.count(-1));
    CHECK(gens.count(-2));
    for (auto& [i, psi] : gens) {
        CHECK(psi.degree == 1);
        psi.validate();
    }
    // Lemma 3.3 rank patterns: odd pairs give the anti-diagonal Thom pattern,
    // even pairs the diagonal one; both are {1:1, 2:1} on S^1
    CHECK(A.diag.ext_table.at(1) == std::map<int, index_t>{{1, 1}, {2, 1}});
    CHECK(A.diag.ext_table.at(2) == std::map<int, index_t>{{1, 1}, {2, 1}});
}

TEST_CASE("region gating by the window") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 1;
    KernelAssembly<F2> A;
    A.cfg = cfg;
    A.field = f2;
    A.model = make_model<F2>(cfg);
    build_regions(A);
    CHECK(A.imax == 2);  // (|i|-1) pi < T = pi + pi/8 allows |i| in {1, 2}
    CHECK(!A.regions.at(1).empty());
    CHECK(!A.regions.at(2).empty());   // only the margin sliver
    CHECK(!A.regions.at(-1).empty());
    CHECK(!A.regions.at(-2).empty());
}

TEST_CASE("deliberately misaligned mesh raises a rank diagnostic") {
    // plain product of circles: the diagonal is not a subcomplex, so the
    // discretized regions cannot reproduce the Thom pattern
    auto torus = product(circle(8), circle(8));
    auto Tm = time_window_path(1, 4);
    KernelModel M;
    M.kind = ModelKind::sphere_pair;  // generic (dist, t) treatment
    M.X = product(torus, Tm);
    M.T = Rat(1) + Rat(1, 8);
    M.dir_axes = {"d", "t"};
    M.axis_period = {Rat(0), Rat(0)};
    size_t n = M.X.size();
    M.vdist.assign(n, Rat(0));
    M.vtime.assign(n, Rat(0));
    M.vdiag.assign(n, 0);
    for (index_t v = 0; v < n; ++v) {
        if (M.X.vtx_chart[v].size() != 3) continue;
        Rat d = rat_mod(M.X.vtx_chart[v][0] - M.X.vtx_chart[v][1], Rat(2));
        if (d > Rat(1)) d = Rat(2) - d;
        M.vdist[v] = d;
        M.vtime[v] = M.X.vtx_chart[v][2];
        M.vdiag[v] = d == Rat(0) ? 1 : 0;
    }
    KernelAssembly<F2> A;
    A.cfg.space = Space::sphere;
    A.cfg.n = 1;
    A.cfg.mesh = 4;
    A.cfg.window = 1;
    A.field = f2;
    A.model = std::move(M);
    build_regions(A);
    CHECK_THROWS_AS(choose_generators(A), std::runtime_error);
}

TEST_CASE("tower stabilization under window growth") {
    BuildConfig c1, c2;
    c1.space = c2.space = Space::sphere;
    c1.n = c2.n = 1;
    c1.mesh = c2.mesh = 4;
    c1.window = 1;
    c2.window = 2;
    auto A1 = build_kernel(f2, c1);
    auto A2 = build_kernel(f2, c2);
    // stalk tables agree on cells with |t| < T_1 - pi (stability region)
    Rat bound = A1.model.T - Rat(1);
    auto t1 = stalk_table_in_range(A1, bound);
    auto t2 = stalk_table_in_range(A2, bound);
    REQUIRE(!t1.empty());
    CHECK(t1.size() == t2.size());
    for (auto& [key, val] : t1) {
        REQUIRE(t2.count(key));
        CHECK(t2.at(key) == val);
    }
}

TEST_CASE("verify_ss_profile on the assembled small-mesh kernel") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 1;
    cfg.jobs = 4;
    auto A = build_kernel(f2, cfg);
    auto cells = ss_sample_cells(A, 60);
    verify_ss_profile(A, cells);
    CHECK(A.diag.ss_samples > 0);
    CHECK(A.diag.ss_mismatches.empty());
}

TEST_CASE("uncancelled region sheaf shows the extra corner directions") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 1;
    KernelAssembly<F2> A;
    A.cfg = cfg;
    A.field = f2;
    A.model = make_model<F2>(cfg);
    build_regions(A);
    auto Z1 = region_sheaf_of(A, 1);
    SheafCellIndex<F2> idx(*Z1);
    // a vertex on the antidiagonal at t = pi: fold(a) = 1, t = 1
    index_t v = static_cast<index_t>(-1);
    for (index_t c = 0; c < A.model.X.size(); ++c)
        if (A.model.X.cell_dim[c] == 0 && A.model.vdist[c] == Rat(1) && A.model.vtime[c] == Rat(1)) v = c;
    REQUIRE(v != static_cast<index_t>(-1));
    auto exp = expected_ss_at_cell(A.model, v);
    CHECK(exp.corner);
    // sum-closure classes are all nonzero on K_{Z_1} (Lemma 3.5 pattern),
    // including the interior class, which the assembled kernel must cancel
    for (auto& cls : exp.sum_closure) {
        auto q = direction_query(A.model, v, cls, f2);
        CHECK(micro_test(*Z1, idx, v, q));
    }
    // tangential class stays silent
    auto tang = direction_query(A.model, v, std::vector<int>{0, 0, 1}, f2);
    CHECK(!micro_test(*Z1, idx, v, tang));
}

TEST_CASE("CP^1 kernel on the octahedral pair model") {
    BuildConfig cfg;
    cfg.space = Space::projective;
    cfg.n = 1;
    cfg.mesh = 2;
    cfg.window = 1;
    cfg.subdiv = 0;
    auto A = build_kernel(f2, cfg);
    REQUIRE(A.kernel != nullptr);
    // generator degree 2 at the first stage, final degree 2n + 1 = 3
    REQUIRE(A.diag.ext_table.count(1));
    CHECK(A.diag.ext_table.at(1).at(2) == 1);
    REQUIRE(A.diag.ext_table.count(0));
    CHECK(A.diag.ext_table.at(0).count(3));
    CHECK(A.diag.ext_table.at(0).at(3) == 1);
    CHECK(check_t0_profile(A));

    // slice constructibility at t = 0 (k = 0): diagonal stratum {0:1}, rest 0
    auto sc = verify_slice_constructibility(A, 0);
    CHECK(sc.constant_on_diag);
    CHECK(sc.constant_off_diag);
    CHECK(sc.diag_value == std::map<int, index_t>{{0, 1}});
    CHECK(sc.off_value.empty());
    CHECK_THROWS(verify_slice_constructibility(A, 5));
}

TEST_CASE("region validation flag") {
    BuildConfig cfg;
    cfg.space = Space::sphere;
    cfg.n = 1;
    cfg.mesh = 4;
    cfg.window = 1;
    cfg.validate_regions = true;
    KernelAssembly<F2> A;
    A.cfg = cfg;
    A.field = f2;
    A.model = make_model<F2>(cfg);
    build_regions(A);
    bool noted = false;
    for (auto& n : A.diag.notes) noted = noted || n.find("rank checks passed") != std::string::npos;
    CHECK(noted);
}
