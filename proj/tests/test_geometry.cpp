#include <catch2/catch_amalgamated.hpp>

#include "gks/geometry.hpp"
#include "support.hpp"

using namespace gks;
using testsupport::Rng;

namespace {

SpherePoint random_sphere_point(Rng& rng, size_t dim_plus_1) {
    std::vector<double> v(dim_plus_1);
    double n2 = 0;
    while (n2 < 1e-12) {
        n2 = 0;
        for (auto& x : v) {
            // Box-Muller-ish from uniform bits
            double u = (rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            x = u;
            n2 += x * x;
        }
    }
    double n = std::sqrt(n2);
    for (auto& x : v) x /= n;
    return SpherePoint(v);
}

ProjectivePoint random_projective_point(Rng& rng, size_t dim_plus_1) {
    std::vector<std::complex<double>> v(dim_plus_1);
    double n2 = 0;
    while (n2 < 1e-12) {
        n2 = 0;
        for (auto& z : v) {
            double a = (rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            double b = (rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            z = {a, b};
            n2 += std::norm(z);
        }
    }
    double n = std::sqrt(n2);
    for (auto& z : v) z /= n;
    return ProjectivePoint(v);
}

}  // namespace

TEST_CASE("sphere distance examples") {
    SpherePoint e1({1, 0}), e2({0, 1});
    CHECK(dist_sphere(e1, e1) == Catch::Approx(0.0).margin(1e-12));
    SpherePoint me1({-1, 0});
    CHECK(dist_sphere(e1, me1) == Catch::Approx(M_PI));  // diameter pi
    CHECK(dist_sphere(e1, e2) == Catch::Approx(M_PI / 2));
}

TEST_CASE("projective distance examples") {
    ProjectivePoint x({{1, 0}, {0, 0}, {0, 0}});
    ProjectivePoint y({{0, 0}, {1, 0}, {0, 0}});
    CHECK(dist_cpn(x, x) == Catch::Approx(0.0).margin(1e-12));
    CHECK(dist_cpn(x, y) == Catch::Approx(M_PI));  // diameter pi at |<x,y>| = 0
    ProjectivePoint z({{1 / std::sqrt(2.0), 0}, {1 / std::sqrt(2.0), 0}, {0, 0}});
    CHECK(dist_cpn(x, z) == Catch::Approx(M_PI / 2));  // 2 acos(1/sqrt 2)
}

TEST_CASE("exponential map on CP^n") {
    std::vector<std::complex<double>> z{{1, 0}, {0, 0}};
    auto p0 = exp_cpn(z, 0.0);
    CHECK(std::abs(p0.coords[0]) == Catch::Approx(1.0));  // the base point

    auto ppi = exp_cpn(z, M_PI);
    CHECK(std::abs(ppi.coords[0]) == Catch::Approx(0.0).margin(1e-12));  // lands in D_{x0}
    ProjectivePoint x0({{1, 0}, {0, 0}, {0, 0}});
    CHECK(dist_cpn(x0, ppi) == Catch::Approx(M_PI));

    auto p2pi = exp_cpn(z, 2 * M_PI);  // period 2 pi: the base point again
    CHECK(std::abs(std::abs(p2pi.coords[0]) - 1.0) < 1e-12);
    CHECK(dist_cpn(x0, p2pi) == Catch::Approx(0.0).margin(1e-9));

    CHECK_THROWS(exp_cpn({{2, 0}}, 1.0));
}

TEST_CASE("unit speed of exp_cpn by central finite differences") {
    Rng rng(12);
    for (int n : {1, 2, 3}) {
        std::vector<std::complex<double>> z(n);
        double n2 = 0;
        for (auto& v : z) {
            v = {(rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0, (rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0};
            n2 += std::norm(v);
        }
        for (auto& v : z) v /= std::sqrt(n2);
        const double eps = 1e-4;  // balances acos conditioning against truncation
        for (int k = 0; k < 100; ++k) {
            double t = -2 * M_PI + 4 * M_PI * (k + 0.5) / 100.0;
            auto a = exp_cpn(z, t - eps);
            auto b = exp_cpn(z, t + eps);
            double speed = dist_cpn(a, b) / (2 * eps);
            CHECK(std::abs(speed - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("distance along the flow matches the folded time") {
    Rng rng(77);
    std::vector<std::complex<double>> z{{0.6, 0.0}, {0.0, 0.8}};
    ProjectivePoint x0({{1, 0}, {0, 0}, {0, 0}});
    for (int k = 0; k <= 100; ++k) {
        double t = 2 * M_PI * k / 100.0;
        auto p = exp_cpn(z, t);
        double expected = std::min(std::fmod(t, 2 * M_PI), 2 * M_PI - std::fmod(t, 2 * M_PI));
        CHECK(std::abs(dist_cpn(x0, p) - expected) < 1e-9);
    }
}

TEST_CASE("cut locus distance") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_sphere_point(rng, 3);
        auto y = random_sphere_point(rng, 3);
        CHECK(dist_to_cut_locus_sphere(x, x) == Catch::Approx(M_PI));
        // on the sphere, dist(x, D_y) = dist(x, -y)
        SpherePoint my({-y.coords[0], -y.coords[1], -y.coords[2]});
        CHECK(dist_to_cut_locus_sphere(x, y) == Catch::Approx(dist_sphere(x, my)).margin(1e-9));
    }
    // x in D_y -> 0
    SpherePoint e1({1, 0}), me1({-1, 0});
    CHECK(dist_to_cut_locus_sphere(e1, me1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("metric properties sampled") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        auto x = random_sphere_point(rng, 3);
        auto y = random_sphere_point(rng, 3);
        auto z = random_sphere_point(rng, 3);
        CHECK(dist_sphere(x, y) == Catch::Approx(dist_sphere(y, x)).margin(1e-12));
        CHECK(dist_sphere(x, z) <= dist_sphere(x, y) + dist_sphere(y, z) + 1e-9);
        auto px = random_projective_point(rng, 2);
        auto py = random_projective_point(rng, 2);
        auto pz = random_projective_point(rng, 2);
        CHECK(dist_cpn(px, py) == Catch::Approx(dist_cpn(py, px)).margin(1e-12));
        CHECK(dist_cpn(px, pz) <= dist_cpn(px, py) + dist_cpn(py, pz) + 1e-9);
    }
}

TEST_CASE("CP^1 distance agrees with the round sphere under the Hopf identification") {
    // z = (z0, z1) on the unit sphere of C^2 maps to
    // (2 Re(z0 conj z1), 2 Im(z0 conj z1), |z0|^2 - |z1|^2) on S^2;
    // the angle metric on S^2 equals dist_cpn
    Rng rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        auto pz = random_projective_point(rng, 2);
        auto pw = random_projective_point(rng, 2);
        auto hopf = [](const ProjectivePoint& p) {
            auto z0 = p.coords[0], z1 = p.coords[1];
            auto c = z0 * std::conj(z1);
            return SpherePoint({2 * c.real(), 2 * c.imag(), std::norm(z0) - std::norm(z1)});
        };
        CHECK(dist_cpn(pz, pw) == Catch::Approx(dist_sphere(hopf(pz), hopf(pw))).margin(1e-9));
    }
}

TEST_CASE("region membership") {
    RegionSpec z1{1, Space::sphere};
    CHECK(region_member(z1, 0.0, 0.1));           // dist 0 < 0.1
    CHECK(!region_member(z1, M_PI, M_PI));        // strict inequality at the boundary
    RegionSpec zm1{-1, Space::sphere};
    CHECK(region_member(zm1, 0.0, 0.0));          // 0 <= 0, non-strict
    RegionSpec z2{2, Space::sphere};
    CHECK(region_member(z2, M_PI, 0.5 + M_PI));   // dist(x,D_y) = 0 < 0.5
    CHECK(!region_member(z2, M_PI, M_PI));        // 0 < 0 fails
    RegionSpec z0{0, Space::sphere};
    CHECK_THROWS(region_member(z0, 1.0, 1.0));
    RegionSpec zw{1, Space::sphere, -1.0, 1.0};
    CHECK_THROWS(region_member(zw, 0.5, 2.0));

    // nesting: membership in Z_{i+2} implies membership in Z_i
    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        double d = (rng.next() >> 11) * 0x1.0p-53 * M_PI;
        double t = ((rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * 3 * M_PI;
        for (int i = 1; i <= 2; ++i) {
            RegionSpec inner{i + 2, Space::sphere}, outer{i, Space::sphere};
            if (region_member(inner, d, t)) CHECK(region_member(outer, d, t));
        }
        for (int i = -2; i <= -1; ++i) {
            RegionSpec inner{i - 2, Space::sphere}, outer{i, Space::sphere};
            if (region_member(inner, d, t)) CHECK(region_member(outer, d, t));
        }
    }
}

TEST_CASE("expected microsupport classes") {
    // generic point on the front: one outward conormal with negative time part
    auto t1 = expected_ss(Space::sphere, 0.4, 0.4);
    CHECK(t1.on_front);
    CHECK(!t1.corner);
    REQUIRE(t1.lambda.size() == 1);
    CHECK(t1.lambda[0] == DirClass2{1, -1});
    CHECK(t1.sum_closure == t1.lambda);

    // past the fold the radial sign flips
    auto t2 = expected_ss(Space::sphere, 2 * M_PI - 4.0, 4.0);
    REQUIRE(t2.lambda.size() == 1);
    CHECK(t2.lambda[0] == DirClass2{-1, -1});

    // corner (x, x, 0): sum-closure of the full cone
    auto t0 = expected_ss(Space::sphere, 0.0, 0.0);
    CHECK(t0.corner);
    CHECK(t0.lambda.size() == 2);
    REQUIRE(t0.sum_closure.size() == 3);
    CHECK(t0.sum_closure[2] == DirClass2{0, -1});

    // off every front: empty
    auto toff = expected_ss(Space::sphere, 1.0, 0.2);
    CHECK(!toff.on_front);
    CHECK(toff.lambda.empty());

    // time component is always negative
    for (auto& cls : t0.sum_closure) CHECK(cls.time < 0);
}
