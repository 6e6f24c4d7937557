#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace gks {

// Geodesic geometry of round spheres and Fubini-Study projective spaces.
// Everything here is floating point; membership decisions that must be exact
// are made on grid-aligned rational values in the window models instead.

constexpr double kUnitTol = 1e-12;

enum class Space { sphere, projective };

struct SpherePoint {
    std::vector<double> coords;  // unit vector in R^{n+1}

    explicit SpherePoint(std::vector<double> c) : coords(std::move(c)) {
        double n2 = 0;
        for (double x : coords) n2 += x * x;
        if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("SpherePoint: not a unit vector");
    }
};

struct ProjectivePoint {
    std::vector<std::complex<double>> coords;  // unit vector in C^{n+1}, up to phase

    explicit ProjectivePoint(std::vector<std::complex<double>> c) : coords(std::move(c)) {
        double n2 = 0;
        for (auto& z : coords) n2 += std::norm(z);
        if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("ProjectivePoint: not a unit vector");
    }
};

inline double clamp_unit(double x) { return std::max(-1.0, std::min(1.0, x)); }

inline double dist_sphere(const SpherePoint& x, const SpherePoint& y) {
    if (x.coords.size() != y.coords.size()) throw std::invalid_argument("dist_sphere: dimension mismatch");
    double dot = 0;
    for (size_t i = 0; i < x.coords.size(); ++i) dot += x.coords[i] * y.coords[i];
    return std::acos(clamp_unit(dot));
}

// Fubini-Study distance, normalized so that the diameter is pi and the
// geodesic flow has period 2*pi: 2*acos|<x, y>|.
inline double dist_cpn(const ProjectivePoint& x, const ProjectivePoint& y) {
    if (x.coords.size() != y.coords.size()) throw std::invalid_argument("dist_cpn: dimension mismatch");
    std::complex<double> h = 0;
    for (size_t i = 0; i < x.coords.size(); ++i) h += std::conj(x.coords[i]) * y.coords[i];
    return 2.0 * std::acos(clamp_unit(std::abs(h)));
}

// Exponential map at the base point x0 = (1 : 0 : ... : 0), applied to a unit
// tangent vector z in C^n: t |-> (cos(t/2) : z_1 sin(t/2) : ... : z_n sin(t/2)).
inline ProjectivePoint exp_cpn(const std::vector<std::complex<double>>& z, double t) {
    double n2 = 0;
    for (auto& v : z) n2 += std::norm(v);
    if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("exp_cpn: tangent vector not unit");
    std::vector<std::complex<double>> c;
    c.reserve(z.size() + 1);
    c.emplace_back(std::cos(t / 2), 0.0);
    for (auto& v : z) c.push_back(v * std::sin(t / 2));
    return ProjectivePoint(std::move(c));
}

// dist(x, D_y) where D_y is the cut locus of y: the antipode on a sphere, a
// copy of CP^{n-1} on projective space. Geodesics through y hit D_y at
// arc-length exactly pi, so dist(x, D_y) = pi - dist(x, y).
inline double dist_to_cut_locus_sphere(const SpherePoint& x, const SpherePoint& y) {
    return M_PI - dist_sphere(x, y);
}

inline double dist_to_cut_locus_cpn(const ProjectivePoint& x, const ProjectivePoint& y) {
    return M_PI - dist_cpn(x, y);
}

// Region Z_i of M x M x R. Positive indices are open (strict), negative
// closed (non-strict with negated time):
//   i > 0 odd : dist(x,y)   < t - (i-1)pi      i > 0 even: dist(x,D_y) < t - (i-1)pi
//   i < 0 odd : dist(x,y)  <= -t - (|i|-1)pi   i < 0 even: dist(x,D_y)<= -t - (|i|-1)pi
struct RegionSpec {
    int index = 1;
    Space space = Space::sphere;
    double window_lo = -1e9, window_hi = 1e9;

    bool open() const { return index > 0; }
};

inline bool region_member(const RegionSpec& spec, double dist_xy, double t) {
    if (spec.index == 0) throw std::invalid_argument("region_member: index 0");
    if (t < spec.window_lo || t > spec.window_hi) throw std::invalid_argument("region_member: t outside window");
    int k = std::abs(spec.index) - 1;
    bool even = std::abs(spec.index) % 2 == 0;
    double base = even ? M_PI - dist_xy : dist_xy;
    if (spec.index > 0) return base < t - k * M_PI;
    return base <= -t - k * M_PI;
}

inline bool region_member(const RegionSpec& spec, const SpherePoint& x, const SpherePoint& y, double t) {
    return region_member(spec, dist_sphere(x, y), t);
}

inline bool region_member(const RegionSpec& spec, const ProjectivePoint& x, const ProjectivePoint& y, double t) {
    return region_member(spec, dist_cpn(x, y), t);
}

// A covector direction class in the (radial, time) chart: radial is the
// coefficient on d(dist(x, y)), time the coefficient on dt, both reduced to
// sign patterns. Tangential coefficients are always zero on the flow graph.
struct DirClass2 {
    int radial = 0;
    int time = 0;

    bool operator==(const DirClass2& o) const { return radial == o.radial && time == o.time; }
};

// Conormal data of the Lagrangian lift at a base point: the classes present
// in the fiber, plus their sum-closure (equal away from corner times; the
// full lower cone at t in pi*Z on the flow front). The generating
// Hamiltonian is the cosphere function H(x, xi) = |xi|, so the time
// component of every class is strictly negative.
struct MicrosupportTarget {
    bool on_front = false;
    bool corner = false;
    std::vector<DirClass2> lambda;
    std::vector<DirClass2> sum_closure;
};

// fold(t): distance from x to its time-t geodesic image, reduced by the
// 2*pi period into [0, pi].
inline double fold_distance(double t) {
    double r = std::fmod(std::abs(t), 2 * M_PI);
    return r <= M_PI ? r : 2 * M_PI - r;
}

inline MicrosupportTarget expected_ss(Space, double dist_xy, double t, double tol = 1e-9) {
    MicrosupportTarget out;
    double front = fold_distance(t);
    if (std::abs(dist_xy - front) > tol) return out;  // off every wave front
    out.on_front = true;
    double tmod = std::fmod(std::abs(t), M_PI);
    out.corner = tmod < tol || M_PI - tmod < tol;
    if (!out.corner) {
        // unique outward conormal: radial sign follows d/dt fold(t)
        double r = std::fmod(std::abs(t), 2 * M_PI);
        int radial = r < M_PI ? 1 : -1;
        if (t < 0) radial = -radial;
        out.lambda = {{radial, -1}};
        out.sum_closure = out.lambda;
    } else {
        out.lambda = {{1, -1}, {-1, -1}};
        out.sum_closure = {{1, -1}, {-1, -1}, {0, -1}};
    }
    return out;
}

inline MicrosupportTarget expected_ss(Space space, const SpherePoint& x, const SpherePoint& y, double t) {
    return expected_ss(space, dist_sphere(x, y), t);
}

inline MicrosupportTarget expected_ss(Space space, const ProjectivePoint& x, const ProjectivePoint& y, double t) {
    return expected_ss(space, dist_cpn(x, y), t);
}

}  // namespace gks
