#pragma once

// Desk-scale regression systems with closed-form behavior, shared by the
// test suites and the CLI demo configs.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "polyflow/flow_tracer.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/geometry.hpp"
#include "polyflow/power_series.hpp"
#include "polyflow/yamabe.hpp"

namespace polyflow::demos {

inline HalfSpace hs(Vec a, double b) { return HalfSpace(std::move(a), b); }

inline std::vector<HalfSpace> box_facets(const Vec& lo, const Vec& hi) {
    std::vector<HalfSpace> out;
    const int m = static_cast<int>(lo.size());
    for (int i = 0; i < m; ++i) {
        Vec a(m, 0.0);
        a[i] = 1.0;
        out.push_back(hs(a, lo[i]));
        a[i] = -1.0;
        out.push_back(hs(a, -hi[i]));
    }
    return out;
}

/// Constant leftward drift on two half-lines meeting at 0. From x0 = 1 the
/// single switch happens at t = 1.
inline PiecewiseField onedim_drift() {
    Polytope left({hs({-1.0}, 0.0)}, {-1.0});
    Polytope right({hs({1.0}, 0.0)}, {1.0});
    CellCover cover({left, right}, {-2.0}, {2.0});

    PowerSeries v(1, 1, 2);
    v.set_coeff(MultiIndex::zero(1), {-1.0});
    return PiecewiseField(std::move(cover), {v, v});
}

/// x' = (-x, -2y) split along the diagonal y = x inside a box. From (1, 2)
/// the trajectory crosses the diagonal once, at t = ln 2, and ends in the
/// lower cell {y <= x}.
inline PiecewiseField decoupled2d() {
    Vec lo{-3.0, -3.0}, hi{3.0, 3.0};
    auto upper_facets = box_facets(lo, hi);
    upper_facets.push_back(hs({-1.0, 1.0}, 0.0));  // y >= x
    auto lower_facets = box_facets(lo, hi);
    lower_facets.push_back(hs({1.0, -1.0}, 0.0));  // y <= x
    Polytope upper(std::move(upper_facets), {-1.0, 1.0});
    Polytope lower(std::move(lower_facets), {1.0, -1.0});
    CellCover cover({upper, lower}, lo, hi);

    PowerSeries v(2, 2, 4);
    v.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    v.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    return PiecewiseField(std::move(cover), {v, v}, Vec{0.0, 0.0},
                          StableSpectrum(Vec{-1.0, -2.0}));
}

/// The scalar field -x + x^2 as a power series of the given order.
inline PowerSeries bernoulli_field(int order) {
    PowerSeries v(1, 1, order);
    v.set_coeff(MultiIndex({1}), {-1.0});
    v.set_coeff(MultiIndex({2}), {1.0});
    return v;
}

/// Closed-form solution of x' = -x + x^2 with parameter c (coefficient of
/// e^{-t}); for c = 1 this is e^{-t} / (1 + e^{-t}).
inline double bernoulli_exact(double c, double t) {
    const double z = c * std::exp(-t);
    return z / (1.0 + z);
}

/// Single-cell cover of [-2, 2] carrying the Bernoulli field.
inline PiecewiseField bernoulli_single_cell(int order = 12) {
    Polytope cell(box_facets({-2.0}, {2.0}), {0.5});
    CellCover cover({cell}, {-2.0}, {2.0});
    return PiecewiseField(std::move(cover), {bernoulli_field(order)}, Vec{0.0},
                          StableSpectrum(Vec{-1.0}));
}

/// Bernoulli field split at x = 0.3. From x0 = 0.9 the single switch happens
/// at t = ln 21 and the trajectory decays into cell 0.
inline PiecewiseField bernoulli_split(int order = 12) {
    Polytope left({hs({1.0}, -2.0), hs({-1.0}, -0.3)}, {0.0});   // [-2, 0.3]
    Polytope right({hs({1.0}, 0.3), hs({-1.0}, -2.0)}, {1.0});   // [0.3, 2]
    CellCover cover({left, right}, {-2.0}, {2.0});
    const PowerSeries v = bernoulli_field(order);
    return PiecewiseField(std::move(cover), {v, v}, Vec{0.0}, StableSpectrum(Vec{-1.0}));
}

/// Order-2 tangency at the origin: the lower-cell field (1, 2x) has the
/// parabola (t, t^2) as its continuation, leaving {y <= 0} at second order;
/// the upper-cell field adds a y^2 term (C^1 across the facet).
inline PiecewiseField tangency2() {
    Vec lo{-1.0, -1.0}, hi{1.0, 1.0};
    auto upper_facets = box_facets(lo, hi);
    upper_facets.push_back(hs({0.0, 1.0}, 0.0));  // y >= 0
    auto lower_facets = box_facets(lo, hi);
    lower_facets.push_back(hs({0.0, -1.0}, 0.0));  // y <= 0
    Polytope upper(std::move(upper_facets), {0.0, 0.5});
    Polytope lower(std::move(lower_facets), {0.0, -0.5});
    CellCover cover({upper, lower}, lo, hi);

    PowerSeries v_low(2, 2, 4);
    v_low.set_coeff(MultiIndex::zero(2), {1.0, 0.0});
    v_low.set_coeff(MultiIndex::unit(2, 0), {0.0, 2.0});
    PowerSeries v_up = v_low;
    v_up.set_coeff(MultiIndex({0, 2}), {0.0, 1.0});  // + y^2 in the y-component
    return PiecewiseField(std::move(cover), {v_up, v_low});
}

/// Linear focus with eigenvalues -0.1 +- i crossing the horizontal split
/// forever: diagonalizability fails, switch counts grow with t_end.
inline PiecewiseField spiral() {
    Vec lo{-2.0, -2.0}, hi{2.0, 2.0};
    auto upper_facets = box_facets(lo, hi);
    upper_facets.push_back(hs({0.0, 1.0}, 0.0));
    auto lower_facets = box_facets(lo, hi);
    lower_facets.push_back(hs({0.0, -1.0}, 0.0));
    Polytope upper(std::move(upper_facets), {0.0, 1.0});
    Polytope lower(std::move(lower_facets), {0.0, -1.0});
    CellCover cover({upper, lower}, lo, hi);

    PowerSeries v(2, 2, 2);
    v.set_coeff(MultiIndex::unit(2, 0), {-0.1, 1.0});
    v.set_coeff(MultiIndex::unit(2, 1), {-1.0, -0.1});
    return PiecewiseField(std::move(cover), {v, v});
}

// -- meshes -------------------------------------------------------------------

inline TriangulatedSurface tetrahedron(double edge = 1.0) {
    std::vector<std::array<int, 3>> faces{{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
    std::map<std::pair<int, int>, double> lengths;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) lengths[{i, j}] = edge;
    return TriangulatedSurface(4, faces, lengths);
}

/// Tetrahedron topology with one long edge (0-1) whose hinge violates the
/// Delaunay condition at u = 0; exactly one flip restores it.
inline TriangulatedSurface tetrahedron_with_bad_hinge() {
    std::vector<std::array<int, 3>> faces{{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
    std::map<std::pair<int, int>, double> lengths;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) lengths[{i, j}] = 1.0;
    lengths[{0, 1}] = 1.9;
    return TriangulatedSurface(4, faces, lengths);
}

inline TriangulatedSurface octahedron(double edge = 1.0) {
    // 0 top, 1..4 equator, 5 bottom.
    std::vector<std::array<int, 3>> faces{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1},
                                          {5, 2, 1}, {5, 3, 2}, {5, 4, 3}, {5, 1, 4}};
    std::map<std::pair<int, int>, double> lengths;
    for (const auto& f : faces)
        for (int k = 0; k < 3; ++k) lengths[std::minmax(f[k], f[(k + 1) % 3])] = edge;
    return TriangulatedSurface(6, faces, lengths);
}

/// Flat equilateral torus on 8 vertices (Z_8 with steps 1 and 3): every
/// vertex meets six unit equilateral triangles, so all angle defects vanish.
inline TriangulatedSurface flat_torus8() {
    std::vector<std::array<int, 3>> faces;
    for (int v = 0; v < 8; ++v) {
        faces.push_back({v, (v + 1) % 8, (v + 3) % 8});
        faces.push_back({v, (v + 3) % 8, (v + 2) % 8});
    }
    std::map<std::pair<int, int>, double> lengths;
    for (const auto& f : faces)
        for (int k = 0; k < 3; ++k) lengths[std::minmax(f[k], f[(k + 1) % 3])] = 1.0;
    return TriangulatedSurface(8, faces, lengths);
}

}  // namespace polyflow::demos
