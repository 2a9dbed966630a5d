#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "polyflow/demos.hpp"
#include "polyflow/yamabe.hpp"

using namespace polyflow;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double pi = std::numbers::pi;

double total_curvature(const ConformalState& s) {
    double t = 0.0;
    for (double k : s.curvature()) t += k;
    return t;
}
}  // namespace

TEST_CASE("curvature of the regression meshes") {
    ConformalState tetra(demos::tetrahedron(), Vec(4, 0.0));
    for (double k : tetra.curvature()) CHECK_THAT(k, WithinAbs(pi, 1e-12));
    CHECK_THAT(total_curvature(tetra), WithinAbs(4.0 * pi, 1e-12));
    CHECK(tetra.mesh().euler_characteristic() == 2);

    ConformalState octa(demos::octahedron(), Vec(6, 0.0));
    for (double k : octa.curvature()) CHECK_THAT(k, WithinAbs(2.0 * pi / 3.0, 1e-12));

    ConformalState torus(demos::flat_torus8(), Vec(8, 0.0));
    for (double k : torus.curvature()) CHECK_THAT(k, WithinAbs(0.0, 1e-12));
    CHECK(torus.mesh().euler_characteristic() == 0);
}

TEST_CASE("Gauss-Bonnet holds for arbitrary factors") {
    const Vec u{0.2, -0.3, 0.1, 0.05, -0.15, 0.1};
    ConformalState s(demos::octahedron(), u);
    CHECK_THAT(total_curvature(s), WithinAbs(2.0 * pi * 2.0, 1e-9));
}

TEST_CASE("flow field is zero-sum and vanishes at symmetric states") {
    ConformalState tetra(demos::tetrahedron(), Vec(4, 0.0));
    for (double f : tetra.flow()) CHECK_THAT(f, WithinAbs(0.0, 1e-12));

    ConformalState torus(demos::flat_torus8(), Vec(8, 0.0));
    for (double f : torus.flow()) CHECK_THAT(f, WithinAbs(0.0, 1e-12));

    ConformalState bumped(demos::tetrahedron(), Vec{0.01, -0.01, 0.0, 0.0});
    double sum = 0.0;
    for (double f : bumped.flow()) sum += f;
    CHECK_THAT(sum, WithinAbs(0.0, 1e-12));
}

TEST_CASE("degenerate triangles are rejected") {
    CHECK_THROWS_AS(demos::tetrahedron(0.0), Error);
    // Current lengths can degenerate under extreme factors.
    CHECK_THROWS_AS(ConformalState(demos::tetrahedron(), Vec{3.0, 3.0, -3.0, -3.0}),
                    DegenerateTriangle);
    // Reference lengths violating the triangle inequality.
    std::map<std::pair<int, int>, double> bad;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) bad[{i, j}] = 1.0;
    bad[{0, 1}] = 2.5;
    CHECK_THROWS_AS(TriangulatedSurface(
                        4, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}, bad),
                    DegenerateTriangle);
}

TEST_CASE("non-closed meshes are rejected") {
    std::map<std::pair<int, int>, double> lengths;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) lengths[{i, j}] = 1.0;
    // Missing one face: edges of the absent face have a single incident face.
    CHECK_THROWS_AS(TriangulatedSurface(4, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}}, lengths),
                    ConfigError);
}

TEST_CASE("Delaunay flipping") {
    {  // already Delaunay: nothing to do
        ConformalState s(demos::tetrahedron(), Vec(4, 0.0));
        CHECK(s.delaunay_violations() == 0);
        CHECK(s.flip_to_delaunay(0.0) == 0);
        CHECK(s.flip_log().empty());
    }
    {  // one violated hinge flips exactly once
        ConformalState s(demos::tetrahedron_with_bad_hinge(), Vec(4, 0.0));
        CHECK(s.delaunay_violations() == 1);
        const double before = total_curvature(s);
        CHECK(s.flip_to_delaunay(2.5) == 1);
        CHECK(s.delaunay_violations() == 0);
        CHECK_THAT(total_curvature(s), WithinAbs(before, 1e-9));
        REQUIRE(s.flip_log().size() == 1);
        CHECK(s.flip_log()[0].t == 2.5);
        CHECK(s.flip_log()[0].v0 == 0);
        CHECK(s.flip_log()[0].v1 == 1);
        // The mesh now has two edges joining vertices 2 and 3.
        int count23 = 0;
        for (const auto& e : s.mesh().edges())
            if (std::min(e.v0, e.v1) == 2 && std::max(e.v0, e.v1) == 3) ++count23;
        CHECK(count23 == 2);
        CHECK(s.mesh().euler_characteristic() == 2);
    }
    {  // perturbations below the margin do not flip
        ConformalState s(demos::tetrahedron(), Vec{0.01, -0.01, 0.0, 0.0});
        CHECK(s.flip_to_delaunay(0.0) == 0);
    }
}

TEST_CASE("flow run conserves and converges") {
    const Vec u0{0.3, -0.3, 0.0, 0.0};
    const auto run = run_flow(ConformalState(demos::tetrahedron(), u0), 50.0);

    double sum0 = 0.0;
    for (double v : u0) sum0 += v;
    for (const auto& s : run.samples) {
        double su = 0.0;
        for (double v : s.u) su += v;
        CHECK_THAT(su, WithinAbs(sum0, 1e-9));
    }
    CHECK(run.state.deviation() <= 1e-6);
    CHECK(run.samples.front().max_deviation > 1e-2);  // genuinely perturbed start

    // Fixed-point start: nothing moves, nothing flips.
    const auto still = run_flow(ConformalState(demos::tetrahedron(), Vec(4, 0.0)), 5.0);
    CHECK(still.total_flips == 0);
    for (const auto& s : still.samples)
        for (std::size_t i = 0; i < s.u.size(); ++i) CHECK_THAT(s.u[i], WithinAbs(0.0, 1e-12));
}

TEST_CASE("flow run matches an explicit Euler oracle") {
    const Vec u0{0.3, -0.3, 0.0, 0.0};
    const double t_end = 1.0;
    const auto run = run_flow(ConformalState(demos::tetrahedron(), u0), t_end);

    // Independent route: explicit Euler with a small fixed step, flipping
    // after every step exactly like the adaptive run does.
    ConformalState euler(demos::tetrahedron(), u0);
    const double h = 1e-4;
    long flips = 0;
    for (double t = 0.0; t < t_end - h / 2; t += h) {
        Vec u = euler.u();
        const Vec F = euler.flow();
        axpy(u, h, F);
        euler.set_u(std::move(u));
        flips += euler.flip_to_delaunay(t + h);
    }
    CHECK(flips == run.total_flips);
    const Vec diff = sub(euler.u(), run.state.u());
    CHECK(norm_inf(diff) <= 1e-3);
}

TEST_CASE("exponential coordinates") {
    CHECK(exp_coordinates(Vec{0.0, 0.0}) == Vec{1.0, 1.0});
    const Vec two = exp_coordinates(Vec{std::log(2.0) / -2.0});
    CHECK_THAT(two[0], WithinAbs(2.0, 1e-14));
    const Vec w = exp_coordinates(Vec{-0.3, 0.7});
    CHECK(w[0] > w[1]);  // antitone
    for (double v : w) CHECK(v > 0.0);
}
