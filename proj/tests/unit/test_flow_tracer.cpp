#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polyflow/demos.hpp"
#include "polyflow/flow_tracer.hpp"

using namespace polyflow;
using Catch::Matchers::WithinAbs;

TEST_CASE("one-dimensional drift crosses once") {
    const auto pf = demos::onedim_drift();
    const auto tr = trace_flow(pf, {1.0}, 2.0);
    REQUIRE(tr.switches.size() == 1);
    CHECK_THAT(tr.switches[0].t, WithinAbs(1.0, 1e-8));
    CHECK(tr.switches[0].from == 1);
    CHECK(tr.switches[0].to == 0);
    REQUIRE(tr.intervals.size() == 2);
    CHECK(tr.intervals[0].cell == 1);
    CHECK(tr.intervals[1].cell == 0);
}

TEST_CASE("diagonal crossing of the decoupled system") {
    const auto pf = demos::decoupled2d();
    const auto tr = trace_flow(pf, {1.0, 2.0}, 10.0);
    REQUIRE(tr.switches.size() == 1);
    CHECK_THAT(tr.switches[0].t, WithinAbs(std::log(2.0), 1e-6));
    CHECK(tr.captured);
    CHECK(tr.cells.back() == 1);
    // Samples stay in the active cell up to the boundary tolerance.
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        CHECK(pf.cover.cells[tr.cells[i]].contains(tr.states[i], 1e-7));
}

TEST_CASE("start at the equilibrium stays put") {
    const auto pf = demos::decoupled2d();
    const auto tr = trace_flow(pf, {0.0, 0.0}, 5.0);
    CHECK(tr.captured);
    CHECK(tr.switches.empty());

    TraceOptions no_capture;
    no_capture.capture_radius = 0.0;
    const auto tr2 = trace_flow(pf, {0.0, 0.0}, 5.0, no_capture);
    CHECK(tr2.switches.empty());
    for (const auto& x : tr2.states) CHECK(norm2(x) <= 1e-12);
}

TEST_CASE("next-cell selection") {
    const auto onedim = demos::onedim_drift();
    CHECK(choose_next_cell(onedim, {0.0}, 1.0, 1) == 0);  // drift points left

    const auto tang = demos::tangency2();
    // Tangent to the facet, curving upward: the t^2 coefficient decides.
    CHECK(choose_next_cell(tang, {0.0, 0.0}, 0.0, 1) == 0);

    const auto dec = demos::decoupled2d();
    CHECK(choose_next_cell(dec, {-1.0, 1.0}, 0.0, 0) == 0);  // interior point
}

TEST_CASE("local exit order") {
    {  // transversal crossing: V = +1 against x <= 0
        Polytope left({demos::hs({-1.0}, 0.0)}, {-1.0});
        Polytope right({demos::hs({1.0}, 0.0)}, {1.0});
        CellCover cover({left, right}, {-2.0}, {2.0});
        PowerSeries v(1, 1, 2);
        v.set_coeff(MultiIndex::zero(1), {1.0});
        PiecewiseField pf(std::move(cover), {v, v});
        const auto e = local_exit_order(pf, 0, {0.0}, 8);
        CHECK(e.exits);
        CHECK(e.k == 1);
        CHECK_THAT(e.a, WithinAbs(1.0, 1e-12));
    }
    {  // order-2 tangency: parabola against y <= 0
        const auto tang = demos::tangency2();
        const auto e = local_exit_order(tang, 1, {0.0, 0.0}, 8);
        CHECK(e.exits);
        CHECK(e.k == 2);
        CHECK_THAT(e.a, WithinAbs(1.0, 1e-9));
    }
    {  // motion confined to the facet: inside to order k_max
        Vec lo{-1.0, -1.0}, hi{1.0, 1.0};
        auto facets = demos::box_facets(lo, hi);
        facets.push_back(demos::hs({0.0, 1.0}, 0.0));  // y >= 0
        Polytope cell(std::move(facets), {0.0, 0.5});
        CellCover cover({cell}, lo, hi);
        PowerSeries v(2, 2, 2);
        v.set_coeff(MultiIndex::zero(2), {1.0, 0.0});  // slide along the facet
        PiecewiseField pf(std::move(cover), {v});
        const auto e = local_exit_order(pf, 0, {0.0, 0.0}, 6);
        CHECK_FALSE(e.exits);
        CHECK(e.k == 6);
    }
}

TEST_CASE("asymptotic membership on the decoupled system") {
    const auto pf = demos::decoupled2d();
    const PowerSeries& V = pf.fields[0];
    const auto sol = construct_formal_solution(V, *pf.equilibrium_spectrum, {1.0, 2.0}, 12);

    const auto inside = asymptotic_membership(pf, sol, 1);
    CHECK(inside.kind == MembershipVerdict::Kind::EventuallyInside);

    const auto outside = asymptotic_membership(pf, sol, 0);
    REQUIRE(outside.kind == MembershipVerdict::Kind::EventuallyOutside);
    CHECK(outside.dominant.a > 0.0);
    CHECK(outside.dominant.q == 0);
    CHECK_THAT(outside.dominant.r, WithinAbs(-1.0, 1e-9));
    // The exit facet is the diagonal, not a box wall.
    const auto& facet = pf.cover.cells[0].halfspaces()[outside.facet];
    CHECK_THAT(std::abs(facet.normal()[0]), WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
}

TEST_CASE("membership of a solution confined to a facet") {
    // Cells split by y = 0; V = (-x, -2y); c = (1, 0) keeps the flow on the facet.
    Vec lo{-2.0, -2.0}, hi{2.0, 2.0};
    auto up_f = demos::box_facets(lo, hi);
    up_f.push_back(demos::hs({0.0, 1.0}, 0.0));
    auto low_f = demos::box_facets(lo, hi);
    low_f.push_back(demos::hs({0.0, -1.0}, 0.0));
    CellCover cover({Polytope(up_f, {0.0, 1.0}), Polytope(low_f, {0.0, -1.0})}, lo, hi);
    PowerSeries V(2, 2, 4);
    V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    PiecewiseField pf(std::move(cover), {V, V}, Vec{0.0, 0.0}, StableSpectrum({-1.0, -2.0}));

    const auto sol = construct_formal_solution(V, *pf.equilibrium_spectrum, {1.0, 0.0}, 8);
    const auto verdict = asymptotic_membership(pf, sol, 0);
    CHECK(verdict.kind == MembershipVerdict::Kind::EventuallyInside);
}

TEST_CASE("membership undecided when the tail cannot be ruled out") {
    // V = (-x + y^4, -2y) truncated below the coupling order: the facet
    // series vanishes to truncation but y still feeds x eventually.
    Vec lo{-2.0, -2.0}, hi{2.0, 2.0};
    auto right_f = demos::box_facets(lo, hi);
    right_f.push_back(demos::hs({1.0, 0.0}, 0.0));  // x >= 0
    CellCover cover({Polytope(right_f, {1.0, 0.0})}, lo, hi);
    PowerSeries V(2, 2, 4);
    V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    V.set_coeff(MultiIndex({0, 4}), {1.0, 0.0});
    PiecewiseField pf(std::move(cover), {V}, Vec{0.0, 0.0}, StableSpectrum({-1.0, -2.0}));

    const auto sol = construct_formal_solution(V, *pf.equilibrium_spectrum, {0.0, 1.0}, 3);
    const auto verdict = asymptotic_membership(pf, sol, 0);
    CHECK(verdict.kind == MembershipVerdict::Kind::Undecided);
    CHECK(verdict.reason == "truncation-limited");
}

TEST_CASE("membership requires the equilibrium inside the cell") {
    const auto pf = demos::bernoulli_split();
    const auto sol = construct_formal_solution(pf.fields[0], *pf.equilibrium_spectrum, {1.0}, 8);
    CHECK_THROWS_AS(asymptotic_membership(pf, sol, 1), EquilibriumNotInCell);
}

TEST_CASE("leaving the cover raises LeftCover") {
    Vec lo{0.0, 0.0}, hi{1.0, 1.0};
    Polytope cell(demos::box_facets(lo, hi), {0.5, 0.5});
    CellCover cover({cell}, lo, hi);
    PowerSeries v(2, 2, 2);
    v.set_coeff(MultiIndex::zero(2), {1.0, 0.0});
    PiecewiseField pf(std::move(cover), {v});
    CHECK_THROWS_AS(trace_flow(pf, {0.5, 0.5}, 5.0), LeftCover);
    CHECK_THROWS_AS(trace_flow(pf, {7.0, 7.0}, 5.0), LeftCover);  // x0 outside
}

TEST_CASE("inconsistent fields raise NoAdmissibleCell") {
    // Fields point into each other across the shared facet.
    Polytope left({demos::hs({-1.0}, 0.0)}, {-1.0});
    Polytope right({demos::hs({1.0}, 0.0)}, {1.0});
    CellCover cover({left, right}, {-2.0}, {2.0});
    PowerSeries to_right(1, 1, 2), to_left(1, 1, 2);
    to_right.set_coeff(MultiIndex::zero(1), {1.0});
    to_left.set_coeff(MultiIndex::zero(1), {-1.0});
    PiecewiseField pf(std::move(cover), {to_right, to_left});
    CHECK_THROWS_AS(trace_flow(pf, {-0.5}, 5.0), NoAdmissibleCell);
}

TEST_CASE("chattering guard carries the partial trace") {
    const auto sp = demos::spiral();
    TraceOptions opt;
    opt.switch_cap = 5;
    try {
        trace_flow(sp, {1.5, 0.1}, 60.0, opt);
        FAIL("expected ChatteringGuardError");
    } catch (const ChatteringGuardError& e) {
        CHECK(e.partial.switches.size() == 6);
        CHECK_FALSE(e.partial.times.empty());
        for (std::size_t i = 1; i < e.partial.switches.size(); ++i)
            CHECK(e.partial.switches[i - 1].t < e.partial.switches[i].t);
    }
}

TEST_CASE("parameter fit recovers the decoupled parameters") {
    const auto pf = demos::decoupled2d();
    const auto tr = trace_flow(pf, {1.0, 2.0}, 50.0);
    REQUIRE(tr.captured);
    const double t_c = tr.times.back();
    const Vec state = sub(tr.states.back(), *pf.equilibrium_point);
    const Vec c = fit_parameters(pf.fields[1], *pf.equilibrium_spectrum, state, t_c, 12);
    CHECK_THAT(c[0], WithinAbs(1.0, 1e-6));
    CHECK_THAT(c[1], WithinAbs(2.0, 1e-6));
}

TEST_CASE("field consistency validator flags facet mismatches") {
    Vec lo{-1.0, -1.0}, hi{1.0, 1.0};
    auto up_f = demos::box_facets(lo, hi);
    up_f.push_back(demos::hs({0.0, 1.0}, 0.0));
    auto low_f = demos::box_facets(lo, hi);
    low_f.push_back(demos::hs({0.0, -1.0}, 0.0));
    CellCover cover({Polytope(up_f, {0.0, 0.5}), Polytope(low_f, {0.0, -0.5})}, lo, hi);

    PowerSeries a(2, 2, 4), b(2, 2, 4);
    a.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    a.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    b = a;
    b.set_coeff(MultiIndex({2, 0}), {0.0, 1.0});  // x^2 mismatch on the facet
    PiecewiseField pf(CellCover(cover), {a, b});
    const auto rep = validate_field_consistency(pf, 60, 5);
    CHECK(rep.samples > 0);
    CHECK_FALSE(rep.passed);

    PiecewiseField ok(std::move(cover), {a, a});
    CHECK(validate_field_consistency(ok, 60, 5).passed);
}
