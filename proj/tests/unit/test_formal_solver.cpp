#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polyflow/demos.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/verify.hpp"

using namespace polyflow;
using Catch::Matchers::WithinAbs;

namespace {

Poly poly1(std::initializer_list<double> coeffs) {
    std::vector<Vec> rows;
    for (double c : coeffs) rows.push_back({c});
    return Poly::from_coeffs(std::move(rows), 1);
}

}  // namespace

TEST_CASE("resolvent on polynomials") {
    {  // u=2, Q=t -> -t/2 - 1/4
        const Poly P = resolvent_poly(2.0, poly1({0.0, 1.0}));
        CHECK(P.coeff(0)[0] == -0.25);
        CHECK(P.coeff(1)[0] == -0.5);
    }
    {  // u=0, Q=1 -> t (antiderivative branch)
        const Poly P = resolvent_poly(0.0, poly1({1.0}));
        CHECK(P.coeff(0)[0] == 0.0);
        CHECK(P.coeff(1)[0] == 1.0);
    }
    {  // u=1, Q=1 -> -1
        const Poly P = resolvent_poly(1.0, poly1({1.0}));
        CHECK(P.degree() == 0);
        CHECK(P.coeff(0)[0] == -1.0);
    }
}

TEST_CASE("linear fields have pure exponential solutions") {
    PowerSeries V(2, 2, 6);
    V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    const auto sol = construct_formal_solution(V, StableSpectrum({-1.0, -2.0}), {3.0, -4.0}, 6);

    CHECK(sol.series.terms().size() == 2);
    CHECK(sol.series.term(MultiIndex({1, 0})).coeff(0) == Vec{3.0, 0.0});
    CHECK(sol.series.term(MultiIndex({0, 1})).coeff(0) == Vec{0.0, -4.0});
    CHECK(check_formal_residual(sol) == 0.0);
}

TEST_CASE("Bernoulli coefficients match the closed form") {
    // x' = lambda x + x^2 has coefficient c^k / lambda^{k-1} at e^{k lambda t}.
    const double lambda = -0.8, c = 0.7;
    PowerSeries V(1, 1, 8);
    V.set_coeff(MultiIndex({1}), {lambda});
    V.set_coeff(MultiIndex({2}), {1.0});
    const auto sol = construct_formal_solution(V, StableSpectrum({lambda}), {c}, 8);
    for (int k = 1; k <= 6; ++k) {
        const double want = std::pow(c, k) / std::pow(lambda, k - 1);
        CHECK_THAT(sol.series.term(MultiIndex({k})).coeff(0)[0], WithinAbs(want, 1e-12));
    }
    CHECK(check_formal_residual(sol) <= 1e-12);
}

TEST_CASE("corrupted solutions are flagged by the residual") {
    auto sol = construct_formal_solution(demos::bernoulli_field(6), StableSpectrum({-1.0}), {1.0},
                                         6);
    CHECK(check_formal_residual(sol) <= 1e-12);
    Poly P2 = sol.series.term(MultiIndex({2}));
    Vec c0 = P2.coeff(0);
    c0[0] += 1e-3;
    P2.set_coeff(0, c0);
    sol.series.set_term(MultiIndex({2}), P2);
    CHECK(check_formal_residual(sol) >= 1e-4);
}

TEST_CASE("construction preconditions") {
    const StableSpectrum spec({-1.0, -2.0});
    {
        PowerSeries V(2, 2, 4);  // off-diagonal linear part
        V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.5});
        V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
        CHECK_THROWS_AS(construct_formal_solution(V, spec, {1.0, 1.0}, 4),
                        NotDiagonalLinearPart);
    }
    {
        PowerSeries V(2, 2, 4);  // nonzero constant term
        V.set_coeff(MultiIndex::zero(2), {0.1, 0.0});
        V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
        V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
        CHECK_THROWS_AS(construct_formal_solution(V, spec, {1.0, 1.0}, 4), NotCentered);
    }
    CHECK_THROWS_AS(StableSpectrum(Vec{-2.0, -1.0}), InvalidSpectrum);  // not descending
    CHECK_THROWS_AS(StableSpectrum(Vec{-1.0, 0.0}), InvalidSpectrum);   // not negative
}

TEST_CASE("resonance takes the integration branch and is logged") {
    // rates (-1, -2) with x^2 feeding y: lambda_2 - 2 lambda_1 = 0.
    PowerSeries V(2, 2, 6);
    V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
    V.set_coeff(MultiIndex({2, 0}), {0.0, 1.0});
    const auto sol = construct_formal_solution(V, StableSpectrum({-1.0, -2.0}), {1.0, 0.0}, 6);

    REQUIRE_FALSE(sol.resonance_log.empty());
    CHECK(sol.resonance_log.front().first == MultiIndex({2, 0}));
    CHECK(sol.resonance_log.front().second == 1);
    // P_{(2,0)} = (0, t): the classic t e^{-2t} resonance response.
    const Poly P = sol.series.term(MultiIndex({2, 0}));
    CHECK(P.coeff(1) == Vec{0.0, 1.0});
    CHECK(check_formal_residual(sol) <= 1e-12);
}

TEST_CASE("near-resonance produces a warning") {
    const double l2 = -2.0 + 1e-9;
    PowerSeries V(2, 2, 4);
    V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
    V.set_coeff(MultiIndex::unit(2, 1), {0.0, l2});
    V.set_coeff(MultiIndex({2, 0}), {0.0, 1.0});
    const auto sol = construct_formal_solution(V, StableSpectrum({-1.0, l2}), {1.0, 1.0}, 4);
    CHECK_FALSE(sol.warnings.empty());
    CHECK(sol.resonance_log.empty());
}

TEST_CASE("local Taylor solutions") {
    {  // y' = -y, y(0) = 1
        PowerSeries V(1, 1, 3);
        V.set_coeff(MultiIndex({1}), {-1.0});
        const Poly y = taylor_solution(V, {1.0}, 3);
        CHECK(y.coeff(0)[0] == 1.0);
        CHECK(y.coeff(1)[0] == -1.0);
        CHECK_THAT(y.coeff(2)[0], WithinAbs(0.5, 1e-15));
        CHECK_THAT(y.coeff(3)[0], WithinAbs(-1.0 / 6.0, 1e-15));
    }
    {  // y' = y^2, y(0) = 1: geometric series
        PowerSeries V(1, 1, 4);
        V.set_coeff(MultiIndex({2}), {1.0});
        const Poly y = taylor_solution(V, {1.0}, 3);
        for (int d = 0; d <= 3; ++d) CHECK_THAT(y.coeff(d)[0], WithinAbs(1.0, 1e-12));
    }
    {  // zero field: constant solution
        const Poly y = taylor_solution(PowerSeries(2, 2, 3), {0.3, -0.7}, 3);
        CHECK(y.degree() == 0);
        CHECK(y.coeff(0) == Vec{0.3, -0.7});
    }
}

TEST_CASE("resolvent domination threshold") {
    {  // u=2, Q=t: t0 = 1 and P*(1) = 3/4 <= Q*(1) = 1
        const Poly Q = poly1({0.0, 1.0});
        CHECK_THAT(check_domination(2.0, Q), WithinAbs(1.0, 1e-15));
        const Poly P = resolvent_poly(2.0, Q);
        CHECK_THAT(P.star_eval(1.0), WithinAbs(0.75, 1e-15));
        CHECK(P.star_eval(1.0) <= Q.star_eval(1.0));
    }
    {  // constant Q: threshold 0 and |Q|/u <= Q* everywhere
        const Poly Q = poly1({3.0});
        CHECK(check_domination(5.0, Q) == 0.0);
        const Poly P = resolvent_poly(5.0, Q);
        for (double t : {0.0, 0.5, 1.0, 4.0}) CHECK(P.star_eval(t) <= Q.star_eval(t));
    }
    {  // u=100, Q=t^5: grid check from t0 = 0.1
        const Poly Q = poly1({0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
        const double t0 = check_domination(100.0, Q);
        CHECK_THAT(t0, WithinAbs(0.1, 1e-15));
        const Poly P = resolvent_poly(100.0, Q);
        for (double t = t0; t <= 10.0; t += 0.33)
            CHECK(P.star_eval(t) <= Q.star_eval(t) * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(check_domination(1.5, poly1({1.0})), PreconditionU);
}

TEST_CASE("majorant recursion values") {
    const auto tab = majorant_table(1.0, 1, 3, 1);
    CHECK(tab.values.at(MultiIndex({0})) == 0.0);
    CHECK(tab.values.at(MultiIndex({1})) == 1.0);
    CHECK(tab.values.at(MultiIndex({2})) == 1.0);
    CHECK(tab.values.at(MultiIndex({3})) == 3.0);

    const auto tabM = majorant_table(7.3, 2, 1, 2);
    CHECK(tabM.values.at(MultiIndex({1, 0})) == 1.0);
    CHECK(tabM.values.at(MultiIndex({0, 1})) == 1.0);
    CHECK(tabM.values.at(MultiIndex({0, 0})) == 0.0);
}

TEST_CASE("growth rate fit") {
    const auto tab = majorant_table(1.0, 1, 6, 1);
    const double want = std::max({1.0, std::pow(3.0, 1.0 / 3.0), std::pow(11.0, 0.25),
                                  std::pow(45.0, 0.2), std::pow(197.0, 1.0 / 6.0)});
    CHECK_THAT(fit_growth_rate(tab), WithinAbs(want, 1e-12));

    const auto tiny = majorant_table(1e-9, 1, 6, 1);  // vanishing nonlinearity
    CHECK_THAT(fit_growth_rate(tiny), WithinAbs(1.0, 1e-6));

    CHECK_THAT(fit_growth_rate(majorant_table(2.0, 1, 1, 2)), WithinAbs(1.0, 1e-15));
}

TEST_CASE("majorant recursion matches the implicit-series oracle") {
    for (double M : {0.5, 1.0}) {
        const auto tab = majorant_table(M, 2, 5, 2);
        const auto want = verify::oracle::majorant_series_newton(M, 2, 2, 5);
        for (const auto& [J, a] : tab.values) {
            const double b = want.at(J.exponents());
            CHECK_THAT(a, WithinAbs(b, 1e-10 * std::max(1.0, std::abs(b))));
        }
    }
}

TEST_CASE("perturbation comparison guards") {
    const auto V = demos::bernoulli_field(6);
    const StableSpectrum spec({-1.0});
    CHECK_THROWS_AS(compare_perturbed(V, spec, {1.0}, {0.0}, 6, -0.5), ZeroPerturbation);
    CHECK_THROWS_AS(compare_perturbed(V, spec, {1.0}, {0.5}, 6, -2.0), Error);  // bad rate
    CHECK_THROWS_AS(compare_perturbed(V, spec, {1.0}, {0.5}, 6, 0.5), Error);
}

TEST_CASE("perturbation comparison on the Bernoulli field") {
    const auto rep = compare_perturbed(demos::bernoulli_field(10), StableSpectrum({-1.0}), {1.0},
                                       {0.5}, 10, -0.5);
    CHECK(rep.component == 0);
    CHECK_THAT(rep.dominant.a, WithinAbs(0.5, 1e-9));
    CHECK(rep.dominant.q == 0);
    CHECK_THAT(rep.dominant.r, WithinAbs(-1.0, 1e-12));
    CHECK(rep.window_ok);
    CHECK(rep.equality_residual <= 1e-9);
}
