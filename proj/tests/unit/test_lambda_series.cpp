#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polyflow/lambda_series.hpp"
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

TEST_CASE("formal derivative") {
    // t e^{-t}  ->  (1 - t) e^{-t}
    LambdaSeries x({-1.0}, 1, 3);
    x.set_term(MultiIndex({1}), poly1({0.0, 1.0}));
    const auto dx = x.derivative();
    const Poly P = dx.term(MultiIndex({1}));
    CHECK(P.coeff(0)[0] == 1.0);
    CHECK(P.coeff(1)[0] == -1.0);

    // c e^{-t} -> -c e^{-t}
    LambdaSeries y({-1.0}, 1, 2);
    y.set_term(MultiIndex({1}), poly1({3.5}));
    CHECK(y.derivative().term(MultiIndex({1})).coeff(0)[0] == -3.5);

    // e^{-t} + e^{-2t} with rates (-1, -2)
    LambdaSeries z({-1.0, -2.0}, 1, 2);
    z.set_term(MultiIndex({1, 0}), poly1({1.0}));
    z.set_term(MultiIndex({0, 1}), poly1({1.0}));
    const auto dz = z.derivative();
    CHECK(dz.term(MultiIndex({1, 0})).coeff(0)[0] == -1.0);
    CHECK(dz.term(MultiIndex({0, 1})).coeff(0)[0] == -2.0);
}

TEST_CASE("composition with an analytic map") {
    PowerSeries square(1, 1, 4);
    square.set_coeff(MultiIndex({2}), {1.0});

    {  // f(x)=x^2, x = c e^{lambda t} -> c^2 e^{2 lambda t}
        LambdaSeries x({-0.7}, 1, 4);
        x.set_term(MultiIndex({1}), poly1({2.0}));
        const auto fx = compose_with_analytic(square, x);
        CHECK(fx.terms().size() == 1);
        CHECK(fx.term(MultiIndex({2})).coeff(0)[0] == 4.0);
    }

    {  // f(x)=x^2, x = e^{lt} + t e^{2lt} -> e^{2lt} + 2t e^{3lt} + t^2 e^{4lt}
        LambdaSeries x({-1.0}, 1, 4);
        x.set_term(MultiIndex({1}), poly1({1.0}));
        x.set_term(MultiIndex({2}), poly1({0.0, 1.0}));
        const auto fx = compose_with_analytic(square, x);
        CHECK(fx.term(MultiIndex({2})).coeff(0)[0] == 1.0);
        CHECK(fx.term(MultiIndex({3})).coeff(1)[0] == 2.0);
        CHECK(fx.term(MultiIndex({4})).coeff(2)[0] == 1.0);
        // Numeric cross-check at 10 time points.
        for (int i = 1; i <= 10; ++i) {
            const double t = 4.0 + 0.5 * i;
            const double direct = std::pow(x.evaluate(t)[0], 2.0);
            CHECK_THAT(fx.evaluate(t)[0], WithinAbs(direct, 1e-10));
        }
    }

    {  // linear map applied termwise
        PowerSeries lin(2, 1, 3);
        lin.set_coeff(MultiIndex({1, 0}), {2.0});
        lin.set_coeff(MultiIndex({0, 1}), {-3.0});
        LambdaSeries x({-1.0}, 2, 3);
        Poly P(2);
        P.set_coeff(0, {1.0, 4.0});
        x.set_term(MultiIndex({1}), P);
        const auto lx = compose_with_analytic(lin, x);
        CHECK(lx.term(MultiIndex({1})).coeff(0)[0] == 2.0 * 1.0 - 3.0 * 4.0);
    }
}

TEST_CASE("composition requires a centered argument") {
    PowerSeries f(1, 1, 2);
    f.set_coeff(MultiIndex({1}), {1.0});
    LambdaSeries x({-1.0}, 1, 2);
    x.set_term(MultiIndex({0}), poly1({1.0}));
    CHECK_THROWS_AS(compose_with_analytic(f, x), NotCentered);

    LambdaSeries y({-1.0}, 2, 2);  // out_dim 2 != f.in_dim 1
    CHECK_THROWS_AS(compose_with_analytic(f, y), DimensionMismatch);
}

TEST_CASE("truncated series evaluation") {
    LambdaSeries x({-1.0}, 1, 2);
    x.set_term(MultiIndex({1}), poly1({1.0}));
    CHECK_THAT(x.evaluate(0.0)[0], WithinAbs(1.0, 1e-15));

    LambdaSeries y({-1.0}, 1, 2);
    y.set_term(MultiIndex({1}), poly1({1.0}));
    y.set_term(MultiIndex({2}), poly1({-1.0}));
    CHECK_THAT(y.evaluate(std::log(2.0))[0], WithinAbs(0.25, 1e-14));

    CHECK(LambdaSeries({-1.0}, 1, 2).evaluate(3.0)[0] == 0.0);
}

TEST_CASE("tail bound closes the geometric sum") {
    const int order = 5;
    LambdaSeries x({-1.0}, 1, order);
    x.set_term(MultiIndex({1}), poly1({1.0}));

    for (double t : {1.0, 2.0, 4.0}) {
        const double z = std::exp(-t);
        const double closed = std::pow(z, order + 1) / (1.0 - z);
        CHECK_THAT(tail_bound(x, t, 0.0), WithinAbs(closed, 1e-12));

        double direct = 0.0;  // first thousand tail terms
        for (int j = order + 1; j <= order + 1000; ++j) direct += std::pow(z, j);
        CHECK_THAT(tail_bound(x, t, 0.0), WithinAbs(direct, 1e-12));
    }

    // Monotone decreasing in the truncation order.
    LambdaSeries wider({-1.0}, 1, order + 3);
    wider.set_term(MultiIndex({1}), poly1({1.0}));
    CHECK(tail_bound(wider, 2.0, 0.0) < tail_bound(x, 2.0, 0.0));

    // Out of regime: t^q e^{lambda t} >= 1 (at t = 2, q = 3: 8 e^{-2} > 1).
    CHECK_THROWS_AS(tail_bound(x, 2.0, 3.0), NotInRegime);
    CHECK_THROWS_AS(tail_bound(x, -1.0, 0.0), NotInRegime);
}

TEST_CASE("dominant term extraction") {
    {  // 3 t^2 e^{-t} - 5 e^{-2t} -> (3, 2, -1)
        LambdaSeries s({-1.0}, 1, 3);
        s.set_term(MultiIndex({1}), poly1({0.0, 0.0, 3.0}));
        s.set_term(MultiIndex({2}), poly1({-5.0}));
        const auto d = dominant_term(s);
        REQUIRE(d.has_value());
        CHECK(d->a == 3.0);
        CHECK(d->q == 2);
        CHECK_THAT(d->r, WithinAbs(-1.0, 1e-15));
    }
    {  // rate collision: t e^{-2t} (J=(2,0)) + 4 e^{-2t} (J=(0,1)) merge to t+4
        LambdaSeries s({-1.0, -2.0}, 1, 3);
        s.set_term(MultiIndex({2, 0}), poly1({0.0, 1.0}));
        s.set_term(MultiIndex({0, 1}), poly1({4.0}));
        const auto d = dominant_term(s);
        REQUIRE(d.has_value());
        CHECK(d->a == 1.0);
        CHECK(d->q == 1);
        CHECK_THAT(d->r, WithinAbs(-2.0, 1e-15));
    }
    {  // cancellation to zero -> nullopt
        LambdaSeries s({-1.0, -2.0}, 1, 3);
        s.set_term(MultiIndex({2, 0}), poly1({1.0}));
        s.set_term(MultiIndex({0, 1}), poly1({-1.0}));
        CHECK_FALSE(dominant_term(s).has_value());
        CHECK_FALSE(dominant_term(LambdaSeries({-1.0}, 1, 2)).has_value());
    }
}

TEST_CASE("star evaluation") {
    CHECK_THAT(poly1({-1.0, 1.0}).star_eval(2.0), WithinAbs(3.0, 1e-15));

    Poly v(2);  // (t, -2t)
    v.set_coeff(1, {1.0, -2.0});
    CHECK_THAT(star_eval(v, 1.0), WithinAbs(2.0, 1e-15));

    CHECK(Poly(1).star_eval(5.0) == 0.0);
    CHECK_THROWS_AS(poly1({1.0}).star_eval(-0.5), NegativeTime);
}

TEST_CASE("lambda series requires negative rates") {
    CHECK_THROWS_AS(LambdaSeries({0.0}, 1, 2), Error);
    CHECK_THROWS_AS(LambdaSeries({-1.0, 0.5}, 1, 2), Error);
}

TEST_CASE("composition agrees with the literal oracle") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 15; ++it) {
        const Vec rates = verify::gen::random_rates(rng, 2);
        const auto f = verify::gen::random_series(rng, 2, 2, 4, 4, false, false);
        const auto x = verify::gen::random_lambda_series(rng, rates, 2, 4, 3, 2, false);
        const auto got = compose_with_analytic(f, x);
        const auto want = verify::oracle::compose_literal(f, x);
        CHECK(subtract(got, want).max_abs_coeff() <= 1e-12);
    }
}
