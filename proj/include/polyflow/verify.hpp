#pragma once

// Randomized property suites exercised both by the `verify` CLI subcommand
// and by the test binaries, plus the independent oracles they check against:
// a literal partition-enumeration composition (no shared code with the
// production Horner-style path) and a Newton solver for the implicit series
// equation behind the majorant recursion.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/demos.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/flow_tracer.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/geometry.hpp"
#include "polyflow/lambda_series.hpp"
#include "polyflow/ode.hpp"
#include "polyflow/power_series.hpp"
#include "polyflow/yamabe.hpp"

namespace polyflow::verify {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// ===========================================================================
//  Oracles
// ===========================================================================

namespace oracle {

namespace detail {

/// Sum over ordered assignments of nonzero inner indices to `slots`
/// (slots[p] names the component extracted at position p) with indices
/// summing to `remaining`, of the product of extracted coefficients.
inline double assignment_sum(const PowerSeries& g, const std::vector<int>& slots, std::size_t pos,
                             const MultiIndex& remaining) {
    if (pos == slots.size()) return remaining.is_zero() ? 1.0 : 0.0;
    if (remaining.weight() < static_cast<int>(slots.size() - pos)) return 0.0;
    double total = 0.0;
    for (const auto& [K, c] : g.terms()) {
        if (K.is_zero()) continue;
        const double comp = c[slots[pos]];
        if (comp == 0.0) continue;
        auto rest = remaining.minus(K);
        if (!rest) continue;
        total += comp * assignment_sum(g, slots, pos + 1, *rest);
    }
    return total;
}

inline Poly assignment_sum_poly(const LambdaSeries& x, const std::vector<int>& slots,
                                std::size_t pos, const MultiIndex& remaining) {
    if (pos == slots.size())
        return remaining.is_zero() ? Poly::constant({1.0}) : Poly(1);
    Poly total(1);
    if (remaining.weight() < static_cast<int>(slots.size() - pos)) return total;
    for (const auto& [K, P] : x.terms()) {
        if (K.is_zero()) continue;
        const Poly comp = P.component(slots[pos]);
        if (comp.is_zero()) continue;
        auto rest = remaining.minus(K);
        if (!rest) continue;
        total = total.plus(poly_mul(comp, assignment_sum_poly(x, slots, pos + 1, *rest)));
    }
    return total;
}

inline std::vector<int> slots_of(const MultiIndex& I) {
    std::vector<int> slots;
    for (int i = 0; i < I.size(); ++i)
        for (int j = 0; j < I[i]; ++j) slots.push_back(i);
    return slots;
}

}  // namespace detail

/// Literal composition: d_J as the explicit sum over coefficient partitions.
inline PowerSeries compose_literal(const PowerSeries& f, const PowerSeries& g) {
    if (g.out_dim() != f.in_dim()) throw DimensionMismatch("compose_literal");
    if (!g.has_zero_constant_term()) throw NonzeroConstantTerm("compose_literal");
    const int order = std::min(f.order(), g.order());
    PowerSeries r(g.in_dim(), f.out_dim(), order);
    for (int w = 0; w <= order; ++w) {
        for (const auto& J : multi_indices_of_weight(g.in_dim(), w)) {
            Vec dJ(f.out_dim(), 0.0);
            for (const auto& [I, b] : f.terms()) {
                if (I.weight() > w) continue;  // nonzero parts force |I| <= |J|
                const double s = detail::assignment_sum(g, detail::slots_of(I), 0, J);
                if (s != 0.0) axpy(dJ, s, b);
            }
            r.set_coeff(J, std::move(dJ));
        }
    }
    return r;
}

/// Literal composition of an analytic map with a centered series:
/// Q_J as the explicit sum over polynomial-coefficient partitions.
inline LambdaSeries compose_literal(const PowerSeries& f, const LambdaSeries& x) {
    if (f.in_dim() != x.out_dim()) throw DimensionMismatch("compose_literal");
    if (!x.centered()) throw NotCentered("compose_literal");
    LambdaSeries r(x.rates(), f.out_dim(), x.order());
    for (int w = 0; w <= x.order(); ++w) {
        for (const auto& J : multi_indices_of_weight(x.var_dim(), w)) {
            Poly QJ(f.out_dim());
            for (const auto& [I, b] : f.terms()) {
                if (I.weight() > w) continue;
                const Poly s = detail::assignment_sum_poly(x, detail::slots_of(I), 0, J);
                if (s.is_zero()) continue;
                for (int d = 0; d <= s.degree(); ++d) {
                    Vec v = QJ.coeff(d);
                    axpy(v, s.coeff(d)[0], b);
                    QJ.set_coeff(d, std::move(v));
                }
            }
            r.set_term(J, std::move(QJ));
        }
    }
    return r;
}

namespace detail {

inline PowerSeries series_const(double v, int m, int order) {
    return PowerSeries::constant({v}, m, order);
}

/// 1/a for a scalar series with nonzero constant term, by Newton iteration.
inline PowerSeries reciprocal(const PowerSeries& a, int iterations) {
    const double a0 = a.constant_term()[0];
    if (a0 == 0.0) throw Error("reciprocal: zero constant term");
    PowerSeries y = series_const(1.0 / a0, a.in_dim(), a.order());
    for (int it = 0; it < iterations; ++it) {
        PowerSeries ay = multiply(a, y);
        PowerSeries two_minus = subtract(series_const(2.0, a.in_dim(), a.order()), ay);
        y = multiply(y, two_minus);
    }
    return y;
}

inline PowerSeries pow_int(const PowerSeries& a, int p) {
    PowerSeries r = series_const(1.0, a.in_dim(), a.order());
    for (int i = 0; i < p; ++i) r = multiply(r, a);
    return r;
}

}  // namespace detail

/// Coefficients of the analytic solution f (f(0) = 0) of
///   1 - (x_1 + ... + x_m) + (Mn+1) f = (1 - M f)^{-n},
/// computed by Newton iteration on truncated series. Independent route to
/// the majorant recursion values.
inline std::map<std::vector<int>, double> majorant_series_newton(double M, int n, int m,
                                                                 int order) {
    using detail::pow_int;
    using detail::reciprocal;
    using detail::series_const;
    const int newton_iters = order + 2;
    const int recip_iters = order + 2;

    PowerSeries sum_x(m, 1, order);
    for (int i = 0; i < m; ++i) sum_x.set_coeff(MultiIndex::unit(m, i), {1.0});

    PowerSeries f(m, 1, order);  // starts at 0
    for (int it = 0; it < newton_iters; ++it) {
        PowerSeries one_minus_Mf = subtract(series_const(1.0, m, order), scale(f, M));
        PowerSeries rhs = reciprocal(pow_int(one_minus_Mf, n), recip_iters);
        // G(f) = (1 - M f)^{-n} + (Mn+1) f's defect against 1 - sum x + (Mn+1) f = rhs:
        PowerSeries G = subtract(add(subtract(series_const(1.0, m, order), sum_x),
                                     scale(f, M * n + 1.0)),
                                 rhs);
        PowerSeries Gy = subtract(series_const(M * n + 1.0, m, order),
                                  scale(reciprocal(pow_int(one_minus_Mf, n + 1), recip_iters),
                                        M * n));
        f = subtract(f, multiply(G, reciprocal(Gy, recip_iters)));
    }

    std::map<std::vector<int>, double> out;
    for (int w = 0; w <= order; ++w)
        for (const auto& J : multi_indices_of_weight(m, w)) out[J.exponents()] = f.coeff(J)[0];
    return out;
}

}  // namespace oracle

// ===========================================================================
//  Random instance generators
// ===========================================================================

namespace gen {

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int a, int b) {
    return std::uniform_int_distribution<int>(a, b)(rng);
}

/// Nonzero small integer in [-2, 2].
inline double int_coeff(std::mt19937_64& rng) {
    static const double table[4] = {-2.0, -1.0, 1.0, 2.0};
    return table[uniform_int(rng, 0, 3)];
}

inline Vec unit_vector(std::mt19937_64& rng, int m) {
    std::normal_distribution<double> gauss;
    Vec v(m);
    double n = 0.0;
    while (n < 1e-8) {
        for (auto& x : v) x = gauss(rng);
        n = norm2(v);
    }
    for (auto& x : v) x /= n;
    return v;
}

/// Polytope with the origin strictly interior (witness at the origin),
/// margins in [0.1, 1.1].
inline Polytope random_polytope(std::mt19937_64& rng, int dim, int facets) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < facets; ++i)
        hs.emplace_back(unit_vector(rng, dim), -uniform(rng, 0.1, 1.1));
    return Polytope(std::move(hs), Vec(dim, 0.0));
}

inline Vec random_exterior_point(std::mt19937_64& rng, const Polytope& D) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec x = scaled(unit_vector(rng, D.dim()), uniform(rng, 2.0, 10.0));
        if (D.max_violation(x) > 1e-6) return x;
    }
    throw Error("random_exterior_point: sampling failed");
}

inline Vec random_interior_point(std::mt19937_64& rng, const Polytope& D) {
    double min_plane = std::numeric_limits<double>::infinity();
    for (const auto& h : D.halfspaces()) min_plane = std::min(min_plane, h.plane_distance(D.witness()));
    Vec p = D.witness();
    axpy(p, uniform(rng, 0.0, 0.5) * min_plane, unit_vector(rng, D.dim()));
    return p;
}

inline PowerSeries random_series(std::mt19937_64& rng, int in_dim, int out_dim, int order,
                                 int terms, bool centered, bool integer_coeffs) {
    PowerSeries s(in_dim, out_dim, order);
    for (int t = 0; t < terms; ++t) {
        const int w = uniform_int(rng, centered ? 1 : 0, order);
        auto candidates = multi_indices_of_weight(in_dim, w);
        const MultiIndex I = candidates[uniform_int(rng, 0, static_cast<int>(candidates.size()) - 1)];
        Vec b(out_dim);
        for (auto& v : b) v = integer_coeffs ? int_coeff(rng) : uniform(rng, -1.0, 1.0);
        s.set_coeff(I, std::move(b));
    }
    return s;
}

inline Vec random_rates(std::mt19937_64& rng, int m, double lo = -2.0, double hi = -0.5) {
    Vec r(m);
    for (auto& v : r) v = uniform(rng, lo, hi);
    std::sort(r.begin(), r.end(), std::greater<double>());
    return r;
}

inline LambdaSeries random_lambda_series(std::mt19937_64& rng, const Vec& rates, int out_dim,
                                         int order, int terms, int max_degree,
                                         bool integer_coeffs) {
    LambdaSeries s(rates, out_dim, order);
    const int m = static_cast<int>(rates.size());
    for (int t = 0; t < terms; ++t) {
        const int w = uniform_int(rng, 1, order);  // centered
        auto candidates = multi_indices_of_weight(m, w);
        const MultiIndex J = candidates[uniform_int(rng, 0, static_cast<int>(candidates.size()) - 1)];
        Poly P(out_dim);
        const int deg = uniform_int(rng, 0, max_degree);
        for (int d = 0; d <= deg; ++d) {
            Vec v(out_dim);
            for (auto& x : v) x = integer_coeffs ? int_coeff(rng) : uniform(rng, -1.0, 1.0);
            P.set_coeff(d, std::move(v));
        }
        s.set_term(J, s.term(J).plus(P));
    }
    return s;
}

/// Sparse field with exactly diagonal linear part and random higher terms.
inline std::pair<PowerSeries, StableSpectrum> random_stable_field(std::mt19937_64& rng, int m,
                                                                  int order, int nonlinear_terms,
                                                                  int max_weight = 3) {
    StableSpectrum spectrum(random_rates(rng, m, -3.0, -0.5));
    PowerSeries V(m, m, order);
    for (int i = 0; i < m; ++i) {
        Vec b(m, 0.0);
        b[i] = spectrum.rates()[i];
        V.set_coeff(MultiIndex::unit(m, i), std::move(b));
    }
    for (int t = 0; t < nonlinear_terms; ++t) {
        const int w = uniform_int(rng, 2, std::min(order, max_weight));
        auto candidates = multi_indices_of_weight(m, w);
        const MultiIndex I = candidates[uniform_int(rng, 0, static_cast<int>(candidates.size()) - 1)];
        Vec b(m);
        for (auto& v : b) v = uniform(rng, -0.5, 0.5);
        V.set_coeff(I, add(V.coeff(I), b));
    }
    return {std::move(V), std::move(spectrum)};
}

inline Poly random_poly(std::mt19937_64& rng, int dim, int degree) {
    Poly p(dim);
    for (int d = 0; d <= degree; ++d) {
        Vec v(dim);
        for (auto& x : v) x = uniform(rng, -1.0, 1.0);
        p.set_coeff(d, std::move(v));
    }
    return p;
}

}  // namespace gen

// ===========================================================================
//  Suite plumbing
// ===========================================================================

namespace detail {

class Suite {
public:
    void check(const std::string& name, bool ok, const std::string& fail_detail = "",
               const std::string& pass_detail = "") {
        results_.push_back({name, ok, ok ? pass_detail : fail_detail});
    }
    std::vector<PropertyResult> results() && { return std::move(results_); }

private:
    std::vector<PropertyResult> results_;
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

// ===========================================================================
//  geometry suite
// ===========================================================================

inline std::vector<PropertyResult> verify_geometry(std::uint64_t seed, int instances = 1000) {
    std::mt19937_64 rng(seed);
    detail::Suite suite;

    {  // Sandwich estimate, zero violations over random instances.
        int violations = 0;
        std::string witness;
        for (int it = 0; it < instances; ++it) {
            const int dim = gen::uniform_int(rng, 2, 5);
            const Polytope D = gen::random_polytope(rng, dim, gen::uniform_int(rng, 3, 8));
            const Vec p = gen::random_interior_point(rng, D);
            const Vec x = gen::random_exterior_point(rng, D);
            const auto b = check_lemma14(p, x, D);
            const double eps = 1e-12 * std::max(1.0, b.upper);
            if (!(b.lower <= b.mid + eps && b.mid <= b.upper + eps)) {
                ++violations;
                if (witness.empty())
                    witness = "instance " + std::to_string(it) + ": lower=" + detail::fmt(b.lower) +
                              " mid=" + detail::fmt(b.mid) + " upper=" + detail::fmt(b.upper);
            }
        }
        suite.check("geometry/sandwich_estimate", violations == 0,
                    std::to_string(violations) + " violations; " + witness,
                    std::to_string(instances) + " instances");
    }

    {  // Projection is the identity on members.
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 200 && ok; ++it) {
            const Polytope D = gen::random_polytope(rng, gen::uniform_int(rng, 2, 5),
                                                    gen::uniform_int(rng, 3, 8));
            const Vec x = gen::random_interior_point(rng, D);
            const auto pr = project_onto_polytope(x, D);
            if (pr.distance != 0.0 || pr.closest != x) {
                ok = false;
                witness = "distance=" + detail::fmt(pr.distance);
            }
        }
        suite.check("geometry/projection_fixed_point", ok, witness);
    }

    {  // Single half-space: projection distance equals the signed quantity.
        double worst = 0.0;
        for (int it = 0; it < 200; ++it) {
            const int dim = gen::uniform_int(rng, 2, 5);
            HalfSpace h(gen::unit_vector(rng, dim), gen::uniform(rng, -1.0, 1.0));
            const Vec w = add(scaled(h.normal(), h.offset() + 1.0), Vec(dim, 0.0));
            const Polytope D({h}, w);
            Vec x = scaled(gen::unit_vector(rng, dim), gen::uniform(rng, 0.0, 5.0));
            worst = std::max(worst, std::abs(project_onto_polytope(x, D).distance -
                                             h.exterior_distance(x)));
        }
        suite.check("geometry/halfspace_distance_agreement", worst <= 1e-10,
                    "max deviation " + detail::fmt(worst), "max deviation " + detail::fmt(worst));
    }

    {  // max_i d(x, H_i) <= d(x, D) for arbitrary sample points.
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 300 && ok; ++it) {
            const int dim = gen::uniform_int(rng, 2, 5);
            const Polytope D = gen::random_polytope(rng, dim, gen::uniform_int(rng, 3, 8));
            Vec x = scaled(gen::unit_vector(rng, dim), gen::uniform(rng, 0.0, 6.0));
            const double mid = max_facet_distance(x, D);
            const double up = project_onto_polytope(x, D).distance;
            if (mid > up + 1e-9) {
                ok = false;
                witness = "mid=" + detail::fmt(mid) + " distance=" + detail::fmt(up);
            }
        }
        suite.check("geometry/facet_distance_bounded_by_projection", ok, witness);
    }

    return std::move(suite).results();
}

// ===========================================================================
//  series suite
// ===========================================================================

inline std::vector<PropertyResult> verify_series(std::uint64_t seed, int oracle_instances = 200,
                                                 int assoc_instances = 100) {
    std::mt19937_64 rng(seed);
    detail::Suite suite;

    {  // Horner-path composition equals the literal partition enumeration.
        double worst = 0.0;
        const int half = oracle_instances / 2;
        for (int it = 0; it < half; ++it) {
            const int k = gen::uniform_int(rng, 1, 3);
            const int m = gen::uniform_int(rng, 1, 3);
            const int n = gen::uniform_int(rng, 1, 2);
            const int order = gen::uniform_int(rng, 2, 6);
            const auto f = gen::random_series(rng, m, n, order, 5, false, false);
            const auto g = gen::random_series(rng, k, m, order, 5, true, false);
            const auto got = compose(f, g);
            const auto want = oracle::compose_literal(f, g);
            const auto diff = subtract(got, want);
            worst = std::max(worst, diff.max_abs_coeff());
        }
        for (int it = 0; it < oracle_instances - half; ++it) {
            const int m = gen::uniform_int(rng, 1, 2);
            const int n = gen::uniform_int(rng, 1, 3);
            const int order = gen::uniform_int(rng, 2, 5);
            const Vec rates = gen::random_rates(rng, m);
            const auto f = gen::random_series(rng, n, gen::uniform_int(rng, 1, 2), order, 5, false,
                                              false);
            const auto x = gen::random_lambda_series(rng, rates, n, order, 4, 2, false);
            const auto got = compose_with_analytic(f, x);
            const auto want = oracle::compose_literal(f, x);
            worst = std::max(worst, subtract(got, want).max_abs_coeff());
        }
        suite.check("series/composition_matches_literal_oracle", worst <= 1e-12,
                    "max coefficient deviation " + detail::fmt(worst),
                    "max coefficient deviation " + detail::fmt(worst));
    }

    {  // Associativity, coefficient-exact on small-integer instances.
        double worst = 0.0;
        const int half = assoc_instances / 2;
        for (int it = 0; it < half; ++it) {
            const int order = gen::uniform_int(rng, 2, 4);
            const int d1 = gen::uniform_int(rng, 1, 2), d2 = gen::uniform_int(rng, 1, 2),
                      d3 = gen::uniform_int(rng, 1, 2), d4 = gen::uniform_int(rng, 1, 2);
            const auto f = gen::random_series(rng, d2, d1, order, 4, false, true);
            const auto g = gen::random_series(rng, d3, d2, order, 4, true, true);
            const auto h = gen::random_series(rng, d4, d3, order, 4, true, true);
            const auto left = compose(f, compose(g, h));
            const auto right = compose(compose(f, g), h);
            worst = std::max(worst, subtract(left, right).max_abs_coeff());
        }
        for (int it = 0; it < assoc_instances - half; ++it) {
            const int order = gen::uniform_int(rng, 2, 4);
            const int m = gen::uniform_int(rng, 1, 2);
            const int n = gen::uniform_int(rng, 1, 2);
            const int p = gen::uniform_int(rng, 1, 2);
            const Vec rates = gen::random_rates(rng, m);
            const auto f = gen::random_series(rng, n, p, order, 4, false, true);
            const auto g = gen::random_series(rng, gen::uniform_int(rng, 1, 2), n, order, 4, true,
                                              true);
            // g's variable count must match x's output dimension:
            const auto x = gen::random_lambda_series(rng, rates, g.in_dim(), order, 3, 1, true);
            const auto left = compose_with_analytic(f, compose_with_analytic(g, x));
            const auto right = compose_with_analytic(compose(f, g), x);
            worst = std::max(worst, subtract(left, right).max_abs_coeff());
        }
        suite.check("series/composition_associativity_exact", worst == 0.0,
                    "max coefficient deviation " + detail::fmt(worst),
                    std::to_string(assoc_instances) + " triples, bit-exact");
    }

    {  // Composition-evaluation consistency at small arguments.
        double worst = 0.0;
        for (int it = 0; it < 100; ++it) {
            const int k = gen::uniform_int(rng, 1, 3);
            const int m = gen::uniform_int(rng, 1, 3);
            const int order = gen::uniform_int(rng, 3, 8);
            const auto f = gen::random_series(rng, m, 1, order, 5, false, false);
            const auto g = gen::random_series(rng, k, m, order, 5, true, false);
            const auto fg = compose(f, g);
            Vec x(k);
            for (auto& v : x) v = gen::uniform(rng, -0.02, 0.02);
            const double a = fg.evaluate(x)[0];
            const double b = f.evaluate(g.evaluate(x))[0];
            worst = std::max(worst, std::abs(a - b));
        }
        suite.check("series/composition_evaluation_consistency", worst <= 1e-7,
                    "max deviation " + detail::fmt(worst), "max deviation " + detail::fmt(worst));
    }

    {  // Majorant: coefficients are the componentwise absolute values.
        bool ok = true;
        for (int it = 0; it < 100 && ok; ++it) {
            const auto f = gen::random_series(rng, gen::uniform_int(rng, 1, 3),
                                              gen::uniform_int(rng, 1, 3),
                                              gen::uniform_int(rng, 1, 6), 6, false, false);
            const auto mf = f.majorant();
            for (const auto& [I, b] : f.terms()) {
                const Vec a = mf.coeff(I);
                for (std::size_t i = 0; i < b.size(); ++i)
                    if (a[i] != std::abs(b[i]) || a[i] < 0.0) ok = false;
            }
        }
        suite.check("series/majorant_absolute_values", ok, "coefficient mismatch");
    }

    {  // Formal derivative vs. central differences (Richardson ratio ~ 100).
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 50 && ok; ++it) {
            const int m = gen::uniform_int(rng, 1, 2);
            const Vec rates = gen::random_rates(rng, m);
            const auto x = gen::random_lambda_series(rng, rates, gen::uniform_int(rng, 1, 2),
                                                     gen::uniform_int(rng, 1, 4), 4, 2, false);
            const auto dx = x.derivative();
            const double t0 = 1.0;
            auto fd_err = [&](double h) {
                const Vec plus = x.evaluate(t0 + h), minus = x.evaluate(t0 - h);
                double worst = 0.0;
                const Vec exact = dx.evaluate(t0);
                for (std::size_t i = 0; i < plus.size(); ++i)
                    worst = std::max(worst,
                                     std::abs((plus[i] - minus[i]) / (2.0 * h) - exact[i]));
                return worst;
            };
            const double e3 = fd_err(1e-3), e4 = fd_err(1e-4);
            if (e4 < 1e-11) continue;  // third derivative too small to resolve
            const double ratio = e3 / e4;
            if (!(ratio > 50.0 && ratio < 200.0)) {
                ok = false;
                witness = "Richardson ratio " + detail::fmt(ratio);
            }
        }
        suite.check("series/formal_derivative_richardson", ok, witness);
    }

    {  // Composition-evaluation consistency for exponential series at large t.
        double worst = 0.0;
        for (int it = 0; it < 50; ++it) {
            const int m = gen::uniform_int(rng, 1, 2);
            const int n = gen::uniform_int(rng, 1, 2);
            const Vec rates = gen::random_rates(rng, m, -2.0, -1.0);
            const auto x = gen::random_lambda_series(rng, rates, n, 4, 4, 2, false);
            const auto f = gen::random_series(rng, n, 1, 4, 5, false, false);
            const auto fx = compose_with_analytic(f, x);
            for (double t : {8.0, 10.0, 12.0}) {
                const double a = fx.evaluate(t)[0];
                const double b = f.evaluate(x.evaluate(t))[0];
                worst = std::max(worst, std::abs(a - b));
            }
        }
        suite.check("series/lambda_composition_evaluation", worst <= 1e-8,
                    "max deviation " + detail::fmt(worst), "max deviation " + detail::fmt(worst));
    }

    {  // Star properties: subadditive, absolutely homogeneous, submultiplicative.
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 200 && ok; ++it) {
            const int n = gen::uniform_int(rng, 1, 3);
            const auto P = gen::random_poly(rng, n, gen::uniform_int(rng, 0, 4));
            const auto Q = gen::random_poly(rng, n, gen::uniform_int(rng, 0, 4));
            const double t = gen::uniform(rng, 0.0, 3.0);
            const double a = gen::uniform(rng, -2.0, 2.0);
            const double slack = 1e-12 * (1.0 + P.star_eval(t) + Q.star_eval(t));
            if (P.plus(Q).star_eval(t) > P.star_eval(t) + Q.star_eval(t) + slack) {
                ok = false;
                witness = "subadditivity";
            }
            if (std::abs(P.scaled_by(a).star_eval(t) - std::abs(a) * P.star_eval(t)) >
                1e-12 * (1.0 + std::abs(a) * P.star_eval(t))) {
                ok = false;
                witness = "homogeneity";
            }
            const auto Ps = P.component(0);
            const auto Qs = Q.component(0);
            if (poly_mul(Ps, Qs).star_eval(t) >
                Ps.star_eval(t) * Qs.star_eval(t) + slack * (1.0 + Qs.star_eval(t))) {
                ok = false;
                witness = "submultiplicativity";
            }
        }
        suite.check("series/star_inequalities", ok, witness);
    }

    {  // Dominant term is untouched by strictly slower terms.
        bool ok = true;
        for (int it = 0; it < 100 && ok; ++it) {
            const int m = gen::uniform_int(rng, 1, 2);
            const Vec rates = gen::random_rates(rng, m, -2.0, -1.0);
            const int order = 6;
            auto s = gen::random_lambda_series(rng, rates, 1, 2, 3, 2, false);
            LambdaSeries padded(rates, 1, order);
            for (const auto& [J, P] : s.terms()) padded.set_term(J, P);
            const auto before = dominant_term(padded);
            if (!before) continue;
            auto slow = multi_indices_of_weight(m, order);
            padded.set_term(slow.front(), Poly::constant({gen::uniform(rng, -2.0, 2.0)}));
            const auto after = dominant_term(padded);
            if (!after || after->a != before->a || after->q != before->q || after->r != before->r)
                ok = false;
        }
        suite.check("series/dominant_term_ignores_slower_terms", ok, "dominant term changed");
    }

    return std::move(suite).results();
}

// ===========================================================================
//  solver suite
// ===========================================================================

inline std::vector<PropertyResult> verify_solver(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    detail::Suite suite;

    {  // (d/dt - u) o (d/dt - u)^{-1} = id on polynomials. The residual is
        // measured relative to the resolvent's own coefficients: for |u| < 1
        // at high degree those are legitimately huge (u^{-k} k! growth), so
        // the round trip cancels to machine precision only on that scale.
        double worst = 0.0;
        for (double u : {-3.0, -1.0, 0.0, 0.5, 2.0, 100.0}) {
            for (int it = 0; it < 40; ++it) {
                const auto Q = gen::random_poly(rng, gen::uniform_int(rng, 1, 3),
                                                gen::uniform_int(rng, 0, 10));
                const auto P = resolvent_poly(u, Q);
                const auto back = P.derivative().minus(P.scaled_by(u));
                const double scale = std::max(1.0, P.max_abs_coeff());
                worst = std::max(worst, back.minus(Q).max_abs_coeff() / scale);
            }
        }
        suite.check("solver/resolvent_identity", worst <= 1e-12,
                    "max relative coefficient deviation " + detail::fmt(worst),
                    "max relative coefficient deviation " + detail::fmt(worst));
    }

    {  // Formal residual of constructed solutions.
        double worst = 0.0;
        for (int it = 0; it < 30; ++it) {
            const int m = gen::uniform_int(rng, 1, 3);
            const int order = gen::uniform_int(rng, 4, 8);
            auto [V, spectrum] = gen::random_stable_field(rng, m, order, 3);
            Vec c(m);
            for (auto& v : c) v = gen::uniform(rng, -1.0, 1.0);
            const auto sol = construct_formal_solution(V, spectrum, c, order);
            worst = std::max(worst, check_formal_residual(sol));
        }
        suite.check("solver/formal_residual", worst <= 1e-9, "max residual " + detail::fmt(worst),
                    "max residual " + detail::fmt(worst));
    }

    {  // Bernoulli closed form: series sums to e^{-t}/(1+e^{-t}) for c = 1.
        const auto sol = construct_formal_solution(demos::bernoulli_field(12),
                                                   StableSpectrum({-1.0}), {1.0}, 12);
        double worst = 0.0;
        for (double t = 5.0; t <= 20.0; t += 0.5)
            worst = std::max(worst, std::abs(sol.series.evaluate(t)[0] -
                                             demos::bernoulli_exact(1.0, t)));
        suite.check("solver/bernoulli_closed_form", worst <= 1e-8,
                    "max deviation " + detail::fmt(worst), "max deviation " + detail::fmt(worst));
    }

    {  // Degree growth: deg(P_J) <= p |J| with p read off at |J| <= 2.
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 20 && ok; ++it) {
            const int m = gen::uniform_int(rng, 1, 3);
            const int order = gen::uniform_int(rng, 4, 8);
            auto [V, spectrum] = gen::random_stable_field(rng, m, order, 3);
            Vec c(m);
            for (auto& v : c) v = gen::uniform(rng, -1.0, 1.0);
            const auto sol = construct_formal_solution(V, spectrum, c, order);
            int p = 0;
            for (const auto& [J, P] : sol.series.terms())
                if (J.weight() <= 2) p = std::max(p, P.degree());
            for (const auto& [J, P] : sol.series.terms()) {
                bool resonant = false;
                for (const auto& [RJ, ri] : sol.resonance_log)
                    if (RJ == J) resonant = true;
                if (resonant) continue;
                if (P.degree() > p * J.weight()) {
                    ok = false;
                    witness = "deg " + std::to_string(P.degree()) + " at |J| = " +
                              std::to_string(J.weight()) + " with p = " + std::to_string(p);
                }
            }
        }
        suite.check("solver/degree_bound", ok, witness);
    }

    {  // Taylor solutions match a tight reference integration near 0.
        bool ok = true;
        std::string witness;
        OdeOptions tight;
        tight.rtol = 1e-13;
        tight.atol = 1e-15;
        tight.h_init = 1e-4;
        for (int K : {3, 5}) {
            for (int it = 0; it < 10; ++it) {
                const int m = gen::uniform_int(rng, 1, 2);
                auto V = gen::random_series(rng, m, m, 3, 4, false, false);
                Vec x0(m);
                for (auto& v : x0) v = gen::uniform(rng, -0.5, 0.5);
                const auto y = taylor_solution(V, x0, K);
                auto rhs = [&V](double, const Vec& x) { return V.evaluate(x); };
                const Vec ref = integrate(rhs, x0, 0.0, 0.01, tight);
                const double err = norm_inf(sub(y.evaluate(0.01), ref));
                const double budget = 10.0 * std::pow(0.01, K + 1);
                if (err > budget) {
                    ok = false;
                    witness = "error " + detail::fmt(err) + " budget " + detail::fmt(budget);
                }
            }
        }
        suite.check("solver/taylor_matches_integrator", ok, witness);
    }

    {  // Majorant recursion vs. the implicit-series Newton oracle; growth fit.
        double worst = 0.0;
        double rhat_max = 0.0;
        for (double M : {0.5, 1.0, 2.0}) {
            for (int m : {1, 2}) {
                for (int n : {1, 2}) {
                    const auto tab = majorant_table(M, n, 5, m);
                    const auto want = oracle::majorant_series_newton(M, n, m, 5);
                    for (const auto& [J, a] : tab.values) {
                        const double b = want.at(J.exponents());
                        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
                    }
                    rhat_max = std::max(rhat_max, fit_growth_rate(tab));
                }
            }
        }
        suite.check("solver/majorant_recursion_vs_implicit_series", worst <= 1e-10,
                    "max relative deviation " + detail::fmt(worst),
                    "max relative deviation " + detail::fmt(worst) + ", max fitted R " +
                        detail::fmt(rhat_max));
    }

    {  // Resolvent domination past t0 = 2 deg(Q)/u.
        int violations = 0;
        for (int it = 0; it < 200; ++it) {
            const double u = gen::uniform(rng, 2.0, 100.0);
            const auto Q = gen::random_poly(rng, 1, gen::uniform_int(rng, 0, 8));
            if (Q.is_zero()) continue;
            const auto P = resolvent_poly(u, Q);
            const double t0 = check_domination(u, Q);
            for (int j = 0; j <= 30; ++j) {
                const double t = t0 + j * (10.0 / 30.0);
                if (P.star_eval(t) > Q.star_eval(t) * (1.0 + 1e-12)) ++violations;
            }
        }
        suite.check("solver/resolvent_domination", violations == 0,
                    std::to_string(violations) + " grid violations");
    }

    {  // Perturbation comparison on the regression fields.
        bool ok = true;
        std::string witness;
        {
            const auto rep = compare_perturbed(demos::bernoulli_field(10), StableSpectrum({-1.0}),
                                               {1.0}, {0.5}, 10, -0.5);
            if (!(rep.component == 0 && std::abs(rep.dominant.a - 0.5) <= 1e-9 &&
                  rep.dominant.q == 0 && std::abs(rep.dominant.r + 1.0) <= 1e-12 &&
                  rep.window_ok && rep.equality_residual <= 1e-9)) {
                ok = false;
                witness = "bernoulli: a=" + detail::fmt(rep.dominant.a);
            }
        }
        {
            PowerSeries V(2, 2, 6);
            V.set_coeff(MultiIndex::unit(2, 0), {-1.0, 0.0});
            V.set_coeff(MultiIndex::unit(2, 1), {0.0, -2.0});
            const auto rep = compare_perturbed(V, StableSpectrum({-1.0, -2.0}), {1.0, 2.0},
                                               {0.0, 1.0}, 6, -0.5);
            if (!(rep.component == 1 && std::abs(rep.dominant.a - 1.0) <= 1e-12 &&
                  rep.dominant.q == 0 && std::abs(rep.dominant.r + 2.0) <= 1e-12 && rep.window_ok))
                ok = false;
        }
        for (int it = 0; it < 10 && ok; ++it) {
            const int m = gen::uniform_int(rng, 1, 3);
            auto [V, spectrum] = gen::random_stable_field(rng, m, 6, 2);
            Vec c(m), C(m, 0.0);
            for (auto& v : c) v = gen::uniform(rng, -1.0, 1.0);
            const int pi = gen::uniform_int(rng, 0, m - 1);
            C[pi] = gen::uniform(rng, 0.2, 1.0);
            const double lambda0 = spectrum.max_rate() / 2.0;
            const auto rep = compare_perturbed(V, spectrum, c, C, 6, lambda0);
            if (!(rep.component == pi && std::abs(rep.dominant.a - C[pi]) <= 1e-9 &&
                  rep.dominant.q == 0 &&
                  std::abs(rep.dominant.r - spectrum.rates()[pi]) <= 1e-9 && rep.window_ok)) {
                ok = false;
                witness = "random instance " + std::to_string(it);
            }
        }
        suite.check("solver/perturbation_leading_difference", ok, witness);
    }

    return std::move(suite).results();
}

// ===========================================================================
//  tracer suite
// ===========================================================================

inline std::vector<PropertyResult> verify_tracer(std::uint64_t seed) {
    (void)seed;  // regression systems are deterministic
    detail::Suite suite;

    const auto onedim = demos::onedim_drift();
    const auto dec = demos::decoupled2d();
    const auto split = demos::bernoulli_split();

    auto run_counts = [&](const PiecewiseField& pf, const Vec& x0, double t_end,
                          const TraceOptions& opt) { return trace_flow(pf, x0, t_end, opt); };

    {  // Regression switch counts and times, stable under halved tolerances.
        bool ok = true;
        std::string witness;
        TraceOptions opt;
        TraceOptions tighter = opt;
        tighter.rtol /= 2.0;
        tighter.boundary_tol /= 2.0;
        tighter.time_tol /= 2.0;

        struct Case {
            const PiecewiseField* pf;
            Vec x0;
            double t_end;
            double t_switch;
            const char* name;
        };
        const std::vector<Case> cases = {
            {&onedim, {1.0}, 2.0, 1.0, "onedim"},
            {&dec, {1.0, 2.0}, 10.0, std::log(2.0), "decoupled2d"},
            {&split, {0.9}, 20.0, std::log(21.0), "bernoulli_split"},
        };
        for (const auto& cs : cases) {
            const auto tr = run_counts(*cs.pf, cs.x0, cs.t_end, opt);
            const auto tr2 = run_counts(*cs.pf, cs.x0, cs.t_end, tighter);
            if (tr.switches.size() != 1 || tr2.switches.size() != 1) {
                ok = false;
                witness = std::string(cs.name) + ": switch count " +
                          std::to_string(tr.switches.size());
                continue;
            }
            if (std::abs(tr.switches[0].t - cs.t_switch) > 1e-6 ||
                std::abs(tr2.switches[0].t - cs.t_switch) > 1e-6 ||
                std::abs(tr.switches[0].t - tr2.switches[0].t) > 1e-8) {
                ok = false;
                witness = std::string(cs.name) + ": switch time " + detail::fmt(tr.switches[0].t);
            }
        }
        suite.check("tracer/regression_switch_counts", ok, witness);
    }

    {  // Trace capture cell agrees with the asymptotic verdict.
        bool ok = true;
        std::string witness;
        struct Case {
            const PiecewiseField* pf;
            Vec x0;
            const char* name;
        };
        for (const auto& cs : std::vector<Case>{{&dec, {1.0, 2.0}, "decoupled2d"},
                                                {&split, {0.9}, "bernoulli_split"}}) {
            const auto& pf = *cs.pf;
            TraceOptions opt;
            const auto tr = trace_flow(pf, cs.x0, 50.0, opt);
            if (!tr.captured) {
                ok = false;
                witness = std::string(cs.name) + ": no capture";
                continue;
            }
            const int final_cell = tr.cells.back();
            const double t_c = tr.times.back();
            const Vec state = sub(tr.states.back(), *pf.equilibrium_point);
            const PowerSeries centered = shift(pf.fields[final_cell], *pf.equilibrium_point);
            const Vec c = fit_parameters(centered, *pf.equilibrium_spectrum, state, t_c, 12);
            const auto sol = construct_formal_solution(centered, *pf.equilibrium_spectrum, c, 12);
            const auto verdict = asymptotic_membership(pf, sol, final_cell);
            if (!verdict.inside()) {
                ok = false;
                witness = std::string(cs.name) + ": verdict not inside";
            }
            if (std::string(cs.name) == "decoupled2d") {
                const auto other = asymptotic_membership(pf, sol, 0);
                if (other.kind != MembershipVerdict::Kind::EventuallyOutside) {
                    ok = false;
                    witness = "decoupled2d: complementary cell not outside";
                }
            }
        }
        suite.check("tracer/asymptotic_verdict_matches_trace", ok, witness);
    }

    {  // Tangency order and continuation error exponent.
        const auto tang = demos::tangency2();
        const auto exit = local_exit_order(tang, 1, {0.0, 0.0}, 8);
        bool ok = exit.exits && exit.k == 2 && exit.a > 0.5;
        std::string witness = ok ? "" : "exit order " + std::to_string(exit.k);

        const Poly y_low = taylor_solution(tang.fields[1], {0.0, 0.0}, 10);
        TraceOptions opt;
        opt.rtol = 1e-12;
        opt.atol = 1e-14;
        std::vector<double> logs_t, logs_e;
        for (double t = 0.03; t <= 0.1001; t += 0.01) {
            const auto tr = trace_flow(tang, {0.0, 0.0}, t, opt);
            const double err = norm_inf(sub(tr.states.back(), y_low.evaluate(t)));
            if (err > 0.0) {
                logs_t.push_back(std::log(t));
                logs_e.push_back(std::log(err));
            }
        }
        double slope = 0.0;
        if (logs_t.size() >= 2) {
            double mt = 0, me = 0;
            for (std::size_t i = 0; i < logs_t.size(); ++i) {
                mt += logs_t[i];
                me += logs_e[i];
            }
            mt /= logs_t.size();
            me /= logs_e.size();
            double num = 0, den = 0;
            for (std::size_t i = 0; i < logs_t.size(); ++i) {
                num += (logs_t[i] - mt) * (logs_e[i] - me);
                den += (logs_t[i] - mt) * (logs_t[i] - mt);
            }
            slope = num / den;
        }
        if (!(slope >= 2.9)) {
            ok = false;
            witness += " continuation exponent " + detail::fmt(slope);
        }
        suite.check("tracer/tangency_order_and_continuation", ok, witness,
                    "exit order 2, fitted exponent " + detail::fmt(slope));
    }

    {  // Single analytic cell agrees with the closed form at t_end.
        const auto single = demos::bernoulli_single_cell();
        TraceOptions opt;
        opt.capture_radius = 0.0;
        const auto tr = trace_flow(single, {0.5}, 10.0, opt);
        const double err = std::abs(tr.states.back()[0] - demos::bernoulli_exact(1.0, 10.0));
        suite.check("tracer/single_cell_reference_accuracy", err <= 1e-8,
                    "deviation " + detail::fmt(err), "deviation " + detail::fmt(err));
    }

    {  // Spiral stress: switch counts grow without bound; the guard trips.
        const auto sp = demos::spiral();
        TraceOptions opt;
        opt.switch_cap = 1000000;
        std::vector<std::size_t> counts;
        for (double t_end : {30.0, 60.0, 90.0})
            counts.push_back(trace_flow(sp, {1.5, 0.1}, t_end, opt).switches.size());
        bool ok = counts[0] < counts[1] && counts[1] < counts[2] && counts[0] > 0;

        bool guarded = false;
        std::size_t partial_switches = 0;
        TraceOptions capped;
        capped.switch_cap = 20;
        try {
            trace_flow(sp, {1.5, 0.1}, 90.0, capped);
        } catch (const ChatteringGuardError& e) {
            guarded = true;
            partial_switches = e.partial.switches.size();
        }
        ok = ok && guarded && partial_switches == 21;
        suite.check("tracer/spiral_negative_control", ok,
                    "counts " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                        std::to_string(counts[2]) + ", guarded=" + std::to_string(guarded),
                    "counts " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                        std::to_string(counts[2]) + ", guard trips at cap 20");
    }

    {  // Fields agree across shared facets.
        const auto r1 = validate_field_consistency(dec, 40, seed);
        const auto r2 = validate_field_consistency(demos::tangency2(), 40, seed + 1);
        suite.check("tracer/field_consistency_on_facets", r1.passed && r2.passed,
                    "max mismatch " + detail::fmt(std::max(r1.max_mismatch, r2.max_mismatch)),
                    "max mismatch " + detail::fmt(std::max(r1.max_mismatch, r2.max_mismatch)));
    }

    return std::move(suite).results();
}

// ===========================================================================
//  yamabe suite
// ===========================================================================

inline std::vector<PropertyResult> verify_yamabe(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    detail::Suite suite;
    const double pi = std::numbers::pi;

    {  // Curvature regressions and the Gauss-Bonnet identity.
        bool ok = true;
        std::string witness;
        {
            ConformalState tetra(demos::tetrahedron(), Vec(4, 0.0));
            for (double k : tetra.curvature())
                if (std::abs(k - pi) > 1e-12) ok = false;
        }
        {
            ConformalState octa(demos::octahedron(), Vec(6, 0.0));
            for (double k : octa.curvature())
                if (std::abs(k - 2.0 * pi / 3.0) > 1e-12) ok = false;
        }
        {
            ConformalState torus(demos::flat_torus8(), Vec(8, 0.0));
            for (double k : torus.curvature())
                if (std::abs(k) > 1e-12) ok = false;
        }
        for (int it = 0; it < 20 && ok; ++it) {
            ConformalState s(demos::octahedron(), [&] {
                Vec u(6);
                for (auto& v : u) v = gen::uniform(rng, -0.2, 0.2);
                return u;
            }());
            double total = 0.0;
            for (double k : s.curvature()) total += k;
            if (std::abs(total - 2.0 * pi * s.mesh().euler_characteristic()) > 1e-9) {
                ok = false;
                witness = "Gauss-Bonnet residual " + detail::fmt(total - 4.0 * pi);
            }
        }
        suite.check("yamabe/curvature_regressions_gauss_bonnet", ok, witness);
    }

    {  // One bad hinge flips exactly once and conserves total curvature.
        ConformalState s(demos::tetrahedron_with_bad_hinge(), Vec(4, 0.0));
        double before = 0.0;
        for (double k : s.curvature()) before += k;
        const int flips = s.flip_to_delaunay(0.0);
        double after = 0.0;
        for (double k : s.curvature()) after += k;
        const bool ok = flips == 1 && s.delaunay_violations() == 0 &&
                        std::abs(before - 4.0 * pi) <= 1e-9 && std::abs(after - 4.0 * pi) <= 1e-9;
        suite.check("yamabe/single_flip_conserves_curvature", ok,
                    "flips=" + std::to_string(flips) + " GB residual " +
                        detail::fmt(after - 4.0 * pi),
                    "1 flip, Gauss-Bonnet residual " + detail::fmt(after - 4.0 * pi));
    }

    {  // Flow conservation, descent, convergence, flip stability.
        bool ok = true;
        std::string witness;
        struct Case {
            TriangulatedSurface mesh;
            Vec u0;
            const char* name;
        };
        std::vector<Case> cases;
        cases.push_back({demos::tetrahedron(), {0.3, -0.3, 0.0, 0.0}, "tetrahedron"});
        cases.push_back({demos::octahedron(), {0.2, -0.1, 0.05, -0.15, 0.1, -0.1}, "octahedron"});
        cases.push_back({demos::flat_torus8(),
                         {0.15, -0.1, 0.05, -0.05, 0.1, -0.15, 0.08, -0.08},
                         "flat_torus8"});
        cases.push_back({demos::tetrahedron_with_bad_hinge(), {0.1, -0.1, 0.0, 0.0},
                         "bad_hinge_tetrahedron"});

        for (const auto& cs : cases) {
            OdeOptions opt;
            const auto run = run_flow(ConformalState(cs.mesh, cs.u0), 50.0, opt);
            OdeOptions coarse;
            coarse.rtol = 1e-8;
            coarse.atol = 1e-10;
            const auto run2 = run_flow(ConformalState(cs.mesh, cs.u0), 50.0, coarse);

            double sum0 = 0.0;
            for (double v : cs.u0) sum0 += v;
            double worst_sum = 0.0, worst_gb = 0.0;
            double prev_sq = std::numeric_limits<double>::infinity();
            bool descent = true;
            for (const auto& sample : run.samples) {
                double su = 0.0;
                for (double v : sample.u) su += v;
                worst_sum = std::max(worst_sum, std::abs(su - sum0));
                if (sample.deviation_sq > prev_sq + 1e-12) descent = false;
                prev_sq = sample.deviation_sq;
            }
            {
                ConformalState chk(run.state);
                double total = 0.0;
                for (double k : chk.curvature()) total += k;
                worst_gb = std::abs(total - 2.0 * pi * chk.mesh().euler_characteristic());
            }
            const double final_dev = run.state.deviation();
            const bool flips_match = run.total_flips == run2.total_flips;
            double last_flip = 0.0;
            for (const auto& f : run.state.flip_log()) last_flip = std::max(last_flip, f.t);

            if (!(worst_sum <= 1e-9 && worst_gb <= 1e-9 && final_dev <= 1e-6 && flips_match &&
                  descent && last_flip < 45.0)) {
                ok = false;
                witness = std::string(cs.name) + ": sum_drift=" + detail::fmt(worst_sum) +
                          " gb=" + detail::fmt(worst_gb) + " final_dev=" + detail::fmt(final_dev) +
                          " flips=" + std::to_string(run.total_flips) + "/" +
                          std::to_string(run2.total_flips) + " descent=" + std::to_string(descent);
            }
        }
        suite.check("yamabe/flow_conservation_descent_flips", ok, witness);
    }

    {  // Segments between exp-coordinate images stay in the triangulation cell.
        bool ok = true;
        std::string witness;
        for (int it = 0; it < 20 && ok; ++it) {
            const auto mesh = demos::octahedron();
            auto draw = [&] {
                Vec u(6);
                double mean = 0.0;
                for (auto& v : u) {
                    v = gen::uniform(rng, -0.1, 0.1);
                    mean += v;
                }
                for (auto& v : u) v -= mean / 6.0;
                return u;
            };
            const Vec ua = draw(), ub = draw();
            if (ConformalState(mesh, ua).delaunay_violations() > 0 ||
                ConformalState(mesh, ub).delaunay_violations() > 0)
                continue;  // want both endpoints in the same cell
            const Vec wa = exp_coordinates(ua), wb = exp_coordinates(ub);
            for (int s = 1; s < 20 && ok; ++s) {
                const double lam = s / 20.0;
                Vec w(6), u(6);
                for (int i = 0; i < 6; ++i) {
                    w[i] = (1.0 - lam) * wa[i] + lam * wb[i];
                    u[i] = -0.5 * std::log(w[i]);
                }
                if (ConformalState(mesh, u).delaunay_violations() > 0) {
                    ok = false;
                    witness = "violation at s=" + std::to_string(s);
                }
            }
        }
        suite.check("yamabe/exp_coordinate_segment_convexity", ok, witness);
    }

    return std::move(suite).results();
}

// ===========================================================================
//  aggregation
// ===========================================================================

inline std::vector<PropertyResult> verify_suite(const std::string& name, std::uint64_t seed) {
    if (name == "geometry") return verify_geometry(seed);
    if (name == "series") return verify_series(seed);
    if (name == "solver") return verify_solver(seed);
    if (name == "tracer") return verify_tracer(seed);
    if (name == "yamabe") return verify_yamabe(seed);
    if (name == "all") {
        std::vector<PropertyResult> all;
        for (const char* sub : {"geometry", "series", "solver", "tracer", "yamabe"}) {
            auto part = verify_suite(sub, seed);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    throw ConfigError("unknown suite: " + name +
                      " (expected geometry|series|solver|tracer|yamabe|all)");
}

}  // namespace polyflow::verify
