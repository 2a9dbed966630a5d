#pragma once

// Construction of formal exponential-polynomial solutions x(t;c) to x' = V(x)
// near a stable equilibrium with diagonal linear part diag(lambda), via the
// resolvent (d/dt - u)^{-1} on polynomials:
//
//   P_0 = 0,   P_{e_i} = c_i e_i,
//   P_J = (d/dt - (Lambda - lambda.J))^{-1} Q_J          for |J| >= 2,
//
// where Q_J collects the contributions of V's monomials of weight >= 2 from
// lower levels. Also: local Taylor solutions in t, domination thresholds for
// the resolvent, the scalar majorant recursion a_J with its growth-rate fit,
// and the parameter-perturbation comparison.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/lambda_series.hpp"
#include "polyflow/power_series.hpp"

namespace polyflow {

/// Strictly negative rates sorted in descending order (lambda_1 >= ... >= lambda_m).
class StableSpectrum {
public:
    explicit StableSpectrum(Vec rates) : rates_(std::move(rates)) {
        if (rates_.empty()) throw InvalidSpectrum("StableSpectrum: empty");
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            if (!(rates_[i] < 0.0)) throw InvalidSpectrum("StableSpectrum: rates must be negative");
            if (i > 0 && rates_[i] > rates_[i - 1])
                throw InvalidSpectrum("StableSpectrum: rates must be sorted descending");
        }
    }

    const Vec& rates() const { return rates_; }
    int dim() const { return static_cast<int>(rates_.size()); }
    double max_rate() const { return rates_.front(); }

private:
    Vec rates_;
};

/// Right inverse of (d/dt - u) on polynomials:
///   u != 0:  -(1/u)(1 + u^{-1} d/dt + u^{-2} d^2/dt^2 + ...) Q   (finite sum)
///   u == 0:  antiderivative of Q with zero constant term.
/// Applying (d/dt - u) to the result reproduces Q exactly.
inline Poly resolvent_poly(double u, const Poly& Q) {
    if (u == 0.0) return Q.antiderivative();
    Poly result(Q.dim());
    Poly deriv = Q;
    double factor = -1.0 / u;
    while (!deriv.is_zero()) {
        result = result.plus(deriv.scaled_by(factor));
        deriv = deriv.derivative();
        factor /= u;
    }
    return result;
}

/// Threshold t0 = 2 deg(Q) / u past which the resolvent is dominated:
/// star_eval(resolvent_poly(u,Q), t) <= star_eval(Q, t) for all t >= t0.
/// Requires u >= 2.
inline double check_domination(double u, const Poly& Q) {
    if (!(u >= 2.0)) throw PreconditionU("check_domination: requires u >= 2");
    return 2.0 * Q.degree() / u;
}

struct FormalSolution {
    LambdaSeries series;  // centered; represents x(t;c)
    Vec params;           // c
    PowerSeries field;    // the V the series solves
    StableSpectrum spectrum;
    /// (J, i) pairs where lambda_i - lambda.J vanished and the integration
    /// branch of the resolvent was taken.
    std::vector<std::pair<MultiIndex, int>> resonance_log;
    std::vector<std::string> warnings;  // near-resonance notes
};

namespace detail {

inline void require_diagonal_linear_part(const PowerSeries& V, const StableSpectrum& spectrum,
                                         double tol = 1e-12) {
    const int m = V.in_dim();
    if (V.out_dim() != m) throw DimensionMismatch("field must map R^m to R^m");
    if (spectrum.dim() != m) throw DimensionMismatch("spectrum dimension mismatch");
    if (!V.has_zero_constant_term()) throw NotCentered("field must vanish at the origin");
    for (int j = 0; j < m; ++j) {
        Vec col = V.coeff(MultiIndex::unit(m, j));
        for (int i = 0; i < m; ++i) {
            const double want = (i == j) ? spectrum.rates()[i] : 0.0;
            if (std::abs(col[i] - want) > tol)
                throw NotDiagonalLinearPart("linear part deviates from diag(rates) at entry (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

}  // namespace detail

/// Builds the formal solution with parameters c, filling terms by increasing
/// |J| from 2 to order. The field's linear part must equal diag(spectrum)
/// exactly (pre-diagonalized input).
inline FormalSolution construct_formal_solution(const PowerSeries& V,
                                                const StableSpectrum& spectrum, const Vec& c,
                                                int order) {
    detail::require_diagonal_linear_part(V, spectrum);
    const int m = V.in_dim();
    if (static_cast<int>(c.size()) != m) throw DimensionMismatch("parameter vector size");
    if (order < 1) throw Error("construct_formal_solution: order must be >= 1");

    const Vec& lam = spectrum.rates();
    FormalSolution sol{LambdaSeries(lam, m, order), c, V, spectrum, {}, {}};

    for (int i = 0; i < m; ++i) {
        Vec e(m, 0.0);
        e[i] = c[i];
        sol.series.set_term(MultiIndex::unit(m, i), Poly::constant(std::move(e)));
    }

    const PowerSeries nonlinear = tail_from(V, 2);
    for (int level = 2; level <= order; ++level) {
        // Q at weight `level` only involves terms of lower weight, so composing
        // with the partial series truncated at `level` is exact there.
        LambdaSeries partial(lam, m, level);
        for (const auto& [J, P] : sol.series.terms())
            if (J.weight() < level) partial.set_term(J, P);
        LambdaSeries Q = compose_with_analytic(nonlinear, partial);

        for (const auto& [J, QJ] : Q.terms()) {
            if (J.weight() != level) continue;
            const double rate = sol.series.rate_of(J);
            Poly PJ(m);
            for (int i = 0; i < m; ++i) {
                double u = lam[i] - rate;
                const Poly Qi = QJ.component(i);
                if (std::abs(u) <= 1e-12) {
                    sol.resonance_log.emplace_back(J, i);
                    u = 0.0;
                } else if (std::abs(u) < 1e-8) {
                    sol.warnings.push_back("near-resonance |lambda_" + std::to_string(i) +
                                           " - lambda.J| = " + std::to_string(std::abs(u)));
                }
                const Poly Pi = resolvent_poly(u, Qi);
                for (int d = 0; d <= Pi.degree(); ++d) {
                    Vec v = PJ.coeff(d);
                    v[i] = Pi.coeff(d)[0];
                    PJ.set_coeff(d, std::move(v));
                }
            }
            sol.series.set_term(J, std::move(PJ));
        }
    }
    return sol;
}

/// Max absolute polynomial coefficient of x' - V(x) over all |J| <= order.
/// The derivative and the composition are independent code paths, so this is
/// a genuine consistency check on constructed solutions (expected <= 1e-9).
inline double check_formal_residual(const FormalSolution& sol) {
    LambdaSeries lhs = sol.series.derivative();
    LambdaSeries rhs = compose_with_analytic(sol.field, sol.series);
    return subtract(lhs, rhs).max_abs_coeff();
}

namespace detail {

/// Coefficient algebra of scalar polynomials in t truncated at a fixed degree.
struct PolyAlgebra {
    int max_degree;
    using value_type = Poly;
    value_type zero() const { return Poly(1); }
    value_type one() const { return Poly::constant({1.0}); }
    value_type mul(const value_type& a, const value_type& b) const {
        return poly_mul(a, b, max_degree);
    }
    void add_scaled(value_type& acc, double w, const value_type& v) const {
        acc = acc.plus(v.scaled_by(w));
    }
};

}  // namespace detail

/// Degree-K Taylor polynomial in t of the initial value problem
/// y(0) = x0, y' = V(y), by recursive coefficient matching:
/// (k+1) y_{k+1} = [t^k] V(y(t)).
inline Poly taylor_solution(const PowerSeries& V, const Vec& x0, int K) {
    const int m = V.in_dim();
    if (V.out_dim() != m) throw DimensionMismatch("taylor_solution: field must map R^m to R^m");
    if (static_cast<int>(x0.size()) != m) throw DimensionMismatch("taylor_solution: x0 size");

    const PowerSeries W = shift(V, x0);  // expansion around x0
    std::vector<Poly> z(m, Poly(1));     // y(t) - x0, componentwise
    for (int k = 0; k < K; ++k) {
        auto w = detail::apply_to_arguments(W, z, detail::PolyAlgebra{k});
        for (int i = 0; i < m; ++i) z[i].set_coeff(k + 1, {w[i].coeff(k)[0] / (k + 1)});
    }

    Poly y(m);
    y.set_coeff(0, x0);
    for (int d = 1; d <= K; ++d) {
        Vec v(m, 0.0);
        for (int i = 0; i < m; ++i) v[i] = z[i].coeff(d)[0];
        y.set_coeff(d, std::move(v));
    }
    return y;
}

/// Scalar majorant recursion:
///   a_0 = 0,  a_J = 1 for |J| = 1,
///   a_J = sum_{|I| >= 2} M^{|I|} sum_{nonzero parts summing to J} prod a_part,
/// with I ranging over Z^n_{>=0} and parts over Z^m_{>=0}, filled by
/// increasing |J| via literal partition enumeration.
struct MajorantTable {
    double M = 1.0;
    int n = 1;
    int m = 1;
    std::map<MultiIndex, double> values;
};

namespace detail {

/// Sum over ordered `parts`-tuples of nonzero multi-indices summing to
/// `target` of the product of table values.
inline double sum_over_partitions(const std::map<MultiIndex, double>& table,
                                  const MultiIndex& target, int parts) {
    if (parts == 0) return target.is_zero() ? 1.0 : 0.0;
    if (target.weight() < parts) return 0.0;  // every part has weight >= 1
    if (parts == 1) {
        auto it = table.find(target);
        return it == table.end() ? 0.0 : it->second;
    }
    double total = 0.0;
    // First part: any nonzero multi-index <= target componentwise.
    for (const auto& [T, aT] : table) {
        if (T.is_zero() || aT == 0.0) continue;
        auto rest = target.minus(T);
        if (!rest) continue;
        total += aT * sum_over_partitions(table, *rest, parts - 1);
    }
    return total;
}

}  // namespace detail

inline MajorantTable majorant_table(double M, int n, int up_to, int m) {
    if (!(M > 0.0)) throw Error("majorant_table: M must be positive");
    if (n <= 0 || m <= 0 || up_to < 0) throw Error("majorant_table: bad dimensions");
    MajorantTable tab{M, n, m, {}};
    tab.values[MultiIndex::zero(m)] = 0.0;
    if (up_to >= 1)
        for (const auto& J : multi_indices_of_weight(m, 1)) tab.values[J] = 1.0;
    for (int level = 2; level <= up_to; ++level) {
        // Collect this level after enumerating so lower levels stay frozen.
        std::vector<std::pair<MultiIndex, double>> filled;
        for (const auto& J : multi_indices_of_weight(m, level)) {
            double a = 0.0;
            for (int s = 2; s <= level; ++s) {
                const double Ms = std::pow(M, s);
                for (const auto& I : multi_indices_of_weight(n, s)) {
                    (void)I;  // the partition sum is the same for every I of weight s
                    a += Ms * detail::sum_over_partitions(tab.values, J, s);
                }
            }
            filled.emplace_back(J, a);
        }
        for (auto& [J, a] : filled) tab.values[J] = a;
    }
    return tab;
}

/// max over stored J != 0 of a_J^{1/|J|}; an empirical stand-in for the
/// geometric growth constant R.
inline double fit_growth_rate(const MajorantTable& tab) {
    double r = 0.0;
    for (const auto& [J, a] : tab.values) {
        if (J.is_zero()) continue;
        if (a > 0.0) r = std::max(r, std::pow(a, 1.0 / J.weight()));
    }
    return r;
}

struct PerturbationReport {
    int component = -1;       // index of the dominating difference component
    DominantTerm dominant;    // its leading term; contract: (C_i, 0, lambda_i)
    double lambda_C = 0.0;    // max rate among perturbed directions
    double equality_residual = 0.0;  // max |P_J(.;c) - P_J(.;c+C)| over unperturbed-support J
    bool window_ok = true;    // every term with rate >= lambda_C + lambda0 is e_i or equal
    std::string detail;
};

/// Compares x(t;c) and x(t;c+C). Verifies that coefficients agree for every J
/// supported away from the perturbed directions, that the leading difference
/// is C_i e^{lambda_i t} e_i at the largest perturbed rate, and that no other
/// difference term lives at rate >= lambda_C + lambda0.
inline PerturbationReport compare_perturbed(const PowerSeries& V, const StableSpectrum& spectrum,
                                            const Vec& c, const Vec& C, int order,
                                            double lambda0) {
    const int m = spectrum.dim();
    if (static_cast<int>(C.size()) != m) throw DimensionMismatch("compare_perturbed: C size");
    bool all_zero = true;
    for (double v : C) all_zero &= (v == 0.0);
    if (all_zero) throw ZeroPerturbation("compare_perturbed: C must be nonzero");
    if (!(lambda0 > spectrum.max_rate() && lambda0 < 0.0))
        throw Error("compare_perturbed: comparison rate must lie in (max rate, 0)");

    FormalSolution a = construct_formal_solution(V, spectrum, c, order);
    FormalSolution b = construct_formal_solution(V, spectrum, add(c, C), order);
    LambdaSeries diff = subtract(b.series, a.series);

    PerturbationReport rep;
    rep.lambda_C = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (C[i] != 0.0) rep.lambda_C = std::max(rep.lambda_C, spectrum.rates()[i]);

    // Coefficient equality on terms avoiding every perturbed direction.
    for (const auto& [J, P] : diff.terms()) {
        bool avoids = true;
        for (int i = 0; i < m; ++i)
            if (C[i] != 0.0 && J[i] != 0) avoids = false;
        if (avoids && !J.is_zero())
            rep.equality_residual = std::max(rep.equality_residual, P.max_abs_coeff());
    }

    // Window check: terms at rate >= lambda_C + lambda0 must be unit-index.
    for (const auto& [J, P] : diff.terms()) {
        const double rate = diff.rate_of(J);
        if (rate < rep.lambda_C + lambda0 - 1e-12) continue;
        if (J.is_unit()) continue;
        if (P.max_abs_coeff() > 1e-9) {
            rep.window_ok = false;
            rep.detail += "unexpected difference term inside the comparison window; ";
        }
    }

    // Leading difference across components.
    double best_rate = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        auto d = dominant_term(diff.component(i));
        if (d && d->r > best_rate) {
            best_rate = d->r;
            rep.component = i;
            rep.dominant = *d;
        }
    }
    return rep;
}

}  // namespace polyflow
