#pragma once

// Exponential-polynomial series with strictly negative decay rates:
//   x(t) = sum_J P_J(t) e^{(lambda.J) t},   J in Z^m_{>=0}, |J|_1 <= order,
// where each P_J is an n-dim polynomial in t. Such a series is a power series
// in the m variables e^{lambda_i t} with polynomial coefficients, so its
// composition with an analytic map reuses the power-series engine over a
// polynomial-coefficient algebra.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/power_series.hpp"

namespace polyflow {

/// Polynomial in one variable t with coefficients in R^n. Trailing all-zero
/// coefficients are trimmed; degree() is the largest stored power (0 for the
/// zero polynomial).
class Poly {
public:
    explicit Poly(int dim = 1) : dim_(dim) {
        if (dim <= 0) throw Error("Poly: dimension must be positive");
    }

    static Poly constant(Vec a0) {
        Poly p(static_cast<int>(a0.size()));
        p.coeffs_.push_back(std::move(a0));
        p.trim();
        return p;
    }

    static Poly from_coeffs(std::vector<Vec> coeffs, int dim) {
        Poly p(dim);
        for (const auto& c : coeffs)
            if (static_cast<int>(c.size()) != dim) throw DimensionMismatch("Poly: coefficient size");
        p.coeffs_ = std::move(coeffs);
        p.trim();
        return p;
    }

    int dim() const { return dim_; }
    int degree() const { return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    Vec coeff(int i) const {
        if (i < 0 || i >= static_cast<int>(coeffs_.size())) return Vec(dim_, 0.0);
        return coeffs_[i];
    }

    void set_coeff(int i, Vec v) {
        if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch("Poly::set_coeff");
        if (i >= static_cast<int>(coeffs_.size())) coeffs_.resize(i + 1, Vec(dim_, 0.0));
        coeffs_[i] = std::move(v);
        trim();
    }

    Vec evaluate(double t) const {
        Vec r(dim_, 0.0);
        for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i) {
            for (int k = 0; k < dim_; ++k) r[k] = r[k] * t + coeffs_[i][k];
        }
        return r;
    }

    Poly derivative() const {
        Poly p(dim_);
        for (int i = 1; i < static_cast<int>(coeffs_.size()); ++i)
            p.coeffs_.push_back(scaled(coeffs_[i], static_cast<double>(i)));
        p.trim();
        return p;
    }

    /// Antiderivative with zero constant term.
    Poly antiderivative() const {
        Poly p(dim_);
        if (coeffs_.empty()) return p;
        p.coeffs_.assign(coeffs_.size() + 1, Vec(dim_, 0.0));
        for (int i = 0; i < static_cast<int>(coeffs_.size()); ++i)
            p.coeffs_[i + 1] = scaled(coeffs_[i], 1.0 / (i + 1));
        p.trim();
        return p;
    }

    Poly plus(const Poly& o) const {
        if (o.dim_ != dim_) throw DimensionMismatch("Poly::plus");
        Poly p(dim_);
        p.coeffs_.resize(std::max(coeffs_.size(), o.coeffs_.size()), Vec(dim_, 0.0));
        for (std::size_t i = 0; i < p.coeffs_.size(); ++i) {
            if (i < coeffs_.size()) p.coeffs_[i] = add(p.coeffs_[i], coeffs_[i]);
            if (i < o.coeffs_.size()) p.coeffs_[i] = add(p.coeffs_[i], o.coeffs_[i]);
        }
        p.trim();
        return p;
    }

    Poly minus(const Poly& o) const { return plus(o.scaled_by(-1.0)); }

    Poly scaled_by(double w) const {
        Poly p(dim_);
        for (const auto& c : coeffs_) p.coeffs_.push_back(scaled(c, w));
        p.trim();
        return p;
    }

    /// Scalar polynomial of one component.
    Poly component(int i) const {
        Poly p(1);
        for (const auto& c : coeffs_) p.coeffs_.push_back({c[i]});
        p.trim();
        return p;
    }

    /// max over components of sum_i |a_i| t^i, for t >= 0.
    double star_eval(double t) const {
        if (t < 0.0) throw NegativeTime("star_eval: t must be nonnegative");
        double best = 0.0;
        for (int k = 0; k < dim_; ++k) {
            double s = 0.0, tp = 1.0;
            for (const auto& c : coeffs_) {
                s += std::abs(c[k]) * tp;
                tp *= t;
            }
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, norm_inf(c));
        return m;
    }

private:
    void trim() {
        while (!coeffs_.empty()) {
            bool all_zero = true;
            for (double v : coeffs_.back()) all_zero &= (v == 0.0);
            if (!all_zero) break;
            coeffs_.pop_back();
        }
    }

    int dim_;
    std::vector<Vec> coeffs_;  // coeffs_[i] multiplies t^i
};

/// Product of scalar polynomials, optionally truncated at max_degree (< 0
/// means untruncated).
inline Poly poly_mul(const Poly& a, const Poly& b, int max_degree = -1) {
    if (a.dim() != 1 || b.dim() != 1) throw DimensionMismatch("poly_mul: scalar polynomials only");
    Poly r(1);
    if (a.is_zero() || b.is_zero()) return r;
    std::vector<Vec> coeffs;
    int deg = a.degree() + b.degree();
    if (max_degree >= 0) deg = std::min(deg, max_degree);
    coeffs.assign(deg + 1, Vec{0.0});
    for (int i = 0; i <= a.degree(); ++i) {
        const double ai = a.coeff(i)[0];
        if (ai == 0.0) continue;
        for (int j = 0; j <= b.degree() && i + j <= deg; ++j)
            coeffs[i + j][0] += ai * b.coeff(j)[0];
    }
    return Poly::from_coeffs(std::move(coeffs), 1);
}

class LambdaSeries {
public:
    /// rates: the m decay rates, all strictly negative.
    LambdaSeries(Vec rates, int out_dim, int order)
        : rates_(std::move(rates)), out_dim_(out_dim), order_(order) {
        if (out_dim <= 0 || order < 0) throw Error("LambdaSeries: bad dimensions");
        for (double r : rates_)
            if (!(r < 0.0)) throw Error("LambdaSeries: rates must be strictly negative");
    }

    const Vec& rates() const { return rates_; }
    int var_dim() const { return static_cast<int>(rates_.size()); }
    int out_dim() const { return out_dim_; }
    int order() const { return order_; }

    const std::map<MultiIndex, Poly>& terms() const { return terms_; }

    void set_term(const MultiIndex& J, Poly P) {
        if (J.size() != var_dim()) throw DimensionMismatch("LambdaSeries: index dimension");
        if (P.dim() != out_dim_) throw DimensionMismatch("LambdaSeries: polynomial dimension");
        if (J.weight() > order_) throw Error("LambdaSeries: term beyond truncation order");
        if (P.is_zero())
            terms_.erase(J);
        else
            terms_.insert_or_assign(J, std::move(P));
    }

    Poly term(const MultiIndex& J) const {
        auto it = terms_.find(J);
        return it == terms_.end() ? Poly(out_dim_) : it->second;
    }

    /// lambda . J
    double rate_of(const MultiIndex& J) const {
        double r = 0.0;
        for (int i = 0; i < var_dim(); ++i) r += rates_[i] * J[i];
        return r;
    }

    /// P_0 == 0, required of solution series and composition arguments.
    bool centered() const { return terms_.find(MultiIndex::zero(var_dim())) == terms_.end(); }

    /// sum_{|J| <= order} P_J(t) e^{(lambda.J) t}
    Vec evaluate(double t) const {
        Vec r(out_dim_, 0.0);
        for (const auto& [J, P] : terms_) axpy(r, std::exp(rate_of(J) * t), P.evaluate(t));
        return r;
    }

    /// Termwise P_J -> P_J' + (lambda.J) P_J.
    LambdaSeries derivative() const {
        LambdaSeries d(rates_, out_dim_, order_);
        for (const auto& [J, P] : terms_)
            d.set_term(J, P.derivative().plus(P.scaled_by(rate_of(J))));
        return d;
    }

    void add_scaled(const LambdaSeries& o, double w) {
        if (o.out_dim_ != out_dim_ || o.var_dim() != var_dim())
            throw DimensionMismatch("LambdaSeries::add_scaled");
        for (const auto& [J, P] : o.terms_) {
            if (J.weight() > order_) continue;
            set_term(J, term(J).plus(P.scaled_by(w)));
        }
    }

    /// Scalar series of one output component.
    LambdaSeries component(int i) const {
        LambdaSeries s(rates_, 1, order_);
        for (const auto& [J, P] : terms_) s.set_term(J, P.component(i));
        return s;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [J, P] : terms_) m = std::max(m, P.max_abs_coeff());
        return m;
    }

private:
    Vec rates_;
    int out_dim_, order_;
    std::map<MultiIndex, Poly> terms_;
};

inline LambdaSeries subtract(const LambdaSeries& a, const LambdaSeries& b) {
    LambdaSeries r = a;
    r.add_scaled(b, -1.0);
    return r;
}

namespace detail {

/// Coefficient algebra of scalar exponential-polynomial series (terms keyed
/// by multi-index with scalar polynomial coefficients, |J| capped).
struct LambdaAlgebra {
    Vec rates;
    int order;
    using value_type = LambdaSeries;
    value_type zero() const { return LambdaSeries(rates, 1, order); }
    value_type one() const {
        LambdaSeries s(rates, 1, order);
        s.set_term(MultiIndex::zero(static_cast<int>(rates.size())), Poly::constant({1.0}));
        return s;
    }
    value_type mul(const value_type& a, const value_type& b) const {
        LambdaSeries r(rates, 1, order);
        for (const auto& [J1, P1] : a.terms()) {
            if (J1.weight() > order) continue;
            for (const auto& [J2, P2] : b.terms()) {
                if (J1.weight() + J2.weight() > order) continue;
                MultiIndex J = J1.plus(J2);
                r.set_term(J, r.term(J).plus(poly_mul(P1, P2)));
            }
        }
        return r;
    }
    void add_scaled(value_type& acc, double w, const value_type& v) const { acc.add_scaled(v, w); }
};

}  // namespace detail

/// (f o x)(t): substitute a centered series x into the analytic map f. The
/// result keeps x's rates and order; its J = 0 coefficient is f's constant
/// term.
inline LambdaSeries compose_with_analytic(const PowerSeries& f, const LambdaSeries& x) {
    if (f.in_dim() != x.out_dim())
        throw DimensionMismatch("compose_with_analytic: f.in_dim must equal series output dim");
    if (!x.centered()) throw NotCentered("compose_with_analytic: series must have P_0 = 0");

    detail::LambdaAlgebra alg{x.rates(), x.order()};
    std::vector<LambdaSeries> args;
    args.reserve(x.out_dim());
    for (int i = 0; i < x.out_dim(); ++i) args.push_back(x.component(i));

    auto comps = detail::apply_to_arguments(f, args, alg);
    LambdaSeries r(x.rates(), f.out_dim(), x.order());
    for (int k = 0; k < f.out_dim(); ++k)
        for (const auto& [J, Pk] : comps[k].terms()) {
            Poly P = r.term(J);
            for (int d = 0; d <= Pk.degree(); ++d) {
                Vec c = P.coeff(d);
                c[k] = Pk.coeff(d)[0];
                P.set_coeff(d, std::move(c));
            }
            r.set_term(J, std::move(P));
        }
    return r;
}

/// Scalar series  beta + sum_J (w . P_J)(t) e^{(lambda.J) t}  obtained by
/// applying the affine functional y -> w.y + beta termwise.
inline LambdaSeries affine_functional(const LambdaSeries& x, std::span<const double> w,
                                      double beta) {
    if (static_cast<int>(w.size()) != x.out_dim())
        throw DimensionMismatch("affine_functional: weight dimension");
    LambdaSeries r(x.rates(), 1, x.order());
    for (const auto& [J, P] : x.terms()) {
        Poly s(1);
        for (int d = 0; d <= P.degree(); ++d) s.set_coeff(d, {dot(w, P.coeff(d))});
        if (!s.is_zero()) r.set_term(J, r.term(J).plus(s));
    }
    if (beta != 0.0) {
        MultiIndex z = MultiIndex::zero(x.var_dim());
        r.set_term(z, r.term(z).plus(Poly::constant({beta})));
    }
    return r;
}

/// Product-formula bound on the tail sum_{|J|_inf > order} |P_J(t) e^{(lambda.J)t}|
/// under the envelope |P_J(t)| <= t^{q|J|}:
///   prod_i 1/(1 - t^q e^{lambda_i t})  -  prod_i sum_{j=0}^{order} (t^q e^{lambda_i t})^j.
inline double tail_bound(const LambdaSeries& x, double t, double q) {
    if (!(t > 0.0)) throw NotInRegime("tail_bound: requires t > 0");
    const int n = x.order();
    double full = 1.0, partial = 1.0;
    for (double lam : x.rates()) {
        const double z = std::pow(t, q) * std::exp(lam * t);
        if (!(z < 1.0))
            throw NotInRegime("tail_bound: t^q e^{lambda t} >= 1 at rate " + std::to_string(lam));
        full *= 1.0 / (1.0 - z);
        double sum = 0.0, zp = 1.0;
        for (int j = 0; j <= n; ++j) {
            sum += zp;
            zp *= z;
        }
        partial *= sum;
    }
    return full - partial;
}

struct DominantTerm {
    double a = 0.0;  // leading coefficient
    int q = 0;       // degree of the leading power of t
    double r = 0.0;  // decay rate
};

/// Leading asymptotic term a t^q e^{rt} of a scalar series: terms with equal
/// rate lambda.J are merged by polynomial addition (rates within
/// rate_tol*max(1,|r|) are considered equal), groups whose polynomials cancel
/// below lead_tol are dropped, and the largest surviving rate wins. Returns
/// nullopt when everything cancels to truncation order.
inline std::optional<DominantTerm> dominant_term(const LambdaSeries& s, double rate_tol = 1e-12,
                                                 double lead_tol = 1e-12) {
    if (s.out_dim() != 1) throw DimensionMismatch("dominant_term: scalar series only");

    std::vector<std::pair<double, Poly>> groups;
    for (const auto& [J, P] : s.terms()) {
        const double r = s.rate_of(J);
        bool merged = false;
        for (auto& [gr, gp] : groups) {
            if (std::abs(r - gr) <= rate_tol * std::max(1.0, std::abs(gr))) {
                gp = gp.plus(P);
                merged = true;
                break;
            }
        }
        if (!merged) groups.emplace_back(r, P);
    }

    std::optional<DominantTerm> best;
    for (const auto& [r, P] : groups) {
        int lead = -1;
        for (int d = P.degree(); d >= 0; --d) {
            if (std::abs(P.coeff(d)[0]) > lead_tol) {
                lead = d;
                break;
            }
        }
        if (lead < 0) continue;  // cancelled group
        if (!best || r > best->r) best = DominantTerm{P.coeff(lead)[0], lead, r};
    }
    return best;
}

/// Dominating-function evaluation P*(t); see Poly::star_eval.
inline double star_eval(const Poly& P, double t) { return P.star_eval(t); }

}  // namespace polyflow
