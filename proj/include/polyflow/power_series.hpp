#pragma once

// Truncated multivariate power series with vector-valued coefficients:
// f(x) = sum_I b_I x^I over multi-indices I with |I|_1 <= order.
//
// Composition, and every other "substitute something into f" operation in the
// library, goes through one engine, apply_to_arguments(): it evaluates f's
// monomials over any commutative coefficient algebra (truncated scalar series,
// scalar exponential-polynomial series, truncated polynomials in t).

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"

namespace polyflow {

/// Exponent tuple I in Z^m_{>=0}, ordered by (|I|_1, lexicographic).
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
        for (int v : e_) {
            if (v < 0) throw Error("MultiIndex: negative exponent");
            weight_ += v;
        }
    }

    static MultiIndex zero(int m) { return MultiIndex(std::vector<int>(m, 0)); }
    static MultiIndex unit(int m, int i) {
        std::vector<int> e(m, 0);
        e[i] = 1;
        return MultiIndex(std::move(e));
    }

    int size() const { return static_cast<int>(e_.size()); }
    int operator[](int i) const { return e_[i]; }
    const std::vector<int>& exponents() const { return e_; }
    /// |I|_1
    int weight() const { return weight_; }
    bool is_zero() const { return weight_ == 0; }
    bool is_unit() const { return weight_ == 1; }

    MultiIndex plus(const MultiIndex& o) const {
        std::vector<int> e(e_);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.e_[i];
        return MultiIndex(std::move(e));
    }

    /// Componentwise difference, or nullopt if any entry would go negative.
    std::optional<MultiIndex> minus(const MultiIndex& o) const {
        std::vector<int> e(e_);
        for (std::size_t i = 0; i < e.size(); ++i) {
            e[i] -= o.e_[i];
            if (e[i] < 0) return std::nullopt;
        }
        return MultiIndex(std::move(e));
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e_ == b.e_; }
    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
        if (auto c = a.weight_ <=> b.weight_; c != 0) return c;
        return a.e_ <=> b.e_;
    }

private:
    std::vector<int> e_;
    int weight_ = 0;
};

/// All multi-indices of the given weight in m variables, in sorted order.
inline std::vector<MultiIndex> multi_indices_of_weight(int m, int weight) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(m, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == m - 1) {
            cur[pos] = left;
            out.emplace_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (m == 0) {
        if (weight == 0) out.emplace_back(std::vector<int>{});
        return out;
    }
    rec(rec, 0, weight);
    std::sort(out.begin(), out.end());
    return out;
}

class PowerSeries {
public:
    PowerSeries(int in_dim, int out_dim, int order)
        : in_dim_(in_dim), out_dim_(out_dim), order_(order) {
        if (in_dim < 0 || out_dim <= 0 || order < 0) throw Error("PowerSeries: bad dimensions");
    }

    static PowerSeries constant(Vec b0, int in_dim, int order) {
        PowerSeries s(in_dim, static_cast<int>(b0.size()), order);
        s.set_coeff(MultiIndex::zero(in_dim), std::move(b0));
        return s;
    }

    /// The identity map x -> x.
    static PowerSeries identity(int dim, int order) {
        PowerSeries s(dim, dim, order);
        for (int i = 0; i < dim; ++i) {
            Vec b(dim, 0.0);
            b[i] = 1.0;
            s.set_coeff(MultiIndex::unit(dim, i), std::move(b));
        }
        return s;
    }

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    int order() const { return order_; }

    const std::map<MultiIndex, Vec>& terms() const { return terms_; }

    /// Stores b as the coefficient of x^I; exact zero vectors are pruned.
    void set_coeff(const MultiIndex& I, Vec b) {
        if (I.size() != in_dim_) throw DimensionMismatch("PowerSeries: multi-index dimension");
        if (static_cast<int>(b.size()) != out_dim_)
            throw DimensionMismatch("PowerSeries: coefficient dimension");
        if (I.weight() > order_) throw Error("PowerSeries: term beyond truncation order");
        bool all_zero = true;
        for (double v : b) all_zero &= (v == 0.0);
        if (all_zero)
            terms_.erase(I);
        else
            terms_.insert_or_assign(I, std::move(b));
    }

    Vec coeff(const MultiIndex& I) const {
        auto it = terms_.find(I);
        return it == terms_.end() ? Vec(out_dim_, 0.0) : it->second;
    }

    Vec constant_term() const { return coeff(MultiIndex::zero(in_dim_)); }

    bool has_zero_constant_term() const {
        auto it = terms_.find(MultiIndex::zero(in_dim_));
        return it == terms_.end();
    }

    /// sum_{|I| <= order} b_I x^I
    Vec evaluate(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != in_dim_)
            throw DimensionMismatch("PowerSeries::evaluate: argument dimension");
        Vec r(out_dim_, 0.0);
        for (const auto& [I, b] : terms_) {
            double mono = 1.0;
            for (int i = 0; i < in_dim_; ++i)
                for (int k = 0; k < I[i]; ++k) mono *= x[i];
            axpy(r, mono, b);
        }
        return r;
    }

    /// Same support with componentwise absolute-value coefficients.
    PowerSeries majorant() const {
        PowerSeries s(in_dim_, out_dim_, order_);
        for (const auto& [I, b] : terms_) {
            Vec a(b.size());
            for (std::size_t i = 0; i < b.size(); ++i) a[i] = std::abs(b[i]);
            s.set_coeff(I, std::move(a));
        }
        return s;
    }

    void add_scaled(const PowerSeries& o, double w) {
        if (o.in_dim_ != in_dim_ || o.out_dim_ != out_dim_)
            throw DimensionMismatch("PowerSeries::add_scaled");
        for (const auto& [I, b] : o.terms_) {
            if (I.weight() > order_) continue;
            auto it = terms_.find(I);
            if (it == terms_.end()) {
                terms_.emplace(I, scaled(b, w));
            } else {
                axpy(it->second, w, b);
            }
        }
        prune();
    }

    /// Scalar series for one output component.
    PowerSeries component(int i) const {
        PowerSeries s(in_dim_, 1, order_);
        for (const auto& [I, b] : terms_)
            if (b[i] != 0.0) s.set_coeff(I, {b[i]});
        return s;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [I, b] : terms_) m = std::max(m, norm_inf(b));
        return m;
    }

    /// Optional coefficient-growth metadata (|b_I| <= M^{|I|+1}); not inferred.
    std::optional<double> growth_constant;

private:
    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            bool all_zero = true;
            for (double v : it->second) all_zero &= (v == 0.0);
            it = all_zero ? terms_.erase(it) : std::next(it);
        }
    }

    int in_dim_, out_dim_, order_;
    std::map<MultiIndex, Vec> terms_;
};

inline PowerSeries add(const PowerSeries& f, const PowerSeries& g) {
    PowerSeries r = f;
    r.add_scaled(g, 1.0);
    return r;
}

inline PowerSeries subtract(const PowerSeries& f, const PowerSeries& g) {
    PowerSeries r = f;
    r.add_scaled(g, -1.0);
    return r;
}

inline PowerSeries scale(const PowerSeries& f, double w) {
    PowerSeries r(f.in_dim(), f.out_dim(), f.order());
    r.add_scaled(f, w);
    return r;
}

/// Copy truncated to a (possibly lower) order.
inline PowerSeries truncated(const PowerSeries& f, int order) {
    PowerSeries r(f.in_dim(), f.out_dim(), std::min(order, f.order()));
    for (const auto& [I, b] : f.terms())
        if (I.weight() <= r.order()) r.set_coeff(I, b);
    return r;
}

/// Terms with |I| >= min_weight only (e.g. the nonlinear part of a field).
inline PowerSeries tail_from(const PowerSeries& f, int min_weight) {
    PowerSeries r(f.in_dim(), f.out_dim(), f.order());
    for (const auto& [I, b] : f.terms())
        if (I.weight() >= min_weight) r.set_coeff(I, b);
    return r;
}

/// Truncated Cauchy product of scalar series (out_dim 1), to min order.
inline PowerSeries multiply(const PowerSeries& f, const PowerSeries& g) {
    if (f.out_dim() != 1 || g.out_dim() != 1)
        throw DimensionMismatch("multiply: scalar series only");
    if (f.in_dim() != g.in_dim()) throw DimensionMismatch("multiply: variable count differs");
    PowerSeries r(f.in_dim(), 1, std::min(f.order(), g.order()));
    for (const auto& [I, a] : f.terms()) {
        if (I.weight() > r.order()) continue;
        for (const auto& [K, b] : g.terms()) {
            if (I.weight() + K.weight() > r.order()) continue;
            MultiIndex J = I.plus(K);
            Vec c = r.coeff(J);
            c[0] += a[0] * b[0];
            r.set_coeff(J, std::move(c));
        }
    }
    return r;
}

namespace detail {

/// result[k] = sum_I b_I[k] * prod_i args[i]^{I_i}, computed over an
/// arbitrary commutative algebra. Powers of the arguments are cached.
template <class Algebra>
std::vector<typename Algebra::value_type> apply_to_arguments(
    const PowerSeries& f, const std::vector<typename Algebra::value_type>& args,
    const Algebra& alg) {
    using V = typename Algebra::value_type;
    if (static_cast<int>(args.size()) != f.in_dim())
        throw DimensionMismatch("apply_to_arguments: argument count");

    std::vector<std::vector<V>> pows(args.size());
    auto power = [&](int i, int e) -> const V& {
        auto& cache = pows[i];
        if (cache.empty()) cache.push_back(alg.one());
        while (static_cast<int>(cache.size()) <= e)
            cache.push_back(alg.mul(cache.back(), args[i]));
        return cache[e];
    };

    std::vector<V> result(f.out_dim(), alg.zero());
    for (const auto& [I, b] : f.terms()) {
        V mono = alg.one();
        for (int i = 0; i < f.in_dim(); ++i)
            if (I[i] > 0) mono = alg.mul(mono, power(i, I[i]));
        for (int k = 0; k < f.out_dim(); ++k)
            if (b[k] != 0.0) alg.add_scaled(result[k], b[k], mono);
    }
    return result;
}

/// Coefficient algebra of truncated scalar power series.
struct SeriesAlgebra {
    int in_dim;
    int order;
    using value_type = PowerSeries;
    value_type zero() const { return PowerSeries(in_dim, 1, order); }
    value_type one() const { return PowerSeries::constant({1.0}, in_dim, order); }
    value_type mul(const value_type& a, const value_type& b) const { return multiply(a, b); }
    void add_scaled(value_type& acc, double w, const value_type& v) const { acc.add_scaled(v, w); }
};

}  // namespace detail

/// Composition (f o g)(x) = f(g(x)) for g with zero constant term; the
/// result is truncated to min(f.order, g.order), where its coefficients are
/// exact. The constant term of the result is f's constant term.
inline PowerSeries compose(const PowerSeries& f, const PowerSeries& g) {
    if (g.out_dim() != f.in_dim())
        throw DimensionMismatch("compose: g.out_dim must equal f.in_dim");
    if (!g.has_zero_constant_term())
        throw NonzeroConstantTerm("compose: inner series must have zero constant term");

    const int order = std::min(f.order(), g.order());
    detail::SeriesAlgebra alg{g.in_dim(), order};
    std::vector<PowerSeries> args;
    args.reserve(g.out_dim());
    for (int i = 0; i < g.out_dim(); ++i) args.push_back(truncated(g.component(i), order));

    auto comps = detail::apply_to_arguments(f, args, alg);
    PowerSeries r(g.in_dim(), f.out_dim(), order);
    for (int k = 0; k < f.out_dim(); ++k)
        for (const auto& [J, c] : comps[k].terms()) {
            Vec b = r.coeff(J);
            b[k] = c[0];
            r.set_coeff(J, std::move(b));
        }
    return r;
}

/// f(x0 + z) expanded as a series in z (exact: f is a polynomial).
inline PowerSeries shift(const PowerSeries& f, std::span<const double> x0) {
    if (static_cast<int>(x0.size()) != f.in_dim()) throw DimensionMismatch("shift: center dimension");
    detail::SeriesAlgebra alg{f.in_dim(), f.order()};
    std::vector<PowerSeries> args;
    for (int i = 0; i < f.in_dim(); ++i) {
        PowerSeries a(f.in_dim(), 1, f.order());
        a.set_coeff(MultiIndex::zero(f.in_dim()), {x0[i]});
        a.set_coeff(MultiIndex::unit(f.in_dim(), i), {1.0});
        args.push_back(std::move(a));
    }
    auto comps = detail::apply_to_arguments(f, args, alg);
    PowerSeries r(f.in_dim(), f.out_dim(), f.order());
    for (int k = 0; k < f.out_dim(); ++k)
        for (const auto& [J, c] : comps[k].terms()) {
            Vec b = r.coeff(J);
            b[k] = c[0];
            r.set_coeff(J, std::move(b));
        }
    return r;
}

}  // namespace polyflow
