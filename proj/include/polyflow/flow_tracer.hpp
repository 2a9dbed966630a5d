#pragma once

// Numeric integration of piecewise analytic vector fields over a polytope
// cell cover, with cell-switch event detection, local tangency-order
// estimation along in-cell analytic continuations, and asymptotic cell
// membership near the stable equilibrium via the formal series solution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/geometry.hpp"
#include "polyflow/lambda_series.hpp"
#include "polyflow/ode.hpp"
#include "polyflow/power_series.hpp"

namespace polyflow {

/// A cell cover together with one analytic (truncated power series) field per
/// cell, and optionally the stable equilibrium data used for asymptotics.
struct PiecewiseField {
    CellCover cover;
    std::vector<PowerSeries> fields;
    std::optional<Vec> equilibrium_point;
    std::optional<StableSpectrum> equilibrium_spectrum;

    PiecewiseField(CellCover cover_, std::vector<PowerSeries> fields_,
                   std::optional<Vec> eq_point = std::nullopt,
                   std::optional<StableSpectrum> eq_spectrum = std::nullopt)
        : cover(std::move(cover_)),
          fields(std::move(fields_)),
          equilibrium_point(std::move(eq_point)),
          equilibrium_spectrum(std::move(eq_spectrum)) {
        if (fields.size() != cover.cells.size())
            throw DimensionMismatch("PiecewiseField: one field per cell required");
        for (const auto& f : fields)
            if (f.in_dim() != cover.dim() || f.out_dim() != cover.dim())
                throw DimensionMismatch("PiecewiseField: field dimension mismatch");
        if (equilibrium_point && static_cast<int>(equilibrium_point->size()) != cover.dim())
            throw DimensionMismatch("PiecewiseField: equilibrium dimension mismatch");
    }

    Vec eval(int cell, std::span<const double> x) const { return fields[cell].evaluate(x); }
};

struct Switch {
    double t = 0.0;
    int from = -1;
    int to = -1;
};

struct CellInterval {
    double t_start = 0.0;
    double t_end = 0.0;
    int cell = -1;
};

struct FlowTrace {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<int> cells;  // active cell per sample
    std::vector<Switch> switches;
    std::vector<CellInterval> intervals;
    bool captured = false;  // run ended inside the equilibrium capture radius
    std::vector<std::string> notes;

    void push_sample(double t, const Vec& x, int cell) {
        times.push_back(t);
        states.push_back(x);
        cells.push_back(cell);
    }
};

struct TraceOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double boundary_tol = 1e-9;  // membership tolerance on facets
    double time_tol = 1e-12;     // bisection window for switch times
    double capture_radius = 1e-3;  // 0 disables the equilibrium handoff
    int taylor_order = 8;          // k_max for admissibility / tangency checks
    double coeff_tol = 1e-9;       // zero threshold for Taylor coefficients
    long switch_cap = 10000;
    long max_steps = 20'000'000;
};

/// Raised when the switch count exceeds the configured cap; carries the full
/// log accumulated so far.
struct ChatteringGuardError : Error {
    FlowTrace partial;
    explicit ChatteringGuardError(FlowTrace tr, long cap)
        : Error("chattering guard: more than " + std::to_string(cap) + " switches"),
          partial(std::move(tr)) {}
};

namespace detail {

/// Largest facet violation of the cell at x (negative strictly inside).
inline double max_exit(const Polytope& D, std::span<const double> x) {
    return D.max_violation(x);
}

/// Whether the local analytic continuation of the cell's field from x stays
/// inside the cell for small positive time, decided facet by facet from the
/// first non-vanishing Taylor coefficient of the facet margin.
inline bool cell_admits(const PiecewiseField& pf, int ci, const Vec& x,
                        const TraceOptions& opt) {
    const Polytope& D = pf.cover.cells[ci];
    const Poly y = taylor_solution(pf.fields[ci], x, opt.taylor_order);
    for (const auto& H : D.halfspaces()) {
        const double s0 = H.offset() - dot(H.normal(), y.coeff(0));
        if (s0 < -opt.boundary_tol) continue;  // facet strictly satisfied at x
        if (s0 > opt.boundary_tol) return false;
        for (int j = 1; j <= y.degree(); ++j) {
            const double sj = -dot(H.normal(), y.coeff(j));
            if (std::abs(sj) <= opt.coeff_tol) continue;
            if (sj > 0.0) return false;  // exits through this facet at order j
            break;                       // curves strictly inside
        }
        // All coefficients vanish to order: confined to the facet, admissible.
    }
    return true;
}

inline int select_admissible_cell(const PiecewiseField& pf, const Vec& x,
                                  const std::vector<int>& candidates, const TraceOptions& opt,
                                  std::vector<std::string>* notes, double t_now) {
    if (candidates.size() == 1 && cell_admits(pf, candidates[0], x, opt)) return candidates[0];
    std::vector<int> admissible;
    for (int c : candidates)
        if (cell_admits(pf, c, x, opt)) admissible.push_back(c);
    if (admissible.empty())
        throw NoAdmissibleCell("no candidate cell admits the local continuation at t = " +
                               std::to_string(t_now));
    if (admissible.size() > 1 && notes)
        notes->push_back("tie at t = " + std::to_string(t_now) + ": " +
                         std::to_string(admissible.size()) +
                         " admissible cells, picking lowest index " +
                         std::to_string(admissible.front()));
    return admissible.front();
}

/// State reached from (t0, x0) after time tau under f, via the adaptive stepper.
template <class F>
Vec advance(F& f, const Vec& x0, double t0, double tau, const OdeOptions& opt) {
    if (tau <= 0.0) return x0;
    return integrate(f, x0, t0, t0 + tau, opt);
}

}  // namespace detail

/// Among cells containing x, picks the one whose local Taylor continuation
/// stays inside; ties resolve to the lowest index.
inline int choose_next_cell(const PiecewiseField& pf, const Vec& x, double t, int /*current*/,
                            const TraceOptions& opt = {}) {
    auto candidates = locate_cells(x, pf.cover, opt.boundary_tol);
    if (candidates.empty()) throw LeftCover("choose_next_cell: no cell contains the point");
    return detail::select_admissible_cell(pf, x, candidates, opt, nullptr, t);
}

/// Integrates x' = V(x) through the cover. Switch events are located by
/// bisecting the first facet violation of the active cell along the step;
/// the run stops at t_end or when the state enters the capture radius of the
/// equilibrium.
inline FlowTrace trace_flow(const PiecewiseField& pf, const Vec& x0, double t_end,
                            const TraceOptions& opt = {}) {
    FlowTrace tr;
    auto cand0 = locate_cells(x0, pf.cover, opt.boundary_tol);
    if (cand0.empty()) throw LeftCover("trace_flow: x0 is outside the cover");
    int active = detail::select_admissible_cell(pf, x0, cand0, opt, &tr.notes, 0.0);

    OdeOptions ode{opt.rtol, opt.atol, opt.h_init, 1e-15, opt.max_steps};
    auto rhs = [&pf, &active](double, const Vec& y) { return pf.eval(active, y); };

    double t = 0.0;
    Vec x = x0;
    double interval_start = 0.0;
    tr.push_sample(t, x, active);

    auto near_equilibrium = [&](const Vec& y) {
        return pf.equilibrium_point && opt.capture_radius > 0.0 &&
               norm2(sub(y, *pf.equilibrium_point)) <= opt.capture_radius;
    };
    if (near_equilibrium(x)) {
        tr.captured = true;
        tr.intervals.push_back({interval_start, t, active});
        return tr;
    }

    double h = opt.h_init;
    long steps = 0;
    while (t < t_end - 1e-15 * std::max(1.0, std::abs(t_end))) {
        if (++steps > opt.max_steps) throw Error("trace_flow: step limit exceeded");
        auto st = rk45_accepted_step(rhs, t, x, h, t_end - t, ode);

        if (detail::max_exit(pf.cover.cells[active], st.x) > opt.boundary_tol) {
            // Crossing inside (t, t + h_used]: bisect the first exit time.
            double lo = 0.0, hi = st.h_used;
            Vec x_hi = st.x;
            while (hi - lo > opt.time_tol) {
                const double mid = 0.5 * (lo + hi);
                Vec xm = detail::advance(rhs, x, t, mid, ode);
                if (detail::max_exit(pf.cover.cells[active], xm) > 0.0) {
                    hi = mid;
                    x_hi = std::move(xm);
                } else {
                    lo = mid;
                }
            }
            const double t_ev = t + hi;
            Vec x_ev = std::move(x_hi);

            auto cands = locate_cells(x_ev, pf.cover, opt.boundary_tol);
            if (cands.empty())
                throw LeftCover("trace_flow: state left the cover at t = " + std::to_string(t_ev));
            int next;
            try {
                next = detail::select_admissible_cell(pf, x_ev, cands, opt, &tr.notes, t_ev);
            } catch (const NoAdmissibleCell&) {
                // No continuation stays inside any containing cell. Probe a
                // short forward step: leaving the cover is LeftCover, while
                // an inconsistency among covering cells stays NoAdmissibleCell.
                Vec probe = x_ev;
                axpy(probe, 1e-6, pf.eval(active, x_ev));
                if (locate_cells(probe, pf.cover, opt.boundary_tol).empty())
                    throw LeftCover("trace_flow: trajectory leaves the cover at t = " +
                                    std::to_string(t_ev));
                throw;
            }

            t = t_ev;
            x = std::move(x_ev);
            if (next != active) {
                tr.switches.push_back({t_ev, active, next});
                tr.intervals.push_back({interval_start, t_ev, active});
                interval_start = t_ev;
                active = next;
                if (static_cast<long>(tr.switches.size()) > opt.switch_cap) {
                    tr.push_sample(t, x, active);
                    throw ChatteringGuardError(std::move(tr), opt.switch_cap);
                }
                h = opt.h_init;  // fresh field
            } else {
                h = std::min(st.h_next, std::max(opt.h_init, hi));
            }
            tr.push_sample(t, x, active);
            if (near_equilibrium(x)) {
                tr.captured = true;
                break;
            }
            continue;
        }

        t += st.h_used;
        x = std::move(st.x);
        h = st.h_next;
        tr.push_sample(t, x, active);
        if (near_equilibrium(x)) {
            tr.captured = true;
            break;
        }
    }
    tr.intervals.push_back({interval_start, t, active});
    return tr;
}

struct ExitOrder {
    bool exits = false;  // false: inside to order k_max along every facet
    int k = 0;           // tangency order of the first exit
    double a = 0.0;      // leading coefficient of the facet distance
};

/// Taylor-expands each facet distance along the in-cell continuation from x
/// and reports the smallest order with a positive leading coefficient, or
/// inside-to-order if every facet distance stays nonpositive through k_max.
inline ExitOrder local_exit_order(const PiecewiseField& pf, int cell, const Vec& x, int k_max,
                                  double boundary_tol = 1e-9, double coeff_tol = 1e-9) {
    const Polytope& D = pf.cover.cells[cell];
    const Poly y = taylor_solution(pf.fields[cell], x, k_max);

    int best_k = std::numeric_limits<int>::max();
    double best_a = 0.0;
    for (const auto& H : D.halfspaces()) {
        const double s0 = H.offset() - dot(H.normal(), y.coeff(0));
        if (s0 < -boundary_tol) continue;
        if (s0 > boundary_tol) throw Error("local_exit_order: x lies outside the cell");
        for (int j = 1; j <= k_max; ++j) {
            const double sj = -dot(H.normal(), y.coeff(j));
            if (std::abs(sj) <= coeff_tol) continue;
            if (sj > 0.0) {
                if (j < best_k) {
                    best_k = j;
                    best_a = sj;
                } else if (j == best_k) {
                    best_a = std::max(best_a, sj);
                }
            }
            break;
        }
    }
    if (best_k == std::numeric_limits<int>::max()) return {false, k_max, 0.0};
    return {true, best_k, best_a};
}

struct MembershipVerdict {
    enum class Kind { EventuallyInside, EventuallyOutside, Undecided };
    Kind kind = Kind::Undecided;
    int cell = -1;
    int facet = -1;           // exit facet for EventuallyOutside
    DominantTerm dominant;    // its leading distance term (a > 0)
    std::string reason;

    bool inside() const { return kind == Kind::EventuallyInside; }
};

namespace detail {

/// Smallest coordinate set containing the active parameter directions and
/// closed under the field's monomial supports. Every series term (at every
/// order, including past the truncation) is supported on these coordinates.
inline std::set<int> invariant_coordinate_closure(const PowerSeries& V, const Vec& c) {
    std::set<int> W;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) W.insert(static_cast<int>(i));
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [I, b] : V.terms()) {
            bool supported = true;
            for (int i = 0; i < I.size(); ++i)
                if (I[i] > 0 && !W.count(i)) supported = false;
            if (!supported) continue;
            for (std::size_t k = 0; k < b.size(); ++k)
                if (b[k] != 0.0 && W.insert(static_cast<int>(k)).second) grew = true;
        }
    }
    return W;
}

}  // namespace detail

/// Decides whether the formal solution eventually stays inside the cell. For
/// each facet the scalar distance series  (b - a.eq) - a.x(t;c)  is analyzed:
/// a positive dominant term certifies eventual exit; a negative one (or a
/// strictly interior facet) is fine; a series that cancels to truncation
/// order is accepted as identically zero only when the facet normal vanishes
/// on the invariant coordinate closure of the parameters, otherwise the
/// verdict is Undecided("truncation-limited").
inline MembershipVerdict asymptotic_membership(const PiecewiseField& pf, const FormalSolution& sol,
                                               int cell, double tol = 1e-9) {
    if (!pf.equilibrium_point)
        throw Error("asymptotic_membership: field has no equilibrium configured");
    const Vec& eq = *pf.equilibrium_point;
    const Polytope& D = pf.cover.cells[cell];
    if (!D.contains(eq, tol))
        throw EquilibriumNotInCell("asymptotic_membership: equilibrium outside cell " +
                                   std::to_string(cell));

    std::optional<int> undecided_facet;
    for (std::size_t fi = 0; fi < D.halfspaces().size(); ++fi) {
        const auto& H = D.halfspaces()[fi];
        const double beta = H.offset() - dot(H.normal(), eq);  // d(eq, H) when positive
        if (beta < -tol) continue;  // equilibrium strictly inside this facet

        // Facet through the equilibrium: the series decides.
        LambdaSeries s = affine_functional(sol.series, scaled(H.normal(), -1.0), 0.0);
        auto dom = dominant_term(s);
        if (dom) {
            if (dom->a > 0.0)
                return {MembershipVerdict::Kind::EventuallyOutside, cell, static_cast<int>(fi),
                        *dom, "facet distance eventually positive"};
            continue;  // eventually strictly inside this facet
        }
        // Zero to truncation order: certified only by coordinate invariance.
        auto W = detail::invariant_coordinate_closure(sol.field, sol.params);
        bool certified = true;
        for (int k : W)
            if (std::abs(H.normal()[k]) > 1e-12) certified = false;
        if (!certified) undecided_facet = static_cast<int>(fi);
    }
    if (undecided_facet)
        return {MembershipVerdict::Kind::Undecided, cell, *undecided_facet, {},
                "truncation-limited"};
    return {MembershipVerdict::Kind::EventuallyInside, cell, -1, {}, ""};
}

/// Fits the solution parameters c so that x(t_c; c) matches a state observed
/// at capture time t_c (leading-term inversion plus one Newton refinement).
/// `state` is relative to the equilibrium.
inline Vec fit_parameters(const PowerSeries& V, const StableSpectrum& spectrum, const Vec& state,
                          double t_c, int order) {
    const int m = spectrum.dim();
    if (static_cast<int>(state.size()) != m) throw DimensionMismatch("fit_parameters: state size");

    Vec c(m, 0.0);
    for (int i = 0; i < m; ++i) c[i] = state[i] * std::exp(-spectrum.rates()[i] * t_c);

    auto residual = [&](const Vec& cc) {
        return sub(construct_formal_solution(V, spectrum, cc, order).series.evaluate(t_c), state);
    };

    // One Newton step with a finite-difference Jacobian.
    Vec g = residual(c);
    std::vector<Vec> Jc(m, Vec(m, 0.0));
    for (int j = 0; j < m; ++j) {
        const double delta = 1e-6 * std::max(1.0, std::abs(c[j]));
        Vec cp = c, cm = c;
        cp[j] += delta;
        cm[j] -= delta;
        Vec gp = residual(cp), gm = residual(cm);
        for (int i = 0; i < m; ++i) Jc[j][i] = (gp[i] - gm[i]) / (2.0 * delta);
    }
    // Solve J dc = g (column-major J) by Gaussian elimination with pivoting.
    std::vector<Vec> A(m, Vec(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) A[i][j] = Jc[j][i];
        A[i][m] = g[i];
    }
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        if (std::abs(A[col][col]) < 1e-14) return c;  // singular: keep the leading-term fit
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            const double w = A[r][col] / A[col][col];
            for (int j = col; j <= m; ++j) A[r][j] -= w * A[col][j];
        }
    }
    for (int i = 0; i < m; ++i) c[i] -= A[i][m] / A[i][i];
    return c;
}

/// Samples shared facets of cell pairs and checks that the two fields agree
/// there (continuity of the piecewise field across the decomposition).
struct FieldConsistencyReport {
    double max_mismatch = 0.0;
    long samples = 0;
    bool passed = true;
};

inline FieldConsistencyReport validate_field_consistency(const PiecewiseField& pf,
                                                         int samples_per_pair, std::uint64_t seed,
                                                         double tol = 1e-8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& cover = pf.cover;
    FieldConsistencyReport rep;

    for (std::size_t a = 0; a < cover.cells.size(); ++a) {
        for (std::size_t b = a + 1; b < cover.cells.size(); ++b) {
            for (const auto& H : cover.cells[a].halfspaces()) {
                // Sample points of this facet plane; keep those in both cells.
                for (int s = 0; s < samples_per_pair; ++s) {
                    Vec z(cover.dim());
                    for (int i = 0; i < cover.dim(); ++i)
                        z[i] = cover.lo[i] + (cover.hi[i] - cover.lo[i]) * unit(rng);
                    axpy(z, -H.signed_distance(z), H.normal());  // project onto the plane
                    if (!cover.cells[a].contains(z, 1e-7) || !cover.cells[b].contains(z, 1e-7))
                        continue;
                    ++rep.samples;
                    const double d = norm_inf(sub(pf.eval(static_cast<int>(a), z),
                                                  pf.eval(static_cast<int>(b), z)));
                    rep.max_mismatch = std::max(rep.max_mismatch, d);
                }
            }
        }
    }
    rep.passed = rep.max_mismatch <= tol;
    return rep;
}

}  // namespace polyflow
