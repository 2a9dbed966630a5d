#pragma once

// Half-spaces, convex polytopes (as half-space intersections with a known
// interior witness), Euclidean distances, and cell location within a finite
// closed cover.
//
// Distance conventions. A half-space is H = {x : a.x >= b} with |a| = 1.
//   signed_distance(x)   = a.x - b     positive strictly inside H, negative
//                                      outside, |.| = distance to the plane.
//   exterior_distance(x) = max(0, b - a.x)  Euclidean distance to the set H
//                                      itself (0 for points of H).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"

namespace polyflow {

class HalfSpace {
public:
    /// Normalizes the normal vector; offset is rescaled accordingly so the
    /// represented set is unchanged.
    HalfSpace(Vec normal, double offset) : normal_(std::move(normal)), offset_(offset) {
        const double n = norm2(normal_);
        if (!(n > 1e-14)) throw Error("HalfSpace: zero normal vector");
        for (double& v : normal_) v /= n;
        offset_ /= n;
    }

    const Vec& normal() const { return normal_; }
    double offset() const { return offset_; }
    int dim() const { return static_cast<int>(normal_.size()); }

    /// a.x - b. Positive strictly inside the half-space.
    double signed_distance(std::span<const double> x) const { return dot(normal_, x) - offset_; }

    /// Euclidean distance from x to the half-space (0 if x belongs to it).
    double exterior_distance(std::span<const double> x) const {
        return std::max(0.0, -signed_distance(x));
    }

    /// Distance from x to the boundary hyperplane.
    double plane_distance(std::span<const double> x) const { return std::abs(signed_distance(x)); }

    bool contains(std::span<const double> x, double tol = 0.0) const {
        return signed_distance(x) >= -tol;
    }

    /// Euclidean projection of x onto the half-space.
    Vec project(std::span<const double> x) const {
        Vec y(x.begin(), x.end());
        const double s = signed_distance(x);
        if (s < 0.0) axpy(y, -s, normal_);
        return y;
    }

private:
    Vec normal_;
    double offset_;
};

/// Intersection of finitely many half-spaces, with a designated strictly
/// interior witness point.
class Polytope {
public:
    Polytope(std::vector<HalfSpace> halfspaces, Vec witness)
        : halfspaces_(std::move(halfspaces)), witness_(std::move(witness)) {
        if (halfspaces_.empty()) throw Error("Polytope: needs at least one half-space");
        for (const auto& h : halfspaces_) {
            if (h.dim() != dim()) throw DimensionMismatch("Polytope: mixed half-space dimensions");
            if (!(h.signed_distance(witness_) > 0.0))
                throw BadWitness("Polytope: witness is not strictly interior");
        }
    }

    const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
    const Vec& witness() const { return witness_; }
    int dim() const { return static_cast<int>(witness_.size()); }

    bool contains(std::span<const double> x, double tol = 0.0) const {
        for (const auto& h : halfspaces_)
            if (!h.contains(x, tol)) return false;
        return true;
    }

    /// min_i signed_distance(p, H_i); positive iff p is strictly interior.
    double min_margin(std::span<const double> p) const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& h : halfspaces_) m = std::min(m, h.signed_distance(p));
        return m;
    }

    /// Largest violation max_i (b_i - a_i.x); <= 0 iff x belongs to the polytope.
    double max_violation(std::span<const double> x) const { return -min_margin(x); }

private:
    std::vector<HalfSpace> halfspaces_;
    Vec witness_;
};

/// max_i d(x, H_i): the largest Euclidean distance from x to a defining
/// half-space (0 for points of the polytope).
inline double max_facet_distance(std::span<const double> x, const Polytope& D) {
    double m = 0.0;
    for (const auto& h : D.halfspaces()) m = std::max(m, h.exterior_distance(x));
    return m;
}

struct ProjectionResult {
    double distance = 0.0;
    Vec closest;
    int cycles = 0;
};

/// Euclidean projection onto the polytope by Dykstra's alternating projection
/// scheme over the half-spaces. Exact for half-space intersections; after
/// convergence a short cyclic-projection polish pushes the iterate to
/// feasibility so the reported distance is measured from a point of D.
inline ProjectionResult project_onto_polytope(std::span<const double> x, const Polytope& D,
                                              double tol = 1e-10, int max_cycles = 100000) {
    if (D.contains(x, 0.0)) return {0.0, Vec(x.begin(), x.end()), 0};

    const auto& hs = D.halfspaces();
    const std::size_t k = hs.size();
    Vec y(x.begin(), x.end());
    std::vector<Vec> corr(k, Vec(x.size(), 0.0));
    const double scale = std::max(1.0, norm2(x));

    int cycle = 0;
    for (; cycle < max_cycles; ++cycle) {
        double moved = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            Vec p = add(y, corr[i]);
            Vec z = hs[i].project(p);
            corr[i] = sub(p, z);
            moved = std::max(moved, norm_inf(sub(z, y)));
            y = std::move(z);
        }
        if (moved <= tol * scale && D.max_violation(y) <= tol * scale) break;
    }
    if (cycle >= max_cycles)
        throw NonConvergence("project_onto_polytope: Dykstra did not reach tolerance " +
                             std::to_string(tol) + " within " + std::to_string(max_cycles) +
                             " cycles");

    // Feasibility polish: plain cyclic projections (no correction terms).
    for (int polish = 0; polish < 64 && D.max_violation(y) > 1e-14 * scale; ++polish)
        for (const auto& h : hs) y = h.project(y);

    return {norm2(sub(x, y)), y, cycle + 1};
}

struct Lemma14Bounds {
    double lower = 0.0;
    double mid = 0.0;
    double upper = 0.0;
};

/// Sandwich estimate relating facet distances and the polytope distance:
///   (min_i d(p, dH_i) / |x-p|) * d(x,D)  <=  max_i d(x,H_i)  <=  d(x,D)
/// for p strictly interior and x outside D. Returns the three quantities.
inline Lemma14Bounds check_lemma14(std::span<const double> p, std::span<const double> x,
                                   const Polytope& D, double tol = 1e-10) {
    if (!(D.min_margin(p) > 0.0))
        throw BadWitness("check_lemma14: p is not strictly interior to D");
    if (D.contains(x, 1e-12)) throw InteriorPoint("check_lemma14: x belongs to D");

    double min_plane = std::numeric_limits<double>::infinity();
    for (const auto& h : D.halfspaces()) min_plane = std::min(min_plane, h.plane_distance(p));

    const double upper = project_onto_polytope(x, D, tol).distance;
    const double mid = max_facet_distance(x, D);
    const double lower = min_plane / norm2(sub(x, p)) * upper;
    return {lower, mid, upper};
}

/// Finite closed cover of an axis-aligned box region by convex polytopes.
/// Cells may overlap; boundary points belong to every touching cell.
struct CellCover {
    std::vector<Polytope> cells;
    Vec lo, hi;  // bounding box of the covered domain

    int dim() const { return static_cast<int>(lo.size()); }

    CellCover(std::vector<Polytope> cells_, Vec lo_, Vec hi_)
        : cells(std::move(cells_)), lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw DimensionMismatch("CellCover: lo/hi size mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw Error("CellCover: empty bounds box");
        for (const auto& c : cells)
            if (c.dim() != dim()) throw DimensionMismatch("CellCover: cell dimension mismatch");
    }
};

/// Indices of all cells containing x within the boundary tolerance.
/// Possibly several (shared facets), possibly none (outside the cover).
inline std::vector<int> locate_cells(std::span<const double> x, const CellCover& cover,
                                     double tol = 1e-9) {
    std::vector<int> out;
    for (std::size_t i = 0; i < cover.cells.size(); ++i)
        if (cover.cells[i].contains(x, tol)) out.push_back(static_cast<int>(i));
    return out;
}

struct CoverReport {
    double fraction = 0.0;
    long samples = 0;
    std::optional<Vec> uncovered_witness;
    bool passed = false;
};

/// Monte Carlo check that the cells cover the bounds box: samples uniform
/// points and reports the covered fraction (passes iff it equals 1).
inline CoverReport validate_cover(const CellCover& cover, long samples, std::uint64_t seed,
                                  double tol = 1e-9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CoverReport rep;
    rep.samples = samples;
    long covered = 0;
    for (long s = 0; s < samples; ++s) {
        Vec x(cover.dim());
        for (int i = 0; i < cover.dim(); ++i)
            x[i] = cover.lo[i] + (cover.hi[i] - cover.lo[i]) * unit(rng);
        if (!locate_cells(x, cover, tol).empty()) {
            ++covered;
        } else if (!rep.uncovered_witness) {
            rep.uncovered_witness = x;
        }
    }
    rep.fraction = samples == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(samples);
    rep.passed = covered == samples && samples > 0;
    return rep;
}

}  // namespace polyflow
