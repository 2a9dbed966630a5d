#pragma once

// Discrete curvature flow with edge flips on closed triangulated surfaces.
// Per-vertex conformal factors u scale edge lengths as
//   l_ij = e^{(u_i + u_j)/2} l0_ij,
// vertex curvature is the angle defect K_i = 2 pi - sum of incident angles,
// and the flow drives curvature to its average: u' = F(u) = Kbar 1 - K.
//
// Edges are structural objects referenced by id from faces (a flip can create
// a second edge between the same vertex pair, e.g. any flip on tetrahedron
// topology, so vertex pairs do not identify edges). A flipped edge gets its
// new reference length from the planar layout of the two adjacent triangles,
// which keeps the piecewise-flat metric (and hence every angle sum)
// unchanged across the flip.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/ode.hpp"

namespace polyflow {

struct MeshEdge {
    int v0 = -1, v1 = -1;
    double ref_length = 0.0;
};

struct MeshFace {
    std::array<int, 3> v{};  // oriented vertex triple
    std::array<int, 3> e{};  // e[k] joins v[k] and v[(k+1)%3]
};

class TriangulatedSurface {
public:
    /// Builds the edge structure from oriented faces and reference lengths
    /// keyed by unordered vertex pair. Requires a closed oriented surface:
    /// every undirected edge appears in exactly two faces, once per direction.
    TriangulatedSurface(int n_vertices, const std::vector<std::array<int, 3>>& face_vertices,
                        const std::map<std::pair<int, int>, double>& ref_lengths)
        : n_(n_vertices) {
        std::map<std::pair<int, int>, int> edge_ids;
        auto edge_of = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = edge_ids.find(key);
            if (it != edge_ids.end()) return it->second;
            auto lt = ref_lengths.find(key);
            if (lt == ref_lengths.end())
                throw ConfigError("mesh: missing reference length for edge " +
                                  std::to_string(key.first) + "-" + std::to_string(key.second));
            if (!(lt->second > 0.0)) throw ConfigError("mesh: nonpositive reference length");
            edges_.push_back({key.first, key.second, lt->second});
            const int id = static_cast<int>(edges_.size()) - 1;
            edge_ids.emplace(key, id);
            return id;
        };

        for (const auto& fv : face_vertices) {
            MeshFace f;
            f.v = fv;
            for (int k = 0; k < 3; ++k) {
                if (fv[k] < 0 || fv[k] >= n_) throw ConfigError("mesh: vertex index out of range");
                f.e[k] = edge_of(fv[k], fv[(k + 1) % 3]);
            }
            faces_.push_back(f);
        }

        edge_faces_.assign(edges_.size(), {-1, -1});
        std::map<std::pair<int, int>, int> directed;  // directed edge use counts
        for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
            const auto& f = faces_[fi];
            for (int k = 0; k < 3; ++k) {
                ++directed[{f.v[k], f.v[(k + 1) % 3]}];
                auto& inc = edge_faces_[f.e[k]];
                if (inc[0] < 0)
                    inc[0] = static_cast<int>(fi);
                else if (inc[1] < 0)
                    inc[1] = static_cast<int>(fi);
                else
                    throw ConfigError("mesh: edge shared by more than two faces");
            }
        }
        for (const auto& inc : edge_faces_)
            if (inc[1] < 0) throw ConfigError("mesh: surface is not closed (boundary edge)");
        for (const auto& [de, count] : directed)
            if (count != 1) throw ConfigError("mesh: inconsistent orientation");
        if (euler_characteristic() % 2 != 0)
            throw ConfigError("mesh: odd Euler characteristic");
        for (const auto& f : faces_) {
            const double a = edges_[f.e[0]].ref_length;
            const double b = edges_[f.e[1]].ref_length;
            const double c = edges_[f.e[2]].ref_length;
            if (!(a + b > c && b + c > a && c + a > b))
                throw DegenerateTriangle("mesh: reference lengths violate the triangle inequality");
        }
    }

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int face_count() const { return static_cast<int>(faces_.size()); }
    int euler_characteristic() const { return n_ - edge_count() + face_count(); }

    const std::vector<MeshEdge>& edges() const { return edges_; }
    const std::vector<MeshFace>& faces() const { return faces_; }
    const std::array<int, 2>& incident_faces(int edge) const { return edge_faces_[edge]; }

private:
    friend class ConformalState;

    int n_;
    std::vector<MeshEdge> edges_;
    std::vector<MeshFace> faces_;
    std::vector<std::array<int, 2>> edge_faces_;
};

namespace detail {

inline double corner_angle(double opposite, double adj1, double adj2) {
    if (!(adj1 + adj2 > opposite && adj2 + opposite > adj1 && opposite + adj1 > adj2))
        throw DegenerateTriangle("triangle inequality violated (lengths " +
                                 std::to_string(opposite) + ", " + std::to_string(adj1) + ", " +
                                 std::to_string(adj2) + ")");
    const double c = std::clamp((adj1 * adj1 + adj2 * adj2 - opposite * opposite) /
                                    (2.0 * adj1 * adj2),
                                -1.0, 1.0);
    return std::acos(c);
}

}  // namespace detail

/// Scaled edge length under conformal factors u.
inline double conformal_length(const TriangulatedSurface& mesh, const Vec& u, int edge) {
    const auto& e = mesh.edges()[edge];
    return std::exp(0.5 * (u[e.v0] + u[e.v1])) * e.ref_length;
}

/// Angle defects K_i = 2 pi - sum of angles at i, by the law of cosines.
inline Vec curvatures(const TriangulatedSurface& mesh, const Vec& u) {
    if (static_cast<int>(u.size()) != mesh.vertex_count())
        throw DimensionMismatch("curvatures: factor count");
    Vec K(mesh.vertex_count(), 2.0 * std::numbers::pi);
    for (const auto& f : mesh.faces()) {
        const double l01 = conformal_length(mesh, u, f.e[0]);
        const double l12 = conformal_length(mesh, u, f.e[1]);
        const double l20 = conformal_length(mesh, u, f.e[2]);
        K[f.v[0]] -= detail::corner_angle(l12, l01, l20);
        K[f.v[1]] -= detail::corner_angle(l20, l01, l12);
        K[f.v[2]] -= detail::corner_angle(l01, l12, l20);
    }
    return K;
}

/// F(u) = Kbar 1 - K; zero-sum by construction.
inline Vec flow_field(const TriangulatedSurface& mesh, const Vec& u) {
    Vec K = curvatures(mesh, u);
    double mean = 0.0;
    for (double k : K) mean += k;
    mean /= static_cast<double>(K.size());
    Vec F(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) F[i] = mean - K[i];
    return F;
}

inline double max_curvature_deviation(const TriangulatedSurface& mesh, const Vec& u) {
    Vec K = curvatures(mesh, u);
    double mean = 0.0;
    for (double k : K) mean += k;
    mean /= static_cast<double>(K.size());
    double dev = 0.0;
    for (double k : K) dev = std::max(dev, std::abs(k - mean));
    return dev;
}

/// |K - Kbar|_2^2, the quantity the flow descends.
inline double curvature_deviation_sq(const TriangulatedSurface& mesh, const Vec& u) {
    Vec K = curvatures(mesh, u);
    double mean = 0.0;
    for (double k : K) mean += k;
    mean /= static_cast<double>(K.size());
    double sq = 0.0;
    for (double k : K) sq += (k - mean) * (k - mean);
    return sq;
}

struct FlipEvent {
    double t = 0.0;
    int v0 = -1, v1 = -1;  // endpoints of the flipped edge before the flip
};

/// Mutable flow state: conformal factors plus the current triangulation.
class ConformalState {
public:
    ConformalState(TriangulatedSurface mesh, Vec u) : mesh_(std::move(mesh)), u_(std::move(u)) {
        if (static_cast<int>(u_.size()) != mesh_.vertex_count())
            throw DimensionMismatch("ConformalState: one factor per vertex");
        curvatures(mesh_, u_);  // validates triangle inequalities
    }

    const TriangulatedSurface& mesh() const { return mesh_; }
    const Vec& u() const { return u_; }
    void set_u(Vec u) { u_ = std::move(u); }

    Vec curvature() const { return curvatures(mesh_, u_); }
    Vec flow() const { return flow_field(mesh_, u_); }
    double deviation() const { return max_curvature_deviation(mesh_, u_); }
    const std::vector<FlipEvent>& flip_log() const { return flip_log_; }

    /// Number of edges whose hinge violates the Delaunay angle condition
    /// (sum of the two opposite angles > pi + tol). Ties are not violations.
    int delaunay_violations(double tol = 1e-12) const {
        int count = 0;
        for (int e = 0; e < mesh_.edge_count(); ++e)
            if (hinge_angle_sum(e) > std::numbers::pi + tol) ++count;
        return count;
    }

    /// Flips Delaunay-violating edges until none remains; returns the number
    /// of flips performed. The cap n (n+10)^2 guards against cycling.
    int flip_to_delaunay(double t_now) {
        const int n = mesh_.vertex_count();
        const long cap = static_cast<long>(n) * (n + 10) * (n + 10);
        int total = 0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int e = 0; e < mesh_.edge_count(); ++e) {
                if (!(hinge_angle_sum(e) > std::numbers::pi + 1e-12)) continue;
                if (!flip_edge(e, t_now)) continue;  // unflippable configuration
                ++total;
                changed = true;
                if (total > cap)
                    throw FlipLoop("flip_to_delaunay: exceeded " + std::to_string(cap) +
                                   " flips; inconsistent geometry");
            }
        }
        return total;
    }

private:
    /// Sum of the two angles opposite the edge in its hinge.
    double hinge_angle_sum(int e) const {
        const auto& inc = mesh_.incident_faces(e);
        if (inc[0] == inc[1]) return 0.0;
        return opposite_angle(inc[0], e) + opposite_angle(inc[1], e);
    }

    double opposite_angle(int fi, int e) const {
        const auto& f = mesh_.faces()[fi];
        int s = 0;
        while (f.e[s] != e) ++s;
        const double a = conformal_length(mesh_, u_, f.e[s]);
        const double b = conformal_length(mesh_, u_, f.e[(s + 1) % 3]);
        const double c = conformal_length(mesh_, u_, f.e[(s + 2) % 3]);
        return detail::corner_angle(a, b, c);
    }

    bool flip_edge(int e, double t_now) {
        auto& mesh = mesh_;
        const auto inc = mesh.edge_faces_[e];
        const int f1i = inc[0], f2i = inc[1];
        if (f1i == f2i) return false;
        MeshFace& f1 = mesh.faces_[f1i];
        MeshFace& f2 = mesh.faces_[f2i];

        int s1 = 0;
        while (f1.e[s1] != e) ++s1;
        int s2 = 0;
        while (f2.e[s2] != e) ++s2;
        const int i = f1.v[s1], j = f1.v[(s1 + 1) % 3], k = f1.v[(s1 + 2) % 3];
        const int l = f2.v[(s2 + 2) % 3];
        if (f2.v[s2] != j || f2.v[(s2 + 1) % 3] != i)
            throw Error("flip_edge: inconsistent orientation");
        if (k == l) return false;  // flip would create a loop edge

        const double lij = conformal_length(mesh, u_, e);
        const double lik = conformal_length(mesh, u_, f1.e[(s1 + 2) % 3]);
        const double ljk = conformal_length(mesh, u_, f1.e[(s1 + 1) % 3]);
        const double lil = conformal_length(mesh, u_, f2.e[(s2 + 1) % 3]);
        const double ljl = conformal_length(mesh, u_, f2.e[(s2 + 2) % 3]);

        // Lay the hinge out in the plane: i at the origin, j on the axis,
        // k above, l below; the new length is the diagonal k-l.
        const double xk = (lij * lij + lik * lik - ljk * ljk) / (2.0 * lij);
        const double yk = std::sqrt(std::max(0.0, lik * lik - xk * xk));
        const double xl = (lij * lij + lil * lil - ljl * ljl) / (2.0 * lij);
        const double yl = -std::sqrt(std::max(0.0, lil * lil - xl * xl));
        const double lkl = std::hypot(xk - xl, yk - yl);

        const int e_il = f2.e[(s2 + 1) % 3];
        const int e_lj = f2.e[(s2 + 2) % 3];
        const int e_jk = f1.e[(s1 + 1) % 3];
        const int e_ki = f1.e[(s1 + 2) % 3];

        mesh.edges_[e].v0 = k;
        mesh.edges_[e].v1 = l;
        mesh.edges_[e].ref_length = lkl / std::exp(0.5 * (u_[k] + u_[l]));

        f1.v = {i, l, k};
        f1.e = {e_il, e, e_ki};
        f2.v = {l, j, k};
        f2.e = {e_lj, e_jk, e};

        auto replace_face = [&](int edge, int from, int to) {
            auto& ef = mesh.edge_faces_[edge];
            if (ef[0] == from)
                ef[0] = to;
            else if (ef[1] == from)
                ef[1] = to;
        };
        replace_face(e_il, f2i, f1i);
        replace_face(e_jk, f1i, f2i);

        flip_log_.push_back({t_now, i, j});
        return true;
    }

    TriangulatedSurface mesh_;
    Vec u_;
    std::vector<FlipEvent> flip_log_;
};

/// The analytic coordinate change u -> e^{-2u}, componentwise.
inline Vec exp_coordinates(const Vec& u) {
    Vec w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = std::exp(-2.0 * u[i]);
    return w;
}

struct YamabeSample {
    double t = 0.0;
    Vec u;
    double max_deviation = 0.0;  // |K - Kbar|_inf
    double deviation_sq = 0.0;   // |K - Kbar|_2^2
    long flips = 0;              // cumulative
};

struct YamabeRunResult {
    ConformalState state;
    long total_flips = 0;
    std::vector<YamabeSample> samples;
};

/// Integrates u' = F(u) adaptively, flipping to Delaunay after every accepted
/// step. The zero-sum of F conserves sum(u).
inline YamabeRunResult run_flow(ConformalState state, double t_end, const OdeOptions& opt = {}) {
    YamabeRunResult out{std::move(state), 0, {}};
    auto rhs = [&out](double, const Vec& u) { return flow_field(out.state.mesh(), u); };
    out.samples.push_back({0.0, out.state.u(), out.state.deviation(),
                           curvature_deviation_sq(out.state.mesh(), out.state.u()), 0});

    double t = 0.0;
    double h = opt.h_init;
    long steps = 0;
    while (t < t_end - 1e-15 * std::max(1.0, t_end)) {
        if (++steps > opt.max_steps) throw Error("run_flow: step limit exceeded");
        auto st = rk45_accepted_step(rhs, t, out.state.u(), h, t_end - t, opt);
        t += st.h_used;
        h = st.h_next;
        out.state.set_u(std::move(st.x));
        out.total_flips += out.state.flip_to_delaunay(t);
        out.samples.push_back({t, out.state.u(), out.state.deviation(),
                               curvature_deviation_sq(out.state.mesh(), out.state.u()),
                               out.total_flips});
    }
    return out;
}

}  // namespace polyflow
