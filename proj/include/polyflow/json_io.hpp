#pragma once

// File formats.
//   cover:   {"cells":[{"halfspaces":[{"a":[...],"b":r},...],"witness":[...]}, ...],
//             "bounds":{"lo":[...],"hi":[...]}}
//            Normals may be unnormalized; normalization happens on load.
//   series:  {"in_dim":m,"out_dim":n,"order":N,"terms":[{"I":[...],"b":[...]},...]}
//   lambda:  {"rates":[...],"order":N,"terms":[{"J":[...],"poly":[[...],...]},...]}
//   fields:  {"fields":[series,...],"equilibrium":{"point":[...],"rates":[...]}}
//   mesh:    {"vertices":n,"faces":[[i,j,k],...],"ref_lengths":{"i-j":l,...}}
// CSV output uses '.' decimals, %.17g, newline-terminated lines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/flow_tracer.hpp"
#include "polyflow/formal_solver.hpp"
#include "polyflow/geometry.hpp"
#include "polyflow/lambda_series.hpp"
#include "polyflow/power_series.hpp"
#include "polyflow/yamabe.hpp"

namespace polyflow {

using json = nlohmann::json;

namespace detail {

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("cannot parse JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// -- geometry -----------------------------------------------------------------

inline CellCover cover_from_json(const json& j) {
    std::vector<Polytope> cells;
    for (const auto& jc : j.at("cells")) {
        std::vector<HalfSpace> hs;
        for (const auto& jh : jc.at("halfspaces"))
            hs.emplace_back(jh.at("a").get<Vec>(), jh.at("b").get<double>());
        cells.emplace_back(std::move(hs), jc.at("witness").get<Vec>());
    }
    return CellCover(std::move(cells), j.at("bounds").at("lo").get<Vec>(),
                     j.at("bounds").at("hi").get<Vec>());
}

inline json cover_to_json(const CellCover& cover) {
    json cells = json::array();
    for (const auto& c : cover.cells) {
        json hs = json::array();
        for (const auto& h : c.halfspaces()) hs.push_back({{"a", h.normal()}, {"b", h.offset()}});
        cells.push_back({{"halfspaces", std::move(hs)}, {"witness", c.witness()}});
    }
    return {{"cells", std::move(cells)}, {"bounds", {{"lo", cover.lo}, {"hi", cover.hi}}}};
}

inline CellCover load_cover(const std::filesystem::path& path) {
    return cover_from_json(detail::load_json_file(path));
}

// -- series ---------------------------------------------------------------------

inline PowerSeries power_series_from_json(const json& j) {
    PowerSeries s(j.at("in_dim").get<int>(), j.at("out_dim").get<int>(), j.at("order").get<int>());
    for (const auto& jt : j.at("terms"))
        s.set_coeff(MultiIndex(jt.at("I").get<std::vector<int>>()), jt.at("b").get<Vec>());
    return s;
}

inline json power_series_to_json(const PowerSeries& s) {
    json terms = json::array();
    for (const auto& [I, b] : s.terms()) terms.push_back({{"I", I.exponents()}, {"b", b}});
    return {{"in_dim", s.in_dim()},
            {"out_dim", s.out_dim()},
            {"order", s.order()},
            {"terms", std::move(terms)}};
}

inline LambdaSeries lambda_series_from_json(const json& j) {
    const Vec rates = j.at("rates").get<Vec>();
    int out_dim = 1;
    if (j.contains("out_dim")) out_dim = j.at("out_dim").get<int>();
    // Infer the output dimension from the first term when not given.
    if (!j.contains("out_dim") && !j.at("terms").empty())
        out_dim = static_cast<int>(j.at("terms").front().at("poly").front().size());
    LambdaSeries s(rates, out_dim, j.at("order").get<int>());
    for (const auto& jt : j.at("terms")) {
        std::vector<Vec> coeffs;
        for (const auto& row : jt.at("poly")) coeffs.push_back(row.get<Vec>());
        s.set_term(MultiIndex(jt.at("J").get<std::vector<int>>()),
                   Poly::from_coeffs(std::move(coeffs), out_dim));
    }
    return s;
}

inline json lambda_series_to_json(const LambdaSeries& s) {
    json terms = json::array();
    for (const auto& [J, P] : s.terms()) {
        json poly = json::array();
        for (int d = 0; d <= P.degree(); ++d) poly.push_back(P.coeff(d));
        terms.push_back({{"J", J.exponents()}, {"poly", std::move(poly)}});
    }
    return {{"rates", s.rates()},
            {"out_dim", s.out_dim()},
            {"order", s.order()},
            {"terms", std::move(terms)}};
}

inline json formal_solution_to_json(const FormalSolution& sol, double residual) {
    json resonances = json::array();
    for (const auto& [J, i] : sol.resonance_log)
        resonances.push_back({{"J", J.exponents()}, {"i", i}});
    return {{"series", lambda_series_to_json(sol.series)},
            {"c", sol.params},
            {"rates", sol.spectrum.rates()},
            {"resonance_log", std::move(resonances)},
            {"warnings", sol.warnings},
            {"residual", residual}};
}

// -- piecewise field --------------------------------------------------------------

inline PiecewiseField load_piecewise_field(const std::filesystem::path& fields_path,
                                           CellCover cover) {
    const json j = detail::load_json_file(fields_path);
    std::vector<PowerSeries> fields;
    for (const auto& jf : j.at("fields")) fields.push_back(power_series_from_json(jf));
    std::optional<Vec> eq_point;
    std::optional<StableSpectrum> eq_spectrum;
    if (j.contains("equilibrium")) {
        eq_point = j.at("equilibrium").at("point").get<Vec>();
        eq_spectrum = StableSpectrum(j.at("equilibrium").at("rates").get<Vec>());
    }
    return PiecewiseField(std::move(cover), std::move(fields), std::move(eq_point),
                          std::move(eq_spectrum));
}

// -- mesh ---------------------------------------------------------------------------

inline TriangulatedSurface load_mesh(const std::filesystem::path& path) {
    const json j = detail::load_json_file(path);
    const int n = j.at("vertices").get<int>();
    std::vector<std::array<int, 3>> faces;
    for (const auto& jf : j.at("faces"))
        faces.push_back({jf.at(0).get<int>(), jf.at(1).get<int>(), jf.at(2).get<int>()});
    std::map<std::pair<int, int>, double> lengths;
    for (const auto& [key, val] : j.at("ref_lengths").items()) {
        const auto dash = key.find('-');
        if (dash == std::string::npos)
            throw ConfigError("mesh: edge key must look like \"i-j\": " + key);
        const int a = std::stoi(key.substr(0, dash));
        const int b = std::stoi(key.substr(dash + 1));
        lengths[std::minmax(a, b)] = val.get<double>();
    }
    return TriangulatedSurface(n, faces, lengths);
}

// -- CSV / sidecar output --------------------------------------------------------------

inline void write_trace_csv(const FlowTrace& tr, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path.string());
    const std::size_t m = tr.states.empty() ? 0 : tr.states.front().size();
    out << "t";
    for (std::size_t i = 1; i <= m; ++i) out << ",x" << i;
    out << ",cell\n";
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
        out << detail::fmt(tr.times[s]);
        for (double v : tr.states[s]) out << ',' << detail::fmt(v);
        out << ',' << tr.cells[s] << '\n';
    }
}

inline void write_switches_json(const FlowTrace& tr, const std::filesystem::path& path) {
    json switches = json::array();
    for (const auto& s : tr.switches) switches.push_back({{"t", s.t}, {"from", s.from}, {"to", s.to}});
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path.string());
    out << json{{"switches", std::move(switches)}}.dump(2) << '\n';
}

inline void write_yamabe_csv(const YamabeRunResult& run, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path.string());
    const std::size_t n = run.samples.empty() ? 0 : run.samples.front().u.size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i) out << ",u" << i;
    out << ",max_curvature_deviation,cumulative_flips\n";
    for (const auto& s : run.samples) {
        out << detail::fmt(s.t);
        for (double v : s.u) out << ',' << detail::fmt(v);
        out << ',' << detail::fmt(s.max_deviation) << ',' << s.flips << '\n';
    }
}

// -- run configuration --------------------------------------------------------------------

/// CLI run configuration; file paths resolve relative to the config file.
struct RunConfig {
    std::filesystem::path base_dir;
    std::optional<std::filesystem::path> cover_path, fields_path, mesh_path;
    std::optional<Vec> x0, c, u0;
    double t_end = 10.0;
    int order = 8;
    double tol = 1e-9;
    double capture = 1e-3;
    std::uint64_t seed = 0;
    int cell = 0;
    long switch_cap = 10000;
    std::optional<std::string> out_dir;

    static RunConfig load(const std::filesystem::path& path) {
        const json j = detail::load_json_file(path);
        RunConfig cfg;
        cfg.base_dir = path.has_parent_path() ? path.parent_path() : ".";
        auto resolve = [&](const std::string& key) -> std::optional<std::filesystem::path> {
            if (!j.contains(key)) return std::nullopt;
            std::filesystem::path p = j.at(key).get<std::string>();
            if (p.is_relative()) p = cfg.base_dir / p;
            if (!std::filesystem::exists(p))
                throw ConfigError("config " + path.string() + ": referenced file does not exist: " +
                                  p.string());
            return p;
        };
        cfg.cover_path = resolve("cover");
        cfg.fields_path = resolve("fields");
        cfg.mesh_path = resolve("mesh");
        if (j.contains("x0")) cfg.x0 = j.at("x0").get<Vec>();
        if (j.contains("c")) cfg.c = j.at("c").get<Vec>();
        if (j.contains("u0")) cfg.u0 = j.at("u0").get<Vec>();
        if (j.contains("t_end")) cfg.t_end = j.at("t_end").get<double>();
        if (j.contains("order")) cfg.order = j.at("order").get<int>();
        if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
        if (j.contains("capture")) cfg.capture = j.at("capture").get<double>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("cell")) cfg.cell = j.at("cell").get<int>();
        if (j.contains("switch_cap")) cfg.switch_cap = j.at("switch_cap").get<long>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
        if (!(capture >= 0.0)) throw ConfigError("config: capture must be nonnegative");
        if (order < 2) throw ConfigError("config: order must be >= 2");
        if (!(t_end > 0.0)) throw ConfigError("config: t_end must be positive");
    }
};

}  // namespace polyflow
