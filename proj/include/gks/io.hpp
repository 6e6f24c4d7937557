#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gks/kernel_builder.hpp"

namespace gks {

using ordered_json = nlohmann::ordered_json;

// Cell complex as JSON; rational chart coordinates serialize as exact
// strings, so the round trip is bit-exact.
inline ordered_json cell_complex_to_json(const CellComplex& X) {
    ordered_json j;
    j["cells"] = ordered_json::array();
    for (index_t c = 0; c < X.size(); ++c)
        j["cells"].push_back(ordered_json{{"id", c}, {"dim", X.cell_dim[c]}});
    j["incidence"] = ordered_json::array();
    for (index_t c = 0; c < X.size(); ++c)
        for (auto& [f, s] : X.facets[c]) j["incidence"].push_back(ordered_json::array({c, f, s}));
    j["points"] = ordered_json::object();
    j["time"] = ordered_json::object();
    j["chart"] = ordered_json::object();
    for (index_t c = 0; c < X.size(); ++c) {
        if (X.cell_dim[c] != 0) continue;
        if (!X.vtx_point[c].empty()) j["points"][std::to_string(c)] = X.vtx_point[c];
        if (!X.vtx_chart[c].empty()) {
            auto arr = ordered_json::array();
            for (auto& r : X.vtx_chart[c]) arr.push_back(r.str());
            j["chart"][std::to_string(c)] = arr;
            // time convention: charts are (.., t, ..) per axis_names
            for (size_t ax = 0; ax < X.axis_names.size(); ++ax)
                if (X.axis_names[ax] == "t") j["time"][std::to_string(c)] = X.vtx_chart[c][ax].str();
        }
    }
    j["axes"] = X.axis_names;
    return j;
}

inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(std::stoll(s));
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

inline CellComplex cell_complex_from_json(const ordered_json& j) {
    CellComplex X;
    for (auto& c : j.at("cells")) X.add_cell(c.at("dim").get<uint8_t>());
    for (auto& e : j.at("incidence"))
        X.facets[e.at(0).get<index_t>()].emplace_back(e.at(1).get<index_t>(), e.at(2).get<int8_t>());
    X.vtx_chart.assign(X.size(), {});
    X.vtx_point.assign(X.size(), {});
    if (j.contains("axes")) X.axis_names = j.at("axes").get<std::vector<std::string>>();
    if (j.contains("points"))
        for (auto& [key, val] : j.at("points").items())
            X.vtx_point[std::stoul(key)] = val.get<std::vector<double>>();
    if (j.contains("chart"))
        for (auto& [key, val] : j.at("chart").items()) {
            std::vector<Rat> chart;
            for (auto& s : val) chart.push_back(rat_from_string(s.get<std::string>()));
            X.vtx_chart[std::stoul(key)] = std::move(chart);
        }
    X.finalize();
    return X;
}

// Chain complex as JSON: degree range, dimensions, and per-degree matrix
// dumps in the text format of dump_matrix.
template <class F>
ordered_json chain_complex_to_json(const ChainComplex<F>& c) {
    ordered_json j;
    j["lo"] = c.lo;
    j["dims"] = c.dims;
    j["matrices"] = ordered_json::array();
    for (auto& m : c.d) j["matrices"].push_back(dump_matrix(m));
    return j;
}

template <class F>
ChainComplex<F> chain_complex_from_json(const F& field, const ordered_json& j) {
    ChainComplex<F> c(field);
    c.lo = j.at("lo").get<int>();
    c.dims = j.at("dims").get<std::vector<index_t>>();
    for (auto& m : j.at("matrices")) c.d.push_back(load_matrix(field, m.get<std::string>()));
    c.validate();
    return c;
}

// Sheaf dump: summand list (star center cell, degree shift) plus differential
// coefficient triples.
template <class F>
ordered_json sheaf_to_json(const CellularSheaf<F>& A) {
    ordered_json j;
    j["summands"] = ordered_json::array();
    for (auto& g : A.gens) j["summands"].push_back(ordered_json{{"star", g.cell}, {"degree", g.degree}});
    j["differential"] = ordered_json::array();
    for (index_t i = 0; i < A.gens.size(); ++i)
        for (auto& [t, v] : A.dcols[i])
            j["differential"].push_back(ordered_json::array({i, t, A.field.to_string(v)}));
    return j;
}

// Stalk-table CSV: cell id, degree, rank.
template <class F>
std::string stalk_table_csv(const CellularSheaf<F>& A) {
    SheafCellIndex<F> idx(A);
    std::ostringstream os;
    os << "cell,degree,rank\n";
    for (index_t c = 0; c < A.X->size(); ++c)
        for (auto& [k, r] : stalk(A, idx, c)) os << c << "," << k << "," << r << "\n";
    return os.str();
}

// Sampled-geometry CSV: vertex id, chart, distance, time.
inline std::string geometry_csv(const KernelModel& M) {
    std::ostringstream os;
    os << "vertex,dist,time\n";
    for (index_t c = 0; c < M.X.size(); ++c)
        if (M.X.cell_dim[c] == 0) os << c << "," << M.vdist[c].str() << "," << M.vtime[c].str() << "\n";
    return os.str();
}

// Run report with a stable key order; identical configs and seeds serialize
// byte-identically.
template <class F>
ordered_json report_json(const KernelAssembly<F>& A,
                         const std::vector<std::pair<int, SliceCheck<F>>>& slices = {}) {
    ordered_json j;
    j["space"] = A.cfg.space == Space::sphere ? "sphere" : "projective";
    j["n"] = A.cfg.n;
    j["field"] = field_tag_of(A.field);
    j["mesh"] = A.cfg.mesh;
    j["window"] = A.cfg.window;
    j["seed"] = A.cfg.seed;
    j["ext_table"] = ordered_json::array();
    for (auto& [i, tab] : A.diag.ext_table) {
        ordered_json row;
        row["i"] = i;
        row["ranks"] = ordered_json::object();
        for (auto& [k, r] : tab) row["ranks"][std::to_string(k)] = r;
        j["ext_table"].push_back(row);
    }
    j["t0_check"] = A.diag.t0_check;
    j["ss_samples"] = A.diag.ss_samples;
    j["ss_mismatches"] = ordered_json::array();
    for (auto& m : A.diag.ss_mismatches) {
        ordered_json row;
        row["cell"] = m.cell;
        row["class"] = m.dir_class;
        row["got"] = m.got;
        row["expected"] = m.expected;
        j["ss_mismatches"].push_back(row);
    }
    j["slice_checks"] = ordered_json::array();
    for (auto& [k, sc] : slices) {
        ordered_json row;
        row["k"] = k;
        row["constant_on_diagonal"] = sc.constant_on_diag;
        row["constant_off_diagonal"] = sc.constant_off_diag;
        row["diagonal_value"] = ordered_json::object();
        for (auto& [deg, r] : sc.diag_value) row["diagonal_value"][std::to_string(deg)] = r;
        row["off_value"] = ordered_json::object();
        for (auto& [deg, r] : sc.off_value) row["off_value"][std::to_string(deg)] = r;
        j["slice_checks"].push_back(row);
    }
    j["notes"] = A.diag.notes;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace gks
