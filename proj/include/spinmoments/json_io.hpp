#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmoments/complex_matrix.hpp"
#include "spinmoments/criteria.hpp"
#include "spinmoments/errors.hpp"
#include "spinmoments/moments.hpp"
#include "spinmoments/sepbound.hpp"
#include "spinmoments/states.hpp"
#include "spinmoments/stats.hpp"

namespace spinmoments {

using json = nlohmann::json;

inline json to_json(const ComplexMatrix& m) {
    std::vector<double> re, im;
    re.reserve(m.rows() * m.cols());
    im.reserve(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != rows * cols || im.size() != rows * cols)
        throw ShapeMismatch("matrix_from_json: re/im length != rows*cols");
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j2 = 0; j2 < cols; ++j2)
            m(i, j2) = cplx(re[i * cols + j2], im[i * cols + j2]);
    return m;
}

inline json to_json(const DensityMatrix& rho) {
    json j = to_json(rho.matrix);
    j["n_parties"] = rho.structure.n_parties;
    j["local_dim"] = rho.structure.local_dim;
    return j;
}

inline json to_json(const PureState& psi) {
    std::vector<double> re, im;
    re.reserve(psi.amplitudes.size());
    im.reserve(psi.amplitudes.size());
    for (const cplx& a : psi.amplitudes) {
        re.push_back(a.real());
        im.push_back(a.imag());
    }
    return json{{"re", re},
                {"im", im},
                {"n_parties", psi.structure.n_parties},
                {"local_dim", psi.structure.local_dim}};
}

inline DensityMatrix density_from_json(const json& j) {
    DensityMatrix rho{matrix_from_json(j),
                      PartyStructure{j.at("n_parties").get<int>(), j.at("local_dim").get<int>()}};
    rho.validate();
    return rho;
}

inline PureState pure_from_json(const json& j) {
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size()) throw ShapeMismatch("pure_from_json: re/im length mismatch");
    PureState psi;
    psi.structure = PartyStructure{j.at("n_parties").get<int>(), j.at("local_dim").get<int>()};
    psi.amplitudes.reserve(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) psi.amplitudes.emplace_back(re[i], im[i]);
    psi.validate();
    return psi;
}

// Accepts either a density-matrix or a pure-state file.
inline DensityMatrix load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OutOfRange("load_state: cannot open " + path);
    json j;
    in >> j;
    if (j.contains("rows")) return density_from_json(j);
    return pure_from_json(j).to_density();
}

inline json to_json(const MomentEstimate& est, const MomentSpec& spec, std::uint64_t seed) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"samples", est.samples},
                {"mode", to_string(est.mode)},
                {"spec", {{"alpha", spec.alpha}, {"beta", spec.beta}, {"gamma", spec.gamma}, {"r", spec.order}}},
                {"seed", seed}};
}

inline json to_json(const CriterionVerdict& v) {
    return json{{"criterion", v.criterion}, {"value", v.value},   {"bound", v.bound},
                {"violated", v.violated},   {"margin", v.margin}, {"diagnostics", v.diagnostics}};
}

inline json to_json(const OptimizationResult& res, int n, double conjectured) {
    json angles = json::array();
    for (const auto& a : res.best_angles.angles) angles.push_back({a[0], a[1]});
    return json{{"n", n},
                {"best_value", res.best_value},
                {"conjectured", conjectured},
                {"gap", conjectured - res.best_value},
                {"angles", angles},
                {"restarts", res.restarts},
                {"converged_fraction", res.converged_fraction}};
}

namespace detail {

inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace detail

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
    std::string out = "x,y,t_abs,fs_bound,bisep_bound,ppt_all,region\n";
    for (const auto& r : rows) {
        out += detail::fmt_double(r.x) + ',' + detail::fmt_double(r.y) + ',' +
               detail::fmt_double(r.t_abs) + ',' + detail::fmt_double(r.fs_bound) + ',' +
               detail::fmt_double(r.bisep_bound) + ',' + (r.ppt_all ? "1" : "0") + ',' +
               r.region + '\n';
    }
    return out;
}

inline std::string budget_csv(const std::vector<MeasurementBudget>& rows) {
    std::string out = "K,M,M_tot,delta_error,gamma_cl,N,p\n";
    for (const auto& b : rows) {
        out += std::to_string(b.k) + ',' + std::to_string(b.m) + ',' + std::to_string(b.m_tot) +
               ',' + detail::fmt_double(b.delta_error) + ',' + detail::fmt_double(b.gamma_cl) +
               ',' + std::to_string(b.n) + ',' + detail::fmt_double(b.p) + '\n';
    }
    return out;
}

inline std::string pstar_csv(int n_max) {
    std::string out = "N,p_star\n";
    for (int n = 2; n <= n_max; ++n)
        out += std::to_string(n) + ',' + detail::fmt_double(dicke_two_ensemble_analytic(n, 1.0).p_star) + '\n';
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutOfRange("write_file: cannot open " + path);
    out << content;
}

}  // namespace spinmoments
