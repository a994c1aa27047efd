#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "adqec/channels.hpp"
#include "adqec/codes.hpp"
#include "adqec/optimizer.hpp"

namespace adqec {

using json = nlohmann::json;

/// Matrices are encoded as nested arrays of [re, im] pairs, row-major.
inline json matrix_to_json(const cmat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline cmat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument("matrix_from_json: expected nested arrays");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    cmat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = j[i][c];
            if (!cell.is_array() || cell.size() != 2)
                throw std::invalid_argument("matrix_from_json: entries must be [re, im]");
            m(i, c) = complexd(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

inline json vector_to_json(const cvec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
    return out;
}

inline cvec vector_from_json(const json& j) {
    cvec v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const auto& cell = j[i];
        if (!cell.is_array() || cell.size() != 2)
            throw std::invalid_argument("vector_from_json: entries must be [re, im]");
        v[i] = complexd(cell[0].get<double>(), cell[1].get<double>());
    }
    return v;
}

inline json to_json(const KrausChannel& ch) {
    json j;
    j["d_in"] = ch.d_in;
    j["d_out"] = ch.d_out;
    json ops = json::array();
    for (const cmat& k : ch.kraus) ops.push_back(matrix_to_json(k));
    j["kraus"] = std::move(ops);
    return j;
}

inline KrausChannel kraus_from_json(const json& j) {
    KrausChannel ch;
    ch.d_in = j.at("d_in").get<int>();
    ch.d_out = j.at("d_out").get<int>();
    for (const auto& k : j.at("kraus")) ch.kraus.push_back(matrix_from_json(k));
    return ch;
}

inline json to_json(const ChoiMatrix& x) {
    json j;
    j["d_in"] = x.d_in;
    j["d_out"] = x.d_out;
    j["matrix"] = matrix_to_json(x.matrix);
    return j;
}

inline ChoiMatrix choi_from_json(const json& j) {
    return ChoiMatrix{j.at("d_in").get<int>(), j.at("d_out").get<int>(),
                      matrix_from_json(j.at("matrix"))};
}

inline json to_json(const CodePair& code) {
    json j;
    j["gamma"] = code.gamma;
    j["zero_logical"] = vector_to_json(code.zero_logical);
    j["one_logical"] = vector_to_json(code.one_logical);
    return j;
}

inline CodePair code_from_json(const json& j) {
    CodePair code;
    code.gamma = j.at("gamma").get<double>();
    code.zero_logical = vector_from_json(j.at("zero_logical"));
    code.one_logical = vector_from_json(j.at("one_logical"));
    if (code.zero_logical.size() != 16 || code.one_logical.size() != 16)
        throw std::invalid_argument("code_from_json: codewords must have 16 amplitudes");
    return code;
}

inline json to_json(const OptimizationResult& r) {
    json j;
    j["fidelity"] = r.fidelity;
    j["fidelity_trace"] = r.fidelity_trace;
    j["rounds"] = r.rounds;
    j["restart_index"] = r.restart_index;
    j["converged"] = r.converged;
    j["enc_choi"] = to_json(r.enc_choi);
    j["dr_choi"] = to_json(r.dr_choi);
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace adqec
