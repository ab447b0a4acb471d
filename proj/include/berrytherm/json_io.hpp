// json_io.hpp — matrices and vectors as JSON arrays of [re, im] pairs

#pragma once

#include "berrytherm/errors.hpp"
#include "berrytherm/fockspace.hpp"

#include <json.hpp>

#include <string>

namespace berrytherm::io {

using json = nlohmann::json;

inline json complex_to_json(fock::cplx z) { return json::array({z.real(), z.imag()}); }

inline fock::cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw DomainError("json: complex entries must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

// Row-major: [[[re, im], ...], ...]
inline json matrix_to_json(const fock::Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline fock::Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DomainError("json: matrix must be a non-empty array of rows");
    const Eigen::Index n = Eigen::Index(j.size());
    const Eigen::Index m = Eigen::Index(j[0].size());
    fock::Matrix out(n, m);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!j[r].is_array() || Eigen::Index(j[r].size()) != m) throw DomainError("json: ragged matrix");
        for (Eigen::Index c = 0; c < m; ++c) out(r, c) = complex_from_json(j[r][c]);
    }
    return out;
}

inline json vector_to_json(const fock::Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

inline fock::Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw DomainError("json: vector must be an array");
    fock::Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = complex_from_json(j[i]);
    return v;
}

inline json operator_to_json(const fock::OperatorMatrix& op) {
    return json{{"n_field", op.dims.n_field}, {"n_det", op.dims.n_det}, {"entries", matrix_to_json(op.m)}};
}

inline fock::OperatorMatrix operator_from_json(const json& j) {
    const fock::FockDims dims(j.at("n_field").get<int>(), j.at("n_det").get<int>());
    return {dims, matrix_from_json(j.at("entries"))};
}

}  // namespace berrytherm::io
