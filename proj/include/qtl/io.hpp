// io.hpp — JSON circuit configs and deterministic CSV/JSON emission.
//
// Config schema:
//   {"n": int, "L": [[...]], "K": [[...]], "hbar"?: real,
//    "lines": [{"kind": "ohmic"|"drude"|"cutoff_ohmic"|"tabulated", ...}]}
// Ohmic/drude/cutoff take "R" (+ "omega_c"); tabulated takes "omega"/"J" arrays.
// Complex numbers serialize as {"re": x, "im": y}. Floats print with 17
// significant digits so repeated runs are byte-identical.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qtl/circuit.hpp"

namespace qtl::io {

using nlohmann::json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json complex_to_json(const Complex& z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json complex_matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline const json& require_field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end())
        raise(errc::parse_error, std::string("missing field '") + name + "'");
    return *it;
}

inline Matrix parse_matrix(const json& j, int n, const char* name) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        raise(errc::parse_error, std::string(name) + " must be an " + std::to_string(n) +
                                     "-row array");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            raise(errc::parse_error, std::string(name) + " row " + std::to_string(i) +
                                         " must have " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k) {
            if (!row[k].is_number())
                raise(errc::parse_error, std::string(name) + " entries must be numbers");
            m(i, k) = row[k].get<double>();
        }
    }
    return m;
}

inline spectral::SpectralDensity parse_density(const json& j) {
    std::string kind = require_field(j, "kind").get<std::string>();
    if (kind == "ohmic") return spectral::Ohmic{require_field(j, "R").get<double>()};
    if (kind == "drude")
        return spectral::Drude{require_field(j, "R").get<double>(),
                               require_field(j, "omega_c").get<double>()};
    if (kind == "cutoff_ohmic")
        return spectral::CutoffOhmic{require_field(j, "R").get<double>(),
                                     require_field(j, "omega_c").get<double>()};
    if (kind == "tabulated") {
        spectral::Tabulated t;
        for (const auto& v : require_field(j, "omega")) t.omega.push_back(v.get<double>());
        for (const auto& v : require_field(j, "J")) t.value.push_back(v.get<double>());
        return t;
    }
    raise(errc::parse_error, "unknown line kind '" + kind + "'");
}

}  // namespace detail

inline json density_to_json(const spectral::SpectralDensity& sd) {
    using namespace spectral;
    json j;
    j["kind"] = kind_name(sd);
    if (const auto* d = std::get_if<Ohmic>(&sd)) {
        j["R"] = d->r;
    } else if (const auto* d = std::get_if<Drude>(&sd)) {
        j["R"] = d->r;
        j["omega_c"] = d->omega_c;
    } else if (const auto* d = std::get_if<CutoffOhmic>(&sd)) {
        j["R"] = d->r;
        j["omega_c"] = d->omega_c;
    } else if (const auto* d = std::get_if<Tabulated>(&sd)) {
        j["omega"] = d->omega;
        j["J"] = d->value;
    }
    return j;
}

inline circuit::CircuitSpec parse_spec(const json& j) {
    circuit::CircuitSpec spec;
    spec.n = detail::require_field(j, "n").get<int>();
    if (spec.n <= 0) raise(errc::parse_error, "n must be a positive integer");
    spec.L = detail::parse_matrix(detail::require_field(j, "L"), spec.n, "L");
    spec.K = detail::parse_matrix(detail::require_field(j, "K"), spec.n, "K");
    if (j.contains("hbar")) spec.hbar = j["hbar"].get<double>();
    const auto& lines = detail::require_field(j, "lines");
    if (!lines.is_array()) raise(errc::parse_error, "lines must be an array");
    for (const auto& l : lines) spec.lines.push_back(detail::parse_density(l));

    try {
        return circuit::validate_spec(spec);
    } catch (const error& e) {
        raise(errc::validation_error, e.what());
    }
}

inline circuit::CircuitSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::parse_error, "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(errc::parse_error, e.what());
    }
    return parse_spec(j);
}

// Deterministic CSV table: header row plus rows of 17-significant-digit floats.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != header_.size())
            raise(errc::dimension_mismatch, "CSV row width mismatch");
        rows_.push_back(row);
    }

    std::string str() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (i) out << ',';
            out << header_[i];
        }
        out << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                out << format_double(row[i]);
            }
            out << '\n';
        }
        return out.str();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace qtl::io
