#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsp {

/// Shortest decimal representation that parses back to the same double. All
/// file output goes through this so reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                             const std::string& header = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
}

inline void write_vector_csv(const std::string& path, const Eigen::VectorXd& v,
                             const std::string& header = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << "\n";
}

namespace detail {

inline std::vector<std::vector<double>> read_numeric_rows(const std::string& path,
                                                          std::vector<std::string>* headers) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (headers) headers->push_back(line);
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": not a number: '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

inline Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                       std::vector<std::string>* headers = nullptr) {
    auto rows = detail::read_numeric_rows(path, headers);
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix file");
    const std::size_t cols = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols)
            throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

inline Eigen::VectorXd read_vector_csv(const std::string& path,
                                       std::vector<std::string>* headers = nullptr) {
    auto rows = detail::read_numeric_rows(path, headers);
    Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1)
            throw std::runtime_error(path + ": expected one column, row " + std::to_string(i + 1));
        v[static_cast<Eigen::Index>(i)] = rows[i][0];
    }
    return v;
}

} // namespace gsp
