#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gsdr/common.hpp"

namespace gsdr {

/// Floats in report output carry 10 significant digits; data files that are
/// meant to be reloaded use 17 so values survive the round trip.
inline std::string format_double(double v, int digits = 10) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    if (begin == end)
        throw input_error("blank cell at row " + std::to_string(row) + ", column '" + column + "'");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw input_error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                          ", column '" + column + "'");
    return value;
}

}  // namespace detail

/// Load a headed CSV file. All non-response columns become predictors in file
/// order; constant columns are dropped with a warning; the rest are z-scored
/// (parameters retained for transform-time reuse). The response stays raw.
inline DataSet load_csv(const std::string& path, const std::string& response_column,
                        std::ostream& warnings = std::cerr) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw input_error("file '" + path + "' is empty");
    std::vector<std::string> header = detail::split_csv_line(line);

    Eigen::Index response_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == response_column) response_idx = static_cast<Eigen::Index>(j);
    if (response_idx < 0)
        throw input_error("response column '" + response_column + "' not found in '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw input_error("row " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        std::vector<double> parsed(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j)
            parsed[j] = detail::parse_cell(cells[j], lineno, header[j]);
        rows.push_back(std::move(parsed));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n < 2) throw input_error("file '" + path + "' has fewer than 2 data rows");

    DataSet ds;
    ds.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) ds.y[i] = rows[i][response_idx];

    // Pass 1: find constant columns.
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<Eigen::Index>(j) == response_idx) continue;
        double first = rows[0][j];
        bool constant = true;
        for (Eigen::Index i = 1; i < n && constant; ++i) constant = rows[i][j] == first;
        if (constant)
            warnings << "warning: dropping constant column '" << header[j] << "'\n";
        else
            keep.push_back(static_cast<Eigen::Index>(j));
    }
    if (keep.empty()) throw input_error("no non-constant predictor columns in '" + path + "'");

    ds.X.resize(n, static_cast<Eigen::Index>(keep.size()));
    ds.predictor_names.resize(keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
        for (Eigen::Index i = 0; i < n; ++i) ds.X(i, static_cast<Eigen::Index>(c)) = rows[i][keep[c]];
        ds.predictor_names[c] = header[keep[c]];
    }

    Standardization std_info;
    std_info.mean = ds.X.colwise().mean();
    std_info.stddev.resize(ds.X.cols());
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
        double sd = std::sqrt((ds.X.col(c).array() - std_info.mean[c]).square().sum() /
                              static_cast<double>(n - 1));
        std_info.stddev[c] = sd;
        ds.X.col(c) = (ds.X.col(c).array() - std_info.mean[c]) / sd;
    }
    ds.standardization = std_info;
    return ds;
}

/// Write a matrix as CSV with the given column names.
inline void write_matrix_csv(const std::string& path, const std::vector<std::string>& columns,
                             const Matrix& M, int digits = 10) {
    if (static_cast<Eigen::Index>(columns.size()) != M.cols())
        throw input_error("write_matrix_csv: header size mismatch");
    std::ofstream out(path);
    if (!out) throw input_error("cannot write file '" + path + "'");
    for (std::size_t j = 0; j < columns.size(); ++j)
        out << (j ? "," : "") << columns[j];
    out << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            out << (j ? "," : "") << format_double(M(i, j), digits);
        out << "\n";
    }
    if (!out) throw input_error("failed writing '" + path + "'");
}

}  // namespace gsdr
