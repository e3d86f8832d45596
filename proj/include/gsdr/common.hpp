#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Representer coefficients: n x q, column j holds the expansion of the
/// j-th direction over the training points.
using CoefficientMatrix = Eigen::MatrixXd;

// Thrown for invalid or degenerate inputs (bad dimensions, empty slices,
// constant data where spread is required).
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numeric routine fails (non-finite objective, eigensolver
// breakdown, singular system).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-column standardization parameters recorded at ingestion so that new
// points can be mapped into the same coordinates later.
struct Standardization {
    Vector mean;
    Vector stddev;
};

struct DataSet {
    Matrix X;  // n x p predictors
    Vector y;  // n responses
    std::vector<std::string> predictor_names;
    std::optional<Standardization> standardization;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

inline void check_dataset(const DataSet& ds) {
    if (ds.X.rows() != ds.y.size())
        throw input_error("dataset: predictor rows (" + std::to_string(ds.X.rows()) +
                          ") != response length (" + std::to_string(ds.y.size()) + ")");
    if (ds.X.rows() < 2) throw input_error("dataset: need at least 2 observations");
}

}  // namespace gsdr
