#pragma once

#include <Eigen/Dense>

#include <string>

#include "c2l/error.hpp"

namespace c2l {

using Scalar = double;
using Index = Eigen::Index;

// Row-major dense matrix of 64-bit floats. All numeric state in the engine
// (weights, activations, windows, gradients) lives in this type.
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string shape_str(Index rows, Index cols) {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

inline std::string shape_str(const Mat& m) {
    return shape_str(m.rows(), m.cols());
}

inline bool all_finite(const Mat& m) {
    return m.allFinite();
}

inline void require_same_shape(const Mat& a, const Mat& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(where) + ": shapes " + shape_str(a) + " and " +
                         shape_str(b) + " differ");
    }
}

inline void require_matmul_compatible(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) + " * " +
                         shape_str(b));
    }
}

} // namespace c2l
