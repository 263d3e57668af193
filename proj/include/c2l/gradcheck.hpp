#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "c2l/matrix.hpp"

namespace c2l {

struct GradCheckResult {
    Scalar max_rel_error = 0.0;
    std::string worst_tensor;
    Index worst_row = 0;
    Index worst_col = 0;
};

struct GradCheckEntry {
    std::string name;
    Mat* param;          // mutated in place while probing
    const Mat* analytic; // gradient produced by backward()
};

// Central-difference gradient oracle: perturbs every coordinate of every
// listed tensor by +/-eps, re-evaluates `objective`, and compares
// (f+ - f-) / (2 eps) against the analytic gradient. Relative error uses a
// max(1, |analytic|, |numeric|) denominator. The objective must be a pure
// function of the listed parameters; this path never touches backward().
GradCheckResult finite_difference_check(const std::function<Scalar()>& objective,
                                        std::span<const GradCheckEntry> entries,
                                        Scalar eps);

} // namespace c2l
