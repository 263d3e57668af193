#include "c2l/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace c2l {

GradCheckResult finite_difference_check(const std::function<Scalar()>& objective,
                                        std::span<const GradCheckEntry> entries,
                                        Scalar eps) {
    if (!(eps > 0.0)) {
        throw ParamError("finite_difference_check: eps must be positive");
    }
    GradCheckResult result;
    for (const GradCheckEntry& entry : entries) {
        Mat& p = *entry.param;
        const Mat& a = *entry.analytic;
        require_same_shape(p, a, "finite_difference_check");
        for (Index i = 0; i < p.rows(); ++i) {
            for (Index j = 0; j < p.cols(); ++j) {
                const Scalar saved = p(i, j);
                p(i, j) = saved + eps;
                const Scalar f_plus = objective();
                p(i, j) = saved - eps;
                const Scalar f_minus = objective();
                p(i, j) = saved;
                const Scalar numeric = (f_plus - f_minus) / (2.0 * eps);
                const Scalar analytic = a(i, j);
                const Scalar denom =
                    std::max({Scalar(1), std::abs(analytic), std::abs(numeric)});
                const Scalar rel = std::abs(analytic - numeric) / denom;
                if (rel > result.max_rel_error) {
                    result.max_rel_error = rel;
                    result.worst_tensor = entry.name;
                    result.worst_row = i;
                    result.worst_col = j;
                }
            }
        }
    }
    return result;
}

} // namespace c2l
