#pragma once

#include <span>

#include <Eigen/Core>

namespace oifs {

/// Reference norms below this are treated as zero states and skipped.
inline constexpr double kZeroReferenceNorm = 1e-14;

struct ErrorMetric {
    double value = 0.0;
    int averaged_times = 0;      ///< time levels that entered the average
    bool absolute = false;       ///< reference vanished everywhere; value is mean absolute l2 error
};

/// Time-averaged relative l2 error of nodal fields (nodes x n_t) over time levels
/// where the reference is nonzero. Throws ConfigError on shape or time-grid mismatch.
ErrorMetric time_averaged_relative_error(const Eigen::MatrixXd& model, const Eigen::MatrixXd& reference,
                                         std::span<const double> model_times,
                                         std::span<const double> reference_times);

ErrorMetric time_averaged_relative_error(const Eigen::MatrixXd& model, const Eigen::MatrixXd& reference);

}  // namespace oifs
