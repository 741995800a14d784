#include "oifs/metrics.hpp"

#include <cmath>

#include "oifs/errors.hpp"

namespace oifs {

ErrorMetric time_averaged_relative_error(const Eigen::MatrixXd& model, const Eigen::MatrixXd& reference,
                                         std::span<const double> model_times,
                                         std::span<const double> reference_times) {
    if (model_times.size() != reference_times.size()) {
        throw ConfigError("error metric: time grids have different lengths");
    }
    for (std::size_t k = 0; k < model_times.size(); ++k) {
        if (std::abs(model_times[k] - reference_times[k]) > 1e-12 * std::max(1.0, std::abs(reference_times[k]))) {
            throw ConfigError("error metric: time grids differ");
        }
    }
    if (static_cast<std::size_t>(reference.cols()) != reference_times.size()) {
        throw ConfigError("error metric: time grid does not match trajectory columns");
    }
    return time_averaged_relative_error(model, reference);
}

ErrorMetric time_averaged_relative_error(const Eigen::MatrixXd& model, const Eigen::MatrixXd& reference) {
    if (model.rows() != reference.rows() || model.cols() != reference.cols()) {
        throw ConfigError("error metric: trajectory shapes differ");
    }
    ErrorMetric out;
    double sum = 0.0;
    double abs_sum = 0.0;
    for (Eigen::Index c = 0; c < reference.cols(); ++c) {
        const double ref = reference.col(c).norm();
        const double diff = (model.col(c) - reference.col(c)).norm();
        abs_sum += diff;
        if (ref < kZeroReferenceNorm) {
            continue;
        }
        sum += diff / ref;
        ++out.averaged_times;
    }
    if (out.averaged_times > 0) {
        out.value = sum / out.averaged_times;
    } else {
        out.absolute = true;
        out.value = reference.cols() > 0 ? abs_sum / static_cast<double>(reference.cols()) : 0.0;
    }
    return out;
}

}  // namespace oifs
