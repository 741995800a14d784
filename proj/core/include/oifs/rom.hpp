#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

namespace oifs {

/// Leading left singular vectors of a snapshot matrix (uncentered).
struct PodBasis {
    Eigen::MatrixXd psi;              ///< N x r, orthonormal columns
    Eigen::VectorXd singular_values;  ///< all min(N, n_t) values, non-increasing
    int r = 0;

    /// Fraction of squared singular values captured by the first r modes.
    [[nodiscard]] double retained_energy() const;
};

PodBasis compute_pod(const Eigen::MatrixXd& states, int r);

/// Second-order finite differences along columns: central inside, one-sided at both ends.
Eigen::MatrixXd time_derivatives(const Eigen::MatrixXd& reduced_states, double dt);

/// How snapshot time derivatives are estimated for the regression.
///  - BackwardEuler: (y_n - y_{n-1})/dt paired with (y_n, g_n) for n >= 1, the
///    exact discrete relation of the implicit Euler data and integrator.
///  - Central: second-order differences from time_derivatives() at every snapshot.
enum class DerivativeScheme { BackwardEuler, Central };

/// Learned reduced model  d vhat/dt = Khat vhat + Bhat g + fhat.
struct OpInfOperators {
    Eigen::MatrixXd khat;  ///< r x r
    Eigen::MatrixXd bhat;  ///< r x m
    Eigen::VectorXd fhat;  ///< r
    double lambda = 0.0;

    [[nodiscard]] int r() const { return static_cast<int>(khat.rows()); }
    [[nodiscard]] int m() const { return static_cast<int>(bhat.cols()); }
};

/// Relative singular-value cutoff used by the operator regression.
inline constexpr double kRegressionCutoff = 1e-13;

/// Fits [Khat Bhat fhat] to reduced data by Tikhonov-regularized least squares:
///   min sum_i |ydot_i - Khat y_i - Bhat g_i - fhat|^2 + lambda^2 (|Khat|_F^2 + |Bhat|_F^2 + |fhat|^2).
/// Solved through an SVD of the lambda-augmented data matrix; singular values below
/// kRegressionCutoff * sigma_max are discarded, so lambda = 0 on rank-deficient data
/// yields the minimum-norm minimizer.
OpInfOperators fit_operators(const Eigen::MatrixXd& reduced_states,
                             const Eigen::MatrixXd& reduced_derivatives,
                             const Eigen::MatrixXd& boundary_traces, double lambda);

/// Projects snapshots onto the basis, differences them in time and fits the operators.
OpInfOperators train_opinf(const PodBasis& basis, const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& boundary_traces, double dt, double lambda,
                           DerivativeScheme scheme = DerivativeScheme::BackwardEuler);

/// Regression data (states, derivatives, inputs) with aligned columns for a scheme.
struct RegressionData {
    Eigen::MatrixXd states;
    Eigen::MatrixXd derivatives;
    Eigen::MatrixXd inputs;
};

RegressionData regression_data(const Eigen::MatrixXd& reduced_states, const Eigen::MatrixXd& boundary_traces,
                               double dt, DerivativeScheme scheme);

/// Value of the regularized training objective at the given operators.
double opinf_objective(const OpInfOperators& ops, const Eigen::MatrixXd& reduced_states,
                       const Eigen::MatrixXd& reduced_derivatives,
                       const Eigen::MatrixXd& boundary_traces, double lambda);

/// Backward Euler on the learned ODE with a reusable LU of (I - dt Khat).
class RomStepper {
public:
    RomStepper(OpInfOperators ops, double dt);

    [[nodiscard]] const OpInfOperators& operators() const { return ops_; }
    [[nodiscard]] double dt() const { return dt_; }

    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& vhat_n, const Eigen::VectorXd& g_next) const;

private:
    OpInfOperators ops_;
    double dt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd dt_fhat_;
};

Eigen::VectorXd rom_step(const OpInfOperators& ops, const Eigen::VectorXd& vhat_n,
                         const Eigen::VectorXd& g_next, double dt);

/// Returns psi * vhat.
Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& vhat);

}  // namespace oifs
