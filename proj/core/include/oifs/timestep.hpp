#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseLU>

#include "oifs/fem.hpp"

namespace oifs {

/// Recorded interior states and the boundary vectors imposed to reach them.
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;           ///< N x n_t
    Eigen::MatrixXd boundary_traces;  ///< m x n_t; column j was imposed when stepping into times[j]

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(times.size()); }
};

/// Number of uniform steps covering [t0, t1]; throws ConfigError unless
/// (t1 - t0)/dt is an integer to within half an ulp of that ratio.
int step_count(double t0, double t1, double dt);

/// Backward Euler for  M dv/dt = -A_II v - A_IB g + F(t)  with one LU of (M + dt A_II).
class ImplicitEulerStepper {
public:
    ImplicitEulerStepper(std::shared_ptr<const SemiDiscreteSystem> system, double dt);

    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] const SemiDiscreteSystem& system() const { return *system_; }

    /// Solves (M + dt A_II) v_{n+1} = M v_n + dt (-A_IB g_next + F(t_next)).
    /// Exact for lumped mass; with consistent mass it assumes g_n == g_next.
    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& v_n, const Eigen::VectorXd& g_next,
                                       double t_next) const;

    /// As above plus the boundary-mass term  M_IB (g_n - g_next)  on the right-hand side.
    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& v_n, const Eigen::VectorXd& g_n,
                                       const Eigen::VectorXd& g_next, double t_next) const;

    /// Solves (M + dt A_II) x = rhs.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
    const Eigen::VectorXd& load_at(double t) const;

    std::shared_ptr<const SemiDiscreteSystem> system_;
    double dt_;
    SparseMatrix scaled_a_ib_;
    Eigen::SparseLU<SparseMatrix> lu_;
    // F(t) is reused across Schwarz iterations within a window.
    mutable double cached_t_ = 0.0;
    mutable bool cache_valid_ = false;
    mutable Eigen::VectorXd cached_load_;
};

ImplicitEulerStepper factorize(std::shared_ptr<const SemiDiscreteSystem> system, double dt);

using BoundaryFunction = std::function<Eigen::VectorXd(double)>;

Trajectory run_transient(const ImplicitEulerStepper& stepper, double t0, double t1,
                         const Eigen::VectorXd& initial, const BoundaryFunction& boundary_fn);

}  // namespace oifs
