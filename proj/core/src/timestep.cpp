#include "oifs/timestep.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "oifs/errors.hpp"

namespace oifs {

int step_count(double t0, double t1, double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("timestep must be > 0");
    }
    if (!(t1 >= t0)) {
        throw ConfigError("time interval end precedes start");
    }
    const double ratio = (t1 - t0) / dt;
    const double nearest = std::round(ratio);
    const double half_ulp = 0.5 * std::numeric_limits<double>::epsilon() * std::max(1.0, ratio);
    // One extra ulp of slack covers the rounding of (t1 - t0) itself.
    if (std::abs(ratio - nearest) > 4.0 * half_ulp) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "time interval [" << t0 << ", " << t1 << "] is not an integer multiple of dt=" << dt;
        throw ConfigError(msg.str());
    }
    return static_cast<int>(nearest);
}

ImplicitEulerStepper::ImplicitEulerStepper(std::shared_ptr<const SemiDiscreteSystem> system, double dt)
    : system_(std::move(system)), dt_(dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("timestep must be > 0");
    }
    SparseMatrix lhs = system_->mass() + dt_ * system_->a_ii();
    lhs.makeCompressed();
    scaled_a_ib_ = -dt_ * system_->a_ib();
    lu_.analyzePattern(lhs);
    lu_.factorize(lhs);
    if (lu_.info() != Eigen::Success) {
        throw NumericalError("factorization of (M + dt A_II) failed: " + lu_.lastErrorMessage());
    }
}

const Eigen::VectorXd& ImplicitEulerStepper::load_at(double t) const {
    if (!cache_valid_ || cached_t_ != t) {
        cached_load_ = system_->load_vector(t);
        cached_t_ = t;
        cache_valid_ = true;
    }
    return cached_load_;
}

Eigen::VectorXd ImplicitEulerStepper::step(const Eigen::VectorXd& v_n, const Eigen::VectorXd& g_next,
                                           double t_next) const {
    if (v_n.size() != system_->interior_size() || g_next.size() != system_->boundary_size()) {
        throw ConfigError("step: state or boundary vector has the wrong dimension");
    }
    Eigen::VectorXd rhs = system_->mass() * v_n;
    rhs.noalias() += scaled_a_ib_ * g_next;
    rhs.noalias() += dt_ * load_at(t_next);
    return lu_.solve(rhs);
}

Eigen::VectorXd ImplicitEulerStepper::step(const Eigen::VectorXd& v_n, const Eigen::VectorXd& g_n,
                                           const Eigen::VectorXd& g_next, double t_next) const {
    if (g_n.size() != system_->boundary_size()) {
        throw ConfigError("step: previous boundary vector has the wrong dimension");
    }
    if (system_->mass_ib().nonZeros() == 0) {
        return step(v_n, g_next, t_next);
    }
    if (v_n.size() != system_->interior_size() || g_next.size() != system_->boundary_size()) {
        throw ConfigError("step: state or boundary vector has the wrong dimension");
    }
    Eigen::VectorXd rhs = system_->mass() * v_n;
    rhs.noalias() += system_->mass_ib() * (g_n - g_next);
    rhs.noalias() += scaled_a_ib_ * g_next;
    rhs.noalias() += dt_ * load_at(t_next);
    return lu_.solve(rhs);
}

Eigen::VectorXd ImplicitEulerStepper::solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

ImplicitEulerStepper factorize(std::shared_ptr<const SemiDiscreteSystem> system, double dt) {
    return ImplicitEulerStepper(std::move(system), dt);
}

Trajectory run_transient(const ImplicitEulerStepper& stepper, double t0, double t1,
                         const Eigen::VectorXd& initial, const BoundaryFunction& boundary_fn) {
    const int steps = step_count(t0, t1, stepper.dt());
    const auto& sys = stepper.system();
    if (initial.size() != sys.interior_size()) {
        throw ConfigError("initial state has the wrong dimension");
    }
    Trajectory traj;
    traj.times.resize(static_cast<std::size_t>(steps) + 1);
    traj.states.resize(sys.interior_size(), steps + 1);
    traj.boundary_traces.resize(sys.boundary_size(), steps + 1);

    traj.times[0] = t0;
    traj.states.col(0) = initial;
    traj.boundary_traces.col(0) = boundary_fn(t0);
    Eigen::VectorXd v = initial;
    for (int n = 1; n <= steps; ++n) {
        const double t = t0 + n * stepper.dt();
        Eigen::VectorXd g = boundary_fn(t);
        v = stepper.step(v, traj.boundary_traces.col(n - 1), g, t);
        if (!v.allFinite()) {
            throw DivergenceError("non-finite state during transient run");
        }
        traj.times[static_cast<std::size_t>(n)] = t;
        traj.states.col(n) = v;
        traj.boundary_traces.col(n) = g;
    }
    return traj;
}

}  // namespace oifs
