#include "oifs/rom.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "oifs/errors.hpp"

namespace oifs {

double PodBasis::retained_energy() const {
    const double total = singular_values.squaredNorm();
    if (total == 0.0) {
        return 1.0;
    }
    return singular_values.head(r).squaredNorm() / total;
}

PodBasis compute_pod(const Eigen::MatrixXd& states, int r) {
    const Eigen::Index max_rank = std::min(states.rows(), states.cols());
    if (r < 1 || r > max_rank) {
        std::ostringstream msg;
        msg << "POD dimension r=" << r << " outside [1, " << max_rank << "]";
        throw ConfigError(msg.str());
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(states, Eigen::ComputeThinU);
    PodBasis basis;
    basis.psi = svd.matrixU().leftCols(r);
    basis.singular_values = svd.singularValues();
    basis.r = r;
    return basis;
}

Eigen::MatrixXd time_derivatives(const Eigen::MatrixXd& reduced_states, double dt) {
    const Eigen::Index nt = reduced_states.cols();
    if (nt < 3) {
        throw ConfigError("time_derivatives needs at least 3 snapshots");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("timestep must be > 0");
    }
    const auto& y = reduced_states;
    Eigen::MatrixXd d(y.rows(), nt);
    const double inv2dt = 1.0 / (2.0 * dt);
    d.col(0) = (-3.0 * y.col(0) + 4.0 * y.col(1) - y.col(2)) * inv2dt;
    for (Eigen::Index j = 1; j + 1 < nt; ++j) {
        d.col(j) = (y.col(j + 1) - y.col(j - 1)) * inv2dt;
    }
    d.col(nt - 1) = (3.0 * y.col(nt - 1) - 4.0 * y.col(nt - 2) + y.col(nt - 3)) * inv2dt;
    return d;
}

OpInfOperators fit_operators(const Eigen::MatrixXd& reduced_states,
                             const Eigen::MatrixXd& reduced_derivatives,
                             const Eigen::MatrixXd& boundary_traces, double lambda) {
    const Eigen::Index r = reduced_states.rows();
    const Eigen::Index m = boundary_traces.rows();
    const Eigen::Index nt = reduced_states.cols();
    if (reduced_derivatives.rows() != r || reduced_derivatives.cols() != nt ||
        boundary_traces.cols() != nt) {
        throw ConfigError("OpInf training data dimensions are inconsistent");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("regularization weight must be finite and >= 0");
    }
    const Eigen::Index p = r + m + 1;
    const Eigen::Index extra = lambda > 0.0 ? p : 0;

    // Rows [y_i^T g_i^T 1], stacked over lambda*I when regularized.
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(nt + extra, p);
    data.topLeftCorner(nt, r) = reduced_states.transpose();
    data.block(0, r, nt, m) = boundary_traces.transpose();
    data.block(0, r + m, nt, 1).setOnes();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nt + extra, r);
    rhs.topRows(nt) = reduced_derivatives.transpose();
    if (extra > 0) {
        data.bottomRows(extra).diagonal().setConstant(lambda);
    }

    Eigen::MatrixXd solution = Eigen::MatrixXd::Zero(p, r);
    if (data.size() > 0 && data.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& s = svd.singularValues();
        const double cutoff = kRegressionCutoff * s[0];
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
        for (Eigen::Index k = 0; k < s.size(); ++k) {
            if (s[k] > cutoff) {
                inv[k] = 1.0 / s[k];
            }
        }
        solution = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * rhs);
    }

    OpInfOperators ops;
    const Eigen::MatrixXd stacked = solution.transpose();  // r x p
    ops.khat = stacked.leftCols(r);
    ops.bhat = stacked.middleCols(r, m);
    ops.fhat = stacked.col(r + m);
    ops.lambda = lambda;
    if (!ops.khat.allFinite() || !ops.bhat.allFinite() || !ops.fhat.allFinite()) {
        throw NumericalError("OpInf regression produced non-finite operators");
    }
    return ops;
}

RegressionData regression_data(const Eigen::MatrixXd& reduced_states, const Eigen::MatrixXd& boundary_traces,
                               double dt, DerivativeScheme scheme) {
    const Eigen::Index nt = reduced_states.cols();
    if (boundary_traces.cols() != nt) {
        throw ConfigError("boundary traces and states have different snapshot counts");
    }
    if (scheme == DerivativeScheme::Central) {
        return {reduced_states, time_derivatives(reduced_states, dt), boundary_traces};
    }
    if (nt < 2) {
        throw ConfigError("backward differences need at least 2 snapshots");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("timestep must be > 0");
    }
    RegressionData d;
    d.states = reduced_states.rightCols(nt - 1);
    d.derivatives = (reduced_states.rightCols(nt - 1) - reduced_states.leftCols(nt - 1)) / dt;
    d.inputs = boundary_traces.rightCols(nt - 1);
    return d;
}

OpInfOperators train_opinf(const PodBasis& basis, const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& boundary_traces, double dt, double lambda,
                           DerivativeScheme scheme) {
    if (states.rows() != basis.psi.rows()) {
        throw ConfigError("snapshot rows do not match the POD basis");
    }
    const Eigen::MatrixXd reduced = basis.psi.transpose() * states;
    const RegressionData d = regression_data(reduced, boundary_traces, dt, scheme);
    return fit_operators(d.states, d.derivatives, d.inputs, lambda);
}

double opinf_objective(const OpInfOperators& ops, const Eigen::MatrixXd& reduced_states,
                       const Eigen::MatrixXd& reduced_derivatives,
                       const Eigen::MatrixXd& boundary_traces, double lambda) {
    Eigen::MatrixXd residual = reduced_derivatives - ops.khat * reduced_states - ops.bhat * boundary_traces;
    residual.colwise() -= ops.fhat;
    return residual.squaredNorm() +
           lambda * lambda * (ops.khat.squaredNorm() + ops.bhat.squaredNorm() + ops.fhat.squaredNorm());
}

RomStepper::RomStepper(OpInfOperators ops, double dt) : ops_(std::move(ops)), dt_(dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("timestep must be > 0");
    }
    const Eigen::Index r = ops_.khat.rows();
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(r, r) - dt_ * ops_.khat;
    lu_.compute(lhs);
    if (r > 0 && !(lu_.rcond() > 1e-14)) {
        throw NumericalError("reduced implicit Euler matrix (I - dt Khat) is singular");
    }
    dt_fhat_ = dt_ * ops_.fhat;
}

Eigen::VectorXd RomStepper::step(const Eigen::VectorXd& vhat_n, const Eigen::VectorXd& g_next) const {
    if (vhat_n.size() != ops_.r() || g_next.size() != ops_.m()) {
        throw ConfigError("rom_step: state or boundary vector has the wrong dimension");
    }
    Eigen::VectorXd rhs = vhat_n + dt_fhat_;
    rhs.noalias() += dt_ * (ops_.bhat * g_next);
    return lu_.solve(rhs);
}

Eigen::VectorXd rom_step(const OpInfOperators& ops, const Eigen::VectorXd& vhat_n,
                         const Eigen::VectorXd& g_next, double dt) {
    return RomStepper(ops, dt).step(vhat_n, g_next);
}

Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& vhat) {
    if (vhat.size() != basis.psi.cols()) {
        throw ConfigError("reduced vector dimension does not match the basis");
    }
    return basis.psi * vhat;
}

}  // namespace oifs
