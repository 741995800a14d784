#include "oifs/subdomain_solver.hpp"

#include <algorithm>

#include "oifs/errors.hpp"

namespace oifs {

SubdomainSolver::SubdomainSolver(StructuredMesh mesh, SpaceTimeFunction dirichlet)
    : mesh_(std::move(mesh)), dirichlet_(std::move(dirichlet)) {
    if (!dirichlet_) {
        throw ConfigError("subdomain solver needs Dirichlet data");
    }
    set_interface_positions({});
}

void SubdomainSolver::set_interface_positions(std::vector<int> positions) {
    const auto& bmap = mesh_.boundary_node_ids();
    std::sort(positions.begin(), positions.end());
    std::vector<bool> is_interface(bmap.size(), false);
    for (int p : positions) {
        if (p < 0 || static_cast<std::size_t>(p) >= bmap.size()) {
            throw ConfigError("interface position outside the boundary vector");
        }
        is_interface[static_cast<std::size_t>(p)] = true;
    }
    interface_positions_ = std::move(positions);
    physical_positions_.clear();
    physical_points_.clear();
    for (std::size_t k = 0; k < bmap.size(); ++k) {
        if (!is_interface[k]) {
            physical_positions_.push_back(static_cast<int>(k));
            physical_points_.push_back(mesh_.node(bmap[k]));
        }
    }
    pending_interface_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interface_positions_.size()));
}

SolverState SubdomainSolver::snapshot_state() const { return {native_, boundary_, t_}; }

void SubdomainSolver::restore_state(const SolverState& state) {
    set_native(state.native, state.boundary, state.t);
}

void SubdomainSolver::set_native(Eigen::VectorXd native, Eigen::VectorXd boundary, double t) {
    if (boundary.size() != static_cast<Eigen::Index>(mesh_.boundary_node_ids().size())) {
        throw ConfigError("boundary vector has the wrong dimension");
    }
    native_ = std::move(native);
    boundary_ = std::move(boundary);
    t_ = t;
    refresh_nodal();
}

void SubdomainSolver::refresh_nodal() {
    const Eigen::VectorXd interior = lift(native_);
    const auto& imap = mesh_.interior_node_ids();
    const auto& bmap = mesh_.boundary_node_ids();
    nodal_.resize(mesh_.node_count());
    for (std::size_t k = 0; k < imap.size(); ++k) {
        nodal_[imap[k]] = interior[static_cast<Eigen::Index>(k)];
    }
    for (std::size_t k = 0; k < bmap.size(); ++k) {
        nodal_[bmap[k]] = boundary_[static_cast<Eigen::Index>(k)];
    }
}

void SubdomainSolver::set_interface_values(const Eigen::VectorXd& values) {
    if (values.size() != pending_interface_.size()) {
        throw ConfigError("interface value count does not match interface positions");
    }
    pending_interface_ = values;
}

Eigen::VectorXd SubdomainSolver::interface_trace() const {
    Eigen::VectorXd trace(static_cast<Eigen::Index>(interface_positions_.size()));
    for (std::size_t k = 0; k < interface_positions_.size(); ++k) {
        trace[static_cast<Eigen::Index>(k)] = boundary_[interface_positions_[k]];
    }
    return trace;
}

Eigen::VectorXd SubdomainSolver::assemble_boundary(double t, const Eigen::VectorXd& interface_values) const {
    if (interface_values.size() != static_cast<Eigen::Index>(interface_positions_.size())) {
        throw ConfigError("interface value count does not match interface positions");
    }
    Eigen::VectorXd boundary(static_cast<Eigen::Index>(mesh_.boundary_node_ids().size()));
    for (std::size_t k = 0; k < physical_positions_.size(); ++k) {
        const Point& p = physical_points_[k];
        boundary[physical_positions_[k]] = dirichlet_(t, p.x, p.y);
    }
    for (std::size_t k = 0; k < interface_positions_.size(); ++k) {
        boundary[interface_positions_[k]] = interface_values[static_cast<Eigen::Index>(k)];
    }
    return boundary;
}

void SubdomainSolver::impose_boundary(double t, const Eigen::VectorXd& interface_values) {
    set_native(native_, assemble_boundary(t, interface_values), t);
}

void SubdomainSolver::advance(double t_next) {
    Eigen::VectorXd boundary = assemble_boundary(t_next, pending_interface_);
    Eigen::VectorXd next = step_native(native_, boundary_, boundary, t_next);
    set_native(std::move(next), std::move(boundary), t_next);

    if (in_window_) {
        const auto idx = static_cast<Eigen::Index>(window_fields_.size());
        if (idx < window_interface_.cols()) {
            window_interface_.col(idx) = pending_interface_;
        }
        window_fields_.push_back(nodal_);
        window_records_.push_back(snapshot_state());
    }
}

Eigen::MatrixXd SubdomainSolver::lift_all(const Eigen::MatrixXd& natives) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(mesh_.interior_node_ids().size()), natives.cols());
    for (Eigen::Index j = 0; j < natives.cols(); ++j) {
        out.col(j) = lift(natives.col(j));
    }
    return out;
}

void SubdomainSolver::begin_window(int substeps) {
    if (substeps < 1) {
        throw ConfigError("window must contain at least one step");
    }
    in_window_ = true;
    window_start_ = snapshot_state();
    window_start_field_ = nodal_;
    window_fields_.clear();
    window_records_.clear();
    const Eigen::VectorXd trace = interface_trace();
    window_interface_ = trace.replicate(1, substeps);
}

void SubdomainSolver::restart_window() {
    restore_state(window_start_);
    window_fields_.clear();
    window_records_.clear();
}

const Eigen::VectorXd& SubdomainSolver::window_field(int substep) const {
    // Sub-steps not yet computed in this window fall back to the latest field.
    if (substep <= 0 || window_fields_.empty()) {
        return window_fields_.empty() || substep <= 0 ? window_start_field_ : window_fields_.back();
    }
    const auto idx = std::min(static_cast<std::size_t>(substep), window_fields_.size()) - 1;
    return window_fields_[idx];
}

const SolverState& SubdomainSolver::window_record(int substep) const {
    if (substep < 1 || static_cast<std::size_t>(substep) > window_records_.size()) {
        throw ConfigError("window sub-step has not been computed");
    }
    return window_records_[static_cast<std::size_t>(substep) - 1];
}

FeSubdomainSolver::FeSubdomainSolver(std::shared_ptr<const SemiDiscreteSystem> system, double dt)
    : SubdomainSolver(system->mesh(), system->params().dirichlet), stepper_(system, dt) {
    set_native(Eigen::VectorXd::Zero(system->interior_size()),
               Eigen::VectorXd::Zero(system->boundary_size()), 0.0);
}

Eigen::VectorXd FeSubdomainSolver::step_native(const Eigen::VectorXd& native, const Eigen::VectorXd& boundary,
                                               const Eigen::VectorXd& next_boundary, double t_next) const {
    return stepper_.step(native, boundary, next_boundary, t_next);
}

RomSubdomainSolver::RomSubdomainSolver(StructuredMesh mesh, SpaceTimeFunction dirichlet, PodBasis basis,
                                       OpInfOperators ops, double dt)
    : SubdomainSolver(std::move(mesh), std::move(dirichlet)),
      basis_(std::move(basis)),
      stepper_(std::move(ops), dt) {
    const auto n_interior = static_cast<Eigen::Index>(mesh_.interior_node_ids().size());
    const auto n_boundary = static_cast<Eigen::Index>(mesh_.boundary_node_ids().size());
    if (basis_.psi.rows() != n_interior) {
        throw ConfigError("POD basis rows do not match the subdomain interior node count");
    }
    if (stepper_.operators().r() != basis_.psi.cols() || stepper_.operators().m() != n_boundary) {
        throw ConfigError("OpInf operator dimensions do not match the basis/boundary");
    }
    set_native(Eigen::VectorXd::Zero(basis_.psi.cols()), Eigen::VectorXd::Zero(n_boundary), 0.0);
}

Eigen::VectorXd RomSubdomainSolver::lift(const Eigen::VectorXd& native) const {
    return reconstruct(basis_, native);
}

Eigen::MatrixXd RomSubdomainSolver::lift_all(const Eigen::MatrixXd& natives) const {
    return basis_.psi * natives;
}

Eigen::VectorXd RomSubdomainSolver::step_native(const Eigen::VectorXd& native, const Eigen::VectorXd&,
                                                const Eigen::VectorXd& next_boundary, double) const {
    return stepper_.step(native, next_boundary);
}

}  // namespace oifs
