#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "oifs/fem.hpp"
#include "oifs/mesh.hpp"
#include "oifs/rom.hpp"
#include "oifs/timestep.hpp"

namespace oifs {

/// Restorable solver state at one time level.
struct SolverState {
    Eigen::VectorXd native;    ///< FE interior coefficients or ROM reduced coordinates
    Eigen::VectorXd boundary;  ///< full boundary vector in boundary_map order
    double t = 0.0;
};

/// Common contract of the FE and OpInf models living on one subdomain.
///
/// The boundary vector stacks physical-boundary values (evaluated from the
/// Dirichlet data) and Schwarz-interface values (supplied by the coupler) in
/// the mesh's boundary-node order. Within a window the solver records the
/// nodal field after each sub-step so donors can be sampled at any sub-step.
class SubdomainSolver {
public:
    SubdomainSolver(StructuredMesh mesh, SpaceTimeFunction dirichlet);
    virtual ~SubdomainSolver() = default;

    SubdomainSolver(const SubdomainSolver&) = delete;
    SubdomainSolver& operator=(const SubdomainSolver&) = delete;
    SubdomainSolver(SubdomainSolver&&) = default;
    SubdomainSolver& operator=(SubdomainSolver&&) = default;

    [[nodiscard]] virtual std::string_view kind() const = 0;
    [[nodiscard]] const StructuredMesh& mesh() const { return mesh_; }
    [[nodiscard]] double time() const { return t_; }

    /// Marks which boundary-vector positions are Schwarz interface entries.
    void set_interface_positions(std::vector<int> positions);
    [[nodiscard]] const std::vector<int>& interface_positions() const { return interface_positions_; }

    [[nodiscard]] SolverState snapshot_state() const;
    void restore_state(const SolverState& state);

    /// Interface values imposed on the next advance().
    void set_interface_values(const Eigen::VectorXd& values);
    /// Interface entries of the current boundary vector.
    [[nodiscard]] Eigen::VectorXd interface_trace() const;

    /// Overwrites the current boundary vector without stepping: physical
    /// entries from g(t), interface entries from `interface_values`.
    void impose_boundary(double t, const Eigen::VectorXd& interface_values);

    /// One implicit step to t_next with boundary = [g(t_next) on physical nodes, interface values].
    void advance(double t_next);

    [[nodiscard]] const Eigen::VectorXd& native_state() const { return native_; }
    [[nodiscard]] const Eigen::VectorXd& boundary_vector() const { return boundary_; }
    [[nodiscard]] const Eigen::VectorXd& nodal_field() const { return nodal_; }

    /// Interior coefficients on the subdomain mesh for a native state.
    [[nodiscard]] virtual Eigen::VectorXd lift(const Eigen::VectorXd& native) const = 0;
    /// Lifts every column of a native-state matrix.
    [[nodiscard]] virtual Eigen::MatrixXd lift_all(const Eigen::MatrixXd& natives) const;

    // Window bookkeeping used by the Schwarz coupler.
    void begin_window(int substeps);
    void restart_window();
    [[nodiscard]] const Eigen::VectorXd& window_field(int substep) const;
    [[nodiscard]] const Eigen::MatrixXd& window_interface_values() const { return window_interface_; }
    [[nodiscard]] int window_progress() const { return static_cast<int>(window_fields_.size()); }
    [[nodiscard]] const SolverState& window_record(int substep) const;

protected:
    /// Native state after one step from (native, boundary) to the given next boundary vector.
    virtual Eigen::VectorXd step_native(const Eigen::VectorXd& native, const Eigen::VectorXd& boundary,
                                        const Eigen::VectorXd& next_boundary, double t_next) const = 0;
    void set_native(Eigen::VectorXd native, Eigen::VectorXd boundary, double t);
    void refresh_nodal();
    [[nodiscard]] Eigen::VectorXd assemble_boundary(double t, const Eigen::VectorXd& interface_values) const;

    StructuredMesh mesh_;
    SpaceTimeFunction dirichlet_;

private:
    std::vector<int> interface_positions_;
    std::vector<int> physical_positions_;
    std::vector<Point> physical_points_;

    Eigen::VectorXd native_;
    Eigen::VectorXd boundary_;
    Eigen::VectorXd nodal_;
    Eigen::VectorXd pending_interface_;
    double t_ = 0.0;

    SolverState window_start_;
    Eigen::VectorXd window_start_field_;
    std::vector<Eigen::VectorXd> window_fields_;
    std::vector<SolverState> window_records_;
    Eigen::MatrixXd window_interface_;
    bool in_window_ = false;
};

/// Full-order FE subdomain model.
class FeSubdomainSolver final : public SubdomainSolver {
public:
    FeSubdomainSolver(std::shared_ptr<const SemiDiscreteSystem> system, double dt);

    [[nodiscard]] std::string_view kind() const override { return "FE"; }
    [[nodiscard]] Eigen::VectorXd lift(const Eigen::VectorXd& native) const override { return native; }
    [[nodiscard]] Eigen::MatrixXd lift_all(const Eigen::MatrixXd& natives) const override { return natives; }
    [[nodiscard]] const SemiDiscreteSystem& system() const { return stepper_.system(); }

protected:
    Eigen::VectorXd step_native(const Eigen::VectorXd& native, const Eigen::VectorXd& boundary,
                                const Eigen::VectorXd& next_boundary, double t_next) const override;

private:
    ImplicitEulerStepper stepper_;
};

/// OpInf subdomain model; its state is the reduced coordinate vector.
class RomSubdomainSolver final : public SubdomainSolver {
public:
    RomSubdomainSolver(StructuredMesh mesh, SpaceTimeFunction dirichlet, PodBasis basis,
                       OpInfOperators ops, double dt);

    [[nodiscard]] std::string_view kind() const override { return "ROM"; }
    [[nodiscard]] Eigen::VectorXd lift(const Eigen::VectorXd& native) const override;
    [[nodiscard]] Eigen::MatrixXd lift_all(const Eigen::MatrixXd& natives) const override;
    [[nodiscard]] const PodBasis& basis() const { return basis_; }
    [[nodiscard]] const OpInfOperators& operators() const { return stepper_.operators(); }

protected:
    Eigen::VectorXd step_native(const Eigen::VectorXd& native, const Eigen::VectorXd& boundary,
                                const Eigen::VectorXd& next_boundary, double t_next) const override;

private:
    PodBasis basis_;
    RomStepper stepper_;
};

}  // namespace oifs
