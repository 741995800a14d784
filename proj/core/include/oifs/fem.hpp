#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "oifs/mesh.hpp"

namespace oifs {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Scalar function of (t, x, y).
using SpaceTimeFunction = std::function<double(double, double, double)>;

/// Coefficients and data of  du/dt - eps*Lap(u) + b.grad(u) + sigma*u = f,  u = g on the boundary.
struct CdrParams {
    double epsilon = 1e-2;
    double sigma = 1e-3;
    std::array<double, 2> b{0.5, 0.86602540378443865};
    SpaceTimeFunction forcing = [](double, double, double) { return 1.0; };
    SpaceTimeFunction dirichlet = [](double, double, double) { return 0.0; };
};

/// Time-derivative mass. Lumped (row-sum) mass has no interior/boundary
/// coupling, so the lifted system is exactly  M dv/dt = -A_II v - A_IB g + F.
/// Consistent mass adds  -M_IB dg/dt  on the right-hand side.
enum class MassKind { Lumped, Consistent };

/// Throws ConfigError if epsilon <= 0, sigma < 0 or a function is empty.
void validate(const CdrParams& params);

using ElementMatrix = Eigen::Matrix4d;

/// 2x2 Gauss element matrices on an hx-by-hy cell, counterclockwise corner order.
ElementMatrix element_mass(double hx, double hy);
ElementMatrix element_diffusion(double hx, double hy);
/// Entry (a,c) = integral of (b . grad phi_c) phi_a.
ElementMatrix element_convection(double hx, double hy, std::array<double, 2> b);

/// Lifted semi-discrete FE system  M dv/dt = -A_II v - A_IB g + F(t)  over interior unknowns v.
class SemiDiscreteSystem {
public:
    SemiDiscreteSystem(StructuredMesh mesh, CdrParams params, MassKind mass_kind = MassKind::Lumped);

    [[nodiscard]] const StructuredMesh& mesh() const { return mesh_; }
    [[nodiscard]] const CdrParams& params() const { return params_; }

    [[nodiscard]] int interior_size() const { return static_cast<int>(interior_map_.size()); }
    [[nodiscard]] int boundary_size() const { return static_cast<int>(boundary_map_.size()); }

    [[nodiscard]] MassKind mass_kind() const { return mass_kind_; }
    /// Interior block of the time-derivative mass.
    [[nodiscard]] const SparseMatrix& mass() const { return mass_ii_; }
    /// Interior/boundary block of the time-derivative mass (empty pattern when lumped).
    [[nodiscard]] const SparseMatrix& mass_ib() const { return mass_ib_; }
    [[nodiscard]] const SparseMatrix& a_ii() const { return a_ii_; }
    [[nodiscard]] const SparseMatrix& a_ib() const { return a_ib_; }
    /// Consistent mass over all nodes, independent of mass_kind().
    [[nodiscard]] const SparseMatrix& mass_full() const { return mass_full_; }
    [[nodiscard]] const SparseMatrix& operator_full() const { return a_full_; }

    /// Node ids of the interior unknowns, in unknown order.
    [[nodiscard]] const std::vector<int>& interior_map() const { return interior_map_; }
    /// Node ids of the boundary values, in boundary-vector order.
    [[nodiscard]] const std::vector<int>& boundary_map() const { return boundary_map_; }

    /// Interior rows of the assembled load for f(t, ., .).
    [[nodiscard]] Eigen::VectorXd load_vector(double t) const;
    /// g(t, ., .) at the boundary nodes in boundary_map order.
    [[nodiscard]] Eigen::VectorXd boundary_values(double t) const;

    /// Full nodal field from interior coefficients and boundary values.
    [[nodiscard]] Eigen::VectorXd nodal_field(const Eigen::VectorXd& interior,
                                              const Eigen::VectorXd& boundary) const;
    void scatter(const Eigen::VectorXd& interior, const Eigen::VectorXd& boundary,
                 Eigen::VectorXd& nodal) const;

    /// Interior values of a full nodal field.
    [[nodiscard]] Eigen::VectorXd restrict_interior(const Eigen::VectorXd& nodal) const;

    /// Solves A_II v = -A_IB g + F for the discrete steady state.
    [[nodiscard]] Eigen::VectorXd solve_steady(const Eigen::VectorXd& boundary,
                                               const Eigen::VectorXd& load) const;

private:
    StructuredMesh mesh_;
    CdrParams params_;
    MassKind mass_kind_;
    std::vector<int> interior_map_;
    std::vector<int> boundary_map_;
    SparseMatrix mass_full_;
    SparseMatrix a_full_;
    SparseMatrix mass_ii_;
    SparseMatrix mass_ib_;
    SparseMatrix a_ii_;
    SparseMatrix a_ib_;
};

std::shared_ptr<const SemiDiscreteSystem> assemble(const StructuredMesh& mesh, const CdrParams& params,
                                                   MassKind mass_kind = MassKind::Lumped);

}  // namespace oifs
