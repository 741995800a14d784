#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oifs/mesh.hpp"
#include "oifs/subdomain_solver.hpp"
#include "oifs/timestep.hpp"

namespace oifs {

enum class ModelKind { FE, ROM };

struct SubdomainSpec {
    Rect rect;
    int nx = 1;
    int ny = 1;
    ModelKind model = ModelKind::FE;
    int r = 10;
    double lambda = 0.0;
    std::string operator_source;  ///< directory or file prefix of trained operators
};

struct SchwarzConfig {
    Rect domain{0.0, 1.0, 0.0, 1.0};
    std::vector<SubdomainSpec> subdomains;
    double dt = 5e-3;
    double t_final = 5.0;
    double tol = 1e-9;
    int max_iters = 50;
    int steps_per_window = 1;
};

/// Throws ConfigError on tol <= 0, max_iters < 1, subdomains outside the
/// domain or a union of subdomains that leaves part of the domain uncovered.
void validate(const SchwarzConfig& config);

/// Four overlapping quadrants: [0,c+w/2]^2-style rects around the domain center with
/// an overlap band of width `overlap`; each axis is meshed at spacing h.
std::vector<SubdomainSpec> quadrant_layout(const Rect& domain, double overlap, double h);

/// Mesh of a subdomain spec.
StructuredMesh subdomain_mesh(const SubdomainSpec& spec);

struct InterfaceNode {
    int boundary_position = 0;  ///< index into the receiver's boundary vector
    int node_id = 0;            ///< receiver-local node id
    int donor = 0;              ///< donor subdomain index
    Point point;
};

/// Interface nodes of one receiver that share a donor, with stencils on the donor mesh.
struct DonorGroup {
    int donor = 0;
    std::vector<int> slots;  ///< positions within the receiver's interface list
    PointSampler sampler;
};

struct SubdomainInterfaces {
    std::vector<InterfaceNode> nodes;  ///< ordered by boundary_position
    std::vector<DonorGroup> groups;

    [[nodiscard]] std::vector<int> boundary_positions() const;
};

using InterfaceTable = std::vector<SubdomainInterfaces>;

/// Donor for every subdomain boundary node off the global boundary: the
/// covering subdomain (other than the receiver) in whose rect the node lies
/// deepest; ties go to the lower index. Nodes without a strictly covering
/// subdomain raise ConfigError.
InterfaceTable build_interfaces(const SchwarzConfig& config);

struct WindowResult {
    int iterations = 0;
    bool converged = false;
    double trace_change = 0.0;  ///< last relative sup-norm interface change
};

enum class WindowStart { Fresh, Warm };

/// Multiplicative Schwarz on one window [t_n, t_n + substeps*dt]. Each iteration
/// visits subdomains in index order, samples donors' latest iterates at every
/// sub-step, restarts the receiver from t_n and advances it through the window.
/// Fresh starts a new window from the solvers' current states; Warm re-runs the
/// window keeping the previous iterates as the initial guess.
WindowResult schwarz_window(std::span<const std::unique_ptr<SubdomainSolver>> solvers,
                            const InterfaceTable& interfaces, double t_n, double dt, int substeps,
                            double tol, int max_iters, WindowStart start = WindowStart::Fresh);

using SolverFactory =
    std::function<std::unique_ptr<SubdomainSolver>(const SubdomainSpec& spec, int index, const StructuredMesh& mesh)>;

struct PhaseTimings {
    double setup_seconds = 0.0;        ///< solver construction (assembly, factorizations)
    double solve_seconds = 0.0;        ///< time loop only
    double postprocess_seconds = 0.0;  ///< lifting recorded states to FE space
};

struct CoupledResult {
    std::vector<Trajectory> trajectories;  ///< per subdomain, interior states in FE space
    std::vector<int> iterations;           ///< per window
    std::vector<std::string> kinds;        ///< per subdomain model kind
    int unconverged_windows = 0;
    PhaseTimings timings;

    [[nodiscard]] double mean_iterations() const;
    [[nodiscard]] int max_iterations() const;
};

/// Creates solvers through the factory and couples them over [0, t_final].
CoupledResult run_coupled(const SchwarzConfig& config, const SolverFactory& factory);

/// Same, on already-constructed solvers positioned at t = 0.
CoupledResult run_coupled(const SchwarzConfig& config, std::vector<std::unique_ptr<SubdomainSolver>>& solvers,
                          const InterfaceTable& interfaces);

struct SubdomainField {
    const StructuredMesh* mesh = nullptr;
    Eigen::VectorXd nodal;
};

/// Global nodal field: per global node, the mean of every covering subdomain's interpolant.
Eigen::VectorXd stitch(std::span<const SubdomainField> fields, const StructuredMesh& global);

/// Stitched global nodal fields (nodes x n_t) for per-subdomain trajectories on a common time grid.
Eigen::MatrixXd stitch_trajectories(std::span<const StructuredMesh> meshes,
                                    std::span<const Trajectory> trajectories,
                                    const StructuredMesh& global);

/// Nodal field of one trajectory column on its mesh.
Eigen::VectorXd trajectory_nodal(const StructuredMesh& mesh, const Trajectory& traj, Eigen::Index column);

}  // namespace oifs
