#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oifs/config.hpp"
#include "oifs/metrics.hpp"
#include "oifs/rom.hpp"
#include "oifs/schwarz.hpp"
#include "oifs/timestep.hpp"

namespace oifs {

/// Monolithic FE run on the global mesh.
struct FomRun {
    StructuredMesh mesh;
    Trajectory trajectory;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

FomRun run_fom(const RunConfig& config, std::optional<double> t_end = std::nullopt);

/// Nodal fields (nodes x n_t) of a trajectory on its mesh.
Eigen::MatrixXd nodal_history(const StructuredMesh& mesh, const Trajectory& trajectory);

/// POD basis and OpInf operators of one subdomain.
struct TrainedRom {
    int subdomain = 0;  ///< zero-based subdomain index
    PodBasis basis;
    OpInfOperators ops;
};

/// POD + OpInf on a trajectory's leading `columns` snapshots (all when omitted).
TrainedRom train_rom(const Trajectory& trajectory, int r, double lambda, double dt, int subdomain,
                     std::optional<Eigen::Index> columns = std::nullopt);

struct TrainingRun {
    std::vector<TrainedRom> roms;
    CoupledResult source;  ///< all-FE Schwarz run over the training window
    double training_seconds = 0.0;
};

/// All-FE Schwarz over [0, training.t_end] followed by POD/OpInf for every ROM subdomain.
TrainingRun train_subdomain_roms(const RunConfig& config);

void save_trained_rom(const std::filesystem::path& dir, const TrainedRom& rom);
TrainedRom load_trained_rom(const std::filesystem::path& dir, int subdomain);

/// Solver factory: FE subdomains assemble and factorize, ROM subdomains take the matching trained model.
SolverFactory make_solver_factory(const RunConfig& config, std::span<const TrainedRom> roms, bool all_fe);

struct CoupledRun {
    CoupledResult result;
    std::vector<StructuredMesh> meshes;
    Eigen::MatrixXd stitched;  ///< global nodal fields, nodes x n_t
};

CoupledRun run_schwarz(const RunConfig& config, std::span<const TrainedRom> roms, bool all_fe,
                       std::optional<double> t_end = std::nullopt);

struct MonoOpInfRun {
    TrainedRom rom;
    Eigen::MatrixXd nodal;  ///< global nodal fields over [0, T]
    std::vector<double> times;
    std::vector<std::pair<double, double>> grid_errors;  ///< (lambda, training reprojection error)
    double training_seconds = 0.0;
    double solve_seconds = 0.0;
    bool diverged = false;
};

/// Relative reprojection error of a ROM re-simulated with the recorded boundary traces
/// against the first `columns` snapshots of `trajectory`.
double reprojection_error(const TrainedRom& rom, const Trajectory& trajectory, Eigen::Index columns, double dt);

/// Monolithic OpInf trained on the FOM's training window and integrated to T. With
/// `grid`, lambda minimizes the training-window reprojection error over the grid.
MonoOpInfRun run_mono_opinf(const RunConfig& config, const FomRun& fom,
                            std::optional<std::vector<double>> grid = std::nullopt);

struct ModelReport {
    std::string name;
    ErrorMetric error;
    double setup_seconds = 0.0;
    double training_seconds = 0.0;
    double solve_seconds = 0.0;
    double mean_iterations = 0.0;
    int max_iterations = 0;
    int unconverged_windows = 0;
    std::optional<double> lambda;
    bool diverged = false;
};

struct ComparisonReport {
    ModelReport reference;           ///< monolithic FE; error 0 by construction
    std::vector<ModelReport> models;  ///< All-FE Schwarz, OpInf-FE Schwarz, Mono. OpInf
    std::string environment;
};

/// Monolithic FE reference, all-FE Schwarz, hybrid OpInf-FE Schwarz and monolithic OpInf.
ComparisonReport compare_models(const RunConfig& config, std::optional<std::vector<double>> lambda_grid = std::nullopt);

std::string format_report(const ComparisonReport& report);
void write_report_csv(const std::filesystem::path& path, const ComparisonReport& report);

void save_trajectory(const std::filesystem::path& dir, const std::string& prefix, const Trajectory& trajectory);
Trajectory load_trajectory(const std::filesystem::path& dir, const std::string& prefix);

/// Description of the timing environment written next to every report.
std::string timing_environment();

}  // namespace oifs
