#include "oifs/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "oifs/errors.hpp"
#include "oifs/matrix_io.hpp"

namespace oifs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string rom_prefix(int subdomain) { return "rom_" + std::to_string(subdomain + 1); }

Eigen::MatrixXd row_of(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), 1, static_cast<Eigen::Index>(v.size()));
}

const TrainedRom* find_rom(std::span<const TrainedRom> roms, int subdomain) {
    for (const auto& r : roms) {
        if (r.subdomain == subdomain) {
            return &r;
        }
    }
    return nullptr;
}

}  // namespace

FomRun run_fom(const RunConfig& config, std::optional<double> t_end) {
    const auto setup_start = Clock::now();
    StructuredMesh mesh = config.global_mesh();
    auto system = assemble(mesh, config.cdr_params());
    ImplicitEulerStepper stepper(system, config.problem.dt);
    const double setup = seconds_since(setup_start);

    const auto solve_start = Clock::now();
    Trajectory traj = run_transient(stepper, 0.0, t_end.value_or(config.problem.t_final),
                                    Eigen::VectorXd::Zero(system->interior_size()),
                                    [&](double t) { return system->boundary_values(t); });
    const double solve = seconds_since(solve_start);
    return {std::move(mesh), std::move(traj), setup, solve};
}

Eigen::MatrixXd nodal_history(const StructuredMesh& mesh, const Trajectory& trajectory) {
    Eigen::MatrixXd out(mesh.node_count(), trajectory.size());
    for (Eigen::Index c = 0; c < trajectory.size(); ++c) {
        out.col(c) = trajectory_nodal(mesh, trajectory, c);
    }
    return out;
}

TrainedRom train_rom(const Trajectory& trajectory, int r, double lambda, double dt, int subdomain,
                     std::optional<Eigen::Index> columns) {
    const Eigen::Index nt = columns.value_or(trajectory.size());
    if (nt < 3 || nt > trajectory.size()) {
        throw ConfigError("training window must contain between 3 and all recorded snapshots");
    }
    const Eigen::MatrixXd states = trajectory.states.leftCols(nt);
    const Eigen::MatrixXd traces = trajectory.boundary_traces.leftCols(nt);
    TrainedRom rom;
    rom.subdomain = subdomain;
    rom.basis = compute_pod(states, r);
    rom.ops = train_opinf(rom.basis, states, traces, dt, lambda);
    return rom;
}

TrainingRun train_subdomain_roms(const RunConfig& config) {
    TrainingRun run;
    const auto sc = config.schwarz_config(true, config.training.t_end);
    const auto& cdr = config.cdr_params();
    const double dt = config.problem.dt;
    run.source = run_coupled(sc, [&](const SubdomainSpec&, int, const StructuredMesh& mesh) {
        return std::make_unique<FeSubdomainSolver>(assemble(mesh, cdr), dt);
    });
    const auto start = Clock::now();
    const auto& subs = config.decomposition.subdomains;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i].model != ModelKind::ROM) {
            continue;
        }
        run.roms.push_back(train_rom(run.source.trajectories[i], subs[i].r, subs[i].lambda, dt, static_cast<int>(i)));
    }
    run.training_seconds = seconds_since(start);
    return run;
}

void save_trained_rom(const std::filesystem::path& dir, const TrainedRom& rom) {
    std::filesystem::create_directories(dir);
    const std::string p = rom_prefix(rom.subdomain);
    save_matrix(dir / (p + "_basis.oifs"), rom.basis.psi);
    save_matrix(dir / (p + "_singular_values.oifs"), rom.basis.singular_values);
    save_matrix(dir / (p + "_khat.oifs"), rom.ops.khat);
    save_matrix(dir / (p + "_bhat.oifs"), rom.ops.bhat);
    save_matrix(dir / (p + "_fhat.oifs"), rom.ops.fhat);
    save_matrix(dir / (p + "_lambda.oifs"), Eigen::MatrixXd::Constant(1, 1, rom.ops.lambda));
}

TrainedRom load_trained_rom(const std::filesystem::path& dir, int subdomain) {
    const std::string p = rom_prefix(subdomain);
    for (const char* part : {"_basis", "_singular_values", "_khat", "_bhat", "_fhat", "_lambda"}) {
        const auto f = dir / (p + part + ".oifs");
        if (!std::filesystem::exists(f)) {
            throw ConfigError("missing trained operator file '" + f.string() + "' (run `train` first)");
        }
    }
    TrainedRom rom;
    rom.subdomain = subdomain;
    rom.basis.psi = load_matrix(dir / (p + "_basis.oifs"));
    rom.basis.singular_values = load_matrix(dir / (p + "_singular_values.oifs"));
    rom.basis.r = static_cast<int>(rom.basis.psi.cols());
    rom.ops.khat = load_matrix(dir / (p + "_khat.oifs"));
    rom.ops.bhat = load_matrix(dir / (p + "_bhat.oifs"));
    rom.ops.fhat = load_matrix(dir / (p + "_fhat.oifs"));
    const Eigen::MatrixXd lambda = load_matrix(dir / (p + "_lambda.oifs"));
    if (lambda.size() != 1 || rom.basis.singular_values.cols() != 1 || rom.ops.fhat.cols() != 1) {
        throw FormatError("trained operator files for " + p + " have unexpected shapes");
    }
    rom.ops.lambda = lambda(0, 0);
    return rom;
}

SolverFactory make_solver_factory(const RunConfig& config, std::span<const TrainedRom> roms, bool all_fe) {
    const CdrParams cdr = config.cdr_params();
    const double dt = config.problem.dt;
    std::vector<TrainedRom> owned(roms.begin(), roms.end());
    return [cdr, dt, owned = std::move(owned), all_fe](const SubdomainSpec& spec, int index,
                                                      const StructuredMesh& mesh) -> std::unique_ptr<SubdomainSolver> {
        if (all_fe || spec.model == ModelKind::FE) {
            return std::make_unique<FeSubdomainSolver>(assemble(mesh, cdr), dt);
        }
        const TrainedRom* rom = find_rom(owned, index);
        if (rom == nullptr) {
            throw ConfigError("no trained ROM for subdomain " + std::to_string(index + 1));
        }
        return std::make_unique<RomSubdomainSolver>(mesh, cdr.dirichlet, rom->basis, rom->ops, dt);
    };
}

CoupledRun run_schwarz(const RunConfig& config, std::span<const TrainedRom> roms, bool all_fe,
                       std::optional<double> t_end) {
    const SchwarzConfig sc = config.schwarz_config(all_fe, t_end);
    CoupledRun run;
    run.result = run_coupled(sc, make_solver_factory(config, roms, all_fe));
    for (const auto& s : sc.subdomains) {
        run.meshes.push_back(subdomain_mesh(s));
    }
    run.stitched = stitch_trajectories(run.meshes, run.result.trajectories, config.global_mesh());
    return run;
}

double reprojection_error(const TrainedRom& rom, const Trajectory& trajectory, Eigen::Index columns, double dt) {
    RomStepper stepper(rom.ops, dt);
    const Eigen::MatrixXd reference = trajectory.states.leftCols(columns);
    Eigen::MatrixXd predicted(reference.rows(), columns);
    Eigen::VectorXd vhat = rom.basis.psi.transpose() * reference.col(0);
    predicted.col(0) = reconstruct(rom.basis, vhat);
    for (Eigen::Index c = 1; c < columns; ++c) {
        vhat = stepper.step(vhat, trajectory.boundary_traces.col(c));
        if (!vhat.allFinite()) {
            return std::numeric_limits<double>::infinity();
        }
        predicted.col(c) = reconstruct(rom.basis, vhat);
    }
    const double e = time_averaged_relative_error(predicted, reference).value;
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

MonoOpInfRun run_mono_opinf(const RunConfig& config, const FomRun& fom, std::optional<std::vector<double>> grid) {
    const double dt = config.problem.dt;
    const Eigen::Index train_cols = step_count(0.0, config.training.t_end, dt) + 1;
    if (fom.trajectory.size() < train_cols) {
        throw ConfigError("monolithic snapshots do not cover the training window");
    }
    MonoOpInfRun run;
    const auto train_start = Clock::now();
    if (grid) {
        if (grid->empty()) {
            throw ConfigError("lambda grid is empty");
        }
        double best = std::numeric_limits<double>::infinity();
        for (double lambda : *grid) {
            TrainedRom candidate = train_rom(fom.trajectory, config.mono.r, lambda, dt, -1, train_cols);
            double err = std::numeric_limits<double>::infinity();
            try {
                err = reprojection_error(candidate, fom.trajectory, train_cols, dt);
            } catch (const NumericalError&) {
            }
            run.grid_errors.emplace_back(lambda, err);
            if (err < best || run.rom.ops.khat.size() == 0) {
                if (err < best) {
                    best = err;
                }
                run.rom = std::move(candidate);
            }
        }
    } else {
        run.rom = train_rom(fom.trajectory, config.mono.r, config.mono.lambda, dt, -1, train_cols);
    }
    run.training_seconds = seconds_since(train_start);

    const auto& mesh = fom.mesh;
    const auto& traj = fom.trajectory;
    const Eigen::Index nt = traj.size();
    run.times = traj.times;
    run.nodal.resize(mesh.node_count(), nt);

    const auto solve_start = Clock::now();
    Eigen::MatrixXd reduced(run.rom.basis.r, nt);
    try {
        RomStepper stepper(run.rom.ops, dt);
        Eigen::VectorXd vhat = Eigen::VectorXd::Zero(run.rom.basis.r);
        reduced.col(0) = vhat;
        for (Eigen::Index c = 1; c < nt; ++c) {
            vhat = stepper.step(vhat, traj.boundary_traces.col(c));
            if (!vhat.allFinite()) {
                run.diverged = true;
                break;
            }
            reduced.col(c) = vhat;
        }
    } catch (const NumericalError&) {
        run.diverged = true;
    }
    run.solve_seconds = seconds_since(solve_start);

    if (run.diverged) {
        run.nodal.setConstant(std::numeric_limits<double>::quiet_NaN());
        return run;
    }
    Trajectory rom_traj;
    rom_traj.times = traj.times;
    rom_traj.states = run.rom.basis.psi * reduced;
    rom_traj.boundary_traces = traj.boundary_traces;
    run.nodal = nodal_history(mesh, rom_traj);
    return run;
}

ComparisonReport compare_models(const RunConfig& config, std::optional<std::vector<double>> lambda_grid) {
    ComparisonReport report;
    report.environment = timing_environment();

    const FomRun fom = run_fom(config);
    const Eigen::MatrixXd reference = nodal_history(fom.mesh, fom.trajectory);
    ModelReport& ref = report.reference;
    ref.name = "Monolithic FE";
    ref.error = time_averaged_relative_error(reference, reference, fom.trajectory.times, fom.trajectory.times);
    ref.setup_seconds = fom.setup_seconds;
    ref.solve_seconds = fom.solve_seconds;

    auto coupled_report = [&](const std::string& name, std::span<const TrainedRom> roms, bool all_fe,
                              double training_seconds) {
        ModelReport m;
        m.name = name;
        m.training_seconds = training_seconds;
        try {
            const CoupledRun run = run_schwarz(config, roms, all_fe);
            m.error = time_averaged_relative_error(run.stitched, reference, run.result.trajectories[0].times,
                                                   fom.trajectory.times);
            m.setup_seconds = run.result.timings.setup_seconds;
            m.solve_seconds = run.result.timings.solve_seconds;
            m.mean_iterations = run.result.mean_iterations();
            m.max_iterations = run.result.max_iterations();
            m.unconverged_windows = run.result.unconverged_windows;
        } catch (const DivergenceError&) {
            m.diverged = true;
            m.error.value = std::numeric_limits<double>::quiet_NaN();
        }
        return m;
    };

    report.models.push_back(coupled_report("All-FE Schwarz", {}, true, 0.0));

    const TrainingRun training = train_subdomain_roms(config);
    ModelReport hybrid = coupled_report("OpInf-FE Schwarz", training.roms, false, training.training_seconds);
    if (!training.roms.empty()) {
        hybrid.lambda = training.roms.front().ops.lambda;
    }
    report.models.push_back(hybrid);

    std::optional<std::vector<double>> grid = lambda_grid;
    if (!grid && config.mono.lambda_search) {
        grid = config.mono_lambda_grid();
    }
    const MonoOpInfRun mono = run_mono_opinf(config, fom, grid);
    ModelReport m;
    m.name = "Mono. OpInf";
    m.training_seconds = mono.training_seconds;
    m.solve_seconds = mono.solve_seconds;
    m.lambda = mono.rom.ops.lambda;
    m.diverged = mono.diverged;
    m.error = time_averaged_relative_error(mono.nodal, reference, mono.times, fom.trajectory.times);
    report.models.push_back(m);
    return report;
}

std::string format_report(const ComparisonReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(20) << "";
    for (const auto& m : report.models) {
        out << " | " << std::setw(18) << m.name;
    }
    out << "\n";
    auto row = [&](const std::string& label, auto&& value) {
        out << std::left << std::setw(20) << label;
        for (const auto& m : report.models) {
            std::ostringstream cell;
            value(cell, m);
            out << " | " << std::setw(18) << cell.str();
        }
        out << "\n";
    };
    row("CPU time (s)", [](std::ostream& o, const ModelReport& m) { o << std::fixed << std::setprecision(3) << m.solve_seconds; });
    row("Error", [](std::ostream& o, const ModelReport& m) {
        o << std::scientific << std::setprecision(2) << m.error.value << (m.error.absolute ? " (abs)" : "")
          << (m.diverged ? " (diverged)" : "");
    });
    out << "\n";
    row("setup (s)", [](std::ostream& o, const ModelReport& m) { o << std::fixed << std::setprecision(3) << m.setup_seconds; });
    row("training (s)", [](std::ostream& o, const ModelReport& m) { o << std::fixed << std::setprecision(3) << m.training_seconds; });
    row("iters mean/max", [](std::ostream& o, const ModelReport& m) {
        if (m.max_iterations > 0) {
            o << std::fixed << std::setprecision(2) << m.mean_iterations << "/" << m.max_iterations;
        } else {
            o << "-";
        }
    });
    row("lambda", [](std::ostream& o, const ModelReport& m) {
        if (m.lambda) {
            o << *m.lambda;
        } else {
            o << "-";
        }
    });
    out << "\nreference: " << report.reference.name << ", solve " << std::fixed << std::setprecision(3)
        << report.reference.solve_seconds << " s, setup " << report.reference.setup_seconds << " s\n";
    out << report.environment << "\n";
    return out.str();
}

void write_report_csv(const std::filesystem::path& path, const ComparisonReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << std::setprecision(17);
    out << "model,error,error_is_absolute,solve_seconds,setup_seconds,training_seconds,mean_iterations,"
           "max_iterations,unconverged_windows,lambda,diverged\n";
    std::vector<ModelReport> rows{report.reference};
    rows.insert(rows.end(), report.models.begin(), report.models.end());
    for (const auto& m : rows) {
        out << '"' << m.name << "\"," << m.error.value << ',' << (m.error.absolute ? 1 : 0) << ',' << m.solve_seconds
            << ',' << m.setup_seconds << ',' << m.training_seconds << ',' << m.mean_iterations << ','
            << m.max_iterations << ',' << m.unconverged_windows << ',';
        if (m.lambda) {
            out << *m.lambda;
        }
        out << ',' << (m.diverged ? 1 : 0) << '\n';
    }
}

void save_trajectory(const std::filesystem::path& dir, const std::string& prefix, const Trajectory& trajectory) {
    std::filesystem::create_directories(dir);
    save_matrix(dir / (prefix + "_times.oifs"), row_of(trajectory.times));
    save_matrix(dir / (prefix + "_states.oifs"), trajectory.states);
    save_matrix(dir / (prefix + "_traces.oifs"), trajectory.boundary_traces);
}

Trajectory load_trajectory(const std::filesystem::path& dir, const std::string& prefix) {
    Trajectory t;
    const Eigen::MatrixXd times = load_matrix(dir / (prefix + "_times.oifs"));
    t.times.assign(times.data(), times.data() + times.size());
    t.states = load_matrix(dir / (prefix + "_states.oifs"));
    t.boundary_traces = load_matrix(dir / (prefix + "_traces.oifs"));
    if (t.states.cols() != t.size() || t.boundary_traces.cols() != t.size()) {
        throw FormatError("trajectory files for '" + prefix + "' disagree on the number of snapshots");
    }
    return t;
}

std::string timing_environment() {
    std::ostringstream out;
    out << "timing: steady_clock wall time of the time loop only (assembly/factorization and training reported "
           "separately); single process, single thread; one sparse LU of (M + dt A_II) per FE subdomain and one "
           "dense LU of (I - dt Khat) per ROM, reused for every step and Schwarz iteration";
#if defined(__clang__)
    out << "; compiler clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
    out << "; compiler gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#endif
#ifdef NDEBUG
    out << ", optimized build";
#else
    out << ", debug build";
#endif
    return out.str();
}

}  // namespace oifs
