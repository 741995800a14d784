// oifs: hybrid FE / Operator Inference Schwarz solver for the 2D CDR problem.
//
//   oifs run-fom         monolithic FE reference over [0, T]
//   oifs run-schwarz     all-FE overlapping Schwarz over [0, T]
//   oifs train           all-FE Schwarz on the training window, then POD + OpInf per ROM subdomain
//   oifs run-hybrid      Schwarz with trained ROM subdomains
//   oifs run-mono-opinf  monolithic OpInf model
//   oifs compare         all of the above plus the accuracy/cost table
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error, 3 numerical divergence.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oifs/config.hpp"
#include "oifs/errors.hpp"
#include "oifs/matrix_io.hpp"
#include "oifs/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<long> seed;
    std::string lambda_grid;
};

oifs::RunConfig load(const Options& opt) {
    oifs::RunConfig cfg = opt.config_path.empty() ? oifs::parse_config_text("") : oifs::parse_config(opt.config_path);
    if (!opt.out_dir.empty()) {
        cfg.output.dir = opt.out_dir;
    }
    if (!opt.lambda_grid.empty()) {
        cfg.mono.lambda_grid.clear();
        std::stringstream in(opt.lambda_grid);
        std::string item;
        while (std::getline(in, item, ',')) {
            try {
                cfg.mono.lambda_grid.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw oifs::ConfigError("--lambda-grid: cannot parse '" + item + "'");
            }
        }
        cfg.mono.lambda_search = true;
        oifs::validate(cfg);
    }
    fs::create_directories(cfg.output.dir);
    return cfg;
}

std::string time_tag(double t) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << t;
    return s.str();
}

void export_fields(const oifs::RunConfig& cfg, const std::string& prefix, const oifs::StructuredMesh& mesh,
                   const Eigen::MatrixXd& nodal) {
    std::vector<double> times = cfg.output.field_times;
    if (times.empty()) {
        times.push_back(cfg.problem.t_final);
    }
    for (double t : times) {
        const auto col = static_cast<Eigen::Index>(oifs::step_count(0.0, t, cfg.problem.dt));
        if (col < nodal.cols()) {
            oifs::export_field_csv(fs::path(cfg.output.dir) / (prefix + "_t" + time_tag(t) + ".csv"), mesh,
                                   nodal.col(col));
        }
    }
}

void report_error_against_fom(const oifs::RunConfig& cfg, const Eigen::MatrixXd& nodal,
                              const std::vector<double>& times) {
    const fs::path dir(cfg.output.dir);
    if (!fs::exists(dir / "fom_states.oifs")) {
        std::cout << "error vs monolithic FE: (no fom_* snapshots in " << dir << "; run `run-fom` first)\n";
        return;
    }
    const oifs::Trajectory fom = oifs::load_trajectory(dir, "fom");
    const auto err = oifs::time_averaged_relative_error(nodal, oifs::nodal_history(cfg.global_mesh(), fom), times,
                                                        fom.times);
    std::cout << "error vs monolithic FE: " << std::scientific << std::setprecision(3) << err.value
              << (err.absolute ? " (absolute; reference is zero)" : "") << "\n";
}

void print_coupled(const oifs::CoupledRun& run) {
    const auto& r = run.result;
    std::cout << std::fixed << std::setprecision(3) << "setup " << r.timings.setup_seconds << " s, solve "
              << r.timings.solve_seconds << " s; Schwarz iterations mean " << std::setprecision(2)
              << r.mean_iterations() << ", max " << r.max_iterations() << ", unconverged windows "
              << r.unconverged_windows << "\n";
}

int cmd_run_fom(const Options& opt) {
    const auto cfg = load(opt);
    const auto fom = oifs::run_fom(cfg);
    oifs::save_trajectory(cfg.output.dir, "fom", fom.trajectory);
    export_fields(cfg, "fom", fom.mesh, oifs::nodal_history(fom.mesh, fom.trajectory));
    std::cout << "monolithic FE: " << fom.trajectory.states.rows() << " interior DOFs, " << fom.trajectory.size()
              << " snapshots; setup " << std::fixed << std::setprecision(3) << fom.setup_seconds << " s, solve "
              << fom.solve_seconds << " s\n";
    return 0;
}

int cmd_run_schwarz(const Options& opt) {
    const auto cfg = load(opt);
    const auto run = oifs::run_schwarz(cfg, {}, true);
    for (std::size_t i = 0; i < run.result.trajectories.size(); ++i) {
        oifs::save_trajectory(cfg.output.dir, "schwarz_fe_" + std::to_string(i + 1), run.result.trajectories[i]);
    }
    export_fields(cfg, "schwarz_fe", cfg.global_mesh(), run.stitched);
    print_coupled(run);
    report_error_against_fom(cfg, run.stitched, run.result.trajectories.front().times);
    return run.result.unconverged_windows > 0 ? 3 : 0;
}

int cmd_train(const Options& opt) {
    const auto cfg = load(opt);
    const auto training = oifs::train_subdomain_roms(cfg);
    for (const auto& rom : training.roms) {
        oifs::save_trained_rom(cfg.output.dir, rom);
        const auto& sv = rom.basis.singular_values;
        std::cout << "subdomain " << rom.subdomain + 1 << ": r=" << rom.basis.r << ", m=" << rom.ops.m()
                  << ", lambda=" << rom.ops.lambda << ", retained energy " << std::setprecision(10)
                  << rom.basis.retained_energy() << ", sum sigma^2 = " << sv.squaredNorm() << "\n";
    }
    std::cout << std::fixed << std::setprecision(3) << "training Schwarz solve " << training.source.timings.solve_seconds
              << " s, POD/OpInf " << training.training_seconds << " s\n";
    return 0;
}

int cmd_run_hybrid(const Options& opt) {
    const auto cfg = load(opt);
    std::vector<oifs::TrainedRom> roms;
    const auto& subs = cfg.decomposition.subdomains;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i].model == oifs::ModelKind::ROM) {
            const fs::path dir = subs[i].operator_source.empty() ? fs::path(cfg.output.dir) : fs::path(subs[i].operator_source);
            roms.push_back(oifs::load_trained_rom(dir, static_cast<int>(i)));
        }
    }
    const auto run = oifs::run_schwarz(cfg, roms, false);
    for (std::size_t i = 0; i < run.result.trajectories.size(); ++i) {
        oifs::save_trajectory(cfg.output.dir, "hybrid_" + std::to_string(i + 1), run.result.trajectories[i]);
    }
    export_fields(cfg, "hybrid", cfg.global_mesh(), run.stitched);
    print_coupled(run);
    report_error_against_fom(cfg, run.stitched, run.result.trajectories.front().times);
    return 0;
}

int cmd_run_mono_opinf(const Options& opt) {
    const auto cfg = load(opt);
    const fs::path dir(cfg.output.dir);
    oifs::FomRun fom{cfg.global_mesh(), {}, 0.0, 0.0};
    if (fs::exists(dir / "fom_states.oifs")) {
        fom.trajectory = oifs::load_trajectory(dir, "fom");
    } else {
        fom = oifs::run_fom(cfg);
        oifs::save_trajectory(dir, "fom", fom.trajectory);
    }
    std::optional<std::vector<double>> grid;
    if (cfg.mono.lambda_search) {
        grid = cfg.mono_lambda_grid();
    }
    const auto mono = oifs::run_mono_opinf(cfg, fom, grid);
    for (const auto& [lambda, err] : mono.grid_errors) {
        std::cout << "lambda " << std::setw(8) << lambda << "  training reprojection error " << std::scientific
                  << std::setprecision(3) << err << std::defaultfloat << "\n";
    }
    oifs::save_matrix(dir / "mono_khat.oifs", mono.rom.ops.khat);
    oifs::save_matrix(dir / "mono_bhat.oifs", mono.rom.ops.bhat);
    oifs::save_matrix(dir / "mono_fhat.oifs", mono.rom.ops.fhat);
    oifs::save_matrix(dir / "mono_basis.oifs", mono.rom.basis.psi);
    std::cout << "monolithic OpInf: r=" << mono.rom.basis.r << ", lambda=" << mono.rom.ops.lambda << ", solve "
              << std::fixed << std::setprecision(3) << mono.solve_seconds << " s\n";
    if (mono.diverged) {
        std::cerr << "monolithic OpInf diverged\n";
        return 3;
    }
    export_fields(cfg, "mono_opinf", fom.mesh, mono.nodal);
    const auto err = oifs::time_averaged_relative_error(mono.nodal, oifs::nodal_history(fom.mesh, fom.trajectory));
    std::cout << "error vs monolithic FE: " << std::scientific << std::setprecision(3) << err.value << "\n";
    return 0;
}

int cmd_compare(const Options& opt) {
    const auto cfg = load(opt);
    const auto report = oifs::compare_models(cfg);
    std::cout << oifs::format_report(report);
    oifs::write_report_csv(fs::path(cfg.output.dir) / "comparison.csv", report);
    std::ofstream(fs::path(cfg.output.dir) / "comparison.txt") << oifs::format_report(report);
    for (const auto& m : report.models) {
        if (m.diverged) {
            return 3;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid finite element / Operator Inference Schwarz solver"};
    app.require_subcommand(1);
    Options opt;

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const std::vector<Command> commands{
        {"run-fom", "Monolithic FE reference run", cmd_run_fom},
        {"run-schwarz", "All-FE overlapping Schwarz run", cmd_run_schwarz},
        {"train", "Train subdomain OpInf models from an all-FE Schwarz run", cmd_train},
        {"run-hybrid", "Schwarz run with trained ROM subdomains", cmd_run_hybrid},
        {"run-mono-opinf", "Monolithic OpInf run", cmd_run_mono_opinf},
        {"compare", "Run all models and write the comparison table", cmd_compare},
    };
    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opt.config_path, "Configuration file (key = value)");
        sub->add_option("--out", opt.out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--seed", opt.seed, "Reserved; all runs are deterministic");
        sub->add_option("--lambda-grid", opt.lambda_grid, "Comma-separated lambda grid for the monolithic ROM");
        subs.emplace_back(sub, c.fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, fn] : subs) {
            if (sub->parsed()) {
                return fn(opt);
            }
        }
    } catch (const oifs::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const oifs::DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
