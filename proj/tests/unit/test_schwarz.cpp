#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "oifs/errors.hpp"
#include "oifs/metrics.hpp"
#include "oifs/schwarz.hpp"

using namespace oifs;

namespace {

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

SubdomainSpec fe_spec(Rect rect, double h) {
    SubdomainSpec s;
    s.rect = rect;
    s.nx = static_cast<int>(std::lround(rect.width() / h));
    s.ny = static_cast<int>(std::lround(rect.height() / h));
    return s;
}

SchwarzConfig strips(double overlap, double h) {
    SchwarzConfig c;
    c.subdomains = {fe_spec({0.0, 0.5 + overlap / 2, 0.0, 1.0}, h), fe_spec({0.5 - overlap / 2, 1.0, 0.0, 1.0}, h)};
    return c;
}

SolverFactory fe_factory(const CdrParams& params, double dt) {
    return [params, dt](const SubdomainSpec&, int, const StructuredMesh& mesh) -> std::unique_ptr<SubdomainSolver> {
        return std::make_unique<FeSubdomainSolver>(assemble(mesh, params), dt);
    };
}

std::vector<std::unique_ptr<SubdomainSolver>> make_solvers(const SchwarzConfig& cfg, const InterfaceTable& itf,
                                                           const SolverFactory& factory) {
    std::vector<std::unique_ptr<SubdomainSolver>> out;
    for (std::size_t i = 0; i < cfg.subdomains.size(); ++i) {
        out.push_back(factory(cfg.subdomains[i], static_cast<int>(i), subdomain_mesh(cfg.subdomains[i])));
        out.back()->set_interface_positions(itf[i].boundary_positions());
        out.back()->impose_boundary(0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(itf[i].nodes.size())));
    }
    return out;
}

Eigen::MatrixXd monolithic(const CdrParams& params, int n, double dt, double t_final, StructuredMesh& mesh_out) {
    mesh_out = build_mesh(kUnit, n, n);
    const auto sys = assemble(mesh_out, params);
    const Trajectory traj = run_transient(ImplicitEulerStepper(sys, dt), 0.0, t_final,
                                          Eigen::VectorXd::Zero(sys->interior_size()),
                                          [&](double t) { return sys->boundary_values(t); });
    Eigen::MatrixXd nodal(mesh_out.node_count(), traj.size());
    for (Eigen::Index c = 0; c < traj.size(); ++c) {
        nodal.col(c) = sys->nodal_field(traj.states.col(c), traj.boundary_traces.col(c));
    }
    return nodal;
}

Eigen::MatrixXd coupled_nodal(const SchwarzConfig& cfg, const CoupledResult& res, const StructuredMesh& global) {
    std::vector<StructuredMesh> meshes;
    for (const auto& s : cfg.subdomains) {
        meshes.push_back(subdomain_mesh(s));
    }
    return stitch_trajectories(meshes, res.trajectories, global);
}

}  // namespace

TEST(Donors, TwoStrips) {
    const SchwarzConfig cfg = strips(0.2, 0.1);
    const InterfaceTable table = build_interfaces(cfg);
    ASSERT_EQ(table.size(), 2u);
    ASSERT_EQ(table[0].nodes.size(), 9u);
    ASSERT_EQ(table[1].nodes.size(), 9u);
    for (const auto& n : table[0].nodes) {
        EXPECT_NEAR(n.point.x, 0.6, 1e-12);
        EXPECT_EQ(n.donor, 1);
    }
    for (const auto& n : table[1].nodes) {
        EXPECT_NEAR(n.point.x, 0.4, 1e-12);
        EXPECT_EQ(n.donor, 0);
    }
}

TEST(Donors, QuadrantLayout) {
    SchwarzConfig cfg;
    cfg.subdomains = quadrant_layout(kUnit, 0.08, 0.02);
    ASSERT_EQ(cfg.subdomains.size(), 4u);
    EXPECT_NEAR(cfg.subdomains[0].rect.x1, 0.54, 1e-15);
    EXPECT_NEAR(cfg.subdomains[3].rect.x0, 0.46, 1e-15);
    EXPECT_EQ(cfg.subdomains[0].nx, 27);
    const InterfaceTable table = build_interfaces(cfg);
    int top_left = 0;
    for (const auto& n : table[0].nodes) {
        const bool top = std::abs(n.point.y - 0.54) < 1e-12;
        const bool right = std::abs(n.point.x - 0.54) < 1e-12;
        if (top && n.point.x < 0.46 - 1e-12) {
            EXPECT_EQ(n.donor, 2) << n.point.x;
            ++top_left;
        } else if (right && n.point.y < 0.46 - 1e-12) {
            EXPECT_EQ(n.donor, 1) << n.point.y;
        } else {
            // Inside the central overlap square: the deepest donor, lower index on ties.
            const double d2 = cfg.subdomains[2].rect.inner_distance(n.point);
            const double d1 = cfg.subdomains[1].rect.inner_distance(n.point);
            const double d3 = cfg.subdomains[3].rect.inner_distance(n.point);
            const double best = std::max({d1, d2, d3});
            const int expected = d1 >= best - 1e-12 ? 1 : (d2 >= best - 1e-12 ? 2 : 3);
            EXPECT_EQ(n.donor, expected) << n.point.x << "," << n.point.y;
        }
        EXPECT_TRUE(top || right);
    }
    EXPECT_EQ(top_left, 22);  // x = 0.02 .. 0.44
    for (const auto& n : table[3].nodes) {
        EXPECT_NE(n.donor, 3);
    }
}

TEST(Donors, TouchingSubdomainsAreRejected) {
    EXPECT_THROW(build_interfaces(strips(0.0, 0.1)), ConfigError);
}

TEST(Donors, UncoveredDomainIsRejected) {
    SchwarzConfig cfg;
    cfg.subdomains = {fe_spec({0.0, 0.4, 0.0, 1.0}, 0.1), fe_spec({0.6, 1.0, 0.0, 1.0}, 0.1)};
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Window, SingleSubdomainMatchesUncoupledStep) {
    SchwarzConfig cfg;
    cfg.subdomains = {fe_spec(kUnit, 0.1)};
    const CdrParams params;
    const InterfaceTable table = build_interfaces(cfg);
    EXPECT_TRUE(table[0].nodes.empty());
    auto solvers = make_solvers(cfg, table, fe_factory(params, 0.01));
    const WindowResult wr = schwarz_window(solvers, table, 0.0, 0.01, 1, 1e-12, 10);
    EXPECT_EQ(wr.iterations, 1);
    EXPECT_TRUE(wr.converged);
    const auto sys = assemble(subdomain_mesh(cfg.subdomains[0]), params);
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(sys->boundary_size());
    const Eigen::VectorXd expected = ImplicitEulerStepper(sys, 0.01).step(Eigen::VectorXd::Zero(sys->interior_size()), g, 0.01);
    EXPECT_EQ(solvers[0]->native_state(), expected);
}

TEST(Window, MultiplicativeOrderingAndSingleIterationFlag) {
    const SchwarzConfig cfg = strips(0.2, 0.1);
    const InterfaceTable table = build_interfaces(cfg);
    auto solvers = make_solvers(cfg, table, fe_factory(CdrParams{}, 0.05));
    const WindowResult wr = schwarz_window(solvers, table, 0.0, 0.05, 1, 1e-12, 1);
    EXPECT_EQ(wr.iterations, 1);
    EXPECT_FALSE(wr.converged);
    // Subdomain 0 goes first and sees its donor's initial (zero) state.
    EXPECT_EQ(solvers[0]->window_interface_values().norm(), 0.0);
    // Subdomain 1 samples subdomain 0's update from the same iteration.
    const auto& group = table[1].groups.at(0);
    const Eigen::VectorXd expected = group.sampler.apply(solvers[0]->nodal_field());
    EXPECT_GT(expected.norm(), 0.0);
    EXPECT_EQ(solvers[1]->window_interface_values().col(0), expected);
}

TEST(Window, WarmRestartOfConvergedWindowIsIdempotent) {
    const SchwarzConfig cfg = strips(0.2, 0.1);
    const InterfaceTable table = build_interfaces(cfg);
    auto solvers = make_solvers(cfg, table, fe_factory(CdrParams{}, 0.05));
    const double tol = 1e-10;
    const WindowResult first = schwarz_window(solvers, table, 0.0, 0.05, 1, tol, 100);
    ASSERT_TRUE(first.converged);
    EXPECT_GT(first.iterations, 1);
    const Eigen::VectorXd before = solvers[1]->native_state();
    const WindowResult again = schwarz_window(solvers, table, 0.0, 0.05, 1, tol, 100, WindowStart::Warm);
    EXPECT_EQ(again.iterations, 1);
    EXPECT_LE(again.trace_change, tol);
    EXPECT_LE((solvers[1]->native_state() - before).norm(), 1e-9 * before.norm());
}

TEST(Window, SteadyDiffusionConvergesFasterWithWiderOverlap) {
    CdrParams params;
    params.epsilon = 1.0;
    params.b = {0.0, 0.0};
    params.sigma = 0.0;
    const double big_dt = 1e6;
    StructuredMesh global = build_mesh(kUnit, 1, 1);
    const Eigen::MatrixXd ref = monolithic(params, 50, big_dt, big_dt, global);
    std::vector<int> counts;
    for (double overlap : {0.08, 0.2}) {
        SchwarzConfig cfg = strips(overlap, 0.02);
        cfg.dt = big_dt;
        cfg.t_final = big_dt;
        cfg.tol = 1e-11;
        cfg.max_iters = 500;
        const CoupledResult res = run_coupled(cfg, fe_factory(params, big_dt));
        ASSERT_EQ(res.unconverged_windows, 0);
        counts.push_back(res.iterations[0]);
        const Eigen::MatrixXd nodal = coupled_nodal(cfg, res, global);
        EXPECT_LE((nodal.col(1) - ref.col(1)).norm(), 1e-8 * ref.col(1).norm());
    }
    EXPECT_GT(counts[0], counts[1]);
}

TEST(Coupled, AllFeTracksSchwarzTolerance) {
    const CdrParams params;
    const double dt = 0.01;
    const double t_final = 0.3;
    StructuredMesh global = build_mesh(kUnit, 1, 1);
    const Eigen::MatrixXd ref = monolithic(params, 20, dt, t_final, global);
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        SchwarzConfig cfg;
        cfg.subdomains = quadrant_layout(kUnit, 0.1, 0.05);
        cfg.dt = dt;
        cfg.t_final = t_final;
        cfg.tol = tol;
        cfg.max_iters = 100;
        const CoupledResult res = run_coupled(cfg, fe_factory(params, dt));
        EXPECT_EQ(res.unconverged_windows, 0);
        const ErrorMetric err = time_averaged_relative_error(coupled_nodal(cfg, res, global), ref);
        EXPECT_LE(err.value, 100 * tol) << "tol=" << tol;
    }
}

TEST(Coupled, RecordsTracesAndIsBitwiseDeterministic) {
    SchwarzConfig cfg;
    cfg.subdomains = quadrant_layout(kUnit, 0.1, 0.05);
    cfg.dt = 0.01;
    cfg.t_final = 0.1;
    const CoupledResult a = run_coupled(cfg, fe_factory(CdrParams{}, cfg.dt));
    const CoupledResult b = run_coupled(cfg, fe_factory(CdrParams{}, cfg.dt));
    ASSERT_EQ(a.trajectories.size(), 4u);
    EXPECT_EQ(a.iterations, b.iterations);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(a.trajectories[i].size(), 11);
        EXPECT_EQ(a.trajectories[i].states, b.trajectories[i].states);
        EXPECT_EQ(a.trajectories[i].boundary_traces, b.trajectories[i].boundary_traces);
        EXPECT_EQ(a.kinds[i], "FE");
    }
    // Zero initial condition: the t = 0 interface trace is zero.
    EXPECT_EQ(a.trajectories[0].boundary_traces.col(0).norm(), 0.0);
}

TEST(Coupled, MultiStepWindowsMatchMonolithic) {
    const CdrParams params;
    StructuredMesh global = build_mesh(kUnit, 1, 1);
    const Eigen::MatrixXd ref = monolithic(params, 20, 0.01, 0.2, global);
    SchwarzConfig cfg;
    cfg.subdomains = quadrant_layout(kUnit, 0.1, 0.05);
    cfg.dt = 0.01;
    cfg.t_final = 0.2;
    cfg.steps_per_window = 4;
    cfg.tol = 1e-12;
    cfg.max_iters = 200;
    const CoupledResult res = run_coupled(cfg, fe_factory(params, cfg.dt));
    EXPECT_EQ(res.iterations.size(), 5u);
    EXPECT_LE(time_averaged_relative_error(coupled_nodal(cfg, res, global), ref).value, 1e-10);
}

TEST(Coupled, StepsPerWindowMustDivideSteps) {
    SchwarzConfig cfg = strips(0.2, 0.1);
    cfg.dt = 0.1;
    cfg.t_final = 1.0;
    cfg.steps_per_window = 3;
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Stitch, ConstantFieldsStayConstant) {
    const auto a = build_mesh({0.0, 0.6, 0.0, 1.0}, 6, 10);
    const auto b = build_mesh({0.4, 1.0, 0.0, 1.0}, 3, 5);
    const auto global = build_mesh(kUnit, 10, 10);
    const std::vector<SubdomainField> fields{{&a, Eigen::VectorXd::Constant(a.node_count(), 1.25)},
                                             {&b, Eigen::VectorXd::Constant(b.node_count(), 1.25)}};
    const Eigen::VectorXd s = stitch(fields, global);
    EXPECT_LE((s.array() - 1.25).abs().maxCoeff(), 1e-15);
}

TEST(Stitch, SingleCoveringSubdomainIsIdentity) {
    const auto mesh = build_mesh(kUnit, 8, 8);
    Eigen::VectorXd field = Eigen::VectorXd::LinSpaced(mesh.node_count(), -3.0, 4.0);
    const std::vector<SubdomainField> fields{{&mesh, field}};
    EXPECT_LE((stitch(fields, mesh) - field).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Stitch, EqualFieldsAgreeInOverlap) {
    const auto a = build_mesh({0.0, 0.6, 0.0, 1.0}, 6, 4);
    const auto b = build_mesh({0.4, 1.0, 0.0, 1.0}, 12, 8);
    const auto global = build_mesh(kUnit, 20, 5);
    auto xs = [](const StructuredMesh& m) {
        Eigen::VectorXd v(m.node_count());
        for (int id = 0; id < m.node_count(); ++id) {
            v[id] = m.node(id).x;
        }
        return v;
    };
    const std::vector<SubdomainField> fields{{&a, xs(a)}, {&b, xs(b)}};
    EXPECT_LE((stitch(fields, global) - xs(global)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Stitch, UncoveredNodeIsAnError) {
    const auto a = build_mesh({0.0, 0.5, 0.0, 1.0}, 5, 5);
    const auto global = build_mesh(kUnit, 4, 4);
    const std::vector<SubdomainField> fields{{&a, Eigen::VectorXd::Zero(a.node_count())}};
    EXPECT_THROW(stitch(fields, global), ConfigError);
}
