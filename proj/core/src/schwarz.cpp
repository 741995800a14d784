#include "oifs/schwarz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "oifs/errors.hpp"

namespace oifs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool inside(const Rect& outer, const Rect& inner, double tol) {
    return inner.x0 >= outer.x0 - tol && inner.x1 <= outer.x1 + tol && inner.y0 >= outer.y0 - tol &&
           inner.y1 <= outer.y1 + tol;
}

}  // namespace

void validate(const SchwarzConfig& config) {
    validate(config.domain);
    if (!(config.tol > 0.0)) {
        throw ConfigError("schwarz tolerance must be > 0");
    }
    if (config.max_iters < 1) {
        throw ConfigError("schwarz max_iters must be >= 1");
    }
    if (config.steps_per_window < 1) {
        throw ConfigError("steps_per_window must be >= 1");
    }
    if (config.subdomains.empty()) {
        throw ConfigError("at least one subdomain is required");
    }
    const int steps = step_count(0.0, config.t_final, config.dt);
    if (steps % config.steps_per_window != 0) {
        throw ConfigError("steps_per_window must divide the number of timesteps");
    }
    std::set<double> xs{config.domain.x0, config.domain.x1};
    std::set<double> ys{config.domain.y0, config.domain.y1};
    for (const auto& s : config.subdomains) {
        validate(s.rect);
        if (s.nx < 1 || s.ny < 1) {
            throw ConfigError("subdomain cell counts must be >= 1");
        }
        if (!inside(config.domain, s.rect, kBoundaryTolerance)) {
            throw ConfigError("subdomain rectangle extends outside the global domain");
        }
        if (s.model == ModelKind::ROM && (s.r < 1 || !(s.lambda >= 0.0))) {
            throw ConfigError("ROM subdomain needs r >= 1 and lambda >= 0");
        }
        xs.insert({s.rect.x0, s.rect.x1});
        ys.insert({s.rect.y0, s.rect.y1});
    }
    // The union covers the domain iff every cell of the breakpoint grid is covered.
    const std::vector<double> xv(xs.begin(), xs.end());
    const std::vector<double> yv(ys.begin(), ys.end());
    for (std::size_t a = 0; a + 1 < xv.size(); ++a) {
        for (std::size_t b = 0; b + 1 < yv.size(); ++b) {
            const Point c{0.5 * (xv[a] + xv[a + 1]), 0.5 * (yv[b] + yv[b + 1])};
            if (!config.domain.contains(c)) {
                continue;
            }
            const bool covered = std::any_of(config.subdomains.begin(), config.subdomains.end(),
                                              [&](const SubdomainSpec& s) { return s.rect.contains(c); });
            if (!covered) {
                std::ostringstream msg;
                msg << "subdomains do not cover the point (" << c.x << "," << c.y << ")";
                throw ConfigError(msg.str());
            }
        }
    }
}

std::vector<SubdomainSpec> quadrant_layout(const Rect& domain, double overlap, double h) {
    validate(domain);
    if (!(overlap > 0.0) || !(h > 0.0)) {
        throw ConfigError("quadrant layout needs overlap > 0 and h > 0");
    }
    const double cx = 0.5 * (domain.x0 + domain.x1);
    const double cy = 0.5 * (domain.y0 + domain.y1);
    const double half = 0.5 * overlap;
    const Rect lower_left{domain.x0, cx + half, domain.y0, cy + half};
    const Rect lower_right{cx - half, domain.x1, domain.y0, cy + half};
    const Rect upper_left{domain.x0, cx + half, cy - half, domain.y1};
    const Rect upper_right{cx - half, domain.x1, cy - half, domain.y1};
    std::vector<SubdomainSpec> specs;
    for (const Rect& r : {lower_left, lower_right, upper_left, upper_right}) {
        SubdomainSpec s;
        s.rect = r;
        s.nx = std::max(1, static_cast<int>(std::lround(r.width() / h)));
        s.ny = std::max(1, static_cast<int>(std::lround(r.height() / h)));
        specs.push_back(s);
    }
    return specs;
}

StructuredMesh subdomain_mesh(const SubdomainSpec& spec) { return StructuredMesh(spec.rect, spec.nx, spec.ny); }

std::vector<int> SubdomainInterfaces::boundary_positions() const {
    std::vector<int> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
        out.push_back(n.boundary_position);
    }
    return out;
}

InterfaceTable build_interfaces(const SchwarzConfig& config) {
    validate(config);
    std::vector<StructuredMesh> meshes;
    meshes.reserve(config.subdomains.size());
    for (const auto& s : config.subdomains) {
        meshes.push_back(subdomain_mesh(s));
    }

    InterfaceTable table(config.subdomains.size());
    for (std::size_t i = 0; i < config.subdomains.size(); ++i) {
        const auto& bmap = meshes[i].boundary_node_ids();
        auto& itf = table[i];
        std::map<int, std::vector<Point>> donor_points;
        for (std::size_t k = 0; k < bmap.size(); ++k) {
            const Point p = meshes[i].node(bmap[k]);
            if (config.domain.on_boundary(p, kBoundaryTolerance)) {
                continue;
            }
            int donor = -1;
            double best = kBoundaryTolerance;
            for (std::size_t j = 0; j < config.subdomains.size(); ++j) {
                if (j == i) {
                    continue;
                }
                const double d = config.subdomains[j].rect.inner_distance(p);
                if (d > best + (donor < 0 ? 0.0 : kBoundaryTolerance)) {
                    best = d;
                    donor = static_cast<int>(j);
                }
            }
            if (donor < 0) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "interface node (" << p.x << "," << p.y << ") of subdomain " << i
                    << " is not strictly inside any other subdomain (overlap too small)";
                throw ConfigError(msg.str());
            }
            itf.nodes.push_back({static_cast<int>(k), bmap[k], donor, p});
        }
        for (std::size_t slot = 0; slot < itf.nodes.size(); ++slot) {
            donor_points[itf.nodes[slot].donor].push_back(itf.nodes[slot].point);
        }
        for (auto& [donor, points] : donor_points) {
            DonorGroup g;
            g.donor = donor;
            for (std::size_t slot = 0; slot < itf.nodes.size(); ++slot) {
                if (itf.nodes[slot].donor == donor) {
                    g.slots.push_back(static_cast<int>(slot));
                }
            }
            g.sampler = PointSampler(meshes[static_cast<std::size_t>(donor)], points);
            itf.groups.push_back(std::move(g));
        }
    }
    return table;
}

WindowResult schwarz_window(std::span<const std::unique_ptr<SubdomainSolver>> solvers,
                            const InterfaceTable& interfaces, double t_n, double dt, int substeps,
                            double tol, int max_iters, WindowStart start) {
    if (solvers.size() != interfaces.size()) {
        throw ConfigError("solver count does not match interface table");
    }
    if (!(tol > 0.0) || max_iters < 1 || substeps < 1) {
        throw ConfigError("invalid Schwarz window controls");
    }
    const std::size_t n = solvers.size();
    if (start == WindowStart::Fresh) {
        for (const auto& s : solvers) {
            s->begin_window(substeps);
        }
    }
    std::vector<Eigen::MatrixXd> previous(n);
    for (std::size_t i = 0; i < n; ++i) {
        previous[i] = solvers[i]->window_interface_values();
    }

    WindowResult result;
    Eigen::MatrixXd gathered;
    Eigen::VectorXd sampled;
    for (int k = 1; k <= max_iters; ++k) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& itf = interfaces[i];
            SubdomainSolver& solver = *solvers[i];
            gathered.resize(static_cast<Eigen::Index>(itf.nodes.size()), substeps);
            for (int s = 1; s <= substeps; ++s) {
                for (const auto& group : itf.groups) {
                    sampled.resize(static_cast<Eigen::Index>(group.slots.size()));
                    group.sampler.apply(solvers[static_cast<std::size_t>(group.donor)]->window_field(s), sampled);
                    for (std::size_t q = 0; q < group.slots.size(); ++q) {
                        gathered(group.slots[q], s - 1) = sampled[static_cast<Eigen::Index>(q)];
                    }
                }
            }
            solver.restart_window();
            for (int s = 1; s <= substeps; ++s) {
                solver.set_interface_values(gathered.col(s - 1));
                solver.advance(t_n + s * dt);
            }
            if (!solver.native_state().allFinite()) {
                std::ostringstream msg;
                msg << "subdomain " << i << " (" << solver.kind() << ") diverged at t=" << solver.time();
                throw DivergenceError(msg.str());
            }
            if (gathered.size() > 0) {
                const double diff = (gathered - previous[i]).cwiseAbs().maxCoeff();
                const double scale = 1.0 + gathered.cwiseAbs().maxCoeff();
                change = std::max(change, diff / scale);
            }
            previous[i] = gathered;
        }
        result.iterations = k;
        result.trace_change = change;
        if (!std::isfinite(change)) {
            throw DivergenceError("non-finite Schwarz interface trace");
        }
        if (change <= tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double CoupledResult::mean_iterations() const {
    if (iterations.empty()) {
        return 0.0;
    }
    return std::accumulate(iterations.begin(), iterations.end(), 0.0) / static_cast<double>(iterations.size());
}

int CoupledResult::max_iterations() const {
    return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

CoupledResult run_coupled(const SchwarzConfig& config, const SolverFactory& factory) {
    validate(config);
    const auto setup_start = Clock::now();
    InterfaceTable interfaces = build_interfaces(config);
    std::vector<std::unique_ptr<SubdomainSolver>> solvers;
    for (std::size_t i = 0; i < config.subdomains.size(); ++i) {
        const auto& spec = config.subdomains[i];
        solvers.push_back(factory(spec, static_cast<int>(i), subdomain_mesh(spec)));
        if (!solvers.back()) {
            throw ConfigError("solver factory returned no solver");
        }
    }
    const double setup = seconds_since(setup_start);
    CoupledResult result = run_coupled(config, solvers, interfaces);
    result.timings.setup_seconds += setup;
    return result;
}

CoupledResult run_coupled(const SchwarzConfig& config, std::vector<std::unique_ptr<SubdomainSolver>>& solvers,
                          const InterfaceTable& interfaces) {
    validate(config);
    if (solvers.size() != config.subdomains.size() || interfaces.size() != solvers.size()) {
        throw ConfigError("solver/interface counts do not match the decomposition");
    }
    const int steps = step_count(0.0, config.t_final, config.dt);
    const int per_window = config.steps_per_window;
    const std::size_t n = solvers.size();

    CoupledResult result;
    const auto setup_start = Clock::now();
    for (std::size_t i = 0; i < n; ++i) {
        solvers[i]->set_interface_positions(interfaces[i].boundary_positions());
        solvers[i]->impose_boundary(0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interfaces[i].nodes.size())));
    }
    // Interface values at t = 0 come from the donors' initial fields.
    std::vector<Eigen::VectorXd> initial_traces(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& itf = interfaces[i];
        initial_traces[i].resize(static_cast<Eigen::Index>(itf.nodes.size()));
        for (const auto& group : itf.groups) {
            const Eigen::VectorXd v = group.sampler.apply(solvers[static_cast<std::size_t>(group.donor)]->nodal_field());
            for (std::size_t q = 0; q < group.slots.size(); ++q) {
                initial_traces[i][group.slots[q]] = v[static_cast<Eigen::Index>(q)];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        solvers[i]->impose_boundary(0.0, initial_traces[i]);
    }

    std::vector<Eigen::MatrixXd> natives(n);
    for (std::size_t i = 0; i < n; ++i) {
        natives[i].resize(solvers[i]->native_state().size(), steps + 1);
        natives[i].col(0) = solvers[i]->native_state();
        result.trajectories.emplace_back();
        auto& traj = result.trajectories.back();
        traj.times.resize(static_cast<std::size_t>(steps) + 1);
        traj.times[0] = 0.0;
        traj.boundary_traces.resize(solvers[i]->boundary_vector().size(), steps + 1);
        traj.boundary_traces.col(0) = solvers[i]->boundary_vector();
        result.kinds.emplace_back(solvers[i]->kind());
    }
    result.timings.setup_seconds = seconds_since(setup_start);

    const auto solve_start = Clock::now();
    result.iterations.reserve(static_cast<std::size_t>(steps / per_window));
    for (int w = 0; w < steps / per_window; ++w) {
        const int first = w * per_window;
        const double t_n = first * config.dt;
        const WindowResult wr = schwarz_window(solvers, interfaces, t_n, config.dt, per_window, config.tol,
                                               config.max_iters, WindowStart::Fresh);
        result.iterations.push_back(wr.iterations);
        if (!wr.converged) {
            ++result.unconverged_windows;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int s = 1; s <= per_window; ++s) {
                const SolverState& rec = solvers[i]->window_record(s);
                const int col = first + s;
                natives[i].col(col) = rec.native;
                result.trajectories[i].boundary_traces.col(col) = rec.boundary;
                result.trajectories[i].times[static_cast<std::size_t>(col)] = col * config.dt;
            }
        }
    }
    result.timings.solve_seconds = seconds_since(solve_start);

    const auto post_start = Clock::now();
    for (std::size_t i = 0; i < n; ++i) {
        result.trajectories[i].states = solvers[i]->lift_all(natives[i]);
    }
    result.timings.postprocess_seconds = seconds_since(post_start);
    return result;
}

Eigen::VectorXd stitch(std::span<const SubdomainField> fields, const StructuredMesh& global) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(global.node_count());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(global.node_count());
    for (const auto& f : fields) {
        if (f.mesh == nullptr || f.nodal.size() != f.mesh->node_count()) {
            throw ConfigError("stitch: subdomain field does not match its mesh");
        }
        std::vector<int> ids;
        std::vector<Point> pts;
        for (int id = 0; id < global.node_count(); ++id) {
            const Point p = global.node(id);
            if (f.mesh->rect().contains(p, kBoundaryTolerance)) {
                ids.push_back(id);
                pts.push_back(p);
            }
        }
        const Eigen::VectorXd vals = PointSampler(*f.mesh, pts).apply(f.nodal);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            sum[ids[k]] += vals[static_cast<Eigen::Index>(k)];
            count[ids[k]] += 1.0;
        }
    }
    if ((count.array() == 0.0).any()) {
        throw ConfigError("stitch: a global node is covered by no subdomain");
    }
    return sum.cwiseQuotient(count);
}

Eigen::VectorXd trajectory_nodal(const StructuredMesh& mesh, const Trajectory& traj, Eigen::Index column) {
    const auto& imap = mesh.interior_node_ids();
    const auto& bmap = mesh.boundary_node_ids();
    if (traj.states.rows() != static_cast<Eigen::Index>(imap.size()) ||
        traj.boundary_traces.rows() != static_cast<Eigen::Index>(bmap.size())) {
        throw ConfigError("trajectory dimensions do not match the mesh");
    }
    Eigen::VectorXd nodal(mesh.node_count());
    for (std::size_t k = 0; k < imap.size(); ++k) {
        nodal[imap[k]] = traj.states(static_cast<Eigen::Index>(k), column);
    }
    for (std::size_t k = 0; k < bmap.size(); ++k) {
        nodal[bmap[k]] = traj.boundary_traces(static_cast<Eigen::Index>(k), column);
    }
    return nodal;
}

Eigen::MatrixXd stitch_trajectories(std::span<const StructuredMesh> meshes, std::span<const Trajectory> trajectories,
                                    const StructuredMesh& global) {
    if (meshes.size() != trajectories.size() || meshes.empty()) {
        throw ConfigError("stitch_trajectories: mesh/trajectory count mismatch");
    }
    const Eigen::Index nt = trajectories[0].size();
    for (const auto& t : trajectories) {
        if (t.size() != nt) {
            throw ConfigError("stitch_trajectories: trajectories have different time grids");
        }
    }
    // Per-subdomain samplers and node lists, reused for every time level.
    std::vector<std::vector<int>> ids(meshes.size());
    std::vector<PointSampler> samplers;
    Eigen::VectorXd count = Eigen::VectorXd::Zero(global.node_count());
    for (std::size_t s = 0; s < meshes.size(); ++s) {
        std::vector<Point> pts;
        for (int id = 0; id < global.node_count(); ++id) {
            const Point p = global.node(id);
            if (meshes[s].rect().contains(p, kBoundaryTolerance)) {
                ids[s].push_back(id);
                pts.push_back(p);
                count[id] += 1.0;
            }
        }
        samplers.emplace_back(meshes[s], pts);
    }
    if ((count.array() == 0.0).any()) {
        throw ConfigError("stitch: a global node is covered by no subdomain");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(global.node_count(), nt);
    for (Eigen::Index c = 0; c < nt; ++c) {
        for (std::size_t s = 0; s < meshes.size(); ++s) {
            const Eigen::VectorXd vals = samplers[s].apply(trajectory_nodal(meshes[s], trajectories[s], c));
            for (std::size_t k = 0; k < ids[s].size(); ++k) {
                out(ids[s][k], c) += vals[static_cast<Eigen::Index>(k)];
            }
        }
        out.col(c).array() /= count.array();
    }
    return out;
}

}  // namespace oifs
