#include "oifs/fem.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SparseLU>

#include "oifs/errors.hpp"

namespace oifs {

namespace {

// 2-point Gauss-Legendre on [0,1].
constexpr double kGaussLo = 0.5 - 0.28867513459481288225;
constexpr double kGaussHi = 0.5 + 0.28867513459481288225;
constexpr std::array<double, 2> kGauss{kGaussLo, kGaussHi};

struct ShapeValues {
    std::array<double, 4> n;
    std::array<double, 4> dxi;
    std::array<double, 4> deta;
};

ShapeValues shape(double xi, double eta) {
    return {{(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta},
            {-(1 - eta), (1 - eta), eta, -eta},
            {-(1 - xi), -xi, xi, (1 - xi)}};
}

template <typename Integrand>
ElementMatrix integrate(double hx, double hy, Integrand&& term) {
    ElementMatrix m = ElementMatrix::Zero();
    const double w = 0.25 * hx * hy;
    for (double eta : kGauss) {
        for (double xi : kGauss) {
            const ShapeValues s = shape(xi, eta);
            for (int a = 0; a < 4; ++a) {
                for (int c = 0; c < 4; ++c) {
                    m(a, c) += w * term(s, a, c);
                }
            }
        }
    }
    return m;
}

SparseMatrix extract_block(const SparseMatrix& full, const std::vector<int>& row_local,
                           const std::vector<int>& col_local, int rows, int cols) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (int col = 0; col < full.outerSize(); ++col) {
        const int lc = col_local[static_cast<std::size_t>(col)];
        if (lc < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int lr = row_local[static_cast<std::size_t>(it.row())];
            if (lr >= 0) {
                trip.emplace_back(lr, lc, it.value());
            }
        }
    }
    SparseMatrix block(rows, cols);
    block.setFromTriplets(trip.begin(), trip.end());
    return block;
}

}  // namespace

void validate(const CdrParams& params) {
    if (!(params.epsilon > 0.0)) {
        throw ConfigError("epsilon must be > 0");
    }
    if (!(params.sigma >= 0.0)) {
        throw ConfigError("sigma must be >= 0");
    }
    if (!std::isfinite(params.b[0]) || !std::isfinite(params.b[1])) {
        throw ConfigError("convection vector must be finite");
    }
    if (!params.forcing || !params.dirichlet) {
        throw ConfigError("forcing and dirichlet functions must be set");
    }
}

ElementMatrix element_mass(double hx, double hy) {
    return integrate(hx, hy, [](const ShapeValues& s, int a, int c) { return s.n[a] * s.n[c]; });
}

ElementMatrix element_diffusion(double hx, double hy) {
    return integrate(hx, hy, [hx, hy](const ShapeValues& s, int a, int c) {
        return s.dxi[a] * s.dxi[c] / (hx * hx) + s.deta[a] * s.deta[c] / (hy * hy);
    });
}

ElementMatrix element_convection(double hx, double hy, std::array<double, 2> b) {
    return integrate(hx, hy, [hx, hy, b](const ShapeValues& s, int a, int c) {
        return (b[0] * s.dxi[c] / hx + b[1] * s.deta[c] / hy) * s.n[a];
    });
}

SemiDiscreteSystem::SemiDiscreteSystem(StructuredMesh mesh, CdrParams params, MassKind mass_kind)
    : mesh_(std::move(mesh)), params_(std::move(params)), mass_kind_(mass_kind) {
    validate(params_);
    interior_map_ = mesh_.interior_node_ids();
    boundary_map_ = mesh_.boundary_node_ids();

    const ElementMatrix me = element_mass(mesh_.hx(), mesh_.hy());
    const ElementMatrix ae = params_.epsilon * element_diffusion(mesh_.hx(), mesh_.hy()) +
                             element_convection(mesh_.hx(), mesh_.hy(), params_.b) +
                             params_.sigma * me;

    std::vector<Eigen::Triplet<double>> mass_trip;
    std::vector<Eigen::Triplet<double>> op_trip;
    mass_trip.reserve(static_cast<std::size_t>(16 * mesh_.cell_count()));
    op_trip.reserve(static_cast<std::size_t>(16 * mesh_.cell_count()));
    for (int j = 0; j < mesh_.ny(); ++j) {
        for (int i = 0; i < mesh_.nx(); ++i) {
            const auto nodes = mesh_.cell_nodes(i, j);
            for (int a = 0; a < 4; ++a) {
                for (int c = 0; c < 4; ++c) {
                    mass_trip.emplace_back(nodes[a], nodes[c], me(a, c));
                    op_trip.emplace_back(nodes[a], nodes[c], ae(a, c));
                }
            }
        }
    }
    const int n = mesh_.node_count();
    mass_full_.resize(n, n);
    mass_full_.setFromTriplets(mass_trip.begin(), mass_trip.end());
    a_full_.resize(n, n);
    a_full_.setFromTriplets(op_trip.begin(), op_trip.end());

    std::vector<int> interior_local(static_cast<std::size_t>(n), -1);
    std::vector<int> boundary_local(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < interior_map_.size(); ++k) {
        interior_local[static_cast<std::size_t>(interior_map_[k])] = static_cast<int>(k);
    }
    for (std::size_t k = 0; k < boundary_map_.size(); ++k) {
        boundary_local[static_cast<std::size_t>(boundary_map_[k])] = static_cast<int>(k);
    }
    const int ni = interior_size();
    const int nb = boundary_size();
    if (mass_kind_ == MassKind::Consistent) {
        mass_ii_ = extract_block(mass_full_, interior_local, interior_local, ni, ni);
        mass_ib_ = extract_block(mass_full_, interior_local, boundary_local, ni, nb);
    } else {
        const Eigen::VectorXd row_sums = mass_full_ * Eigen::VectorXd::Ones(n);
        mass_ii_.resize(ni, ni);
        mass_ii_.reserve(Eigen::VectorXi::Constant(ni, 1));
        for (int k = 0; k < ni; ++k) {
            mass_ii_.insert(k, k) = row_sums[interior_map_[static_cast<std::size_t>(k)]];
        }
        mass_ii_.makeCompressed();
        mass_ib_.resize(ni, nb);
    }
    a_ii_ = extract_block(a_full_, interior_local, interior_local, ni, ni);
    a_ib_ = extract_block(a_full_, interior_local, boundary_local, ni, nb);
}

Eigen::VectorXd SemiDiscreteSystem::load_vector(double t) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh_.node_count());
    const double hx = mesh_.hx();
    const double hy = mesh_.hy();
    const double w = 0.25 * hx * hy;
    std::array<ShapeValues, 4> shapes;
    std::array<std::array<double, 2>, 4> offsets;
    int q = 0;
    for (double eta : kGauss) {
        for (double xi : kGauss) {
            shapes[static_cast<std::size_t>(q)] = shape(xi, eta);
            offsets[static_cast<std::size_t>(q)] = {xi * hx, eta * hy};
            ++q;
        }
    }
    for (int j = 0; j < mesh_.ny(); ++j) {
        for (int i = 0; i < mesh_.nx(); ++i) {
            const auto nodes = mesh_.cell_nodes(i, j);
            const Point origin = mesh_.node(nodes[0]);
            for (std::size_t k = 0; k < 4; ++k) {
                const double fq =
                    params_.forcing(t, origin.x + offsets[k][0], origin.y + offsets[k][1]);
                if (fq == 0.0) {
                    continue;
                }
                for (int a = 0; a < 4; ++a) {
                    full[nodes[a]] += w * fq * shapes[k].n[a];
                }
            }
        }
    }
    return restrict_interior(full);
}

Eigen::VectorXd SemiDiscreteSystem::boundary_values(double t) const {
    Eigen::VectorXd g(boundary_size());
    for (int k = 0; k < boundary_size(); ++k) {
        const Point p = mesh_.node(boundary_map_[static_cast<std::size_t>(k)]);
        g[k] = params_.dirichlet(t, p.x, p.y);
    }
    return g;
}

Eigen::VectorXd SemiDiscreteSystem::nodal_field(const Eigen::VectorXd& interior,
                                                const Eigen::VectorXd& boundary) const {
    Eigen::VectorXd nodal(mesh_.node_count());
    scatter(interior, boundary, nodal);
    return nodal;
}

void SemiDiscreteSystem::scatter(const Eigen::VectorXd& interior, const Eigen::VectorXd& boundary,
                                 Eigen::VectorXd& nodal) const {
    if (interior.size() != interior_size() || boundary.size() != boundary_size()) {
        throw ConfigError("scatter: interior/boundary vector sizes do not match the system");
    }
    nodal.resize(mesh_.node_count());
    for (std::size_t k = 0; k < interior_map_.size(); ++k) {
        nodal[interior_map_[k]] = interior[static_cast<Eigen::Index>(k)];
    }
    for (std::size_t k = 0; k < boundary_map_.size(); ++k) {
        nodal[boundary_map_[k]] = boundary[static_cast<Eigen::Index>(k)];
    }
}

Eigen::VectorXd SemiDiscreteSystem::restrict_interior(const Eigen::VectorXd& nodal) const {
    Eigen::VectorXd v(interior_size());
    for (std::size_t k = 0; k < interior_map_.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = nodal[interior_map_[k]];
    }
    return v;
}

Eigen::VectorXd SemiDiscreteSystem::solve_steady(const Eigen::VectorXd& boundary,
                                                 const Eigen::VectorXd& load) const {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(a_ii_);
    if (lu.info() != Eigen::Success) {
        throw NumericalError("steady operator factorization failed");
    }
    const Eigen::VectorXd rhs = load - a_ib_ * boundary;
    return lu.solve(rhs);
}

std::shared_ptr<const SemiDiscreteSystem> assemble(const StructuredMesh& mesh, const CdrParams& params,
                                                   MassKind mass_kind) {
    return std::make_shared<const SemiDiscreteSystem>(mesh, params, mass_kind);
}

}  // namespace oifs
