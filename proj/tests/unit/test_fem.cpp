#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oifs/errors.hpp"
#include "oifs/fem.hpp"
#include "oracles.hpp"

using namespace oifs;

namespace {

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

CdrParams params(double eps, std::array<double, 2> b, double sigma) {
    CdrParams p;
    p.epsilon = eps;
    p.b = b;
    p.sigma = sigma;
    return p;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ElementMatrices, UnitDiffusionDiagonalAndRowSums) {
    const ElementMatrix k = element_diffusion(1.0, 1.0);
    for (int a = 0; a < 4; ++a) {
        EXPECT_NEAR(k(a, a), 2.0 / 3.0, 1e-15);
        EXPECT_NEAR(k.row(a).sum(), 0.0, 1e-15);
    }
}

TEST(ElementMatrices, MassMatchesClosedForm) {
    const double h = 0.3;
    Eigen::Matrix4d expected;
    expected << 4, 2, 1, 2, 2, 4, 2, 1, 1, 2, 4, 2, 2, 1, 2, 4;
    expected *= h * h / 36.0;
    EXPECT_LE(max_abs(element_mass(h, h) - expected), 1e-16);
}

TEST(ElementMatrices, AnisotropicCellsMatchOracle) {
    for (auto [hx, hy] : {std::pair{0.1, 0.4}, std::pair{0.02, 0.02}, std::pair{1.5, 0.25}}) {
        EXPECT_LE(max_abs(element_mass(hx, hy) - oracle::mass(hx, hy)), 1e-15);
        EXPECT_LE(max_abs(element_diffusion(hx, hy) - oracle::diffusion(hx, hy)), 1e-13 * (hx / hy + hy / hx));
        const std::array<double, 2> b{0.5, std::sqrt(3.0) / 2.0};
        EXPECT_LE(max_abs(element_convection(hx, hy, b) - oracle::convection(hx, hy, b[0], b[1])),
                  1e-14 * (hx + hy));
    }
}

TEST(ElementMatrices, ConvectionAnnihilatesConstants) {
    const ElementMatrix c = element_convection(0.2, 0.1, {0.3, -1.7});
    EXPECT_LE((c * Eigen::Vector4d::Ones()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, SymmetricWithoutConvection) {
    const auto sys = assemble(build_mesh(kUnit, 7, 5), params(0.3, {0.0, 0.0}, 0.8));
    const Eigen::MatrixXd a(sys->operator_full());
    EXPECT_LE(max_abs(a - a.transpose()), 1e-13);
}

TEST(Assembly, OperatorAnnihilatesConstantsWithoutReaction) {
    const auto sys = assemble(build_mesh(kUnit, 9, 6), params(1e-2, {0.5, 0.866}, 0.0));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys->mesh().node_count());
    EXPECT_LE(max_abs(sys->operator_full() * ones), 1e-12);
}

TEST(Assembly, BlockSizes) {
    const auto sys = assemble(build_mesh(kUnit, 4, 3), CdrParams{});
    EXPECT_EQ(sys->interior_size(), 6);
    EXPECT_EQ(sys->boundary_size(), 14);
    EXPECT_EQ(sys->a_ii().rows(), 6);
    EXPECT_EQ(sys->a_ib().cols(), 14);
    EXPECT_EQ(sys->mass().rows(), 6);
    EXPECT_EQ(sys->mass_ib().nonZeros(), 0);
}

TEST(Assembly, LumpedMassIsRowSumOfConsistentMass) {
    const auto sys = assemble(build_mesh(kUnit, 5, 5), CdrParams{});
    const Eigen::MatrixXd full(sys->mass_full());
    const Eigen::VectorXd rows = full.rowwise().sum();
    const Eigen::MatrixXd lumped(sys->mass());
    for (int k = 0; k < sys->interior_size(); ++k) {
        EXPECT_NEAR(lumped(k, k), rows[sys->interior_map()[static_cast<std::size_t>(k)]], 1e-15);
    }
    EXPECT_NEAR((lumped - Eigen::MatrixXd(lumped.diagonal().asDiagonal())).norm(), 0.0, 0.0);
}

TEST(Assembly, ConsistentMassKeepsCoupling) {
    const auto sys = assemble(build_mesh(kUnit, 5, 5), CdrParams{}, MassKind::Consistent);
    EXPECT_GT(sys->mass_ib().nonZeros(), 0);
    EXPECT_GT(sys->mass().nonZeros(), sys->interior_size());
}

TEST(Assembly, RejectsInvalidCoefficients) {
    EXPECT_THROW(assemble(build_mesh(kUnit, 2, 2), params(0.0, {0, 0}, 0)), ConfigError);
    EXPECT_THROW(assemble(build_mesh(kUnit, 2, 2), params(1.0, {0, 0}, -1)), ConfigError);
}

TEST(Load, ZeroForcingGivesZeroVector) {
    CdrParams p;
    p.forcing = [](double, double, double) { return 0.0; };
    const auto sys = assemble(build_mesh(kUnit, 4, 4), p);
    EXPECT_EQ(sys->load_vector(0.3).norm(), 0.0);
}

TEST(Load, UnitForcingGivesHSquared) {
    const auto sys = assemble(build_mesh(kUnit, 8, 8), CdrParams{});
    const Eigen::VectorXd f = sys->load_vector(0.0);
    const double h = 1.0 / 8.0;
    EXPECT_LE((f.array() - h * h).abs().maxCoeff(), 1e-15);
}

TEST(Load, IsLinearInForcing) {
    const auto mesh = build_mesh(kUnit, 5, 4);
    CdrParams p1, p2, p12;
    p1.forcing = [](double t, double x, double y) { return std::sin(x + t) * y; };
    p2.forcing = [](double, double x, double y) { return x * x - 3 * y; };
    p12.forcing = [&](double t, double x, double y) { return p1.forcing(t, x, y) + p2.forcing(t, x, y); };
    const Eigen::VectorXd sum = assemble(mesh, p1)->load_vector(0.7) + assemble(mesh, p2)->load_vector(0.7);
    EXPECT_LE((assemble(mesh, p12)->load_vector(0.7) - sum).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Boundary, ZeroDataGivesZeroVector) {
    const auto sys = assemble(build_mesh(kUnit, 3, 3), CdrParams{});
    EXPECT_EQ(sys->boundary_values(1.0).norm(), 0.0);
}

TEST(Boundary, NodalEvaluationOfX) {
    CdrParams p;
    p.dirichlet = [](double, double x, double) { return x; };
    const auto sys = assemble(build_mesh(kUnit, 2, 2), p);
    const Eigen::VectorXd g = sys->boundary_values(0.0);
    ASSERT_EQ(g.size(), 8);
    for (int k = 0; k < 8; ++k) {
        EXPECT_DOUBLE_EQ(g[k], sys->mesh().node(sys->boundary_map()[static_cast<std::size_t>(k)]).x);
    }
    EXPECT_DOUBLE_EQ(g.minCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(g.maxCoeff(), 1.0);
}

TEST(Boundary, ScatterAndRestrictRoundTrip) {
    const auto sys = assemble(build_mesh(kUnit, 4, 3), CdrParams{});
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(sys->interior_size(), 1.0, 2.0);
    const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(sys->boundary_size(), -1.0, 0.0);
    const Eigen::VectorXd nodal = sys->nodal_field(v, g);
    EXPECT_EQ(sys->restrict_interior(nodal), v);
    for (int k = 0; k < sys->boundary_size(); ++k) {
        EXPECT_EQ(nodal[sys->boundary_map()[static_cast<std::size_t>(k)]], g[k]);
    }
}

TEST(Steady, AffineSolutionIsReproduced) {
    const std::array<double, 2> b{0.7, -0.4};
    CdrParams p = params(0.05, b, 0.0);
    p.forcing = [b](double, double, double) { return b[0] + b[1]; };
    p.dirichlet = [](double, double x, double y) { return x + y; };
    const auto sys = assemble(build_mesh(kUnit, 9, 7), p);
    const Eigen::VectorXd v = sys->solve_steady(sys->boundary_values(0.0), sys->load_vector(0.0));
    for (int k = 0; k < sys->interior_size(); ++k) {
        const Point q = sys->mesh().node(sys->interior_map()[static_cast<std::size_t>(k)]);
        EXPECT_NEAR(v[k], q.x + q.y, 1e-10);
    }
}

TEST(Steady, SecondOrderSpatialConvergence) {
    constexpr double pi = std::numbers::pi;
    const double eps = 0.1;
    const std::array<double, 2> b{0.5, std::sqrt(3.0) / 2.0};
    const double sigma = 0.5;
    auto exact = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    CdrParams p = params(eps, b, sigma);
    p.forcing = [=](double, double x, double y) {
        return (2 * eps * pi * pi + sigma) * exact(x, y) +
               pi * (b[0] * std::cos(pi * x) * std::sin(pi * y) + b[1] * std::sin(pi * x) * std::cos(pi * y));
    };
    auto error = [&](int n) {
        const auto sys = assemble(build_mesh(kUnit, n, n), p);
        const Eigen::VectorXd v = sys->solve_steady(sys->boundary_values(0.0), sys->load_vector(0.0));
        double sum = 0.0;
        for (int k = 0; k < sys->interior_size(); ++k) {
            const Point q = sys->mesh().node(sys->interior_map()[static_cast<std::size_t>(k)]);
            sum += std::pow(v[k] - exact(q.x, q.y), 2);
        }
        return std::sqrt(sum) / n;
    };
    const double ratio = error(8) / error(16);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}
