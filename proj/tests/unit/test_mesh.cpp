#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oifs/errors.hpp"
#include "oifs/mesh.hpp"

using namespace oifs;

namespace {

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

Eigen::VectorXd sample(const StructuredMesh& mesh, double (*f)(double, double)) {
    Eigen::VectorXd v(mesh.node_count());
    for (int id = 0; id < mesh.node_count(); ++id) {
        const Point p = mesh.node(id);
        v[id] = f(p.x, p.y);
    }
    return v;
}

}  // namespace

TEST(Mesh, SmallestMeshHasOnlyBoundaryNodes) {
    const auto mesh = build_mesh(kUnit, 1, 1);
    EXPECT_EQ(mesh.node_count(), 4);
    EXPECT_EQ(mesh.boundary_node_ids().size(), 4u);
    EXPECT_TRUE(mesh.interior_node_ids().empty());
}

TEST(Mesh, TwoByTwoHasCenterInteriorNode) {
    const auto mesh = build_mesh(kUnit, 2, 2);
    EXPECT_EQ(mesh.node_count(), 9);
    ASSERT_EQ(mesh.interior_node_ids().size(), 1u);
    const Point c = mesh.node(mesh.interior_node_ids()[0]);
    EXPECT_DOUBLE_EQ(c.x, 0.5);
    EXPECT_DOUBLE_EQ(c.y, 0.5);
}

TEST(Mesh, NodeCoordinatesFollowUniformSpacing) {
    const auto mesh = build_mesh({0.2, 1.0, -1.0, 0.5}, 4, 3);
    EXPECT_DOUBLE_EQ(mesh.hx(), 0.2);
    EXPECT_DOUBLE_EQ(mesh.hy(), 0.5);
    const Point p = mesh.node(mesh.node_id(3, 2));
    EXPECT_NEAR(p.x, 0.8, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
}

TEST(Mesh, RejectsDegenerateInput) {
    EXPECT_THROW(build_mesh({0.0, 0.0, 0.0, 1.0}, 2, 2), ConfigError);
    EXPECT_THROW(build_mesh({0.0, 1.0, 1.0, 0.5}, 2, 2), ConfigError);
    EXPECT_THROW(build_mesh(kUnit, 0, 2), ConfigError);
}

TEST(Mesh, BoundaryInteriorPartitionOnRandomSizes) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> size(1, 20);
    for (int trial = 0; trial < 40; ++trial) {
        const int nx = size(rng);
        const int ny = size(rng);
        const auto mesh = build_mesh(kUnit, nx, ny);
        std::vector<int> all = mesh.boundary_node_ids();
        all.insert(all.end(), mesh.interior_node_ids().begin(), mesh.interior_node_ids().end());
        std::sort(all.begin(), all.end());
        std::vector<int> expected(static_cast<std::size_t>(mesh.node_count()));
        std::iota(expected.begin(), expected.end(), 0);
        ASSERT_EQ(all, expected) << nx << "x" << ny;
        for (int id : mesh.boundary_node_ids()) {
            const int i = id % (nx + 1);
            const int j = id / (nx + 1);
            EXPECT_TRUE(i == 0 || i == nx || j == 0 || j == ny);
        }
        EXPECT_EQ(static_cast<int>(mesh.interior_node_ids().size()), (nx - 1) * (ny - 1));
    }
}

TEST(Mesh, CellNodesAreCounterclockwise) {
    const auto mesh = build_mesh(kUnit, 3, 2);
    const auto nodes = mesh.cell_nodes(1, 1);
    const Point a = mesh.node(nodes[0]);
    const Point b = mesh.node(nodes[1]);
    const Point c = mesh.node(nodes[2]);
    const Point d = mesh.node(nodes[3]);
    EXPECT_GT(b.x, a.x);
    EXPECT_DOUBLE_EQ(b.y, a.y);
    EXPECT_DOUBLE_EQ(c.x, b.x);
    EXPECT_GT(c.y, b.y);
    EXPECT_DOUBLE_EQ(d.x, a.x);
    EXPECT_DOUBLE_EQ(d.y, c.y);
}

TEST(Locate, CellMidpoint) {
    const auto mesh = build_mesh(kUnit, 2, 2);
    const auto loc = mesh.locate_point({0.25, 0.25});
    EXPECT_EQ(loc.i, 0);
    EXPECT_EQ(loc.j, 0);
    EXPECT_DOUBLE_EQ(loc.xi, 0.5);
    EXPECT_DOUBLE_EQ(loc.eta, 0.5);
}

TEST(Locate, UpperCornerIsClampedIntoLastCell) {
    const auto mesh = build_mesh(kUnit, 2, 2);
    const auto loc = mesh.locate_point({1.0, 1.0});
    EXPECT_EQ(loc.i, 1);
    EXPECT_EQ(loc.j, 1);
    EXPECT_DOUBLE_EQ(loc.xi, 1.0);
    EXPECT_DOUBLE_EQ(loc.eta, 1.0);
}

TEST(Locate, FineMeshArithmetic) {
    const auto mesh = build_mesh(kUnit, 50, 50);
    const auto loc = mesh.locate_point({0.51, 0.02});
    EXPECT_EQ(loc.i, 25);
    EXPECT_EQ(loc.j, 1);
    EXPECT_NEAR(loc.xi, 0.5, 1e-12);
    EXPECT_NEAR(loc.eta, 0.0, 1e-12);
}

TEST(Locate, ToleratesRoundoffButRejectsOutside) {
    const auto mesh = build_mesh(kUnit, 4, 4);
    EXPECT_NO_THROW((void)mesh.locate_point({1.0 + 1e-14, -1e-14}));
    EXPECT_THROW((void)mesh.locate_point({1.1, 0.5}), OutOfDomainError);
}

TEST(Interpolate, ConstantFieldIsReproduced) {
    const auto mesh = build_mesh(kUnit, 5, 3);
    const Eigen::VectorXd field = Eigen::VectorXd::Constant(mesh.node_count(), 2.75);
    const std::vector<Point> pts{{0.0, 0.0}, {0.31, 0.77}, {1.0, 0.5}, {0.123, 0.999}};
    const Eigen::VectorXd v = mesh.interpolate(field, pts);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        EXPECT_DOUBLE_EQ(v[k], 2.75);
    }
}

TEST(Interpolate, AffineFieldIsExact) {
    const auto mesh = build_mesh({0.0, 2.0, 0.0, 1.0}, 7, 5);
    const Eigen::VectorXd field = sample(mesh, [](double x, double y) { return x + 2.0 * y; });
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 2.0), uy(0.0, 1.0);
    std::vector<Point> pts;
    for (int k = 0; k < 50; ++k) {
        pts.push_back({ux(rng), uy(rng)});
    }
    const Eigen::VectorXd v = mesh.interpolate(field, pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(v[static_cast<Eigen::Index>(k)], pts[k].x + 2.0 * pts[k].y, 1e-13);
    }
}

TEST(Interpolate, BilinearFieldIsExactOnEveryCell) {
    const auto mesh = build_mesh({-1.0, 1.0, 0.5, 1.5}, 3, 4);
    auto f = [](double x, double y) { return 0.3 - 1.2 * x + 0.7 * y + 2.5 * x * y; };
    const Eigen::VectorXd field = sample(mesh, f);
    std::vector<Point> pts;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
            const Point a = mesh.node(mesh.node_id(i, j));
            pts.push_back({a.x + 0.37 * mesh.hx(), a.y + 0.81 * mesh.hy()});
        }
    }
    const Eigen::VectorXd v = mesh.interpolate(field, pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(v[static_cast<Eigen::Index>(k)], f(pts[k].x, pts[k].y), 1e-13);
    }
}

TEST(Interpolate, NodePositionsReturnNodeValues) {
    const auto mesh = build_mesh(kUnit, 6, 4);
    std::mt19937 rng(11);
    std::normal_distribution<double> n01;
    Eigen::VectorXd field(mesh.node_count());
    for (Eigen::Index k = 0; k < field.size(); ++k) {
        field[k] = n01(rng);
    }
    std::vector<Point> pts;
    for (int id = 0; id < mesh.node_count(); ++id) {
        pts.push_back(mesh.node(id));
    }
    const Eigen::VectorXd v = mesh.interpolate(field, pts);
    EXPECT_LE((v - field).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Interpolate, SingleCellCenterAveragesCorners) {
    const auto mesh = build_mesh(kUnit, 1, 1);
    const Eigen::VectorXd field = (Eigen::VectorXd(4) << 0.0, 1.0, 2.0, 3.0).finished();
    const std::vector<Point> pts{{0.5, 0.5}};
    EXPECT_DOUBLE_EQ(mesh.interpolate(field, pts)[0], 1.5);
}

TEST(Interpolate, RejectsWrongFieldLength) {
    const auto mesh = build_mesh(kUnit, 2, 2);
    const std::vector<Point> pts{{0.5, 0.5}};
    EXPECT_THROW((void)mesh.interpolate(Eigen::VectorXd::Zero(4), pts), ConfigError);
}

TEST(PointSampler, MatchesInterpolate) {
    const auto mesh = build_mesh(kUnit, 4, 4);
    const Eigen::VectorXd field = sample(mesh, [](double x, double y) { return std::sin(3 * x) * y; });
    const std::vector<Point> pts{{0.1, 0.2}, {0.9, 0.4}, {0.5, 1.0}};
    const PointSampler sampler(mesh, pts);
    EXPECT_EQ(sampler.size(), 3u);
    EXPECT_EQ(sampler.apply(field), mesh.interpolate(field, pts));
}
