#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace oifs {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;

    [[nodiscard]] double width() const { return x1 - x0; }
    [[nodiscard]] double height() const { return y1 - y0; }

    /// True if p lies in the closed rectangle enlarged by tol.
    [[nodiscard]] bool contains(Point p, double tol = 0.0) const;

    /// Distance from an interior point to the nearest edge (negative outside).
    [[nodiscard]] double inner_distance(Point p) const;

    /// True if p lies on one of the four edges within tol.
    [[nodiscard]] bool on_boundary(Point p, double tol) const;
};

/// Throws ConfigError unless x0 < x1 and y0 < y1.
void validate(const Rect& rect);

inline constexpr double kBoundaryTolerance = 1e-12;

struct CellLocation {
    int i = 0;  ///< cell column
    int j = 0;  ///< cell row
    double xi = 0.0;
    double eta = 0.0;
};

/// Sparse row of interpolation weights: value = sum_k weights[k] * field[nodes[k]].
struct InterpolationStencil {
    std::array<int, 4> nodes{};
    std::array<double, 4> weights{};
};

/// Uniform rectangular Q1 mesh. Node (i,j) has id j*(nx+1)+i.
class StructuredMesh {
public:
    StructuredMesh(Rect rect, int nx, int ny);

    [[nodiscard]] const Rect& rect() const { return rect_; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] double hx() const { return hx_; }
    [[nodiscard]] double hy() const { return hy_; }

    [[nodiscard]] int node_count() const { return (nx_ + 1) * (ny_ + 1); }
    [[nodiscard]] int cell_count() const { return nx_ * ny_; }
    [[nodiscard]] int node_id(int i, int j) const { return j * (nx_ + 1) + i; }
    [[nodiscard]] Point node(int id) const;
    [[nodiscard]] bool is_boundary_node(int id) const;

    /// Counterclockwise corner node ids of cell (i,j): (i,j),(i+1,j),(i+1,j+1),(i,j+1).
    [[nodiscard]] std::array<int, 4> cell_nodes(int i, int j) const;

    [[nodiscard]] const std::vector<int>& boundary_node_ids() const { return boundary_; }
    [[nodiscard]] const std::vector<int>& interior_node_ids() const { return interior_; }

    /// Cell containing p and affine local coordinates. Points within
    /// kBoundaryTolerance outside the rectangle are clamped onto it.
    [[nodiscard]] CellLocation locate_point(Point p) const;

    [[nodiscard]] InterpolationStencil stencil(Point p) const;

    /// Bilinear interpolation of a nodal field at each point.
    [[nodiscard]] Eigen::VectorXd interpolate(const Eigen::VectorXd& nodal_field,
                                              std::span<const Point> points) const;

private:
    Rect rect_;
    int nx_;
    int ny_;
    double hx_;
    double hy_;
    std::vector<int> boundary_;
    std::vector<int> interior_;
};

StructuredMesh build_mesh(const Rect& rect, int nx, int ny);

/// Precomputed bilinear stencils for a fixed point set on one mesh.
class PointSampler {
public:
    PointSampler() = default;
    PointSampler(const StructuredMesh& mesh, std::span<const Point> points);

    [[nodiscard]] std::size_t size() const { return stencils_.size(); }
    [[nodiscard]] const std::vector<InterpolationStencil>& stencils() const { return stencils_; }

    /// Applies the stencils to a nodal field.
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& nodal_field) const;
    void apply(const Eigen::VectorXd& nodal_field, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    std::vector<InterpolationStencil> stencils_;
};

}  // namespace oifs
