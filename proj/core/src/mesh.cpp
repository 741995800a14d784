#include "oifs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oifs/errors.hpp"

namespace oifs {

bool Rect::contains(Point p, double tol) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
}

double Rect::inner_distance(Point p) const {
    return std::min({p.x - x0, x1 - p.x, p.y - y0, y1 - p.y});
}

bool Rect::on_boundary(Point p, double tol) const {
    if (!contains(p, tol)) {
        return false;
    }
    return std::abs(p.x - x0) <= tol || std::abs(p.x - x1) <= tol ||
           std::abs(p.y - y0) <= tol || std::abs(p.y - y1) <= tol;
}

void validate(const Rect& rect) {
    if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1)) {
        std::ostringstream msg;
        msg << "degenerate rectangle [" << rect.x0 << "," << rect.x1 << "]x[" << rect.y0 << ","
            << rect.y1 << "]";
        throw ConfigError(msg.str());
    }
}

StructuredMesh::StructuredMesh(Rect rect, int nx, int ny) : rect_(rect), nx_(nx), ny_(ny) {
    validate(rect_);
    if (nx < 1 || ny < 1) {
        throw ConfigError("mesh cell counts must be >= 1");
    }
    hx_ = rect_.width() / nx_;
    hy_ = rect_.height() / ny_;

    boundary_.reserve(static_cast<std::size_t>(2 * (nx_ + ny_)));
    interior_.reserve(static_cast<std::size_t>(std::max(0, (nx_ - 1) * (ny_ - 1))));
    for (int id = 0; id < node_count(); ++id) {
        (is_boundary_node(id) ? boundary_ : interior_).push_back(id);
    }
}

Point StructuredMesh::node(int id) const {
    const int i = id % (nx_ + 1);
    const int j = id / (nx_ + 1);
    return {rect_.x0 + i * hx_, rect_.y0 + j * hy_};
}

bool StructuredMesh::is_boundary_node(int id) const {
    const int i = id % (nx_ + 1);
    const int j = id / (nx_ + 1);
    return i == 0 || i == nx_ || j == 0 || j == ny_;
}

std::array<int, 4> StructuredMesh::cell_nodes(int i, int j) const {
    return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
}

CellLocation StructuredMesh::locate_point(Point p) const {
    if (!rect_.contains(p, kBoundaryTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "point (" << p.x << "," << p.y << ") outside mesh rectangle";
        throw OutOfDomainError(msg.str());
    }
    const double sx = std::clamp((p.x - rect_.x0) / hx_, 0.0, static_cast<double>(nx_));
    const double sy = std::clamp((p.y - rect_.y0) / hy_, 0.0, static_cast<double>(ny_));
    CellLocation loc;
    loc.i = std::min(static_cast<int>(std::floor(sx)), nx_ - 1);
    loc.j = std::min(static_cast<int>(std::floor(sy)), ny_ - 1);
    loc.xi = sx - loc.i;
    loc.eta = sy - loc.j;
    return loc;
}

InterpolationStencil StructuredMesh::stencil(Point p) const {
    const CellLocation loc = locate_point(p);
    InterpolationStencil s;
    s.nodes = cell_nodes(loc.i, loc.j);
    s.weights = {(1.0 - loc.xi) * (1.0 - loc.eta), loc.xi * (1.0 - loc.eta), loc.xi * loc.eta,
                 (1.0 - loc.xi) * loc.eta};
    return s;
}

Eigen::VectorXd StructuredMesh::interpolate(const Eigen::VectorXd& nodal_field,
                                            std::span<const Point> points) const {
    if (nodal_field.size() != node_count()) {
        throw ConfigError("nodal field length does not match mesh node count");
    }
    return PointSampler(*this, points).apply(nodal_field);
}

StructuredMesh build_mesh(const Rect& rect, int nx, int ny) { return StructuredMesh(rect, nx, ny); }

PointSampler::PointSampler(const StructuredMesh& mesh, std::span<const Point> points) {
    stencils_.reserve(points.size());
    for (const Point& p : points) {
        stencils_.push_back(mesh.stencil(p));
    }
}

Eigen::VectorXd PointSampler::apply(const Eigen::VectorXd& nodal_field) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(stencils_.size()));
    apply(nodal_field, out);
    return out;
}

void PointSampler::apply(const Eigen::VectorXd& nodal_field, Eigen::Ref<Eigen::VectorXd> out) const {
    for (std::size_t k = 0; k < stencils_.size(); ++k) {
        const auto& s = stencils_[k];
        double v = 0.0;
        for (int c = 0; c < 4; ++c) {
            v += s.weights[c] * nodal_field[s.nodes[c]];
        }
        out[static_cast<Eigen::Index>(k)] = v;
    }
}

}  // namespace oifs
