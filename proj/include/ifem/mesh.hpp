#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
inline double cross2(const Point& a, const Point& b, const Point& c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

inline double signed_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * cross2(a, b, c);
}

struct Rect
{
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
};

enum class BoundaryKind { interior, dirichlet, neumann };

enum class RectSide { bottom = 0, right = 1, top = 2, left = 3 };

class MeshError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * A triangle stores its vertices counterclockwise. Local edge i is the edge
 * opposite local vertex i, i.e. (v[i+1], v[i+2]). The refinement edge is
 * local edge `ref_edge`; the vertex opposite to it is the newest vertex.
 */
struct Triangle
{
    std::array<int, 3> v{};
    int ref_edge = 0;
};

/**
 * Edge (a, b) is oriented counterclockwise with respect to its first
 * neighbour K_{F,1}, so the outward normal of K_{F,1} is the unit normal
 * n_F = (dy, -dx) / |F|. For boundary edges only K_{F,1} exists.
 */
struct Edge
{
    std::array<int, 2> v{};
    std::array<int, 2> tri{-1, -1};
    BoundaryKind kind = BoundaryKind::interior;
};

struct ElementGeometry
{
    double diameter = 0.0;
    double area = 0.0;
    double min_angle_deg = 0.0;
    std::array<double, 3> edge_lengths{};
};

struct MeshStats
{
    std::size_t n_vertices = 0;
    std::size_t n_triangles = 0;
    std::size_t n_edges = 0;
    std::size_t n_boundary_edges = 0;
    double min_angle_deg = 0.0;
    double max_diameter = 0.0;
    double min_diameter = 0.0;
};

class Mesh
{
public:
    Mesh() = default;

    /// Builds edge topology from the given triangles. Throws MeshError when
    /// the triangulation is not conforming or has non-positive areas.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, Rect domain,
         std::array<BoundaryKind, 4> side_kinds = default_sides(), int generation = 0);

    static std::array<BoundaryKind, 4> default_sides()
    {
        return {BoundaryKind::dirichlet, BoundaryKind::dirichlet, BoundaryKind::dirichlet,
                BoundaryKind::dirichlet};
    }

    std::span<const Point> vertices() const { return vertices_; }
    std::span<const Triangle> triangles() const { return triangles_; }
    std::span<const Edge> edges() const { return edges_; }

    const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const Triangle& triangle(int k) const { return triangles_[static_cast<std::size_t>(k)]; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    /// Global edge id of local edge i (opposite local vertex i) of triangle k.
    int triangle_edge(int k, int i) const { return tri_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }
    const std::array<int, 3>& triangle_edges(int k) const { return tri_edges_[static_cast<std::size_t>(k)]; }

    const Rect& domain() const { return domain_; }
    const std::array<BoundaryKind, 4>& side_kinds() const { return side_kinds_; }
    int generation() const { return generation_; }

    std::array<Point, 3> corners(int k) const;
    ElementGeometry geometry(int k) const;
    double area(int k) const;
    double diameter(int k) const;

    double edge_length(int e) const;
    Vec2 edge_normal(int e) const;
    Vec2 edge_tangent(int e) const;
    Point edge_midpoint(int e) const;

    /// True when vertex i lies on a Dirichlet edge.
    std::vector<bool> dirichlet_vertices() const;

    /// Verifies conformity, orientation and label validity. Returns an empty
    /// string on success, otherwise a description of the first violation.
    std::string audit() const;

private:
    void build_edges();
    BoundaryKind classify_boundary(const Point& a, const Point& b) const;

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> tri_edges_;
    Rect domain_;
    std::array<BoundaryKind, 4> side_kinds_ = default_sides();
    int generation_ = 0;
};

/// n x n rectangles, each cut along its positive-slope diagonal. The
/// diagonal is the refinement edge of both halves.
Mesh build_initial_mesh(int n, const Rect& domain = {},
                        std::array<BoundaryKind, 4> side_kinds = Mesh::default_sides());

/// Newest vertex bisection of the marked triangles followed by conforming
/// closure. Every marked triangle is bisected at least once.
Mesh refine_nvb(const Mesh& mesh, std::span<const int> marked);

/// Marks every triangle twice, giving four children per triangle on a
/// compatibly labelled mesh.
Mesh refine_uniform(const Mesh& mesh);

MeshStats mesh_stats(const Mesh& mesh);

/// Plain-text dump: `vertices N triangles M`, N lines `x y`, M lines
/// `v0 v1 v2 refedge`.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in, const Rect& domain = {});

}  // namespace ifem
