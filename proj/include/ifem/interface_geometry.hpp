#pragma once

#include "ifem/mesh.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifem {

/// Omega^- = {phi < 0}, Omega^+ = {phi >= 0}.
enum class Side : int { minus = -1, plus = 1 };

inline Side opposite(Side s) { return s == Side::plus ? Side::minus : Side::plus; }
inline int side_index(Side s) { return s == Side::plus ? 0 : 1; }

struct LevelSet
{
    std::function<double(const Point&)> value;
    std::function<Vec2(const Point&)> gradient;

    double operator()(const Point& p) const { return value(p); }
    Side side(const Point& p) const { return value(p) < 0.0 ? Side::minus : Side::plus; }
};

/// Raised when the mesh does not resolve the interface in the admissible
/// way: an edge crossed twice, or an element the curve enters and leaves
/// without separating its vertices.
class InterfaceAssumptionError : public std::runtime_error
{
public:
    InterfaceAssumptionError(const std::string& what, std::vector<int> elements)
        : std::runtime_error(what), elements_(std::move(elements))
    {
    }
    const std::vector<int>& elements() const { return elements_; }

private:
    std::vector<int> elements_;
};

class GeometryError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using SubTriangle = std::array<Point, 3>;

struct EdgeSplit
{
    int edge = -1;
    Point point = Point::Zero();
    double t = 0.0;  ///< position from edge.v[0] to edge.v[1]
    Side first_side = Side::minus;  ///< side of the sub-segment [v0, point]
    double length_plus = 0.0;
    double length_minus = 0.0;

    double length(Side s) const { return s == Side::plus ? length_plus : length_minus; }
};

struct InterfaceCut
{
    int element = -1;
    int lone_vertex = 0;           ///< local index of the vertex alone on its side
    Side lone_side = Side::minus;
    Point D = Point::Zero();       ///< on the edge from the lone vertex to local vertex lone+1
    Point E = Point::Zero();       ///< on the edge from the lone vertex to local vertex lone+2
    int edge_D = -1;
    int edge_E = -1;
    double t_D = 0.0;              ///< parameter from the lone vertex towards its neighbour
    double t_E = 0.0;
    Vec2 normal = Vec2::Zero();    ///< unit chord normal, from the minus piece into the plus piece
    std::array<Side, 3> vertex_side{};
    std::vector<SubTriangle> plus_triangles;
    std::vector<SubTriangle> minus_triangles;

    Side chord_side(const Point& p) const { return normal.dot(p - D) >= 0.0 ? Side::plus : Side::minus; }
    const std::vector<SubTriangle>& pieces(Side s) const
    {
        return s == Side::plus ? plus_triangles : minus_triangles;
    }
    double piece_area(Side s) const;
};

enum class ElementKind { minus, plus, interface };

struct InterfaceClassification
{
    std::vector<Side> vertex_side;
    std::vector<ElementKind> kind;
    std::vector<int> cut_index;     ///< per element, -1 for non-interface
    std::vector<InterfaceCut> cuts;
    std::vector<int> split_index;   ///< per edge, -1 for non-interface edges
    std::vector<EdgeSplit> splits;

    bool is_interface(int k) const { return cut_index[static_cast<std::size_t>(k)] >= 0; }
    const InterfaceCut* cut_of(int k) const
    {
        const int c = cut_index[static_cast<std::size_t>(k)];
        return c < 0 ? nullptr : &cuts[static_cast<std::size_t>(c)];
    }
    const EdgeSplit* split_of(int e) const
    {
        const int s = split_index[static_cast<std::size_t>(e)];
        return s < 0 ? nullptr : &splits[static_cast<std::size_t>(s)];
    }
    /// Side of a non-interface element.
    Side element_side(int k) const
    {
        return kind[static_cast<std::size_t>(k)] == ElementKind::minus ? Side::minus : Side::plus;
    }
    int n_interface_elements() const { return static_cast<int>(cuts.size()); }
};

/// Region between the interface arc and its chord inside one element.
/// `lobe_plus_area` lies on the plus side of the chord and below the curve,
/// i.e. it is K^- minus K~^- and carries alpha~ = alpha^+; `lobe_minus_area`
/// is K^+ minus K~^+ and carries alpha~ = alpha^-.
struct MismatchRegion
{
    int element = -1;
    double lobe_plus_area = 0.0;
    double lobe_minus_area = 0.0;
    std::vector<Point> curve;  ///< polyline from D to E approximating the arc

    double area(Side tilde_side) const { return tilde_side == Side::plus ? lobe_plus_area : lobe_minus_area; }
    double total_area() const { return lobe_plus_area + lobe_minus_area; }
};

struct ClassifyOptions
{
    double snap_tol = 1e-10;
    int edge_samples = 8;  ///< sign samples per edge for the multiple-crossing check
    bool allow_boundary_crossing = true;
};

/// Root of the level set on the segment p0 -> p1, when the endpoint sides
/// differ. Bracketing bisection down to the floating point resolution.
std::optional<double> edge_intersection(const Point& p0, const Point& p1, const LevelSet& ls);

InterfaceClassification classify_elements(const Mesh& mesh, const LevelSet& ls,
                                          const ClassifyOptions& options = {});

struct SubElementSplit
{
    std::vector<SubTriangle> plus;
    std::vector<SubTriangle> minus;
};

/// Splits the element along the chord DE: the lone vertex side is a single
/// triangle, the other side a quadrangle split along its shorter diagonal.
SubElementSplit subelement_split(const std::array<Point, 3>& corners, const InterfaceCut& cut);

/// Builds the cut record for a triangle given the lone vertex and the two
/// cut parameters. Used by the classifier and directly by tests.
InterfaceCut make_cut(const std::array<Point, 3>& corners, int lone_vertex, Side lone_side, double t_D,
                      double t_E);

MismatchRegion mismatch_regions(const InterfaceCut& cut, const LevelSet& ls, int samples = 32);

std::vector<MismatchRegion> mismatch_regions(const InterfaceClassification& cls, const LevelSet& ls,
                                             int samples = 32);

/// Appends `cut k Dx Dy Ex Ey` records to a mesh dump.
void write_cut_records(std::ostream& out, const InterfaceClassification& cls);

}  // namespace ifem
