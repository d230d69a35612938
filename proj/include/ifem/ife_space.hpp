#pragma once

#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace ifem {

class BasisError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// v(p) = value + gradient . (p - origin). The origin is shared by all
/// pieces of one element.
struct LinearPiece
{
    double value = 0.0;
    Vec2 gradient = Vec2::Zero();

    double at(const Point& p, const Point& origin) const { return value + gradient.dot(p - origin); }
};

/// Global polynomial coefficients c0 + c1 x + c2 y of a piece.
struct LinearCoefficients
{
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

/**
 * Nodal basis of one element. Non-interface elements carry the standard
 * barycentric functions on both pieces; interface elements carry the two
 * linear pieces on K~^+ and K~^- of every nodal function.
 */
struct IFELocalBasis
{
    int element = -1;
    bool interface = false;
    Point origin = Point::Zero();
    Point chord_point = Point::Zero();
    Vec2 chord_normal = Vec2::Zero();  ///< from K~^- into K~^+
    Side side = Side::plus;            ///< side of a non-interface element
    std::array<std::array<LinearPiece, 2>, 3> pieces{};  ///< [local vertex][side_index]

    const LinearPiece& piece(int z, Side s) const
    {
        return pieces[static_cast<std::size_t>(z)][static_cast<std::size_t>(side_index(s))];
    }
    Side side_of(const Point& p) const
    {
        if (!interface) return side;
        return chord_normal.dot(p - chord_point) >= 0.0 ? Side::plus : Side::minus;
    }
    LinearCoefficients coefficients(int z, Side s) const;
};

struct DofMap
{
    std::vector<int> vertex_to_dof;  ///< -1 for Dirichlet vertices
    std::vector<int> dof_to_vertex;
    std::vector<bool> dirichlet;

    int n_free() const { return static_cast<int>(dof_to_vertex.size()); }
};

IFELocalBasis build_p1_basis(const std::array<Point, 3>& corners, Side side = Side::plus);

/// Solves the 6x6 nodal/continuity/flux system for each vertex. Throws
/// BasisError when the equilibrated system is numerically singular.
IFELocalBasis build_local_basis(const std::array<Point, 3>& corners, const InterfaceCut& cut, double alpha_minus,
                                double alpha_plus);

std::vector<IFELocalBasis> build_bases(const Mesh& mesh, const InterfaceClassification& cls, double alpha_minus,
                                       double alpha_plus);

double eval_basis(const IFELocalBasis& basis, int z, const Point& p);
Vec2 grad_basis(const IFELocalBasis& basis, int z, const Point& p);

DofMap build_dof_map(const Mesh& mesh);

}  // namespace ifem
