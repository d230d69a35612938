#include "ifem/ife_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>

namespace ifem {

namespace {

constexpr double max_condition = 1e12;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

LinearCoefficients IFELocalBasis::coefficients(int z, Side s) const
{
    const auto& p = piece(z, s);
    return {p.value - p.gradient.dot(origin), p.gradient.x(), p.gradient.y()};
}

IFELocalBasis build_p1_basis(const std::array<Point, 3>& corners, Side side)
{
    IFELocalBasis basis;
    basis.origin = corners[0];
    basis.side = side;
    const double twice_area = cross2(corners[0], corners[1], corners[2]);
    for (int i = 0; i < 3; ++i) {
        const Point& a = corners[idx((i + 1) % 3)];
        const Point& b = corners[idx((i + 2) % 3)];
        // Gradient of the barycentric coordinate of vertex i: rot(b - a) / 2|K|.
        const Vec2 g(a.y() - b.y(), b.x() - a.x());
        LinearPiece piece{i == 0 ? 1.0 : 0.0, g / twice_area};
        basis.pieces[idx(i)] = {piece, piece};
    }
    return basis;
}

IFELocalBasis build_local_basis(const std::array<Point, 3>& corners, const InterfaceCut& cut, double alpha_minus,
                                double alpha_plus)
{
    if (!(alpha_minus > 0.0) || !(alpha_plus > 0.0)) throw BasisError("coefficients must be positive");

    const Point origin = corners[0];
    const double h = std::max({(corners[1] - corners[0]).norm(), (corners[2] - corners[1]).norm(),
                               (corners[0] - corners[2]).norm()});
    auto local = [&](const Point& p) -> Vec2 { return (p - origin) / h; };

    // Unknowns: (value at origin, scaled gradient) for the plus then minus piece.
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
        const Vec2 q = local(corners[idx(i)]);
        const int off = cut.vertex_side[idx(i)] == Side::plus ? 0 : 3;
        A(i, off) = 1.0;
        A(i, off + 1) = q.x();
        A(i, off + 2) = q.y();
    }
    for (int r = 3; r < 5; ++r) {
        const Vec2 q = local(r == 3 ? cut.D : cut.E);
        A(r, 0) = 1.0;
        A(r, 1) = q.x();
        A(r, 2) = q.y();
        A(r, 3) = -1.0;
        A(r, 4) = -q.x();
        A(r, 5) = -q.y();
    }
    const double a_max = std::max(alpha_minus, alpha_plus);
    const double wp = alpha_plus / a_max, wm = alpha_minus / a_max;
    A(5, 1) = wp * cut.normal.x();
    A(5, 2) = wp * cut.normal.y();
    A(5, 4) = -wm * cut.normal.x();
    A(5, 5) = -wm * cut.normal.y();

    Eigen::Matrix<double, 6, 6> equilibrated = A;
    for (int r = 0; r < 6; ++r) equilibrated.row(r) /= equilibrated.row(r).cwiseAbs().maxCoeff();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(equilibrated);
    const auto& sv = svd.singularValues();
    const double condition = sv(5) > 0.0 ? sv(0) / sv(5) : std::numeric_limits<double>::infinity();
    if (!(condition <= max_condition))
        throw BasisError("IFE basis system of element " + std::to_string(cut.element) +
                         " is ill-conditioned (condition " + std::to_string(condition) + ")");

    Eigen::Matrix<double, 6, 3> rhs = Eigen::Matrix<double, 6, 3>::Zero();
    rhs.topRows<3>().setIdentity();
    const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(A);
    const Eigen::Matrix<double, 6, 3> coef = lu.solve(rhs);

    IFELocalBasis basis;
    basis.element = cut.element;
    basis.interface = true;
    basis.origin = origin;
    basis.chord_point = cut.D;
    basis.chord_normal = cut.normal;
    for (int z = 0; z < 3; ++z) {
        const auto c = coef.col(z);
        basis.pieces[idx(z)][idx(side_index(Side::plus))] = {c(0), Vec2(c(1), c(2)) / h};
        basis.pieces[idx(z)][idx(side_index(Side::minus))] = {c(3), Vec2(c(4), c(5)) / h};
    }
    return basis;
}

std::vector<IFELocalBasis> build_bases(const Mesh& mesh, const InterfaceClassification& cls, double alpha_minus,
                                       double alpha_plus)
{
    std::vector<IFELocalBasis> bases;
    bases.reserve(idx(mesh.n_triangles()));
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto corners = mesh.corners(k);
        if (const auto* cut = cls.cut_of(k)) {
            bases.push_back(build_local_basis(corners, *cut, alpha_minus, alpha_plus));
        } else {
            bases.push_back(build_p1_basis(corners, cls.element_side(k)));
        }
        bases.back().element = k;
    }
    return bases;
}

double eval_basis(const IFELocalBasis& basis, int z, const Point& p)
{
    return basis.piece(z, basis.side_of(p)).at(p, basis.origin);
}

Vec2 grad_basis(const IFELocalBasis& basis, int z, const Point& p)
{
    return basis.piece(z, basis.side_of(p)).gradient;
}

DofMap build_dof_map(const Mesh& mesh)
{
    DofMap map;
    map.dirichlet = mesh.dirichlet_vertices();
    map.vertex_to_dof.assign(idx(mesh.n_vertices()), -1);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (map.dirichlet[idx(v)]) continue;
        map.vertex_to_dof[idx(v)] = map.n_free();
        map.dof_to_vertex.push_back(v);
    }
    return map;
}

}  // namespace ifem
