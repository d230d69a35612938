#include "ifem/amr.hpp"
#include "ifem/ife_space.hpp"
#include "ifem/problems.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace ifem;

namespace {

struct Coef
{
    double c0, c1, c2;
    double at(const Point& p) const { return c0 + c1 * p.x() + c2 * p.y(); }
};

Coef coef(const IFELocalBasis& b, int z, Side s)
{
    const auto c = b.coefficients(z, s);
    return {c.c0, c.c1, c.c2};
}

double scale_of(const IFELocalBasis& b, const std::array<Point, 3>& corners)
{
    double h = 0;
    for (int i = 0; i < 3; ++i) h = std::max(h, (corners[(i + 1) % 3] - corners[i]).norm());
    double s = 1;
    for (int z = 0; z < 3; ++z)
        for (Side side : {Side::plus, Side::minus}) s = std::max(s, h * b.piece(z, side).gradient.norm());
    return s;
}

// Checks the four basis invariants; returns the number of failures.
int check_invariants(const IFELocalBasis& b, const std::array<Point, 3>& corners, const InterfaceCut& cut, double am,
                     double ap)
{
    int bad = 0;
    const double s = scale_of(b, corners);
    for (int z = 0; z < 3; ++z) {
        for (int j = 0; j < 3; ++j) {
            const double v = coef(b, z, cut.vertex_side[j]).at(corners[j]);
            if (std::abs(v - (z == j ? 1.0 : 0.0)) > 1e-10 * s) ++bad;
        }
        for (const Point& q : {cut.D, cut.E})
            if (std::abs(coef(b, z, Side::plus).at(q) - coef(b, z, Side::minus).at(q)) > 1e-10 * s) ++bad;
        const double fp = ap * b.piece(z, Side::plus).gradient.dot(cut.normal);
        const double fm = am * b.piece(z, Side::minus).gradient.dot(cut.normal);
        const double h = (corners[1] - corners[0]).norm();
        if (std::abs(fp - fm) > 1e-10 * std::max(ap, am) * s / h) ++bad;
    }
    for (Side side : {Side::plus, Side::minus}) {
        double c0 = 0, c1 = 0, c2 = 0;
        for (int z = 0; z < 3; ++z) {
            const auto c = coef(b, z, side);
            c0 += c.c0;
            c1 += c.c1;
            c2 += c.c2;
        }
        const double h = (corners[1] - corners[0]).norm();
        const double shift = std::max(1.0, corners[0].norm() / h);
        if (std::abs(c0 - 1.0) > 1e-10 * s * shift || std::abs(c1) * h > 1e-10 * s || std::abs(c2) * h > 1e-10 * s)
            ++bad;
    }
    return bad;
}

// Barycentric coordinate of vertex z as global coefficients.
Coef barycentric(const std::array<Point, 3>& t, int z)
{
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) m.row(i) << 1.0, t[i].x(), t[i].y();
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(z) = 1.0;
    const Eigen::Vector3d c = m.fullPivLu().solve(e);
    return {c(0), c(1), c(2)};
}

double max_abs_on_pieces(const IFELocalBasis& b, const InterfaceCut& cut)
{
    double mx = 0;
    for (Side s : {Side::plus, Side::minus})
        for (const auto& t : cut.pieces(s))
            for (const auto& p : t)
                for (int z = 0; z < 3; ++z) mx = std::max(mx, std::abs(coef(b, z, s).at(p)));
    return mx;
}

}  // namespace

TEST_CASE("equal coefficients give the barycentric basis")
{
    const std::array<Point, 3> tri{Point(0.3, -0.2), Point(2.1, 0.4), Point(0.7, 1.9)};
    for (int lone = 0; lone < 3; ++lone) {
        const auto cut = make_cut(tri, lone, Side::minus, 0.3, 0.6);
        const auto b = build_local_basis(tri, cut, 7.0, 7.0);
        for (int z = 0; z < 3; ++z) {
            const Coef ref = barycentric(tri, z);
            for (Side s : {Side::plus, Side::minus}) {
                const Coef c = coef(b, z, s);
                CHECK(c.c0 == doctest::Approx(ref.c0).epsilon(1e-12));
                CHECK(c.c1 == doctest::Approx(ref.c1).epsilon(1e-12));
                CHECK(c.c2 == doctest::Approx(ref.c2).epsilon(1e-12));
            }
            const Point centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
            CHECK(grad_basis(b, z, centroid).isApprox(Vec2(ref.c1, ref.c2), 1e-12));
        }
    }
}

TEST_CASE("reference element against a dense solve")
{
    const std::array<Point, 3> ref{Point(0, 0), Point(1, 0), Point(0, 1)};
    const double am = 1.0, ap = 100.0;
    const auto cut = make_cut(ref, 0, Side::minus, 0.5, 0.5);
    REQUIRE(cut.D.isApprox(Point(0.5, 0)));
    REQUIRE(cut.E.isApprox(Point(0, 0.5)));
    const auto b = build_local_basis(ref, cut, am, ap);

    // unknowns (a0, a1, a2) on the plus piece, (b0, b1, b2) on the minus piece
    Eigen::Matrix<double, 6, 6> A;
    A << 0, 0, 0, 1, 0, 0,          // (0,0) on the minus side
        1, 1, 0, 0, 0, 0,           // (1,0)
        1, 0, 1, 0, 0, 0,           // (0,1)
        1, 0.5, 0, -1, -0.5, 0,     // continuity at D
        1, 0, 0.5, -1, 0, -0.5,     // continuity at E
        0, ap, ap, 0, -am, -am;     // flux along n ~ (1,1)
    for (int z = 0; z < 3; ++z) {
        Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
        rhs(z) = 1.0;
        const Eigen::Matrix<double, 6, 1> x = A.fullPivLu().solve(rhs);
        const Coef p = coef(b, z, Side::plus), m = coef(b, z, Side::minus);
        CHECK(p.c0 == doctest::Approx(x(0)).epsilon(1e-12));
        CHECK(p.c1 == doctest::Approx(x(1)).epsilon(1e-12));
        CHECK(p.c2 == doctest::Approx(x(2)).epsilon(1e-12));
        CHECK(m.c0 == doctest::Approx(x(3)).epsilon(1e-12));
        CHECK(m.c1 == doctest::Approx(x(4)).epsilon(1e-12));
        CHECK(m.c2 == doctest::Approx(x(5)).epsilon(1e-12));
    }
    // phi_0 = 1 - s(x+y) on the minus piece, t(1-x-y) on the plus piece:
    // t/2 = 1 - s/2 and 100 t = s
    const double t = 2.0 / 101.0, s = 100.0 * t;
    CHECK(coef(b, 0, Side::minus).c1 == doctest::Approx(-s));
    CHECK(coef(b, 0, Side::plus).c0 == doctest::Approx(t));
}

TEST_CASE("evaluation picks the piece on the chord side")
{
    const std::array<Point, 3> ref{Point(0, 0), Point(1, 0), Point(0, 1)};
    const auto cut = make_cut(ref, 0, Side::minus, 0.5, 0.5);
    const auto b = build_local_basis(ref, cut, 1.0, 100.0);
    for (int z = 0; z < 3; ++z) CHECK(eval_basis(b, z, ref[z]) == doctest::Approx(1.0).epsilon(1e-12));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Point p = oracle::sample_triangle(rng, ref);
        const Side s = p.x() + p.y() >= 0.5 ? Side::plus : Side::minus;
        double sum = 0;
        Vec2 g = Vec2::Zero();
        for (int z = 0; z < 3; ++z) {
            CHECK(eval_basis(b, z, p) == doctest::Approx(coef(b, z, s).at(p)).epsilon(1e-12));
            CHECK(grad_basis(b, z, p) == b.piece(z, s).gradient);
            sum += eval_basis(b, z, p);
            g += grad_basis(b, z, p);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.norm() <= 1e-10);
    }
}

TEST_CASE("basis invariants on random cuts")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (int trial = 0; trial < 300; ++trial) {
        const std::array<Point, 3> tri{Point(u(rng), u(rng)), Point(2 + u(rng), u(rng)), Point(u(rng), 2 + u(rng))};
        const double rho = std::pow(10.0, 6.0 * u(rng));
        const Side lone_side = trial % 2 ? Side::plus : Side::minus;
        const auto cut = make_cut(tri, trial % 3, lone_side, u(rng), u(rng));
        const auto b = build_local_basis(tri, cut, 1.0, rho);
        CHECK(check_invariants(b, tri, cut, 1.0, rho) == 0);
        const auto b2 = build_local_basis(tri, cut, rho, 1.0);
        CHECK(check_invariants(b2, tri, cut, rho, 1.0) == 0);
    }
}

TEST_CASE("basis invariants on classified meshes")
{
    struct Case
    {
        BenchmarkProblem prob;
        Mesh mesh;
        int levels;
    };
    std::vector<Case> cases;
    cases.push_back({ellipse_problem(100, 5), build_initial_mesh(4), 5});
    cases.push_back({ellipse_problem(1e6, 5), build_initial_mesh(4), 5});
    const auto petal = petal_problem(10);
    cases.push_back({petal, conform_to_interface(build_initial_mesh(16), petal.level_set, 8), 2});
    for (auto& c : cases) {
        Mesh m = c.mesh;
        for (int level = 0; level < c.levels;
             ++level, m = conform_to_interface(refine_uniform(m), c.prob.level_set, 8)) {
            const auto cls = classify_elements(m, c.prob.level_set);
            const auto bases = build_bases(m, cls, c.prob.alpha_minus, c.prob.alpha_plus);
            REQUIRE(bases.size() == std::size_t(m.n_triangles()));
            int bad = 0;
            for (const auto& cut : cls.cuts)
                bad += check_invariants(bases[cut.element], m.corners(cut.element), cut, c.prob.alpha_minus,
                                        c.prob.alpha_plus);
            CHECK(bad == 0);
            for (int k = 0; k < m.n_triangles(); ++k) CHECK(bases[k].interface == cls.is_interface(k));
        }
    }
}

TEST_CASE("degenerating cut approaches the linear basis")
{
    // the gap to the linear basis shrinks like rho * t
    const std::array<Point, 3> tri{Point(0.1, 0.2), Point(1.3, 0.1), Point(0.4, 1.2)};
    for (double rho : {0.01, 10.0, 100.0})
        for (int lone = 0; lone < 3; ++lone)
            for (Side lone_side : {Side::minus, Side::plus}) {
            const auto cut = make_cut(tri, lone, lone_side, 1e-6, 1e-6);
            const auto b = build_local_basis(tri, cut, 1.0, rho);
            for (int z = 0; z < 3; ++z) {
                const Coef ref = barycentric(tri, z);
                const Coef c = coef(b, z, opposite(lone_side));
                CHECK(std::abs(c.c0 - ref.c0) <= 1e-3);
                CHECK(std::abs(c.c1 - ref.c1) <= 1e-3);
                CHECK(std::abs(c.c2 - ref.c2) <= 1e-3);
            }
        }
}

TEST_CASE("basis stays bounded under refinement")
{
    // every element of these meshes is a right isosceles triangle, so the
    // recorded maximum is taken over all cut positions on that shape
    const std::array<Point, 3> ref{Point(0, 0), Point(1, 0), Point(0, 1)};
    std::vector<double> ts{1e-3, 1 - 1e-3};
    for (int i = 1; i < 100; ++i) ts.push_back(i / 100.0);
    for (double rho : {100.0, 1e6}) {
        double coarse = 0;
        for (int lone = 0; lone < 3; ++lone)
            for (Side s : {Side::minus, Side::plus})
                for (double tD : ts)
                    for (double tE : ts) {
                        const auto cut = make_cut(ref, lone, s, tD, tE);
                        coarse = std::max(coarse, max_abs_on_pieces(build_local_basis(ref, cut, 1.0, rho), cut));
                    }
        const auto prob = ellipse_problem(rho, 5);
        Mesh m = build_initial_mesh(4);
        for (int level = 0; level < 6; ++level, m = refine_uniform(m)) {
            const auto cls = classify_elements(m, prob.level_set);
            double mx = 0;
            for (const auto& cut : cls.cuts) {
                const auto b = build_local_basis(m.corners(cut.element), cut, prob.alpha_minus, prob.alpha_plus);
                mx = std::max(mx, max_abs_on_pieces(b, cut));
            }
            CHECK(mx <= 1.05 * coarse);
        }
    }
}

TEST_CASE("ill-posed inputs are rejected")
{
    const std::array<Point, 3> ref{Point(0, 0), Point(1, 0), Point(0, 1)};
    const auto cut = make_cut(ref, 0, Side::minus, 0.5, 0.5);
    CHECK_THROWS_AS(build_local_basis(ref, cut, 0.0, 1.0), BasisError);
    CHECK_THROWS_AS(build_local_basis(ref, cut, 1.0, -2.0), BasisError);
}

TEST_CASE("dof map")
{
    CHECK(build_dof_map(build_initial_mesh(1)).n_free() == 0);
    const auto map = build_dof_map(build_initial_mesh(4));
    CHECK(map.n_free() == 9);
    for (int d = 0; d < map.n_free(); ++d) CHECK(map.vertex_to_dof[map.dof_to_vertex[d]] == d);
    int constrained = 0;
    for (std::size_t v = 0; v < map.vertex_to_dof.size(); ++v) {
        CHECK((map.vertex_to_dof[v] < 0) == bool(map.dirichlet[v]));
        constrained += map.dirichlet[v];
    }
    CHECK(constrained == 16);

    const Mesh mixed = build_initial_mesh(
        4, Rect{}, {BoundaryKind::neumann, BoundaryKind::dirichlet, BoundaryKind::dirichlet, BoundaryKind::dirichlet});
    CHECK(build_dof_map(mixed).n_free() == 12);
}
