#include "ifem/amr.hpp"
#include "ifem/problems.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ifem;

namespace {

std::vector<Point> sample_points(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    std::vector<Point> out;
    for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng));
    return out;
}

// Checks grad u against differences of u, and f = -div(alpha grad u) against
// differences of the flux, away from the interface and the origin.
void check_against_fd(const BenchmarkProblem& prob, double keep_away)
{
    int checked = 0;
    for (const Point& x : sample_points(400, 5)) {
        if (std::abs(prob.level_set.value(x)) < keep_away || x.norm() < 0.1) continue;
        const Side s = prob.level_set.side(x);
        auto u = [&](const Point& y) { return prob.exact_on(y, s); };
        const Vec2 g = prob.exact_gradient_on(x, s);
        for (int axis : {0, 1}) {
            const double d = oracle::fd_derivative(u, x, axis, 1e-4);
            CHECK(std::abs(d - g(axis)) <= 1e-5 * g.norm());
        }
        auto flux = [&](int axis) {
            return [&, axis](const Point& y) { return prob.alpha(s) * prob.exact_gradient_on(y, s)(axis); };
        };
        const double div = oracle::fd_laplacian_flux(flux(0), flux(1), x, 1e-4);
        const double f = prob.source(x);
        CHECK(std::abs(-div - f) <= 1e-5 * std::max(1.0, std::abs(f)));
        const Vec2 gphi = prob.level_set.gradient(x);
        for (int axis : {0, 1})
            CHECK(std::abs(oracle::fd_derivative(prob.level_set.value, x, axis, 1e-5) - gphi(axis)) <=
                  1e-5 * std::max(1.0, gphi.norm()));
        ++checked;
    }
    CHECK(checked > 100);
}

// Points on the zero level set along rays from the origin, by bisection.
std::vector<Point> interface_points(const LevelSet& ls, int n)
{
    std::vector<Point> out;
    for (int i = 0; i < n; ++i) {
        const double t = 2 * M_PI * (i + 0.37) / n;
        const Vec2 dir(std::cos(t), std::sin(t));
        double lo = 0.0, hi = 0.99;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ls.value(mid * dir) < 0 ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi) * dir);
    }
    return out;
}

void check_interface_conditions(const BenchmarkProblem& prob, const std::vector<Point>& points)
{
    for (const Point& x : points) {
        REQUIRE(std::abs(prob.level_set.value(x)) <= 1e-12);
        const double um = prob.exact_on(x, Side::minus), up = prob.exact_on(x, Side::plus);
        CHECK(um == doctest::Approx(up).epsilon(1e-10));
        const Vec2 n = prob.level_set.gradient(x).normalized();
        const double fm = prob.alpha_minus * prob.exact_gradient_on(x, Side::minus).dot(n);
        const double fp = prob.alpha_plus * prob.exact_gradient_on(x, Side::plus).dot(n);
        CHECK(fm == doctest::Approx(fp).epsilon(1e-10));
    }
}

BenchmarkProblem quadratic_problem()
{
    BenchmarkProblem prob = linear_problem(0, 0, 0, 1.0);
    prob.name = "quadratic";
    prob.exact_on = [](const Point& x, Side) { return x.x() * x.x() - 0.5 * x.x() * x.y() + 0.3 * x.y(); };
    prob.exact_gradient_on = [](const Point& x, Side) {
        return Vec2(2 * x.x() - 0.5 * x.y(), -0.5 * x.x() + 0.3);
    };
    prob.source = [](const Point&) { return -2.0; };
    return prob;
}

}  // namespace

TEST_CASE("ellipse data")
{
    for (double rho : {100.0, 1e6})
        for (double p : {5.0, 0.5}) {
            const auto prob = ellipse_problem(rho, p);
            CHECK(prob.rho() == doctest::Approx(rho));
            const double a = M_PI / 6.28;
            CHECK(prob.level_set.value(Point(a, 0)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
            CHECK(prob.exact_on(Point(a, 0), Side::minus) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(prob.exact_on(Point(a, 0), Side::plus) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(prob.level_set.value(Point(0, 1.5 * a)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
            CHECK(prob.level_set.side(Point(0, 0)) == Side::minus);
            CHECK(prob.level_set.side(Point(0.9, 0.9)) == Side::plus);
            check_interface_conditions(prob, interface_points(prob.level_set, 200));
            check_against_fd(prob, 0.02);
        }
    CHECK_THROWS(ellipse_problem(-1, 5));
    CHECK_THROWS(ellipse_problem(10, 0));
}

TEST_CASE("petal data")
{
    for (double rho : {10.0, 1e3}) {
        const auto prob = petal_problem(rho);
        check_interface_conditions(prob, interface_points(prob.level_set, 200));
        check_against_fd(prob, 0.02);
        // the source extends continuously to the origin
        CHECK(prob.source(Point(0, 0)) == 0.0);
        CHECK(std::abs(prob.source(Point(1e-5, 2e-5))) <= 1e-7);
        CHECK(std::isfinite(prob.source(Point(1e-300, 0))));
        CHECK(prob.exact(Point(0, 0)) == doctest::Approx(-0.3));
    }
    CHECK(make_problem("petal", 10, 0).name == "petal");
    CHECK_THROWS_AS(make_problem("square", 10, 5), std::invalid_argument);
}

TEST_CASE("straight and linear problems")
{
    const auto s = straight_interface_problem(0.2, 2.0, 8.0);
    std::vector<Point> line;
    for (int i = 0; i < 200; ++i) line.emplace_back(0.2, -1.0 + 2.0 * i / 199.0);
    check_interface_conditions(s, line);
    CHECK(s.exact(Point(1, 0)) == doctest::Approx(0.1));
    CHECK(s.exact(Point(-1, 0)) == doctest::Approx(-0.6));
    const auto l = linear_problem(1, 2, 3);
    CHECK(l.exact(Point(1, 1)) == 6.0);
    CHECK(l.source(Point(0.3, 0.1)) == 0.0);
}

TEST_CASE("energy error of interpolated linears is zero")
{
    const auto prob = linear_problem(1, -1, 2, 5.0);
    const Mesh m = build_initial_mesh(4);
    const auto cls = classify_elements(m, prob.level_set);
    const auto bases = build_bases(m, cls, 5.0, 5.0);
    const auto sol = make_solution(m, bases, interpolate(m, [&](const Point& x) { return prob.exact(x); }));
    CHECK(energy_error(m, cls, sol, prob) <= 1e-12);
}

TEST_CASE("energy error against an independent rule")
{
    const auto prob = quadratic_problem();
    for (const Mesh& m : {build_initial_mesh(1), refine_nvb(build_initial_mesh(4), std::vector<int>{5, 6})}) {
        const auto cls = classify_elements(m, prob.level_set);
        const auto bases = build_bases(m, cls, 1.0, 1.0);
        const auto sol = make_solution(m, bases, interpolate(m, [&](const Point& x) { return prob.exact(x); }));
        const auto parts = energy_error_squared(m, cls, sol, prob);
        double total = 0;
        for (int k = 0; k < m.n_triangles(); ++k) {
            const Vec2 gh = sol.gradient(k, Side::plus);
            const double ref = oracle::reference_integral(
                m.corners(k), [&](const Point& x) { return (prob.exact_gradient_on(x, Side::plus) - gh).squaredNorm(); });
            CHECK(parts[k] == doctest::Approx(ref).epsilon(1e-6));
            total += ref;
        }
        CHECK(energy_error(m, cls, sol, prob) == doctest::Approx(std::sqrt(total)).epsilon(1e-6));
    }
}

TEST_CASE("energy error on interface elements")
{
    const auto prob = ellipse_problem(100, 5);
    const Mesh m = refine_uniform(build_initial_mesh(8));
    const auto cls = classify_elements(m, prob.level_set);
    const auto bases = build_bases(m, cls, prob.alpha_minus, prob.alpha_plus);
    const auto sol = make_solution(m, bases, interpolate(m, [&](const Point& x) { return prob.exact(x); }));
    const auto parts = energy_error_squared(m, cls, sol, prob);
    double lib = 0, ref = 0;
    for (const auto& cut : cls.cuts) {
        lib += parts[cut.element];
        ref += oracle::reference_integral(
            m.corners(cut.element),
            [&](const Point& x) {
                const Side s = prob.level_set.side(x);
                return prob.alpha(s) * (prob.exact_gradient_on(x, s) - sol.gradient(cut.element, cut.chord_side(x)))
                                           .squaredNorm();
            },
            4, 5);
    }
    CHECK(lib == doctest::Approx(ref).epsilon(5e-3));

    // doubling the subdivision depth barely moves the total
    EnergyNormOptions fine;
    fine.subdivision_depth = 4;
    const double e2 = energy_error(m, cls, sol, prob);
    const double e4 = energy_error(m, cls, sol, prob, fine);
    CHECK(std::abs(e2 - e4) <= 0.005 * e4);
}

TEST_CASE("discrete errors decrease under uniform refinement")
{
    const auto prob = ellipse_problem(100, 5);
    Mesh m = build_initial_mesh(4);
    double prev = 1e300;
    for (int level = 0; level < 4; ++level, m = refine_uniform(m)) {
        const auto cls = classify_elements(m, prob.level_set);
        const auto bases = build_bases(m, cls, prob.alpha_minus, prob.alpha_plus);
        const auto dofs = build_dof_map(m);
        const auto sol = solve(assemble(m, cls, bases, dofs, prob, SolverConfig{}), SolverConfig{}, m, bases);
        const double e = energy_error(m, cls, sol, prob);
        CHECK(e < prev);
        prev = e;
    }
}
