#include "ifem/amr.hpp"
#include "ifem/estimator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace ifem;

namespace {

struct Solved
{
    Mesh mesh;
    InterfaceClassification cls;
    std::vector<IFELocalBasis> bases;
    DiscreteSolution sol;
};

Solved solve_on(const Mesh& mesh, const BenchmarkProblem& prob, const SolverConfig& cfg = {})
{
    Solved s{mesh, classify_elements(mesh, prob.level_set), {}, {}};
    s.bases = build_bases(s.mesh, s.cls, prob.alpha_minus, prob.alpha_plus);
    const auto dofs = build_dof_map(s.mesh);
    s.sol = solve(assemble(s.mesh, s.cls, s.bases, dofs, prob, cfg), cfg, s.mesh, s.bases);
    return s;
}

Indicators eta_of(const Solved& s, const BenchmarkProblem& prob, const DiscreteSolution& sol)
{
    const auto jumps = edge_jumps(s.mesh, s.cls, sol, prob);
    const auto regions = mismatch_regions(s.cls, prob.level_set);
    return eta_indicators(s.mesh, s.cls, jumps, regions, sol, prob);
}

EdgeJumps zero_jumps(const Mesh& mesh)
{
    EdgeJumps j;
    j.edges.resize(mesh.n_edges());
    for (int e = 0; e < mesh.n_edges(); ++e) {
        j.edges[e].edge = e;
        j.edges[e].kind = mesh.edge(e).kind;
        j.edges[e].length = mesh.edge_length(e);
        j.edges[e].segments[0] = {mesh.edge_length(e), Side::plus, 1.0, 0.0, 0.0};
    }
    return j;
}

int interior_edge(const Mesh& mesh, const Vec2& normal)
{
    for (int e = 0; e < mesh.n_edges(); ++e)
        if (mesh.edge(e).kind == BoundaryKind::interior && (mesh.edge_normal(e) - normal).norm() < 1e-14) return e;
    return -1;
}

}  // namespace

TEST_CASE("normal jump of a hand-set gradient field")
{
    const auto prob = linear_problem(0, 0, 0);
    const Mesh m = build_initial_mesh(2);
    const auto cls = classify_elements(m, prob.level_set);
    const auto bases = build_bases(m, cls, 1.0, 1.0);
    auto sol = make_solution(m, bases, Eigen::VectorXd::Zero(m.n_vertices()));
    const int e = interior_edge(m, Vec2(1, 0));
    REQUIRE(e >= 0);
    for (auto& g : sol.gradients[m.edge(e).tri[0]]) g = Vec2(1, 0);
    const auto jumps = edge_jumps(m, cls, sol, prob);
    CHECK(jumps.edges[e].segments[0].normal == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(jumps.edges[e].segments[0].tangential == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(jumps.edges[e].segments[0].alpha == 1.0);
}

TEST_CASE("regular edge contribution")
{
    const Mesh m = build_initial_mesh(4);
    const auto cls = classify_elements(m, linear_problem(0, 0, 0).level_set);
    auto jumps = zero_jumps(m);
    const int e = interior_edge(m, Vec2(1, 0));
    REQUIRE(m.edge_length(e) == doctest::Approx(0.5));
    jumps.edges[e].segments[0].normal = 1.0;
    const auto ind = xi_indicators(m, cls, jumps);
    for (int k = 0; k < m.n_triangles(); ++k) {
        const bool adjacent = k == m.edge(e).tri[0] || k == m.edge(e).tri[1];
        CHECK(ind.terms[k].regular == doctest::Approx(adjacent ? 0.25 / 2 : 0.0).epsilon(1e-14));
        CHECK(ind.local[k] * ind.local[k] == doctest::Approx(adjacent ? 0.125 : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("interface edge contribution")
{
    const Mesh m = build_initial_mesh(20);
    const auto cls = classify_elements(m, linear_problem(0, 0, 0).level_set);
    auto jumps = zero_jumps(m);
    const int e = interior_edge(m, Vec2(1, 0));
    REQUIRE(m.edge_length(e) == doctest::Approx(0.1));
    auto& ej = jumps.edges[e];
    ej.interface = true;
    ej.n_segments = 2;
    ej.segments[0] = {0.04, Side::plus, 4.0, 2.0, 0.0};
    ej.segments[1] = {0.06, Side::minus, 1.0, 3.0, 0.0};
    const auto ind = xi_indicators(m, cls, jumps);
    for (int k : m.edge(e).tri) {
        CHECK(ind.terms[k].interface_normal == doctest::Approx(0.029).epsilon(1e-13));
        CHECK(ind.terms[k].interface_tangential == 0.0);
    }
    ej.segments[0].tangential = 0.5;
    const auto with_t = xi_indicators(m, cls, jumps);
    // (h/2) * alpha * j_t^2 * |F+| = 0.05 * 4 * 0.25 * 0.04
    CHECK(with_t.terms[m.edge(e).tri[0]].interface_tangential == doctest::Approx(0.002).epsilon(1e-13));
}

TEST_CASE("global linears give a zero estimator")
{
    const auto prob = linear_problem(0.5, 2.0, -1.0, 3.0);
    const auto s = solve_on(refine_nvb(build_initial_mesh(4), std::vector<int>{2, 9}), prob);
    const auto jumps = edge_jumps(s.mesh, s.cls, s.sol, prob);
    for (const auto& ej : jumps.edges)
        for (const auto& p : ej.parts()) {
            CHECK(std::abs(p.normal) <= 1e-10);
            CHECK(std::abs(p.tangential) <= 1e-10);
        }
    CHECK(eta_of(s, prob, s.sol).global <= 1e-10);
}

TEST_CASE("neumann data enters the normal jump")
{
    auto prob = linear_problem(0.5, 2.0, -1.0, 3.0);
    prob.side_kinds = {BoundaryKind::neumann, BoundaryKind::dirichlet, BoundaryKind::dirichlet,
                       BoundaryKind::dirichlet};
    // outward normal (0,-1) on the bottom: g_N = -alpha grad u . n = alpha * c2
    prob.neumann = [](const Point&) { return 3.0 * -1.0; };
    const auto s = solve_on(build_initial_mesh(4, prob.domain, prob.side_kinds), prob);
    for (int v = 0; v < s.mesh.n_vertices(); ++v)
        CHECK(s.sol.coefficients(v) == doctest::Approx(prob.exact(s.mesh.vertex(v))).epsilon(1e-10));
    const auto jumps = edge_jumps(s.mesh, s.cls, s.sol, prob);
    int neumann = 0;
    for (const auto& ej : jumps.edges)
        if (ej.kind == BoundaryKind::neumann) {
            ++neumann;
            CHECK(std::abs(ej.segments[0].normal) <= 1e-10);
        }
    CHECK(neumann == 4);

    // a wrong g_N shows up with weight h_F on the single neighbour
    prob.neumann = [](const Point&) { return 0.0; };
    const auto wrong = edge_jumps(s.mesh, s.cls, s.sol, prob);
    const auto ind = xi_indicators(s.mesh, s.cls, wrong);
    for (const auto& ej : wrong.edges)
        if (ej.kind == BoundaryKind::neumann) {
            CHECK(ej.segments[0].normal == doctest::Approx(3.0));
            CHECK(ind.terms[s.mesh.edge(ej.edge).tri[0]].regular >= 0.5 * 0.5 * 9.0 / 3.0 - 1e-12);
        }
}

TEST_CASE("straight interface solution has no jumps")
{
    const auto prob = straight_interface_problem(0.13, 1.0, 50.0);
    const auto s = solve_on(refine_uniform(build_initial_mesh(4)), prob);
    REQUIRE(s.cls.n_interface_elements() > 0);
    const auto jumps = edge_jumps(s.mesh, s.cls, s.sol, prob);
    for (const auto& ej : jumps.edges)
        if (ej.interface) {
            CHECK(ej.n_segments == 2);
            for (const auto& p : ej.parts()) {
                CHECK(std::abs(p.normal) <= 1e-8);
                CHECK(std::abs(p.tangential) <= 1e-8);
                CHECK(p.alpha == prob.alpha(p.side));
            }
        }
    const auto eta = eta_of(s, prob, s.sol);
    const auto xi = xi_indicators(s.mesh, s.cls, jumps);
    CHECK(eta.global <= 1e-8);
    for (std::size_t k = 0; k < eta.size(); ++k) CHECK(xi.local[k] == eta.local[k]);
}

TEST_CASE("indicator identities on the ellipse")
{
    for (double rho : {100.0, 1e6}) {
        const auto prob = ellipse_problem(rho, 5);
        const auto s = solve_on(refine_uniform(build_initial_mesh(8)), prob);
        const auto jumps = edge_jumps(s.mesh, s.cls, s.sol, prob);
        const auto eta = eta_of(s, prob, s.sol);
        const auto xi = xi_indicators(s.mesh, s.cls, jumps);

        double sum = 0;
        for (double v : eta.local) sum += v * v;
        CHECK(eta.global * eta.global == doctest::Approx(sum).epsilon(1e-12));
        CHECK(xi.global <= eta.global);
        for (std::size_t k = 0; k < eta.size(); ++k) {
            CHECK(xi.local[k] <= eta.local[k]);
            const auto& t = eta.terms[k];
            CHECK(t.interface_normal >= 0.0);
            CHECK(t.interface_tangential >= 0.0);
            CHECK(t.mismatch >= 0.0);
            CHECK(t.regular >= 0.0);
            CHECK(t.sum() == doctest::Approx(eta.local[k] * eta.local[k]).epsilon(1e-12));
        }
        double gscale = 0;
        for (const auto& g : s.sol.gradients) gscale = std::max(gscale, g[0].norm());
        for (const auto& ej : jumps.edges) {
            if (ej.kind == BoundaryKind::dirichlet) {
                CHECK(ej.segments[0].normal == 0.0);
                CHECK(ej.segments[0].tangential == 0.0);
            } else if (!ej.interface) {
                CHECK(std::abs(ej.segments[0].tangential) <= 1e-12 * gscale);
            }
        }

        // every indicator scales with the solution
        const double factor = 3.5;
        const auto scaled = make_solution(s.mesh, s.bases, factor * s.sol.coefficients);
        const auto eta2 = eta_of(s, prob, scaled);
        const double top = *std::max_element(eta.local.begin(), eta.local.end());
        for (std::size_t k = 0; k < eta.size(); ++k)
            CHECK(std::abs(eta2.local[k] - factor * eta.local[k]) <= 1e-10 * factor * top);

        // the true-error indicator aggregates to the energy error
        const auto star = true_error_indicators(s.mesh, s.cls, s.sol, prob);
        CHECK(star.global == doctest::Approx(energy_error(s.mesh, s.cls, s.sol, prob)).epsilon(1e-10));
        double star_sum = 0;
        for (double v : star.local) star_sum += v * v;
        CHECK(star.global * star.global == doctest::Approx(star_sum).epsilon(1e-12));
    }
}

TEST_CASE("petal cuts carry a mismatch term")
{
    const auto prob = petal_problem(10);
    const auto s = solve_on(conform_to_interface(build_initial_mesh(16), prob.level_set, 8), prob);
    const auto jumps = edge_jumps(s.mesh, s.cls, s.sol, prob);
    const auto eta = eta_of(s, prob, s.sol);
    const auto xi = xi_indicators(s.mesh, s.cls, jumps);
    const auto regions = mismatch_regions(s.cls, prob.level_set);
    int curved = 0;
    for (std::size_t c = 0; c < s.cls.cuts.size(); ++c) {
        const int k = s.cls.cuts[c].element;
        if (regions[c].total_area() > 0.0 && s.sol.gradients[k][0].norm() + s.sol.gradients[k][1].norm() > 0.0) {
            ++curved;
            CHECK(xi.local[k] < eta.local[k]);
        }
    }
    CHECK(curved > 0);
    CHECK(xi.global < eta.global);
}

TEST_CASE("true error of an interpolated linear vanishes")
{
    const auto prob = linear_problem(1, -2, 0.5);
    const Mesh m = build_initial_mesh(4);
    const auto cls = classify_elements(m, prob.level_set);
    const auto bases = build_bases(m, cls, 1.0, 1.0);
    const auto sol = make_solution(m, bases, interpolate(m, [&](const Point& p) { return prob.exact(p); }));
    CHECK(true_error_indicators(m, cls, sol, prob).global <= 1e-12);
}

TEST_CASE("efficiency index and summation")
{
    CHECK(*efficiency_index(3.0, 1.0) == 3.0);
    CHECK_FALSE(efficiency_index(1.0, 0.0));
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / double(i + 1);
    double ref = 0;
    for (double x : v) ref += x * x;
    CHECK(sum_of_squares(v) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(sum_of_squares(std::vector<double>{}) == 0.0);
}

TEST_CASE("indicator csv")
{
    Indicators ind;
    ind.terms = {{1, 2, 3, 4}};
    ind.local = {std::sqrt(10.0)};
    std::ostringstream out;
    write_indicators_csv(out, ind);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "element,eta,interface_normal,interface_tangential,mismatch,regular");
    CHECK(row.rfind("0,3.16227766017,1,2,3,4", 0) == 0);
}
