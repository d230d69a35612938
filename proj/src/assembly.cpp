#include "ifem/assembly.hpp"

#include "ifem/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace ifem {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

using Triplets = std::vector<Eigen::Triplet<double>>;

// Trace data of one nodal function on one side of an edge.
struct Trace
{
    double value = 0.0;
    double flux = 0.0;  // alpha grad . n
};

// Side used for the trace of element k on a sub-segment lying in `segment_side`.
Side trace_side(const InterfaceClassification& cls, int k, Side segment_side)
{
    return cls.is_interface(k) ? segment_side : cls.element_side(k);
}

void add_volume(const Mesh& mesh, const InterfaceClassification& cls, std::span<const IFELocalBasis> bases,
                const BenchmarkProblem& problem, Triplets& triplets)
{
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto& tri = mesh.triangle(k);
        const auto& basis = bases[idx(k)];
        auto add_piece = [&](Side s, double area) {
            const double a = problem.alpha(s) * area;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    triplets.emplace_back(tri.v[idx(i)], tri.v[idx(j)],
                                          a * basis.piece(i, s).gradient.dot(basis.piece(j, s).gradient));
        };
        if (const auto* cut = cls.cut_of(k)) {
            add_piece(Side::plus, cut->piece_area(Side::plus));
            add_piece(Side::minus, cut->piece_area(Side::minus));
        } else {
            add_piece(cls.element_side(k), mesh.area(k));
        }
    }
}

void add_interface_edges(const Mesh& mesh, const InterfaceClassification& cls, std::span<const IFELocalBasis> bases,
                         const BenchmarkProblem& problem, const SolverConfig& config, unsigned terms,
                         Triplets& triplets)
{
    for (const auto& split : cls.splits) {
        const auto& edge = mesh.edge(split.edge);
        const std::array<int, 2> elem = edge.tri;
        if (elem[1] < 0) continue;
        const Vec2 n = mesh.edge_normal(split.edge);
        const double h = mesh.edge_length(split.edge);

        // Union of the vertices of both elements and their local indices.
        std::vector<int> verts;
        std::vector<std::array<int, 2>> local;
        for (int m = 0; m < 2; ++m) {
            const auto& t = mesh.triangle(elem[idx(m)]);
            for (int i = 0; i < 3; ++i) {
                const int v = t.v[idx(i)];
                auto it = std::find(verts.begin(), verts.end(), v);
                std::size_t pos = static_cast<std::size_t>(it - verts.begin());
                if (it == verts.end()) {
                    verts.push_back(v);
                    local.push_back({-1, -1});
                }
                local[pos][idx(m)] = i;
            }
        }
        const std::size_t nl = verts.size();

        const Point& p0 = mesh.vertex(edge.v[0]);
        const Point& p1 = mesh.vertex(edge.v[1]);
        const std::array<std::array<Point, 2>, 2> segments = {{{p0, split.point}, {split.point, p1}}};
        const std::array<Side, 2> segment_sides = {split.first_side, opposite(split.first_side)};

        std::vector<double> block(nl * nl, 0.0);
        std::vector<std::array<Trace, 2>> tr(nl);
        for (int s = 0; s < 2; ++s) {
            const auto& seg = segments[idx(s)];
            const double len = (seg[1] - seg[0]).norm();
            std::array<Side, 2> sides{};
            std::array<double, 2> alpha{};
            for (int m = 0; m < 2; ++m) {
                sides[idx(m)] = trace_side(cls, elem[idx(m)], segment_sides[idx(s)]);
                alpha[idx(m)] = problem.alpha(sides[idx(m)]);
            }
            const double alpha_f = std::max(alpha[0], alpha[1]);
            for (double node : quadrature::gauss2_nodes) {
                const Point x = (1.0 - node) * seg[0] + node * seg[1];
                const double w = quadrature::gauss2_weight * len;
                for (std::size_t a = 0; a < nl; ++a) {
                    for (int m = 0; m < 2; ++m) {
                        const int li = local[a][idx(m)];
                        Trace t;
                        if (li >= 0) {
                            const auto& basis = bases[idx(elem[idx(m)])];
                            const auto& piece = basis.piece(li, sides[idx(m)]);
                            t.value = piece.at(x, basis.origin);
                            t.flux = alpha[idx(m)] * piece.gradient.dot(n);
                        }
                        tr[a][idx(m)] = t;
                    }
                }
                for (std::size_t i = 0; i < nl; ++i) {
                    const double jump_v = tr[i][0].value - tr[i][1].value;
                    const double avg_v = 0.5 * (tr[i][0].flux + tr[i][1].flux);
                    for (std::size_t j = 0; j < nl; ++j) {
                        const double jump_w = tr[j][0].value - tr[j][1].value;
                        const double avg_w = 0.5 * (tr[j][0].flux + tr[j][1].flux);
                        double val = 0.0;
                        if (terms & consistency_term) val -= avg_w * jump_v;
                        if (terms & symmetry_term) val += config.epsilon * avg_v * jump_w;
                        if (terms & penalty_term) val += config.gamma / h * alpha_f * jump_w * jump_v;
                        block[i * nl + j] += w * val;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < nl; ++i)
            for (std::size_t j = 0; j < nl; ++j)
                if (block[i * nl + j] != 0.0) triplets.emplace_back(verts[i], verts[j], block[i * nl + j]);
    }
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const InterfaceClassification& cls,
                              std::span<const IFELocalBasis> bases, const BenchmarkProblem& problem)
{
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.n_vertices());
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto& tri = mesh.triangle(k);
        const auto& basis = bases[idx(k)];
        auto add_triangle = [&](const std::array<Point, 3>& t, Side s) {
            for (int i = 0; i < 3; ++i) {
                const auto& piece = basis.piece(i, s);
                load(tri.v[idx(i)]) += quadrature::integrate(
                    t, [&](const Point& x) { return problem.source(x) * piece.at(x, basis.origin); });
            }
        };
        if (const auto* cut = cls.cut_of(k)) {
            for (const auto& t : cut->plus_triangles) add_triangle(t, Side::plus);
            for (const auto& t : cut->minus_triangles) add_triangle(t, Side::minus);
        } else {
            add_triangle(mesh.corners(k), cls.element_side(k));
        }
    }

    for (int e = 0; e < mesh.n_edges(); ++e) {
        const auto& edge = mesh.edge(e);
        if (edge.kind != BoundaryKind::neumann) continue;
        const int k = edge.tri[0];
        const auto& tri = mesh.triangle(k);
        const auto& basis = bases[idx(k)];
        const Point& p0 = mesh.vertex(edge.v[0]);
        const Point& p1 = mesh.vertex(edge.v[1]);
        const double len = (p1 - p0).norm();
        for (double node : quadrature::gauss2_nodes) {
            const Point x = (1.0 - node) * p0 + node * p1;
            const double g = problem.neumann_data(x);
            for (int i = 0; i < 3; ++i)
                load(tri.v[idx(i)]) -= quadrature::gauss2_weight * len * g * eval_basis(basis, i, x);
        }
    }
    return load;
}

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    const double nb = b.norm();
    const double nr = (A * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

}  // namespace

void SolverConfig::validate() const
{
    if (epsilon != -1 && epsilon != 0 && epsilon != 1)
        throw ConfigError("epsilon must be -1, 0 or 1, got " + std::to_string(epsilon));
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
}

SparseSystem assemble(const Mesh& mesh, const InterfaceClassification& cls, std::span<const IFELocalBasis> bases,
                      const DofMap& dofs, const BenchmarkProblem& problem, const SolverConfig& config,
                      unsigned terms)
{
    config.validate();
    if (cls.kind.size() != idx(mesh.n_triangles()) || cls.split_index.size() != idx(mesh.n_edges()))
        throw std::invalid_argument("interface classification does not match the mesh");
    if (bases.size() != idx(mesh.n_triangles())) throw std::invalid_argument("missing element bases");
    if (dofs.vertex_to_dof.size() != idx(mesh.n_vertices())) throw std::invalid_argument("dof map does not match");

    Triplets triplets;
    triplets.reserve(idx(mesh.n_triangles()) * 9 + cls.splits.size() * 32);
    if (terms & volume_term) add_volume(mesh, cls, bases, problem, triplets);
    if (terms & (consistency_term | symmetry_term | penalty_term))
        add_interface_edges(mesh, cls, bases, problem, config, terms, triplets);

    const int nv = mesh.n_vertices();
    SparseMatrix full(nv, nv);
    full.setFromTriplets(triplets.begin(), triplets.end());

    const Eigen::VectorXd load = assemble_load(mesh, cls, bases, problem);

    SparseSystem system;
    system.dofs = dofs;
    system.lifting = Eigen::VectorXd::Zero(nv);
    for (int v = 0; v < nv; ++v)
        if (dofs.dirichlet[idx(v)]) system.lifting(v) = problem.exact(mesh.vertex(v));

    const int nf = dofs.n_free();
    system.rhs.resize(nf);
    for (int d = 0; d < nf; ++d) system.rhs(d) = load(dofs.dof_to_vertex[idx(d)]);

    Triplets free;
    free.reserve(idx(static_cast<int>(full.nonZeros())));
    for (int col = 0; col < full.outerSize(); ++col) {
        const int cj = dofs.vertex_to_dof[idx(col)];
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int ri = dofs.vertex_to_dof[idx(static_cast<int>(it.row()))];
            if (ri < 0) continue;
            if (cj >= 0)
                free.emplace_back(ri, cj, it.value());
            else
                system.rhs(ri) -= it.value() * system.lifting(col);
        }
    }
    system.matrix.resize(nf, nf);
    system.matrix.setFromTriplets(free.begin(), free.end());
    system.matrix.makeCompressed();
    return system;
}

DiscreteSolution solve(const SparseSystem& system, const SolverConfig& config, const Mesh& mesh,
                       std::span<const IFELocalBasis> bases)
{
    config.validate();
    const auto& A = system.matrix;
    const auto& b = system.rhs;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    SolveReport report;

    if (b.size() > 0) {
        bool done = false;
        if (config.epsilon == -1) {
            Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
            if (ldlt.info() == Eigen::Success) {
                x = ldlt.solve(b);
                report.method = "ldlt";
                report.relative_residual = relative_residual(A, x, b);
                done = report.relative_residual <= config.tolerance;
            }
        } else if (config.method == LinearSolver::krylov) {
            Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> krylov;
            krylov.setTolerance(config.tolerance * 0.1);
            krylov.setMaxIterations(config.max_iterations);
            krylov.compute(A);
            if (krylov.info() == Eigen::Success) {
                x = krylov.solve(b);
                report.method = "bicgstab";
                report.iterations = static_cast<int>(krylov.iterations());
                report.relative_residual = relative_residual(A, x, b);
                done = std::isfinite(report.relative_residual) && report.relative_residual <= config.tolerance;
            }
        }
        if (!done) {
            Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
            lu.compute(A);
            if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed", report.relative_residual);
            x = lu.solve(b);
            // One step of iterative refinement.
            x += lu.solve(b - A * x);
            report.method = "sparselu";
            report.relative_residual = relative_residual(A, x, b);
            if (!(report.relative_residual <= config.tolerance))
                throw SolverError("linear solve did not reach the requested tolerance (residual " +
                                      std::to_string(report.relative_residual) + ")",
                                  report.relative_residual);
        }
    }

    Eigen::VectorXd coefficients = system.lifting;
    for (int d = 0; d < system.dofs.n_free(); ++d) coefficients(system.dofs.dof_to_vertex[idx(d)]) = x(d);
    DiscreteSolution solution = make_solution(mesh, bases, std::move(coefficients));
    solution.report = report;
    return solution;
}

DiscreteSolution make_solution(const Mesh& mesh, std::span<const IFELocalBasis> bases, Eigen::VectorXd coefficients)
{
    if (coefficients.size() != mesh.n_vertices()) throw std::invalid_argument("coefficient vector size mismatch");
    DiscreteSolution sol;
    sol.coefficients = std::move(coefficients);
    sol.gradients.resize(idx(mesh.n_triangles()));
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto& tri = mesh.triangle(k);
        for (Side s : {Side::plus, Side::minus}) {
            Vec2 g = Vec2::Zero();
            for (int i = 0; i < 3; ++i) g += sol.coefficients(tri.v[idx(i)]) * bases[idx(k)].piece(i, s).gradient;
            sol.gradients[idx(k)][idx(side_index(s))] = g;
        }
    }
    return sol;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<double(const Point&)>& fn)
{
    Eigen::VectorXd out(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) out(v) = fn(mesh.vertex(v));
    return out;
}

}  // namespace ifem
