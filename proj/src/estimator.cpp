#include "ifem/estimator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ifem {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double pairwise(std::span<const double> v, bool square)
{
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += square ? x * x : x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise(v.first(half), square) + pairwise(v.subspan(half), square);
}

// Side of element k that touches the point x of one of its edges.
Side side_at(const InterfaceClassification& cls, int k, const Point& x)
{
    if (const auto* cut = cls.cut_of(k)) return cut->chord_side(x);
    return cls.element_side(k);
}

Indicators accumulate(const Mesh& mesh, const InterfaceClassification& cls, const EdgeJumps& jumps,
                      std::span<const MismatchRegion> mismatch, const DiscreteSolution* solution,
                      const BenchmarkProblem* problem)
{
    Indicators ind;
    ind.terms.assign(idx(mesh.n_triangles()), {});
    if (jumps.edges.size() != idx(mesh.n_edges())) throw std::invalid_argument("edge jumps do not match the mesh");

    for (const auto& ej : jumps.edges) {
        const auto& edge = mesh.edge(ej.edge);
        const double h = ej.length;
        if (ej.kind == BoundaryKind::dirichlet) continue;
        if (ej.kind == BoundaryKind::neumann) {
            const auto& s = ej.segments[0];
            ind.terms[idx(edge.tri[0])].regular += h * s.length * s.normal * s.normal / s.alpha;
            continue;
        }
        if (ej.interface) {
            double normal = 0.0, tangential = 0.0;
            for (const auto& s : ej.parts()) {
                normal += s.length * s.normal * s.normal / s.alpha;
                tangential += s.length * s.alpha * s.tangential * s.tangential;
            }
            for (int k : edge.tri) {
                ind.terms[idx(k)].interface_normal += 0.5 * h * normal;
                ind.terms[idx(k)].interface_tangential += 0.5 * h * tangential;
            }
        } else {
            const auto& s = ej.segments[0];
            const double term = 0.5 * h * s.length * s.normal * s.normal / s.alpha;
            for (int k : edge.tri) ind.terms[idx(k)].regular += term;
        }
    }

    if (solution != nullptr) {
        if (mismatch.size() != cls.cuts.size())
            throw std::invalid_argument("mismatch regions missing for some interface elements");
        for (std::size_t c = 0; c < cls.cuts.size(); ++c) {
            const int k = cls.cuts[c].element;
            const auto& region = mismatch[c];
            if (region.element != k) throw std::invalid_argument("mismatch region does not match its element");
            ind.terms[idx(k)].mismatch =
                region.lobe_plus_area * problem->alpha(Side::plus) * solution->gradient(k, Side::plus).squaredNorm() +
                region.lobe_minus_area * problem->alpha(Side::minus) *
                    solution->gradient(k, Side::minus).squaredNorm();
        }
    }

    ind.local.resize(ind.terms.size());
    for (std::size_t k = 0; k < ind.terms.size(); ++k) ind.local[k] = std::sqrt(ind.terms[k].sum());
    ind.global = std::sqrt(sum_of_squares(ind.local));
    return ind;
}

}  // namespace

double sum_of_squares(std::span<const double> values) { return pairwise(values, true); }

EdgeJumps edge_jumps(const Mesh& mesh, const InterfaceClassification& cls, const DiscreteSolution& solution,
                     const BenchmarkProblem& problem)
{
    EdgeJumps out;
    out.edges.resize(idx(mesh.n_edges()));
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const auto& edge = mesh.edge(e);
        EdgeJump& ej = out.edges[idx(e)];
        ej.edge = e;
        ej.kind = edge.kind;
        ej.length = mesh.edge_length(e);
        const Vec2 n = mesh.edge_normal(e);
        const Vec2 t = mesh.edge_tangent(e);
        const Point mid = mesh.edge_midpoint(e);

        if (edge.kind == BoundaryKind::dirichlet) {
            const Side s = side_at(cls, edge.tri[0], mid);
            ej.segments[0] = {ej.length, s, problem.alpha(s), 0.0, 0.0};
            continue;
        }
        if (edge.kind == BoundaryKind::neumann) {
            const Side s = side_at(cls, edge.tri[0], mid);
            const double a = problem.alpha(s);
            const double jn = a * solution.gradient(edge.tri[0], s).dot(n) + problem.neumann_data(mid);
            ej.segments[0] = {ej.length, s, a, jn, 0.0};
            continue;
        }

        auto segment = [&](double length, Side s1, Side s2, Side label) {
            const double a1 = problem.alpha(s1), a2 = problem.alpha(s2);
            const Vec2& g1 = solution.gradient(edge.tri[0], s1);
            const Vec2& g2 = solution.gradient(edge.tri[1], s2);
            return JumpSegment{length, label, std::max(a1, a2), a1 * g1.dot(n) - a2 * g2.dot(n),
                               g1.dot(t) - g2.dot(t)};
        };

        if (const auto* split = cls.split_of(e)) {
            ej.interface = true;
            ej.n_segments = 2;
            int i = 0;
            for (Side sigma : {Side::plus, Side::minus}) {
                auto trace = [&](int k) { return cls.is_interface(k) ? sigma : cls.element_side(k); };
                ej.segments[idx(i++)] = segment(split->length(sigma), trace(edge.tri[0]), trace(edge.tri[1]), sigma);
            }
        } else {
            const Side s1 = side_at(cls, edge.tri[0], mid);
            const Side s2 = side_at(cls, edge.tri[1], mid);
            ej.segments[0] = segment(ej.length, s1, s2, s1);
        }
    }
    return out;
}

Indicators eta_indicators(const Mesh& mesh, const InterfaceClassification& cls, const EdgeJumps& jumps,
                          std::span<const MismatchRegion> mismatch, const DiscreteSolution& solution,
                          const BenchmarkProblem& problem)
{
    return accumulate(mesh, cls, jumps, mismatch, &solution, &problem);
}

Indicators xi_indicators(const Mesh& mesh, const InterfaceClassification& cls, const EdgeJumps& jumps)
{
    return accumulate(mesh, cls, jumps, {}, nullptr, nullptr);
}

Indicators true_error_indicators(const Mesh& mesh, const InterfaceClassification& cls,
                                 const DiscreteSolution& solution, const BenchmarkProblem& problem,
                                 const EnergyNormOptions& options)
{
    const auto squared = energy_error_squared(mesh, cls, solution, problem, options);
    Indicators ind;
    ind.terms.assign(squared.size(), {});
    ind.local.resize(squared.size());
    for (std::size_t k = 0; k < squared.size(); ++k) ind.local[k] = std::sqrt(squared[k]);
    ind.global = std::sqrt(pairwise(squared, false));
    return ind;
}

std::optional<double> efficiency_index(double eta, double energy_error)
{
    if (!(energy_error > 0.0)) return std::nullopt;
    return eta / energy_error;
}

void write_indicators_csv(std::ostream& out, const Indicators& indicators)
{
    const auto old_precision = out.precision(12);
    out << "element,eta,interface_normal,interface_tangential,mismatch,regular\n";
    for (std::size_t k = 0; k < indicators.local.size(); ++k) {
        const IndicatorTerms t = k < indicators.terms.size() ? indicators.terms[k] : IndicatorTerms{};
        out << k << ',' << indicators.local[k] << ',' << t.interface_normal << ',' << t.interface_tangential << ','
            << t.mismatch << ',' << t.regular << '\n';
    }
    out.precision(old_precision);
}

}  // namespace ifem
