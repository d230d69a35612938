#pragma once

#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ifem {

struct DiscreteSolution;
struct IFELocalBasis;

/**
 * An interface problem -div(alpha grad u) = f with piecewise constant
 * alpha, Dirichlet data taken from the exact solution and optional Neumann
 * data g_N (with -alpha grad u . n = g_N).
 */
struct BenchmarkProblem
{
    std::string name;
    double alpha_minus = 1.0;
    double alpha_plus = 1.0;
    double regularity = 0.0;  ///< exponent p for the ellipse family, 0 otherwise
    Rect domain;
    std::array<BoundaryKind, 4> side_kinds = Mesh::default_sides();
    LevelSet level_set;
    std::function<double(const Point&, Side)> exact_on;
    std::function<Vec2(const Point&, Side)> exact_gradient_on;
    std::function<double(const Point&)> source;
    std::function<double(const Point&)> neumann;

    double alpha(Side s) const { return s == Side::plus ? alpha_plus : alpha_minus; }
    double rho() const { return alpha_plus / alpha_minus; }
    double exact(const Point& p) const { return exact_on(p, level_set.side(p)); }
    Vec2 exact_gradient(const Point& p) const { return exact_gradient_on(p, level_set.side(p)); }
    double neumann_data(const Point& p) const { return neumann ? neumann(p) : 0.0; }
};

/// Ellipse interface with semi-axes a = pi/6.28, b = 1.5a and exact
/// solution r^p/beta^- inside, r^p/beta^+ + 1/beta^- - 1/beta^+ outside.
BenchmarkProblem ellipse_problem(double rho, double p, double beta_minus = 1.0);

/// Twelve-petal interface phi = (x^2+y^2)^2 (1 + 0.5 sin(12 theta)) - 0.3,
/// exact solution phi/beta^-+.
BenchmarkProblem petal_problem(double rho, double beta_minus = 1.0);

/// Vertical line x = c with u = (x - c)/alpha on each side; f = 0.
BenchmarkProblem straight_interface_problem(double c, double alpha_minus, double alpha_plus);

/// u = c0 + c1 x + c2 y with constant alpha; the level set is positive
/// everywhere so no element is cut.
BenchmarkProblem linear_problem(double c0, double c1, double c2, double alpha = 1.0);

BenchmarkProblem make_problem(const std::string& name, double rho, double p);

struct EnergyNormOptions
{
    int subdivision_depth = 2;  ///< uniform refinements of each interface sub-triangle
    int curve_depth = 7;        ///< total refinements of the parts the interface may cross
};

/// Per-element squared energy error alpha |grad u - grad_h u_T|^2 integrated
/// with a degree-4 rule; on interface elements each sub-triangle is
/// uniformly subdivided, the pieces near the interface are refined further,
/// and alpha / grad u follow the sign of phi at each quadrature point.
std::vector<double> energy_error_squared(const Mesh& mesh, const InterfaceClassification& cls,
                                         const DiscreteSolution& solution, const BenchmarkProblem& problem,
                                         const EnergyNormOptions& options = {});

double energy_error(const Mesh& mesh, const InterfaceClassification& cls, const DiscreteSolution& solution,
                    const BenchmarkProblem& problem, const EnergyNormOptions& options = {});

}  // namespace ifem
