#pragma once

#include "ifem/ife_space.hpp"
#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"
#include "ifem/problems.hpp"

#include <Eigen/Sparse>

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifem {

class SolverError : public std::runtime_error
{
public:
    SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

enum class LinearSolver { direct, krylov };

struct SolverConfig
{
    int epsilon = 1;     ///< -1 symmetric, 0 incomplete, +1 non-symmetric
    double gamma = 10.0; ///< interface-edge penalty
    double tolerance = 1e-10;
    int max_iterations = 2000;
    /// direct: LDLT for epsilon = -1, sparse LU otherwise. krylov: BiCGSTAB
    /// with Jacobi preconditioning, falling back to sparse LU.
    LinearSolver method = LinearSolver::direct;

    void validate() const;
};

/// Bit flags selecting the parts of the bilinear form to assemble.
enum AssemblyTerms : unsigned {
    volume_term = 1u,
    consistency_term = 2u,
    symmetry_term = 4u,
    penalty_term = 8u,
    all_terms = 15u,
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SparseSystem
{
    SparseMatrix matrix;       ///< free x free
    Eigen::VectorXd rhs;       ///< load minus the lifted Dirichlet contribution
    Eigen::VectorXd lifting;   ///< per vertex: Dirichlet values, zero on free vertices
    DofMap dofs;
};

struct SolveReport
{
    std::string method;
    int iterations = 0;
    double relative_residual = 0.0;
};

struct DiscreteSolution
{
    Eigen::VectorXd coefficients;               ///< one value per mesh vertex
    std::vector<std::array<Vec2, 2>> gradients; ///< per element, indexed by side_index
    SolveReport report;

    const Vec2& gradient(int k, Side s) const
    {
        return gradients[static_cast<std::size_t>(k)][static_cast<std::size_t>(side_index(s))];
    }
};

SparseSystem assemble(const Mesh& mesh, const InterfaceClassification& cls, std::span<const IFELocalBasis> bases,
                      const DofMap& dofs, const BenchmarkProblem& problem, const SolverConfig& config,
                      unsigned terms = all_terms);

/// Solves the free system to the configured relative residual and expands
/// the result with the Dirichlet values.
DiscreteSolution solve(const SparseSystem& system, const SolverConfig& config, const Mesh& mesh,
                       std::span<const IFELocalBasis> bases);

/// Builds the piecewise gradient table for arbitrary vertex values.
DiscreteSolution make_solution(const Mesh& mesh, std::span<const IFELocalBasis> bases, Eigen::VectorXd coefficients);

/// Vertex values of fn.
Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<double(const Point&)>& fn);

}  // namespace ifem
