#pragma once

#include "ifem/assembly.hpp"
#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"
#include "ifem/problems.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ifem {

/// Constant jump data on one edge or on one sub-segment F^+/F^- of an
/// interface edge.
struct JumpSegment
{
    double length = 0.0;
    Side side = Side::plus;
    double alpha = 1.0;   ///< alpha~_F = max of the two traces
    double normal = 0.0;  ///< j_n
    double tangential = 0.0;  ///< j_t
};

struct EdgeJump
{
    int edge = -1;
    BoundaryKind kind = BoundaryKind::interior;
    bool interface = false;
    double length = 0.0;
    int n_segments = 1;
    std::array<JumpSegment, 2> segments{};

    std::span<const JumpSegment> parts() const { return {segments.data(), static_cast<std::size_t>(n_segments)}; }
};

struct EdgeJumps
{
    std::vector<EdgeJump> edges;
};

/// Squared addends of one local indicator.
struct IndicatorTerms
{
    double interface_normal = 0.0;
    double interface_tangential = 0.0;
    double mismatch = 0.0;
    double regular = 0.0;

    double sum() const { return interface_normal + interface_tangential + mismatch + regular; }
};

struct Indicators
{
    std::vector<IndicatorTerms> terms;  ///< zero for the true-error indicator
    std::vector<double> local;          ///< eta_K
    double global = 0.0;

    std::size_t size() const { return local.size(); }
};

/// Normal-flux and tangential-derivative jumps of the discrete solution.
/// Interface edges get one record per sub-segment, using the piece of each
/// neighbour on that side of the interface.
EdgeJumps edge_jumps(const Mesh& mesh, const InterfaceClassification& cls, const DiscreteSolution& solution,
                     const BenchmarkProblem& problem);

/// Residual indicator including the geometric mismatch term.
Indicators eta_indicators(const Mesh& mesh, const InterfaceClassification& cls, const EdgeJumps& jumps,
                          std::span<const MismatchRegion> mismatch, const DiscreteSolution& solution,
                          const BenchmarkProblem& problem);

/// Same as eta_indicators without the mismatch term.
Indicators xi_indicators(const Mesh& mesh, const InterfaceClassification& cls, const EdgeJumps& jumps);

/// Element-wise energy-norm error used as an indicator.
Indicators true_error_indicators(const Mesh& mesh, const InterfaceClassification& cls,
                                 const DiscreteSolution& solution, const BenchmarkProblem& problem,
                                 const EnergyNormOptions& options = {});

/// eta / energy error; empty when the error vanishes.
std::optional<double> efficiency_index(double eta, double energy_error);

/// Sum of squares with pairwise reduction.
double sum_of_squares(std::span<const double> values);

/// CSV: element,eta,interface_normal,interface_tangential,mismatch,regular
void write_indicators_csv(std::ostream& out, const Indicators& indicators);

}  // namespace ifem
