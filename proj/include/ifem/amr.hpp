#pragma once

#include "ifem/assembly.hpp"
#include "ifem/estimator.hpp"
#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"
#include "ifem/problems.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifem {

enum class EstimatorKind { eta, xi, true_error };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

struct AmrConfig
{
    double theta = 0.5;
    int max_dof = 50000;
    int max_levels = 200;
    EstimatorKind estimator = EstimatorKind::eta;
    int initial_n = 4;
    int mismatch_samples = 32;
    int conform_rounds = 8;  ///< bisection rounds allowed to resolve interface assumption violations
    EnergyNormOptions energy;

    void validate() const;
};

struct LevelRecord
{
    int level = 0;
    int n_dof = 0;
    int n_elements = 0;
    int n_interface_elements = 0;
    double energy_error = 0.0;
    double estimator = 0.0;  ///< value of the guiding estimator
    double eta = 0.0;
    double xi = 0.0;
    std::optional<double> eff_index;  ///< eta / energy error
    double min_angle_deg = 0.0;
    double wall_ms = 0.0;
};

struct ConvergenceHistory
{
    std::vector<LevelRecord> levels;
    Mesh final_mesh;

    std::size_t size() const { return levels.size(); }
    bool empty() const { return levels.empty(); }
};

/// Everything computed on one level, handed to observers.
struct LevelState
{
    const Mesh& mesh;
    const InterfaceClassification& classification;
    const DiscreteSolution& solution;
    const Indicators& indicators;
};

using LevelObserver = std::function<void(const LevelRecord&, const LevelState&)>;

/// Failure inside one stage of a level, with the level attached.
class LevelError : public std::runtime_error
{
public:
    LevelError(int level, std::string stage, const std::string& what, bool solver_failure)
        : std::runtime_error("level " + std::to_string(level) + " (" + stage + "): " + what),
          level_(level),
          stage_(std::move(stage)),
          solver_failure_(solver_failure)
    {
    }
    int level() const { return level_; }
    const std::string& stage() const { return stage_; }
    bool solver_failure() const { return solver_failure_; }

private:
    int level_;
    std::string stage_;
    bool solver_failure_;
};

/// Bisects the elements reported by classify_elements until the interface
/// crosses every edge at most once, or throws after max_rounds rounds.
Mesh conform_to_interface(Mesh mesh, const LevelSet& level_set, int max_rounds);

/// Minimal prefix of the elements sorted by decreasing indicator (ties by
/// increasing id) whose squared sum reaches theta^2 times the total.
std::vector<int> mark(std::span<const double> indicators, double theta);

/// Solve, estimate, mark, refine until the next mesh would exceed the DOF
/// budget or the level cap is reached.
ConvergenceHistory adaptive_loop(const BenchmarkProblem& problem, const SolverConfig& solver, const AmrConfig& amr,
                                 const LevelObserver& observer = {});

/// Same records on uniformly refined meshes (each level quadruples the
/// element count).
ConvergenceHistory uniform_loop(const BenchmarkProblem& problem, const SolverConfig& solver, int levels,
                                const AmrConfig& amr = {}, const LevelObserver& observer = {});

}  // namespace ifem
