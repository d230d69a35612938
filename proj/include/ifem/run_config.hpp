#pragma once

#include "ifem/amr.hpp"
#include "ifem/assembly.hpp"
#include "ifem/problems.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ifem {

enum class RunMode { adaptive, uniform };

struct RunConfig
{
    std::string problem = "ellipse";
    double rho = 100.0;
    double p = 5.0;
    RunMode mode = RunMode::adaptive;
    double theta = 0.5;
    int epsilon = 1;
    double gamma = 10.0;
    EstimatorKind estimator = EstimatorKind::eta;
    std::optional<int> initial_n;  ///< 4, or 16 for the petal, when unset
    int max_dof = 50000;
    int max_levels = 200;
    double solver_tol = 1e-10;
    LinearSolver linear_solver = LinearSolver::direct;
    std::filesystem::path out = "results";
    bool plot_mesh = true;
    bool plot_convergence = true;
    bool dump_meshes = false;
    std::vector<int> snapshot_levels;  ///< extra mesh_<level>.svg files

    int resolved_initial_n() const { return initial_n.value_or(problem == "petal" ? 16 : 4); }

    /// Sets one field from text. Keys use underscores; dashes are accepted.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    BenchmarkProblem make_problem() const;
    SolverConfig solver_config() const;
    AmrConfig amr_config() const;
};

std::string to_string(RunMode mode);

/// Named parameter sets for the benchmark examples: ex61 ... ex66.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Flat `key = value` lines; '#' starts a comment. Keys are applied in order
/// on top of `base`.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Number of uniform levels whose finest mesh stays within max_dof.
int uniform_levels_for(const RunConfig& config);

struct RunSummary
{
    int levels = 0;
    int final_dof = 0;
    double final_error = 0.0;
    std::optional<double> error_slope;
    std::optional<double> estimator_slope;
    std::optional<double> mean_eff_index;

    std::string line() const;
};

struct RunResult
{
    ConvergenceHistory history;
    RunSummary summary;
};

RunSummary summarize(const ConvergenceHistory& history, int last_k = 6);

/// Runs the configured experiment and writes results.csv, plots and optional
/// mesh dumps under config.out. Progress lines go to `log` when given.
RunResult run(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace ifem
