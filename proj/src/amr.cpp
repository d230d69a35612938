#include "ifem/amr.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace ifem {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

struct LevelOutput
{
    LevelRecord record;
    std::vector<double> guide;
};

template <typename Fn>
auto stage(int level, const char* name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const LevelError&) {
        throw;
    } catch (const SolverError& err) {
        throw LevelError(level, name, err.what(), true);
    } catch (const std::exception& err) {
        throw LevelError(level, name, err.what(), false);
    }
}

LevelOutput run_level(int level, const Mesh& mesh, const BenchmarkProblem& problem, const SolverConfig& solver,
                      const AmrConfig& amr, const LevelObserver& observer)
{
    const auto start = std::chrono::steady_clock::now();
    const auto cls = stage(level, "classify", [&] { return classify_elements(mesh, problem.level_set); });
    const auto bases = stage(level, "basis", [&] {
        return build_bases(mesh, cls, problem.alpha_minus, problem.alpha_plus);
    });
    const DofMap dofs = build_dof_map(mesh);
    const auto solution = stage(level, "solve", [&] {
        const auto system = assemble(mesh, cls, bases, dofs, problem, solver);
        return solve(system, solver, mesh, bases);
    });
    const auto jumps = edge_jumps(mesh, cls, solution, problem);
    const auto mismatch = stage(level, "mismatch", [&] {
        return mismatch_regions(cls, problem.level_set, amr.mismatch_samples);
    });
    const auto eta = eta_indicators(mesh, cls, jumps, mismatch, solution, problem);
    const auto xi = xi_indicators(mesh, cls, jumps);
    const auto truth = true_error_indicators(mesh, cls, solution, problem, amr.energy);

    const Indicators* guide = &eta;
    if (amr.estimator == EstimatorKind::xi) guide = &xi;
    if (amr.estimator == EstimatorKind::true_error) guide = &truth;

    LevelOutput out;
    auto& r = out.record;
    r.level = level;
    r.n_dof = dofs.n_free();
    r.n_elements = mesh.n_triangles();
    r.n_interface_elements = cls.n_interface_elements();
    r.energy_error = truth.global;
    r.estimator = guide->global;
    r.eta = eta.global;
    r.xi = xi.global;
    r.eff_index = efficiency_index(eta.global, truth.global);
    r.min_angle_deg = mesh_stats(mesh).min_angle_deg;
    out.guide = guide->local;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (observer) observer(r, LevelState{mesh, cls, solution, *guide});
    return out;
}

Mesh initial_mesh(const BenchmarkProblem& problem, const AmrConfig& amr)
{
    return conform_to_interface(build_initial_mesh(amr.initial_n, problem.domain, problem.side_kinds),
                                problem.level_set, amr.conform_rounds);
}

int free_dofs(const Mesh& mesh)
{
    const auto flags = mesh.dirichlet_vertices();
    return static_cast<int>(std::count(flags.begin(), flags.end(), false));
}

}  // namespace

std::string to_string(EstimatorKind kind)
{
    switch (kind) {
    case EstimatorKind::eta: return "eta";
    case EstimatorKind::xi: return "xi";
    case EstimatorKind::true_error: return "true_error";
    }
    return "eta";
}

EstimatorKind parse_estimator(const std::string& name)
{
    if (name == "eta") return EstimatorKind::eta;
    if (name == "xi") return EstimatorKind::xi;
    if (name == "true_error") return EstimatorKind::true_error;
    throw ConfigError("estimator must be eta, xi or true_error, got '" + name + "'");
}

void AmrConfig::validate() const
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    if (max_dof < 1) throw ConfigError("max_dof must be positive");
    if (max_levels < 1) throw ConfigError("max_levels must be positive");
    if (initial_n < 1) throw ConfigError("initial_n must be positive");
    if (conform_rounds < 0) throw ConfigError("conform_rounds must be non-negative");
    if (mismatch_samples < 2) throw ConfigError("mismatch_samples must be at least 2");
    if (energy.subdivision_depth < 0) throw ConfigError("energy subdivision depth must be non-negative");
}

Mesh conform_to_interface(Mesh mesh, const LevelSet& level_set, int max_rounds)
{
    for (int round = 0;; ++round) {
        try {
            classify_elements(mesh, level_set);
            return mesh;
        } catch (const InterfaceAssumptionError& err) {
            if (round >= max_rounds) throw;
            mesh = refine_nvb(mesh, err.elements());
        }
    }
}

std::vector<int> mark(std::span<const double> indicators, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    std::vector<int> order(indicators.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return indicators[idx(a)] > indicators[idx(b)]; });

    double total = 0.0;
    for (int k : order) total += indicators[idx(k)] * indicators[idx(k)];
    const double target = theta * theta * total;

    std::vector<int> marked;
    double sum = 0.0;
    for (int k : order) {
        if (sum >= target) break;
        marked.push_back(k);
        sum += indicators[idx(k)] * indicators[idx(k)];
    }
    return marked;
}

ConvergenceHistory adaptive_loop(const BenchmarkProblem& problem, const SolverConfig& solver, const AmrConfig& amr,
                                 const LevelObserver& observer)
{
    solver.validate();
    amr.validate();
    ConvergenceHistory history;
    Mesh mesh = stage(0, "conform", [&] { return initial_mesh(problem, amr); });
    for (int level = 0; level < amr.max_levels; ++level) {
        auto out = run_level(level, mesh, problem, solver, amr, observer);
        history.levels.push_back(out.record);
        if (level + 1 == amr.max_levels) break;
        const auto marked = mark(out.guide, amr.theta);
        if (marked.empty()) break;
        Mesh next = stage(level + 1, "conform", [&] {
            return conform_to_interface(refine_nvb(mesh, marked), problem.level_set, amr.conform_rounds);
        });
        if (free_dofs(next) > amr.max_dof) break;
        mesh = std::move(next);
    }
    history.final_mesh = std::move(mesh);
    return history;
}

ConvergenceHistory uniform_loop(const BenchmarkProblem& problem, const SolverConfig& solver, int levels,
                                const AmrConfig& amr, const LevelObserver& observer)
{
    solver.validate();
    amr.validate();
    if (levels < 1) throw ConfigError("uniform loop needs at least one level");
    ConvergenceHistory history;
    Mesh mesh = stage(0, "conform", [&] { return initial_mesh(problem, amr); });
    for (int level = 0; level < levels; ++level) {
        history.levels.push_back(run_level(level, mesh, problem, solver, amr, observer).record);
        if (level + 1 < levels)
            mesh = stage(level + 1, "conform", [&] {
                return conform_to_interface(refine_uniform(mesh), problem.level_set, amr.conform_rounds);
            });
    }
    history.final_mesh = std::move(mesh);
    return history;
}

}  // namespace ifem
