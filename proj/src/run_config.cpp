#include "ifem/run_config.hpp"

#include "ifem/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace ifem {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + value + "'");
}

int to_int(const std::string& key, const std::string& value)
{
    const double v = to_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + ": expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string fmt(double v, int precision = 4)
{
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

}  // namespace

std::string to_string(RunMode mode) { return mode == RunMode::uniform ? "uniform" : "adaptive"; }

void RunConfig::set(const std::string& raw_key, const std::string& raw_value)
{
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw_value);

    if (key == "problem") {
        problem = value;
    } else if (key == "rho") {
        rho = to_double(key, value);
    } else if (key == "p") {
        p = to_double(key, value);
    } else if (key == "mode") {
        if (value == "adaptive")
            mode = RunMode::adaptive;
        else if (value == "uniform")
            mode = RunMode::uniform;
        else
            throw ConfigError("mode: expected adaptive or uniform, got '" + value + "'");
    } else if (key == "theta") {
        theta = to_double(key, value);
    } else if (key == "epsilon") {
        epsilon = to_int(key, value);
    } else if (key == "gamma") {
        gamma = to_double(key, value);
    } else if (key == "estimator") {
        try {
            estimator = parse_estimator(value);
        } catch (const ConfigError& err) {
            throw ConfigError(std::string("estimator: ") + err.what());
        }
    } else if (key == "initial_n") {
        initial_n = to_int(key, value);
    } else if (key == "max_dof") {
        max_dof = to_int(key, value);
    } else if (key == "max_levels") {
        max_levels = to_int(key, value);
    } else if (key == "solver_tol") {
        solver_tol = to_double(key, value);
    } else if (key == "linear_solver") {
        if (value == "direct")
            linear_solver = LinearSolver::direct;
        else if (value == "krylov")
            linear_solver = LinearSolver::krylov;
        else
            throw ConfigError("linear_solver: expected direct or krylov, got '" + value + "'");
    } else if (key == "out") {
        if (value.empty()) throw ConfigError("out: empty output directory");
        out = value;
    } else if (key == "plot_mesh") {
        plot_mesh = to_bool(key, value);
    } else if (key == "plot_convergence") {
        plot_convergence = to_bool(key, value);
    } else if (key == "dump_meshes") {
        dump_meshes = to_bool(key, value);
    } else if (key == "snapshot_levels") {
        snapshot_levels.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) snapshot_levels.push_back(to_int(key, trim(item)));
    } else {
        throw ConfigError("unknown configuration key '" + raw_key + "'");
    }
}

void RunConfig::validate() const
{
    if (problem != "ellipse" && problem != "petal")
        throw ConfigError("problem: expected ellipse or petal, got '" + problem + "'");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho: must be positive");
    if (problem == "ellipse" && !(p > 0.0)) throw ConfigError("p: must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta: must lie in [0, 1]");
    if (epsilon != -1 && epsilon != 0 && epsilon != 1) throw ConfigError("epsilon: must be -1, 0 or 1");
    if (!(gamma > 0.0)) throw ConfigError("gamma: must be positive");
    if (resolved_initial_n() < 1) throw ConfigError("initial_n: must be positive");
    if (max_dof < 1) throw ConfigError("max_dof: must be positive");
    if (max_levels < 1) throw ConfigError("max_levels: must be positive");
    if (!(solver_tol > 0.0)) throw ConfigError("solver_tol: must be positive");
}

BenchmarkProblem RunConfig::make_problem() const { return ifem::make_problem(problem, rho, p); }

SolverConfig RunConfig::solver_config() const
{
    SolverConfig s;
    s.epsilon = epsilon;
    s.gamma = gamma;
    s.tolerance = solver_tol;
    s.method = linear_solver;
    return s;
}

AmrConfig RunConfig::amr_config() const
{
    AmrConfig a;
    a.theta = theta;
    a.max_dof = max_dof;
    a.max_levels = max_levels;
    a.estimator = estimator;
    a.initial_n = resolved_initial_n();
    return a;
}

std::vector<std::string> preset_names() { return {"ex61", "ex62", "ex63", "ex64", "ex65", "ex66"}; }

RunConfig preset(const std::string& name)
{
    RunConfig c;
    c.out = "results/" + name;
    if (name == "ex61") {
        c.problem = "ellipse";
        c.rho = 100.0;
        c.p = 5.0;
    } else if (name == "ex62") {
        c.problem = "ellipse";
        c.rho = 1e6;
        c.p = 5.0;
    } else if (name == "ex63") {
        c.problem = "ellipse";
        c.rho = 1e6;
        c.p = 0.5;
    } else if (name == "ex64") {
        c.problem = "petal";
        c.rho = 10.0;
        c.initial_n = 16;
    } else if (name == "ex65") {
        c.problem = "petal";
        c.rho = 10.0;
        c.initial_n = 16;
        c.estimator = EstimatorKind::xi;
    } else if (name == "ex66") {
        c.problem = "ellipse";
        c.rho = 1e6;
        c.p = 5.0;
        c.estimator = EstimatorKind::true_error;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

RunConfig parse_run_config(std::istream& in, RunConfig base)
{
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key == "preset") {
            const RunConfig p = preset(trim(line.substr(eq + 1)));
            base = p;
            continue;
        }
        base.set(key, line.substr(eq + 1));
    }
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path.string() + "'");
    return parse_run_config(in, std::move(base));
}

int uniform_levels_for(const RunConfig& config)
{
    const long n = config.resolved_initial_n();
    int levels = 1;
    for (long m = 2 * n; (m - 1) * (m - 1) <= config.max_dof && levels < config.max_levels; m *= 2) ++levels;
    return levels;
}

std::string RunSummary::line() const
{
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); };
    return "summary: levels=" + std::to_string(levels) + " final_dof=" + std::to_string(final_dof) +
           " final_error=" + fmt(final_error, 6) + " error_slope=" + opt(error_slope) +
           " estimator_slope=" + opt(estimator_slope) + " mean_eff_index=" + opt(mean_eff_index);
}

RunSummary summarize(const ConvergenceHistory& history, int last_k)
{
    RunSummary s;
    s.levels = static_cast<int>(history.size());
    if (history.empty()) return s;
    s.final_dof = history.levels.back().n_dof;
    s.final_error = history.levels.back().energy_error;
    const int k = std::min<int>(last_k, s.levels);
    if (k >= 2) {
        try {
            s.error_slope = convergence_rate(history, HistoryField::energy_error, k);
            s.estimator_slope = convergence_rate(history, HistoryField::estimator, k);
        } catch (const std::invalid_argument&) {
        }
    }
    double sum = 0.0;
    int count = 0;
    for (const auto& r : history.levels)
        if (r.eff_index) {
            sum += *r.eff_index;
            ++count;
        }
    if (count > 0) s.mean_eff_index = sum / count;
    return s;
}

RunResult run(const RunConfig& config, std::ostream* log)
{
    config.validate();
    const BenchmarkProblem problem = config.make_problem();
    const SolverConfig solver = config.solver_config();
    const AmrConfig amr = config.amr_config();

    std::filesystem::create_directories(config.out);
    ResultsCsvWriter csv(config.out / "results.csv");

    auto observer = [&](const LevelRecord& r, const LevelState& state) {
        csv.write(r);
        if (log != nullptr)
            *log << "level " << r.level << " dof=" << r.n_dof << " elements=" << r.n_elements
                 << " error=" << fmt(r.energy_error, 6) << " estimator=" << fmt(r.estimator, 6)
                 << " eff=" << (r.eff_index ? fmt(*r.eff_index) : std::string("n/a")) << std::endl;
        if (std::find(config.snapshot_levels.begin(), config.snapshot_levels.end(), r.level) !=
            config.snapshot_levels.end())
            export_mesh_svg(state.mesh, &state.classification,
                            config.out / ("mesh_" + std::to_string(r.level) + ".svg"));
        if (config.dump_meshes) {
            std::ofstream out(config.out / ("mesh_" + std::to_string(r.level) + ".txt"));
            write_mesh(out, state.mesh);
            write_cut_records(out, state.classification);
            if (!out) throw ReportError("failed writing mesh dump for level " + std::to_string(r.level));
        }
    };

    RunResult result;
    if (config.mode == RunMode::adaptive)
        result.history = adaptive_loop(problem, solver, amr, observer);
    else
        result.history = uniform_loop(problem, solver, uniform_levels_for(config), amr, observer);

    if (config.plot_mesh) {
        const auto cls = classify_elements(result.history.final_mesh, problem.level_set);
        export_mesh_svg(result.history.final_mesh, &cls, config.out / "mesh.svg");
    }
    if (config.plot_convergence) {
        const ConvergenceSeries series{to_string(config.mode), result.history.levels};
        export_convergence_svg(std::span<const ConvergenceSeries>(&series, 1), config.out / "convergence.svg");
    }
    result.summary = summarize(result.history);
    if (log != nullptr) *log << result.summary.line() << std::endl;
    return result;
}

}  // namespace ifem
