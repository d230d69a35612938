#include "ifem/report.hpp"
#include "ifem/run_config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

struct CommonOptions
{
    std::string preset;
    std::string config_file;
    std::map<std::string, std::string> values;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--preset", o.preset, "Parameter preset (ex61 ... ex66)");
    cmd->add_option("--config", o.config_file, "Flat key = value configuration file");
    const std::pair<const char*, const char*> keys[] = {
        {"problem", "ellipse or petal"},
        {"rho", "Coefficient contrast alpha+/alpha-"},
        {"p", "Exponent of the ellipse solution"},
        {"mode", "adaptive or uniform"},
        {"theta", "Marking parameter"},
        {"epsilon", "Symmetrization parameter (-1, 0, 1)"},
        {"gamma", "Interface penalty"},
        {"estimator", "eta, xi or true_error"},
        {"initial-n", "Initial mesh subdivisions per side"},
        {"max-dof", "DOF budget"},
        {"max-levels", "Level cap"},
        {"solver-tol", "Relative residual tolerance"},
        {"linear-solver", "direct or krylov"},
        {"out", "Output directory"},
        {"plot-mesh", "Write mesh.svg (true/false)"},
        {"plot-convergence", "Write convergence.svg (true/false)"},
        {"dump-meshes", "Write per-level mesh files (true/false)"},
        {"snapshot-levels", "Comma separated levels for mesh_<level>.svg"},
    };
    for (const auto& [key, help] : keys) cmd->add_option(std::string("--") + key, o.values[key], help);
}

ifem::RunConfig resolve(const CLI::App* cmd, const CommonOptions& o)
{
    ifem::RunConfig config;
    if (!o.preset.empty()) config = ifem::preset(o.preset);
    if (!o.config_file.empty()) config = ifem::load_run_config(o.config_file, config);
    for (const auto& [key, value] : o.values)
        if (cmd->count("--" + key) > 0) config.set(key, value);
    config.validate();
    return config;
}

int convergence(ifem::RunConfig config)
{
    const auto root = config.out;
    std::vector<ifem::ConvergenceSeries> series;
    for (auto mode : {ifem::RunMode::adaptive, ifem::RunMode::uniform}) {
        config.mode = mode;
        config.out = root / ifem::to_string(mode);
        std::cout << "== " << ifem::to_string(mode) << '\n';
        auto result = ifem::run(config, &std::cout);
        series.push_back({ifem::to_string(mode), std::move(result.history.levels)});
    }
    ifem::export_convergence_svg(series, root / "convergence.svg");
    const auto& adaptive = series[0].levels;
    const auto& uniform = series[1].levels;
    if (adaptive.size() >= 2 && !uniform.empty()) {
        const auto& last = uniform.back();
        const double a = ifem::value_at_dof(adaptive, ifem::HistoryField::energy_error, last.n_dof);
        std::cout << "matched dof=" << last.n_dof << " adaptive_error=" << a << " uniform_error=" << last.energy_error
                  << '\n';
    }
    return 0;
}

int export_mesh(const ifem::RunConfig& config, int levels)
{
    const auto problem = config.make_problem();
    ifem::Mesh mesh = ifem::build_initial_mesh(config.resolved_initial_n(), problem.domain, problem.side_kinds);
    for (int i = 0; i < levels; ++i) mesh = ifem::refine_uniform(mesh);
    const auto cls = ifem::classify_elements(mesh, problem.level_set);
    ifem::export_mesh_svg(mesh, &cls, config.out / "mesh.svg");
    std::ofstream out(config.out / "mesh.txt");
    ifem::write_mesh(out, mesh);
    ifem::write_cut_records(out, cls);
    if (!out) throw ifem::ReportError("failed writing mesh.txt");
    std::cout << "wrote " << mesh.n_triangles() << " triangles, " << cls.n_interface_elements()
              << " interface elements to " << config.out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive partially penalized immersed finite element solver"};
    app.require_subcommand(1);

    CommonOptions run_opts, conv_opts, mesh_opts;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write results.csv and plots");
    add_common(run_cmd, run_opts);
    auto* conv_cmd = app.add_subcommand("convergence", "Run adaptive and uniform refinement and compare");
    add_common(conv_cmd, conv_opts);
    auto* mesh_cmd = app.add_subcommand("export-mesh", "Write a uniformly refined mesh with its interface cuts");
    add_common(mesh_cmd, mesh_opts);
    int mesh_levels = 0;
    mesh_cmd->add_option("--levels", mesh_levels, "Uniform refinement levels")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (run_cmd->parsed()) {
            ifem::run(resolve(run_cmd, run_opts), &std::cout);
            return 0;
        }
        if (conv_cmd->parsed()) return convergence(resolve(conv_cmd, conv_opts));
        return export_mesh(resolve(mesh_cmd, mesh_opts), mesh_levels);
    } catch (const ifem::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const ifem::LevelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.solver_failure() ? exit_solver : 1;
    } catch (const ifem::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
