#pragma once

#include "ifem/amr.hpp"
#include "ifem/interface_geometry.hpp"
#include "ifem/mesh.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifem {

class ReportError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class HistoryField { energy_error, estimator, eta, xi };

std::string to_string(HistoryField field);

/// Least-squares slope of log(field) against log(DOF) over the final last_k
/// records.
double convergence_rate(std::span<const LevelRecord> levels, HistoryField field, int last_k);
double convergence_rate(const ConvergenceHistory& history, HistoryField field, int last_k);

/// Log-log interpolation of field at the given DOF count. Outside the range of
/// the history the nearest end segment is extrapolated.
double value_at_dof(std::span<const LevelRecord> levels, HistoryField field, double n_dof);

inline constexpr const char* results_csv_header =
    "level,n_dof,n_elements,n_interface_elements,energy_error,estimator,eff_index,min_angle_deg,wall_ms";

void write_results_row(std::ostream& out, const LevelRecord& record);
void write_results_csv(std::ostream& out, std::span<const LevelRecord> levels);
void export_results_csv(const ConvergenceHistory& history, const std::filesystem::path& path);

/// Appends one row per level as soon as it is recorded.
class ResultsCsvWriter
{
public:
    explicit ResultsCsvWriter(const std::filesystem::path& path);
    void write(const LevelRecord& record);

private:
    std::ofstream out_;
};

struct MeshSvgOptions
{
    double width = 800.0;
    bool highlight_interface = true;
    bool draw_interface = true;
};

/// One polygon per triangle; interface elements filled; the discrete
/// interface (chords DE) drawn as one path.
void write_mesh_svg(std::ostream& out, const Mesh& mesh, const InterfaceClassification* cls,
                    const MeshSvgOptions& options = {});
void export_mesh_svg(const Mesh& mesh, const InterfaceClassification* cls, const std::filesystem::path& path,
                     const MeshSvgOptions& options = {});

struct ConvergenceSeries
{
    std::string label;
    std::vector<LevelRecord> levels;
};

/// Log-log DOF against energy error and estimator for each series, with a
/// reference line of slope -1/2.
void write_convergence_svg(std::ostream& out, std::span<const ConvergenceSeries> series);
void export_convergence_svg(std::span<const ConvergenceSeries> series, const std::filesystem::path& path);

}  // namespace ifem
