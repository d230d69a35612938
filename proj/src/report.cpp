#include "ifem/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace ifem {

namespace {

double field_value(const LevelRecord& r, HistoryField field)
{
    switch (field) {
    case HistoryField::energy_error: return r.energy_error;
    case HistoryField::estimator: return r.estimator;
    case HistoryField::eta: return r.eta;
    case HistoryField::xi: return r.xi;
    }
    return r.energy_error;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ReportError("cannot open '" + path.string() + "' for writing");
    return out;
}

void check_stream(const std::ostream& out, const std::filesystem::path& path)
{
    if (!out) throw ReportError("failed writing '" + path.string() + "'");
}

std::string fmt(double v, int precision = 6)
{
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

const std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string to_string(HistoryField field)
{
    switch (field) {
    case HistoryField::energy_error: return "energy_error";
    case HistoryField::estimator: return "estimator";
    case HistoryField::eta: return "eta";
    case HistoryField::xi: return "xi";
    }
    return "energy_error";
}

double convergence_rate(std::span<const LevelRecord> levels, HistoryField field, int last_k)
{
    if (last_k < 2) throw std::invalid_argument("convergence rate needs at least two levels");
    if (levels.size() < static_cast<std::size_t>(last_k))
        throw std::invalid_argument("history has " + std::to_string(levels.size()) + " levels, fewer than " +
                                    std::to_string(last_k));
    const auto tail = levels.last(static_cast<std::size_t>(last_k));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : tail) {
        const double v = field_value(r, field);
        if (!(v > 0.0) || r.n_dof <= 0)
            throw std::invalid_argument("non-positive " + to_string(field) + " at level " + std::to_string(r.level));
        const double x = std::log(static_cast<double>(r.n_dof));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = last_k;
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw std::invalid_argument("degenerate DOF range for a slope fit");
    return (n * sxy - sx * sy) / den;
}

double convergence_rate(const ConvergenceHistory& history, HistoryField field, int last_k)
{
    return convergence_rate(std::span<const LevelRecord>(history.levels), field, last_k);
}

double value_at_dof(std::span<const LevelRecord> levels, HistoryField field, double n_dof)
{
    if (levels.size() < 2) throw std::invalid_argument("interpolation needs at least two levels");
    std::size_t i = 1;
    while (i + 1 < levels.size() && levels[i].n_dof < n_dof) ++i;
    const auto& a = levels[i - 1];
    const auto& b = levels[i];
    const double xa = std::log(double(a.n_dof)), xb = std::log(double(b.n_dof));
    const double ya = std::log(field_value(a, field)), yb = std::log(field_value(b, field));
    if (xa == xb) return field_value(b, field);
    const double s = (std::log(n_dof) - xa) / (xb - xa);
    return std::exp(ya + s * (yb - ya));
}

void write_results_row(std::ostream& out, const LevelRecord& r)
{
    out << r.level << ',' << r.n_dof << ',' << r.n_elements << ',' << r.n_interface_elements << ','
        << fmt(r.energy_error, 12) << ',' << fmt(r.estimator, 12) << ',';
    if (r.eff_index) out << fmt(*r.eff_index, 8);
    out << ',' << fmt(r.min_angle_deg, 8) << ',' << fmt(r.wall_ms, 6) << '\n';
}

void write_results_csv(std::ostream& out, std::span<const LevelRecord> levels)
{
    out << results_csv_header << '\n';
    for (const auto& r : levels) write_results_row(out, r);
}

void export_results_csv(const ConvergenceHistory& history, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_results_csv(out, history.levels);
    check_stream(out, path);
}

ResultsCsvWriter::ResultsCsvWriter(const std::filesystem::path& path) : out_(open_output(path))
{
    out_ << results_csv_header << '\n';
    out_.flush();
}

void ResultsCsvWriter::write(const LevelRecord& record)
{
    write_results_row(out_, record);
    out_.flush();
    if (!out_) throw ReportError("failed writing results row");
}

void write_mesh_svg(std::ostream& out, const Mesh& mesh, const InterfaceClassification* cls,
                    const MeshSvgOptions& options)
{
    const Rect& d = mesh.domain();
    const double margin = 10.0;
    const double scale = options.width / (d.x_max - d.x_min);
    const double height = scale * (d.y_max - d.y_min);
    auto px = [&](const Point& p) {
        return fmt(margin + (p.x() - d.x_min) * scale, 7) + ',' + fmt(margin + (d.y_max - p.y()) * scale, 7);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(options.width + 2 * margin) << "\" height=\""
        << fmt(height + 2 * margin) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g stroke=\"#333\" stroke-width=\"0.3\">\n";
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto c = mesh.corners(k);
        const bool hl = options.highlight_interface && cls != nullptr && cls->is_interface(k);
        out << "<polygon points=\"" << px(c[0]) << ' ' << px(c[1]) << ' ' << px(c[2]) << "\" fill=\""
            << (hl ? "#f6c177" : "none") << "\"/>\n";
    }
    out << "</g>\n";
    if (options.draw_interface && cls != nullptr && !cls->cuts.empty()) {
        out << "<path fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.2\" d=\"";
        for (const auto& cut : cls->cuts) out << 'M' << px(cut.D) << 'L' << px(cut.E);
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

void export_mesh_svg(const Mesh& mesh, const InterfaceClassification* cls, const std::filesystem::path& path,
                     const MeshSvgOptions& options)
{
    auto out = open_output(path);
    write_mesh_svg(out, mesh, cls, options);
    check_stream(out, path);
}

void write_convergence_svg(std::ostream& out, std::span<const ConvergenceSeries> series)
{
    const double W = 640, H = 480, left = 70, right = 20, top = 20, bottom = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (const auto& r : s.levels) {
            if (r.n_dof <= 0) continue;
            x0 = std::min(x0, std::log10(double(r.n_dof)));
            x1 = std::max(x1, std::log10(double(r.n_dof)));
            for (double v : {r.energy_error, r.estimator})
                if (v > 0.0) {
                    y0 = std::min(y0, std::log10(v));
                    y1 = std::max(y1, std::log10(v));
                }
        }
    if (!std::isfinite(x0) || !std::isfinite(y0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    x0 = std::floor(x0);
    x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0);
    y1 = std::max(std::ceil(y1), y0 + 1);
    auto X = [&](double lx) { return left + (lx - x0) / (x1 - x0) * (W - left - right); };
    auto Y = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * (H - top - bottom); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<defs><clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
        << "\" height=\"" << H - top - bottom << "\"/></clipPath></defs>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
        << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int e = int(x0); e <= int(x1); ++e)
        out << "<line x1=\"" << fmt(X(e)) << "\" y1=\"" << top << "\" x2=\"" << fmt(X(e)) << "\" y2=\"" << H - bottom
            << "\" stroke=\"#ddd\"/><text x=\"" << fmt(X(e)) << "\" y=\"" << H - bottom + 15
            << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
    for (int e = int(y0); e <= int(y1); ++e)
        out << "<line x1=\"" << left << "\" y1=\"" << fmt(Y(e)) << "\" x2=\"" << W - right << "\" y2=\"" << fmt(Y(e))
            << "\" stroke=\"#ddd\"/><text x=\"" << left - 5 << "\" y=\"" << fmt(Y(e) + 4)
            << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    out << "<text x=\"" << (W + left - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">DOF</text>\n";
    out << "</g>\n<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">\n";

    // Reference slope -1/2 through the first error point, shifted down.
    if (!series.empty() && !series[0].levels.empty() && series[0].levels[0].energy_error > 0.0) {
        const auto& r = series[0].levels[0];
        const double lx = std::log10(double(std::max(r.n_dof, 1)));
        const double ly = std::log10(r.energy_error) - 0.3;
        out << "<polyline stroke=\"black\" stroke-dasharray=\"2,3\" points=\"" << fmt(X(lx)) << ',' << fmt(Y(ly))
            << ' ' << fmt(X(x1)) << ',' << fmt(Y(ly - 0.5 * (x1 - lx))) << "\"/>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % palette.size()];
        for (int which = 0; which < 2; ++which) {
            out << "<polyline stroke=\"" << color << "\"" << (which ? " stroke-dasharray=\"6,3\"" : "")
                << " points=\"";
            for (const auto& r : series[i].levels) {
                const double v = which ? r.estimator : r.energy_error;
                if (v > 0.0 && r.n_dof > 0)
                    out << fmt(X(std::log10(double(r.n_dof)))) << ',' << fmt(Y(std::log10(v))) << ' ';
            }
            out << "\"/>\n";
        }
    }
    out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    double ly = top + 15;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % palette.size()];
        for (int which = 0; which < 2; ++which, ly += 15) {
            out << "<line x1=\"" << W - right - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right - 125
                << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\"" << (which ? " stroke-dasharray=\"6,3\"" : "")
                << "/><text x=\"" << W - right - 120 << "\" y=\"" << ly << "\">" << series[i].label
                << (which ? " estimator" : " error") << "</text>\n";
        }
    }
    out << "<line x1=\"" << W - right - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right - 125 << "\" y2=\""
        << ly - 4 << "\" stroke=\"black\" stroke-dasharray=\"2,3\"/><text x=\"" << W - right - 120 << "\" y=\"" << ly
        << "\">slope -1/2</text>\n";
    out << "</g>\n</svg>\n";
}

void export_convergence_svg(std::span<const ConvergenceSeries> series, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_convergence_svg(out, series);
    check_stream(out, path);
}

}  // namespace ifem
