#include "ifem/interface_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ifem {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double tri_area(const SubTriangle& t) { return signed_area(t[0], t[1], t[2]); }

InterfaceCut build_cut(const std::array<Point, 3>& corners, int lone, Side lone_side, const Point& D,
                       const Point& E, double t_D, double t_E)
{
    InterfaceCut cut;
    cut.lone_vertex = lone;
    cut.lone_side = lone_side;
    cut.D = D;
    cut.E = E;
    cut.t_D = t_D;
    cut.t_E = t_E;
    for (int i = 0; i < 3; ++i) cut.vertex_side[idx(i)] = i == lone ? lone_side : opposite(lone_side);

    const Vec2 chord = E - D;
    Vec2 n(chord.y(), -chord.x());
    n.normalize();
    // Orient from the minus piece into the plus piece.
    const double lone_offset = n.dot(corners[idx(lone)] - D);
    if ((lone_side == Side::plus) != (lone_offset > 0.0)) n = -n;
    cut.normal = n;

    const auto split = subelement_split(corners, cut);
    cut.plus_triangles = split.plus;
    cut.minus_triangles = split.minus;
    return cut;
}

// Signed offset along `dir` from `base` to the zero level set, searching
// outwards in both directions up to `reach`.
std::optional<double> perpendicular_root(const Point& base, const Vec2& dir, double reach, const LevelSet& ls)
{
    const double f0 = ls(base);
    if (f0 == 0.0) return 0.0;
    const bool neg0 = f0 < 0.0;
    double prev = 0.0;
    for (double d = reach / 4096.0; d <= reach * (1.0 + 1e-12); d *= 2.0) {
        for (double sgn : {1.0, -1.0}) {
            const double f = ls(base + sgn * d * dir);
            if ((f < 0.0) != neg0) {
                double lo = sgn * prev, hi = sgn * d;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    const double fm = ls(base + mid * dir);
                    if (fm == 0.0) return mid;
                    if ((fm < 0.0) == neg0)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            }
        }
        prev = d;
    }
    return std::nullopt;
}

std::optional<MismatchRegion> try_mismatch(const InterfaceCut& cut, const LevelSet& ls, int samples)
{
    MismatchRegion region;
    region.element = cut.element;
    const Vec2 chord = cut.E - cut.D;
    const double length = chord.norm();
    std::vector<double> offset(idx(samples + 1), 0.0);
    region.curve.reserve(idx(samples + 1));
    region.curve.push_back(cut.D);
    for (int i = 1; i < samples; ++i) {
        const Point base = cut.D + (static_cast<double>(i) / samples) * chord;
        const auto w = perpendicular_root(base, cut.normal, length, ls);
        if (!w) return std::nullopt;
        offset[idx(i)] = *w;
        region.curve.push_back(base + *w * cut.normal);
    }
    region.curve.push_back(cut.E);

    const double step = length / samples;
    const bool all_plus = std::all_of(offset.begin(), offset.end(), [](double w) { return w >= 0.0; });
    const bool all_minus = std::all_of(offset.begin(), offset.end(), [](double w) { return w <= 0.0; });
    if ((all_plus || all_minus) && samples % 2 == 0) {
        // Single lobe: composite Simpson on the offsets.
        double sum = offset.front() + offset.back();
        for (int i = 1; i < samples; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * offset[idx(i)];
        const double area = sum * step / 3.0;
        if (all_plus)
            region.lobe_plus_area = std::max(area, 0.0);
        else
            region.lobe_minus_area = std::max(-area, 0.0);
        return region;
    }
    // Several lobes: trapezoids, split where the offset changes sign.
    for (int i = 0; i < samples; ++i) {
        const double w0 = offset[idx(i)], w1 = offset[idx(i + 1)];
        if ((w0 >= 0.0) == (w1 >= 0.0) || w0 == 0.0 || w1 == 0.0) {
            const double a = 0.5 * (w0 + w1) * step;
            if (a >= 0.0)
                region.lobe_plus_area += a;
            else
                region.lobe_minus_area -= a;
        } else {
            const double s = step * w0 / (w0 - w1);
            const double a0 = 0.5 * w0 * s, a1 = 0.5 * w1 * (step - s);
            (a0 >= 0.0 ? region.lobe_plus_area : region.lobe_minus_area) += std::abs(a0);
            (a1 >= 0.0 ? region.lobe_plus_area : region.lobe_minus_area) += std::abs(a1);
        }
    }
    return region;
}

}  // namespace

double InterfaceCut::piece_area(Side s) const
{
    double a = 0.0;
    for (const auto& t : pieces(s)) a += tri_area(t);
    return a;
}

std::optional<double> edge_intersection(const Point& p0, const Point& p1, const LevelSet& ls)
{
    const Side s0 = ls.side(p0);
    if (s0 == ls.side(p1)) return std::nullopt;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const Point p = (1.0 - mid) * p0 + mid * p1;
        const double f = ls(p);
        if (f == 0.0) return mid;
        if (ls.side(p) == s0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SubElementSplit subelement_split(const std::array<Point, 3>& corners, const InterfaceCut& cut)
{
    const int i = cut.lone_vertex;
    const Point& z = corners[idx(i)];
    const Point& a = corners[idx((i + 1) % 3)];
    const Point& b = corners[idx((i + 2) % 3)];
    const Point& D = cut.D;
    const Point& E = cut.E;

    std::vector<SubTriangle> lone{{z, D, E}};
    std::vector<SubTriangle> quad;
    if ((b - D).squaredNorm() <= (E - a).squaredNorm())
        quad = {{D, a, b}, {D, b, E}};
    else
        quad = {{D, a, E}, {a, b, E}};

    const double area = signed_area(z, a, b);
    for (const auto* list : {&lone, &quad})
        for (const auto& t : *list)
            if (!(tri_area(t) > 1e-14 * area))
                throw GeometryError("degenerate sub-triangle in element " + std::to_string(cut.element));

    SubElementSplit out;
    if (cut.lone_side == Side::plus) {
        out.plus = std::move(lone);
        out.minus = std::move(quad);
    } else {
        out.minus = std::move(lone);
        out.plus = std::move(quad);
    }
    return out;
}

InterfaceCut make_cut(const std::array<Point, 3>& corners, int lone_vertex, Side lone_side, double t_D,
                      double t_E)
{
    if (lone_vertex < 0 || lone_vertex > 2) throw GeometryError("lone vertex index out of range");
    const Point& z = corners[idx(lone_vertex)];
    const Point D = z + t_D * (corners[idx((lone_vertex + 1) % 3)] - z);
    const Point E = z + t_E * (corners[idx((lone_vertex + 2) % 3)] - z);
    return build_cut(corners, lone_vertex, lone_side, D, E, t_D, t_E);
}

InterfaceClassification classify_elements(const Mesh& mesh, const LevelSet& ls, const ClassifyOptions& options)
{
    if (options.edge_samples < 1) throw GeometryError("edge_samples must be positive");
    const int edge_samples = options.edge_samples;
    InterfaceClassification cls;
    const auto nv = idx(mesh.n_vertices());
    const auto nt = idx(mesh.n_triangles());
    const auto ne = idx(mesh.n_edges());

    cls.vertex_side.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) cls.vertex_side[i] = ls.side(mesh.vertices()[i]);

    std::vector<int> violating;
    std::vector<char> snapped(ne, 0);
    cls.split_index.assign(ne, -1);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const auto& ed = mesh.edge(e);
        const Point& p0 = mesh.vertex(ed.v[0]);
        const Point& p1 = mesh.vertex(ed.v[1]);
        const Side s0 = cls.vertex_side[idx(ed.v[0])];
        const Side s1 = cls.vertex_side[idx(ed.v[1])];
        int changes = 0;
        Side prev = s0;
        for (int i = 1; i <= edge_samples; ++i) {
            const Side cur = i == edge_samples ? s1 : ls.side(p0 + (p1 - p0) * (double(i) / edge_samples));
            if (cur != prev) ++changes;
            prev = cur;
        }
        if (changes > 1) {
            for (int k : ed.tri)
                if (k >= 0) violating.push_back(k);
            continue;
        }
        if (s0 == s1) continue;
        const double t = *edge_intersection(p0, p1, ls);
        if (t < options.snap_tol || t > 1.0 - options.snap_tol) {
            snapped[idx(e)] = 1;
            continue;
        }
        if (ed.kind != BoundaryKind::interior && !options.allow_boundary_crossing)
            throw InterfaceAssumptionError("interface crosses the domain boundary", {ed.tri[0]});
        EdgeSplit split;
        split.edge = e;
        split.t = t;
        split.point = (1.0 - t) * p0 + t * p1;
        split.first_side = s0;
        const double h = (p1 - p0).norm();
        const double first = t * h;
        const double second = h - first;
        split.length_plus = s0 == Side::plus ? first : second;
        split.length_minus = s0 == Side::plus ? second : first;
        cls.split_index[idx(e)] = static_cast<int>(cls.splits.size());
        cls.splits.push_back(split);
    }

    cls.kind.resize(nt);
    cls.cut_index.assign(nt, -1);
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto& tri = mesh.triangle(k);
        const auto corners = mesh.corners(k);
        std::array<Side, 3> s{};
        int n_plus = 0;
        for (int i = 0; i < 3; ++i) {
            s[idx(i)] = cls.vertex_side[idx(tri.v[idx(i)])];
            if (s[idx(i)] == Side::plus) ++n_plus;
        }
        if (n_plus == 0 || n_plus == 3) {
            const Side side = n_plus == 3 ? Side::plus : Side::minus;
            const Point centroid = (corners[0] + corners[1] + corners[2]) / 3.0;
            if (ls.side(centroid) != side) violating.push_back(k);
            cls.kind[idx(k)] = side == Side::plus ? ElementKind::plus : ElementKind::minus;
            continue;
        }
        const Side majority = n_plus >= 2 ? Side::plus : Side::minus;
        int lone = 0;
        for (int i = 0; i < 3; ++i)
            if (s[idx(i)] != majority) lone = i;
        const int edge_D = mesh.triangle_edge(k, (lone + 2) % 3);
        const int edge_E = mesh.triangle_edge(k, (lone + 1) % 3);
        if (snapped[idx(edge_D)] || snapped[idx(edge_E)]) {
            cls.kind[idx(k)] = majority == Side::plus ? ElementKind::plus : ElementKind::minus;
            continue;
        }
        if (cls.split_of(edge_D) == nullptr || cls.split_of(edge_E) == nullptr) {
            violating.push_back(k);
            cls.kind[idx(k)] = majority == Side::plus ? ElementKind::plus : ElementKind::minus;
            continue;
        }
        const EdgeSplit& sD = *cls.split_of(edge_D);
        const EdgeSplit& sE = *cls.split_of(edge_E);
        const int z = tri.v[idx(lone)];
        const double tD = mesh.edge(edge_D).v[0] == z ? sD.t : 1.0 - sD.t;
        const double tE = mesh.edge(edge_E).v[0] == z ? sE.t : 1.0 - sE.t;
        InterfaceCut cut = build_cut(corners, lone, opposite(majority), sD.point, sE.point, tD, tE);
        cut.element = k;
        cut.edge_D = edge_D;
        cut.edge_E = edge_E;
        cls.kind[idx(k)] = ElementKind::interface;
        cls.cut_index[idx(k)] = static_cast<int>(cls.cuts.size());
        cls.cuts.push_back(std::move(cut));
    }

    if (!violating.empty()) {
        std::sort(violating.begin(), violating.end());
        violating.erase(std::unique(violating.begin(), violating.end()), violating.end());
        std::ostringstream msg;
        msg << "interface crosses an edge twice or enters and leaves element(s) without separating vertices:";
        for (std::size_t i = 0; i < std::min<std::size_t>(violating.size(), 8); ++i) msg << ' ' << violating[i];
        if (violating.size() > 8) msg << " ...";
        throw InterfaceAssumptionError(msg.str(), std::move(violating));
    }
    return cls;
}

MismatchRegion mismatch_regions(const InterfaceCut& cut, const LevelSet& ls, int samples)
{
    if (samples < 2) throw GeometryError("mismatch polyline needs at least two samples");
    if (auto r = try_mismatch(cut, ls, samples)) return *r;
    if (auto r = try_mismatch(cut, ls, 2 * samples)) return *r;
    throw GeometryError("could not locate the interface arc in element " + std::to_string(cut.element));
}

std::vector<MismatchRegion> mismatch_regions(const InterfaceClassification& cls, const LevelSet& ls, int samples)
{
    std::vector<MismatchRegion> out;
    out.reserve(cls.cuts.size());
    for (const auto& cut : cls.cuts) out.push_back(mismatch_regions(cut, ls, samples));
    return out;
}

void write_cut_records(std::ostream& out, const InterfaceClassification& cls)
{
    const auto old_precision = out.precision(17);
    for (const auto& cut : cls.cuts)
        out << "cut " << cut.element << ' ' << cut.D.x() << ' ' << cut.D.y() << ' ' << cut.E.x() << ' '
            << cut.E.y() << '\n';
    out.precision(old_precision);
}

}  // namespace ifem
