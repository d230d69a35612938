#include "ifem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ifem {

namespace {

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

int wrap(int i) { return i % 3; }

double angle_at(const Point& p, const Point& q, const Point& r)
{
    const Vec2 u = q - p;
    const Vec2 w = r - p;
    return std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, Rect domain,
           std::array<BoundaryKind, 4> side_kinds, int generation)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      domain_(domain),
      side_kinds_(side_kinds),
      generation_(generation)
{
    for (std::size_t k = 0; k < triangles_.size(); ++k) {
        const auto& t = triangles_[k];
        for (int id : t.v) {
            if (id < 0 || id >= n_vertices())
                throw MeshError("triangle " + std::to_string(k) + " references invalid vertex");
        }
        if (t.ref_edge < 0 || t.ref_edge > 2)
            throw MeshError("triangle " + std::to_string(k) + " has invalid refinement edge");
        if (signed_area(vertex(t.v[0]), vertex(t.v[1]), vertex(t.v[2])) <= 0.0)
            throw MeshError("triangle " + std::to_string(k) + " is not counterclockwise");
    }
    build_edges();
}

BoundaryKind Mesh::classify_boundary(const Point& a, const Point& b) const
{
    const double scale = std::max(domain_.x_max - domain_.x_min, domain_.y_max - domain_.y_min);
    const double tol = 1e-12 * scale;
    auto on = [tol](double s, double ref) { return std::abs(s - ref) <= tol; };
    if (on(a.y(), domain_.y_min) && on(b.y(), domain_.y_min))
        return side_kinds_[static_cast<std::size_t>(RectSide::bottom)];
    if (on(a.x(), domain_.x_max) && on(b.x(), domain_.x_max))
        return side_kinds_[static_cast<std::size_t>(RectSide::right)];
    if (on(a.y(), domain_.y_max) && on(b.y(), domain_.y_max))
        return side_kinds_[static_cast<std::size_t>(RectSide::top)];
    if (on(a.x(), domain_.x_min) && on(b.x(), domain_.x_min))
        return side_kinds_[static_cast<std::size_t>(RectSide::left)];
    return BoundaryKind::interior;
}

void Mesh::build_edges()
{
    edges_.clear();
    tri_edges_.assign(triangles_.size(), {-1, -1, -1});
    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(triangles_.size() * 2);

    for (int k = 0; k < n_triangles(); ++k) {
        const auto& t = triangles_[static_cast<std::size_t>(k)];
        for (int i = 0; i < 3; ++i) {
            const int a = t.v[static_cast<std::size_t>(wrap(i + 1))];
            const int b = t.v[static_cast<std::size_t>(wrap(i + 2))];
            auto [it, inserted] = lookup.try_emplace(edge_key(a, b), n_edges());
            if (inserted) {
                Edge e;
                e.v = {a, b};
                e.tri = {k, -1};
                edges_.push_back(e);
            } else {
                Edge& e = edges_[static_cast<std::size_t>(it->second)];
                if (e.tri[1] != -1 || e.v[0] != b || e.v[1] != a)
                    throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                    ") is not shared consistently by two triangles");
                e.tri[1] = k;
            }
            tri_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = it->second;
        }
    }

    for (auto& e : edges_) {
        if (e.tri[1] >= 0) {
            e.kind = BoundaryKind::interior;
            continue;
        }
        e.kind = classify_boundary(vertex(e.v[0]), vertex(e.v[1]));
        if (e.kind == BoundaryKind::interior)
            throw MeshError("hanging edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) +
                            ") inside the domain");
    }
}

std::array<Point, 3> Mesh::corners(int k) const
{
    const auto& t = triangle(k);
    return {vertex(t.v[0]), vertex(t.v[1]), vertex(t.v[2])};
}

double Mesh::area(int k) const
{
    const auto p = corners(k);
    return signed_area(p[0], p[1], p[2]);
}

double Mesh::diameter(int k) const
{
    const auto p = corners(k);
    return std::max({(p[1] - p[2]).norm(), (p[2] - p[0]).norm(), (p[0] - p[1]).norm()});
}

ElementGeometry Mesh::geometry(int k) const
{
    const auto p = corners(k);
    ElementGeometry g;
    for (int i = 0; i < 3; ++i)
        g.edge_lengths[static_cast<std::size_t>(i)] =
            (p[static_cast<std::size_t>(wrap(i + 2))] - p[static_cast<std::size_t>(wrap(i + 1))]).norm();
    g.diameter = *std::max_element(g.edge_lengths.begin(), g.edge_lengths.end());
    g.area = signed_area(p[0], p[1], p[2]);
    double min_angle = std::numeric_limits<double>::max();
    for (int i = 0; i < 3; ++i)
        min_angle = std::min(min_angle, angle_at(p[static_cast<std::size_t>(i)],
                                                 p[static_cast<std::size_t>(wrap(i + 1))],
                                                 p[static_cast<std::size_t>(wrap(i + 2))]));
    g.min_angle_deg = min_angle * 180.0 / std::numbers::pi;
    return g;
}

double Mesh::edge_length(int e) const
{
    const auto& ed = edge(e);
    return (vertex(ed.v[1]) - vertex(ed.v[0])).norm();
}

Vec2 Mesh::edge_tangent(int e) const
{
    const auto& ed = edge(e);
    return (vertex(ed.v[1]) - vertex(ed.v[0])).normalized();
}

Vec2 Mesh::edge_normal(int e) const
{
    const Vec2 t = edge_tangent(e);
    return {t.y(), -t.x()};
}

Point Mesh::edge_midpoint(int e) const
{
    const auto& ed = edge(e);
    return 0.5 * (vertex(ed.v[0]) + vertex(ed.v[1]));
}

std::vector<bool> Mesh::dirichlet_vertices() const
{
    std::vector<bool> flags(vertices_.size(), false);
    for (const auto& e : edges_) {
        if (e.kind == BoundaryKind::dirichlet) {
            flags[static_cast<std::size_t>(e.v[0])] = true;
            flags[static_cast<std::size_t>(e.v[1])] = true;
        }
    }
    return flags;
}

std::string Mesh::audit() const
{
    try {
        Mesh copy(vertices_, triangles_, domain_, side_kinds_, generation_);
    } catch (const MeshError& err) {
        return err.what();
    }
    std::vector<int> incidence(edges_.size(), 0);
    for (const auto& te : tri_edges_)
        for (int e : te) ++incidence[static_cast<std::size_t>(e)];
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const int expected = edges_[e].kind == BoundaryKind::interior ? 2 : 1;
        if (incidence[e] != expected) return "edge " + std::to_string(e) + " has wrong incidence";
    }
    return {};
}

Mesh build_initial_mesh(int n, const Rect& domain, std::array<BoundaryKind, 4> side_kinds)
{
    if (n < 1) throw MeshError("initial mesh size must be positive, got " + std::to_string(n));
    if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min))
        throw MeshError("domain rectangle is empty");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        // Boundary rows/columns are set exactly so the boundary classification is exact.
        const double y = j == n ? domain.y_max : domain.y_min + (domain.y_max - domain.y_min) * j / n;
        for (int i = 0; i <= n; ++i) {
            const double x = i == n ? domain.x_max : domain.x_min + (domain.x_max - domain.x_min) * i / n;
            vertices.emplace_back(x, y);
        }
    }

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
            triangles.push_back({{v00, v10, v11}, 1});
            triangles.push_back({{v00, v11, v01}, 2});
        }
    }
    return Mesh(std::move(vertices), std::move(triangles), domain, side_kinds);
}

Mesh refine_nvb(const Mesh& mesh, std::span<const int> marked)
{
    for (int k : marked)
        if (k < 0 || k >= mesh.n_triangles())
            throw MeshError("marked triangle id " + std::to_string(k) + " out of range");
    if (marked.empty()) return mesh;

    std::vector<char> edge_marked(static_cast<std::size_t>(mesh.n_edges()), 0);
    std::deque<int> queue;
    auto mark_edge = [&](int e) {
        if (edge_marked[static_cast<std::size_t>(e)]) return;
        edge_marked[static_cast<std::size_t>(e)] = 1;
        for (int k : mesh.edge(e).tri)
            if (k >= 0) queue.push_back(k);
    };
    for (int k : marked) mark_edge(mesh.triangle_edge(k, mesh.triangle(k).ref_edge));

    // Closure: a triangle with any marked edge must have its refinement edge marked.
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        const auto& te = mesh.triangle_edges(k);
        const bool any = edge_marked[static_cast<std::size_t>(te[0])] ||
                         edge_marked[static_cast<std::size_t>(te[1])] ||
                         edge_marked[static_cast<std::size_t>(te[2])];
        if (any) mark_edge(te[static_cast<std::size_t>(mesh.triangle(k).ref_edge)]);
    }

    std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
    std::unordered_map<std::uint64_t, int> midpoint;
    for (int e = 0; e < mesh.n_edges(); ++e) {
        if (!edge_marked[static_cast<std::size_t>(e)]) continue;
        const auto& ed = mesh.edge(e);
        midpoint.emplace(edge_key(ed.v[0], ed.v[1]), static_cast<int>(vertices.size()));
        vertices.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
    }

    std::vector<Triangle> out;
    out.reserve(static_cast<std::size_t>(mesh.n_triangles()) + 2 * midpoint.size());

    // Children of (p, a, b) bisected on ab at m are (m, p, a) and (m, b, p),
    // both with the newest vertex m first.
    auto bisect = [&](auto&& self, const Triangle& t) -> void {
        const int r = t.ref_edge;
        const int p = t.v[static_cast<std::size_t>(r)];
        const int a = t.v[static_cast<std::size_t>(wrap(r + 1))];
        const int b = t.v[static_cast<std::size_t>(wrap(r + 2))];
        const auto it = midpoint.find(edge_key(a, b));
        if (it == midpoint.end()) {
            out.push_back(t);
            return;
        }
        const int m = it->second;
        self(self, Triangle{{m, p, a}, 0});
        self(self, Triangle{{m, b, p}, 0});
    };
    for (const auto& t : mesh.triangles()) bisect(bisect, t);

    return Mesh(std::move(vertices), std::move(out), mesh.domain(), mesh.side_kinds(),
                mesh.generation() + 1);
}

Mesh refine_uniform(const Mesh& mesh)
{
    auto all = [](const Mesh& m) {
        std::vector<int> ids(static_cast<std::size_t>(m.n_triangles()));
        for (int k = 0; k < m.n_triangles(); ++k) ids[static_cast<std::size_t>(k)] = k;
        return ids;
    };
    const Mesh once = refine_nvb(mesh, all(mesh));
    return refine_nvb(once, all(once));
}

MeshStats mesh_stats(const Mesh& mesh)
{
    MeshStats s;
    s.n_vertices = static_cast<std::size_t>(mesh.n_vertices());
    s.n_triangles = static_cast<std::size_t>(mesh.n_triangles());
    s.n_edges = static_cast<std::size_t>(mesh.n_edges());
    for (const auto& e : mesh.edges())
        if (e.kind != BoundaryKind::interior) ++s.n_boundary_edges;
    if (mesh.n_triangles() == 0) return s;
    s.min_angle_deg = std::numeric_limits<double>::max();
    s.min_diameter = std::numeric_limits<double>::max();
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        s.min_angle_deg = std::min(s.min_angle_deg, g.min_angle_deg);
        s.max_diameter = std::max(s.max_diameter, g.diameter);
        s.min_diameter = std::min(s.min_diameter, g.diameter);
    }
    return s;
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    const auto old_precision = out.precision(17);
    out << "vertices " << mesh.n_vertices() << " triangles " << mesh.n_triangles() << '\n';
    for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
    for (const auto& t : mesh.triangles())
        out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.ref_edge << '\n';
    out.precision(old_precision);
}

Mesh read_mesh(std::istream& in, const Rect& domain)
{
    std::string w1, w2;
    int nv = 0, nt = 0;
    if (!(in >> w1 >> nv >> w2 >> nt) || w1 != "vertices" || w2 != "triangles" || nv < 0 || nt < 0)
        throw MeshError("malformed mesh header");
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices)
        if (!(in >> p.x() >> p.y())) throw MeshError("truncated vertex list");
    std::vector<Triangle> triangles(static_cast<std::size_t>(nt));
    for (auto& t : triangles)
        if (!(in >> t.v[0] >> t.v[1] >> t.v[2] >> t.ref_edge)) throw MeshError("truncated triangle list");
    return Mesh(std::move(vertices), std::move(triangles), domain);
}

}  // namespace ifem
