#include "ifem/problems.hpp"

#include "ifem/assembly.hpp"
#include "ifem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ifem {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8) return std::accumulate(v.begin(), v.end(), 0.0);
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

bool near_curve(const std::array<Point, 3>& t, const LevelSet& ls)
{
    const Point c = (t[0] + t[1] + t[2]) / 3.0;
    double r = 0.0;
    for (const Point& v : t) r = std::max(r, (v - c).norm());
    return std::abs(ls.value(c)) <= r * ls.gradient(c).norm();
}

// Uniform refinement to `uniform` levels, continued up to `curve` levels on
// parts the interface may cross.
template <class Fn>
double integrate_refined(const std::array<Point, 3>& t, const LevelSet& ls, int level, int uniform, int curve,
                         const Fn& f)
{
    if (level >= uniform && (level >= curve || !near_curve(t, ls))) return quadrature::integrate(t, f);
    double sum = 0.0;
    quadrature::for_each_subtriangle(t, 1, [&](const std::array<Point, 3>& sub) {
        sum += integrate_refined(sub, ls, level + 1, uniform, curve, f);
    });
    return sum;
}

}  // namespace

BenchmarkProblem ellipse_problem(double rho, double p, double beta_minus)
{
    if (!(rho > 0.0) || !(p > 0.0) || !(beta_minus > 0.0))
        throw std::invalid_argument("ellipse problem needs rho > 0, p > 0, beta^- > 0");
    const double a = std::numbers::pi / 6.28;
    const double b = 1.5 * a;
    const double ia2 = 1.0 / (a * a), ib2 = 1.0 / (b * b);
    const double beta_plus = rho * beta_minus;

    BenchmarkProblem prob;
    prob.name = "ellipse";
    prob.alpha_minus = beta_minus;
    prob.alpha_plus = beta_plus;
    prob.regularity = p;

    auto r_of = [=](const Point& x) { return std::sqrt(x.x() * x.x() * ia2 + x.y() * x.y() * ib2); };
    prob.level_set.value = [=](const Point& x) { return r_of(x) - 1.0; };
    prob.level_set.gradient = [=](const Point& x) -> Vec2 {
        const double r = r_of(x);
        if (r == 0.0) return Vec2::Zero();
        return Vec2(x.x() * ia2, x.y() * ib2) / r;
    };
    prob.exact_on = [=](const Point& x, Side s) {
        const double rp = std::pow(r_of(x), p);
        return s == Side::minus ? rp / beta_minus : rp / beta_plus + 1.0 / beta_minus - 1.0 / beta_plus;
    };
    // grad r^p = p r^(p-2) (x/a^2, y/b^2)
    prob.exact_gradient_on = [=](const Point& x, Side s) -> Vec2 {
        const double r = r_of(x);
        if (r == 0.0) return Vec2::Zero();
        const Vec2 g = p * std::pow(r, p - 2.0) * Vec2(x.x() * ia2, x.y() * ib2);
        return g / (s == Side::minus ? beta_minus : beta_plus);
    };
    // f = -lap(r^p) on both sides since alpha grad u = grad r^p.
    prob.source = [=](const Point& x) {
        const double r = r_of(x);
        if (r == 0.0) return 0.0;
        const double q = x.x() * x.x() * ia2 * ia2 + x.y() * x.y() * ib2 * ib2;
        return -(p * std::pow(r, p - 2.0) * (ia2 + ib2) + p * (p - 2.0) * std::pow(r, p - 4.0) * q);
    };
    return prob;
}

BenchmarkProblem petal_problem(double rho, double beta_minus)
{
    if (!(rho > 0.0) || !(beta_minus > 0.0)) throw std::invalid_argument("petal problem needs rho > 0, beta^- > 0");
    const double beta_plus = rho * beta_minus;

    BenchmarkProblem prob;
    prob.name = "petal";
    prob.alpha_minus = beta_minus;
    prob.alpha_plus = beta_plus;

    auto phi = [](const Point& x) {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) return -0.3;
        const double theta = std::atan2(x.y(), x.x());
        return r2 * r2 * (1.0 + 0.5 * std::sin(12.0 * theta)) - 0.3;
    };
    // grad(r^4 g(theta)) = 4 r^2 g (x, y) + r^2 g'(theta) (-y, x), g' = 6 cos(12 theta)
    auto grad_phi = [](const Point& x) -> Vec2 {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) return Vec2::Zero();
        const double theta = std::atan2(x.y(), x.x());
        const double g = 1.0 + 0.5 * std::sin(12.0 * theta);
        const double dg = 6.0 * std::cos(12.0 * theta);
        return 4.0 * r2 * g * x + r2 * dg * Vec2(-x.y(), x.x());
    };
    prob.level_set.value = phi;
    prob.level_set.gradient = grad_phi;
    prob.exact_on = [=](const Point& x, Side s) { return phi(x) / (s == Side::minus ? beta_minus : beta_plus); };
    prob.exact_gradient_on = [=](const Point& x, Side s) -> Vec2 {
        return grad_phi(x) / (s == Side::minus ? beta_minus : beta_plus);
    };
    // lap(r^4 g) = r^2 (16 g + g'') = r^2 (16 - 64 sin(12 theta))
    prob.source = [](const Point& x) {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) return 0.0;
        const double theta = std::atan2(x.y(), x.x());
        return -r2 * (16.0 - 64.0 * std::sin(12.0 * theta));
    };
    return prob;
}

BenchmarkProblem straight_interface_problem(double c, double alpha_minus, double alpha_plus)
{
    BenchmarkProblem prob;
    prob.name = "straight";
    prob.alpha_minus = alpha_minus;
    prob.alpha_plus = alpha_plus;
    prob.level_set.value = [c](const Point& x) { return x.x() - c; };
    prob.level_set.gradient = [](const Point&) { return Vec2(1.0, 0.0); };
    prob.exact_on = [=](const Point& x, Side s) {
        return (x.x() - c) / (s == Side::minus ? alpha_minus : alpha_plus);
    };
    prob.exact_gradient_on = [=](const Point&, Side s) {
        return Vec2(1.0 / (s == Side::minus ? alpha_minus : alpha_plus), 0.0);
    };
    prob.source = [](const Point&) { return 0.0; };
    return prob;
}

BenchmarkProblem linear_problem(double c0, double c1, double c2, double alpha)
{
    BenchmarkProblem prob;
    prob.name = "linear";
    prob.alpha_minus = alpha;
    prob.alpha_plus = alpha;
    prob.level_set.value = [](const Point&) { return 1.0; };
    prob.level_set.gradient = [](const Point&) { return Vec2(0.0, 0.0); };
    prob.exact_on = [=](const Point& x, Side) { return c0 + c1 * x.x() + c2 * x.y(); };
    prob.exact_gradient_on = [=](const Point&, Side) { return Vec2(c1, c2); };
    prob.source = [](const Point&) { return 0.0; };
    return prob;
}

BenchmarkProblem make_problem(const std::string& name, double rho, double p)
{
    if (name == "ellipse") return ellipse_problem(rho, p);
    if (name == "petal") return petal_problem(rho);
    throw std::invalid_argument("unknown problem '" + name + "' (expected ellipse or petal)");
}

std::vector<double> energy_error_squared(const Mesh& mesh, const InterfaceClassification& cls,
                                         const DiscreteSolution& solution, const BenchmarkProblem& problem,
                                         const EnergyNormOptions& options)
{
    std::vector<double> out(idx(mesh.n_triangles()), 0.0);
    for (int k = 0; k < mesh.n_triangles(); ++k) {
        auto integrand_for = [&](Side piece) {
            const Vec2& gh = solution.gradient(k, piece);
            return [&, gh](const Point& x) {
                const Side s = problem.level_set.side(x);
                return problem.alpha(s) * (problem.exact_gradient_on(x, s) - gh).squaredNorm();
            };
        };
        double sum = 0.0;
        if (const auto* cut = cls.cut_of(k)) {
            for (Side piece : {Side::plus, Side::minus}) {
                const auto integrand = integrand_for(piece);
                for (const auto& t : cut->pieces(piece))
                    sum += integrate_refined(t, problem.level_set, 0, options.subdivision_depth, options.curve_depth,
                                             integrand);
            }
        } else {
            sum = quadrature::integrate(mesh.corners(k), integrand_for(cls.element_side(k)));
        }
        out[idx(k)] = sum;
    }
    return out;
}

double energy_error(const Mesh& mesh, const InterfaceClassification& cls, const DiscreteSolution& solution,
                    const BenchmarkProblem& problem, const EnergyNormOptions& options)
{
    const auto parts = energy_error_squared(mesh, cls, solution, problem, options);
    return std::sqrt(pairwise_sum(parts));
}

}  // namespace ifem
