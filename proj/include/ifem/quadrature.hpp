#pragma once

#include "ifem/mesh.hpp"

#include <array>
#include <cmath>

namespace ifem::quadrature {

struct TrianglePoint
{
    double l0, l1, l2;  ///< barycentric coordinates
    double weight;      ///< weights sum to one
};

/// Six-point rule exact for polynomials of degree four.
inline constexpr std::array<TrianglePoint, 6> degree4 = {{
    {0.44594849091596488632, 0.44594849091596488632, 0.10810301816807022736, 0.22338158967801146570},
    {0.44594849091596488632, 0.10810301816807022736, 0.44594849091596488632, 0.22338158967801146570},
    {0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632, 0.22338158967801146570},
    {0.09157621350977074346, 0.09157621350977074346, 0.81684757298045851308, 0.10995174365532186764},
    {0.09157621350977074346, 0.81684757298045851308, 0.09157621350977074346, 0.10995174365532186764},
    {0.81684757298045851308, 0.09157621350977074346, 0.09157621350977074346, 0.10995174365532186764},
}};

inline Point map(const std::array<Point, 3>& t, const TrianglePoint& q)
{
    return q.l0 * t[0] + q.l1 * t[1] + q.l2 * t[2];
}

/// Two-point Gauss rule on [0, 1]; weights sum to one.
inline constexpr std::array<double, 2> gauss2_nodes = {0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};
inline constexpr double gauss2_weight = 0.5;

/// Integral of fn over triangle t with the degree-4 rule.
template <typename Fn>
double integrate(const std::array<Point, 3>& t, Fn&& fn)
{
    const double area = std::abs(signed_area(t[0], t[1], t[2]));
    double sum = 0.0;
    for (const auto& q : degree4) sum += q.weight * fn(map(t, q));
    return sum * area;
}

/// Calls fn on each of the 4^depth congruent children of t.
template <typename Fn>
void for_each_subtriangle(const std::array<Point, 3>& t, int depth, Fn&& fn)
{
    if (depth <= 0) {
        fn(t);
        return;
    }
    const Point m01 = 0.5 * (t[0] + t[1]);
    const Point m12 = 0.5 * (t[1] + t[2]);
    const Point m20 = 0.5 * (t[2] + t[0]);
    for_each_subtriangle(std::array<Point, 3>{t[0], m01, m20}, depth - 1, fn);
    for_each_subtriangle(std::array<Point, 3>{m01, t[1], m12}, depth - 1, fn);
    for_each_subtriangle(std::array<Point, 3>{m20, m12, t[2]}, depth - 1, fn);
    for_each_subtriangle(std::array<Point, 3>{m12, m20, m01}, depth - 1, fn);
}

}  // namespace ifem::quadrature
