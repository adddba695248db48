// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <doctest.h>

#include "itetraj/geometry.hpp"
#include "itetraj/specfun.hpp"

using namespace itetraj::geometry;
using std::numbers::pi;

TEST_CASE("boundary samples at axis points")
{
  const auto e = boundary_sample(ellipse(1.0, 0.5), 40);
  CHECK(e[0].point.x == doctest::Approx(1.0));
  CHECK(e[0].point.y == doctest::Approx(0.0));
  CHECK(e[0].normal.x == doctest::Approx(1.0));
  CHECK(e[0].normal.y == doctest::Approx(0.0));

  const auto d = boundary_sample(deformed_ellipse(), 51);
  CHECK(d[0].point.x == doctest::Approx(1.05));
  CHECK(d[0].point.y == doctest::Approx(0.0));

  const Scatterer shifted(Ellipse{1.0, 0.5}, {2.0, -1.0});
  const auto s = boundary_sample(shifted, 16);
  CHECK(s[0].point.x == doctest::Approx(3.0));
  CHECK(s[0].point.y == doctest::Approx(-1.0));
  CHECK_THROWS_AS(boundary_sample(unit_disk(), 7), GeometryError);
}

TEST_CASE("square collocation avoids corners")
{
  const auto pts = boundary_sample(square(), 61);
  REQUIRE(pts.size() == 61);
  for (const auto &b : pts)
  {
    CHECK(std::abs(std::abs(b.point.x) - 0.5) + std::abs(std::abs(b.point.y) - 0.5) > 1e-3);
    const bool axis = (std::abs(b.normal.x) == 1.0 && b.normal.y == 0.0) || (std::abs(b.normal.y) == 1.0 && b.normal.x == 0.0);
    CHECK(axis);
    // Outward: normal points away from the center.
    CHECK(b.normal.x * b.point.x + b.normal.y * b.point.y > 0.0);
  }
}

TEST_CASE("property: normals are orthogonal to tangents on smooth boundaries")
{
  for (const auto &s : {unit_disk(), ellipse(1.0, 0.5), deformed_ellipse()})
  {
    const int m = 64;
    const auto pts = boundary_sample(s, m);
    for (int j = 0; j < m; ++j)
    {
      // Tangent by a central difference of the parametrization.
      const double t = 2.0 * pi * j / m, h = 1e-6;
      auto at = [&](double u)
      {
        if (std::holds_alternative<Disk>(s.shape()))
        {
          return Vec2{std::cos(u), std::sin(u)};
        }
        if (std::holds_alternative<Ellipse>(s.shape()))
        {
          return Vec2{std::cos(u), 0.5 * std::sin(u)};
        }
        return Vec2{0.75 * std::cos(u) + 0.3 * std::cos(2 * u), std::sin(u)};
      };
      const Vec2 a = at(t + h), b = at(t - h);
      const Vec2 tangent{(a.x - b.x) / (2 * h), (a.y - b.y) / (2 * h)};
      const double tn = std::hypot(tangent.x, tangent.y);
      CHECK(std::abs(pts[j].normal.x * tangent.x + pts[j].normal.y * tangent.y) / tn < 1e-8);
      CHECK(std::hypot(pts[j].normal.x, pts[j].normal.y) == doctest::Approx(1.0).epsilon(1e-14));
      const Vec2 p = at(t);
      CHECK(std::abs(pts[j].point.x - p.x) < 1e-14);
      CHECK(std::abs(pts[j].point.y - p.y) < 1e-14);
    }
  }
}

TEST_CASE("property: square sample set is dihedrally symmetric")
{
  const auto pts = boundary_sample(square(), 64);
  std::set<std::pair<long, long>> keys;
  auto key = [](double x, double y) { return std::pair<long, long>{std::lround(x * 1e9), std::lround(y * 1e9)}; };
  for (const auto &b : pts)
  {
    keys.insert(key(b.point.x, b.point.y));
  }
  for (const auto &b : pts)
  {
    const double x = b.point.x, y = b.point.y;
    for (const auto &[u, v] : std::vector<std::pair<double, double>>{{-y, x}, {-x, -y}, {y, -x}, {x, -y}, {-x, y}, {y, x}, {-y, -x}})
    {
      CHECK(keys.count(key(u, v)) == 1);
    }
  }
}

TEST_CASE("winding numbers and layouts")
{
  CHECK(winding_number(square(), {0.0, 0.0}) == 1);
  CHECK(winding_number(square(), {0.6, 0.0}) == 0);
  CHECK(winding_number(deformed_ellipse(), {0.0, 0.0}) == 1);

  const auto e = layout_mfs(ellipse(1.0, 0.5), 10, 0.4, 40, 4.0);
  CHECK(e.interior.size() == 10);
  CHECK(e.collocation.size() == 40);
  CHECK(e.sources.size() == 40);
  const auto sq = layout_mfs(square(), 20, 0.25, 61, 0.75);
  const auto tri = layout_mfs(equilateral_triangle(), 20, 0.25, 51, 0.75);
  const auto de = layout_mfs(deformed_ellipse(), 20, 0.2, 51, 1.5);
  for (const auto *l : {&e, &sq, &tri, &de})
  {
    for (const auto &q : l->sources)
    {
      CHECK(std::hypot(q.x - l->center.x, q.y - l->center.y) == doctest::Approx(l->source_radius));
    }
  }
  for (const auto &q : tri.interior)
  {
    CHECK(winding_number(equilateral_triangle(), q) == 1);
  }
  for (const auto &q : tri.sources)
  {
    CHECK(winding_number(equilateral_triangle(), q) == 0);
  }
  CHECK_THROWS_AS(layout_mfs(square(), 20, 0.6, 61, 0.75), LayoutError);
  CHECK_THROWS_AS(layout_mfs(square(), 20, 0.25, 61, 0.7), LayoutError);
}

TEST_CASE("invalid scatterers are rejected")
{
  CHECK_THROWS_AS(Scatterer(Disk{-1.0}), GeometryError);
  CHECK_THROWS_AS(Scatterer(Polygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}), GeometryError);
  CHECK_THROWS_AS(Scatterer(Polygon{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), GeometryError);
  CHECK_THROWS_AS(Scatterer(Polygon{{{0, 0}, {1, 0}}}), GeometryError);
}

TEST_CASE("closed-form Dirichlet eigenvalues")
{
  const auto sq = ide_reference(square(), 2);
  CHECK(sq[0] == doctest::Approx(4.4429).epsilon(1e-4));
  CHECK(sq[1] == doctest::Approx(7.0248).epsilon(1e-4));
  CHECK(sq[0] == doctest::Approx(std::sqrt(2.0) * pi).epsilon(1e-15));
  const auto tri = ide_reference(equilateral_triangle(), 2);
  CHECK(std::abs(tri[0] - 7.255) < 1e-3);
  CHECK(std::abs(tri[1] - 11.082) < 1e-3);
  const auto disk = ide_reference(unit_disk(), 3);
  CHECK(std::abs(disk[0] - 2.4048) < 1e-4);
  CHECK(std::abs(disk[1] - 3.8317) < 1e-4);
  CHECK(std::abs(disk[2] - 5.1356) < 1e-4);
  const auto el = ide_reference(ellipse(1.0, 0.5), 2);
  CHECK(el[0] == 3.777);
  CHECK(el[1] == 5.010);
  CHECK_THROWS_AS(ide_reference(deformed_ellipse(), 2), UnsupportedShape);
  CHECK_THROWS_AS(ide_reference(ellipse(1.0, 0.7), 1), UnsupportedShape);
  const auto ball = ball_ide_reference(2);
  CHECK(ball[0] == doctest::Approx(pi).epsilon(1e-12));
  CHECK(ball[1] == doctest::Approx(4.493409457909064).epsilon(1e-12));
  CHECK(ide_reference(square(), 0).empty());
}
