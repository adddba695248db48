// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "itetraj/specfun.hpp"

namespace itetraj::geometry
{

using std::numbers::pi;

namespace
{

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Vec2 unit_outward(Vec2 tangent)
{
  const double len = norm(tangent);
  return {tangent.y / len, -tangent.x / len};
}

struct CurvePoint
{
  Vec2 point;
  Vec2 tangent;
};

double series(const std::vector<double> &c, const std::vector<double> &s, double t, bool derivative)
{
  double v = 0.0;
  for (std::size_t k = 0; k < std::max(c.size(), s.size()); ++k)
  {
    const double ck = k < c.size() ? c[k] : 0.0, sk = k < s.size() ? s[k] : 0.0;
    const double kt = double(k) * t;
    v += derivative ? double(k) * (-ck * std::sin(kt) + sk * std::cos(kt)) : ck * std::cos(kt) + sk * std::sin(kt);
  }
  return v;
}

// Smooth shapes at parameter t in [0, 2 pi), relative to the center.
CurvePoint smooth_at(const Scatterer::Shape &shape, double t)
{
  if (const auto *d = std::get_if<Disk>(&shape))
  {
    return {{d->radius * std::cos(t), d->radius * std::sin(t)}, {-d->radius * std::sin(t), d->radius * std::cos(t)}};
  }
  if (const auto *e = std::get_if<Ellipse>(&shape))
  {
    return {{e->a * std::cos(t), e->b * std::sin(t)}, {-e->a * std::sin(t), e->b * std::cos(t)}};
  }
  const auto &c = std::get<ParametricCurve>(shape);
  return {{series(c.x_cos, c.x_sin, t, false), series(c.y_cos, c.y_sin, t, false)},
          {series(c.x_cos, c.x_sin, t, true), series(c.y_cos, c.y_sin, t, true)}};
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
  const double d1 = cross(sub(b, a), sub(c, a)), d2 = cross(sub(b, a), sub(d, a));
  const double d3 = cross(sub(d, c), sub(a, c)), d4 = cross(sub(d, c), sub(b, c));
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::vector<double> distinct_sorted(std::vector<double> v, int count)
{
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
  {
    if (out.empty() || x - out.back() > 1e-9 * x)
    {
      out.push_back(x);
    }
  }
  if (int(out.size()) > count)
  {
    out.resize(count);
  }
  return out;
}

}  // namespace

Scatterer::Scatterer(Shape shape, Vec2 center, std::string name)
  : shape_(std::move(shape)), center_(center), name_(std::move(name))
{
  if (const auto *d = std::get_if<Disk>(&shape_); d && !(d->radius > 0.0))
  {
    throw GeometryError("disk radius must be positive");
  }
  if (const auto *e = std::get_if<Ellipse>(&shape_); e && !(e->a > 0.0 && e->b > 0.0))
  {
    throw GeometryError("ellipse semi-axes must be positive");
  }
  if (const auto *p = std::get_if<Polygon>(&shape_); p && p->vertices.size() < 3)
  {
    throw GeometryError("polygon needs at least three vertices");
  }
  const auto line = outline(std::holds_alternative<Polygon>(shape_) ? 0 : 512);
  double area = 0.0;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    area += cross(line[i], line[(i + 1) % line.size()]);
  }
  if (!(area > 0.0))
  {
    throw GeometryError("boundary must be counterclockwise with positive area");
  }
  const std::size_t n = line.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = i + 2; j < n; ++j)
    {
      if (i == 0 && j == n - 1)
      {
        continue;
      }
      if (segments_cross(line[i], line[(i + 1) % n], line[j], line[(j + 1) % n]))
      {
        throw GeometryError("boundary intersects itself");
      }
    }
  }
}

std::vector<Vec2> Scatterer::outline(int samples) const
{
  std::vector<Vec2> out;
  if (const auto *p = std::get_if<Polygon>(&shape_))
  {
    for (const auto &v : p->vertices)
    {
      out.push_back({center_.x + v.x, center_.y + v.y});
    }
    return out;
  }
  for (int j = 0; j < samples; ++j)
  {
    const auto c = smooth_at(shape_, 2.0 * pi * j / samples);
    out.push_back({center_.x + c.point.x, center_.y + c.point.y});
  }
  return out;
}

Scatterer unit_disk() { return Scatterer(Disk{1.0}, {}, "disk"); }

Scatterer ellipse(double a, double b) { return Scatterer(Ellipse{a, b}, {}, "ellipse"); }

Scatterer square(double side)
{
  const double h = 0.5 * side;
  return Scatterer(Polygon{{{-h, -h}, {h, -h}, {h, h}, {-h, h}}}, {}, "square");
}

Scatterer equilateral_triangle(double side)
{
  // Circumradius; the centroid sits at the origin.
  const double r = side / std::sqrt(3.0);
  // Bottom edge horizontal, apex up.
  return Scatterer(Polygon{{{-0.5 * side, -0.5 * r}, {0.5 * side, -0.5 * r}, {0.0, r}}}, {}, "triangle");
}

Scatterer deformed_ellipse()
{
  return Scatterer(ParametricCurve{{0.0, 0.75, 0.3}, {}, {}, {0.0, 1.0}}, {}, "deformed_ellipse");
}

std::vector<BoundarySample> boundary_sample(const Scatterer &s, int m)
{
  if (m < 8)
  {
    throw GeometryError("boundary_sample: at least 8 points are required");
  }
  const Vec2 c = s.center();
  std::vector<BoundarySample> out;
  out.reserve(m);
  if (const auto *p = std::get_if<Polygon>(&s.shape()))
  {
    const auto &v = p->vertices;
    const std::size_t edges = v.size();
    std::vector<double> len(edges);
    double perimeter = 0.0;
    for (std::size_t e = 0; e < edges; ++e)
    {
      len[e] = norm(sub(v[(e + 1) % edges], v[e]));
      perimeter += len[e];
    }
    // Largest-remainder apportionment of m points to edges by length.
    std::vector<int> per(edges);
    std::vector<std::pair<double, std::size_t>> rest;
    int used = 0;
    for (std::size_t e = 0; e < edges; ++e)
    {
      const double share = m * len[e] / perimeter;
      per[e] = int(std::floor(share));
      used += per[e];
      rest.push_back({-(share - per[e]), e});
    }
    std::stable_sort(rest.begin(), rest.end());
    for (int k = 0; k < m - used; ++k)
    {
      ++per[rest[k].second];
    }
    for (std::size_t e = 0; e < edges; ++e)
    {
      const Vec2 a = v[e], d = sub(v[(e + 1) % edges], v[e]);
      const Vec2 normal = unit_outward(d);
      for (int i = 0; i < per[e]; ++i)
      {
        const double t = (i + 0.5) / per[e];
        out.push_back({{c.x + a.x + t * d.x, c.y + a.y + t * d.y}, normal});
      }
    }
    return out;
  }
  for (int j = 0; j < m; ++j)
  {
    const auto q = smooth_at(s.shape(), 2.0 * pi * j / m);
    out.push_back({{c.x + q.point.x, c.y + q.point.y}, unit_outward(q.tangent)});
  }
  return out;
}

int winding_number(const Scatterer &s, Vec2 point)
{
  const auto line = s.outline(4096);
  double total = 0.0;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    const Vec2 a = sub(line[i], point), b = sub(line[(i + 1) % line.size()], point);
    total += std::atan2(cross(a, b), a.x * b.x + a.y * b.y);
  }
  return int(std::lround(total / (2.0 * pi)));
}

MfsLayout layout_mfs(const Scatterer &s, int interior_count, double interior_radius, int m,
                     double source_radius, double angle_offset)
{
  if (interior_count < 0 || !(interior_radius > 0.0) || !(source_radius > interior_radius))
  {
    throw LayoutError("layout_mfs: invalid counts or radii");
  }
  MfsLayout l{s.center(), interior_radius, source_radius, {}, boundary_sample(s, m), {}};
  const Vec2 c = s.center();
  for (int j = 0; j < interior_count; ++j)
  {
    const double a = angle_offset + 2.0 * pi * j / interior_count;
    const Vec2 q{c.x + interior_radius * std::cos(a), c.y + interior_radius * std::sin(a)};
    if (winding_number(s, q) != 1)
    {
      throw LayoutError("layout_mfs: interior node outside the scatterer");
    }
    l.interior.push_back(q);
  }
  for (int j = 0; j < m; ++j)
  {
    const double a = angle_offset + 2.0 * pi * j / m;
    const Vec2 q{c.x + source_radius * std::cos(a), c.y + source_radius * std::sin(a)};
    if (winding_number(s, q) != 0)
    {
      throw LayoutError("layout_mfs: source point inside the scatterer");
    }
    l.sources.push_back(q);
  }
  // Both circles must clear the boundary, not only lie on the correct side at the nodes.
  for (const auto &q : s.outline(2048))
  {
    const double r = norm(sub(q, c));
    if (!(r > interior_radius) || !(r < source_radius))
    {
      throw LayoutError("layout_mfs: auxiliary circle meets the boundary");
    }
  }
  return l;
}

std::vector<double> ide_reference(const Scatterer &s, int count)
{
  if (count <= 0)
  {
    return {};
  }
  if (const auto *d = std::get_if<Disk>(&s.shape()))
  {
    std::vector<double> all;
    for (int p = 0; p <= count; ++p)
    {
      for (double r : specfun::bessel_real_roots(p, count))
      {
        all.push_back(r / d->radius);
      }
    }
    return distinct_sorted(all, count);
  }
  if (const auto *e = std::get_if<Ellipse>(&s.shape()))
  {
    const double big = std::max(e->a, e->b), small = std::min(e->a, e->b);
    if (std::abs(big / small - 2.0) < 1e-12 && count <= 2)
    {
      std::vector<double> out{3.777 / big, 5.010 / big};
      out.resize(count);
      return out;
    }
    throw UnsupportedShape("ide_reference: only the first two values of the 2:1 ellipse are tabulated; use mfs::find_ide");
  }
  if (const auto *p = std::get_if<Polygon>(&s.shape()))
  {
    const auto &v = p->vertices;
    std::vector<double> len;
    for (std::size_t e = 0; e < v.size(); ++e)
    {
      len.push_back(norm(sub(v[(e + 1) % v.size()], v[e])));
    }
    const double L = len[0];
    const bool equal = std::all_of(len.begin(), len.end(), [&](double x) { return std::abs(x - L) < 1e-12 * L; });
    std::vector<double> all;
    const int range = count + 2;
    if (equal && v.size() == 4 &&
        std::abs(norm(sub(v[2], v[0])) - norm(sub(v[3], v[1]))) < 1e-12 * L)
    {
      for (int j = 1; j <= range; ++j)
      {
        for (int k = 1; k <= range; ++k)
        {
          all.push_back(pi / L * std::sqrt(double(j * j + k * k)));
        }
      }
      return distinct_sorted(all, count);
    }
    if (equal && v.size() == 3)
    {
      for (int j = 1; j <= range; ++j)
      {
        for (int k = 1; k <= range; ++k)
        {
          all.push_back(4.0 * pi / (3.0 * L) * std::sqrt(double(j * j + j * k + k * k)));
        }
      }
      return distinct_sorted(all, count);
    }
    throw UnsupportedShape("ide_reference: no closed form for this polygon; use mfs::find_ide");
  }
  throw UnsupportedShape("ide_reference: no closed form for a parametric curve; use mfs::find_ide");
}

std::vector<double> ball_ide_reference(int count)
{
  if (count <= 0)
  {
    return {};
  }
  std::vector<double> all;
  for (int p = 0; p <= count; ++p)
  {
    for (double r : specfun::spherical_real_roots(p, count))
    {
      all.push_back(r);
    }
  }
  return distinct_sorted(all, count);
}

}  // namespace itetraj::geometry
