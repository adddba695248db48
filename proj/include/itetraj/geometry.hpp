// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_GEOMETRY_HPP
#define ITETRAJ_GEOMETRY_HPP

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace itetraj::geometry
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;
};

struct Disk
{
  double radius = 1.0;
};

struct Ellipse
{
  double a;  // semi-axis along x
  double b;  // semi-axis along y
};

// Vertices in counterclockwise order, relative to the scatterer center.
struct Polygon
{
  std::vector<Vec2> vertices;
};

// x(t) = sum_k x_cos[k] cos(k t) + x_sin[k] sin(k t), likewise y, for t in [0, 2 pi).
struct ParametricCurve
{
  std::vector<double> x_cos, x_sin, y_cos, y_sin;
};

class GeometryError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class LayoutError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// The shape has no closed-form Dirichlet spectrum here; use mfs::find_ide.
class UnsupportedShape : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class Scatterer
{
public:
  using Shape = std::variant<Disk, Ellipse, Polygon, ParametricCurve>;

  // Validates positivity, orientation and simplicity of the boundary.
  Scatterer(Shape shape, Vec2 center = {}, std::string name = {});

  const Shape &shape() const { return shape_; }
  Vec2 center() const { return center_; }
  const std::string &name() const { return name_; }

  // Dense closed polyline of the boundary (polygon vertices exactly).
  std::vector<Vec2> outline(int samples = 2048) const;

private:
  Shape shape_;
  Vec2 center_;
  std::string name_;
};

Scatterer unit_disk();
Scatterer ellipse(double a, double b);
Scatterer square(double side = 1.0);
Scatterer equilateral_triangle(double side = 1.0);
// (0.75 cos t + 0.3 cos 2t, sin t)
Scatterer deformed_ellipse();

struct BoundarySample
{
  Vec2 point;
  Vec2 normal;  // unit, outward
};

// m points equidistributed in the parameter; polygons use per-edge uniform placement
// with the end points half a spacing away from the corners.
std::vector<BoundarySample> boundary_sample(const Scatterer &s, int m);

int winding_number(const Scatterer &s, Vec2 point);

struct MfsLayout
{
  Vec2 center;
  double interior_radius;
  double source_radius;
  std::vector<Vec2> interior;
  std::vector<BoundarySample> collocation;
  std::vector<Vec2> sources;
};

MfsLayout layout_mfs(const Scatterer &s, int interior_count, double interior_radius, int m,
                     double source_radius, double angle_offset = 0.0);

// Ascending Dirichlet eigenvalues (wave numbers) of the shape.
std::vector<double> ide_reference(const Scatterer &s, int count);

// Ascending distinct Dirichlet eigenvalues of the unit ball.
std::vector<double> ball_ide_reference(int count);

}  // namespace itetraj::geometry

#endif  // ITETRAJ_GEOMETRY_HPP
