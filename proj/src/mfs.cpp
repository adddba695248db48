// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/mfs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "itetraj/specfun.hpp"

namespace itetraj::mfs
{

using geometry::MfsLayout;
using geometry::Vec2;

namespace
{

// Relative cutoff for the numerical range of the collocation matrix.
constexpr double range_cutoff = 1e-10;

struct KernelValue
{
  cplx value;
  cplx normal_derivative;
};

// Y_0(k r) and its normal derivative at x for a source at y.
KernelValue kernel(cplx k, Vec2 x, Vec2 y, const Vec2 *normal)
{
  const double dx = x.x - y.x, dy = x.y - y.y;
  const double r = std::hypot(dx, dy);
  if (!(r > 1e-12))
  {
    throw geometry::LayoutError("mfs: source coincides with a collocation point");
  }
  const auto y0 = specfun::detail::bessel_y(0, k * r);
  KernelValue out{y0.value, 0.0};
  if (normal)
  {
    out.normal_derivative = k * y0.derivative * ((dx * normal->x + dy * normal->y) / r);
  }
  return out;
}

void normalize_columns(Eigen::MatrixXcd &a)
{
  for (Eigen::Index j = 0; j < a.cols(); ++j)
  {
    const double len = a.col(j).norm();
    if (len > 0.0)
    {
      a.col(j) /= len;
    }
  }
}

}  // namespace

MfsSystem assemble(cplx kappa, double n, const MfsLayout &layout, Problem problem, double kernel_scale)
{
  if (kappa == cplx(0.0))
  {
    throw std::invalid_argument("mfs::assemble: kappa must be nonzero");
  }
  disk_ball::RefractiveIndex{n};
  const int m = int(layout.collocation.size());
  const int ms = int(layout.sources.size());
  const int mi = int(layout.interior.size());
  MfsSystem sys{kappa, n, problem, {}, 0};
  if (problem == Problem::Dirichlet)
  {
    sys.boundary_rows = m;
    sys.matrix.resize(m + mi, ms);
    for (int j = 0; j < ms; ++j)
    {
      for (int i = 0; i < m; ++i)
      {
        sys.matrix(i, j) = kernel(kappa, layout.collocation[i].point, layout.sources[j], nullptr).value;
      }
      for (int i = 0; i < mi; ++i)
      {
        sys.matrix(m + i, j) = kernel(kappa, layout.interior[i], layout.sources[j], nullptr).value;
      }
    }
  }
  else
  {
    // Rows: v - w, d_nu (v - w) on the boundary, then v and w at the interior nodes.
    const cplx k2 = std::sqrt(n) * kappa;
    sys.boundary_rows = 2 * m;
    sys.matrix = Eigen::MatrixXcd::Zero(2 * m + 2 * mi, 2 * ms);
    for (int j = 0; j < ms; ++j)
    {
      for (int i = 0; i < m; ++i)
      {
        const auto &c = layout.collocation[i];
        const auto v = kernel(kappa, c.point, layout.sources[j], &c.normal);
        const auto w = kernel(k2, c.point, layout.sources[j], &c.normal);
        sys.matrix(i, j) = v.value;
        sys.matrix(i, ms + j) = -w.value;
        sys.matrix(m + i, j) = v.normal_derivative;
        sys.matrix(m + i, ms + j) = -w.normal_derivative;
      }
      for (int i = 0; i < mi; ++i)
      {
        sys.matrix(2 * m + i, j) = kernel(kappa, layout.interior[i], layout.sources[j], nullptr).value;
        sys.matrix(2 * m + mi + i, ms + j) = kernel(k2, layout.interior[i], layout.sources[j], nullptr).value;
      }
    }
  }
  if (!sys.matrix.allFinite())
  {
    throw NumericalError("mfs::assemble: non-finite matrix entries");
  }
  sys.matrix *= kernel_scale;
  normalize_columns(sys.matrix);
  return sys;
}

double smallest_singular_value(const Eigen::MatrixXcd &a)
{
  if (a.size() == 0)
  {
    return 0.0;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  if (svd.info() != Eigen::Success)
  {
    std::ostringstream msg;
    msg << "smallest_singular_value: SVD did not converge on a " << a.rows() << "x" << a.cols() << " matrix";
    throw NumericalError(msg.str());
  }
  const auto &s = svd.singularValues();
  return s(s.size() - 1);
}

double subspace_misfit(const MfsSystem &system)
{
  const auto &a = system.matrix;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success)
  {
    throw NumericalError("subspace_misfit: SVD did not converge");
  }
  const auto &s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > range_cutoff * s(0))
  {
    ++rank;
  }
  if (rank == 0)
  {
    throw NumericalError("subspace_misfit: collocation matrix is numerically zero");
  }
  // Orthonormal basis of the numerical range; the boundary block measures how far the
  // best unit-norm field is from satisfying the boundary conditions.
  const Eigen::MatrixXcd boundary = svd.matrixU().topLeftCorner(system.boundary_rows, rank);
  return smallest_singular_value(boundary);
}

MisfitSample misfit(cplx kappa, double n, const MfsLayout &layout, Problem problem)
{
  return {kappa, subspace_misfit(assemble(kappa, n, layout, problem))};
}

namespace
{

struct Vertex
{
  std::array<double, 2> x;
  double f;
};

template <class F>
std::vector<Vertex> nelder_mead(F &&f, std::array<double, 2> start, double size, double diameter,
                                int max_evaluations, int &evaluations)
{
  std::vector<Vertex> s{{start, f(start)},
                        {{start[0] + size, start[1]}, 0.0},
                        {{start[0], start[1] + size}, 0.0}};
  s[1].f = f(s[1].x);
  s[2].f = f(s[2].x);
  evaluations = 3;
  auto at = [](const std::array<double, 2> &c, const std::array<double, 2> &w, double t)
  { return std::array<double, 2>{c[0] + t * (w[0] - c[0]), c[1] + t * (w[1] - c[1])}; };
  while (evaluations < max_evaluations)
  {
    std::sort(s.begin(), s.end(), [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
    const double spread = std::max(std::hypot(s[1].x[0] - s[0].x[0], s[1].x[1] - s[0].x[1]),
                                   std::hypot(s[2].x[0] - s[0].x[0], s[2].x[1] - s[0].x[1]));
    if (spread < diameter)
    {
      break;
    }
    const std::array<double, 2> c{0.5 * (s[0].x[0] + s[1].x[0]), 0.5 * (s[0].x[1] + s[1].x[1])};
    const auto xr = at(c, s[2].x, -1.0);
    const double fr = f(xr);
    ++evaluations;
    if (fr < s[0].f)
    {
      const auto xe = at(c, s[2].x, -2.0);
      const double fe = f(xe);
      ++evaluations;
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < s[1].f)
    {
      s[2] = {xr, fr};
      continue;
    }
    const bool outside = fr < s[2].f;
    const auto xc = at(c, s[2].x, outside ? -0.5 : 0.5);
    const double fc = f(xc);
    ++evaluations;
    if (fc < std::min(fr, s[2].f))
    {
      s[2] = {xc, fc};
      continue;
    }
    for (int i = 1; i < 3; ++i)
    {
      s[i].x = at(s[0].x, s[i].x, 0.5);
      s[i].f = f(s[i].x);
      ++evaluations;
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
  return s;
}

}  // namespace

rootfind::RootCluster find_ite(double n, const MfsLayout &layout, cplx guess, Problem problem,
                               const FindOptions &options)
{
  auto f = [&](const std::array<double, 2> &x)
  {
    const cplx k(x[0], x[1]);
    if (std::abs(k) < 1e-8)
    {
      return 1.0;
    }
    return subspace_misfit(assemble(k, n, layout, problem, options.kernel_scale));
  };
  int evaluations = 0;
  const auto s = nelder_mead(f, {guess.real(), guess.imag()}, options.simplex, options.diameter,
                             options.max_evaluations, evaluations);
  const cplx best(s[0].x[0], s[0].x[1]);
  if (!(s[0].f < options.accept))
  {
    std::ostringstream msg;
    msg.precision(10);
    msg << "find_ite: minimum " << s[0].f << " at " << best << " is above " << options.accept;
    throw SpuriousMinimum(msg.str(), best, s[0].f);
  }
  const double spread = std::max(std::hypot(s[1].x[0] - s[0].x[0], s[1].x[1] - s[0].x[1]),
                                 std::hypot(s[2].x[0] - s[0].x[0], s[2].x[1] - s[0].x[1]));
  if (!(spread < options.diameter))
  {
    std::vector<cplx> trace;
    for (const auto &v : s)
    {
      trace.push_back(cplx(v.x[0], v.x[1]));
    }
    throw rootfind::NoConvergence("find_ite: simplex did not contract within the evaluation budget", trace);
  }
  return {best, 1, s[0].f};
}

rootfind::RootCluster find_ide(const MfsLayout &layout, double guess, const FindOptions &options)
{
  auto f = [&](double k)
  { return subspace_misfit(assemble(cplx(k, 0.0), 2.0, layout, Problem::Dirichlet, options.kernel_scale)); };
  const double half = 0.5, h = 0.01;
  double best = guess, fbest = f(guess);
  for (double k = std::max(guess - half, 1e-3); k <= guess + half + 1e-12; k += h)
  {
    const double v = f(k);
    if (v < fbest)
    {
      best = k;
      fbest = v;
    }
  }
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, best - h, best + h, 50);
  if (!(fx < options.accept))
  {
    std::ostringstream msg;
    msg.precision(10);
    msg << "find_ide: minimum " << fx << " at " << x << " is above " << options.accept;
    throw SpuriousMinimum(msg.str(), cplx(x, 0.0), fx);
  }
  return {cplx(x, 0.0), 1, fx};
}

MfsTrajectory run_trajectory(const MfsLayout &layout, cplx seed, const RunOptions &options, const std::string &tag)
{
  MfsTrajectory out{{}, false, {}};
  out.trajectory.scatterer = tag;
  const double dir = options.n_end >= options.n_start ? 1.0 : -1.0;
  double n = options.n_start;
  cplx guess = seed;
  double h = options.step;
  int halvings = 0;
  bool first = true;
  while (true)
  {
    try
    {
      const auto r = find_ite(n, layout, guess, Problem::Transmission, options.find);
      if (!first && std::abs(r.location - guess) > 0.5)
      {
        throw SpuriousMinimum("run_trajectory: minimizer jumped to another eigenvalue", r.location, r.residual);
      }
      out.trajectory.points.push_back({n, r.location, r.residual, std::nullopt});
      guess = r.location;
      first = false;
      halvings = 0;
      h = options.step;
    }
    catch (const std::runtime_error &e)
    {
      if (first || halvings >= options.max_halvings)
      {
        std::ostringstream msg;
        msg.precision(17);
        msg << "n = " << n << ": " << e.what();
        out.failure = msg.str();
        return out;
      }
      ++halvings;
      h *= 0.5;
      n = out.trajectory.points.back().n;
    }
    if (dir * (options.n_end - n) <= 1e-12)
    {
      out.complete = true;
      return out;
    }
    n = dir * (options.n_end - n) < h ? options.n_end : n + dir * h;
  }
}

}  // namespace itetraj::mfs
