// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "itetraj/quadrature.hpp"

namespace itetraj::rootfind
{

using namespace std::complex_literals;

Holomorphic::Holomorphic(std::function<ValueAndDerivative(cplx)> with_derivative)
  : pair_(std::move(with_derivative))
{
}

Holomorphic::Holomorphic(std::function<cplx(cplx)> value_only, double scale)
  : value_(std::move(value_only)), step_(1e-3 * scale)
{
}

ValueAndDerivative Holomorphic::operator()(cplx z) const
{
  if (pair_)
  {
    return pair_(z);
  }
  // sum_k i^{-k} f(z + h i^k) / 4h = f'(z) + O(h^4).
  const double h = step_;
  const cplx d = (value_(z + h) - 1i * value_(z + 1i * h) - value_(z - h) + 1i * value_(z - 1i * h)) /
                 (4.0 * h);
  return {value_(z), d};
}

cplx Holomorphic::value(cplx z) const
{
  return pair_ ? pair_(z).value : value_(z);
}

bool ContourBox::contains(cplx z) const
{
  return std::abs(z.real() - center.real()) < half_width &&
         std::abs(z.imag() - center.imag()) < half_height;
}

std::array<ContourBox, 4> ContourBox::split(cplx offset) const
{
  const double x0 = center.real() - half_width, x1 = center.real() + half_width;
  const double y0 = center.imag() - half_height, y1 = center.imag() + half_height;
  const double xm = center.real() + offset.real(), ym = center.imag() + offset.imag();
  auto make = [&](double a, double b, double c, double d)
  {
    return ContourBox{cplx(0.5 * (a + b), 0.5 * (c + d)), 0.5 * (b - a), 0.5 * (d - c),
                      quadrature_nodes};
  };
  return {make(x0, xm, y0, ym), make(xm, x1, y0, ym), make(x0, xm, ym, y1), make(xm, x1, ym, y1)};
}

namespace
{

// Quadrature data on the contour: scaled abscissae and the weights of f'/f dz / (2 pi i).
struct ContourSample
{
  std::vector<cplx> w;
  std::vector<cplx> q;
  double radius;
};

ContourSample sample_contour(const Holomorphic &f, const ContourBox &box, int nodes)
{
  const int per_edge = std::max(4, nodes / 4);
  const auto rule = quadrature::gauss_legendre(per_edge, 0.0, 1.0);
  const double hw = box.half_width, hh = box.half_height;
  const cplx c = box.center;
  const std::array<cplx, 5> corners = {c + cplx(-hw, -hh), c + cplx(hw, -hh), c + cplx(hw, hh),
                                       c + cplx(-hw, hh), c + cplx(-hw, -hh)};
  ContourSample out{{}, {}, std::max(hw, hh)};
  out.w.reserve(4 * per_edge);
  out.q.reserve(4 * per_edge);
  double fmin = std::numeric_limits<double>::infinity(), fmax = 0.0;
  for (int e = 0; e < 4; ++e)
  {
    const cplx a = corners[e], dz = corners[e + 1] - corners[e];
    for (int j = 0; j < per_edge; ++j)
    {
      const cplx z = a + rule.nodes[j] * dz;
      const auto fv = f(z);
      const double mag = std::abs(fv.value);
      if (!std::isfinite(mag) || !std::isfinite(std::abs(fv.derivative)))
      {
        throw ContourError("non-finite function value on the contour");
      }
      fmin = std::min(fmin, mag);
      fmax = std::max(fmax, mag);
      out.w.push_back((z - c) / out.radius);
      out.q.push_back(rule.weights[j] * dz * fv.derivative / fv.value / (2.0i * std::numbers::pi));
    }
  }
  if (!(fmin > 1e-12 * fmax))
  {
    throw ContourError("contour passes too close to a root");
  }
  return out;
}

std::vector<cplx> moments(const ContourSample &s, int count)
{
  std::vector<cplx> mu(count, cplx(0.0));
  for (std::size_t j = 0; j < s.w.size(); ++j)
  {
    cplx wk = 1.0;
    for (int k = 0; k < count; ++k)
    {
      mu[k] += s.q[j] * wk;
      wk *= s.w[j];
    }
  }
  return mu;
}

double moment_mismatch(const std::vector<cplx> &mu, const std::vector<cplx> &scaled,
                       const std::vector<int> &mult)
{
  double worst = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k)
  {
    cplx s = 0.0;
    for (std::size_t j = 0; j < scaled.size(); ++j)
    {
      s += double(mult[j]) * std::pow(scaled[j], int(k));
    }
    worst = std::max(worst, std::abs(s - mu[k]) / std::max(1.0, std::abs(mu[k])));
  }
  return worst;
}

}  // namespace

CountResult count_roots(const Holomorphic &f, const ContourBox &box)
{
  int nodes = box.quadrature_nodes;
  for (int attempt = 0; attempt < 6; ++attempt, nodes *= 2)
  {
    const auto s = sample_contour(f, box, nodes);
    cplx raw = 0.0;
    for (const auto &q : s.q)
    {
      raw += q;
    }
    const double nearest = std::round(raw.real());
    const double dist = std::abs(raw - nearest);
    if (dist < 1e-3 || (attempt == 5 && dist < 0.25))
    {
      return {int(std::max(0.0, nearest)), raw.real(), dist, nodes};
    }
  }
  throw ContourError("argument principle quadrature did not resolve an integer");
}

std::vector<RootCluster> locate_roots(const Holomorphic &f, const ContourBox &box, int expected_count)
{
  if (expected_count > max_cluster)
  {
    throw SubdivisionRequest("more than " + std::to_string(max_cluster) + " roots in one box");
  }
  const auto counted = count_roots(f, box);
  if (counted.count != expected_count)
  {
    throw std::invalid_argument("locate_roots: box holds " + std::to_string(counted.count) +
                                " roots, expected " + std::to_string(expected_count));
  }
  const int N = expected_count;
  if (N == 0)
  {
    return {};
  }
  // Refine until the moments themselves settle, not just their zeroth member.
  int nodes = counted.nodes_used;
  auto s = sample_contour(f, box, nodes);
  auto mu = moments(s, 2 * N + 1);
  for (int attempt = 0; attempt < 5; ++attempt)
  {
    nodes *= 2;
    auto finer = sample_contour(f, box, nodes);
    auto mu_finer = moments(finer, 2 * N + 1);
    double change = 0.0;
    for (int k = 0; k <= 2 * N; ++k)
    {
      change = std::max(change, std::abs(mu_finer[k] - mu[k]) / std::max(1.0, std::abs(mu_finer[k])));
    }
    s = std::move(finer);
    mu = std::move(mu_finer);
    if (change < 1e-12)
    {
      break;
    }
  }
  // Recenter on the root centroid and rescale by the root spread to condition the pencil.
  const cplx shift = mu[1] / mu[0];
  const double spread = std::max(std::sqrt(2.0 * std::abs(mu[2] / mu[0] - shift * shift)), 0.25);
  for (auto &w : s.w)
  {
    w = (w - shift) / spread;
  }
  mu = moments(s, 2 * N + 1);
  const auto to_plane = [&](cplx w) { return box.center + s.radius * (shift + spread * w); };
  const auto from_plane = [&](cplx z) { return ((z - box.center) / s.radius - shift) / spread; };

  Eigen::MatrixXcd H0(N, N), H1(N, N);
  for (int i = 0; i < N; ++i)
  {
    for (int j = 0; j < N; ++j)
    {
      H0(i, j) = mu[i + j];
      H1(i, j) = mu[i + j + 1];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  int rank = 0;
  while (rank < N && sv(rank) > 1e-9 * sv(0))
  {
    ++rank;
  }
  if (rank == 0)
  {
    throw SubdivisionRequest("degenerate moment matrix");
  }
  const Eigen::MatrixXcd Ur = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXcd Vr = svd.matrixV().leftCols(rank);
  const Eigen::VectorXd inv = sv.head(rank).cwiseInverse();
  const Eigen::MatrixXcd pencil = Ur.adjoint() * H1 * Vr * inv.asDiagonal();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(pencil);
  std::vector<cplx> scaled(rank);
  for (int j = 0; j < rank; ++j)
  {
    scaled[j] = eig.eigenvalues()(j);
  }

  // Multiplicities from the Vandermonde system over all available moments.
  const int rows = 2 * N;
  Eigen::MatrixXcd V(rows, rank);
  Eigen::VectorXcd rhs(rows);
  for (int k = 0; k < rows; ++k)
  {
    rhs(k) = mu[k];
    for (int j = 0; j < rank; ++j)
    {
      V(k, j) = std::pow(scaled[j], k);
    }
  }
  const Eigen::VectorXcd m = V.colPivHouseholderQr().solve(rhs);
  std::vector<int> mult(rank);
  int total = 0;
  for (int j = 0; j < rank; ++j)
  {
    mult[j] = int(std::lround(m(j).real()));
    if (mult[j] < 1 || std::abs(m(j) - double(mult[j])) > 0.1)
    {
      throw SubdivisionRequest("non-integer multiplicity in moment extraction");
    }
    total += mult[j];
  }
  if (total != N)
  {
    throw SubdivisionRequest("multiplicities do not add up to the root count");
  }

  // Multiplicity-corrected Newton from each extracted location.
  std::vector<cplx> polished(rank);
  for (int j = 0; j < rank; ++j)
  {
    const cplx start = to_plane(scaled[j]);
    cplx z = start;
    for (int it = 0; it < 30; ++it)
    {
      const auto fv = f(z);
      if (fv.value == cplx(0.0) || fv.derivative == cplx(0.0))
      {
        break;
      }
      const cplx step = double(mult[j]) * fv.value / fv.derivative;
      if (!std::isfinite(std::abs(step)))
      {
        break;
      }
      z -= step;
      if (!box.contains(z))
      {
        break;
      }
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z)))
      {
        break;
      }
    }
    const bool sane = std::isfinite(std::abs(z)) && box.contains(z) &&
                      std::abs(z - start) < 1e-3 * s.radius * spread;
    polished[j] = sane ? z : start;
  }
  std::vector<cplx> polished_scaled(rank);
  for (int j = 0; j < rank; ++j)
  {
    polished_scaled[j] = from_plane(polished[j]);
  }
  const double err_polished = moment_mismatch(mu, polished_scaled, mult);
  const double err_raw = moment_mismatch(mu, scaled, mult);
  if (std::min(err_polished, err_raw) > 1e-8)
  {
    throw SubdivisionRequest("extracted roots do not reproduce the contour moments");
  }
  const bool use_polished = err_polished <= 1e-8 || err_polished <= err_raw;
  std::vector<RootCluster> out;
  for (int j = 0; j < rank; ++j)
  {
    const cplx z = use_polished ? polished[j] : to_plane(scaled[j]);
    out.push_back({z, mult[j], std::abs(f.value(z))});
  }
  std::sort(out.begin(), out.end(),
            [](const RootCluster &a, const RootCluster &b)
            {
              return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                            : a.location.imag() < b.location.imag();
            });
  return out;
}

RootCluster newton_polish(const Holomorphic &f, cplx guess, double tol)
{
  std::vector<cplx> trace{guess};
  cplx z = guess;
  auto fv = f(z);
  double first = std::abs(fv.value);
  int multiplicity = 1;
  double prev_step = 0.0;
  int steady = 0;
  double ratio_prev = 0.0;
  for (int it = 0; it < 50; ++it)
  {
    if (std::abs(fv.value) < tol)
    {
      return {z, multiplicity, std::abs(fv.value)};
    }
    if (fv.derivative == cplx(0.0))
    {
      throw NoConvergence("newton_polish: vanishing derivative", trace);
    }
    const cplx step = double(multiplicity) * fv.value / fv.derivative;
    z -= step;
    trace.push_back(z);
    if (!std::isfinite(std::abs(z)))
    {
      throw NoConvergence("newton_polish: iterate diverged", trace);
    }
    fv = f(z);
    if (it == 2 && !(std::abs(fv.value) < first))
    {
      throw NoConvergence("newton_polish: |f| did not decrease over the first iterations", trace);
    }
    // Linear convergence with ratio (m-1)/m reveals a root of multiplicity m.
    const double size = std::abs(step);
    if (multiplicity == 1 && prev_step > 0.0)
    {
      const double ratio = size / prev_step;
      if (ratio > 0.3 && ratio < 0.95 && std::abs(ratio - ratio_prev) < 0.02)
      {
        ++steady;
      }
      else
      {
        steady = 0;
      }
      ratio_prev = ratio;
      if (steady >= 3)
      {
        multiplicity = std::max(2, int(std::lround(1.0 / (1.0 - ratio))));
      }
    }
    prev_step = size;
    if (size <= 1e-16 * std::max(1.0, std::abs(z)))
    {
      break;
    }
  }
  return {z, multiplicity, std::abs(fv.value)};
}

namespace
{

std::vector<RootCluster> find_in(const Holomorphic &f, const ContourBox &box, const CountResult &count,
                                 int depth)
{
  if (count.count == 0)
  {
    return {};
  }
  if (count.count <= max_cluster)
  {
    try
    {
      return locate_roots(f, box, count.count);
    }
    catch (const SubdivisionRequest &)
    {
      if (depth == 0)
      {
        throw;
      }
    }
  }
  else if (depth == 0)
  {
    throw SubdivisionRequest("subdivision depth exhausted");
  }
  // Slightly off-center split lines avoid roots sitting on symmetry axes.
  static constexpr std::array<std::pair<double, double>, 5> offsets = {
      {{0.0137, -0.0091}, {-0.0291, 0.0213}, {0.0433, 0.0377}, {-0.0611, -0.0527}, {0.0, 0.0}}};
  for (const auto &[ox, oy] : offsets)
  {
    const auto children = box.split(cplx(ox * box.half_width, oy * box.half_height));
    std::array<CountResult, 4> counts;
    try
    {
      int sum = 0;
      for (int i = 0; i < 4; ++i)
      {
        counts[i] = count_roots(f, children[i]);
        sum += counts[i].count;
      }
      if (sum != count.count)
      {
        continue;
      }
    }
    catch (const ContourError &)
    {
      continue;
    }
    std::vector<RootCluster> out;
    for (int i = 0; i < 4; ++i)
    {
      auto part = find_in(f, children[i], counts[i], depth - 1);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw ContourError("no admissible subdivision found");
}

}  // namespace

std::vector<RootCluster> find_roots(const Holomorphic &f, const ContourBox &box, int max_depth)
{
  auto out = find_in(f, box, count_roots(f, box), max_depth);
  std::sort(out.begin(), out.end(),
            [](const RootCluster &a, const RootCluster &b)
            {
              return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                            : a.location.imag() < b.location.imag();
            });
  return out;
}

}  // namespace itetraj::rootfind
