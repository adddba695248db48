// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_MFS_HPP
#define ITETRAJ_MFS_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "itetraj/geometry.hpp"
#include "itetraj/rootfind.hpp"
#include "itetraj/trajectory.hpp"

namespace itetraj::mfs
{

using cplx = std::complex<double>;

enum class Problem
{
  Transmission,
  Dirichlet
};

// Collocation matrix. The first boundary_rows rows hold the boundary conditions, the
// remaining rows the field values at the interior nodes.
struct MfsSystem
{
  cplx kappa;
  double n;
  Problem problem;
  Eigen::MatrixXcd matrix;
  int boundary_rows;
};

struct MisfitSample
{
  cplx kappa;
  double value;
};

class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// The minimizer converged to a point whose misfit is above the acceptance threshold.
class SpuriousMinimum : public std::runtime_error
{
public:
  SpuriousMinimum(const std::string &what, cplx location, double value)
    : std::runtime_error(what), location(location), value(value)
  {
  }
  cplx location;
  double value;
};

// Fields are expanded in Y_0(k |x - y_j|) over the exterior sources, with k = kappa for
// v and sqrt(n) kappa for w. Columns are scaled to unit length; kernel_scale multiplies
// every entry and exists for invariance checks.
MfsSystem assemble(cplx kappa, double n, const geometry::MfsLayout &layout, Problem problem,
                   double kernel_scale = 1.0);

// Smallest of the min(rows, cols) singular values of a dense complex matrix.
double smallest_singular_value(const Eigen::MatrixXcd &a);

// sigma_min of the boundary block of an orthonormal basis of the numerical range of matrix.
double subspace_misfit(const MfsSystem &system);

MisfitSample misfit(cplx kappa, double n, const geometry::MfsLayout &layout, Problem problem);

struct FindOptions
{
  double simplex = 0.05;
  double accept = 1e-4;
  double diameter = 1e-8;
  int max_evaluations = 1500;
  double kernel_scale = 1.0;
};

// Nelder-Mead over (Re kappa, Im kappa).
rootfind::RootCluster find_ite(double n, const geometry::MfsLayout &layout, cplx guess,
                               Problem problem = Problem::Transmission, const FindOptions &options = {});

// Grid search on the real line around guess, then Brent minimization.
rootfind::RootCluster find_ide(const geometry::MfsLayout &layout, double guess, const FindOptions &options = {});

struct RunOptions
{
  double n_start = 4.0;
  double n_end = 32.0;
  double step = 0.25;
  int max_halvings = 4;
  FindOptions find;
};

// Trajectory from seed at n_start, re-seeding each n with the previous eigenvalue. Stops
// early if the step cannot be halved further; `complete` reports whether n_end was reached.
struct MfsTrajectory
{
  trajectory::Trajectory trajectory;
  bool complete;
  std::string failure;
};

MfsTrajectory run_trajectory(const geometry::MfsLayout &layout, cplx seed, const RunOptions &options = {},
                             const std::string &tag = {});

}  // namespace itetraj::mfs

#endif  // ITETRAJ_MFS_HPP
