// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_ROOTFIND_HPP
#define ITETRAJ_ROOTFIND_HPP

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace itetraj::rootfind
{

using cplx = std::complex<double>;

struct ValueAndDerivative
{
  cplx value;
  cplx derivative;
};

// A holomorphic scalar function, with an analytic derivative when one is available.
// Without one, f' comes from a 4-point holomorphic central difference of step 1e-3 * scale.
class Holomorphic
{
public:
  explicit Holomorphic(std::function<ValueAndDerivative(cplx)> with_derivative);
  Holomorphic(std::function<cplx(cplx)> value_only, double scale);

  ValueAndDerivative operator()(cplx z) const;
  cplx value(cplx z) const;

private:
  std::function<ValueAndDerivative(cplx)> pair_;
  std::function<cplx(cplx)> value_;
  double step_ = 0.0;
};

// Axis-aligned rectangle traversed counterclockwise.
struct ContourBox
{
  cplx center;
  double half_width;
  double half_height;
  int quadrature_nodes = 512;

  bool contains(cplx z) const;
  // 2x2 partition around center + offset.
  std::array<ContourBox, 4> split(cplx offset = 0.0) const;
};

struct RootCluster
{
  cplx location;
  int multiplicity = 1;
  double residual = 0.0;
};

struct CountResult
{
  int count = 0;
  double raw = 0.0;                  // real part of the quadrature value
  double distance_to_integer = 0.0;  // |raw - count|
  int nodes_used = 0;
};

// The function is too small somewhere on the contour, or the quadrature did not resolve
// the winding number; perturb the box and retry.
class ContourError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Moment extraction was ill-conditioned or failed verification; split the box.
class SubdivisionRequest : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error
{
public:
  NoConvergence(const std::string &what, std::vector<cplx> trace)
    : std::runtime_error(what), trace(std::move(trace))
  {
  }
  std::vector<cplx> trace;
};

inline constexpr int max_cluster = 8;

// Argument principle N = (1 / 2 pi i) \oint f'/f. Node count is doubled (up to 32x)
// until the value is within 0.25 of an integer.
CountResult count_roots(const Holomorphic &f, const ContourBox &box);

// Roots inside the box from the moments s_k = (1 / 2 pi i) \oint z^k f'/f dz via a
// Hankel pencil, then Newton-polished. Multiplicities sum to expected_count.
std::vector<RootCluster> locate_roots(const Holomorphic &f, const ContourBox &box, int expected_count);

// Newton iteration from `guess`. Linear convergence is detected and reported as a
// multiplicity estimate, after which the multiplicity-corrected step is used.
RootCluster newton_polish(const Holomorphic &f, cplx guess, double tol);

// All roots in the box, subdividing whenever a box holds more than max_cluster roots
// or locate_roots asks for it.
std::vector<RootCluster> find_roots(const Holomorphic &f, const ContourBox &box, int max_depth = 10);

}  // namespace itetraj::rootfind

#endif  // ITETRAJ_ROOTFIND_HPP
