// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_SPECFUN_HPP
#define ITETRAJ_SPECFUN_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace itetraj::specfun
{

using cplx = std::complex<double>;

// Evaluation window shared by all routines.
inline constexpr int max_order = 60;
inline constexpr double max_argument = 500.0;
// Hankel functions lose relative accuracy through J + iY cancellation far below the axis.
inline constexpr double hankel_min_imag = -5.0;

class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

// Value and first derivative of a Bessel-type function of integer order.
struct BesselEval
{
  int order = 0;
  cplx argument{};
  cplx value{};
  cplx derivative{};
};

// Cylindrical Bessel function of the first kind J_p(z) and J'_p(z).
// Maclaurin series for |z| <= 4, normalized Miller recurrence beyond.
BesselEval bessel_j(int p, cplx z);

// Spherical Bessel function j_p(z) = sqrt(pi / 2z) J_{p+1/2}(z) and its derivative.
BesselEval spherical_j(int p, cplx z);

// Hankel function of the first kind H^(1)_p(z) = J_p(z) + i Y_p(z).
BesselEval hankel1(int p, cplx z);

// First `count` positive roots of J_p in ascending order.
std::vector<double> bessel_real_roots(int p, int count);

// First `count` positive roots of j_p in ascending order.
std::vector<double> spherical_real_roots(int p, int count);

namespace detail
{

// J_0(z), ..., J_pmax(z).
std::vector<cplx> bessel_j_sequence(int pmax, cplx z);

// Bessel function of the second kind. Used by hankel1 and the MFS kernel only.
BesselEval bessel_y(int p, cplx z);

}  // namespace detail

}  // namespace itetraj::specfun

#endif  // ITETRAJ_SPECFUN_HPP
