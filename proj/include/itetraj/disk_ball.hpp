// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_DISK_BALL_HPP
#define ITETRAJ_DISK_BALL_HPP

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "itetraj/specfun.hpp"

namespace itetraj::disk_ball
{

using cplx = std::complex<double>;

// Fourier-Bessel order p >= 0.
struct ModeIndex
{
  int p;
  explicit ModeIndex(int order);
};

// Constant index of refraction n > 0, n != 1.
struct RefractiveIndex
{
  double n;
  explicit RefractiveIndex(double value);
};

// Nonzero complex wave number.
struct WaveNumber
{
  cplx kappa;
  explicit WaveNumber(cplx value);
};

struct EigenCoefficient
{
  cplx alpha;
};

// Determinant value with its analytic kappa-derivative.
struct DetEval
{
  cplx value;
  cplx dkappa;
};

// A documented precondition of an operation does not hold.
class ContractError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

// Velocity requested where J_p(kappa) vanishes: the trajectory is at an IDE and the
// cube-root local model must be used instead.
class NearIdeSignal : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class SingularCoefficientError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// F_p(kappa, n) = kappa (J'_p(kappa) J_p(sqrt(n) kappa) - sqrt(n) J_p(kappa) J'_p(sqrt(n) kappa)).
cplx det_disk(ModeIndex p, WaveNumber kappa, RefractiveIndex n);
DetEval det_disk_pair(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// f_p(kappa, n) with spherical Bessel functions (unit ball).
cplx det_ball(ModeIndex p, WaveNumber kappa, RefractiveIndex n);
DetEval det_ball_pair(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// d/dkappa F_p = (n - 1) kappa J_p(kappa) J_p(sqrt(n) kappa). Exact, not only on roots.
cplx det_dkappa(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// d/dn F_p at a root kappa_n of F_p(., n). Throws ContractError off the zero set.
cplx det_dn(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// Continuation slope d kappa / dn along a root. Throws NearIdeSignal when
// |J_p(kappa)| <= 1e-12.
cplx velocity(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// alpha = J'_p(kappa) / (sqrt(n) J'_p(sqrt(n) kappa)).
EigenCoefficient alpha_coefficient(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// Dirichlet and Neumann mismatch of (v, w) = (J_p(kappa r), alpha J_p(sqrt(n) kappa r)) at r = 1.
std::pair<cplx, cplx> boundary_mismatch(ModeIndex p, WaveNumber kappa, RefractiveIndex n,
                                        EigenCoefficient alpha);

// Integral over the unit disk of |v|^2 - n |w|^2 for the eigenfunction pair of a root
// kappa_n. Throws ContractError if kappa is not a root.
cplx energy_mismatch(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// Integral of |v|^2 + n |w|^2, the normalization for energy_mismatch.
double energy_norm(ModeIndex p, WaveNumber kappa, RefractiveIndex n);

// Residuals of the order-q pairs (J_q(kappa r), alpha sqrt(n) J_q(sqrt(n) kappa r)) with
// q in {p-1, p+1} (q = 1 for p = 0) at a point where J_p(kappa) = J_p(sqrt(n) kappa) = 0.
struct NeighbourPairResidual
{
  int q;
  cplx dirichlet;
  cplx neumann;
};
std::vector<NeighbourPairResidual> neighbour_pair_residuals(ModeIndex p, WaveNumber kappa,
                                                            RefractiveIndex n);

enum class Dimension
{
  Disk,
  Ball
};

// Determinant of one Fourier-Bessel mode, in the form consumed by trajectory continuation.
class ModeDeterminant
{
public:
  ModeDeterminant(Dimension dim, int p);

  Dimension dimension() const { return dim_; }
  int mode() const { return p_; }

  DetEval evaluate(cplx kappa, double n) const;
  cplx value(cplx kappa, double n) const { return evaluate(kappa, n).value; }

  // Partial derivative in n, valid away from the zero set as well.
  cplx dn(cplx kappa, double n) const;

  // Size of the two products forming the determinant, for residual normalization.
  double scale(cplx kappa, double n) const;

  // J_p (disk) or j_p (ball); its roots are the Dirichlet eigenvalues of this mode.
  specfun::BesselEval radial(cplx x) const;

  std::vector<double> dirichlet_roots(int count) const;

  // Coefficient c of the local model (kappa - kappa*)^3 ~ c (n - n*) at a triple root.
  static double cube_coefficient(double kappa_star, double n_star);

private:
  Dimension dim_;
  int p_;
};

}  // namespace itetraj::disk_ball

#endif  // ITETRAJ_DISK_BALL_HPP
