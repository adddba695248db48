// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/disk_ball.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "itetraj/quadrature.hpp"

namespace itetraj::disk_ball
{

namespace
{

constexpr int radial_nodes = 200;
constexpr double root_tolerance = 1e-10;

struct Products
{
  specfun::BesselEval inner;  // at kappa
  specfun::BesselEval outer;  // at sqrt(n) kappa
  double root_n;
};

Products disk_products(int p, cplx kappa, double n)
{
  const double rn = std::sqrt(n);
  return {specfun::bessel_j(p, kappa), specfun::bessel_j(p, rn * kappa), rn};
}

Products ball_products(int p, cplx kappa, double n)
{
  const double rn = std::sqrt(n);
  return {specfun::spherical_j(p, kappa), specfun::spherical_j(p, rn * kappa), rn};
}

cplx det_from(const Products &b, cplx kappa)
{
  return kappa * (b.inner.derivative * b.outer.value - b.root_n * b.inner.value * b.outer.derivative);
}

double scale_from(const Products &b, cplx kappa)
{
  // Product of the Cauchy-data sizes; stays nonzero where both products vanish.
  return std::abs(kappa) * std::max(std::abs(b.inner.value), std::abs(b.inner.derivative)) *
         std::max(std::abs(b.outer.value), b.root_n * std::abs(b.outer.derivative));
}

void require_root(const Products &b, cplx kappa, double tol, const char *who)
{
  const double res = std::abs(det_from(b, kappa));
  if (res > tol * std::max(scale_from(b, kappa), 1e-300))
  {
    throw ContractError(std::string(who) + ": kappa is not a root of the determinant (relative residual " +
                        std::to_string(res / scale_from(b, kappa)) + ")");
  }
}

double angular_factor(int p)
{
  return p == 0 ? 2.0 * std::numbers::pi : std::numbers::pi;
}

}  // namespace

ModeIndex::ModeIndex(int order) : p(order)
{
  if (order < 0)
  {
    throw std::invalid_argument("ModeIndex: order must be nonnegative");
  }
}

RefractiveIndex::RefractiveIndex(double value) : n(value)
{
  if (!(value > 0.0) || std::abs(value - 1.0) <= 1e-12)
  {
    throw std::invalid_argument("RefractiveIndex: need n > 0 and n != 1");
  }
}

WaveNumber::WaveNumber(cplx value) : kappa(value)
{
  if (std::abs(value) == 0.0)
  {
    throw std::invalid_argument("WaveNumber: kappa must be nonzero");
  }
}

cplx det_disk(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  return det_from(disk_products(p.p, kappa.kappa, n.n), kappa.kappa);
}

DetEval det_disk_pair(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const auto b = disk_products(p.p, kappa.kappa, n.n);
  return {det_from(b, kappa.kappa), (n.n - 1.0) * kappa.kappa * b.inner.value * b.outer.value};
}

cplx det_ball(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  return det_from(ball_products(p.p, kappa.kappa, n.n), kappa.kappa);
}

DetEval det_ball_pair(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const auto b = ball_products(p.p, kappa.kappa, n.n);
  const cplx f = det_from(b, kappa.kappa);
  // The spherical equation leaves an extra -f / kappa compared to the disk.
  return {f, (n.n - 1.0) * kappa.kappa * b.inner.value * b.outer.value - f / kappa.kappa};
}

cplx det_dkappa(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  return det_disk_pair(p, kappa, n).dkappa;
}

cplx det_dn(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const auto b = disk_products(p.p, kappa.kappa, n.n);
  require_root(b, kappa.kappa, root_tolerance, "det_dn");
  const cplx k = kappa.kappa;
  const double pp = double(p.p) * p.p;
  return (n.n * k * k - pp) / (2.0 * n.n) * b.inner.value * b.outer.value +
         k * k / (2.0 * b.root_n) * b.inner.derivative * b.outer.derivative;
}

cplx velocity(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const cplx k = kappa.kappa;
  const auto J = specfun::bessel_j(p.p, k);
  if (std::abs(J.value) <= 1e-12)
  {
    throw NearIdeSignal("velocity: J_p(kappa) vanishes, trajectory is at a Dirichlet eigenvalue");
  }
  const double nn = n.n;
  const double pp = double(p.p) * p.p;
  const cplx ratio = J.derivative / J.value;
  return -(nn * k * k - pp) / (2.0 * nn * (nn - 1.0) * k) - k * ratio * ratio / (2.0 * nn * (nn - 1.0));
}

EigenCoefficient alpha_coefficient(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const auto b = disk_products(p.p, kappa.kappa, n.n);
  const cplx denom = b.root_n * b.outer.derivative;
  if (std::abs(denom) <= 1e-12)
  {
    throw SingularCoefficientError("alpha_coefficient: J'_p(sqrt(n) kappa) vanishes");
  }
  return {b.inner.derivative / denom};
}

std::pair<cplx, cplx> boundary_mismatch(ModeIndex p, WaveNumber kappa, RefractiveIndex n,
                                        EigenCoefficient alpha)
{
  const auto b = disk_products(p.p, kappa.kappa, n.n);
  const cplx k = kappa.kappa;
  return {b.inner.value - alpha.alpha * b.outer.value,
          k * b.inner.derivative - alpha.alpha * b.root_n * k * b.outer.derivative};
}

namespace
{

// Radial integrals of |J_p(kappa r)|^2 r and |J_p(sqrt(n) kappa r)|^2 r over [0, 1].
std::pair<double, double> radial_integrals(int p, cplx kappa, double n)
{
  static const auto rule = quadrature::gauss_legendre(radial_nodes, 0.0, 1.0);
  const double rn = std::sqrt(n);
  double iv = 0.0, iw = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
  {
    const double r = rule.nodes[i];
    const double w = rule.weights[i] * r;
    iv += w * std::norm(specfun::bessel_j(p, kappa * r).value);
    iw += w * std::norm(specfun::bessel_j(p, rn * kappa * r).value);
  }
  return {iv, iw};
}

}  // namespace

cplx energy_mismatch(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const auto b = disk_products(p.p, kappa.kappa, n.n);
  require_root(b, kappa.kappa, 1e-8, "energy_mismatch");
  const cplx alpha = alpha_coefficient(p, kappa, n).alpha;
  const auto [iv, iw] = radial_integrals(p.p, kappa.kappa, n.n);
  return angular_factor(p.p) * (iv - n.n * std::norm(alpha) * iw);
}

double energy_norm(ModeIndex p, WaveNumber kappa, RefractiveIndex n)
{
  const cplx alpha = alpha_coefficient(p, kappa, n).alpha;
  const auto [iv, iw] = radial_integrals(p.p, kappa.kappa, n.n);
  return angular_factor(p.p) * (iv + n.n * std::norm(alpha) * iw);
}

std::vector<NeighbourPairResidual> neighbour_pair_residuals(ModeIndex p, WaveNumber kappa,
                                                            RefractiveIndex n)
{
  const cplx k = kappa.kappa;
  const double rn = std::sqrt(n.n);
  if (std::abs(specfun::bessel_j(p.p, k).value) > 1e-9 ||
      std::abs(specfun::bessel_j(p.p, rn * k).value) > 1e-9)
  {
    throw ContractError("neighbour_pair_residuals: need J_p(kappa) = J_p(sqrt(n) kappa) = 0");
  }
  const cplx alpha = alpha_coefficient(p, kappa, n).alpha;
  std::vector<int> orders;
  if (p.p == 0)
  {
    orders = {1};
  }
  else
  {
    orders = {p.p - 1, p.p + 1};
  }
  std::vector<NeighbourPairResidual> out;
  for (int q : orders)
  {
    const auto a = specfun::bessel_j(q, k);
    const auto b = specfun::bessel_j(q, rn * k);
    out.push_back({q, a.value - alpha * rn * b.value, a.derivative - alpha * n.n * b.derivative});
  }
  return out;
}

ModeDeterminant::ModeDeterminant(Dimension dim, int p) : dim_(dim), p_(ModeIndex(p).p) {}

DetEval ModeDeterminant::evaluate(cplx kappa, double n) const
{
  return dim_ == Dimension::Disk
             ? det_disk_pair(ModeIndex(p_), WaveNumber(kappa), RefractiveIndex(n))
             : det_ball_pair(ModeIndex(p_), WaveNumber(kappa), RefractiveIndex(n));
}

cplx ModeDeterminant::dn(cplx kappa, double n) const
{
  const auto b = dim_ == Dimension::Disk ? disk_products(p_, kappa, n) : ball_products(p_, kappa, n);
  const double rn = b.root_n;
  if (dim_ == Dimension::Disk)
  {
    const double pp = double(p_) * p_;
    return (n * kappa * kappa - pp) / (2.0 * n) * b.inner.value * b.outer.value +
           kappa * kappa / (2.0 * rn) * b.inner.derivative * b.outer.derivative;
  }
  const double ll = double(p_) * (p_ + 1);
  return (n * kappa * kappa - ll) / (2.0 * n) * b.inner.value * b.outer.value +
         kappa * kappa / (2.0 * rn) * b.inner.derivative * b.outer.derivative +
         kappa / (2.0 * rn) * b.inner.value * b.outer.derivative;
}

double ModeDeterminant::scale(cplx kappa, double n) const
{
  const auto b = dim_ == Dimension::Disk ? disk_products(p_, kappa, n) : ball_products(p_, kappa, n);
  return scale_from(b, kappa);
}

specfun::BesselEval ModeDeterminant::radial(cplx x) const
{
  return dim_ == Dimension::Disk ? specfun::bessel_j(p_, x) : specfun::spherical_j(p_, x);
}

std::vector<double> ModeDeterminant::dirichlet_roots(int count) const
{
  return dim_ == Dimension::Disk ? specfun::bessel_real_roots(p_, count)
                                 : specfun::spherical_real_roots(p_, count);
}

double ModeDeterminant::cube_coefficient(double kappa_star, double n_star)
{
  return -3.0 * kappa_star / (2.0 * n_star * (n_star - 1.0));
}

}  // namespace itetraj::disk_ball
