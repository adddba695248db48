// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "itetraj/disk_ball.hpp"
#include "itetraj/quadrature.hpp"
#include "itetraj/specfun.hpp"

using namespace itetraj;
using namespace itetraj::disk_ball;
using namespace std::complex_literals;

namespace
{

using lcplx = std::complex<long double>;

// Extended-precision Maclaurin series for J_p and J'_p; independent of the library.
std::pair<lcplx, lcplx> series_j(int p, lcplx z)
{
  auto J = [&](int k)
  {
    if (k < 0)
    {
      return (k % 2 == 0 ? 1.0L : -1.0L) * lcplx(0);
    }
    lcplx term = 1.0L;
    for (int i = 1; i <= k; ++i)
    {
      term *= z / (2.0L * i);
    }
    lcplx sum = term;
    for (int m = 1; m < 120; ++m)
    {
      term *= -(z * z / 4.0L) / (long double)(m * (m + k));
      sum += term;
    }
    return sum;
  };
  const lcplx v = J(p);
  const lcplx d = p == 0 ? -J(1) : 0.5L * (J(p - 1) - J(p + 1));
  return {v, d};
}

cplx det_oracle(int p, cplx kappa, double n)
{
  const lcplx k(kappa.real(), kappa.imag());
  const long double rn = std::sqrt((long double)n);
  const auto [a, da] = series_j(p, k);
  const auto [b, db] = series_j(p, rn * k);
  const lcplx f = k * (da * b - rn * a * db);
  return {double(f.real()), double(f.imag())};
}

cplx newton_root(int p, cplx guess, double n)
{
  cplx k = guess;
  for (int it = 0; it < 60; ++it)
  {
    const auto e = det_disk_pair(ModeIndex(p), WaveNumber(k), RefractiveIndex(n));
    const cplx step = e.value / e.dkappa;
    k -= step;
    if (std::abs(step) < 1e-15 * std::abs(k))
    {
      break;
    }
  }
  return k;
}

// Real roots of F_p(., n) on (a, b) by sign changes, skipping Dirichlet eigenvalues.
std::vector<double> real_roots(int p, double n, double a, double b)
{
  auto f = [&](double x) { return det_disk(ModeIndex(p), WaveNumber(x), RefractiveIndex(n)).real(); };
  std::vector<double> out;
  const int steps = 4000;
  double x0 = a, f0 = f(a);
  for (int i = 1; i <= steps; ++i)
  {
    const double x1 = a + (b - a) * i / steps;
    const double f1 = f(x1);
    if (f0 * f1 < 0.0)
    {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it)
      {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0))
        {
          lo = mid;
          flo = fm;
        }
        else
        {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return out;
}

const cplx disk_root_n4 = newton_root(0, cplx(2.273, 0.58), 4.0);

}  // namespace

TEST_CASE("domain types validate their invariants")
{
  CHECK_THROWS(ModeIndex(-1));
  CHECK_THROWS(RefractiveIndex(1.0));
  CHECK_THROWS(RefractiveIndex(-2.0));
  CHECK_THROWS(WaveNumber(0.0));
  CHECK_NOTHROW(RefractiveIndex(1.0 + 1e-11));
}

TEST_CASE("det_disk cancels at n -> 1 and vanishes at the first recurrence")
{
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> re(0.5, 10.0), im(-2.0, 2.0);
  for (int i = 0; i < 200; ++i)
  {
    const cplx k(re(rng), im(rng));
    for (int p : {0, 1, 2, 5})
    {
      CHECK(std::abs(det_disk(ModeIndex(p), WaveNumber(k), RefractiveIndex(1.0 + 1e-12))) < 1e-9);
      CHECK(std::abs(det_ball(ModeIndex(p), WaveNumber(k), RefractiveIndex(1.0 + 1e-12))) < 1e-9);
    }
  }
  CHECK(std::abs(det_disk(ModeIndex(0), WaveNumber(2.4048), RefractiveIndex(5.2689))) < 1e-3);
}

TEST_CASE("det_disk agrees with an extended-precision series oracle")
{
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> re(0.2, 3.0), im(-1.5, 1.5), nn(0.1, 6.0);
  std::uniform_int_distribution<int> order(0, 4);
  for (int i = 0; i < 300; ++i)
  {
    const cplx k(re(rng), im(rng));
    const double n = nn(rng);
    if (std::abs(n - 1.0) < 1e-3)
    {
      continue;
    }
    const int p = order(rng);
    const cplx lib = det_disk(ModeIndex(p), WaveNumber(k), RefractiveIndex(n));
    const cplx ref = det_oracle(p, k, n);
    const auto b = ModeDeterminant(Dimension::Disk, p);
    CHECK(std::abs(lib - ref) <= 1e-12 * std::max(1.0, b.scale(k, n)));
  }
}

TEST_CASE("det_ball vanishes at simultaneous roots of j_0")
{
  for (int m = 1; m <= 3; ++m)
  {
    for (int q : {2, 3})
    {
      const double f = std::abs(det_ball(ModeIndex(0), WaveNumber(m * std::numbers::pi),
                                         RefractiveIndex(double(q * q))));
      CHECK(f < 1e-12);
    }
  }
}

TEST_CASE("analytic kappa-derivatives match finite differences")
{
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> re(0.5, 8.0), im(-1.5, 1.5), nn(1.2, 10.0);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i)
  {
    const cplx k(re(rng), im(rng));
    const double n = nn(rng);
    const int p = i % 3;
    for (auto dim : {Dimension::Disk, Dimension::Ball})
    {
      const ModeDeterminant d(dim, p);
      const cplx fd = (d.value(k + h, n) - d.value(k - h, n)) / (2.0 * h);
      const cplx an = d.evaluate(k, n).dkappa;
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(std::abs(an), 1e-3 * d.scale(k, n)));
      const cplx fdn = (d.value(k, n + h) - d.value(k, n - h)) / (2.0 * h);
      const cplx an_n = d.dn(k, n);
      CHECK(std::abs(fdn - an_n) <= 1e-6 * std::max(std::abs(an_n), 1e-3 * d.scale(k, n)));
    }
  }
  const double j01 = specfun::bessel_real_roots(0, 1)[0];
  CHECK(std::abs(det_dkappa(ModeIndex(0), WaveNumber(j01), RefractiveIndex(3.0))) < 1e-14);
  // Single vanishing factor: the sign flips across the root.
  const double a = det_dkappa(ModeIndex(0), WaveNumber(j01 - 1e-3), RefractiveIndex(3.0)).real();
  const double b = det_dkappa(ModeIndex(0), WaveNumber(j01 + 1e-3), RefractiveIndex(3.0)).real();
  CHECK(a * b < 0.0);
}

TEST_CASE("det_dn on the zero set")
{
  const double n = 4.0;
  const cplx k = disk_root_n4;
  const double h = 1e-6;
  const cplx fd = (det_disk(ModeIndex(0), WaveNumber(k), RefractiveIndex(n + h)) -
                   det_disk(ModeIndex(0), WaveNumber(k), RefractiveIndex(n - h))) /
                  (2.0 * h);
  const cplx an = det_dn(ModeIndex(0), WaveNumber(k), RefractiveIndex(n));
  CHECK(std::abs(fd - an) < 1e-5 * std::abs(an));

  // At a triple point the n-derivative does not vanish.
  const auto r = specfun::bessel_real_roots(0, 2);
  const double nstar = (r[1] / r[0]) * (r[1] / r[0]);
  CHECK(std::abs(det_dn(ModeIndex(0), WaveNumber(r[0]), RefractiveIndex(nstar))) > 1e-3);

  const auto real = real_roots(0, n, 0.5, 6.0);
  REQUIRE(!real.empty());
  CHECK(det_dn(ModeIndex(0), WaveNumber(real[0]), RefractiveIndex(n)).imag() == 0.0);

  CHECK_THROWS_AS(det_dn(ModeIndex(0), WaveNumber(cplx(3.0, 0.3)), RefractiveIndex(n)), ContractError);
}

TEST_CASE("velocity matches the secant slope of the tracked root")
{
  for (double n : {2.0, 4.0, 9.0})
  {
    const cplx k = newton_root(0, disk_root_n4, n);
    const double h = 1e-5;
    const cplx up = newton_root(0, k, n + h);
    const cplx down = newton_root(0, k, n - h);
    const cplx secant = (up - down) / (2.0 * h);
    const cplx v = velocity(ModeIndex(0), WaveNumber(k), RefractiveIndex(n));
    CHECK(std::abs(secant - v) < 1e-4 * std::abs(v));
    const cplx vc = velocity(ModeIndex(0), WaveNumber(std::conj(k)), RefractiveIndex(n));
    CHECK(std::abs(vc - std::conj(v)) < 1e-12 * std::abs(v));
  }
}

TEST_CASE("velocity blows up next to a Dirichlet eigenvalue")
{
  const auto r = specfun::bessel_real_roots(0, 2);
  const double nstar = (r[1] / r[0]) * (r[1] / r[0]);
  const double c = ModeDeterminant::cube_coefficient(r[0], nstar);
  // Approach from below on the upper branch: (kappa - kappa*)^3 = c (n - n*) with c < 0.
  const double dn = 1e-10;
  const cplx guess = r[0] + std::cbrt(c * -dn) * std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const cplx k = newton_root(0, guess, nstar - dn);
  REQUIRE(std::abs(specfun::bessel_j(0, k).value) < 1e-3);
  CHECK(std::abs(k.imag()) > 1e-6);
  CHECK(std::abs(velocity(ModeIndex(0), WaveNumber(k), RefractiveIndex(nstar - dn))) > 1e3);
  CHECK_THROWS_AS(velocity(ModeIndex(0), WaveNumber(r[0]), RefractiveIndex(nstar)), NearIdeSignal);
}

TEST_CASE("alpha coefficient matches both boundary conditions")
{
  const cplx k = disk_root_n4;
  const auto alpha = alpha_coefficient(ModeIndex(0), WaveNumber(k), RefractiveIndex(4.0));
  const auto [dir, neu] = boundary_mismatch(ModeIndex(0), WaveNumber(k), RefractiveIndex(4.0), alpha);
  CHECK(std::abs(dir) < 1e-10);
  CHECK(std::abs(neu) < 1e-10);
  const auto ac = alpha_coefficient(ModeIndex(0), WaveNumber(std::conj(k)), RefractiveIndex(4.0));
  CHECK(std::abs(ac.alpha - std::conj(alpha.alpha)) < 1e-14);

  for (double x : real_roots(0, 4.0, 0.5, 9.0))
  {
    const auto a = alpha_coefficient(ModeIndex(0), WaveNumber(x), RefractiveIndex(4.0)).alpha;
    CHECK(a.imag() == 0.0);
    CHECK((a * a).real() > 0.0);
  }
}

TEST_CASE("energy identity")
{
  // Radial quadrature against the closed-form Lommel integral.
  const auto rule = quadrature::gauss_legendre(200, 0.0, 1.0);
  for (int p : {0, 1, 3})
  {
    for (double k : {1.3, 4.7, 11.2, 30.0})
    {
      double q = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      {
        const double v = specfun::bessel_j(p, k * rule.nodes[i]).value.real();
        q += rule.weights[i] * v * v * rule.nodes[i];
      }
      const auto e = specfun::bessel_j(p, k);
      const double jp = e.value.real(), dj = e.derivative.real();
      const double closed = 0.5 * (dj * dj + (1.0 - double(p * p) / (k * k)) * jp * jp);
      CHECK(std::abs(q - closed) < 1e-10 * std::abs(closed));
    }
  }

  const cplx k = disk_root_n4;
  const cplx e = energy_mismatch(ModeIndex(0), WaveNumber(k), RefractiveIndex(4.0));
  CHECK(std::abs(e) < 1e-8 * energy_norm(ModeIndex(0), WaveNumber(k), RefractiveIndex(4.0)));

  int checked = 0;
  for (int p : {0, 1, 2})
  {
    for (double x : real_roots(p, 4.0, 0.5, 8.0))
    {
      const cplx got = energy_mismatch(ModeIndex(p), WaveNumber(x), RefractiveIndex(4.0));
      const double jp = specfun::bessel_j(p, x).value.real();
      const double ang = p == 0 ? 2.0 * std::numbers::pi : std::numbers::pi;
      const double closed = (1.0 - 4.0) / 2.0 * jp * jp * ang;
      CHECK(std::abs(got - closed) < 1e-8 * std::abs(closed));
      ++checked;
    }
  }
  CHECK(checked >= 3);
  CHECK_THROWS_AS(energy_mismatch(ModeIndex(0), WaveNumber(cplx(3.0, 0.3)), RefractiveIndex(4.0)),
                  ContractError);
}

TEST_CASE("root symmetries")
{
  const cplx k = disk_root_n4;
  CHECK(std::abs(det_disk(ModeIndex(0), WaveNumber(std::conj(k)), RefractiveIndex(4.0))) < 1e-12);
  // kappa root at n  <=>  kappa sqrt(n) root at 1/n.
  for (double n : {2.0, 4.0, 7.5})
  {
    for (int p : {0, 1, 2})
    {
      const cplx root = newton_root(p, cplx(2.5 + p, 0.6), n);
      const ModeDeterminant d(Dimension::Disk, p);
      const cplx mapped = root * std::sqrt(n);
      CHECK(std::abs(d.value(mapped, 1.0 / n)) < 1e-9 * d.scale(mapped, 1.0 / n));
    }
  }
}

TEST_CASE("neighbour pairs at triple points")
{
  for (int p : {0, 1, 2})
  {
    const auto r = specfun::bessel_real_roots(p, 2);
    const double nstar = (r[1] / r[0]) * (r[1] / r[0]);
    for (const auto &res : neighbour_pair_residuals(ModeIndex(p), WaveNumber(r[0]), RefractiveIndex(nstar)))
    {
      CHECK(std::abs(res.dirichlet) < 1e-9);
      CHECK(std::abs(res.neumann) < 1e-9);
    }
    CHECK(neighbour_pair_residuals(ModeIndex(p), WaveNumber(r[0]), RefractiveIndex(nstar)).size() ==
          (p == 0 ? 1u : 2u));
  }
  CHECK_THROWS_AS(neighbour_pair_residuals(ModeIndex(0), WaveNumber(2.0), RefractiveIndex(4.0)),
                  ContractError);
}
