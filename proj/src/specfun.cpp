// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/specfun.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace itetraj::specfun
{

namespace
{

using namespace std::complex_literals;

constexpr double series_radius = 4.0;
constexpr double euler_gamma = 0.57721566490153286061;

void check_window(int p, cplx z, const char *who)
{
  if (p < 0 || p > max_order)
  {
    throw DomainError(std::string(who) + ": order " + std::to_string(p) +
                      " outside [0, " + std::to_string(max_order) + "]");
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > max_argument)
  {
    throw DomainError(std::string(who) + ": argument outside |z| <= " +
                      std::to_string(max_argument));
  }
}

// Maclaurin series of J_k.
cplx j_series(int k, cplx z)
{
  const cplx half = 0.5 * z;
  cplx term = 1.0;
  for (int i = 1; i <= k; ++i)
  {
    term *= half / double(i);
  }
  const cplx q = -half * half;
  cplx sum = term;
  double largest = std::abs(term);
  for (int m = 1; m < 300; ++m)
  {
    term *= q / (double(m) * double(m + k));
    sum += term;
    largest = std::max(largest, std::abs(term));
    if (double(m) * double(m + k) > std::abs(q) && std::abs(term) <= 1e-17 * largest)
    {
      break;
    }
  }
  return sum;
}

int miller_start(int pmax, cplx z)
{
  const double big = std::max(double(pmax), std::abs(z));
  return int(big + 30.0 + std::sqrt(40.0 * big)) + 2;
}

// Normalized J_0..J_N by backward recurrence from N.
std::vector<cplx> miller_full(cplx z, int N)
{
  std::vector<cplx> f(N + 2, cplx(0.0));
  f[N] = 1e-300;
  const cplx inv = 1.0 / z;
  for (int k = N; k >= 1; --k)
  {
    f[k - 1] = (2.0 * k) * inv * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e250)
    {
      for (int j = k - 1; j <= N; ++j)
      {
        f[j] *= 1e-250;
      }
    }
  }
  if (z.imag() == 0.0)
  {
    // J_0 + 2 sum J_2k = 1 keeps real arguments exactly real.
    cplx even = 0.0;
    for (int k = 2; k <= N; k += 2)
    {
      even += f[k];
    }
    const cplx scale = 1.0 / (f[0] + 2.0 * even);
    f.resize(N + 1);
    for (auto &v : f)
    {
      v *= scale;
    }
    return f;
  }
  // Generating function at t = -i (or +i below the axis): e^{-iz} = J_0 + 2 sum (-i)^k J_k.
  const bool upper = z.imag() >= 0.0;
  const cplx t = upper ? -1i : 1i;
  const cplx target = upper ? std::exp(-1i * z) : std::exp(1i * z);
  cplx sum = 0.0;
  cplx tk = 1.0;
  for (int k = 1; k <= N; ++k)
  {
    tk *= t;
    sum += tk * f[k];
  }
  sum = f[0] + 2.0 * sum;
  const cplx scale = target / sum;
  f.resize(N + 1);
  for (auto &v : f)
  {
    v *= scale;
  }
  return f;
}

// J_p and Y_p from one normalized Miller sequence; Y_0 from the Neumann series
// Y_0 = (2/pi)(log(z/2) + gamma) J_0 - (4/pi) sum_k (-1)^k J_{2k} / k, higher orders forward.
std::pair<BesselEval, BesselEval> first_and_second_kind(int p, cplx z)
{
  const auto J = miller_full(z, miller_start(p + 2, z));
  const int N = int(J.size()) - 1;
  const cplx lg = std::log(0.5 * z) + euler_gamma;
  cplx sum0 = 0.0;
  cplx sum1 = 0.0;
  for (int k = 1; 2 * k + 1 <= N; ++k)
  {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    sum0 += sgn * J[2 * k] / double(k);
    sum1 += sgn * (J[2 * k - 1] - J[2 * k + 1]) / double(2 * k);
  }
  const double c = 2.0 / std::numbers::pi;
  const cplx y0 = c * lg * J[0] - 2.0 * c * sum0;
  const cplx dy0 = c * (J[0] / z - lg * J[1]) - 2.0 * c * sum1;
  std::vector<cplx> Y(p + 2);
  Y[0] = y0;
  Y[1] = -dy0;
  const cplx inv = 1.0 / z;
  for (int k = 1; k + 1 <= p + 1; ++k)
  {
    Y[k + 1] = (2.0 * k) * inv * Y[k] - Y[k - 1];
  }
  BesselEval first{p, z, J[p], (p == 0) ? -J[1] : 0.5 * (J[p - 1] - J[p + 1])};
  BesselEval second{p, z, Y[p], (p == 0) ? -Y[1] : 0.5 * (Y[p - 1] - Y[p + 1])};
  return {first, second};
}

// j_0..j_pmax; series near the origin, Miller recurrence otherwise.
std::vector<cplx> spherical_sequence(int pmax, cplx z)
{
  std::vector<cplx> out(pmax + 1);
  if (std::abs(z) <= 1.0)
  {
    const cplx q = -0.5 * z * z;
    cplx lead = 1.0;  // z^k / (2k+1)!!
    for (int k = 0; k <= pmax; ++k)
    {
      if (k > 0)
      {
        lead *= z / double(2 * k + 1);
      }
      cplx term = lead;
      cplx sum = term;
      for (int m = 1; m < 60; ++m)
      {
        term *= q / (double(m) * double(2 * k + 2 * m + 1));
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum))
        {
          break;
        }
      }
      out[k] = sum;
    }
    return out;
  }
  const cplx s = std::sin(z);
  const cplx c = std::cos(z);
  const cplx j0 = s / z;
  const cplx j1 = s / (z * z) - c / z;
  out[0] = j0;
  if (pmax == 0)
  {
    return out;
  }
  out[1] = j1;
  if (pmax == 1)
  {
    return out;
  }
  const int N = miller_start(pmax, z);
  std::vector<cplx> f(N + 2, cplx(0.0));
  f[N] = 1e-300;
  const cplx inv = 1.0 / z;
  for (int k = N; k >= 1; --k)
  {
    f[k - 1] = double(2 * k + 1) * inv * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e250)
    {
      for (int j = k - 1; j <= N; ++j)
      {
        f[j] *= 1e-250;
      }
    }
  }
  const cplx scale = std::abs(j0) >= std::abs(j1) ? j0 / f[0] : j1 / f[1];
  for (int k = 2; k <= pmax; ++k)
  {
    out[k] = f[k] * scale;
  }
  return out;
}

// Ascending roots of a real function whose zeros are at least `step` apart.
std::vector<double> scan_roots(const std::function<std::pair<double, double>(double)> &fn,
                               double start, double step, int count)
{
  std::vector<double> roots;
  double a = start;
  double fa = fn(a).first;
  while (int(roots.size()) < count)
  {
    const double b = a + step;
    const double fb = fn(b).first;
    if (fa == 0.0)
    {
      roots.push_back(a);
    }
    else if (fa * fb < 0.0)
    {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > 1e-6)
      {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid).first;
        if (fm == 0.0)
        {
          lo = hi = mid;
          break;
        }
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
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 8; ++it)
      {
        const auto [v, d] = fn(x);
        if (v == 0.0 || d == 0.0)
        {
          break;
        }
        const double nx = x - v / d;
        if (nx < lo - 1e-6 || nx > hi + 1e-6)
        {
          break;
        }
        if (std::abs(nx - x) <= 1e-16 * std::abs(x))
        {
          x = nx;
          break;
        }
        x = nx;
      }
      roots.push_back(x);
    }
    a = b;
    fa = fb;
  }
  return roots;
}

}  // namespace

namespace detail
{

std::vector<cplx> bessel_j_sequence(int pmax, cplx z)
{
  check_window(pmax, z, "bessel_j_sequence");
  if (std::abs(z) <= series_radius)
  {
    std::vector<cplx> out(pmax + 1);
    for (int k = 0; k <= pmax; ++k)
    {
      out[k] = j_series(k, z);
    }
    return out;
  }
  auto f = miller_full(z, miller_start(pmax, z));
  f.resize(pmax + 1);
  return f;
}

BesselEval bessel_y(int p, cplx z)
{
  check_window(p, z, "bessel_y");
  if (z == cplx(0.0))
  {
    throw DomainError("bessel_y: singular at z = 0");
  }
  return first_and_second_kind(p, z).second;
}

}  // namespace detail

BesselEval bessel_j(int p, cplx z)
{
  check_window(p, z, "bessel_j");
  const auto J = detail::bessel_j_sequence(p + 1, z);
  BesselEval out{p, z, J[p], {}};
  out.derivative = (p == 0) ? -J[1] : 0.5 * (J[p - 1] - J[p + 1]);
  return out;
}

BesselEval spherical_j(int p, cplx z)
{
  check_window(p, z, "spherical_j");
  if (z == cplx(0.0))
  {
    return {p, z, p == 0 ? 1.0 : 0.0, p == 1 ? 1.0 / 3.0 : 0.0};
  }
  const auto j = spherical_sequence(p + 1, z);
  BesselEval out{p, z, j[p], {}};
  out.derivative = (p == 0) ? -j[1] : (double(p) * j[p - 1] - double(p + 1) * j[p + 1]) /
                                          double(2 * p + 1);
  return out;
}

BesselEval hankel1(int p, cplx z)
{
  check_window(p, z, "hankel1");
  if (z == cplx(0.0))
  {
    throw DomainError("hankel1: singular at z = 0");
  }
  if (z.imag() < hankel_min_imag)
  {
    throw DomainError("hankel1: Im z below validity window");
  }
  // J from the same Miller sequence as Y so that J + iY cancels consistently.
  const auto [J, Y] = first_and_second_kind(p, z);
  return {p, z, J.value + 1i * Y.value, J.derivative + 1i * Y.derivative};
}

std::vector<double> bessel_real_roots(int p, int count)
{
  if (count < 0 || count > 100)
  {
    throw DomainError("bessel_real_roots: count must lie in [0, 100]");
  }
  check_window(p, 0.0, "bessel_real_roots");
  return scan_roots(
      [p](double x)
      {
        const auto e = bessel_j(p, x);
        return std::pair{e.value.real(), e.derivative.real()};
      },
      p + 1.0, std::numbers::pi / 4.0, count);
}

std::vector<double> spherical_real_roots(int p, int count)
{
  if (count < 0 || count > 100)
  {
    throw DomainError("spherical_real_roots: count must lie in [0, 100]");
  }
  check_window(p, 0.0, "spherical_real_roots");
  return scan_roots(
      [p](double x)
      {
        const auto e = spherical_j(p, x);
        return std::pair{e.value.real(), e.derivative.real()};
      },
      p + 1.0, std::numbers::pi / 4.0, count);
}

}  // namespace itetraj::specfun
