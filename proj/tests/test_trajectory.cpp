// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "itetraj/rootfind.hpp"
#include "itetraj/specfun.hpp"
#include "itetraj/trajectory.hpp"

using namespace itetraj;
using namespace itetraj::trajectory;
using disk_ball::Dimension;
using disk_ball::ModeDeterminant;
using std::numbers::pi;

namespace
{

const Trajectory &disk_upper(int p)
{
  static std::map<int, Trajectory> cache;
  auto it = cache.find(p);
  if (it == cache.end())
  {
    const ModeDeterminant det(Dimension::Disk, p);
    it = cache.emplace(p, continue_trajectory(det, 1.05, 16.0, seed_root(det, 1.05))).first;
  }
  return it->second;
}

const Trajectory &disk_lower(int p)
{
  static std::map<int, Trajectory> cache;
  auto it = cache.find(p);
  if (it == cache.end())
  {
    const ModeDeterminant det(Dimension::Disk, p);
    it = cache.emplace(p, continue_trajectory(det, 0.95, 0.06, seed_root(det, 0.95))).first;
  }
  return it->second;
}

std::vector<Event> of_kind(const Trajectory &t, EventKind kind)
{
  std::vector<Event> out;
  std::copy_if(t.events.begin(), t.events.end(), std::back_inserter(out),
               [&](const Event &e) { return e.kind == kind; });
  return out;
}

// Bisection on J_p sign changes over a fine grid, independent of the library root scan.
std::vector<double> bisection_roots(int p, int count, bool spherical = false)
{
  auto f = [&](double x)
  { return (spherical ? specfun::spherical_j(p, x) : specfun::bessel_j(p, x)).value.real(); };
  std::vector<double> out;
  double a = 0.5;
  while (int(out.size()) < count)
  {
    const double b = a + 0.01;
    if (f(a) * f(b) < 0)
    {
      double lo = a, hi = b;
      for (int i = 0; i < 100; ++i)
      {
        const double m = 0.5 * (lo + hi);
        (f(lo) * f(m) <= 0 ? hi : lo) = m;
      }
      out.push_back(0.5 * (lo + hi));
    }
    a = b;
  }
  return out;
}

}  // namespace

TEST_CASE("seed window returns the first complex root near n = 1")
{
  const ModeDeterminant det(Dimension::Disk, 0);
  const cplx s = seed_root(det, 1.05);
  CHECK(s.imag() > 0.5);
  CHECK(s.real() > 2.0);
  CHECK(s.real() < 4.0);
  CHECK(std::abs(det.value(s, 1.05)) < 1e-12);
}

TEST_CASE("disk p = 0 crossings for n > 1")
{
  const auto &t = disk_upper(0);
  const auto rec = of_kind(t, EventKind::IdeRecurrence);
  REQUIRE(rec.size() == 2);
  CHECK(std::abs(rec[0].n_at - 5.2689) < 1e-3);
  CHECK(std::abs(rec[1].n_at - 12.9491) < 1e-2);
  for (const auto &e : rec)
  {
    CHECK(std::abs(e.kappa_at - 2.4048) < 1e-3);
  }
  CHECK(of_kind(t, EventKind::BirthPoint).size() == 1);
}

TEST_CASE("disk p = 0 crossings for n < 1")
{
  const auto rec = of_kind(disk_lower(0), EventKind::IdeRecurrence);
  REQUIRE(rec.size() == 2);
  CHECK(std::abs(rec[0].n_at - 0.1898) < 1e-3);
  CHECK(std::abs(rec[0].kappa_at - 5.5201) < 1e-3);
  CHECK(std::abs(rec[1].n_at - 0.0772) < 1e-3);
  CHECK(std::abs(rec[1].kappa_at - 8.6537) < 1e-3);
}

TEST_CASE("trajectory invariants: residual, monotone n, bounded jumps")
{
  const ModeDeterminant det(Dimension::Disk, 1);
  for (const auto *t : {&disk_upper(1), &disk_lower(1)})
  {
    const double dir = t->points.back().n > t->points.front().n ? 1.0 : -1.0;
    for (std::size_t i = 0; i < t->points.size(); ++i)
    {
      const auto &p = t->points[i];
      CHECK(std::abs(det.value(p.kappa, p.n)) < 1e-9 * det.scale(p.kappa, p.n));
      if (i > 0)
      {
        CHECK(dir * (p.n - t->points[i - 1].n) > 0.0);
        CHECK(std::abs(p.kappa - t->points[i - 1].kappa) < 0.3);
      }
    }
  }
}

TEST_CASE("ball p = 0 crosses pi at n = 4")
{
  const ModeDeterminant det(Dimension::Ball, 0);
  const auto t = continue_trajectory(det, 1.05, 10.0, seed_root(det, 1.05));
  const auto rec = of_kind(t, EventKind::IdeRecurrence);
  REQUIRE(rec.size() >= 2);
  CHECK(std::abs(rec[0].n_at - 4.0) < 1e-3);
  CHECK(std::abs(rec[0].kappa_at - pi) < 1e-9);
  CHECK(std::abs(rec[1].n_at - 9.0) < 1e-3);
}

TEST_CASE("re-seeding from an interior point reproduces the remainder")
{
  const ModeDeterminant det(Dimension::Disk, 0);
  const auto &t = disk_upper(0);
  const std::size_t start = 10;
  REQUIRE(t.points[start].n < 2.0);
  StepControl ctl;
  std::vector<double> grid;
  for (std::size_t i = start + 1; i < t.points.size(); i += 7)
  {
    if (t.points[i].n < 5.2)
    {
      ctl.checkpoints.push_back(t.points[i].n);
    }
  }
  const auto again = continue_trajectory(det, t.points[start].n, 5.2, t.points[start].kappa, ctl);
  int compared = 0;
  for (double c : ctl.checkpoints)
  {
    const auto a = std::find_if(t.points.begin(), t.points.end(), [&](const auto &p) { return p.n == c; });
    const auto b = std::find_if(again.points.begin(), again.points.end(), [&](const auto &p) { return p.n == c; });
    REQUIRE(b != again.points.end());
    CHECK(std::abs(a->kappa - b->kappa) < 1e-8);
    ++compared;
  }
  CHECK(compared > 5);
}

TEST_CASE("conjugate seed yields the conjugate trajectory")
{
  const ModeDeterminant det(Dimension::Disk, 2);
  const auto &t = disk_upper(2);
  StepControl ctl;
  for (std::size_t i = 1; i < t.points.size(); i += 3)
  {
    ctl.checkpoints.push_back(t.points[i].n);
  }
  const auto c = continue_trajectory(det, 1.05, 16.0, std::conj(t.points.front().kappa), ctl);
  int compared = 0;
  for (const auto &p : c.points)
  {
    const auto it = std::find_if(t.points.begin(), t.points.end(), [&](const auto &q) { return q.n == p.n; });
    if (it != t.points.end())
    {
      CHECK(std::abs(p.kappa - std::conj(it->kappa)) < 1e-10);
      ++compared;
    }
  }
  CHECK(compared > int(ctl.checkpoints.size()) * 3 / 4);
}

TEST_CASE("angle-continuous branch rule crosses into the other half plane")
{
  const ModeDeterminant det(Dimension::Disk, 0);
  StepControl ctl;
  ctl.branch = BranchRule::AngleContinuous;
  const auto t = continue_trajectory(det, 1.05, 5.3, seed_root(det, 1.05), ctl);
  CHECK(t.points.back().kappa.imag() < 0.0);
  const auto keep = continue_trajectory(det, 1.05, 5.3, seed_root(det, 1.05));
  CHECK(keep.points.back().kappa.imag() > 0.0);
}

TEST_CASE("continuation contract errors")
{
  const ModeDeterminant det(Dimension::Disk, 0);
  CHECK_THROWS_AS(continue_trajectory(det, 2.0, 3.0, cplx(1.0, 1.0)), StepFailure);
  CHECK_THROWS_AS(continue_trajectory(det, 0.9, 1.5, cplx(3.0, 1.3)), disk_ball::ContractError);
}

TEST_CASE("detect_real_crossings")
{
  CHECK(detect_real_crossings(Trajectory{}, {2.4}).empty());
  const auto j0 = specfun::bessel_real_roots(0, 10);
  for (const auto &e : detect_real_crossings(disk_upper(0), j0))
  {
    CHECK(e.payload.at("matched") == 1.0);
    CHECK(e.payload.at("mismatch") < ide_match_tolerance);
  }
  const auto j1 = specfun::bessel_real_roots(1, 10);
  const auto ev = detect_real_crossings(disk_upper(1), j1);
  REQUIRE(!ev.empty());
  CHECK(std::abs(ev.front().kappa_at - 3.8317) < 1e-3);

  // A straddling pair is interpolated.
  Trajectory synthetic;
  synthetic.points = {{1.5, cplx(3.0, 0.2)}, {1.6, cplx(3.1, -0.2)}};
  const auto s = detect_real_crossings(synthetic, {3.05, 9.0});
  REQUIRE(s.size() == 1);
  CHECK(s[0].n_at == doctest::Approx(1.55));
  CHECK(s[0].payload.at("ide") == 3.05);
  CHECK(s[0].payload.at("matched") == 1.0);
}

TEST_CASE("predict_recurrences")
{
  const auto j = bisection_roots(0, 3);
  const auto r = predict_recurrences(specfun::bessel_real_roots(0, 1)[0], 0, 2);
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0].n_star - 5.2689) < 1e-3);
  CHECK(std::abs(r[1].n_star - 12.9491) < 1e-3);
  CHECK(r[0].n_star == doctest::Approx(std::pow(j[1] / j[0], 2)).epsilon(1e-12));
  CHECK(r[1].n_star == doctest::Approx(std::pow(j[2] / j[0], 2)).epsilon(1e-12));

  const auto b = predict_recurrences(pi, 0, 3, Dimension::Ball);
  REQUIRE(b.size() == 3);
  for (int q = 2; q <= 4; ++q)
  {
    CHECK(b[q - 2].n_star == doctest::Approx(double(q * q)).epsilon(1e-12));
  }
  CHECK(predict_recurrences(pi, 0, 0).empty());
  CHECK_THROWS_AS(predict_recurrences(2.5, 0, 2), disk_ball::ContractError);
}

TEST_CASE("property: crossings only at Dirichlet eigenvalues, recurring as predicted")
{
  for (int p = 0; p <= 2; ++p)
  {
    const auto roots = bisection_roots(p, 12);
    for (const auto *t : {&disk_upper(p), &disk_lower(p)})
    {
      const auto crossings = detect_real_crossings(*t, roots);
      CHECK(!crossings.empty());
      for (const auto &e : crossings)
      {
        CHECK(e.payload.at("matched") == 1.0);
      }
    }
    const auto rec = of_kind(disk_upper(p), EventKind::IdeRecurrence);
    REQUIRE(rec.size() >= 2);
    const auto predicted = predict_recurrences(rec[0].kappa_at.real(), p, 2);
    CHECK(std::abs(rec[0].n_at - predicted[0].n_star) < 1e-6);
    CHECK(std::abs(rec[1].n_at - predicted[1].n_star) < 1e-6);
  }
}

TEST_CASE("property: each crossing is a triple root")
{
  for (int p = 0; p <= 2; ++p)
  {
    const ModeDeterminant det(Dimension::Disk, p);
    for (const auto &e : of_kind(disk_upper(p), EventKind::IdeRecurrence))
    {
      const double n = e.n_at;
      const rootfind::Holomorphic f(
          [&](cplx k)
          {
            const auto v = det.evaluate(k, n);
            return rootfind::ValueAndDerivative{v.value, v.dkappa};
          });
      CHECK(rootfind::count_roots(f, {e.kappa_at, 0.2, 0.2}).count == 3);
    }
  }
}

TEST_CASE("approach angles")
{
  SUBCASE("synthetic cube-root curve")
  {
    const double ks = 3.0, ns = 2.0;
    Trajectory t;
    for (int k = 0; k < 12; ++k)
    {
      const double dn = 0.01 * std::pow(0.5, k);
      t.points.push_back({ns - dn, ks + std::cbrt(dn) * std::polar(1.0, pi / 3.0)});
    }
    t.points.push_back({ns, cplx(ks, 0.0)});
    const Event e{EventKind::RealAxisCrossing, ns, cplx(ks, 0.0), {}};
    const auto a = estimate_approach_angle(t, e, 0.5);
    CHECK(std::abs(a.incoming_position - pi / 3.0) < 1e-3);
    CHECK(std::abs(a.incoming_velocity + 2.0 * pi / 3.0) < 1e-3);
    CHECK(std::isnan(a.outgoing_position));
  }
  SUBCASE("law at every disk crossing")
  {
    for (int p = 0; p <= 2; ++p)
    {
      for (const auto *t : {&disk_upper(p), &disk_lower(p)})
      {
        for (const auto &e : of_kind(*t, EventKind::IdeRecurrence))
        {
          const auto a = estimate_approach_angle(*t, e);
          const double target = e.n_at > 1.0 ? pi / 3.0 : 2.0 * pi / 3.0;
          CHECK(std::abs(std::abs(a.incoming_velocity) - target) < 0.05);
          CHECK(a.admissible);
          CHECK(a.samples >= 5);
        }
      }
    }
  }
  SUBCASE("coarse sampling is rejected")
  {
    Trajectory t;
    t.points = {{1.9, cplx(3.2, 0.2)}, {2.0, cplx(3.0, 0.0)}};
    CHECK_THROWS_AS(estimate_approach_angle(t, {EventKind::RealAxisCrossing, 2.0, 3.0, {}}), ResolutionError);
  }
}

TEST_CASE("symmetry_map")
{
  Trajectory one;
  one.points = {{4.0, cplx(1.5, 0.25)}};
  const auto m = symmetry_map(one);
  CHECK(m.points[0].n == 0.25);
  CHECK(m.points[0].kappa == cplx(3.0, 0.5));

  const auto &t = disk_upper(0);
  const auto back = symmetry_map(symmetry_map(t));
  for (std::size_t i = 0; i < t.points.size(); ++i)
  {
    CHECK(std::abs(back.points[i].n - t.points[i].n) < 1e-12 * t.points[i].n);
    CHECK(std::abs(back.points[i].kappa - t.points[i].kappa) < 1e-12 * std::abs(t.points[i].kappa));
  }
  const ModeDeterminant det(Dimension::Disk, 0);
  for (const auto &p : symmetry_map(t).points)
  {
    CHECK(std::abs(det.value(p.kappa, p.n)) < 1e-8 * det.scale(p.kappa, p.n));
  }
  Trajectory mixed;
  mixed.points = {{0.5, cplx(1.0, 1.0)}, {2.0, cplx(1.0, 1.0)}};
  CHECK_THROWS_AS(symmetry_map(mixed), std::domain_error);
}

TEST_CASE("symmetry image matches the independently continued n < 1 branch")
{
  const auto mapped = symmetry_map(disk_upper(0));
  StepControl ctl;
  for (std::size_t i = 0; i < mapped.points.size(); i += 5)
  {
    const double n = mapped.points[i].n;
    if (n < 0.94 && n > 0.07)
    {
      ctl.checkpoints.push_back(n);
    }
  }
  const ModeDeterminant det(Dimension::Disk, 0);
  const auto lower = continue_trajectory(det, 0.95, 0.0625, seed_root(det, 0.95), ctl);
  int compared = 0;
  for (const auto &p : mapped.points)
  {
    const auto it = std::find_if(lower.points.begin(), lower.points.end(), [&](const auto &q) { return q.n == p.n; });
    if (it != lower.points.end())
    {
      CHECK(std::abs(it->kappa - p.kappa) < 1e-6);
      ++compared;
    }
  }
  CHECK(compared >= int(ctl.checkpoints.size()) - 4);
}

TEST_CASE("convergence diagnostics")
{
  Trajectory flat;
  for (int k = 0; k <= 20; ++k)
  {
    flat.points.push_back({1.0 + k, cplx(2.5, 0.0)});
  }
  const auto c = convergence_diagnostics(flat, 2.5);
  CHECK(c.sup_distance_last_decade == 0.0);
  CHECK(c.distance_at_end == 0.0);
  CHECK(c.envelope_non_increasing);

  const auto d = convergence_diagnostics(disk_upper(0), 2.404825557695773);
  CHECK(d.distance_at_end < d.distance_at_8);
  CHECK(d.sup_distance_last_decade < 0.6);
  CHECK(d.window_max_imag.size() == 8);
}
