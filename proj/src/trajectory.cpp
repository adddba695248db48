// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "itetraj/rootfind.hpp"

namespace itetraj::trajectory
{

using disk_ball::ModeDeterminant;
using std::numbers::pi;

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double wrap(double a)
{
  a = std::remainder(a, 2.0 * pi);
  return a <= -pi ? a + 2.0 * pi : a;
}

std::optional<cplx> slope(const ModeDeterminant &det, cplx kappa, double n)
{
  const auto e = det.evaluate(kappa, n);
  if (std::abs(e.dkappa) == 0.0)
  {
    return std::nullopt;
  }
  const cplx v = -det.dn(kappa, n) / e.dkappa;
  return std::isfinite(std::abs(v)) ? std::optional<cplx>(v) : std::nullopt;
}

// A triple point (kappa*, n*) the trajectory is approaching or leaving.
struct Anchor
{
  double kappa;
  double n;
  double trigger = 0.0;  // distance in n at which the crossing is resolved
};

class Continuation
{
public:
  Continuation(const ModeDeterminant &det, double n_start, double n_end, const StepControl &control)
    : det_(det), ctl_(control), n_end_(n_end), dir_(n_end >= n_start ? 1.0 : -1.0),
      roots_(det.dirichlet_roots(60))
  {
    traj_.mode = det.mode();
    traj_.scatterer = det.dimension() == disk_ball::Dimension::Disk ? "disk" : "ball";
    for (double c : ctl_.checkpoints)
    {
      if (dir_ * (c - n_start) > 0.0 && dir_ * (n_end - c) > 0.0)
      {
        checkpoints_.push_back(c);
      }
    }
    std::sort(checkpoints_.begin(), checkpoints_.end(),
              [this](double a, double b) { return dir_ * a < dir_ * b; });
  }

  Trajectory run(double n_start, cplx seed)
  {
    const auto first = correct(det_, seed, n_start, ctl_.residual_tolerance);
    if (!first)
    {
      throw StepFailure("continue_trajectory: seed is not a root at n_start");
    }
    push(n_start, first->kappa, first->residual);
    if (std::abs(n_start - 1.0) <= 0.1)
    {
      traj_.events.push_back({EventKind::BirthPoint, n_start, first->kappa, {{"imag", first->kappa.imag()}}});
    }
    double h = ctl_.initial;
    while (dir_ * (n_end_ - n()) > 1e-13)
    {
      const auto approach = find_approach();
      if (approach && std::abs(approach->n - n()) <= approach->trigger * 1.25)
      {
        cross(*approach);
        continue;
      }
      if (departure_ && !(std::abs(n() - departure_->n) < 0.05 && std::abs(kappa() - departure_->kappa) < 0.3))
      {
        departure_.reset();
      }
      h = advance(h, approach);
    }
    return std::move(traj_);
  }

private:
  double n() const { return traj_.points.back().n; }
  cplx kappa() const { return traj_.points.back().kappa; }

  void push(double n, cplx kappa, double residual)
  {
    traj_.points.push_back({n, kappa, residual, slope(det_, kappa, n)});
  }

  std::optional<Anchor> find_approach() const
  {
    const cplx k = kappa();
    const double nn = n();
    std::optional<Anchor> best;
    for (std::size_t i = 0; i < roots_.size(); ++i)
    {
      const double ks = roots_[i];
      const double dist = std::abs(k - ks);
      if (dist >= 0.3)
      {
        continue;
      }
      for (std::size_t j = 0; j < roots_.size(); ++j)
      {
        if (j == i)
        {
          continue;
        }
        const double ns = std::pow(roots_[j] / ks, 2);
        const double gap = dir_ * (ns - nn);
        if (gap <= 0.0 || gap > 0.1)
        {
          continue;
        }
        const double model = std::cbrt(std::abs(ModeDeterminant::cube_coefficient(ks, ns)) * gap);
        if (dist < 2.0 * model && (!best || std::abs(ns - nn) < std::abs(best->n - nn)))
        {
          best = Anchor{ks, ns, std::pow(ctl_.crossing_radius, 3) / std::abs(ModeDeterminant::cube_coefficient(ks, ns))};
        }
      }
    }
    return best;
  }

  double advance(double h, const std::optional<Anchor> &approach)
  {
    const double n0 = n();
    const cplx k0 = kappa();
    // Checkpoints swallowed by a crossing cannot be honored.
    while (!checkpoints_.empty() && dir_ * (checkpoints_.front() - n0) <= 0.0)
    {
      checkpoints_.erase(checkpoints_.begin());
    }
    const std::optional<Anchor> anchor = approach ? approach : departure_;
    double step = h;
    if (approach)
    {
      const double dist = std::abs(approach->n - n0);
      step = dist - std::max(approach->trigger, 0.4 * dist);
    }
    else if (departure_)
    {
      step = std::min(std::abs(n0 - departure_->n), ctl_.max_step);
    }
    step = std::min(step, std::abs(n_end_ - n0));
    if (!checkpoints_.empty())
    {
      step = std::min(step, std::abs(checkpoints_.front() - n0));
    }
    const double floor = anchor ? 1e-13 : ctl_.min_step;
    // A short step that lands exactly on the end or a checkpoint is allowed.
    double landing = std::abs(n_end_ - n0);
    if (!checkpoints_.empty())
    {
      landing = std::min(landing, std::abs(checkpoints_.front() - n0));
    }
    std::string reason;
    for (;;)
    {
      if (step < floor * (1.0 - 1e-9) && step < landing * (1.0 - 1e-12))
      {
        std::ostringstream msg;
        msg.precision(17);
        msg << "continue_trajectory: step below " << floor << " at n = " << n0 << ", kappa = " << k0
            << " (" << reason << ")";
        if (reason == "continuity guard")
        {
          throw BranchJumpError(msg.str());
        }
        throw StepFailure(msg.str());
      }
      double n1 = n0 + dir_ * step;
      if (!checkpoints_.empty() && std::abs(n1 - checkpoints_.front()) < 1e-12)
      {
        n1 = checkpoints_.front();
      }
      if (std::abs(n1 - n_end_) < 1e-12)
      {
        n1 = n_end_;
      }
      cplx predicted;
      if (anchor)
      {
        predicted = anchor->kappa + (k0 - anchor->kappa) * std::cbrt((n1 - anchor->n) / (n0 - anchor->n));
      }
      else
      {
        const auto v = traj_.points.back().velocity;
        predicted = k0 + (v ? *v : cplx(0.0)) * (n1 - n0);
      }
      if (std::abs(predicted - k0) > ctl_.trust_radius)
      {
        reason = "trust radius";
        step *= 0.5;
        continue;
      }
      const auto r = correct(det_, predicted, n1, ctl_.residual_tolerance);
      if (!r || r->iterations > ctl_.max_newton)
      {
        reason = "corrector";
        step *= 0.5;
        continue;
      }
      const double jump = std::abs(r->kappa - k0);
      const double bound = 5.0 * std::max(std::abs(predicted - k0), 1e-8);
      const bool off_model = anchor && std::abs(r->kappa - predicted) > 0.3 * std::abs(predicted - anchor->kappa);
      if (jump > bound || off_model)
      {
        reason = "continuity guard";
        step *= 0.5;
        continue;
      }
      push(n1, r->kappa, r->residual);
      if (!checkpoints_.empty() && n1 == checkpoints_.front())
      {
        checkpoints_.erase(checkpoints_.begin());
      }
      if (anchor)
      {
        return h;
      }
      // Truncation to a checkpoint or the end does not shrink the next step.
      const double base = reason.empty() ? std::max(step, h) : step;
      return r->iterations <= 3 ? std::min(1.5 * base, ctl_.max_step) : base;
    }
  }

  void cross(const Anchor &anchor)
  {
    const auto &pts = traj_.points;
    const cplx k_in = kappa();
    const double n_in = n();

    // Dirichlet root nearest to the incoming data.
    double x = k_in.real();
    for (int it = 0; it < 50; ++it)
    {
      const auto e = det_.radial(x);
      const double dx = (e.value / e.derivative).real();
      x -= dx;
      if (std::abs(dx) <= 1e-16 * x)
      {
        break;
      }
    }
    // Crossing n from the incoming samples: |kappa - x|^3 is linear in n near the crossing.
    double n_c = anchor.n;
    if (pts.size() >= 2)
    {
      const auto &a = pts[pts.size() - 2];
      const double ta = std::pow(std::abs(a.kappa - x), 3), tb = std::pow(std::abs(k_in - x), 3);
      if (ta != tb)
      {
        n_c = n_in - tb * (n_in - a.n) / (tb - ta);
      }
    }
    // Refine on J(sqrt(n) x) = 0.
    for (int it = 0; it < 50; ++it)
    {
      const double rn = std::sqrt(n_c);
      const auto e = det_.radial(rn * x);
      const double dn = (e.value / (e.derivative * x / (2.0 * rn))).real();
      n_c -= dn;
      if (std::abs(dn) <= 1e-16 * n_c)
      {
        break;
      }
    }
    if (!(std::abs(n_c - anchor.n) < 1e-6 * anchor.n) || !(std::abs(x - anchor.kappa) < 1e-9 * x))
    {
      std::ostringstream msg;
      msg.precision(17);
      msg << "continue_trajectory: crossing near (" << anchor.n << ", " << anchor.kappa
          << ") resolved to (" << n_c << ", " << x << ")";
      throw BranchJumpError(msg.str());
    }
    traj_.points.push_back({n_c, cplx(x, 0.0), std::abs(det_.value(x, n_c)), std::nullopt});
    traj_.events.push_back({EventKind::IdeRecurrence, n_c, cplx(x, 0.0),
                            {{"ide", x}, {"predicted_n", anchor.n}, {"observed_n", n_c}}});
    const double offset = std::abs(n_in - n_c);
    if (dir_ * (n_end_ - n_c) <= offset)
    {
      return;
    }

    // The three local roots rotate by pi/3 when n - n* changes sign.
    const double theta = std::arg(k_in - x);
    const double radius = std::abs(k_in - x);
    auto side = [](double a)
    {
      const double s = std::sin(a);
      return std::abs(s) < 1e-3 ? 0 : (s > 0 ? 1 : -1);
    };
    double phi = theta + pi;
    if (ctl_.branch == BranchRule::KeepHalfPlane)
    {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k)
      {
        const double cand = theta + pi / 3.0 + 2.0 * pi * k / 3.0;
        const double miss = std::abs(wrap(cand - theta - pi));
        if (side(cand) == side(theta) && miss < best)
        {
          best = miss;
          phi = cand;
        }
      }
    }
    const double n_out = n_c + dir_ * offset;
    const cplx predicted = x + std::polar(radius, phi);
    const auto r = correct(det_, predicted, n_out, ctl_.residual_tolerance);
    if (!r || std::abs(r->kappa - predicted) > 0.3 * radius)
    {
      throw BranchJumpError("continue_trajectory: no outgoing branch after the crossing");
    }
    push(n_out, r->kappa, r->residual);
    departure_ = Anchor{x, n_c};
  }

  const ModeDeterminant &det_;
  StepControl ctl_;
  double n_end_;
  double dir_;
  std::vector<double> roots_;
  std::vector<double> checkpoints_;
  std::optional<Anchor> departure_;
  Trajectory traj_;
};

}  // namespace

std::string to_string(EventKind kind)
{
  switch (kind)
  {
  case EventKind::RealAxisCrossing:
    return "RealAxisCrossing";
  case EventKind::IdeRecurrence:
    return "IdeRecurrence";
  case EventKind::AngleEstimate:
    return "AngleEstimate";
  case EventKind::BirthPoint:
    return "BirthPoint";
  case EventKind::ConvergenceCheck:
    return "ConvergenceCheck";
  }
  return "Unknown";
}

std::optional<CorrectorResult> correct(const ModeDeterminant &det, cplx guess, double n,
                                       double residual_tolerance, int max_iterations)
{
  cplx z = guess;
  int it = 0;
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * det.scale(guess, n);
  double previous = std::numeric_limits<double>::infinity();
  while (it < max_iterations)
  {
    const auto e = det.evaluate(z, n);
    if (std::abs(e.value) <= floor || std::abs(e.dkappa) == 0.0)
    {
      break;
    }
    ++it;
    const cplx step = e.value / e.dkappa;
    z -= step;
    if (!std::isfinite(std::abs(z)) || std::abs(z) > specfun::max_argument / std::max(1.0, std::sqrt(n)))
    {
      return std::nullopt;
    }
    // Stop on a tiny step or once rounding noise stops the contraction.
    const double size = std::abs(step);
    if (size <= 1e-14 * std::max(1.0, std::abs(z)) || (size < 1e-10 * std::max(1.0, std::abs(z)) && size > 0.5 * previous))
    {
      break;
    }
    previous = size;
  }
  const double residual = std::abs(det.value(z, n));
  const double scale = det.scale(z, n);
  if (!(residual <= residual_tolerance * scale))
  {
    return std::nullopt;
  }
  return CorrectorResult{z, it, residual, scale};
}

Trajectory continue_trajectory(const ModeDeterminant &det, double n_start, double n_end, cplx seed,
                               const StepControl &control)
{
  disk_ball::RefractiveIndex{n_start};
  disk_ball::RefractiveIndex{n_end};
  if ((n_start - 1.0) * (n_end - 1.0) <= 0.0)
  {
    throw disk_ball::ContractError("continue_trajectory: the n-range must not contain 1");
  }
  Continuation c(det, n_start, n_end, control);
  return c.run(n_start, seed);
}

cplx seed_root(const ModeDeterminant &det, double n)
{
  const rootfind::Holomorphic f(
      [&det, n](cplx k)
      {
        const auto e = det.evaluate(k, n);
        return rootfind::ValueAndDerivative{e.value, e.dkappa};
      });
  const auto roots = rootfind::find_roots(f, {cplx(6.25, 3.025), 5.75, 2.975});
  std::optional<cplx> best;
  for (const auto &r : roots)
  {
    if (r.location.imag() > 0.0 && (!best || r.location.real() < best->real()))
    {
      best = r.location;
    }
  }
  if (!best)
  {
    throw StepFailure("seed_root: no complex root in the seed window");
  }
  return *best;
}

std::vector<Event> detect_real_crossings(const Trajectory &traj, const std::vector<double> &ide_table)
{
  std::vector<Event> out;
  auto emit = [&](double n, cplx k)
  {
    Event e{EventKind::RealAxisCrossing, n, k, {}};
    if (!ide_table.empty())
    {
      const double ide = *std::min_element(ide_table.begin(), ide_table.end(), [&](double a, double b)
                                           { return std::abs(a - k.real()) < std::abs(b - k.real()); });
      const double mismatch = std::abs(k - ide);
      e.payload = {{"ide", ide}, {"mismatch", mismatch}, {"matched", mismatch < ide_match_tolerance ? 1.0 : 0.0}};
    }
    else
    {
      e.payload = {{"ide", nan}, {"mismatch", nan}, {"matched", 0.0}};
    }
    out.push_back(e);
  };
  const auto &pts = traj.points;
  std::size_t i = 0;
  while (i < pts.size())
  {
    if (std::abs(pts[i].kappa.imag()) < crossing_tolerance)
    {
      // One event per run of near-real points, at the most nearly real one.
      std::size_t best = i;
      std::size_t j = i;
      while (j < pts.size() && std::abs(pts[j].kappa.imag()) < crossing_tolerance)
      {
        if (std::abs(pts[j].kappa.imag()) < std::abs(pts[best].kappa.imag()))
        {
          best = j;
        }
        ++j;
      }
      emit(pts[best].n, pts[best].kappa);
      i = j;
      continue;
    }
    if (i + 1 < pts.size() && std::abs(pts[i + 1].kappa.imag()) >= crossing_tolerance &&
        (pts[i].kappa.imag() > 0) != (pts[i + 1].kappa.imag() > 0))
    {
      const double a = pts[i].kappa.imag(), b = pts[i + 1].kappa.imag();
      const double t = a / (a - b);
      emit(pts[i].n + t * (pts[i + 1].n - pts[i].n), pts[i].kappa + t * (pts[i + 1].kappa - pts[i].kappa));
    }
    ++i;
  }
  return out;
}

std::vector<Recurrence> predict_recurrences(double kappa_star, int p, int how_many, disk_ball::Dimension dim)
{
  const ModeDeterminant det(dim, p);
  if (how_many <= 0)
  {
    return {};
  }
  if (!(std::abs(det.radial(kappa_star).value) < 1e-10))
  {
    throw disk_ball::ContractError("predict_recurrences: kappa_star is not a Dirichlet root");
  }
  std::vector<Recurrence> out;
  int count = how_many + 8;
  while (int(out.size()) < how_many)
  {
    out.clear();
    for (double r : det.dirichlet_roots(count))
    {
      if (r > kappa_star * (1.0 + 1e-12) && int(out.size()) < how_many)
      {
        out.push_back({std::pow(r / kappa_star, 2), r});
      }
    }
    count *= 2;
  }
  return out;
}

std::vector<double> admissible_angles(double n_star)
{
  if (n_star > 1.0)
  {
    return {-pi / 3.0, pi / 3.0, pi};
  }
  return {0.0, -2.0 * pi / 3.0, 2.0 * pi / 3.0};
}

namespace
{

// Intercept of a least-squares line through (r_i, theta_i), angles unwrapped around the
// sample closest to the crossing.
double extrapolate_angle(std::vector<std::pair<double, double>> samples)
{
  std::sort(samples.begin(), samples.end());
  const double ref = samples.front().second;
  double sr = 0, st = 0, srr = 0, srt = 0;
  for (auto &[r, t] : samples)
  {
    t = ref + wrap(t - ref);
    sr += r;
    st += t;
    srr += r * r;
    srt += r * t;
  }
  const double m = double(samples.size());
  if (samples.size() < 2)
  {
    return wrap(st);
  }
  const double det = m * srr - sr * sr;
  if (std::abs(det) <= 1e-300)
  {
    return wrap(st / m);
  }
  return wrap((srr * st - sr * srt) / det);
}

}  // namespace

AngleEstimate estimate_approach_angle(const Trajectory &traj, const Event &crossing, double radius)
{
  const auto &pts = traj.points;
  if (pts.empty())
  {
    throw ResolutionError("estimate_approach_angle: empty trajectory");
  }
  std::size_t ic = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
  {
    if (std::abs(pts[i].n - crossing.n_at) + std::abs(pts[i].kappa - crossing.kappa_at) <
        std::abs(pts[ic].n - crossing.n_at) + std::abs(pts[ic].kappa - crossing.kappa_at))
    {
      ic = i;
    }
  }
  const double ks = crossing.kappa_at.real();
  const double ns = crossing.n_at;
  // Contiguous run of samples within the radius on one side of the crossing.
  auto collect = [&](long from, long stride)
  {
    std::vector<std::pair<double, double>> s;
    for (long i = from; i >= 0 && i < long(pts.size()); i += stride)
    {
      const double r = std::abs(pts[i].kappa - ks);
      if (r >= radius)
      {
        break;
      }
      if (r > 1e-14 && pts[i].n != ns)
      {
        s.push_back({r, std::arg(pts[i].kappa - ks)});
      }
    }
    return s;
  };
  const auto in = collect(long(ic) - 1, -1);
  if (in.size() < 5)
  {
    throw ResolutionError("estimate_approach_angle: fewer than 5 incoming samples within " +
                          std::to_string(radius) + " of the crossing; refine the steps near it");
  }
  const auto out = collect(long(ic) + 1, 1);
  AngleEstimate a{};
  a.samples = int(in.size());
  a.incoming_position = extrapolate_angle(in);
  const double in_side = ic > 0 ? pts[ic - 1].n - ns : 0.0;
  // d kappa / dn = (kappa - kappa*) / (3 (n - n*)) on the cube-root model.
  a.incoming_velocity = wrap(a.incoming_position - (in_side < 0 ? pi : 0.0));
  if (out.empty())
  {
    a.outgoing_position = nan;
    a.outgoing_velocity = nan;
  }
  else
  {
    a.outgoing_position = extrapolate_angle(out);
    const double out_side = pts[ic + 1].n - ns;
    a.outgoing_velocity = wrap(a.outgoing_position - (out_side < 0 ? pi : 0.0));
  }
  a.deviation = std::numeric_limits<double>::infinity();
  for (double target : admissible_angles(ns))
  {
    a.deviation = std::min(a.deviation, std::abs(wrap(a.incoming_velocity - target)));
  }
  a.admissible = a.deviation < 0.05;
  return a;
}

Trajectory symmetry_map(const Trajectory &traj)
{
  const bool below = std::all_of(traj.points.begin(), traj.points.end(), [](const auto &p) { return p.n < 1.0; });
  const bool above = std::all_of(traj.points.begin(), traj.points.end(), [](const auto &p) { return p.n > 1.0; });
  if (!below && !above)
  {
    throw std::domain_error("symmetry_map: trajectory straddles n = 1");
  }
  Trajectory out;
  out.mode = traj.mode;
  out.scatterer = traj.scatterer;
  for (const auto &p : traj.points)
  {
    const double rn = std::sqrt(p.n);
    TrajectoryPoint q{1.0 / p.n, p.kappa * rn, p.residual, std::nullopt};
    if (p.velocity)
    {
      q.velocity = -(*p.velocity * rn + p.kappa / (2.0 * rn)) * p.n * p.n;
    }
    out.points.push_back(q);
  }
  for (const auto &e : traj.events)
  {
    const double rn = std::sqrt(e.n_at);
    Event m{e.kind, 1.0 / e.n_at, e.kappa_at * rn, e.payload};
    for (const char *key : {"predicted_n", "observed_n"})
    {
      if (auto it = m.payload.find(key); it != m.payload.end())
      {
        it->second = 1.0 / it->second;
      }
    }
    if (auto it = m.payload.find("ide"); it != m.payload.end())
    {
      it->second *= rn;
    }
    out.events.push_back(m);
  }
  return out;
}

ConvergenceCheck convergence_diagnostics(const Trajectory &traj, double kappa_star)
{
  ConvergenceCheck c{nan, nan, nan, {}, true};
  const auto &pts = traj.points;
  if (pts.empty())
  {
    return c;
  }
  double n_max = -std::numeric_limits<double>::infinity();
  for (const auto &p : pts)
  {
    n_max = std::max(n_max, p.n);
  }
  double sup = 0.0, best8 = std::numeric_limits<double>::infinity();
  for (const auto &p : pts)
  {
    const double d = std::abs(p.kappa - kappa_star);
    if (p.n >= n_max - 10.0)
    {
      sup = std::max(sup, d);
    }
    if (p.n == n_max)
    {
      c.distance_at_end = d;
    }
    if (std::abs(p.n - 8.0) < best8)
    {
      best8 = std::abs(p.n - 8.0);
      c.distance_at_8 = n_max >= 8.0 ? d : nan;
    }
  }
  c.sup_distance_last_decade = sup;
  for (int k = 8; k + 1 <= n_max + 1e-12; ++k)
  {
    double m = -1.0;
    for (const auto &p : pts)
    {
      if (p.n >= k && (p.n < k + 1 || (k + 1 >= n_max && p.n <= k + 1)))
      {
        m = std::max(m, std::abs(p.kappa.imag()));
      }
    }
    if (m >= 0.0)
    {
      c.window_max_imag.push_back(m);
    }
  }
  for (std::size_t i = 1; i < c.window_max_imag.size(); ++i)
  {
    if (c.window_max_imag[i] > c.window_max_imag[i - 1] * (1.0 + 1e-12) + 1e-15)
    {
      c.envelope_non_increasing = false;
    }
  }
  return c;
}

}  // namespace itetraj::trajectory
