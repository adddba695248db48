// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_TRAJECTORY_HPP
#define ITETRAJ_TRAJECTORY_HPP

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itetraj/disk_ball.hpp"

namespace itetraj::trajectory
{

using cplx = std::complex<double>;

inline constexpr double crossing_tolerance = 1e-4;
inline constexpr double ide_match_tolerance = 5e-3;

struct TrajectoryPoint
{
  double n;
  cplx kappa;
  double residual = 0.0;
  std::optional<cplx> velocity;
};

enum class EventKind
{
  RealAxisCrossing,
  IdeRecurrence,
  AngleEstimate,
  BirthPoint,
  ConvergenceCheck
};

std::string to_string(EventKind kind);

struct Event
{
  EventKind kind;
  double n_at;
  cplx kappa_at;
  // Kind-specific numbers, e.g. "ide", "mismatch", "predicted_n", "angle".
  std::map<std::string, double> payload;
};

// Points are stored in continuation order, so n is monotone but may decrease.
struct Trajectory
{
  int mode = 0;
  std::string scatterer;
  std::vector<TrajectoryPoint> points;
  std::vector<Event> events;
};

// How outgoing branches are chosen after a triple point.
enum class BranchRule
{
  KeepHalfPlane,
  AngleContinuous
};

struct StepControl
{
  double initial = 0.01;
  double min_step = 1e-5;
  double max_step = 0.1;
  double trust_radius = 0.05;
  int max_newton = 5;
  // Residual bound, relative to the determinant scale.
  double residual_tolerance = 1e-9;
  // Distance |kappa - kappa*| predicted by the cube-root model at which a crossing is resolved.
  double crossing_radius = 3e-3;
  BranchRule branch = BranchRule::KeepHalfPlane;
  // n values the continuation must land on exactly.
  std::vector<double> checkpoints;
};

class BranchJumpError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class StepFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ResolutionError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Newton corrector on det(., n). Returns nullopt when it does not reach the residual bound.
struct CorrectorResult
{
  cplx kappa;
  int iterations;
  double residual;
  double scale;
};
std::optional<CorrectorResult> correct(const disk_ball::ModeDeterminant &det, cplx guess, double n,
                                       double residual_tolerance = 1e-9, int max_iterations = 20);

// Predictor-corrector continuation of the root through seed from n_start to n_end.
// Triple points on the way are resolved with the cube-root local model and recorded
// as IdeRecurrence events.
Trajectory continue_trajectory(const disk_ball::ModeDeterminant &det, double n_start, double n_end,
                               cplx seed, const StepControl &control = {});

// Root of smallest real part in the upper window Re in [0.5, 12], Im in [0.05, 6].
cplx seed_root(const disk_ball::ModeDeterminant &det, double n);

// Crossings of Im kappa = 0, each matched to the nearest entry of ide_table.
std::vector<Event> detect_real_crossings(const Trajectory &traj, const std::vector<double> &ide_table);

struct Recurrence
{
  double n_star;
  double kappa_source;
};

// n* = (kappa** / kappa*)^2 over the successive Dirichlet roots kappa** above kappa*.
std::vector<Recurrence> predict_recurrences(double kappa_star, int p, int how_many,
                                            disk_ball::Dimension dim = disk_ball::Dimension::Disk);

// Angles at a crossing. Position angles are arg(kappa - kappa*); velocity angles are
// arg(d kappa / dn) with n increasing. Both are extrapolated to n = n*.
struct AngleEstimate
{
  double incoming_position;
  double incoming_velocity;
  double outgoing_position;  // NaN when the trajectory ends at the crossing
  double outgoing_velocity;
  double deviation;          // distance of incoming_velocity to the admissible set
  bool admissible;
  int samples;
};

std::vector<double> admissible_angles(double n_star);

AngleEstimate estimate_approach_angle(const Trajectory &traj, const Event &crossing,
                                      double radius = 0.1);

// (n, kappa) -> (1/n, kappa sqrt(n)).
Trajectory symmetry_map(const Trajectory &traj);

struct ConvergenceCheck
{
  double sup_distance_last_decade;
  double distance_at_end;
  double distance_at_8;
  std::vector<double> window_max_imag;  // unit n-windows beyond n = 8
  bool envelope_non_increasing;
};

ConvergenceCheck convergence_diagnostics(const Trajectory &traj, double kappa_star);

}  // namespace itetraj::trajectory

#endif  // ITETRAJ_TRAJECTORY_HPP
