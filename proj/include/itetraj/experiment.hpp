// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_EXPERIMENT_HPP
#define ITETRAJ_EXPERIMENT_HPP

#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "itetraj/geometry.hpp"
#include "itetraj/trajectory.hpp"

namespace itetraj::experiment
{

using cplx = std::complex<double>;

inline constexpr const char *tool_version = "0.1.0";

enum class Solver
{
  Analytic,
  Mfs
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ScattererSpec
{
  std::string kind = "disk";  // disk, ball, ellipse, square, triangle, deformed_ellipse
  double a = 1.0;             // ellipse semi-axes
  double b = 0.5;
  double side = 1.0;          // square and triangle
};

struct LayoutSpec
{
  int interior_count = 10;
  double interior_radius = 0.5;
  int collocation = 40;
  double source_radius = 2.0;
};

// One MFS trajectory: upper seed, its n-range and layout. The conjugate branch is
// written as the mirror image.
struct SeedSpec
{
  cplx kappa;
  double n_start = 4.0;
  double n_end = 32.0;
  LayoutSpec layout;
};

struct ExperimentConfig
{
  std::string name = "custom";
  ScattererSpec scatterer;
  Solver solver = Solver::Analytic;

  // Analytic solver.
  std::vector<int> modes;
  double n_start = 1.05;
  double n_end = 16.0;
  trajectory::StepControl steps;

  // MFS solver.
  std::vector<SeedSpec> seeds;
  double dn = 0.25;
  int max_halvings = 4;
  // Reference Dirichlet eigenvalues; when empty they come from the closed forms or,
  // failing that, from an MFS search around ide_guesses.
  std::vector<double> ide;
  std::vector<double> ide_guesses;

  // Property tolerances, see default_tolerances().
  std::map<std::string, double> tolerances;

  bool conjugates = true;
};

std::map<std::string, double> default_tolerances();

ExperimentConfig parse_config(const nlohmann::json &doc);
nlohmann::json to_json(const ExperimentConfig &config);
ExperimentConfig load_config(const std::filesystem::path &path);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string &name);
std::string preset_description(const std::string &name);

// Applies KEY=VAL to config.tolerances; unknown keys are rejected.
void apply_tolerance(ExperimentConfig &config, const std::string &assignment);

// One (mode or seed, sign) branch with everything needed to reproduce it.
struct TrajectoryRecord
{
  std::string preset;
  std::string scatterer;
  std::string solver;
  int mode = 0;       // mode index, or seed index for MFS
  char sign = '+';
  cplx seed;
  double n_start = 0.0;
  double n_end = 0.0;
  bool complete = true;
  std::string failure;
  trajectory::Trajectory trajectory;  // rows kept in ascending n

  std::string stem() const;
};

void write_record(const TrajectoryRecord &record, const std::filesystem::path &dir);
TrajectoryRecord read_record(const std::filesystem::path &data_file);

// Computes every branch of the config, threads worker threads in parallel.
std::vector<TrajectoryRecord> compute(const ExperimentConfig &config, int threads = 1);

struct RunResult
{
  std::vector<std::filesystem::path> files;
  std::vector<std::string> failures;
};

RunResult run(const ExperimentConfig &config, const std::filesystem::path &out, int threads = 1);

struct PropertyResult
{
  std::string property;
  std::string subject;
  bool pass;
  double measured;
  double tolerance;
  std::string detail;
};

// Checks the trajectory properties on the records found in dir, computing missing
// branches on demand.
std::vector<PropertyResult> verify(const ExperimentConfig &config, const std::filesystem::path &dir,
                                   int threads = 1);

nlohmann::json to_json(const std::vector<PropertyResult> &report);

}  // namespace itetraj::experiment

#endif  // ITETRAJ_EXPERIMENT_HPP
