// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include "itetraj/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "itetraj/disk_ball.hpp"
#include "itetraj/mfs.hpp"
#include "itetraj/rootfind.hpp"

namespace itetraj::experiment
{

namespace fs = std::filesystem;
using nlohmann::json;
using trajectory::Event;
using trajectory::EventKind;
using trajectory::Trajectory;

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

bool is_analytic_kind(const std::string &kind) { return kind == "disk" || kind == "ball"; }

disk_ball::Dimension dimension_of(const ScattererSpec &s)
{
  return s.kind == "ball" ? disk_ball::Dimension::Ball : disk_ball::Dimension::Disk;
}

geometry::Scatterer make_scatterer(const ScattererSpec &s)
{
  if (s.kind == "disk")
    return geometry::unit_disk();
  if (s.kind == "ellipse")
    return geometry::ellipse(s.a, s.b);
  if (s.kind == "square")
    return geometry::square(s.side);
  if (s.kind == "triangle")
    return geometry::equilateral_triangle(s.side);
  if (s.kind == "deformed_ellipse")
    return geometry::deformed_ellipse();
  throw ConfigError("scatterer '" + s.kind + "' has no planar boundary for the MFS solver");
}

json layout_to_json(const LayoutSpec &l)
{
  return {{"interior_count", l.interior_count},
          {"interior_radius", l.interior_radius},
          {"collocation", l.collocation},
          {"source_radius", l.source_radius}};
}

LayoutSpec layout_from_json(const json &j, LayoutSpec base)
{
  base.interior_count = j.value("interior_count", base.interior_count);
  base.interior_radius = j.value("interior_radius", base.interior_radius);
  base.collocation = j.value("collocation", base.collocation);
  base.source_radius = j.value("source_radius", base.source_radius);
  return base;
}

std::pair<double, double> range_from_json(const json &j, const char *what)
{
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string(what) + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

void check_range(double a, double b, const std::string &what)
{
  if (!(a > 0.0) || !(b > 0.0))
    throw ConfigError(what + ": refractive indices must be positive");
  if (std::abs(a - 1.0) < 1e-6 || std::abs(b - 1.0) < 1e-6 || (a - 1.0) * (b - 1.0) < 0.0)
    throw ConfigError(what + ": n-range must exclude 1 by at least 1e-6");
}

std::string format_number(double x)
{
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

EventKind kind_from_string(const std::string &s)
{
  for (auto k : {EventKind::RealAxisCrossing, EventKind::IdeRecurrence, EventKind::AngleEstimate,
                 EventKind::BirthPoint, EventKind::ConvergenceCheck})
  {
    if (trajectory::to_string(k) == s)
      return k;
  }
  throw ConfigError("unknown event kind '" + s + "'");
}

// Runs jobs[i]() for all i on up to threads workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &job)
{
  const std::size_t workers = std::clamp<std::size_t>(std::size_t(std::max(threads, 1)), 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&]
  {
    for (std::size_t i = next++; i < count; i = next++)
      job(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
}

void sort_rows(Trajectory &t)
{
  std::stable_sort(t.points.begin(), t.points.end(), [](const auto &a, const auto &b) { return a.n < b.n; });
}

Trajectory mirror(const Trajectory &t)
{
  Trajectory out = t;
  for (auto &p : out.points)
  {
    p.kappa = std::conj(p.kappa);
    if (p.velocity)
      p.velocity = std::conj(*p.velocity);
  }
  for (auto &e : out.events)
    e.kappa_at = std::conj(e.kappa_at);
  return out;
}

std::vector<double> reference_ides(const ExperimentConfig &config)
{
  if (!config.ide.empty())
    return config.ide;
  try
  {
    return geometry::ide_reference(make_scatterer(config.scatterer), 4);
  }
  catch (const geometry::UnsupportedShape &)
  {
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < config.ide_guesses.size(); ++i)
  {
    const auto &layout = config.seeds.empty() ? LayoutSpec{} : config.seeds.front().layout;
    const auto l = geometry::layout_mfs(make_scatterer(config.scatterer), layout.interior_count,
                                        layout.interior_radius, layout.collocation, layout.source_radius);
    out.push_back(mfs::find_ide(l, config.ide_guesses[i]).location.real());
  }
  return out;
}

double nearest(const std::vector<double> &table, double x)
{
  double best = nan;
  for (double t : table)
  {
    if (!std::isfinite(best) || std::abs(t - x) < std::abs(best - x))
      best = t;
  }
  return best;
}

void add_analytic_events(Trajectory &t, const disk_ball::ModeDeterminant &det)
{
  const auto table = det.dirichlet_roots(40);
  for (auto &e : trajectory::detect_real_crossings(t, table))
    t.events.push_back(e);
  std::vector<Event> angles;
  for (const auto &e : t.events)
  {
    if (e.kind != EventKind::IdeRecurrence)
      continue;
    try
    {
      const auto a = trajectory::estimate_approach_angle(t, e);
      angles.push_back({EventKind::AngleEstimate, e.n_at, e.kappa_at,
                        {{"incoming_velocity", a.incoming_velocity},
                         {"outgoing_velocity", a.outgoing_velocity},
                         {"incoming_position", a.incoming_position},
                         {"outgoing_position", a.outgoing_position},
                         {"deviation", a.deviation},
                         {"samples", double(a.samples)}}});
    }
    catch (const std::exception &)
    {
    }
  }
  t.events.insert(t.events.end(), angles.begin(), angles.end());
  const auto first = std::find_if(t.events.begin(), t.events.end(),
                                  [](const Event &e) { return e.kind == EventKind::IdeRecurrence; });
  if (first != t.events.end() && !t.points.empty() && t.points.back().n > 8.0)
  {
    const double ide = first->payload.count("ide") ? first->payload.at("ide") : first->kappa_at.real();
    const auto d = trajectory::convergence_diagnostics(t, ide);
    t.events.push_back({EventKind::ConvergenceCheck, t.points.back().n, t.points.back().kappa,
                        {{"ide", ide},
                         {"distance_at_8", d.distance_at_8},
                         {"distance_at_end", d.distance_at_end},
                         {"sup_distance_last_decade", d.sup_distance_last_decade},
                         {"envelope_non_increasing", d.envelope_non_increasing ? 1.0 : 0.0}}});
  }
}

void add_mfs_events(Trajectory &t, double ide, double n_window)
{
  if (t.points.empty())
    return;
  double at_window = nan;
  for (const auto &p : t.points)
  {
    if (p.n <= n_window + 1e-12)
      at_window = std::abs(p.kappa - ide);
  }
  const auto &last = t.points.back();
  t.events.push_back({EventKind::ConvergenceCheck, last.n, last.kappa,
                      {{"ide", ide}, {"distance_at_end", std::abs(last.kappa - ide)},
                       {"window_start", n_window}, {"distance_at_window", at_window}}});
}

}  // namespace

std::map<std::string, double> default_tolerances()
{
  return {{"residual", 1e-9},    {"energy", 1e-8},     {"angle", 0.05},
          {"recurrence", 1e-6},  {"ide_match", trajectory::ide_match_tolerance},
          {"boundary", 1e-9},    {"ball_zero", 1e-12}, {"symmetry", 1e-6},
          {"misfit", 1e-4},      {"terminal_distance", 0.15}};
}

void apply_tolerance(ExperimentConfig &config, const std::string &assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("tolerance override '" + assignment + "' is not KEY=VAL");
  const std::string key = assignment.substr(0, eq);
  const auto defaults = default_tolerances();
  if (!defaults.count(key))
    throw ConfigError("unknown tolerance key '" + key + "'");
  std::size_t used = 0;
  double value = 0.0;
  try
  {
    value = std::stod(assignment.substr(eq + 1), &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (used == 0 || used != assignment.size() - eq - 1 || !(value > 0.0))
    throw ConfigError("tolerance '" + key + "' needs a positive number");
  config.tolerances[key] = value;
}

ExperimentConfig parse_config(const json &doc)
{
  ExperimentConfig c;
  try
  {
    c.name = doc.value("name", c.name);
    if (doc.contains("scatterer"))
    {
      const auto &s = doc.at("scatterer");
      c.scatterer.kind = s.value("kind", c.scatterer.kind);
      c.scatterer.a = s.value("a", c.scatterer.a);
      c.scatterer.b = s.value("b", c.scatterer.b);
      c.scatterer.side = s.value("side", c.scatterer.side);
    }
    const std::string solver = doc.value("solver", std::string("analytic"));
    if (solver == "analytic")
      c.solver = Solver::Analytic;
    else if (solver == "mfs")
      c.solver = Solver::Mfs;
    else
      throw ConfigError("solver must be 'analytic' or 'mfs'");
    c.conjugates = doc.value("conjugates", true);
    c.modes = doc.value("modes", std::vector<int>{});
    for (int p : c.modes)
    {
      if (p < 0)
        throw ConfigError("modes must be nonnegative");
    }
    if (doc.contains("n_range"))
      std::tie(c.n_start, c.n_end) = range_from_json(doc.at("n_range"), "n_range");
    if (doc.contains("steps"))
    {
      const auto &s = doc.at("steps");
      c.steps.initial = s.value("initial", c.steps.initial);
      c.steps.min_step = s.value("min", c.steps.min_step);
      c.steps.max_step = s.value("max", c.steps.max_step);
      c.steps.crossing_radius = s.value("crossing_radius", c.steps.crossing_radius);
      c.dn = s.value("dn", c.dn);
      c.max_halvings = s.value("max_halvings", c.max_halvings);
    }
    LayoutSpec base;
    if (doc.contains("layout"))
      base = layout_from_json(doc.at("layout"), base);
    const json seeds = doc.value("seeds", json::array());
    for (const auto &s : seeds)
    {
      SeedSpec seed;
      const auto k = s.at("kappa");
      if (!k.is_array() || k.size() != 2)
        throw ConfigError("seed kappa must be [re, im]");
      seed.kappa = {k[0].get<double>(), k[1].get<double>()};
      if (std::abs(seed.kappa) == 0.0)
        throw ConfigError("seeds must be nonzero");
      if (s.contains("n_range"))
        std::tie(seed.n_start, seed.n_end) = range_from_json(s.at("n_range"), "seed n_range");
      seed.layout = s.contains("layout") ? layout_from_json(s.at("layout"), base) : base;
      check_range(seed.n_start, seed.n_end, "seed");
      c.seeds.push_back(seed);
    }
    c.ide = doc.value("ide", std::vector<double>{});
    c.ide_guesses = doc.value("ide_guesses", std::vector<double>{});
    c.tolerances = default_tolerances();
    const json overrides = doc.value("tolerances", json::object());
    for (const auto &[key, value] : overrides.items())
      apply_tolerance(c, key + "=" + format_number(value.get<double>()));
  }
  catch (const json::exception &e)
  {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.solver == Solver::Analytic)
  {
    if (!is_analytic_kind(c.scatterer.kind))
      throw ConfigError("the analytic solver supports only 'disk' and 'ball'");
    check_range(c.n_start, c.n_end, "n_range");
  }
  else
  {
    make_scatterer(c.scatterer);
  }
  return c;
}

json to_json(const ExperimentConfig &c)
{
  json doc{{"name", c.name},
           {"scatterer", {{"kind", c.scatterer.kind}, {"a", c.scatterer.a}, {"b", c.scatterer.b}, {"side", c.scatterer.side}}},
           {"solver", c.solver == Solver::Analytic ? "analytic" : "mfs"},
           {"conjugates", c.conjugates},
           {"tolerances", c.tolerances}};
  if (c.solver == Solver::Analytic)
  {
    doc["modes"] = c.modes;
    doc["n_range"] = {c.n_start, c.n_end};
    doc["steps"] = {{"initial", c.steps.initial}, {"min", c.steps.min_step}, {"max", c.steps.max_step},
                    {"crossing_radius", c.steps.crossing_radius}};
  }
  else
  {
    doc["steps"] = {{"dn", c.dn}, {"max_halvings", c.max_halvings}};
    json seeds = json::array();
    for (const auto &s : c.seeds)
    {
      seeds.push_back({{"kappa", {s.kappa.real(), s.kappa.imag()}},
                       {"n_range", {s.n_start, s.n_end}},
                       {"layout", layout_to_json(s.layout)}});
    }
    doc["seeds"] = seeds;
    if (!c.ide.empty())
      doc["ide"] = c.ide;
    if (!c.ide_guesses.empty())
      doc["ide_guesses"] = c.ide_guesses;
  }
  return doc;
}

ExperimentConfig load_config(const fs::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  json doc;
  try
  {
    doc = json::parse(in);
  }
  catch (const json::exception &e)
  {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}; }

std::string preset_description(const std::string &name)
{
  static const std::map<std::string, std::string> text{
    {"fig1", "unit disk, modes 0-2, n in [1.05, 16], analytic"},
    {"fig2", "unit disk, modes 0-2, n in [0.0625, 0.95], analytic"},
    {"fig3", "unit ball, modes 0-2, n in [1.05, 16], analytic"},
    {"fig4", "ellipse (1, 0.5), seeds 4+i and 5+i, n in [4, 32], MFS"},
    {"fig5", "unit square, seeds 4.5+i (n to 32) and 7+i (n to 20), MFS"},
    {"fig6", "equilateral triangle, seeds 7.3+1.5i (n to 32) and 11+2i (n to 16), MFS"},
    {"fig7", "deformed ellipse, seeds 3+0.8i (n to 32) and 4+0.8i (n to 20), MFS"}};
  const auto it = text.find(name);
  if (it == text.end())
    throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig preset(const std::string &name)
{
  preset_description(name);
  json doc{{"name", name}};
  if (name == "fig1" || name == "fig2" || name == "fig3")
  {
    doc["scatterer"] = {{"kind", name == "fig3" ? "ball" : "disk"}};
    doc["solver"] = "analytic";
    doc["modes"] = {0, 1, 2};
    doc["n_range"] = name == "fig2" ? json{0.95, 0.0625} : json{1.05, 16.0};
    return parse_config(doc);
  }
  doc["solver"] = "mfs";
  auto seed = [](double re, double im, double n_end, json layout)
  { return json{{"kappa", {re, im}}, {"n_range", {4.0, n_end}}, {"layout", layout}}; };
  auto layout = [](int mi, double ri, int m, double rs)
  { return json{{"interior_count", mi}, {"interior_radius", ri}, {"collocation", m}, {"source_radius", rs}}; };
  if (name == "fig4")
  {
    doc["scatterer"] = {{"kind", "ellipse"}, {"a", 1.0}, {"b", 0.5}};
    const auto l = layout(10, 0.4, 40, 4.0);
    doc["seeds"] = {seed(4.0, 1.0, 32.0, l), seed(5.0, 1.0, 32.0, l)};
  }
  else if (name == "fig5")
  {
    doc["scatterer"] = {{"kind", "square"}, {"side", 1.0}};
    const auto l = layout(20, 0.25, 61, 0.75);
    doc["seeds"] = {seed(4.5, 1.0, 32.0, l), seed(7.0, 1.0, 20.0, l)};
  }
  else if (name == "fig6")
  {
    doc["scatterer"] = {{"kind", "triangle"}, {"side", 1.0}};
    doc["seeds"] = {seed(7.3, 1.5, 32.0, layout(20, 0.25, 51, 0.75)),
                    seed(11.0, 2.0, 16.0, layout(20, 0.25, 61, 0.75))};
  }
  else
  {
    doc["scatterer"] = {{"kind", "deformed_ellipse"}};
    const auto l = layout(20, 0.2, 51, 1.5);
    doc["seeds"] = {seed(3.0, 0.8, 32.0, l), seed(4.0, 0.8, 20.0, l)};
    doc["ide_guesses"] = {3.0, 4.3};
  }
  return parse_config(doc);
}

std::string TrajectoryRecord::stem() const
{
  std::ostringstream s;
  s << preset << (solver == "mfs" ? "_seed" : "_p") << mode << (sign == '+' ? "_plus" : "_minus");
  return s.str();
}

void write_record(const TrajectoryRecord &r, const fs::path &dir)
{
  fs::create_directories(dir);
  {
    std::ofstream out(dir / (r.stem() + ".dat"));
    if (!out)
      throw std::runtime_error("cannot write " + (dir / (r.stem() + ".dat")).string());
    out << std::setprecision(17);
    out << "# tool itetraj " << tool_version << "\n"
        << "# preset " << r.preset << "\n"
        << "# scatterer " << r.scatterer << "\n"
        << "# solver " << r.solver << "\n"
        << "# mode " << r.mode << "\n"
        << "# branch " << r.sign << "\n"
        << "# seed " << r.seed.real() << " " << r.seed.imag() << "\n"
        << "# n_range " << r.n_start << " " << r.n_end << "\n"
        << "# status " << (r.complete ? "complete" : "failed: " + r.failure) << "\n"
        << "# columns n re_kappa im_kappa " << (r.solver == "mfs" ? "misfit" : "residual") << "\n";
    for (const auto &p : r.trajectory.points)
      out << p.n << " " << p.kappa.real() << " " << p.kappa.imag() << " " << p.residual << "\n";
  }
  json events = json::array();
  for (const auto &e : r.trajectory.events)
  {
    json payload = json::object();
    for (const auto &[k, v] : e.payload)
      payload[k] = number_or_null(v);
    events.push_back({{"kind", trajectory::to_string(e.kind)},
                      {"n", number_or_null(e.n_at)},
                      {"kappa", {number_or_null(e.kappa_at.real()), number_or_null(e.kappa_at.imag())}},
                      {"payload", payload}});
  }
  std::ofstream side(dir / (r.stem() + ".events.json"));
  side << json{{"stem", r.stem()}, {"events", events}}.dump(1) << "\n";
}

TrajectoryRecord read_record(const fs::path &data_file)
{
  std::ifstream in(data_file);
  if (!in)
    throw std::runtime_error("cannot open " + data_file.string());
  TrajectoryRecord r;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    std::istringstream s(line);
    if (line[0] == '#')
    {
      std::string hash, key;
      s >> hash >> key;
      if (key == "preset")
        s >> r.preset;
      else if (key == "scatterer")
        s >> r.scatterer;
      else if (key == "solver")
        s >> r.solver;
      else if (key == "mode")
        s >> r.mode;
      else if (key == "branch")
        s >> r.sign;
      else if (key == "seed")
      {
        double re = 0, im = 0;
        s >> re >> im;
        r.seed = {re, im};
      }
      else if (key == "n_range")
        s >> r.n_start >> r.n_end;
      else if (key == "status")
      {
        std::string rest;
        std::getline(s >> std::ws, rest);
        r.complete = rest == "complete";
        if (!r.complete && rest.rfind("failed: ", 0) == 0)
          r.failure = rest.substr(8);
      }
      continue;
    }
    double n = 0, re = 0, im = 0, res = 0;
    if (!(s >> n >> re >> im >> res))
      throw std::runtime_error(data_file.string() + ": malformed row '" + line + "'");
    r.trajectory.points.push_back({n, {re, im}, res, std::nullopt});
  }
  r.trajectory.mode = r.mode;
  r.trajectory.scatterer = r.scatterer;
  fs::path side = data_file;
  side.replace_extension(".events.json");
  std::ifstream ev(side);
  if (ev)
  {
    const auto doc = json::parse(ev);
    auto num = [](const json &j) { return j.is_null() ? nan : j.get<double>(); };
    for (const auto &e : doc.at("events"))
    {
      Event out{kind_from_string(e.at("kind")), num(e.at("n")), {num(e.at("kappa")[0]), num(e.at("kappa")[1])}, {}};
      for (const auto &[k, v] : e.at("payload").items())
        out.payload[k] = num(v);
      r.trajectory.events.push_back(out);
    }
  }
  return r;
}

std::vector<TrajectoryRecord> compute(const ExperimentConfig &config, int threads)
{
  std::vector<std::vector<TrajectoryRecord>> slots;
  std::vector<std::function<std::vector<TrajectoryRecord>()>> jobs;
  const std::string solver = config.solver == Solver::Analytic ? "analytic" : "mfs";
  auto blank = [&](int mode, char sign)
  {
    TrajectoryRecord r;
    r.preset = config.name;
    r.scatterer = config.scatterer.kind;
    r.solver = solver;
    r.mode = mode;
    r.sign = sign;
    return r;
  };

  if (config.solver == Solver::Analytic)
  {
    for (int p : config.modes)
    {
      for (char sign : config.conjugates ? std::string("+-") : std::string("+"))
      {
        jobs.push_back(
          [&, p, sign]
          {
            auto r = blank(p, sign);
            r.n_start = config.n_start;
            r.n_end = config.n_end;
            const disk_ball::ModeDeterminant det(dimension_of(config.scatterer), p);
            try
            {
              const cplx upper = trajectory::seed_root(det, config.n_start);
              r.seed = sign == '+' ? upper : std::conj(upper);
              r.trajectory = trajectory::continue_trajectory(det, config.n_start, config.n_end, r.seed, config.steps);
              r.trajectory.scatterer = config.scatterer.kind;
              add_analytic_events(r.trajectory, det);
            }
            catch (const std::exception &e)
            {
              r.complete = false;
              r.failure = e.what();
            }
            sort_rows(r.trajectory);
            return std::vector<TrajectoryRecord>{r};
          });
      }
    }
  }
  else
  {
    const auto scatterer = make_scatterer(config.scatterer);
    std::vector<double> ides;
    if (!config.seeds.empty())
      ides = reference_ides(config);
    for (std::size_t i = 0; i < config.seeds.size(); ++i)
    {
      jobs.push_back(
        [&, i]
        {
          const auto &s = config.seeds[i];
          auto r = blank(int(i), '+');
          r.seed = s.kappa;
          r.n_start = s.n_start;
          r.n_end = s.n_end;
          mfs::RunOptions opt;
          opt.n_start = s.n_start;
          opt.n_end = s.n_end;
          opt.step = config.dn;
          opt.max_halvings = config.max_halvings;
          opt.find.accept = config.tolerances.at("misfit");
          try
          {
            const auto layout = geometry::layout_mfs(scatterer, s.layout.interior_count, s.layout.interior_radius,
                                                     s.layout.collocation, s.layout.source_radius);
            auto run = mfs::run_trajectory(layout, s.kappa, opt, config.scatterer.kind);
            r.trajectory = std::move(run.trajectory);
            r.complete = run.complete;
            r.failure = run.failure;
          }
          catch (const std::exception &e)
          {
            r.complete = false;
            r.failure = e.what();
          }
          sort_rows(r.trajectory);
          if (!ides.empty())
            add_mfs_events(r.trajectory, nearest(ides, s.kappa.real()), 0.5 * (s.n_start + s.n_end));
          std::vector<TrajectoryRecord> out{r};
          if (config.conjugates)
          {
            auto m = r;
            m.sign = '-';
            m.seed = std::conj(r.seed);
            m.trajectory = mirror(r.trajectory);
            out.push_back(m);
          }
          return out;
        });
    }
  }
  slots.resize(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { slots[i] = jobs[i](); });
  std::vector<TrajectoryRecord> out;
  for (auto &s : slots)
    out.insert(out.end(), s.begin(), s.end());
  return out;
}

RunResult run(const ExperimentConfig &config, const fs::path &out, int threads)
{
  RunResult result;
  for (const auto &r : compute(config, threads))
  {
    write_record(r, out);
    result.files.push_back(out / (r.stem() + ".dat"));
    if (!r.complete)
      result.failures.push_back(r.stem() + ": " + r.failure);
  }
  return result;
}

namespace
{

struct Reporter
{
  std::vector<PropertyResult> &out;

  // Smaller measured values are better.
  void upper(const std::string &property, const std::string &subject, double measured, double tol,
             const std::string &detail = {})
  {
    out.push_back({property, subject, std::isfinite(measured) && measured <= tol, measured, tol, detail});
  }
};

std::vector<Event> crossings_of(const Trajectory &t)
{
  std::vector<Event> out;
  for (const auto &e : t.events)
  {
    if (e.kind == EventKind::IdeRecurrence)
      out.push_back(e);
  }
  return out;
}

void verify_analytic(const ExperimentConfig &config, const TrajectoryRecord &r, Reporter &rep)
{
  const auto &tol = config.tolerances;
  const auto dim = dimension_of(config.scatterer);
  const disk_ball::ModeDeterminant det(dim, r.mode);
  const std::string who = r.stem();
  const auto &pts = r.trajectory.points;
  if (pts.empty())
  {
    rep.out.push_back({"trajectory", who, false, nan, nan, r.failure.empty() ? "no rows" : r.failure});
    return;
  }

  double worst = 0.0;
  for (const auto &p : pts)
  {
    const double scale = det.scale(p.kappa, p.n);
    worst = std::max(worst, std::abs(det.value(p.kappa, p.n)) / (scale > 0.0 ? scale : 1.0));
  }
  rep.upper("residual", who, worst, tol.at("residual"));

  if (dim == disk_ball::Dimension::Disk)
  {
    std::vector<std::size_t> complex_rows;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
      if (std::abs(pts[i].kappa.imag()) > 1e-3)
        complex_rows.push_back(i);
    }
    double e_worst = 0.0;
    std::string detail;
    const std::size_t want = std::min<std::size_t>(20, complex_rows.size());
    for (std::size_t j = 0; j < want; ++j)
    {
      const auto &p = pts[complex_rows[j * complex_rows.size() / want]];
      try
      {
        const disk_ball::ModeIndex mi(r.mode);
        const disk_ball::WaveNumber k(p.kappa);
        const disk_ball::RefractiveIndex n(p.n);
        e_worst = std::max(e_worst, std::abs(disk_ball::energy_mismatch(mi, k, n)) / disk_ball::energy_norm(mi, k, n));
      }
      catch (const std::exception &e)
      {
        e_worst = std::numeric_limits<double>::infinity();
        detail = e.what();
      }
    }
    if (want > 0)
      rep.upper("energy", who, e_worst, tol.at("energy"), detail);
  }

  const auto table = det.dirichlet_roots(40);
  for (const auto &e : trajectory::detect_real_crossings(r.trajectory, table))
  {
    std::ostringstream d;
    d << std::setprecision(10) << "n=" << e.n_at << " ide=" << e.payload.at("ide");
    rep.upper("crossing_at_ide", who, e.payload.at("mismatch"), tol.at("ide_match"), d.str());
  }

  for (const auto &e : crossings_of(r.trajectory))
  {
    const double ide = e.kappa_at.real();
    std::ostringstream d;
    d << std::setprecision(10) << "n*=" << e.n_at << " ide=" << ide;

    try
    {
      const auto a = trajectory::estimate_approach_angle(r.trajectory, e);
      rep.upper("angle", who, a.deviation, tol.at("angle"), d.str());
    }
    catch (const std::exception &ex)
    {
      rep.out.push_back({"angle", who, false, nan, tol.at("angle"), d.str() + ": " + ex.what()});
    }

    const auto pred = trajectory::predict_recurrences(ide, r.mode, 6, dim);
    double gap = std::numeric_limits<double>::infinity();
    double n_star = e.n_at;
    for (const auto &q : pred)
    {
      if (std::abs(q.n_star - e.n_at) < gap)
      {
        gap = std::abs(q.n_star - e.n_at);
        n_star = q.n_star;
      }
    }
    if (e.n_at < 1.0)
    {
      // Below 1 the crossing pairs the IDE with a smaller root of the same mode.
      for (double lower : det.dirichlet_roots(40))
      {
        const double cand = (lower / ide) * (lower / ide);
        if (lower < ide && std::abs(cand - e.n_at) < gap)
        {
          gap = std::abs(cand - e.n_at);
          n_star = cand;
        }
      }
    }
    rep.upper("recurrence", who, gap, tol.at("recurrence"), d.str());

    try
    {
      const rootfind::Holomorphic f([&](cplx z)
                                    {
                                      const auto v = det.evaluate(z, n_star);
                                      return rootfind::ValueAndDerivative{v.value, v.dkappa};
                                    });
      const auto count = rootfind::count_roots(f, {cplx(ide, 0.0), 0.2, 0.2});
      rep.out.push_back({"triple_root", who, count.count == 3, double(count.count), 3.0, d.str()});
    }
    catch (const std::exception &ex)
    {
      rep.out.push_back({"triple_root", who, false, nan, 3.0, d.str() + ": " + ex.what()});
    }

    if (dim == disk_ball::Dimension::Disk)
    {
      try
      {
        double b = 0.0;
        for (const auto &res : disk_ball::neighbour_pair_residuals(
               disk_ball::ModeIndex(r.mode), disk_ball::WaveNumber(ide), disk_ball::RefractiveIndex(n_star)))
          b = std::max({b, std::abs(res.dirichlet), std::abs(res.neumann)});
        rep.upper("boundary_identity", who, b, tol.at("boundary"), d.str());
      }
      catch (const std::exception &ex)
      {
        rep.out.push_back({"boundary_identity", who, false, nan, tol.at("boundary"), d.str() + ": " + ex.what()});
      }
    }
  }

  const auto first = crossings_of(r.trajectory);
  if (!first.empty() && pts.back().n > 8.0)
  {
    const auto d = trajectory::convergence_diagnostics(r.trajectory, first.front().kappa_at.real());
    rep.out.push_back({"convergence", who, d.distance_at_end < d.distance_at_8, d.distance_at_end, d.distance_at_8,
                       "distance at the last n against distance at n = 8"});
  }
}

void verify_symmetry(const ExperimentConfig &config, int p, Reporter &rep)
{
  const disk_ball::ModeDeterminant det(disk_ball::Dimension::Disk, p);
  const double hi = std::max(config.n_start, config.n_end), lo = std::min(config.n_start, config.n_end);
  std::ostringstream who;
  who << config.name << "_p" << p;
  try
  {
    const auto upper = trajectory::continue_trajectory(det, 1.0 / hi, 1.0 / lo, trajectory::seed_root(det, 1.0 / hi));
    const auto mapped = trajectory::symmetry_map(upper);
    trajectory::StepControl ctl = config.steps;
    ctl.checkpoints.clear();
    for (std::size_t i = 0; i < mapped.points.size(); i += 5)
    {
      const double n = mapped.points[i].n;
      if (n < 0.99 * hi && n > 1.1 * lo)
        ctl.checkpoints.push_back(n);
    }
    const auto lower = trajectory::continue_trajectory(det, hi, lo, trajectory::seed_root(det, hi), ctl);
    double worst = 0.0;
    int compared = 0;
    for (const auto &q : mapped.points)
    {
      const auto it = std::find_if(lower.points.begin(), lower.points.end(), [&](const auto &x) { return x.n == q.n; });
      if (it != lower.points.end())
      {
        worst = std::max(worst, std::abs(it->kappa - q.kappa));
        ++compared;
      }
    }
    const bool enough = compared >= int(ctl.checkpoints.size()) - 4 && compared > 0;
    rep.out.push_back({"symmetry", who.str(), enough && worst <= config.tolerances.at("symmetry"), worst,
                       config.tolerances.at("symmetry"), std::to_string(compared) + " checkpoints compared"});
  }
  catch (const std::exception &e)
  {
    rep.out.push_back({"symmetry", who.str(), false, nan, config.tolerances.at("symmetry"), e.what()});
  }
}

void verify_ball_zeros(const ExperimentConfig &config, Reporter &rep)
{
  for (int q : {2, 3})
  {
    for (int m = 1; m <= 3; ++m)
    {
      const double k = m * std::numbers::pi;
      const cplx f = disk_ball::det_ball(disk_ball::ModeIndex(0), disk_ball::WaveNumber(k),
                                         disk_ball::RefractiveIndex(double(q * q)));
      std::ostringstream d;
      d << "kappa=" << m << "pi n=" << q * q;
      rep.upper("ball_zero", config.name, std::abs(f), config.tolerances.at("ball_zero"), d.str());
    }
  }
}

void verify_mfs(const ExperimentConfig &config, const TrajectoryRecord &r, const std::vector<double> &ides,
                Reporter &rep)
{
  const std::string who = r.stem();
  const auto &pts = r.trajectory.points;
  if (r.mode < 0 || std::size_t(r.mode) >= config.seeds.size())
  {
    rep.out.push_back({"trajectory", who, false, nan, nan, "no seed for this record"});
    return;
  }
  rep.out.push_back({"complete", who, r.complete, pts.empty() ? nan : pts.back().n, config.seeds[r.mode].n_end, r.failure});
  if (pts.empty())
    return;
  const auto &s = config.seeds[r.mode];
  const auto layout = geometry::layout_mfs(make_scatterer(config.scatterer), s.layout.interior_count,
                                           s.layout.interior_radius, s.layout.collocation, s.layout.source_radius);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); i += 4)
    worst = std::max(worst, mfs::misfit(pts[i].kappa, pts[i].n, layout, mfs::Problem::Transmission).value);
  rep.upper("misfit", who, worst, config.tolerances.at("misfit"));

  if (ides.empty())
    return;
  const double ide = nearest(ides, s.kappa.real());
  std::ostringstream d;
  d << std::setprecision(10) << "ide=" << ide;
  if (r.complete)
    rep.upper("terminal_distance", who, std::abs(pts.back().kappa - ide), config.tolerances.at("terminal_distance"), d.str());
  // Envelope of the distance over unit n-windows in the second half of the range.
  const double from = 0.5 * (s.n_start + s.n_end);
  std::vector<double> envelope;
  for (double a = from; a < pts.back().n - 1e-9; a += 1.0)
  {
    double m = 0.0;
    for (const auto &p : pts)
    {
      if (p.n >= a - 1e-12 && p.n <= a + 1.0 + 1e-12)
        m = std::max(m, std::abs(p.kappa - ide));
    }
    envelope.push_back(m);
  }
  double rise = 0.0;
  for (std::size_t i = 1; i < envelope.size(); ++i)
    rise = std::max(rise, envelope[i] - envelope[i - 1]);
  rep.out.push_back({"distance_decrease", who, envelope.size() >= 2 && rise <= 0.0, rise, 0.0,
                     d.str() + " largest window-to-window increase from n=" + format_number(from)});
}

}  // namespace

std::vector<PropertyResult> verify(const ExperimentConfig &config, const fs::path &dir, int threads)
{
  std::vector<TrajectoryRecord> records;
  std::vector<std::string> stems;
  {
    std::vector<TrajectoryRecord> expected;
    auto stub = [&](int mode, char sign)
    {
      TrajectoryRecord r;
      r.preset = config.name;
      r.solver = config.solver == Solver::Analytic ? "analytic" : "mfs";
      r.mode = mode;
      r.sign = sign;
      return r.stem();
    };
    const int count = config.solver == Solver::Analytic ? int(config.modes.size()) : int(config.seeds.size());
    for (int i = 0; i < count; ++i)
    {
      const int mode = config.solver == Solver::Analytic ? config.modes[i] : i;
      stems.push_back(stub(mode, '+'));
      if (config.conjugates)
        stems.push_back(stub(mode, '-'));
    }
  }
  const bool all_present = !dir.empty() && std::all_of(stems.begin(), stems.end(), [&](const std::string &s)
                                                       { return fs::exists(dir / (s + ".dat")); });
  if (all_present)
  {
    for (const auto &s : stems)
      records.push_back(read_record(dir / (s + ".dat")));
  }
  else
  {
    records = compute(config, threads);
    for (auto &r : records)
    {
      if (!dir.empty() && fs::exists(dir / (r.stem() + ".dat")))
        r = read_record(dir / (r.stem() + ".dat"));
    }
  }

  std::vector<PropertyResult> out;
  Reporter rep{out};
  if (config.solver == Solver::Analytic)
  {
    for (const auto &r : records)
      verify_analytic(config, r, rep);
    if (config.scatterer.kind == "disk" && config.n_start < 1.0)
    {
      for (int p : config.modes)
        verify_symmetry(config, p, rep);
    }
    if (config.scatterer.kind == "ball")
      verify_ball_zeros(config, rep);
  }
  else
  {
    const auto ides = config.seeds.empty() ? std::vector<double>{} : reference_ides(config);
    for (const auto &r : records)
      verify_mfs(config, r, ides, rep);
  }
  return out;
}

json to_json(const std::vector<PropertyResult> &report)
{
  json rows = json::array();
  for (const auto &p : report)
  {
    rows.push_back({{"property", p.property},
                    {"subject", p.subject},
                    {"pass", p.pass},
                    {"measured", number_or_null(p.measured)},
                    {"tolerance", number_or_null(p.tolerance)},
                    {"detail", p.detail}});
  }
  const bool ok = std::all_of(report.begin(), report.end(), [](const PropertyResult &p) { return p.pass; });
  return {{"pass", ok}, {"properties", rows}};
}

}  // namespace itetraj::experiment
