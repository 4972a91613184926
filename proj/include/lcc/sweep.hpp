#pragma once

// Experiment runner: decompose Gaussian targets under several configs,
// pick one operating point per grid value and trial, and emit CSV.
//
// Grid kinds
//   target_sqnr   first point whose SQNR exceeds the grid value
//   vertex_budget best point with at most `value` internal vertices
//   adder_budget  best point with cost_adders <= value
//   cost_budget   best point with cost_total <= value
//
// fs/fp/ma runs are prefix-closed (a run to a higher target passes through
// every lower target), so one run per trial yields every operating point.
// sliced and csd are re-run along a ladder (targets / digit counts).
//
// Aggregates average squared errors and signal power over trials and then
// take dB; costs are plain means.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lcc/cost.hpp"
#include "lcc/decompose.hpp"
#include "lcc/evaluation.hpp"
#include "lcc/random.hpp"

namespace lcc {

enum class GridKind { target_sqnr, vertex_budget, adder_budget, cost_budget };

inline const char* to_string(GridKind g) {
  switch (g) {
    case GridKind::target_sqnr: return "target_sqnr";
    case GridKind::vertex_budget: return "vertex_budget";
    case GridKind::adder_budget: return "adder_budget";
    case GridKind::cost_budget: return "cost_budget";
  }
  return "?";
}

struct SweepConfig {
  std::string label;
  DecomposeConfig config;
};

struct ExperimentSpec {
  std::size_t rows = 16;
  std::size_t cols = 4;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::vector<SweepConfig> configs;
  CostModel cost{};
  GridKind grid_kind = GridKind::target_sqnr;
  std::vector<double> grid;
  double ladder_step_db = 1.0;  // sliced re-runs under budget grids
  int csd_max_digits = 12;
  std::size_t threads = 1;
  bool timing = false;  // off keeps the CSV byte-deterministic
};

/// Metrics of one candidate DAG for one trial.
struct OperatingPoint {
  double sqnr_db = 0.0;
  double noise = 0.0;
  std::size_t internal_vertices = 0;
  std::size_t n_add = 0, n_delay = 0, n_inv = 0;
  double cost_adders = 0.0;
  double cost_total = 0.0;
  double wall_ms = 0.0;
};

struct TrialRow {
  std::size_t config = 0;
  std::size_t grid = 0;
  std::size_t trial = 0;
  OperatingPoint point;
  double signal = 0.0;
  std::string flag;
};

struct AggregateRow {
  std::size_t config = 0;
  std::size_t grid = 0;
  double sqnr_db = 0.0;
  double n_add = 0.0, n_delay = 0.0, n_inv = 0.0;
  double cost_adders = 0.0, cost_total = 0.0, wall_ms = 0.0;
  std::size_t flagged = 0;
};

struct SweepResult {
  ExperimentSpec spec;
  std::vector<TrialRow> rows;  // ordered by (config, grid, trial)
  std::vector<AggregateRow> aggregates;

  const AggregateRow& aggregate(std::size_t config, std::size_t grid) const {
    return aggregates.at(config * spec.grid.size() + grid);
  }
  std::string to_csv() const;
};

inline const char* csv_header() {
  return "algorithm,s,dmax,q,grid,trial,sqnr_db,n_add,n_delay,n_inv,cost_adders,cost_total,wall_ms,"
         "flag";
}

namespace detail {

inline OperatingPoint measure(const TargetMatrix& t, const ComputationDag& dag, double sqnr,
                              const CostModel& model) {
  OperatingPoint p;
  p.sqnr_db = sqnr;
  p.noise = pairwise_sum(output_errors(t, dag));
  p.internal_vertices = dag.num_internal();
  CostReport r = total_cost(dag, model);
  p.n_add = r.n_add;
  p.n_delay = r.n_delay;
  p.n_inv = r.n_inv;
  p.cost_adders = static_cast<double>(r.n_add) * model.c_add;
  p.cost_total = r.total;
  return p;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Candidate operating points for one (config, trial), cheapest first.
inline std::vector<OperatingPoint> trial_points(const TargetMatrix& t, const SweepConfig& sc,
                                                const ExperimentSpec& spec) {
  std::vector<OperatingPoint> pts;
  const auto start = std::chrono::steady_clock::now();
  DecomposeConfig cfg = sc.config;
  const double top = spec.grid.empty() ? cfg.target_sqnr_db
                                       : *std::max_element(spec.grid.begin(), spec.grid.end());
  if (spec.grid_kind == GridKind::target_sqnr) cfg.target_sqnr_db = top;

  switch (cfg.algorithm) {
    case Algorithm::fs:
    case Algorithm::fp:
    case Algorithm::ma: {
      DecompositionResult r = decompose(t, cfg);
      const double ms = elapsed_ms(start);
      for (std::size_t i = 0; i < r.log.size(); ++i) {
        OperatingPoint p = measure(t, snapshot(r, i), r.log[i].sqnr_db, spec.cost);
        p.wall_ms = ms;
        pts.push_back(p);
      }
      break;
    }
    case Algorithm::sliced: {
      std::vector<double> ladder;
      if (spec.grid_kind == GridKind::target_sqnr) {
        ladder = spec.grid;
        std::sort(ladder.begin(), ladder.end());
      } else {
        for (double e = 0.0; e <= cfg.target_sqnr_db + 1e-9; e += spec.ladder_step_db)
          ladder.push_back(e);
      }
      for (double target : ladder) {
        const auto s0 = std::chrono::steady_clock::now();
        cfg.target_sqnr_db = target;
        DecompositionResult r = decompose(t, cfg);
        OperatingPoint p = measure(t, r.dag, r.sqnr_db, spec.cost);
        p.wall_ms = elapsed_ms(s0);
        pts.push_back(p);
      }
      break;
    }
    case Algorithm::csd: {
      for (int d = 1; d <= spec.csd_max_digits; ++d) {
        const auto s0 = std::chrono::steady_clock::now();
        DecompositionResult r = csd_matrix_baseline(t, d, cfg.bounds);
        OperatingPoint p = measure(t, r.dag, r.sqnr_db, spec.cost);
        p.wall_ms = elapsed_ms(s0);
        pts.push_back(p);
      }
      break;
    }
  }
  return pts;
}

inline std::pair<OperatingPoint, std::string> pick(const std::vector<OperatingPoint>& pts,
                                                  GridKind kind, double value) {
  if (kind == GridKind::target_sqnr) {
    // cheapest point meeting the target
    const OperatingPoint* best = nullptr;
    for (const OperatingPoint& p : pts)
      if (p.sqnr_db > value && (!best || p.cost_total < best->cost_total)) best = &p;
    if (best) return {*best, ""};
    auto top = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return a.sqnr_db < b.sqnr_db;
    });
    return {*top, "below-target"};
  }
  auto budget_of = [&](const OperatingPoint& p) {
    switch (kind) {
      case GridKind::vertex_budget: return static_cast<double>(p.internal_vertices);
      case GridKind::adder_budget: return p.cost_adders;
      default: return p.cost_total;
    }
  };
  const OperatingPoint* best = nullptr;
  for (const OperatingPoint& p : pts)
    if (budget_of(p) <= value && (!best || p.sqnr_db > best->sqnr_db)) best = &p;
  if (best) return {*best, ""};
  auto cheapest = std::min_element(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
    return budget_of(a) < budget_of(b);
  });
  return {*cheapest, "over-budget"};
}

inline std::string fmt_double(double x, const char* format = "%.6f") {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

inline std::string schedule_s(const DecomposeConfig& c) {
  std::string out;
  for (const SchedulePhase& p : c.schedule) out += (out.empty() ? "" : "/") + std::to_string(p.s);
  return out;
}

inline std::string schedule_q(const DecomposeConfig& c) {
  std::string out;
  for (const SchedulePhase& p : c.schedule)
    out += (out.empty() ? "" : "/") + (p.solver == WiringSolver::rs ? std::to_string(p.q) : "-");
  return out;
}

inline std::string dmax_field(const DecomposeConfig& c) {
  if (c.algorithm != Algorithm::ma && c.inner != Algorithm::ma) return "-";
  return c.delta_mu_max ? std::to_string(*c.delta_mu_max) : "inf";
}

}  // namespace detail

/// Every candidate operating point of one (config, trial).
struct TrialPoints {
  std::vector<OperatingPoint> points;
  double signal = 0.0;
  std::string failure;  // empty unless the run threw
};

/// Runs every (config, trial); result index is config * trials + trial.
/// The grid is only used to size target ladders, so one collection can be
/// tabulated against several grids.
inline std::vector<TrialPoints> collect_points(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw Error(ErrorKind::invalid_argument, "trials must be >= 1");
  if (spec.configs.empty()) throw Error(ErrorKind::invalid_argument, "no algorithm configs");

  const std::size_t n_tasks = spec.configs.size() * spec.trials;
  std::vector<TrialPoints> out(n_tasks);
  std::size_t next_task = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::size_t task;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_task >= n_tasks) return;
        task = next_task++;
      }
      const std::size_t c = task / spec.trials, trial = task % spec.trials;
      const TargetMatrix t = gen_gaussian_matrix(spec.rows, spec.cols, trial_seed(spec.seed, trial));
      TrialPoints& tp = out[task];
      tp.signal = t.squared_frobenius();
      try {
        tp.points = detail::trial_points(t, spec.configs[c], spec);
        if (tp.points.empty()) tp.failure = "error:no-points";
      } catch (const std::exception& e) {
        tp.failure = std::string("error:") + e.what();
        for (char& ch : tp.failure)
          if (ch == ',' || ch == '\n') ch = ';';
      }
      if (!spec.timing)
        for (OperatingPoint& p : tp.points) p.wall_ms = 0.0;
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(spec.threads, n_tasks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return out;
}

/// Picks one point per (config, grid value, trial) and aggregates.
inline SweepResult tabulate(const ExperimentSpec& spec, const std::vector<TrialPoints>& collected) {
  if (spec.grid.empty()) throw Error(ErrorKind::invalid_argument, "empty grid");
  const std::size_t n_cfg = spec.configs.size();
  const std::size_t n_grid = spec.grid.size();
  if (collected.size() != n_cfg * spec.trials)
    throw Error(ErrorKind::invalid_argument, "collected points do not match the spec");
  SweepResult res;
  res.spec = spec;
  res.rows.resize(n_cfg * n_grid * spec.trials);
  for (std::size_t c = 0; c < n_cfg; ++c) {
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      const TrialPoints& tp = collected[c * spec.trials + trial];
      for (std::size_t g = 0; g < n_grid; ++g) {
        TrialRow& row = res.rows[(c * n_grid + g) * spec.trials + trial];
        row.config = c;
        row.grid = g;
        row.trial = trial;
        row.signal = tp.signal;
        if (!tp.failure.empty()) {
          row.flag = tp.failure;
          continue;
        }
        auto [p, flag] = detail::pick(tp.points, spec.grid_kind, spec.grid[g]);
        row.point = p;
        row.flag = flag;
      }
    }
  }

  for (std::size_t c = 0; c < n_cfg; ++c) {
    for (std::size_t g = 0; g < n_grid; ++g) {
      AggregateRow a;
      a.config = c;
      a.grid = g;
      std::vector<double> signal, noise;
      std::size_t used = 0;
      for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const TrialRow& r = res.rows[(c * n_grid + g) * spec.trials + trial];
        if (!r.flag.empty()) ++a.flagged;
        if (r.flag.rfind("error:", 0) == 0) continue;
        ++used;
        signal.push_back(r.signal);
        noise.push_back(r.point.noise);
        a.n_add += static_cast<double>(r.point.n_add);
        a.n_delay += static_cast<double>(r.point.n_delay);
        a.n_inv += static_cast<double>(r.point.n_inv);
        a.cost_adders += r.point.cost_adders;
        a.cost_total += r.point.cost_total;
        a.wall_ms += r.point.wall_ms;
      }
      if (used > 0) {
        const double u = static_cast<double>(used);
        a.n_add /= u;
        a.n_delay /= u;
        a.n_inv /= u;
        a.cost_adders /= u;
        a.cost_total /= u;
        a.wall_ms /= u;
        const double nz = pairwise_sum(noise);
        a.sqnr_db = nz == 0.0 ? kInfiniteSqnr : 10.0 * std::log10(pairwise_sum(signal) / nz);
      } else {
        a.sqnr_db = std::nan("");
      }
      res.aggregates.push_back(a);
    }
  }
  return res;
}

inline SweepResult run_sweep(const ExperimentSpec& spec) {
  if (spec.grid.empty()) throw Error(ErrorKind::invalid_argument, "empty grid");
  return tabulate(spec, collect_points(spec));
}

inline std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << csv_header() << "\n";
  auto prefix = [&](std::size_t c, std::size_t g) {
    const SweepConfig& sc = spec.configs[c];
    return sc.label + "," + detail::schedule_s(sc.config) + "," + detail::dmax_field(sc.config) +
           "," + detail::schedule_q(sc.config) + "," + detail::fmt_double(spec.grid[g], "%g");
  };
  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
      for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const TrialRow& r = rows[(c * spec.grid.size() + g) * spec.trials + trial];
        os << prefix(c, g) << "," << trial << "," << detail::fmt_double(r.point.sqnr_db) << ","
           << r.point.n_add << "," << r.point.n_delay << "," << r.point.n_inv << ","
           << detail::fmt_double(r.point.cost_adders) << ","
           << detail::fmt_double(r.point.cost_total) << ","
           << detail::fmt_double(r.point.wall_ms, "%.3f") << "," << r.flag << "\n";
      }
      const AggregateRow& a = aggregate(c, g);
      os << prefix(c, g) << ",mean," << detail::fmt_double(a.sqnr_db) << ","
         << detail::fmt_double(a.n_add, "%.4f") << "," << detail::fmt_double(a.n_delay, "%.4f")
         << "," << detail::fmt_double(a.n_inv, "%.4f") << "," << detail::fmt_double(a.cost_adders)
         << "," << detail::fmt_double(a.cost_total) << ","
         << detail::fmt_double(a.wall_ms, "%.3f") << ","
         << (a.flagged ? "flagged=" + std::to_string(a.flagged) : std::string()) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Text forms used by the CLI and experiment spec files.

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "fs") return Algorithm::fs;
  if (s == "fp") return Algorithm::fp;
  if (s == "ma") return Algorithm::ma;
  if (s == "sliced") return Algorithm::sliced;
  if (s == "csd") return Algorithm::csd;
  throw Error(ErrorKind::invalid_argument, "unknown algorithm \"" + s + "\"");
}

inline WiringSolver parse_solver(const std::string& s) {
  if (s == "dmp") return WiringSolver::dmp;
  if (s == "rs") return WiringSolver::rs;
  if (s == "brute") return WiringSolver::brute;
  throw Error(ErrorKind::invalid_argument, "unknown wiring solver \"" + s + "\"");
}

inline GridKind parse_grid_kind(const std::string& s) {
  if (s == "target_sqnr") return GridKind::target_sqnr;
  if (s == "vertex_budget") return GridKind::vertex_budget;
  if (s == "adder_budget") return GridKind::adder_budget;
  if (s == "cost_budget") return GridKind::cost_budget;
  throw Error(ErrorKind::invalid_argument, "unknown grid kind \"" + s + "\"");
}

/// "S:solver[:Q][@gain[/window]],..." e.g. "2:dmp@0.5,3:rs:16". A phase
/// with "@gain" hands over once the SQNR gained over the last `window`
/// vertices (default N) falls below gain dB per vertex; without it, a
/// non-final phase uses DecomposeConfig::kSwitchGainDb.
inline std::vector<SchedulePhase> parse_schedule(const std::string& text) {
  std::vector<SchedulePhase> phases;
  std::vector<bool> explicit_trigger;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto bad = [&] {
      return Error(ErrorKind::invalid_argument, "bad schedule entry \"" + item + "\"");
    };
    std::string head = item, trigger;
    if (auto at = item.find('@'); at != std::string::npos) {
      head = item.substr(0, at);
      trigger = item.substr(at + 1);
    }
    std::vector<std::string> parts;
    std::stringstream is(head);
    std::string part;
    while (std::getline(is, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) throw bad();
    SchedulePhase p;
    try {
      p.s = std::stoi(parts[0]);
      if (parts.size() == 3) p.q = std::stoi(parts[2]);
      if (!trigger.empty()) {
        const auto slash = trigger.find('/');
        p.min_gain_db_per_vertex = std::stod(trigger.substr(0, slash));
        if (slash != std::string::npos) p.window = std::stoul(trigger.substr(slash + 1));
      }
    } catch (const std::exception&) {
      throw bad();
    }
    p.solver = parse_solver(parts[1]);
    if (p.s < 1 || p.q < 1) throw Error(ErrorKind::invalid_argument, "S and Q must be >= 1");
    phases.push_back(p);
    explicit_trigger.push_back(!trigger.empty());
  }
  if (phases.empty()) throw Error(ErrorKind::invalid_argument, "empty schedule");
  for (std::size_t i = 0; i + 1 < phases.size(); ++i)
    if (!explicit_trigger[i]) phases[i].min_gain_db_per_vertex = DecomposeConfig::kSwitchGainDb;
  return phases;
}

/// Experiment spec from JSON:
/// { "rows": 16, "cols": 4, "trials": 100, "seed": 1, "threads": 1,
///   "cost": { "add": 20, "delay": 20, "inv": 2 },
///   "grid": { "kind": "adder_budget", "values": [40, 80] },
///   "configs": [ { "label": "ma0", "algorithm": "ma", "dmax": 0,
///                  "s_schedule": "2:dmp,3:rs:16", "target_sqnr_db": 40,
///                  "max_vertices": 0, "layers_max": 64, "slice_width": 4,
///                  "inner": "fs", "csd_digits": 3, "depth_penalty": true,
///                  "emin": -63, "emax": 63 } ] }
inline ExperimentSpec parse_experiment_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::schema, std::string("JSON parse error: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    spec.rows = j.value("rows", spec.rows);
    spec.cols = j.value("cols", spec.cols);
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    spec.threads = j.value("threads", spec.threads);
    spec.timing = j.value("timing", spec.timing);
    spec.csd_max_digits = j.value("csd_max_digits", spec.csd_max_digits);
    spec.ladder_step_db = j.value("ladder_step_db", spec.ladder_step_db);
    if (j.contains("cost")) {
      const auto& c = j.at("cost");
      spec.cost.c_add = c.value("add", spec.cost.c_add);
      spec.cost.c_delay = c.value("delay", spec.cost.c_delay);
      spec.cost.c_inv = c.value("inv", spec.cost.c_inv);
    }
    const auto& g = j.at("grid");
    spec.grid_kind = parse_grid_kind(g.at("kind").get<std::string>());
    spec.grid = g.at("values").get<std::vector<double>>();
    for (const auto& c : j.at("configs")) {
      SweepConfig sc;
      DecomposeConfig& d = sc.config;
      d.algorithm = parse_algorithm(c.at("algorithm").get<std::string>());
      if (d.algorithm == Algorithm::ma) d = DecomposeConfig::ma_default(std::nullopt);
      if (d.algorithm == Algorithm::fp) d = DecomposeConfig::fp_default();
      sc.label = c.value("label", std::string(to_string(d.algorithm)));
      if (c.contains("s_schedule")) d.schedule = parse_schedule(c.at("s_schedule").get<std::string>());
      if (c.contains("dmax")) {
        if (c.at("dmax").is_string() && c.at("dmax").get<std::string>() == "inf")
          d.delta_mu_max.reset();
        else
          d.delta_mu_max = c.at("dmax").get<int>();
      }
      d.target_sqnr_db = c.value("target_sqnr_db", d.target_sqnr_db);
      d.max_vertices = c.value("max_vertices", d.max_vertices);
      d.layers_max = c.value("layers_max", d.layers_max);
      d.slice_width = c.value("slice_width", d.slice_width);
      if (c.contains("inner")) d.inner = parse_algorithm(c.at("inner").get<std::string>());
      d.csd_digits = c.value("csd_digits", d.csd_digits);
      d.depth_penalty = c.value("depth_penalty", d.depth_penalty);
      d.bounds.min = c.value("emin", d.bounds.min);
      d.bounds.max = c.value("emax", d.bounds.max);
      spec.configs.push_back(std::move(sc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, std::string("experiment spec: ") + e.what());
  }
  return spec;
}

}  // namespace lcc
