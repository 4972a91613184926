// lcc: command-line front end.
//
//   lcc decompose  build a DAG for a matrix (file or seeded Gaussian)
//   lcc sweep      run an experiment grid and write CSV
//   lcc eval       SQNR and cost of a DAG against a matrix
//   lcc export     validate a JSON DAG and re-emit it as JSON or DOT
//
// Exit codes: 0 ok, 1 usage, 2 input/schema, 3 decompose did not converge.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lcc/lcc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

// One matrix row per line; entries separated by commas and/or whitespace.
// Blank lines and lines starting with '#' are skipped.
lcc::TargetMatrix read_matrix(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> entries;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::string tok;
    std::size_t n = 0;
    bool comment = false;
    while (ls >> tok) {
      if (n == 0 && tok[0] == '#') {
        comment = true;
        break;
      }
      try {
        std::size_t used = 0;
        entries.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InputError(path + ":" + std::to_string(rows + 1) + ": not a number: " + tok);
      }
      ++n;
    }
    if (comment || n == 0) continue;
    if (cols == 0) cols = n;
    if (n != cols)
      throw InputError(path + ":" + std::to_string(rows + 1) + ": expected " +
                       std::to_string(cols) + " entries, got " + std::to_string(n));
    ++rows;
  }
  if (rows == 0) throw InputError(path + ": empty matrix");
  return lcc::TargetMatrix(rows, cols, std::move(entries));
}

struct MatrixArgs {
  std::string matrix;
  std::size_t rows = 16;
  std::size_t cols = 4;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--matrix", matrix, "matrix file (rows of numbers); overrides --rows/--cols");
    app->add_option("--rows", rows, "rows N of the Gaussian target")->check(CLI::PositiveNumber);
    app->add_option("--cols", cols, "cols K of the Gaussian target")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "RNG seed of the Gaussian target");
  }
  lcc::TargetMatrix load() const {
    return matrix.empty() ? lcc::gen_gaussian_matrix(rows, cols, seed) : read_matrix(matrix);
  }
};

struct CostArgs {
  lcc::CostModel model;
  void add(CLI::App* app) {
    app->add_option("--cost-add", model.c_add, "cost per adder")->check(CLI::NonNegativeNumber);
    app->add_option("--cost-delay", model.c_delay, "cost per delay element")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--cost-inv", model.c_inv, "cost per inverter")->check(CLI::NonNegativeNumber);
  }
};

// Flags describing one decomposer configuration.
struct AlgorithmArgs {
  std::string algorithm = "fs";
  int s = 0;
  std::string solver = "dmp";
  std::string schedule;
  std::string dmax = "0";
  int q = 16;
  double target = 40.0;
  std::size_t max_vertices = 0;
  std::size_t layers_max = 64;
  std::size_t slice_width = 4;
  std::string inner = "fs";
  int digits = 3;
  bool no_depth_penalty = false;
  int emin = -63;
  int emax = 63;

  void add(CLI::App* app) {
    app->add_option("--algorithm", algorithm, "fs|fp|ma|sliced|csd");
    app->add_option("--s", s, "fan-in S (single-phase schedule)")->check(CLI::PositiveNumber);
    app->add_option("--solver", solver, "wiring solver for --s: dmp|rs|brute");
    app->add_option("--s-schedule", schedule, "phases S:solver[:Q][@gain[/window]], e.g. 2:dmp,3:rs:16");
    app->add_option("--dmax", dmax, "MA depth-span limit (integer or inf)");
    app->add_option("--q", q, "RS beam width")->check(CLI::PositiveNumber);
    app->add_option("--target-sqnr-db", target, "stop once SQNR exceeds this (dB)");
    app->add_option("--max-vertices", max_vertices, "internal vertex cap (0: 64 N)");
    app->add_option("--layers-max", layers_max, "FP layer cap");
    app->add_option("--slice-width", slice_width, "sliced: columns per block")
        ->check(CLI::PositiveNumber);
    app->add_option("--inner", inner, "sliced: inner algorithm fs|fp|ma");
    app->add_option("--digits", digits, "csd: nonzero digits per entry")->check(CLI::PositiveNumber);
    app->add_flag("--no-depth-penalty", no_depth_penalty, "MA: lambda_n = 1");
    app->add_option("--emin", emin, "smallest shift exponent");
    app->add_option("--emax", emax, "largest shift exponent");
  }

  lcc::DecomposeConfig config() const {
    using namespace lcc;
    const Algorithm alg = parse_algorithm(algorithm);
    std::optional<int> dm;
    if (dmax != "inf") {
      try {
        dm = std::stoi(dmax);
      } catch (const std::exception&) {
        throw Error(ErrorKind::invalid_argument, "--dmax must be an integer or inf");
      }
    }
    const Algorithm shape = alg == Algorithm::sliced ? parse_algorithm(inner) : alg;
    DecomposeConfig c = shape == Algorithm::ma   ? DecomposeConfig::ma_default(dm)
                        : shape == Algorithm::fp ? DecomposeConfig::fp_default(parse_solver(solver))
                                                 : DecomposeConfig::fs_default();
    c.algorithm = alg;
    c.inner = shape;
    c.delta_mu_max = dm;
    if (!schedule.empty()) {
      c.schedule = parse_schedule(schedule);
    } else if (s > 0) {
      c.schedule = {SchedulePhase{s, parse_solver(solver), q}};
    } else {
      for (SchedulePhase& p : c.schedule)
        if (p.solver == WiringSolver::rs) p.q = q;
    }
    c.target_sqnr_db = target;
    c.max_vertices = max_vertices;
    c.layers_max = layers_max;
    c.slice_width = slice_width;
    c.csd_digits = digits;
    c.depth_penalty = !no_depth_penalty;
    if (emin > emax) throw Error(ErrorKind::invalid_argument, "--emin must not exceed --emax");
    c.bounds = {emin, emax};
    return c;
  }

  std::string label() const {
    std::string l = algorithm;
    if (algorithm == "ma" || (algorithm == "sliced" && inner == "ma")) l += "-d" + dmax;
    return l;
  }
};

std::string report_csv(const lcc::TargetMatrix& t, const lcc::ComputationDag& dag,
                       const lcc::CostModel& model, const std::string& status) {
  const lcc::CostReport r = lcc::total_cost(dag, model);
  std::ostringstream os;
  os << "sqnr_db,codebook_sqnr_db,vertices,n_add,n_delay,n_inv,cost_adders,cost_total,status\n"
     << lcc::detail::fmt_double(lcc::output_sqnr_db(t, dag)) << ","
     << lcc::detail::fmt_double(lcc::sqnr_db(t, dag)) << "," << dag.num_internal() << ","
     << r.n_add << "," << r.n_delay << "," << r.n_inv << ","
     << lcc::detail::fmt_double(static_cast<double>(r.n_add) * model.c_add) << ","
     << lcc::detail::fmt_double(r.total) << "," << status << "\n";
  return os.str();
}

std::string render(const lcc::TargetMatrix& t, const lcc::ComputationDag& dag,
                   const lcc::CostModel& model, const std::string& format,
                   const std::string& status) {
  if (format == "json") return lcc::export_json(dag);
  if (format == "dot") return lcc::export_dot(dag);
  return report_csv(t, dag, model, status);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw lcc::Error(lcc::ErrorKind::invalid_argument, "bad grid value \"" + item + "\"");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shift-and-add DAG compiler for constant matrix-vector products"};
  app.require_subcommand(1);

  // decompose
  CLI::App* dec = app.add_subcommand("decompose", "decompose one matrix");
  MatrixArgs dec_matrix;
  AlgorithmArgs dec_alg;
  CostArgs dec_cost;
  std::string dec_out, dec_format = "json";
  dec_matrix.add(dec);
  dec_alg.add(dec);
  dec_cost.add(dec);
  dec->add_option("--out", dec_out, "output file (default stdout)");
  dec->add_option("--format", dec_format, "json|dot|csv")
      ->check(CLI::IsMember({"json", "dot", "csv"}));

  // sweep
  CLI::App* sw = app.add_subcommand("sweep", "run an experiment grid, write CSV");
  std::string sw_spec, sw_out, sw_grid_kind = "target_sqnr", sw_grid = "10,20,30,40";
  std::string sw_format = "csv";
  std::size_t sw_trials = 10, sw_threads = 1;
  bool sw_timing = false;
  MatrixArgs sw_matrix;
  AlgorithmArgs sw_alg;
  CostArgs sw_cost;
  sw->add_option("--spec", sw_spec, "JSON experiment spec (overrides the flags below)");
  sw_matrix.add(sw);
  sw_alg.add(sw);
  sw_cost.add(sw);
  sw->add_option("--trials", sw_trials, "trials per grid point")->check(CLI::PositiveNumber);
  sw->add_option("--grid-kind", sw_grid_kind,
                 "target_sqnr|vertex_budget|adder_budget|cost_budget");
  sw->add_option("--grid", sw_grid, "comma-separated grid values");
  sw->add_option("--threads", sw_threads, "worker threads (0: hardware)");
  sw->add_flag("--timing", sw_timing, "record wall time (CSV no longer byte-stable)");
  sw->add_option("--out", sw_out, "CSV file (default stdout)");
  sw->add_option("--format", sw_format, "csv")->check(CLI::IsMember({"csv"}));

  // eval
  CLI::App* ev = app.add_subcommand("eval", "SQNR and cost of a JSON DAG against a matrix");
  std::string ev_dag, ev_out, ev_format = "csv";
  MatrixArgs ev_matrix;
  CostArgs ev_cost;
  int ev_emin = -63, ev_emax = 63;
  ev->add_option("--dag", ev_dag, "JSON DAG file")->required();
  ev_matrix.add(ev);
  ev_cost.add(ev);
  ev->add_option("--emin", ev_emin, "smallest shift exponent");
  ev->add_option("--emax", ev_emax, "largest shift exponent");
  ev->add_option("--out", ev_out, "output file (default stdout)");
  ev->add_option("--format", ev_format, "csv")->check(CLI::IsMember({"csv"}));

  // export
  CLI::App* ex = app.add_subcommand("export", "validate a JSON DAG and re-emit it");
  std::string ex_dag, ex_out, ex_format = "dot";
  int ex_emin = -63, ex_emax = 63;
  ex->add_option("--dag", ex_dag, "JSON DAG file")->required();
  ex->add_option("--emin", ex_emin, "smallest shift exponent");
  ex->add_option("--emax", ex_emax, "largest shift exponent");
  ex->add_option("--out", ex_out, "output file (default stdout)");
  ex->add_option("--format", ex_format, "json|dot")->check(CLI::IsMember({"json", "dot"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*dec) {
      const lcc::TargetMatrix t = dec_matrix.load();
      const lcc::DecomposeConfig cfg = dec_alg.config();
      const lcc::DecompositionResult r = lcc::decompose(t, cfg);
      const std::string status = lcc::to_string(r.status);
      write_output(dec_out, render(t, r.dag, dec_cost.model, dec_format, status));
      const lcc::CostReport cost = lcc::total_cost(r.dag, dec_cost.model);
      std::fprintf(stderr, "%s: %s, SQNR %s dB, %zu vertices, N_add %zu, N_delay %zu, N_inv %zu\n",
                   dec_alg.label().c_str(), status.c_str(),
                   lcc::detail::fmt_double(r.sqnr_db, "%.3f").c_str(), r.dag.num_internal(),
                   cost.n_add, cost.n_delay, cost.n_inv);
      return r.converged() ? kExitOk : kExitNotConverged;
    }
    if (*sw) {
      if (!sw_matrix.matrix.empty())
        throw lcc::Error(lcc::ErrorKind::invalid_argument,
                         "sweep draws seeded Gaussian targets; --matrix is not supported");
      lcc::ExperimentSpec spec;
      if (!sw_spec.empty()) {
        spec = lcc::parse_experiment_spec(read_file(sw_spec));
      } else {
        spec.rows = sw_matrix.rows;
        spec.cols = sw_matrix.cols;
        spec.seed = sw_matrix.seed;
        spec.trials = sw_trials;
        spec.cost = sw_cost.model;
        spec.grid_kind = lcc::parse_grid_kind(sw_grid_kind);
        spec.grid = parse_list(sw_grid);
        spec.configs.push_back({sw_alg.label(), sw_alg.config()});
      }
      if (sw->count("--threads") || sw_spec.empty())
        spec.threads = sw_threads ? sw_threads : std::max(1u, std::thread::hardware_concurrency());
      if (sw_timing) spec.timing = true;
      const lcc::SweepResult res = lcc::run_sweep(spec);
      write_output(sw_out, res.to_csv());
      return kExitOk;
    }
    if (*ev) {
      const lcc::ComputationDag dag = lcc::import_dag(read_file(ev_dag), {ev_emin, ev_emax});
      const lcc::TargetMatrix t = ev_matrix.load();
      if (t.cols() != dag.num_inputs() || t.rows() != dag.num_outputs())
        throw InputError("matrix is " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                         " but the DAG has " + std::to_string(dag.num_outputs()) + " outputs and " +
                         std::to_string(dag.num_inputs()) + " inputs");
      write_output(ev_out, report_csv(t, dag, ev_cost.model, "-"));
      return kExitOk;
    }
    if (*ex) {
      const lcc::ComputationDag dag = lcc::import_dag(read_file(ex_dag), {ex_emin, ex_emax});
      write_output(ex_out, ex_format == "json" ? lcc::export_json(dag) : lcc::export_dot(dag));
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const lcc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case lcc::ErrorKind::invalid_argument:
      case lcc::ErrorKind::search_space_too_large:
        return kExitUsage;
      default:
        return kExitInput;
    }
  }
  return kExitUsage;
}
