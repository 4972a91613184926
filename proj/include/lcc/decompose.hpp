#pragma once

// Matrix decomposers: grow a ComputationDag for a TargetMatrix until the
// codebook SQNR target is met.
//
//   fs  - fully sequential: one vertex per iteration, any codewords.
//   fp  - fully parallel: one layer per iteration, each layer wired only
//         from the previous one.
//   ma  - mixed: sequential growth with a depth-span limit on every wiring
//         and a depth penalty in row selection.
//   sliced - column blocks decomposed independently, merged by adder trees.
//   csd - per-entry CSD baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcc/core.hpp"
#include "lcc/cost.hpp"
#include "lcc/csd.hpp"
#include "lcc/evaluation.hpp"
#include "lcc/wiring.hpp"

namespace lcc {

enum class Algorithm { fs, fp, ma, sliced, csd };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fs: return "fs";
    case Algorithm::fp: return "fp";
    case Algorithm::ma: return "ma";
    case Algorithm::sliced: return "sliced";
    case Algorithm::csd: return "csd";
  }
  return "?";
}

enum class Status { converged, vertex_cap, layer_cap, stalled };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::vertex_cap: return "vertex-cap";
    case Status::layer_cap: return "layer-cap";
    case Status::stalled: return "stalled";
  }
  return "?";
}

/// One entry of the S-schedule. A phase ends when no row improves under it,
/// or (if min_gain_db_per_vertex > 0) once the SQNR gained over the last
/// `window` added vertices drops below min_gain_db_per_vertex * window.
/// window == 0 means N.
struct SchedulePhase {
  int s = 2;
  WiringSolver solver = WiringSolver::dmp;
  int q = 16;
  double min_gain_db_per_vertex = 0.0;
  std::size_t window = 0;

  WiringConfig wiring() const { return {s, solver, q}; }
};

struct DecomposeConfig {
  Algorithm algorithm = Algorithm::fs;
  std::vector<SchedulePhase> schedule{SchedulePhase{}};
  double target_sqnr_db = 40.0;
  std::size_t max_vertices = 0;      // internal vertices; 0 means 64 N
  std::optional<int> delta_mu_max;   // ma only; nullopt is unbounded
  bool depth_penalty = true;         // ma only; false forces lambda_n = 1
  std::size_t layers_max = 64;       // fp only
  std::size_t slice_width = 4;       // sliced only
  Algorithm inner = Algorithm::fs;   // sliced only
  int csd_digits = 3;                // csd only
  ExponentBounds bounds{};

  static DecomposeConfig fs_default() { return {}; }

  static DecomposeConfig fp_default(WiringSolver solver = WiringSolver::dmp) {
    DecomposeConfig c;
    c.algorithm = Algorithm::fp;
    c.schedule = {SchedulePhase{solver == WiringSolver::dmp ? 2 : 3, solver, 16}};
    return c;
  }

  /// S = 2 / DMP to build a coarse codebook, then S = 3 / RS(Q = 16) once
  /// the gain over the last N vertices falls under kSwitchGainDb per vertex.
  /// In practice that is right after the first N vertices; a gentler
  /// threshold keeps S = 2 far too long and costs up to 15 dB.
  static constexpr double kSwitchGainDb = 1.0;

  static DecomposeConfig ma_default(std::optional<int> delta_mu_max) {
    DecomposeConfig c;
    c.algorithm = Algorithm::ma;
    c.delta_mu_max = delta_mu_max;
    c.schedule = {SchedulePhase{2, WiringSolver::dmp, 16, kSwitchGainDb, 0},
                  SchedulePhase{3, WiringSolver::rs, 16}};
    return c;
  }
};

struct IterationRecord {
  std::size_t num_vertices = 0;    // |C| after this step
  std::optional<std::size_t> row;  // row that produced the vertex (fs/ma)
  std::size_t phase = 0;
  double sqnr_db = 0.0;
  std::vector<OutputSlot> outputs;  // output assignment valid for this prefix
};

struct DecompositionResult {
  ComputationDag dag;
  std::vector<double> row_errors;
  double sqnr_db = 0.0;
  Status status = Status::converged;
  std::vector<IterationRecord> log;

  bool converged() const noexcept { return status == Status::converged; }
};

/// The DAG as it stood after log entry `step`, with that step's outputs.
inline ComputationDag snapshot(const DecompositionResult& r, std::size_t step) {
  const IterationRecord& rec = r.log.at(step);
  ComputationDag d = r.dag.truncated(rec.num_vertices);
  d.set_num_outputs(rec.outputs.size());
  for (std::size_t n = 0; n < rec.outputs.size(); ++n) d.assign_output(n, rec.outputs[n]);
  return d;
}

namespace detail {

inline void validate(const TargetMatrix& t, const DecomposeConfig& cfg) {
  if (!std::isfinite(cfg.target_sqnr_db))
    throw Error(ErrorKind::invalid_argument, "target SQNR must be finite");
  if (cfg.schedule.empty()) throw Error(ErrorKind::invalid_argument, "empty S-schedule");
  for (const SchedulePhase& p : cfg.schedule)
    if (p.s < 1 || p.q < 1) throw Error(ErrorKind::invalid_argument, "S and Q must be >= 1");
  if (cfg.delta_mu_max && *cfg.delta_mu_max < 0)
    throw Error(ErrorKind::invalid_argument, "delta_mu_max must be >= 0");
  if (cfg.algorithm == Algorithm::sliced && (cfg.slice_width < 1 || cfg.slice_width > t.cols()))
    throw Error(ErrorKind::invalid_argument, "slice width must lie in [1, K]");
}

inline std::size_t vertex_cap(const TargetMatrix& t, const DecomposeConfig& cfg) {
  return cfg.max_vertices ? cfg.max_vertices : 64 * t.rows();
}

inline Row evaluate_wiring(const ComputationDag& dag, const WiringVector& w) {
  Row acc(dag.num_inputs(), 0.0);
  for (const WiringTerm& term : w.terms()) {
    auto c = dag.value(term.source);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += term.coeff.apply(c[k]);
  }
  return acc;
}

// Error of a single output slot, same arithmetic as output_errors().
inline double slot_error(std::span<const double> t, const ComputationDag& dag, const OutputSlot& s) {
  Row approx(t.size(), 0.0);
  if (s.is_assigned()) {
    auto c = dag.value(s.assignment().source);
    for (std::size_t k = 0; k < approx.size(); ++k)
      approx[k] = 0.0 + s.assignment().coeff.value() * c[k];
  }
  return squared_distance(t, approx);
}

inline bool phase_trigger(const SchedulePhase& p, const std::vector<IterationRecord>& log,
                          std::size_t phase_start, std::size_t n_rows) {
  if (p.min_gain_db_per_vertex <= 0.0) return false;
  const std::size_t window = p.window ? p.window : n_rows;
  if (log.size() < phase_start + window + 1) return false;
  const double now = log.back().sqnr_db;
  const double then = log[log.size() - 1 - window].sqnr_db;
  return now - then < p.min_gain_db_per_vertex * static_cast<double>(window);
}

// fs and ma share this loop; `ma` turns on the depth constraint and the
// lambda-weighted row selection.
inline DecompositionResult sequential_decompose(const TargetMatrix& t, const DecomposeConfig& cfg,
                                                bool ma) {
  validate(t, cfg);
  const std::size_t n_rows = t.rows();
  const std::size_t cap = vertex_cap(t, cfg);
  const double signal = t.squared_frobenius();

  ComputationDag dag(t.cols(), cfg.bounds);
  dag.set_num_outputs(n_rows);
  std::vector<int> depth(dag.size(), 0);

  std::vector<WiringResult> sel(n_rows);
  std::vector<double> err1(n_rows);
  for (std::size_t n = 0; n < n_rows; ++n) {
    sel[n] = select_single(t.row(n), dag);
    err1[n] = sel[n].error;
  }
  auto outputs_now = [&] {
    std::vector<OutputSlot> o(n_rows);
    for (std::size_t n = 0; n < n_rows; ++n) o[n] = to_output(sel[n]);
    return o;
  };

  DecompositionResult res{dag, {}, sqnr_from_errors(signal, err1), Status::converged, {}};
  double sqnr = res.sqnr_db;
  std::size_t phase = 0, phase_start = 0;
  res.log.push_back({dag.size(), std::nullopt, 0, sqnr, outputs_now()});

  std::vector<WiringResult> cand(n_rows);
  std::vector<double> gain(n_rows);
  std::vector<int> lambda(n_rows);
  std::vector<bool> usable(n_rows);

  for (;;) {
    if (sqnr > cfg.target_sqnr_db) {
      res.status = Status::converged;
      break;
    }
    if (dag.num_internal() >= cap) {
      res.status = Status::vertex_cap;
      break;
    }
    WiringScope scope = WiringScope::all(dag);
    if (ma && cfg.delta_mu_max) {
      scope.depths = depth;
      scope.max_depth_span = cfg.delta_mu_max;
    }
    const WiringConfig wc = cfg.schedule[phase].wiring();
    for (std::size_t n = 0; n < n_rows; ++n) {
      cand[n] = wire(t.row(n), dag, wc, scope);
      gain[n] = err1[n] - cand[n].error;
      usable[n] = gain[n] > 0.0 && cand[n].wiring.size() >= 2;
      int deepest = 0;
      for (const WiringTerm& term : cand[n].wiring.terms())
        deepest = std::max(deepest, depth[term.source]);
      lambda[n] = (ma && cfg.depth_penalty) ? 1 + deepest : 1;
    }
    const double total1 = pairwise_sum(err1);

    // a better than b under the row-selection rule
    auto better = [&](std::size_t a, std::size_t b) {
      if (lambda[a] == lambda[b]) return gain[a] > gain[b];
      return lambda[a] * (total1 - gain[a]) < lambda[b] * (total1 - gain[b]);
    };

    std::optional<std::size_t> chosen;
    Row value;
    for (;;) {
      std::optional<std::size_t> pick;
      for (std::size_t n = 0; n < n_rows; ++n)
        if (usable[n] && (!pick || better(n, *pick))) pick = n;
      if (!pick) break;
      value = evaluate_wiring(dag, cand[*pick].wiring);
      if (dag.find_value(value) || squared_norm(value) == 0.0) {
        usable[*pick] = false;
        continue;
      }
      chosen = pick;
      break;
    }
    if (!chosen) {
      if (phase + 1 < cfg.schedule.size()) {
        ++phase;
        phase_start = res.log.size() - 1;
        continue;
      }
      res.status = Status::stalled;
      break;
    }

    const VertexId v = dag.add_vertex(cand[*chosen].wiring);
    int d = 0;
    for (const WiringTerm& term : cand[*chosen].wiring.terms()) d = std::max(d, depth[term.source]);
    depth.push_back(d + 1);

    // Only the new vertex can change an S = 1 selection; it has the largest
    // index, so it wins ties only on a smaller exponent.
    auto c = dag.value(v);
    if (dag.squared_norm(v) > 0.0) {
      for (std::size_t n = 0; n < n_rows; ++n) {
        ShiftFit fit = optimal_shift(t.row(n), c, dag.bounds());
        if (!fit.coeff) continue;
        const bool take = sel[n].wiring.empty()
                              ? fit.error < err1[n]
                              : (fit.error < err1[n] ||
                                 (fit.error == err1[n] &&
                                  fit.coeff->exponent() < sel[n].wiring[0].coeff.exponent()));
        if (take) {
          sel[n] = {WiringVector{{v, *fit.coeff}}, fit.error};
          err1[n] = fit.error;
        }
      }
    }
    sqnr = sqnr_from_errors(signal, err1);
    res.log.push_back({dag.size(), chosen, phase, sqnr, outputs_now()});

    if (phase + 1 < cfg.schedule.size() &&
        phase_trigger(cfg.schedule[phase], res.log, phase_start, n_rows)) {
      ++phase;
      phase_start = res.log.size() - 1;
    }
  }

  for (std::size_t n = 0; n < n_rows; ++n) dag.assign_output(n, to_output(sel[n]));
  res.dag = std::move(dag);
  res.row_errors = err1;
  res.sqnr_db = sqnr;
  return res;
}

}  // namespace detail

inline DecompositionResult fs_decompose(const TargetMatrix& t, const DecomposeConfig& cfg) {
  return detail::sequential_decompose(t, cfg, false);
}

inline DecompositionResult ma_decompose(const TargetMatrix& t, const DecomposeConfig& cfg) {
  return detail::sequential_decompose(t, cfg, true);
}

/// Layer recursion: layer l rewires every row from the vertices of layer
/// l - 1 only (the K inputs for l = 1). Outputs are the last layer's
/// vertices. A layer that does not raise the SQNR is discarded and the run
/// stops (or moves to the next schedule phase).
inline DecompositionResult fp_decompose(const TargetMatrix& t, const DecomposeConfig& cfg) {
  detail::validate(t, cfg);
  const std::size_t n_rows = t.rows();
  const std::size_t cap = detail::vertex_cap(t, cfg);
  const double signal = t.squared_frobenius();

  ComputationDag dag(t.cols(), cfg.bounds);
  dag.set_num_outputs(n_rows);

  WiringScope prev;
  for (VertexId v = 0; v < dag.num_inputs(); ++v) prev.vertices.push_back(v);

  std::vector<OutputSlot> outputs(n_rows);
  std::vector<double> errs(n_rows);
  for (std::size_t n = 0; n < n_rows; ++n) {
    WiringResult s = select_single(t.row(n), dag, prev);
    outputs[n] = to_output(s);
    errs[n] = detail::slot_error(t.row(n), dag, outputs[n]);
  }
  double sqnr = sqnr_from_errors(signal, errs);

  DecompositionResult res{dag, {}, sqnr, Status::converged, {}};
  res.log.push_back({dag.size(), std::nullopt, 0, sqnr, outputs});

  std::size_t layers = 0, phase = 0;
  for (;;) {
    if (sqnr > cfg.target_sqnr_db) {
      res.status = Status::converged;
      break;
    }
    if (layers >= cfg.layers_max) {
      res.status = Status::layer_cap;
      break;
    }
    if (dag.num_internal() + n_rows > cap) {
      res.status = Status::vertex_cap;
      break;
    }
    const std::size_t layer_start = dag.size();
    const WiringConfig wc = cfg.schedule[phase].wiring();
    std::map<Row, VertexId> in_layer;
    std::vector<OutputSlot> next_out(n_rows);
    std::vector<double> next_err(n_rows);
    for (std::size_t n = 0; n < n_rows; ++n) {
      WiringResult w = wire(t.row(n), dag, wc, prev);
      if (w.wiring.empty()) {
        next_out[n] = OutputSlot::zero();
      } else {
        Row value = detail::evaluate_wiring(dag, w.wiring);
        auto it = in_layer.find(value);
        VertexId v;
        if (it != in_layer.end()) {
          v = it->second;
        } else {
          v = dag.add_vertex(w.wiring);
          in_layer.emplace(std::move(value), v);
        }
        next_out[n] = OutputSlot::to(v, ShiftCoefficient::positive(0));
      }
      next_err[n] = detail::slot_error(t.row(n), dag, next_out[n]);
    }
    const double next_sqnr = sqnr_from_errors(signal, next_err);
    if (!(next_sqnr > sqnr)) {
      ComputationDag rolled = dag.truncated(layer_start);
      rolled.set_num_outputs(n_rows);
      dag = std::move(rolled);
      if (phase + 1 < cfg.schedule.size()) {
        ++phase;
        continue;
      }
      res.status = Status::stalled;
      break;
    }
    ++layers;
    outputs = std::move(next_out);
    errs = std::move(next_err);
    sqnr = next_sqnr;
    prev = WiringScope{};
    for (VertexId v = layer_start; v < dag.size(); ++v) prev.vertices.push_back(v);
    res.log.push_back({dag.size(), std::nullopt, phase, sqnr, outputs});
  }

  for (std::size_t n = 0; n < n_rows; ++n) dag.assign_output(n, outputs[n]);
  res.dag = std::move(dag);
  res.row_errors = errs;
  res.sqnr_db = sqnr;
  return res;
}

namespace detail {

struct Summand {
  VertexId source;
  ShiftCoefficient coeff;
};

// Balanced binary adder tree over the summands of one output row. The first
// level carries the summands' own coefficients, later levels add with +2^0.
inline OutputSlot add_tree(ComputationDag& dag, std::vector<Summand> items) {
  if (items.empty()) return OutputSlot::zero();
  while (items.size() > 1) {
    std::vector<Summand> next;
    for (std::size_t i = 0; i + 1 < items.size(); i += 2) {
      const VertexId v = dag.add_vertex(
          WiringVector{{items[i].source, items[i].coeff}, {items[i + 1].source, items[i + 1].coeff}});
      next.push_back({v, ShiftCoefficient::positive(0)});
    }
    if (items.size() % 2 == 1) next.push_back(items.back());
    items = std::move(next);
  }
  return OutputSlot::to(items.front().source, items.front().coeff);
}

inline DecompositionResult finish(const TargetMatrix& t, ComputationDag dag, Status status) {
  DecompositionResult res{std::move(dag), {}, 0.0, status, {}};
  res.row_errors = output_errors(t, res.dag);
  res.sqnr_db = sqnr_from_errors(t.squared_frobenius(), res.row_errors);
  std::vector<OutputSlot> outs(res.dag.outputs().begin(), res.dag.outputs().end());
  res.log.push_back({res.dag.size(), std::nullopt, 0, res.sqnr_db, std::move(outs)});
  return res;
}

}  // namespace detail

inline DecompositionResult decompose(const TargetMatrix& t, const DecomposeConfig& cfg);

/// Column slicing: T x = sum_b T_b x_b. Each block is decomposed with
/// cfg.inner and the block outputs of every row are summed by a balanced
/// adder tree.
inline DecompositionResult slice_decompose(const TargetMatrix& t, const DecomposeConfig& cfg) {
  detail::validate(t, cfg);
  if (cfg.inner == Algorithm::sliced || cfg.inner == Algorithm::csd)
    throw Error(ErrorKind::invalid_argument, "sliced inner algorithm must be fs, fp or ma");
  const std::size_t n_rows = t.rows();
  const std::size_t width = cfg.slice_width;

  ComputationDag merged(t.cols(), cfg.bounds);
  merged.set_num_outputs(n_rows);
  std::vector<std::vector<detail::Summand>> summands(n_rows);
  Status status = Status::converged;

  DecomposeConfig inner = cfg;
  inner.algorithm = cfg.inner;
  for (std::size_t first = 0; first < t.cols(); first += width) {
    const std::size_t w = std::min(width, t.cols() - first);
    std::vector<double> block = t.column_block(first, w);
    if (std::all_of(block.begin(), block.end(), [](double x) { return x == 0.0; })) continue;
    DecompositionResult part = decompose(TargetMatrix(n_rows, w, std::move(block)), inner);
    if (part.status != Status::converged && status == Status::converged) status = part.status;

    std::vector<VertexId> remap(part.dag.size());
    for (VertexId v = 0; v < w; ++v) remap[v] = first + v;
    for (VertexId v = w; v < part.dag.size(); ++v) {
      WiringVector moved;
      for (const WiringTerm& term : part.dag.terms(v).terms())
        moved.push_back({remap[term.source], term.coeff});
      remap[v] = merged.add_vertex(std::move(moved));
    }
    for (std::size_t n = 0; n < n_rows; ++n) {
      const OutputSlot& s = part.dag.output(n);
      if (s.is_assigned())
        summands[n].push_back({remap[s.assignment().source], s.assignment().coeff});
    }
  }
  for (std::size_t n = 0; n < n_rows; ++n)
    merged.assign_output(n, detail::add_tree(merged, std::move(summands[n])));
  return detail::finish(t, std::move(merged), status);
}

/// Per-entry CSD baseline: every entry becomes a chain of two-input adders
/// over its digits, and each row sums its entries with an adder tree.
inline DecompositionResult csd_matrix_baseline(const TargetMatrix& t, int digits,
                                               const ExponentBounds& bounds = {}) {
  ComputationDag dag(t.cols(), bounds);
  dag.set_num_outputs(t.rows());
  for (std::size_t n = 0; n < t.rows(); ++n) {
    std::vector<detail::Summand> items;
    for (std::size_t k = 0; k < t.cols(); ++k) {
      std::vector<ShiftCoefficient> d = csd_quantize(t(n, k), digits, bounds);
      if (d.empty()) continue;
      if (d.size() == 1) {
        items.push_back({k, d[0]});
        continue;
      }
      VertexId chain = dag.add_vertex(WiringVector{{k, d[0]}, {k, d[1]}});
      for (std::size_t i = 2; i < d.size(); ++i)
        chain = dag.add_vertex(WiringVector{{chain, ShiftCoefficient::positive(0)}, {k, d[i]}});
      items.push_back({chain, ShiftCoefficient::positive(0)});
    }
    dag.assign_output(n, detail::add_tree(dag, std::move(items)));
  }
  return detail::finish(t, std::move(dag), Status::converged);
}

inline DecompositionResult decompose(const TargetMatrix& t, const DecomposeConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::fs: return fs_decompose(t, cfg);
    case Algorithm::fp: return fp_decompose(t, cfg);
    case Algorithm::ma: return ma_decompose(t, cfg);
    case Algorithm::sliced: return slice_decompose(t, cfg);
    case Algorithm::csd: return csd_matrix_baseline(t, cfg.csd_digits, cfg.bounds);
  }
  throw Error(ErrorKind::invalid_argument, "unknown algorithm");
}

}  // namespace lcc
