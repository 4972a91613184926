#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "lcc/core.hpp"
#include "lcc/wiring.hpp"

namespace lcc {

inline constexpr double kInfiniteSqnr = std::numeric_limits<double>::infinity();

/// Runs the DAG forward on x and returns the N outputs.
inline Row evaluate_dag(const ComputationDag& dag, std::span<const double> x) {
  if (x.size() != dag.num_inputs())
    throw Error(ErrorKind::invalid_dimension, "input length != K");
  if (!dag.outputs_complete())
    throw Error(ErrorKind::incomplete_dag, "DAG has unassigned outputs");
  Row val(dag.size(), 0.0);
  for (VertexId v = 0; v < dag.num_inputs(); ++v) val[v] = x[v];
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v) {
    double acc = 0.0;
    for (const WiringTerm& t : dag.terms(v).terms()) acc += t.coeff.apply(val[t.source]);
    val[v] = acc;
  }
  Row y(dag.num_outputs(), 0.0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    const OutputSlot& s = dag.output(n);
    if (s.is_assigned()) y[n] = s.assignment().coeff.apply(val[s.assignment().source]);
  }
  return y;
}

/// mat(C): the cached vertex values stacked in index order.
inline std::vector<Row> codebook_matrix(const ComputationDag& dag) {
  std::vector<Row> m;
  m.reserve(dag.size());
  for (VertexId v = 0; v < dag.size(); ++v) m.push_back(dense_value(dag, v));
  return m;
}

/// N x K matrix the DAG actually computes, reconstructed by probing with
/// the K unit inputs.
inline std::vector<Row> effective_matrix(const ComputationDag& dag) {
  std::vector<Row> m(dag.num_outputs(), Row(dag.num_inputs(), 0.0));
  for (std::size_t k = 0; k < dag.num_inputs(); ++k) {
    Row unit(dag.num_inputs(), 0.0);
    unit[k] = 1.0;
    Row col = evaluate_dag(dag, unit);
    for (std::size_t n = 0; n < col.size(); ++n) m[n][k] = col[n];
  }
  return m;
}

inline double sqnr_from_errors(double signal, std::span<const double> row_errors) {
  const double noise = pairwise_sum(row_errors);
  if (noise == 0.0) return kInfiniteSqnr;
  return 10.0 * std::log10(signal / noise);
}

/// Per-row error of the best S = 1 selection over the whole codebook.
inline std::vector<double> selection_errors(const TargetMatrix& t, const ComputationDag& dag) {
  if (t.cols() != dag.num_inputs()) throw Error(ErrorKind::invalid_dimension, "K mismatch");
  const WiringScope scope = WiringScope::all(dag);
  std::vector<double> errs(t.rows());
  for (std::size_t n = 0; n < t.rows(); ++n) errs[n] = select_single(t.row(n), dag, scope).error;
  return errs;
}

/// Codebook SQNR: ||T||_F^2 over the summed S = 1 selection residuals, in
/// dB. +inf when every row is matched exactly.
inline double sqnr_db(const TargetMatrix& t, const ComputationDag& dag) {
  return sqnr_from_errors(t.squared_frobenius(), selection_errors(t, dag));
}

/// Per-row error of what the assigned outputs compute.
inline std::vector<double> output_errors(const TargetMatrix& t, const ComputationDag& dag) {
  if (t.cols() != dag.num_inputs()) throw Error(ErrorKind::invalid_dimension, "K mismatch");
  if (dag.num_outputs() != t.rows()) throw Error(ErrorKind::invalid_dimension, "N mismatch");
  if (!dag.outputs_complete()) throw Error(ErrorKind::incomplete_dag, "unassigned outputs");
  std::vector<double> errs(t.rows());
  Row approx(t.cols());
  for (std::size_t n = 0; n < t.rows(); ++n) {
    const OutputSlot& s = dag.output(n);
    std::fill(approx.begin(), approx.end(), 0.0);
    if (s.is_assigned()) {
      auto c = dag.value(s.assignment().source);
      for (std::size_t k = 0; k < approx.size(); ++k)
        approx[k] = 0.0 + s.assignment().coeff.value() * c[k];
    }
    errs[n] = squared_distance(t.row(n), approx);
  }
  return errs;
}

inline double output_sqnr_db(const TargetMatrix& t, const ComputationDag& dag) {
  return sqnr_from_errors(t.squared_frobenius(), output_errors(t, dag));
}

}  // namespace lcc
