#pragma once

// Pipelined hardware cost of a ComputationDag: adders, delay elements
// (latches) and sign inverters.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "lcc/core.hpp"

namespace lcc {

struct DepthTable {
  std::vector<int> vertex;  // longest path from any input; inputs are 0
  std::vector<int> output;  // depth of each output's source, -1 if unassigned or zero
};

inline DepthTable compute_depths(const ComputationDag& dag) {
  DepthTable d;
  d.vertex.assign(dag.size(), 0);
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v) {
    int deepest = 0;
    for (const WiringTerm& t : dag.terms(v).terms()) deepest = std::max(deepest, d.vertex[t.source]);
    d.vertex[v] = deepest + 1;
  }
  d.output.reserve(dag.num_outputs());
  for (const OutputSlot& s : dag.outputs())
    d.output.push_back(s.is_assigned() ? d.vertex[s.assignment().source] : -1);
  return d;
}

/// Sum over internal vertices of (indegree - 1).
inline std::size_t count_additions(const ComputationDag& dag) {
  std::size_t n = 0;
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v) n += dag.indegree(v) - 1;
  return n;
}

struct DelayOptions {
  // Also count latches that align every output to the deepest output.
  bool align_outputs = false;
};

/// One latch behind every adder, plus for every vertex with outgoing arcs
/// the longest depth gap to its successors minus one. Arcs are counted with
/// multiplicity; output selections are not arcs.
inline std::size_t count_delays(const ComputationDag& dag, const DepthTable& depths,
                                DelayOptions opts = {}) {
  std::size_t n = count_additions(dag);
  std::vector<int> deepest_succ(dag.size(), -1);
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v)
    for (const WiringTerm& t : dag.terms(v).terms())
      deepest_succ[t.source] = std::max(deepest_succ[t.source], depths.vertex[v]);
  for (VertexId v = 0; v < dag.size(); ++v)
    if (deepest_succ[v] >= 0) n += static_cast<std::size_t>(deepest_succ[v] - depths.vertex[v] - 1);
  if (opts.align_outputs && !depths.output.empty()) {
    const int last = *std::max_element(depths.output.begin(), depths.output.end());
    for (int d : depths.output)
      if (d >= 0) n += static_cast<std::size_t>(last - d);
  }
  return n;
}

inline std::size_t count_delays(const ComputationDag& dag, DelayOptions opts = {}) {
  return count_delays(dag, compute_depths(dag), opts);
}

/// Negative arcs, output selections included.
inline std::size_t count_inverters(const ComputationDag& dag) {
  std::size_t n = 0;
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v)
    for (const WiringTerm& t : dag.terms(v).terms()) n += t.coeff.is_negative() ? 1 : 0;
  for (const OutputSlot& s : dag.outputs())
    if (s.is_assigned() && s.assignment().coeff.is_negative()) ++n;
  return n;
}

inline CostReport total_cost(const ComputationDag& dag, const CostModel& model = {},
                             DelayOptions opts = {}) {
  if (model.c_add < 0 || model.c_delay < 0 || model.c_inv < 0)
    throw Error(ErrorKind::invalid_argument, "unit costs must be nonnegative");
  DepthTable depths = compute_depths(dag);
  CostReport r;
  r.n_add = count_additions(dag);
  r.n_delay = count_delays(dag, depths, opts);
  r.n_inv = count_inverters(dag);
  r.total = model.c_add * static_cast<double>(r.n_add) +
            model.c_delay * static_cast<double>(r.n_delay) +
            model.c_inv * static_cast<double>(r.n_inv);
  r.depths = std::move(depths.vertex);
  return r;
}

}  // namespace lcc
