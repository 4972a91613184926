#pragma once

// Single-row wiring: approximate a target row by one fundamental operation,
// i.e. a sum of at most S codebook vertices scaled by signed powers of two.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcc/core.hpp"

namespace lcc {

enum class WiringSolver { dmp, rs, brute };

inline const char* to_string(WiringSolver s) {
  switch (s) {
    case WiringSolver::dmp: return "dmp";
    case WiringSolver::rs: return "rs";
    case WiringSolver::brute: return "brute";
  }
  return "?";
}

struct WiringConfig {
  int s = 2;
  WiringSolver solver = WiringSolver::dmp;
  int q = 16;  // beam width, RS only
};

/// The codewords a wiring may draw from. `depths` runs parallel to
/// `vertices` and is only read when `max_depth_span` is set.
struct WiringScope {
  std::vector<VertexId> vertices;
  std::vector<int> depths;
  std::optional<int> max_depth_span;

  static WiringScope all(const ComputationDag& dag) {
    WiringScope s;
    s.vertices.resize(dag.size());
    for (VertexId v = 0; v < dag.size(); ++v) s.vertices[v] = v;
    return s;
  }
};

struct WiringResult {
  WiringVector wiring;
  double error = 0.0;  // squared Euclidean residual, see combination_error
};

struct ShiftFit {
  std::optional<ShiftCoefficient> coeff;  // nullopt: no scaled codeword beats zero
  double error = 0.0;
};

/// Squared residual ||t - omega * mat(C)||^2. The approximation is formed
/// from the dense weights in ascending vertex order, so every encoding of
/// the same dense omega yields the same bits.
inline double combination_error(std::span<const double> t, const ComputationDag& dag,
                                const WiringVector& w) {
  Row approx(t.size(), 0.0);
  for (const auto& [v, weight] : w.dense_weights()) {
    auto c = dag.value(v);
    for (std::size_t k = 0; k < approx.size(); ++k) approx[k] += weight * c[k];
  }
  return squared_distance(t, approx);
}

/// Best signed power of two a minimizing ||residual - a * codeword||^2.
/// Only floor/ceil of log2|a*| need testing: the error is a convex
/// parabola in a, so the best power of two on the side of a* is one of the
/// two neighbours, and the opposite sign is never better. Ties go to the
/// smaller exponent.
inline ShiftFit optimal_shift(std::span<const double> residual, std::span<const double> codeword,
                              const ExponentBounds& bounds = {}) {
  const double cc = squared_norm(codeword);
  if (cc == 0.0) throw Error(ErrorKind::degenerate_codeword, "codeword has zero norm");
  const double ip = dot(residual, codeword);
  if (ip == 0.0) return {std::nullopt, squared_norm(residual)};

  const double a = ip / cc;
  const int sign = a < 0.0 ? -1 : 1;
  const double mag = std::fabs(a);
  const int e_floor = std::ilogb(mag);
  const int e_ceil = std::ldexp(1.0, e_floor) == mag ? e_floor : e_floor + 1;

  ShiftFit best;
  for (int e : {bounds.clamp(e_floor), bounds.clamp(e_ceil)}) {
    const ShiftCoefficient coeff(sign, e);
    double err = 0.0;
    for (std::size_t k = 0; k < residual.size(); ++k) {
      const double d = residual[k] - coeff.apply(codeword[k]);
      err += d * d;
    }
    if (!best.coeff || err < best.error ||
        (err == best.error && e < best.coeff->exponent())) {
      best.coeff = coeff;
      best.error = err;
    }
  }
  return best;
}

namespace detail {

inline bool depth_span_ok(const WiringScope& scope, std::size_t idx, bool have_terms, int dmin,
                          int dmax) {
  if (!scope.max_depth_span || !have_terms) return true;
  const int d = scope.depths[idx];
  return std::max(dmax, d) - std::min(dmin, d) <= *scope.max_depth_span;
}

inline void check_scope(const WiringScope& scope, const ComputationDag& dag) {
  if (scope.max_depth_span && scope.depths.size() != scope.vertices.size())
    throw Error(ErrorKind::invalid_argument, "depth-constrained scope needs one depth per vertex");
  for (VertexId v : scope.vertices)
    if (!dag.contains(v))
      throw Error(ErrorKind::unknown_vertex, "scope vertex " + std::to_string(v) + " not in DAG");
}

// Tie key for whole combinations: term count, then vertex ids, exponents and
// signs of the canonically sorted terms.
inline bool key_less(std::span<const WiringTerm> a, std::span<const WiringTerm> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].source != b[i].source) return a[i].source < b[i].source;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].coeff.exponent() != b[i].coeff.exponent())
      return a[i].coeff.exponent() < b[i].coeff.exponent();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].coeff.is_negative() != b[i].coeff.is_negative()) return !a[i].coeff.is_negative();
  return false;
}

}  // namespace detail

/// Discrete matching pursuit: S greedy rounds, each appending the single
/// (vertex, shift) that lowers the residual most. Stops early when no
/// candidate strictly improves; may return zero terms.
inline WiringResult dmp_wiring(std::span<const double> t, const ComputationDag& dag, int s,
                               const WiringScope& scope) {
  if (s < 1) throw Error(ErrorKind::invalid_argument, "fan-in budget S must be >= 1");
  if (t.size() != dag.num_inputs())
    throw Error(ErrorKind::invalid_dimension, "target row length != K");
  detail::check_scope(scope, dag);

  Row residual(t.begin(), t.end());
  double err = squared_norm(residual);
  WiringVector w;
  int dmin = 0, dmax = 0;
  bool any_nonzero = false;

  for (int round = 0; round < s; ++round) {
    std::optional<std::size_t> best_idx;
    ShiftFit best;
    for (std::size_t i = 0; i < scope.vertices.size(); ++i) {
      const VertexId v = scope.vertices[i];
      if (dag.squared_norm(v) == 0.0) continue;
      any_nonzero = true;
      if (!detail::depth_span_ok(scope, i, !w.empty(), dmin, dmax)) continue;
      ShiftFit fit = optimal_shift(residual, dag.value(v), dag.bounds());
      if (!fit.coeff) continue;
      if (!best_idx || fit.error < best.error ||
          (fit.error == best.error && fit.coeff->exponent() < best.coeff->exponent())) {
        best_idx = i;
        best = fit;
      }
    }
    if (!best_idx || !(best.error < err)) break;

    const VertexId v = scope.vertices[*best_idx];
    auto c = dag.value(v);
    for (std::size_t k = 0; k < residual.size(); ++k) residual[k] -= best.coeff->apply(c[k]);
    err = best.error;
    if (scope.max_depth_span) {
      const int d = scope.depths[*best_idx];
      dmin = w.empty() ? d : std::min(dmin, d);
      dmax = w.empty() ? d : std::max(dmax, d);
    }
    w.push_back({v, *best.coeff});
  }
  if (!any_nonzero && !scope.vertices.empty())
    throw Error(ErrorKind::degenerate_codeword, "every codeword in scope is zero");
  return {w, combination_error(t, dag, w)};
}

inline WiringResult dmp_wiring(std::span<const double> t, const ComputationDag& dag, int s) {
  return dmp_wiring(t, dag, s, WiringScope::all(dag));
}

/// S = 1 selection: the best single scaled codeword (or zero).
inline WiringResult select_single(std::span<const double> t, const ComputationDag& dag,
                                  const WiringScope& scope) {
  return dmp_wiring(t, dag, 1, scope);
}

inline WiringResult select_single(std::span<const double> t, const ComputationDag& dag) {
  return dmp_wiring(t, dag, 1);
}

inline OutputSlot to_output(const WiringResult& single) {
  if (single.wiring.empty()) return OutputSlot::zero();
  return OutputSlot::to(single.wiring[0].source, single.wiring[0].coeff);
}

namespace detail {

struct BeamEntry {
  std::vector<WiringTerm> terms;  // canonical order
  std::vector<std::pair<VertexId, double>> dense;
  Row residual;
  double error = 0.0;
  int dmin = 0, dmax = 0;
};

inline BeamEntry make_entry(std::span<const double> t, const ComputationDag& dag,
                            std::vector<WiringTerm> terms, const WiringScope& scope,
                            const std::unordered_map<VertexId, int>& depth_of) {
  BeamEntry e;
  WiringVector w(std::move(terms));
  e.terms = w.canonical_terms();
  e.dense = w.dense_weights();
  Row approx(t.size(), 0.0);
  for (const auto& [v, weight] : e.dense) {
    auto c = dag.value(v);
    for (std::size_t k = 0; k < approx.size(); ++k) approx[k] += weight * c[k];
  }
  e.residual.resize(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) e.residual[k] = t[k] - approx[k];
  e.error = squared_distance(t, approx);
  if (scope.max_depth_span && !e.terms.empty()) {
    e.dmin = e.dmax = depth_of.at(e.terms.front().source);
    for (const WiringTerm& term : e.terms) {
      e.dmin = std::min(e.dmin, depth_of.at(term.source));
      e.dmax = std::max(e.dmax, depth_of.at(term.source));
    }
  }
  return e;
}

inline bool rank_less(const BeamEntry& a, const BeamEntry& b) {
  if (a.error != b.error) return a.error < b.error;
  return key_less(a.terms, b.terms);
}

struct DenseHash {
  std::size_t operator()(const std::vector<std::pair<VertexId, double>>& d) const {
    std::size_t h = d.size();
    for (const auto& [v, w] : d) {
      h ^= std::hash<VertexId>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Keeps the `capacity` best entries by (error, key), one per dense omega.
class BeamLevel {
 public:
  explicit BeamLevel(std::size_t capacity) : capacity_(capacity) {}

  bool full() const { return order_.size() >= capacity_; }
  double worst_error() const { return (*order_.rbegin())->error; }

  void offer(BeamEntry e) {
    auto found = by_dense_.find(e.dense);
    if (found != by_dense_.end()) {
      if (!rank_less(e, *found->second)) return;
      order_.erase(found->second);
      by_dense_.erase(found);
    } else if (full()) {
      if (!rank_less(e, **order_.rbegin())) return;
      evict_worst();
    }
    auto ptr = std::make_shared<BeamEntry>(std::move(e));
    order_.insert(ptr);
    by_dense_.emplace(ptr->dense, ptr);
  }

  // Inserts regardless of capacity (greedy seeding).
  void force(BeamEntry e) {
    if (by_dense_.count(e.dense)) return;
    auto ptr = std::make_shared<BeamEntry>(std::move(e));
    order_.insert(ptr);
    by_dense_.emplace(ptr->dense, ptr);
  }

  std::vector<BeamEntry> take() const {
    std::vector<BeamEntry> out;
    out.reserve(order_.size());
    for (const auto& p : order_) out.push_back(*p);
    return out;
  }

 private:
  using Ptr = std::shared_ptr<BeamEntry>;
  struct PtrLess {
    bool operator()(const Ptr& a, const Ptr& b) const { return rank_less(*a, *b); }
  };

  void evict_worst() {
    auto last = std::prev(order_.end());
    by_dense_.erase((*last)->dense);
    order_.erase(last);
  }

  std::size_t capacity_;
  std::set<Ptr, PtrLess> order_;
  std::unordered_map<std::vector<std::pair<VertexId, double>>, Ptr, DenseHash> by_dense_;
};

}  // namespace detail

/// Reduced-state (beam) wiring. Each level extends every retained partial
/// combination by one (vertex, signed shift) term and keeps the Q best
/// distinct combinations; the greedy path is always kept, so the result is
/// never worse than dmp_wiring. Returns the best combination seen at any
/// level.
inline WiringResult rs_wiring(std::span<const double> t, const ComputationDag& dag, int s, int q,
                              const WiringScope& scope) {
  if (q < 1) throw Error(ErrorKind::invalid_argument, "beam width Q must be >= 1");
  const WiringResult greedy = dmp_wiring(t, dag, s, scope);  // validates arguments
  const std::vector<WiringTerm> greedy_terms(greedy.wiring.terms().begin(),
                                             greedy.wiring.terms().end());

  std::unordered_map<VertexId, int> depth_of;
  if (scope.max_depth_span)
    for (std::size_t i = 0; i < scope.vertices.size(); ++i)
      depth_of[scope.vertices[i]] = scope.depths[i];

  const ExponentBounds& b = dag.bounds();
  std::vector<detail::BeamEntry> beam{detail::make_entry(t, dag, {}, scope, depth_of)};
  detail::BeamEntry best = beam.front();

  for (int level = 1; level <= s; ++level) {
    detail::BeamLevel next(static_cast<std::size_t>(q));
    for (const detail::BeamEntry& entry : beam) {
      if (static_cast<int>(entry.terms.size()) != level - 1) continue;
      const double rr = entry.error;
      for (std::size_t i = 0; i < scope.vertices.size(); ++i) {
        const VertexId v = scope.vertices[i];
        const double cc = dag.squared_norm(v);
        if (cc == 0.0) continue;
        if (!detail::depth_span_ok(scope, i, !entry.terms.empty(), entry.dmin, entry.dmax))
          continue;
        const double ip = dot(entry.residual, dag.value(v));
        const int same = ip < 0.0 ? -1 : 1;

        // Three streams of candidates, each in nondecreasing error order:
        // same sign going down from floor(log2|a*|), same sign going up,
        // opposite sign going up from the smallest exponent.
        int down, up;
        if (ip == 0.0) {
          down = b.min - 1;
          up = b.min;
        } else {
          const int f0 = std::ilogb(std::fabs(ip) / cc);
          down = std::min(f0, b.max);
          up = std::max(f0 + 1, b.min);
        }
        int opp = b.min;
        auto err_of = [&](int sign, int e) {
          const double a = std::ldexp(static_cast<double>(sign), e);
          return rr - 2.0 * a * ip + a * a * cc;
        };
        for (;;) {
          double best_f = 0.0;
          int which = -1;
          auto consider = [&](int stream, bool live, int sign, int e) {
            if (!live) return;
            const double f = err_of(sign, e);
            if (which < 0 || f < best_f) {
              best_f = f;
              which = stream;
            }
          };
          consider(0, down >= b.min, same, down);
          consider(1, up <= b.max, same, up);
          consider(2, opp <= b.max, -same, opp);
          if (which < 0) break;
          if (next.full()) {
            const double thr = next.worst_error();
            if (best_f > thr + 1e-10 * (std::fabs(thr) + rr)) break;
          }
          int sign = same, e = 0;
          if (which == 0) e = down--;
          else if (which == 1) e = up++;
          else {
            sign = -same;
            e = opp++;
          }
          std::vector<WiringTerm> terms = entry.terms;
          terms.push_back({v, ShiftCoefficient(sign, e)});
          next.offer(detail::make_entry(t, dag, std::move(terms), scope, depth_of));
        }
      }
    }
    if (static_cast<int>(greedy_terms.size()) >= level) {
      next.force(detail::make_entry(
          t, dag, std::vector<WiringTerm>(greedy_terms.begin(), greedy_terms.begin() + level),
          scope, depth_of));
    }
    beam = next.take();
    for (const detail::BeamEntry& e : beam)
      if (detail::rank_less(e, best)) best = e;
    if (beam.empty()) break;
  }
  WiringVector w(best.terms);
  return {w, combination_error(t, dag, w)};
}

inline WiringResult rs_wiring(std::span<const double> t, const ComputationDag& dag, int s, int q) {
  return rs_wiring(t, dag, s, q, WiringScope::all(dag));
}

/// Number of multisets of at most S terms brute_force_wiring would visit.
inline double brute_force_count(std::size_t num_vertices, const ExponentBounds& bounds, int s) {
  const double items = static_cast<double>(num_vertices) * 2.0 * bounds.count();
  double total = 1.0, term = 1.0;  // the empty combination
  for (int k = 1; k <= s; ++k) {
    term = term * (items + k - 1) / k;
    total += term;
  }
  return total;
}

inline constexpr double kBruteForceLimit = 1e7;

/// Exhaustive minimizer of the wiring objective over all multisets of at
/// most S (vertex, signed shift) terms. Test oracle; toy scale only. Ties go
/// to fewer terms, then lexicographically smaller vertex ids, exponents,
/// signs.
inline WiringResult brute_force_wiring(std::span<const double> t, const ComputationDag& dag,
                                       int s, const WiringScope& scope) {
  if (s < 1) throw Error(ErrorKind::invalid_argument, "fan-in budget S must be >= 1");
  if (t.size() != dag.num_inputs())
    throw Error(ErrorKind::invalid_dimension, "target row length != K");
  detail::check_scope(scope, dag);
  const ExponentBounds& b = dag.bounds();
  const double count = brute_force_count(scope.vertices.size(), b, s);
  if (count > kBruteForceLimit)
    throw Error(ErrorKind::search_space_too_large,
                "brute force would visit " + std::to_string(static_cast<long double>(count)) +
                    " combinations (limit 1e7)");

  // Items in canonical order, so nondecreasing index sequences are sorted.
  struct Item {
    WiringTerm term;
    int depth;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < scope.vertices.size(); ++i)
    for (int e = b.min; e <= b.max; ++e)
      for (int sign : {1, -1})
        items.push_back({{scope.vertices[i], ShiftCoefficient(sign, e)},
                         scope.max_depth_span ? scope.depths[i] : 0});

  std::vector<WiringTerm> best_terms;
  double best_err = combination_error(t, dag, WiringVector{});
  std::vector<WiringTerm> current;
  std::vector<int> cur_depth;

  std::function<void(std::size_t)> recurse = [&](std::size_t start) {
    if (!current.empty()) {
      if (scope.max_depth_span) {
        auto [lo, hi] = std::minmax_element(cur_depth.begin(), cur_depth.end());
        if (*hi - *lo > *scope.max_depth_span) return;  // every extension violates too
      }
      const double err = combination_error(t, dag, WiringVector(current));
      if (err < best_err || (err == best_err && detail::key_less(current, best_terms))) {
        best_err = err;
        best_terms = current;
      }
    }
    if (static_cast<int>(current.size()) == s) return;
    for (std::size_t i = start; i < items.size(); ++i) {
      current.push_back(items[i].term);
      cur_depth.push_back(items[i].depth);
      recurse(i);
      current.pop_back();
      cur_depth.pop_back();
    }
  };
  recurse(0);
  return {WiringVector(best_terms), best_err};
}

inline WiringResult brute_force_wiring(std::span<const double> t, const ComputationDag& dag,
                                       int s) {
  return brute_force_wiring(t, dag, s, WiringScope::all(dag));
}

inline WiringResult wire(std::span<const double> t, const ComputationDag& dag,
                         const WiringConfig& cfg, const WiringScope& scope) {
  switch (cfg.solver) {
    case WiringSolver::dmp: return dmp_wiring(t, dag, cfg.s, scope);
    case WiringSolver::rs: return rs_wiring(t, dag, cfg.s, cfg.q, scope);
    case WiringSolver::brute: return brute_force_wiring(t, dag, cfg.s, scope);
  }
  throw Error(ErrorKind::invalid_argument, "unknown wiring solver");
}

}  // namespace lcc
