#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcc/error.hpp"
#include "lcc/numeric.hpp"

namespace lcc {

/// Vertex index into a ComputationDag. Zero-based: ids [0, K) are the inputs.
using VertexId = std::size_t;
using Row = std::vector<double>;

/// Inclusive exponent range for shift coefficients.
struct ExponentBounds {
  int min = -63;
  int max = 63;

  bool contains(int e) const noexcept { return e >= min && e <= max; }
  int clamp(int e) const noexcept { return std::clamp(e, min, max); }
  int count() const noexcept { return max - min + 1; }

  friend bool operator==(const ExponentBounds&, const ExponentBounds&) = default;
};

/// Exact signed power of two, sign * 2^exponent. Zero is never represented;
/// an absent term stands for the zero coefficient.
class ShiftCoefficient {
 public:
  constexpr ShiftCoefficient() = default;
  ShiftCoefficient(int sign, int exponent) : negative_(sign < 0), exponent_(exponent) {
    if (sign != 1 && sign != -1) {
      throw Error(ErrorKind::invalid_argument, "shift coefficient sign must be +1 or -1, got " +
                                                   std::to_string(sign));
    }
  }

  static ShiftCoefficient positive(int exponent) { return {1, exponent}; }
  static ShiftCoefficient negative(int exponent) { return {-1, exponent}; }

  int sign() const noexcept { return negative_ ? -1 : 1; }
  bool is_negative() const noexcept { return negative_; }
  int exponent() const noexcept { return exponent_; }

  double value() const noexcept { return std::ldexp(negative_ ? -1.0 : 1.0, exponent_); }

  // Exponent manipulation only; exact barring overflow/underflow of x.
  double apply(double x) const noexcept {
    const double scaled = std::ldexp(x, exponent_);
    return negative_ ? -scaled : scaled;
  }

  ShiftCoefficient shifted(int m) const { return {sign(), exponent_ + m}; }
  ShiftCoefficient negated() const { return {-sign(), exponent_}; }

  std::string to_string() const {
    return std::string(negative_ ? "-" : "+") + "2^" + std::to_string(exponent_);
  }

  friend bool operator==(const ShiftCoefficient&, const ShiftCoefficient&) = default;

 private:
  bool negative_ = false;
  int exponent_ = 0;
};

struct WiringTerm {
  VertexId source = 0;
  ShiftCoefficient coeff;

  friend bool operator==(const WiringTerm&, const WiringTerm&) = default;
};

/// Total order used for canonical term lists: vertex, then exponent, then
/// positive before negative.
inline bool canonical_less(const WiringTerm& a, const WiringTerm& b) {
  if (a.source != b.source) return a.source < b.source;
  if (a.coeff.exponent() != b.coeff.exponent()) return a.coeff.exponent() < b.coeff.exponent();
  return !a.coeff.is_negative() && b.coeff.is_negative();
}

/// Sparse combination of codebook vertices with shift coefficients. Repeated
/// sources are allowed and count as separate arcs.
class WiringVector {
 public:
  WiringVector() = default;
  WiringVector(std::initializer_list<WiringTerm> terms) : terms_(terms) {}
  explicit WiringVector(std::vector<WiringTerm> terms) : terms_(std::move(terms)) {}

  std::span<const WiringTerm> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const WiringTerm& operator[](std::size_t i) const { return terms_[i]; }

  void push_back(WiringTerm t) { terms_.push_back(t); }

  /// Terms sorted by canonical_less.
  std::vector<WiringTerm> canonical_terms() const {
    std::vector<WiringTerm> sorted = terms_;
    std::sort(sorted.begin(), sorted.end(), canonical_less);
    return sorted;
  }

  /// Dense weight per vertex (sparse form, ascending vertex, zero weights
  /// dropped). Coefficients are summed in canonical order so permutations of
  /// the same multiset produce identical weights.
  std::vector<std::pair<VertexId, double>> dense_weights() const {
    std::vector<std::pair<VertexId, double>> out;
    for (const WiringTerm& t : canonical_terms()) {
      if (!out.empty() && out.back().first == t.source) {
        out.back().second += t.coeff.value();
      } else {
        out.emplace_back(t.source, t.coeff.value());
      }
    }
    std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
    return out;
  }

  friend bool operator==(const WiringVector&, const WiringVector&) = default;

 private:
  std::vector<WiringTerm> terms_;
};

struct OutputAssignment {
  VertexId source = 0;
  ShiftCoefficient coeff;

  friend bool operator==(const OutputAssignment&, const OutputAssignment&) = default;
};

/// Output row state. `zero` is the S=1 selection of the zero element (a row
/// that no scaled codeword approximates better than 0).
class OutputSlot {
 public:
  enum class State { unassigned, zero, assigned };

  OutputSlot() = default;
  static OutputSlot zero() {
    OutputSlot s;
    s.state_ = State::zero;
    return s;
  }
  static OutputSlot to(VertexId source, ShiftCoefficient coeff) {
    OutputSlot s;
    s.state_ = State::assigned;
    s.assignment_ = {source, coeff};
    return s;
  }

  State state() const noexcept { return state_; }
  bool is_assigned() const noexcept { return state_ == State::assigned; }
  bool is_zero() const noexcept { return state_ == State::zero; }
  bool is_unassigned() const noexcept { return state_ == State::unassigned; }
  const OutputAssignment& assignment() const noexcept { return assignment_; }

  friend bool operator==(const OutputSlot&, const OutputSlot&) = default;

 private:
  State state_ = State::unassigned;
  OutputAssignment assignment_{};
};

/// Constant N x K real matrix, row-major.
class TargetMatrix {
 public:
  TargetMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    validate();
  }

  TargetMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorKind::invalid_dimension, "ragged target matrix");
      entries_.insert(entries_.end(), r.begin(), r.end());
    }
    validate();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t n, std::size_t k) const { return entries_[n * cols_ + k]; }
  std::span<const double> row(std::size_t n) const {
    return std::span<const double>(entries_).subspan(n * cols_, cols_);
  }
  Row col(std::size_t k) const {
    Row c(rows_);
    for (std::size_t n = 0; n < rows_; ++n) c[n] = (*this)(n, k);
    return c;
  }
  std::span<const double> entries() const noexcept { return entries_; }

  /// Columns [first, first + width) as a new matrix; may be all-zero, so the
  /// norm check is skipped (callers handle zero blocks).
  std::vector<double> column_block(std::size_t first, std::size_t width) const {
    std::vector<double> out;
    out.reserve(rows_ * width);
    for (std::size_t n = 0; n < rows_; ++n)
      for (std::size_t k = first; k < first + width; ++k) out.push_back((*this)(n, k));
    return out;
  }

  double squared_frobenius() const {
    std::vector<double> sq(entries_.size());
    std::transform(entries_.begin(), entries_.end(), sq.begin(), [](double x) { return x * x; });
    return pairwise_sum(sq);
  }

  /// y = T x, accumulated left to right per row.
  Row multiply(std::span<const double> x) const {
    if (x.size() != cols_) throw Error(ErrorKind::invalid_dimension, "input length != cols");
    Row y(rows_, 0.0);
    for (std::size_t n = 0; n < rows_; ++n) y[n] = dot(row(n), x);
    return y;
  }

 private:
  void validate() const {
    if (rows_ == 0 || cols_ == 0)
      throw Error(ErrorKind::invalid_dimension, "target matrix needs N >= 1 and K >= 1");
    if (entries_.size() != rows_ * cols_)
      throw Error(ErrorKind::invalid_dimension,
                  "expected " + std::to_string(rows_ * cols_) + " entries, got " +
                      std::to_string(entries_.size()));
    for (double v : entries_)
      if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite matrix entry");
    if (squared_frobenius() == 0.0)
      throw Error(ErrorKind::invalid_argument, "all-zero target matrix");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// Shift-and-add program. Vertices [0, K) are the unit vectors; each later
/// vertex is a WiringVector over strictly earlier vertices and caches its
/// dense value c_l in R^{1xK}.
class ComputationDag {
 public:
  explicit ComputationDag(std::size_t num_inputs, ExponentBounds bounds = {})
      : k_(num_inputs), bounds_(bounds) {
    if (k_ == 0) throw Error(ErrorKind::invalid_dimension, "a DAG needs at least one input");
    if (bounds_.min > bounds_.max)
      throw Error(ErrorKind::invalid_argument, "empty exponent range");
    for (std::size_t i = 0; i < k_; ++i) {
      Row unit(k_, 0.0);
      unit[i] = 1.0;
      push(WiringVector{}, std::move(unit));
    }
  }

  std::size_t num_inputs() const noexcept { return k_; }
  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t num_internal() const noexcept { return size() - k_; }
  const ExponentBounds& bounds() const noexcept { return bounds_; }
  bool is_input(VertexId v) const noexcept { return v < k_; }
  bool contains(VertexId v) const noexcept { return v < size(); }

  std::span<const double> value(VertexId v) const {
    check(v);
    return std::span<const double>(values_).subspan(v * k_, k_);
  }
  double squared_norm(VertexId v) const {
    check(v);
    return norms_[v];
  }
  const WiringVector& terms(VertexId v) const {
    check(v);
    return terms_[v];
  }
  std::size_t indegree(VertexId v) const { return terms(v).size(); }

  /// Evaluates `w` in stored term order and appends it. Returns the new id.
  VertexId add_vertex(WiringVector w) {
    if (w.empty()) throw Error(ErrorKind::invariant, "internal vertex needs at least one term");
    for (const WiringTerm& t : w.terms()) {
      if (t.source >= size())
        throw Error(ErrorKind::invariant, "term source " + std::to_string(t.source) +
                                              " does not precede vertex " +
                                              std::to_string(size()));
      if (!bounds_.contains(t.coeff.exponent()))
        throw Error(ErrorKind::invariant,
                    "exponent " + std::to_string(t.coeff.exponent()) + " outside [" +
                        std::to_string(bounds_.min) + ", " + std::to_string(bounds_.max) + "]");
    }
    Row v = evaluate_terms(w);
    return push(std::move(w), std::move(v));
  }

  /// Recomputes c_v from its terms (for cache-coherence checks).
  Row recompute_value(VertexId v) const {
    check(v);
    if (is_input(v)) {
      Row unit(k_, 0.0);
      unit[v] = 1.0;
      return unit;
    }
    return evaluate_terms(terms_[v]);
  }

  /// Id of an existing vertex whose cached value equals `value` exactly.
  std::optional<VertexId> find_value(std::span<const double> value) const {
    auto [lo, hi] = index_.equal_range(hash_row(value));
    for (auto it = lo; it != hi; ++it) {
      auto existing = this->value(it->second);
      if (std::equal(existing.begin(), existing.end(), value.begin(), value.end()))
        return it->second;
    }
    return std::nullopt;
  }

  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  void set_num_outputs(std::size_t n) { outputs_.assign(n, OutputSlot{}); }
  const OutputSlot& output(std::size_t row) const {
    if (row >= outputs_.size())
      throw Error(ErrorKind::invalid_argument, "output row " + std::to_string(row) + " out of range");
    return outputs_[row];
  }
  std::span<const OutputSlot> outputs() const noexcept { return outputs_; }
  void assign_output(std::size_t row, OutputSlot slot) {
    if (row >= outputs_.size())
      throw Error(ErrorKind::invalid_argument, "output row " + std::to_string(row) + " out of range");
    if (slot.is_assigned()) {
      check(slot.assignment().source);
      if (!bounds_.contains(slot.assignment().coeff.exponent()))
        throw Error(ErrorKind::invariant, "output exponent outside bounds");
    }
    outputs_[row] = slot;
  }
  bool outputs_complete() const noexcept {
    return std::none_of(outputs_.begin(), outputs_.end(),
                        [](const OutputSlot& s) { return s.is_unassigned(); });
  }

  /// First `num_vertices` vertices; outputs are dropped.
  ComputationDag truncated(std::size_t num_vertices) const {
    if (num_vertices < k_ || num_vertices > size())
      throw Error(ErrorKind::invalid_argument, "truncation outside [K, |C|]");
    ComputationDag out(k_, bounds_);
    for (VertexId v = k_; v < num_vertices; ++v)
      out.push(terms_[v], Row(value(v).begin(), value(v).end()));
    return out;
  }

 private:
  void check(VertexId v) const {
    if (v >= size())
      throw Error(ErrorKind::unknown_vertex, "vertex " + std::to_string(v) + " does not exist");
  }

  Row evaluate_terms(const WiringVector& w) const {
    Row acc(k_, 0.0);
    for (const WiringTerm& t : w.terms()) {
      auto src = value(t.source);
      for (std::size_t k = 0; k < k_; ++k) acc[k] += t.coeff.apply(src[k]);
    }
    return acc;
  }

  static std::size_t hash_row(std::span<const double> r) {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (double x : r) {
      // +0.0 folds -0.0 onto 0.0 so equal rows hash equally.
      h ^= std::hash<double>{}(x + 0.0) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  VertexId push(WiringVector w, Row v) {
    const VertexId id = terms_.size();
    norms_.push_back(lcc::squared_norm(v));
    index_.emplace(hash_row(v), id);
    values_.insert(values_.end(), v.begin(), v.end());
    terms_.push_back(std::move(w));
    return id;
  }

  std::size_t k_;
  ExponentBounds bounds_;
  std::vector<WiringVector> terms_;
  std::vector<double> values_;  // |C| x K, row-major
  std::vector<double> norms_;
  std::unordered_multimap<std::size_t, VertexId> index_;
  std::vector<OutputSlot> outputs_;
};

inline ComputationDag make_unit_codebook(std::size_t k, ExponentBounds bounds = {}) {
  return ComputationDag(k, bounds);
}

/// Cached value of `vertex` as an owned row vector.
inline Row dense_value(const ComputationDag& dag, VertexId vertex) {
  auto v = dag.value(vertex);
  return Row(v.begin(), v.end());
}

/// Unit hardware costs per adder, delay element and inverter.
struct CostModel {
  double c_add = 20.0;
  double c_delay = 20.0;
  double c_inv = 2.0;

  static CostModel adders_only() { return {1.0, 0.0, 0.0}; }
};

struct CostReport {
  std::size_t n_add = 0;
  std::size_t n_delay = 0;
  std::size_t n_inv = 0;
  double total = 0.0;
  std::vector<int> depths;
};

}  // namespace lcc
