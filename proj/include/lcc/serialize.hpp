#pragma once

// DAG interchange.
//
// JSON (ids are 1-based; inputs are the implicit ids 1..K):
//   { "k": K,
//     "vertices": [ { "id": K+1, "terms": [ { "src": 1, "sign": 1, "exp": 0 }, ... ] }, ... ],
//     "outputs":  [ { "row": 1, "src": 3, "sign": -1, "exp": 2 }, ... ] }
// A zero output is written as src 0, sign 0, exp 0. Unassigned outputs are
// omitted; the output count is the largest row present.
//
// DOT: inputs x<i>, internal vertices v<i>, outputs y<n>; arcs labelled
// "+2^e" / "-2^e".

#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lcc/core.hpp"

namespace lcc {

inline std::string export_json(const ComputationDag& dag) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["k"] = dag.num_inputs();
  ordered_json vertices = ordered_json::array();
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v) {
    ordered_json terms = ordered_json::array();
    for (const WiringTerm& t : dag.terms(v).terms())
      terms.push_back({{"src", t.source + 1}, {"sign", t.coeff.sign()}, {"exp", t.coeff.exponent()}});
    vertices.push_back({{"id", v + 1}, {"terms", std::move(terms)}});
  }
  j["vertices"] = std::move(vertices);
  ordered_json outputs = ordered_json::array();
  for (std::size_t n = 0; n < dag.num_outputs(); ++n) {
    const OutputSlot& s = dag.output(n);
    if (s.is_unassigned()) continue;
    if (s.is_zero()) {
      outputs.push_back({{"row", n + 1}, {"src", 0}, {"sign", 0}, {"exp", 0}});
    } else {
      outputs.push_back({{"row", n + 1},
                         {"src", s.assignment().source + 1},
                         {"sign", s.assignment().coeff.sign()},
                         {"exp", s.assignment().coeff.exponent()}});
    }
  }
  j["outputs"] = std::move(outputs);
  return j.dump(2) + "\n";
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorKind::schema, where + ": missing \"" + key + "\"");
  return obj.at(key);
}

inline long long require_int(const nlohmann::json& obj, const char* key, const std::string& where) {
  const nlohmann::json& v = require(obj, key, where);
  if (!v.is_number_integer())
    throw Error(ErrorKind::schema, where + "." + key + ": expected an integer");
  return v.get<long long>();
}

inline const nlohmann::json& require_array(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  const nlohmann::json& v = require(obj, key, where);
  if (!v.is_array()) throw Error(ErrorKind::schema, where + "." + key + ": expected an array");
  return v;
}

}  // namespace detail

/// Parses and validates a JSON DAG; every structural invariant is rechecked.
inline ComputationDag import_dag(const std::string& text, const ExponentBounds& bounds = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::schema, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::schema, "$: expected an object");
  const long long k = detail::require_int(j, "k", "$");
  if (k < 1) throw Error(ErrorKind::schema, "$.k: must be >= 1");
  ComputationDag dag(static_cast<std::size_t>(k), bounds);

  auto read_coeff = [&](const nlohmann::json& obj, const std::string& where) {
    const long long sign = detail::require_int(obj, "sign", where);
    const long long exp = detail::require_int(obj, "exp", where);
    if (sign != 1 && sign != -1) throw Error(ErrorKind::schema, where + ".sign: must be 1 or -1");
    if (exp < bounds.min || exp > bounds.max)
      throw Error(ErrorKind::invariant, where + ".exp: " + std::to_string(exp) + " outside [" +
                                            std::to_string(bounds.min) + ", " +
                                            std::to_string(bounds.max) + "]");
    return ShiftCoefficient(static_cast<int>(sign), static_cast<int>(exp));
  };

  const nlohmann::json& vertices = detail::require_array(j, "vertices", "$");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string where = "$.vertices[" + std::to_string(i) + "]";
    const long long id = detail::require_int(vertices[i], "id", where);
    const long long expected = k + 1 + static_cast<long long>(i);
    if (id != expected)
      throw Error(ErrorKind::schema, where + ".id: expected " + std::to_string(expected) +
                                         ", got " + std::to_string(id));
    const nlohmann::json& terms = detail::require_array(vertices[i], "terms", where);
    if (terms.empty()) throw Error(ErrorKind::invariant, where + ".terms: empty");
    WiringVector w;
    for (std::size_t s = 0; s < terms.size(); ++s) {
      const std::string tw = where + ".terms[" + std::to_string(s) + "]";
      const long long src = detail::require_int(terms[s], "src", tw);
      if (src < 1 || src >= id)
        throw Error(ErrorKind::invariant, tw + ".src: " + std::to_string(src) +
                                              " must reference an earlier vertex (1.." +
                                              std::to_string(id - 1) + ")");
      w.push_back({static_cast<VertexId>(src - 1), read_coeff(terms[s], tw)});
    }
    dag.add_vertex(std::move(w));
  }

  const nlohmann::json& outputs = detail::require_array(j, "outputs", "$");
  long long n_out = 0;
  for (const auto& o : outputs)
    if (o.is_object() && o.contains("row") && o["row"].is_number_integer())
      n_out = std::max(n_out, o["row"].get<long long>());
  dag.set_num_outputs(static_cast<std::size_t>(n_out));
  std::set<long long> seen;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string where = "$.outputs[" + std::to_string(i) + "]";
    const long long row = detail::require_int(outputs[i], "row", where);
    if (row < 1) throw Error(ErrorKind::schema, where + ".row: must be >= 1");
    if (!seen.insert(row).second)
      throw Error(ErrorKind::schema, where + ".row: duplicate row " + std::to_string(row));
    const long long src = detail::require_int(outputs[i], "src", where);
    if (src == 0) {
      if (detail::require_int(outputs[i], "sign", where) != 0)
        throw Error(ErrorKind::schema, where + ": zero output needs sign 0");
      dag.assign_output(static_cast<std::size_t>(row - 1), OutputSlot::zero());
      continue;
    }
    if (src < 1 || src > static_cast<long long>(dag.size()))
      throw Error(ErrorKind::invariant, where + ".src: " + std::to_string(src) + " is not a vertex");
    dag.assign_output(static_cast<std::size_t>(row - 1),
                      OutputSlot::to(static_cast<VertexId>(src - 1), read_coeff(outputs[i], where)));
  }
  return dag;
}

inline std::string export_dot(const ComputationDag& dag) {
  std::ostringstream os;
  auto name = [&](VertexId v) {
    return (dag.is_input(v) ? "x" : "v") + std::to_string(v + 1);
  };
  os << "digraph lcc {\n  rankdir=LR;\n  node [style=filled];\n";
  for (VertexId v = 0; v < dag.size(); ++v) {
    if (dag.is_input(v))
      os << "  " << name(v) << " [shape=box, fillcolor=palegreen, class=\"input\"];\n";
    else
      os << "  " << name(v) << " [shape=circle, fillcolor=lightblue, class=\"internal\"];\n";
  }
  for (std::size_t n = 0; n < dag.num_outputs(); ++n) {
    const OutputSlot& s = dag.output(n);
    if (s.is_unassigned()) continue;
    os << "  y" << n + 1 << " [shape=box, fillcolor=salmon, class=\"output\""
       << (s.is_zero() ? ", label=\"y" + std::to_string(n + 1) + " = 0\"" : std::string()) << "];\n";
  }
  for (VertexId v = dag.num_inputs(); v < dag.size(); ++v)
    for (const WiringTerm& t : dag.terms(v).terms())
      os << "  " << name(t.source) << " -> " << name(v) << " [label=\"" << t.coeff.to_string()
         << "\"];\n";
  for (std::size_t n = 0; n < dag.num_outputs(); ++n) {
    const OutputSlot& s = dag.output(n);
    if (!s.is_assigned()) continue;
    os << "  " << name(s.assignment().source) << " -> y" << n + 1 << " [label=\""
       << s.assignment().coeff.to_string() << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace lcc
