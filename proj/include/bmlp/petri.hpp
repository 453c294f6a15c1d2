#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bmlp/compile.hpp"
#include "bmlp/datalog.hpp"
#include "bmlp/errors.hpp"
#include "bmlp/solve.hpp"

namespace bmlp {

/// A marking is a set of places (one-bounded: at most one token per place).
using Marking = std::set<std::string>;

struct Transition {
  std::string name;
  std::set<std::string> inputs;   // nonempty
  std::set<std::string> outputs;  // nonempty

  bool operator==(const Transition&) const = default;
};

/// One-bounded elementary net: places, unit-weight transitions, flow relation
/// given by the transitions' input/output sets.
struct ElementaryNet {
  std::vector<std::string> places;  // insertion order, unique
  std::vector<Transition> transitions;

  bool has_place(const std::string& p) const {
    return std::find(places.begin(), places.end(), p) != places.end();
  }

  void add_place(const std::string& p) {
    if (!has_place(p)) places.push_back(p);
  }

  const Transition& transition(const std::string& name) const {
    for (const Transition& t : transitions)
      if (t.name == name) return t;
    throw LookupError("unknown transition '" + name + "'");
  }
};

// ---------------------------------------------------------------------------
// Net text format: `place <name>.` (optional) and
// `transition <name>: <in...> -> <out...>.`, comments with '%'.

inline ElementaryNet parse_net(const std::string& text) {
  ElementaryNet net;
  std::set<std::string> tnames;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.resize(cut);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;

    auto strip_dot = [&](std::string& s) {
      if (!s.empty() && s.back() == '.') {
        s.pop_back();
        return true;
      }
      return false;
    };
    auto check_ident = [&](const std::string& s) {
      if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
        throw ParseError("bad identifier '" + s + "'", lineno, 1);
      for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
          throw ParseError("bad identifier '" + s + "'", lineno, 1);
    };

    if (keyword == "place") {
      std::string name;
      if (!(ls >> name) || !strip_dot(name))
        throw ParseError("expected 'place <name>.'", lineno, 1);
      check_ident(name);
      net.add_place(name);
    } else if (keyword == "transition") {
      std::string name;
      if (!(ls >> name) || name.empty() || name.back() != ':')
        throw ParseError("expected 'transition <name>:'", lineno, 1);
      name.pop_back();
      check_ident(name);
      if (!tnames.insert(name).second)
        throw ParseError("duplicate transition '" + name + "'", lineno, 1);
      Transition t;
      t.name = name;
      bool in_outputs = false;
      bool closed = false;
      std::string tok;
      while (ls >> tok) {
        if (tok == "->") {
          if (in_outputs) throw ParseError("unexpected '->'", lineno, 1);
          in_outputs = true;
          continue;
        }
        bool last = strip_dot(tok);
        if (!tok.empty()) {
          check_ident(tok);
          (in_outputs ? t.outputs : t.inputs).insert(tok);
          net.add_place(tok);
        }
        if (last) {
          closed = true;
          break;
        }
      }
      if (!closed || !in_outputs || t.inputs.empty() || t.outputs.empty())
        throw ParseError("expected 'transition <name>: <in...> -> <out...>.'",
                         lineno, 1);
      net.transitions.push_back(std::move(t));
    } else {
      throw ParseError("unknown declaration '" + keyword + "'", lineno, 1);
    }
  }
  for (const std::string& p : net.places)
    if (tnames.contains(p))
      throw ParseError("name '" + p + "' is both a place and a transition", 0, 0);
  return net;
}

inline std::string render_net(const ElementaryNet& net) {
  std::string out;
  for (const std::string& p : net.places) out += "place " + p + ".\n";
  for (const Transition& t : net.transitions) {
    out += "transition " + t.name + ":";
    for (const std::string& p : t.inputs) out += " " + p;
    out += " ->";
    for (const std::string& p : t.outputs) out += " " + p;
    out += ".\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Firing semantics

inline bool enabled(const ElementaryNet& net, const Marking& m, const Transition& t) {
  (void)net;
  return std::includes(m.begin(), m.end(), t.inputs.begin(), t.inputs.end());
}

inline bool enabled(const ElementaryNet& net, const Marking& m, const std::string& t) {
  return enabled(net, m, net.transition(t));
}

/// m' = (m \ inputs) u outputs; tokens saturate at 1.
inline Marking fire(const ElementaryNet& net, const Marking& m, const Transition& t) {
  if (!enabled(net, m, t))
    throw std::logic_error("fire: transition '" + t.name + "' is not enabled");
  Marking out;
  std::set_difference(m.begin(), m.end(), t.inputs.begin(), t.inputs.end(),
                      std::inserter(out, out.end()));
  out.insert(t.outputs.begin(), t.outputs.end());
  return out;
}

inline Marking fire(const ElementaryNet& net, const Marking& m, const std::string& t) {
  return fire(net, m, net.transition(t));
}

/// Step consequence: all places produced by some transition enabled in m.
inline Marking tf_step(const ElementaryNet& net, const Marking& m) {
  Marking out;
  for (const Transition& t : net.transitions)
    if (enabled(net, m, t)) out.insert(t.outputs.begin(), t.outputs.end());
  return out;
}

/// Accumulated variant m u T_F(m), the monotone step used by the fixpoint.
inline Marking tf_step_acc(const ElementaryNet& net, const Marking& m) {
  Marking out = tf_step(net, m);
  out.insert(m.begin(), m.end());
  return out;
}

/// Least fixpoint of m -> m u T_F(m) from m0: the union of all places
/// producible from the initial marking. Terminates in <= |places| rounds.
inline Marking reachable_places(const ElementaryNet& net, const Marking& m0) {
  Marking m = m0;
  while (true) {
    Marking next = tf_step_acc(net, m);
    if (next == m) return m;
    m = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Transformation to datalog

/// Transformed program plus the metadata needed to decode query answers.
struct TransformResult {
  Program program;
  std::string marking_constant;
  bool marking_linked = false;  // at least one marking fact was emitted
  std::map<std::string, std::vector<std::string>> hypernodes;  // name -> members
  std::string union_predicate;
  std::string recursive_predicate;
};

namespace detail {

inline std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.contains(base)) base += "#";
  return base;
}

}  // namespace detail

/// Rewrites the net as a linear and immediately recursive program: each
/// transition's multi-place input set becomes a hypernode constant, each
/// transition becomes a predicate whose facts are edges from its input
/// constant to its output places (and to any hypernode fully covered by its
/// outputs), and every constant fully covered by the initial marking gets an
/// edge from a synthetic marking constant.
inline TransformResult transform_net(const ElementaryNet& net, const Marking& m0) {
  TransformResult res;
  if (net.transitions.empty()) return res;

  std::set<std::string> taken(net.places.begin(), net.places.end());
  for (const Transition& t : net.transitions) taken.insert(t.name);

  // Input-set constants; hypernodes are shared between transitions with the
  // same input set.
  std::map<std::set<std::string>, std::string> input_const;
  for (const Transition& t : net.transitions) {
    if (input_const.contains(t.inputs)) continue;
    if (t.inputs.size() == 1) {
      input_const[t.inputs] = *t.inputs.begin();
      continue;
    }
    std::string joined;
    for (const std::string& p : t.inputs) joined += (joined.empty() ? "" : "_") + p;
    std::string name = detail::fresh_name(joined, taken);
    taken.insert(name);
    input_const[t.inputs] = name;
    res.hypernodes[name] = {t.inputs.begin(), t.inputs.end()};
  }

  res.union_predicate = detail::fresh_name("r1", taken);
  taken.insert(res.union_predicate);
  res.recursive_predicate = detail::fresh_name("r2", taken);
  taken.insert(res.recursive_predicate);

  Program& p = res.program;
  std::set<std::string> predicates;
  for (const Transition& t : net.transitions) {
    const std::string& src = input_const.at(t.inputs);
    predicates.insert(t.name);
    for (const std::string& q : t.outputs)
      p.clauses.push_back({{t.name, {constant(src), constant(q)}}, {}});
    for (const auto& [hname, members] : res.hypernodes)
      if (std::includes(t.outputs.begin(), t.outputs.end(), members.begin(),
                        members.end()))
        p.clauses.push_back({{t.name, {constant(src), constant(hname)}}, {}});
  }

  // Marking facts: one per program constant whose members are all marked.
  std::string marking_name = "marking";
  for (const std::string& pl : m0) marking_name += "_" + pl;
  res.marking_constant = detail::fresh_name(marking_name, taken);
  std::set<std::string> constants;
  for (const Clause& c : p.clauses) {
    constants.insert(c.head.args[0].name);
    constants.insert(c.head.args[1].name);
  }
  for (const std::string& c : constants) {
    bool covered;
    if (auto it = res.hypernodes.find(c); it != res.hypernodes.end())
      covered = std::includes(m0.begin(), m0.end(), it->second.begin(),
                              it->second.end());
    else
      covered = m0.contains(c);
    if (covered) {
      p.clauses.push_back(
          {{res.union_predicate, {constant(res.marking_constant), constant(c)}}, {}});
      res.marking_linked = true;
    }
  }

  Term x = variable("X"), y = variable("Y"), z = variable("Z");
  for (const std::string& pred : predicates)
    p.clauses.push_back(
        {{res.union_predicate, {x, y}}, {{pred, {x, y}}}});
  p.clauses.push_back({{res.recursive_predicate, {x, y}},
                       {{res.union_predicate, {x, y}}}});
  p.clauses.push_back({{res.recursive_predicate, {x, y}},
                       {{res.union_predicate, {x, z}},
                        {res.recursive_predicate, {z, y}}}});
  return res;
}

/// Spec'd surface: just the program.
inline Program transform(const ElementaryNet& net, const Marking& m0) {
  return transform_net(net, m0).program;
}

/// Decodes a set of constants back into places: hypernodes expand to their
/// members, the marking constant is dropped.
inline Marking decode_constants(const TransformResult& tr,
                                const std::vector<std::string>& constants) {
  Marking out;
  for (const std::string& c : constants) {
    if (c == tr.marking_constant) continue;
    if (auto it = tr.hypernodes.find(c); it != tr.hypernodes.end())
      out.insert(it->second.begin(), it->second.end());
    else
      out.insert(c);
  }
  return out;
}

/// Full pipeline: transform -> classify -> compile -> solve -> decode.
/// With RMS the marking constant's closure row is decoded.
inline Marking reach_query(const ElementaryNet& net, const Marking& m0,
                           Algorithm algorithm = Algorithm::IE,
                           unsigned n_threads = 1) {
  for (const std::string& pl : m0)
    if (!net.has_place(pl)) throw LookupError("unknown place '" + pl + "'");
  TransformResult tr = transform_net(net, m0);
  if (!tr.marking_linked) return {};

  SymbolTable table = build_table(tr.program);
  BitVector reached;
  if (algorithm == Algorithm::RMS) {
    RMSInput in = compile_rms(tr.program, table);
    ClosureResult closure = bmlp_rms(in, n_threads);
    BitMatrix view = length_ge1_closure(in, closure.matrix, n_threads);
    reached = view.row(table.index_of(tr.marking_constant));
  } else {
    IEInput in = compile_ie(tr.program, table, tr.marking_constant);
    ClosureResult closure = bmlp_ie(in);
    reached = closure.vector;
  }
  std::vector<std::string> names;
  reached.for_each_set_bit([&](std::size_t j) { names.push_back(table.name_of(j)); });
  return decode_constants(tr, names);
}

/// Cross-validation of the matrix pipeline against the step-consequence
/// simulator. Divergence is possible on nets where a hypernode's members are
/// only jointly produced by different transitions; such places show up in
/// `missing_in_query`.
struct CrossCheck {
  Marking query;      // reach_query result
  Marking simulated;  // reachable_places result
  std::vector<std::string> missing_in_query;
  std::vector<std::string> extra_in_query;

  bool diverged() const { return !missing_in_query.empty() || !extra_in_query.empty(); }
};

inline CrossCheck cross_check(const ElementaryNet& net, const Marking& m0,
                              Algorithm algorithm = Algorithm::IE,
                              unsigned n_threads = 1) {
  CrossCheck cc;
  cc.query = reach_query(net, m0, algorithm, n_threads);
  cc.simulated = reachable_places(net, m0);
  // The simulator's fixpoint always contains m0; the query reports m0 places
  // only when they are program constants, so compare on the union with m0.
  Marking q = cc.query;
  q.insert(m0.begin(), m0.end());
  Marking s = cc.simulated;
  std::set_difference(s.begin(), s.end(), q.begin(), q.end(),
                      std::back_inserter(cc.missing_in_query));
  std::set_difference(q.begin(), q.end(), s.begin(), s.end(),
                      std::back_inserter(cc.extra_in_query));
  return cc;
}

}  // namespace bmlp
