#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "bmlp/bitmat.hpp"
#include "bmlp/datalog.hpp"
#include "bmlp/errors.hpp"

namespace bmlp {

/// Bijection between constant symbols and 0-based contiguous matrix indices,
/// assigned in order of first appearance in the program text.
class SymbolTable {
 public:
  std::size_t add(const std::string& name) {
    auto [it, fresh] = to_index_.emplace(name, to_name_.size());
    if (fresh) to_name_.push_back(name);
    return it->second;
  }

  bool contains(const std::string& name) const { return to_index_.contains(name); }

  std::size_t index_of(const std::string& name) const {
    auto it = to_index_.find(name);
    if (it == to_index_.end()) throw LookupError("unknown constant '" + name + "'");
    return it->second;
  }

  const std::string& name_of(std::size_t i) const { return to_name_.at(i); }
  std::size_t size() const { return to_name_.size(); }
  const std::vector<std::string>& names() const { return to_name_; }

 private:
  std::unordered_map<std::string, std::size_t> to_index_;
  std::vector<std::string> to_name_;
};

/// Indexes every constant of p by first textual appearance (clauses in stored
/// order, arguments left to right).
inline SymbolTable build_table(const Program& p) {
  SymbolTable t;
  for (const Clause& c : p.clauses) {
    for (const Term& a : c.head.args)
      if (a.kind == TermKind::Constant) t.add(a.name);
    for (const Atom& b : c.body)
      for (const Term& a : b.args)
        if (a.kind == TermKind::Constant) t.add(a.name);
  }
  return t;
}

/// n x n square encoding for BMLP-RMS: r1(i,j) = 1 iff the folded base
/// relation holds between constants i and j.
struct RMSInput {
  BitMatrix r1;
  SymbolTable table;
  std::string relation;  // folded base relation name, used for file output
};

/// Encoding for BMLP-IE: a unit source vector plus two k x n matrices mapping
/// fact index -> first-argument bit and fact index -> second-argument bit.
struct IEInput {
  BitVector v;
  BitMatrix r1_first;
  BitMatrix r2_second;
  SymbolTable table;
  std::string relation;
};

/// Folded ground facts of a classified program, in program order, deduplicated.
inline std::vector<std::pair<std::string, std::string>> folded_facts(
    const Program& p, const LirProfile& profile) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const Clause& c : p.clauses) {
    if (!c.is_fact()) continue;
    std::pair<std::string, std::string> f{c.head.args[0].name, c.head.args[1].name};
    if (seen.insert(f).second) out.push_back(std::move(f));
  }
  return out;
}

inline RMSInput compile_rms(const Program& p, const SymbolTable& t) {
  LirProfile profile = classify_lir(p);
  RMSInput in;
  in.table = t;
  in.relation = profile.union_predicate;
  in.r1 = BitMatrix(t.size(), t.size());
  for (const auto& [a, b] : profile.edges.pairs)
    in.r1.set(t.index_of(a), t.index_of(b));
  return in;
}

inline IEInput compile_ie(const Program& p, const SymbolTable& t,
                          const std::string& source) {
  LirProfile profile = classify_lir(p);
  auto facts = folded_facts(p, profile);
  IEInput in;
  in.table = t;
  in.relation = profile.union_predicate;
  in.v = BitVector::unit(t.size(), t.index_of(source));
  in.r1_first = BitMatrix(facts.size(), t.size());
  in.r2_second = BitMatrix(facts.size(), t.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    in.r1_first.set(i, t.index_of(facts[i].first));
    in.r2_second.set(i, t.index_of(facts[i].second));
  }
  return in;
}

/// Builds the per-edge input pair directly from an adjacency matrix: one row
/// per edge, with the edge's endpoints split across the two matrices.
inline IEInput ie_input_from_matrix(const BitMatrix& r1, std::size_t source,
                                    SymbolTable table = {},
                                    std::string relation = "e") {
  if (r1.n_rows() != r1.n_cols())
    throw ShapeError("ie_input_from_matrix: matrix must be square");
  if (source >= r1.n_rows())
    throw ShapeError("ie_input_from_matrix: source out of range");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < r1.n_rows(); ++i)
    r1.row(i).for_each_set_bit([&](std::size_t j) { edges.emplace_back(i, j); });
  IEInput in;
  in.table = std::move(table);
  in.relation = std::move(relation);
  in.v = BitVector::unit(r1.n_cols(), source);
  in.r1_first = BitMatrix(edges.size(), r1.n_cols());
  in.r2_second = BitMatrix(edges.size(), r1.n_cols());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    in.r1_first.set(i, edges[i].first);
    in.r2_second.set(i, edges[i].second);
  }
  return in;
}

/// Inverse of compile_rms: recovers the folded base relation as ground facts.
inline FactSet decompile_rms(const RMSInput& in) {
  FactSet out;
  out.predicate = in.relation;
  for (std::size_t i = 0; i < in.r1.n_rows(); ++i)
    in.r1.row(i).for_each_set_bit(
        [&](std::size_t j) { out.pairs.emplace(in.table.name_of(i), in.table.name_of(j)); });
  return out;
}

}  // namespace bmlp
