#pragma once

#include <cctype>
#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bmlp/errors.hpp"

namespace bmlp {

/// Soft wall-clock cutoff, checked between fixpoint rounds.
using Deadline = std::optional<std::chrono::steady_clock::time_point>;

enum class TermKind { Constant, Variable };

struct Term {
  TermKind kind;
  std::string name;  // constants start lowercase, variables uppercase

  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

inline Term constant(std::string name) { return {TermKind::Constant, std::move(name)}; }
inline Term variable(std::string name) { return {TermKind::Variable, std::move(name)}; }

/// Binary atom. The evaluated fragment is arity-2 throughout.
struct Atom {
  std::string predicate;
  Term args[2];

  bool operator==(const Atom&) const = default;
};

/// head :- body. Facts have an empty body; rules have one or two body atoms.
struct Clause {
  Atom head;
  std::vector<Atom> body;

  bool is_fact() const { return body.empty(); }
  bool operator==(const Clause&) const = default;
};

struct Program {
  std::vector<Clause> clauses;

  bool operator==(const Program&) const = default;
};

/// A named binary relation with set semantics.
struct FactSet {
  std::string predicate;
  std::set<std::pair<std::string, std::string>> pairs;

  bool operator==(const FactSet&) const = default;
};

/// Shape of a linear and immediately recursive program: ground facts of the
/// base predicates feed a union predicate r1 through bridging rules, and a
/// single recursive predicate r2 closes r1 transitively.
struct LirProfile {
  std::string union_predicate;      // r1
  std::string recursive_predicate;  // r2
  std::vector<std::string> base_predicates;  // predicates bridged into r1
  FactSet edges;  // all ground facts folded into the r1 relation
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col_);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    advance();
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  bool accept_str(std::string_view s) {
    skip_space();
    if (text_.substr(pos_, s.size()) == s) {
      for (std::size_t i = 0; i < s.size(); ++i) advance();
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ >= text_.size() ||
        !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      fail("expected identifier");
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      advance();
    return std::string(text_.substr(start, pos_ - start));
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline Term parse_term(Scanner& s) {
  std::string name = s.ident();
  s.skip_space();
  if (s.peek() == '(') s.fail("function symbols are not allowed");
  TermKind kind = std::isupper(static_cast<unsigned char>(name[0]))
                      ? TermKind::Variable
                      : TermKind::Constant;
  return {kind, std::move(name)};
}

inline Atom parse_atom(Scanner& s) {
  Atom a;
  a.predicate = s.ident();
  if (std::isupper(static_cast<unsigned char>(a.predicate[0])))
    s.fail("predicate symbols must start with a lowercase letter");
  s.expect('(');
  a.args[0] = parse_term(s);
  s.expect(',');
  a.args[1] = parse_term(s);
  s.skip_space();
  if (s.peek() == ',') s.fail("atoms must have exactly two arguments");
  s.expect(')');
  return a;
}

}  // namespace detail

/// Parses a program. Grammar: fact := atom '.'; rule := atom ':-' atom
/// (',' atom)? '.'; comments start with '%'. Duplicate clauses are dropped.
inline Program parse_program(const std::string& text) {
  detail::Scanner s(text);
  Program p;
  std::set<std::string> seen;  // rendered-clause dedup
  while (!s.eof()) {
    Clause c;
    c.head = detail::parse_atom(s);
    if (s.accept_str(":-")) {
      c.body.push_back(detail::parse_atom(s));
      if (s.accept(',')) c.body.push_back(detail::parse_atom(s));
    } else {
      for (const Term& t : c.head.args)
        if (t.kind == TermKind::Variable)
          s.fail("facts must be ground (variable '" + t.name + "')");
    }
    s.expect('.');

    std::ostringstream key;
    key << c.head.predicate << '(' << c.head.args[0].name << ',' << c.head.args[1].name << ')';
    for (const Atom& b : c.body)
      key << ";" << b.predicate << '(' << b.args[0].name << ',' << b.args[1].name << ')';
    if (seen.insert(key.str()).second) p.clauses.push_back(std::move(c));
  }
  return p;
}

inline std::string render_atom(const Atom& a) {
  return a.predicate + "(" + a.args[0].name + "," + a.args[1].name + ")";
}

inline std::string render_clause(const Clause& c) {
  std::string out = render_atom(c.head);
  if (!c.body.empty()) {
    out += ":-";
    out += render_atom(c.body[0]);
    if (c.body.size() > 1) out += "," + render_atom(c.body[1]);
  }
  return out + ".";
}

/// One clause per line, facts first, in stored order.
inline std::string render_program(const Program& p) {
  std::string out;
  for (const Clause& c : p.clauses)
    if (c.is_fact()) out += render_clause(c) + "\n";
  for (const Clause& c : p.clauses)
    if (!c.is_fact()) out += render_clause(c) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Classification

/// Recognizes the linear-and-immediately-recursive shape:
///   r2(X,Y) :- r1(X,Y).
///   r2(X,Y) :- r1(X,Z), r2(Z,Y).
///   r1(X,Y) :- t(X,Y).        (any number of bridging rules)
///   ground facts of r1 and the bridged predicates.
/// Anything else raises ClassifyError naming the offending clause.
inline LirProfile classify_lir(const Program& p) {
  const Clause* recursive = nullptr;
  for (const Clause& c : p.clauses) {
    if (c.body.size() == 2) {
      if (recursive)
        throw ClassifyError("more than one recursive clause: " + render_clause(c));
      recursive = &c;
    }
  }
  if (!recursive) throw ClassifyError("program has no recursive clause");

  const Atom& head = recursive->head;
  const Atom& b1 = recursive->body[0];
  const Atom& b2 = recursive->body[1];
  auto is_var = [](const Term& t) { return t.kind == TermKind::Variable; };
  if (!is_var(head.args[0]) || !is_var(head.args[1]) ||
      head.args[0].name == head.args[1].name)
    throw ClassifyError("recursive head must be r2(X,Y): " + render_clause(*recursive));
  if (b2.predicate != head.predicate)
    throw ClassifyError("second body literal must be the recursive predicate: " +
                        render_clause(*recursive));
  if (b1.predicate == head.predicate)
    throw ClassifyError("first body literal must be a non-recursive predicate: " +
                        render_clause(*recursive));
  const std::string& x = head.args[0].name;
  const std::string& y = head.args[1].name;
  if (!is_var(b1.args[0]) || !is_var(b1.args[1]) || !is_var(b2.args[0]) ||
      !is_var(b2.args[1]) || b1.args[0].name != x || b2.args[1].name != y ||
      b1.args[1].name != b2.args[0].name || b1.args[1].name == x ||
      b1.args[1].name == y)
    throw ClassifyError("recursive clause must have shape r2(X,Y) :- r1(X,Z), r2(Z,Y): " +
                        render_clause(*recursive));

  LirProfile profile;
  profile.recursive_predicate = head.predicate;
  profile.union_predicate = b1.predicate;
  profile.edges.predicate = profile.union_predicate;

  bool base_rule_seen = false;
  std::set<std::string> bridged;
  for (const Clause& c : p.clauses) {
    if (c.body.size() == 2) continue;
    if (c.body.size() == 1) {
      const Atom& h = c.head;
      const Atom& b = c.body[0];
      if (h.predicate == profile.recursive_predicate) {
        if (b.predicate != profile.union_predicate || !is_var(h.args[0]) ||
            !is_var(h.args[1]) || h.args[0] != b.args[0] || h.args[1] != b.args[1] ||
            h.args[0].name == h.args[1].name)
          throw ClassifyError("base clause must be r2(X,Y) :- r1(X,Y): " +
                              render_clause(c));
        if (base_rule_seen)
          throw ClassifyError("duplicate base clause: " + render_clause(c));
        base_rule_seen = true;
        continue;
      }
      if (h.predicate != profile.union_predicate)
        throw ClassifyError("bridging rule must have head " + profile.union_predicate +
                            ": " + render_clause(c));
      if (b.predicate == profile.union_predicate ||
          b.predicate == profile.recursive_predicate)
        throw ClassifyError("bridging rule body must be a base predicate: " +
                            render_clause(c));
      if (!is_var(h.args[0]) || !is_var(h.args[1]) || h.args[0] != b.args[0] ||
          h.args[1] != b.args[1] || h.args[0].name == h.args[1].name)
        throw ClassifyError("bridging rule must have shape r1(X,Y) :- t(X,Y): " +
                            render_clause(c));
      bridged.insert(b.predicate);
      continue;
    }
    // ground fact
    if (c.head.predicate == profile.recursive_predicate)
      throw ClassifyError("ground facts of the recursive predicate are not allowed: " +
                          render_clause(c));
  }
  if (!base_rule_seen)
    throw ClassifyError("missing base clause " + profile.recursive_predicate + "(X,Y) :- " +
                        profile.union_predicate + "(X,Y)");

  for (const Clause& c : p.clauses) {
    if (!c.is_fact()) continue;
    const std::string& pred = c.head.predicate;
    if (pred != profile.union_predicate && !bridged.contains(pred))
      throw ClassifyError("fact of predicate '" + pred +
                          "' is neither the union predicate nor bridged: " +
                          render_clause(c));
    profile.edges.pairs.emplace(c.head.args[0].name, c.head.args[1].name);
  }
  profile.base_predicates.assign(bridged.begin(), bridged.end());
  return profile;
}

// ---------------------------------------------------------------------------
// Semi-naive bottom-up evaluation

namespace detail {

struct Relation {
  std::unordered_set<std::uint64_t> members;
  std::vector<std::pair<int, int>> facts;
  std::unordered_map<int, std::vector<int>> by_first;
  std::unordered_map<int, std::vector<int>> by_second;

  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  bool insert(int a, int b) {
    if (!members.insert(key(a, b)).second) return false;
    facts.emplace_back(a, b);
    by_first[a].push_back(b);
    by_second[b].push_back(a);
    return true;
  }
};

}  // namespace detail

/// Bottom-up least-model computation by delta iteration, for any safe arity-2
/// program in the supported fragment (facts, 1-body rules, 2-body rules).
/// Returns the derived relation of `predicate`, and the number of rounds taken
/// through `rounds_out` when non-null.
inline FactSet seminaive_fixpoint(const Program& p, const std::string& predicate,
                                  std::size_t* rounds_out = nullptr,
                                  const Deadline& deadline = {},
                                  bool* timed_out = nullptr) {
  if (timed_out) *timed_out = false;
  // Intern constants.
  std::unordered_map<std::string, int> id_of;
  std::vector<std::string> name_of;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = id_of.emplace(s, static_cast<int>(name_of.size()));
    if (fresh) name_of.push_back(s);
    return it->second;
  };

  std::unordered_map<std::string, detail::Relation> rel;
  std::unordered_map<std::string, std::vector<std::pair<int, int>>> delta;

  for (const Clause& c : p.clauses) {
    if (!c.is_fact()) continue;
    int a = intern(c.head.args[0].name);
    int b = intern(c.head.args[1].name);
    if (rel[c.head.predicate].insert(a, b))
      delta[c.head.predicate].emplace_back(a, b);
  }

  // A body atom argument is either a bound constant id or a variable slot.
  struct Pat {
    bool is_const;
    int cid;          // when is_const
    std::string var;  // when !is_const
  };
  auto pat_of = [&](const Term& t) {
    Pat q;
    q.is_const = t.kind == TermKind::Constant;
    if (q.is_const) q.cid = intern(t.name);
    else q.var = t.name;
    return q;
  };
  struct BodyAtom {
    std::string pred;
    Pat a, b;
  };
  struct Rule {
    std::string head_pred;
    Pat h1, h2;
    std::vector<BodyAtom> body;
  };
  std::vector<Rule> rules;
  for (const Clause& c : p.clauses) {
    if (c.is_fact()) continue;
    Rule r;
    r.head_pred = c.head.predicate;
    r.h1 = pat_of(c.head.args[0]);
    r.h2 = pat_of(c.head.args[1]);
    for (const Atom& a : c.body)
      r.body.push_back({a.predicate, pat_of(a.args[0]), pat_of(a.args[1])});
    rules.push_back(std::move(r));
  }

  // A rule has at most four distinct variables (two per body atom); bindings
  // fit in a fixed array, so copying an environment is a plain memcpy.
  struct Binding {
    std::array<std::pair<const std::string*, int>, 4> slots;
    int used = 0;

    const int* find(const std::string& var) const {
      for (int i = 0; i < used; ++i)
        if (*slots[i].first == var) return &slots[i].second;
      return nullptr;
    }
    bool bind(const std::string& var, int value) {
      if (const int* have = find(var)) return *have == value;
      slots[static_cast<std::size_t>(used++)] = {&var, value};
      return true;
    }
  };
  auto match = [](const Pat& q, int value, Binding& env) {
    if (q.is_const) return q.cid == value;
    return env.bind(q.var, value);
  };

  // Derived facts are deduplicated as they are produced; buffering raw join
  // output first can exhaust memory on dense inputs.
  std::unordered_map<std::string, std::unordered_set<std::uint64_t>> fresh;
  std::unordered_map<std::string, std::vector<std::pair<int, int>>> next_delta;
  // Per-head-predicate output buffers, resolved once per rule so the hot join
  // loop never hashes a predicate name per candidate tuple.
  struct HeadSink {
    const detail::Relation* existing;
    std::unordered_set<std::uint64_t>* dedup;
    std::vector<std::pair<int, int>>* out;
  };
  auto emit = [&](const Rule& r, const Binding& env, const HeadSink& sink) {
    auto value = [&](const Pat& q) {
      if (q.is_const) return q.cid;
      const int* have = env.find(q.var);
      if (!have)
        throw ClassifyError("unsafe rule: head variable '" + q.var +
                            "' not bound by the body");
      return *have;
    };
    int a = value(r.h1), b = value(r.h2);
    std::uint64_t key = detail::Relation::key(a, b);
    if (sink.existing->members.contains(key)) return;
    if (!sink.dedup->insert(key).second) return;
    sink.out->emplace_back(a, b);
  };

  // Joins the non-delta atom against the full relation, using an index when a
  // join argument is already bound.  The binding environment is extended in
  // place and rolled back after each candidate (bindings only ever append).
  auto join_other = [&](const Rule& r, const BodyAtom& other, Binding& env,
                        const HeadSink& sink) {
    const detail::Relation& orel = rel[other.pred];
    auto bound = [&](const Pat& q, int& out) {
      if (q.is_const) {
        out = q.cid;
        return true;
      }
      const int* have = env.find(q.var);
      if (!have) return false;
      out = *have;
      return true;
    };
    int av = 0, bv = 0;
    bool ab = bound(other.a, av), bb = bound(other.b, bv);
    const int mark = env.used;
    if (ab && bb) {
      if (orel.members.contains(detail::Relation::key(av, bv)))
        emit(r, env, sink);
    } else if (ab) {
      auto it = orel.by_first.find(av);
      if (it == orel.by_first.end()) return;
      for (int b : it->second) {
        if (match(other.b, b, env)) emit(r, env, sink);
        env.used = mark;
      }
    } else if (bb) {
      auto it = orel.by_second.find(bv);
      if (it == orel.by_second.end()) return;
      for (int a : it->second) {
        if (match(other.a, a, env)) emit(r, env, sink);
        env.used = mark;
      }
    } else {
      for (auto [a, b] : orel.facts) {
        if (match(other.a, a, env) && match(other.b, b, env))
          emit(r, env, sink);
        env.used = mark;
      }
    }
  };

  std::size_t rounds = 0;
  while (true) {
    fresh.clear();
    next_delta.clear();
    for (const Rule& r : rules) {
      HeadSink sink{&rel[r.head_pred], &fresh[r.head_pred],
                    &next_delta[r.head_pred]};
      for (std::size_t di = 0; di < r.body.size(); ++di) {
        const BodyAtom& datom = r.body[di];
        auto dit = delta.find(datom.pred);
        if (dit == delta.end()) continue;
        for (auto [a, b] : dit->second) {
          Binding env;
          if (!match(datom.a, a, env)) continue;
          if (!match(datom.b, b, env)) continue;
          if (r.body.size() == 1) emit(r, env, sink);
          else join_other(r, r.body[1 - di], env, sink);
        }
      }
    }
    bool any_new = false;
    for (auto& [pred, facts] : next_delta) {
      any_new = any_new || !facts.empty();
      for (auto [a, b] : facts) rel[pred].insert(a, b);
    }
    ++rounds;
    if (!any_new) break;
    delta = std::move(next_delta);
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      if (timed_out) *timed_out = true;
      break;
    }
  }
  if (rounds_out) *rounds_out = rounds;

  FactSet out;
  out.predicate = predicate;
  auto it = rel.find(predicate);
  if (it != rel.end())
    for (auto [a, b] : it->second.facts)
      out.pairs.emplace(name_of[a], name_of[b]);
  return out;
}

/// Convenience: evaluates the recursive predicate of a LIR program.
inline FactSet seminaive_fixpoint(const Program& p, std::size_t* rounds_out = nullptr) {
  return seminaive_fixpoint(p, classify_lir(p).recursive_predicate, rounds_out);
}

}  // namespace bmlp
