#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bmlp/compile.hpp"
#include "bmlp/datalog.hpp"
#include "bmlp/errors.hpp"
#include "bmlp/petri.hpp"
#include "bmlp/solve.hpp"

namespace bmlp {

// ---------------------------------------------------------------------------
// Random net generation. All randomness flows through a seeded mt19937_64
// (its output sequence is pinned by the standard), so a GenSpec reproduces
// byte-identically across platforms.

enum class NetKind { Pairwise, Hypernode };

struct GenSpec {
  std::size_t n_places = 0;
  double p_t = 0.0;          // transition probability, in [0,1]
  std::uint64_t seed = 0;
  NetKind kind = NetKind::Pairwise;
};

namespace detail {

// Bernoulli(p) from the top 53 bits of one raw draw; exact for p = 0 and 1.
inline bool coin(std::mt19937_64& rng, double p) {
  const auto threshold = static_cast<std::uint64_t>(p * 9007199254740992.0);  // 2^53
  return (rng() >> 11) < threshold;
}

}  // namespace detail

/// Pairwise kind: a 1-in/1-out transition for each ordered place pair with
/// probability p_t (no self-loops). Hypernode kind additionally samples
/// two-place input sets with probability p_t / 10.
inline ElementaryNet gen_net(const GenSpec& spec) {
  if (spec.p_t < 0.0 || spec.p_t > 1.0)
    throw std::invalid_argument("p_t must be in [0,1]");
  ElementaryNet net;
  for (std::size_t i = 0; i < spec.n_places; ++i)
    net.add_place("c" + std::to_string(i));
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < spec.n_places; ++i)
    for (std::size_t j = 0; j < spec.n_places; ++j) {
      if (i == j) continue;
      if (detail::coin(rng, spec.p_t))
        net.transitions.push_back({"t" + std::to_string(i) + "_" + std::to_string(j),
                                   {net.places[i]},
                                   {net.places[j]}});
    }
  if (spec.kind == NetKind::Hypernode) {
    for (std::size_t i = 0; i < spec.n_places; ++i)
      for (std::size_t j = i + 1; j < spec.n_places; ++j)
        if (detail::coin(rng, spec.p_t / 10.0)) {
          std::size_t k = rng() % spec.n_places;
          net.transitions.push_back(
              {"h" + std::to_string(i) + "_" + std::to_string(j),
               {net.places[i], net.places[j]},
               {net.places[k]}});
        }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Reaction lists (plain text stand-in for metabolic models).

struct Reaction {
  std::vector<std::string> lhs;  // substrate names, deduplicated, lowercased
  std::vector<std::string> rhs;
  bool reversible = false;  // true when this direction came from a '<->' line
};

struct ReactionList {
  std::vector<Reaction> reactions;  // directed; reversible lines appear twice
};

namespace detail {

inline std::vector<std::string> parse_substrates(const std::string& side, int lineno) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= side.size()) {
    std::size_t plus = side.find('+', pos);
    std::string part = side.substr(pos, plus == std::string::npos ? std::string::npos
                                                                  : plus - pos);
    pos = plus == std::string::npos ? side.size() + 1 : plus + 1;
    std::istringstream ps(part);
    std::string name, tok;
    while (ps >> tok) {
      // Stoichiometric coefficients are accepted and discarded.
      bool all_digits = !tok.empty();
      for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
      if (all_digits) continue;
      while (!tok.empty() && std::isdigit(static_cast<unsigned char>(tok[0])))
        tok.erase(tok.begin());
      if (!name.empty())
        throw ParseError("substrate '" + name + " " + tok + "' is not an identifier",
                         lineno, 1);
      for (char& c : tok) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
          throw ParseError("bad substrate character in '" + tok + "'", lineno, 1);
      }
      name = tok;
    }
    if (name.empty()) throw ParseError("empty substrate", lineno, 1);
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

}  // namespace detail

/// One reaction per line: `<subs> -> <subs>` or `<subs> <-> <subs>` with
/// substrates separated by '+'. Reversible lines expand into both directions.
inline ReactionList parse_reactions(const std::string& text) {
  ReactionList out;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string::npos) line.resize(cut);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    bool reversible = false;
    std::size_t arrow = line.find("<->");
    std::size_t arrow_len = 3;
    if (arrow != std::string::npos) {
      reversible = true;
    } else {
      arrow = line.find("->");
      arrow_len = 2;
    }
    if (arrow == std::string::npos)
      throw ParseError("reaction line has no '->'", lineno, 1);
    auto lhs = detail::parse_substrates(line.substr(0, arrow), lineno);
    auto rhs = detail::parse_substrates(line.substr(arrow + arrow_len), lineno);
    out.reactions.push_back({lhs, rhs, reversible});
    if (reversible) out.reactions.push_back({rhs, lhs, true});
  }
  return out;
}

/// One transition per directed reaction; reactants are inputs, products are
/// outputs.
inline ElementaryNet reactions_to_net(const ReactionList& list) {
  ElementaryNet net;
  for (const Reaction& r : list.reactions) {
    for (const std::string& s : r.lhs) net.add_place(s);
    for (const std::string& s : r.rhs) net.add_place(s);
  }
  std::set<std::string> taken(net.places.begin(), net.places.end());
  for (std::size_t i = 0; i < list.reactions.size(); ++i) {
    const Reaction& r = list.reactions[i];
    std::string name = detail::fresh_name("rxn" + std::to_string(i), taken);
    taken.insert(name);
    net.transitions.push_back({name,
                               {r.lhs.begin(), r.lhs.end()},
                               {r.rhs.begin(), r.rhs.end()}});
  }
  return net;
}

// ---------------------------------------------------------------------------
// Timing harness

struct BenchRecord {
  std::string method;
  std::size_t n = 0;
  double p_t = 0.0;
  std::uint64_t seed = 0;
  int repeat = 0;
  double compile_seconds = 0.0;
  double solve_seconds = 0.0;
  std::size_t iterations = 0;
  std::size_t popcount = 0;
  bool timeout = false;
};

/// A benchmark instance: a net with workload metadata, and optionally an
/// initial marking. Without a marking the task is the full closure relation;
/// with one, the reachable row from the marking constant.
struct Workload {
  ElementaryNet net;
  std::optional<Marking> marking;
  std::size_t n = 0;
  double p_t = 0.0;
  std::uint64_t seed = 0;
};

inline Workload workload_from_spec(const GenSpec& spec) {
  return {gen_net(spec), std::nullopt, spec.n_places, spec.p_t, spec.seed};
}

struct BenchConfig {
  std::vector<Algorithm> methods;
  int repeats = 1;
  double cap_seconds = 300.0;  // per-run cap; exceeded runs get timeout_flag=1
  unsigned threads = 1;
};

inline std::string method_name(Algorithm a) {
  switch (a) {
    case Algorithm::IE: return "bmlp_ie";
    case Algorithm::RMS: return "bmlp_rms";
    case Algorithm::Naive: return "naive_closure";
    case Algorithm::SemiNaive: return "seminaive_fixpoint";
  }
  return "?";
}

/// Compiles outside the timer, solves inside. On full-closure workloads
/// bmlp_ie is swept over every source (its multi-source convenience form), so
/// all methods report the popcount of the same relation.
inline std::vector<BenchRecord> run_bench(const Workload& w, const BenchConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::duration d) {
    return std::chrono::duration<double>(d).count();
  };
  std::vector<BenchRecord> records;

  for (Algorithm method : cfg.methods) {
    // Compile phase (untimed solve-wise, reported separately).
    auto c0 = clock::now();
    TransformResult tr = transform_net(w.net, w.marking.value_or(Marking{}));
    BenchRecord proto;
    proto.method = method_name(method);
    proto.n = w.n;
    proto.p_t = w.p_t;
    proto.seed = w.seed;

    if (tr.program.clauses.empty() || (w.marking && !tr.marking_linked)) {
      // Nothing queryable: record empty-result rows.
      proto.compile_seconds = secs(clock::now() - c0);
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        BenchRecord r = proto;
        r.repeat = rep;
        records.push_back(r);
      }
      continue;
    }

    SymbolTable table = build_table(tr.program);
    std::optional<RMSInput> rms_in;
    std::optional<IEInput> ie_in;
    std::optional<std::size_t> marking_index;
    if (w.marking) marking_index = table.index_of(tr.marking_constant);
    Program sn_prog;
    if (method == Algorithm::RMS || method == Algorithm::Naive) {
      rms_in = compile_rms(tr.program, table);
    } else if (method == Algorithm::IE) {
      ie_in = compile_ie(tr.program, table,
                         w.marking ? tr.marking_constant : table.name_of(0));
    } else {
      // Fold the per-transition base predicates into a single relation; the
      // transformed program can dwarf it by orders of magnitude.
      LirProfile prof = classify_lir(tr.program);
      for (const auto& [a, b] : folded_facts(tr.program, prof)) {
        Clause c;
        c.head = Atom{prof.union_predicate, {constant(a), constant(b)}};
        sn_prog.clauses.push_back(std::move(c));
      }
      Clause base;
      base.head = Atom{prof.recursive_predicate, {variable("X"), variable("Y")}};
      base.body = {Atom{prof.union_predicate, {variable("X"), variable("Y")}}};
      Clause rec;
      rec.head = Atom{prof.recursive_predicate, {variable("X"), variable("Y")}};
      rec.body = {Atom{prof.union_predicate, {variable("X"), variable("Z")}},
                  Atom{prof.recursive_predicate, {variable("Z"), variable("Y")}}};
      sn_prog.clauses.push_back(std::move(base));
      sn_prog.clauses.push_back(std::move(rec));
    }
    tr.program = Program{};  // reclaim before the timed solve phase
    proto.compile_seconds = secs(clock::now() - c0);

    for (int rep = 0; rep < cfg.repeats; ++rep) {
      BenchRecord r = proto;
      r.repeat = rep;
      auto t0 = clock::now();
      Deadline deadline = t0 + std::chrono::duration_cast<clock::duration>(
                                   std::chrono::duration<double>(cfg.cap_seconds));
      switch (method) {
        case Algorithm::RMS:
        case Algorithm::Naive: {
          ClosureResult cr = method == Algorithm::RMS
                                 ? bmlp_rms(*rms_in, cfg.threads, deadline)
                                 : naive_closure(*rms_in, cfg.threads, deadline);
          BitMatrix view = length_ge1_closure(*rms_in, cr.matrix, cfg.threads);
          r.iterations = cr.iterations;
          r.timeout = cr.timed_out;
          r.popcount = marking_index ? view.row(*marking_index).popcount()
                                     : view.popcount();
          break;
        }
        case Algorithm::IE: {
          if (w.marking) {
            ClosureResult cr = bmlp_ie(*ie_in, deadline);
            r.iterations = cr.iterations;
            r.timeout = cr.timed_out;
            BitVector reached = cr.vector;
            reached.subtract(ie_in->v);
            r.popcount = reached.popcount();
          } else {
            // Sweep every source; seed each run with the source's direct
            // successors so the union of results is the closure relation.
            std::size_t total = 0, max_iters = 0;
            bool timed_out = false;
            IEInput in = *ie_in;
            for (std::size_t s = 0; s < table.size() && !timed_out; ++s) {
              BitVector v0(table.size());
              for (std::size_t i = 0; i < in.r1_first.n_rows(); ++i)
                if (in.r1_first.test(i, s)) v0 |= in.r2_second.row(i);
              in.v = std::move(v0);
              ClosureResult cr = bmlp_ie(in, deadline);
              total += cr.vector.popcount();
              max_iters = std::max(max_iters, cr.iterations);
              timed_out = cr.timed_out;
            }
            r.iterations = max_iters;
            r.popcount = total;
            r.timeout = timed_out;
          }
          break;
        }
        case Algorithm::SemiNaive: {
          std::size_t rounds = 0;
          bool timed_out = false;
          FactSet facts = seminaive_fixpoint(sn_prog, tr.recursive_predicate,
                                             &rounds, deadline, &timed_out);
          r.iterations = rounds;
          r.timeout = timed_out;
          if (w.marking) {
            std::size_t row = 0;
            for (const auto& [a, b] : facts.pairs)
              if (a == tr.marking_constant) ++row;
            r.popcount = row;
          } else {
            r.popcount = facts.pairs.size();
          }
          break;
        }
      }
      r.solve_seconds = secs(clock::now() - t0);
      if (r.solve_seconds > cfg.cap_seconds) r.timeout = true;
      records.push_back(std::move(r));
    }
  }

  std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.method, a.n, a.p_t, a.seed, a.repeat) <
           std::tie(b.method, b.n, b.p_t, b.seed, b.repeat);
  });
  return records;
}

inline void write_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << "method,n,p_t,seed,repeat,phase_seconds_compile,phase_seconds_solve,"
        "iterations,popcount,timeout_flag\n";
  for (const BenchRecord& r : records)
    os << r.method << ',' << r.n << ',' << r.p_t << ',' << r.seed << ',' << r.repeat
       << ',' << r.compile_seconds << ',' << r.solve_seconds << ',' << r.iterations
       << ',' << r.popcount << ',' << (r.timeout ? 1 : 0) << '\n';
}

}  // namespace bmlp
