// Command-line front end: parse/compile/solve datalog programs, transform and
// query elementary nets, generate workloads and run the timing harness.
//
// Exit codes: 0 success, 1 parse error, 2 classification error, 3 shape or
// lookup error, 4 invalid range (e.g. probability outside [0,1]),
// 5 cross-check divergence (check subcommand only).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmlp/bench.hpp"
#include "bmlp/bitmat.hpp"
#include "bmlp/compile.hpp"
#include "bmlp/datalog.hpp"
#include "bmlp/io.hpp"
#include "bmlp/petri.hpp"
#include "bmlp/solve.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParseError = 1;
constexpr int kClassifyError = 2;
constexpr int kShapeOrLookupError = 3;
constexpr int kRangeError = 4;
constexpr int kDivergence = 5;

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw bmlp::ParseError("cannot open file '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Results go to --out (atomically) or standard output.
void emit(const std::string& out_path, const std::function<void(std::ostream&)>& writer) {
  if (out_path.empty())
    writer(std::cout);
  else
    bmlp::atomic_write(out_path, writer);
}

bmlp::Marking parse_marking(const std::string& csv) {
  bmlp::Marking m;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) m.insert(item);
  return m;
}

void print_divergence(std::ostream& os, const bmlp::CrossCheck& cc) {
  if (!cc.diverged()) return;
  os << "DIVERGENCE\n";
  if (!cc.missing_in_query.empty()) {
    os << "  missing_in_query:";
    for (const auto& p : cc.missing_in_query) os << " " << p;
    os << "\n";
  }
  if (!cc.extra_in_query.empty()) {
    os << "  extra_in_query:";
    for (const auto& p : cc.extra_in_query) os << " " << p;
    os << "\n";
  }
}

bmlp::FactSet recursive_facts_from_view(const bmlp::RMSInput& in,
                                        const bmlp::BitMatrix& view,
                                        const std::string& predicate) {
  bmlp::FactSet out;
  out.predicate = predicate;
  for (std::size_t i = 0; i < view.n_rows(); ++i)
    view.row(i).for_each_set_bit([&](std::size_t j) {
      out.pairs.emplace(in.table.name_of(i), in.table.name_of(j));
    });
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Boolean-matrix evaluation of linear recursive datalog and "
               "elementary-net reachability"};
  app.require_subcommand(1);

  // parse
  std::string parse_file, parse_out;
  auto* cmd_parse = app.add_subcommand("parse", "parse a program and re-render it");
  cmd_parse->add_option("file", parse_file)->required();
  cmd_parse->add_option("--out", parse_out);

  // compile
  std::string compile_file, compile_mode = "rms", compile_source, compile_out;
  bool compile_binary = false;
  auto* cmd_compile =
      app.add_subcommand("compile", "compile a program into boolean matrices");
  cmd_compile->add_option("file", compile_file)->required();
  cmd_compile->add_option("--mode", compile_mode)
      ->check(CLI::IsMember({"rms", "ie"}));
  cmd_compile->add_option("--source", compile_source,
                          "source constant (ie mode)");
  cmd_compile->add_option("--out", compile_out);
  cmd_compile->add_flag("--binary", compile_binary,
                        "also write the raw binary sidecar (<out>.bin)");

  // solve
  std::string solve_file, solve_alg = "rms", solve_source, solve_out;
  bool solve_facts = false, solve_reflexive = false, solve_binary = false;
  unsigned solve_threads = 1;
  auto* cmd_solve = app.add_subcommand("solve", "compute a transitive closure");
  cmd_solve->add_option("file", solve_file)->required();
  cmd_solve->add_option("--algorithm", solve_alg)
      ->check(CLI::IsMember({"ie", "rms", "naive", "seminaive"}));
  cmd_solve->add_option("--source", solve_source, "source constant (ie)");
  cmd_solve->add_option("--out", solve_out);
  cmd_solve->add_option("--threads", solve_threads);
  cmd_solve->add_flag("--facts", solve_facts, "emit derived ground facts");
  cmd_solve->add_flag("--reflexive", solve_reflexive,
                      "emit the reflexive closure instead of the length>=1 view");
  cmd_solve->add_flag("--binary", solve_binary,
                      "also write the raw binary sidecar (<out>.bin)");

  // transform
  std::string tf_file, tf_marking, tf_out;
  auto* cmd_transform =
      app.add_subcommand("transform", "rewrite a net as a datalog program");
  cmd_transform->add_option("file", tf_file)->required();
  cmd_transform->add_option("--marking", tf_marking, "comma-separated places");
  cmd_transform->add_option("--out", tf_out);

  // reach
  std::string reach_file, reach_marking, reach_alg = "ie", reach_out;
  bool reach_cross = false;
  unsigned reach_threads = 1;
  auto* cmd_reach =
      app.add_subcommand("reach", "reachable places from a marking");
  cmd_reach->add_option("file", reach_file)->required();
  cmd_reach->add_option("--marking", reach_marking)->required();
  cmd_reach->add_option("--algorithm", reach_alg)->check(CLI::IsMember({"ie", "rms"}));
  cmd_reach->add_flag("--cross-check", reach_cross,
                      "also run the fixpoint simulator and report divergence");
  cmd_reach->add_option("--threads", reach_threads);
  cmd_reach->add_option("--out", reach_out);

  // gen
  std::size_t gen_n = 0;
  double gen_pt = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_kind = "pairwise", gen_out;
  auto* cmd_gen = app.add_subcommand("gen", "generate a seeded random net");
  cmd_gen->add_option("--n", gen_n)->required();
  cmd_gen->add_option("--pt", gen_pt)->required();
  cmd_gen->add_option("--seed", gen_seed);
  cmd_gen->add_option("--kind", gen_kind)->check(CLI::IsMember({"pairwise", "hypernode"}));
  cmd_gen->add_option("--out", gen_out);

  // bench
  std::size_t bench_n = 0;
  double bench_pt = 0.0, bench_cap = 300.0;
  std::uint64_t bench_seed = 0;
  int bench_repeats = 1;
  unsigned bench_threads = 1;
  std::string bench_kind = "pairwise", bench_methods = "ie,rms,naive,seminaive";
  std::string bench_reactions, bench_marking, bench_out;
  std::size_t bench_marking_sample = 0;
  auto* cmd_bench = app.add_subcommand("bench", "time solver methods, emit CSV");
  cmd_bench->add_option("--n", bench_n);
  cmd_bench->add_option("--pt", bench_pt);
  cmd_bench->add_option("--seed", bench_seed);
  cmd_bench->add_option("--kind", bench_kind)
      ->check(CLI::IsMember({"pairwise", "hypernode"}));
  cmd_bench->add_option("--methods", bench_methods,
                        "comma list of ie,rms,naive,seminaive");
  cmd_bench->add_option("--repeats", bench_repeats);
  cmd_bench->add_option("--cap", bench_cap, "per-run cap in seconds");
  cmd_bench->add_option("--threads", bench_threads);
  cmd_bench->add_option("--reactions", bench_reactions,
                        "reaction-list workload instead of a random net");
  cmd_bench->add_option("--marking", bench_marking, "comma-separated marking");
  cmd_bench->add_option("--marking-sample", bench_marking_sample,
                        "sample this many marked places with --seed");
  cmd_bench->add_option("--out", bench_out);

  // check
  std::string check_file, check_marking;
  unsigned check_threads = 1;
  auto* cmd_check = app.add_subcommand(
      "check", "cross-validate both matrix algorithms against the simulator");
  cmd_check->add_option("file", check_file)->required();
  cmd_check->add_option("--marking", check_marking)->required();
  cmd_check->add_option("--threads", check_threads);

  CLI11_PARSE(app, argc, argv);

  if (cmd_parse->parsed()) {
    bmlp::Program p = bmlp::parse_program(slurp(parse_file));
    emit(parse_out, [&](std::ostream& os) { os << bmlp::render_program(p); });
    return kOk;
  }

  if (cmd_compile->parsed()) {
    bmlp::Program p = bmlp::parse_program(slurp(compile_file));
    bmlp::SymbolTable table = bmlp::build_table(p);
    if (compile_mode == "rms") {
      bmlp::RMSInput in = bmlp::compile_rms(p, table);
      emit(compile_out, [&](std::ostream& os) { bmlp::write_matrix(os, in.table, in.r1); });
      if (compile_binary && !compile_out.empty())
        bmlp::atomic_write(compile_out + ".bin",
                           [&](std::ostream& os) { bmlp::write_matrix_binary(os, in.r1); },
                           /*binary=*/true);
    } else {
      if (compile_source.empty())
        throw CLI::ValidationError("--source is required for --mode ie");
      bmlp::IEInput in = bmlp::compile_ie(p, table, compile_source);
      emit(compile_out, [&](std::ostream& os) { bmlp::write_ie_input(os, in); });
    }
    return kOk;
  }

  if (cmd_solve->parsed()) {
    bmlp::Program p = bmlp::parse_program(slurp(solve_file));
    if (p.clauses.empty())
      throw bmlp::ParseError("program '" + solve_file + "' is empty", 0, 0);
    bmlp::SymbolTable table = bmlp::build_table(p);
    if (solve_alg == "ie") {
      if (solve_source.empty())
        throw CLI::ValidationError("--source is required for --algorithm ie");
      bmlp::IEInput in = bmlp::compile_ie(p, table, solve_source);
      bmlp::ClosureResult res = bmlp::bmlp_ie(in);
      emit(solve_out, [&](std::ostream& os) {
        if (solve_facts) {
          const std::string& pred = bmlp::classify_lir(p).recursive_predicate;
          res.vector.for_each_set_bit([&](std::size_t j) {
            os << pred << "(" << solve_source << "," << table.name_of(j) << ").\n";
          });
        } else {
          bmlp::write_vector(os, table, res.vector);
        }
      });
      return kOk;
    }
    if (solve_alg == "seminaive") {
      bmlp::LirProfile profile = bmlp::classify_lir(p);
      bmlp::FactSet facts = bmlp::seminaive_fixpoint(p, profile.recursive_predicate);
      emit(solve_out, [&](std::ostream& os) {
        if (solve_facts) {
          for (const auto& [a, b] : facts.pairs)
            os << facts.predicate << "(" << a << "," << b << ").\n";
        } else {
          bmlp::BitMatrix m(table.size(), table.size());
          for (const auto& [a, b] : facts.pairs)
            m.set(table.index_of(a), table.index_of(b));
          bmlp::write_matrix(os, table, m);
        }
      });
      return kOk;
    }
    bmlp::RMSInput in = bmlp::compile_rms(p, table);
    bmlp::ClosureResult res = solve_alg == "rms"
                                  ? bmlp::bmlp_rms(in, solve_threads)
                                  : bmlp::naive_closure(in, solve_threads);
    bmlp::BitMatrix out_matrix =
        solve_reflexive ? res.matrix
                        : bmlp::length_ge1_closure(in, res.matrix, solve_threads);
    emit(solve_out, [&](std::ostream& os) {
      if (solve_facts) {
        const std::string& pred = bmlp::classify_lir(p).recursive_predicate;
        bmlp::FactSet facts = recursive_facts_from_view(in, out_matrix, pred);
        for (const auto& [a, b] : facts.pairs)
          os << pred << "(" << a << "," << b << ").\n";
      } else {
        bmlp::write_matrix(os, table, out_matrix);
      }
    });
    if (solve_binary && !solve_out.empty())
      bmlp::atomic_write(solve_out + ".bin",
                         [&](std::ostream& os) { bmlp::write_matrix_binary(os, out_matrix); },
                         /*binary=*/true);
    return kOk;
  }

  if (cmd_transform->parsed()) {
    bmlp::ElementaryNet net = bmlp::parse_net(slurp(tf_file));
    bmlp::Marking m0 = parse_marking(tf_marking);
    for (const auto& pl : m0)
      if (!net.has_place(pl)) throw bmlp::LookupError("unknown place '" + pl + "'");
    bmlp::Program p = bmlp::transform(net, m0);
    emit(tf_out, [&](std::ostream& os) { os << bmlp::render_program(p); });
    return kOk;
  }

  if (cmd_reach->parsed()) {
    bmlp::ElementaryNet net = bmlp::parse_net(slurp(reach_file));
    bmlp::Marking m0 = parse_marking(reach_marking);
    bmlp::Algorithm alg =
        reach_alg == "rms" ? bmlp::Algorithm::RMS : bmlp::Algorithm::IE;
    if (reach_cross) {
      bmlp::CrossCheck cc = bmlp::cross_check(net, m0, alg, reach_threads);
      emit(reach_out, [&](std::ostream& os) {
        for (const auto& pl : cc.query) os << pl << "\n";
        print_divergence(os, cc);
      });
    } else {
      bmlp::Marking reached = bmlp::reach_query(net, m0, alg, reach_threads);
      emit(reach_out, [&](std::ostream& os) {
        for (const auto& pl : reached) os << pl << "\n";
      });
    }
    return kOk;
  }

  if (cmd_gen->parsed()) {
    if (gen_pt < 0.0 || gen_pt > 1.0) {
      std::cerr << "error: --pt must be in [0,1]\n";
      return kRangeError;
    }
    bmlp::GenSpec spec{gen_n, gen_pt, gen_seed,
                       gen_kind == "hypernode" ? bmlp::NetKind::Hypernode
                                               : bmlp::NetKind::Pairwise};
    bmlp::ElementaryNet net = bmlp::gen_net(spec);
    emit(gen_out, [&](std::ostream& os) { os << bmlp::render_net(net); });
    return kOk;
  }

  if (cmd_bench->parsed()) {
    if (bench_pt < 0.0 || bench_pt > 1.0) {
      std::cerr << "error: --pt must be in [0,1]\n";
      return kRangeError;
    }
    bmlp::BenchConfig cfg;
    cfg.repeats = bench_repeats;
    cfg.cap_seconds = bench_cap;
    cfg.threads = bench_threads;
    std::istringstream ms(bench_methods);
    std::string m;
    while (std::getline(ms, m, ',')) {
      if (m == "ie" || m == "bmlp_ie") cfg.methods.push_back(bmlp::Algorithm::IE);
      else if (m == "rms" || m == "bmlp_rms") cfg.methods.push_back(bmlp::Algorithm::RMS);
      else if (m == "naive" || m == "naive_closure") cfg.methods.push_back(bmlp::Algorithm::Naive);
      else if (m == "seminaive" || m == "seminaive_fixpoint") cfg.methods.push_back(bmlp::Algorithm::SemiNaive);
      else throw CLI::ValidationError("unknown method '" + m + "'");
    }

    bmlp::Workload w;
    if (!bench_reactions.empty()) {
      bmlp::ReactionList list = bmlp::parse_reactions(slurp(bench_reactions));
      w.net = bmlp::reactions_to_net(list);
      w.n = w.net.places.size();
      w.p_t = w.net.places.empty()
                  ? 0.0
                  : static_cast<double>(w.net.transitions.size()) /
                        (static_cast<double>(w.net.places.size()) *
                         static_cast<double>(w.net.places.size()));
      w.seed = bench_seed;
    } else {
      bmlp::GenSpec spec{bench_n, bench_pt, bench_seed,
                         bench_kind == "hypernode" ? bmlp::NetKind::Hypernode
                                                   : bmlp::NetKind::Pairwise};
      w = bmlp::workload_from_spec(spec);
    }
    if (!bench_marking.empty()) {
      w.marking = parse_marking(bench_marking);
    } else if (bench_marking_sample > 0) {
      std::mt19937_64 rng(bench_seed);
      bmlp::Marking m0;
      while (m0.size() < std::min(bench_marking_sample, w.net.places.size()))
        m0.insert(w.net.places[rng() % w.net.places.size()]);
      w.marking = std::move(m0);
    }
    for (const auto& pl : w.marking.value_or(bmlp::Marking{}))
      if (!w.net.has_place(pl)) throw bmlp::LookupError("unknown place '" + pl + "'");

    std::vector<bmlp::BenchRecord> records = bmlp::run_bench(w, cfg);
    emit(bench_out, [&](std::ostream& os) { bmlp::write_csv(os, records); });
    return kOk;
  }

  if (cmd_check->parsed()) {
    bmlp::ElementaryNet net = bmlp::parse_net(slurp(check_file));
    bmlp::Marking m0 = parse_marking(check_marking);
    bool diverged = false;
    for (bmlp::Algorithm alg : {bmlp::Algorithm::IE, bmlp::Algorithm::RMS}) {
      bmlp::CrossCheck cc = bmlp::cross_check(net, m0, alg, check_threads);
      std::cout << (alg == bmlp::Algorithm::IE ? "ie: " : "rms: ")
                << (cc.diverged() ? "diverged" : "agrees") << "\n";
      print_divergence(std::cout, cc);
      diverged = diverged || cc.diverged();
    }
    return diverged ? kDivergence : kOk;
  }

  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bmlp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const bmlp::ClassifyError& e) {
    std::cerr << "classification error: " << e.what() << "\n";
    return kClassifyError;
  } catch (const bmlp::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kShapeOrLookupError;
  } catch (const bmlp::LookupError& e) {
    std::cerr << "lookup error: " << e.what() << "\n";
    return kShapeOrLookupError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
}
