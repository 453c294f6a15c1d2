#pragma once

#include <chrono>
#include <optional>

#include "bmlp/bitmat.hpp"
#include "bmlp/compile.hpp"

namespace bmlp {

enum class Algorithm { IE, RMS, Naive, SemiNaive };

/// Output of a closure computation. IE fills `vector`; RMS and the naive
/// iteration fill `matrix` with the reflexive closure. `iterations` counts
/// passes through the algorithm's outer loop, including the final pass that
/// detects the fixpoint.
struct ClosureResult {
  BitMatrix matrix;
  BitVector vector;
  std::size_t iterations = 0;
  Algorithm algorithm = Algorithm::RMS;
  bool timed_out = false;
};

namespace detail {
inline bool past(const Deadline& d) {
  return d && std::chrono::steady_clock::now() > *d;
}
}  // namespace detail

/// Iterative extension: grows the source vector v by firing fact rows whose
/// first-argument bits are covered by v, until no new bit appears. The source
/// bit stays set in the result.
inline ClosureResult bmlp_ie(const IEInput& in, const Deadline& deadline = {}) {
  if (in.r1_first.n_rows() != in.r2_second.n_rows() ||
      in.r1_first.n_cols() != in.r2_second.n_cols() ||
      in.v.size() != in.r1_first.n_cols())
    throw ShapeError("bmlp_ie: inconsistent input shapes");
  const std::size_t k = in.r1_first.n_rows();
  ClosureResult res;
  res.algorithm = Algorithm::IE;
  BitVector v = in.v;
  while (true) {
    ++res.iterations;
    BitVector enabled(k);
    for (std::size_t i = 0; i < k; ++i)
      if (row_subset(in.r1_first.row(i), v)) enabled.set(i);
    BitVector next = vec_mat_mul(enabled, in.r2_second) | v;
    if (next == v) break;
    v = std::move(next);
    if (detail::past(deadline)) {
      res.timed_out = true;
      break;
    }
  }
  res.vector = std::move(v);
  return res;
}

/// Repeated squaring of (I + R1) until fixpoint. Returns the reflexive
/// closure; use length_ge1_closure for the paths-of-length->=1 relation.
inline ClosureResult bmlp_rms(const RMSInput& in, unsigned n_threads = 1,
                              const Deadline& deadline = {}) {
  if (in.r1.n_rows() != in.r1.n_cols())
    throw ShapeError("bmlp_rms: matrix must be square");
  ClosureResult res;
  res.algorithm = Algorithm::RMS;
  BitMatrix r = mat_add(identity(in.r1.n_rows()), in.r1);
  while (true) {
    ++res.iterations;
    BitMatrix sq = mat_mul(r, r, n_threads);
    if (sq == r) break;
    r = std::move(sq);
    if (detail::past(deadline)) {
      res.timed_out = true;
      break;
    }
  }
  res.matrix = std::move(r);
  return res;
}

/// Linear iteration: repeatedly multiplies by (I + R1). Same fixpoint as
/// bmlp_rms, one path length per pass; kept as the oracle/baseline.
inline ClosureResult naive_closure(const RMSInput& in, unsigned n_threads = 1,
                                   const Deadline& deadline = {}) {
  if (in.r1.n_rows() != in.r1.n_cols())
    throw ShapeError("naive_closure: matrix must be square");
  ClosureResult res;
  res.algorithm = Algorithm::Naive;
  const BitMatrix step = mat_add(identity(in.r1.n_rows()), in.r1);
  BitMatrix r = step;
  while (true) {
    ++res.iterations;
    BitMatrix next = mat_mul(r, step, n_threads);
    if (next == r) break;
    r = std::move(next);
    if (detail::past(deadline)) {
      res.timed_out = true;
      break;
    }
  }
  res.matrix = std::move(r);
  return res;
}

/// Strips the reflexive part: R1 x (I + R1)^* equals the closure restricted to
/// paths of length >= 1 (the solution of C = R1 + R1 C).
inline BitMatrix length_ge1_closure(const RMSInput& in, const BitMatrix& reflexive,
                                    unsigned n_threads = 1) {
  return mat_mul(in.r1, reflexive, n_threads);
}

}  // namespace bmlp
