#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bmlp/errors.hpp"

namespace bmlp {

using word_t = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

/// Packed boolean vector. Bit j lives in words()[j / 64] at position j % 64.
/// Bits at positions >= size() are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n_bits)
      : n_bits_(n_bits), words_((n_bits + kWordBits - 1) / kWordBits, 0) {}

  static BitVector unit(std::size_t n_bits, std::size_t i) {
    BitVector v(n_bits);
    v.set(i);
    return v;
  }

  std::size_t size() const { return n_bits_; }

  bool test(std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }

  void set(std::size_t i) { words_[i / kWordBits] |= word_t{1} << (i % kWordBits); }
  void reset(std::size_t i) { words_[i / kWordBits] &= ~(word_t{1} << (i % kWordBits)); }

  std::span<const word_t> words() const { return words_; }
  std::span<word_t> words() { return words_; }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (word_t w : words_) c += std::popcount(w);
    return c;
  }

  bool any() const {
    for (word_t w : words_)
      if (w) return true;
    return false;
  }

  bool none() const { return !any(); }

  BitVector& operator|=(const BitVector& other) {
    check_same_size(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  BitVector& operator&=(const BitVector& other) {
    check_same_size(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  /// Clears every bit that is set in `other`.
  BitVector& subtract(const BitVector& other) {
    check_same_size(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }

  friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }

  bool operator==(const BitVector& other) const = default;

  /// Calls fn(j) for every set bit j, ascending.
  template <typename Fn>
  void for_each_set_bit(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      word_t w = words_[wi];
      while (w) {
        std::size_t j = wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
        fn(j);
        w &= w - 1;
      }
    }
  }

 private:
  void check_same_size(const BitVector& other) const {
    if (n_bits_ != other.n_bits_)
      throw ShapeError("bit vector size mismatch: " + std::to_string(n_bits_) +
                       " vs " + std::to_string(other.n_bits_));
  }

  friend class BitMatrix;

  std::size_t n_bits_ = 0;
  std::vector<word_t> words_;
};

/// True iff every set bit of `needle` is also set in `hay`.
inline bool row_subset(const BitVector& needle, const BitVector& hay) {
  if (needle.size() != hay.size())
    throw ShapeError("row_subset: operand sizes differ");
  auto nw = needle.words();
  auto hw = hay.words();
  for (std::size_t i = 0; i < nw.size(); ++i)
    if ((nw[i] & hw[i]) != nw[i]) return false;
  return true;
}

/// Rectangular boolean matrix stored as one packed BitVector per row.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t n_rows, std::size_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), rows_(n_rows, BitVector(n_cols)) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  const BitVector& row(std::size_t i) const { return rows_[i]; }
  BitVector& row(std::size_t i) { return rows_[i]; }

  bool test(std::size_t i, std::size_t j) const { return rows_[i].test(j); }
  void set(std::size_t i, std::size_t j) { rows_[i].set(j); }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (const auto& r : rows_) c += r.popcount();
    return c;
  }

  bool operator==(const BitMatrix& other) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<BitVector> rows_;
};

inline BitMatrix identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return m;
}

/// Elementwise OR. Operands must have equal dimensions.
inline BitMatrix mat_add(const BitMatrix& a, const BitMatrix& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
    throw ShapeError("mat_add: dimension mismatch");
  BitMatrix out = a;
  for (std::size_t i = 0; i < out.n_rows(); ++i) out.row(i) |= b.row(i);
  return out;
}

/// result = OR of m's rows i where v(i) = 1. Stops gathering once every
/// output bit is set (further ORs cannot change a saturated row), which makes
/// products with dense operands cheap.
inline BitVector vec_mat_mul(const BitVector& v, const BitMatrix& m) {
  if (v.size() != m.n_rows())
    throw ShapeError("vec_mat_mul: vector length " + std::to_string(v.size()) +
                     " vs matrix rows " + std::to_string(m.n_rows()));
  BitVector out(m.n_cols());
  if (m.n_cols() == 0) return out;
  const auto ow = out.words();
  const std::size_t nw = ow.size();
  const word_t tail = (m.n_cols() % kWordBits)
                          ? (~word_t{0} >> (kWordBits - m.n_cols() % kWordBits))
                          : ~word_t{0};
  std::size_t probe = 0;  // words below `probe` are already all ones
  auto saturated = [&] {
    while (probe < nw && ow[probe] == (probe + 1 == nw ? tail : ~word_t{0}))
      ++probe;
    return probe == nw;
  };
  const auto vw = v.words();
  for (std::size_t wi = 0; wi < vw.size(); ++wi) {
    word_t w = vw[wi];
    while (w) {
      std::size_t i =
          wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
      out |= m.row(i);
      if (saturated()) return out;
      w &= w - 1;
    }
  }
  return out;
}

/// Boolean product: out(i,j) = OR_k a(i,k) AND b(k,j), computed by gathering
/// (ORing) the rows of b selected by each row of a. Rows may be processed by
/// n_threads workers; each row is owned by one worker, so the result is
/// independent of scheduling.
inline BitMatrix mat_mul(const BitMatrix& a, const BitMatrix& b,
                         unsigned n_threads = 1) {
  if (a.n_cols() != b.n_rows())
    throw ShapeError("mat_mul: inner dimensions " + std::to_string(a.n_cols()) +
                     " vs " + std::to_string(b.n_rows()));
  BitMatrix out(a.n_rows(), b.n_cols());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out.row(i) = vec_mat_mul(a.row(i), b);
  };
  if (n_threads <= 1 || a.n_rows() < 2 * n_threads) {
    work(0, a.n_rows());
    return out;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (a.n_rows() + n_threads - 1) / n_threads;
  for (unsigned t = 0; t < n_threads; ++t) {
    std::size_t begin = t * chunk;
    std::size_t end = std::min(a.n_rows(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace bmlp
