#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bmlp/bitmat.hpp"
#include "bmlp/compile.hpp"
#include "bmlp/errors.hpp"

namespace bmlp {

// ---------------------------------------------------------------------------
// Decimal codec: a packed row is serialized as an arbitrary-precision decimal
// integer, bit j weighted 2^j.

/// Bit pattern of v as a decimal string.
inline std::string row_to_decimal(const BitVector& v) {
  // Repeatedly divide the little-endian word vector by 10^18.
  constexpr std::uint64_t kChunk = 1000000000000000000ull;  // 10^18
  std::vector<std::uint64_t> words(v.words().begin(), v.words().end());
  while (!words.empty() && words.back() == 0) words.pop_back();
  if (words.empty()) return "0";
  std::string out;
  while (!words.empty()) {
    unsigned __int128 rem = 0;
    for (std::size_t i = words.size(); i-- > 0;) {
      unsigned __int128 cur = (rem << 64) | words[i];
      words[i] = static_cast<std::uint64_t>(cur / kChunk);
      rem = cur % kChunk;
    }
    while (!words.empty() && words.back() == 0) words.pop_back();
    std::string part = std::to_string(static_cast<std::uint64_t>(rem));
    if (!words.empty()) part.insert(0, 18 - part.size(), '0');
    out.insert(0, part);
  }
  return out;
}

/// Parses a decimal string into a row of n_bits. Values with bits at
/// positions >= n_bits are rejected.
inline BitVector row_from_decimal(const std::string& digits, std::size_t n_bits) {
  std::vector<std::uint64_t> words;
  for (std::size_t pos = 0; pos < digits.size();) {
    std::size_t len = std::min<std::size_t>(18, digits.size() - pos);
    std::uint64_t chunk = 0;
    std::uint64_t scale = 1;
    for (std::size_t i = 0; i < len; ++i) {
      char c = digits[pos + i];
      if (c < '0' || c > '9') throw ParseError("invalid digit in row value", 0, 0);
      chunk = chunk * 10 + static_cast<std::uint64_t>(c - '0');
      scale *= 10;
    }
    pos += len;
    // words = words * scale + chunk
    unsigned __int128 carry = chunk;
    for (auto& w : words) {
      unsigned __int128 cur = static_cast<unsigned __int128>(w) * scale + carry;
      w = static_cast<std::uint64_t>(cur);
      carry = cur >> 64;
    }
    while (carry) {
      words.push_back(static_cast<std::uint64_t>(carry));
      carry >>= 64;
    }
  }
  BitVector v(n_bits);
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    std::uint64_t w = words[wi];
    while (w) {
      std::size_t j = wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
      if (j >= n_bits)
        throw ParseError("row value has a set bit beyond column " +
                             std::to_string(n_bits),
                         0, 0);
      v.set(j);
      w &= w - 1;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Matrix text format. Header: cton(i,name). / ntoc(name,i). per symbol, then
// one row fact per line whose value is the row's decimal bit pattern.

inline void write_symbol_header(std::ostream& os, const SymbolTable& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << "cton(" << i << "," << t.name_of(i) << ").\n";
    os << "ntoc(" << t.name_of(i) << "," << i << ").\n";
  }
}

/// Square/vector form: rows named v(row,value).
inline void write_matrix(std::ostream& os, const SymbolTable& t, const BitMatrix& m) {
  write_symbol_header(os, t);
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    os << "v(" << i << "," << row_to_decimal(m.row(i)) << ").\n";
}

inline void write_vector(std::ostream& os, const SymbolTable& t, const BitVector& v) {
  write_symbol_header(os, t);
  os << "v(0," << row_to_decimal(v) << ").\n";
}

/// IE form: rows named <rel>1(row,value). and <rel>2(row,value)., plus the
/// source vector.
inline void write_ie_input(std::ostream& os, const IEInput& in) {
  write_symbol_header(os, in.table);
  for (std::size_t i = 0; i < in.r1_first.n_rows(); ++i)
    os << in.relation << "1(" << i << "," << row_to_decimal(in.r1_first.row(i)) << ").\n";
  for (std::size_t i = 0; i < in.r2_second.n_rows(); ++i)
    os << in.relation << "2(" << i << "," << row_to_decimal(in.r2_second.row(i)) << ").\n";
  os << "v(0," << row_to_decimal(in.v) << ").\n";
}

/// Parsed matrix file: the symbol table plus one row list per row predicate.
struct MatrixFile {
  SymbolTable table;
  std::map<std::string, std::vector<std::string>> rows;  // predicate -> decimal values

  BitMatrix matrix(const std::string& pred) const {
    auto it = rows.find(pred);
    if (it == rows.end()) throw LookupError("matrix file has no '" + pred + "' rows");
    BitMatrix m(it->second.size(), table.size());
    for (std::size_t i = 0; i < it->second.size(); ++i)
      m.row(i) = row_from_decimal(it->second[i], table.size());
    return m;
  }
};

inline MatrixFile read_matrix_file(std::istream& is) {
  MatrixFile mf;
  std::vector<std::pair<std::size_t, std::string>> cton;
  std::map<std::string, std::vector<std::pair<std::size_t, std::string>>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s;
    for (char c : line) {
      if (c == '%') break;
      if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) continue;
    auto open = s.find('(');
    auto comma = s.find(',', open);
    auto close = s.rfind(").");
    if (open == std::string::npos || comma == std::string::npos ||
        close == std::string::npos || close != s.size() - 2)
      throw ParseError("malformed matrix line", lineno, 1);
    std::string pred = s.substr(0, open);
    std::string a = s.substr(open + 1, comma - open - 1);
    std::string b = s.substr(comma + 1, close - comma - 1);
    if (pred == "cton") {
      cton.emplace_back(std::stoul(a), b);
    } else if (pred == "ntoc") {
      // redundant with cton; accepted and ignored
    } else {
      rows[pred].emplace_back(std::stoul(a), b);
    }
  }
  std::sort(cton.begin(), cton.end());
  for (std::size_t i = 0; i < cton.size(); ++i) {
    if (cton[i].first != i) throw ParseError("cton indices are not contiguous", 0, 0);
    mf.table.add(cton[i].second);
  }
  for (auto& [pred, rws] : rows) {
    std::sort(rws.begin(), rws.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 0; i < rws.size(); ++i) {
      if (rws[i].first != i)
        throw ParseError("row indices of '" + pred + "' are not contiguous", 0, 0);
      mf.rows[pred].push_back(rws[i].second);
    }
  }
  return mf;
}

// ---------------------------------------------------------------------------
// Raw binary sidecar: a compact machine-readable companion to the text form.
// Layout: magic "BMLPBIN1", u64 n_rows, u64 n_cols, then n_rows * ceil(n_cols/64)
// little-endian u64 words. The symbol table is not carried.

inline void write_matrix_binary(std::ostream& os, const BitMatrix& m) {
  os.write("BMLPBIN1", 8);
  auto put64 = [&](std::uint64_t x) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    os.write(buf, 8);
  };
  put64(m.n_rows());
  put64(m.n_cols());
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (word_t w : m.row(i).words()) put64(w);
}

inline BitMatrix read_matrix_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != "BMLPBIN1")
    throw ParseError("bad binary matrix magic", 0, 0);
  auto get64 = [&]() {
    char buf[8];
    is.read(buf, 8);
    if (!is) throw ParseError("truncated binary matrix", 0, 0);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return x;
  };
  std::uint64_t n_rows = get64(), n_cols = get64();
  BitMatrix m(n_rows, n_cols);
  std::size_t words_per_row = (n_cols + kWordBits - 1) / kWordBits;
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t wi = 0; wi < words_per_row; ++wi) {
      std::uint64_t w = get64();
      std::uint64_t bit = 0;
      while (w) {
        bit = static_cast<std::uint64_t>(std::countr_zero(w));
        std::size_t j = wi * kWordBits + bit;
        if (j >= n_cols) throw ParseError("binary matrix has padding bits set", 0, 0);
        m.set(i, j);
        w &= w - 1;
      }
    }
  return m;
}

// ---------------------------------------------------------------------------

/// Writes via a temp file in the same directory and renames into place, so a
/// failed run leaves no partial output.
inline void atomic_write(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& writer,
                         bool binary = false) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path().empty() ? "." : path.parent_path();
  fs::path tmp = dir / (path.filename().string() + ".tmp" +
                        std::to_string(std::random_device{}()));
  {
    std::ofstream os(tmp, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    writer(os);
    if (!os) {
      os.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  fs::rename(tmp, path);
}

}  // namespace bmlp
