#pragma once

#include <stdexcept>
#include <string>

namespace bmlp {

// Operand dimensions do not line up (matrix/vector kernels).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Text input rejected by a reader; carries 1-based line/column.
struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(std::string msg, int line_, int column_)
      : std::runtime_error(std::move(msg) + " at line " + std::to_string(line_) +
                           ", column " + std::to_string(column_)),
        line(line_),
        column(column_) {}
};

// Program is outside the linear-and-immediately-recursive class.
struct ClassifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown symbol, place or transition.
struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bmlp
