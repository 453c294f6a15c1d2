#include "bmlp/compile.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "bmlp/io.hpp"

using namespace bmlp;

namespace {

const char* kExample3 =
    "flight(c0,c1). flight(c1,c2).\n"
    "route(X,Y):-flight(X,Y).\n"
    "route(X,Y):-flight(X,Z),route(Z,Y).\n";

const char* kAppendixB =
    "flight(c1,c2). flight(c2,c3).\n"
    "route(X,Y):-flight(X,Y).\n"
    "route(X,Y):-flight(X,Z),route(Z,Y).\n";

std::uint64_t row_bits(const BitVector& v) {
  std::uint64_t bits = 0;
  v.for_each_set_bit([&](std::size_t j) { bits |= std::uint64_t{1} << j; });
  return bits;
}

TEST(BuildTable, FirstAppearanceOrder) {
  SymbolTable t = build_table(parse_program(kExample3));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.index_of("c0"), 0u);
  EXPECT_EQ(t.index_of("c1"), 1u);
  EXPECT_EQ(t.index_of("c2"), 2u);
  EXPECT_EQ(t.name_of(2), "c2");
}

TEST(BuildTable, EmptyProgram) {
  EXPECT_EQ(build_table(Program{}).size(), 0u);
}

TEST(BuildTable, UnknownLookupRejected) {
  SymbolTable t = build_table(parse_program(kExample3));
  EXPECT_THROW(t.index_of("nope"), LookupError);
}

TEST(CompileRms, Example3Rows) {
  Program p = parse_program(kExample3);
  RMSInput in = compile_rms(p, build_table(p));
  ASSERT_EQ(in.r1.n_rows(), 3u);
  EXPECT_EQ(row_bits(in.r1.row(0)), 2u);  // v(0,2)
  EXPECT_EQ(row_bits(in.r1.row(1)), 4u);  // v(1,4)
  EXPECT_EQ(row_bits(in.r1.row(2)), 0u);  // v(2,0)
  EXPECT_EQ(in.relation, "flight");
}

TEST(CompileRms, NoFactsGivesZeroMatrix) {
  Program p = parse_program(
      "route(X,Y):-flight(X,Y). route(X,Y):-flight(X,Z),route(Z,Y).");
  SymbolTable t;
  t.add("a");
  t.add("b");
  t.add("c");
  RMSInput in = compile_rms(p, t);
  EXPECT_EQ(in.r1, BitMatrix(3, 3));
}

TEST(CompileRms, FoldedFlightsHaveSixBits) {
  const char* flights =
      "flight(m1,berlin_paris).\n"
      "flight_1(berlin_paris,london_toronto).\n"
      "flight_1(berlin_paris,london).\n"
      "flight_1(berlin_paris,toronto).\n"
      "flight_2(london_toronto,new_york).\n"
      "flight_3(new_york,london).\n"
      "flight(X,Y):-flight_1(X,Y).\n"
      "flight(X,Y):-flight_2(X,Y).\n"
      "flight(X,Y):-flight_3(X,Y).\n"
      "route(X,Y):-flight(X,Y).\n"
      "route(X,Y):-flight(X,Z),route(Z,Y).\n";
  Program p = parse_program(flights);
  SymbolTable t = build_table(p);
  RMSInput in = compile_rms(p, t);
  EXPECT_EQ(in.r1.n_rows(), 6u);
  EXPECT_EQ(in.r1.popcount(), 6u);
  EXPECT_TRUE(in.r1.test(t.index_of("m1"), t.index_of("berlin_paris")));
  EXPECT_TRUE(in.r1.test(t.index_of("new_york"), t.index_of("london")));
}

TEST(CompileRms, DecompileRoundTrip) {
  Program p = parse_program(kExample3);
  RMSInput in = compile_rms(p, build_table(p));
  EXPECT_EQ(decompile_rms(in), classify_lir(p).edges);
}

TEST(CompileRms, PermutedFactOrderAgreesAfterTranslation) {
  Program a = parse_program("e(x,y). e(y,z). r(X,Y):-e(X,Y). r(X,Y):-e(X,Z),r(Z,Y).");
  Program b = parse_program("e(y,z). e(x,y). r(X,Y):-e(X,Y). r(X,Y):-e(X,Z),r(Z,Y).");
  RMSInput ia = compile_rms(a, build_table(a));
  RMSInput ib = compile_rms(b, build_table(b));
  EXPECT_EQ(decompile_rms(ia), decompile_rms(ib));
}

TEST(CompileIe, AppendixB1Rows) {
  Program p = parse_program(kAppendixB);
  SymbolTable t = build_table(p);
  IEInput in = compile_ie(p, t, "c1");
  ASSERT_EQ(in.r1_first.n_rows(), 2u);
  EXPECT_EQ(row_bits(in.r1_first.row(0)), 1u);   // flight1(0,1)
  EXPECT_EQ(row_bits(in.r2_second.row(0)), 2u);  // flight2(0,2)
  EXPECT_EQ(row_bits(in.r1_first.row(1)), 2u);   // flight1(1,2)
  EXPECT_EQ(row_bits(in.r2_second.row(1)), 4u);  // flight2(1,4)
  EXPECT_EQ(row_bits(in.v), 1u);                 // source c1 = 001
}

TEST(CompileIe, UnitSourceVector) {
  Program p = parse_program(kExample3);
  IEInput in = compile_ie(p, build_table(p), "c1");
  EXPECT_EQ(row_bits(in.v), 2u);
  EXPECT_EQ(in.v.popcount(), 1u);
}

TEST(CompileIe, UnknownSourceRejected) {
  Program p = parse_program(kExample3);
  EXPECT_THROW(compile_ie(p, build_table(p), "zz"), LookupError);
}

TEST(CompileIe, ExactlyOneBitPerFactRow) {
  std::mt19937_64 rng(21);
  std::string text;
  for (int i = 0; i < 40; ++i)
    text += "e(k" + std::to_string(rng() % 12) + ",k" + std::to_string(rng() % 12) +
            ").\n";
  text += "r(X,Y):-e(X,Y).\nr(X,Y):-e(X,Z),r(Z,Y).\n";
  Program p = parse_program(text);
  IEInput in = compile_ie(p, build_table(p), "k0");
  for (std::size_t i = 0; i < in.r1_first.n_rows(); ++i) {
    EXPECT_EQ(in.r1_first.row(i).popcount(), 1u);
    EXPECT_EQ(in.r2_second.row(i).popcount(), 1u);
  }
}

// --- serialization ---------------------------------------------------------

TEST(DecimalCodec, RoundTripsWideRows) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 1 + rng() % 300;
    BitVector v(n);
    for (std::size_t j = 0; j < n; ++j)
      if (rng() & 1) v.set(j);
    EXPECT_EQ(row_from_decimal(row_to_decimal(v), n), v);
  }
  EXPECT_EQ(row_to_decimal(BitVector(100)), "0");
  BitVector high(130);
  high.set(129);
  // 2^129
  EXPECT_EQ(row_to_decimal(high), "680564733841876926926749214863536422912");
}

TEST(MatrixFile, TextRoundTrip) {
  Program p = parse_program(kExample3);
  RMSInput in = compile_rms(p, build_table(p));
  std::ostringstream os;
  write_matrix(os, in.table, in.r1);
  std::string text = os.str();
  EXPECT_NE(text.find("cton(0,c0).\n"), std::string::npos);
  EXPECT_NE(text.find("ntoc(c0,0).\n"), std::string::npos);
  EXPECT_NE(text.find("v(0,2).\n"), std::string::npos);
  EXPECT_NE(text.find("v(1,4).\n"), std::string::npos);
  EXPECT_NE(text.find("v(2,0).\n"), std::string::npos);

  std::istringstream is(text);
  MatrixFile mf = read_matrix_file(is);
  EXPECT_EQ(mf.table.names(), in.table.names());
  EXPECT_EQ(mf.matrix("v"), in.r1);
}

TEST(MatrixFile, IeFormatRoundTrip) {
  Program p = parse_program(kAppendixB);
  IEInput in = compile_ie(p, build_table(p), "c1");
  std::ostringstream os;
  write_ie_input(os, in);
  std::string text = os.str();
  EXPECT_NE(text.find("flight1(0,1).\n"), std::string::npos);
  EXPECT_NE(text.find("flight2(0,2).\n"), std::string::npos);
  EXPECT_NE(text.find("flight1(1,2).\n"), std::string::npos);
  EXPECT_NE(text.find("flight2(1,4).\n"), std::string::npos);
  EXPECT_NE(text.find("v(0,1).\n"), std::string::npos);

  std::istringstream is(text);
  MatrixFile mf = read_matrix_file(is);
  EXPECT_EQ(mf.matrix("flight1"), in.r1_first);
  EXPECT_EQ(mf.matrix("flight2"), in.r2_second);
}

TEST(MatrixFile, BinarySidecarRoundTrip) {
  std::mt19937_64 rng(23);
  BitMatrix m(17, 90);
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t j = 0; j < m.n_cols(); ++j)
      if (rng() % 3 == 0) m.set(i, j);
  std::ostringstream os(std::ios::binary);
  write_matrix_binary(os, m);
  std::istringstream is(os.str(), std::ios::binary);
  EXPECT_EQ(read_matrix_binary(is), m);
}

}  // namespace
