#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gfobf/rng.hpp"
#include "gfobf/simulate.hpp"
#include "oracle.hpp"

using namespace gfobf;

namespace {

const Poly kP0 = Poly::parse("x^4+x^3+1");
const Poly kP1 = Poly::parse("x^4+x+1");

Netlist plain_netlist(const Poly& p) {
  return lower(gen_structure(FieldSpec::make(p)));
}

Netlist locked_pair() {
  const auto mx = obfuscate_chain(kP0, {kP1}, 4);
  return lower(mx, gen_structure(FieldSpec::make(kP0)).sums);
}

bool reports_equal(const EquivReport& x, const EquivReport& y) {
  if (x.checked != y.checked || x.mismatch_count != y.mismatch_count ||
      x.mismatches.size() != y.mismatches.size())
    return false;
  for (std::size_t i = 0; i < x.mismatches.size(); ++i) {
    const Mismatch& a = x.mismatches[i];
    const Mismatch& b = y.mismatches[i];
    if (a.index != b.index || a.a != b.a || a.b != b.b ||
        a.expected != b.expected || a.actual != b.actual)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single-vector evaluation matches the oracle") {
  const Netlist n = plain_netlist(kP0);
  const Poly x3 = Poly::monomial(3);
  CHECK(eval_netlist(n, x3, x3) == poly_mulmod(x3, x3, kP0));
  CHECK(eval_netlist(n, Poly::zero(), x3).is_zero());
  CHECK_THROWS_AS(eval_netlist(n, Poly::monomial(4), x3),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_netlist(locked_pair(), x3, x3, {}),
                  std::invalid_argument);
}

TEST_CASE("locked design under each key matches its class polynomial") {
  const Netlist n = locked_pair();
  CHECK(verify_equiv(n, {true}, kP0, StimulusPlan::exhaustive()).pass());
  CHECK(verify_equiv(n, {false}, kP1, StimulusPlan::exhaustive()).pass());
  // a wrong class must disagree somewhere
  const auto report = verify_equiv(n, {false}, kP0,
                                   StimulusPlan::exhaustive());
  CHECK_FALSE(report.pass());
  CHECK(report.mismatch_count > 0);
  CHECK(report.mismatches.size() <= 16);
}

TEST_CASE("exhaustive pass at degree 8") {
  const Poly p = enumerate_irreducible(8)[0];
  const auto report =
      verify_equiv(plain_netlist(p), {}, p, StimulusPlan::exhaustive());
  CHECK(report.pass());
  CHECK(report.checked == 65536);
}

TEST_CASE("parallel and serial checkers produce identical reports") {
  const Netlist n = locked_pair();
  // failing case: wrong polynomial, exhaustive
  const auto par = verify_equiv(n, {true}, kP1, StimulusPlan::exhaustive());
  const auto ser =
      verify_equiv_serial(n, {true}, kP1, StimulusPlan::exhaustive());
  CHECK_FALSE(par.pass());
  CHECK(reports_equal(par, ser));
  // random plan, passing
  const auto plan = StimulusPlan::random(999, 42);
  CHECK(reports_equal(verify_equiv(n, {true}, kP0, plan),
                      verify_equiv_serial(n, {true}, kP0, plan)));
}

TEST_CASE("random plans are deterministic and edge-seeded") {
  const Netlist n = plain_netlist(kP0);
  const auto r1 = verify_equiv(n, {}, kP0, StimulusPlan::random(100, 7));
  const auto r2 = verify_equiv(n, {}, kP0, StimulusPlan::random(100, 7));
  CHECK(reports_equal(r1, r2));
  CHECK(r1.checked == 100);
  CHECK(r1.pass());

  // first three stimuli are the fixed edge vectors: a mismatch report on a
  // wrong-class key must start at one of them when they disagree
  const auto bad =
      verify_equiv(locked_pair(), {false}, kP0, StimulusPlan::random(50, 7));
  CHECK_FALSE(bad.pass());
  CHECK(bad.mismatches.front().index >= 1);  // (0,0) agrees on any modulus
}

TEST_CASE("zero-count plan passes vacuously") {
  const auto report =
      verify_equiv(plain_netlist(kP0), {}, kP0, StimulusPlan::random(0, 1));
  CHECK(report.pass());
  CHECK(report.checked == 0);
}

TEST_CASE("exhaustive cap rejects oversized sweeps") {
  const Poly p = first_irreducible(16, 1)[0];
  CHECK_THROWS_AS(
      verify_equiv(plain_netlist(p), {}, p, StimulusPlan::exhaustive()),
      std::invalid_argument);
}

TEST_CASE("emitted designs read back functionally equal") {
  const auto mx = obfuscate_chain(kP0, {kP1}, 4);
  const Netlist n = lower(mx, gen_structure(FieldSpec::make(kP0)).sums);
  const Netlist back = read_verilog_subset(emit_verilog(n, "dut"));
  CHECK(back.width_a == 4);
  CHECK(back.key_bits == 1);
  for (std::uint64_t kv = 0; kv < 2; ++kv) {
    const std::vector<bool> key = {kv != 0};
    for (std::uint64_t ai = 0; ai < 16; ++ai)
      for (std::uint64_t bi = 0; bi < 16; ++bi) {
        const Poly a = Poly::from_bits(ai), b = Poly::from_bits(bi);
        CHECK(eval_netlist(back, a, b, key) == eval_netlist(n, a, b, key));
      }
  }
}

TEST_CASE("reader accepts an empty module body") {
  const Netlist n = read_verilog_subset("module empty ();\nendmodule\n");
  CHECK(n.gates.empty());
  CHECK(n.outputs.empty());
}

TEST_CASE("reader reports malformed input with a location") {
  const std::string text =
      "module bad (A, B, Z);\n"
      "  input [1:0] A;\n"
      "  input [1:0] B;\n"
      "  output [1:0] Z;\n"
      "  assign Z[0] = A[0] &;\n"
      "endmodule\n";
  try {
    read_verilog_subset(text);
    FAIL("expected a parse error");
  } catch (const VerilogParseError& e) {
    CHECK(e.line == 5);
    CHECK(e.col > 1);
  }
}

TEST_CASE("reader rejects unknown ports, cycles and double drivers") {
  CHECK_THROWS_AS(
      read_verilog_subset("module m (Q);\n  input [1:0] Q;\nendmodule\n"),
      VerilogParseError);
  CHECK_THROWS_AS(read_verilog_subset("module m (A, Z);\n"
                                      "  input [0:0] A;\n"
                                      "  output [0:0] Z;\n"
                                      "  wire n0;\n"
                                      "  assign n0 = n0 & A[0];\n"
                                      "  assign Z[0] = n0;\n"
                                      "endmodule\n"),
                  VerilogParseError);
  CHECK_THROWS_AS(read_verilog_subset("module m (A, Z);\n"
                                      "  input [0:0] A;\n"
                                      "  output [0:0] Z;\n"
                                      "  wire n0;\n"
                                      "  assign n0 = A[0];\n"
                                      "  assign n0 = ~A[0];\n"
                                      "  assign Z[0] = n0;\n"
                                      "endmodule\n"),
                  VerilogParseError);
  CHECK_THROWS_AS(read_verilog_subset("module m (A, Z);\n"
                                      "  input [0:0] A;\n"
                                      "  output [1:0] Z;\n"
                                      "  assign Z[0] = A[0];\n"
                                      "endmodule\n"),
                  VerilogParseError);  // Z[1] never assigned
}

TEST_CASE("equivalence report serializes verdict and samples") {
  const auto bad =
      verify_equiv(locked_pair(), {false}, kP0, StimulusPlan::exhaustive());
  const std::string j = bad.to_json();
  CHECK(j.find("\"verdict\": \"fail\"") != std::string::npos);
  CHECK(j.find("\"mismatches\"") != std::string::npos);
  const auto good =
      verify_equiv(locked_pair(), {true}, kP0, StimulusPlan::exhaustive());
  CHECK(good.to_json().find("\"verdict\": \"pass\"") != std::string::npos);
}
