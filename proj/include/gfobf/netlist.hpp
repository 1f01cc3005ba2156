#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "gfobf/obfuscate.hpp"

namespace gfobf {

enum class GateKind : std::uint8_t {
  input_a,
  input_b,
  key,
  const0,
  const1,
  and_gate,
  or_gate,
  xor_gate,
  not_gate,
};

const char* gate_kind_name(GateKind k);

/// One DAG node. Logic gates reference operand node ids (always smaller than
/// their own id, so the gate list is a topological order); input and key
/// nodes store their bit index in `a`.
struct Gate {
  GateKind kind;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  bool operator==(const Gate&) const = default;
};

/// Immutable gate-level DAG with named ports A, B, optional key port P, and
/// outputs Z. Build through NetlistBuilder.
class Netlist {
 public:
  unsigned width_a = 0;       // bits of input A
  unsigned width_b = 0;       // bits of input B
  unsigned key_bits = 0;      // bits of port P; 0 = unlocked
  std::vector<Gate> gates;
  std::vector<std::uint32_t> outputs;  // z_0 .. z_{m-1}

  bool locked() const { return key_bits > 0; }
};

/// Appends gates with constant folding, redundancy removal and structural
/// hash-consing; identical subexpressions share one node.
class NetlistBuilder {
 public:
  std::uint32_t input_a(unsigned bit);
  std::uint32_t input_b(unsigned bit);
  std::uint32_t key(unsigned bit);
  std::uint32_t constant(bool value);
  std::uint32_t gate(GateKind kind, std::uint32_t x, std::uint32_t y = 0);
  /// Balanced XOR over the terms (ascending-id operand order, depth-minimal
  /// pairing). Empty input yields constant 0.
  std::uint32_t xor_tree(std::vector<std::uint32_t> terms);

  void set_outputs(std::vector<std::uint32_t> z);
  Netlist build(unsigned width_a, unsigned width_b, unsigned key_bits);

 private:
  std::uint32_t append(GateKind kind, std::uint32_t a, std::uint32_t b);
  std::vector<Gate> gates_;
  std::vector<std::uint32_t> outputs_;
  std::map<std::tuple<std::uint8_t, std::uint32_t, std::uint32_t>,
           std::uint32_t>
      cache_;
};

/// Unit-less per-kind weights; inputs, keys and constants are free.
struct CostModel {
  double area_and = 1.0, area_or = 1.0, area_not = 0.5, area_xor = 2.0;
  double delay_and = 1.0, delay_or = 1.0, delay_not = 0.3, delay_xor = 1.4;
  double area(GateKind k) const;
  double delay(GateKind k) const;
};

struct CostReport {
  double area = 0.0;
  double delay = 0.0;
  std::map<std::string, std::size_t> gates;
  std::size_t delta_count = 0;
  std::size_t reduced_delta_count = 0;
  unsigned key_bits = 0;
  std::string to_json() const;
};

/// Lowers the plain two-stage structure: AND grid, balanced XOR trees for
/// the partial-product sums, column XOR trees for the outputs.
Netlist lower(const MultStructure& s);
/// Lowers an obfuscated structure; mux cells become (t AND sel) OR
/// (f AND NOT sel) with constant branches folded away, and each distinct
/// term is instantiated once.
Netlist lower(const ObfMatrix& mx, const SumVector& sums);

/// Replaces key nodes by constants, folds, and drops unreachable gates.
Netlist resolve_key(const Netlist& n, const std::vector<bool>& key);

/// Keeps only gates reachable from the outputs, preserving order.
Netlist compact(const Netlist& n);

CostReport cost(const Netlist& n, const CostModel& model = CostModel{});

/// Structural Verilog (assign statements over &, |, ^, ~ only). Ports are
/// A, B, Z plus P when the netlist is locked. Deterministic and byte-stable
/// for identical netlists.
std::string emit_verilog(const Netlist& n, const std::string& module_name);
/// Emission with the key resolved; the result has no P port.
std::string emit_verilog_resolved(const Netlist& n,
                                  const std::vector<bool>& key,
                                  const std::string& module_name);

}  // namespace gfobf
