#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfobf/netlist.hpp"

namespace gfobf {

/// Exhaustive plans sweep all 2^(2m) operand pairs and are capped at 24
/// total input bits. Random plans inject the edge vectors (0,0), (1,1),
/// (ones,ones) first, then draw uniformly; stimulus i is derived from
/// (seed, i) alone, so any partition of the index space replays identically.
struct StimulusPlan {
  enum class Mode { exhaustive, random };
  Mode mode = Mode::exhaustive;
  std::uint64_t count = 0;
  std::uint64_t seed = 1;

  static StimulusPlan exhaustive() { return {}; }
  static StimulusPlan random(std::uint64_t count, std::uint64_t seed) {
    return {Mode::random, count, seed};
  }
};

constexpr unsigned kExhaustiveInputBitCap = 24;

struct Mismatch {
  std::uint64_t index = 0;
  Poly a, b, expected, actual;
};

struct EquivReport {
  std::uint64_t checked = 0;
  std::uint64_t mismatch_count = 0;
  std::vector<Mismatch> mismatches;  // first 16, by stimulus index
  bool pass() const { return mismatch_count == 0; }
  std::string to_json() const;
};

/// Topological single-vector evaluation. Works for any width.
Poly eval_netlist(const Netlist& n, const Poly& a, const Poly& b,
                  const std::vector<bool>& key = {});

/// Compares the netlist under `key` against multiplication modulo p over the
/// plan's stimuli. 64 lanes per pass, stimulus blocks spread across threads;
/// mismatch lists merge deterministically by stimulus index.
EquivReport verify_equiv(const Netlist& n, const std::vector<bool>& key,
                         const Poly& p, const StimulusPlan& plan);
/// Reference implementation: scalar evaluation, one stimulus at a time.
EquivReport verify_equiv_serial(const Netlist& n, const std::vector<bool>& key,
                                const Poly& p, const StimulusPlan& plan);

class VerilogParseError : public std::runtime_error {
 public:
  VerilogParseError(int line, int col, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + message),
        line(line),
        col(col) {}
  int line;
  int col;
};

/// Reads the structural subset emit_verilog produces (module header, ranged
/// A/B/P/Z ports, wire declarations, two-operand assigns over & | ^ ~ and
/// constant literals). Returns an equivalent netlist.
Netlist read_verilog_subset(const std::string& text);

}  // namespace gfobf
