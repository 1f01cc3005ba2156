#pragma once

#include <functional>
#include <string>

#include "gfobf/simulate.hpp"

namespace gfobf {

using OracleFn = std::function<Poly(const Poly&, const Poly&)>;

/// Oracle-guided recovery problem: a locked netlist with identified key
/// inputs, black-box access to the true function, and the candidate moduli
/// of the field (assumed public).
struct AttackProblem {
  Netlist locked;
  OracleFn oracle;
  std::vector<Poly> candidates;
  std::uint64_t query_budget = 1000;
  double time_budget_seconds = 10.0;
  std::uint64_t seed = 1;
  /// Random-search trials per distinguishing-input round.
  std::uint64_t di_trials = 10000;
  /// When set, the attacker derives one key representative per round from
  /// the chain construction; otherwise every key is enumerated (<= 16 bits).
  bool known_class_structure = true;
};

enum class AttackVerdict { solved, exhausted, timeout };
const char* verdict_name(AttackVerdict v);

struct AttackResult {
  AttackVerdict verdict = AttackVerdict::exhausted;
  Poly recovered_poly;
  std::vector<bool> recovered_key;
  /// Distinguishing-phase oracle queries. The final soundness check is
  /// tallied separately in verification_checks.
  std::uint64_t queries_used = 0;
  std::uint64_t verification_checks = 0;
  double elapsed_seconds = 0.0;
  std::size_t surviving_classes = 0;
  std::string to_json() const;
};

/// Distinguishing-input attack: prunes surviving key classes with oracle
/// answers on inputs where two classes disagree, then verifies the winner
/// on a fresh sample (exhaustive when 2m <= 16, else 1e4 random vectors)
/// and names the recovered modulus by matching against the candidates.
AttackResult di_attack(const AttackProblem& problem);

/// Ignores the netlist entirely: tests each candidate modulus against the
/// oracle on random operand pairs, pruning on the first mismatch. Oracle
/// access alone defeats modulus secrecy at any width.
AttackResult poly_hypothesis_attack(const OracleFn& oracle, unsigned m,
                                    const std::vector<Poly>& candidates,
                                    std::uint64_t query_budget = 1000,
                                    std::uint64_t seed = 1);

/// Line-protocol client for an external oracle process: writes
/// "A_hex B_hex\n" to its stdin and reads "Z_hex\n" back (bare lowercase
/// hex, least significant coefficient in the last digit).
class SubprocessOracle {
 public:
  explicit SubprocessOracle(const std::string& command);
  ~SubprocessOracle();
  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;

  Poly query(const Poly& a, const Poly& b);
  OracleFn fn() {
    return [this](const Poly& a, const Poly& b) { return query(a, b); };
  }

 private:
  long pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
};

}  // namespace gfobf
