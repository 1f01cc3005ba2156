#include "gfobf/attack.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "gfobf/rng.hpp"

namespace gfobf {

const char* verdict_name(AttackVerdict v) {
  switch (v) {
    case AttackVerdict::solved: return "solved";
    case AttackVerdict::exhausted: return "exhausted";
    case AttackVerdict::timeout: return "timeout";
  }
  return "?";
}

std::string AttackResult::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict_name(verdict);
  j["recovered_poly"] =
      recovered_poly.is_zero() ? "" : recovered_poly.to_string();
  std::string key;
  for (std::size_t i = recovered_key.size(); i-- > 0;)
    key += recovered_key[i] ? '1' : '0';
  j["recovered_key"] = key;  // MSB = highest round
  j["queries_used"] = queries_used;
  j["verification_checks"] = verification_checks;
  j["elapsed_seconds"] = elapsed_seconds;
  j["surviving_classes"] = surviving_classes;
  return j.dump(2) + "\n";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t eval_u64(const Netlist& n, std::uint64_t a, std::uint64_t b,
                       const std::vector<bool>& key) {
  const Poly z =
      eval_netlist(n, Poly::from_bits(a), Poly::from_bits(b), key);
  return z.low_bits();
}

// candidate keys the attacker will consider, one per putative class
std::vector<std::vector<bool>> candidate_keys(const Netlist& locked,
                                              bool known_structure) {
  const unsigned n = locked.key_bits;
  std::vector<std::vector<bool>> keys;
  if (n == 0) {
    keys.push_back({});
    return keys;
  }
  if (known_structure) {
    // all-ones plus, per round, the key with that round cleared and every
    // later round set; earlier rounds are don't-care and left set
    keys.emplace_back(n, true);
    for (unsigned r = 0; r < n; ++r) {
      std::vector<bool> k(n, true);
      k[r] = false;
      keys.push_back(std::move(k));
    }
  } else {
    if (n > 16)
      throw std::invalid_argument(
          "di_attack: enumerating more than 16 key bits is not supported");
    for (std::uint64_t kv = 0; kv < (std::uint64_t{1} << n); ++kv) {
      std::vector<bool> k(n);
      for (unsigned i = 0; i < n; ++i) k[i] = (kv >> i) & 1;
      keys.push_back(std::move(k));
    }
  }
  return keys;
}

// group keys whose outputs agree on a deterministic probe set
std::vector<std::vector<bool>> dedup_by_function(
    const Netlist& locked, std::vector<std::vector<bool>> keys,
    std::uint64_t seed) {
  const unsigned m = locked.width_a;
  const std::uint64_t mask =
      (m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> probes = {
      {0, 0}, {1, 1}, {mask, mask}};
  for (int i = 0; i < 61; ++i)
    probes.emplace_back(derive_seed(seed, 2 * i) & mask,
                        derive_seed(seed, 2 * i + 1) & mask);

  std::vector<std::vector<bool>> reps;
  std::vector<std::vector<std::uint64_t>> signatures;
  for (auto& key : keys) {
    std::vector<std::uint64_t> sig;
    for (const auto& [a, b] : probes) sig.push_back(eval_u64(locked, a, b, key));
    bool fresh = true;
    for (const auto& seen : signatures)
      if (seen == sig) {
        fresh = false;
        break;
      }
    if (fresh) {
      signatures.push_back(std::move(sig));
      reps.push_back(std::move(key));
    }
  }
  return reps;
}

// match the unlocked function against the candidate moduli by simulation
Poly identify_poly(const Netlist& locked, const std::vector<bool>& key,
                   const std::vector<Poly>& candidates, std::uint64_t seed) {
  const unsigned m = locked.width_a;
  const std::uint64_t mask =
      (m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  std::vector<Poly> survivors = candidates;
  for (int i = 0; i < 256 && survivors.size() > 1; ++i) {
    const std::uint64_t a = derive_seed(seed, 7000 + 2 * i) & mask;
    const std::uint64_t b = derive_seed(seed, 7001 + 2 * i) & mask;
    const Poly pa = Poly::from_bits(a), pb = Poly::from_bits(b);
    const Poly got = eval_netlist(locked, pa, pb, key);
    std::erase_if(survivors, [&](const Poly& p) {
      return poly_mulmod(pa, pb, p) != got;
    });
  }
  return survivors.size() == 1 ? survivors.front() : Poly::zero();
}

}  // namespace

AttackResult di_attack(const AttackProblem& problem) {
  const auto t0 = Clock::now();
  AttackResult result;
  const Netlist& locked = problem.locked;
  if (locked.key_bits > 32)
    throw std::invalid_argument("di_attack: too many key bits");
  if (problem.candidates.empty())
    throw std::invalid_argument("di_attack: no candidate polynomials");
  const unsigned m = locked.width_a;
  const std::uint64_t mask =
      (m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;

  auto surviving = dedup_by_function(
      locked, candidate_keys(locked, problem.known_class_structure),
      derive_seed(problem.seed, 1));

  auto rng = make_rng(problem.seed, 2);
  bool out_of_budget = false;
  while (surviving.size() > 1) {
    if (seconds_since(t0) > problem.time_budget_seconds) {
      result.verdict = AttackVerdict::timeout;
      out_of_budget = true;
      break;
    }
    if (result.queries_used >= problem.query_budget) {
      result.verdict = AttackVerdict::exhausted;
      out_of_budget = true;
      break;
    }
    // random search for an input where two surviving classes disagree
    bool found = false;
    std::uint64_t di_a = 0, di_b = 0;
    for (std::uint64_t trial = 0; trial < problem.di_trials && !found;
         ++trial) {
      const std::uint64_t a = rng() & mask;
      const std::uint64_t b = rng() & mask;
      const std::uint64_t first = eval_u64(locked, a, b, surviving[0]);
      for (std::size_t k = 1; k < surviving.size(); ++k)
        if (eval_u64(locked, a, b, surviving[k]) != first) {
          di_a = a;
          di_b = b;
          found = true;
          break;
        }
    }
    if (!found) break;  // classes agree on the searched space

    const Poly answer =
        problem.oracle(Poly::from_bits(di_a), Poly::from_bits(di_b));
    ++result.queries_used;
    const std::size_t before = surviving.size();
    std::erase_if(surviving, [&](const std::vector<bool>& key) {
      return eval_netlist(locked, Poly::from_bits(di_a),
                          Poly::from_bits(di_b), key) != answer;
    });
    if (surviving.size() >= before)
      throw std::logic_error("di_attack: distinguishing input pruned nothing");
    if (surviving.empty()) break;
  }

  result.surviving_classes = surviving.size();
  if (surviving.empty()) {
    // the oracle is inconsistent with every key class
    if (!out_of_budget) result.verdict = AttackVerdict::exhausted;
    result.elapsed_seconds = seconds_since(t0);
    return result;
  }
  if (out_of_budget && surviving.size() > 1) {
    result.elapsed_seconds = seconds_since(t0);
    return result;
  }

  // verify the winner against the oracle on a fresh sample
  const std::vector<bool>& key = surviving.front();
  bool ok = true;
  if (2 * m <= 16) {
    for (std::uint64_t a = 0; a <= mask && ok; ++a)
      for (std::uint64_t b = 0; b <= mask; ++b) {
        const Poly pa = Poly::from_bits(a), pb = Poly::from_bits(b);
        ++result.verification_checks;
        if (eval_netlist(locked, pa, pb, key) != problem.oracle(pa, pb)) {
          ok = false;
          break;
        }
      }
  } else {
    auto vrng = make_rng(problem.seed, 3);
    for (int i = 0; i < 10000 && ok; ++i) {
      const Poly pa = Poly::from_bits(vrng() & mask);
      const Poly pb = Poly::from_bits(vrng() & mask);
      ++result.verification_checks;
      ok = eval_netlist(locked, pa, pb, key) == problem.oracle(pa, pb);
    }
  }
  if (!ok) {
    result.verdict = AttackVerdict::exhausted;
    result.elapsed_seconds = seconds_since(t0);
    return result;
  }

  result.verdict = AttackVerdict::solved;
  result.recovered_key = key;
  result.recovered_poly =
      identify_poly(locked, key, problem.candidates, problem.seed);
  result.elapsed_seconds = seconds_since(t0);
  return result;
}

AttackResult poly_hypothesis_attack(const OracleFn& oracle, unsigned m,
                                    const std::vector<Poly>& candidates,
                                    std::uint64_t query_budget,
                                    std::uint64_t seed) {
  const auto t0 = Clock::now();
  AttackResult result;
  if (candidates.empty())
    throw std::invalid_argument("poly_hypothesis_attack: no candidates");
  const std::uint64_t mask =
      (m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;

  std::vector<Poly> surviving = candidates;
  auto rng = make_rng(seed, 11);
  while (surviving.size() > 1 && result.queries_used < query_budget) {
    const Poly a = Poly::from_bits(rng() & mask);
    const Poly b = Poly::from_bits(rng() & mask);
    const Poly answer = oracle(a, b);
    ++result.queries_used;
    std::erase_if(surviving, [&](const Poly& p) {
      return poly_mulmod(a, b, p) != answer;
    });
  }

  result.surviving_classes = surviving.size();
  if (surviving.size() != 1) {
    result.verdict = AttackVerdict::exhausted;  // none left, or ambiguous
    result.elapsed_seconds = seconds_since(t0);
    return result;
  }

  // fresh confirmation sample; a failure disproves the last survivor
  bool ok = true;
  auto vrng = make_rng(seed, 12);
  for (int i = 0; i < 64 && ok; ++i) {
    const Poly a = Poly::from_bits(vrng() & mask);
    const Poly b = Poly::from_bits(vrng() & mask);
    ++result.verification_checks;
    ok = oracle(a, b) == poly_mulmod(a, b, surviving.front());
  }
  result.verdict = ok ? AttackVerdict::solved : AttackVerdict::exhausted;
  if (ok)
    result.recovered_poly = surviving.front();
  else
    result.surviving_classes = 0;
  result.elapsed_seconds = seconds_since(t0);
  return result;
}

SubprocessOracle::SubprocessOracle(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw std::runtime_error("oracle: pipe failed");
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("oracle: fork failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
    _exit(127);
  }
  pid_ = pid;
  close(to_child[0]);
  close(from_child[1]);
  to_child_ = fdopen(to_child[1], "w");
  from_child_ = fdopen(from_child[0], "r");
  if (!to_child_ || !from_child_)
    throw std::runtime_error("oracle: fdopen failed");
}

SubprocessOracle::~SubprocessOracle() {
  if (to_child_) fclose(to_child_);
  if (from_child_) fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(static_cast<pid_t>(pid_), &status, 0);
  }
}

Poly SubprocessOracle::query(const Poly& a, const Poly& b) {
  const std::string line =
      a.to_hex().substr(2) + " " + b.to_hex().substr(2) + "\n";
  if (std::fputs(line.c_str(), to_child_) == EOF || std::fflush(to_child_))
    throw std::runtime_error("oracle: write failed");
  char buf[1024];
  if (!std::fgets(buf, sizeof buf, from_child_))
    throw std::runtime_error("oracle: no response");
  std::string response(buf);
  while (!response.empty() &&
         (response.back() == '\n' || response.back() == '\r'))
    response.pop_back();
  return Poly::parse("0x" + response);
}

}  // namespace gfobf
