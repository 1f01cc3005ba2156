#pragma once

#include "gfobf/netlist.hpp"
#include "gfobf/simulate.hpp"

namespace gfobf {

/// Cost of one obfuscation order. `order` holds indices into the caller's
/// polynomial list, in merge order.
struct OrderResult {
  std::uint64_t index = 0;  // permutation rank or sample number
  std::vector<unsigned> order;
  double area = 0.0;
  double delay = 0.0;
  std::size_t delta_count = 0;
  std::size_t reduced_delta_count = 0;
  bool equiv_pass = true;
};

struct DistributionStats {
  double min = 0.0, max = 0.0, mean = 0.0;
  std::vector<std::size_t> histogram;  // 16 equal-width bins over [min, max]
};

struct OrderSummary {
  std::size_t designs = 0;
  std::size_t equiv_failures = 0;
  DistributionStats area;
  DistributionStats delay;
  std::string to_json() const;
};

struct ExploreOptions {
  enum class Mode { exhaustive, sample };
  Mode mode = Mode::exhaustive;
  std::size_t sample_count = 0;
  std::uint64_t seed = 1;
  /// Exhaustive mode refuses factorials beyond this many polynomials.
  std::size_t max_exhaustive = 8;
  bool optimize_designs = true;
  CostModel model;
  /// When nonzero, each design is checked against the true function on this
  /// many random vectors (edge vectors first).
  std::uint64_t check_vectors = 0;
  bool parallel = true;
};

/// Builds, optimizes, lowers and costs one design per obfuscation order.
/// Exhaustive mode walks all |others|! permutations in rank order; sample
/// mode draws seeded shuffles. Results arrive sorted by index regardless of
/// the worker schedule.
std::vector<OrderResult> explore_orders(const Poly& true_p,
                                        const std::vector<Poly>& others,
                                        unsigned m, const ExploreOptions& opts);
/// Reference implementation, serial by construction.
std::vector<OrderResult> explore_orders_serial(const Poly& true_p,
                                               const std::vector<Poly>& others,
                                               unsigned m,
                                               ExploreOptions opts);

OrderSummary summarize_orders(const std::vector<OrderResult>& results);

/// CSV rows: permutation, area, delay, delta_count, reduced_delta_count.
std::string orders_csv(const std::vector<OrderResult>& results);

}  // namespace gfobf
