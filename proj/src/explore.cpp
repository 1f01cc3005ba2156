#include "gfobf/explore.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "gfobf/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gfobf {

namespace {

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// rank -> permutation, factorial number system
std::vector<unsigned> nth_permutation(std::size_t n, std::uint64_t rank) {
  std::vector<unsigned> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<unsigned> out;
  for (std::size_t k = n; k > 0; --k) {
    const std::uint64_t f = factorial(k - 1);
    const std::size_t pick = static_cast<std::size_t>(rank / f);
    rank %= f;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

OrderResult run_order(const Poly& true_p, const std::vector<Poly>& others,
                      unsigned m, const std::vector<unsigned>& order,
                      std::uint64_t index, const ExploreOptions& opts) {
  OrderResult r;
  r.index = index;
  r.order = order;

  std::vector<Poly> permuted;
  for (unsigned i : order) permuted.push_back(others[i]);

  ChainOptions chain_opts;
  chain_opts.compute_class_map = false;
  ObfMatrix mx = obfuscate_chain(true_p, permuted, m, chain_opts);
  if (opts.optimize_designs) mx = optimize(mx);

  const SumVector sums = gen_structure(FieldSpec::make(true_p)).sums;
  const Netlist n = lower(mx, sums);
  const CostReport c = cost(n, opts.model);
  r.area = c.area;
  r.delay = c.delay;
  r.delta_count = mx.mux_count();
  r.reduced_delta_count = mx.fused_count();

  if (opts.check_vectors > 0) {
    const auto report = verify_equiv(
        n, mx.key.true_key, true_p,
        StimulusPlan::random(opts.check_vectors,
                             derive_seed(opts.seed, 0x5EED + index)));
    r.equiv_pass = report.pass();
  }
  return r;
}

std::vector<std::vector<unsigned>> order_list(std::size_t n_others,
                                              const ExploreOptions& opts) {
  std::vector<std::vector<unsigned>> orders;
  if (opts.mode == ExploreOptions::Mode::exhaustive) {
    if (n_others > opts.max_exhaustive)
      throw std::invalid_argument(
          "explore_orders: exhaustive mode exceeds the permutation budget");
    const std::uint64_t total = factorial(n_others);
    for (std::uint64_t rank = 0; rank < total; ++rank)
      orders.push_back(nth_permutation(n_others, rank));
  } else {
    for (std::size_t i = 0; i < opts.sample_count; ++i) {
      std::vector<unsigned> order(n_others);
      std::iota(order.begin(), order.end(), 0u);
      auto rng = make_rng(opts.seed, i);
      std::shuffle(order.begin(), order.end(), rng);
      orders.push_back(std::move(order));
    }
  }
  return orders;
}

}  // namespace

std::vector<OrderResult> explore_orders(const Poly& true_p,
                                        const std::vector<Poly>& others,
                                        unsigned m,
                                        const ExploreOptions& opts) {
  if (!opts.parallel) return explore_orders_serial(true_p, others, m, opts);
  const auto orders = order_list(others.size(), opts);
  std::vector<OrderResult> results(orders.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(orders.size());
       ++i) {
    results[static_cast<std::size_t>(i)] =
        run_order(true_p, others, m, orders[static_cast<std::size_t>(i)],
                  static_cast<std::uint64_t>(i), opts);
  }
  return results;
}

std::vector<OrderResult> explore_orders_serial(const Poly& true_p,
                                               const std::vector<Poly>& others,
                                               unsigned m,
                                               ExploreOptions opts) {
  opts.parallel = false;
  const auto orders = order_list(others.size(), opts);
  std::vector<OrderResult> results(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i)
    results[i] = run_order(true_p, others, m, orders[i],
                           static_cast<std::uint64_t>(i), opts);
  return results;
}

namespace {

DistributionStats stats_of(const std::vector<double>& xs) {
  DistributionStats s;
  if (xs.empty()) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  s.histogram.assign(16, 0);
  const double span = s.max - s.min;
  for (double x : xs) {
    std::size_t bin =
        span <= 0.0 ? 0
                    : static_cast<std::size_t>((x - s.min) / span * 16.0);
    if (bin >= 16) bin = 15;
    ++s.histogram[bin];
  }
  return s;
}

nlohmann::json stats_json(const DistributionStats& s) {
  return {{"min", s.min},
          {"max", s.max},
          {"mean", s.mean},
          {"histogram", s.histogram}};
}

}  // namespace

OrderSummary summarize_orders(const std::vector<OrderResult>& results) {
  OrderSummary s;
  s.designs = results.size();
  std::vector<double> areas, delays;
  for (const OrderResult& r : results) {
    areas.push_back(r.area);
    delays.push_back(r.delay);
    if (!r.equiv_pass) ++s.equiv_failures;
  }
  s.area = stats_of(areas);
  s.delay = stats_of(delays);
  return s;
}

std::string OrderSummary::to_json() const {
  nlohmann::json j;
  j["designs"] = designs;
  j["equiv_failures"] = equiv_failures;
  j["area"] = stats_json(area);
  j["delay"] = stats_json(delay);
  return j.dump(2) + "\n";
}

std::string orders_csv(const std::vector<OrderResult>& results) {
  std::string csv = "permutation,area,delay,delta_count,reduced_delta_count\n";
  for (const OrderResult& r : results) {
    std::string order;
    for (std::size_t i = 0; i < r.order.size(); ++i) {
      if (i) order += '-';
      order += std::to_string(r.order[i]);
    }
    char line[160];
    std::snprintf(line, sizeof line, "%s,%.6g,%.6g,%zu,%zu\n", order.c_str(),
                  r.area, r.delay, r.delta_count, r.reduced_delta_count);
    csv += line;
  }
  return csv;
}

}  // namespace gfobf
