// Times the OpenMP kernels against their serial reference implementations.

#include <chrono>
#include <cstdio>
#include <functional>

#include "gfobf/explore.hpp"

using namespace gfobf;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-38s %10.1f ms %10.1f ms %8.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::printf("%-38s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    const Poly p = first_irreducible(10, 1)[0];
    const Netlist n = lower(gen_structure(FieldSpec::make(p)));
    EquivReport rs, rp;
    const double serial = time_ms(
        [&] { rs = verify_equiv_serial(n, {}, p, StimulusPlan::exhaustive()); });
    const double parallel = time_ms(
        [&] { rp = verify_equiv(n, {}, p, StimulusPlan::exhaustive()); });
    if (!rs.pass() || !rp.pass() || rs.checked != rp.checked) {
      std::fprintf(stderr, "equivalence kernels disagree\n");
      return 1;
    }
    row("equivalence sweep (m=10, 2^20)", serial, parallel);
  }

  {
    const auto polys = enumerate_irreducible(8);
    const std::vector<Poly> others(polys.begin() + 1, polys.begin() + 6);
    ExploreOptions opts;
    opts.check_vectors = 128;
    std::vector<OrderResult> rs, rp;
    const double serial = time_ms(
        [&] { rs = explore_orders_serial(polys[0], others, 8, opts); });
    const double parallel =
        time_ms([&] { rp = explore_orders(polys[0], others, 8, opts); });
    if (rs.size() != rp.size() || rs.back().area != rp.back().area) {
      std::fprintf(stderr, "order kernels disagree\n");
      return 1;
    }
    row("order exploration (m=8, 120 orders)", serial, parallel);
  }

  {
    std::vector<Poly> rs, rp;
    const double serial =
        time_ms([&] { rs = enumerate_irreducible_serial(16); });
    const double parallel = time_ms([&] { rp = enumerate_irreducible(16); });
    if (rs != rp) {
      std::fprintf(stderr, "enumeration kernels disagree\n");
      return 1;
    }
    row("irreducible scan (m=16)", serial, parallel);
  }

  return 0;
}
