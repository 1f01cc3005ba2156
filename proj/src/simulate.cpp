#include "gfobf/simulate.hpp"

#include <algorithm>

#include <json.hpp>

#include "gfobf/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gfobf {

std::string EquivReport::to_json() const {
  nlohmann::json j;
  j["checked"] = checked;
  j["mismatch_count"] = mismatch_count;
  j["verdict"] = pass() ? "pass" : "fail";
  nlohmann::json list = nlohmann::json::array();
  for (const Mismatch& m : mismatches) {
    list.push_back({{"index", m.index},
                    {"a", m.a.to_hex()},
                    {"b", m.b.to_hex()},
                    {"expected", m.expected.to_hex()},
                    {"actual", m.actual.to_hex()}});
  }
  j["mismatches"] = list;
  return j.dump(2) + "\n";
}

Poly eval_netlist(const Netlist& n, const Poly& a, const Poly& b,
                  const std::vector<bool>& key) {
  if (a.degree() >= static_cast<int>(n.width_a) ||
      b.degree() >= static_cast<int>(n.width_b))
    throw std::invalid_argument("eval_netlist: input width mismatch");
  if (key.size() < n.key_bits)
    throw std::invalid_argument("eval_netlist: missing key bit");

  std::vector<char> v(n.gates.size(), 0);
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::input_a: v[id] = a.coeff(g.a); break;
      case GateKind::input_b: v[id] = b.coeff(g.a); break;
      case GateKind::key: v[id] = key[g.a]; break;
      case GateKind::const0: v[id] = 0; break;
      case GateKind::const1: v[id] = 1; break;
      case GateKind::and_gate: v[id] = v[g.a] & v[g.b]; break;
      case GateKind::or_gate: v[id] = v[g.a] | v[g.b]; break;
      case GateKind::xor_gate: v[id] = v[g.a] ^ v[g.b]; break;
      case GateKind::not_gate: v[id] = !v[g.a]; break;
    }
  }
  Poly z;
  for (std::size_t q = 0; q < n.outputs.size(); ++q)
    if (v[n.outputs[q]]) z.set_coeff(static_cast<unsigned>(q), true);
  return z;
}

namespace {

struct Stimulus {
  std::uint64_t a = 0, b = 0;
};

struct PlanShape {
  std::uint64_t total = 0;
  std::uint64_t mask = 0;
  unsigned m = 0;
};

PlanShape plan_shape(const Netlist& n, const StimulusPlan& plan) {
  PlanShape s;
  s.m = n.width_a;
  if (n.width_b != s.m)
    throw std::invalid_argument("verify_equiv: operand widths differ");
  if (s.m > 64)
    throw std::invalid_argument("verify_equiv: width above 64 unsupported");
  s.mask = (s.m == 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << s.m) - 1;
  if (plan.mode == StimulusPlan::Mode::exhaustive) {
    if (2 * s.m > kExhaustiveInputBitCap)
      throw std::invalid_argument(
          "verify_equiv: exhaustive plan exceeds the input-bit cap");
    s.total = std::uint64_t{1} << (2 * s.m);
  } else {
    s.total = plan.count;
  }
  return s;
}

Stimulus stimulus_at(const StimulusPlan& plan, const PlanShape& shape,
                     std::uint64_t index) {
  if (plan.mode == StimulusPlan::Mode::exhaustive)
    return {index >> shape.m, index & shape.mask};
  switch (index) {
    case 0: return {0, 0};
    case 1: return {1, 1};
    case 2: return {shape.mask, shape.mask};
    default: {
      const std::uint64_t r0 = derive_seed(plan.seed, 2 * index);
      const std::uint64_t r1 = derive_seed(plan.seed, 2 * index + 1);
      return {r0 & shape.mask, r1 & shape.mask};
    }
  }
}

// 64-lane bit-parallel pass over one block of stimuli.
void eval_block(const Netlist& n, const std::vector<Stimulus>& lanes,
                const std::vector<bool>& key,
                std::vector<std::uint64_t>& values) {
  values.assign(n.gates.size(), 0);
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::input_a: {
        std::uint64_t w = 0;
        for (std::size_t l = 0; l < lanes.size(); ++l)
          w |= ((lanes[l].a >> g.a) & 1) << l;
        values[id] = w;
        break;
      }
      case GateKind::input_b: {
        std::uint64_t w = 0;
        for (std::size_t l = 0; l < lanes.size(); ++l)
          w |= ((lanes[l].b >> g.a) & 1) << l;
        values[id] = w;
        break;
      }
      case GateKind::key:
        values[id] = key[g.a] ? ~std::uint64_t{0} : 0;
        break;
      case GateKind::const0: values[id] = 0; break;
      case GateKind::const1: values[id] = ~std::uint64_t{0}; break;
      case GateKind::and_gate: values[id] = values[g.a] & values[g.b]; break;
      case GateKind::or_gate: values[id] = values[g.a] | values[g.b]; break;
      case GateKind::xor_gate: values[id] = values[g.a] ^ values[g.b]; break;
      case GateKind::not_gate: values[id] = ~values[g.a]; break;
    }
  }
}

void merge_report(EquivReport& report, std::vector<Mismatch>& all) {
  std::sort(all.begin(), all.end(),
            [](const Mismatch& x, const Mismatch& y) {
              return x.index < y.index;
            });
  report.mismatch_count = all.size();
  const std::size_t keep = std::min<std::size_t>(all.size(), 16);
  report.mismatches.assign(all.begin(), all.begin() + keep);
}

}  // namespace

EquivReport verify_equiv(const Netlist& n, const std::vector<bool>& key,
                         const Poly& p, const StimulusPlan& plan) {
  if (key.size() < n.key_bits)
    throw std::invalid_argument("verify_equiv: missing key bit");
  const PlanShape shape = plan_shape(n, plan);
  EquivReport report;
  report.checked = shape.total;
  if (shape.total == 0) return report;

  const std::uint64_t p_tail = p.low_bits() & shape.mask;
  const std::uint64_t n_blocks = (shape.total + 63) / 64;
  std::vector<Mismatch> all;

#pragma omp parallel
  {
    std::vector<Mismatch> local;
    std::vector<std::uint64_t> values;
    std::vector<Stimulus> lanes;
#pragma omp for schedule(static)
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(n_blocks);
         ++blk) {
      const std::uint64_t base = static_cast<std::uint64_t>(blk) * 64;
      const std::size_t width =
          static_cast<std::size_t>(std::min<std::uint64_t>(64, shape.total -
                                                                   base));
      lanes.resize(width);
      for (std::size_t l = 0; l < width; ++l)
        lanes[l] = stimulus_at(plan, shape, base + l);
      eval_block(n, lanes, key, values);
      for (std::size_t l = 0; l < width; ++l) {
        const std::uint64_t expected =
            mulmod64(lanes[l].a, lanes[l].b, p_tail, shape.m);
        std::uint64_t actual = 0;
        for (std::size_t q = 0; q < n.outputs.size(); ++q)
          actual |= ((values[n.outputs[q]] >> l) & 1) << q;
        if (actual != expected) {
          Mismatch mm;
          mm.index = base + l;
          mm.a = Poly::from_bits(lanes[l].a);
          mm.b = Poly::from_bits(lanes[l].b);
          mm.expected = Poly::from_bits(expected);
          mm.actual = Poly::from_bits(actual);
          local.push_back(std::move(mm));
        }
      }
    }
#pragma omp critical
    all.insert(all.end(), local.begin(), local.end());
  }

  merge_report(report, all);
  return report;
}

EquivReport verify_equiv_serial(const Netlist& n, const std::vector<bool>& key,
                                const Poly& p, const StimulusPlan& plan) {
  if (key.size() < n.key_bits)
    throw std::invalid_argument("verify_equiv: missing key bit");
  const PlanShape shape = plan_shape(n, plan);
  EquivReport report;
  report.checked = shape.total;
  std::vector<Mismatch> all;
  for (std::uint64_t i = 0; i < shape.total; ++i) {
    const Stimulus st = stimulus_at(plan, shape, i);
    const Poly a = Poly::from_bits(st.a);
    const Poly b = Poly::from_bits(st.b);
    const Poly expected = poly_mulmod(a, b, p);
    const Poly actual = eval_netlist(n, a, b, key);
    if (actual != expected) {
      Mismatch mm;
      mm.index = i;
      mm.a = a;
      mm.b = b;
      mm.expected = expected;
      mm.actual = actual;
      all.push_back(std::move(mm));
    }
  }
  merge_report(report, all);
  return report;
}

}  // namespace gfobf
