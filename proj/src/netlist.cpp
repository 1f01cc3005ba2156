#include "gfobf/netlist.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace gfobf {

const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::input_a: return "INPUT_A";
    case GateKind::input_b: return "INPUT_B";
    case GateKind::key: return "KEY";
    case GateKind::const0: return "CONST0";
    case GateKind::const1: return "CONST1";
    case GateKind::and_gate: return "AND";
    case GateKind::or_gate: return "OR";
    case GateKind::xor_gate: return "XOR";
    case GateKind::not_gate: return "NOT";
  }
  return "?";
}

std::uint32_t NetlistBuilder::append(GateKind kind, std::uint32_t a,
                                     std::uint32_t b) {
  const auto key = std::make_tuple(static_cast<std::uint8_t>(kind), a, b);
  auto [it, inserted] =
      cache_.emplace(key, static_cast<std::uint32_t>(gates_.size()));
  if (inserted) gates_.push_back(Gate{kind, a, b});
  return it->second;
}

std::uint32_t NetlistBuilder::input_a(unsigned bit) {
  return append(GateKind::input_a, bit, 0);
}
std::uint32_t NetlistBuilder::input_b(unsigned bit) {
  return append(GateKind::input_b, bit, 0);
}
std::uint32_t NetlistBuilder::key(unsigned bit) {
  return append(GateKind::key, bit, 0);
}
std::uint32_t NetlistBuilder::constant(bool value) {
  return append(value ? GateKind::const1 : GateKind::const0, 0, 0);
}

std::uint32_t NetlistBuilder::gate(GateKind kind, std::uint32_t x,
                                   std::uint32_t y) {
  const auto kind_of = [&](std::uint32_t id) { return gates_[id].kind; };
  const auto is0 = [&](std::uint32_t id) {
    return kind_of(id) == GateKind::const0;
  };
  const auto is1 = [&](std::uint32_t id) {
    return kind_of(id) == GateKind::const1;
  };

  switch (kind) {
    case GateKind::not_gate:
      if (is0(x)) return constant(true);
      if (is1(x)) return constant(false);
      if (kind_of(x) == GateKind::not_gate) return gates_[x].a;
      return append(kind, x, 0);
    case GateKind::and_gate:
      if (is0(x) || is0(y)) return constant(false);
      if (is1(x)) return y;
      if (is1(y)) return x;
      if (x == y) return x;
      break;
    case GateKind::or_gate:
      if (is1(x) || is1(y)) return constant(true);
      if (is0(x)) return y;
      if (is0(y)) return x;
      if (x == y) return x;
      break;
    case GateKind::xor_gate:
      if (is0(x)) return y;
      if (is0(y)) return x;
      if (is1(x)) return gate(GateKind::not_gate, y);
      if (is1(y)) return gate(GateKind::not_gate, x);
      if (x == y) return constant(false);
      break;
    default:
      throw std::logic_error("gate: not a logic kind");
  }
  if (x > y) std::swap(x, y);  // commutative kinds get one canonical form
  return append(kind, x, y);
}

std::uint32_t NetlistBuilder::xor_tree(std::vector<std::uint32_t> terms) {
  std::erase_if(terms, [&](std::uint32_t id) {
    return gates_[id].kind == GateKind::const0;
  });
  std::sort(terms.begin(), terms.end());
  // equal terms cancel pairwise
  std::vector<std::uint32_t> live;
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i;
    while (j < terms.size() && terms[j] == terms[i]) ++j;
    if ((j - i) % 2) live.push_back(terms[i]);
    i = j;
  }
  if (live.empty()) return constant(false);
  while (live.size() > 1) {
    std::vector<std::uint32_t> next;
    for (std::size_t i = 0; i + 1 < live.size(); i += 2)
      next.push_back(gate(GateKind::xor_gate, live[i], live[i + 1]));
    if (live.size() % 2) next.push_back(live.back());
    live = std::move(next);
  }
  return live[0];
}

void NetlistBuilder::set_outputs(std::vector<std::uint32_t> z) {
  outputs_ = std::move(z);
}

Netlist NetlistBuilder::build(unsigned width_a, unsigned width_b,
                              unsigned key_bits) {
  Netlist n;
  n.width_a = width_a;
  n.width_b = width_b;
  n.key_bits = key_bits;
  n.gates = gates_;
  n.outputs = outputs_;
  return n;
}

namespace {

struct SumNodes {
  std::vector<std::uint32_t> s;  // node of each partial-product sum
};

SumNodes lower_sums(NetlistBuilder& nb, const SumVector& sums) {
  SumNodes out;
  out.s.resize(sums.terms.size());
  for (std::size_t q = 0; q < sums.terms.size(); ++q) {
    std::vector<std::uint32_t> pps;
    for (const SumTerm& t : sums.terms[q]) {
      // sequenced explicitly: node ids must not depend on the compiler's
      // argument evaluation order
      const std::uint32_t ar = nb.input_a(t.r);
      const std::uint32_t bc = nb.input_b(t.c);
      pps.push_back(nb.gate(GateKind::and_gate, ar, bc));
    }
    out.s[q] = nb.xor_tree(std::move(pps));
  }
  return out;
}

}  // namespace

Netlist lower(const MultStructure& st) {
  NetlistBuilder nb;
  const SumNodes sums = lower_sums(nb, st.sums);
  const unsigned m = st.grid.m;
  std::vector<std::uint32_t> z;
  for (unsigned col = 0; col < m; ++col) {
    std::vector<std::uint32_t> terms;
    for (unsigned term : st.matrix.column_terms(col))
      terms.push_back(sums.s[term]);
    z.push_back(nb.xor_tree(std::move(terms)));
  }
  nb.set_outputs(std::move(z));
  return nb.build(m, m, 0);
}

Netlist lower(const ObfMatrix& mx, const SumVector& sums) {
  NetlistBuilder nb;
  const SumNodes sum_nodes = lower_sums(nb, sums);
  const unsigned m = mx.m;

  std::unordered_map<ExprId, std::uint32_t> memo;
  const auto lower_expr = [&](auto&& self, ExprId id) -> std::uint32_t {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const CellExpr& e = mx.pool->at(id);
    std::uint32_t node = 0;
    switch (e.kind) {
      case CellExpr::Kind::zero:
        node = nb.constant(false);
        break;
      case CellExpr::Kind::sum:
        node = sum_nodes.s[static_cast<unsigned>(e.sym)];
        break;
      case CellExpr::Kind::key_mux:
      case CellExpr::Kind::fused_mux: {
        const bool inv = mx.key.invert.empty() ? false
                                               : mx.key.invert[e.round - 1];
        std::uint32_t sel = nb.key(e.round - 1);
        if (inv) sel = nb.gate(GateKind::not_gate, sel);
        const std::uint32_t t = self(self, e.on_true);
        const std::uint32_t f = self(self, e.on_false);
        const std::uint32_t keep = nb.gate(GateKind::and_gate, t, sel);
        const std::uint32_t nsel = nb.gate(GateKind::not_gate, sel);
        const std::uint32_t swap = nb.gate(GateKind::and_gate, f, nsel);
        node = nb.gate(GateKind::or_gate, keep, swap);
        break;
      }
    }
    memo.emplace(id, node);
    return node;
  };

  std::vector<std::uint32_t> z;
  for (unsigned col = 0; col < m; ++col) {
    std::vector<std::uint32_t> terms;
    for (unsigned row = 0; row < m; ++row)
      terms.push_back(lower_expr(lower_expr, mx.cells[row][col]));
    z.push_back(nb.xor_tree(std::move(terms)));
  }
  nb.set_outputs(std::move(z));
  return nb.build(m, m, mx.key.rounds);
}

Netlist compact(const Netlist& n) {
  std::vector<bool> live(n.gates.size(), false);
  std::vector<std::uint32_t> stack = n.outputs;
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (live[id]) continue;
    live[id] = true;
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::and_gate:
      case GateKind::or_gate:
      case GateKind::xor_gate:
        stack.push_back(g.a);
        stack.push_back(g.b);
        break;
      case GateKind::not_gate:
        stack.push_back(g.a);
        break;
      default:
        break;
    }
  }

  Netlist out;
  out.width_a = n.width_a;
  out.width_b = n.width_b;
  out.key_bits = n.key_bits;
  std::vector<std::uint32_t> remap(n.gates.size(), 0);
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    if (!live[id]) continue;
    Gate g = n.gates[id];
    if (g.kind == GateKind::and_gate || g.kind == GateKind::or_gate ||
        g.kind == GateKind::xor_gate) {
      g.a = remap[g.a];
      g.b = remap[g.b];
    } else if (g.kind == GateKind::not_gate) {
      g.a = remap[g.a];
    }
    remap[id] = static_cast<std::uint32_t>(out.gates.size());
    out.gates.push_back(g);
  }
  for (std::uint32_t o : n.outputs) out.outputs.push_back(remap[o]);
  return out;
}

Netlist resolve_key(const Netlist& n, const std::vector<bool>& key) {
  if (key.size() < n.key_bits)
    throw std::invalid_argument("resolve_key: missing key bit");
  NetlistBuilder nb;
  std::vector<std::uint32_t> remap(n.gates.size(), 0);
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::input_a: remap[id] = nb.input_a(g.a); break;
      case GateKind::input_b: remap[id] = nb.input_b(g.a); break;
      case GateKind::key: remap[id] = nb.constant(key[g.a]); break;
      case GateKind::const0: remap[id] = nb.constant(false); break;
      case GateKind::const1: remap[id] = nb.constant(true); break;
      case GateKind::not_gate:
        remap[id] = nb.gate(GateKind::not_gate, remap[g.a]);
        break;
      default:
        remap[id] = nb.gate(g.kind, remap[g.a], remap[g.b]);
        break;
    }
  }
  std::vector<std::uint32_t> z;
  for (std::uint32_t o : n.outputs) z.push_back(remap[o]);
  nb.set_outputs(std::move(z));
  return compact(nb.build(n.width_a, n.width_b, 0));
}

double CostModel::area(GateKind k) const {
  switch (k) {
    case GateKind::and_gate: return area_and;
    case GateKind::or_gate: return area_or;
    case GateKind::xor_gate: return area_xor;
    case GateKind::not_gate: return area_not;
    default: return 0.0;
  }
}

double CostModel::delay(GateKind k) const {
  switch (k) {
    case GateKind::and_gate: return delay_and;
    case GateKind::or_gate: return delay_or;
    case GateKind::xor_gate: return delay_xor;
    case GateKind::not_gate: return delay_not;
    default: return 0.0;
  }
}

CostReport cost(const Netlist& n, const CostModel& model) {
  CostReport r;
  r.key_bits = n.key_bits;
  std::vector<double> depth(n.gates.size(), 0.0);
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    r.area += model.area(g.kind);
    ++r.gates[gate_kind_name(g.kind)];
    switch (g.kind) {
      case GateKind::and_gate:
      case GateKind::or_gate:
      case GateKind::xor_gate:
        depth[id] = model.delay(g.kind) + std::max(depth[g.a], depth[g.b]);
        break;
      case GateKind::not_gate:
        depth[id] = model.delay(g.kind) + depth[g.a];
        break;
      default:
        break;
    }
  }
  for (std::uint32_t o : n.outputs) r.delay = std::max(r.delay, depth[o]);
  return r;
}

std::string CostReport::to_json() const {
  nlohmann::json j;
  j["area"] = area;
  j["delay"] = delay;
  nlohmann::json g = nlohmann::json::object();
  for (const auto& [kind, count] : gates) g[kind] = count;
  j["gates"] = g;
  j["delta_count"] = delta_count;
  j["reduced_delta_count"] = reduced_delta_count;
  j["key_bits"] = key_bits;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> net_names(const Netlist& n) {
  std::vector<std::string> names(n.gates.size());
  std::size_t next = 0;
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::input_a:
        names[id] = "A[" + std::to_string(g.a) + "]";
        break;
      case GateKind::input_b:
        names[id] = "B[" + std::to_string(g.a) + "]";
        break;
      case GateKind::key:
        names[id] = "P[" + std::to_string(g.a) + "]";
        break;
      default:
        names[id] = "n" + std::to_string(next++);
        break;
    }
  }
  return names;
}

}  // namespace

std::string emit_verilog(const Netlist& n, const std::string& module_name) {
  if (n.outputs.empty())
    throw std::invalid_argument("emit_verilog: netlist has no outputs");
  const auto names = net_names(n);
  std::string v;
  v += "module " + module_name + " (A, B, " +
       (n.locked() ? std::string("P, ") : std::string()) + "Z);\n";
  v += "  input [" + std::to_string(n.width_a - 1) + ":0] A;\n";
  v += "  input [" + std::to_string(n.width_b - 1) + ":0] B;\n";
  if (n.locked())
    v += "  input [" + std::to_string(n.key_bits - 1) + ":0] P;\n";
  v += "  output [" + std::to_string(n.outputs.size() - 1) + ":0] Z;\n";
  for (std::uint32_t id = 0; id < n.gates.size(); ++id)
    if (names[id][0] == 'n') v += "  wire " + names[id] + ";\n";
  for (std::uint32_t id = 0; id < n.gates.size(); ++id) {
    const Gate& g = n.gates[id];
    switch (g.kind) {
      case GateKind::const0:
        v += "  assign " + names[id] + " = 1'b0;\n";
        break;
      case GateKind::const1:
        v += "  assign " + names[id] + " = 1'b1;\n";
        break;
      case GateKind::not_gate:
        v += "  assign " + names[id] + " = ~" + names[g.a] + ";\n";
        break;
      case GateKind::and_gate:
      case GateKind::or_gate:
      case GateKind::xor_gate: {
        const char* op = g.kind == GateKind::and_gate   ? " & "
                         : g.kind == GateKind::or_gate ? " | "
                                                        : " ^ ";
        v += "  assign " + names[id] + " = " + names[g.a] + op + names[g.b] +
             ";\n";
        break;
      }
      default:
        break;
    }
  }
  for (std::size_t i = 0; i < n.outputs.size(); ++i)
    v += "  assign Z[" + std::to_string(i) + "] = " + names[n.outputs[i]] +
         ";\n";
  v += "endmodule\n";
  return v;
}

std::string emit_verilog_resolved(const Netlist& n,
                                  const std::vector<bool>& key,
                                  const std::string& module_name) {
  return emit_verilog(resolve_key(n, key), module_name);
}

}  // namespace gfobf
