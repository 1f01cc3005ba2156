#include "gfobf/obfuscate.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "gfobf/rng.hpp"

namespace gfobf {

ExprPool::ExprPool() {
  nodes_.push_back(CellExpr{});  // id 0 = zero
}

ExprId ExprPool::intern(const CellExpr& e) {
  const auto key = std::make_tuple(static_cast<std::uint8_t>(e.kind), e.sym,
                                   e.round, e.on_true, e.on_false);
  auto [it, inserted] =
      intern_.emplace(key, static_cast<ExprId>(nodes_.size()));
  if (inserted) nodes_.push_back(e);
  return it->second;
}

ExprId ExprPool::sum(int sym) {
  CellExpr e;
  e.kind = CellExpr::Kind::sum;
  e.sym = sym;
  return intern(e);
}

ExprId ExprPool::key_mux(unsigned round, ExprId on_true, ExprId on_false) {
  CellExpr e;
  e.kind = CellExpr::Kind::key_mux;
  e.round = round;
  e.on_true = on_true;
  e.on_false = on_false;
  return intern(e);
}

ExprId ExprPool::fused_mux(unsigned round, ExprId on_true, ExprId on_false) {
  CellExpr e;
  e.kind = CellExpr::Kind::fused_mux;
  e.round = round;
  e.on_true = on_true;
  e.on_false = on_false;
  return intern(e);
}

unsigned ExprPool::max_round(ExprId id) const {
  const CellExpr& e = nodes_[id];
  if (e.kind == CellExpr::Kind::zero || e.kind == CellExpr::Kind::sum)
    return 0;
  return std::max({e.round, max_round(e.on_true), max_round(e.on_false)});
}

int KeySpec::class_of(const std::vector<bool>& key) const {
  for (unsigned r = rounds; r >= 1; --r)
    if (!effective(key, r)) return static_cast<int>(r);
  return 0;
}

namespace {

bool expr_equal(const ExprPool& pa, ExprId ia, const ExprPool& pb,
                ExprId ib) {
  if (&pa == &pb) return ia == ib;  // interned: same pool, same id
  const CellExpr& ea = pa.at(ia);
  const CellExpr& eb = pb.at(ib);
  if (ea.kind != eb.kind) return false;
  switch (ea.kind) {
    case CellExpr::Kind::zero:
      return true;
    case CellExpr::Kind::sum:
      return ea.sym == eb.sym;
    default:
      return ea.round == eb.round &&
             expr_equal(pa, ea.on_true, pb, eb.on_true) &&
             expr_equal(pa, ea.on_false, pb, eb.on_false);
  }
}

int eval_expr(const ExprPool& pool, ExprId id, const std::vector<int>& sums,
              const KeySpec& key_spec, const std::vector<bool>& key,
              std::vector<std::int8_t>& memo) {
  if (memo[id] >= 0) return memo[id];
  const CellExpr& e = pool.at(id);
  int v = 0;
  switch (e.kind) {
    case CellExpr::Kind::zero:
      v = 0;
      break;
    case CellExpr::Kind::sum:
      v = sums[static_cast<unsigned>(e.sym)];
      break;
    default:
      v = key_spec.effective(key, e.round)
              ? eval_expr(pool, e.on_true, sums, key_spec, key, memo)
              : eval_expr(pool, e.on_false, sums, key_spec, key, memo);
      break;
  }
  memo[id] = static_cast<std::int8_t>(v);
  return v;
}

std::vector<bool> key_bits_of(std::uint64_t value, unsigned rounds) {
  std::vector<bool> bits(rounds);
  for (unsigned i = 0; i < rounds; ++i) bits[i] = (value >> i) & 1;
  return bits;
}

void collect_mux_ids(const ObfMatrix& mx, std::set<ExprId>& muxes,
                     std::set<ExprId>& fused) {
  std::set<ExprId> seen;
  std::vector<ExprId> stack;
  for (const auto& row : mx.cells)
    for (ExprId id : row) stack.push_back(id);
  while (!stack.empty()) {
    const ExprId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    const CellExpr& e = mx.pool->at(id);
    if (e.kind == CellExpr::Kind::key_mux) muxes.insert(id);
    if (e.kind == CellExpr::Kind::fused_mux) fused.insert(id);
    if (e.kind == CellExpr::Kind::key_mux ||
        e.kind == CellExpr::Kind::fused_mux) {
      stack.push_back(e.on_true);
      stack.push_back(e.on_false);
    }
  }
}

}  // namespace

ObfMatrix ObfMatrix::from_plain(const ReductionMatrix& rm) {
  ObfMatrix mx;
  mx.m = rm.m;
  mx.pool = std::make_shared<ExprPool>();
  mx.true_field = rm.field;
  mx.cells.assign(rm.m, std::vector<ExprId>(rm.m, 0));
  for (unsigned row = 0; row < rm.m; ++row)
    for (unsigned col = 0; col < rm.m; ++col)
      if (rm.cells[row][col] >= 0)
        mx.cells[row][col] = mx.pool->sum(rm.cells[row][col]);
  mx.key.class_map = {0};
  mx.key.class_polys = {rm.field.p};
  return mx;
}

std::size_t ObfMatrix::mux_count() const {
  std::set<ExprId> muxes, fused;
  collect_mux_ids(*this, muxes, fused);
  return muxes.size();
}

std::size_t ObfMatrix::fused_count() const {
  std::set<ExprId> muxes, fused;
  collect_mux_ids(*this, muxes, fused);
  return fused.size();
}

std::string ObfMatrix::dump() const {
  std::string out;
  for (unsigned row = 0; row < m; ++row) {
    for (unsigned col = m; col-- > 0;) {
      const CellExpr& e = pool->at(cells[row][col]);
      switch (e.kind) {
        case CellExpr::Kind::zero:
          out += "0";
          break;
        case CellExpr::Kind::sum:
          out += "s" + std::to_string(e.sym);
          break;
        case CellExpr::Kind::key_mux:
          out += "d" + std::to_string(e.round);
          break;
        case CellExpr::Kind::fused_mux:
          out += "f" + std::to_string(e.round);
          break;
      }
      out += (col == 0) ? '\n' : ' ';
    }
  }
  return out;
}

std::vector<std::pair<unsigned, unsigned>> diff_matrices(const ObfMatrix& a,
                                                         const ObfMatrix& b) {
  if (a.m != b.m)
    throw std::invalid_argument("diff_matrices: dimension mismatch");
  std::vector<std::pair<unsigned, unsigned>> out;
  for (unsigned row = 0; row < a.m; ++row)
    for (unsigned col = 0; col < a.m; ++col)
      if (!expr_equal(*a.pool, a.cells[row][col], *b.pool,
                      b.cells[row][col]))
        out.emplace_back(row, col);
  return out;
}

std::vector<std::pair<unsigned, unsigned>> diff_matrices(
    const ReductionMatrix& a, const ReductionMatrix& b) {
  if (a.m != b.m)
    throw std::invalid_argument("diff_matrices: dimension mismatch");
  std::vector<std::pair<unsigned, unsigned>> out;
  for (unsigned row = 0; row < a.m; ++row)
    for (unsigned col = 0; col < a.m; ++col)
      if (a.cells[row][col] != b.cells[row][col]) out.emplace_back(row, col);
  return out;
}

Poly eval_matrix(const ObfMatrix& mx, const SumVector& sums, const Poly& a,
                 const Poly& b, const std::vector<bool>& key) {
  const unsigned m = mx.m;
  if (a.degree() >= static_cast<int>(m) || b.degree() >= static_cast<int>(m))
    throw std::invalid_argument("eval_matrix: operand out of range");
  if (key.size() < mx.key.rounds)
    throw std::invalid_argument("eval_matrix: key assignment incomplete");

  std::vector<int> sum_bits(2 * m - 1, 0);
  for (unsigned q = 0; q < 2 * m - 1; ++q)
    for (const SumTerm& t : sums.terms[q])
      sum_bits[q] ^= (a.coeff(t.r) && b.coeff(t.c)) ? 1 : 0;

  std::vector<std::int8_t> memo(mx.pool->size(), -1);
  Poly z;
  for (unsigned col = 0; col < m; ++col) {
    int bit = 0;
    for (unsigned row = 0; row < m; ++row)
      bit ^= eval_expr(*mx.pool, mx.cells[row][col], sum_bits, mx.key, key,
                       memo);
    if (bit) z.set_coeff(col, true);
  }
  return z;
}

namespace {

ObfMatrix obfuscate_pair_raw(const ObfMatrix& current,
                             const ReductionMatrix& next, unsigned round,
                             const ChainOptions& opts) {
  if (current.m != next.m)
    throw std::invalid_argument("obfuscate_pair: dimension mismatch");
  if (round != current.key.rounds + 1)
    throw std::invalid_argument(
        "obfuscate_pair: round ids must be fresh and consecutive");
  for (const FieldSpec& f : current.obf_fields)
    if (f.p == next.field.p)
      throw std::invalid_argument("obfuscate_pair: duplicate polynomial");

  ObfMatrix out = current;  // shares the append-only pool
  for (unsigned row = 0; row < out.m; ++row)
    for (unsigned col = 0; col < out.m; ++col) {
      const int nc = next.cells[row][col];
      const ExprId next_id = nc < 0 ? out.pool->zero() : out.pool->sum(nc);
      const ExprId cur_id = out.cells[row][col];
      if (cur_id != next_id)
        out.cells[row][col] = out.pool->key_mux(round, cur_id, next_id);
    }
  out.obf_fields.push_back(next.field);
  out.key.rounds = round;
  out.key.names.push_back("p" + std::to_string(round));
  const bool inv =
      round - 1 < opts.invert.size() ? opts.invert[round - 1] : false;
  out.key.invert.push_back(inv);
  out.key.true_key.push_back(!inv);  // effective one keeps the true branch
  return out;
}

// Computes the class map by simulation: each key value is matched against
// every class polynomial on a growing deterministic sample until exactly one
// candidate survives. The survivor must equal the chain-structure rule.
void finalize_keyspec(ObfMatrix& mx, bool compute_class_map = true) {
  KeySpec& ks = mx.key;
  ks.class_polys.assign(1, mx.true_field.p);
  for (const FieldSpec& f : mx.obf_fields) ks.class_polys.push_back(f.p);

  if (!compute_class_map || ks.rounds > 16) {
    ks.class_map.clear();  // skipped or too large to materialize
    return;
  }

  const SumVector sums = gen_structure(mx.true_field).sums;
  const unsigned m = mx.m;
  auto rng = make_rng(0xC1A55, m);
  std::vector<std::pair<Poly, Poly>> sample;
  const std::uint64_t mask =
      (m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  sample.emplace_back(Poly::zero(), Poly::zero());
  sample.emplace_back(Poly::one(), Poly::one());
  sample.emplace_back(Poly::from_bits(mask), Poly::from_bits(mask));
  for (int i = 0; i < 29; ++i)
    sample.emplace_back(Poly::from_bits(rng() & mask),
                        Poly::from_bits(rng() & mask));

  ks.class_map.assign(std::size_t{1} << ks.rounds, -1);
  for (std::uint64_t kv = 0; kv < (std::uint64_t{1} << ks.rounds); ++kv) {
    const std::vector<bool> key = key_bits_of(kv, ks.rounds);
    std::vector<int> survivors;
    for (std::size_t c = 0; c < ks.class_polys.size(); ++c)
      survivors.push_back(static_cast<int>(c));
    // survivors of equal polynomials can never be separated; stop once the
    // remaining candidates all denote the same function
    const auto settled = [&] {
      const Poly& first =
          ks.class_polys[static_cast<std::size_t>(survivors.front())];
      return std::all_of(survivors.begin(), survivors.end(), [&](int c) {
        return ks.class_polys[static_cast<std::size_t>(c)] == first;
      });
    };
    std::size_t next_sample = 0;
    while (next_sample < sample.size() || !settled()) {
      if (next_sample == sample.size()) {
        if (sample.size() > 4096)
          throw std::logic_error("class map: sample failed to separate");
        sample.emplace_back(Poly::from_bits(rng() & mask),
                            Poly::from_bits(rng() & mask));
      }
      const auto& [a, b] = sample[next_sample++];
      const Poly got = eval_matrix(mx, sums, a, b, key);
      std::erase_if(survivors, [&](int c) {
        return poly_mulmod(a, b, ks.class_polys[static_cast<std::size_t>(c)]) !=
               got;
      });
      if (survivors.empty())
        throw std::logic_error("class map: key matches no candidate");
    }
    const int rule = ks.class_of(key);
    if (std::find(survivors.begin(), survivors.end(), rule) ==
        survivors.end())
      throw std::logic_error("class map: simulation disagrees with the "
                             "chain-structure rule");
    ks.class_map[kv] = rule;
  }
}

}  // namespace

ObfMatrix obfuscate_pair(const ObfMatrix& current, const ReductionMatrix& next,
                         unsigned round, const ChainOptions& opts) {
  ObfMatrix out = obfuscate_pair_raw(current, next, round, opts);
  finalize_keyspec(out);
  return out;
}

ObfMatrix obfuscate_chain(const Poly& true_p, const std::vector<Poly>& others,
                          unsigned m, const ChainOptions& opts) {
  std::set<Poly> seen{true_p};
  for (const Poly& p : others)
    if (!seen.insert(p).second)
      throw std::invalid_argument("obfuscate_chain: duplicate polynomial " +
                                  p.to_string());

  const FieldSpec true_field = FieldSpec::make(true_p);
  if (true_field.m != m)
    throw std::invalid_argument("obfuscate_chain: degree mismatch");

  ObfMatrix acc = ObfMatrix::from_plain(gen_structure(true_field).matrix);
  unsigned round = 1;
  for (const Poly& p : others) {
    const FieldSpec f = FieldSpec::make(p);
    if (f.m != m)
      throw std::invalid_argument("obfuscate_chain: degree mismatch for " +
                                  p.to_string());
    acc = obfuscate_pair_raw(acc, gen_structure(f).matrix, round++, opts);
  }
  finalize_keyspec(acc, opts.compute_class_map);
  return acc;
}

ObfMatrix optimize(const ObfMatrix& in) {
  ObfMatrix out = in;

  for (unsigned col = 0; col < out.m; ++col) {
    // same-round single-sum muxes of opposite polarity, by ascending row
    std::map<unsigned, std::vector<unsigned>> keep_rows, swap_rows;
    for (unsigned row = 0; row < out.m; ++row) {
      const CellExpr& e = out.pool->at(out.cells[row][col]);
      if (e.kind != CellExpr::Kind::key_mux) continue;
      const CellExpr& t = out.pool->at(e.on_true);
      const CellExpr& f = out.pool->at(e.on_false);
      if (t.kind == CellExpr::Kind::sum && f.kind == CellExpr::Kind::zero)
        keep_rows[e.round].push_back(row);
      else if (t.kind == CellExpr::Kind::zero &&
               f.kind == CellExpr::Kind::sum)
        swap_rows[e.round].push_back(row);
    }
    for (auto& [round, keeps] : keep_rows) {
      auto it = swap_rows.find(round);
      if (it == swap_rows.end()) continue;
      auto& swaps = it->second;
      const std::size_t pairs = std::min(keeps.size(), swaps.size());
      for (std::size_t i = 0; i < pairs; ++i) {
        const unsigned row_keep = keeps[i];
        const unsigned row_swap = swaps[i];
        const CellExpr& ek = out.pool->at(out.cells[row_keep][col]);
        const CellExpr& es = out.pool->at(out.cells[row_swap][col]);
        const ExprId fused =
            out.pool->fused_mux(round, ek.on_true, es.on_false);
        const unsigned lo = std::min(row_keep, row_swap);
        const unsigned hi = std::max(row_keep, row_swap);
        out.cells[lo][col] = fused;
        out.cells[hi][col] = out.pool->zero();
      }
    }
  }

  // light equivalence check against the input matrix; all keys when the key
  // space is tiny, a fixed sample of keys otherwise
  if (in.key.rounds <= 20) {
    const SumVector sums = gen_structure(in.true_field).sums;
    auto rng = make_rng(0x0CA7, in.m);
    const std::uint64_t mask =
        (in.m >= 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << in.m) - 1;
    const std::uint64_t key_space = std::uint64_t{1} << in.key.rounds;
    std::vector<std::uint64_t> key_values;
    if (key_space <= 16) {
      for (std::uint64_t kv = 0; kv < key_space; ++kv)
        key_values.push_back(kv);
    } else {
      key_values.push_back(0);
      key_values.push_back(key_space - 1);
      for (int i = 0; i < 14; ++i) key_values.push_back(rng() % key_space);
    }
    for (const std::uint64_t kv : key_values) {
      const std::vector<bool> key = key_bits_of(kv, in.key.rounds);
      for (int i = 0; i < 16; ++i) {
        const Poly a = Poly::from_bits(rng() & mask);
        const Poly b = Poly::from_bits(rng() & mask);
        if (eval_matrix(out, sums, a, b, key) !=
            eval_matrix(in, sums, a, b, key))
          throw std::logic_error("optimize: rewrite changed the function");
      }
    }
  }
  return out;
}

}  // namespace gfobf
