#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "gfobf/structure.hpp"

namespace gfobf {

using ExprId = std::uint32_t;

/// One cell of an obfuscated reduction structure. A key_mux realizes
/// on_true * p_round + on_false * !p_round for key bit p_round; a fused
/// mux is the same gate-level shape but stands in for two column terms
/// folded into one (the non-equivalent-term reduction).
struct CellExpr {
  enum class Kind : std::uint8_t { zero, sum, key_mux, fused_mux };
  Kind kind = Kind::zero;
  int sym = -1;       // sum index when kind == sum
  unsigned round = 0;  // key round when mux, 1-based
  ExprId on_true = 0;
  ExprId on_false = 0;
  bool operator==(const CellExpr&) const = default;
};

/// Append-only hash-consing pool: structurally equal expressions always get
/// the same id, so equal obfuscation terms are merged by construction and
/// lowering instantiates each distinct term once. Id 0 is the zero cell.
class ExprPool {
 public:
  ExprPool();
  ExprId zero() const { return 0; }
  ExprId sum(int sym);
  ExprId key_mux(unsigned round, ExprId on_true, ExprId on_false);
  ExprId fused_mux(unsigned round, ExprId on_true, ExprId on_false);
  const CellExpr& at(ExprId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  /// Largest mux round appearing anywhere under id (0 if none).
  unsigned max_round(ExprId id) const;

 private:
  ExprId intern(const CellExpr& e);
  std::vector<CellExpr> nodes_;
  std::map<std::tuple<std::uint8_t, int, unsigned, ExprId, ExprId>, ExprId>
      intern_;
};

/// Key schedule of a chained design: round i contributes bit p_i. With
/// default polarity the true function is selected by the all-ones key; an
/// inverted round flips the physical sense of its bit.
struct KeySpec {
  unsigned rounds = 0;
  std::vector<std::string> names;   // "p1".."pn"
  std::vector<bool> invert;         // physical polarity per round
  std::vector<bool> true_key;       // assignment selecting class 0
  std::vector<int> class_map;       // [key value] -> class, LSB = round 1
  std::vector<Poly> class_polys;    // class index -> modulus; 0 = true

  /// Effective selector of round r (1-based) under a physical assignment:
  /// true means "keep the previously accumulated structure".
  bool effective(const std::vector<bool>& key, unsigned r) const {
    return key[r - 1] != (invert.empty() ? false : invert[r - 1]);
  }
  int class_of(const std::vector<bool>& key) const;
};

struct ChainOptions {
  std::vector<bool> invert;  // per-round polarity; empty = all default
  /// Skip materializing the class map (bulk order exploration only needs
  /// the structure and the true key).
  bool compute_class_map = true;
};

/// Obfuscated reduction structure plus its provenance and key schedule.
class ObfMatrix {
 public:
  unsigned m = 0;
  std::shared_ptr<ExprPool> pool;
  std::vector<std::vector<ExprId>> cells;  // [row][col]
  FieldSpec true_field;
  std::vector<FieldSpec> obf_fields;  // merge order; round i added [i-1]
  KeySpec key;

  static ObfMatrix from_plain(const ReductionMatrix& rm);

  /// Count of distinct mux / fused-mux nodes reachable from the cells.
  std::size_t mux_count() const;
  std::size_t fused_count() const;
  std::string dump() const;
};

/// Positions where the two matrices' cells are not structurally identical,
/// in row-major order. Matrices may come from different pools.
std::vector<std::pair<unsigned, unsigned>> diff_matrices(
    const ObfMatrix& a, const ObfMatrix& b);
std::vector<std::pair<unsigned, unsigned>> diff_matrices(
    const ReductionMatrix& a, const ReductionMatrix& b);

/// One obfuscation step: where `current` and `next` differ, the cell becomes
/// a key mux keeping `current` on the effective-1 branch. `round` must be
/// the next unused round index.
ObfMatrix obfuscate_pair(const ObfMatrix& current, const ReductionMatrix& next,
                         unsigned round, const ChainOptions& opts = {});

/// Folds obfuscate_pair over `others` starting from the plain structure of
/// `true_p`. The resulting key schedule's class map is computed by
/// simulation and cross-checked against the chain-structure rule.
ObfMatrix obfuscate_chain(const Poly& true_p, const std::vector<Poly>& others,
                          unsigned m, const ChainOptions& opts = {});

/// Non-equivalent term reduction: within a column, a same-round pair
/// {sum*p, sum'*!p} folds into one fused mux, trading a column XOR for an
/// OR. Equal terms are already shared by the pool. Function is preserved
/// exactly and re-checked by simulation on a sample.
ObfMatrix optimize(const ObfMatrix& in);

/// Evaluates the obfuscated structure under a concrete key assignment.
Poly eval_matrix(const ObfMatrix& mx, const SumVector& sums, const Poly& a,
                 const Poly& b, const std::vector<bool>& key);

}  // namespace gfobf
