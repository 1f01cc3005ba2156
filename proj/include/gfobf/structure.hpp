#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gfobf/gf2poly.hpp"

namespace gfobf {

/// The m-by-m grid of symbolic partial products a_r * b_c. The grid depends
/// only on m, never on the modulus.
struct PartialProductGrid {
  unsigned m = 0;
};

struct SumTerm {
  unsigned r = 0, c = 0;
  bool operator==(const SumTerm&) const = default;
};

/// s[q] = XOR of all partial products a_r*b_c with r + c == q, for
/// 0 <= q <= 2m-2. Kept symbolic so lowering can pick its own tree shape.
struct SumVector {
  unsigned m = 0;
  std::vector<std::vector<SumTerm>> terms;
};

/// Symbolic reduction structure: cell (row, col) is either empty (-1) or the
/// index i of sum term s_i. Row 0 carries the unreduced terms s_0..s_{m-1};
/// row r >= 1 places s_{m-1+r} in column q iff x^q appears in
/// x^{m-1+r} mod p. Output bit z_col is the XOR of its column's cells.
class ReductionMatrix {
 public:
  unsigned m = 0;
  FieldSpec field;
  std::vector<std::vector<int>> cells;  // [row][col], -1 = empty

  int cell(unsigned row, unsigned col) const { return cells[row][col]; }
  /// Sum indices contributing to output bit `col`, in ascending row order.
  std::vector<unsigned> column_terms(unsigned col) const;
  /// Printable form, most significant column on the left.
  std::string dump() const;
};

struct MultStructure {
  PartialProductGrid grid;
  SumVector sums;
  ReductionMatrix matrix;
};

/// Builds the two-stage multiplier structure for the given field. The grid
/// and sum vector are identical for every modulus of the same degree; only
/// the reduction matrix depends on the polynomial. Rejects m < 2: a field of
/// degree 1 has no reduction structure.
MultStructure gen_structure(const FieldSpec& field);

/// Substitutes concrete operands into the structure and folds the column
/// XORs. Agrees with poly_mulmod on every input pair.
Poly eval_structure(const MultStructure& s, const Poly& a, const Poly& b);

/// Display coordinates are 1-based with column 1 = most significant output;
/// canonical coordinates are 0-based with column q = output bit z_q.
inline std::pair<unsigned, unsigned> to_display_pos(unsigned row, unsigned col,
                                                    unsigned m) {
  return {row + 1, m - col};
}
inline std::pair<unsigned, unsigned> from_display_pos(unsigned row,
                                                      unsigned col,
                                                      unsigned m) {
  return {row - 1, m - col};
}

}  // namespace gfobf
