#include "gfobf/structure.hpp"

#include <stdexcept>

namespace gfobf {

std::vector<unsigned> ReductionMatrix::column_terms(unsigned col) const {
  std::vector<unsigned> out;
  for (unsigned row = 0; row < m; ++row)
    if (cells[row][col] >= 0)
      out.push_back(static_cast<unsigned>(cells[row][col]));
  return out;
}

std::string ReductionMatrix::dump() const {
  std::string out;
  for (unsigned row = 0; row < m; ++row) {
    for (unsigned col = m; col-- > 0;) {
      const int c = cells[row][col];
      out += (c < 0) ? "0" : "s" + std::to_string(c);
      out += (col == 0) ? '\n' : ' ';
    }
  }
  return out;
}

MultStructure gen_structure(const FieldSpec& field) {
  if (field.m < 2)
    throw std::invalid_argument(
        "gen_structure: degree must be >= 2, a degree-1 field has no "
        "reduction structure");
  const unsigned m = field.m;

  MultStructure s;
  s.grid.m = m;

  s.sums.m = m;
  s.sums.terms.resize(2 * m - 1);
  for (unsigned r = 0; r < m; ++r)
    for (unsigned c = 0; c < m; ++c) s.sums.terms[r + c].push_back({r, c});

  s.matrix.m = m;
  s.matrix.field = field;
  s.matrix.cells.assign(m, std::vector<int>(m, -1));
  // terms below degree m pass through unreduced
  for (unsigned col = 0; col < m; ++col)
    s.matrix.cells[0][col] = static_cast<int>(col);
  // row r >= 1 spreads s_{m-1+r} over the residue of x^{m-1+r}
  for (unsigned i = m; i <= 2 * m - 2; ++i) {
    const Poly residue = poly_mod(Poly::monomial(i), field.p);
    const unsigned row = i - m + 1;
    for (unsigned q = 0; q < m; ++q)
      if (residue.coeff(q)) s.matrix.cells[row][q] = static_cast<int>(i);
  }
  return s;
}

Poly eval_structure(const MultStructure& s, const Poly& a, const Poly& b) {
  const unsigned m = s.grid.m;
  if (a.degree() >= static_cast<int>(m) || b.degree() >= static_cast<int>(m))
    throw std::invalid_argument("eval_structure: operand out of range");

  std::vector<int> sums(2 * m - 1, 0);
  for (unsigned q = 0; q < 2 * m - 1; ++q)
    for (const SumTerm& t : s.sums.terms[q])
      sums[q] ^= (a.coeff(t.r) && b.coeff(t.c)) ? 1 : 0;

  Poly z;
  for (unsigned col = 0; col < m; ++col) {
    int bit = 0;
    for (unsigned row = 0; row < m; ++row) {
      const int cell = s.matrix.cells[row][col];
      if (cell >= 0) bit ^= sums[static_cast<unsigned>(cell)];
    }
    if (bit) z.set_coeff(col, true);
  }
  return z;
}

}  // namespace gfobf
