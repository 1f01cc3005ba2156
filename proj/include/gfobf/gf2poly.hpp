#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gfobf {

/// Polynomial over GF(2). Bit q of the packed words holds the coefficient of
/// x^q, so bit 0 is the constant term. The word vector carries no trailing
/// zero words; the zero polynomial is the empty vector and has degree -1.
class Poly {
 public:
  Poly() = default;

  static Poly zero() { return Poly(); }
  static Poly one() { return from_bits(1); }
  static Poly monomial(unsigned q);
  /// Low 64 coefficients from a packed word (LSB = constant term).
  static Poly from_bits(std::uint64_t bits);
  /// Accepts "x^4+x^3+1" or a hex coefficient string "0x19" (LSB = constant).
  static Poly parse(std::string_view text);

  /// Degree of the zero polynomial is -1 by convention.
  int degree() const;
  bool coeff(unsigned q) const;
  void set_coeff(unsigned q, bool value);
  bool is_zero() const { return words_.empty(); }
  /// Number of nonzero coefficients.
  unsigned weight() const;
  std::uint64_t low_bits() const { return words_.empty() ? 0 : words_[0]; }

  Poly operator^(const Poly& rhs) const;
  Poly& operator^=(const Poly& rhs);
  /// Multiply by x^k.
  Poly shifted_left(unsigned k) const;

  /// Human form, MSB term first: "x^4+x^3+1"; "0" for the zero polynomial.
  std::string to_string() const;
  /// Hex coefficient string, LSB = constant term: "0x19".
  std::string to_hex() const;

  bool operator==(const Poly&) const = default;
  /// Canonical order: ascending coefficient bit pattern.
  bool operator<(const Poly& rhs) const;

 private:
  void trim();
  std::vector<std::uint64_t> words_;
};

/// Coefficient-wise XOR (GF(2^m) addition).
Poly poly_add(const Poly& a, const Poly& b);
/// Carry-less (schoolbook) product, unreduced.
Poly poly_mul(const Poly& a, const Poly& b);
/// Remainder of carry-less division of a by p. Throws on p == 0.
Poly poly_mod(const Poly& a, const Poly& p);
/// a*b mod p; the golden functional oracle for every multiplier built here.
/// Requires degree(a), degree(b) < degree(p).
Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& p);
Poly poly_gcd(Poly a, Poly b);

/// Fast path for fields up to GF(2^64): p = x^m + p_tail, degree(p_tail) < m.
std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t p_tail,
                       unsigned m);

/// True iff p has no nontrivial factor over GF(2). Dispatches to trial
/// division for small degrees and to the power/gcd test above that; the two
/// routes agree (tested against each other for every degree both cover).
/// Throws on degree < 1.
bool is_irreducible(const Poly& p);
bool is_irreducible_trial_division(const Poly& p);
bool is_irreducible_power_gcd(const Poly& p);

struct PolyShape {
  enum class Kind { trinomial, pentanomial, other };
  Kind kind = Kind::other;
  int a = -1;  // second-highest exponent, when trinomial/pentanomial
};
PolyShape classify_shape(const Poly& p);

enum class PolyFilter { all, trinomial_pentanomial, nist_shape };

constexpr unsigned kMaxEnumerationDegree = 64;

/// All degree-m irreducible polynomials matching the filter, ascending by
/// coefficient bit pattern. nist_shape additionally enforces m - a >= m/2 on
/// the second-highest exponent a. Requires 2 <= m <= kMaxEnumerationDegree.
std::vector<Poly> enumerate_irreducible(unsigned m,
                                        PolyFilter filter = PolyFilter::all);
/// Reference implementation of the scan, kept serial for testing.
std::vector<Poly> enumerate_irreducible_serial(
    unsigned m, PolyFilter filter = PolyFilter::all);
/// Lazy ascending scan that stops after k matches; usable at degrees where a
/// full enumeration would be intractable.
std::vector<Poly> first_irreducible(unsigned m, std::size_t k,
                                    PolyFilter filter = PolyFilter::all);

/// A concrete binary extension field GF(2^m): degree plus its irreducible
/// modulus. make() validates irreducibility and the constant term.
struct FieldSpec {
  unsigned m = 0;
  Poly p;

  static FieldSpec make(const Poly& p);
  bool operator==(const FieldSpec&) const = default;
};

}  // namespace gfobf
