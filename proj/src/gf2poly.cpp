#include "gfobf/gf2poly.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <numeric>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gfobf {

void Poly::trim() {
  while (!words_.empty() && words_.back() == 0) words_.pop_back();
}

Poly Poly::monomial(unsigned q) {
  Poly r;
  r.set_coeff(q, true);
  return r;
}

Poly Poly::from_bits(std::uint64_t bits) {
  Poly r;
  if (bits) r.words_.push_back(bits);
  return r;
}

int Poly::degree() const {
  if (words_.empty()) return -1;
  return static_cast<int>((words_.size() - 1) * 64 +
                          (63 - std::countl_zero(words_.back())));
}

bool Poly::coeff(unsigned q) const {
  const std::size_t w = q / 64;
  if (w >= words_.size()) return false;
  return (words_[w] >> (q % 64)) & 1;
}

void Poly::set_coeff(unsigned q, bool value) {
  const std::size_t w = q / 64;
  if (value) {
    if (w >= words_.size()) words_.resize(w + 1, 0);
    words_[w] |= std::uint64_t{1} << (q % 64);
  } else if (w < words_.size()) {
    words_[w] &= ~(std::uint64_t{1} << (q % 64));
    trim();
  }
}

unsigned Poly::weight() const {
  unsigned w = 0;
  for (std::uint64_t word : words_) w += std::popcount(word);
  return w;
}

Poly Poly::operator^(const Poly& rhs) const {
  Poly r = *this;
  r ^= rhs;
  return r;
}

Poly& Poly::operator^=(const Poly& rhs) {
  if (rhs.words_.size() > words_.size()) words_.resize(rhs.words_.size(), 0);
  for (std::size_t i = 0; i < rhs.words_.size(); ++i)
    words_[i] ^= rhs.words_[i];
  trim();
  return *this;
}

Poly Poly::shifted_left(unsigned k) const {
  if (words_.empty() || k == 0) return *this;
  Poly r;
  const unsigned word_shift = k / 64;
  const unsigned bit_shift = k % 64;
  r.words_.assign(words_.size() + word_shift + 1, 0);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    r.words_[i + word_shift] |= words_[i] << bit_shift;
    if (bit_shift)
      r.words_[i + word_shift + 1] |= words_[i] >> (64 - bit_shift);
  }
  r.trim();
  return r;
}

bool Poly::operator<(const Poly& rhs) const {
  if (words_.size() != rhs.words_.size())
    return words_.size() < rhs.words_.size();
  for (std::size_t i = words_.size(); i-- > 0;)
    if (words_[i] != rhs.words_[i]) return words_[i] < rhs.words_[i];
  return false;
}

std::string Poly::to_string() const {
  if (is_zero()) return "0";
  std::string s;
  for (int q = degree(); q >= 0; --q) {
    if (!coeff(static_cast<unsigned>(q))) continue;
    if (!s.empty()) s += '+';
    if (q == 0)
      s += '1';
    else if (q == 1)
      s += 'x';
    else
      s += "x^" + std::to_string(q);
  }
  return s;
}

std::string Poly::to_hex() const {
  if (is_zero()) return "0x0";
  static const char* digits = "0123456789abcdef";
  std::string s;
  const int nibbles = degree() / 4 + 1;
  for (int i = nibbles - 1; i >= 0; --i) {
    unsigned v = 0;
    for (unsigned b = 0; b < 4; ++b)
      v |= static_cast<unsigned>(coeff(static_cast<unsigned>(i) * 4 + b)) << b;
    s += digits[v];
  }
  return "0x" + s;
}

namespace {

[[noreturn]] void parse_fail(std::string_view text) {
  throw std::invalid_argument("cannot parse polynomial: \"" +
                              std::string(text) + "\"");
}

}  // namespace

Poly Poly::parse(std::string_view text) {
  std::string compact;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  if (compact.empty()) parse_fail(text);

  if (compact.size() > 2 && compact[0] == '0' &&
      (compact[1] == 'x' || compact[1] == 'X')) {
    Poly r;
    unsigned q = 0;
    for (std::size_t i = compact.size(); i-- > 2;) {
      const char c = compact[i];
      unsigned v;
      if (c >= '0' && c <= '9')
        v = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f')
        v = static_cast<unsigned>(c - 'a') + 10;
      else if (c >= 'A' && c <= 'F')
        v = static_cast<unsigned>(c - 'A') + 10;
      else
        parse_fail(text);
      for (unsigned b = 0; b < 4; ++b)
        if ((v >> b) & 1) r.set_coeff(q + b, true);
      q += 4;
    }
    return r;
  }

  if (compact == "0") return Poly::zero();

  Poly r;
  std::size_t pos = 0;
  std::set<unsigned> seen;
  while (pos < compact.size()) {
    unsigned exponent;
    if (compact[pos] == '1') {
      exponent = 0;
      ++pos;
    } else if (compact[pos] == 'x' || compact[pos] == 'X') {
      ++pos;
      if (pos < compact.size() && compact[pos] == '^') {
        ++pos;
        const char* begin = compact.data() + pos;
        const char* end = compact.data() + compact.size();
        unsigned value = 0;
        auto [next, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || next == begin) parse_fail(text);
        exponent = value;
        pos += static_cast<std::size_t>(next - begin);
      } else {
        exponent = 1;
      }
    } else {
      parse_fail(text);
    }
    if (!seen.insert(exponent).second) parse_fail(text);  // duplicate term
    r.set_coeff(exponent, true);
    if (pos < compact.size()) {
      if (compact[pos] != '+') parse_fail(text);
      ++pos;
      if (pos == compact.size()) parse_fail(text);  // trailing '+'
    }
  }
  return r;
}

Poly poly_add(const Poly& a, const Poly& b) { return a ^ b; }

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly acc;
  for (int q = 0; q <= a.degree(); ++q)
    if (a.coeff(static_cast<unsigned>(q)))
      acc ^= b.shifted_left(static_cast<unsigned>(q));
  return acc;
}

Poly poly_mod(const Poly& a, const Poly& p) {
  if (p.is_zero())
    throw std::invalid_argument("poly_mod: division by the zero polynomial");
  Poly r = a;
  const int dp = p.degree();
  int dr;
  while ((dr = r.degree()) >= dp)
    r ^= p.shifted_left(static_cast<unsigned>(dr - dp));
  return r;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& p) {
  const int dp = p.degree();
  if (a.degree() >= dp || b.degree() >= dp)
    throw std::invalid_argument("poly_mulmod: operand degree out of range");
  // Interleaved shift-and-reduce; the unreduced product never grows past
  // degree(p), unlike poly_mul followed by poly_mod.
  Poly acc;
  Poly shifted = b;
  for (int q = 0; q <= a.degree(); ++q) {
    if (a.coeff(static_cast<unsigned>(q))) acc ^= shifted;
    shifted = shifted.shifted_left(1);
    if (shifted.degree() == dp) shifted ^= p;
  }
  return acc;
}

Poly poly_gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return a;
}

std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t p_tail,
                       unsigned m) {
  const std::uint64_t top = std::uint64_t{1} << (m - 1);
  const std::uint64_t mask = (m == 64) ? ~std::uint64_t{0} : (top << 1) - 1;
  std::uint64_t r = 0;
  while (a) {
    if (a & 1) r ^= b;
    a >>= 1;
    const bool carry = b & top;
    b = (b << 1) & mask;
    if (carry) b ^= p_tail;  // x^m == p_tail (mod p)
  }
  return r;
}

bool is_irreducible_trial_division(const Poly& p) {
  const int d = p.degree();
  if (d < 1) throw std::invalid_argument("is_irreducible: degree-0 input");
  if (d > 24)
    throw std::invalid_argument("trial division is infeasible at this degree");
  for (int dd = 1; dd <= d / 2; ++dd) {
    // every polynomial of degree dd: x^dd + (any lower bits)
    const std::uint64_t base = std::uint64_t{1} << dd;
    for (std::uint64_t low = 0; low < base; ++low) {
      const Poly divisor = Poly::from_bits(base | low);
      if (poly_mod(p, divisor).is_zero()) return false;
    }
  }
  return true;
}

bool is_irreducible_power_gcd(const Poly& p) {
  const int d = p.degree();
  if (d < 1) throw std::invalid_argument("is_irreducible: degree-0 input");
  if (d == 1) return true;
  const unsigned m = static_cast<unsigned>(d);
  // p is irreducible iff x^(2^m) == x (mod p) and, for each prime q | m,
  // gcd(x^(2^(m/q)) - x, p) == 1.
  const Poly x = Poly::monomial(1);
  std::vector<unsigned> prime_divisors;
  unsigned rest = m;
  for (unsigned q = 2; q * q <= rest; ++q)
    if (rest % q == 0) {
      prime_divisors.push_back(q);
      while (rest % q == 0) rest /= q;
    }
  if (rest > 1) prime_divisors.push_back(rest);

  Poly t = poly_mod(x, p);
  std::vector<Poly> at_step(m + 1);  // x^(2^k) mod p
  at_step[0] = t;
  for (unsigned k = 1; k <= m; ++k) {
    t = poly_mulmod(t, t, p);
    at_step[k] = t;
  }
  if (at_step[m] != poly_mod(x, p)) return false;
  for (unsigned q : prime_divisors) {
    const Poly g = poly_gcd(at_step[m / q] ^ x, p);
    if (g.degree() != 0) return false;
  }
  return true;
}

bool is_irreducible(const Poly& p) {
  if (p.degree() <= 12) return is_irreducible_trial_division(p);
  return is_irreducible_power_gcd(p);
}

PolyShape classify_shape(const Poly& p) {
  PolyShape s;
  const unsigned w = p.weight();
  if (w == 3)
    s.kind = PolyShape::Kind::trinomial;
  else if (w == 5)
    s.kind = PolyShape::Kind::pentanomial;
  else
    return s;
  for (int q = p.degree() - 1; q >= 1; --q)
    if (p.coeff(static_cast<unsigned>(q))) {
      s.a = q;
      break;
    }
  return s;
}

namespace {

bool matches_filter(const Poly& p, PolyFilter filter, unsigned m) {
  if (filter == PolyFilter::all) return true;
  const PolyShape s = classify_shape(p);
  if (s.kind == PolyShape::Kind::other) return false;
  if (filter == PolyFilter::trinomial_pentanomial) return true;
  // nist_shape: second-highest exponent a must satisfy m - a >= m/2
  return s.a >= 1 && m - static_cast<unsigned>(s.a) >= (m + 1) / 2;
}

bool candidate_irreducible(std::uint64_t bits) {
  // bits = full coefficient pattern of a monic degree-m candidate.
  // Constant term must be 1 (else divisible by x) and total weight must be
  // odd (else divisible by x+1); both filters are cheap pre-checks.
  if ((bits & 1) == 0) return false;
  if ((std::popcount(bits) & 1) == 0) return false;
  return is_irreducible(Poly::from_bits(bits));
}

}  // namespace

std::vector<Poly> enumerate_irreducible_serial(unsigned m, PolyFilter filter) {
  if (m < 2 || m > kMaxEnumerationDegree)
    throw std::invalid_argument("enumerate_irreducible: degree out of range");
  if (m > 24)
    throw std::invalid_argument(
        "enumerate_irreducible: full scan infeasible above degree 24; use "
        "first_irreducible or supply polynomials explicitly");
  std::vector<Poly> out;
  const std::uint64_t lead = std::uint64_t{1} << m;
  for (std::uint64_t low = 1; low < lead; low += 2) {
    if (!candidate_irreducible(lead | low)) continue;
    Poly p = Poly::from_bits(lead | low);
    if (matches_filter(p, filter, m)) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Poly> enumerate_irreducible(unsigned m, PolyFilter filter) {
  if (m < 2 || m > kMaxEnumerationDegree)
    throw std::invalid_argument("enumerate_irreducible: degree out of range");
  if (m > 24)
    throw std::invalid_argument(
        "enumerate_irreducible: full scan infeasible above degree 24; use "
        "first_irreducible or supply polynomials explicitly");
  if (m <= 10) return enumerate_irreducible_serial(m, filter);

  const std::uint64_t lead = std::uint64_t{1} << m;
  const std::uint64_t half_range = lead / 2;  // odd candidates only
  std::vector<std::vector<Poly>> chunks;
  constexpr std::uint64_t kChunk = 1 << 12;
  const std::uint64_t n_chunks = (half_range + kChunk - 1) / kChunk;
  chunks.resize(n_chunks);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci) {
    const std::uint64_t begin = static_cast<std::uint64_t>(ci) * kChunk;
    const std::uint64_t end = std::min(begin + kChunk, half_range);
    auto& local = chunks[static_cast<std::size_t>(ci)];
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t low = 2 * i + 1;
      if (!candidate_irreducible(lead | low)) continue;
      Poly p = Poly::from_bits(lead | low);
      if (matches_filter(p, filter, m)) local.push_back(std::move(p));
    }
  }

  std::vector<Poly> out;
  for (auto& c : chunks)
    for (auto& p : c) out.push_back(std::move(p));
  return out;
}

std::vector<Poly> first_irreducible(unsigned m, std::size_t k,
                                    PolyFilter filter) {
  if (m < 2 || m > kMaxEnumerationDegree)
    throw std::invalid_argument("first_irreducible: degree out of range");
  std::vector<Poly> out;
  std::uint64_t low = 1;  // the m coefficients below x^m, odd patterns only
  while (out.size() < k) {
    if (m < 64 && low >= (std::uint64_t{1} << m)) break;
    Poly p = Poly::from_bits(low);
    p.set_coeff(m, true);
    if (p.weight() % 2 == 1 && is_irreducible(p) &&
        matches_filter(p, filter, m))
      out.push_back(std::move(p));
    const std::uint64_t next = low + 2;
    if (next < low) break;  // wrapped: scanned the whole space
    low = next;
  }
  if (out.size() < k)
    throw std::invalid_argument("first_irreducible: not enough polynomials");
  return out;
}

FieldSpec FieldSpec::make(const Poly& p) {
  const int d = p.degree();
  if (d < 1) throw std::invalid_argument("FieldSpec: degree must be >= 1");
  if (!p.coeff(0))
    throw std::invalid_argument("FieldSpec: constant coefficient must be 1");
  if (!is_irreducible(p))
    throw std::invalid_argument("FieldSpec: polynomial is reducible: " +
                                p.to_string());
  FieldSpec f;
  f.m = static_cast<unsigned>(d);
  f.p = p;
  return f;
}

}  // namespace gfobf
