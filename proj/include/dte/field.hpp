// Modular arithmetic over arbitrary odd primes of up to 256 bits.
//
// Multiplication is bit-serial with interleaved reduction (no special prime
// form is assumed) and inversion is binary extended Euclid; Fermat inversion
// is kept as the baseline that projective-coordinate ECSMs need.
#pragma once

#include "dte/bigint.hpp"

#include <string>
#include <string_view>

namespace dte::field {

class PrimeModulus {
 public:
   /// Rejects even moduli, p <= 3, p >= 2^256 and composites (64 Miller-Rabin rounds).
   explicit PrimeModulus(const BigUint& p);

   const BigUint& value() const { return m_p; }
   unsigned bitlen() const { return m_bitlen; }
   size_t byte_len() const { return (m_bitlen + 7) / 8; }

   /// x mod p for any x representable in BigUint.
   BigUint reduce(const BigUint& x) const;

   friend bool operator==(const PrimeModulus& a, const PrimeModulus& b) { return a.m_p == b.m_p; }

 private:
   BigUint m_p;
   unsigned m_bitlen;
};

/// Probabilistic primality test (64 rounds); used for registry validation.
bool is_probable_prime(const BigUint& n);

/**
 * Fully reduced residue 0 <= value < p. The modulus is referenced, not owned,
 * and must outlive the element (moduli live in CurveParams or the caller).
 */
class FieldElement {
 public:
   /// Detached element; any arithmetic on it is a usage error.
   FieldElement() = default;

   static FieldElement zero(const PrimeModulus& m) { return FieldElement(m, BigUint()); }
   static FieldElement one(const PrimeModulus& m) { return FieldElement(m, BigUint(1)); }

   /// Throws MalformedInput if v >= p.
   static FieldElement from_uint(const PrimeModulus& m, const BigUint& v);

   /// Reduces any v modulo p.
   static FieldElement reduce(const PrimeModulus& m, const BigUint& v);

   /// Exactly byte_len() big-endian bytes with value < p.
   static FieldElement from_bytes(const PrimeModulus& m, ByteSpan be);

   static FieldElement from_hex(const PrimeModulus& m, std::string_view hex);

   const BigUint& value() const { return m_value; }
   const PrimeModulus& modulus() const;
   bool attached() const { return m_mod != nullptr; }
   bool is_zero() const { return m_value.is_zero(); }

   /// Fixed-width big-endian, ceil(bitlen(p)/8) bytes.
   Bytes to_bytes() const;
   std::string to_hex() const;

   friend bool operator==(const FieldElement& a, const FieldElement& b) {
      return a.m_value == b.m_value && (a.m_mod == b.m_mod || (a.m_mod && b.m_mod && *a.m_mod == *b.m_mod));
   }

 private:
   FieldElement(const PrimeModulus& m, const BigUint& v) : m_value(v), m_mod(&m) {}

   friend FieldElement mod_add(const FieldElement&, const FieldElement&);
   friend FieldElement mod_sub(const FieldElement&, const FieldElement&);
   friend FieldElement mod_mul(const FieldElement&, const FieldElement&);
   friend FieldElement mod_inv_euclid(const FieldElement&);
   friend void conditional_swap(FieldElement&, FieldElement&, bool);

   BigUint m_value;
   const PrimeModulus* m_mod = nullptr;
};

FieldElement mod_add(const FieldElement& a, const FieldElement& b);
FieldElement mod_sub(const FieldElement& a, const FieldElement& b);
FieldElement mod_neg(const FieldElement& a);

/// Bit-serial interleaved-reduction product; always bitlen(p) iterations.
FieldElement mod_mul(const FieldElement& a, const FieldElement& b);

/// Binary extended Euclidean inversion. Throws NotInvertible for zero.
FieldElement mod_inv_euclid(const FieldElement& a);

/// a^(p-2) by left-to-right square-and-multiply. Throws NotInvertible for zero.
FieldElement mod_inv_fermat(const FieldElement& a);

/// a^e by left-to-right square-and-multiply (every step counted as mod_mul).
FieldElement mod_pow(const FieldElement& a, const BigUint& e);

/// Masked swap of the two values (no data-dependent branch); moduli must match.
void conditional_swap(FieldElement& a, FieldElement& b, bool swap);

/// Euler criterion; zero counts as a square.
bool is_square(const FieldElement& a);

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return mod_add(a, b); }
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) { return mod_sub(a, b); }
inline FieldElement operator-(const FieldElement& a) { return mod_neg(a); }
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) { return mod_mul(a, b); }

}  // namespace dte::field
