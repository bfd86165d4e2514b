// Fixed-capacity unsigned integers used by the field and scalar arithmetic.
#pragma once

#include "dte/bytes.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace dte {

/**
 * Unsigned integer with a fixed capacity of 320 bits (five 64-bit limbs,
 * least significant first).
 *
 * Field values never exceed 256 bits; the extra limb holds the carries of
 * the interleaved multiplier (2*acc + b < 3p < 2^258) and of the binary
 * inversion (x + p). Arithmetic wraps modulo 2^320 and reports carry/borrow.
 */
class BigUint {
 public:
   static constexpr size_t kLimbs = 5;
   static constexpr unsigned kBits = 64 * kLimbs;

   constexpr BigUint() = default;

   constexpr explicit BigUint(uint64_t v) { m_limbs[0] = v; }

   static BigUint from_hex(std::string_view hex);

   /// Big-endian bytes; leading zero bytes beyond capacity are tolerated.
   static BigUint from_bytes(ByteSpan be);

   /// Fixed-width big-endian encoding; throws UsageError if the value does not fit.
   Bytes to_bytes(size_t width) const;

   /// Minimal lowercase hex, "0" for zero.
   std::string to_hex() const;

   uint64_t limb(size_t i) const { return m_limbs[i]; }

   using Limbs = std::array<uint64_t, kLimbs>;
   const Limbs& limbs() const { return m_limbs; }
   static BigUint from_limbs(const Limbs& l) {
      BigUint r;
      r.m_limbs = l;
      return r;
   }

   bool bit(unsigned i) const { return i < kBits && ((m_limbs[i / 64] >> (i % 64)) & 1) != 0; }

   void set_bit(unsigned i) { m_limbs[i / 64] |= uint64_t(1) << (i % 64); }

   unsigned bitlen() const;

   bool is_zero() const;

   bool is_odd() const { return (m_limbs[0] & 1) != 0; }

   /// The low `bits` bits of this value.
   BigUint low_bits(unsigned bits) const;

   BigUint shl1() const;
   BigUint shr1() const;
   BigUint shr(unsigned bits) const;
   BigUint shl(unsigned bits) const;

   /// r = a + b, returns carry out of the top limb.
   static uint64_t add(BigUint& r, const BigUint& a, const BigUint& b);

   /// r = a - b, returns 1 on borrow.
   static uint64_t sub(BigUint& r, const BigUint& a, const BigUint& b);

   /// r = mask ? a : b, where mask is all-ones or zero.
   static void select(BigUint& r, uint64_t mask, const BigUint& a, const BigUint& b);

   friend bool operator==(const BigUint&, const BigUint&) = default;
   friend std::strong_ordering operator<=>(const BigUint& a, const BigUint& b);

   friend BigUint operator+(const BigUint& a, const BigUint& b) {
      BigUint r;
      add(r, a, b);
      return r;
   }

   friend BigUint operator-(const BigUint& a, const BigUint& b) {
      BigUint r;
      sub(r, a, b);
      return r;
   }

 private:
   std::array<uint64_t, kLimbs> m_limbs{};
};

}  // namespace dte
