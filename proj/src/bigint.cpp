#include "dte/bigint.hpp"

#include "dte/errors.hpp"

#include <bit>

namespace dte {

BigUint BigUint::from_hex(std::string_view hex) {
   std::string digits(hex);
   if(digits.starts_with("0x") || digits.starts_with("0X")) {
      digits.erase(0, 2);
   }
   if(digits.empty()) {
      throw MalformedInput("empty integer literal");
   }
   if(digits.size() % 2 != 0) {
      digits.insert(digits.begin(), '0');
   }
   return from_bytes(dte::from_hex(digits));
}

BigUint BigUint::from_bytes(ByteSpan be) {
   BigUint r;
   size_t i = 0;
   while(i < be.size() && be.size() - i > kLimbs * 8) {
      if(be[i] != 0) {
         throw MalformedInput("integer exceeds 320 bits");
      }
      ++i;
   }
   for(; i != be.size(); ++i) {
      const size_t pos = be.size() - 1 - i;
      r.m_limbs[pos / 8] |= uint64_t(be[i]) << (8 * (pos % 8));
   }
   return r;
}

Bytes BigUint::to_bytes(size_t width) const {
   if((bitlen() + 7) / 8 > width) {
      throw UsageError("integer does not fit in requested width");
   }
   Bytes out(width, 0);
   for(size_t pos = 0; pos != width && pos < kLimbs * 8; ++pos) {
      out[width - 1 - pos] = static_cast<uint8_t>(m_limbs[pos / 8] >> (8 * (pos % 8)));
   }
   return out;
}

std::string BigUint::to_hex() const {
   if(is_zero()) {
      return "0";
   }
   std::string h = dte::to_hex(to_bytes(kLimbs * 8));
   return h.substr(h.find_first_not_of('0'));
}

unsigned BigUint::bitlen() const {
   for(size_t i = kLimbs; i-- > 0;) {
      if(m_limbs[i] != 0) {
         return static_cast<unsigned>(64 * i + std::bit_width(m_limbs[i]));
      }
   }
   return 0;
}

bool BigUint::is_zero() const {
   uint64_t acc = 0;
   for(auto l : m_limbs) {
      acc |= l;
   }
   return acc == 0;
}

BigUint BigUint::low_bits(unsigned bits) const {
   BigUint r;
   for(size_t i = 0; i != kLimbs; ++i) {
      if(bits >= 64 * (i + 1)) {
         r.m_limbs[i] = m_limbs[i];
      } else if(bits > 64 * i) {
         r.m_limbs[i] = m_limbs[i] & ((uint64_t(1) << (bits - 64 * i)) - 1);
      }
   }
   return r;
}

BigUint BigUint::shl1() const {
   BigUint r;
   uint64_t carry = 0;
   for(size_t i = 0; i != kLimbs; ++i) {
      r.m_limbs[i] = (m_limbs[i] << 1) | carry;
      carry = m_limbs[i] >> 63;
   }
   return r;
}

BigUint BigUint::shr1() const {
   BigUint r;
   for(size_t i = 0; i != kLimbs; ++i) {
      const uint64_t hi = (i + 1 < kLimbs) ? m_limbs[i + 1] << 63 : 0;
      r.m_limbs[i] = (m_limbs[i] >> 1) | hi;
   }
   return r;
}

BigUint BigUint::shr(unsigned bits) const {
   BigUint r;
   const size_t words = bits / 64;
   const unsigned rem = bits % 64;
   for(size_t i = 0; i + words < kLimbs; ++i) {
      uint64_t v = m_limbs[i + words] >> rem;
      if(rem != 0 && i + words + 1 < kLimbs) {
         v |= m_limbs[i + words + 1] << (64 - rem);
      }
      r.m_limbs[i] = v;
   }
   return r;
}

BigUint BigUint::shl(unsigned bits) const {
   BigUint r;
   const size_t words = bits / 64;
   const unsigned rem = bits % 64;
   for(size_t i = kLimbs; i-- > words;) {
      uint64_t v = m_limbs[i - words] << rem;
      if(rem != 0 && i - words >= 1) {
         v |= m_limbs[i - words - 1] >> (64 - rem);
      }
      r.m_limbs[i] = v;
   }
   return r;
}

uint64_t BigUint::add(BigUint& r, const BigUint& a, const BigUint& b) {
   unsigned __int128 carry = 0;
   for(size_t i = 0; i != kLimbs; ++i) {
      carry += static_cast<unsigned __int128>(a.m_limbs[i]) + b.m_limbs[i];
      r.m_limbs[i] = static_cast<uint64_t>(carry);
      carry >>= 64;
   }
   return static_cast<uint64_t>(carry);
}

uint64_t BigUint::sub(BigUint& r, const BigUint& a, const BigUint& b) {
   uint64_t borrow = 0;
   for(size_t i = 0; i != kLimbs; ++i) {
      const uint64_t ai = a.m_limbs[i];
      const uint64_t d = ai - b.m_limbs[i];
      const uint64_t b1 = ai < b.m_limbs[i];
      const uint64_t d2 = d - borrow;
      const uint64_t b2 = d < borrow;
      r.m_limbs[i] = d2;
      borrow = b1 | b2;
   }
   return borrow;
}

void BigUint::select(BigUint& r, uint64_t mask, const BigUint& a, const BigUint& b) {
   for(size_t i = 0; i != kLimbs; ++i) {
      r.m_limbs[i] = (a.m_limbs[i] & mask) | (b.m_limbs[i] & ~mask);
   }
}

std::strong_ordering operator<=>(const BigUint& a, const BigUint& b) {
   for(size_t i = BigUint::kLimbs; i-- > 0;) {
      if(a.m_limbs[i] != b.m_limbs[i]) {
         return a.m_limbs[i] <=> b.m_limbs[i];
      }
   }
   return std::strong_ordering::equal;
}

}  // namespace dte
