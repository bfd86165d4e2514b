#include "dte/field.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"

#include <gmp.h>

namespace dte::field {

using metrics::count;
using metrics::Op;

bool is_probable_prime(const BigUint& n) {
   mpz_t z;
   mpz_init(z);
   mpz_set_str(z, n.to_hex().c_str(), 16);
   const int r = mpz_probab_prime_p(z, 64);
   mpz_clear(z);
   return r != 0;
}

PrimeModulus::PrimeModulus(const BigUint& p) : m_p(p), m_bitlen(p.bitlen()) {
   if(!p.is_odd()) {
      throw UsageError("modulus must be odd");
   }
   if(p <= BigUint(3)) {
      throw UsageError("modulus must exceed 3");
   }
   if(m_bitlen > 256) {
      throw UsageError("modulus exceeds 256 bits");
   }
   if(!is_probable_prime(p)) {
      throw UsageError("modulus is not prime");
   }
}

BigUint PrimeModulus::reduce(const BigUint& x) const {
   BigUint acc;
   for(unsigned i = x.bitlen(); i-- > 0;) {
      acc = acc.shl1();
      if(x.bit(i)) {
         acc.set_bit(0);
      }
      BigUint t;
      if(BigUint::sub(t, acc, m_p) == 0) {
         acc = t;
      }
   }
   return acc;
}

const PrimeModulus& FieldElement::modulus() const {
   if(m_mod == nullptr) {
      throw UsageError("field element has no modulus");
   }
   return *m_mod;
}

FieldElement FieldElement::from_uint(const PrimeModulus& m, const BigUint& v) {
   if(v >= m.value()) {
      throw MalformedInput("field element not below modulus");
   }
   return FieldElement(m, v);
}

FieldElement FieldElement::reduce(const PrimeModulus& m, const BigUint& v) {
   return FieldElement(m, m.reduce(v));
}

FieldElement FieldElement::from_bytes(const PrimeModulus& m, ByteSpan be) {
   if(be.size() != m.byte_len()) {
      throw MalformedInput("field element has wrong encoded width");
   }
   return from_uint(m, BigUint::from_bytes(be));
}

FieldElement FieldElement::from_hex(const PrimeModulus& m, std::string_view hex) {
   return from_uint(m, BigUint::from_hex(hex));
}

Bytes FieldElement::to_bytes() const {
   return m_value.to_bytes(modulus().byte_len());
}

std::string FieldElement::to_hex() const {
   return dte::to_hex(to_bytes());
}

namespace {

const PrimeModulus& common_modulus(const FieldElement& a, const FieldElement& b) {
   const PrimeModulus& m = a.modulus();
   if(&m != &b.modulus() && !(m == b.modulus())) {
      throw UsageError("field elements have different moduli");
   }
   return m;
}

inline uint64_t mask_from_bit(uint64_t bit) {
   return uint64_t(0) - bit;
}

// Limb-level form of: acc = 2*acc + a_i*b, then two masked trial subtractions
// of p (acc < 3p before them). One iteration per bit of p, MSB first.
template <size_t L>
void interleaved_mul(BigUint::Limbs& acc, const BigUint& a, const BigUint& b, const BigUint& p, unsigned bits) {
   const auto& al = a.limbs();
   const auto& bl = b.limbs();
   const auto& pl = p.limbs();
   for(unsigned i = bits; i-- > 0;) {
      const uint64_t take = mask_from_bit((al[i / 64] >> (i % 64)) & 1);
      for(size_t j = L; j-- > 1;) {
         acc[j] = (acc[j] << 1) | (acc[j - 1] >> 63);
      }
      acc[0] <<= 1;
      unsigned __int128 carry = 0;
      for(size_t j = 0; j < L; ++j) {
         carry += static_cast<unsigned __int128>(acc[j]) + (bl[j] & take);
         acc[j] = static_cast<uint64_t>(carry);
         carry >>= 64;
      }
      for(int round = 0; round < 2; ++round) {
         uint64_t t[L];
         uint64_t borrow = 0;
         for(size_t j = 0; j < L; ++j) {
            const unsigned __int128 d = static_cast<unsigned __int128>(acc[j]) - pl[j] - borrow;
            t[j] = static_cast<uint64_t>(d);
            borrow = static_cast<uint64_t>(d >> 64) & 1;
         }
         const uint64_t keep = mask_from_bit(borrow);
         for(size_t j = 0; j < L; ++j) {
            acc[j] = (acc[j] & keep) | (t[j] & ~keep);
         }
      }
   }
}

}  // namespace


FieldElement mod_add(const FieldElement& a, const FieldElement& b) {
   const PrimeModulus& m = common_modulus(a, b);
   count(Op::ModAdd);
   BigUint sum;
   BigUint::add(sum, a.m_value, b.m_value);
   BigUint reduced;
   const uint64_t borrow = BigUint::sub(reduced, sum, m.value());
   BigUint r;
   BigUint::select(r, mask_from_bit(borrow), sum, reduced);
   return FieldElement(m, r);
}

FieldElement mod_sub(const FieldElement& a, const FieldElement& b) {
   const PrimeModulus& m = common_modulus(a, b);
   count(Op::ModSub);
   BigUint diff;
   const uint64_t borrow = BigUint::sub(diff, a.m_value, b.m_value);
   BigUint wrapped;
   BigUint::add(wrapped, diff, m.value());
   BigUint r;
   BigUint::select(r, mask_from_bit(borrow), wrapped, diff);
   return FieldElement(m, r);
}

FieldElement mod_neg(const FieldElement& a) {
   return mod_sub(FieldElement::zero(a.modulus()), a);
}

void conditional_swap(FieldElement& a, FieldElement& b, bool swap) {
   common_modulus(a, b);
   const uint64_t mask = 0 - static_cast<uint64_t>(swap);
   BigUint ta, tb;
   BigUint::select(ta, mask, b.m_value, a.m_value);
   BigUint::select(tb, mask, a.m_value, b.m_value);
   a.m_value = ta;
   b.m_value = tb;
}

FieldElement mod_mul(const FieldElement& a, const FieldElement& b) {
   const PrimeModulus& m = common_modulus(a, b);
   const BigUint& p = m.value();
   count(Op::ModMul);

   BigUint::Limbs acc{};
   // acc < 3p < 2^(bitlen+2) bounds the limbs that can be nonzero
   switch((m.bitlen() + 2 + 63) / 64) {
      case 1: interleaved_mul<1>(acc, a.m_value, b.m_value, p, m.bitlen()); break;
      case 2: interleaved_mul<2>(acc, a.m_value, b.m_value, p, m.bitlen()); break;
      case 3: interleaved_mul<3>(acc, a.m_value, b.m_value, p, m.bitlen()); break;
      case 4: interleaved_mul<4>(acc, a.m_value, b.m_value, p, m.bitlen()); break;
      default: interleaved_mul<5>(acc, a.m_value, b.m_value, p, m.bitlen()); break;
   }
   const unsigned iterations = m.bitlen();
   count(Op::MulIteration, iterations);
   count(Op::CondSubtract, 2 * uint64_t(iterations));
   return FieldElement(m, BigUint::from_limbs(acc));
}

FieldElement mod_inv_euclid(const FieldElement& a) {
   const PrimeModulus& m = a.modulus();
   if(a.is_zero()) {
      throw NotInvertible();
   }
   count(Op::ModInvEuclid);
   count(Op::InvBits, m.bitlen());

   const BigUint& p = m.value();
   BigUint u = a.m_value;
   BigUint v = p;
   BigUint x1(1);
   BigUint x2;
   const BigUint one(1);

   auto halve = [&p](BigUint& x) {
      if(x.is_odd()) {
         BigUint::add(x, x, p);
      }
      x = x.shr1();
   };
   auto sub_mod = [&p](BigUint& x, const BigUint& y) {
      if(BigUint::sub(x, x, y) != 0) {
         BigUint::add(x, x, p);
      }
   };

   while(u != one && v != one) {
      while(!u.is_odd()) {
         u = u.shr1();
         halve(x1);
      }
      while(!v.is_odd()) {
         v = v.shr1();
         halve(x2);
      }
      if(u >= v) {
         BigUint::sub(u, u, v);
         sub_mod(x1, x2);
      } else {
         BigUint::sub(v, v, u);
         sub_mod(x2, x1);
      }
   }
   return FieldElement(m, u == one ? x1 : x2);
}

FieldElement mod_pow(const FieldElement& a, const BigUint& e) {
   const PrimeModulus& m = a.modulus();
   const unsigned bits = e.bitlen();
   if(bits == 0) {
      return FieldElement::one(m);
   }
   FieldElement r = a;
   for(unsigned i = bits - 1; i-- > 0;) {
      r = mod_mul(r, r);
      if(e.bit(i)) {
         r = mod_mul(r, a);
      }
   }
   return r;
}

FieldElement mod_inv_fermat(const FieldElement& a) {
   const PrimeModulus& m = a.modulus();
   if(a.is_zero()) {
      throw NotInvertible();
   }
   count(Op::ModInvFermat);
   return mod_pow(a, m.value() - BigUint(2));
}

bool is_square(const FieldElement& a) {
   if(a.is_zero()) {
      return true;
   }
   const PrimeModulus& m = a.modulus();
   const BigUint e = (m.value() - BigUint(1)).shr1();
   return mod_pow(a, e) == FieldElement::one(m);
}

}  // namespace dte::field
