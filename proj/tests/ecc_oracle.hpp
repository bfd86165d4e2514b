// Independent affine Weierstrass arithmetic over GMP integers.
#pragma once

#include "dte/curve.hpp"
#include "oracle.hpp"

namespace dte::test {

struct MPoint {
   mpz_class x, y;
   bool inf = true;
};

class MCurve {
 public:
   explicit MCurve(const ecc::CurveParams& c) :
         m_curve(&c),
         p(to_mpz(c.field().value())),
         a(to_mpz(c.a().value())),
         b(to_mpz(c.b().value())) {}

   /// Bare arithmetic without an associated registry curve (no to()).
   MCurve(mpz_class p_, mpz_class a_, mpz_class b_) : m_curve(nullptr), p(p_), a(a_), b(b_) {}

   mpz_class mod(const mpz_class& v) const {
      mpz_class r = v % p;
      if(r < 0) {
         r += p;
      }
      return r;
   }

   mpz_class inv(const mpz_class& v) const {
      mpz_class r;
      mpz_invert(r.get_mpz_t(), mod(v).get_mpz_t(), p.get_mpz_t());
      return r;
   }

   MPoint add(const MPoint& P, const MPoint& Q) const {
      if(P.inf) {
         return Q;
      }
      if(Q.inf) {
         return P;
      }
      mpz_class l;
      if(P.x == Q.x) {
         if(mod(P.y + Q.y) == 0) {
            return MPoint{};
         }
         l = mod((3 * P.x * P.x + a) * inv(2 * P.y));
      } else {
         l = mod((Q.y - P.y) * inv(Q.x - P.x));
      }
      MPoint R;
      R.inf = false;
      R.x = mod(l * l - P.x - Q.x);
      R.y = mod(l * (P.x - R.x) - P.y);
      return R;
   }

   MPoint mul(const mpz_class& k, const MPoint& P) const {
      MPoint R;
      const size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
      for(size_t i = bits; i-- > 0;) {
         R = add(R, R);
         if(mpz_tstbit(k.get_mpz_t(), i)) {
            R = add(R, P);
         }
      }
      return R;
   }

   MPoint from(const ecc::AffinePoint& P) const {
      if(P.at_infinity()) {
         return MPoint{};
      }
      return MPoint{to_mpz(P.x().value()), to_mpz(P.y().value()), false};
   }

   ecc::AffinePoint to(const MPoint& P) const {
      if(P.inf) {
         return ecc::AffinePoint::infinity(*m_curve);
      }
      const auto& f = m_curve->field();
      return ecc::AffinePoint::from_affine(*m_curve, field::FieldElement::from_uint(f, from_mpz(P.x)),
                                           field::FieldElement::from_uint(f, from_mpz(P.y)));
   }

 private:
   const ecc::CurveParams* m_curve;

 public:
   mpz_class p, a, b;
};

/// Uniform scalar in [1, n).
inline BigUint random_scalar(std::mt19937_64& rng, const BigUint& n) {
   for(;;) {
      BigUint k = random_below(rng, n);
      if(!k.is_zero()) {
         return k;
      }
   }
}

}  // namespace dte::test
