#include "dte/ec_protocols.hpp"

#include "dte/counters.hpp"
#include "dte/der.hpp"
#include "dte/errors.hpp"

namespace dte::pki {

using ecc::ecsm_comb;
using ecc::point_add;
using metrics::count;
using metrics::Op;

namespace {

constexpr int kMaxSignAttempts = 8;

FieldElement scalar(const CurveParams& c, const BigUint& v) {
   return FieldElement::reduce(c.scalar_field(), v);
}

bool in_scalar_range(const CurveParams& c, const BigUint& v) {
   return !v.is_zero() && v < c.order();
}

size_t scalar_bytes(const CurveParams& c) {
   return (c.order().bitlen() + 7) / 8;
}

// Integer from the leftmost bitlen(n) bits of a big-endian string.
BigUint bits2int(const CurveParams& c, ByteSpan bits) {
   const unsigned qlen = c.order().bitlen();
   BigUint v = BigUint::from_bytes(bits.first(std::min(bits.size(), size_t(BigUint::kLimbs * 8))));
   const size_t blen = std::min(bits.size(), size_t(BigUint::kLimbs * 8)) * 8;
   if(blen > qlen) {
      v = v.shr(static_cast<unsigned>(blen - qlen));
   }
   return v;
}

void require_same_curve(const CurveParams& a, const CurveParams& b) {
   if(&a != &b) {
      throw UsageError("keys and points must be on the same curve");
   }
}

template <typename NonceSource>
EcdsaSignature sign_with(const KeyPair& key, const sym::Digest256& digest, CombCache& cache, NonceSource&& next_k) {
   const CurveParams& c = key.curve();
   count(Op::EcdsaSign);
   const auto z = scalar(c, digest_to_integer(c, digest));
   const auto d = scalar(c, key.private_scalar());
   for(int attempt = 0; attempt < kMaxSignAttempts; ++attempt) {
      const BigUint k = next_k();
      if(!in_scalar_range(c, k)) {
         continue;
      }
      const AffinePoint R = ecsm_comb(k, c.generator(), cache);
      const auto r = scalar(c, R.x().value());
      if(r.is_zero()) {
         continue;
      }
      const auto s = field::mod_inv_euclid(scalar(c, k)) * (z + r * d);
      if(s.is_zero()) {
         continue;
      }
      return EcdsaSignature{r.value(), s.value()};
   }
   throw InternalError("ECDSA signing exceeded its retry budget");
}

}  // namespace

BigUint random_scalar(const CurveParams& curve, sym::HmacDrbg& drbg) {
   const unsigned bits = curve.order().bitlen();
   for(int attempt = 0; attempt < 64; ++attempt) {
      const BigUint k = BigUint::from_bytes(drbg.generate(scalar_bytes(curve))).low_bits(bits);
      if(in_scalar_range(curve, k)) {
         return k;
      }
   }
   throw InternalError("could not sample a scalar");
}

KeyPair KeyPair::from_private(std::shared_ptr<const CurveParams> curve, const BigUint& d, CombCache& cache) {
   if(!in_scalar_range(*curve, d)) {
      throw UsageError("private scalar must be in [1, n-1]");
   }
   AffinePoint q = ecsm_comb(d, curve->generator(), cache);
   return KeyPair(std::move(curve), d, q);
}

KeyPair KeyPair::from_parts(std::shared_ptr<const CurveParams> curve, const BigUint& d, const AffinePoint& q,
                            CombCache& cache) {
   KeyPair kp = from_private(std::move(curve), d, cache);
   if(!(kp.public_point() == q)) {
      throw ValidationError("public point does not match the private scalar");
   }
   return kp;
}

KeyPair KeyPair::generate(std::shared_ptr<const CurveParams> curve, sym::HmacDrbg& drbg, CombCache& cache) {
   const BigUint d = random_scalar(*curve, drbg);
   return from_private(std::move(curve), d, cache);
}

Bytes EcdsaSignature::to_der() const {
   auto ri = der::integer(r);
   auto si = der::integer(s);
   return der::sequence({ri, si});
}

EcdsaSignature EcdsaSignature::from_der(ByteSpan data) {
   der::Reader outer(data);
   der::Reader seq = outer.enter(der::kSequence);
   outer.finish();
   EcdsaSignature sig;
   sig.r = seq.read_uint();
   sig.s = seq.read_uint();
   seq.finish();
   return sig;
}

BigUint digest_to_integer(const CurveParams& curve, const sym::Digest256& digest) {
   return bits2int(curve, digest);
}

EcdsaSignature ecdsa_sign(const KeyPair& key, const sym::Digest256& digest, sym::HmacDrbg& drbg, CombCache& cache) {
   return sign_with(key, digest, cache, [&] { return bits2int(key.curve(), drbg.generate(scalar_bytes(key.curve()))); });
}

EcdsaSignature ecdsa_sign_deterministic(const KeyPair& key, const sym::Digest256& digest, CombCache& cache) {
   const CurveParams& c = key.curve();
   const size_t rlen = scalar_bytes(c);
   BigUint h = bits2int(c, digest);
   if(h >= c.order()) {
      h = h - c.order();
   }
   sym::HmacDrbg drbg(key.private_scalar().to_bytes(rlen), h.to_bytes(rlen), {});
   return sign_with(key, digest, cache, [&] { return bits2int(c, drbg.generate(rlen)); });
}

bool ecdsa_verify(const AffinePoint& pub, const sym::Digest256& digest, const EcdsaSignature& sig, CombCache& cache) {
   const CurveParams& c = pub.curve();
   count(Op::EcdsaVerify);
   if(!in_scalar_range(c, sig.r) || !in_scalar_range(c, sig.s)) {
      return false;
   }
   if(pub.at_infinity() || !c.is_on_curve(pub)) {
      return false;
   }
   const auto w = field::mod_inv_euclid(scalar(c, sig.s));
   const auto u1 = scalar(c, digest_to_integer(c, digest)) * w;
   const auto u2 = scalar(c, sig.r) * w;
   AffinePoint R = AffinePoint::infinity(c);
   if(!u1.is_zero()) {
      R = ecsm_comb(u1.value(), c.generator(), cache);
   }
   R = point_add(R, ecsm_comb(u2.value(), pub, cache));
   if(R.at_infinity()) {
      return false;
   }
   return scalar(c, R.x().value()).value() == sig.r;
}

FieldElement ecdhe_shared(const KeyPair& own, const AffinePoint& peer, CombCache& cache) {
   require_same_curve(own.curve(), peer.curve());
   return ecdhe_shared(own.private_scalar(), peer, cache);
}

FieldElement ecdhe_shared(const BigUint& d, const AffinePoint& peer, CombCache& cache) {
   if(d.is_zero() || d >= peer.curve().order()) {
      throw UsageError("private scalar out of range");
   }
   ecc::validate_public_point(peer);
   count(Op::EcdhShared);
   const AffinePoint k = ecsm_comb(d, peer, cache);
   if(k.at_infinity()) {
      throw ValidationError("shared point is the point at infinity");
   }
   return k.x();
}

BigUint mqv_avf(const CurveParams& curve, const AffinePoint& r) {
   const unsigned f = (curve.order().bitlen() + 1) / 2;
   BigUint v = r.x().value().low_bits(f);
   v.set_bit(f);
   return v;
}

FieldElement ecmqv_shared(const KeyPair& own_static, const KeyPair& own_ephemeral, const AffinePoint& peer_static,
                          const AffinePoint& peer_ephemeral, CombCache& cache) {
   const CurveParams& c = own_static.curve();
   require_same_curve(c, own_ephemeral.curve());
   require_same_curve(c, peer_static.curve());
   require_same_curve(c, peer_ephemeral.curve());
   ecc::validate_public_point(peer_static);
   ecc::validate_public_point(peer_ephemeral);
   count(Op::EcmqvShared);

   const auto s = scalar(c, own_ephemeral.private_scalar()) +
                  scalar(c, mqv_avf(c, own_ephemeral.public_point())) * scalar(c, own_static.private_scalar());
   const auto hs = scalar(c, BigUint(c.cofactor())) * s;
   const AffinePoint t =
      point_add(peer_ephemeral, ecsm_comb(scalar(c, mqv_avf(c, peer_ephemeral)).value(), peer_static, cache));
   if(hs.is_zero() || t.at_infinity()) {
      throw ValidationError("MQV shared point is the point at infinity");
   }
   const AffinePoint k = ecsm_comb(hs.value(), t, cache);
   if(k.at_infinity()) {
      throw ValidationError("MQV shared point is the point at infinity");
   }
   return k.x();
}

SchnorrCommitment schnorr_commit(const KeyPair& key, sym::HmacDrbg& drbg, CombCache& cache) {
   const BigUint r = random_scalar(key.curve(), drbg);
   return SchnorrCommitment{r, ecsm_comb(r, key.curve().generator(), cache)};
}

BigUint schnorr_respond(const KeyPair& key, const BigUint& r, const BigUint& c) {
   const CurveParams& cv = key.curve();
   if(c >= cv.order() || r >= cv.order()) {
      throw UsageError("challenge and nonce must be below n");
   }
   count(Op::SchnorrRespond);
   return (scalar(cv, r) + scalar(cv, c) * scalar(cv, key.private_scalar())).value();
}

bool schnorr_verify(const AffinePoint& pub, const AffinePoint& t, const BigUint& c, const BigUint& s,
                    CombCache& cache) {
   const CurveParams& cv = pub.curve();
   require_same_curve(cv, t.curve());
   if(c >= cv.order() || s >= cv.order() || !cv.is_on_curve(t) || !cv.is_on_curve(pub)) {
      return false;
   }
   const AffinePoint lhs = s.is_zero() ? AffinePoint::infinity(cv) : ecsm_comb(s, cv.generator(), cache);
   const AffinePoint cq = c.is_zero() ? AffinePoint::infinity(cv) : ecsm_comb(c, pub, cache);
   return lhs == point_add(t, cq);
}

}  // namespace dte::pki
