// Public-key protocols over the comb ECSM: ECDSA, ECDHE, ECMQV and the
// Schnorr identification prover.
#pragma once

#include "dte/ecsm.hpp"
#include "dte/hmac_drbg.hpp"
#include "dte/sha256.hpp"

#include <memory>
#include <optional>

namespace dte::pki {

using ecc::AffinePoint;
using ecc::CombCache;
using ecc::CurveParams;
using field::FieldElement;

class KeyPair {
 public:
   /// Q = d*G through the cache; d must be in [1, n-1].
   static KeyPair from_private(std::shared_ptr<const CurveParams> curve, const BigUint& d, CombCache& cache);

   /// Throws ValidationError unless Q == d*G.
   static KeyPair from_parts(std::shared_ptr<const CurveParams> curve, const BigUint& d, const AffinePoint& q,
                             CombCache& cache);

   /// d drawn from the DRBG by rejection sampling.
   static KeyPair generate(std::shared_ptr<const CurveParams> curve, sym::HmacDrbg& drbg, CombCache& cache);

   const BigUint& private_scalar() const { return m_d; }
   const AffinePoint& public_point() const { return m_q; }
   const CurveParams& curve() const { return *m_curve; }
   const std::shared_ptr<const CurveParams>& curve_ptr() const { return m_curve; }

 private:
   KeyPair(std::shared_ptr<const CurveParams> c, const BigUint& d, const AffinePoint& q) :
         m_curve(std::move(c)), m_d(d), m_q(q) {}

   std::shared_ptr<const CurveParams> m_curve;
   BigUint m_d;
   AffinePoint m_q;
};

/// Uniform scalar in [1, n-1] (bitlen(n)-bit candidates, rejection sampled).
BigUint random_scalar(const CurveParams& curve, sym::HmacDrbg& drbg);

struct EcdsaSignature {
   BigUint r, s;

   /// DER Ecdsa-Sig-Value (SEQUENCE of two INTEGERs).
   Bytes to_der() const;
   /// Strict DER; throws MalformedInput. Range is not checked here (verify rejects).
   static EcdsaSignature from_der(ByteSpan der);

   friend bool operator==(const EcdsaSignature&, const EcdsaSignature&) = default;
};

/// Leftmost bitlen(n) bits of the digest, as an integer (not reduced).
BigUint digest_to_integer(const CurveParams& curve, const sym::Digest256& digest);

/// Nonce from the given DRBG (protocol mode).
EcdsaSignature ecdsa_sign(const KeyPair& key, const sym::Digest256& digest, sym::HmacDrbg& drbg, CombCache& cache);

/// Nonce derived per RFC 6979 from the private key and digest.
EcdsaSignature ecdsa_sign_deterministic(const KeyPair& key, const sym::Digest256& digest, CombCache& cache);

/// u1*G + u2*Q as two comb ECSMs plus one addition. Out-of-range r or s rejects.
bool ecdsa_verify(const AffinePoint& pub, const sym::Digest256& digest, const EcdsaSignature& sig, CombCache& cache);

/// x(d_own * peer). Throws ValidationError for an invalid peer point.
FieldElement ecdhe_shared(const KeyPair& own, const AffinePoint& peer, CombCache& cache);
/// Same, for a bare private scalar d in [1, n-1] on the peer point's curve.
FieldElement ecdhe_shared(const BigUint& d, const AffinePoint& peer, CombCache& cache);

/// Half-width projection x mod 2^f + 2^f with f = ceil(bitlen(n)/2).
BigUint mqv_avf(const CurveParams& curve, const AffinePoint& r);

/// x(h * s * (R_peer + avf(R_peer) * Q_peer)) with s = k + avf(R_own) * d mod n.
/// Throws ValidationError on invalid peer points or an infinite result.
FieldElement ecmqv_shared(const KeyPair& own_static, const KeyPair& own_ephemeral, const AffinePoint& peer_static,
                          const AffinePoint& peer_ephemeral, CombCache& cache);

struct SchnorrCommitment {
   BigUint r;      // prover's secret nonce
   AffinePoint t;  // r*G, sent to the verifier
};

SchnorrCommitment schnorr_commit(const KeyPair& key, sym::HmacDrbg& drbg, CombCache& cache);

/// s = r + c*d mod n; c must be in [0, n).
BigUint schnorr_respond(const KeyPair& key, const BigUint& r, const BigUint& c);

/// s*G == T + c*Q.
bool schnorr_verify(const AffinePoint& pub, const AffinePoint& t, const BigUint& c, const BigUint& s,
                    CombCache& cache);

}  // namespace dte::pki
