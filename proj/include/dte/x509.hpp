// Minimal X.509 v3 support for ECDSA/SHA-256 certificates on registered curves.
#pragma once

#include "dte/ec_protocols.hpp"

#include <list>
#include <optional>
#include <string>

namespace dte::pki {

inline constexpr std::string_view kOidEcdsaWithSha256 = "1.2.840.10045.4.3.2";
inline constexpr std::string_view kOidEcPublicKey = "1.2.840.10045.2.1";
inline constexpr std::string_view kOidBasicConstraints = "2.5.29.19";
inline constexpr std::string_view kOidCommonName = "2.5.4.3";

struct Certificate {
   Bytes der;      // the whole certificate
   Bytes raw_tbs;  // exact TBSCertificate bytes, the signed message
   BigUint serial;
   Bytes issuer;   // Name, DER as received
   Bytes subject;  // Name, DER as received
   int64_t not_before = 0;  // seconds since 1970, UTC
   int64_t not_after = 0;
   std::shared_ptr<const ecc::CurveParams> curve;
   std::optional<AffinePoint> public_key;
   std::string sig_alg;
   EcdsaSignature signature;
   bool is_ca = false;  // basicConstraints cA, passed through

   const AffinePoint& key() const { return *public_key; }
};

/**
 * Strict DER parse. MalformedInput for structural problems, UnsupportedAlgorithm
 * for non-ECDSA signatures or non-EC keys, UnsupportedCurve for unregistered
 * curve OIDs and ValidationError for keys that are not valid curve points.
 */
Certificate x509_parse(ByteSpan der);

enum class CertStatus { Ok, BadSignature, Expired, NotYetValid, IssuerMismatch, WrongCurve };
std::string_view cert_status_name(CertStatus s);

/// Signature over raw_tbs with the issuer key, then the validity window at `now`.
CertStatus x509_verify(const Certificate& cert, const AffinePoint& issuer_key, int64_t now, CombCache& cache);

/// Leaf issued by the trust anchor (chains are at most anchor -> leaf).
CertStatus verify_chain(const Certificate& leaf, const Certificate& anchor, int64_t now, CombCache& cache);

/// DER Name with a single commonName attribute.
Bytes make_name(std::string_view common_name);
/// Printable form of a Name: the commonName if present, else hex.
std::string name_to_string(ByteSpan name_der);

/// Certificate issuance for test fixtures and the key-generation tool.
struct CertificateRequest {
   BigUint serial{1};
   std::string issuer_cn;
   std::string subject_cn;
   int64_t not_before = 0;
   int64_t not_after = 0;
   AffinePoint subject_key;
   bool is_ca = false;
};

Bytes issue_certificate(const CertificateRequest& req, const KeyPair& issuer, CombCache& cache);

struct CachedCertInfo {
   Bytes subject;
   std::shared_ptr<const ecc::CurveParams> curve;
   AffinePoint public_key;
};

/// Fingerprint (SHA-256 of the full DER) -> subject and key of a certificate
/// that was fully verified earlier. LRU, capacity 4 by default.
class CertCache {
 public:
   static constexpr size_t kDefaultCapacity = 4;

   explicit CertCache(size_t capacity = kDefaultCapacity);

   std::optional<CachedCertInfo> check(ByteSpan der);
   void insert(const Certificate& verified);

   /// Re-inserts an entry saved from an earlier process, as most recent.
   void restore(const sym::Digest256& fp, CachedCertInfo info);
   /// Entries from most to least recently used.
   std::vector<std::pair<sym::Digest256, CachedCertInfo>> entries() const;

   size_t size() const { return m_entries.size(); }
   void clear() { m_entries.clear(); }

 private:
   struct Entry {
      sym::Digest256 fingerprint;
      CachedCertInfo info;
   };
   size_t m_capacity;
   std::list<Entry> m_entries;
};

sym::Digest256 fingerprint(ByteSpan der);

}  // namespace dte::pki
