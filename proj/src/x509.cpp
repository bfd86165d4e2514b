#include "dte/x509.hpp"

#include "dte/counters.hpp"
#include "dte/der.hpp"
#include "dte/errors.hpp"

#include <algorithm>

namespace dte::pki {

namespace {

void check_sig_alg(der::Reader& alg, std::string& oid_out) {
   oid_out = alg.read_oid();
   if(oid_out != kOidEcdsaWithSha256) {
      throw UnsupportedAlgorithm("certificate signature algorithm " + oid_out);
   }
   alg.finish();  // ecdsa-with-SHA256 carries no parameters
}

void parse_extensions(der::Reader& tbs, Certificate& cert) {
   der::Reader wrapper = tbs.enter(der::context(3));
   der::Reader exts = wrapper.enter(der::kSequence);
   wrapper.finish();
   if(exts.empty()) {
      throw MalformedInput("empty extension list");
   }
   while(!exts.empty()) {
      der::Reader ext = exts.enter(der::kSequence);
      const std::string oid = ext.read_oid();
      if(!ext.empty() && ext.peek_tag() == der::kBoolean) {
         ext.read_bool();
      }
      const ByteSpan value = ext.expect(der::kOctetString).contents;
      ext.finish();
      if(oid == kOidBasicConstraints) {
         der::Reader bc(value);
         der::Reader seq = bc.enter(der::kSequence);
         bc.finish();
         if(!seq.empty() && seq.peek_tag() == der::kBoolean) {
            cert.is_ca = seq.read_bool();
         }
         if(!seq.empty()) {
            seq.read_uint();  // pathLenConstraint
         }
         seq.finish();
      }
   }
}

}  // namespace

Certificate x509_parse(ByteSpan data) {
   metrics::count(metrics::Op::X509Parse);
   Certificate cert;
   der::Reader top(data);
   const der::Element whole = top.expect(der::kSequence);
   top.finish();
   cert.der.assign(whole.raw.begin(), whole.raw.end());

   der::Reader body(whole.contents);
   const der::Element tbs_el = body.expect(der::kSequence);
   cert.raw_tbs.assign(tbs_el.raw.begin(), tbs_el.raw.end());
   {
      der::Reader alg = body.enter(der::kSequence);
      check_sig_alg(alg, cert.sig_alg);
   }
   const ByteSpan sig_bits = body.read_bit_string();
   body.finish();
   cert.signature = EcdsaSignature::from_der(sig_bits);

   der::Reader tbs(tbs_el.contents);
   if(tbs.peek_tag() != der::context(0)) {
      throw MalformedInput("only v3 certificates are supported");
   }
   {
      der::Reader ver = tbs.enter(der::context(0));
      if(ver.read_uint() != BigUint(2)) {
         throw MalformedInput("only v3 certificates are supported");
      }
      ver.finish();
   }
   {
      const auto serial_el = der::Reader(tbs).expect(der::kInteger);
      if(serial_el.contents.size() > 21) {
         throw MalformedInput("serial number longer than 20 octets");
      }
   }
   cert.serial = tbs.read_uint();
   {
      der::Reader alg = tbs.enter(der::kSequence);
      std::string inner;
      check_sig_alg(alg, inner);
      if(inner != cert.sig_alg) {
         throw MalformedInput("inner and outer signature algorithms differ");
      }
   }
   const auto issuer = tbs.expect(der::kSequence).raw;
   cert.issuer.assign(issuer.begin(), issuer.end());
   {
      der::Reader validity = tbs.enter(der::kSequence);
      cert.not_before = validity.read_time();
      cert.not_after = validity.read_time();
      validity.finish();
   }
   const auto subject = tbs.expect(der::kSequence).raw;
   cert.subject.assign(subject.begin(), subject.end());
   {
      der::Reader spki = tbs.enter(der::kSequence);
      der::Reader alg = spki.enter(der::kSequence);
      const std::string key_alg = alg.read_oid();
      if(key_alg != kOidEcPublicKey) {
         throw UnsupportedAlgorithm("subject key algorithm " + key_alg);
      }
      if(alg.empty() || alg.peek_tag() != der::kOid) {
         throw UnsupportedCurve("only named curves are supported");
      }
      const std::string curve_oid = alg.read_oid();
      alg.finish();
      const ByteSpan point = spki.read_bit_string();
      spki.finish();
      cert.curve = ecc::CurveRegistry::builtin().find_oid(curve_oid);
      if(cert.curve->kind() != ecc::CurveKind::Weierstrass) {
         throw UnsupportedCurve("certificate keys must be on a Weierstrass curve");
      }
      cert.public_key = AffinePoint::decode(*cert.curve, point);
      ecc::validate_public_point(*cert.public_key);
   }
   // issuerUniqueID / subjectUniqueID are tolerated and ignored
   for(uint8_t tag : {der::context(1, false), der::context(2, false)}) {
      if(!tbs.empty() && tbs.peek_tag() == tag) {
         tbs.next();
      }
   }
   if(!tbs.empty()) {
      parse_extensions(tbs, cert);
   }
   tbs.finish();
   return cert;
}

std::string_view cert_status_name(CertStatus s) {
   switch(s) {
      case CertStatus::Ok: return "ok";
      case CertStatus::BadSignature: return "bad-signature";
      case CertStatus::Expired: return "expired";
      case CertStatus::NotYetValid: return "not-yet-valid";
      case CertStatus::IssuerMismatch: return "issuer-mismatch";
      case CertStatus::WrongCurve: return "wrong-curve";
   }
   return "?";
}

CertStatus x509_verify(const Certificate& cert, const AffinePoint& issuer_key, int64_t now, CombCache& cache) {
   if(issuer_key.curve().kind() != ecc::CurveKind::Weierstrass) {
      return CertStatus::WrongCurve;
   }
   if(!ecdsa_verify(issuer_key, sym::sha256(cert.raw_tbs), cert.signature, cache)) {
      return CertStatus::BadSignature;
   }
   if(now < cert.not_before) {
      return CertStatus::NotYetValid;
   }
   if(now > cert.not_after) {
      return CertStatus::Expired;
   }
   return CertStatus::Ok;
}

CertStatus verify_chain(const Certificate& leaf, const Certificate& anchor, int64_t now, CombCache& cache) {
   if(leaf.issuer != anchor.subject) {
      return CertStatus::IssuerMismatch;
   }
   if(now > anchor.not_after) {
      return CertStatus::Expired;
   }
   if(now < anchor.not_before) {
      return CertStatus::NotYetValid;
   }
   return x509_verify(leaf, anchor.key(), now, cache);
}

Bytes make_name(std::string_view common_name) {
   auto cn = der::oid(kOidCommonName);
   auto value = der::utf8_string(common_name);
   auto atv = der::sequence({cn, value});
   auto rdn = der::tlv(der::kSet, atv);
   return der::sequence({rdn});
}

std::string name_to_string(ByteSpan name_der) {
   try {
      der::Reader top(name_der);
      der::Reader name = top.enter(der::kSequence);
      while(!name.empty()) {
         der::Reader rdn = name.enter(der::kSet);
         while(!rdn.empty()) {
            der::Reader atv = rdn.enter(der::kSequence);
            if(atv.read_oid() == kOidCommonName) {
               auto v = atv.next().contents;
               return std::string(v.begin(), v.end());
            }
         }
      }
   } catch(const MalformedInput&) {
   }
   return to_hex(name_der);
}

Bytes issue_certificate(const CertificateRequest& req, const KeyPair& issuer, CombCache& cache) {
   const auto& curve = req.subject_key.curve();
   if(curve.oid().empty()) {
      throw UsageError("subject curve has no OID");
   }
   auto version_int = der::integer(BigUint(2));
   auto version = der::tlv(der::context(0), version_int);
   auto serial = der::integer(req.serial);
   auto alg_oid = der::oid(kOidEcdsaWithSha256);
   auto alg = der::sequence({alg_oid});
   auto issuer_name = make_name(req.issuer_cn);
   auto nb = der::time(req.not_before);
   auto na = der::time(req.not_after);
   auto validity = der::sequence({nb, na});
   auto subject_name = make_name(req.subject_cn);
   auto key_oid = der::oid(kOidEcPublicKey);
   auto curve_oid = der::oid(curve.oid());
   auto key_alg = der::sequence({key_oid, curve_oid});
   auto key_bits = der::bit_string(req.subject_key.encode());
   auto spki = der::sequence({key_alg, key_bits});

   Bytes exts;
   if(req.is_ca) {
      auto bc_true = der::boolean(true);
      auto bc_value = der::sequence({bc_true});
      auto bc_oid = der::oid(kOidBasicConstraints);
      auto critical = der::boolean(true);
      auto bc_octets = der::octet_string(bc_value);
      auto bc = der::sequence({bc_oid, critical, bc_octets});
      auto list = der::sequence({bc});
      exts = der::tlv(der::context(3), list);
   }
   auto tbs = der::sequence({version, serial, alg, issuer_name, validity, subject_name, spki, exts});
   auto sig = ecdsa_sign_deterministic(issuer, sym::sha256(tbs), cache).to_der();
   auto sig_bits = der::bit_string(sig);
   return der::sequence({tbs, alg, sig_bits});
}

sym::Digest256 fingerprint(ByteSpan der) {
   return sym::sha256(der);
}

CertCache::CertCache(size_t capacity) : m_capacity(capacity) {
   if(capacity == 0) {
      throw UsageError("certificate cache capacity must be positive");
   }
}

std::optional<CachedCertInfo> CertCache::check(ByteSpan der) {
   const auto fp = fingerprint(der);
   for(auto it = m_entries.begin(); it != m_entries.end(); ++it) {
      if(it->fingerprint == fp) {
         metrics::count(metrics::Op::CertCacheHit);
         m_entries.splice(m_entries.begin(), m_entries, it);
         return m_entries.front().info;
      }
   }
   metrics::count(metrics::Op::CertCacheMiss);
   return std::nullopt;
}

void CertCache::insert(const Certificate& verified) {
   const auto fp = fingerprint(verified.der);
   restore(fp, CachedCertInfo{verified.subject, verified.curve, verified.key()});
}

void CertCache::restore(const sym::Digest256& fp, CachedCertInfo info) {
   std::erase_if(m_entries, [&](const Entry& e) { return e.fingerprint == fp; });
   m_entries.push_front(Entry{fp, std::move(info)});
   while(m_entries.size() > m_capacity) {
      m_entries.pop_back();
   }
}

std::vector<std::pair<sym::Digest256, CachedCertInfo>> CertCache::entries() const {
   std::vector<std::pair<sym::Digest256, CachedCertInfo>> out;
   for(const auto& e : m_entries) {
      out.emplace_back(e.fingerprint, e.info);
   }
   return out;
}

}  // namespace dte::pki
