#include "dte/dtls/credentials.hpp"

#include "dte/errors.hpp"
#include "dte/textconf.hpp"

#include <fstream>
#include <sstream>

namespace dte::dtls {

namespace fs = std::filesystem;

namespace {

Credential issue(const std::shared_ptr<const ecc::CurveParams>& curve, const pki::KeyPair* issuer,
                 const std::string& issuer_cn, const std::string& cn, uint64_t serial, bool is_ca,
                 sym::HmacDrbg& drbg, ecc::CombCache& cache, int64_t nb, int64_t na) {
   auto key = std::make_shared<const pki::KeyPair>(pki::KeyPair::generate(curve, drbg, cache));
   pki::CertificateRequest req{BigUint(serial), issuer_cn, cn, nb, na, key->public_point(), is_ca};
   return Credential{key, pki::issue_certificate(req, issuer ? *issuer : *key, cache)};
}

void write_file(const fs::path& p, ByteSpan data) {
   std::ofstream out(p, std::ios::binary | std::ios::trunc);
   out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
   if(!out) {
      throw IoError("cannot write " + p.string());
   }
}

Bytes read_file(const fs::path& p) {
   std::ifstream in(p, std::ios::binary);
   if(!in) {
      throw IoError("cannot read " + p.string());
   }
   return Bytes(std::istreambuf_iterator<char>(in), {});
}

Credential load_one(const fs::path& dir, const std::string& name, ecc::CombCache& cache,
                    std::shared_ptr<const ecc::CurveParams>& curve) {
   const Bytes cert_der = read_file(dir / (name + ".der"));
   const Bytes key_text = read_file(dir / (name + ".key"));
   const auto sections = parse_conf(std::string_view(reinterpret_cast<const char*>(key_text.data()), key_text.size()));
   if(sections.empty()) {
      throw MalformedInput(name + ".key is empty");
   }
   const auto& s = sections.front();
   auto c = ecc::CurveRegistry::builtin().find(s.at("curve"));
   if(curve && curve->id() != c->id()) {
      throw MalformedInput("credentials on different curves");
   }
   curve = c;
   const auto cert = pki::x509_parse(cert_der);
   auto key = std::make_shared<const pki::KeyPair>(
      pki::KeyPair::from_parts(c, BigUint::from_hex(s.at("private")), cert.key(), cache));
   return Credential{key, cert_der};
}

}  // namespace

CredentialSet generate_credentials(std::shared_ptr<const ecc::CurveParams> curve, sym::HmacDrbg& drbg,
                                   ecc::CombCache& cache, int64_t not_before, int64_t not_after) {
   CredentialSet set;
   set.curve = curve;
   set.ca = issue(curve, nullptr, "DTE Root CA", "DTE Root CA", 1, true, drbg, cache, not_before, not_after);
   set.server = issue(curve, set.ca.key.get(), "DTE Root CA", "server.dte", 2, false, drbg, cache, not_before, not_after);
   set.client = issue(curve, set.ca.key.get(), "DTE Root CA", "client.dte", 3, false, drbg, cache, not_before, not_after);
   set.anchor = std::make_shared<const pki::Certificate>(pki::x509_parse(set.ca.certificate));
   return set;
}

void save_credentials(const CredentialSet& set, const fs::path& dir) {
   std::error_code ec;
   fs::create_directories(dir, ec);
   if(ec) {
      throw IoError("cannot create " + dir.string() + ": " + ec.message());
   }
   for(const auto& [name, cred] : {std::pair{"ca", &set.ca}, std::pair{"server", &set.server},
                                   std::pair{"client", &set.client}}) {
      write_file(dir / (std::string(name) + ".der"), cred->certificate);
      const size_t len = (set.curve->order().bitlen() + 7) / 8;
      const std::string text = "curve = " + set.curve->id() + "\nprivate = " +
                               to_hex(cred->key->private_scalar().to_bytes(len)) + "\n";
      write_file(dir / (std::string(name) + ".key"), as_bytes(text));
   }
}

CredentialSet load_credentials(const fs::path& dir, ecc::CombCache& cache) {
   CredentialSet set;
   set.ca = load_one(dir, "ca", cache, set.curve);
   set.server = load_one(dir, "server", cache, set.curve);
   set.client = load_one(dir, "client", cache, set.curve);
   set.anchor = std::make_shared<const pki::Certificate>(pki::x509_parse(set.ca.certificate));
   return set;
}

void save_cert_cache(const pki::CertCache& cache, const fs::path& file) {
   std::string text;
   auto entries = cache.entries();
   // oldest first so restoring in file order rebuilds the same recency order
   for(auto it = entries.rbegin(); it != entries.rend(); ++it) {
      const auto& [fp, info] = *it;
      text += "[entry]\nfingerprint = " + to_hex(fp) + "\nsubject = " + to_hex(info.subject) +
              "\ncurve = " + info.curve->id() + "\npublic = " + to_hex(info.public_key.encode()) + "\n\n";
   }
   write_file(file, as_bytes(text));
}

pki::CertCache load_cert_cache(const fs::path& file) {
   pki::CertCache cache;
   if(!fs::exists(file)) {
      return cache;
   }
   const Bytes raw = read_file(file);
   for(const auto& s : parse_conf(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()))) {
      if(s.name.empty() && s.values.empty()) {
         continue;
      }
      if(s.name != "entry") {
         throw MalformedInput("unexpected section [" + s.name + "] in certificate cache file");
      }
      const Bytes fp = from_hex(s.at("fingerprint"));
      if(fp.size() != 32) {
         throw MalformedInput("certificate fingerprint must be 32 bytes");
      }
      sym::Digest256 d;
      std::copy(fp.begin(), fp.end(), d.begin());
      auto curve = ecc::CurveRegistry::builtin().find(s.at("curve"));
      cache.restore(d, pki::CachedCertInfo{from_hex(s.at("subject")), curve,
                                           ecc::AffinePoint::decode(*curve, from_hex(s.at("public")))});
   }
   return cache;
}

EndpointConfig endpoint_config(const CredentialSet& set, Role role, ByteSpan seed, int64_t now,
                               ecc::CombCache& comb_cache) {
   EndpointConfig cfg;
   cfg.role = role;
   cfg.curve = set.curve;
   const Credential& own = role == Role::Client ? set.client : set.server;
   cfg.key = own.key;
   cfg.certificate = own.certificate;
   cfg.trust_anchor = set.anchor;
   cfg.seed.assign(seed.begin(), seed.end());
   cfg.now = now;
   cfg.comb_cache = &comb_cache;
   return cfg;
}

}  // namespace dte::dtls
