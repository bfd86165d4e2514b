#include "dte/kat.hpp"

#include "dte/aes_gcm.hpp"
#include "dte/bytes.hpp"
#include "dte/ec_protocols.hpp"
#include "dte/errors.hpp"
#include "dte/hmac_drbg.hpp"
#include "dte/sha256.hpp"
#include "dte/textconf.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dte::kat {

namespace {

Bytes field(const Stanza& s, std::string_view key) {
   const std::string* v = s.find(key);
   if(!v) {
      throw MalformedInput("missing field " + std::string(key));
   }
   return from_hex(*v);
}

const std::string& text_field(const Stanza& s, std::string_view key) {
   const std::string* v = s.find(key);
   if(!v) {
      throw MalformedInput("missing field " + std::string(key));
   }
   return *v;
}

// Returns the computed output as hex; the caller compares with Output.
std::string compute(const Stanza& s, const std::string& expected) {
   const std::string& sec = s.section;
   if(sec == "SHA-256") {
      return to_hex(sym::to_bytes(sym::sha256(field(s, "Msg"))));
   }
   if(sec == "HMAC-SHA256") {
      // truncated tags are published for some records
      return to_hex(sym::to_bytes(sym::hmac_sha256(field(s, "Key"), field(s, "Msg")))).substr(0, expected.size());
   }
   if(sec == "AES-128") {
      sym::Aes128 aes(field(s, "Key"));
      const Bytes m = field(s, "Msg");
      if(m.size() != 16) {
         throw MalformedInput("AES block must be 16 bytes");
      }
      uint8_t out[16];
      aes.encrypt_block(m.data(), out);
      return to_hex(ByteSpan(out, 16));
   }
   if(sec == "AES-128-GCM") {
      sym::AesGcm g(field(s, "Key"));
      const Bytes iv = field(s, "IV"), aad = field(s, "AAD"), msg = field(s, "Msg");
      const Bytes sealed = g.seal(iv, aad, msg);
      if(g.open(iv, aad, sealed) != msg) {
         return "open-mismatch";
      }
      return to_hex(sealed);
   }
   if(sec == "HMAC-DRBG-SHA256") {
      sym::HmacDrbg d(field(s, "Entropy"), field(s, "Nonce"), field(s, "Pers"));
      const size_t len = expected.size() / 2;
      d.generate(len, field(s, "Add1"));
      return to_hex(d.generate(len, field(s, "Add2")));
   }
   if(sec == "TLS12-PRF-SHA256") {
      return to_hex(sym::tls_prf_sha256(field(s, "Key"), field(s, "Label"), field(s, "Seed"), expected.size() / 2));
   }
   if(sec == "ECDSA-RFC6979-SHA256") {
      auto curve = ecc::CurveRegistry::builtin().find(text_field(s, "Curve"));
      ecc::CombCache cache;
      const auto key = pki::KeyPair::from_private(curve, BigUint::from_bytes(field(s, "Key")), cache);
      const auto digest = sym::sha256(field(s, "Msg"));
      const auto sig = pki::ecdsa_sign_deterministic(key, digest, cache);
      if(!pki::ecdsa_verify(key.public_point(), digest, sig, cache)) {
         return "verify-failed";
      }
      const size_t w = (curve->order().bitlen() + 7) / 8;
      return to_hex(concat({sig.r.to_bytes(w), sig.s.to_bytes(w)}));
   }
   throw UnsupportedAlgorithm("unsupported section");
}

}  // namespace

const std::vector<std::string>& supported_sections() {
   static const std::vector<std::string> s = {"SHA-256",          "HMAC-SHA256",      "AES-128",
                                              "AES-128-GCM",      "HMAC-DRBG-SHA256", "TLS12-PRF-SHA256",
                                              "ECDSA-RFC6979-SHA256"};
   return s;
}

size_t Summary::passed() const {
   size_t n = 0;
   for(const auto& f : files) {
      n += f.passed;
   }
   return n;
}

size_t Summary::failed() const {
   size_t n = 0;
   for(const auto& f : files) {
      n += f.failed;
   }
   return n;
}

size_t Summary::errors() const {
   return static_cast<size_t>(std::count_if(files.begin(), files.end(), [](const auto& f) { return !f.error.empty(); }));
}

FileResult run_text(const std::string& name, std::string_view text) {
   FileResult r;
   r.file = name;
   std::vector<Stanza> stanzas;
   try {
      stanzas = parse_stanzas(text);
   } catch(const Error& e) {
      r.error = e.what();
      return r;
   }
   for(const auto& s : stanzas) {
      const std::string where = "line " + std::to_string(s.line) + ": [" + s.section + "] ";
      try {
         const std::string& expected = text_field(s, "Output");
         const std::string got = compute(s, expected);
         if(got == expected) {
            ++r.passed;
         } else {
            ++r.failed;
            r.failures.push_back(where + "expected " + expected + " got " + got);
         }
      } catch(const Error& e) {
         ++r.failed;
         r.failures.push_back(where + e.what());
      }
   }
   return r;
}

Summary run_directory(const std::filesystem::path& dir) {
   Summary sum;
   std::error_code ec;
   std::vector<std::filesystem::path> files;
   for(const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if(entry.path().extension() == ".txt") {
         files.push_back(entry.path());
      }
   }
   if(ec) {
      FileResult r;
      r.file = dir.string();
      r.error = "cannot list directory: " + ec.message();
      sum.files.push_back(r);
      return sum;
   }
   std::sort(files.begin(), files.end());
   for(const auto& p : files) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      if(!in) {
         FileResult r;
         r.file = p.filename().string();
         r.error = "cannot read file";
         sum.files.push_back(r);
         continue;
      }
      sum.files.push_back(run_text(p.filename().string(), ss.str()));
   }
   return sum;
}

}  // namespace dte::kat
