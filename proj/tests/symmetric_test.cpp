#include "dte/aes_gcm.hpp"
#include "dte/counters.hpp"
#include "dte/errors.hpp"
#include "dte/hmac_drbg.hpp"
#include "dte/sha256.hpp"
#include "kat_files.hpp"

#include <gtest/gtest.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <random>

using namespace dte;
using namespace dte::sym;

namespace {

Bytes random_bytes(std::mt19937_64& rng, size_t n) {
   Bytes b(n);
   for(auto& x : b) {
      x = static_cast<uint8_t>(rng());
   }
   return b;
}

Bytes openssl_hmac(ByteSpan key, ByteSpan msg) {
   unsigned char out[32];
   unsigned int len = 0;
   static const uint8_t dummy = 0;
   HMAC(EVP_sha256(), key.empty() ? &dummy : key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), out, &len);
   return Bytes(out, out + len);
}

Bytes openssl_gcm_seal(ByteSpan key, ByteSpan iv, ByteSpan aad, ByteSpan pt) {
   EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
   EVP_EncryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, nullptr, nullptr);
   EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(iv.size()), nullptr);
   EVP_EncryptInit_ex(ctx, nullptr, nullptr, key.data(), iv.data());
   int len = 0;
   if(!aad.empty()) {
      EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size()));
   }
   Bytes out(pt.size() + 16);
   if(!pt.empty()) {
      EVP_EncryptUpdate(ctx, out.data(), &len, pt.data(), static_cast<int>(pt.size()));
   }
   EVP_EncryptFinal_ex(ctx, out.data() + pt.size(), &len);
   EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, 16, out.data() + pt.size());
   EVP_CIPHER_CTX_free(ctx);
   return out;
}

}  // namespace

TEST(Sha256, KnownAnswers) {
   EXPECT_EQ(to_hex(to_bytes(sha256({}))), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
   EXPECT_EQ(to_hex(to_bytes(sha256(as_bytes("abc")))),
             "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
   size_t n = 0;
   for(const auto& r : testkat::load("sha256.txt")) {
      EXPECT_EQ(to_hex(to_bytes(sha256(testkat::hex(r, "Msg")))), r.at("Output"));
      ++n;
   }
   EXPECT_GT(n, 60u);
}

TEST(Sha256, IncrementalMatchesOneShot) {
   Sha256 h;
   h.update("ab");
   h.update("c");
   EXPECT_EQ(h.final(), sha256(as_bytes("abc")));

   std::mt19937_64 rng(7);
   const Bytes msg = random_bytes(rng, 1024);
   const auto expect = sha256(msg);
   for(size_t split = 0; split <= msg.size(); ++split) {
      Sha256 inc;
      inc.update(ByteSpan(msg).first(split));
      inc.update(ByteSpan(msg).subspan(split));
      ASSERT_EQ(inc.final(), expect) << "split " << split;
   }
}

TEST(Sha256, CountsOneCompressionPerBlock) {
   metrics::CounterScope scope("sha");
   sha256(Bytes(55));  // one block with padding
   sha256(Bytes(56));  // padding spills into a second block
   EXPECT_EQ(scope.close()[metrics::Op::ShaCompress], 3u);
}

TEST(HmacSha256, KnownAnswers) {
   EXPECT_EQ(to_hex(to_bytes(hmac_sha256(Bytes(20, 0x0b), as_bytes("Hi There")))),
             "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
   size_t n = 0;
   for(const auto& r : testkat::load("hmac_sha256.txt")) {
      auto mac = to_hex(to_bytes(hmac_sha256(testkat::hex(r, "Key"), testkat::hex(r, "Msg"))));
      // RFC 4231 case 5 publishes a truncated tag
      EXPECT_EQ(mac.substr(0, r.at("Output").size()), r.at("Output"));
      ++n;
   }
   EXPECT_GE(n, 6u);
}

TEST(HmacSha256, MatchesIndependentImplementation) {
   EXPECT_EQ(to_bytes(hmac_sha256({}, {})), openssl_hmac({}, {}));
   std::mt19937_64 rng(11);
   for(int i = 0; i < 300; ++i) {
      auto key = random_bytes(rng, rng() % 150);
      auto msg = random_bytes(rng, rng() % 300);
      ASSERT_EQ(to_bytes(hmac_sha256(key, msg)), openssl_hmac(key, msg));
   }
}

TEST(HmacSha256, DistinctMessagesGiveDistinctTags) {
   std::mt19937_64 rng(12);
   for(int i = 0; i < 200; ++i) {
      auto key = random_bytes(rng, 32);
      auto m = random_bytes(rng, 1 + rng() % 64);
      auto m2 = m;
      m2[rng() % m2.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
      EXPECT_NE(hmac_sha256(key, m), hmac_sha256(key, m2));
   }
}

TEST(Aes128, KnownAnswers) {
   Aes128 aes(from_hex("000102030405060708090a0b0c0d0e0f"));
   auto pt = from_hex("00112233445566778899aabbccddeeff");
   uint8_t ct[16];
   aes.encrypt_block(pt.data(), ct);
   EXPECT_EQ(to_hex(ByteSpan(ct, 16)), "69c4e0d86a7b0430d8cdb78070b4c55a");
   size_t n = 0;
   for(const auto& r : testkat::load("aes128.txt")) {
      Aes128 a(testkat::hex(r, "Key"));
      auto m = testkat::hex(r, "Msg");
      a.encrypt_block(m.data(), ct);
      EXPECT_EQ(to_hex(ByteSpan(ct, 16)), r.at("Output"));
      ++n;
   }
   EXPECT_GT(n, 100u);
}

TEST(AesGcm, KnownAnswers) {
   AesGcm zero(Bytes(16, 0));
   EXPECT_EQ(to_hex(zero.seal(Bytes(12, 0), {}, {})), "58e2fccefa7e3061367f1d57a4e7455a");
   size_t n = 0;
   for(const auto& r : testkat::load("aes128_gcm.txt")) {
      AesGcm g(testkat::hex(r, "Key"));
      auto iv = testkat::hex(r, "IV");
      auto aad = testkat::hex(r, "AAD");
      auto out = g.seal(iv, aad, testkat::hex(r, "Msg"));
      ASSERT_EQ(to_hex(out), r.at("Output")) << "record " << n;
      EXPECT_EQ(g.open(iv, aad, out), testkat::hex(r, "Msg"));
      ++n;
   }
   EXPECT_GT(n, 1000u);
}

TEST(AesGcm, RoundTripAllLengthsAgainstIndependentImplementation) {
   std::mt19937_64 rng(13);
   AeadKey key;
   for(auto& b : key.key) {
      b = static_cast<uint8_t>(rng());
   }
   for(auto& b : key.salt) {
      b = static_cast<uint8_t>(rng());
   }
   for(size_t len = 0; len <= 512; ++len) {
      auto nonce = random_bytes(rng, 8);
      auto aad = random_bytes(rng, rng() % 40);
      auto pt = random_bytes(rng, len);
      auto sealed = aes_gcm_seal(key, nonce, aad, pt);
      ASSERT_EQ(sealed.size(), len + 16);
      ASSERT_EQ(aes_gcm_open(key, nonce, aad, sealed), pt);
      ASSERT_EQ(sealed, openssl_gcm_seal(key.key, concat({key.salt, nonce}), aad, pt));
   }
}

TEST(AesGcm, TamperingIsRejected) {
   std::mt19937_64 rng(14);
   AeadKey key{};
   auto nonce = random_bytes(rng, 8);
   auto aad = random_bytes(rng, 13);
   auto pt = random_bytes(rng, 100);
   auto sealed = aes_gcm_seal(key, nonce, aad, pt);
   for(size_t i = 0; i < sealed.size(); ++i) {
      auto bad = sealed;
      bad[i] ^= 0x01;
      EXPECT_THROW(aes_gcm_open(key, nonce, aad, bad), AuthenticationFailure);
   }
   auto bad_aad = aad;
   bad_aad[0] ^= 0x80;
   EXPECT_THROW(aes_gcm_open(key, nonce, bad_aad, sealed), AuthenticationFailure);
   EXPECT_THROW(aes_gcm_open(key, nonce, aad, Bytes(15)), MalformedInput);
}

TEST(HmacDrbg, CavpVectors) {
   size_t n = 0;
   for(const auto& r : testkat::load("hmac_drbg_sha256.txt")) {
      HmacDrbg drbg(testkat::hex(r, "Entropy"), testkat::hex(r, "Nonce"), testkat::hex(r, "Pers"));
      const size_t len = r.at("Output").size() / 2;
      drbg.generate(len, testkat::hex(r, "Add1"));
      EXPECT_EQ(to_hex(drbg.generate(len, testkat::hex(r, "Add2"))), r.at("Output"));
      ++n;
   }
   EXPECT_GE(n, 15u);
}

TEST(HmacDrbg, DeterministicAndPersonalized) {
   Bytes ent(32, 0x42), nonce(16, 0x17);
   HmacDrbg a(ent, nonce, {}), b(ent, nonce, {}), c(ent, nonce, as_bytes("device-7"));
   for(int i = 0; i < 10; ++i) {
      auto x = a.generate(48);
      EXPECT_EQ(x, b.generate(48));
      EXPECT_NE(x, c.generate(48));
   }
}

TEST(HmacDrbg, ReseedBoundAndRequestLimit) {
   HmacDrbg d(Bytes(32, 1), Bytes(16, 2), {});
   d.set_reseed_counter(HmacDrbg::kReseedInterval);
   EXPECT_NO_THROW(d.generate(16));
   EXPECT_THROW(d.generate(16), ReseedRequired);
   d.reseed(Bytes(32, 3));
   EXPECT_EQ(d.reseed_counter(), 1u);
   EXPECT_NO_THROW(d.generate(16));
   EXPECT_THROW(d.generate(HmacDrbg::kMaxRequest + 1), UsageError);
   EXPECT_NO_THROW(d.generate(HmacDrbg::kMaxRequest));
}

TEST(TlsPrf, PublishedVectorAndShape) {
   for(const auto& r : testkat::load("tls12_prf_sha256.txt")) {
      auto out = tls_prf_sha256(testkat::hex(r, "Key"), testkat::hex(r, "Label"), testkat::hex(r, "Seed"),
                                r.at("Output").size() / 2);
      EXPECT_EQ(to_hex(out), r.at("Output"));
   }
   Bytes secret(48, 9), seed(64, 3);
   for(size_t n : {12u, 48u, 72u}) {
      EXPECT_EQ(tls_prf_sha256(secret, as_bytes("key expansion"), seed, n).size(), n);
   }
   auto a = tls_prf_sha256(secret, as_bytes("client finished"), seed, 16);
   auto b = tls_prf_sha256(secret, as_bytes("server finished"), seed, 16);
   EXPECT_NE(a, b);
}
