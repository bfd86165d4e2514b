// AES-128 (FIPS 197) and GCM (SP 800-38D) with a 4-bit GHASH table.
#pragma once

#include "dte/bytes.hpp"

#include <array>
#include <cstdint>

namespace dte::sym {

class Aes128 {
 public:
   explicit Aes128(ByteSpan key);
   ~Aes128();

   void encrypt_block(const uint8_t in[16], uint8_t out[16]) const;

 private:
   std::array<uint8_t, 176> m_rk;
};

class AesGcm {
 public:
   explicit AesGcm(ByteSpan key);

   /// Returns ciphertext || 16-byte tag. Any IV length is accepted; 12 bytes is the fast path.
   Bytes seal(ByteSpan iv, ByteSpan aad, ByteSpan plaintext) const;

   /// Throws MalformedInput on input shorter than a tag and AuthenticationFailure
   /// on tag mismatch; no plaintext is released unless the tag verifies.
   Bytes open(ByteSpan iv, ByteSpan aad, ByteSpan ciphertext_and_tag) const;

 private:
   using Block = std::array<uint8_t, 16>;

   void gmul(Block& x) const;
   Block ghash(ByteSpan aad, ByteSpan ct) const;
   Block initial_counter(ByteSpan iv) const;
   void ctr(Block counter, ByteSpan in, uint8_t* out) const;

   Aes128 m_aes;
   std::array<uint64_t, 16> m_hl{}, m_hh{};
};

/// Session key material: AES key plus the 4-byte implicit nonce salt.
struct AeadKey {
   std::array<uint8_t, 16> key{};
   std::array<uint8_t, 4> salt{};
};

Bytes aes_gcm_seal(const AeadKey& key, ByteSpan explicit_nonce, ByteSpan aad, ByteSpan plaintext);
Bytes aes_gcm_open(const AeadKey& key, ByteSpan explicit_nonce, ByteSpan aad, ByteSpan ciphertext_and_tag);

}  // namespace dte::sym
