// SHA-256, HMAC-SHA256 and the TLS 1.2 PRF built on them.
#pragma once

#include "dte/bytes.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace dte::sym {

using Digest256 = std::array<uint8_t, 32>;

class Sha256 {
 public:
   Sha256() { reset(); }

   void reset();
   void update(ByteSpan data);
   void update(std::string_view s) { update(as_bytes(s)); }
   /// Finishes the hash and resets the context.
   Digest256 final();

   /// Copying a context forks the running hash (used for transcript snapshots).
   Sha256(const Sha256&) = default;
   Sha256& operator=(const Sha256&) = default;

 private:
   void compress(const uint8_t block[64]);

   std::array<uint32_t, 8> m_h;
   std::array<uint8_t, 64> m_buf;
   size_t m_buf_len;
   uint64_t m_total;
};

Digest256 sha256(ByteSpan msg);
Digest256 hmac_sha256(ByteSpan key, ByteSpan msg);

class HmacSha256 {
 public:
   explicit HmacSha256(ByteSpan key);
   void update(ByteSpan data) { m_inner.update(data); }
   Digest256 final();

 private:
   Sha256 m_inner;
   Sha256 m_outer;
};

/// First n bytes of P_SHA256(secret, label || seed).
Bytes tls_prf_sha256(ByteSpan secret, ByteSpan label, ByteSpan seed, size_t n);

inline Bytes to_bytes(const Digest256& d) { return Bytes(d.begin(), d.end()); }

}  // namespace dte::sym
