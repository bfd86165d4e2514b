// HMAC_DRBG with SHA-256 (SP 800-90A), no prediction resistance.
#pragma once

#include "dte/bytes.hpp"

#include <array>
#include <cstdint>

namespace dte::sym {

class HmacDrbg {
 public:
   static constexpr uint64_t kReseedInterval = uint64_t(1) << 48;
   static constexpr size_t kMaxRequest = 1 << 16;

   HmacDrbg(ByteSpan entropy, ByteSpan nonce, ByteSpan personalization);
   ~HmacDrbg();

   HmacDrbg(const HmacDrbg&) = default;
   HmacDrbg& operator=(const HmacDrbg&) = default;

   /// Throws ReseedRequired past the reseed interval, UsageError above kMaxRequest.
   Bytes generate(size_t n, ByteSpan additional = {});
   void generate_into(std::span<uint8_t> out, ByteSpan additional = {});

   void reseed(ByteSpan entropy, ByteSpan additional = {});

   uint64_t reseed_counter() const { return m_reseed_counter; }
   /// Test hook for exercising the reseed bound without 2^48 calls.
   void set_reseed_counter(uint64_t v) { m_reseed_counter = v; }

 private:
   void update(std::initializer_list<ByteSpan> provided);

   std::array<uint8_t, 32> m_k;
   std::array<uint8_t, 32> m_v;
   uint64_t m_reseed_counter;
};

}  // namespace dte::sym
