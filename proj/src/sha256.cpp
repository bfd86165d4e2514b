#include "dte/sha256.hpp"

#include "dte/counters.hpp"

#include <bit>
#include <cstring>

namespace dte::sym {

namespace {

constexpr uint32_t K[64] = {
   0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
   0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
   0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
   0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
   0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
   0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
   0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
   0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
};

uint32_t load_be32(const uint8_t* p) {
   return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

}  // namespace

void Sha256::reset() {
   m_h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
   m_buf_len = 0;
   m_total = 0;
}

void Sha256::compress(const uint8_t block[64]) {
   metrics::count(metrics::Op::ShaCompress);
   uint32_t w[64];
   for(int i = 0; i < 16; ++i) {
      w[i] = load_be32(block + 4 * i);
   }
   for(int i = 16; i < 64; ++i) {
      uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
   }
   uint32_t a = m_h[0], b = m_h[1], c = m_h[2], d = m_h[3];
   uint32_t e = m_h[4], f = m_h[5], g = m_h[6], h = m_h[7];
   for(int i = 0; i < 64; ++i) {
      uint32_t S1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t t1 = h + S1 + ch + K[i] + w[i];
      uint32_t S0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t t2 = S0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
   }
   m_h[0] += a;
   m_h[1] += b;
   m_h[2] += c;
   m_h[3] += d;
   m_h[4] += e;
   m_h[5] += f;
   m_h[6] += g;
   m_h[7] += h;
}

void Sha256::update(ByteSpan data) {
   m_total += data.size();
   size_t off = 0;
   if(m_buf_len > 0) {
      size_t take = std::min(data.size(), 64 - m_buf_len);
      std::memcpy(m_buf.data() + m_buf_len, data.data(), take);
      m_buf_len += take;
      off = take;
      if(m_buf_len < 64) {
         return;
      }
      compress(m_buf.data());
      m_buf_len = 0;
   }
   while(data.size() - off >= 64) {
      compress(data.data() + off);
      off += 64;
   }
   if(off < data.size()) {
      std::memcpy(m_buf.data(), data.data() + off, data.size() - off);
      m_buf_len = data.size() - off;
   }
}

Digest256 Sha256::final() {
   const uint64_t bits = m_total * 8;
   m_buf[m_buf_len++] = 0x80;
   if(m_buf_len > 56) {
      std::memset(m_buf.data() + m_buf_len, 0, 64 - m_buf_len);
      compress(m_buf.data());
      m_buf_len = 0;
   }
   std::memset(m_buf.data() + m_buf_len, 0, 56 - m_buf_len);
   for(int i = 0; i < 8; ++i) {
      m_buf[56 + i] = static_cast<uint8_t>(bits >> (56 - 8 * i));
   }
   compress(m_buf.data());

   Digest256 out;
   for(int i = 0; i < 8; ++i) {
      out[4 * i] = static_cast<uint8_t>(m_h[i] >> 24);
      out[4 * i + 1] = static_cast<uint8_t>(m_h[i] >> 16);
      out[4 * i + 2] = static_cast<uint8_t>(m_h[i] >> 8);
      out[4 * i + 3] = static_cast<uint8_t>(m_h[i]);
   }
   reset();
   return out;
}

Digest256 sha256(ByteSpan msg) {
   Sha256 h;
   h.update(msg);
   return h.final();
}

HmacSha256::HmacSha256(ByteSpan key) {
   std::array<uint8_t, 64> k{};
   if(key.size() > 64) {
      auto d = sha256(key);
      std::memcpy(k.data(), d.data(), d.size());
   } else if(!key.empty()) {
      std::memcpy(k.data(), key.data(), key.size());
   }
   std::array<uint8_t, 64> pad;
   for(size_t i = 0; i < 64; ++i) {
      pad[i] = k[i] ^ 0x36;
   }
   m_inner.update(pad);
   for(size_t i = 0; i < 64; ++i) {
      pad[i] = k[i] ^ 0x5c;
   }
   m_outer.update(pad);
   secure_zero(k);
}

Digest256 HmacSha256::final() {
   metrics::count(metrics::Op::Hmac);
   auto inner = m_inner.final();
   m_outer.update(inner);
   return m_outer.final();
}

Digest256 hmac_sha256(ByteSpan key, ByteSpan msg) {
   HmacSha256 h(key);
   h.update(msg);
   return h.final();
}

Bytes tls_prf_sha256(ByteSpan secret, ByteSpan label, ByteSpan seed, size_t n) {
   const Bytes label_seed = concat({label, seed});
   Bytes out;
   out.reserve(n + 32);
   // the padded key blocks are absorbed once and the keyed state is copied per call
   const HmacSha256 keyed(secret);
   auto mac = [&keyed](std::initializer_list<ByteSpan> parts) {
      HmacSha256 h = keyed;
      for(auto p : parts) {
         h.update(p);
      }
      return h.final();
   };
   Digest256 a = mac({label_seed});  // A(1)
   while(out.size() < n) {
      auto block = mac({a, label_seed});
      out.insert(out.end(), block.begin(), block.end());
      if(out.size() < n) {
         a = mac({a});
      }
   }
   out.resize(n);
   return out;
}

}  // namespace dte::sym
