#include "dte/aes_gcm.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"

#include <cstring>

namespace dte::sym {

namespace {

constexpr uint8_t SBOX[256] = {
   0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
   0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
   0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
   0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
   0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
   0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
   0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
   0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
   0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
   0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
   0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
   0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
   0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
   0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
   0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
   0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

uint8_t xtime(uint8_t x) {
   return static_cast<uint8_t>((x << 1) ^ ((x >> 7) * 0x1b));
}

// Reduction constants for shifting a GHASH value right by 4 bits.
constexpr uint64_t LAST4[16] = {
   0x0000, 0x1c20, 0x3840, 0x2460, 0x7080, 0x6ca0, 0x48c0, 0x54e0,
   0xe100, 0xfd20, 0xd940, 0xc560, 0x9180, 0x8da0, 0xa9c0, 0xb5e0,
};

uint64_t load_be64(const uint8_t* p) {
   uint64_t v = 0;
   for(int i = 0; i < 8; ++i) {
      v = (v << 8) | p[i];
   }
   return v;
}

void store_be64(uint8_t* p, uint64_t v) {
   for(int i = 7; i >= 0; --i) {
      p[i] = static_cast<uint8_t>(v);
      v >>= 8;
   }
}

}  // namespace

Aes128::Aes128(ByteSpan key) {
   if(key.size() != 16) {
      throw UsageError("AES-128 key must be 16 bytes");
   }
   std::memcpy(m_rk.data(), key.data(), 16);
   uint8_t rcon = 1;
   for(size_t i = 16; i < 176; i += 4) {
      uint8_t t[4] = {m_rk[i - 4], m_rk[i - 3], m_rk[i - 2], m_rk[i - 1]};
      if(i % 16 == 0) {
         uint8_t t0 = t[0];
         t[0] = SBOX[t[1]] ^ rcon;
         t[1] = SBOX[t[2]];
         t[2] = SBOX[t[3]];
         t[3] = SBOX[t0];
         rcon = xtime(rcon);
      }
      for(int j = 0; j < 4; ++j) {
         m_rk[i + j] = m_rk[i + j - 16] ^ t[j];
      }
   }
}

Aes128::~Aes128() {
   secure_zero(m_rk);
}

void Aes128::encrypt_block(const uint8_t in[16], uint8_t out[16]) const {
   metrics::count(metrics::Op::AesBlock);
   uint8_t s[16];
   for(int i = 0; i < 16; ++i) {
      s[i] = in[i] ^ m_rk[i];
   }
   for(int round = 1; round <= 10; ++round) {
      uint8_t t[16];
      // SubBytes + ShiftRows (state is column-major: s[4*c + r])
      for(int c = 0; c < 4; ++c) {
         for(int r = 0; r < 4; ++r) {
            t[4 * c + r] = SBOX[s[4 * ((c + r) % 4) + r]];
         }
      }
      if(round < 10) {
         for(int c = 0; c < 4; ++c) {
            uint8_t* col = t + 4 * c;
            uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
            uint8_t all = a0 ^ a1 ^ a2 ^ a3;
            col[0] = a0 ^ all ^ xtime(a0 ^ a1);
            col[1] = a1 ^ all ^ xtime(a1 ^ a2);
            col[2] = a2 ^ all ^ xtime(a2 ^ a3);
            col[3] = a3 ^ all ^ xtime(a3 ^ a0);
         }
      }
      for(int i = 0; i < 16; ++i) {
         s[i] = t[i] ^ m_rk[16 * round + i];
      }
   }
   std::memcpy(out, s, 16);
}

AesGcm::AesGcm(ByteSpan key) : m_aes(key) {
   Block h{};
   m_aes.encrypt_block(h.data(), h.data());
   uint64_t vh = load_be64(h.data());
   uint64_t vl = load_be64(h.data() + 8);
   m_hl[8] = vl;
   m_hh[8] = vh;
   for(int i = 4; i > 0; i >>= 1) {
      uint64_t t = (vl & 1) * 0xe1000000U;
      vl = (vh << 63) | (vl >> 1);
      vh = (vh >> 1) ^ (t << 32);
      m_hl[i] = vl;
      m_hh[i] = vh;
   }
   for(int i = 2; i <= 8; i *= 2) {
      for(int j = 1; j < i; ++j) {
         m_hh[i + j] = m_hh[i] ^ m_hh[j];
         m_hl[i + j] = m_hl[i] ^ m_hl[j];
      }
   }
}

void AesGcm::gmul(Block& x) const {
   metrics::count(metrics::Op::GhashBlock);
   uint8_t lo = x[15] & 0xf;
   uint64_t zh = m_hh[lo];
   uint64_t zl = m_hl[lo];
   for(int i = 15; i >= 0; --i) {
      lo = x[i] & 0xf;
      uint8_t hi = x[i] >> 4;
      if(i != 15) {
         uint8_t rem = zl & 0xf;
         zl = (zh << 60) | (zl >> 4);
         zh = (zh >> 4) ^ (LAST4[rem] << 48);
         zh ^= m_hh[lo];
         zl ^= m_hl[lo];
      }
      uint8_t rem = zl & 0xf;
      zl = (zh << 60) | (zl >> 4);
      zh = (zh >> 4) ^ (LAST4[rem] << 48);
      zh ^= m_hh[hi];
      zl ^= m_hl[hi];
   }
   store_be64(x.data(), zh);
   store_be64(x.data() + 8, zl);
}

namespace {

void ghash_absorb(auto&& mul, std::array<uint8_t, 16>& y, ByteSpan data) {
   for(size_t off = 0; off < data.size(); off += 16) {
      size_t n = std::min<size_t>(16, data.size() - off);
      for(size_t i = 0; i < n; ++i) {
         y[i] ^= data[off + i];
      }
      mul(y);
   }
}

}  // namespace

AesGcm::Block AesGcm::ghash(ByteSpan aad, ByteSpan ct) const {
   Block y{};
   auto mul = [this](Block& b) { gmul(b); };
   ghash_absorb(mul, y, aad);
   ghash_absorb(mul, y, ct);
   Block lens;
   store_be64(lens.data(), uint64_t(aad.size()) * 8);
   store_be64(lens.data() + 8, uint64_t(ct.size()) * 8);
   for(int i = 0; i < 16; ++i) {
      y[i] ^= lens[i];
   }
   gmul(y);
   return y;
}

AesGcm::Block AesGcm::initial_counter(ByteSpan iv) const {
   Block j0{};
   if(iv.size() == 12) {
      std::memcpy(j0.data(), iv.data(), 12);
      j0[15] = 1;
      return j0;
   }
   auto mul = [this](Block& b) { gmul(b); };
   ghash_absorb(mul, j0, iv);
   Block lens{};
   store_be64(lens.data() + 8, uint64_t(iv.size()) * 8);
   for(int i = 0; i < 16; ++i) {
      j0[i] ^= lens[i];
   }
   gmul(j0);
   return j0;
}

void AesGcm::ctr(Block counter, ByteSpan in, uint8_t* out) const {
   Block ks;
   for(size_t off = 0; off < in.size(); off += 16) {
      // inc32 on the low word
      for(int i = 15; i >= 12; --i) {
         if(++counter[i] != 0) {
            break;
         }
      }
      m_aes.encrypt_block(counter.data(), ks.data());
      size_t n = std::min<size_t>(16, in.size() - off);
      for(size_t i = 0; i < n; ++i) {
         out[off + i] = in[off + i] ^ ks[i];
      }
   }
}

Bytes AesGcm::seal(ByteSpan iv, ByteSpan aad, ByteSpan plaintext) const {
   if(iv.empty()) {
      throw UsageError("GCM IV must not be empty");
   }
   const Block j0 = initial_counter(iv);
   Bytes out(plaintext.size() + 16);
   ctr(j0, plaintext, out.data());
   Block s = ghash(aad, ByteSpan(out.data(), plaintext.size()));
   Block ek;
   m_aes.encrypt_block(j0.data(), ek.data());
   for(int i = 0; i < 16; ++i) {
      out[plaintext.size() + i] = s[i] ^ ek[i];
   }
   metrics::count(metrics::Op::BytesSealed, plaintext.size());
   return out;
}

Bytes AesGcm::open(ByteSpan iv, ByteSpan aad, ByteSpan ciphertext_and_tag) const {
   if(ciphertext_and_tag.size() < 16) {
      throw MalformedInput("GCM input shorter than the tag");
   }
   if(iv.empty()) {
      throw UsageError("GCM IV must not be empty");
   }
   const size_t ct_len = ciphertext_and_tag.size() - 16;
   auto ct = ciphertext_and_tag.first(ct_len);
   const Block j0 = initial_counter(iv);
   Block s = ghash(aad, ct);
   Block ek;
   m_aes.encrypt_block(j0.data(), ek.data());
   for(int i = 0; i < 16; ++i) {
      s[i] ^= ek[i];
   }
   if(!constant_time_equal(s, ciphertext_and_tag.subspan(ct_len))) {
      throw AuthenticationFailure("GCM tag mismatch");
   }
   Bytes pt(ct_len);
   ctr(j0, ct, pt.data());
   metrics::count(metrics::Op::BytesOpened, ct_len);
   return pt;
}

namespace {

std::array<uint8_t, 12> full_nonce(const AeadKey& key, ByteSpan explicit_nonce) {
   if(explicit_nonce.size() != 8) {
      throw UsageError("explicit nonce must be 8 bytes");
   }
   std::array<uint8_t, 12> iv;
   std::memcpy(iv.data(), key.salt.data(), 4);
   std::memcpy(iv.data() + 4, explicit_nonce.data(), 8);
   return iv;
}

}  // namespace

Bytes aes_gcm_seal(const AeadKey& key, ByteSpan explicit_nonce, ByteSpan aad, ByteSpan plaintext) {
   return AesGcm(key.key).seal(full_nonce(key, explicit_nonce), aad, plaintext);
}

Bytes aes_gcm_open(const AeadKey& key, ByteSpan explicit_nonce, ByteSpan aad, ByteSpan ciphertext_and_tag) {
   return AesGcm(key.key).open(full_nonce(key, explicit_nonce), aad, ciphertext_and_tag);
}

}  // namespace dte::sym
