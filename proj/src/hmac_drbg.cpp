#include "dte/hmac_drbg.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"
#include "dte/sha256.hpp"

#include <algorithm>

namespace dte::sym {

HmacDrbg::HmacDrbg(ByteSpan entropy, ByteSpan nonce, ByteSpan personalization) {
   m_k.fill(0x00);
   m_v.fill(0x01);
   update({entropy, nonce, personalization});
   m_reseed_counter = 1;
}

HmacDrbg::~HmacDrbg() {
   secure_zero(m_k);
   secure_zero(m_v);
}

void HmacDrbg::update(std::initializer_list<ByteSpan> provided) {
   bool empty = true;
   for(auto p : provided) {
      empty = empty && p.empty();
   }
   for(uint8_t round : {uint8_t(0x00), uint8_t(0x01)}) {
      if(round == 0x01 && empty) {
         break;
      }
      HmacSha256 h(m_k);
      h.update(m_v);
      h.update(ByteSpan(&round, 1));
      for(auto p : provided) {
         h.update(p);
      }
      m_k = h.final();
      HmacSha256 v(m_k);
      v.update(m_v);
      m_v = v.final();
   }
}

void HmacDrbg::reseed(ByteSpan entropy, ByteSpan additional) {
   update({entropy, additional});
   m_reseed_counter = 1;
}

void HmacDrbg::generate_into(std::span<uint8_t> out, ByteSpan additional) {
   if(out.size() > kMaxRequest) {
      throw UsageError("DRBG request larger than 65536 bytes");
   }
   if(m_reseed_counter > kReseedInterval) {
      throw ReseedRequired("DRBG reseed interval exhausted");
   }
   metrics::count(metrics::Op::DrbgGenerate);
   if(!additional.empty()) {
      update({additional});
   }
   const HmacSha256 keyed(m_k);
   size_t off = 0;
   while(off < out.size()) {
      HmacSha256 h = keyed;
      h.update(m_v);
      m_v = h.final();
      size_t n = std::min(out.size() - off, m_v.size());
      std::copy_n(m_v.begin(), n, out.begin() + off);
      off += n;
   }
   update({additional});
   m_reseed_counter += 1;
}

Bytes HmacDrbg::generate(size_t n, ByteSpan additional) {
   Bytes out(n);
   generate_into(out, additional);
   return out;
}

}  // namespace dte::sym
