#include "dte/dtls/record.hpp"

#include "dte/errors.hpp"

namespace dte::dtls {

namespace {

bool known_type(uint8_t t) {
   return t >= 20 && t <= 23;
}

void put_epoch_seq(uint8_t* out, uint16_t epoch, uint64_t seq) {
   const uint64_t v = (uint64_t(epoch) << 48) | seq;
   for(int i = 0; i < 8; ++i) {
      out[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
   }
}

}  // namespace

void RecordHeader::write(Bytes& out) const {
   out.push_back(static_cast<uint8_t>(type));
   out.push_back(static_cast<uint8_t>(version >> 8));
   out.push_back(static_cast<uint8_t>(version));
   uint8_t es[8];
   put_epoch_seq(es, epoch, sequence);
   out.insert(out.end(), es, es + 8);
   out.push_back(static_cast<uint8_t>(length >> 8));
   out.push_back(static_cast<uint8_t>(length));
}

std::optional<RecordHeader> RecordHeader::parse(ByteSpan in) {
   if(in.size() < kRecordHeaderLen || !known_type(in[0])) {
      return std::nullopt;
   }
   RecordHeader h;
   h.type = static_cast<ContentType>(in[0]);
   h.version = static_cast<uint16_t>((in[1] << 8) | in[2]);
   h.epoch = static_cast<uint16_t>((in[3] << 8) | in[4]);
   h.sequence = 0;
   for(size_t i = 5; i < 11; ++i) {
      h.sequence = (h.sequence << 8) | in[i];
   }
   h.length = static_cast<uint16_t>((in[11] << 8) | in[12]);
   if(h.version != kVersion || h.length > kMaxRecordLen) {
      return std::nullopt;
   }
   return h;
}

bool ReplayWindow::is_fresh(uint64_t seq) const {
   if(!m_any || seq > m_top) {
      return true;
   }
   const uint64_t back = m_top - seq;
   if(back >= kSize) {
      return false;
   }
   return ((m_bitmap >> back) & 1) == 0;
}

void ReplayWindow::accept(uint64_t seq) {
   if(!m_any) {
      m_any = true;
      m_top = seq;
      m_bitmap = 1;
   } else if(seq > m_top) {
      const uint64_t shift = seq - m_top;
      m_bitmap = shift >= kSize ? 0 : m_bitmap << shift;
      m_bitmap |= 1;
      m_top = seq;
   } else {
      m_bitmap |= uint64_t(1) << (m_top - seq);
   }
}

std::string_view drop_reason_name(DropReason r) {
   switch(r) {
      case DropReason::Malformed: return "malformed";
      case DropReason::UnknownEpoch: return "unknown_epoch";
      case DropReason::Replay: return "replay";
      case DropReason::BadTag: return "bad_tag";
   }
   return "?";
}

std::array<uint8_t, 13> record_aad(const RecordHeader& h, size_t plaintext_len) {
   std::array<uint8_t, 13> aad{};
   put_epoch_seq(aad.data(), h.epoch, h.sequence);
   aad[8] = static_cast<uint8_t>(h.type);
   aad[9] = static_cast<uint8_t>(h.version >> 8);
   aad[10] = static_cast<uint8_t>(h.version);
   aad[11] = static_cast<uint8_t>(plaintext_len >> 8);
   aad[12] = static_cast<uint8_t>(plaintext_len);
   return aad;
}

Bytes RecordLayer::encode(ContentType type, ByteSpan payload) {
   if(payload.size() > kMaxPlaintext) {
      throw UsageError("record payload exceeds 2^14 bytes");
   }
   if(m_write_seq >= kSequenceLimit) {
      throw SessionFailure("record sequence numbers exhausted");
   }
   RecordHeader h;
   h.type = type;
   h.epoch = m_write_epoch;
   h.sequence = m_write_seq;

   Bytes out;
   if(m_write_epoch == 0) {
      h.length = static_cast<uint16_t>(payload.size());
      h.write(out);
      out.insert(out.end(), payload.begin(), payload.end());
   } else {
      h.length = static_cast<uint16_t>(kExplicitNonceLen + payload.size() + kTagLen);
      std::array<uint8_t, 12> nonce{};
      std::copy(m_write.salt.begin(), m_write.salt.end(), nonce.begin());
      put_epoch_seq(nonce.data() + 4, h.epoch, h.sequence);
      const auto aad = record_aad(h, payload.size());
      const Bytes sealed = m_write.gcm->seal(nonce, aad, payload);
      h.write(out);
      out.insert(out.end(), nonce.begin() + 4, nonce.end());
      out.insert(out.end(), sealed.begin(), sealed.end());
   }
   ++m_write_seq;
   ++m_stats.sent;
   return out;
}

DecodeOutcome RecordLayer::drop(DropReason r) {
   ++m_stats.dropped[static_cast<size_t>(r)];
   return DecodeOutcome{std::nullopt, r};
}

DecodeOutcome RecordLayer::decode(ByteSpan& datagram) {
   const auto h = RecordHeader::parse(datagram);
   if(!h || datagram.size() - kRecordHeaderLen < h->length) {
      datagram = {};
      return drop(DropReason::Malformed);
   }
   const ByteSpan fragment = datagram.subspan(kRecordHeaderLen, h->length);
   datagram = datagram.subspan(kRecordHeaderLen + h->length);

   if(h->epoch != m_read_epoch) {
      return drop(DropReason::UnknownEpoch);
   }
   if(!m_window.is_fresh(h->sequence)) {
      return drop(DropReason::Replay);
   }

   Record rec;
   rec.type = h->type;
   rec.epoch = h->epoch;
   rec.sequence = h->sequence;
   if(m_read_epoch == 0) {
      if(fragment.size() > kMaxPlaintext) {
         return drop(DropReason::Malformed);
      }
      rec.payload.assign(fragment.begin(), fragment.end());
   } else {
      if(fragment.size() < kExplicitNonceLen + kTagLen) {
         return drop(DropReason::Malformed);
      }
      std::array<uint8_t, 12> nonce{};
      std::copy(m_read.salt.begin(), m_read.salt.end(), nonce.begin());
      std::copy_n(fragment.begin(), kExplicitNonceLen, nonce.begin() + 4);
      const size_t pt_len = fragment.size() - kExplicitNonceLen - kTagLen;
      const auto aad = record_aad(*h, pt_len);
      try {
         rec.payload = m_read.gcm->open(nonce, aad, fragment.subspan(kExplicitNonceLen));
      } catch(const AuthenticationFailure&) {
         return drop(DropReason::BadTag);
      }
   }
   m_window.accept(h->sequence);
   ++m_stats.accepted;
   return DecodeOutcome{std::move(rec), DropReason::Malformed};
}

void RecordLayer::install_write_key(const sym::AeadKey& key) {
   if(m_write_epoch != 0) {
      throw UsageError("write epoch already advanced");
   }
   m_write.gcm.emplace(key.key);
   m_write.salt = key.salt;
   m_write_epoch = 1;
   m_write_seq = 0;
}

void RecordLayer::install_read_key(const sym::AeadKey& key) {
   if(m_read_epoch != 0) {
      throw UsageError("read epoch already advanced");
   }
   m_read.gcm.emplace(key.key);
   m_read.salt = key.salt;
   m_read_epoch = 1;
   m_window = ReplayWindow{};
}

}  // namespace dte::dtls
